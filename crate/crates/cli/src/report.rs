//! Output records for every verb, with CSV encoders and decoders.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use icsim::channel::{ErasureProfile, SituationNumber};
use icsim::protocol::{Action, ControlTable, FlexibleCase, Move, QueueKind, Regime};
use icsim::region::{cornerpoints, outer_bound, CornerPoints, RatePair, SumConstraint};
use icsim::sim::{LifetimePoint, SimResult, SweepPoint, UserMetrics};

fn write_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("csv flush: {e}"))?)?)
}

fn read_rows<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.context("malformed CSV row")).collect()
}

pub fn regime_name(r: Regime) -> &'static str {
    r.name()
}

pub fn parse_regime(s: &str) -> Result<Regime> {
    [Regime::HomLow, Regime::HomMid, Regime::HomHigh, Regime::SymLowCrossLow, Regime::SymLowCrossHigh, Regime::NonHom]
        .into_iter()
        .find(|r| r.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| anyhow!("unknown regime {s:?}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub profile: ErasureProfile,
    pub caps: [f64; 2],
    pub constraints: [Option<SumConstraint>; 2],
    pub corners: CornerPoints,
    /// Boundary vertices counter-clockwise from the `l1` axis.
    pub polyline: Vec<RatePair>,
}

#[derive(Serialize, Deserialize)]
struct RegionRow {
    kind: String,
    name: String,
    x: Option<f64>,
    y: Option<f64>,
}

impl RegionReport {
    pub fn new(profile: &ErasureProfile) -> Self {
        let bound = outer_bound(profile);
        RegionReport {
            profile: *profile,
            caps: bound.caps,
            constraints: bound.constraints,
            corners: cornerpoints(&bound),
            polyline: bound.vertices(),
        }
    }

    /// Rows `erasure`, `cap`, `constraint` (x = coeff, y = rhs), `corner` and
    /// `polyline`.
    pub fn to_csv(&self) -> Result<String> {
        let row =
            |kind: &str, name: String, x: Option<f64>, y: Option<f64>| RegionRow { kind: kind.into(), name, x, y };
        let p = &self.profile;
        let mut rows = vec![
            row("erasure", "d11".into(), Some(p.d11), None),
            row("erasure", "d12".into(), Some(p.d12), None),
            row("erasure", "d21".into(), Some(p.d21), None),
            row("erasure", "d22".into(), Some(p.d22), None),
        ];
        for i in 0..2 {
            rows.push(row("cap", format!("{}", i + 1), Some(self.caps[i]), None));
            let c = self.constraints[i];
            rows.push(row("constraint", format!("{}", i + 1), c.map(|c| c.coeff), c.map(|c| c.rhs)));
        }
        for (name, c) in [("A", self.corners.a), ("B", self.corners.b), ("C", self.corners.c)] {
            rows.push(row("corner", name.into(), Some(c.l1), Some(c.l2)));
        }
        for (k, v) in self.polyline.iter().enumerate() {
            rows.push(row("polyline", k.to_string(), Some(v.l1), Some(v.l2)));
        }
        write_rows(&rows)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows: Vec<RegionRow> = read_rows(text)?;
        let num = |r: &RegionRow, v: Option<f64>| v.ok_or_else(|| anyhow!("{} {} lacks a value", r.kind, r.name));
        let mut d = [None; 4];
        let mut caps = [None; 2];
        let mut constraints = [None; 2];
        let mut corners = [None; 3];
        let mut polyline = Vec::new();
        for r in &rows {
            match r.kind.as_str() {
                "erasure" => {
                    let k = ["d11", "d12", "d21", "d22"].iter().position(|n| *n == r.name);
                    d[k.ok_or_else(|| anyhow!("unknown erasure {}", r.name))?] = Some(num(r, r.x)?);
                }
                "cap" | "constraint" => {
                    let i: usize = r
                        .name
                        .parse::<usize>()
                        .ok()
                        .filter(|i| (1..=2).contains(i))
                        .ok_or_else(|| anyhow!("bad user {}", r.name))?
                        - 1;
                    if r.kind == "cap" {
                        caps[i] = Some(num(r, r.x)?);
                    } else {
                        constraints[i] = match (r.x, r.y) {
                            (Some(coeff), Some(rhs)) => Some(SumConstraint { coeff, rhs }),
                            _ => None,
                        };
                    }
                }
                "corner" => {
                    let k = ["A", "B", "C"].iter().position(|n| *n == r.name);
                    corners[k.ok_or_else(|| anyhow!("unknown corner {}", r.name))?] =
                        Some(RatePair::new(num(r, r.x)?, num(r, r.y)?));
                }
                "polyline" => polyline.push(RatePair::new(num(r, r.x)?, num(r, r.y)?)),
                other => bail!("unknown row kind {other:?}"),
            }
        }
        let need = |v: Option<f64>, what: &str| v.ok_or_else(|| anyhow!("missing {what}"));
        let corner = |k: usize| corners[k].ok_or_else(|| anyhow!("missing corner {}", ["A", "B", "C"][k]));
        Ok(RegionReport {
            profile: ErasureProfile::new(
                need(d[0], "d11")?,
                need(d[1], "d12")?,
                need(d[2], "d21")?,
                need(d[3], "d22")?,
            )?,
            caps: [need(caps[0], "cap 1")?, need(caps[1], "cap 2")?],
            constraints,
            corners: CornerPoints { a: corner(0)?, b: corner(1)?, c: corner(2)? },
            polyline,
        })
    }
}

/// Cell text: a flexible case name, or `dest1 ; dest2` with an optional
/// `; partner <label>` for a lone Special transmission.
pub fn render_action(origin: [QueueKind; 2], action: Action) -> String {
    match action {
        Action::Flexible(c) => c.name().to_string(),
        Action::Fixed(m) => {
            let mut s = format!("{} ; {}", m.dest[0].label(0), m.dest[1].label(1));
            if let Some(p) = m.partner {
                let owner = if origin[0] == QueueKind::Special { 1 } else { 0 };
                s.push_str(&format!(" ; partner {}", p.label(owner)));
            }
            s
        }
    }
}

pub fn parse_action(text: &str) -> Result<Action> {
    if let Some(c) = FlexibleCase::ALL.into_iter().find(|c| c.name() == text) {
        return Ok(Action::Flexible(c));
    }
    let parts: Vec<&str> = text.split(" ; ").collect();
    let kind_of = |s: &str, owner: Option<usize>| -> Result<QueueKind> {
        let (o, k) = QueueKind::parse_label(s).ok_or_else(|| anyhow!("unknown queue label {s:?}"))?;
        if owner.is_some_and(|w| w != o) {
            bail!("queue {s:?} on the wrong transmitter");
        }
        Ok(k)
    };
    let (d0, d1) = match parts.as_slice() {
        [a, b] | [a, b, _] => (kind_of(a, Some(0))?, kind_of(b, Some(1))?),
        _ => bail!("cell {text:?} is neither a flexible case nor a destination pair"),
    };
    let partner = match parts.get(2) {
        Some(p) => Some(kind_of(p.strip_prefix("partner ").ok_or_else(|| anyhow!("bad partner field {p:?}"))?, None)?),
        None => None,
    };
    Ok(Action::Fixed(Move { dest: [d0, d1], partner }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub origin: [QueueKind; 2],
    pub cells: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub regime: Regime,
    pub rows: Vec<TableRow>,
}

impl TableReport {
    pub fn new(table: &ControlTable) -> Self {
        let rows = ControlTable::origins().map(|o| TableRow { origin: o, cells: table.row(o).to_vec() }).collect();
        TableReport { regime: table.regime, rows }
    }

    pub fn row(&self, origin: [QueueKind; 2]) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.origin == origin)
    }

    /// Columns `regime, tx1, tx2, sn1 .. sn16`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["regime".to_string(), "tx1".into(), "tx2".into()];
        header.extend(SituationNumber::all().map(|s| format!("sn{}", s.get())));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![self.regime.name().to_string(), r.origin[0].label(0), r.origin[1].label(1)];
            rec.extend(r.cells.iter().map(|&a| render_action(r.origin, a)));
            w.write_record(&rec)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("csv flush: {e}"))?)?)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let mut regime = None;
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != 19 {
                bail!("table row has {} fields, expected 19", rec.len());
            }
            let rg = parse_regime(&rec[0])?;
            if regime.is_some_and(|r| r != rg) {
                bail!("mixed regimes in one table");
            }
            regime = Some(rg);
            let kind = |s: &str, owner: usize| -> Result<QueueKind> {
                match QueueKind::parse_label(s) {
                    Some((o, k)) if o == owner => Ok(k),
                    _ => bail!("bad origin label {s:?}"),
                }
            };
            let origin = [kind(&rec[1], 0)?, kind(&rec[2], 1)?];
            let cells: Result<Vec<Action>> = (3..19).map(|i| parse_action(&rec[i])).collect();
            rows.push(TableRow { origin, cells: cells? });
        }
        Ok(TableReport { regime: regime.ok_or_else(|| anyhow!("empty table"))?, rows })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub rates: RatePair,
    pub n: usize,
    pub beta: usize,
    pub seed: u64,
    /// Verdict against the realised arrival rates.
    pub stable: bool,
    pub stable_nominal: bool,
    pub xor_fraction: f64,
    pub deep_fraction: f64,
    pub result: SimResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserRow {
    pub user: usize,
    pub arrivals: usize,
    pub delivered: usize,
    pub final_disposition: usize,
    pub delivered_rate: f64,
    pub mean_lifetime: f64,
    pub max_lifetime: usize,
    pub deep_combined: usize,
    /// Delivered bits per XOR count, `;`-separated.
    pub xor_histogram: String,
    pub stable: bool,
}

impl SimReport {
    /// One row per user.
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<UserRow> =
            self.result.users.iter().enumerate().map(|(i, u)| user_row(i, u, self.stable)).collect();
        write_rows(&rows)
    }
}

fn user_row(i: usize, u: &UserMetrics, stable: bool) -> UserRow {
    UserRow {
        user: i + 1,
        arrivals: u.arrivals,
        delivered: u.delivered,
        final_disposition: u.final_disposition,
        delivered_rate: u.delivered_rate,
        mean_lifetime: u.mean_lifetime,
        max_lifetime: u.max_lifetime,
        deep_combined: u.deep_combined,
        xor_histogram: u.xor_histogram.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
        stable,
    }
}

pub fn users_from_csv(text: &str) -> Result<Vec<UserRow>> {
    read_rows(text)
}

pub fn sweep_to_csv(points: &[SweepPoint]) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        l1: f64,
        l2: f64,
        delivered1: f64,
        delivered2: f64,
        stable: bool,
        votes: usize,
        runs: usize,
    }
    let rows: Vec<Row> = points
        .iter()
        .map(|p| Row {
            l1: p.rates.l1,
            l2: p.rates.l2,
            delivered1: p.delivered.l1,
            delivered2: p.delivered.l2,
            stable: p.stable,
            votes: p.votes,
            runs: p.runs,
        })
        .collect();
    write_rows(&rows)
}

pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepPoint>> {
    #[derive(Deserialize)]
    struct Row {
        l1: f64,
        l2: f64,
        delivered1: f64,
        delivered2: f64,
        stable: bool,
        votes: usize,
        runs: usize,
    }
    let rows: Vec<Row> = read_rows(text)?;
    Ok(rows
        .into_iter()
        .map(|r| SweepPoint {
            rates: RatePair::new(r.l1, r.l2),
            delivered: RatePair::new(r.delivered1, r.delivered2),
            stable: r.stable,
            votes: r.votes,
            runs: r.runs,
        })
        .collect())
}

pub fn lifetime_to_csv(points: &[LifetimePoint]) -> Result<String> {
    write_rows(points)
}

pub fn lifetime_from_csv(text: &str) -> Result<Vec<LifetimePoint>> {
    read_rows(text)
}
