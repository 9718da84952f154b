use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use icsim::channel::ErasureProfile;
use icsim::protocol::{derive_control_table, regime_of, SpecialPolicy};
use icsim::region::{cornerpoints, outer_bound, RatePair};
use icsim::sim::{
    default_beta, is_stable, is_stable_nominal, lifetime_fit, lifetime_series, parse_config, run, sweep, GridSpec,
    SimConfig, DEFAULT_UPDATE_INTERVAL,
};
use icsim_cli::emit;
use icsim_cli::report::{self, RegionReport, SimReport, TableReport};

#[derive(Parser)]
#[command(name = "icsim", version, about = "Two-pair interference network simulator with delayed CSIT")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Outer-bound constraints, cornerpoints and boundary polyline.
    Region(RegionArgs),
    /// One seeded simulation run.
    Simulate(SimArgs),
    /// Stability verdicts over a rate grid.
    Sweep(SweepArgs),
    /// The derived control table of a regime.
    Table(TableArgs),
    /// Bit lifetime against block length, with the power-law fit.
    Lifetime(LifetimeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Special {
    Lazy,
    Alternate,
    Pair,
}

impl From<Special> for SpecialPolicy {
    fn from(s: Special) -> Self {
        match s {
            Special::Lazy => SpecialPolicy::Lazy,
            Special::Alternate => SpecialPolicy::Alternate,
            Special::Pair => SpecialPolicy::Pair,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Replace an existing output file.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct RunOpts {
    /// Key = value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Erasure probabilities d11,d12,d21,d22.
    #[arg(long, value_parser = parse_profile)]
    profile: Option<ErasureProfile>,
    /// Arrival rates l1,l2.
    #[arg(long, value_parser = parse_rates)]
    rates: Option<RatePair>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    update_interval: Option<usize>,
    /// Drain window; defaults to ceil(1.4 sqrt n).
    #[arg(long)]
    beta: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    special: Option<Special>,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, value_parser = parse_profile)]
    profile: ErasureProfile,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    run: RunOpts,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunOpts,
    #[arg(long, default_value_t = 0.02)]
    grid_step: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Seeds per grid point, starting at --seed; majority vote.
    #[arg(long, default_value_t = 3)]
    votes: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TableArgs {
    /// Derive the regime from this profile.
    #[arg(long, value_parser = parse_profile, required_unless_present = "regime")]
    profile: Option<ErasureProfile>,
    /// Regime name, e.g. HomLow; overrides --profile.
    #[arg(long)]
    regime: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct LifetimeArgs {
    #[command(flatten)]
    run: RunOpts,
    /// Block lengths.
    #[arg(long, value_delimiter = ',', default_value = "5000,10000,20000,50000")]
    ns: Vec<usize>,
    /// Seeds per block length, starting at --seed.
    #[arg(long, default_value_t = 3)]
    runs: u64,
    #[command(flatten)]
    output: Output,
}

fn parse_floats(s: &str, len: usize) -> Result<Vec<f64>, String> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == len => Ok(v),
        _ => Err(format!("expected {len} comma-separated numbers")),
    }
}

fn parse_profile(s: &str) -> Result<ErasureProfile, String> {
    let d = parse_floats(s, 4)?;
    ErasureProfile::new(d[0], d[1], d[2], d[3]).map_err(|e| e.to_string())
}

fn parse_rates(s: &str) -> Result<RatePair, String> {
    let r = parse_floats(s, 2)?;
    Ok(RatePair::new(r[0], r[1]))
}

impl RunOpts {
    /// Merges the config file with flags. `rates` may be defaulted by the caller.
    fn build(&self, default_rates: Option<fn(&ErasureProfile) -> RatePair>, need_n: bool) -> Result<SimConfig> {
        let file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Some(parse_config(&text).with_context(|| format!("in {}", p.display()))?)
            }
            None => None,
        };
        let profile =
            self.profile.or(file.as_ref().map(|c| c.profile)).ok_or_else(|| anyhow!("--profile is required"))?;
        let rates = match self.rates.or(file.as_ref().map(|c| c.rates)) {
            Some(r) => r,
            None => match default_rates {
                Some(f) => f(&profile),
                None => bail!("--rates is required"),
            },
        };
        let seed = self
            .seed
            .or(file.as_ref().map(|c| c.seed))
            .ok_or_else(|| anyhow!("--seed is required; runs are never time-seeded"))?;
        let n = match self.n.or(file.as_ref().map(|c| c.n)) {
            Some(n) => n,
            None if need_n => bail!("--n is required"),
            None => 1,
        };
        let mut c = SimConfig::new(profile, rates, n, seed);
        c.beta = self.beta.or(file.as_ref().map(|f| f.beta)).unwrap_or(default_beta(n));
        c.eps = self.eps.or(file.as_ref().map(|f| f.eps)).unwrap_or(c.eps);
        c.update_interval =
            self.update_interval.or(file.as_ref().map(|f| f.update_interval)).unwrap_or(DEFAULT_UPDATE_INTERVAL);
        if let Some(s) = self.special.map(SpecialPolicy::from).or(file.as_ref().map(|f| f.special)) {
            c.special = s;
        }
        regime_of(&c.profile)?;
        if need_n {
            c.validate()?;
        }
        Ok(c)
    }
}

fn corner_c(p: &ErasureProfile) -> RatePair {
    cornerpoints(&outer_bound(p)).c
}

fn format_of(o: &Output, default: Format) -> Format {
    o.format.unwrap_or(default)
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.verb {
        Verb::Region(a) => {
            let r = RegionReport::new(&a.profile);
            let text = match format_of(&a.output, Format::Csv) {
                Format::Csv => r.to_csv()?,
                Format::Json => json(&r)?,
            };
            emit(a.output.out.as_deref(), &text, a.output.force)
        }
        Verb::Simulate(a) => {
            let cfg = a.run.build(None, true)?;
            let result = run(&cfg)?;
            let rep = SimReport {
                rates: cfg.rates,
                n: cfg.n,
                beta: cfg.beta,
                seed: cfg.seed,
                stable: is_stable(&cfg, &result),
                stable_nominal: is_stable_nominal(&cfg, &result),
                xor_fraction: result.xor_fraction(),
                deep_fraction: result.deep_fraction(),
                result,
            };
            let text = match format_of(&a.output, Format::Json) {
                Format::Csv => rep.to_csv()?,
                Format::Json => json(&rep)?,
            };
            emit(a.output.out.as_deref(), &text, a.output.force)
        }
        Verb::Sweep(a) => {
            if !(a.grid_step > 0.0 && a.grid_step <= 1.0) {
                bail!("--grid-step must lie in (0, 1]");
            }
            if a.votes == 0 {
                bail!("--votes must be positive");
            }
            let base = a.run.build(Some(corner_c), true)?;
            let grid = GridSpec::up_to_caps(&base.profile, a.grid_step);
            let seeds: Vec<u64> = (0..a.votes).map(|k| base.seed.wrapping_add(k)).collect();
            let res = sweep(&base, &grid, &seeds, a.workers)?;
            let bound = outer_bound(&base.profile);
            let outside = res.points.iter().filter(|p| p.stable && !bound.contains(p.rates)).count();
            if outside > 0 {
                eprintln!("warning: {outside} stable points lie outside the outer bound");
            }
            let text = match format_of(&a.output, Format::Csv) {
                Format::Csv => report::sweep_to_csv(&res.points)?,
                Format::Json => json(&res)?,
            };
            emit(a.output.out.as_deref(), &text, a.output.force)
        }
        Verb::Table(a) => {
            let regime = match (&a.regime, &a.profile) {
                (Some(r), _) => report::parse_regime(r)?,
                (None, Some(p)) => regime_of(p)?,
                (None, None) => bail!("--profile or --regime is required"),
            };
            let rep = TableReport::new(&derive_control_table(regime));
            let text = match format_of(&a.output, Format::Csv) {
                Format::Csv => rep.to_csv()?,
                Format::Json => json(&rep)?,
            };
            emit(a.output.out.as_deref(), &text, a.output.force)
        }
        Verb::Lifetime(a) => {
            if a.ns.is_empty() || a.ns.contains(&0) {
                bail!("--ns must list positive block lengths");
            }
            if a.runs == 0 {
                bail!("--runs must be positive");
            }
            let base = a.run.build(Some(corner_c), false)?;
            let seeds: Vec<u64> = (0..a.runs).map(|k| base.seed.wrapping_add(k)).collect();
            let fixed_beta = a.run.beta;
            let pts = lifetime_series(&base, &a.ns, |n| fixed_beta.unwrap_or(default_beta(n)), &seeds)?;
            let text = match format_of(&a.output, Format::Csv) {
                Format::Csv => report::lifetime_to_csv(&pts)?,
                Format::Json => {
                    let mean: Vec<f64> = pts.iter().map(|p| p.mean).collect();
                    let worst: Vec<f64> = pts.iter().map(|p| p.worst).collect();
                    let fit = |v: &[f64]| lifetime_fit(&a.ns, v).map_err(|e| e.to_string());
                    json(&serde_json::json!({
                        "points": pts,
                        "mean_fit": fit(&mean),
                        "worst_fit": fit(&worst),
                    }))?
                }
            };
            emit(a.output.out.as_deref(), &text, a.output.force)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
