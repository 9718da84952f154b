//! Report types and output handling shared by the `icsim` binary and its tests.

pub mod report;

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Writes `text` to `out`, or to stdout when `out` is `None`. Refuses to
/// replace an existing file unless `force` is set.
pub fn emit(out: Option<&Path>, text: &str, force: bool) -> Result<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => {
            if p.exists() && !force {
                bail!("refusing to overwrite {} (pass --force)", p.display());
            }
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
    }
}
