//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use hw_core::heegner::TERM_CEILING;
use hw_core::lseries;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Truncation target for the L-series sums.
    pub l_tail: f64,
    /// Tail target for the Heegner q-series when computing `P_K`.
    pub heegner_precision: f64,
    /// Acceptance bound on the trace relation residual.
    pub trace_residual: f64,
    /// Tolerance for comparisons of heights.
    pub height_tolerance: f64,
    pub nonvanishing: f64,
    /// Largest `|d_K|` scanned.
    pub d_k_bound: u64,
    /// Largest prime considered for the prime sequence.
    pub prime_bound: u64,
    pub term_ceiling: usize,
    /// Number of tower primes.
    pub depth: usize,
    /// Level from which the index bound is applied.
    pub tower_m: u32,
    /// Number of generators of the image subgroup.
    pub tower_r: u32,
    /// Overridden by `HW_CACHE_DIR`.
    pub cache_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            l_tail: lseries::DEFAULT_TAIL,
            heegner_precision: 1e-10,
            trace_residual: 1e-6,
            height_tolerance: 1e-4,
            nonvanishing: lseries::DEFAULT_NONVANISHING,
            d_k_bound: 500,
            prime_bound: 100_000,
            term_ceiling: TERM_CEILING,
            depth: 1,
            tower_m: 0,
            tower_r: 1,
            cache_dir: None,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for (name, v) in [
            ("l_tail", self.l_tail),
            ("heegner_precision", self.heegner_precision),
            ("trace_residual", self.trace_residual),
            ("height_tolerance", self.height_tolerance),
            ("nonvanishing", self.nonvanishing),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be a positive number, got {v}");
            }
        }
        if self.depth < 1 {
            bail!("depth must be at least 1");
        }
        if self.term_ceiling == 0 || self.term_ceiling > TERM_CEILING {
            bail!("term_ceiling must be in 1..={TERM_CEILING}");
        }
        Ok(())
    }

    /// `HW_CACHE_DIR`, then the configured directory, then `.hw-cache`.
    pub fn resolved_cache_dir(&self) -> PathBuf {
        std::env::var_os("HW_CACHE_DIR")
            .map(PathBuf::from)
            .or_else(|| self.cache_dir.clone())
            .unwrap_or_else(|| PathBuf::from(".hw-cache"))
    }
}
