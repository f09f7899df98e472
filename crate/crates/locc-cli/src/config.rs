//! Run configuration shared by every command.

use locc_core::ToleranceConfig;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Pinned defaults: seed 42, 1000 restarts, branch cap 2^20. The
/// `LOCC_MARKER_SEED` environment variable overrides the seed.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub restarts: u32,
    pub branch_cap: u64,
    pub tol: ToleranceConfig,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            restarts: 1000,
            branch_cap: 1 << 20,
            tol: ToleranceConfig::default(),
            format: OutputFormat::Text,
        }
    }
}

impl RunConfig {
    /// Apply the environment seed override and validate tolerance bounds.
    pub fn finalize(mut self) -> Result<Self, CliError> {
        if let Ok(raw) = std::env::var("LOCC_MARKER_SEED") {
            self.seed = raw
                .parse()
                .map_err(|_| CliError::Input(format!("LOCC_MARKER_SEED=`{raw}` is not a u64")))?;
        }
        self.tol
            .validate()
            .map_err(|e| CliError::Input(format!("tolerance override out of bounds: {e}")))?;
        if self.restarts == 0 {
            return Err(CliError::Input("restarts must be at least 1".into()));
        }
        Ok(self)
    }

    pub fn detect_config(&self) -> locc_core::detect::DetectConfig {
        locc_core::detect::DetectConfig {
            seed: self.seed,
            restarts: self.restarts,
            branch_cap: self.branch_cap,
            tol: self.tol,
        }
    }
}
