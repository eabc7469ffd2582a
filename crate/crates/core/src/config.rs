//! Thresholds and run parameters shared by every pipeline stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every decision threshold in one place. Reports embed a copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Tolerances {
    /// Relative slack of the exact convex intersection tests.
    pub intersect: f64,
    /// Strict-membership margin for sampled intersection tests.
    pub sample_margin: f64,
    /// A sequence is bounded when its late maximum exceeds the early one by at most this fraction.
    pub stabilization: f64,
    /// Allowed growth of the fitted R2 per window doubling.
    pub qi_growth: f64,
    /// Late-quarter increment fraction that signals a divergent integral.
    pub divergence: f64,
    /// Tail mass fraction that triggers a truncation warning.
    pub tail_warning: f64,
    /// Partition-of-unity sum tolerance.
    pub partition: f64,
    /// Calderón deviation tolerance after normalization.
    pub calderon: f64,
    /// Accepted band for a linear growth exponent.
    pub linear_band: (f64, f64),
    /// Residual bound for the growth fit.
    pub growth_residual: f64,
    /// Minimal sample budget for sampled intersection tests.
    pub min_budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            intersect: 1e-10,
            sample_margin: 1e-9,
            stabilization: 0.01,
            qi_growth: 0.25,
            divergence: 0.10,
            tail_warning: 0.10,
            partition: 1e-6,
            calderon: 1e-4,
            linear_band: (0.8, 1.2),
            growth_residual: 0.1,
            min_budget: 64,
        }
    }
}

/// Parameters of one command-line or library run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RunConfig {
    /// Base window K; the pipelines use K, 2K and 4K.
    pub window: u32,
    /// Sample budget for sampled intersection tests.
    pub budget: usize,
    /// Number of coverage and support samples.
    pub coverage_samples: usize,
    pub seed: u64,
    /// Grid points per axis for FFT norms.
    pub grid: usize,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            window: 8,
            budget: 256,
            coverage_samples: 4096,
            seed: 0,
            grid: 128,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn windows(&self) -> [u32; 3] {
        [self.window, 2 * self.window, 4 * self.window]
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 4 {
            return Err(Error::Config(format!("window K = {} must be at least 4", self.window)));
        }
        if self.budget < self.tolerances.min_budget {
            return Err(Error::Config(format!(
                "budget {} below the minimum {}",
                self.budget, self.tolerances.min_budget
            )));
        }
        if !self.grid.is_power_of_two() || self.grid < 8 || self.grid > 256 {
            return Err(Error::Config(format!(
                "grid size {} must be a power of two in 8..=256",
                self.grid
            )));
        }
        Ok(())
    }
}
