//! Scripted experiments: gain sweeps on the two benchmark loops, the rank
//! crossover study and randomized property campaigns. Reports are CSV.

mod campaign;
mod gain;
mod rank;

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use crate::dissipativity::Tolerances;
use crate::error::{Error, Result};
use crate::signals::format_f64;

pub use campaign::{run_property_campaign, CampaignConfig, CampaignSummary, PropertyOutcome};
pub use gain::{
    example1_controller, example1_interconnection, example2_interconnection, example2_plant,
    example2_weights, gain_sweep, pe_data, run_example1, run_example2, shipped_example2_controller,
    EXAMPLE2_SAMPLING,
};
pub use rank::{run_fig1, Fig1Config, RankReport, RankRow};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub horizons: RangeInclusive<usize>,
    pub nu: usize,
    /// Upper bound on the plant lag supplied by the user.
    pub lag_bound: usize,
    /// Measurement noise level; only noise-free data is supported.
    pub noise: f64,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn example1() -> Self {
        Self {
            seed: 1,
            n_samples: 300,
            horizons: 3..=40,
            nu: 3,
            lag_bound: 1,
            noise: 0.0,
            tolerances: Tolerances::default(),
            output: None,
        }
    }

    pub fn example2() -> Self {
        Self {
            seed: 2,
            n_samples: 400,
            horizons: 15..=60,
            nu: 15,
            lag_bound: 4,
            noise: 0.0,
            tolerances: Tolerances::default(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise != 0.0 {
            return Err(Error::NonzeroNoise(self.noise));
        }
        let (lo, hi) = (*self.horizons.start(), *self.horizons.end());
        if lo > hi || lo < self.nu || hi + 1 > self.n_samples {
            return Err(Error::Config(format!(
                "horizon range {lo}..={hi} must lie within [nu = {}, N - 1 = {}]",
                self.nu,
                self.n_samples.saturating_sub(1)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub horizon: usize,
    /// Infinite when no finite gain was certified.
    pub gamma_dd: f64,
    pub gamma_mb: Option<f64>,
    pub hinf: Option<f64>,
}

/// Finite-horizon gains per depth `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub rows: Vec<GainRow>,
    pub nu: usize,
    pub hinf: Option<f64>,
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format_f64(v)
    }
}

impl GainReport {
    /// CSV with header `L,gamma_dd[,gamma_mb][,hinf]`.
    pub fn to_csv(&self) -> String {
        let with_mb = self.rows.iter().any(|r| r.gamma_mb.is_some());
        let with_hinf = self.rows.iter().any(|r| r.hinf.is_some());
        let mut out = String::from("L,gamma_dd");
        if with_mb {
            out.push_str(",gamma_mb");
        }
        if with_hinf {
            out.push_str(",hinf");
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{}", r.horizon, fmt_value(r.gamma_dd)).expect("string write");
            if with_mb {
                write!(out, ",{}", r.gamma_mb.map_or(String::new(), fmt_value))
                    .expect("string write");
            }
            if with_hinf {
                write!(out, ",{}", r.hinf.map_or(String::new(), fmt_value)).expect("string write");
            }
            out.push('\n');
        }
        out
    }

    /// Largest `|gamma_dd - gamma_mb| / gamma_mb` over rows with a nonzero oracle value.
    pub fn max_relative_error(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| {
                r.gamma_mb
                    .filter(|&m| m > 0.0)
                    .map(|m| (r.gamma_dd - m).abs() / m)
            })
            .fold(0.0, f64::max)
    }

    /// Rows where the oracle is zero must also have a zero data-driven gain.
    pub fn zero_rows_agree(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.gamma_mb == Some(0.0))
            .all(|r| r.gamma_dd == 0.0)
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].gamma_dd >= w[0].gamma_dd - tol)
    }

    pub fn last(&self) -> Option<&GainRow> {
        self.rows.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_matches_toeplitz_oracle() {
        let cfg = ExperimentConfig {
            horizons: 3..=20,
            ..ExperimentConfig::example1()
        };
        let report = run_example1(&cfg).unwrap();
        println!("{}", report.to_csv());
        assert!(report.zero_rows_agree());
        assert!(report.max_relative_error() < 1e-5);
        assert!(report.is_nondecreasing(1e-9));
        assert!((report.hinf.unwrap() - 1.042827).abs() < 1e-5);
    }

    #[test]
    fn nonzero_noise_is_rejected() {
        let cfg = ExperimentConfig {
            noise: 0.1,
            ..ExperimentConfig::example1()
        };
        assert!(matches!(run_example1(&cfg), Err(Error::NonzeroNoise(_))));
    }

    #[test]
    fn rank_crossover_at_the_lag() {
        let report = run_fig1(&Fig1Config::default()).unwrap();
        println!("lag {}\n{}", report.lag, report.to_csv());
        assert_eq!(report.lag, 7);
        assert!(report.crossover_confirmed());
    }

    #[test]
    fn empty_campaign_has_empty_summary() {
        let cfg = CampaignConfig {
            instances: 0,
            ..CampaignConfig::default()
        };
        assert_eq!(run_property_campaign(&cfg), CampaignSummary::default());
    }

    #[test]
    fn campaign_passes_and_fault_injection_is_caught() {
        let cfg = CampaignConfig {
            instances: 8,
            ..CampaignConfig::default()
        };
        let summary = run_property_campaign(&cfg);
        println!("{summary}");
        assert!(summary.all_passed());
        let faulty = run_property_campaign(&CampaignConfig {
            fault_injection: true,
            ..cfg
        });
        assert_eq!(faulty.outcome("hankel-roundtrip").unwrap().failed, 8);
    }
}
