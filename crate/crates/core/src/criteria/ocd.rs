//! Online convergence detection: statistical tests over a sliding window of
//! quality-indicator values, each computed against the newest population as
//! the reference.
//!
//! At iteration `t > T` the window holds the indicator values of snapshots
//! `t-T .. t-1`, measured relative to snapshot `t`. The run stops when, for
//! every configured indicator, either the one-sided chi-squared test rejects
//! "variance >= var_limit", or the regression slope over the window shows no
//! statistically significant trend.

use std::collections::VecDeque;

use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use crate::indicators::{
    additive_epsilon, hypervolume, lattice_divisions_for, r2, simplex_lattice_weights, HvConfig,
};
use crate::trace::{PopulationSnapshot, RunMeta};

use super::{Admit, CriterionError, Sequencer, StopDecision, StoppingCriterion};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OcdIndicator {
    Hv,
    Epsilon,
    R2,
}

impl OcdIndicator {
    pub fn as_str(&self) -> &'static str {
        match self {
            OcdIndicator::Hv => "hv",
            OcdIndicator::Epsilon => "epsilon",
            OcdIndicator::R2 => "r2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcdParams {
    /// Window length T.
    pub window: usize,
    /// Variance threshold of the chi-squared test.
    pub var_limit: f64,
    /// Test level for both tests.
    pub significance: f64,
    /// Indicators that must all agree before stopping.
    pub indicators: Vec<OcdIndicator>,
}

impl Default for OcdParams {
    fn default() -> Self {
        Self {
            window: 13,
            var_limit: 1e-4,
            significance: 0.05,
            indicators: vec![OcdIndicator::Hv, OcdIndicator::Epsilon, OcdIndicator::R2],
        }
    }
}

impl OcdParams {
    fn validate(&self) -> Result<(), CriterionError> {
        if self.window < 3 {
            return Err(CriterionError::InvalidParams(
                "ocd window must be >= 3".into(),
            ));
        }
        if self.var_limit.is_nan() || self.var_limit <= 0.0 {
            return Err(CriterionError::InvalidParams(
                "ocd var_limit must be > 0".into(),
            ));
        }
        if self.significance.is_nan() || self.significance <= 0.0 || self.significance >= 1.0 {
            return Err(CriterionError::InvalidParams(
                "ocd significance must be in (0, 1)".into(),
            ));
        }
        if self.indicators.is_empty() {
            return Err(CriterionError::InvalidParams(
                "ocd needs at least one indicator".into(),
            ));
        }
        Ok(())
    }
}

/// One-sided chi-squared test of H0 "variance >= var_limit": returns true
/// when H0 is rejected at `significance`, i.e. the sample varies
/// significantly less than the limit. The statistic is
/// `(n - 1) s^2 / var_limit` compared against the lower quantile.
pub fn variance_below_limit(values: &[f64], var_limit: f64, significance: f64) -> bool {
    let n = values.len();
    assert!(n >= 2, "variance test needs at least two values");
    let mean = values.iter().sum::<f64>() / n as f64;
    let sum_sq: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let statistic = sum_sq / var_limit;
    let quantile = ChiSquared::new((n - 1) as f64)
        .expect("df >= 1")
        .inverse_cdf(significance);
    statistic < quantile
}

/// Two-sided t-test on the slope of `values` regressed against 1..n:
/// returns true when the trend is statistically significant at
/// `significance`. A perfect linear fit counts as significant whenever its
/// slope is nonzero (the t statistic diverges).
pub fn significant_trend(values: &[f64], significance: f64) -> bool {
    let n = values.len();
    assert!(n >= 3, "trend test needs at least three values");
    let nf = n as f64;
    let x_mean = (nf + 1.0) / 2.0;
    let y_mean = values.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (i, &y) in values.iter().enumerate() {
        let dx = (i + 1) as f64 - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let sse = (syy - slope * sxy).max(0.0);
    let df = (n - 2) as f64;
    let scale = syy.max(1.0);
    if sse <= f64::EPSILON * scale {
        // Residuals vanish: any nonzero slope is infinitely significant.
        return slope.abs() > 1e-12;
    }
    let standard_error = (sse / df / sxx).sqrt();
    let t_statistic = slope / standard_error;
    let quantile = StudentsT::new(0.0, 1.0, df)
        .expect("df >= 1")
        .inverse_cdf(1.0 - significance / 2.0);
    t_statistic.abs() > quantile
}

pub struct Ocd {
    params: OcdParams,
    seq: Sequencer,
    hv_cfg: HvConfig,
    weights: Vec<Vec<f64>>,
    window: VecDeque<PopulationSnapshot>,
}

impl Ocd {
    pub fn new(params: OcdParams, meta: &RunMeta) -> Result<Self, CriterionError> {
        params.validate()?;
        let divisions = lattice_divisions_for(meta.m, meta.mu.max(2));
        Ok(Self {
            params,
            seq: Sequencer::new(meta),
            hv_cfg: HvConfig::normalized(meta.m),
            weights: simplex_lattice_weights(meta.m, divisions),
            window: VecDeque::new(),
        })
    }

    /// Indicator value of `snapshot` measured against `reference`.
    fn indicator_value(
        &self,
        indicator: OcdIndicator,
        snapshot: &PopulationSnapshot,
        reference: &PopulationSnapshot,
    ) -> Result<f64, CriterionError> {
        Ok(match indicator {
            OcdIndicator::Hv => {
                hypervolume(reference.members(), &self.hv_cfg)?
                    - hypervolume(snapshot.members(), &self.hv_cfg)?
            }
            OcdIndicator::Epsilon => additive_epsilon(snapshot.members(), reference.members())?,
            OcdIndicator::R2 => {
                r2(snapshot.members(), &self.weights)? - r2(reference.members(), &self.weights)?
            }
        })
    }
}

impl StoppingCriterion for Ocd {
    fn name(&self) -> &str {
        "ocd"
    }

    fn observe(&mut self, snapshot: &PopulationSnapshot) -> Result<StopDecision, CriterionError> {
        if let Admit::Latched(decision) = self.seq.admit(snapshot)? {
            return Ok(decision);
        }
        let t = snapshot.iteration();
        let mut stop = false;
        if self.window.len() == self.params.window {
            let mut variance_all = true;
            let mut no_trend_all = true;
            for &indicator in &self.params.indicators {
                let mut values = Vec::with_capacity(self.params.window);
                for old in &self.window {
                    values.push(self.indicator_value(indicator, old, snapshot)?);
                }
                if !variance_below_limit(&values, self.params.var_limit, self.params.significance) {
                    variance_all = false;
                }
                if significant_trend(&values, self.params.significance) {
                    no_trend_all = false;
                }
                if !variance_all && !no_trend_all {
                    break;
                }
            }
            stop = variance_all || no_trend_all;
        }
        self.window.push_back(snapshot.clone());
        if self.window.len() > self.params.window {
            self.window.pop_front();
        }
        Ok(self.seq.conclude(t, stop))
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{meta, snapshot};
    use super::*;

    /// Decisions frozen against a standard quantile table
    /// (lower 5% chi-squared quantiles: df=4 -> 0.710723, df=9 -> 3.325113,
    /// df=12 -> 5.226029).
    #[test]
    fn variance_decisions_match_reference_table() {
        // The worked window: sample variance 5e-5, statistic 0.2 < 0.710723.
        let window = [0.10, 0.11, 0.09, 0.10, 0.10];
        assert!(variance_below_limit(&window, 1e-3, 0.05));

        // Identical values: statistic 0 beats any quantile.
        assert!(variance_below_limit(&[0.3; 5], 1e-3, 0.05));

        // Same window against a tight limit: statistic 2e-4/1e-5 = 20 > 0.71.
        assert!(!variance_below_limit(&window, 1e-5, 0.05));

        // Statistic just below/above the df=4 quantile: s^2 chosen so that
        // 4 s^2 / limit straddles 0.710723.
        let make = |spread: f64| [0.0, spread, -spread, 0.0, 0.0];
        let limit = 1e-3;
        // sum_sq = 2 spread^2; statistic = 2 spread^2 / 1e-3.
        let spread_low = (0.70 * limit / 2.0_f64).sqrt();
        let spread_high = (0.72 * limit / 2.0_f64).sqrt();
        assert!(variance_below_limit(&make(spread_low), limit, 0.05));
        assert!(!variance_below_limit(&make(spread_high), limit, 0.05));

        // df = 9 (T = 10): quantile 3.325113.
        let ten_low: Vec<f64> = (0..10).map(|i| 0.001 * (i % 2) as f64).collect();
        // sum_sq = 10 * (0.0005)^2 = 2.5e-6; statistic vs limit 1e-6 -> 2.5.
        assert!(variance_below_limit(&ten_low, 1e-6, 0.05));
        // statistic vs limit 7e-7 -> 3.571 > 3.325.
        assert!(!variance_below_limit(&ten_low, 7e-7, 0.05));

        // df = 12 (T = 13): quantile 5.226029.
        let thirteen: Vec<f64> = (0..13).map(|i| 0.002 * (i % 2) as f64).collect();
        let sum_sq: f64 = {
            let mean = thirteen.iter().sum::<f64>() / 13.0;
            thirteen.iter().map(|v| (v - mean) * (v - mean)).sum()
        };
        assert!(variance_below_limit(&thirteen, sum_sq / 5.0, 0.05));
        assert!(!variance_below_limit(&thirteen, sum_sq / 5.5, 0.05));
    }

    #[test]
    fn perfect_line_with_slope_is_a_significant_trend() {
        let line: Vec<f64> = (0..8).map(|i| 0.5 + 0.1 * i as f64).collect();
        assert!(significant_trend(&line, 0.05));
        // Flat perfect line: no trend.
        assert!(!significant_trend(&[0.4; 8], 0.05));
    }

    #[test]
    fn noisy_flat_window_shows_no_trend() {
        let noise = [0.50, 0.52, 0.49, 0.51, 0.50, 0.48, 0.52, 0.50];
        assert!(!significant_trend(&noise, 0.05));
    }

    #[test]
    fn steep_noisy_trend_is_detected() {
        let values: Vec<f64> = (0..10)
            .map(|i| i as f64 + if i % 2 == 0 { 0.05 } else { -0.05 })
            .collect();
        assert!(significant_trend(&values, 0.05));
    }

    #[test]
    fn frozen_populations_stop_right_after_the_window_fills() {
        let m = meta(2, 1, 50);
        let mut ocd = Ocd::new(
            OcdParams {
                window: 5,
                ..OcdParams::default()
            },
            &m,
        )
        .unwrap();
        let members = [[0.3, 0.7], [0.7, 0.3]];
        let mut stopped = None;
        for t in 1..=50 {
            let d = ocd.observe(&snapshot(t, &members)).unwrap();
            if d.stopped {
                stopped = d.stop_iteration;
                break;
            }
        }
        // All indicator values are identical: variance 0 stops at t = T + 1.
        assert_eq!(stopped, Some(6));
    }

    #[test]
    fn no_decision_before_the_window_fills() {
        let m = meta(2, 1, 50);
        let mut ocd = Ocd::new(
            OcdParams {
                window: 13,
                ..OcdParams::default()
            },
            &m,
        )
        .unwrap();
        let members = [[0.3, 0.7], [0.7, 0.3]];
        for t in 1..=13 {
            assert!(!ocd.observe(&snapshot(t, &members)).unwrap().stopped);
        }
    }
}
