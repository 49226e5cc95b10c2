use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LaplaxError, Result};
use crate::numeric::CompensatedSum;
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Oversampling constant `C_S`.
    pub c_s: f64,
    /// Failure-probability parameter.
    pub xi: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { c_s: 4.0, xi: 0.1, seed: 0 }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_s >= 2.0 && self.c_s.is_finite()) {
            return Err(LaplaxError::InvalidParameter(format!("C_S must be at least 2, got {}", self.c_s)));
        }
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(LaplaxError::InvalidParameter(format!("xi must lie in (0, 1), got {}", self.xi)));
        }
        Ok(())
    }
}

/// Outcome of drawing `q` weighted samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDraw {
    /// Total frequency `t = sum p'_e`.
    pub t: f64,
    /// `max(1, ln t)`.
    pub log_t: f64,
    /// Number of draws, `ceil(C_S t log t log(1/xi))`.
    pub q: usize,
    /// Materialized samples as `(edge index, sample weight)` in draw order.
    pub samples: Vec<(usize, f64)>,
    /// Draws that landed on edges flagged as not materialized.
    pub skipped: usize,
}

impl SampleDraw {
    /// `ln(1/xi)` for which `C_S t log t ln(1/xi)` equals the integer `q`;
    /// rounding `q` up is the same as running with this slightly smaller xi.
    pub fn effective_log_inv_xi(&self, c_s: f64) -> f64 {
        self.q as f64 / (c_s * self.t * self.log_t)
    }
}

pub(crate) fn sample_count(c_s: f64, t: f64, xi: f64) -> (f64, usize) {
    let log_t = t.ln().max(1.0);
    let q = (c_s * t * log_t * (1.0 / xi).ln()).ceil();
    (log_t, q.max(1.0) as usize)
}

/// Draws `q` independent samples with `P(e) = p'_e / t`; a sample of edge `e`
/// gets weight `w_e / (p_e q)`. Edges with `skip[e]` set are drawn (and
/// counted) but not materialized: a single uniform draw first decides between
/// the skipped mass and the rest, then a binary search over the cumulative
/// frequencies of the rest locates the edge.
pub fn sample_with_skip(weights: &[f64], p_prime: &[f64], skip: Option<&[bool]>, cfg: &SamplerConfig) -> Result<SampleDraw> {
    cfg.validate()?;
    if weights.len() != p_prime.len() {
        return Err(LaplaxError::DimensionMismatch { expected: weights.len(), got: p_prime.len() });
    }
    if let Some(s) = skip {
        if s.len() != weights.len() {
            return Err(LaplaxError::DimensionMismatch { expected: weights.len(), got: s.len() });
        }
    }
    if let Some(p) = p_prime.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(LaplaxError::InvalidParameter(format!("frequency {p} is not a nonnegative number")));
    }
    let skipped_edge = |e: usize| skip.is_some_and(|s| s[e]);
    let mut skip_mass = CompensatedSum::new();
    let mut live = Vec::new();
    let mut cumulative = Vec::new();
    let mut acc = CompensatedSum::new();
    for (e, &p) in p_prime.iter().enumerate() {
        if skipped_edge(e) {
            skip_mass.add(p);
        } else if p > 0.0 {
            acc.add(p);
            live.push(e);
            cumulative.push(acc.value());
        }
    }
    let live_mass = acc.value();
    let t = live_mass + skip_mass.value();
    if !(t > 0.0) {
        return Err(LaplaxError::InvalidParameter("total frequency must be positive".into()));
    }
    let (log_t, q) = sample_count(cfg.c_s, t, cfg.xi);
    let mut rng = rng_from_seed(cfg.seed);
    let mut samples = Vec::new();
    let mut skipped = 0;
    for _ in 0..q {
        let x: f64 = rng.gen::<f64>() * t;
        if x >= live_mass || live.is_empty() {
            skipped += 1;
            continue;
        }
        let k = cumulative.partition_point(|&c| c <= x).min(live.len() - 1);
        let e = live[k];
        samples.push((e, weights[e] * t / (p_prime[e] * q as f64)));
    }
    Ok(SampleDraw { t, log_t, q, samples, skipped })
}

/// Plain `Sample`: every edge materialized.
pub fn sample(weights: &[f64], p_prime: &[f64], cfg: &SamplerConfig) -> Result<SampleDraw> {
    sample_with_skip(weights, p_prime, None, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_reconstructs_exactly() {
        let cfg = SamplerConfig { c_s: 4.0, xi: 0.1, seed: 3 };
        let d = sample(&[2.5], &[1.0], &cfg).unwrap();
        assert_eq!(d.samples.len(), d.q);
        let total: f64 = d.samples.iter().map(|s| s.1).sum();
        assert!((total - 2.5).abs() < 1e-12);
    }

    #[test]
    fn two_equal_frequencies() {
        let cfg = SamplerConfig { c_s: 4.0, xi: 0.1, seed: 1 };
        let d = sample(&[3.0, 5.0], &[1.0, 1.0], &cfg).unwrap();
        for &(e, w) in &d.samples {
            let expect = [3.0, 5.0][e] / (0.5 * d.q as f64);
            assert!((w - expect).abs() < 1e-15 * expect);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = SamplerConfig::default();
        assert!(sample(&[1.0], &[-1.0], &cfg).is_err());
        assert!(sample(&[1.0], &[0.0], &cfg).is_err());
        assert!(sample(&[1.0], &[1.0], &SamplerConfig { c_s: 1.0, ..cfg }).is_err());
        assert!(sample(&[1.0], &[1.0], &SamplerConfig { xi: 1.0, ..cfg }).is_err());
    }

    #[test]
    fn skipped_mass_is_counted_not_materialized() {
        let cfg = SamplerConfig { c_s: 4.0, xi: 0.2, seed: 9 };
        let d = sample_with_skip(&[1.0, 1.0, 1.0], &[1.0, 1.0, 2.0], Some(&[true, true, false]), &cfg).unwrap();
        assert_eq!(d.samples.len() + d.skipped, d.q);
        assert!(d.samples.iter().all(|s| s.0 == 2));
    }
}
