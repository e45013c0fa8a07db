//! Average BER, outage probability and ergodic capacity.
//!
//! The analytic paths integrate over `t = √(γ/γ̄) = |G|`, whose density is
//! the folded Gaussian from [`crate::cascade_stats::folded_gain_pdf`]. The
//! integration range is `[max(0, |μ_G| − 12σ), |μ_G| + 12σ]`; the mass
//! outside it is bounded and added to the reported error. Zero-variance
//! models are treated as a point mass at `t = |μ_G|`.
//!
//! [`mc_metrics`] evaluates the same three quantities from exact
//! per-element draws.

use std::f64::consts::LN_2;

use crate::cascade_stats::{folded_gain_pdf, sample_snr_exact, SnrModel};
use crate::error::{invalid, Result};
use crate::quad::{integrate, QuadConfig};
use crate::rng::map_blocks;

/// Standard deviations kept on each side of `|μ_G|`.
pub const TRUNCATION_SIGMAS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricResult {
    pub value: f64,
    /// Quadrature error estimate plus tail bound, or the Monte Carlo
    /// standard error.
    pub abs_error_est: f64,
    pub method: Method,
    /// Zero for quadrature results.
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageThreshold {
    pub gamma_th: f64,
}

impl OutageThreshold {
    pub fn new(gamma_th: f64) -> Result<Self> {
        if !(gamma_th >= 0.0) {
            return Err(invalid(format!("outage threshold must be >= 0, got {gamma_th}")));
        }
        Ok(Self { gamma_th })
    }

    pub fn from_db(gamma_th_db: f64) -> Result<Self> {
        Self::new(10f64.powf(gamma_th_db / 10.0))
    }
}

/// `0.5·erfc(√γ / 2)`.
pub fn ber_kernel(gamma: f64) -> f64 {
    0.5 * libm::erfc(gamma.max(0.0).sqrt() / 2.0)
}

fn capacity_kernel(gamma: f64) -> f64 {
    gamma.ln_1p() / LN_2
}

/// Tolerances used by the metric integrals. The absolute floor is small
/// because BER values span many decades.
pub fn metric_quad_config() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-9,
        max_depth: 40,
        max_intervals: 4096,
    }
}

// Upper bound on the folded-Gaussian mass outside the integration window.
fn tail_bound() -> f64 {
    libm::erfc(TRUNCATION_SIGMAS / std::f64::consts::SQRT_2)
}

fn window(model: &SnrModel) -> (f64, f64) {
    let c = &model.cascade;
    let m = c.mean_g.abs();
    let s = c.std_dev();
    ((m - TRUNCATION_SIGMAS * s).max(0.0), m + TRUNCATION_SIGMAS * s)
}

fn point_mass(model: &SnrModel) -> f64 {
    model.avg_snr * model.cascade.mean_g.powi(2)
}

fn quadrature_expectation(
    model: &SnrModel,
    kernel: impl Fn(f64) -> f64,
    upper_limit: Option<f64>,
    kernel_bound: f64,
    cfg: &QuadConfig,
    operation: &'static str,
) -> Result<MetricResult> {
    let (lo, hi) = window(model);
    let hi = upper_limit.map_or(hi, |u| u.min(hi));
    let mut value = 0.0;
    let mut err = tail_bound() * kernel_bound;
    if hi > lo {
        let est = integrate(
            |t: f64| kernel(model.avg_snr * t * t) * folded_gain_pdf(t, &model.cascade).unwrap_or(0.0),
            lo,
            hi,
            cfg,
        )
        .map_err(|e| e.within(operation))?;
        value = est.value;
        err += est.abs_error;
    }
    Ok(MetricResult {
        value,
        abs_error_est: err,
        method: Method::Quadrature,
        n_samples: 0,
    })
}

fn clamp_probability(mut r: MetricResult) -> MetricResult {
    r.value = r.value.clamp(0.0, 1.0);
    r
}

pub fn average_ber(model: &SnrModel) -> Result<MetricResult> {
    average_ber_with(model, &metric_quad_config())
}

pub fn average_ber_with(model: &SnrModel, cfg: &QuadConfig) -> Result<MetricResult> {
    if model.cascade.is_degenerate() {
        return Ok(exact(ber_kernel(point_mass(model))));
    }
    quadrature_expectation(model, ber_kernel, None, 0.5, cfg, "average_ber").map(clamp_probability)
}

pub fn outage_probability(model: &SnrModel, th: OutageThreshold) -> Result<MetricResult> {
    outage_probability_with(model, th, &metric_quad_config())
}

pub fn outage_probability_with(
    model: &SnrModel,
    th: OutageThreshold,
    cfg: &QuadConfig,
) -> Result<MetricResult> {
    if model.cascade.is_degenerate() {
        return Ok(exact(if point_mass(model) <= th.gamma_th { 1.0 } else { 0.0 }));
    }
    let t_th = (th.gamma_th / model.avg_snr).sqrt();
    if t_th.is_infinite() {
        return Ok(exact(1.0));
    }
    let (lo, hi) = window(model);
    if t_th >= hi {
        return quadrature_expectation(model, |_| 1.0, None, 1.0, cfg, "outage_probability")
            .map(clamp_probability);
    }
    if t_th <= lo {
        return Ok(MetricResult {
            value: 0.0,
            abs_error_est: tail_bound(),
            method: Method::Quadrature,
            n_samples: 0,
        });
    }
    quadrature_expectation(model, |_| 1.0, Some(t_th), 1.0, cfg, "outage_probability")
        .map(clamp_probability)
}

pub fn ergodic_capacity(model: &SnrModel) -> Result<MetricResult> {
    ergodic_capacity_with(model, &metric_quad_config())
}

pub fn ergodic_capacity_with(model: &SnrModel, cfg: &QuadConfig) -> Result<MetricResult> {
    if model.cascade.is_degenerate() {
        return Ok(exact(capacity_kernel(point_mass(model))));
    }
    let (_, hi) = window(model);
    let bound = capacity_kernel(model.avg_snr * hi * hi);
    let mut r = quadrature_expectation(model, capacity_kernel, None, bound, cfg, "ergodic_capacity")?;
    r.value = r.value.max(0.0);
    Ok(r)
}

fn exact(value: f64) -> MetricResult {
    MetricResult {
        value,
        abs_error_est: 0.0,
        method: Method::Quadrature,
        n_samples: 0,
    }
}

/// Monte Carlo estimates of the three metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMetrics {
    pub ber: MetricResult,
    pub outage: MetricResult,
    pub capacity: MetricResult,
}

// Running mean and centred second moment (Welford), merged with Chan's
// pairwise update.
#[derive(Default, Clone, Copy)]
struct Moments {
    n: usize,
    mean: [f64; 3],
    m2: [f64; 3],
}

impl Moments {
    fn push(&mut self, v: [f64; 3]) {
        self.n += 1;
        let n = self.n as f64;
        for k in 0..3 {
            let d = v[k] - self.mean[k];
            self.mean[k] += d / n;
            self.m2[k] += d * (v[k] - self.mean[k]);
        }
    }

    fn merge(mut self, o: &Moments) -> Moments {
        if o.n == 0 {
            return self;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        for k in 0..3 {
            let d = o.mean[k] - self.mean[k];
            self.mean[k] += d * nb / n;
            self.m2[k] += o.m2[k] + d * d * na * nb / n;
        }
        self.n += o.n;
        self
    }
}

/// Sample means of `ber_kernel(γ)`, `1{γ ≤ γ_th}` and `log₂(1 + γ)` over
/// `n_samples` exact draws. Deterministic for a given `seed` regardless of
/// thread count.
pub fn mc_metrics(seed: u64, model: &SnrModel, n_samples: usize, th: OutageThreshold) -> Result<McMetrics> {
    if n_samples == 0 {
        return Err(invalid("Monte Carlo needs at least one sample"));
    }
    let blocks = map_blocks(seed, n_samples, |rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            let gamma = sample_snr_exact(rng, model);
            m.push([
                ber_kernel(gamma),
                if gamma <= th.gamma_th { 1.0 } else { 0.0 },
                capacity_kernel(gamma),
            ]);
        }
        m
    });
    let total = blocks.iter().fold(Moments::default(), |acc, b| acc.merge(b));
    let n = total.n as f64;
    let result = |k: usize| {
        let var = if total.n > 1 { total.m2[k] / (n - 1.0) } else { 0.0 };
        MetricResult {
            value: total.mean[k],
            abs_error_est: (var / n).sqrt(),
            method: Method::MonteCarlo,
            n_samples: total.n,
        }
    };
    Ok(McMetrics {
        ber: result(0),
        outage: result(1),
        capacity: result(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade_stats::{cascade_moments, snr_cdf, HopGainStats};

    fn model(m: f64, v: f64, n: usize, snr: f64) -> SnrModel {
        let h = HopGainStats::new(m, v).unwrap();
        SnrModel::new(cascade_moments(h, h, n).unwrap(), snr).unwrap()
    }

    #[test]
    fn deterministic_cascade() {
        let m = model(1.0, 0.0, 10, 1.0);
        assert_eq!(average_ber(&m).unwrap().value, 0.5 * libm::erfc(5.0));
        assert!((ergodic_capacity(&m).unwrap().value - 101f64.log2()).abs() < 1e-14);
        let below = OutageThreshold::new(99.999).unwrap();
        let at = OutageThreshold::new(100.0).unwrap();
        assert_eq!(outage_probability(&m, below).unwrap().value, 0.0);
        assert_eq!(outage_probability(&m, at).unwrap().value, 1.0);
        let mc = mc_metrics(1, &m, 100, at).unwrap();
        assert!((mc.ber.value / (0.5 * libm::erfc(5.0)) - 1.0).abs() < 1e-12);
        assert_eq!(mc.outage.value, 1.0);
        assert!((mc.capacity.value - 101f64.log2()).abs() < 1e-12);
        assert_eq!(mc.capacity.abs_error_est, 0.0);
    }

    #[test]
    fn zero_snr_limit() {
        let m = model(0.5, 0.2, 16, 1e-30);
        assert!((average_ber(&m).unwrap().value - 0.5).abs() < 1e-12);
        assert!(ergodic_capacity(&m).unwrap().value < 1e-25);
    }

    #[test]
    fn outage_limits_and_cdf_agreement() {
        let m = model(0.4, 0.3, 8, 2.0);
        assert_eq!(outage_probability(&m, OutageThreshold::new(0.0).unwrap()).unwrap().value, 0.0);
        let inf = OutageThreshold::new(f64::INFINITY).unwrap();
        assert_eq!(outage_probability(&m, inf).unwrap().value, 1.0);
        let huge = outage_probability(&m, OutageThreshold::new(1e12).unwrap()).unwrap();
        assert!((huge.value - 1.0).abs() <= huge.abs_error_est + 1e-12);
        for g in [0.1, 1.0, 3.0, 10.0, 40.0] {
            let q = outage_probability(&m, OutageThreshold::new(g).unwrap()).unwrap();
            let c = snr_cdf(g, &m).unwrap();
            assert!((q.value - c).abs() < 1e-9, "{g}: {} vs {c}", q.value);
        }
        assert!(OutageThreshold::new(-1.0).is_err());
    }

    #[test]
    fn mc_rejects_zero_samples() {
        let m = model(0.4, 0.3, 8, 2.0);
        assert!(mc_metrics(0, &m, 0, OutageThreshold::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn method_labels() {
        assert_eq!(Method::Quadrature.as_str(), "quadrature");
        assert_eq!(Method::MonteCarlo.as_str(), "monte_carlo");
    }
}
