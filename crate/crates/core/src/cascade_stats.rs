//! Statistics of the cascaded BS → RIS → UE gain.
//!
//! Each element contributes `G_br,i · G_ru,i` with independent Gaussian
//! hops. The summed gain `G` is approximated by a Gaussian with
//!
//! ```text
//! μ_G = N μ₁ μ₂
//! var = N [(σ₁² + μ₁²)(σ₂² + μ₂²) − (μ₁ μ₂)²]
//! ```
//!
//! and the SNR is `γ = γ̄ G²`. The variance enters every density exactly
//! once; the exact per-element sampler is the reference these densities are
//! checked against.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Mean and variance of one hop's real Gaussian gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopGainStats {
    pub mean: f64,
    pub variance: f64,
}

impl HopGainStats {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(invalid(format!("hop mean must be finite, got {mean}")));
        }
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(invalid(format!("hop variance must be finite and >= 0, got {variance}")));
        }
        Ok(Self { mean, variance })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    fn second_moment(&self) -> f64 {
        self.variance + self.mean * self.mean
    }
}

/// CLT moments of the summed cascade gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeStats {
    pub n_elements: usize,
    pub mean_g: f64,
    pub var_total: f64,
    pub hop1: HopGainStats,
    pub hop2: HopGainStats,
}

impl CascadeStats {
    pub fn std_dev(&self) -> f64 {
        self.var_total.sqrt()
    }

    /// Zero variance: `G` is the constant `mean_g`.
    pub fn is_degenerate(&self) -> bool {
        self.var_total == 0.0
    }
}

pub fn cascade_moments(hop1: HopGainStats, hop2: HopGainStats, n: usize) -> Result<CascadeStats> {
    if n == 0 {
        return Err(invalid("cascade needs at least one element"));
    }
    let nf = n as f64;
    let product_mean = hop1.mean * hop2.mean;
    // clamp: cancellation can leave −ulp when both variances are zero
    let per_element_var =
        (hop1.second_moment() * hop2.second_moment() - product_mean * product_mean).max(0.0);
    Ok(CascadeStats {
        n_elements: n,
        mean_g: nf * product_mean,
        var_total: nf * per_element_var,
        hop1,
        hop2,
    })
}

/// Cascade statistics together with the average SNR `γ̄ = P_t / σ_n²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrModel {
    pub cascade: CascadeStats,
    pub avg_snr: f64,
}

impl SnrModel {
    pub fn new(cascade: CascadeStats, avg_snr: f64) -> Result<Self> {
        if !(avg_snr > 0.0 && avg_snr.is_finite()) {
            return Err(invalid(format!("average SNR must be positive, got {avg_snr}")));
        }
        Ok(Self { cascade, avg_snr })
    }

    /// Builds from transmit and noise power in dBm.
    pub fn from_powers_dbm(cascade: CascadeStats, tx_power_dbm: f64, noise_power_dbm: f64) -> Result<Self> {
        Self::new(cascade, 10f64.powf((tx_power_dbm - noise_power_dbm) / 10.0))
    }

    pub fn avg_snr_db(&self) -> f64 {
        10.0 * self.avg_snr.log10()
    }

    /// `E[γ] = γ̄ (μ_G² + var)`.
    pub fn mean_snr(&self) -> f64 {
        self.avg_snr * (self.cascade.mean_g.powi(2) + self.cascade.var_total)
    }
}

fn normal_density(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * libm::erfc(-(x - mean) / (sd * SQRT_2))
}

fn require_spread(stats: &CascadeStats) -> Result<()> {
    if stats.is_degenerate() {
        return Err(Error::DegenerateDistribution(
            "cascade variance is zero; the gain is a point mass".into(),
        ));
    }
    Ok(())
}

/// Gaussian density of the summed gain `G`.
pub fn gain_pdf(g: f64, stats: &CascadeStats) -> Result<f64> {
    require_spread(stats)?;
    Ok(normal_density(g, stats.mean_g, stats.std_dev()))
}

/// Density of `t = |G|` on `t ≥ 0` (the folded Gaussian).
pub fn folded_gain_pdf(t: f64, stats: &CascadeStats) -> Result<f64> {
    require_spread(stats)?;
    if t < 0.0 {
        return Ok(0.0);
    }
    let sd = stats.std_dev();
    Ok(normal_density(t, stats.mean_g, sd) + normal_density(-t, stats.mean_g, sd))
}

/// Density of `γ = γ̄ G²`:
///
/// ```text
/// f(γ) = [φ((√(γ/γ̄) − μ_G)/σ) + φ((√(γ/γ̄) + μ_G)/σ)] / (2σ √(γ γ̄))
/// ```
///
/// Infinite at `γ = 0` (integrable `γ^{-1/2}` singularity).
pub fn snr_pdf(gamma: f64, model: &SnrModel) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(invalid(format!("SNR must be non-negative, got {gamma}")));
    }
    require_spread(&model.cascade)?;
    if gamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    let t = (gamma / model.avg_snr).sqrt();
    Ok(folded_gain_pdf(t, &model.cascade)? / (2.0 * (gamma * model.avg_snr).sqrt()))
}

/// `P(γ ≤ gamma)`. Valid for degenerate models too (a step at
/// `γ̄ μ_G²`).
pub fn snr_cdf(gamma: f64, model: &SnrModel) -> Result<f64> {
    if gamma.is_nan() {
        return Err(invalid("SNR must not be NaN"));
    }
    if gamma < 0.0 {
        return Ok(0.0);
    }
    let t = (gamma / model.avg_snr).sqrt();
    let c = &model.cascade;
    if c.is_degenerate() {
        return Ok(if t >= c.mean_g.abs() { 1.0 } else { 0.0 });
    }
    let sd = c.std_dev();
    Ok((normal_cdf(t, c.mean_g, sd) - normal_cdf(-t, c.mean_g, sd)).clamp(0.0, 1.0))
}

fn draw(rng: &mut impl Rng, hop: &HopGainStats) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    hop.mean + hop.std_dev() * z
}

/// One exact SNR draw: `γ̄ (Σᵢ G_br,i G_ru,i)²` from `N` independent
/// element pairs.
pub fn sample_snr_exact(rng: &mut impl Rng, model: &SnrModel) -> f64 {
    let c = &model.cascade;
    let g = sample_gain_exact(rng, &c.hop1, &c.hop2, c.n_elements);
    model.avg_snr * g * g
}

/// One exact draw of the summed gain `Σᵢ G_br,i G_ru,i`.
pub fn sample_gain_exact(rng: &mut impl Rng, hop1: &HopGainStats, hop2: &HopGainStats, n: usize) -> f64 {
    (0..n).map(|_| draw(rng, hop1) * draw(rng, hop2)).sum()
}

/// Exact gains for nested element counts from a single set of element draws:
/// the entry for `counts[k]` sums the first `counts[k]` elements. `counts`
/// must be non-decreasing.
pub fn sample_gain_nested(
    rng: &mut impl Rng,
    hop1: &HopGainStats,
    hop2: &HopGainStats,
    counts: &[usize],
) -> Result<Vec<f64>> {
    if counts.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("nested element counts must be non-decreasing"));
    }
    let mut out = Vec::with_capacity(counts.len());
    let mut acc = 0.0;
    let mut done = 0;
    for &n in counts {
        acc += sample_gain_exact(rng, hop1, hop2, n - done);
        done = n;
        out.push(acc);
    }
    Ok(out)
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// a continuous CDF. Sorts `samples` in place.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
