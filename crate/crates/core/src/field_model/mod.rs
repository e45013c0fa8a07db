//! Electromagnetic layer: fields on and from the RIS, near/far-field
//! classification, focusing gain and per-element compound channels.
//!
//! Coordinates follow the panel frame: the RIS lies in the `z = 0` plane
//! centred on the origin, rows run along `x`, columns along `y`, and the
//! UE sits at positive `z`. The serving BS is at
//! `(-ρ sin θᵢ, 0, ρ cos θᵢ)`.

mod fresnel;
mod heatmap;

pub use fresnel::fresnel_integrals;
pub use heatmap::{beam_heatmap, BeamExtent, BeamHeatmap, SampleGrid};

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64;

use crate::error::{domain, invalid, Error, Result};
use crate::quad::{integrate_2d, QuadConfig};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier wavelength and frequency, kept consistent with each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierConfig {
    wavelength_m: f64,
    carrier_freq_hz: f64,
}

impl CarrierConfig {
    pub fn from_frequency(carrier_freq_hz: f64) -> Result<Self> {
        if !(carrier_freq_hz > 0.0 && carrier_freq_hz.is_finite()) {
            return Err(invalid(format!(
                "carrier frequency must be positive, got {carrier_freq_hz}"
            )));
        }
        Ok(Self {
            wavelength_m: SPEED_OF_LIGHT / carrier_freq_hz,
            carrier_freq_hz,
        })
    }

    pub fn from_wavelength(wavelength_m: f64) -> Result<Self> {
        if !(wavelength_m > 0.0 && wavelength_m.is_finite()) {
            return Err(invalid(format!(
                "wavelength must be positive, got {wavelength_m}"
            )));
        }
        Ok(Self {
            wavelength_m,
            carrier_freq_hz: SPEED_OF_LIGHT / wavelength_m,
        })
    }

    /// Builds from both quantities, rejecting pairs whose product differs
    /// from the speed of light by more than 1e-6 relative.
    pub fn new(wavelength_m: f64, carrier_freq_hz: f64) -> Result<Self> {
        let c = Self::from_wavelength(wavelength_m)?;
        let product = wavelength_m * carrier_freq_hz;
        if ((product - SPEED_OF_LIGHT) / SPEED_OF_LIGHT).abs() > 1e-6 {
            return Err(invalid(format!(
                "wavelength × frequency = {product} m/s, expected {SPEED_OF_LIGHT}"
            )));
        }
        Ok(Self {
            carrier_freq_hz,
            ..c
        })
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_m
    }

    pub fn carrier_freq_hz(&self) -> f64 {
        self.carrier_freq_hz
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength_m
    }
}

/// Field region of a point relative to an aperture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    ReactiveNearField,
    RadiativeNearField,
    FarField,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::ReactiveNearField => "reactive_nf",
            Region::RadiativeNearField => "radiative_nf",
            Region::FarField => "ff",
        }
    }
}

/// Fraunhofer (Rayleigh) distance `2 D² / λ`.
pub fn fraunhofer_distance(aperture_d_m: f64, wavelength_m: f64) -> Result<f64> {
    if !(wavelength_m > 0.0) {
        return Err(invalid(format!("wavelength must be positive, got {wavelength_m}")));
    }
    if !(aperture_d_m >= 0.0) {
        return Err(invalid(format!("aperture must be non-negative, got {aperture_d_m}")));
    }
    Ok(2.0 * aperture_d_m * aperture_d_m / wavelength_m)
}

/// Classifies a distance from an aperture of diameter `aperture_d_m`.
///
/// Far field from `2D²/λ` (inclusive), radiative near field from `1.2 D`
/// (inclusive), reactive near field below that. When `1.2 D ≥ 2D²/λ` the
/// radiative band is empty.
pub fn classify_region(distance_m: f64, aperture_d_m: f64, wavelength_m: f64) -> Result<Region> {
    if !(distance_m >= 0.0) {
        return Err(invalid(format!("distance must be non-negative, got {distance_m}")));
    }
    let d_ff = fraunhofer_distance(aperture_d_m, wavelength_m)?;
    Ok(if distance_m >= d_ff {
        Region::FarField
    } else if distance_m >= 1.2 * aperture_d_m {
        Region::RadiativeNearField
    } else {
        Region::ReactiveNearField
    })
}

/// A square RIS: `√N × √N` elements with per-element phase and amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPanel {
    side: usize,
    aperture_d_m: f64,
    side_ly_m: f64,
    side_lz_m: f64,
    element_centers: Vec<(f64, f64)>,
    phase_shifts: Vec<f64>,
    amplitudes: Vec<f64>,
    focal_point: Option<[f64; 3]>,
}

impl RisPanel {
    /// A panel of `n_elements` (a perfect square) with aperture diameter
    /// `aperture_d_m`, all phases zero and all amplitudes one.
    ///
    /// Element `(r, c)` (0-based) is centred at
    /// `((r + 1 − (√N + 1)/2) D/√2, (c + 1 − (√N + 1)/2) D/√2)`.
    pub fn square(n_elements: usize, aperture_d_m: f64) -> Result<Self> {
        let side = (n_elements as f64).sqrt().round() as usize;
        if n_elements == 0 || side * side != n_elements {
            return Err(invalid(format!(
                "RIS element count must be a positive perfect square, got {n_elements}"
            )));
        }
        if !(aperture_d_m > 0.0 && aperture_d_m.is_finite()) {
            return Err(invalid(format!("aperture must be positive, got {aperture_d_m}")));
        }
        let pitch = aperture_d_m / SQRT_2;
        let offset = (side as f64 + 1.0) / 2.0;
        let coord = |i: usize| (i as f64 + 1.0 - offset) * pitch;
        let element_centers = (0..side)
            .flat_map(|r| (0..side).map(move |c| (coord(r), coord(c))))
            .collect();
        Ok(Self {
            side,
            aperture_d_m,
            side_ly_m: pitch,
            side_lz_m: pitch,
            element_centers,
            phase_shifts: vec![0.0; n_elements],
            amplitudes: vec![1.0; n_elements],
            focal_point: None,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.side * self.side
    }

    /// Elements per row (`√N`).
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn aperture_d_m(&self) -> f64 {
        self.aperture_d_m
    }

    /// `(L_y, L_z)` with `D = √(L_y² + L_z²)`.
    pub fn sides_m(&self) -> (f64, f64) {
        (self.side_ly_m, self.side_lz_m)
    }

    /// Side of the square integration patch of one element, `D / √(N/8)`.
    pub fn element_side_m(&self) -> f64 {
        self.aperture_d_m / (self.n_elements() as f64 / 8.0).sqrt()
    }

    /// Diameter of the whole array, `D √N`; its Fraunhofer distance equals
    /// `N · 2D²/λ`.
    pub fn array_aperture_m(&self) -> f64 {
        self.aperture_d_m * (self.n_elements() as f64).sqrt()
    }

    /// Array Fraunhofer distance `d_FA = N · 2D²/λ`.
    pub fn array_fraunhofer_m(&self, wavelength_m: f64) -> Result<f64> {
        Ok(self.n_elements() as f64 * fraunhofer_distance(self.aperture_d_m, wavelength_m)?)
    }

    fn index(&self, r: usize, c: usize) -> Result<usize> {
        if r >= self.side || c >= self.side {
            return Err(invalid(format!(
                "element ({r}, {c}) outside {0}×{0} panel",
                self.side
            )));
        }
        Ok(r * self.side + c)
    }

    pub fn element_center(&self, r: usize, c: usize) -> Result<(f64, f64)> {
        Ok(self.element_centers[self.index(r, c)?])
    }

    pub fn element_centers(&self) -> &[(f64, f64)] {
        &self.element_centers
    }

    pub fn phase(&self, r: usize, c: usize) -> Result<f64> {
        Ok(self.phase_shifts[self.index(r, c)?])
    }

    pub fn phase_shifts(&self) -> &[f64] {
        &self.phase_shifts
    }

    /// Stores `phase` wrapped into `[0, 2π)`.
    pub fn set_phase(&mut self, r: usize, c: usize, phase: f64) -> Result<()> {
        if !phase.is_finite() {
            return Err(invalid("phase must be finite"));
        }
        let i = self.index(r, c)?;
        let wrapped = phase.rem_euclid(TAU);
        self.phase_shifts[i] = if wrapped >= TAU { 0.0 } else { wrapped };
        Ok(())
    }

    pub fn amplitude(&self, r: usize, c: usize) -> Result<f64> {
        Ok(self.amplitudes[self.index(r, c)?])
    }

    pub fn set_amplitude(&mut self, r: usize, c: usize, beta: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(invalid(format!("amplitude must lie in [0, 1], got {beta}")));
        }
        let i = self.index(r, c)?;
        self.amplitudes[i] = beta;
        Ok(())
    }

    /// Point the panel was last focused on, if any.
    pub fn focal_point(&self) -> Option<[f64; 3]> {
        self.focal_point
    }

    /// Sets every element phase so that all compound channels arrive in
    /// phase at `target`.
    pub fn focus_on(
        &mut self,
        target: [f64; 3],
        src: &SourceGeometry,
        carrier: &CarrierConfig,
    ) -> Result<()> {
        if !(target[2] > 0.0) {
            return Err(domain("focal point must lie in front of the panel (z > 0)"));
        }
        self.focal_point = Some(target);
        for r in 0..self.side {
            for c in 0..self.side {
                let h = compound_channel_element(self, r, c, 0.0, src, target, carrier)?;
                self.set_phase(r, c, h.arg())?;
            }
        }
        Ok(())
    }
}

/// Serving-BS geometry and field amplitudes seen by the panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceGeometry {
    pub rho_m: f64,
    pub theta_i_rad: f64,
    pub e_incident: f64,
    pub e0: f64,
}

impl SourceGeometry {
    pub fn new(rho_m: f64, theta_i_rad: f64, e_incident: f64, e0: f64) -> Result<Self> {
        if !(rho_m > 0.0 && rho_m.is_finite()) {
            return Err(domain(format!("BS-RIS distance must be positive, got {rho_m}")));
        }
        if !theta_i_rad.is_finite() {
            return Err(invalid("incidence angle must be finite"));
        }
        Ok(Self {
            rho_m,
            theta_i_rad,
            e_incident,
            e0,
        })
    }

    /// Checks the plane-wave assumption: the BS must sit in the far field of
    /// the whole array.
    pub fn check_far_field(&self, panel: &RisPanel, carrier: &CarrierConfig) -> Result<()> {
        let d_fa = panel.array_fraunhofer_m(carrier.wavelength_m())?;
        if self.rho_m < d_fa {
            return Err(domain(format!(
                "BS at {} m is inside the array Fraunhofer distance {d_fa} m",
                self.rho_m
            )));
        }
        Ok(())
    }

    pub fn bs_position(&self) -> [f64; 3] {
        [
            -self.rho_m * self.theta_i_rad.sin(),
            0.0,
            self.rho_m * self.theta_i_rad.cos(),
        ]
    }
}

/// Plane-wave field incident on the RIS surface at `(x, y)`.
pub fn incident_field(x: f64, _y: f64, src: &SourceGeometry, wavelength_m: f64) -> Result<Complex64> {
    if !(src.rho_m > 0.0) {
        return Err(domain("BS-RIS distance must be positive"));
    }
    if !(wavelength_m > 0.0) {
        return Err(invalid("wavelength must be positive"));
    }
    Ok(incident_ratio(x, src, TAU / wavelength_m) * src.e_incident)
}

fn incident_ratio(x: f64, src: &SourceGeometry, k: f64) -> Complex64 {
    let amp = 1.0 / (2.0 * (PI * src.rho_m).sqrt());
    Complex64::from_polar(amp, -k * (src.rho_m + src.theta_i_rad.sin() * x))
}

/// Field at an on-axis UE at depth `z` reflected from surface point `(x, y)`,
/// with a distance-proportional phase of `π/2` radians per metre.
pub fn reflected_field_at_ue(x: f64, y: f64, z: f64, e0: f64) -> Result<Complex64> {
    if !(z > 0.0) {
        return Err(domain(format!("UE depth must be positive, got {z}")));
    }
    let r = (x * x + y * y + z * z).sqrt();
    Ok(Complex64::from_polar(
        reflected_magnitude(x, y, z, e0),
        -std::f64::consts::FRAC_PI_2 * r,
    ))
}

fn reflected_magnitude(x: f64, y: f64, z: f64, e0: f64) -> f64 {
    let r2 = x * x + y * y + z * z;
    0.5 * e0 * (z * (x * x + z * z) / (PI * r2 * r2 * r2.sqrt())).sqrt()
}

/// Focal-point geometry of one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusConfig {
    pub focal_z_m: f64,
    pub obs_z_m: f64,
    /// `F = F_z / |F_z − z|`; infinite at the focus.
    pub f_deviation: f64,
    /// `N · 2D²/λ`.
    pub d_fa_m: f64,
}

impl FocusConfig {
    pub fn new(panel: &RisPanel, wavelength_m: f64, focal_z_m: f64, obs_z_m: f64) -> Result<Self> {
        if !(focal_z_m > 0.0 && focal_z_m.is_finite()) {
            return Err(domain(format!("focal depth must be positive, got {focal_z_m}")));
        }
        if !(obs_z_m >= 0.0 && obs_z_m.is_finite()) {
            return Err(domain(format!("observation depth must be non-negative, got {obs_z_m}")));
        }
        let gap = (focal_z_m - obs_z_m).abs();
        Ok(Self {
            focal_z_m,
            obs_z_m,
            f_deviation: if gap == 0.0 { f64::INFINITY } else { focal_z_m / gap },
            d_fa_m: panel.array_fraunhofer_m(wavelength_m)?,
        })
    }

    /// `1/F = |F_z − z| / F_z`, zero at the focus.
    pub fn inverse_deviation(&self) -> f64 {
        (self.focal_z_m - self.obs_z_m).abs() / self.focal_z_m
    }
}

/// Fresnel closed form of the focusing gain,
/// `(8F/d_FA)² · {C²(d_FA/8F) + S²(d_FA/8F)}²`.
///
/// Undefined at the focus. This expression does not agree with the
/// aperture integral it is meant to summarise (it vanishes as `F → ∞`
/// where the integral peaks); see [`focusing_gain_exact`].
pub fn focusing_gain_closed(focus: &FocusConfig) -> Result<f64> {
    if !focus.f_deviation.is_finite() {
        return Err(Error::SingularFocus);
    }
    if !(focus.f_deviation > 0.0) {
        return Err(invalid("focal deviation must be positive"));
    }
    let a = focus.d_fa_m / (8.0 * focus.f_deviation);
    if !(a > 0.0) {
        return Err(invalid("Fresnel argument d_FA/(8F) must be positive"));
    }
    let (c, s) = fresnel_integrals(a)?;
    let sum = c * c + s * s;
    Ok(sum * sum / (a * a))
}

/// A focusing-gain value with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusingGain {
    pub gain: f64,
    pub abs_error: f64,
}

fn focusing_prefactor(panel: &RisPanel) -> f64 {
    2.0 / (panel.aperture_d_m.powi(2) * panel.n_elements() as f64)
}

fn focusing_half_width(panel: &RisPanel) -> f64 {
    panel.aperture_d_m / (panel.n_elements() as f64 / 8.0).sqrt()
}

/// Focusing gain from direct 2-D quadrature of the aperture integral
/// `(2/(D²N))² |e^{−j2πz/λ} ∬ e^{−j(2π/λ)(x²+y²)/(2F)} dx dy|²` over
/// `[−D/√(N/8), D/√(N/8)]²`. Well defined at the focus.
pub fn focusing_gain_integral(
    focus: &FocusConfig,
    panel: &RisPanel,
    wavelength_m: f64,
) -> Result<FocusingGain> {
    focusing_gain_integral_with(focus, panel, wavelength_m, &QuadConfig::default())
}

pub fn focusing_gain_integral_with(
    focus: &FocusConfig,
    panel: &RisPanel,
    wavelength_m: f64,
    cfg: &QuadConfig,
) -> Result<FocusingGain> {
    if !(wavelength_m > 0.0) {
        return Err(invalid("wavelength must be positive"));
    }
    let k = TAU / wavelength_m;
    let inv_f = focus.inverse_deviation();
    let half = focusing_half_width(panel);
    let est = integrate_2d(
        |x: f64, y: f64| Complex64::from_polar(1.0, -k * (x * x + y * y) * inv_f / 2.0),
        (-half, half),
        (-half, half),
        cfg,
    )
    .map_err(|e| e.within("focusing_gain_integral"))?;
    let outer_phase = Complex64::from_polar(1.0, -k * focus.obs_z_m);
    let magnitude = (outer_phase * est.value).norm();
    let scale = focusing_prefactor(panel).powi(2);
    Ok(FocusingGain {
        gain: scale * magnitude * magnitude,
        abs_error: scale * (2.0 * magnitude * est.abs_error + est.abs_error * est.abs_error),
    })
}

/// The aperture integral evaluated in closed form. The double integral
/// separates into two 1-D Fresnel integrals:
///
/// ```text
/// gain = (64/N²)² · ((C²(u) + S²(u)) / u²)²,   u = (D/√(N/8)) · √(2|F_z − z| / (λ F_z))
/// ```
pub fn focusing_gain_exact(focus: &FocusConfig, panel: &RisPanel, wavelength_m: f64) -> Result<f64> {
    let n = panel.n_elements() as f64;
    let peak = (64.0 / (n * n)).powi(2);
    Ok(peak * normalized_focusing_gain(panel, wavelength_m, focus.inverse_deviation())?)
}

/// Focusing gain relative to its value at the focus, in `(0, 1]`.
/// `inverse_deviation` is `|F_z − z| / F_z`.
pub fn normalized_focusing_gain(panel: &RisPanel, wavelength_m: f64, inverse_deviation: f64) -> Result<f64> {
    normalized_focusing_gain_for(panel.n_elements(), panel.aperture_d_m, wavelength_m, inverse_deviation)
}

/// [`normalized_focusing_gain`] for an element count and element aperture
/// without building a panel; `n_elements` need not be a perfect square.
pub fn normalized_focusing_gain_for(
    n_elements: usize,
    aperture_d_m: f64,
    wavelength_m: f64,
    inverse_deviation: f64,
) -> Result<f64> {
    if !(wavelength_m > 0.0) {
        return Err(invalid("wavelength must be positive"));
    }
    if n_elements == 0 || !(aperture_d_m > 0.0) {
        return Err(invalid("element count and aperture must be positive"));
    }
    if !(inverse_deviation >= 0.0 && inverse_deviation.is_finite()) {
        return Err(invalid(format!(
            "inverse focal deviation must be finite and non-negative, got {inverse_deviation}"
        )));
    }
    let half_width = aperture_d_m / (n_elements as f64 / 8.0).sqrt();
    let u = half_width * (2.0 * inverse_deviation / wavelength_m).sqrt();
    let ratio = if u < 1e-4 {
        1.0
    } else {
        let (c, s) = fresnel_integrals(u)?;
        (c * c + s * s) / (u * u)
    };
    Ok(ratio * ratio)
}

/// Compound channel from the serving BS through element `(r, c)` to a UE at
/// `ue = (x, y, z)`:
///
/// ```text
/// h = (√2/D) β e^{−jφ} ∬_{A_rc} (E_t(x,y)/E_i) Ẽ(x − x_ue, y − y_ue, z_ue) dx dy
/// ```
///
/// `Ẽ` is the reflected field with the [`reflected_field_at_ue`] amplitude, a spherical
/// `e^{−jkR}` propagation phase, and the phase-correction factor
/// `e^{+jk((x² + y²)/(2F) + sin θᵢ x)}`, where `1/F = |F_z − z|/F_z` uses the
/// panel's focal depth (zero when the panel has not been focused).
/// `A_rc` is the `D/√(N/8)` square centred on the element.
pub fn compound_channel_element(
    panel: &RisPanel,
    r: usize,
    c: usize,
    phase: f64,
    src: &SourceGeometry,
    ue: [f64; 3],
    carrier: &CarrierConfig,
) -> Result<Complex64> {
    let (cx, cy) = panel.element_center(r, c)?;
    let beta = panel.amplitude(r, c)?;
    let [ux, uy, uz] = ue;
    if !(uz > 0.0) {
        return Err(domain(format!("UE depth must be positive, got {uz}")));
    }
    let k = carrier.wavenumber();
    let inv_f = panel
        .focal_point
        .map(|f| (f[2] - uz).abs() / f[2])
        .unwrap_or(0.0);
    let sin_t = src.theta_i_rad.sin();
    let half = panel.element_side_m() / 2.0;

    let integrand = |x: f64, y: f64| {
        let (dx, dy) = (x - ux, y - uy);
        let range = (dx * dx + dy * dy + uz * uz).sqrt();
        let reflected = Complex64::from_polar(reflected_magnitude(dx, dy, uz, src.e0), -k * range);
        let correction = Complex64::from_polar(1.0, k * ((x * x + y * y) * inv_f / 2.0 + sin_t * x));
        incident_ratio(x, src, k) * reflected * correction
    };
    let est = integrate_2d(
        integrand,
        (cx - half, cx + half),
        (cy - half, cy + half),
        &QuadConfig::default(),
    )
    .map_err(|e| e.within("compound_channel_element"))?;
    Ok(Complex64::from_polar(SQRT_2 / panel.aperture_d_m * beta, -phase) * est.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn fraunhofer_examples() {
        assert_eq!(fraunhofer_distance(1.0, 0.01).unwrap(), 200.0);
        assert_eq!(fraunhofer_distance(0.0, 0.01).unwrap(), 0.0);
        assert!(fraunhofer_distance(1.0, 0.0).is_err());
        assert!(fraunhofer_distance(1.0, -1.0).is_err());
        let panel = RisPanel::square(100, 1.0).unwrap();
        assert!(close(panel.array_fraunhofer_m(0.01).unwrap(), 20_000.0, 1e-12));
    }

    #[test]
    fn region_boundaries() {
        assert_eq!(classify_region(200.0, 1.0, 0.01).unwrap(), Region::FarField);
        assert_eq!(classify_region(1.2, 1.0, 0.01).unwrap(), Region::RadiativeNearField);
        assert_eq!(classify_region(50.0, 1.0, 0.01).unwrap(), Region::RadiativeNearField);
        assert_eq!(classify_region(1.19, 1.0, 0.01).unwrap(), Region::ReactiveNearField);
        assert_eq!(classify_region(0.0, 1.0, 0.01).unwrap(), Region::ReactiveNearField);
        assert!(classify_region(-1.0, 1.0, 0.01).is_err());
    }

    #[test]
    fn region_partition_is_monotone() {
        let order = |r: Region| match r {
            Region::ReactiveNearField => 0,
            Region::RadiativeNearField => 1,
            Region::FarField => 2,
        };
        let mut last = 0;
        for i in 0..5000 {
            let d = i as f64 * 0.05;
            let r = order(classify_region(d, 1.0, 0.01).unwrap());
            assert!(r >= last);
            last = r;
        }
        assert_eq!(last, 2);
    }

    #[test]
    fn carrier_consistency() {
        let c = CarrierConfig::from_frequency(30e9).unwrap();
        assert!(CarrierConfig::new(c.wavelength_m(), 30e9).is_ok());
        assert!(CarrierConfig::new(0.01, 30e9).is_err());
        assert!(CarrierConfig::from_wavelength(0.0).is_err());
    }

    #[test]
    fn incident_field_phase_and_magnitude() {
        let lambda = 0.01;
        let src = SourceGeometry::new(50.0, 0.0, 2.0, 1.0).unwrap();
        let expected = 2.0 / (2.0 * (PI * 50.0).sqrt());
        for x in [-1.0, 0.0, 0.3, 7.0] {
            assert!(close(incident_field(x, 0.0, &src, lambda).unwrap().norm(), expected, 1e-14));
        }
        let at0 = incident_field(0.0, 0.0, &src, lambda).unwrap();
        let want = (-TAU * 50.0 / lambda).rem_euclid(TAU);
        let diff = (at0.arg().rem_euclid(TAU) - want).abs();
        assert!(diff < 1e-9 || (TAU - diff) < 1e-9);

        let tilted = SourceGeometry::new(50.0, PI / 6.0, 1.0, 1.0).unwrap();
        let ratio = incident_field(lambda, 0.0, &tilted, lambda).unwrap()
            / incident_field(0.0, 0.0, &tilted, lambda).unwrap();
        // phase step −2π sin(π/6) = −π
        assert!((ratio - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        assert!(incident_field(0.0, 5.0, &tilted, lambda).unwrap() == incident_field(0.0, -3.0, &tilted, lambda).unwrap());
    }

    #[test]
    fn reflected_field_examples() {
        // on axis: |E| = (E₀/2) / (z √π)
        let z = 3.0;
        let on_axis = reflected_field_at_ue(0.0, 0.0, z, 4.0).unwrap().norm();
        assert!(close(on_axis, 2.0 / (z * PI.sqrt()), 1e-14));
        let e = reflected_field_at_ue(0.0, 0.0, PI, 2.0).unwrap().norm();
        assert!(close(e, PI.powf(-1.5), 1e-14));
        for (x, y) in [(0.3, 0.1), (1.0, -2.0), (0.0, 0.7)] {
            let m = |x: f64, y: f64| reflected_field_at_ue(x, y, 1.5, 1.0).unwrap().norm();
            assert_eq!(m(x, y), m(-x, y));
            assert_eq!(m(x, y), m(x, -y));
        }
        assert!(reflected_field_at_ue(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn panel_geometry() {
        assert!(RisPanel::square(10, 1.0).is_err());
        assert!(RisPanel::square(0, 1.0).is_err());
        let p = RisPanel::square(16, 2.0).unwrap();
        let pitch = 2.0 / SQRT_2;
        assert!(close(p.element_center(0, 0).unwrap().0, -1.5 * pitch, 1e-14));
        assert!(close(p.element_center(3, 2).unwrap().1, 0.5 * pitch, 1e-14));
        let (ly, lz) = p.sides_m();
        assert!(close((ly * ly + lz * lz).sqrt(), 2.0, 1e-14));
        assert!(p.element_center(4, 0).is_err());
    }

    #[test]
    fn phase_and_amplitude_invariants() {
        let mut p = RisPanel::square(4, 1.0).unwrap();
        p.set_phase(0, 1, -0.5).unwrap();
        assert!(close(p.phase(0, 1).unwrap(), TAU - 0.5, 1e-15));
        p.set_phase(1, 1, 3.0 * TAU).unwrap();
        assert!(p.phase(1, 1).unwrap() < TAU);
        assert!(p.set_amplitude(0, 0, 1.5).is_err());
        assert!(p.set_amplitude(0, 0, -0.1).is_err());
        p.set_amplitude(0, 0, 0.25).unwrap();
        assert!(p.phase_shifts().iter().all(|&p| (0.0..TAU).contains(&p)));
    }

    #[test]
    fn closed_form_rejects_focus() {
        let p = RisPanel::square(16, 1.0).unwrap();
        let f = FocusConfig::new(&p, 0.01, 5.0, 5.0).unwrap();
        assert_eq!(focusing_gain_closed(&f), Err(Error::SingularFocus));
        let off = FocusConfig::new(&p, 0.01, 5.0, 4.0).unwrap();
        assert!(focusing_gain_closed(&off).unwrap() > 0.0);
    }

    #[test]
    fn closed_form_decays_for_large_argument() {
        let p = RisPanel::square(10_000, 1.0).unwrap();
        // d_FA = 2e6 m; F = 1.0001 → a ≈ 2.5e5
        let f = FocusConfig::new(&p, 0.01, 10_000.0, 1.0).unwrap();
        let g = focusing_gain_closed(&f).unwrap();
        let a = f.d_fa_m / (8.0 * f.f_deviation);
        assert!(close(g, 0.25 / (a * a), 1e-4));
        assert!(g < 1e-10);
    }

    #[test]
    fn integral_at_focus_is_area_squared() {
        let (d, n) = (1.0, 16usize);
        let p = RisPanel::square(n, d).unwrap();
        let f = FocusConfig::new(&p, 0.01, 5.0, 5.0).unwrap();
        let g = focusing_gain_integral(&f, &p, 0.01).unwrap();
        let area = 32.0 * d * d / n as f64;
        let want = (2.0 / (d * d * n as f64)).powi(2) * area * area;
        assert!(close(g.gain, want, 1e-12));
    }

    #[test]
    fn integral_symmetric_in_defocus_sign() {
        let p = RisPanel::square(16, 1.0).unwrap();
        let near = FocusConfig::new(&p, 0.01, 5.0, 4.0).unwrap();
        let far = FocusConfig::new(&p, 0.01, 5.0, 6.0).unwrap();
        let a = focusing_gain_integral(&near, &p, 0.01).unwrap().gain;
        let b = focusing_gain_integral(&far, &p, 0.01).unwrap().gain;
        assert!(close(a, b, 1e-10));
    }

    #[test]
    fn integral_matches_separable_form() {
        let p = RisPanel::square(16, 1.0).unwrap();
        for obs in [0.5, 2.0, 4.0, 4.9, 5.0, 7.5] {
            let f = FocusConfig::new(&p, 0.01, 5.0, obs).unwrap();
            let q = focusing_gain_integral(&f, &p, 0.01).unwrap();
            let e = focusing_gain_exact(&f, &p, 0.01).unwrap();
            assert!(close(q.gain, e, 1e-7), "obs={obs}: {} vs {e}", q.gain);
        }
    }

    #[test]
    fn compound_channel_phase_factor() {
        let carrier = CarrierConfig::from_wavelength(0.01).unwrap();
        let p = RisPanel::square(16, 0.01 / SQRT_2).unwrap();
        let src = SourceGeometry::new(100.0, 0.2, 1.0, 1.0).unwrap();
        let ue = [0.01, 0.0, 0.2];
        let h0 = compound_channel_element(&p, 1, 2, 0.0, &src, ue, &carrier).unwrap();
        let hpi = compound_channel_element(&p, 1, 2, PI, &src, ue, &carrier).unwrap();
        assert!((hpi - h0 * Complex64::from_polar(1.0, -PI)).norm() < 1e-14 * h0.norm());
        for phi in [0.3, 1.7, 5.9] {
            let h = compound_channel_element(&p, 1, 2, phi, &src, ue, &carrier).unwrap();
            assert!(close(h.norm(), h0.norm(), 1e-14));
        }
        assert!(compound_channel_element(&p, 4, 0, 0.0, &src, ue, &carrier).is_err());
        assert!(compound_channel_element(&p, 0, 0, 0.0, &src, [0.0, 0.0, 0.0], &carrier).is_err());
    }

    #[test]
    fn mirror_elements_match_at_normal_incidence() {
        let carrier = CarrierConfig::from_wavelength(0.01).unwrap();
        let p = RisPanel::square(16, 0.01 / SQRT_2).unwrap();
        let src = SourceGeometry::new(100.0, 0.0, 1.0, 1.0).unwrap();
        let ue = [0.0, 0.0, 0.15];
        for (r, c) in [(0, 0), (0, 2), (1, 3)] {
            let h = compound_channel_element(&p, r, c, 0.0, &src, ue, &carrier).unwrap();
            let m = compound_channel_element(&p, 3 - r, c, 0.0, &src, ue, &carrier).unwrap();
            assert!((h - m).norm() < 1e-9 * h.norm(), "{h} vs {m}");
            let m2 = compound_channel_element(&p, r, 3 - c, 0.0, &src, ue, &carrier).unwrap();
            assert!((h - m2).norm() < 1e-9 * h.norm());
        }
    }

    #[test]
    fn focusing_aligns_all_elements() {
        let carrier = CarrierConfig::from_wavelength(0.01).unwrap();
        let mut p = RisPanel::square(16, 0.01 / SQRT_2).unwrap();
        let src = SourceGeometry::new(100.0, 0.3, 1.0, 1.0).unwrap();
        let target = [0.02, 0.0, 0.1];
        p.focus_on(target, &src, &carrier).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let h = compound_channel_element(&p, r, c, p.phase(r, c).unwrap(), &src, target, &carrier).unwrap();
                assert!(h.arg().abs() < 1e-9, "({r},{c}) arg {}", h.arg());
            }
        }
    }
}
