//! Two-cell mobility scenarios: layouts, received-power traces along a UE
//! trajectory, handover trigger distances and handover-probability sweeps.
//!
//! Received powers use free-space loss `(λ/(4πd))²` on every direct link.
//! The RIS path depends on where the UE sits relative to the RIS array:
//!
//! * inside the array's near field the RIS re-radiates the serving signal
//!   as an image of the serving BS, so the path loss is taken over the
//!   unfolded length `d₁ + d₂` and scaled by the normalized focusing gain
//!   for the UE's deviation from the focal point;
//! * in the far field the compound budget `N² μ₁² μ₂²` with per-hop
//!   amplitudes `μ = λ/(4πd)` applies.
//!
//! Direct and RIS powers add non-coherently. Each realization draws one
//! cascade fading factor `|Σᵢ G_br,i G_ru,i / (N μ₁ μ₂)|²`, held fixed along
//! the trajectory.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::cascade_stats::{cascade_moments, sample_gain_nested, HopGainStats, SnrModel};
use crate::error::{domain, invalid, Result};
use crate::field_model::{classify_region, normalized_focusing_gain_for, CarrierConfig, Region};
use crate::ho_engine::{hho_probability, sho_probability, BerSample, HoThresholds};
use crate::link_metrics::ber_kernel;
use crate::rng::{derive_seed, stream_rng};

pub type Point3 = [f64; 3];

fn distance(a: Point3, b: Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn to_dbm(power_mw: f64) -> f64 {
    10.0 * power_mw.log10()
}

fn from_dbm(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Element count and element aperture of a RIS. The count need not be a
/// perfect square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisSpec {
    pub n_elements: usize,
    pub element_aperture_m: f64,
}

impl RisSpec {
    pub fn new(n_elements: usize, element_aperture_m: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(invalid("RIS needs at least one element"));
        }
        if !(element_aperture_m > 0.0 && element_aperture_m.is_finite()) {
            return Err(invalid(format!("element aperture must be positive, got {element_aperture_m}")));
        }
        Ok(Self {
            n_elements,
            element_aperture_m,
        })
    }

    /// `D √N`.
    pub fn array_aperture_m(&self) -> f64 {
        self.element_aperture_m * (self.n_elements as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioLayout {
    pub serving_bs_pos: Point3,
    pub target_bs_pos: Point3,
    pub ris_pos: Point3,
    /// Point the RIS phase profile focuses on.
    pub focus_pos: Point3,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub ris: RisSpec,
    pub carrier: CarrierConfig,
    /// Aperture of the BS antennas, used for the target BS Fresnel zone.
    pub bs_aperture_m: f64,
    /// Hop variance as a fraction of the squared hop mean.
    pub kappa: f64,
}

impl ScenarioLayout {
    /// Checks distinct positions, parameter ranges, and that the RIS lies in
    /// the radiative near field of the target BS.
    pub fn validate(&self) -> Result<()> {
        let pts = [self.serving_bs_pos, self.target_bs_pos, self.ris_pos];
        if pts.iter().flatten().any(|c| !c.is_finite()) {
            return Err(invalid("positions must be finite"));
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if distance(pts[i], pts[j]) == 0.0 {
                return Err(invalid("serving BS, target BS and RIS positions must be distinct"));
            }
        }
        if distance(self.focus_pos, self.ris_pos) == 0.0 {
            return Err(invalid("focal point must differ from the RIS position"));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(invalid(format!("scattering factor must be >= 0, got {}", self.kappa)));
        }
        if !(self.tx_power_dbm.is_finite() && self.noise_power_dbm.is_finite()) {
            return Err(invalid("powers must be finite"));
        }
        let region = classify_region(
            distance(self.ris_pos, self.target_bs_pos),
            self.bs_aperture_m,
            self.carrier.wavelength_m(),
        )?;
        if region != Region::RadiativeNearField {
            return Err(invalid(format!(
                "RIS must lie in the radiative near field of the target BS, found {}",
                region.as_str()
            )));
        }
        Ok(())
    }

    pub fn avg_snr(&self) -> f64 {
        from_dbm(self.tx_power_dbm - self.noise_power_dbm)
    }

    fn free_space(&self, d: f64) -> f64 {
        (self.carrier.wavelength_m() / (4.0 * PI * d)).powi(2)
    }

    /// Region of `ue` relative to the RIS array.
    pub fn ris_region(&self, ue: Point3) -> Result<Region> {
        classify_region(
            distance(ue, self.ris_pos),
            self.ris.array_aperture_m(),
            self.carrier.wavelength_m(),
        )
    }

    /// Mean RIS-path power gain at `ue` (received over transmitted), before
    /// fading.
    pub fn ris_path_gain(&self, ue: Point3) -> Result<f64> {
        let d1 = distance(self.serving_bs_pos, self.ris_pos);
        let d2 = distance(ue, self.ris_pos);
        if d2 == 0.0 {
            return Err(domain("UE coincides with the RIS"));
        }
        match self.ris_region(ue)? {
            Region::FarField => {
                let (h1, h2) = hop_stats_from_geometry(self, ue)?;
                Ok((self.ris.n_elements as f64 * h1.mean * h2.mean).powi(2))
            }
            _ => {
                let f_z = distance(self.focus_pos, self.ris_pos);
                let inv_dev = (f_z - d2).abs() / f_z;
                let g = normalized_focusing_gain_for(
                    self.ris.n_elements,
                    self.ris.element_aperture_m,
                    self.carrier.wavelength_m(),
                    inv_dev,
                )?;
                Ok(g * self.free_space(d1 + d2))
            }
        }
    }
}

/// Per-hop gain statistics at `ue`: means `λ/(4πd)` for the BS–RIS and
/// RIS–UE distances, variances `κ·mean²`.
pub fn hop_stats_from_geometry(layout: &ScenarioLayout, ue: Point3) -> Result<(HopGainStats, HopGainStats)> {
    let lambda = layout.carrier.wavelength_m();
    let mut hops = [0.0; 2];
    for (h, d) in hops.iter_mut().zip([
        distance(layout.serving_bs_pos, layout.ris_pos),
        distance(layout.ris_pos, ue),
    ]) {
        if d == 0.0 {
            return Err(domain("hop distance is zero"));
        }
        *h = lambda / (4.0 * PI * d);
    }
    Ok((
        HopGainStats::new(hops[0], layout.kappa * hops[0] * hops[0])?,
        HopGainStats::new(hops[1], layout.kappa * hops[1] * hops[1])?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PppConfig {
    /// `(x_min, y_min, x_max, y_max)` in metres.
    pub region: (f64, f64, f64, f64),
    /// Points per square metre.
    pub bs_density: f64,
    pub ris_density: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PppDeployment {
    pub bs_positions: Vec<[f64; 2]>,
    pub ris_positions: Vec<[f64; 2]>,
}

/// Homogeneous Poisson point processes for BSs and RISs over the region.
pub fn deploy_ppp(cfg: &PppConfig) -> Result<PppDeployment> {
    let (x0, y0, x1, y1) = cfg.region;
    let area = (x1 - x0) * (y1 - y0);
    if !(x1 > x0 && y1 > y0 && area.is_finite()) {
        return Err(invalid("PPP region must have positive, finite area"));
    }
    for d in [cfg.bs_density, cfg.ris_density] {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(invalid(format!("PPP density must be >= 0, got {d}")));
        }
    }
    let draw = |density: f64, stream: u64| -> Result<Vec<[f64; 2]>> {
        let mean = density * area;
        if mean == 0.0 {
            return Ok(Vec::new());
        }
        let mut rng = stream_rng(cfg.seed, stream);
        let count = Poisson::new(mean)
            .map_err(|e| invalid(format!("Poisson mean {mean}: {e}")))?
            .sample(&mut rng) as usize;
        Ok((0..count)
            .map(|_| [rng.random_range(x0..x1), rng.random_range(y0..y1)])
            .collect())
    };
    Ok(PppDeployment {
        bs_positions: draw(cfg.bs_density, 0)?,
        ris_positions: draw(cfg.ris_density, 1)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub start: Point3,
    pub end: Point3,
    pub speed_mps: f64,
    pub sample_interval_s: f64,
}

impl Trajectory {
    pub fn new(start: Point3, end: Point3, speed_mps: f64, sample_interval_s: f64) -> Result<Self> {
        if !(speed_mps > 0.0 && speed_mps.is_finite()) || !(sample_interval_s > 0.0 && sample_interval_s.is_finite()) {
            return Err(invalid("speed and sample interval must be positive"));
        }
        if !(distance(start, end) > 0.0) {
            return Err(invalid("trajectory start and end must differ"));
        }
        Ok(Self {
            start,
            end,
            speed_mps,
            sample_interval_s,
        })
    }

    pub fn length_m(&self) -> f64 {
        distance(self.start, self.end)
    }

    pub fn step_m(&self) -> f64 {
        self.speed_mps * self.sample_interval_s
    }

    /// Sample positions from start to end inclusive of the start.
    pub fn positions(&self) -> Vec<Point3> {
        let len = self.length_m();
        let n = (len / self.step_m()).floor() as usize;
        (0..=n)
            .map(|i| {
                let t = (i as f64 * self.step_m() / len).min(1.0);
                [0, 1, 2].map(|k| self.start[k] + t * (self.end[k] - self.start[k]))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsrpSample {
    pub position: Point3,
    pub distance_m: f64,
    pub serving_direct_dbm: f64,
    /// `−∞` when the RIS is disabled.
    pub serving_via_ris_dbm: f64,
    pub serving_combined_dbm: f64,
    pub target_dbm: f64,
    /// UE region relative to the RIS array.
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsrpTrace {
    pub samples: Vec<RsrpSample>,
    pub length_m: f64,
}

/// Received powers along `traj` without fading.
pub fn rsrp_along_trajectory(layout: &ScenarioLayout, traj: &Trajectory, ris_enabled: bool) -> Result<RsrpTrace> {
    rsrp_along_trajectory_faded(layout, traj, ris_enabled, 1.0)
}

/// As [`rsrp_along_trajectory`] with the RIS path power scaled by
/// `ris_fading`.
pub fn rsrp_along_trajectory_faded(
    layout: &ScenarioLayout,
    traj: &Trajectory,
    ris_enabled: bool,
    ris_fading: f64,
) -> Result<RsrpTrace> {
    layout.validate()?;
    let gains = PathGains::compute(layout, traj)?;
    Ok(gains.trace(layout, traj, ris_enabled, ris_fading))
}

// Per-sample path gains, shared by every fading realization of a layout.
struct PathGains {
    positions: Vec<Point3>,
    direct: Vec<f64>,
    ris: Vec<f64>,
    target: Vec<f64>,
    regions: Vec<Region>,
}

impl PathGains {
    fn compute(layout: &ScenarioLayout, traj: &Trajectory) -> Result<Self> {
        let positions = traj.positions();
        let mut g = PathGains {
            direct: Vec::with_capacity(positions.len()),
            ris: Vec::with_capacity(positions.len()),
            target: Vec::with_capacity(positions.len()),
            regions: Vec::with_capacity(positions.len()),
            positions: Vec::new(),
        };
        for &p in &positions {
            let ds = distance(p, layout.serving_bs_pos);
            let dt = distance(p, layout.target_bs_pos);
            if ds == 0.0 || dt == 0.0 {
                return Err(domain("trajectory passes through a BS"));
            }
            g.direct.push(layout.free_space(ds));
            g.target.push(layout.free_space(dt));
            g.ris.push(layout.ris_path_gain(p)?);
            g.regions.push(layout.ris_region(p)?);
        }
        g.positions = positions;
        Ok(g)
    }

    fn trace(&self, layout: &ScenarioLayout, traj: &Trajectory, ris_enabled: bool, fading: f64) -> RsrpTrace {
        let pt = from_dbm(layout.tx_power_dbm);
        let samples = (0..self.positions.len())
            .map(|i| {
                let direct = pt * self.direct[i];
                let via = if ris_enabled { pt * self.ris[i] * fading } else { 0.0 };
                RsrpSample {
                    position: self.positions[i],
                    distance_m: distance(self.positions[i], traj.start),
                    serving_direct_dbm: to_dbm(direct),
                    serving_via_ris_dbm: to_dbm(via),
                    serving_combined_dbm: to_dbm(direct + via),
                    target_dbm: to_dbm(pt * self.target[i]),
                    region: self.regions[i],
                }
            })
            .collect();
        RsrpTrace {
            samples,
            length_m: traj.length_m(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerPoint {
    pub distance_m: f64,
    /// False when the condition never held; `distance_m` is then the trace
    /// length.
    pub triggered: bool,
}

/// Distance from the trajectory start to the first sample with
/// `target ≥ serving_combined + t_h_db`.
pub fn ho_trigger_distance(trace: &RsrpTrace, t_h_db: f64) -> Result<TriggerPoint> {
    if trace.samples.is_empty() {
        return Err(invalid("trace has no samples"));
    }
    Ok(trace
        .samples
        .iter()
        .find(|s| s.target_dbm >= s.serving_combined_dbm + t_h_db)
        .map(|s| TriggerPoint {
            distance_m: s.distance_m,
            triggered: true,
        })
        .unwrap_or(TriggerPoint {
            distance_m: trace.length_m,
            triggered: false,
        }))
}

/// Histogram of RIS–UE distances along a trajectory: `(bin_start_m, count)`.
pub fn ris_distance_histogram(layout: &ScenarioLayout, traj: &Trajectory, bin_width_m: f64) -> Result<Vec<(f64, usize)>> {
    if !(bin_width_m > 0.0) {
        return Err(invalid("bin width must be positive"));
    }
    let ds: Vec<f64> = traj.positions().iter().map(|&p| distance(p, layout.ris_pos)).collect();
    let max = ds.iter().cloned().fold(0.0, f64::max);
    let mut bins = vec![0usize; (max / bin_width_m).floor() as usize + 1];
    for d in ds {
        bins[(d / bin_width_m).floor() as usize] += 1;
    }
    Ok(bins
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as f64 * bin_width_m, c))
        .collect())
}

/// A two-BS line with the RIS beside the route at a configurable serving
/// distance. The UE walks from the serving BS towards the target BS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCellGeometry {
    pub inter_site_m: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub ris_height_m: f64,
    /// Lateral offset of the RIS from the route.
    pub ris_offset_m: f64,
    /// Position along the route of the point the RIS focuses on.
    pub focus_along_m: f64,
    pub element_aperture_m: f64,
    pub bs_aperture_m: f64,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub kappa: f64,
    pub carrier: CarrierConfig,
    pub speed_mps: f64,
    pub sample_interval_s: f64,
}

impl Default for TwoCellGeometry {
    /// 400 m inter-site distance at 28 GHz with the RIS focused on the
    /// cell edge.
    fn default() -> Self {
        Self {
            inter_site_m: 400.0,
            bs_height_m: 25.0,
            ue_height_m: 1.5,
            ris_height_m: 10.0,
            ris_offset_m: 20.0,
            focus_along_m: 200.0,
            element_aperture_m: 0.2,
            bs_aperture_m: 2.0,
            tx_power_dbm: 30.0,
            noise_power_dbm: -94.0,
            kappa: 0.1,
            carrier: CarrierConfig::from_frequency(28e9).expect("valid carrier"),
            speed_mps: 1.0,
            sample_interval_s: 0.1,
        }
    }
}

impl TwoCellGeometry {
    /// Layout with the RIS `serving_distance_m` along the route.
    pub fn layout(&self, serving_distance_m: f64, n_elements: usize) -> Result<ScenarioLayout> {
        if !(serving_distance_m > 0.0 && serving_distance_m < self.inter_site_m) {
            return Err(invalid(format!(
                "serving distance must lie inside (0, {}), got {serving_distance_m}",
                self.inter_site_m
            )));
        }
        let layout = ScenarioLayout {
            serving_bs_pos: [0.0, 0.0, self.bs_height_m],
            target_bs_pos: [self.inter_site_m, 0.0, self.bs_height_m],
            ris_pos: [serving_distance_m, self.ris_offset_m, self.ris_height_m],
            focus_pos: [self.focus_along_m, 0.0, self.ue_height_m],
            tx_power_dbm: self.tx_power_dbm,
            noise_power_dbm: self.noise_power_dbm,
            ris: RisSpec::new(n_elements, self.element_aperture_m)?,
            carrier: self.carrier,
            bs_aperture_m: self.bs_aperture_m,
            kappa: self.kappa,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn trajectory(&self) -> Result<Trajectory> {
        Trajectory::new(
            [0.0, 0.0, self.ue_height_m],
            [self.inter_site_m, 0.0, self.ue_height_m],
            self.speed_mps,
            self.sample_interval_s,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerSweepConfig {
    pub geometry: TwoCellGeometry,
    pub serving_distances_m: Vec<f64>,
    pub n_values: Vec<usize>,
    pub t_h_db: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerSweepRow {
    pub serving_distance_m: f64,
    pub t_h_db: f64,
    pub n_elements: usize,
    pub ris_enabled: bool,
    pub mean_distance_m: f64,
    pub std_error_m: f64,
    /// Realizations whose trace never met the trigger condition.
    pub untriggered: usize,
}

/// Mean trigger distance over fading realizations for every
/// `(D, t_h, N)` cell, with and without the RIS. Each serving distance gets
/// its own stream seeded from `(seed, D index)`; the element draws are
/// nested, so the `N`-element factor reuses the first `N` pairs of the
/// largest count.
pub fn trigger_distance_sweep(cfg: &TriggerSweepConfig) -> Result<Vec<TriggerSweepRow>> {
    if cfg.realizations == 0 {
        return Err(invalid("sweep needs at least one realization"));
    }
    if cfg.serving_distances_m.is_empty() || cfg.n_values.is_empty() || cfg.t_h_db.is_empty() {
        return Err(invalid("sweep grid must be non-empty"));
    }
    let traj = cfg.geometry.trajectory()?;
    let mut counts = cfg.n_values.clone();
    counts.sort_unstable();
    counts.dedup();
    // one set of element draws per serving distance, shared by every N
    let unit = HopGainStats::new(1.0, cfg.geometry.kappa)?;
    let fades: Vec<Vec<Vec<f64>>> = (0..cfg.serving_distances_m.len())
        .map(|i| {
            let mut rng = stream_rng(derive_seed(cfg.seed, &[i as u64]), 0);
            (0..cfg.realizations)
                .map(|_| {
                    let gs = sample_gain_nested(&mut rng, &unit, &unit, &counts)?;
                    Ok(gs.iter().zip(&counts).map(|(g, &n)| (g / n as f64).powi(2)).collect())
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..cfg.serving_distances_m.len())
        .flat_map(|i| (0..cfg.n_values.len()).map(move |j| (i, j)))
        .collect();
    let per_cell: Vec<Vec<TriggerSweepRow>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let d = cfg.serving_distances_m[i];
            let n = cfg.n_values[j];
            let k = counts.binary_search(&n).expect("count present");
            let layout = cfg.geometry.layout(d, n)?;
            let gains = PathGains::compute(&layout, &traj)?;
            let baseline = gains.trace(&layout, &traj, false, 1.0);
            let fades: Vec<f64> = fades[i].iter().map(|r| r[k]).collect();
            let mut rows = Vec::new();
            for &t_h in &cfg.t_h_db {
                let base = ho_trigger_distance(&baseline, t_h)?;
                rows.push(TriggerSweepRow {
                    serving_distance_m: d,
                    t_h_db: t_h,
                    n_elements: n,
                    ris_enabled: false,
                    mean_distance_m: base.distance_m,
                    std_error_m: 0.0,
                    untriggered: if base.triggered { 0 } else { cfg.realizations },
                });
                let mut points = Vec::with_capacity(fades.len());
                for &f in &fades {
                    points.push(ho_trigger_distance(&gains.trace(&layout, &traj, true, f), t_h)?);
                }
                let m = points.len() as f64;
                // offsets from the first point keep identical samples exact
                let first = points[0].distance_m;
                let mean = first + points.iter().map(|p| p.distance_m - first).sum::<f64>() / m;
                let var = if points.len() > 1 {
                    points.iter().map(|p| (p.distance_m - mean).powi(2)).sum::<f64>() / (m - 1.0)
                } else {
                    0.0
                };
                rows.push(TriggerSweepRow {
                    serving_distance_m: d,
                    t_h_db: t_h,
                    n_elements: n,
                    ris_enabled: true,
                    mean_distance_m: mean,
                    std_error_m: (var / m).sqrt(),
                    untriggered: points.iter().filter(|p| !p.triggered).count(),
                });
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoKind {
    Hard,
    Soft,
}

impl HoKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HoKind::Hard => "HHO",
            HoKind::Soft => "SHO",
        }
    }
}

/// Statistics of the two links compared by the handover estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoLinkStats {
    /// Single-path serving link.
    pub serving: SnrModel,
    /// Per-element hop statistics of the RIS-aided candidate link.
    pub candidate_hops: (HopGainStats, HopGainStats),
    pub candidate_avg_snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoSweepConfig {
    pub links: HoLinkStats,
    pub kind: HoKind,
    pub n_values: Vec<usize>,
    /// `T_hh` values for hard handover, `T_hs` values for soft handover.
    pub thresholds: Vec<f64>,
    /// `T_hh` held fixed while `T_hs` is swept.
    pub fixed_t_hh: f64,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoSweepRow {
    pub n_elements: usize,
    pub threshold: f64,
    pub probability: f64,
    pub p_serving_event: f64,
    pub p_candidate_event: f64,
}

/// Handover probability against the threshold for each element count.
/// All counts share the same draws: the `N`-element candidate sums the
/// first `N` element pairs of each realization.
pub fn ho_probability_sweep(cfg: &HoSweepConfig) -> Result<Vec<HoSweepRow>> {
    if cfg.realizations == 0 || cfg.n_values.is_empty() || cfg.thresholds.is_empty() {
        return Err(invalid("sweep needs realizations, element counts and thresholds"));
    }
    if cfg.kind == HoKind::Soft && cfg.thresholds.iter().any(|&t| !(1e-7..=1e-2).contains(&t)) {
        return Err(invalid("soft handover thresholds must lie in [1e-7, 1e-2]"));
    }
    let mut counts = cfg.n_values.clone();
    counts.sort_unstable();
    counts.dedup();
    let (h1, h2) = cfg.links.candidate_hops;
    let serving = cfg.links.serving;
    if serving.cascade.n_elements != 1 {
        return Err(invalid("serving link must be a single path"));
    }
    let mut rng = stream_rng(cfg.seed, 0);
    let mut serving_ber = Vec::with_capacity(cfg.realizations);
    let mut candidate_ber = vec![Vec::with_capacity(cfg.realizations); counts.len()];
    for _ in 0..cfg.realizations {
        let s = sample_gain_nested(&mut rng, &serving.cascade.hop1, &serving.cascade.hop2, &[1])?[0];
        serving_ber.push(ber_kernel(serving.avg_snr * s * s));
        let gs = sample_gain_nested(&mut rng, &h1, &h2, &counts)?;
        for (k, g) in gs.into_iter().enumerate() {
            candidate_ber[k].push(ber_kernel(cfg.links.candidate_avg_snr * g * g));
        }
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let k = counts.binary_search(&n).expect("count present");
        let samples: Vec<BerSample> = serving_ber
            .iter()
            .zip(&candidate_ber[k])
            .map(|(&s, &c)| BerSample {
                serving_ber: s,
                candidate_ber: c,
                serving_load: 0,
            })
            .collect();
        for &t in &cfg.thresholds {
            // the margin and the other threshold do not enter these events
            let est = match cfg.kind {
                HoKind::Hard => hho_probability(&samples, &HoThresholds::new(t, t / 10.0, t / 10.0, 0)?)?,
                HoKind::Soft => sho_probability(
                    &samples,
                    &HoThresholds::new(cfg.fixed_t_hh, t, cfg.fixed_t_hh / 10.0, 0)?,
                )?,
            };
            rows.push(HoSweepRow {
                n_elements: n,
                threshold: t,
                probability: est.probability,
                p_serving_event: est.event_probability(0),
                p_candidate_event: est.event_probability(1),
            });
        }
    }
    Ok(rows)
}

/// Candidate-link SNR model for `n` elements.
pub fn candidate_model(links: &HoLinkStats, n: usize) -> Result<SnrModel> {
    SnrModel::new(cascade_moments(links.candidate_hops.0, links.candidate_hops.1, n)?, links.candidate_avg_snr)
}
