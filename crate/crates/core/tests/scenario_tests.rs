use std::f64::consts::PI;

use ris_ho_core::cascade_stats::{cascade_moments, HopGainStats, SnrModel};
use ris_ho_core::field_model::classify_region;
use ris_ho_core::scenario_sim::*;

fn geometry() -> TwoCellGeometry {
    TwoCellGeometry::default()
}

fn dist(a: Point3, b: Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[test]
fn ppp_empty_and_reproducible() {
    let cfg = PppConfig {
        region: (0.0, 0.0, 500.0, 500.0),
        bs_density: 0.0,
        ris_density: 0.0,
        seed: 3,
    };
    let d = deploy_ppp(&cfg).unwrap();
    assert!(d.bs_positions.is_empty() && d.ris_positions.is_empty());

    let cfg = PppConfig {
        bs_density: 1e-4,
        ris_density: 4e-4,
        ..cfg
    };
    assert_eq!(deploy_ppp(&cfg).unwrap(), deploy_ppp(&cfg).unwrap());
    let d = deploy_ppp(&cfg).unwrap();
    for p in d.bs_positions.iter().chain(&d.ris_positions) {
        assert!((0.0..500.0).contains(&p[0]) && (0.0..500.0).contains(&p[1]));
    }
}

#[test]
fn ppp_mean_count_matches_intensity() {
    let area = 200.0 * 100.0;
    let density = 5e-4;
    let runs = 10_000;
    let total: usize = (0..runs)
        .map(|seed| {
            deploy_ppp(&PppConfig {
                region: (0.0, 0.0, 200.0, 100.0),
                bs_density: density,
                ris_density: density,
                seed,
            })
            .unwrap()
            .bs_positions
            .len()
        })
        .sum();
    let lambda = density * area;
    let mean = total as f64 / runs as f64;
    // Poisson: variance equals the mean
    let se = (lambda / runs as f64).sqrt();
    assert!((mean - lambda).abs() < 3.0 * se, "{mean} vs {lambda}");
}

#[test]
fn ppp_rejects_bad_input() {
    let bad = PppConfig {
        region: (0.0, 0.0, 0.0, 10.0),
        bs_density: 1.0,
        ris_density: 1.0,
        seed: 0,
    };
    assert!(deploy_ppp(&bad).is_err());
    assert!(deploy_ppp(&PppConfig {
        region: (0.0, 0.0, 1.0, 1.0),
        bs_density: -1.0,
        ..bad
    })
    .is_err());
}

#[test]
fn hop_means_follow_inverse_distance() {
    let layout = geometry().layout(150.0, 64).unwrap();
    let lambda = layout.carrier.wavelength_m();
    let mut prev = f64::INFINITY;
    for x in [160.0, 200.0, 300.0] {
        let ue = [x, 0.0, 1.5];
        let (h1, h2) = hop_stats_from_geometry(&layout, ue).unwrap();
        let d1 = dist(layout.serving_bs_pos, layout.ris_pos);
        let d2 = dist(layout.ris_pos, ue);
        assert!((h1.mean - lambda / (4.0 * PI * d1)).abs() < 1e-15);
        assert!((h2.mean * d2 - lambda / (4.0 * PI)).abs() < 1e-15);
        assert!((h2.variance - layout.kappa * h2.mean * h2.mean).abs() < 1e-24);
        assert!(h2.mean < prev);
        prev = h2.mean;
    }
    let mut still = layout;
    still.kappa = 0.0;
    let (h1, h2) = hop_stats_from_geometry(&still, [200.0, 0.0, 1.5]).unwrap();
    assert_eq!((h1.variance, h2.variance), (0.0, 0.0));
}

#[test]
fn disabled_ris_leaves_direct_power() {
    let g = geometry();
    let layout = g.layout(150.0, 100).unwrap();
    let trace = rsrp_along_trajectory(&layout, &g.trajectory().unwrap(), false).unwrap();
    for s in &trace.samples {
        assert_eq!(s.serving_combined_dbm, s.serving_direct_dbm);
        assert_eq!(s.serving_via_ris_dbm, f64::NEG_INFINITY);
    }
}

#[test]
fn combined_power_dominates_each_path() {
    let g = geometry();
    let layout = g.layout(150.0, 100).unwrap();
    let trace = rsrp_along_trajectory(&layout, &g.trajectory().unwrap(), true).unwrap();
    for s in &trace.samples {
        let m = s.serving_direct_dbm.max(s.serving_via_ris_dbm);
        assert!(s.serving_combined_dbm >= m - 0.01);
        assert!(s.serving_combined_dbm <= m + 10.0 * 2f64.log10() + 1e-9);
    }
}

#[test]
fn region_flags_match_recomputation() {
    let g = geometry();
    let layout = g.layout(150.0, 64).unwrap();
    let trace = rsrp_along_trajectory(&layout, &g.trajectory().unwrap(), true).unwrap();
    let aperture = layout.ris.array_aperture_m();
    for s in &trace.samples {
        let r = classify_region(dist(s.position, layout.ris_pos), aperture, layout.carrier.wavelength_m()).unwrap();
        assert_eq!(s.region, r);
    }
}

#[test]
fn symmetric_cells_trigger_at_midpoint() {
    let g = geometry();
    let layout = g.layout(150.0, 64).unwrap();
    let traj = g.trajectory().unwrap();
    let trace = rsrp_along_trajectory(&layout, &traj, false).unwrap();
    let n = trace.samples.len();
    for i in 0..n {
        let (a, b) = (&trace.samples[i], &trace.samples[n - 1 - i]);
        assert!((a.serving_direct_dbm - b.target_dbm).abs() < 1e-9);
    }
    let p = ho_trigger_distance(&trace, 0.0).unwrap();
    assert!(p.triggered);
    assert!((p.distance_m - g.inter_site_m / 2.0).abs() <= traj.step_m() + 1e-9);
}

#[test]
fn trigger_moves_out_with_threshold_and_ris() {
    let g = geometry();
    let traj = g.trajectory().unwrap();
    let layout = g.layout(150.0, 100).unwrap();
    let off = rsrp_along_trajectory(&layout, &traj, false).unwrap();
    let on = rsrp_along_trajectory(&layout, &traj, true).unwrap();
    let mut prev = (0.0, 0.0);
    for k in -6..=6 {
        let t = k as f64;
        let a = ho_trigger_distance(&off, t).unwrap().distance_m;
        let b = ho_trigger_distance(&on, t).unwrap().distance_m;
        assert!(b >= a);
        assert!(a >= prev.0 && b >= prev.1);
        prev = (a, b);
    }
}

#[test]
fn untriggered_trace_reports_length() {
    let g = geometry();
    let traj = g.trajectory().unwrap();
    let trace = rsrp_along_trajectory(&g.layout(150.0, 64).unwrap(), &traj, false).unwrap();
    let p = ho_trigger_distance(&trace, 500.0).unwrap();
    assert!(!p.triggered);
    assert_eq!(p.distance_m, traj.length_m());
}

#[test]
fn layout_validation() {
    let g = geometry();
    assert!(g.layout(0.0, 64).is_err());
    assert!(g.layout(g.inter_site_m, 64).is_err());
    let mut layout = g.layout(150.0, 64).unwrap();
    layout.focus_pos = layout.ris_pos;
    assert!(layout.validate().is_err());
    let mut layout = g.layout(150.0, 64).unwrap();
    layout.kappa = -0.1;
    assert!(layout.validate().is_err());
    // target BS Fresnel zone: a tiny BS aperture puts the RIS in its far field
    let mut layout = g.layout(150.0, 64).unwrap();
    layout.bs_aperture_m = 0.05;
    assert!(layout.validate().is_err());
}

#[test]
fn histogram_counts_every_sample() {
    let g = geometry();
    let traj = g.trajectory().unwrap();
    let layout = g.layout(150.0, 64).unwrap();
    let h = ris_distance_histogram(&layout, &traj, 10.0).unwrap();
    assert_eq!(h.iter().map(|b| b.1).sum::<usize>(), traj.positions().len());
    assert!(ris_distance_histogram(&layout, &traj, 0.0).is_err());
}

fn sweep(seed: u64) -> Vec<TriggerSweepRow> {
    trigger_distance_sweep(&TriggerSweepConfig {
        geometry: geometry(),
        serving_distances_m: vec![60.0, 150.0],
        n_values: vec![32, 128],
        t_h_db: vec![-2.0, 2.0],
        realizations: 20,
        seed,
    })
    .unwrap()
}

#[test]
fn trigger_sweep_is_deterministic_and_baseline_flat() {
    let rows = sweep(8);
    assert_eq!(rows, sweep(8));
    assert_eq!(rows.len(), 2 * 2 * 2 * 2);
    for d in [60.0, 150.0] {
        for t in [-2.0, 2.0] {
            let base: Vec<f64> = rows
                .iter()
                .filter(|r| r.serving_distance_m == d && r.t_h_db == t && !r.ris_enabled)
                .map(|r| r.mean_distance_m)
                .collect();
            assert!(base.windows(2).all(|w| w[0] == w[1]));
            for r in rows.iter().filter(|r| r.serving_distance_m == d && r.t_h_db == t && r.ris_enabled) {
                assert!(r.mean_distance_m >= base[0]);
            }
        }
    }
}

fn links() -> HoLinkStats {
    let serving = cascade_moments(HopGainStats::new(1.0, 0.5).unwrap(), HopGainStats::new(1.0, 0.0).unwrap(), 1).unwrap();
    HoLinkStats {
        serving: SnrModel::new(serving, 20.0).unwrap(),
        candidate_hops: (HopGainStats::new(0.3, 0.05).unwrap(), HopGainStats::new(0.3, 0.05).unwrap()),
        candidate_avg_snr: 1.0,
    }
}

fn ho_sweep(kind: HoKind) -> Vec<HoSweepRow> {
    let thresholds: Vec<f64> = (0..=25).map(|k| 10f64.powf(-7.0 + 0.2 * k as f64)).collect();
    ho_probability_sweep(&HoSweepConfig {
        links: links(),
        kind,
        n_values: vec![32, 64, 128],
        thresholds,
        fixed_t_hh: 0.05,
        realizations: 20_000,
        seed: 12,
    })
    .unwrap()
}

#[test]
fn ho_sweep_orderings() {
    for kind in [HoKind::Hard, HoKind::Soft] {
        let rows = ho_sweep(kind);
        let by_n = |n: usize| -> Vec<HoSweepRow> { rows.iter().filter(|r| r.n_elements == n).copied().collect() };
        let (a, b, c) = (by_n(32), by_n(64), by_n(128));
        for i in 0..a.len() {
            assert!(c[i].probability >= b[i].probability && b[i].probability >= a[i].probability);
        }
    }
}

#[test]
fn ho_sweep_rejects_bad_input() {
    let mut cfg = HoSweepConfig {
        links: links(),
        kind: HoKind::Soft,
        n_values: vec![32],
        thresholds: vec![0.2],
        fixed_t_hh: 0.3,
        realizations: 10,
        seed: 0,
    };
    assert!(ho_probability_sweep(&cfg).is_err());
    cfg.thresholds = vec![1e-3];
    assert!(ho_probability_sweep(&cfg).is_ok());
    cfg.realizations = 0;
    assert!(ho_probability_sweep(&cfg).is_err());
}
