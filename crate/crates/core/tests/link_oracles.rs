use ris_ho_core::cascade_stats::*;
use ris_ho_core::link_metrics::*;
use ris_ho_core::quad::{integrate, QuadConfig};

fn fixture(n: usize, avg_snr: f64) -> SnrModel {
    let c = cascade_moments(
        HopGainStats::new(0.3, 1.0).unwrap(),
        HopGainStats::new(1.0, 0.01).unwrap(),
        n,
    )
    .unwrap();
    SnrModel::new(c, avg_snr).unwrap()
}

// ∫ kernel(γ) f_γ(γ) dγ in γ-space, split at 1 with γ = u² on [0, 1] to
// absorb the origin singularity.
fn gamma_space(model: &SnrModel, kernel: impl Fn(f64) -> f64) -> f64 {
    gamma_space_with(model, kernel, |g| snr_pdf(g, model).unwrap())
}

fn gamma_space_with(model: &SnrModel, kernel: impl Fn(f64) -> f64, f: impl Fn(f64) -> f64) -> f64 {
    let cfg = QuadConfig::default().tightened(1e-2);
    let c = &model.cascade;
    let g_hi = model.avg_snr * (c.mean_g.abs() + 12.0 * c.std_dev()).powi(2);
    let near = integrate(
        |u: f64| if u == 0.0 { 0.0 } else { kernel(u * u) * f(u * u) * 2.0 * u },
        0.0,
        1.0f64.min(g_hi.sqrt()),
        &cfg,
    )
    .unwrap()
    .value;
    let far = if g_hi > 1.0 {
        integrate(|g: f64| kernel(g) * f(g), 1.0, g_hi, &cfg).unwrap().value
    } else {
        0.0
    };
    near + far
}

#[test]
fn ber_in_gamma_and_t_coordinates_agree() {
    for n in [8, 32, 128] {
        let model = fixture(n, 0.01);
        let t_form = average_ber(&model).unwrap().value;
        let g_form = gamma_space(&model, ber_kernel);
        assert!((t_form - g_form).abs() < 1e-8 * t_form.max(1e-6), "N={n}: {t_form} vs {g_form}");
    }
}

#[test]
fn density_without_half_factor_integrates_to_two() {
    // Folded SNR and t densities that drop the 1/2 of the change of
    // variables, so their integrals come out at exactly 2.
    let model = fixture(32, 0.01);
    let (mu, sd, snr) = (model.cascade.mean_g, model.cascade.std_dev(), model.avg_snr);
    // [e^{−(√(γ/γ̄)−μ)²/2σ²} + e^{−(√(γ/γ̄)+μ)²/2σ²}] / (σ √(2π γ γ̄))
    let doubled = |g: f64| {
        let t = (g / snr).sqrt();
        ((-(t - mu).powi(2) / (2.0 * sd * sd)).exp() + (-(t + mu).powi(2) / (2.0 * sd * sd)).exp())
            / (sd * (2.0 * std::f64::consts::PI * g * snr).sqrt())
    };
    let true_mass = gamma_space(&model, |_| 1.0);
    let doubled_mass = gamma_space_with(&model, |_| 1.0, doubled);
    assert!((true_mass - 1.0).abs() < 1e-7);
    assert!((doubled_mass / true_mass - 2.0).abs() < 1e-8);
}

#[test]
fn capacity_and_outage_match_gamma_space() {
    let model = fixture(64, 0.01);
    let cap = ergodic_capacity(&model).unwrap().value;
    let cap_g = gamma_space(&model, |g| (1.0 + g).log2());
    assert!((cap - cap_g).abs() < 1e-7 * cap);
    let th = OutageThreshold::new(1.0).unwrap();
    let out = outage_probability(&model, th).unwrap().value;
    let out_g = gamma_space(&model, |g| if g <= 1.0 { 1.0 } else { 0.0 });
    assert!((out - out_g).abs() < 1e-7, "{out} vs {out_g}");
}

#[test]
fn monotone_in_n_and_snr() {
    let ns = [8, 16, 32, 64, 128];
    let snrs = [1e-3, 3e-3, 1e-2, 3e-2];
    for &s in &snrs {
        let ber: Vec<f64> = ns.iter().map(|&n| average_ber(&fixture(n, s)).unwrap().value).collect();
        let cap: Vec<f64> = ns.iter().map(|&n| ergodic_capacity(&fixture(n, s)).unwrap().value).collect();
        assert!(ber.windows(2).all(|w| w[1] <= w[0]), "{ber:?}");
        assert!(cap.windows(2).all(|w| w[1] > w[0]), "{cap:?}");
    }
    for &n in &ns {
        let ber: Vec<f64> = snrs.iter().map(|&s| average_ber(&fixture(n, s)).unwrap().value).collect();
        let cap: Vec<f64> = snrs.iter().map(|&s| ergodic_capacity(&fixture(n, s)).unwrap().value).collect();
        assert!(ber.windows(2).all(|w| w[1] <= w[0]));
        assert!(cap.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn outage_non_decreasing_in_threshold() {
    let model = fixture(32, 0.01);
    let mut prev = 0.0;
    for k in 0..40 {
        let th = OutageThreshold::from_db(-20.0 + k as f64).unwrap();
        let r = outage_probability(&model, th).unwrap();
        assert!((0.0..=1.0).contains(&r.value));
        assert!(r.value >= prev);
        prev = r.value;
    }
}

#[test]
fn monte_carlo_agrees_at_64() {
    let model = fixture(64, 0.01);
    let th = OutageThreshold::new(1.0).unwrap();
    let mc = mc_metrics(2, &model, 1_000_000, th).unwrap();
    let pairs = [
        (average_ber(&model).unwrap(), mc.ber),
        (outage_probability(&model, th).unwrap(), mc.outage),
        (ergodic_capacity(&model).unwrap(), mc.capacity),
    ];
    for (q, m) in pairs {
        assert_eq!(m.n_samples, 1_000_000);
        assert!((q.value - m.value).abs() < 3.0 * m.abs_error_est, "{q:?} vs {m:?}");
    }
}

#[test]
fn standard_error_scales_with_sample_count() {
    let model = fixture(16, 0.01);
    let th = OutageThreshold::new(1.0).unwrap();
    let a = mc_metrics(9, &model, 200_000, th).unwrap();
    let b = mc_metrics(9, &model, 400_000, th).unwrap();
    for (x, y) in [(a.ber, b.ber), (a.outage, b.outage), (a.capacity, b.capacity)] {
        let ratio = y.abs_error_est / x.abs_error_est;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02, "{ratio}");
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let model = fixture(16, 0.01);
    let th = OutageThreshold::new(1.0).unwrap();
    assert_eq!(
        mc_metrics(4, &model, 50_000, th).unwrap(),
        mc_metrics(4, &model, 50_000, th).unwrap()
    );
}
