//! Normalized Fresnel integrals
//!
//! ```text
//! C(a) = ∫₀ᵃ cos(π t²/2) dt,   S(a) = ∫₀ᵃ sin(π t²/2) dt
//! ```
//!
//! Power series below |a| = 1.5, a complex continued fraction (modified
//! Lentz) above. Both are accurate to a few ulp over the whole real line.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{invalid, Result};

const SERIES_LIMIT: f64 = 1.5;
const MAX_ITER: usize = 200;
const TINY: f64 = 1e-300;

/// Returns `(C(a), S(a))`.
pub fn fresnel_integrals(a: f64) -> Result<(f64, f64)> {
    if !a.is_finite() {
        return Err(invalid(format!("Fresnel argument must be finite, got {a}")));
    }
    let x = a.abs();
    let (c, s) = if x == 0.0 {
        (0.0, 0.0)
    } else if x < SERIES_LIMIT {
        series(x)
    } else if x < 1e15 {
        continued_fraction(x)
    } else {
        (0.5, 0.5)
    };
    Ok(if a < 0.0 { (-c, -s) } else { (c, s) })
}

fn series(x: f64) -> (f64, f64) {
    // Alternating terms (π/2)^k x^{2k+1} / (k! (2k+1)); even k feed C, odd k feed S.
    let fact = FRAC_PI_2 * x * x;
    let mut term = x;
    let mut c = x;
    let mut s = 0.0;
    for k in 1..MAX_ITER {
        term *= fact / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        // signs follow (-1)^{⌊k/2⌋}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            c += sign * contrib;
        } else {
            s += sign * contrib;
        }
        if contrib < f64::EPSILON * c.abs().max(s.abs()) {
            break;
        }
    }
    (c, s)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    let pix2 = std::f64::consts::PI * x * x;
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0_f64;
    for _ in 2..=MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = (d * a + b).inv();
        cc = b + cc.inv() * a;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < f64::EPSILON {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let half_phase = 0.5 * pix2;
    let cs = Complex64::new(0.5, 0.5)
        * (Complex64::new(1.0, 0.0) - Complex64::new(half_phase.cos(), half_phase.sin()) * h);
    (cs.re, cs.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadConfig};
    use proptest::prelude::*;

    fn oracle(a: f64) -> (f64, f64) {
        let cfg = QuadConfig {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_depth: 30,
            max_intervals: 1 << 14,
        };
        let c = integrate(|t: f64| (FRAC_PI_2 * t * t).cos(), 0.0, a, &cfg).unwrap();
        let s = integrate(|t: f64| (FRAC_PI_2 * t * t).sin(), 0.0, a, &cfg).unwrap();
        (c.value, s.value)
    }

    #[test]
    fn zero_is_exact() {
        assert_eq!(fresnel_integrals(0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn unit_argument_matches_quadrature() {
        let (c, s) = fresnel_integrals(1.0).unwrap();
        let (co, so) = oracle(1.0);
        assert!((c - co).abs() < 1e-10 && (s - so).abs() < 1e-10);
        // tabulated: C(1) = 0.7798934003768228, S(1) = 0.4382591473903548
        assert!((c - 0.779_893_400_376_822_8).abs() < 1e-14);
        assert!((s - 0.438_259_147_390_354_8).abs() < 1e-14);
    }

    #[test]
    fn both_branches_agree_at_the_switch() {
        let below = series(SERIES_LIMIT);
        let above = continued_fraction(SERIES_LIMIT);
        assert!((below.0 - above.0).abs() < 1e-14);
        assert!((below.1 - above.1).abs() < 1e-14);
    }

    #[test]
    fn large_argument_limit() {
        let (c, s) = fresnel_integrals(1e6).unwrap();
        assert!((c - 0.5).abs() < 1e-6 && (s - 0.5).abs() < 1e-6);
        assert_eq!(fresnel_integrals(1e300).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(fresnel_integrals(f64::NAN).is_err());
        assert!(fresnel_integrals(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn odd_symmetry(a in -50.0f64..50.0) {
            let (c, s) = fresnel_integrals(a).unwrap();
            let (cn, sn) = fresnel_integrals(-a).unwrap();
            prop_assert_eq!(c, -cn);
            prop_assert_eq!(s, -sn);
        }

        #[test]
        fn bounded(a in -1e4f64..1e4) {
            let (c, s) = fresnel_integrals(a).unwrap();
            prop_assert!(c.abs() <= 0.78 && s.abs() <= 0.72);
        }
    }
}
