//! Adaptive Gauss–Kronrod quadrature.
//!
//! A global-error bisection scheme on the 7/15-point Gauss–Kronrod pair. The
//! interval with the largest error estimate is split until the summed error is
//! below `max(abs_tol, rel_tol * |I|)`. Intervals that reach `max_depth` are
//! frozen; if the target cannot be met after that, the call fails with the
//! error estimate it did reach.
//!
//! Two-dimensional integrals are evaluated as nested one-dimensional ones
//! with the same budget on each axis.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Tolerances and refinement budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any one interval.
    pub max_depth: u32,
    /// Hard cap on the number of live subintervals.
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_depth: 20,
            max_intervals: 4096,
        }
    }
}

impl QuadConfig {
    /// The same configuration with both tolerances scaled by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..self
        }
    }
}

/// Result of an integration: value, error estimate and evaluation count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<V> {
    pub value: V,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Segment<V> {
    a: f64,
    b: f64,
    depth: u32,
    value: V,
    error: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> (V, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * w;
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    (value, error)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<V, F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Estimate {
            value: V::zero(),
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    if b < a {
        let est = integrate(f, b, a, cfg)?;
        return Ok(Estimate {
            value: est.value * -1.0,
            ..est
        });
    }

    let (value, error) = gauss_kronrod(&f, a, b);
    let mut evaluations = 15;
    let mut live = BinaryHeap::new();
    live.push(Segment {
        a,
        b,
        depth: 0,
        value,
        error,
    });
    let mut frozen_value = V::zero();
    let mut frozen_error = 0.0;

    loop {
        let total = live
            .iter()
            .fold(frozen_value, |acc, s: &Segment<V>| acc + s.value);
        let total_error = frozen_error + live.iter().map(|s| s.error).sum::<f64>();
        if !total.is_finite_value() {
            return Err(Error::NumericalFailure {
                operation: "integrate",
                achieved_error: f64::INFINITY,
            });
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * total.magnitude());
        if total_error <= target {
            return Ok(Estimate {
                value: total,
                abs_error: total_error,
                evaluations,
            });
        }
        let Some(worst) = live.pop() else {
            return Err(Error::NumericalFailure {
                operation: "integrate",
                achieved_error: total_error,
            });
        };
        if worst.depth >= cfg.max_depth || live.len() + 2 > cfg.max_intervals {
            frozen_value = frozen_value + worst.value;
            frozen_error += worst.error;
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gauss_kronrod(&f, lo, hi);
            live.push(Segment {
                a: lo,
                b: hi,
                depth: worst.depth + 1,
                value,
                error,
            });
        }
        evaluations += 30;
    }
}

/// Integrates `f(x, y)` over the rectangle `[x0, x1] × [y0, y1]`.
///
/// The inner integral over `x` is evaluated adaptively for every outer node
/// in `y`. The reported error adds the outer estimate to the largest inner
/// estimate scaled by the `y` extent.
pub fn integrate_2d<V, F>(
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    cfg: &QuadConfig,
) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64, f64) -> V,
{
    let worst_inner = Cell::new(0.0_f64);
    let inner_evals = Cell::new(0_usize);
    let failure: RefCell<Option<Error>> = RefCell::new(None);

    let outer = integrate(
        |y| {
            if failure.borrow().is_some() {
                return V::zero();
            }
            match integrate(|x| f(x, y), x0, x1, cfg) {
                Ok(est) => {
                    worst_inner.set(worst_inner.get().max(est.abs_error));
                    inner_evals.set(inner_evals.get() + est.evaluations);
                    est.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    V::zero()
                }
            }
        },
        y0,
        y1,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let outer = outer?;
    Ok(Estimate {
        value: outer.value,
        abs_error: outer.abs_error + worst_inner.get() * (y1 - y0).abs(),
        evaluations: inner_evals.get(),
    })
}

impl Error {
    /// Re-labels a numerical failure with the operation that triggered it.
    pub fn within(self, operation: &'static str) -> Self {
        match self {
            Error::NumericalFailure { achieved_error, .. } => Error::NumericalFailure {
                operation,
                achieved_error,
            },
            other => other,
        }
    }
}
