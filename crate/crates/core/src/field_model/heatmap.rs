//! Received-power maps in the x–z plane.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{compound_channel_element, CarrierConfig, RisPanel, SourceGeometry};
use crate::error::{invalid, Result};

/// Sample positions in the `y = 0` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
}

impl SampleGrid {
    /// `nx × nz` evenly spaced points, bounds inclusive.
    pub fn uniform(x: (f64, f64), nx: usize, z: (f64, f64), nz: usize) -> Self {
        let span = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
            if n == 1 {
                return vec![lo];
            }
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        };
        Self {
            xs: span(x, nx),
            zs: span(z, nz),
        }
    }
}

/// A 3 dB extent; `truncated` is set when the power never fell 3 dB below
/// the peak before the grid edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamExtent {
    pub value_m: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamHeatmap {
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
    /// Linear received power, row-major with `z` as the row index.
    pub power: Vec<f64>,
    /// `(ix, iz)` of the strongest sample.
    pub peak: (usize, usize),
    /// 3 dB width along `x` in the row containing the peak.
    pub width_3db_x: BeamExtent,
    /// 3 dB depth along `z` in the column containing the peak.
    pub depth_3db_z: BeamExtent,
}

impl BeamHeatmap {
    pub fn at(&self, ix: usize, iz: usize) -> f64 {
        self.power[iz * self.xs.len() + ix]
    }

    /// Power in dB relative to the peak (peak = 0 dB).
    pub fn power_db(&self) -> Vec<f64> {
        let peak = self.at(self.peak.0, self.peak.1);
        self.power.iter().map(|p| 10.0 * (p / peak).log10()).collect()
    }
}

/// Coherent sum of all element channels at every grid point, using the
/// phases currently stored on `panel`.
pub fn beam_heatmap(
    panel: &RisPanel,
    src: &SourceGeometry,
    grid: &SampleGrid,
    carrier: &CarrierConfig,
) -> Result<BeamHeatmap> {
    if grid.xs.is_empty() || grid.zs.is_empty() {
        return Err(invalid("heatmap grid must be non-empty"));
    }
    if grid.zs.iter().any(|&z| !(z > 0.0)) {
        return Err(invalid("heatmap depths must all be positive"));
    }
    let side = panel.side();
    let rows: Vec<Vec<f64>> = grid
        .zs
        .par_iter()
        .map(|&z| {
            grid.xs
                .iter()
                .map(|&x| {
                    let mut field = Complex64::new(0.0, 0.0);
                    for r in 0..side {
                        for c in 0..side {
                            field += compound_channel_element(
                                panel,
                                r,
                                c,
                                panel.phase(r, c)?,
                                src,
                                [x, 0.0, z],
                                carrier,
                            )?;
                        }
                    }
                    Ok(field.norm_sqr())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let power: Vec<f64> = rows.into_iter().flatten().collect();

    let nx = grid.xs.len();
    let (best, _) = power
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bp), (i, &p)| {
            if p > bp {
                (i, p)
            } else {
                (bi, bp)
            }
        });
    let peak = (best % nx, best / nx);

    let row: Vec<f64> = power[peak.1 * nx..(peak.1 + 1) * nx].to_vec();
    let col: Vec<f64> = (0..grid.zs.len()).map(|iz| power[iz * nx + peak.0]).collect();
    Ok(BeamHeatmap {
        width_3db_x: half_power_extent(&grid.xs, &row, peak.0),
        depth_3db_z: half_power_extent(&grid.zs, &col, peak.1),
        xs: grid.xs.clone(),
        zs: grid.zs.clone(),
        power,
        peak,
    })
}

fn half_power_extent(coords: &[f64], power: &[f64], peak: usize) -> BeamExtent {
    let half = power[peak] / 2.0;
    let crossing = |step: isize| -> (f64, bool) {
        let mut i = peak as isize;
        loop {
            let next = i + step;
            if next < 0 || next as usize >= power.len() {
                return (coords[i as usize], true);
            }
            let (a, b) = (i as usize, next as usize);
            if power[b] < half {
                // interpolate in dB between the bracketing samples
                let (da, db) = (power[a].log10(), power[b].log10());
                let t = (da - half.log10()) / (da - db);
                return (coords[a] + t * (coords[b] - coords[a]), false);
            }
            i = next;
        }
    };
    let (lo, t_lo) = crossing(-1);
    let (hi, t_hi) = crossing(1);
    BeamExtent {
        value_m: (hi - lo).abs(),
        truncated: t_lo || t_hi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extent_of_triangle() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let p: Vec<f64> = xs.iter().map(|&x| 10f64.powf(-(x - 5.0f64).abs() * 0.3)).collect();
        // −3.0103 dB at |x−5| = 1.0034
        let e = half_power_extent(&xs, &p, 5);
        assert!(!e.truncated);
        assert!((e.value_m - 2.0 * std::f64::consts::LOG10_2 / 0.3).abs() < 1e-3);
    }

    #[test]
    fn extent_flags_edges() {
        let xs = vec![0.0, 1.0, 2.0];
        let e = half_power_extent(&xs, &[1.0, 0.9, 0.8], 0);
        assert!(e.truncated);
    }

    #[test]
    fn rejects_bad_grids() {
        let carrier = CarrierConfig::from_wavelength(0.01).unwrap();
        let panel = RisPanel::square(4, 0.007).unwrap();
        let src = SourceGeometry::new(100.0, 0.0, 1.0, 1.0).unwrap();
        let empty = SampleGrid { xs: vec![], zs: vec![0.1] };
        assert!(beam_heatmap(&panel, &src, &empty, &carrier).is_err());
        let behind = SampleGrid { xs: vec![0.0], zs: vec![-0.1] };
        assert!(beam_heatmap(&panel, &src, &behind, &carrier).is_err());
    }
}
