use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{collapse_product_filter, eval_z, qmf_taps, FilterSpec};
use crate::error::{Error, Result};
use crate::scalar::{cplx, czero, Scalar};

/// Minimum `|det E|` over the grid for a perfect-reconstruction verdict.
pub const PR_TOLERANCE: f64 = 1e-8;

pub const DEFAULT_GRID_SIZE: usize = 4097;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PolyphaseReport<T> {
    pub collapsed_taps: Vec<Complex<T>>,
    pub value_at_nyquist: Complex<T>,
    /// `(omega, det E(e^{i omega}))` on an endpoint-inclusive grid over `[-pi, pi]`.
    pub det_grid: Vec<(T, Complex<T>)>,
    pub is_perfect_reconstruction: bool,
    pub min_abs_det: T,
}

impl<T: Scalar> PolyphaseReport<T> {
    pub fn det_at_pi(&self) -> Complex<T> {
        self.det_grid.last().map(|&(_, d)| d).unwrap_or_else(czero)
    }

    pub fn max_abs_det(&self) -> T {
        self.det_grid
            .iter()
            .map(|(_, d)| d.norm())
            .fold(T::zero(), T::max)
    }
}

fn polyphase_components<T: Scalar>(taps: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let even = taps.iter().step_by(2).copied().collect();
    let odd = taps.iter().skip(1).step_by(2).copied().collect();
    (even, odd)
}

/// `[[H_e(z), H_o(z)], [G_e(z), G_o(z)]]` at `z = e^{i omega}`, where
/// `H(z) = H_e(z^2) + z^{-1} H_o(z^2)`.
pub fn polyphase_matrix<T: Scalar>(h: &[Complex<T>], g: &[Complex<T>], omega: T) -> [[Complex<T>; 2]; 2] {
    let z = Complex::from_polar(T::one(), omega);
    let (he, ho) = polyphase_components(h);
    let (ge, go) = polyphase_components(g);
    [
        [eval_z(&he, z), eval_z(&ho, z)],
        [eval_z(&ge, z), eval_z(&go, z)],
    ]
}

fn det2<T: Scalar>(m: &[[Complex<T>; 2]; 2]) -> Complex<T> {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Tabulates the polyphase determinant of the analysis pair `(h, g)`.
///
/// `h` is reported as `collapsed_taps`; its value at `z = -1` as `value_at_nyquist`.
pub fn polyphase_determinant<T: Scalar>(
    h: &[Complex<T>],
    g: &[Complex<T>],
    grid_size: usize,
) -> Result<PolyphaseReport<T>> {
    if grid_size < 3 || grid_size.is_multiple_of(2) {
        return Err(Error::InvalidGrid(grid_size));
    }
    let nonzero = |taps: &[Complex<T>]| taps.iter().any(|z| z.norm_sqr() > T::zero());
    if !nonzero(h) || !nonzero(g) {
        return Err(Error::EmptyFilter);
    }
    let pi = T::PI();
    let last = grid_size - 1;
    let step = (pi + pi) / T::lit(last as f64);
    let det_grid: Vec<(T, Complex<T>)> = (0..grid_size)
        .map(|k| {
            let omega = if k == last {
                pi
            } else {
                -pi + step * T::lit(k as f64)
            };
            (omega, det2(&polyphase_matrix(h, g, omega)))
        })
        .collect();
    let min_abs_det = det_grid
        .iter()
        .map(|(_, d)| d.norm())
        .fold(T::infinity(), T::min);
    Ok(PolyphaseReport {
        collapsed_taps: h.to_vec(),
        value_at_nyquist: eval_z(h, cplx(-T::one())),
        det_grid,
        is_perfect_reconstruction: min_abs_det > T::lit(PR_TOLERANCE),
        min_abs_det,
    })
}

/// Collapses `h1 * upsample2(h2)`, pairs it with its QMF and tabulates the determinant.
pub fn certify_product<T: Scalar>(
    h1: &FilterSpec<T>,
    h2: &FilterSpec<T>,
    grid_size: usize,
) -> Result<PolyphaseReport<T>> {
    let ha = collapse_product_filter(h1, h2);
    let ga = qmf_taps(&ha);
    polyphase_determinant(&ha, &ga, grid_size)
}
