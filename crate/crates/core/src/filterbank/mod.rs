//! Orthonormal wavelet filter catalog and the filter-domain algebra used to
//! show that a product of wavelet matrices is not a two-channel filterbank.
//!
//! All filters are supported on `0..M`. The z-transform convention is
//! `H(z) = sum_k h[k] z^{-k}`.

mod polyphase;
mod taps;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, czero, Scalar};

pub use polyphase::{
    certify_product, polyphase_determinant, polyphase_matrix, PolyphaseReport, DEFAULT_GRID_SIZE,
    PR_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Haar,
    Daubechies,
    Symmlet,
    Coiflet,
    ComplexDaubechies,
}

/// A named FIR filter.
///
/// `shift_n` is the circular offset the matrix builder adds to the tap index.
/// The catalog uses 0 for every filter; see [`FilterSpec::with_shift`].
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec<T> {
    pub name: String,
    pub taps: Vec<Complex<T>>,
    pub shift_n: i64,
    pub vanishing_moments: u32,
    pub family: Family,
}

/// Every name accepted by [`get_filter`].
pub const CATALOG: &[&str] = &[
    "haar", "db2", "db3", "db4", "db5", "db6", "db7", "db8", "db9", "db10", "sym4", "sym5",
    "sym6", "sym7", "sym8", "coif1", "coif2", "coif3", "cd6",
];

/// Looks up a catalog filter and checks its orthonormality invariants.
pub fn get_filter<T: Scalar>(name: &str) -> Result<FilterSpec<T>> {
    let (family, vm, real): (Family, u32, &[f64]) = match name {
        "haar" => (Family::Haar, 1, &HAAR),
        "db2" => (Family::Daubechies, 2, &taps::DB2),
        "db3" => (Family::Daubechies, 3, &taps::DB3),
        "db4" => (Family::Daubechies, 4, &taps::DB4),
        "db5" => (Family::Daubechies, 5, &taps::DB5),
        "db6" => (Family::Daubechies, 6, &taps::DB6),
        "db7" => (Family::Daubechies, 7, &taps::DB7),
        "db8" => (Family::Daubechies, 8, &taps::DB8),
        "db9" => (Family::Daubechies, 9, &taps::DB9),
        "db10" => (Family::Daubechies, 10, &taps::DB10),
        "sym4" => (Family::Symmlet, 4, &taps::SYM4),
        "sym5" => (Family::Symmlet, 5, &taps::SYM5),
        "sym6" => (Family::Symmlet, 6, &taps::SYM6),
        "sym7" => (Family::Symmlet, 7, &taps::SYM7),
        "sym8" => (Family::Symmlet, 8, &taps::SYM8),
        "coif1" => (Family::Coiflet, 2, &taps::COIF1),
        "coif2" => (Family::Coiflet, 4, &taps::COIF2),
        "coif3" => (Family::Coiflet, 6, &taps::COIF3),
        "cd6" => {
            let spec = FilterSpec {
                name: name.to_string(),
                taps: complex_daubechies6(),
                shift_n: 0,
                vanishing_moments: 3,
                family: Family::ComplexDaubechies,
            };
            spec.validate()?;
            return Ok(spec);
        }
        other => return Err(Error::UnknownFilter(other.to_string())),
    };
    let spec = FilterSpec {
        name: name.to_string(),
        taps: real.iter().map(|&x| cplx(T::lit(x))).collect(),
        shift_n: 0,
        vanishing_moments: vm,
        family,
    };
    spec.validate()?;
    Ok(spec)
}

const HAAR: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

/// Six-tap symmetric complex Daubechies filter, `sqrt(2)/64 * (-3 - i r, 5 - i r,
/// 30 + 2 i r, 30 + 2 i r, 5 - i r, -3 - i r)` with `r = sqrt(15)`.
fn complex_daubechies6<T: Scalar>() -> Vec<Complex<T>> {
    let r = T::lit(15.0).sqrt();
    let scale = T::SQRT_2() / T::lit(64.0);
    let a = Complex::new(T::lit(-3.0), -r);
    let b = Complex::new(T::lit(5.0), -r);
    let c = Complex::new(T::lit(30.0), r + r);
    [a, b, c, c, b, a].iter().map(|z| z * scale).collect()
}

impl<T: Scalar> FilterSpec<T> {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.taps.iter().all(|z| z.im == T::zero())
    }

    pub fn with_shift(mut self, shift_n: i64) -> Self {
        self.shift_n = shift_n;
        self
    }

    pub fn tap_sum(&self) -> Complex<T> {
        tap_sum(&self.taps)
    }

    pub fn energy(&self) -> T {
        self.taps.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }

    /// Checks `sum h = sqrt(2)`, `sum |h|^2 = 1` and double-shift orthogonality.
    pub fn validate(&self) -> Result<()> {
        let tol = T::structural_tol();
        let fail = |reason: String| Error::InvalidFilter {
            name: self.name.clone(),
            reason,
        };
        if self.taps.is_empty() {
            return Err(fail("no taps".into()));
        }
        let sum = self.tap_sum();
        if (sum.re - T::SQRT_2()).abs() > tol || sum.im.abs() > tol {
            return Err(fail(format!("tap sum {sum} != sqrt(2)")));
        }
        let energy = self.energy();
        if (energy - T::one()).abs() > tol {
            return Err(fail(format!("energy {energy} != 1")));
        }
        let half = (self.taps.len() as i64 + 1) / 2;
        for k in 1..half {
            let c = double_shift_correlation(&self.taps, &self.taps, k);
            if c.norm() > tol {
                return Err(fail(format!("shift-{} correlation {c} != 0", 2 * k)));
            }
        }
        Ok(())
    }
}

pub fn tap_sum<T: Scalar>(taps: &[Complex<T>]) -> Complex<T> {
    taps.iter().fold(czero(), |a, b| a + b)
}

/// `sum_s a[s] * conj(b[s + 2k])`, with taps outside the support taken as zero.
pub fn double_shift_correlation<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>], k: i64) -> Complex<T> {
    let mut acc = czero();
    for (s, &x) in a.iter().enumerate() {
        let t = s as i64 + 2 * k;
        if t >= 0 && (t as usize) < b.len() {
            acc += x * b[t as usize].conj();
        }
    }
    acc
}

/// High-pass partner by alternating conjugate flip, `g[i] = (-1)^i conj(h[M-1-i])`.
pub fn qmf<T: Scalar>(h: &FilterSpec<T>) -> FilterSpec<T> {
    FilterSpec {
        name: format!("qmf({})", h.name),
        taps: qmf_taps(&h.taps),
        shift_n: h.shift_n,
        vanishing_moments: h.vanishing_moments,
        family: h.family,
    }
}

pub fn qmf_taps<T: Scalar>(h: &[Complex<T>]) -> Vec<Complex<T>> {
    let m = h.len();
    (0..m)
        .map(|i| {
            let v = h[m - 1 - i].conj();
            if i % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Inserts one zero between consecutive taps.
pub fn upsample2<T: Scalar>(taps: &[Complex<T>]) -> Vec<Complex<T>> {
    if taps.is_empty() {
        return Vec::new();
    }
    let mut out = vec![czero(); 2 * taps.len() - 1];
    for (i, &t) in taps.iter().enumerate() {
        out[2 * i] = t;
    }
    out
}

pub fn convolve<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![czero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Collapsed low-pass `h1 * upsample2(h2)`, i.e. `H_A(z) = H_1(z) H_2(z^2)`.
pub fn collapse_product_filter<T: Scalar>(h1: &FilterSpec<T>, h2: &FilterSpec<T>) -> Vec<Complex<T>> {
    convolve(&h1.taps, &upsample2(&h2.taps))
}

/// `sum_k taps[k] * z^{-k}`; `z` must be nonzero.
pub fn eval_z<T: Scalar>(taps: &[Complex<T>], z: Complex<T>) -> Complex<T> {
    let w = z.inv();
    taps.iter().rev().fold(czero(), |acc, &t| acc * w + t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn haar_taps_and_shift() {
        let h = get_filter::<f64>("haar").unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(h.taps, vec![c(r), c(r)]);
        assert_eq!(h.vanishing_moments, 1);
        assert_eq!(h.shift_n, 0);
    }

    #[test]
    fn unknown_filter_is_rejected() {
        match get_filter::<f64>("haarr") {
            Err(Error::UnknownFilter(name)) => assert_eq!(name, "haarr"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn whole_catalog_loads() {
        for name in CATALOG {
            let f = get_filter::<f64>(name).unwrap();
            assert_eq!(f.name, *name);
        }
        assert!(get_filter::<f32>("sym8").is_ok());
    }

    #[test]
    fn db2_invariants_by_brute_force() {
        let h = get_filter::<f64>("db2").unwrap();
        assert_eq!(h.len(), 4);
        let s: f64 = h.taps.iter().map(|z| z.re).sum();
        let e: f64 = h.taps.iter().map(|z| z.re * z.re).sum();
        let shift2: f64 = h.taps[0].re * h.taps[2].re + h.taps[1].re * h.taps[3].re;
        assert!((s - 2f64.sqrt()).abs() < 1e-10);
        assert!((e - 1.0).abs() < 1e-10);
        assert!(shift2.abs() < 1e-10);
    }

    #[test]
    fn corrupted_taps_fail_validation() {
        let mut h = get_filter::<f64>("db3").unwrap();
        h.taps[2].re += 1e-6;
        assert!(matches!(h.validate(), Err(Error::InvalidFilter { .. })));
    }

    #[test]
    fn haar_qmf() {
        let g = qmf(&get_filter::<f64>("haar").unwrap());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(g.taps, vec![c(r), c(-r)]);
    }

    #[test]
    fn qmf_sums_to_zero_and_is_cross_orthogonal() {
        for name in CATALOG {
            let h = get_filter::<f64>(name).unwrap();
            let g = qmf(&h);
            assert!(g.tap_sum().norm() < 1e-10, "{name}");
            assert!((g.energy() - 1.0).abs() < 1e-10, "{name}");
            let m = h.len() as i64;
            for k in -m..=m {
                let x = double_shift_correlation(&g.taps, &h.taps, k);
                assert!(x.norm() < 1e-10, "{name} k={k}: {x}");
            }
        }
    }

    #[test]
    fn qmf_twice_is_sign_flip() {
        for name in CATALOG {
            let h = get_filter::<f64>(name).unwrap();
            let back = qmf_taps(&qmf_taps(&h.taps));
            // Even length: the double flip negates every tap.
            for (a, b) in h.taps.iter().zip(&back) {
                assert!((a + b).norm() < 1e-15, "{name}");
            }
        }
    }

    #[test]
    fn collapse_haar_haar() {
        let h = get_filter::<f64>("haar").unwrap();
        let a = collapse_product_filter(&h, &h);
        assert_eq!(a.len(), 4);
        for t in &a {
            assert!((t - c(0.5)).norm() < 1e-15);
        }
        assert!(eval_z(&a, c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn collapse_with_impulse_is_identity() {
        let h1 = get_filter::<f64>("sym5").unwrap();
        let delta = FilterSpec {
            taps: vec![c(1.0)],
            ..h1.clone()
        };
        assert_eq!(collapse_product_filter(&h1, &delta), h1.taps);
    }

    #[test]
    fn collapsed_sum_is_two() {
        let a = collapse_product_filter(
            &get_filter::<f64>("db4").unwrap(),
            &get_filter::<f64>("coif2").unwrap(),
        );
        assert_eq!(a.len(), 8 + 2 * 12 - 2);
        assert!((tap_sum(&a) - c(2.0)).norm() < 1e-10);
        assert!((eval_z(&a, c(1.0)) - c(2.0)).norm() < 1e-10);
    }

    #[test]
    fn eval_z_basics() {
        let h = get_filter::<f64>("haar").unwrap();
        assert!((eval_z(&h.taps, c(1.0)) - c(2f64.sqrt())).norm() < 1e-15);
        let z = Complex::new(0.3, -1.7);
        assert_eq!(eval_z(&[c(1.0)], z), c(1.0));
        // negative powers: h[1] multiplies z^{-1}
        let v = eval_z(&[c(0.0), c(1.0)], Complex::new(2.0, 0.0));
        assert!((v - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn every_catalog_filter_has_nyquist_zero() {
        for name in CATALOG {
            let h = get_filter::<f64>(name).unwrap();
            assert!(eval_z(&h.taps, c(-1.0)).norm() < 1e-10, "{name}");
        }
    }
}
