//! Unitarity-preserving combinations of wavelet matrices.

use ndarray::{s, Array1, Array2};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{czero, Scalar};
use crate::wavmat::{BandLayout, Matrix, WaveletOperator, MAX_DENSE};

fn same_size<T>(parts: &[&WaveletOperator<T>], what: &str) -> Result<usize> {
    let n = parts[0].n;
    if let Some(p) = parts.iter().find(|p| p.n != n) {
        return Err(Error::SizeMismatch(format!(
            "{what}: `{}` has size {}, expected {n}",
            p.recipe, p.n
        )));
    }
    Ok(n)
}

fn join_recipes<T>(parts: &[&WaveletOperator<T>]) -> String {
    parts.iter().map(|p| p.recipe.as_str()).collect::<Vec<_>>().join(",")
}

/// `W_1 W_2 ... W_k`, multiplied strictly left to right.
pub fn product<T: Scalar>(parts: &[&WaveletOperator<T>]) -> Result<WaveletOperator<T>> {
    if parts.len() < 2 {
        return Err(Error::TooFewParts {
            min: 2,
            got: parts.len(),
        });
    }
    let n = same_size(parts, "product")?;
    let mut acc = parts[0].matrix.dot(&parts[1].matrix);
    for p in &parts[2..] {
        acc = acc.dot(&p.matrix);
    }
    Ok(WaveletOperator {
        n,
        matrix: acc,
        layout: BandLayout::mixed(n),
        recipe: format!("product({})", join_recipes(parts)),
    })
}

pub fn kron_matrix<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::from_elem((ra * rb, ca * cb), czero());
    for ((ia, ja), &av) in a.indexed_iter() {
        if av == czero() {
            continue;
        }
        out.slice_mut(s![ia * rb..(ia + 1) * rb, ja * cb..(ja + 1) * cb])
            .zip_mut_with(b, |o, &bv| *o = av * bv);
    }
    out
}

/// Kronecker product: entry `(ia nb + ib, ja nb + jb)` is `a[ia, ja] b[ib, jb]`.
pub fn kron<T: Scalar>(a: &WaveletOperator<T>, b: &WaveletOperator<T>) -> Result<WaveletOperator<T>> {
    let n = a.n * b.n;
    if n > MAX_DENSE {
        return Err(Error::SizeOverflow { n, max: MAX_DENSE });
    }
    Ok(WaveletOperator {
        n,
        matrix: kron_matrix(&a.matrix, &b.matrix),
        layout: BandLayout::mixed(n),
        recipe: format!("kron({},{})", a.recipe, b.recipe),
    })
}

/// `diag(W_1, ..., W_k)`; the layout is the concatenation of the part layouts.
pub fn block_diag<T: Scalar>(parts: &[&WaveletOperator<T>]) -> Result<WaveletOperator<T>> {
    if parts.is_empty() {
        return Err(Error::TooFewParts { min: 1, got: 0 });
    }
    let n: usize = parts.iter().map(|p| p.n).sum();
    if n > MAX_DENSE {
        return Err(Error::SizeOverflow { n, max: MAX_DENSE });
    }
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    let mut matrix = Array2::from_elem((n, n), czero());
    let mut off = 0;
    for p in parts {
        matrix
            .slice_mut(s![off..off + p.n, off..off + p.n])
            .assign(&p.matrix);
        off += p.n;
    }
    Ok(WaveletOperator {
        n,
        matrix,
        layout: BandLayout::concat(parts.iter().map(|p| &p.layout)),
        recipe: format!("blockdiag({})", join_recipes(parts)),
    })
}

/// `w^H a w`.
pub fn similarity<T: Scalar>(w: &WaveletOperator<T>, a: &WaveletOperator<T>) -> Result<WaveletOperator<T>> {
    let n = same_size(&[w, a], "similarity")?;
    let wh = w.matrix.t().mapv(|z| z.conj());
    let matrix = wh.dot(&a.matrix).dot(&w.matrix);
    Ok(WaveletOperator {
        n,
        matrix,
        layout: BandLayout::mixed(n),
        recipe: format!("similarity({},{})", w.recipe, a.recipe),
    })
}

fn check_2d<T>(rows: usize, cols: usize, w1: &WaveletOperator<T>, w2: &WaveletOperator<T>) -> Result<()> {
    if w1.n != rows || w2.n != cols {
        return Err(Error::SizeMismatch(format!(
            "{rows}x{cols} array needs operators of sizes {rows} and {cols}, got {} and {}",
            w1.n, w2.n
        )));
    }
    Ok(())
}

/// Scale-mixing 2-D transform `W_1 A W_2^H`.
pub fn transform2d<T: Scalar>(
    a: &Matrix<T>,
    w1: &WaveletOperator<T>,
    w2: &WaveletOperator<T>,
) -> Result<Matrix<T>> {
    let (m, n) = a.dim();
    check_2d(m, n, w1, w2)?;
    let w2h = w2.matrix.t().mapv(|z| z.conj());
    Ok(w1.matrix.dot(a).dot(&w2h))
}

/// Inverse of [`transform2d`]: `W_1^H C W_2`.
pub fn inverse_transform2d<T: Scalar>(
    c: &Matrix<T>,
    w1: &WaveletOperator<T>,
    w2: &WaveletOperator<T>,
) -> Result<Matrix<T>> {
    let (m, n) = c.dim();
    check_2d(m, n, w1, w2)?;
    let w1h = w1.matrix.t().mapv(|z| z.conj());
    Ok(w1h.dot(c).dot(&w2.matrix))
}

/// Operator acting on column-major `vec(A)` exactly as [`transform2d`] acts on `A`:
/// `conj(W_2) (x) W_1`.
pub fn transform2d_operator<T: Scalar>(
    w1: &WaveletOperator<T>,
    w2: &WaveletOperator<T>,
) -> Result<WaveletOperator<T>> {
    let conj2 = WaveletOperator {
        matrix: w2.matrix.mapv(|z| z.conj()),
        recipe: format!("conj({})", w2.recipe),
        ..w2.clone()
    };
    kron(&conj2, w1)
}

/// Column-major vectorization.
pub fn vec_col_major<T: Scalar>(a: &Matrix<T>) -> Array1<Complex<T>> {
    a.t().iter().copied().collect()
}

pub fn unvec_col_major<T: Scalar>(v: &[Complex<T>], rows: usize, cols: usize) -> Result<Matrix<T>> {
    if v.len() != rows * cols {
        return Err(Error::LengthMismatch {
            expected: rows * cols,
            got: v.len(),
        });
    }
    Ok(Array2::from_shape_fn((rows, cols), |(r, c)| v[c * rows + r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::get_filter;
    use crate::scalar::cplx;
    use crate::wavmat::build_wavmat;

    fn op(name: &str, n: usize, levels: usize) -> WaveletOperator<f64> {
        build_wavmat(&get_filter(name).unwrap(), n, levels, &vec![0; levels]).unwrap()
    }

    fn max_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn identity(n: usize) -> Matrix<f64> {
        Array2::from_shape_fn((n, n), |(r, c)| cplx(if r == c { 1.0 } else { 0.0 }))
    }

    #[test]
    fn product_with_adjoint_is_identity() {
        let w = op("cd6", 64, 3);
        let p = product(&[&w, &w.adjoint()]).unwrap();
        assert!(max_diff(&p.matrix, &identity(64)) < 1e-10);
    }

    #[test]
    fn haar_product_by_hand() {
        // W = [[a, a, 0, 0], [0, 0, a, a], [a, -a, 0, 0], [0, 0, a, -a]], a = 1/sqrt(2)
        let w = op("haar", 4, 1);
        let p = product(&[&w, &w]).unwrap();
        let e = [
            [0.5, 0.5, 0.5, 0.5],
            [0.5, -0.5, 0.5, -0.5],
            [0.5, 0.5, -0.5, -0.5],
            [0.5, -0.5, -0.5, 0.5],
        ];
        for ((r, c), z) in p.matrix.indexed_iter() {
            assert!((z.re - e[r][c]).abs() < 1e-15, "({r},{c})");
        }
        assert!(p.layout.is_mixed());
    }

    #[test]
    fn product_needs_equal_sizes() {
        let a = op("haar", 8, 1);
        let b = op("haar", 16, 1);
        assert!(matches!(product(&[&a, &b]), Err(Error::SizeMismatch(_))));
        assert!(matches!(product(&[&a]), Err(Error::TooFewParts { .. })));
    }

    #[test]
    fn kron_with_identity_is_block_diagonal() {
        let w = op("db2", 8, 2);
        let i2 = WaveletOperator::from_matrix(identity(2), BandLayout::mixed(2), "I2").unwrap();
        let k = kron(&i2, &w).unwrap();
        let b = block_diag(&[&w, &w]).unwrap();
        assert_eq!(k.matrix, b.matrix);
    }

    #[test]
    fn kron_is_unitary_and_overflow_is_caught() {
        let a = op("cd6", 16, 2);
        let b = op("haar", 8, 3);
        let k = kron(&a, &b).unwrap();
        let kh = k.adjoint();
        let p = product(&[&k, &kh]).unwrap();
        assert!(max_diff(&p.matrix, &identity(128)) < 1e-10);
        let big = op("haar", 4096, 1);
        assert!(matches!(kron(&big, &b), Err(Error::SizeOverflow { .. })));
    }

    #[test]
    fn block_diag_cases() {
        let w = op("sym4", 32, 2);
        assert_eq!(block_diag(&[&w]).unwrap(), w);
        let h = op("haar", 2, 1);
        let b = block_diag(&[&h, &h]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let e = [
            [r, r, 0.0, 0.0],
            [r, -r, 0.0, 0.0],
            [0.0, 0.0, r, r],
            [0.0, 0.0, r, -r],
        ];
        for ((i, j), z) in b.matrix.indexed_iter() {
            assert_eq!(z.re, e[i][j]);
        }
        assert_eq!(b.layout.len(), 4);
        assert_eq!(b.layout.scaling_indices(), vec![0, 2]);
    }

    #[test]
    fn similarity_by_identity_and_trace() {
        let a = op("db3", 64, 3);
        let w = op("cd6", 64, 3);
        let id = product(&[&w.adjoint(), &w]).unwrap();
        let b = similarity(&id, &a).unwrap();
        assert!(max_diff(&b.matrix, &a.matrix) < 1e-10);
        let s = similarity(&w, &a).unwrap();
        let tr = |m: &Matrix<f64>| m.diag().iter().fold(cplx(0.0), |x, y| x + y);
        assert!((tr(&s.matrix) - tr(&a.matrix)).norm() < 1e-9);
        assert!(s.unitarity_defect() < 1e-10);
    }

    #[test]
    fn transform2d_zero_and_vec_identity() {
        let w1 = op("sym4", 16, 2);
        let w2 = op("cd6", 8, 1);
        let zero = Array2::from_elem((16, 8), czero());
        assert!(transform2d(&zero, &w1, &w2).unwrap().iter().all(|z| z.norm() == 0.0));
        let a = Array2::from_shape_fn((16, 8), |(r, c)| Complex::new((r * 8 + c) as f64 * 0.1 - 3.0, 0.0));
        let t = transform2d(&a, &w1, &w2).unwrap();
        let k = transform2d_operator(&w1, &w2).unwrap();
        let lhs = vec_col_major(&t);
        let rhs = k.matrix.dot(&vec_col_major(&a));
        let err = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        let back = inverse_transform2d(&t, &w1, &w2).unwrap();
        assert!(max_diff(&back, &a) < 1e-10);
        assert!(matches!(transform2d(&a, &w2, &w1), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn vec_round_trip() {
        let a = Array2::from_shape_fn((3, 2), |(r, c)| cplx((10 * r + c) as f64));
        let v = vec_col_major(&a);
        assert_eq!(v.iter().map(|z| z.re).collect::<Vec<_>>(), vec![0.0, 10.0, 20.0, 1.0, 11.0, 21.0]);
        assert_eq!(unvec_col_major(v.as_slice().unwrap(), 3, 2).unwrap(), a);
    }
}
