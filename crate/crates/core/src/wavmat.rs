//! Explicit wavelet matrices: single-level circulant blocks, the multilevel
//! cascade `W_L`, and the epsilon-decimated variants.
//!
//! Entry `(i, c)` of the level block `H` (size `rows x 2 rows`) is
//! `h[(shift_n + eps + c - 2 i) mod 2 rows]`, zero outside the filter support,
//! so row `i` is row 0 rotated right by `2 i`.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::{qmf_taps, FilterSpec};
use crate::scalar::{cplx, czero, Scalar};

/// Largest operator size stored densely.
pub const MAX_DENSE: usize = 4096;

pub type Matrix<T> = Array2<Complex<T>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    Scaling,
    Detail,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub kind: BandKind,
    /// Resolution level `J - k` in the dyadic numbering of the owning block.
    pub level: usize,
    /// Decomposition step `k` that produced the band; 1 is the finest.
    pub depth: usize,
    pub start: usize,
    pub length: usize,
}

impl Band {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.length
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandLayout {
    pub bands: Vec<Band>,
}

impl BandLayout {
    /// Scaling band of length `n / 2^levels`, then detail bands from coarsest to finest.
    pub fn wavelet(n: usize, levels: usize) -> Self {
        let j = n.trailing_zeros() as usize;
        let mut bands = Vec::with_capacity(levels + 1);
        let coarse = n >> levels;
        bands.push(Band {
            kind: BandKind::Scaling,
            level: j - levels,
            depth: levels,
            start: 0,
            length: coarse,
        });
        let mut start = coarse;
        for depth in (1..=levels).rev() {
            let length = n >> depth;
            bands.push(Band {
                kind: BandKind::Detail,
                level: j - depth,
                depth,
                start,
                length,
            });
            start += length;
        }
        BandLayout { bands }
    }

    pub fn mixed(n: usize) -> Self {
        BandLayout {
            bands: vec![Band {
                kind: BandKind::Mixed,
                level: 0,
                depth: 0,
                start: 0,
                length: n,
            }],
        }
    }

    /// Concatenation with offsets, as produced by a block-diagonal assembly.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BandLayout>) -> Self {
        let mut bands = Vec::new();
        let mut offset = 0;
        for layout in parts {
            for b in &layout.bands {
                bands.push(Band {
                    start: b.start + offset,
                    ..*b
                });
            }
            offset += layout.len();
        }
        BandLayout { bands }
    }

    pub fn len(&self) -> usize {
        self.bands.iter().map(|b| b.length).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_mixed(&self) -> bool {
        self.bands.iter().all(|b| b.kind == BandKind::Mixed)
    }

    pub fn has_scaling(&self) -> bool {
        self.bands.iter().any(|b| b.kind == BandKind::Scaling)
    }

    fn indices_where(&self, pred: impl Fn(&Band) -> bool) -> Vec<usize> {
        self.bands
            .iter()
            .filter(|b| pred(b))
            .flat_map(|b| b.range())
            .collect()
    }

    pub fn scaling_indices(&self) -> Vec<usize> {
        self.indices_where(|b| b.kind == BandKind::Scaling)
    }

    pub fn detail_indices(&self) -> Vec<usize> {
        self.indices_where(|b| b.kind == BandKind::Detail)
    }

    /// Indices of every depth-1 detail band, or `None` when there is none.
    pub fn finest_detail_indices(&self) -> Option<Vec<usize>> {
        let idx = self.indices_where(|b| b.kind == BandKind::Detail && b.depth == 1);
        (!idx.is_empty()).then_some(idx)
    }

    fn check_partition(&self) -> bool {
        let mut covered = vec![false; self.len()];
        for b in &self.bands {
            for i in b.range() {
                if i >= covered.len() || covered[i] {
                    return false;
                }
                covered[i] = true;
            }
        }
        covered.into_iter().all(|c| c)
    }
}

/// Transform-domain values together with their band layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<T> {
    pub values: Vec<Complex<T>>,
    pub layout: BandLayout,
}

impl<T: Scalar> CoefficientVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> T {
        self.values.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }
}

/// A dense unitary operator with its coefficient layout and construction recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletOperator<T> {
    pub n: usize,
    pub matrix: Matrix<T>,
    pub layout: BandLayout,
    pub recipe: String,
}

pub(crate) fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if n > MAX_DENSE {
        return Err(Error::SizeOverflow { n, max: MAX_DENSE });
    }
    Ok(())
}

fn tap_column(t: usize, shift: i64, eps: u8, i: usize, m: usize) -> usize {
    let c = t as i64 - shift - eps as i64 + 2 * i as i64;
    c.rem_euclid(m as i64) as usize
}

fn check_block(filter_len: usize, block: usize) -> Result<()> {
    if filter_len > block {
        return Err(Error::FilterLongerThanBlock {
            taps: filter_len,
            block,
        });
    }
    Ok(())
}

/// Low-pass and high-pass level blocks, each `rows x 2 rows`.
pub fn build_level_blocks<T: Scalar>(
    filter: &FilterSpec<T>,
    rows: usize,
    eps: u8,
) -> Result<(Matrix<T>, Matrix<T>)> {
    if rows == 0 {
        return Err(Error::BadLength("a level block needs at least one row".into()));
    }
    let m = 2 * rows;
    check_block(filter.len(), m)?;
    let g = qmf_taps(&filter.taps);
    let mut hm = Array2::from_elem((rows, m), czero());
    let mut gm = Array2::from_elem((rows, m), czero());
    for i in 0..rows {
        for (t, (&ht, &gt)) in filter.taps.iter().zip(&g).enumerate() {
            let c = tap_column(t, filter.shift_n, eps, i, m);
            hm[[i, c]] = ht;
            gm[[i, c]] = gt;
        }
    }
    Ok((hm, gm))
}

/// Applies one level block to the rows of `cur` (shape `m x n`) without forming it.
fn apply_block<T: Scalar>(taps: &[Complex<T>], shift: i64, eps: u8, cur: &Matrix<T>) -> Matrix<T> {
    let m = cur.nrows();
    let rows = m / 2;
    let mut out = Array2::from_elem((rows, cur.ncols()), czero());
    for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        for (t, &tap) in taps.iter().enumerate() {
            if tap == czero() {
                continue;
            }
            let src = cur.row(tap_column(t, shift, eps, i, m));
            row.zip_mut_with(&src, |o, &s| *o += tap * s);
        }
    }
    out
}

/// `L`-level wavelet matrix; `eps[k-1]` selects the decimation phase at step `k`.
pub fn build_wavmat<T: Scalar>(
    filter: &FilterSpec<T>,
    n: usize,
    levels: usize,
    eps: &[u8],
) -> Result<WaveletOperator<T>> {
    check_power_of_two(n)?;
    let j = n.trailing_zeros() as usize;
    if levels == 0 || levels > j {
        return Err(Error::InvalidLevels { levels, n });
    }
    if eps.len() != levels {
        return Err(Error::EpsLength {
            expected: levels,
            got: eps.len(),
        });
    }
    if let Some(&bad) = eps.iter().find(|&&e| e > 1) {
        return Err(Error::InvalidConfig(format!("decimation bit {bad} is not 0 or 1")));
    }
    check_block(filter.len(), n >> (levels - 1))?;

    let g = qmf_taps(&filter.taps);
    let mut cur: Matrix<T> = Array2::from_shape_fn((n, n), |(r, c)| {
        if r == c {
            cplx(T::one())
        } else {
            czero()
        }
    });
    let mut details = Vec::with_capacity(levels);
    for &e in eps {
        details.push(apply_block(&g, filter.shift_n, e, &cur));
        cur = apply_block(&filter.taps, filter.shift_n, e, &cur);
    }
    let mut matrix = Array2::from_elem((n, n), czero());
    let mut start = cur.nrows();
    matrix.slice_mut(ndarray::s![..start, ..]).assign(&cur);
    for d in details.iter().rev() {
        let end = start + d.nrows();
        matrix.slice_mut(ndarray::s![start..end, ..]).assign(d);
        start = end;
    }
    Ok(WaveletOperator {
        n,
        matrix,
        layout: BandLayout::wavelet(n, levels),
        recipe: wavmat_recipe(&filter.name, levels, eps, filter.shift_n),
    })
}

pub(crate) fn wavmat_recipe(name: &str, levels: usize, eps: &[u8], shift: i64) -> String {
    let mut s = format!("wavmat({name},L={levels}");
    if eps.iter().any(|&e| e != 0) {
        s.push_str(",eps=");
        s.extend(eps.iter().map(|&e| if e == 0 { '0' } else { '1' }));
    }
    if shift != 0 {
        s.push_str(&format!(",shift={shift}"));
    }
    s.push(')');
    s
}

fn to_array<T: Scalar>(y: &[Complex<T>]) -> Array1<Complex<T>> {
    Array1::from(y.to_vec())
}

/// `W^H d` for a vector view.
pub(crate) fn adjoint_mul<T: Scalar>(m: &Matrix<T>, d: ArrayView1<Complex<T>>) -> Array1<Complex<T>> {
    let dc = d.mapv(|z| z.conj());
    m.t().dot(&dc).mapv(|z| z.conj())
}

impl<T: Scalar> WaveletOperator<T> {
    /// Wraps an arbitrary square matrix; the caller is responsible for unitarity.
    pub fn from_matrix(matrix: Matrix<T>, layout: BandLayout, recipe: impl Into<String>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::SizeMismatch(format!(
                "matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if layout.len() != n || !layout.check_partition() {
            return Err(Error::SizeMismatch(format!(
                "layout covers {} entries, operator has {n}",
                layout.len()
            )));
        }
        Ok(WaveletOperator {
            n,
            matrix,
            layout,
            recipe: recipe.into(),
        })
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == T::zero())
    }

    pub fn apply(&self, y: &[Complex<T>]) -> Result<CoefficientVector<T>> {
        self.check_len(y.len())?;
        let d = self.matrix.dot(&to_array(y));
        Ok(CoefficientVector {
            values: d.to_vec(),
            layout: self.layout.clone(),
        })
    }

    pub fn apply_real(&self, y: &[T]) -> Result<CoefficientVector<T>> {
        let yc: Vec<Complex<T>> = y.iter().map(|&v| cplx(v)).collect();
        self.apply(&yc)
    }

    /// `W^H d`.
    pub fn inverse_apply(&self, d: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_len(d.len())?;
        Ok(adjoint_mul(&self.matrix, to_array(d).view()).to_vec())
    }

    /// Analysis atom `W^H e_k`, the conjugate of row `k`.
    pub fn atom(&self, k: usize) -> Result<Vec<Complex<T>>> {
        if k >= self.n {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.n,
            });
        }
        Ok(self.matrix.row(k).iter().map(|z| z.conj()).collect())
    }

    pub fn adjoint(&self) -> Self {
        WaveletOperator {
            n: self.n,
            matrix: self.matrix.t().mapv(|z| z.conj()),
            layout: BandLayout::mixed(self.n),
            recipe: format!("adjoint({})", self.recipe),
        }
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    /// `max |W^H W - I|`, accumulated row by row over each row's nonzero support.
    pub fn unitarity_defect(&self) -> T {
        gram_defect(&self.matrix)
    }
}

/// `max |A^H A - I|` for a square `A`, skipping exact zeros.
pub fn gram_defect<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.ncols();
    let mut gram = Array2::from_elem((n, n), czero::<T>());
    let mut support: Vec<(usize, Complex<T>)> = Vec::with_capacity(n);
    for row in a.rows() {
        support.clear();
        support.extend(row.iter().copied().enumerate().filter(|(_, z)| *z != czero()));
        for &(p, vp) in &support {
            let cp = vp.conj();
            let mut grow = gram.row_mut(p);
            for &(q, vq) in &support {
                grow[q] += cp * vq;
            }
        }
    }
    let mut worst = T::zero();
    for ((r, c), z) in gram.indexed_iter() {
        let target = if r == c { cplx(T::one()) } else { czero() };
        worst = worst.max((z - target).norm());
    }
    worst
}

/// `max |A B^H - target|` where `target` is the identity or zero, using row supports.
pub fn cross_gram_defect<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, identity: bool) -> T {
    let sparse = |m: &Matrix<T>| -> Vec<Vec<(usize, Complex<T>)>> {
        m.rows()
            .into_iter()
            .map(|r| r.iter().copied().enumerate().filter(|(_, z)| *z != czero()).collect())
            .collect()
    };
    let (sa, sb) = (sparse(a), sparse(b));
    let mut dense_b = vec![czero::<T>(); b.ncols()];
    let mut worst = T::zero();
    for (i, ra) in sa.iter().enumerate() {
        for (j, rb) in sb.iter().enumerate() {
            for &(q, v) in rb {
                dense_b[q] = v;
            }
            let mut acc = czero::<T>();
            for &(p, v) in ra {
                acc += v * dense_b[p].conj();
            }
            for &(q, _) in rb {
                dense_b[q] = czero();
            }
            let target = if identity && i == j { cplx(T::one()) } else { czero() };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::get_filter;

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn real_rows(m: &Matrix<f64>) -> Vec<Vec<f64>> {
        m.rows().into_iter().map(|r| r.iter().map(|z| z.re).collect()).collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    fn same_up_to_sign(a: &[f64], b: &[f64]) -> bool {
        let neg: Vec<f64> = b.iter().map(|x| -x).collect();
        close(a, b, 1e-12) || close(a, &neg, 1e-12)
    }

    #[test]
    fn haar_level_block_rows() {
        let h = get_filter::<f64>("haar").unwrap();
        let (hm, gm) = build_level_blocks(&h, 2, 0).unwrap();
        assert_eq!(real_rows(&hm), vec![vec![R, R, 0.0, 0.0], vec![0.0, 0.0, R, R]]);
        assert_eq!(real_rows(&gm), vec![vec![R, -R, 0.0, 0.0], vec![0.0, 0.0, R, -R]]);
    }

    #[test]
    fn level_rows_rotate_by_two() {
        let h = get_filter::<f64>("db3").unwrap();
        let (hm, _) = build_level_blocks(&h, 8, 1).unwrap();
        let row0: Vec<_> = hm.row(0).to_vec();
        for i in 1..8 {
            let rotated: Vec<_> = (0..16).map(|c| row0[(c + 16 - 2 * i) % 16]).collect();
            assert_eq!(hm.row(i).to_vec(), rotated);
        }
    }

    #[test]
    fn eps_shifts_rows_by_one_sample() {
        let h = get_filter::<f64>("db2").unwrap();
        let (h0, _) = build_level_blocks(&h, 4, 0).unwrap();
        let (h1, _) = build_level_blocks(&h, 4, 1).unwrap();
        for i in 0..4 {
            for c in 0..8 {
                assert_eq!(h1[[i, (c + 7) % 8]], h0[[i, c]]);
            }
        }
    }

    #[test]
    fn filter_longer_than_block() {
        let h = get_filter::<f64>("db4").unwrap();
        assert!(matches!(
            build_level_blocks(&h, 2, 0),
            Err(Error::FilterLongerThanBlock { taps: 8, block: 4 })
        ));
        assert!(matches!(
            build_wavmat(&h, 16, 3, &[0, 0, 0]),
            Err(Error::FilterLongerThanBlock { .. })
        ));
    }

    #[test]
    fn haar_two_by_two() {
        let h = get_filter::<f64>("haar").unwrap();
        let w = build_wavmat(&h, 2, 1, &[0]).unwrap();
        assert_eq!(real_rows(&w.matrix), vec![vec![R, R], vec![R, -R]]);
        let d = w.apply_real(&[1.0, 1.0]).unwrap();
        assert!((d.values[0].re - 2f64.sqrt()).abs() < 1e-15);
        assert!(d.values[1].norm() < 1e-15);
    }

    #[test]
    fn haar_four_two_levels() {
        let h = get_filter::<f64>("haar").unwrap();
        let w = build_wavmat(&h, 4, 2, &[0, 0]).unwrap();
        let rows = real_rows(&w.matrix);
        let expected = [
            vec![0.5, 0.5, 0.5, 0.5],
            vec![0.5, 0.5, -0.5, -0.5],
            vec![R, -R, 0.0, 0.0],
            vec![0.0, 0.0, R, -R],
        ];
        for (r, e) in rows.iter().zip(&expected) {
            assert!(same_up_to_sign(r, e), "{r:?} vs {e:?}");
        }
        let atom = w.atom(0).unwrap();
        let re: Vec<f64> = atom.iter().map(|z| z.re).collect();
        assert!(same_up_to_sign(&re, &expected[0]));
    }

    #[test]
    fn layout_partitions_and_names_bands() {
        let l = BandLayout::wavelet(64, 3);
        assert!(l.check_partition());
        assert_eq!(l.bands.len(), 4);
        assert_eq!(l.bands[0].kind, BandKind::Scaling);
        assert_eq!(l.bands[0].length, 8);
        assert_eq!(l.bands[0].level, 3);
        assert_eq!(l.bands[3].level, 5);
        assert_eq!(l.finest_detail_indices().unwrap(), (32..64).collect::<Vec<_>>());
        assert!(BandLayout::mixed(8).finest_detail_indices().is_none());
    }

    #[test]
    fn recipe_strings() {
        let h = get_filter::<f64>("sym4").unwrap();
        assert_eq!(build_wavmat(&h, 64, 3, &[0, 0, 0]).unwrap().recipe, "wavmat(sym4,L=3)");
        assert_eq!(
            build_wavmat(&h, 64, 3, &[0, 1, 0]).unwrap().recipe,
            "wavmat(sym4,L=3,eps=010)"
        );
    }

    #[test]
    fn bad_arguments() {
        let h = get_filter::<f64>("haar").unwrap();
        assert!(matches!(build_wavmat(&h, 12, 1, &[0]), Err(Error::NotPowerOfTwo(12))));
        assert!(matches!(build_wavmat(&h, 8, 4, &[0; 4]), Err(Error::InvalidLevels { .. })));
        assert!(matches!(build_wavmat(&h, 8, 0, &[]), Err(Error::InvalidLevels { .. })));
        assert!(matches!(build_wavmat(&h, 8, 2, &[0]), Err(Error::EpsLength { .. })));
        let w = build_wavmat(&h, 8, 2, &[0, 0]).unwrap();
        assert!(matches!(w.apply_real(&[1.0; 4]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(w.atom(8), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn inverse_of_unit_vector_is_atom() {
        let h = get_filter::<f64>("cd6").unwrap();
        let w = build_wavmat(&h, 32, 2, &[1, 0]).unwrap();
        let mut e = vec![czero(); 32];
        e[5] = cplx(1.0);
        let back = w.inverse_apply(&e).unwrap();
        assert_eq!(back, w.atom(5).unwrap());
        let zero = w.inverse_apply(&vec![czero(); 32]).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gram_defect_detects_non_unitary() {
        let h = get_filter::<f64>("db2").unwrap();
        let mut w = build_wavmat(&h, 16, 2, &[0, 0]).unwrap();
        assert!(w.unitarity_defect() < 1e-12);
        w.matrix[[3, 3]] += cplx(1e-6);
        assert!(w.unitarity_defect() > 1e-7);
    }

    #[test]
    fn f32_operator_is_unitary_at_single_precision() {
        let h = get_filter::<f32>("sym4").unwrap();
        let w = build_wavmat(&h, 64, 3, &[0, 0, 0]).unwrap();
        assert!(w.unitarity_defect() < 1e-5);
    }
}
