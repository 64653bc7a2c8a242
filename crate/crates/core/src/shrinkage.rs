//! Transform, hard-threshold, reconstruct.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, czero, Scalar};
use crate::wavmat::{BandKind, BandLayout, CoefficientVector, WaveletOperator};

/// Normal-consistency constant for the median absolute deviation.
pub const MAD_CONSTANT: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    #[default]
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSource {
    #[default]
    Universal,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    Known(f64),
    MadFinest,
    MadAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    #[serde(default)]
    pub kind: ThresholdKind,
    #[serde(default)]
    pub lambda: LambdaSource,
    pub sigma: SigmaSource,
    #[serde(default)]
    pub exempt_scaling: bool,
}

impl ThresholdRule {
    pub fn universal(sigma: SigmaSource) -> Self {
        ThresholdRule {
            kind: ThresholdKind::Hard,
            lambda: LambdaSource::Universal,
            sigma,
            exempt_scaling: false,
        }
    }

    pub fn known_sigma(sigma: f64) -> Self {
        Self::universal(SigmaSource::Known(sigma))
    }

    /// Universal threshold with a MAD estimate suited to the layout:
    /// finest details for a plain wavelet layout, all details otherwise.
    pub fn mad_for(layout: &BandLayout) -> Self {
        Self::universal(default_sigma_source(layout))
    }

    pub fn fixed(lambda: f64) -> Self {
        ThresholdRule {
            kind: ThresholdKind::Hard,
            lambda: LambdaSource::Fixed(lambda),
            sigma: SigmaSource::Known(1.0),
            exempt_scaling: false,
        }
    }

    pub fn with_exempt_scaling(mut self, exempt: bool) -> Self {
        self.exempt_scaling = exempt;
        self
    }
}

pub fn default_sigma_source(layout: &BandLayout) -> SigmaSource {
    if layout.finest_detail_indices().is_some() {
        SigmaSource::MadFinest
    } else {
        SigmaSource::MadAll
    }
}

pub(crate) fn median<T: Scalar>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) * T::lit(0.5)
    }
}

/// `median(|x|) / 0.6745`.
pub fn mad_sigma<T: Scalar>(values: impl IntoIterator<Item = Complex<T>>) -> Result<T> {
    let mags: Vec<T> = values.into_iter().map(|z| z.norm()).collect();
    if mags.is_empty() {
        return Err(Error::NoDetailBand);
    }
    let s = median(mags) / T::lit(MAD_CONSTANT);
    if s > T::zero() {
        Ok(s)
    } else {
        Err(Error::DegenerateEstimate)
    }
}

pub fn estimate_sigma<T: Scalar>(d: &CoefficientVector<T>, source: SigmaSource) -> Result<T> {
    if d.is_empty() {
        return Err(Error::LengthMismatch { expected: 1, got: 0 });
    }
    let idx = match source {
        SigmaSource::Known(s) => return Ok(T::lit(s)),
        SigmaSource::MadFinest => d.layout.finest_detail_indices().ok_or(Error::NoDetailBand)?,
        SigmaSource::MadAll => {
            let idx = d.layout.detail_indices();
            if idx.is_empty() {
                // Composite layouts carry no band labels; every coefficient counts.
                (0..d.len()).collect()
            } else {
                idx
            }
        }
    };
    mad_sigma(idx.into_iter().map(|i| d.values[i]))
}

/// `sigma * sqrt(2 ln n)`.
pub fn universal_threshold<T: Scalar>(n: usize, sigma: T) -> T {
    sigma * (T::lit(2.0) * T::lit(n as f64).ln()).sqrt()
}

/// Zeroes every coefficient with `|d_i| <= lambda`, except those in the bands listed in `exempt`.
pub fn hard_threshold<T: Scalar>(d: &CoefficientVector<T>, lambda: T, exempt: &[usize]) -> CoefficientVector<T> {
    let mut keep_all = vec![false; d.len()];
    for &b in exempt {
        if let Some(band) = d.layout.bands.get(b) {
            for i in band.range() {
                keep_all[i] = true;
            }
        }
    }
    let values = d
        .values
        .iter()
        .zip(&keep_all)
        .map(|(&z, &pass)| if pass || z.norm() > lambda { z } else { czero() })
        .collect();
    CoefficientVector {
        values,
        layout: d.layout.clone(),
    }
}

/// Indices into `layout.bands` of the scaling bands.
pub fn scaling_bands(layout: &BandLayout) -> Vec<usize> {
    layout
        .bands
        .iter()
        .enumerate()
        .filter(|(_, b)| b.kind == BandKind::Scaling)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Denoised<T> {
    pub estimate: Vec<Complex<T>>,
    pub lambda: T,
    pub sigma: T,
    /// Number of coefficients surviving the threshold, exempt ones included.
    pub kept: usize,
    pub thresholded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealDenoised<T> {
    pub estimate: Vec<T>,
    pub lambda: T,
    pub sigma: T,
    pub kept: usize,
    pub thresholded: usize,
    /// Max-norm of the discarded imaginary part.
    pub imag_residue: T,
}

/// Thresholds coefficients that were already computed, returning them and the diagnostics.
pub fn shrink<T: Scalar>(
    d: &CoefficientVector<T>,
    rule: &ThresholdRule,
) -> Result<(CoefficientVector<T>, T, T, usize)> {
    let exempt = if rule.exempt_scaling {
        scaling_bands(&d.layout)
    } else {
        Vec::new()
    };
    let exempt_count: usize = exempt.iter().map(|&b| d.layout.bands[b].length).sum();
    let thresholded = d.len() - exempt_count;
    let (lambda, sigma) = match rule.lambda {
        LambdaSource::Fixed(l) => (T::lit(l), T::nan()),
        LambdaSource::Universal => {
            let sigma = estimate_sigma(d, rule.sigma)?;
            (universal_threshold(thresholded.max(1), sigma), sigma)
        }
    };
    let kept_d = hard_threshold(d, lambda, &exempt);
    let kept = kept_d.values.iter().filter(|z| z.norm_sqr() > T::zero()).count();
    Ok((kept_d, lambda, sigma, kept))
}

pub fn denoise_complex<T: Scalar>(
    y: &[Complex<T>],
    w: &WaveletOperator<T>,
    rule: &ThresholdRule,
) -> Result<Denoised<T>> {
    let d = w.apply(y)?;
    let exempt_count: usize = if rule.exempt_scaling {
        scaling_bands(&d.layout).iter().map(|&b| d.layout.bands[b].length).sum()
    } else {
        0
    };
    let (kept_d, lambda, sigma, kept) = shrink(&d, rule)?;
    let estimate = w.inverse_apply(&kept_d.values)?;
    Ok(Denoised {
        estimate,
        lambda,
        sigma,
        kept,
        thresholded: d.len() - exempt_count,
    })
}

/// Denoises a real signal; the reconstruction's imaginary part is dropped and its size reported.
pub fn denoise<T: Scalar>(y: &[T], w: &WaveletOperator<T>, rule: &ThresholdRule) -> Result<RealDenoised<T>> {
    let yc: Vec<Complex<T>> = y.iter().map(|&v| cplx(v)).collect();
    let out = denoise_complex(&yc, w, rule)?;
    let imag_residue = out.estimate.iter().map(|z| z.im.abs()).fold(T::zero(), T::max);
    Ok(RealDenoised {
        estimate: out.estimate.iter().map(|z| z.re).collect(),
        lambda: out.lambda,
        sigma: out.sigma,
        kept: out.kept,
        thresholded: out.thresholded,
        imag_residue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recipe::build_recipe;

    fn plain(values: &[f64]) -> CoefficientVector<f64> {
        CoefficientVector {
            values: values.iter().map(|&v| Complex::new(v, 0.0)).collect(),
            layout: BandLayout::mixed(values.len()),
        }
    }

    #[test]
    fn universal_threshold_values() {
        let want = (2.0 * 1024f64.ln()).sqrt();
        assert!((universal_threshold(1024, 1.0f64) - want).abs() < 1e-12);
        assert!((want - 3.72330).abs() < 1e-5);
        assert_eq!(universal_threshold(1, 1.0f64), 0.0);
        let a = universal_threshold(77, 1.3f64);
        assert!((universal_threshold(77, 2.6f64) - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn hard_threshold_examples() {
        let d = plain(&[5.0, 0.1, -4.0]);
        let out: Vec<f64> = hard_threshold(&d, 1.0, &[]).values.iter().map(|z| z.re).collect();
        assert_eq!(out, vec![5.0, 0.0, -4.0]);
        let c = CoefficientVector {
            values: vec![Complex::new(3.0, 4.0)],
            layout: BandLayout::mixed(1),
        };
        assert_eq!(hard_threshold(&c, 4.0, &[]).values[0], Complex::new(3.0, 4.0));
        assert_eq!(hard_threshold(&c, 6.0, &[]).values[0], Complex::new(0.0, 0.0));
        // The boundary is exclusive.
        assert_eq!(hard_threshold(&c, 5.0, &[]).values[0], Complex::new(0.0, 0.0));
    }

    #[test]
    fn exempt_bands_pass_through() {
        let d = CoefficientVector {
            values: vec![Complex::new(0.5, 0.0); 8],
            layout: BandLayout::wavelet(8, 2),
        };
        let out = hard_threshold(&d, 1.0, &scaling_bands(&d.layout));
        let nz: Vec<bool> = out.values.iter().map(|z| z.re != 0.0).collect();
        assert_eq!(nz, vec![true, true, false, false, false, false, false, false]);
    }

    #[test]
    fn mad_estimates() {
        let mut values: Vec<Complex<f64>> = vec![Complex::new(9.0, 0.0); 4];
        values.extend(vec![Complex::new(-0.6745, 0.0); 4]);
        let d = CoefficientVector {
            values,
            layout: BandLayout::wavelet(8, 1),
        };
        assert!((estimate_sigma(&d, SigmaSource::MadFinest).unwrap() - 1.0).abs() < 1e-12);
        let zero = CoefficientVector {
            values: vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)],
            layout: BandLayout::wavelet(4, 1),
        };
        assert!(matches!(
            estimate_sigma(&zero, SigmaSource::MadFinest),
            Err(Error::DegenerateEstimate)
        ));
        assert_eq!(estimate_sigma(&zero, SigmaSource::Known(2.5)).unwrap(), 2.5);
        let mixed = plain(&[1.0, 2.0, 3.0]);
        assert!(matches!(estimate_sigma(&mixed, SigmaSource::MadFinest), Err(Error::NoDetailBand)));
        assert!((estimate_sigma(&mixed, SigmaSource::MadAll).unwrap() - 2.0 / MAD_CONSTANT).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_and_extreme_thresholds() {
        let w = build_recipe::<f64>("wavmat(db4,L=3)", 64).unwrap();
        let y: Vec<f64> = (0..64).map(|i| ((i * 7 % 13) as f64 - 6.0) / 3.0).collect();

        let zero = denoise(&[0.0; 64], &w, &ThresholdRule::known_sigma(1.0)).unwrap();
        assert!(zero.estimate.iter().all(|&v| v == 0.0));
        assert_eq!(zero.kept, 0);

        let id = denoise(&y, &w, &ThresholdRule::fixed(0.0)).unwrap();
        for (a, b) in id.estimate.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }

        let kill = denoise(&y, &w, &ThresholdRule::fixed(1e300)).unwrap();
        assert!(kill.estimate.iter().all(|&v| v == 0.0));
        assert_eq!(kill.kept, 0);
    }

    #[test]
    fn exemption_shrinks_the_threshold_count() {
        let w = build_recipe::<f64>("wavmat(haar,L=2)", 16).unwrap();
        let y: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let rule = ThresholdRule::known_sigma(1.0).with_exempt_scaling(true);
        let out = denoise(&y, &w, &rule).unwrap();
        assert_eq!(out.thresholded, 12);
        assert!((out.lambda - universal_threshold(12, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn cd6_real_signal_stays_real() {
        let w = build_recipe::<f64>("wavmat(cd6,L=3)", 128).unwrap();
        let y: Vec<f64> = (0..128).map(|i| (i as f64 * 0.3).sin() * 4.0).collect();
        let out = denoise(&y, &w, &ThresholdRule::known_sigma(1.0)).unwrap();
        assert!(out.imag_residue.is_finite());
    }

    #[test]
    fn default_sigma_follows_layout() {
        assert_eq!(default_sigma_source(&BandLayout::wavelet(16, 2)), SigmaSource::MadFinest);
        assert_eq!(default_sigma_source(&BandLayout::mixed(16)), SigmaSource::MadAll);
    }
}
