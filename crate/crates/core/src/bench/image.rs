use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::recipe::parse_recipe;
use crate::scalar::Scalar;
use crate::shrinkage::{mad_sigma, universal_threshold, LambdaSource, SigmaSource, ThresholdRule};
use crate::signals::{gaussian_noise, NoiseSource};
use crate::wavmat::{BandKind, BandLayout, WaveletOperator};

use super::mc::{with_workers, Dense, McReport, Method, MethodResult, Prepared};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    /// Row-major.
    pub pixels: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn new(width: usize, height: usize, maxval: u32, pixels: Vec<T>) -> Result<Self> {
        if width * height != pixels.len() {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            maxval,
            pixels,
        })
    }

    /// `height x width`.
    pub fn to_matrix(&self) -> Array2<T> {
        Array2::from_shape_vec((self.height, self.width), self.pixels.clone()).expect("consistent shape")
    }

    pub fn from_matrix(m: &Array2<T>, maxval: u32) -> Self {
        GrayImage {
            width: m.ncols(),
            height: m.nrows(),
            maxval,
            pixels: m.iter().copied().collect(),
        }
    }

    pub fn clamped(&self) -> Self {
        let hi = T::lit(self.maxval as f64);
        GrayImage {
            pixels: self.pixels.iter().map(|&v| v.max(T::zero()).min(hi)).collect(),
            ..self.clone()
        }
    }

    pub fn mse(&self, other: &Self) -> Result<f64> {
        if self.pixels.len() != other.pixels.len() {
            return Err(Error::LengthMismatch {
                expected: self.pixels.len(),
                got: other.pixels.len(),
            });
        }
        Ok(mse(&self.pixels, &other.pixels))
    }

    fn check_square_pow2(&self) -> Result<()> {
        if self.width != self.height {
            return Err(Error::NonSquare {
                width: self.width,
                height: self.height,
            });
        }
        if !self.width.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.width));
        }
        Ok(())
    }

    fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.width as u64).to_le_bytes());
        h.update((self.height as u64).to_le_bytes());
        for v in &self.pixels {
            h.update(v.to_f64_lossy().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn mse<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).to_f64_lossy().powi(2))
        .sum::<f64>()
        / a.len() as f64
}

/// A 512-style test card: a slow diagonal sinusoid, two oriented stripe patches,
/// a disc of vertical stripes and a bright rectangle, clipped to `[0, 255]`.
pub fn synthetic_texture<T: Scalar>(size: usize) -> GrayImage<T> {
    use std::f64::consts::PI;
    let s = size as f64;
    let mut pixels = Vec::with_capacity(size * size);
    for r in 0..size {
        let y = r as f64 / s;
        for c in 0..size {
            let x = c as f64 / s;
            let mut v = 100.0 + 60.0 * (2.0 * PI * (1.5 * x + 0.7 * y)).sin();
            if x > 0.1 && x < 0.45 && y > 0.5 && y < 0.95 {
                v += 50.0 * (2.0 * PI * (40.0 * x + 25.0 * y)).sin();
            }
            if x > 0.55 && x < 0.9 && y > 0.1 && y < 0.45 {
                v += 45.0 * (2.0 * PI * (-30.0 * x + 45.0 * y)).sin();
            }
            if (x - 0.7).powi(2) + (y - 0.72).powi(2) < 0.03 {
                v += 40.0 * (2.0 * PI * 60.0 * x).sin();
            }
            if x > 0.15 && x < 0.4 && y > 0.1 && y < 0.35 {
                v += 50.0;
            }
            pixels.push(T::lit(v.clamp(0.0, 255.0)));
        }
    }
    GrayImage {
        width: size,
        height: size,
        maxval: 255,
        pixels,
    }
}

/// Flat indices (row-major over the coefficient matrix) of the band products `rows x cols`.
fn product_band(rows: &[usize], cols: &[usize], width: usize) -> Vec<usize> {
    rows.iter()
        .flat_map(|&r| cols.iter().map(move |&c| r * width + c))
        .collect()
}

fn scaling_block(l1: &BandLayout, l2: &BandLayout, width: usize) -> Vec<usize> {
    product_band(&l1.scaling_indices(), &l2.scaling_indices(), width)
}

/// Threshold and noise level for the coefficient matrix `c` (`height x width`, row-major).
fn image_threshold<T: Scalar>(
    c: &[Complex<T>],
    l1: &BandLayout,
    l2: &BandLayout,
    width: usize,
    rule: &ThresholdRule,
    exempt: &[bool],
) -> Result<T> {
    let thresholded = exempt.iter().filter(|&&e| !e).count().max(1);
    match rule.lambda {
        LambdaSource::Fixed(l) => Ok(T::lit(l)),
        LambdaSource::Universal => {
            let sigma = match rule.sigma {
                SigmaSource::Known(s) => T::lit(s),
                SigmaSource::MadFinest => match (l1.finest_detail_indices(), l2.finest_detail_indices()) {
                    (Some(r), Some(cc)) => mad_sigma(product_band(&r, &cc, width).into_iter().map(|i| c[i]))?,
                    _ => mad_sigma(c.iter().copied())?,
                },
                SigmaSource::MadAll => {
                    let sc: std::collections::HashSet<usize> = scaling_block(l1, l2, width).into_iter().collect();
                    mad_sigma(
                        c.iter()
                            .enumerate()
                            .filter(|(i, _)| !sc.contains(i))
                            .map(|(_, &z)| z),
                    )?
                }
            };
            Ok(universal_threshold(thresholded, sigma))
        }
    }
}

fn exempt_mask(l1: &BandLayout, l2: &BandLayout, width: usize, len: usize, rule: &ThresholdRule) -> Vec<bool> {
    let mut mask = vec![false; len];
    if rule.exempt_scaling && l1.bands.iter().any(|b| b.kind == BandKind::Scaling) {
        for i in scaling_block(l1, l2, width) {
            mask[i] = true;
        }
    }
    mask
}

/// Denoises a noisy matrix with `C = W1 A W2^H`, hard thresholding and `W1^H C W2`.
fn denoise_matrix<T: Scalar>(
    noisy: &Array2<T>,
    w1: &Prepared<T>,
    w2: &Prepared<T>,
    rule: &ThresholdRule,
) -> Result<Array2<T>> {
    let (h, w) = noisy.dim();
    match (&w1.dense, &w2.dense) {
        (Dense::Real(a), Dense::Real(b)) => {
            let mut c = a.dot(noisy).dot(&b.t());
            let flat: Vec<Complex<T>> = c.iter().map(|&v| Complex::new(v, T::zero())).collect();
            let exempt = exempt_mask(&w1.layout, &w2.layout, w, flat.len(), rule);
            let lambda = image_threshold(&flat, &w1.layout, &w2.layout, w, rule, &exempt)?;
            for (v, &keep) in c.iter_mut().zip(&exempt) {
                if !keep && !(v.abs() > lambda) {
                    *v = T::zero();
                }
            }
            Ok(a.t().dot(&c).dot(b))
        }
        _ => {
            let a = complex_of(&w1.dense);
            let b = complex_of(&w2.dense);
            let nc = noisy.mapv(|v| Complex::new(v, T::zero()));
            let bh = b.t().mapv(|z| z.conj());
            let mut c = a.dot(&nc).dot(&bh);
            let flat: Vec<Complex<T>> = c.iter().copied().collect();
            let exempt = exempt_mask(&w1.layout, &w2.layout, w, flat.len(), rule);
            let lambda = image_threshold(&flat, &w1.layout, &w2.layout, w, rule, &exempt)?;
            for (v, &keep) in c.iter_mut().zip(&exempt) {
                if !keep && !(v.norm() > lambda) {
                    *v = Complex::new(T::zero(), T::zero());
                }
            }
            let ah = a.t().mapv(|z| z.conj());
            let out = ah.dot(&c).dot(&b);
            debug_assert_eq!(out.dim(), (h, w));
            Ok(out.mapv(|z| z.re))
        }
    }
}

fn complex_of<T: Scalar>(d: &Dense<T>) -> Array2<Complex<T>> {
    match d {
        Dense::Real(m) => m.mapv(|v| Complex::new(v, T::zero())),
        Dense::Complex(m) => m.clone(),
    }
}

/// Adds `sigma`-scaled noise from `src`, denoises with `W1 A W2^H`, and scores against `img`.
/// The MSE is taken before the result is clamped to `[0, maxval]`.
pub fn denoise_image<T: Scalar>(
    img: &GrayImage<T>,
    w1: &WaveletOperator<T>,
    w2: &WaveletOperator<T>,
    sigma: f64,
    rule: &ThresholdRule,
    src: NoiseSource,
) -> Result<(GrayImage<T>, f64)> {
    img.check_square_pow2()?;
    if w1.n != img.height || w2.n != img.width {
        return Err(Error::SizeMismatch(format!(
            "operators of size {}x{} for a {}x{} image",
            w1.n, w2.n, img.height, img.width
        )));
    }
    denoise_prepared(img, &Prepared::new(w1), &Prepared::new(w2), sigma, rule, src)
}

fn denoise_prepared<T: Scalar>(
    img: &GrayImage<T>,
    w1: &Prepared<T>,
    w2: &Prepared<T>,
    sigma: f64,
    rule: &ThresholdRule,
    src: NoiseSource,
) -> Result<(GrayImage<T>, f64)> {
    let mut noisy = img.to_matrix();
    if sigma != 0.0 {
        let eps: Vec<T> = gaussian_noise(src, img.pixels.len());
        for (v, e) in noisy.iter_mut().zip(eps) {
            *v += T::lit(sigma) * e;
        }
    }
    let est = denoise_matrix(&noisy, w1, w2, rule)?;
    let est = GrayImage::from_matrix(&est, img.maxval);
    let score = mse(&est.pixels, &img.pixels);
    Ok((est.clamped(), score))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMcConfig {
    /// Each recipe is applied on both sides of the image.
    pub methods: Vec<Method>,
    pub sigma: f64,
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub rule: ThresholdRule,
}

impl ImageMcConfig {
    fn fingerprint(&self, image_digest: &str) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        h.update(image_digest.as_bytes());
        hex::encode(h.finalize())
    }
}

/// Paired image Monte Carlo: replicate `j` draws its noise from stream `j`.
pub fn run_image_mc<T: Scalar>(img: &GrayImage<T>, cfg: &ImageMcConfig, workers: Option<usize>) -> Result<McReport> {
    img.check_square_pow2()?;
    if cfg.replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be at least 1".into()));
    }
    let start = Instant::now();
    let ops = cfg
        .methods
        .iter()
        .map(|m| Ok(Prepared::new(&parse_recipe(&m.recipe)?.build::<T>(img.width)?)))
        .collect::<Result<Vec<_>>>()?;
    let per_rep: Vec<Vec<f64>> = with_workers(workers, || {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|j| {
                let src = NoiseSource::new(cfg.master_seed, j as u64);
                ops.iter()
                    .map(|op| {
                        denoise_prepared(img, op, op, cfg.sigma, &cfg.rule, src)
                            .map(|(_, m)| m)
                            .map_err(|e| Error::Replicate {
                                index: j,
                                source: Box::new(e),
                            })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| MethodResult::from_mse(m.name.clone(), m.recipe.clone(), per_rep.iter().map(|r| r[k]).collect()))
        .collect();
    Ok(McReport {
        config_fingerprint: cfg.fingerprint(&img.digest()),
        methods,
        seed: cfg.master_seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::{inverse_transform2d, transform2d};
    use crate::recipe::build_recipe;

    fn checker(size: usize) -> GrayImage<f64> {
        let pixels = (0..size * size)
            .map(|k| if (k / size + k % size).is_multiple_of(3) { 200.0 } else { 40.0 })
            .collect();
        GrayImage::new(size, size, 255, pixels).unwrap()
    }

    #[test]
    fn zero_noise_zero_threshold_is_exact() {
        let img = checker(32);
        let w = build_recipe::<f64>("product(wavmat(sym4,L=2),wavmat(coif1,L=2))", 32).unwrap();
        let (out, m) = denoise_image(&img, &w, &w, 0.0, &ThresholdRule::fixed(0.0), NoiseSource::new(0, 0)).unwrap();
        assert!(m < 1e-12);
        assert_eq!(out.width, 32);
    }

    #[test]
    fn complex_operators_agree_with_the_generic_transform() {
        let img = checker(16);
        let w = build_recipe::<f64>("wavmat(cd6,L=1)", 16).unwrap();
        let rule = ThresholdRule::fixed(30.0);
        let (_, m) = denoise_image(&img, &w, &w, 0.0, &rule, NoiseSource::new(0, 0)).unwrap();
        let a = img.to_matrix().mapv(|v| Complex::new(v, 0.0));
        let mut c = transform2d(&a, &w, &w).unwrap();
        c.mapv_inplace(|z| if z.norm() > 30.0 { z } else { Complex::new(0.0, 0.0) });
        let r = inverse_transform2d(&c, &w, &w).unwrap();
        let want = r.iter().zip(&img.pixels).map(|(z, p)| (z.re - p).powi(2)).sum::<f64>() / 256.0;
        assert!((m - want).abs() < 1e-9);
    }

    #[test]
    fn constant_image_stays_flat_with_scaling_exempt() {
        let img = GrayImage::new(32, 32, 255, vec![120.0f64; 1024]).unwrap();
        let w = build_recipe::<f64>("wavmat(db2,L=3)", 32).unwrap();
        let rule = ThresholdRule::known_sigma(10.0).with_exempt_scaling(true);
        let lambda = universal_threshold(1024 - 16, 10.0);
        let (out, _) = denoise_image(&img, &w, &w, 10.0, &rule, NoiseSource::new(3, 0)).unwrap();
        assert!(out.pixels.iter().all(|&v| (v - 120.0).abs() < lambda));
    }

    #[test]
    fn shape_errors() {
        let w = build_recipe::<f64>("wavmat(haar,L=1)", 4).unwrap();
        let wide = GrayImage::new(8, 4, 255, vec![0.0f64; 32]).unwrap();
        assert!(matches!(
            denoise_image(&wide, &w, &w, 1.0, &ThresholdRule::known_sigma(1.0), NoiseSource::new(0, 0)),
            Err(Error::NonSquare { .. })
        ));
        let odd = GrayImage::new(6, 6, 255, vec![0.0f64; 36]).unwrap();
        assert!(matches!(
            denoise_image(&odd, &w, &w, 1.0, &ThresholdRule::known_sigma(1.0), NoiseSource::new(0, 0)),
            Err(Error::NotPowerOfTwo(6))
        ));
    }

    #[test]
    fn output_is_clamped_but_scored_before() {
        let img = GrayImage::new(8, 8, 255, vec![250.0f64; 64]).unwrap();
        let w = build_recipe::<f64>("wavmat(haar,L=1)", 8).unwrap();
        let (out, m) = denoise_image(&img, &w, &w, 30.0, &ThresholdRule::fixed(0.0), NoiseSource::new(9, 0)).unwrap();
        assert!(out.pixels.iter().all(|&v| v <= 255.0));
        let eps: Vec<f64> = gaussian_noise(NoiseSource::new(9, 0), 64);
        let want = eps.iter().map(|e| (30.0 * e).powi(2)).sum::<f64>() / 64.0;
        assert!((m - want).abs() < 1e-9);
    }

    #[test]
    fn texture_card_is_in_range() {
        let img: GrayImage<f64> = synthetic_texture(64);
        assert!(img.pixels.iter().all(|&v| (0.0..=255.0).contains(&v)));
    }
}
