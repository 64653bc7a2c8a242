//! Test signals and seeded noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const SIGNAL_NAMES: [&str; 4] = ["doppler", "blocks", "heavisine", "bumps"];

const JUMPS: [f64; 11] = [0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81];
const BLOCK_HEIGHTS: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
const BUMP_HEIGHTS: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMP_WIDTHS: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];

/// Weights of the four segments of [`combined_signal`].
pub const COMBINED_WEIGHTS: [f64; 4] = [1.0, 0.2, 0.1, 0.2];

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn doppler(t: f64) -> f64 {
    (t * (1.0 - t)).sqrt() * (2.0 * std::f64::consts::PI * 1.05 / (t + 0.05)).sin()
}

pub fn heavisine(t: f64) -> f64 {
    4.0 * (4.0 * std::f64::consts::PI * t).sin() - sgn(t - 0.3) - sgn(0.72 - t)
}

pub fn blocks(t: f64) -> f64 {
    JUMPS
        .iter()
        .zip(BLOCK_HEIGHTS)
        .map(|(&tj, h)| h * (1.0 + sgn(t - tj)) / 2.0)
        .sum()
}

pub fn bumps(t: f64) -> f64 {
    JUMPS
        .iter()
        .zip(BUMP_HEIGHTS)
        .zip(BUMP_WIDTHS)
        .map(|((&tj, h), w)| h * (1.0 + ((t - tj) / w).abs()).powi(-4))
        .sum()
}

/// Samples a named test signal at `t = i / n`, `i = 1..=n`.
pub fn make_signal<T: Scalar>(name: &str, n: usize) -> Result<Vec<T>> {
    let f: fn(f64) -> f64 = match name {
        "doppler" => doppler,
        "blocks" => blocks,
        "heavisine" => heavisine,
        "bumps" => bumps,
        _ => return Err(Error::UnknownSignal(name.to_string())),
    };
    if n < 8 {
        return Err(Error::BadLength(format!("signal length {n} is below 8")));
    }
    Ok((1..=n).map(|i| T::lit(f(i as f64 / n as f64))).collect())
}

/// Population variance.
pub fn variance<T: Scalar>(x: &[T]) -> T {
    let n = T::lit(x.len() as f64);
    let mean = x.iter().fold(T::zero(), |a, &b| a + b) / n;
    x.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / n
}

/// Scales `x0` so that its population variance equals `snr`.
pub fn rescale_to_snr<T: Scalar>(x0: &[T], snr: f64) -> Result<Vec<T>> {
    let v = variance(x0);
    if !(v > T::zero()) {
        return Err(Error::ConstantSignal);
    }
    let c = (T::lit(snr) / v).sqrt();
    Ok(x0.iter().map(|&x| x * c).collect())
}

/// Doppler, Blocks, HeaviSine and Bumps at `n_total / 4` samples each, weighted by
/// [`COMBINED_WEIGHTS`] and concatenated. Returns the segment boundaries too.
pub fn combined_signal<T: Scalar>(n_total: usize) -> Result<(Vec<T>, Vec<usize>)> {
    let seg = n_total / 4;
    if !n_total.is_multiple_of(4) || seg < 8 || !seg.is_power_of_two() {
        return Err(Error::BadLength(format!(
            "combined signal length {n_total} must be four times a power of two >= 8"
        )));
    }
    let mut out = Vec::with_capacity(n_total);
    for (name, w) in SIGNAL_NAMES.iter().zip(COMBINED_WEIGHTS) {
        out.extend(make_signal::<T>(name, seg)?.into_iter().map(|v| v * T::lit(w)));
    }
    Ok((out, (0..=4).map(|k| k * seg).collect()))
}

/// Identifies one reproducible stream of random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoiseSource {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl NoiseSource {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        NoiseSource {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// `n` standard normal deviates, drawn in `f64` and then converted.
pub fn gaussian_noise<T: Scalar>(src: NoiseSource, n: usize) -> Vec<T> {
    let mut rng = src.rng();
    (0..n)
        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// A seeded bursty signal: 40 random bumps with widths spread over 1.5 decades,
/// plus 1/f noise at half the unit amplitude. Sampled at `t = i / n`.
pub fn intermittent_signal<T: Scalar>(n: usize, seed: u64) -> Result<Vec<T>> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::BadLength(format!("intermittent signal length {n} must be even and >= 8")));
    }
    let mut rng = NoiseSource::new(seed, 0).rng();
    let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
    let t: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let mut s = vec![0.0f64; n];
    for _ in 0..40 {
        let c = rng.sample(unit);
        let w = 10f64.powf(-3.0 + 1.5 * rng.sample(unit));
        let h = 3.0 * rng.sample::<f64, _>(StandardNormal);
        for (v, &ti) in s.iter_mut().zip(&t) {
            *v += h * (1.0 + ((ti - c) / w).abs()).powi(-4);
        }
    }
    for (v, p) in s.iter_mut().zip(pink_noise(n, &mut rng)) {
        *v += 0.5 * p;
    }
    Ok(s.into_iter().map(T::lit).collect())
}

/// Random-phase noise with power falling as `1/f`, built from `n/2` harmonics.
fn pink_noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = vec![0.0f64; n];
    let base = 2.0 * std::f64::consts::PI / n as f64;
    for k in 1..=n / 2 {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let amp = (2.0 / k as f64).sqrt();
        let (step_s, step_c) = (base * k as f64).sin_cos();
        let (mut s, mut c) = (0.0f64, 1.0f64);
        for v in out.iter_mut() {
            *v += amp * (a * c - b * s);
            let (ns, nc) = (s * step_c + c * step_s, c * step_c - s * step_s);
            s = ns;
            c = nc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heavisine_at_half() {
        assert!((heavisine(0.5) + 2.0).abs() < 1e-12);
        let x = make_signal::<f64>("heavisine", 8).unwrap();
        assert!((x[3] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn doppler_vanishes_at_the_right_end() {
        for n in [8usize, 64, 1024] {
            let x = make_signal::<f64>("doppler", n).unwrap();
            assert!(x[n - 1].abs() < 4.0 * (1.0 / n as f64).sqrt());
        }
    }

    #[test]
    fn bumps_are_nonnegative() {
        assert!(make_signal::<f64>("bumps", 1024).unwrap().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn blocks_table_sanity() {
        assert_eq!(JUMPS.len(), 11);
        assert!(JUMPS.iter().all(|&t| t > 0.0 && t < 1.0));
        // An odd length keeps every breakpoint off the sampling grid.
        let x = make_signal::<f64>("blocks", 4099).unwrap();
        let jumps = x.windows(2).filter(|w| (w[1] - w[0]).abs() > 1e-12).count();
        assert_eq!(jumps, 11);
    }

    #[test]
    fn unknown_signal_and_short_length() {
        assert!(matches!(make_signal::<f64>("ramp", 64), Err(Error::UnknownSignal(_))));
        assert!(matches!(make_signal::<f64>("doppler", 4), Err(Error::BadLength(_))));
    }

    #[test]
    fn snr_rescaling() {
        let x0 = make_signal::<f64>("doppler", 1024).unwrap();
        let x = rescale_to_snr(&x0, 5.0).unwrap();
        assert!((variance(&x) - 5.0).abs() < 1e-9);
        let again = rescale_to_snr(&x, 5.0).unwrap();
        for (a, b) in again.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(rescale_to_snr(&[2.0f64; 16], 5.0), Err(Error::ConstantSignal)));
    }

    #[test]
    fn combined_layout() {
        let (x, b) = combined_signal::<f64>(1024).unwrap();
        assert_eq!(b, vec![0, 256, 512, 768, 1024]);
        let hs = make_signal::<f64>("heavisine", 256).unwrap();
        let hmax = hs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(x[512..768].iter().all(|v| v.abs() <= 0.1 * hmax + 1e-12));
        assert!(matches!(combined_signal::<f64>(1000), Err(Error::BadLength(_))));
    }

    #[test]
    fn noise_is_deterministic_per_stream() {
        let a: Vec<f64> = gaussian_noise(NoiseSource::new(7, 3), 1000);
        let b: Vec<f64> = gaussian_noise(NoiseSource::new(7, 3), 1000);
        assert_eq!(a, b);
        let c: Vec<f64> = gaussian_noise(NoiseSource::new(7, 4), 1000);
        let same = a.iter().zip(&c).filter(|(x, y)| x == y).count();
        assert!(same < 10);
    }

    #[test]
    fn intermittent_signal_is_seeded() {
        let a: Vec<f64> = intermittent_signal(256, 1).unwrap();
        assert_eq!(a, intermittent_signal::<f64>(256, 1).unwrap());
        assert_ne!(a, intermittent_signal::<f64>(256, 2).unwrap());
    }
}
