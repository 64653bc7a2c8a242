//! Energy concentration measures over transform coefficients.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LorenzCurve<T> {
    /// `(k/n, L(k/n))` for `k = 0..=n`.
    pub points: Vec<(T, T)>,
}

impl<T: Scalar> LorenzCurve<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trapezoid area under the curve.
    pub fn area(&self) -> T {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * T::lit(0.5))
            .fold(T::zero(), |a, b| a + b)
    }

    /// True when `self` lies on or below `other` at every grid point (same length required).
    pub fn dominated_by(&self, other: &Self, tol: T) -> bool {
        self.len() == other.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| a.1 <= b.1 + tol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,L\n");
        for (p, l) in &self.points {
            out.push_str(&format!("{p},{l}\n"));
        }
        out
    }
}

fn energies<T: Scalar>(d: &[Complex<T>]) -> Result<(Vec<T>, T)> {
    let e: Vec<T> = d.iter().map(|z| z.norm_sqr()).collect();
    let total = e.iter().fold(T::zero(), |a, &b| a + b);
    if !(total > T::zero()) {
        return Err(Error::ZeroEnergy);
    }
    Ok((e, total))
}

fn sorted_ascending<T: Scalar>(mut e: Vec<T>) -> Vec<T> {
    e.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    e
}

pub fn lorenz<T: Scalar>(d: &[Complex<T>]) -> Result<LorenzCurve<T>> {
    let (e, total) = energies(d)?;
    let e = sorted_ascending(e);
    let n = e.len();
    let nf = T::lit(n as f64);
    let mut points = Vec::with_capacity(n + 1);
    points.push((T::zero(), T::zero()));
    let mut acc = T::zero();
    for (k, x) in e.into_iter().enumerate() {
        acc += x;
        let p = if k + 1 == n { T::one() } else { T::lit((k + 1) as f64) / nf };
        let v = if k + 1 == n { T::one() } else { (acc / total).min(T::one()) };
        points.push((p, v));
    }
    Ok(LorenzCurve { points })
}

/// `1 - 2 * area` of the Lorenz curve.
pub fn gini<T: Scalar>(d: &[Complex<T>]) -> Result<T> {
    let g = T::one() - T::lit(2.0) * lorenz(d)?.area();
    Ok(g.max(T::zero()).min(T::one()))
}

/// Share of the energy in the `ceil(q n)` largest coefficients.
pub fn top_fraction<T: Scalar>(d: &[Complex<T>], q: f64) -> Result<T> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidFraction(q));
    }
    let (e, total) = energies(d)?;
    let n = e.len();
    let k = ((q * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let e = sorted_ascending(e);
    let top = e[n - k..].iter().fold(T::zero(), |a, &b| a + b);
    Ok((top / total).min(T::one()))
}

/// Normalized Shannon entropy of the energy distribution, in `[0, 1]`.
pub fn complexity_index<T: Scalar>(d: &[Complex<T>]) -> Result<T> {
    if d.len() == 1 {
        return Err(Error::UndefinedForN1);
    }
    let (e, total) = energies(d)?;
    let h = e
        .into_iter()
        .filter(|&x| x > T::zero())
        .map(|x| {
            let p = x / total;
            -p * p.ln()
        })
        .fold(T::zero(), |a, b| a + b);
    let c = h / T::lit(d.len() as f64).ln();
    Ok(c.max(T::zero()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EnergyProfile<T> {
    pub total_energy: T,
    /// Keyed by `q` formatted as a decimal string, e.g. `"0.01"`.
    pub top_fractions: BTreeMap<String, T>,
    pub gini: T,
    pub complexity: T,
}

pub const DEFAULT_QUANTILES: [f64; 2] = [0.01, 0.05];

pub fn energy_profile<T: Scalar>(d: &[Complex<T>], quantiles: &[f64]) -> Result<EnergyProfile<T>> {
    let (_, total) = energies(d)?;
    let mut top_fractions = BTreeMap::new();
    for &q in quantiles {
        top_fractions.insert(format!("{q}"), top_fraction(d, q)?);
    }
    Ok(EnergyProfile {
        total_energy: total,
        top_fractions,
        gini: gini(d)?,
        complexity: if d.len() > 1 { complexity_index(d)? } else { T::zero() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_energies(e: &[f64]) -> Vec<Complex<f64>> {
        e.iter().map(|&x| Complex::new(x.sqrt(), 0.0)).collect()
    }

    #[test]
    fn lorenz_examples() {
        let flat = lorenz(&from_energies(&[1.0; 4])).unwrap();
        for (p, l) in &flat.points {
            assert!((p - l).abs() < 1e-15);
        }
        let hot = lorenz(&from_energies(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        let vals: Vec<f64> = hot.points.iter().map(|x| x.1).collect();
        assert_eq!(vals, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        let two = lorenz(&from_energies(&[3.0, 1.0])).unwrap();
        assert!((two.points[1].1 - 0.25).abs() < 1e-15);
        assert!(matches!(lorenz::<f64>(&[Complex::new(0.0, 0.0)]), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn gini_examples() {
        assert!(gini(&from_energies(&[2.0; 9])).unwrap().abs() < 1e-12);
        assert!((gini(&from_energies(&[0.0, 0.0, 0.0, 1.0])).unwrap() - 0.75).abs() < 1e-15);
        let d = from_energies(&[1.0, 5.0, 2.0, 0.5]);
        let scaled: Vec<_> = d.iter().map(|z| z * 3.7).collect();
        assert!((gini(&d).unwrap() - gini(&scaled).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn top_fraction_examples() {
        let d = from_energies(&[1.0, 3.0]);
        assert!((top_fraction(&d, 0.5).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(top_fraction(&d, 1.0).unwrap(), 1.0);
        let mut hot = vec![0.0; 2048];
        hot[100] = 1.0;
        assert_eq!(top_fraction(&from_energies(&hot), 0.01).unwrap(), 1.0);
        assert!(matches!(top_fraction(&d, 0.0), Err(Error::InvalidFraction(_))));
        assert!(matches!(top_fraction(&d, 1.5), Err(Error::InvalidFraction(_))));
    }

    #[test]
    fn top_fraction_counts_with_ceiling() {
        // ceil(0.05 * 100) = 5 exactly, not 6 from rounding noise.
        let e: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let want = (96..=100).sum::<usize>() as f64 / 5050.0;
        assert!((top_fraction(&from_energies(&e), 0.05).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn complexity_examples() {
        assert!((complexity_index(&from_energies(&[0.3; 7])).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(complexity_index(&from_energies(&[0.0, 4.0, 0.0])).unwrap(), 0.0);
        let half = complexity_index(&from_energies(&[0.5, 0.5, 0.0, 0.0])).unwrap();
        assert!((half - 0.5).abs() < 1e-12);
        assert!(matches!(
            complexity_index(&from_energies(&[1.0])),
            Err(Error::UndefinedForN1)
        ));
    }

    #[test]
    fn profile_collects_everything() {
        let p = energy_profile(&from_energies(&[1.0, 3.0]), &[0.5]).unwrap();
        assert!((p.total_energy - 4.0).abs() < 1e-12);
        assert!((p.top_fractions["0.5"] - 0.75).abs() < 1e-12);
        let json = serde_json::to_string(&p).unwrap();
        let back: EnergyProfile<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
