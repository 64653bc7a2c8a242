//! One-value-per-line signal files. Complex samples are written as `re,im`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn parse_signal<T: Scalar>(text: &str) -> Result<Vec<Complex<T>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::BadSample {
            line: i + 1,
            text: line.to_string(),
        };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let z = match line.split_once(',') {
            Some((re, im)) => Complex::new(T::lit(num(re)?), T::lit(num(im)?)),
            None => Complex::new(T::lit(num(line)?), T::zero()),
        };
        out.push(z);
    }
    Ok(out)
}

pub fn format_real<T: Scalar>(x: &[T]) -> String {
    let mut s = String::with_capacity(x.len() * 20);
    for v in x {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn format_complex<T: Scalar>(x: &[Complex<T>]) -> String {
    let mut s = String::with_capacity(x.len() * 40);
    for z in x {
        let _ = writeln!(s, "{},{}", z.re, z.im);
    }
    s
}

pub fn read_signal<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<Complex<T>>> {
    parse_signal(&std::fs::read_to_string(path)?)
}

/// The samples of a signal file, or `None` if any of them has a nonzero imaginary part.
pub fn read_real_signal<T: Scalar>(path: impl AsRef<Path>) -> Result<Option<Vec<T>>> {
    let z = read_signal::<T>(path)?;
    if z.iter().all(|v| v.im == T::zero()) {
        Ok(Some(z.into_iter().map(|v| v.re).collect()))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_lines() {
        let z = parse_signal::<f64>("1.5\n\n# note\n-2,0.25\n 3e-2 \n").unwrap();
        assert_eq!(
            z,
            vec![Complex::new(1.5, 0.0), Complex::new(-2.0, 0.25), Complex::new(0.03, 0.0)]
        );
        assert!(matches!(
            parse_signal::<f64>("1\nabc\n"),
            Err(Error::BadSample { line: 2, .. })
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let x = vec![0.1f64, -1.0 / 3.0, 1e-300, 12345.678];
        let back: Vec<f64> = parse_signal::<f64>(&format_real(&x))
            .unwrap()
            .into_iter()
            .map(|z| z.re)
            .collect();
        assert_eq!(back, x);
        let z = vec![Complex::new(0.7f64, -0.1)];
        assert_eq!(parse_signal::<f64>(&format_complex(&z)).unwrap(), z);
    }
}
