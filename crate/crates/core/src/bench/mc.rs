use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array2, Axis};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::recipe::parse_recipe;
use crate::scalar::Scalar;
use crate::shrinkage::{shrink, ThresholdRule};
use crate::signals::{combined_signal, gaussian_noise, make_signal, rescale_to_snr, NoiseSource};
use crate::textio::read_real_signal;
use crate::wavmat::{BandLayout, CoefficientVector, WaveletOperator};

/// Environment variable capping the number of replicate workers.
pub const WORKERS_ENV: &str = "WAVELIKE_WORKERS";

/// Replicates are denoised in fixed batches so results never depend on the worker count.
pub const REPLICATE_BATCH: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Method {
    pub name: String,
    pub recipe: String,
}

impl Method {
    pub fn new(name: impl Into<String>, recipe: impl Into<String>) -> Self {
        Method {
            name: name.into(),
            recipe: recipe.into(),
        }
    }
}

fn default_replicates() -> usize {
    200
}

fn default_sigma() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub methods: Vec<Method>,
    /// `doppler`, `blocks`, `heavisine`, `bumps`, `combined`, or a path to a signal file.
    pub signal: String,
    pub n: usize,
    /// Target signal variance; the clean signal is left as is when absent.
    #[serde(default)]
    pub snr: Option<f64>,
    /// Standard deviation of the additive Gaussian noise.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub rule: ThresholdRule,
}

impl McConfig {
    /// SHA-256 of the JSON encoding, hex.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("sigma {} is negative", self.sigma)));
        }
        if let Some(s) = self.snr {
            if !(s > 0.0) {
                return Err(Error::InvalidConfig(format!("snr {s} must be positive")));
            }
        }
        Ok(())
    }

    /// The clean test signal, rescaled to `snr` when set.
    pub fn clean_signal<T: Scalar>(&self) -> Result<Vec<T>> {
        let x0: Vec<T> = match self.signal.as_str() {
            "combined" => combined_signal(self.n)?.0,
            "doppler" | "blocks" | "heavisine" | "bumps" => make_signal(&self.signal, self.n)?,
            path => {
                let x = read_real_signal::<T>(path)?
                    .ok_or_else(|| Error::InvalidConfig(format!("signal file {path} is complex")))?;
                if x.len() != self.n {
                    return Err(Error::LengthMismatch {
                        expected: self.n,
                        got: x.len(),
                    });
                }
                x
            }
        };
        match self.snr {
            Some(snr) => rescale_to_snr(&x0, snr),
            None => Ok(x0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub name: String,
    pub recipe: String,
    pub amse: f64,
    pub mse_variance: f64,
    pub mse: Vec<f64>,
}

impl MethodResult {
    pub fn from_mse(name: String, recipe: String, mse: Vec<f64>) -> Self {
        let m = mse.len() as f64;
        let amse = mse.iter().sum::<f64>() / m;
        let mse_variance = if mse.len() > 1 {
            mse.iter().map(|v| (v - amse) * (v - amse)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        MethodResult {
            name,
            recipe,
            amse,
            mse_variance,
            mse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config_fingerprint: String,
    pub methods: Vec<MethodResult>,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl McReport {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn amse(&self, name: &str) -> Option<f64> {
        self.method(name).map(|m| m.amse)
    }

    /// Equality of everything except the wall time.
    pub fn same_results(&self, other: &McReport) -> bool {
        self.config_fingerprint == other.config_fingerprint
            && self.seed == other.seed
            && self.methods == other.methods
    }

    /// One `method,replicate,mse` row per replicate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,replicate,mse\n");
        for m in &self.methods {
            for (j, v) in m.mse.iter().enumerate() {
                out.push_str(&format!("{},{j},{v}\n", m.name));
            }
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`, returning both paths.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&json, serde_json::to_string_pretty(self)?)?;
        std::fs::write(&csv, self.to_csv())?;
        Ok((json, csv))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Worker count from [`WORKERS_ENV`], falling back to rayon's default.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
}

pub(crate) fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// An operator kept in real arithmetic when all its entries are real.
pub(crate) enum Dense<T> {
    Real(Array2<T>),
    Complex(Array2<Complex<T>>),
}

pub(crate) struct Prepared<T> {
    pub(crate) dense: Dense<T>,
    pub(crate) layout: BandLayout,
}

impl<T: Scalar> Prepared<T> {
    pub(crate) fn new(op: &WaveletOperator<T>) -> Self {
        let dense = if op.is_real() {
            Dense::Real(op.matrix.mapv(|z| z.re))
        } else {
            Dense::Complex(op.matrix.clone())
        };
        Prepared {
            dense,
            layout: op.layout.clone(),
        }
    }

    /// Denoises every column of `y`; the first replicate index is used for error reporting.
    fn denoise_columns(&self, y: &Array2<T>, rule: &ThresholdRule, first: usize) -> Result<Array2<T>> {
        let shrink_col = |j: usize, col: Vec<Complex<T>>| -> Result<Vec<Complex<T>>> {
            let d = CoefficientVector {
                values: col,
                layout: self.layout.clone(),
            };
            shrink(&d, rule).map(|(k, ..)| k.values).map_err(|e| Error::Replicate {
                index: first + j,
                source: Box::new(e),
            })
        };
        match &self.dense {
            Dense::Real(w) => {
                let mut d = w.dot(y);
                for (j, mut col) in d.axis_iter_mut(Axis(1)).enumerate() {
                    let kept = shrink_col(j, col.iter().map(|&v| Complex::new(v, T::zero())).collect())?;
                    for (dst, z) in col.iter_mut().zip(kept) {
                        *dst = z.re;
                    }
                }
                Ok(w.t().dot(&d))
            }
            Dense::Complex(w) => {
                let yc = y.mapv(|v| Complex::new(v, T::zero()));
                let mut d = w.dot(&yc);
                for (j, mut col) in d.axis_iter_mut(Axis(1)).enumerate() {
                    let kept = shrink_col(j, col.to_vec())?;
                    for (dst, z) in col.iter_mut().zip(kept) {
                        *dst = z;
                    }
                }
                let wh = w.t().mapv(|z| z.conj());
                Ok(wh.dot(&d).mapv(|z| z.re))
            }
        }
    }
}

/// Paired Monte Carlo run: replicate `j` adds noise from stream `j` and every method
/// denoises that same observation.
pub fn run_mc(cfg: &McConfig) -> Result<McReport> {
    run_mc_with_workers::<f64>(cfg, workers_from_env())
}

pub fn run_mc_with_workers<T: Scalar>(cfg: &McConfig, workers: Option<usize>) -> Result<McReport> {
    cfg.validate()?;
    let start = Instant::now();
    let x = cfg.clean_signal::<T>()?;
    let ops = cfg
        .methods
        .iter()
        .map(|m| {
            let op = parse_recipe(&m.recipe)?.build::<T>(cfg.n)?;
            Ok(Prepared::new(&op))
        })
        .collect::<Result<Vec<_>>>()?;

    let batches: Vec<(usize, usize)> = (0..cfg.replicates)
        .step_by(REPLICATE_BATCH)
        .map(|s| (s, (s + REPLICATE_BATCH).min(cfg.replicates)))
        .collect();
    let run_batch = |&(lo, hi): &(usize, usize)| -> Result<Vec<Vec<f64>>> {
        let n = cfg.n;
        let mut y = Array2::<T>::zeros((n, hi - lo));
        for (c, j) in (lo..hi).enumerate() {
            let eps: Vec<T> = gaussian_noise(NoiseSource::new(cfg.master_seed, j as u64), n);
            for i in 0..n {
                y[[i, c]] = x[i] + T::lit(cfg.sigma) * eps[i];
            }
        }
        ops.iter()
            .map(|op| {
                let est = op.denoise_columns(&y, &cfg.rule, lo)?;
                Ok(est
                    .axis_iter(Axis(1))
                    .map(|col| {
                        let sse = col
                            .iter()
                            .zip(&x)
                            .map(|(&s, &xi)| (xi - s).to_f64_lossy().powi(2))
                            .sum::<f64>();
                        sse / n as f64
                    })
                    .collect())
            })
            .collect()
    };
    let per_batch: Vec<Vec<Vec<f64>>> =
        with_workers(workers, || batches.par_iter().map(run_batch).collect::<Result<Vec<_>>>())??;

    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mse: Vec<f64> = per_batch.iter().flat_map(|b| b[k].iter().copied()).collect();
            MethodResult::from_mse(m.name.clone(), m.recipe.clone(), mse)
        })
        .collect();
    Ok(McReport {
        config_fingerprint: cfg.fingerprint(),
        methods,
        seed: cfg.master_seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Block-diagonal adaptive transform against each of its constituent bases on the combined signal.
pub fn run_adaptive_mc(cfg: &McConfig) -> Result<McReport> {
    if cfg.signal != "combined" {
        return Err(Error::InvalidConfig(format!(
            "adaptive runs use the combined signal, not `{}`",
            cfg.signal
        )));
    }
    run_mc(cfg)
}

pub const TABLE1_METHODS: [(&str, &str); 5] = [
    ("kron", "kron(wavmat(cd6,L=3,n=128),wavmat(haar,L=3,n=8))"),
    ("similarity", "similarity(wavmat(cd6,L=3),wavmat(haar,L=3))"),
    ("product", "product(wavmat(cd6,L=3),wavmat(haar,L=3))"),
    ("cd6", "wavmat(cd6,L=3)"),
    ("haar", "wavmat(haar,L=3)"),
];

pub const TABLE2_METHODS: [(&str, &str); 5] = [
    (
        "adaptive",
        "blockdiag(wavmat(sym4,L=3),wavmat(haar,L=3),wavmat(db4,L=3),wavmat(db3,L=3))",
    ),
    ("sym4", "wavmat(sym4,L=3)"),
    ("haar", "wavmat(haar,L=3)"),
    ("db4", "wavmat(db4,L=3)"),
    ("db3", "wavmat(db3,L=3)"),
];

fn preset(methods: &[(&str, &str)], signal: &str, replicates: usize, master_seed: u64) -> McConfig {
    McConfig {
        methods: methods.iter().map(|(n, r)| Method::new(*n, *r)).collect(),
        signal: signal.into(),
        n: 1024,
        snr: Some(5.0),
        sigma: 1.0,
        replicates,
        master_seed,
        rule: ThresholdRule::known_sigma(1.0),
    }
}

/// Doppler at n = 1024, SNR 5, unit noise, known sigma.
pub fn table1_config(replicates: usize, master_seed: u64) -> McConfig {
    preset(&TABLE1_METHODS, "doppler", replicates, master_seed)
}

/// The combined four-segment signal at n = 1024, SNR 5, unit noise, known sigma.
pub fn table2_config(replicates: usize, master_seed: u64) -> McConfig {
    preset(&TABLE2_METHODS, "combined", replicates, master_seed)
}
