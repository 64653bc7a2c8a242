//! Orthogonal wavelet matrices as explicit dense operators, their composites
//! (products, Kronecker products, block diagonals, similarity transforms), hard
//! threshold denoising and energy concentration diagnostics.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the common `f64` instantiations.
//!
//! ```
//! use wavelike::{build_recipe, denoise, make_signal, ThresholdRule};
//!
//! let w = build_recipe::<f64>("product(wavmat(sym4,L=3),wavmat(coif3,L=3))", 256).unwrap();
//! let x = make_signal::<f64>("doppler", 256).unwrap();
//! let out = denoise(&x, &w, &ThresholdRule::known_sigma(0.01)).unwrap();
//! assert_eq!(out.estimate.len(), 256);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod composite;
pub mod diagnostics;
pub mod error;
pub mod filterbank;
pub mod recipe;
pub mod scalar;
pub mod shrinkage;
pub mod signals;
pub mod textio;
pub mod wavmat;

pub use composite::{
    block_diag, inverse_transform2d, kron, product, similarity, transform2d, transform2d_operator,
    unvec_col_major, vec_col_major,
};
pub use diagnostics::{complexity_index, energy_profile, gini, lorenz, top_fraction, EnergyProfile, LorenzCurve};
pub use error::{Error, Result};
pub use filterbank::{
    certify_product, get_filter, polyphase_determinant, qmf, FilterSpec, PolyphaseReport, CATALOG,
};
pub use recipe::{build_recipe, parse_recipe, Recipe};
pub use scalar::Scalar;
pub use shrinkage::{
    denoise, denoise_complex, estimate_sigma, hard_threshold, universal_threshold, LambdaSource, SigmaSource,
    ThresholdRule,
};
pub use signals::{combined_signal, gaussian_noise, intermittent_signal, make_signal, rescale_to_snr, NoiseSource};
pub use wavmat::{build_wavmat, Band, BandKind, BandLayout, CoefficientVector, Matrix, WaveletOperator};

pub type WaveletOperator64 = WaveletOperator<f64>;
pub type WaveletOperator32 = WaveletOperator<f32>;
pub type FilterSpec64 = FilterSpec<f64>;
pub type CoefficientVector64 = CoefficientVector<f64>;
pub type LorenzCurve64 = LorenzCurve<f64>;
pub type PolyphaseReport64 = PolyphaseReport<f64>;
pub type Complex64 = num_complex::Complex<f64>;
