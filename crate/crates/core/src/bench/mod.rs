//! Monte Carlo denoising benchmarks, filter-pair grid search and image denoising.

mod grid;
mod image;
mod mc;
mod pgm;

pub use grid::{grid_methods, grid_search_pairs, GridEntry, GridTarget};
pub use image::{denoise_image, run_image_mc, synthetic_texture, GrayImage, ImageMcConfig};
pub use mc::{
    run_adaptive_mc, run_mc, run_mc_with_workers, table1_config, table2_config, workers_from_env, McConfig,
    McReport, Method, MethodResult, REPLICATE_BATCH, TABLE1_METHODS, TABLE2_METHODS, WORKERS_ENV,
};
pub use pgm::{decode_pgm, encode_pgm, encode_pgm_ascii, read_pgm, write_pgm};
