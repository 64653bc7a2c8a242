use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::CATALOG;

use super::image::{run_image_mc, GrayImage, ImageMcConfig};
use super::mc::{run_mc_with_workers, workers_from_env, McConfig, McReport, Method};

/// What a grid search scores against. Methods in the configs are replaced by the grid.
#[derive(Debug, Clone, Copy)]
pub enum GridTarget<'a> {
    Signal(&'a McConfig),
    Image(&'a GrayImage<f64>, &'a ImageMcConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    /// `a∘b` for a product, `a` for a single basis.
    pub label: String,
    pub first: String,
    pub second: Option<String>,
    pub recipe: String,
    pub amse: f64,
}

/// Every ordered pair `a∘b` (including `a∘a`) as `product(wavmat(a),wavmat(b))`, then every single.
pub fn grid_methods(candidates: &[&str], levels: usize) -> Vec<(Method, String, Option<String>)> {
    let wm = |f: &str| format!("wavmat({f},L={levels})");
    let mut out = Vec::new();
    for a in candidates {
        for b in candidates {
            let label = format!("{a}∘{b}");
            out.push((
                Method::new(label, format!("product({},{})", wm(a), wm(b))),
                a.to_string(),
                Some(b.to_string()),
            ));
        }
    }
    for a in candidates {
        out.push((Method::new(*a, wm(a)), a.to_string(), None));
    }
    out
}

/// Scores the grid in one paired run and ranks it by ascending AMSE, ties by label.
pub fn grid_search_pairs(
    candidates: &[&str],
    levels: usize,
    target: GridTarget<'_>,
) -> Result<(Vec<GridEntry>, McReport)> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("grid search needs at least one candidate filter".into()));
    }
    if let Some(bad) = candidates.iter().find(|c| !CATALOG.contains(c)) {
        return Err(Error::UnknownFilter(bad.to_string()));
    }
    let grid = grid_methods(candidates, levels);
    let methods: Vec<Method> = grid.iter().map(|(m, ..)| m.clone()).collect();
    let report = match target {
        GridTarget::Signal(cfg) => {
            let cfg = McConfig {
                methods,
                ..cfg.clone()
            };
            run_mc_with_workers::<f64>(&cfg, workers_from_env())?
        }
        GridTarget::Image(img, cfg) => {
            let cfg = ImageMcConfig {
                methods,
                ..cfg.clone()
            };
            run_image_mc(img, &cfg, workers_from_env())?
        }
    };
    let mut ranked: Vec<GridEntry> = grid
        .into_iter()
        .zip(&report.methods)
        .map(|((m, first, second), r)| GridEntry {
            label: m.name,
            first,
            second,
            recipe: m.recipe,
            amse: r.amse,
        })
        .collect();
    ranked.sort_by(|a, b| a.amse.total_cmp(&b.amse).then_with(|| a.label.cmp(&b.label)));
    Ok((ranked, report))
}
