use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use wavelike::bench::{
    denoise_image, grid_search_pairs, read_pgm, run_adaptive_mc, run_image_mc, run_mc, synthetic_texture,
    table1_config, table2_config, workers_from_env, write_pgm, GrayImage, GridEntry, GridTarget,
    ImageMcConfig, McConfig, McReport, Method,
};
use wavelike::diagnostics::DEFAULT_QUANTILES;
use wavelike::textio::{format_complex, format_real, read_signal};
use wavelike::{
    certify_product, combined_signal, denoise, denoise_complex, energy_profile, gaussian_noise, get_filter,
    intermittent_signal, lorenz, make_signal, parse_recipe, polyphase_determinant, qmf, rescale_to_snr,
    NoiseSource, Recipe, SigmaSource, ThresholdRule, WaveletOperator64,
};

use crate::{
    AtomsArgs, BenchArgs, Command, DenoiseArgs, GridArgs, ImageArgs, LorenzArgs, PolyphaseArgs, SignalArgs,
};

/// Exit 1 for a malformed request, 2 when the inputs themselves are rejected.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(wavelike::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<wavelike::Error> for Failure {
    fn from(e: wavelike::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = Result<(), Failure>;

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Signal(a) => signal(a),
        Command::Denoise(a) => denoise_cmd(a),
        Command::Lorenz(a) => lorenz_cmd(a),
        Command::Atoms(a) => atoms(a),
        Command::PolyphaseCheck(a) => polyphase(a),
        Command::Bench(a) => bench(a),
        Command::ImageDenoise(a) => image(a),
        Command::GridSearch(a) => grid(a),
    }
}

fn recipe_arg(text: &str) -> Result<Recipe, Failure> {
    parse_recipe(text).map_err(|e| Failure::Usage(format!("--recipe: {e}")))
}

fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, text)?,
        _ => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<S: serde::Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn parse_rule(text: &str, exempt: bool, op: &WaveletOperator64) -> Result<ThresholdRule, Failure> {
    let bad = || Failure::Usage(format!("--rule `{text}`: expected universal, universal,sigma=<value> or universal,mad"));
    let mut parts = text.split(',').map(str::trim);
    if parts.next() != Some("universal") {
        return Err(bad());
    }
    let rule = match parts.next() {
        None | Some("mad") => ThresholdRule::mad_for(&op.layout),
        Some(s) => {
            let v: f64 = s
                .strip_prefix("sigma=")
                .and_then(|v| v.parse().ok())
                .filter(|v: &f64| v.is_finite() && *v >= 0.0)
                .ok_or_else(bad)?;
            ThresholdRule::known_sigma(v)
        }
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(rule.with_exempt_scaling(exempt))
}

fn signal(a: SignalArgs) -> Outcome {
    let clean: Vec<f64> = match a.name.as_str() {
        "combined" => combined_signal(a.n)?.0,
        "intermittent" => intermittent_signal(a.n, a.seed)?,
        name => make_signal(name, a.n)?,
    };
    let mut x = match a.snr {
        Some(snr) => rescale_to_snr(&clean, snr)?,
        None => clean,
    };
    if a.noisy {
        let eps: Vec<f64> = gaussian_noise(NoiseSource::new(a.seed, 0), x.len());
        for (v, e) in x.iter_mut().zip(eps) {
            *v += a.sigma * e;
        }
    }
    emit(a.out.as_deref(), &format_real(&x))
}

fn denoise_cmd(a: DenoiseArgs) -> Outcome {
    let recipe = recipe_arg(&a.recipe)?;
    let y = read_signal::<f64>(&a.input)?;
    let op: WaveletOperator64 = recipe.build(y.len())?;
    let rule = parse_rule(&a.rule, a.exempt_scaling, &op)?;
    if y.iter().all(|z| z.im == 0.0) {
        let re: Vec<f64> = y.iter().map(|z| z.re).collect();
        let out = denoise(&re, &op, &rule)?;
        eprintln!(
            "lambda {} sigma {} kept {}/{} imaginary residue {:e}",
            out.lambda, out.sigma, out.kept, out.thresholded, out.imag_residue
        );
        emit(a.out.as_deref(), &format_real(&out.estimate))
    } else {
        let out = denoise_complex(&y, &op, &rule)?;
        eprintln!("lambda {} sigma {} kept {}/{}", out.lambda, out.sigma, out.kept, out.thresholded);
        emit(a.out.as_deref(), &format_complex(&out.estimate))
    }
}

fn lorenz_cmd(a: LorenzArgs) -> Outcome {
    let recipe = recipe_arg(&a.recipe)?;
    let y = read_signal::<f64>(&a.input)?;
    let op: WaveletOperator64 = recipe.build(y.len())?;
    let d = op.apply(&y)?;
    let csv = lorenz(&d.values)?.to_csv();
    let profile = to_json(&energy_profile(&d.values, &DEFAULT_QUANTILES)?);
    match a.out_dir {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("lorenz.csv"), csv)?;
            fs::write(dir.join("energy_profile.json"), profile)?;
        }
        None => {
            emit(None, &csv)?;
            eprint!("{profile}");
        }
    }
    Ok(())
}

fn atoms(a: AtomsArgs) -> Outcome {
    let recipe = recipe_arg(&a.recipe)?;
    let n = match (a.n, recipe.fixed_size()) {
        (Some(n), _) | (None, Some(n)) => n,
        (None, None) => return Err(Failure::Usage("--n is required for this recipe".into())),
    };
    let op: WaveletOperator64 = recipe.build(n)?;
    let ks: Vec<usize> = if a.k.is_empty() { (0..op.n).collect() } else { a.k };
    let mut csv = String::from("k,i,re,im\n");
    for k in ks {
        for (i, z) in op.atom(k)?.iter().enumerate() {
            csv.push_str(&format!("{k},{i},{},{}\n", z.re, z.im));
        }
    }
    emit(a.out.as_deref(), &csv)
}

fn polyphase(a: PolyphaseArgs) -> Outcome {
    let h1 = get_filter::<f64>(&a.h1)?;
    let report = match &a.h2 {
        Some(h2) => certify_product(&h1, &get_filter(h2)?, a.grid)?,
        None => polyphase_determinant(&h1.taps, &qmf(&h1).taps, a.grid)?,
    };
    if let Some(path) = &a.csv {
        let mut csv = String::from("omega,re_det,im_det\n");
        for (w, d) in &report.det_grid {
            csv.push_str(&format!("{w},{},{}\n", d.re, d.im));
        }
        fs::write(path, csv)?;
    }
    emit(None, &to_json(&report))
}

fn print_report(report: &McReport) {
    println!("method,amse,mse_variance");
    for m in &report.methods {
        println!("{},{},{}", m.name, m.amse, m.mse_variance);
    }
}

fn bench(a: BenchArgs) -> Outcome {
    let (report, stem) = match (&a.config, a.table.as_deref()) {
        (Some(path), None) => {
            let cfg: McConfig = serde_json::from_str(&fs::read_to_string(path)?).map_err(wavelike::Error::from)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("bench").to_string();
            (run_mc(&cfg)?, stem)
        }
        (None, Some("table1")) => (run_mc(&table1_config(a.reps, a.seed))?, "table1".to_string()),
        (None, Some("table2")) => (run_adaptive_mc(&table2_config(a.reps, a.seed))?, "table2".to_string()),
        (None, Some(other)) => return Err(Failure::Usage(format!("--table `{other}`: expected table1 or table2"))),
        _ => return Err(Failure::Usage("bench needs --config <json> or --table <name>".into())),
    };
    fs::create_dir_all(&a.out_dir)?;
    let (json, csv) = report.save(&a.out_dir, &stem)?;
    print_report(&report);
    eprintln!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn load_image(input: Option<&Path>, synthetic: Option<usize>) -> Result<GrayImage<f64>, Failure> {
    match (input, synthetic) {
        (Some(p), _) => Ok(read_pgm(p)?),
        (None, Some(size)) => {
            if size < 8 || !size.is_power_of_two() {
                return Err(Failure::Usage(format!("--synthetic {size}: expected a power of two >= 8")));
            }
            Ok(synthetic_texture(size))
        }
        (None, None) => Err(Failure::Usage("an input image is required".into())),
    }
}

fn image(a: ImageArgs) -> Outcome {
    let recipe = recipe_arg(&a.recipe)?;
    let img = load_image(a.input.as_deref(), a.synthetic)?;
    let rule = if a.mad {
        ThresholdRule::universal(SigmaSource::MadFinest)
    } else {
        ThresholdRule::known_sigma(a.sigma)
    }
    .with_exempt_scaling(a.exempt_scaling);
    let cfg = ImageMcConfig {
        methods: vec![Method::new(recipe.canonical(), recipe.canonical())],
        sigma: a.sigma,
        replicates: a.reps,
        master_seed: a.seed,
        rule,
    };
    let report = run_image_mc(&img, &cfg, workers_from_env())?;
    if let Some(path) = &a.out {
        let w: WaveletOperator64 = recipe.build(img.width)?;
        let (est, _) = denoise_image(&img, &w, &w, a.sigma, &rule, NoiseSource::new(a.seed, 0))?;
        write_pgm(&est, path)?;
    }
    fs::create_dir_all(&a.out_dir)?;
    let (json, csv) = report.save(&a.out_dir, "image")?;
    print_report(&report);
    eprintln!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn ranked_csv(ranked: &[GridEntry]) -> String {
    let mut csv = String::from("rank,label,recipe,amse\n");
    for (i, e) in ranked.iter().enumerate() {
        csv.push_str(&format!("{},{},\"{}\",{}\n", i + 1, e.label, e.recipe, e.amse));
    }
    csv
}

fn grid(a: GridArgs) -> Outcome {
    let candidates: Vec<&str> = a.candidates.iter().map(String::as_str).collect();
    let (ranked, report) = if a.image.is_some() || a.synthetic.is_some() {
        let img = load_image(a.image.as_deref(), a.synthetic)?;
        let cfg = ImageMcConfig {
            methods: Vec::new(),
            sigma: a.sigma,
            replicates: a.reps,
            master_seed: a.seed,
            rule: ThresholdRule::known_sigma(a.sigma),
        };
        grid_search_pairs(&candidates, a.levels, GridTarget::Image(&img, &cfg))?
    } else {
        let cfg = McConfig {
            methods: Vec::new(),
            signal: a.signal.clone(),
            n: a.n,
            snr: Some(a.snr),
            sigma: a.sigma,
            replicates: a.reps,
            master_seed: a.seed,
            rule: ThresholdRule::known_sigma(a.sigma),
        };
        grid_search_pairs(&candidates, a.levels, GridTarget::Signal(&cfg))?
    };
    fs::create_dir_all(&a.out_dir)?;
    report.save(&a.out_dir, "grid")?;
    let csv = ranked_csv(&ranked);
    fs::write(a.out_dir.join("grid_ranked.csv"), &csv)?;
    fs::write(a.out_dir.join("grid_ranked.json"), to_json(&ranked))?;
    emit(None, &csv)
}
