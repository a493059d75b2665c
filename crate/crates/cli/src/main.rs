//! Batch experiment harness around the rotation-word library: word
//! evaluation, exhaustive min-distance search with exponent fits, symbolic
//! polynomial dumps, the elimination chain, sublevel measures, and the
//! degenerate commutator-tower orders.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rotword::elim::{elimination_chain, ElimError};
use rotword::measure::{
    check_dm_lemma, derivative_sublevel_measure, distance_sublevel_measure,
    union_sublevel_measure, MeasureError, Method, SublevelSpec, UnionBudget,
};
use rotword::quat::{evaluate_word, so3_distance, Angles, UnitQuaternion};
use rotword::search::{
    fit_diophantine, log_grid, tower_slope, ExperimentRecord, SearchError, TowerSlopeReport,
};
use rotword::trigpoly::{derivative_square_poly, leading_frequency_coeff};
use rotword::word::{commutator_tower, LevelSigns, TowerSigns, Word, WordError};
use std::f64::consts::TAU;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rotword", version, about = "Rotation-word experiment workbench")]
struct Cli {
    /// RNG seed for every randomized quantity.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Emit measured wall times. Off by default so identical runs produce
    /// byte-identical output.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a word at a parameter point and report the distance to a target.
    Eval(EvalArgs),
    /// Exhaustive min-distance search per length with exponent fits.
    Search(SearchArgs),
    /// Symbolic derivative-norm polynomial and leading frequency coefficient.
    Poly(PolyArgs),
    /// Run the three-stage elimination chain for a word.
    Eliminate(EliminateArgs),
    /// Sublevel measures on the parameter torus and the 1-D polynomial bound.
    Measure(MeasureArgs),
    /// Commutator-tower vanishing orders.
    Degenerate(DegenerateArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    word: String,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Target element: `id` or a word evaluated at the same point.
    #[arg(long, default_value = "id")]
    target: String,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    nmax: u32,
    /// Number of seeded-random parameter points.
    #[arg(long, default_value_t = 1)]
    points: usize,
    /// Fixed point overriding the random draw.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = "id")]
    target: String,
}

#[derive(Args)]
struct PolyArgs {
    #[arg(long)]
    word: String,
    /// Also report the leading alpha-frequency coefficient.
    #[arg(long)]
    leading: bool,
}

#[derive(Args)]
struct EliminateArgs {
    #[arg(long)]
    word: String,
    /// Base of the threshold scale `D^(-n^2)` recorded alongside the chain.
    #[arg(long, default_value_t = 2.0)]
    dee: f64,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(subcommand)]
    mode: MeasureMode,
}

#[derive(Subcommand)]
enum MeasureMode {
    /// Measure of the set where the word sits within `threshold` of the target.
    Dist(DistArgs),
    /// Measure of the set where the squared alpha-derivative is small.
    Deriv(DerivArgs),
    /// Union over all words of one length at threshold `dee^(-n^2)`.
    Union(UnionArgs),
    /// Batch check of the polynomial sublevel bound on random polynomials.
    DmCheck(DmCheckArgs),
}

#[derive(Args)]
struct DistArgs {
    #[arg(long)]
    word: String,
    #[arg(long)]
    threshold: f64,
    #[arg(long, default_value = "id")]
    target: String,
    #[arg(long, value_enum, default_value_t = EstMethod::Grid)]
    method: EstMethod,
    #[arg(long, default_value_t = 100)]
    res: u32,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
}

#[derive(Args)]
struct DerivArgs {
    #[arg(long)]
    word: String,
    #[arg(long)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = EstMethod::Grid)]
    method: EstMethod,
    #[arg(long, default_value_t = 100)]
    res: u32,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
}

#[derive(Args)]
struct UnionArgs {
    #[arg(long)]
    len: u32,
    #[arg(long, default_value_t = 2.0)]
    dee: f64,
    #[arg(long, value_enum, default_value_t = EstMethod::Mc)]
    method: EstMethod,
    #[arg(long, default_value_t = 40)]
    res: u32,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Word-count budget guard.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
}

#[derive(Args)]
struct DmCheckArgs {
    /// Number of random integer polynomials.
    #[arg(long, default_value_t = 100)]
    count: u32,
    #[arg(long, default_value_t = 10)]
    max_degree: u32,
    #[arg(long, default_value_t = 100_000)]
    res: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstMethod {
    Grid,
    Mc,
}

#[derive(Args)]
struct DegenerateArgs {
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.2)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-4)]
    alpha_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    alpha_max: f64,
    #[arg(long, default_value_t = 25)]
    count: usize,
    /// Sign vector `++|++--|...`; the non-collapsing default when absent.
    #[arg(long)]
    signs: Option<String>,
    /// Sweep every sign vector and report the steepest vanishing orders.
    #[arg(long)]
    explore: bool,
}

struct AppError {
    msg: String,
    code: u8,
}

impl AppError {
    fn validation(msg: impl Into<String>) -> AppError {
        AppError { msg: msg.into(), code: 2 }
    }
    fn budget(msg: impl Into<String>) -> AppError {
        AppError { msg: msg.into(), code: 3 }
    }
    fn internal(msg: impl Into<String>) -> AppError {
        AppError { msg: msg.into(), code: 1 }
    }
}

impl From<WordError> for AppError {
    fn from(e: WordError) -> AppError {
        AppError::validation(e.to_string())
    }
}

impl From<SearchError> for AppError {
    fn from(e: SearchError) -> AppError {
        match e {
            SearchError::Cap { .. } => AppError::budget(e.to_string()),
            SearchError::Word(w) => AppError::from(w),
        }
    }
}

impl From<ElimError> for AppError {
    fn from(e: ElimError) -> AppError {
        match e {
            ElimError::SizeCap { .. } => AppError::budget(e.to_string()),
            ElimError::DegenerateStage { .. } => AppError::internal(e.to_string()),
            other => AppError::validation(other.to_string()),
        }
    }
}

impl From<MeasureError> for AppError {
    fn from(e: MeasureError) -> AppError {
        match e {
            MeasureError::Budget { .. } => AppError::budget(e.to_string()),
            other => AppError::validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| AppError::internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| AppError::internal(e.to_string()))
        }
    }
}

fn parse_target(spec: &str, point: &Angles) -> Result<UnitQuaternion, AppError> {
    if spec == "id" {
        return Ok(UnitQuaternion::identity());
    }
    let word = Word::parse(spec)?;
    Ok(evaluate_word(&word, point))
}

fn random_points(seed: u64, count: usize) -> Vec<Angles> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Angles::new(
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
            )
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), AppError> {
    match &cli.cmd {
        Cmd::Eval(args) => run_eval(&cli, args),
        Cmd::Search(args) => run_search(&cli, args),
        Cmd::Poly(args) => run_poly(&cli, args),
        Cmd::Eliminate(args) => run_eliminate(&cli, args),
        Cmd::Measure(args) => run_measure(&cli, args),
        Cmd::Degenerate(args) => run_degenerate(&cli, args),
    }
}

fn run_eval(cli: &Cli, args: &EvalArgs) -> Result<(), AppError> {
    let word = Word::parse(&args.word)?;
    let point = Angles::new(args.alpha, args.beta, args.gamma);
    let q = evaluate_word(&word, &point);
    let target = parse_target(&args.target, &point)?;
    let dist = so3_distance(q, target);
    let content = match cli.format {
        Format::Csv => format!(
            "w,x,y,z,distance\n{},{},{},{},{}\n",
            q.w, q.x, q.y, q.z, dist
        ),
        Format::Json => {
            let value = serde_json::json!({
                "word": word.to_string(),
                "point": point,
                "quaternion": q,
                "target": args.target,
                "distance": dist,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
    };
    emit(&cli.out, &content)
}

fn record_to_csv(record: &ExperimentRecord, timings: bool) -> String {
    let mut out = String::new();
    for (i, point) in record.points.iter().enumerate() {
        out.push_str(&format!(
            "# point {} alpha={} beta={} gamma={}\n",
            i, point.alpha, point.beta, point.gamma
        ));
        out.push_str("n,min_dist,word,seconds\n");
        for row in &point.rows {
            let secs = if timings { row.seconds } else { 0.0 };
            out.push_str(&format!("{},{},{},{:.6}\n", row.n, row.min_dist, row.word, secs));
        }
        out.push_str(&format!(
            "# fit_n slope={} D={} rss={}\n",
            point.fit_in_n.slope, point.fit_in_n.d, point.fit_in_n.rss
        ));
        out.push_str(&format!(
            "# fit_n2 slope={} D={} rss={}\n",
            point.fit_in_n_sq.slope, point.fit_in_n_sq.d, point.fit_in_n_sq.rss
        ));
        out.push_str(&format!("# envelope D={}\n", point.envelope_d));
    }
    out
}

fn run_search(cli: &Cli, args: &SearchArgs) -> Result<(), AppError> {
    let points = match (args.alpha, args.beta, args.gamma) {
        (Some(a), Some(b), Some(g)) => vec![Angles::new(a, b, g)],
        (None, None, None) => random_points(cli.seed, args.points),
        _ => {
            return Err(AppError::validation(
                "give all of --alpha/--beta/--gamma or none",
            ))
        }
    };
    if args.target != "id" {
        Word::parse(&args.target)?;
    }
    // Target interpreted at each point (a word target moves with the point).
    let mut record = ExperimentRecord {
        kind: "search",
        seed: cli.seed,
        n_max: args.nmax,
        target: args.target.clone(),
        points: Vec::new(),
    };
    for p in &points {
        let target = parse_target(&args.target, p)?;
        let part = fit_diophantine(
            std::slice::from_ref(p),
            args.nmax,
            &target,
            &args.target,
            cli.seed,
            cli.threads,
        )?;
        record.points.extend(part.points);
    }
    let content = match cli.format {
        Format::Csv => record_to_csv(&record, cli.timings),
        Format::Json => {
            let mut record = record;
            if !cli.timings {
                for p in &mut record.points {
                    for r in &mut p.rows {
                        r.seconds = 0.0;
                    }
                }
            }
            format!("{}\n", serde_json::to_string_pretty(&record).unwrap())
        }
    };
    emit(&cli.out, &content)
}

fn run_poly(cli: &Cli, args: &PolyArgs) -> Result<(), AppError> {
    let word = Word::parse(&args.word)?;
    let poly = derivative_square_poly(&word)
        .map_err(|e| AppError::validation(e.to_string()))?;
    let leading = if args.leading {
        Some(
            leading_frequency_coeff(&word)
                .map_err(|e| AppError::validation(e.to_string()))?,
        )
    } else {
        None
    };
    let content = match cli.format {
        Format::Csv => {
            let mut out = format!(
                "# word={} degree={} terms={} height={}\n",
                word,
                poly.total_degree(),
                poly.num_terms(),
                poly.height()
            );
            out.push_str(&poly.to_text());
            if let Some(fc) = &leading {
                out.push_str(&format!("# leading frequency={}\n", fc.frequency));
                for (label, p) in [
                    ("w", &fc.coeff.w),
                    ("x", &fc.coeff.x),
                    ("y", &fc.coeff.y),
                    ("z", &fc.coeff.z),
                ] {
                    out.push_str(&format!("# component {label}\n"));
                    out.push_str(&p.to_text());
                }
            }
            out
        }
        Format::Json => {
            let mut value = serde_json::json!({
                "word": word.to_string(),
                "degree": poly.total_degree(),
                "terms": poly.num_terms(),
                "height": poly.height().to_string(),
                "poly": poly.to_text(),
            });
            if let Some(fc) = &leading {
                value["leading"] = serde_json::json!({
                    "frequency": fc.frequency,
                    "w": fc.coeff.w.to_text(),
                    "x": fc.coeff.x.to_text(),
                    "y": fc.coeff.y.to_text(),
                    "z": fc.coeff.z.to_text(),
                });
            }
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
    };
    emit(&cli.out, &content)
}

fn run_eliminate(cli: &Cli, args: &EliminateArgs) -> Result<(), AppError> {
    let word = Word::parse(&args.word)?;
    let record = elimination_chain(&word, args.dee)?;
    let content = match cli.format {
        Format::Csv => {
            let mut out = String::from("key,value\n");
            out.push_str(&format!("word,{}\n", record.word));
            out.push_str(&format!("length,{}\n", record.length));
            out.push_str(&format!("constant_shortcut,{}\n", record.constant_shortcut));
            out.push_str(&format!("final_degree,{}\n", record.final_degree));
            out.push_str(&format!("final_terms,{}\n", record.final_terms));
            out.push_str(&format!("certificate_positive,{}\n", record.certificate_positive));
            for s in &record.stages {
                out.push_str(&format!(
                    "stage{}_resultant_degree,{}\n",
                    s.stage, s.resultant_degree
                ));
                out.push_str(&format!(
                    "stage{}_integral_degree,{}\n",
                    s.stage, s.integral_degree
                ));
            }
            out
        }
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&record).unwrap()),
    };
    emit(&cli.out, &content)
}

fn est_method(method: EstMethod, res: u32, samples: u64, seed: u64) -> Method {
    match method {
        EstMethod::Grid => Method::Grid { resolution: res },
        EstMethod::Mc => Method::MonteCarlo { samples, seed },
    }
}

fn run_measure(cli: &Cli, args: &MeasureArgs) -> Result<(), AppError> {
    let content = match &args.mode {
        MeasureMode::Dist(d) => {
            let word = Word::parse(&d.word)?;
            let point0 = Angles::new(0.0, 0.0, 0.0);
            let target = parse_target(&d.target, &point0)?;
            let spec = SublevelSpec::new(word, target, d.threshold)?;
            let est = distance_sublevel_measure(&spec, est_method(d.method, d.res, d.samples, cli.seed));
            render_measure(cli, serde_json::to_value(&est).unwrap())
        }
        MeasureMode::Deriv(d) => {
            let word = Word::parse(&d.word)?;
            let est = derivative_sublevel_measure(
                &word,
                d.threshold,
                est_method(d.method, d.res, d.samples, cli.seed),
            );
            render_measure(cli, serde_json::to_value(&est).unwrap())
        }
        MeasureMode::Union(u) => {
            let um = union_sublevel_measure(
                u.len,
                u.dee,
                UnitQuaternion::identity(),
                est_method(u.method, u.res, u.samples, cli.seed),
                UnionBudget { max_words: u.budget },
            )?;
            render_measure(cli, serde_json::to_value(&um).unwrap())
        }
        MeasureMode::DmCheck(d) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut violations = 0u32;
            let mut checked = 0u32;
            let mut worst_ratio = 0.0f64;
            for _ in 0..d.count {
                let deg = rng.gen_range(1..=d.max_degree) as usize;
                let mut coeffs: Vec<f64> =
                    (0..=deg).map(|_| rng.gen_range(-9i64..=9) as f64).collect();
                if coeffs[deg] == 0.0 {
                    coeffs[deg] = 1.0;
                }
                for pow in 2..=8 {
                    let eps = 10f64.powi(-pow);
                    let check = check_dm_lemma(&coeffs, (-1.0, 1.0), eps, d.res);
                    checked += 1;
                    if !check.ok {
                        violations += 1;
                    }
                    if check.bound.value > 0.0 {
                        worst_ratio = worst_ratio.max(check.measured / check.bound.value);
                    }
                }
            }
            let value = serde_json::json!({
                "polynomials": d.count,
                "checks": checked,
                "violations": violations,
                "worst_ratio": worst_ratio,
                "seed": cli.seed,
            });
            render_measure(cli, value)
        }
    };
    emit(&cli.out, &content?)
}

fn render_measure(cli: &Cli, value: serde_json::Value) -> Result<String, AppError> {
    Ok(match cli.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
        Format::Csv => {
            let obj = value.as_object().unwrap();
            let mut out = String::from("key,value\n");
            for (k, v) in obj {
                out.push_str(&format!("{k},{v}\n"));
            }
            out
        }
    })
}

fn run_degenerate(cli: &Cli, args: &DegenerateArgs) -> Result<(), AppError> {
    let alphas = log_grid(args.alpha_min, args.alpha_max, args.count);
    if args.explore {
        return explore_signs(cli, args, &alphas);
    }
    let signs = match &args.signs {
        Some(s) => {
            let parsed = TowerSigns::parse(s)?;
            if parsed.levels.len() < args.k as usize {
                return Err(AppError::validation(format!(
                    "sign vector has {} levels, k={} needs {}",
                    parsed.levels.len(),
                    args.k,
                    args.k
                )));
            }
            parsed
        }
        None => TowerSigns::standard(args.k),
    };
    let report = tower_slope(args.k, args.beta, args.gamma, &alphas, &signs)?;
    let content = match cli.format {
        Format::Csv => {
            let mut out = format!(
                "# k={} signs={} word_length={} slope={}\n",
                report.k, report.signs, report.word_length, report.slope
            );
            out.push_str("alpha,dist_sq\n");
            for (a, d) in &report.samples {
                out.push_str(&format!("{a},{d}\n"));
            }
            out
        }
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    };
    emit(&cli.out, &content)
}

/// Exploratory sweep over sign vectors: reports the steepest squared-distance
/// vanishing orders found. No claim is attached to the output; it exists to
/// probe how far the vanishing order can be pushed.
fn explore_signs(cli: &Cli, args: &DegenerateArgs, alphas: &[f64]) -> Result<(), AppError> {
    if args.k > 3 {
        return Err(AppError::budget("explore mode caps at k = 3"));
    }
    let level_variants: Vec<LevelSigns> = (0..16u32)
        .map(|bits| {
            let s = |i: u32| if bits >> i & 1 == 1 { 1i8 } else { -1 };
            LevelSigns { a_first: s(0), a_second: s(1), b_first: s(2), b_second: s(3) }
        })
        .collect();
    let mut reports: Vec<TowerSlopeReport> = Vec::new();
    let mut stack: Vec<Vec<LevelSigns>> = vec![Vec::new()];
    while let Some(levels) = stack.pop() {
        if levels.len() == args.k as usize {
            for base_bits in 0..4u32 {
                let signs = TowerSigns {
                    base_a: if base_bits & 1 == 1 { 1 } else { -1 },
                    base_b: if base_bits & 2 == 2 { 1 } else { -1 },
                    levels: levels.clone(),
                };
                if commutator_tower(args.k, &signs).is_err() {
                    continue;
                }
                if let Ok(rep) = tower_slope(args.k, args.beta, args.gamma, alphas, &signs) {
                    reports.push(rep);
                }
            }
            continue;
        }
        for v in &level_variants {
            let mut next = levels.clone();
            next.push(*v);
            stack.push(next);
        }
    }
    reports.sort_by(|a, b| b.slope.total_cmp(&a.slope).then(a.signs.cmp(&b.signs)));
    reports.truncate(20);
    let content = match cli.format {
        Format::Csv => {
            let mut out = String::from("rank,signs,word_length,slope\n");
            for (i, r) in reports.iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", i + 1, r.signs, r.word_length, r.slope));
            }
            out
        }
        Format::Json => {
            let summary: Vec<serde_json::Value> = reports
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "signs": r.signs,
                        "word_length": r.word_length,
                        "slope": r.slope,
                    })
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&summary).unwrap())
        }
    };
    emit(&cli.out, &content)
}
