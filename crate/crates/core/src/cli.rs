//! The `specdet` command line: `calibrate`, `detect`, `sweep` and `flops`.
//!
//! [`run`] takes the arguments and output streams explicitly so the whole
//! front end can be driven from tests. Exit codes: 0 on success, 2 for
//! usage or validation errors, 1 for I/O failures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detect::{exhaustive_detect, oracle_detect, BinarySearch, DetectorKind};
use crate::error::{Error, Result};
use crate::flops::count_flops;
use crate::grid::{PowerGrid, Region, Shape};
use crate::sim::{gen_trial, random_placement, Cell, NoiseNormalization, Sweep, TrialConfig};
use crate::thresholds::{calibrate_oracle, ThresholdTable};

#[derive(Parser, Debug)]
#[command(name = "specdet", version, about = "GLRT detection of signals with unknown extent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a calibrated threshold table as JSON.
    Calibrate(CalibrateArgs),
    /// Run one detector on a CSV of powers and print the detection as JSON.
    Detect(DetectArgs),
    /// Monte Carlo sweep over detectors, signal sizes and SNRs; writes CSV.
    Sweep(SweepArgs),
    /// Count operations of the instrumented detectors on one seeded trial.
    Flops(FlopsArgs),
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[arg(long)]
    pfa: f64,
    /// Grid length (1-D).
    #[arg(long, conflicts_with = "shape")]
    n: Option<usize>,
    /// Grid shape, `1024` or `128x128`.
    #[arg(long)]
    shape: Option<Shape>,
    /// `dyadic`, `all`, or a comma-separated list of cardinalities.
    #[arg(long, default_value = "dyadic")]
    sizes: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// One row of powers (1-D) or a rectangular block of rows (2-D).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pfa: f64,
    #[arg(long, default_value = "binary")]
    detector: DetectorKind,
    /// Threshold table JSON to use instead of calibrating at `--pfa`.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Candidate region for the oracle detector: `a:b` or `a1:b1,a2:b2`.
    #[arg(long)]
    region: Option<String>,
    /// Oracle threshold; defaults to the single-region calibration at `--pfa`.
    #[arg(long)]
    u0: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Preset {
    Paper1d,
    Paper2d,
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    /// JSON file with any of the sweep settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// False-alarm target [default: 1e-6]
    #[arg(long)]
    pfa: Option<f64>,
    #[arg(long, conflicts_with = "shape")]
    n: Option<usize>,
    #[arg(long)]
    shape: Option<Shape>,
    /// Detector names, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    detector: Vec<DetectorKind>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db_list: Vec<f64>,
    /// Signal sizes (interval length, or square side on a plane).
    #[arg(long, value_delimiter = ',')]
    size_list: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise-reference sample counts; `known` for exactly known noise.
    #[arg(long, value_delimiter = ',')]
    nref_list: Vec<String>,
    #[arg(long, value_enum)]
    normalization: Option<Normalization>,
    /// Also run noise-only cells (false-alarm rates).
    #[arg(long)]
    h0: bool,
    /// Output path; `.json` writes JSON, anything else CSV. Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Normalization {
    Power,
    Amplitude,
}

impl From<Normalization> for NoiseNormalization {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::Power => NoiseNormalization::Power,
            Normalization::Amplitude => NoiseNormalization::Amplitude,
        }
    }
}

#[derive(Args, Debug)]
struct FlopsArgs {
    /// Shapes to measure, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1024,128x128")]
    shape: Vec<Shape>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the exhaustive detector on planes (about 10⁹ operations at 128x128).
    #[arg(long)]
    skip_exhaustive_2d: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sweep settings as read from a `--config` file. Every field is optional.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub pfa: Option<f64>,
    pub n: Option<usize>,
    pub shape: Option<String>,
    pub detectors: Option<Vec<DetectorKind>>,
    pub snr_db_list: Option<Vec<f64>>,
    pub size_list: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// Counts, or `"known"`.
    pub nref_list: Option<Vec<serde_json::Value>>,
    pub normalization: Option<NoiseNormalization>,
    pub h0: Option<bool>,
    pub out: Option<PathBuf>,
}

const PRESET_SNRS: [f64; 12] = [-3.0, -1.0, 1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0, 17.0, 20.0];

/// Parses the arguments (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return if code == 0 { 0 } else { 2 };
        }
    };

    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

/// Worker cap from `SPECDET_THREADS`, if set.
fn thread_cap() -> Result<Option<usize>> {
    let Ok(value) = std::env::var("SPECDET_THREADS") else {
        return Ok(None);
    };
    value
        .trim()
        .parse()
        .ok()
        .filter(|&t: &usize| t > 0)
        .map(Some)
        .ok_or_else(|| Error::domain(format!("SPECDET_THREADS must be a positive integer, got '{value}'")))
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Calibrate(a) => cmd_calibrate(a, stdout),
        Command::Detect(a) => cmd_detect(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
        Command::Flops(a) => cmd_flops(a, stdout),
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs, stdout: &mut dyn Write) -> Result<()> {
    let shape = match (a.n, a.shape) {
        (Some(n), None) => Shape::Line(n),
        (None, Some(s)) => s,
        _ => return Err(Error::domain("calibrate needs --n or --shape")),
    };
    let n_total = shape.len();
    let sizes: Vec<usize> = match a.sizes.trim() {
        "dyadic" => match shape {
            Shape::Line(n) => ThresholdTable::dyadic_sizes(n).collect(),
            Shape::Plane(r, c) => ThresholdTable::dyadic_sizes(r.min(c)).map(|s| s * s).collect(),
        },
        "all" => (1..=n_total).collect(),
        list => parse_list(list)?,
    };
    if let Some(&bad) = sizes.iter().find(|&&l| l == 0 || l > n_total) {
        return Err(Error::domain(format!("size {bad} outside [1, {n_total}]")));
    }
    let table = ThresholdTable::calibrate(a.pfa, n_total, sizes)?;
    emit(a.out.as_deref(), &table.to_json()?, stdout)
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::domain(format!("expected an integer, got '{t}'")))
        })
        .collect()
}

fn read_grid(path: &Path) -> Result<PowerGrid> {
    let text = fs::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::domain(format!("line {}: '{f}' is not a number", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    match rows.len() {
        0 => Err(Error::domain("input has no values")),
        1 => PowerGrid::line(rows.pop().unwrap()),
        _ => PowerGrid::plane(rows),
    }
}

fn parse_span(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::domain(format!("region part '{text}' is not of the form a:b"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_region(text: &str) -> Result<Region> {
    match text.split_once(',') {
        None => {
            let (a, b) = parse_span(text)?;
            Ok(Region::interval(a, b))
        }
        Some((r, c)) => {
            let (a1, b1) = parse_span(r)?;
            let (a2, b2) = parse_span(c)?;
            Ok(Region::rect(a1, b1, a2, b2))
        }
    }
}

#[derive(Serialize)]
struct DetectOutput {
    decided: bool,
    a: Option<usize>,
    b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a2: Option<Option<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b2: Option<Option<usize>>,
    /// `null` when the estimate is zero (minus infinity in dB).
    snr_hat_db: Option<f64>,
    score: f64,
}

fn cmd_detect(a: DetectArgs, stdout: &mut dyn Write) -> Result<()> {
    let grid = read_grid(&a.input)?;
    let table = || -> Result<ThresholdTable> {
        match &a.table {
            Some(path) => ThresholdTable::from_json(&fs::read_to_string(path)?),
            None => ThresholdTable::calibrate(a.pfa, grid.len(), []),
        }
    };
    let det = match a.detector {
        DetectorKind::Exhaustive => exhaustive_detect(&grid, &table()?)?,
        DetectorKind::Binary => BinarySearch::default().detect(&grid, &table()?)?,
        DetectorKind::Oracle => {
            let region = a
                .region
                .as_deref()
                .ok_or_else(|| Error::domain("the oracle detector needs --region"))?;
            let s0 = parse_region(region)?;
            let u0 = match a.u0 {
                Some(u) => u,
                None => calibrate_oracle(a.pfa, s0.cardinality().max(1))?,
            };
            oracle_detect(&grid, &s0, u0)?
        }
    };
    let plane = grid.shape().dims() == 2;
    let (a1, b1, a2, b2) = match det.region {
        Region::Empty => (None, None, None, None),
        Region::Interval(s) => (Some(s.start), Some(s.end), None, None),
        Region::Rect { rows, cols } => (Some(rows.start), Some(rows.end), Some(cols.start), Some(cols.end)),
    };
    let db = det.snr_hat.db();
    let out = DetectOutput {
        decided: det.decided,
        a: a1,
        b: b1,
        a2: plane.then_some(a2),
        b2: plane.then_some(b2),
        snr_hat_db: db.is_finite().then_some(db),
        score: det.score,
    };
    writeln!(stdout, "{}", serde_json::to_string_pretty(&out)?)?;
    Ok(())
}

/// Fully resolved sweep settings.
struct SweepPlan {
    pfa: f64,
    shape: Shape,
    detectors: Vec<DetectorKind>,
    snrs: Vec<f64>,
    sizes: Vec<usize>,
    trials: usize,
    seed: u64,
    nrefs: Vec<Option<usize>>,
    normalization: NoiseNormalization,
    h0: bool,
    out: Option<PathBuf>,
}

fn preset_config(p: Preset) -> RunConfig {
    let (shape, detectors, sizes) = match p {
        Preset::Paper1d => ("1024", DetectorKind::ALL.to_vec(), vec![16, 64, 256]),
        // the exhaustive search costs ~10⁹ operations per 128x128 trial;
        // add it with --detector when that budget is acceptable
        Preset::Paper2d => ("128x128", vec![DetectorKind::Binary, DetectorKind::Oracle], vec![4, 16, 64]),
    };
    RunConfig {
        pfa: Some(1e-6),
        shape: Some(shape.into()),
        detectors: Some(detectors),
        snr_db_list: Some(PRESET_SNRS.to_vec()),
        size_list: Some(sizes),
        trials: Some(2000),
        seed: Some(0),
        ..RunConfig::default()
    }
}

fn parse_nref(token: &str) -> Result<Option<usize>> {
    let t = token.trim();
    if t.eq_ignore_ascii_case("known") {
        return Ok(None);
    }
    match t.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Some(n)),
        _ => Err(Error::domain(format!("noise reference must be a positive count or 'known', got '{t}'"))),
    }
}

// precedence: flags, then the config file, then the preset
fn pick<T>(flag: Vec<T>, file: Option<Vec<T>>, base: Option<Vec<T>>) -> Option<Vec<T>> {
    if flag.is_empty() {
        file.or(base)
    } else {
        Some(flag)
    }
}

fn plan_sweep(a: SweepArgs) -> Result<SweepPlan> {
    let file: RunConfig = match &a.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    let preset = match (a.preset, file.preset.as_deref()) {
        (Some(p), _) => Some(p),
        (None, Some(name)) => Some(
            Preset::from_str(name, true).map_err(|_| Error::domain(format!("unknown preset '{name}'")))?,
        ),
        (None, None) => None,
    };
    let base = preset.map(preset_config).unwrap_or_default();

    let shape = match (a.n, a.shape) {
        (Some(n), _) => Some(Shape::Line(n)),
        (None, Some(s)) => Some(s),
        (None, None) => match (file.n, file.shape.as_deref()) {
            (Some(n), _) => Some(Shape::Line(n)),
            (None, Some(s)) => Some(s.parse()?),
            (None, None) => base.shape.as_deref().map(str::parse).transpose()?,
        },
    }
    .ok_or_else(|| Error::domain("sweep needs --n or --shape (or a preset)"))?;

    let nref_tokens: Option<Vec<String>> = if a.nref_list.is_empty() {
        file.nref_list.map(|v| {
            v.into_iter()
                .map(|x| match x {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                })
                .collect()
        })
    } else {
        Some(a.nref_list)
    };
    let nrefs = match nref_tokens {
        Some(tokens) => tokens.iter().map(|t| parse_nref(t)).collect::<Result<Vec<_>>>()?,
        None => vec![None],
    };

    let plan = SweepPlan {
        pfa: a.pfa.or(file.pfa).or(base.pfa).unwrap_or(1e-6),
        shape,
        detectors: pick(a.detector, file.detectors, base.detectors)
            .ok_or_else(|| Error::domain("sweep needs --detector"))?,
        snrs: pick(a.snr_db_list, file.snr_db_list, base.snr_db_list).unwrap_or_default(),
        sizes: pick(a.size_list, file.size_list, base.size_list).unwrap_or_default(),
        trials: a.trials.or(file.trials).or(base.trials).ok_or_else(|| Error::domain("sweep needs --trials"))?,
        seed: a.seed.or(file.seed).or(base.seed).unwrap_or(0),
        nrefs,
        normalization: a.normalization.map(Into::into).or(file.normalization).unwrap_or_default(),
        h0: a.h0 || file.h0.unwrap_or(false),
        out: a.out.or(file.out),
    };
    if plan.trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if !plan.h0 && (plan.snrs.is_empty() || plan.sizes.is_empty()) {
        return Err(Error::domain("sweep needs --snr-db-list and --size-list (or --h0)"));
    }
    Ok(plan)
}

fn sweep_cells(plan: &SweepPlan) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &d in &plan.detectors {
        for &size in &plan.sizes {
            for &snr in &plan.snrs {
                for &nref in &plan.nrefs {
                    let mut c = Cell::signal(d, plan.shape, size, snr);
                    c.noise_ref = nref;
                    cells.push(c);
                }
            }
        }
        if plan.h0 && d != DetectorKind::Oracle {
            for &nref in &plan.nrefs {
                let mut c = Cell::noise(d, plan.shape);
                c.noise_ref = nref;
                cells.push(c);
            }
        }
    }
    cells
}

fn cmd_sweep(a: SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let plan = plan_sweep(a)?;
    let cells = sweep_cells(&plan);
    let mut sweep = Sweep::new(plan.trials, plan.pfa, plan.seed);
    sweep.normalization = plan.normalization;
    sweep.threads = thread_cap()?;
    let result = sweep.run_with_progress(&cells, |done, total, r| {
        let snr = r.snr_db.map_or("noise".to_string(), |s| format!("{s} dB"));
        let _ = writeln!(
            stderr,
            "[{done}/{total}] {} size {} {snr}: md {:.4}",
            r.detector, r.signal_size, r.md_rate
        );
    })?;
    let json = plan.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let text = if json { result.to_json()? } else { result.to_csv()? };
    emit(plan.out.as_deref(), &text, stdout)
}

#[derive(Serialize)]
struct FlopRow {
    shape: String,
    detector: &'static str,
    phase: &'static str,
    flops: u64,
}

fn cmd_flops(a: FlopsArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut rows = Vec::new();
    for &shape in &a.shape {
        let table = ThresholdTable::calibrate(1e-6, shape.len(), [])?;
        // one signal-bearing trial, size 1/16 of each axis at 10 dB
        let size = (shape.side() / 16).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let region = random_placement(shape, size, &mut rng)?;
        let grid = gen_trial(&TrialConfig::signal(shape, region, 10.0, a.seed))?;

        let b = count_flops(DetectorKind::Binary, &grid, &table)?;
        let tag = shape.to_string();
        for (phase, flops) in [("dyadic_search", b.dyadic_search), ("refine", b.refine), ("total", b.total())] {
            rows.push(FlopRow { shape: tag.clone(), detector: "binary", phase, flops });
        }
        if !(a.skip_exhaustive_2d && shape.dims() == 2) {
            let e = count_flops(DetectorKind::Exhaustive, &grid, &table)?;
            rows.push(FlopRow { shape: tag, detector: "exhaustive", phase: "total", flops: e.total() });
        }
    }

    writeln!(stdout, "{:<10} {:<11} {:<14} {:>14}", "shape", "detector", "phase", "flops")?;
    for r in &rows {
        writeln!(stdout, "{:<10} {:<11} {:<14} {:>14.3e}", r.shape, r.detector, r.phase, r.flops as f64)?;
    }
    if let Some(path) = &a.out {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::domain(format!("{other:?}")),
            })?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}
