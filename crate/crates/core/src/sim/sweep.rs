use std::collections::HashMap;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{exhaustive_detect, oracle_detect, BinarySearch, DetectorKind};
use crate::error::{Error, Result};
use crate::glrt::{iou, Detection};
use crate::grid::Shape;
use crate::thresholds::{calibrate_oracle, ThresholdTable};

use super::rng::{mix, splitmix64, trial_seed};
use super::trial::{gen_trial, random_placement, NoiseNormalization, TrialConfig};

/// What the trials of a cell contain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Hypothesis {
    Noise,
    /// A `size`-long interval (or `size x size` square) at `snr_db`, placed
    /// uniformly at random in every trial.
    Signal { size: usize, snr_db: f64 },
}

/// One point of an experiment grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub detector: DetectorKind,
    pub shape: Shape,
    pub hypothesis: Hypothesis,
    /// Noise-reference sample count; `None` for perfectly known noise.
    pub noise_ref: Option<usize>,
}

impl Cell {
    pub fn signal(detector: DetectorKind, shape: Shape, size: usize, snr_db: f64) -> Self {
        Cell {
            detector,
            shape,
            hypothesis: Hypothesis::Signal { size, snr_db },
            noise_ref: None,
        }
    }

    pub fn noise(detector: DetectorKind, shape: Shape) -> Self {
        Cell {
            detector,
            shape,
            hypothesis: Hypothesis::Noise,
            noise_ref: None,
        }
    }

    pub fn with_noise_ref(mut self, n_ref: usize) -> Self {
        self.noise_ref = Some(n_ref);
        self
    }

    /// Name written to the `detector` column.
    pub fn label(&self) -> String {
        match self.noise_ref {
            None => self.detector.to_string(),
            Some(n) => format!("{}(nref={n})", self.detector),
        }
    }

    /// Identifies the data a cell draws. The detector and the noise
    /// reference are left out, so every detector sees the same grids and
    /// noise-estimation cells differ from known-noise cells only by the
    /// normalization.
    fn data_key(&self) -> u64 {
        let (rows, cols) = match self.shape {
            Shape::Line(n) => (n, 0),
            Shape::Plane(r, c) => (r, c),
        };
        let (size, snr) = match self.hypothesis {
            Hypothesis::Noise => (0, u64::MAX),
            Hypothesis::Signal { size, snr_db } => (size, snr_db.to_bits()),
        };
        mix([self.shape.dims() as u64, rows as u64, cols as u64, size as u64, snr])
    }

    fn validate(&self) -> Result<()> {
        if self.shape.is_empty() {
            return Err(Error::domain("grid must have at least one bin"));
        }
        match self.hypothesis {
            Hypothesis::Noise if self.detector == DetectorKind::Oracle => Err(Error::domain(
                "the oracle detector needs a signal region; it has no noise-only cells",
            )),
            Hypothesis::Signal { snr_db, .. } if !snr_db.is_finite() => {
                Err(Error::domain(format!("invalid SNR {snr_db} dB")))
            }
            Hypothesis::Signal { size, .. } => {
                // checks that the size fits
                random_placement(self.shape, size, &mut ChaCha8Rng::seed_from_u64(0)).map(|_| ())
            }
            Hypothesis::Noise => Ok(()),
        }
        .and_then(|()| match self.noise_ref {
            Some(0) => Err(Error::domain("noise reference needs at least one sample")),
            _ => Ok(()),
        })
    }

    /// The exact grid configuration trial `trial` of this cell uses under
    /// `master_seed`.
    pub fn trial_config(&self, master_seed: u64, trial: u64, normalization: NoiseNormalization) -> Result<TrialConfig> {
        let seed = trial_seed(master_seed, self.data_key(), trial);
        let mut cfg = match self.hypothesis {
            Hypothesis::Noise => TrialConfig::noise(self.shape, seed),
            Hypothesis::Signal { size, snr_db } => {
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x5bd1_e995));
                let region = random_placement(self.shape, size, &mut rng)?;
                TrialConfig::signal(self.shape, region, snr_db, seed)
            }
        };
        if let Some(n) = self.noise_ref {
            cfg = cfg.with_noise_ref(n, normalization);
        }
        Ok(cfg)
    }
}

/// Aggregated metrics for one cell; one CSV row.
///
/// `md_rate` is the fraction of trials without a detection (under noise
/// only this is `1 − fa_rate`). The IoU columns average over detected
/// trials and are empty when nothing was detected or no signal was present.
/// `mean_score` averages the achieved `J` over all trials, counting misses
/// as zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub detector: String,
    pub dims: usize,
    pub n: usize,
    pub signal_size: usize,
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub md_rate: f64,
    pub fa_rate: f64,
    pub iou_mean: Option<f64>,
    pub iou_error_rate: Option<f64>,
    pub mean_score: f64,
    pub seed: u64,
}

impl CellResult {
    pub fn detection_rate(&self) -> f64 {
        1.0 - self.md_rate
    }

    /// Standard error of `md_rate`.
    pub fn md_se(&self) -> f64 {
        binomial_se(self.md_rate, self.trials)
    }
}

/// `sqrt(p (1 − p) / n)`.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

pub const CSV_HEADER: &str =
    "detector,dims,n,signal_size,snr_db,trials,md_rate,fa_rate,iou_mean,iou_error_rate,mean_score,seed";

/// Per-cell results in the order the cells were given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SweepResult {
    pub records: Vec<CellResult>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        if self.records.is_empty() {
            w.write_record(CSV_HEADER.split(','))?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header.join(",") != CSV_HEADER {
            return Err(Error::domain(format!("unexpected sweep CSV header: {}", header.join(","))));
        }
        let records = r.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(SweepResult { records })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The record for `label` at `signal_size` and `snr_db`, if present.
    pub fn find(&self, label: &str, signal_size: usize, snr_db: f64) -> Option<&CellResult> {
        self.records
            .iter()
            .find(|r| r.detector == label && r.signal_size == signal_size && r.snr_db == Some(snr_db))
    }
}

/// Sweep settings shared by all cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    pub trials: usize,
    pub pfa: f64,
    pub seed: u64,
    pub normalization: NoiseNormalization,
    pub binary: BinarySearch,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

/// What one detector invocation produced in one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome {
    pub decided: bool,
    /// IoU against the true region; `None` without a detection or signal.
    pub iou: Option<f64>,
    pub score: f64,
}

impl Sweep {
    pub fn new(trials: usize, pfa: f64, seed: u64) -> Self {
        Sweep {
            trials,
            pfa,
            seed,
            normalization: NoiseNormalization::Power,
            binary: BinarySearch::default(),
            threads: None,
        }
    }

    pub fn run(&self, cells: &[Cell]) -> Result<SweepResult> {
        self.run_with_progress(cells, |_, _, _| {})
    }

    /// Runs every cell, calling `progress(done, total, record)` after each.
    ///
    /// Trials within a cell run on the rayon pool; results are collected in
    /// trial order and folded sequentially, so the output does not depend on
    /// the number of threads.
    pub fn run_with_progress(
        &self,
        cells: &[Cell],
        mut progress: impl FnMut(usize, usize, &CellResult),
    ) -> Result<SweepResult> {
        if cells.is_empty() {
            return Err(Error::domain("sweep needs at least one cell"));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::domain("pfa must be in (0,1)"));
        }
        for cell in cells {
            cell.validate()?;
            if cell.detector == DetectorKind::Binary {
                let side = cell.shape.side();
                let square = matches!(cell.shape, Shape::Line(_)) || cell.shape.len() == side * side;
                if !side.is_power_of_two() || !square {
                    return Err(Error::NotPowerOfTwo(cell.shape.to_string()));
                }
            }
        }

        let pool = match self.threads {
            Some(t) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::domain(e.to_string()))?,
            ),
            None => None,
        };
        let mut tables: HashMap<usize, ThresholdTable> = HashMap::new();
        let mut records = Vec::with_capacity(cells.len());
        for (k, cell) in cells.iter().enumerate() {
            let n_total = cell.shape.len();
            if !tables.contains_key(&n_total) {
                tables.insert(n_total, ThresholdTable::calibrate(self.pfa, n_total, [])?);
            }
            let table = &tables[&n_total];
            let record = match &pool {
                Some(p) => p.install(|| self.run_cell(cell, table))?,
                None => self.run_cell(cell, table)?,
            };
            progress(k + 1, cells.len(), &record);
            records.push(record);
        }
        Ok(SweepResult { records })
    }

    fn run_cell(&self, cell: &Cell, table: &ThresholdTable) -> Result<CellResult> {
        let outcomes = self.cell_outcomes(cell, table)?;
        Ok(self.aggregate(cell, &outcomes))
    }

    /// Per-trial results of one cell, in trial order. `table` must be
    /// calibrated for this sweep's `pfa` and the cell's grid size.
    pub fn outcomes(&self, cell: &Cell, table: &ThresholdTable) -> Result<Vec<TrialOutcome>> {
        cell.validate()?;
        if table.n_total() != cell.shape.len() {
            return Err(Error::TableMismatch {
                table: table.n_total(),
                grid: cell.shape.len(),
            });
        }
        self.cell_outcomes(cell, table)
    }

    fn cell_outcomes(&self, cell: &Cell, table: &ThresholdTable) -> Result<Vec<TrialOutcome>> {
        let u0 = match (cell.detector, cell.hypothesis) {
            (DetectorKind::Oracle, Hypothesis::Signal { size, .. }) => {
                calibrate_oracle(self.pfa, size.pow(cell.shape.dims() as u32))?
            }
            _ => f64::NAN,
        };
        if cell.detector == DetectorKind::Exhaustive {
            // fill the table up front rather than racing inside the trials
            warm_exhaustive(table, cell.shape)?;
        }
        (0..self.trials as u64)
            .into_par_iter()
            .map(|t| {
                let cfg = cell.trial_config(self.seed, t, self.normalization)?;
                let grid = gen_trial(&cfg)?;
                let d: Detection = match cell.detector {
                    DetectorKind::Exhaustive => exhaustive_detect(&grid, table)?,
                    DetectorKind::Binary => self.binary.detect(&grid, table)?,
                    DetectorKind::Oracle => {
                        let s0 = cfg.true_region.expect("oracle cells carry a signal");
                        oracle_detect(&grid, &s0, u0)?
                    }
                };
                Ok(TrialOutcome {
                    decided: d.decided,
                    iou: cfg.true_region.filter(|_| d.decided).map(|t| iou(&d.region, &t)),
                    score: d.score,
                })
            })
            .collect()
    }

    fn aggregate(&self, cell: &Cell, outcomes: &[TrialOutcome]) -> CellResult {
        let trials = outcomes.len();
        let detected = outcomes.iter().filter(|o| o.decided).count();
        let det_rate = detected as f64 / trials as f64;
        let signal = matches!(cell.hypothesis, Hypothesis::Signal { .. });
        let ious: Vec<f64> = outcomes.iter().filter_map(|o| o.iou).collect();
        let iou_mean = (!ious.is_empty()).then(|| ious.iter().sum::<f64>() / ious.len() as f64);
        let (signal_size, snr_db) = match cell.hypothesis {
            Hypothesis::Noise => (0, None),
            Hypothesis::Signal { size, snr_db } => (size, Some(snr_db)),
        };
        CellResult {
            detector: cell.label(),
            dims: cell.shape.dims(),
            n: cell.shape.side(),
            signal_size,
            snr_db,
            trials,
            md_rate: (trials - detected) as f64 / trials as f64,
            fa_rate: if signal { 0.0 } else { det_rate },
            iou_mean,
            iou_error_rate: iou_mean.map(|m| 1.0 - m),
            mean_score: outcomes.iter().map(|o| o.score).sum::<f64>() / trials as f64,
            seed: self.seed,
        }
    }
}

fn warm_exhaustive(table: &ThresholdTable, shape: Shape) -> Result<()> {
    match shape {
        Shape::Line(n) => table.dense_u(1..=n).map(|_| ()),
        Shape::Plane(r, c) => {
            let mut areas: Vec<usize> = (1..=r).flat_map(|h| (1..=c).map(move |w| h * w)).collect();
            areas.sort_unstable();
            areas.dedup();
            table.dense_u(areas).map(|_| ())
        }
    }
}

/// Runs `cells` with default settings.
pub fn run_sweep(cells: &[Cell], trials: usize, pfa: f64, master_seed: u64) -> Result<SweepResult> {
    Sweep::new(trials, pfa, master_seed).run(cells)
}
