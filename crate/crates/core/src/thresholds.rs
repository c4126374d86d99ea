//! Per-cardinality detection thresholds and the analytic error bounds.
//!
//! A union bound over the `N²/2` candidate regions gives
//! `P_FA ≤ (N²/2) max_ℓ F(2ℓ u_ℓ; 2ℓ)`, so choosing every `u_ℓ` with
//! `F(2ℓ u_ℓ; 2ℓ) = 2 P_FA / N²` meets a false-alarm target. The count
//! `N²/2` is used with `N = N1 N2` for planes as well.

use std::collections::BTreeMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::chi2::{ccdf, inv_ccdf, ChiSqParams};
use crate::error::{Error, Result};
use crate::glrt::{phi_unchecked, Snr};

/// One row of a threshold table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub ell: usize,
    /// Mean-power threshold `u_ℓ`.
    pub u: f64,
    /// Log-likelihood threshold `t_ℓ = ℓ φ(u_ℓ)`.
    pub t: f64,
}

impl Threshold {
    fn from_u(ell: usize, u: f64) -> Self {
        let t = if u >= 1.0 {
            ell as f64 * phi_unchecked(u)
        } else {
            0.0
        };
        Threshold { ell, u, t }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Fill {
    /// Missing cardinalities are calibrated on demand.
    Calibrated,
    /// Every cardinality shares one mean threshold.
    Constant(f64),
    /// Only the stored cardinalities exist.
    Fixed,
}

/// Thresholds `u_ℓ`, `t_ℓ` for one grid size and false-alarm target.
///
/// Calibrated tables fill in new cardinalities lazily and memoise them, so
/// 2-D detectors only pay for the areas they actually query. Reads are
/// concurrent; inserts take a short write lock.
#[derive(Debug)]
pub struct ThresholdTable {
    pfa: Option<f64>,
    n_total: usize,
    fill: Fill,
    entries: RwLock<BTreeMap<usize, Threshold>>,
}

impl Clone for ThresholdTable {
    fn clone(&self) -> Self {
        ThresholdTable {
            pfa: self.pfa,
            n_total: self.n_total,
            fill: self.fill,
            entries: RwLock::new(self.read().clone()),
        }
    }
}

/// JSON layout `{pfa, n_total, entries: [{ell, u, t}]}`.
#[derive(Serialize, Deserialize)]
struct TableFile {
    pfa: Option<f64>,
    n_total: usize,
    entries: Vec<Threshold>,
}

fn check_pfa(pfa: f64) -> Result<()> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::domain("pfa must be in (0,1)"));
    }
    Ok(())
}

/// `u_ℓ = F⁻¹(2 P_FA / N²; 2ℓ) / 2ℓ`, clamped below at 1.
fn calibrated_u(pfa: f64, n_total: usize, ell: usize) -> Result<f64> {
    let n = n_total as f64;
    let q = 2.0 * pfa / (n * n);
    let q = q.min(1.0);
    let s = inv_ccdf(q, ChiSqParams::for_cardinality(ell)?)?;
    Ok((s / (2.0 * ell as f64)).max(1.0))
}

impl ThresholdTable {
    /// Calibrates `u_ℓ` for every `ℓ` in `sizes` at false-alarm target `pfa`
    /// on a grid of `n_total` bins.
    pub fn calibrate(pfa: f64, n_total: usize, sizes: impl IntoIterator<Item = usize>) -> Result<Self> {
        check_pfa(pfa)?;
        if n_total == 0 {
            return Err(Error::domain("n_total must be at least 1"));
        }
        let table = ThresholdTable {
            pfa: Some(pfa),
            n_total,
            fill: Fill::Calibrated,
            entries: RwLock::new(BTreeMap::new()),
        };
        for ell in sizes {
            table.entry(ell)?;
        }
        Ok(table)
    }

    /// A test table with the same mean threshold `u` for every cardinality.
    pub fn constant(n_total: usize, u: f64) -> Self {
        ThresholdTable {
            pfa: None,
            n_total,
            fill: Fill::Constant(u),
            entries: RwLock::new(BTreeMap::new()),
        }
    }

    /// A table holding exactly the given `(ℓ, u_ℓ)` pairs.
    pub fn from_u(n_total: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (ell, u) in pairs {
            if ell == 0 || ell > n_total {
                return Err(Error::domain(format!("cardinality {ell} outside [1, {n_total}]")));
            }
            if u.is_nan() || u < 0.0 {
                return Err(Error::domain(format!("threshold must be nonnegative, got {u}")));
            }
            map.insert(ell, Threshold::from_u(ell, u));
        }
        Ok(ThresholdTable {
            pfa: None,
            n_total,
            fill: Fill::Fixed,
            entries: RwLock::new(map),
        })
    }

    /// Dyadic cardinalities `1, 2, 4, ..., ≤ max`.
    pub fn dyadic_sizes(max: usize) -> impl Iterator<Item = usize> {
        std::iter::successors(Some(1usize), |&l| l.checked_mul(2)).take_while(move |&l| l <= max)
    }

    pub fn pfa_target(&self) -> Option<f64> {
        self.pfa
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, BTreeMap<usize, Threshold>> {
        self.entries.read().unwrap_or_else(|e| e.into_inner())
    }

    /// Thresholds for cardinality `ell`, calibrating and storing it if needed.
    pub fn entry(&self, ell: usize) -> Result<Threshold> {
        if ell == 0 || ell > self.n_total {
            return Err(Error::domain(format!(
                "cardinality {ell} outside [1, {}]",
                self.n_total
            )));
        }
        if let Some(t) = self.read().get(&ell) {
            return Ok(*t);
        }
        let u = match self.fill {
            Fill::Calibrated => calibrated_u(self.pfa.expect("calibrated table has a pfa"), self.n_total, ell)?,
            Fill::Constant(u) => return Ok(Threshold::from_u(ell, u)),
            Fill::Fixed => return Err(Error::UnknownCardinality(ell)),
        };
        let t = Threshold::from_u(ell, u);
        self.entries
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(ell, t);
        Ok(t)
    }

    pub fn u(&self, ell: usize) -> Result<f64> {
        Ok(self.entry(ell)?.u)
    }

    pub fn t(&self, ell: usize) -> Result<f64> {
        Ok(self.entry(ell)?.t)
    }

    /// Dense lookup vector `v[ℓ] = u_ℓ` for the requested cardinalities;
    /// other slots hold `+inf` so they never qualify.
    pub fn dense_u(&self, ells: impl IntoIterator<Item = usize>) -> Result<Vec<f64>> {
        let mut v = vec![f64::INFINITY; self.n_total + 1];
        for ell in ells {
            v[ell] = self.u(ell)?;
        }
        Ok(v)
    }

    /// Stored rows in increasing `ℓ`.
    pub fn stored(&self) -> Vec<Threshold> {
        self.read().values().copied().collect()
    }

    /// A fixed table holding `u_ℓ · factor` for every stored row.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_u(
            self.n_total,
            self.stored().into_iter().map(|t| (t.ell, t.u * factor)),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TableFile {
            pfa: self.pfa,
            n_total: self.n_total,
            entries: self.stored(),
        };
        Ok(serde_json::to_string_pretty(&file)? + "\n")
    }

    /// Loads a table written by [`ThresholdTable::to_json`]. Tables that
    /// carry a `pfa` keep calibrating missing cardinalities on demand.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        let mut table = Self::from_u(file.n_total, file.entries.iter().map(|e| (e.ell, e.u)))?;
        if let Some(pfa) = file.pfa {
            check_pfa(pfa)?;
            table.pfa = Some(pfa);
            table.fill = Fill::Calibrated;
        }
        Ok(table)
    }
}

/// Union bound on the false-alarm probability of a table:
/// `(N²/2) max_ℓ F(2ℓ u_ℓ; 2ℓ)` over the stored rows.
pub fn pfa_bound(table: &ThresholdTable) -> Result<f64> {
    let rows = table.stored();
    if rows.is_empty() {
        return Err(Error::domain("threshold table is empty"));
    }
    let mut worst: f64 = 0.0;
    for row in rows {
        let tail = ccdf(2.0 * row.ell as f64 * row.u, ChiSqParams::for_cardinality(row.ell)?)?;
        worst = worst.max(tail);
    }
    let n = table.n_total() as f64;
    Ok(n * n / 2.0 * worst)
}

/// Bound on the missed-detection probability for a true region of `ell`
/// bins at SNR `gamma`: `1 − F(2ℓ u_ℓ / (1+γ); 2ℓ)`.
pub fn pmd_bound(table: &ThresholdTable, ell: usize, gamma: Snr) -> Result<f64> {
    let u = table.u(ell)?;
    let s = 2.0 * ell as f64 * u / (1.0 + gamma.linear());
    Ok(1.0 - ccdf(s, ChiSqParams::for_cardinality(ell)?)?)
}

/// Threshold for the oracle detector that is told the candidate region:
/// a single hypothesis, so no union factor.
pub fn calibrate_oracle(pfa0: f64, ell0: usize) -> Result<f64> {
    check_pfa(pfa0)?;
    if ell0 == 0 {
        return Err(Error::domain("oracle region must be nonempty"));
    }
    let s = inv_ccdf(pfa0, ChiSqParams::for_cardinality(ell0)?)?;
    Ok(s / (2.0 * ell0 as f64))
}
