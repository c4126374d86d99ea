//! Two-phase binary search.
//!
//! Phase one averages the grid over every dyadic interval
//! `I_{m,i} = [i 2^m, (i+1) 2^m)` (dyadic squares on a plane) and declares a
//! detection if any of them clears the threshold for its size. Phase two
//! starts from the whole grid and, for `M = log2 N` stages of halving step
//! `2^{M-t-1}`, tries moving each boundary one step in either direction,
//! keeping a move only when it strictly raises `J`.
//!
//! Both phases together cost `O(N)`.

use crate::error::{Error, Result};
use crate::flops::Tally;
use crate::glrt::{phi_unchecked, score, snr_mle, Detection};
use crate::grid::{PowerGrid, Region, Shape};
use crate::thresholds::ThresholdTable;

use super::check_table;

/// Mean power over every dyadic interval (1-D) or dyadic square (2-D).
///
/// Level `m` holds `Z_{m,i}`, the means over blocks of side `2^m`; level 0
/// is the grid itself. On a plane a level is stored row-major.
#[derive(Clone, Debug)]
pub struct DyadicPyramid {
    shape: Shape,
    order: u32,
    levels: Vec<Vec<f64>>,
}

fn log2_exact(n: usize) -> Option<u32> {
    n.is_power_of_two().then(|| n.trailing_zeros())
}

pub(crate) fn build_pyramid<T: Tally>(grid: &PowerGrid, tally: &mut T) -> Result<DyadicPyramid> {
    let shape = grid.shape();
    let order = match shape {
        Shape::Line(n) => log2_exact(n),
        Shape::Plane(r, c) if r == c => log2_exact(r),
        Shape::Plane(..) => None,
    }
    .ok_or_else(|| Error::NotPowerOfTwo(shape.to_string()))?;

    let mut levels = Vec::with_capacity(order as usize + 1);
    levels.push(grid.values().to_vec());
    for m in 1..=order as usize {
        let prev = &levels[m - 1];
        let next: Vec<f64> = match shape {
            Shape::Line(_) => {
                tally.tick(2 * (prev.len() / 2) as u64);
                prev.chunks_exact(2).map(|p| (p[0] + p[1]) / 2.0).collect()
            }
            Shape::Plane(side, _) => {
                let w = side >> (m - 1);
                let h = w / 2;
                tally.tick(4 * (h * h) as u64);
                (0..h * h)
                    .map(|k| {
                        let (r, c) = (2 * (k / h), 2 * (k % h));
                        let s = (prev[r * w + c] + prev[r * w + c + 1])
                            + (prev[(r + 1) * w + c] + prev[(r + 1) * w + c + 1]);
                        s / 4.0
                    })
                    .collect()
            }
        };
        levels.push(next);
    }
    Ok(DyadicPyramid {
        shape,
        order,
        levels,
    })
}

impl DyadicPyramid {
    /// Fails unless the grid is `2^M` long, or `2^M x 2^M`.
    pub fn new(grid: &PowerGrid) -> Result<Self> {
        build_pyramid(grid, &mut ())
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// `M = log2` of the side length.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn level(&self, m: usize) -> &[f64] {
        &self.levels[m]
    }

    /// Number of bins in one block at level `m`.
    pub fn block_size(&self, m: usize) -> usize {
        match self.shape {
            Shape::Line(_) => 1 << m,
            Shape::Plane(..) => 1 << (2 * m),
        }
    }

    /// The grid region averaged by `Z_{m,i}`.
    pub fn region(&self, m: usize, i: usize) -> Region {
        let side = 1usize << m;
        match self.shape {
            Shape::Line(_) => Region::interval(i * side, (i + 1) * side),
            Shape::Plane(n, _) => {
                let per_row = n >> m;
                let (r, c) = (i / per_row, i % per_row);
                Region::rect(r * side, (r + 1) * side, c * side, (c + 1) * side)
            }
        }
    }
}

/// Which dyadic block represents a level in phase one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LevelRule {
    /// The block with the largest mean.
    #[default]
    MaxPerLevel,
    /// The last block whose mean clears the threshold, as a sequential scan
    /// would leave it.
    LastExceeding,
}

/// Result of the dyadic threshold scan.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicHit {
    pub decided: bool,
    /// Level `m̂` and block index `î` with the best score among levels
    /// whose representative cleared the threshold.
    pub level: usize,
    pub index: usize,
    /// `J*_m = |I| φ(Z*_m)` for levels that cleared their threshold.
    pub level_scores: Vec<Option<f64>>,
}

pub(crate) fn search_counted<T: Tally>(
    pyramid: &DyadicPyramid,
    table: &ThresholdTable,
    rule: LevelRule,
    tally: &mut T,
) -> Result<DyadicHit> {
    if table.n_total() != pyramid.shape.len() {
        return Err(Error::TableMismatch {
            table: table.n_total(),
            grid: pyramid.shape.len(),
        });
    }
    let mut hit = DyadicHit {
        decided: false,
        level: 0,
        index: 0,
        level_scores: vec![None; pyramid.levels.len()],
    };
    let mut best = f64::NEG_INFINITY;
    for (m, z) in pyramid.levels.iter().enumerate() {
        let ell = pyramid.block_size(m);
        let u = table.u(ell)?;
        tally.tick(z.len() as u64);
        let pick = match rule {
            LevelRule::MaxPerLevel => {
                let mut arg = 0;
                for (i, &v) in z.iter().enumerate().skip(1) {
                    if v > z[arg] {
                        arg = i;
                    }
                }
                Some(arg)
            }
            LevelRule::LastExceeding => z.iter().rposition(|&v| v.max(1.0) >= u),
        };
        let Some(i) = pick else { continue };
        let zc = z[i].max(1.0);
        tally.tick(2);
        if zc >= u {
            let j = ell as f64 * phi_unchecked(zc);
            tally.tick(5);
            hit.level_scores[m] = Some(j);
            if !hit.decided || j > best {
                best = j;
                hit.decided = true;
                hit.level = m;
                hit.index = i;
            }
        }
    }
    Ok(hit)
}

/// Phase one with the default [`LevelRule::MaxPerLevel`].
pub fn dyadic_search(pyramid: &DyadicPyramid, table: &ThresholdTable) -> Result<DyadicHit> {
    search_counted(pyramid, table, LevelRule::MaxPerLevel, &mut ())
}

/// How phase two obtains the mean of a candidate region.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RefineUpdate {
    /// Each candidate's mean comes straight from the grid's prefix sums.
    #[default]
    Recompute,
    /// Running `(length, mean)` updated by adding or removing one dyadic
    /// block from the pyramid. 1-D only.
    Incremental,
}

/// Region and running best score after one refinement stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineStage {
    pub region: Region,
    pub score: f64,
}

/// Boundary moves tried at every stage, in order.
const MOVES: [isize; 2] = [-1, 1];

fn shift(x: usize, delta: isize, step: usize) -> Option<usize> {
    if delta < 0 {
        x.checked_sub(step)
    } else {
        Some(x + step)
    }
}

/// 1-D refinement, scoring candidates from prefix sums.
fn refine_line<T: Tally>(
    grid: &PowerGrid,
    order: u32,
    mut trace: Option<&mut Vec<RefineStage>>,
    tally: &mut T,
) -> (Region, f64) {
    let n = grid.len();
    let j_of = |a: usize, b: usize, tally: &mut T| {
        tally.tick(8); // sum, divide, clamp, phi, scale, compare
        score(b - a, grid.interval_sum(a, b) / (b - a) as f64)
    };
    let (mut a, mut b) = (0usize, n);
    let mut j_max = j_of(a, b, tally);
    if let Some(t) = trace.as_deref_mut() {
        t.push(RefineStage { region: Region::interval(a, b), score: j_max });
    }
    for t in 0..order {
        let step = 1usize << (order - t - 1);
        let a0 = a;
        for delta in MOVES {
            let Some(cand) = shift(a0, delta, step) else { continue };
            if cand >= b {
                continue;
            }
            let j = j_of(cand, b, tally);
            if j > j_max {
                j_max = j;
                a = cand;
            }
        }
        let b0 = b;
        for delta in MOVES {
            let Some(cand) = shift(b0, delta, step) else { continue };
            if cand > n || cand <= a {
                continue;
            }
            let j = j_of(a, cand, tally);
            if j > j_max {
                j_max = j;
                b = cand;
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(RefineStage { region: Region::interval(a, b), score: j_max });
        }
    }
    (Region::interval(a, b), j_max)
}

/// 1-D refinement carrying the running sum `L·Z` and adding or removing
/// one dyadic block per candidate.
fn refine_line_incremental(
    pyramid: &DyadicPyramid,
    mut trace: Option<&mut Vec<RefineStage>>,
) -> (Region, f64) {
    let order = pyramid.order;
    let n = 1usize << order;
    let (mut a, mut b) = (0usize, n);
    let mut sum = n as f64 * pyramid.levels[order as usize][0];
    let mut j_max = score(n, sum / n as f64);
    if let Some(t) = trace.as_deref_mut() {
        t.push(RefineStage { region: Region::interval(a, b), score: j_max });
    }
    for t in 0..order {
        let m = (order - t - 1) as usize;
        let step = 1usize << m;
        let z = &pyramid.levels[m];
        let block = |i: usize| step as f64 * z[i];

        let (a0, sum0) = (a, sum);
        for delta in MOVES {
            let (cand, s) = if delta < 0 {
                let Some(c) = a0.checked_sub(step) else { continue };
                (c, sum0 + block(c / step))
            } else {
                (a0 + step, sum0 - block(a0 / step))
            };
            if cand >= b {
                continue;
            }
            let j = score(b - cand, s / (b - cand) as f64);
            if j > j_max {
                j_max = j;
                a = cand;
                sum = s;
            }
        }
        let (b0, sum0) = (b, sum);
        for delta in MOVES {
            let (cand, s) = if delta < 0 {
                (b0 - step, sum0 - block(b0 / step - 1))
            } else {
                if b0 + step > n {
                    continue;
                }
                (b0 + step, sum0 + block(b0 / step))
            };
            if cand <= a {
                continue;
            }
            let j = score(cand - a, s / (cand - a) as f64);
            if j > j_max {
                j_max = j;
                b = cand;
                sum = s;
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(RefineStage { region: Region::interval(a, b), score: j_max });
        }
    }
    (Region::interval(a, b), j_max)
}

/// 2-D refinement of a box; edges are visited left, right, top, bottom
/// (column start, column end, row start, row end) within each stage.
fn refine_plane<T: Tally>(
    grid: &PowerGrid,
    order: u32,
    mut trace: Option<&mut Vec<RefineStage>>,
    tally: &mut T,
) -> (Region, f64) {
    let side = 1usize << order;
    let j_of = |e: [usize; 4], tally: &mut T| {
        let [r0, r1, c0, c1] = e;
        let ell = (r1 - r0) * (c1 - c0);
        tally.tick(10); // 3 for the box sum, then as in 1-D
        score(ell, grid.rect_sum(r0, r1, c0, c1) / ell as f64)
    };
    let region = |e: [usize; 4]| Region::rect(e[0], e[1], e[2], e[3]);
    // indices into [r0, r1, c0, c1]; each edge paired with its opposite
    const EDGES: [(usize, usize, bool); 4] = [(2, 3, true), (3, 2, false), (0, 1, true), (1, 0, false)];

    let mut e = [0, side, 0, side];
    let mut j_max = j_of(e, tally);
    if let Some(t) = trace.as_deref_mut() {
        t.push(RefineStage { region: region(e), score: j_max });
    }
    for t in 0..order {
        let step = 1usize << (order - t - 1);
        for (k, opposite, is_start) in EDGES {
            let x0 = e[k];
            let mut chosen = x0;
            for delta in MOVES {
                let Some(cand) = shift(x0, delta, step) else { continue };
                let valid = if is_start {
                    cand < e[opposite]
                } else {
                    cand <= side && cand > e[opposite]
                };
                if !valid {
                    continue;
                }
                let mut trial = e;
                trial[k] = cand;
                let j = j_of(trial, tally);
                if j > j_max {
                    j_max = j;
                    chosen = cand;
                }
            }
            e[k] = chosen;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(RefineStage { region: region(e), score: j_max });
        }
    }
    (region(e), j_max)
}

pub(crate) fn refine_counted<T: Tally>(
    pyramid: &DyadicPyramid,
    grid: &PowerGrid,
    tally: &mut T,
) -> Result<(Region, f64)> {
    check_pair(pyramid, grid)?;
    Ok(match pyramid.shape {
        Shape::Line(_) => refine_line(grid, pyramid.order, None, tally),
        Shape::Plane(..) => refine_plane(grid, pyramid.order, None, tally),
    })
}

fn check_pair(pyramid: &DyadicPyramid, grid: &PowerGrid) -> Result<()> {
    if pyramid.shape != grid.shape() {
        return Err(Error::domain(format!(
            "pyramid of shape {} does not belong to a grid of shape {}",
            pyramid.shape,
            grid.shape()
        )));
    }
    Ok(())
}

/// Configuration of the two-phase binary search detector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BinarySearch {
    pub level_rule: LevelRule,
    pub update: RefineUpdate,
}

impl BinarySearch {
    pub fn search(&self, pyramid: &DyadicPyramid, table: &ThresholdTable) -> Result<DyadicHit> {
        search_counted(pyramid, table, self.level_rule, &mut ())
    }

    /// Phase two after a detection.
    pub fn refine(&self, pyramid: &DyadicPyramid, grid: &PowerGrid, hit: &DyadicHit) -> Result<Region> {
        if !hit.decided {
            return Err(Error::domain(
                "binary refinement requires a prior dyadic detection",
            ));
        }
        self.refine_unconditioned(pyramid, grid)
    }

    /// Phase two regardless of what phase one decided.
    pub fn refine_unconditioned(&self, pyramid: &DyadicPyramid, grid: &PowerGrid) -> Result<Region> {
        Ok(self.run(pyramid, grid, None)?.0)
    }

    /// Phase two, also returning the region and best score after each stage
    /// (the first entry is the starting region, the whole grid).
    pub fn refine_trace(&self, pyramid: &DyadicPyramid, grid: &PowerGrid) -> Result<Vec<RefineStage>> {
        let mut trace = Vec::with_capacity(pyramid.order as usize + 1);
        self.run(pyramid, grid, Some(&mut trace))?;
        Ok(trace)
    }

    fn run(
        &self,
        pyramid: &DyadicPyramid,
        grid: &PowerGrid,
        trace: Option<&mut Vec<RefineStage>>,
    ) -> Result<(Region, f64)> {
        check_pair(pyramid, grid)?;
        Ok(match (pyramid.shape, self.update) {
            (Shape::Line(_), RefineUpdate::Recompute) => refine_line(grid, pyramid.order, trace, &mut ()),
            (Shape::Line(_), RefineUpdate::Incremental) => refine_line_incremental(pyramid, trace),
            (Shape::Plane(..), RefineUpdate::Recompute) => refine_plane(grid, pyramid.order, trace, &mut ()),
            (Shape::Plane(..), RefineUpdate::Incremental) => {
                return Err(Error::domain("incremental refinement is only defined for 1-D grids"))
            }
        })
    }

    /// Full detector: dyadic scan, then refinement if anything cleared its
    /// threshold. The reported score and SNR belong to the refined region.
    pub fn detect(&self, grid: &PowerGrid, table: &ThresholdTable) -> Result<Detection> {
        check_table(grid, table)?;
        let pyramid = DyadicPyramid::new(grid)?;
        let hit = self.search(&pyramid, table)?;
        if !hit.decided {
            return Ok(Detection::none());
        }
        let region = self.refine(&pyramid, grid, &hit)?;
        let mean = grid.mean_unchecked(&region);
        Ok(Detection {
            decided: true,
            region,
            snr_hat: snr_mle(mean),
            score: score(region.cardinality(), mean),
        })
    }
}

/// Phase two with the default configuration; errors unless `hit` detected.
pub fn binary_refine(pyramid: &DyadicPyramid, grid: &PowerGrid, hit: &DyadicHit) -> Result<Region> {
    BinarySearch::default().refine(pyramid, grid, hit)
}

/// The two-phase binary search detector with the default configuration.
pub fn binary_detect(grid: &PowerGrid, table: &ThresholdTable) -> Result<Detection> {
    BinarySearch::default().detect(grid, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glrt::likelihood;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp_grid(rng: &mut ChaCha8Rng, n: usize) -> PowerGrid {
        PowerGrid::line((0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect()).unwrap()
    }

    #[test]
    fn pyramid_levels_are_dyadic_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 64, 1024] {
            let g = exp_grid(&mut rng, n);
            let p = DyadicPyramid::new(&g).unwrap();
            assert_eq!(p.order(), n.trailing_zeros());
            for m in 0..=p.order() as usize {
                for (i, &z) in p.level(m).iter().enumerate() {
                    let want = g.region_mean(&p.region(m, i)).unwrap();
                    assert!((z - want).abs() <= 1e-9 * want, "n={n} m={m} i={i}");
                }
            }
        }
        let values: Vec<f64> = (0..64).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let g = PowerGrid::new(Shape::Plane(8, 8), values).unwrap();
        let p = DyadicPyramid::new(&g).unwrap();
        for m in 0..=3 {
            for (i, &z) in p.level(m).iter().enumerate() {
                let want = g.region_mean(&p.region(m, i)).unwrap();
                assert!((z - want).abs() <= 1e-9 * want);
            }
        }
    }

    #[test]
    fn rejects_non_dyadic_shapes() {
        for shape in [Shape::Line(3), Shape::Line(12), Shape::Plane(4, 8), Shape::Plane(6, 6)] {
            let g = PowerGrid::new(shape, vec![1.0; shape.len()]).unwrap();
            assert!(matches!(DyadicPyramid::new(&g), Err(Error::NotPowerOfTwo(_))));
        }
    }

    #[test]
    fn search_trace_on_a_small_block() {
        let g = PowerGrid::line(vec![0.1, 0.1, 8.0, 8.0]).unwrap();
        let p = DyadicPyramid::new(&g).unwrap();
        let hit = dyadic_search(&p, &ThresholdTable::constant(4, 2.0)).unwrap();
        assert!(hit.decided);
        assert_eq!((hit.level, hit.index), (1, 1));
        assert_eq!(p.region(1, 1), Region::interval(2, 4));
        let j1 = hit.level_scores[1].unwrap();
        assert!((j1 - 2.0 * (7.0 - 8f64.ln())).abs() < 1e-12);
        assert!((j1 - 9.84112).abs() < 1e-5);
        // levels 0 (bin 2) and 2 (mean 4.05) also clear u = 2
        assert!(hit.level_scores[0].is_some() && hit.level_scores[2].is_some());
    }

    #[test]
    fn flat_grid_never_detects() {
        let g = PowerGrid::line(vec![1.0; 64]).unwrap();
        let p = DyadicPyramid::new(&g).unwrap();
        let table = ThresholdTable::calibrate(1e-2, 64, []).unwrap();
        assert!(!dyadic_search(&p, &table).unwrap().decided);
        assert_eq!(binary_detect(&g, &table).unwrap(), Detection::none());
    }

    #[test]
    fn refine_hand_trace() {
        let g = PowerGrid::line(vec![0.1, 0.1, 8.0, 8.0]).unwrap();
        let p = DyadicPyramid::new(&g).unwrap();
        let trace = BinarySearch::default().refine_trace(&p, &g).unwrap();
        assert_eq!(trace.len(), 3);
        assert_eq!(trace[0].region, Region::interval(0, 4));
        assert!((trace[0].score - 6.60513).abs() < 1e-5);
        assert_eq!(trace[1].region, Region::interval(2, 4));
        assert!((trace[1].score - 9.84112).abs() < 1e-5);
        assert_eq!(trace[2].region, Region::interval(2, 4));
    }

    #[test]
    fn detect_composes_both_phases() {
        let g = PowerGrid::line(vec![0.1, 0.1, 8.0, 8.0]).unwrap();
        let d = binary_detect(&g, &ThresholdTable::constant(4, 2.0)).unwrap();
        assert!(d.decided);
        assert_eq!(d.region, Region::interval(2, 4));
        assert_eq!(d.snr_hat.linear(), 7.0);
        assert!((d.score - 9.84112).abs() < 1e-5);
    }

    #[test]
    fn refine_requires_a_detection() {
        let g = PowerGrid::line(vec![1.0; 4]).unwrap();
        let p = DyadicPyramid::new(&g).unwrap();
        let hit = dyadic_search(&p, &ThresholdTable::constant(4, 2.0)).unwrap();
        assert!(!hit.decided);
        assert!(binary_refine(&p, &g, &hit).is_err());
    }

    #[test]
    fn noiseless_aligned_blocks_are_recovered() {
        for n in [16usize, 64] {
            let q = n / 4;
            for a in (0..n).step_by(q) {
                for b in (a + q..=n).step_by(q) {
                    for gamma in [1.0, 10.0] {
                        let values = (0..n).map(|i| if (a..b).contains(&i) { 1.0 + gamma } else { 1.0 }).collect();
                        let g = PowerGrid::line(values).unwrap();
                        let p = DyadicPyramid::new(&g).unwrap();
                        let r = BinarySearch::default().refine_unconditioned(&p, &g).unwrap();
                        assert_eq!(r, Region::interval(a, b), "n={n} gamma={gamma}");
                    }
                }
            }
        }
    }

    #[test]
    fn incremental_update_follows_the_same_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inc = BinarySearch {
            update: RefineUpdate::Incremental,
            ..Default::default()
        };
        for case in 0..1000 {
            let mut values: Vec<f64> = (0..64).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            if case % 2 == 0 {
                let len = rng.random_range(1..=32);
                let start = rng.random_range(0..=64 - len);
                let mu = 1.0 + rng.random_range(0.0..10.0);
                for v in &mut values[start..start + len] {
                    *v *= mu;
                }
            }
            let g = PowerGrid::line(values).unwrap();
            let p = DyadicPyramid::new(&g).unwrap();
            let reference = BinarySearch::default().refine_trace(&p, &g).unwrap();
            let incremental = inc.refine_trace(&p, &g).unwrap();
            let a: Vec<Region> = reference.iter().map(|s| s.region).collect();
            let b: Vec<Region> = incremental.iter().map(|s| s.region).collect();
            assert_eq!(a, b, "case {case}");
        }
    }

    #[test]
    fn refinement_score_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let g = exp_grid(&mut rng, 128);
            let p = DyadicPyramid::new(&g).unwrap();
            let trace = BinarySearch::default().refine_trace(&p, &g).unwrap();
            for w in trace.windows(2) {
                assert!(w[1].score >= w[0].score);
            }
            let last = trace.last().unwrap();
            assert_eq!(likelihood(&g, &last.region).unwrap(), last.score);
        }
    }

    #[test]
    fn plane_refinement_recovers_aligned_box() {
        let n = 16;
        let values = (0..n * n)
            .map(|k| {
                let (r, c) = (k / n, k % n);
                if (4..12).contains(&r) && (8..12).contains(&c) { 11.0 } else { 1.0 }
            })
            .collect();
        let g = PowerGrid::new(Shape::Plane(n, n), values).unwrap();
        let table = ThresholdTable::calibrate(1e-3, n * n, []).unwrap();
        let d = binary_detect(&g, &table).unwrap();
        assert!(d.decided);
        assert_eq!(d.region, Region::rect(4, 12, 8, 12));
        let p = DyadicPyramid::new(&g).unwrap();
        let inc = BinarySearch { update: RefineUpdate::Incremental, ..Default::default() };
        assert!(inc.refine_unconditioned(&p, &g).is_err());
    }

    #[test]
    fn level_rules_agree_on_the_decision() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let table = ThresholdTable::calibrate(1e-2, 256, []).unwrap();
        let last = BinarySearch { level_rule: LevelRule::LastExceeding, ..Default::default() };
        for _ in 0..300 {
            let mut values: Vec<f64> = (0..256).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let start = rng.random_range(0..=192);
            for v in &mut values[start..start + 64] {
                *v *= 1.8;
            }
            let g = PowerGrid::line(values).unwrap();
            let p = DyadicPyramid::new(&g).unwrap();
            let a = BinarySearch::default().search(&p, &table).unwrap();
            let b = last.search(&p, &table).unwrap();
            assert_eq!(a.decided, b.decided);
            // the maximum never scores below the last exceeding block
            for (x, y) in a.level_scores.iter().zip(&b.level_scores) {
                assert_eq!(x.is_some(), y.is_some());
                if let (Some(x), Some(y)) = (x, y) {
                    assert!(x >= y);
                }
            }
            assert_eq!(BinarySearch::default().detect(&g, &table).unwrap(), last.detect(&g, &table).unwrap());
        }
    }
}
