//! Power measurement grids, candidate regions and O(1) region sums.
//!
//! Prefix sums are stored as unevaluated pairs `hi + lo` (a compensated
//! running sum), so a region sum obtained by differencing two large
//! prefixes keeps close to full double precision even on grids with
//! millions of bins.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid geometry: a line of `N` bins or an `N1 x N2` plane (row-major).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Line(usize),
    Plane(usize, usize),
}

impl Shape {
    pub fn dims(&self) -> usize {
        match self {
            Shape::Line(_) => 1,
            Shape::Plane(..) => 2,
        }
    }

    /// Total number of bins `N = N1 * N2 * ...`.
    pub fn len(&self) -> usize {
        match *self {
            Shape::Line(n) => n,
            Shape::Plane(r, c) => r * c,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Extent along the first axis (the only axis for a line).
    pub fn side(&self) -> usize {
        match *self {
            Shape::Line(n) => n,
            Shape::Plane(r, _) => r,
        }
    }

    pub fn full_region(&self) -> Region {
        match *self {
            Shape::Line(n) => Region::interval(0, n),
            Shape::Plane(r, c) => Region::rect(0, r, 0, c),
        }
    }

    pub fn contains(&self, region: &Region) -> bool {
        match (*self, region) {
            (_, Region::Empty) => true,
            (Shape::Line(n), Region::Interval(s)) => s.end <= n,
            (Shape::Plane(r, c), Region::Rect { rows, cols }) => rows.end <= r && cols.end <= c,
            _ => false,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Line(n) => write!(f, "{n}"),
            Shape::Plane(r, c) => write!(f, "{r}x{c}"),
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    /// Parses `"1024"` or `"128x128"`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| Error::domain(format!("invalid shape '{s}'")))
        };
        match s.split_once(['x', 'X']) {
            Some((r, c)) => Ok(Shape::Plane(parse(r)?, parse(c)?)),
            None => Ok(Shape::Line(parse(s)?)),
        }
    }
}

/// Half-open index range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "span start {start} exceeds end {end}");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlap(&self, other: &Span) -> usize {
        self.end.min(other.end).saturating_sub(self.start.max(other.start))
    }
}

/// A candidate signal set: an interval on a line or an axis-aligned box
/// on a plane. `Empty` is the "no signal" placeholder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Empty,
    Interval(Span),
    Rect { rows: Span, cols: Span },
}

impl Region {
    pub fn interval(a: usize, b: usize) -> Self {
        Region::Interval(Span::new(a, b))
    }

    /// Box `[a1, b1) x [a2, b2)`, first axis = rows.
    pub fn rect(a1: usize, b1: usize, a2: usize, b2: usize) -> Self {
        Region::Rect {
            rows: Span::new(a1, b1),
            cols: Span::new(a2, b2),
        }
    }

    /// Number of bins `|S|`.
    pub fn cardinality(&self) -> usize {
        match self {
            Region::Empty => 0,
            Region::Interval(s) => s.len(),
            Region::Rect { rows, cols } => rows.len() * cols.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    /// Number of bins shared with `other`; zero across dimensionalities.
    pub fn intersection(&self, other: &Region) -> usize {
        match (self, other) {
            (Region::Interval(a), Region::Interval(b)) => a.overlap(b),
            (Region::Rect { rows: r1, cols: c1 }, Region::Rect { rows: r2, cols: c2 }) => {
                r1.overlap(r2) * c1.overlap(c2)
            }
            _ => 0,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Empty => write!(f, "{{}}"),
            Region::Interval(s) => write!(f, "[{},{})", s.start, s.end),
            Region::Rect { rows, cols } => write!(
                f,
                "[{},{})x[{},{})",
                rows.start, rows.end, cols.start, cols.end
            ),
        }
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Double-double accumulator `hi + lo`.
#[derive(Clone, Copy, Debug, Default)]
struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    #[inline]
    fn add(self, other: Compensated) -> Compensated {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, e);
        Compensated { hi, lo }
    }

    #[inline]
    fn sub(self, other: Compensated) -> Compensated {
        self.add(Compensated {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    fn add_f64(self, x: f64) -> Compensated {
        let (s, e) = two_sum(self.hi, x);
        Compensated {
            hi: s,
            lo: self.lo + e,
        }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Nonnegative, noise-normalised power measurements with a prefix-sum table.
///
/// Immutable after construction, so one grid can be shared by any number of
/// concurrent detector invocations.
#[derive(Clone, Debug)]
pub struct PowerGrid {
    shape: Shape,
    values: Vec<f64>,
    // Line: N + 1 entries. Plane: (N1 + 1) * (N2 + 1) entries, row-major.
    prefix: Vec<Compensated>,
}

impl PowerGrid {
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::domain("grid must have at least one bin"));
        }
        if values.len() != shape.len() {
            return Err(Error::domain(format!(
                "shape {shape} needs {} values, got {}",
                shape.len(),
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::domain(format!(
                "power at bin {i} must be finite and nonnegative, got {v}"
            )));
        }
        let prefix = match shape {
            Shape::Line(_) => {
                let mut prefix = Vec::with_capacity(values.len() + 1);
                let mut acc = Compensated::default();
                prefix.push(acc);
                for &x in &values {
                    acc = acc.add_f64(x);
                    prefix.push(acc);
                }
                prefix
            }
            Shape::Plane(rows, cols) => {
                let w = cols + 1;
                let mut prefix = vec![Compensated::default(); (rows + 1) * w];
                for r in 0..rows {
                    let mut row_acc = Compensated::default();
                    for c in 0..cols {
                        row_acc = row_acc.add_f64(values[r * cols + c]);
                        prefix[(r + 1) * w + c + 1] = prefix[r * w + c + 1].add(row_acc);
                    }
                }
                prefix
            }
        };
        Ok(PowerGrid {
            shape,
            values,
            prefix,
        })
    }

    pub fn line(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(Shape::Line(n), values)
    }

    /// Builds a plane from equally long rows.
    pub fn plane(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::domain("rows of a 2-D grid must have equal length"));
        }
        Self::new(Shape::Plane(r, c), rows.into_iter().flatten().collect())
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check(&self, region: &Region) -> Result<()> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if !self.shape.contains(region) {
            return Err(Error::OutOfBounds {
                region: region.to_string(),
                shape: self.shape.to_string(),
            });
        }
        Ok(())
    }

    /// Sum of the powers in a nonempty in-bounds region.
    pub fn region_sum(&self, region: &Region) -> Result<f64> {
        self.check(region)?;
        Ok(match region {
            Region::Interval(s) => self.interval_sum(s.start, s.end),
            Region::Rect { rows, cols } => self.rect_sum(rows.start, rows.end, cols.start, cols.end),
            Region::Empty => unreachable!(),
        })
    }

    /// Mean power `X̄_S` over a nonempty in-bounds region.
    pub fn region_mean(&self, region: &Region) -> Result<f64> {
        Ok(self.region_sum(region)? / region.cardinality() as f64)
    }

    /// Unchecked 1-D sum over `[a, b)`.
    #[inline]
    pub(crate) fn interval_sum(&self, a: usize, b: usize) -> f64 {
        self.prefix[b].sub(self.prefix[a]).value()
    }

    /// Unchecked 2-D sum over `[a1, b1) x [a2, b2)`.
    #[inline]
    pub(crate) fn rect_sum(&self, a1: usize, b1: usize, a2: usize, b2: usize) -> f64 {
        let w = match self.shape {
            Shape::Plane(_, c) => c + 1,
            Shape::Line(_) => unreachable!("rect_sum on a 1-D grid"),
        };
        let p = &self.prefix;
        p[b1 * w + b2]
            .sub(p[a1 * w + b2])
            .sub(p[b1 * w + a2])
            .add(p[a1 * w + a2])
            .value()
    }

    /// Unchecked mean over any nonempty region of matching dimensionality.
    #[inline]
    pub(crate) fn mean_unchecked(&self, region: &Region) -> f64 {
        match region {
            Region::Interval(s) => self.interval_sum(s.start, s.end) / s.len() as f64,
            Region::Rect { rows, cols } => {
                self.rect_sum(rows.start, rows.end, cols.start, cols.end)
                    / (rows.len() * cols.len()) as f64
            }
            Region::Empty => 0.0,
        }
    }

    /// Returns a copy with every power divided by `scale`.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        Self::new(self.shape, self.values.iter().map(|v| v / scale).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_sum(grid: &PowerGrid, region: &Region) -> f64 {
        match (grid.shape(), region) {
            (Shape::Line(_), Region::Interval(s)) => grid.values()[s.start..s.end].iter().sum(),
            (Shape::Plane(_, c), Region::Rect { rows, cols }) => (rows.start..rows.end)
                .flat_map(|r| (cols.start..cols.end).map(move |k| r * c + k))
                .map(|i| grid.values()[i])
                .sum(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn mean_of_constant_and_block() {
        let g = PowerGrid::line(vec![1.0; 4]).unwrap();
        assert_eq!(g.region_mean(&Region::interval(0, 4)).unwrap(), 1.0);
        let g = PowerGrid::line(vec![0.1, 5.0, 5.0, 0.1]).unwrap();
        assert_eq!(g.region_mean(&Region::interval(1, 3)).unwrap(), 5.0);
    }

    #[test]
    fn prefix_matches_direct_sum_1d() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..64).map(|_| -rng.random::<f64>().ln()).collect();
        let g = PowerGrid::line(values).unwrap();
        for _ in 0..200 {
            let a = rng.random_range(0..64);
            let b = rng.random_range(a + 1..=64);
            let r = Region::interval(a, b);
            let want = direct_sum(&g, &r) / (b - a) as f64;
            let got = g.region_mean(&r).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs(), "{r}: {got} vs {want}");
        }
    }

    #[test]
    fn prefix_matches_direct_sum_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (rows, cols) = (13, 17);
        let values: Vec<f64> = (0..rows * cols).map(|_| -rng.random::<f64>().ln()).collect();
        let g = PowerGrid::new(Shape::Plane(rows, cols), values).unwrap();
        for _ in 0..200 {
            let a1 = rng.random_range(0..rows);
            let b1 = rng.random_range(a1 + 1..=rows);
            let a2 = rng.random_range(0..cols);
            let b2 = rng.random_range(a2 + 1..=cols);
            let r = Region::rect(a1, b1, a2, b2);
            let want = direct_sum(&g, &r);
            let got = g.region_sum(&r).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs(), "{r}: {got} vs {want}");
        }
    }

    #[test]
    fn single_bin_stays_exact_on_a_long_grid() {
        // One tiny bin after 2^20 unit bins: plain f64 prefixes lose it.
        let mut values = vec![1.0; 1 << 20];
        values.push(1e-7);
        let g = PowerGrid::line(values).unwrap();
        let n = g.len();
        let got = g.region_sum(&Region::interval(n - 1, n)).unwrap();
        assert!((got - 1e-7).abs() <= 1e-9 * 1e-7);
    }

    #[test]
    fn rejects_bad_regions_and_values() {
        let g = PowerGrid::line(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            g.region_mean(&Region::interval(1, 1)),
            Err(Error::EmptyRegion)
        ));
        assert!(matches!(
            g.region_mean(&Region::interval(0, 3)),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(g.region_mean(&Region::rect(0, 1, 0, 1)).is_err());
        assert!(PowerGrid::line(vec![1.0, -0.5]).is_err());
        assert!(PowerGrid::line(vec![f64::NAN]).is_err());
        assert!(PowerGrid::plane(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("1024".parse::<Shape>().unwrap(), Shape::Line(1024));
        assert_eq!("128x64".parse::<Shape>().unwrap(), Shape::Plane(128, 64));
        assert!("0".parse::<Shape>().is_err());
        assert!("12xa".parse::<Shape>().is_err());
        assert_eq!(Shape::Plane(128, 128).len(), 16384);
    }
}
