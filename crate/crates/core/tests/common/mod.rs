//! Helpers shared by the integration tests: an independent all-regions
//! enumerator and small grid generators.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specdet::{PowerGrid, Region, Shape, ThresholdTable};

/// What the brute-force search found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Brute {
    pub decided: bool,
    pub region: Region,
    pub score: f64,
}

fn kernel(mean: f64) -> f64 {
    let x = mean.max(1.0);
    x - 1.0 - x.ln()
}

/// Every region, summed bin by bin; the best qualifying score wins and the
/// first region in lexicographic order keeps a tie.
pub fn brute_force(grid: &PowerGrid, table: &ThresholdTable) -> Brute {
    let x = grid.values();
    let mut best = Brute {
        decided: false,
        region: Region::Empty,
        score: 0.0,
    };
    let mut offer = |ell: usize, sum: f64, region: Region| {
        let mean = sum / ell as f64;
        if mean.max(1.0) >= table.u(ell).unwrap() {
            let score = ell as f64 * kernel(mean);
            if !best.decided || score > best.score {
                best = Brute {
                    decided: true,
                    region,
                    score,
                };
            }
        }
    };
    match grid.shape() {
        Shape::Line(n) => {
            for a in 0..n {
                for b in a + 1..=n {
                    let sum: f64 = x[a..b].iter().sum();
                    offer(b - a, sum, Region::interval(a, b));
                }
            }
        }
        Shape::Plane(rows, cols) => {
            for a1 in 0..rows {
                for a2 in 0..cols {
                    for b1 in a1 + 1..=rows {
                        for b2 in a2 + 1..=cols {
                            let mut sum = 0.0;
                            for r in a1..b1 {
                                for c in a2..b2 {
                                    sum += x[r * cols + c];
                                }
                            }
                            offer((b1 - a1) * (b2 - a2), sum, Region::rect(a1, b1, a2, b2));
                        }
                    }
                }
            }
        }
    }
    best
}

pub fn exp_draw(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

/// Exponential noise with, half of the time, a random block scaled by a
/// random factor in `[1, 11)`.
pub fn random_grid(rng: &mut ChaCha8Rng, shape: Shape) -> PowerGrid {
    let mut values: Vec<f64> = (0..shape.len()).map(|_| exp_draw(rng)).collect();
    if rng.random_bool(0.5) {
        let mu = 1.0 + 10.0 * rng.random::<f64>();
        match shape {
            Shape::Line(n) => {
                let a = rng.random_range(0..n);
                let b = rng.random_range(a + 1..=n);
                values[a..b].iter_mut().for_each(|v| *v *= mu);
            }
            Shape::Plane(r, c) => {
                let a1 = rng.random_range(0..r);
                let b1 = rng.random_range(a1 + 1..=r);
                let a2 = rng.random_range(0..c);
                let b2 = rng.random_range(a2 + 1..=c);
                for i in a1..b1 {
                    values[i * c + a2..i * c + b2].iter_mut().for_each(|v| *v *= mu);
                }
            }
        }
    }
    PowerGrid::new(shape, values).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relative difference, with an absolute floor for values near zero.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
