//! Seeded random instances and allocations for tests, benchmarks and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{Allocation, Piece};
use crate::hierarchy::ValueMatrix;
use crate::measure::{Instance, Interval, Valuation};
use crate::rational::{int, rat, Rational};

/// Grid the random breakpoints are drawn from.
pub const GRID: i64 = 120;
pub const MAX_SEGMENTS: usize = 8;
const MAX_DENSITY_WEIGHT: i64 = 9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random valuation with at most [`MAX_SEGMENTS`] constant pieces whose
/// breakpoints lie on multiples of `1 / GRID`. Some segments may be worth 0.
pub fn random_piecewise<R: Rng>(rng: &mut R) -> Valuation {
    let segments = rng.gen_range(1..=MAX_SEGMENTS);
    let inner: Vec<i64> = (1..GRID).collect();
    let mut cuts: Vec<i64> = inner.choose_multiple(rng, segments - 1).copied().collect();
    cuts.sort_unstable();
    let mut breakpoints = Vec::with_capacity(segments + 1);
    breakpoints.push(int(0));
    breakpoints.extend(cuts.iter().map(|&c| rat(c, GRID)));
    breakpoints.push(int(1));
    let mut weights: Vec<i64> = (0..segments)
        .map(|_| rng.gen_range(0..=MAX_DENSITY_WEIGHT))
        .collect();
    if weights.iter().all(|&w| w == 0) {
        let k = rng.gen_range(0..segments);
        weights[k] = 1;
    }
    Valuation::from_weights(breakpoints, weights.into_iter().map(int).collect())
        .expect("random weights are non-negative with a positive entry")
}

pub fn random_instance<R: Rng>(n: usize, rng: &mut R) -> Instance {
    Instance::new((0..n.max(1)).map(|_| random_piecewise(rng)).collect()).expect("non-empty")
}

/// A random complete allocation: the cake is cut into `n..=3n` intervals at
/// grid points and each interval goes to a random agent.
pub fn random_complete_allocation<R: Rng>(n: usize, rng: &mut R) -> Allocation {
    let cells = rng.gen_range(n..=3 * n);
    let inner: Vec<i64> = (1..GRID).collect();
    let mut cuts: Vec<i64> = inner.choose_multiple(rng, cells - 1).copied().collect();
    cuts.sort_unstable();
    let mut points = vec![0];
    points.extend(cuts);
    points.push(GRID);
    let mut owned: Vec<Vec<Interval>> = vec![Vec::new(); n];
    for w in points.windows(2) {
        let interval =
            Interval::new(rat(w[0], GRID), rat(w[1], GRID)).expect("grid points are ordered");
        owned[rng.gen_range(0..n)].push(interval);
    }
    Allocation::new(owned.into_iter().map(Piece::from_intervals).collect())
}

/// A random row-stochastic matrix with entries on a `1/60` grid; some
/// entries are zero.
pub fn random_value_matrix<R: Rng>(n: usize, rng: &mut R) -> ValueMatrix {
    let rows = (0..n)
        .map(|_| {
            let mut weights: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=6)).collect();
            if weights.iter().all(|&w| w == 0) {
                weights[rng.gen_range(0..n)] = 1;
            }
            let total: i64 = weights.iter().sum();
            weights
                .into_iter()
                .map(|w| rat(w, total))
                .collect::<Vec<Rational>>()
        })
        .collect();
    ValueMatrix::new(rows).expect("rows are normalized")
}
