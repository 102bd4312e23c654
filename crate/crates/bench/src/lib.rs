//! Fixtures shared by the benchmarks.

use fairdiv_core::{generate, Allocation, Instance};

/// Random piecewise instance for `n` agents.
pub fn instance(n: usize, seed: u64) -> Instance {
    generate::random_instance(n, &mut generate::rng(seed))
}

/// Random instance and random complete allocation for the checkers.
pub fn instance_and_allocation(n: usize, seed: u64) -> (Instance, Allocation) {
    let mut rng = generate::rng(seed);
    let instance = generate::random_instance(n, &mut rng);
    let allocation = generate::random_complete_allocation(n, &mut rng);
    (instance, allocation)
}
