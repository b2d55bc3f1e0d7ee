//! Shared fixtures for the criterion benchmarks.

use rwl_core::random::{random_field, random_vector};
use rwl_core::symmetry::enforce_symmetry_class;
use rwl_core::{SlabGrid, WaveState};
use std::sync::Arc;

pub fn slab(n: usize, nz: usize) -> Arc<SlabGrid> {
    Arc::new(SlabGrid::new(2.0 * std::f64::consts::PI, n, n, nz).expect("valid grid"))
}

pub fn random_wave_state(grid: &Arc<SlabGrid>, seed: u64) -> WaveState {
    let (s, v) = enforce_symmetry_class(&random_field(grid, seed), &random_vector(grid, seed + 1, 3))
        .expect("3-component velocity");
    WaveState::new(s, v).expect("same grid")
}
