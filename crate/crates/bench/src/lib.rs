//! Shared fixtures for the kernel benchmarks.

use std::f64::consts::PI;

use mbqclab::iqp::{random_instance, IqpCircuit, RandomInstanceSpec};

pub const ANGLE_SET: [f64; 5] = [PI / 8.0, PI / 4.0, PI / 3.0, PI / 2.0, 3.0 * PI / 5.0];

/// Seeded instance with the given width and gate count.
pub fn instance(nu: usize, gates: usize, independent: bool, seed: u64) -> IqpCircuit {
    random_instance(
        &RandomInstanceSpec {
            n: 1,
            nu,
            num_gates: gates,
            angles: ANGLE_SET.to_vec(),
            independent_z: independent,
        },
        seed,
    )
    .expect("benchmark instance")
}
