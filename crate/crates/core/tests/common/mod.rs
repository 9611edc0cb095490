#![allow(dead_code)]

use rand::Rng;
use riccati_geom_core::sample::{structured_instance, uniform_matrix};
use riccati_geom_core::Matrix;

#[allow(unused_imports)]
pub use riccati_geom_core::sample::{random_orthogonal, Instance};

pub fn instance(seed: u64) -> Option<Instance> {
    structured_instance(seed)
}

/// Symmetric matrix with entries in [-1, 1).
pub fn random_symmetric<R: Rng>(g: &mut R, n: usize) -> Matrix {
    uniform_matrix(g, n, n).symmetric_part()
}
