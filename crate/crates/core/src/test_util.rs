//! Shared helpers for unit tests: seeded RNG, generalized Paulis, random
//! matrices/states, and random small Lindbladians.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lindblad::{Lindbladian, LindbladTerm};
use crate::qstate::{dagger, hermitize, C64, CMat, CVec, LatticeGeometry};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pauli_x(d: usize) -> CMat {
    // Generalized shift: X |j> = |j+1 mod d>.
    Array2::from_shape_fn((d, d), |(r, c)| {
        if r == (c + 1) % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn pauli_z(d: usize) -> CMat {
    // Generalized clock: Z |j> = w^j |j>.
    let w = 2.0 * std::f64::consts::PI / d as f64;
    Array2::from_shape_fn((d, d), |(r, c)| {
        if r == c {
            C64::from_polar(1.0, w * r as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn random_matrix<R: Rng>(d: usize, rng: &mut R) -> CMat {
    Array2::from_shape_fn((d, d), |_| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> CMat {
    hermitize(&random_matrix(d, rng))
}

pub fn random_ket<R: Rng>(d: usize, rng: &mut R) -> CVec {
    let v = Array1::from_shape_fn(d, |_| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    crate::qstate::normalize(&v)
}

pub fn random_density<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let a = random_matrix(d, rng);
    let p = a.dot(&dagger(&a));
    let tr = crate::qstate::trace(&p);
    p.mapv(|z| z / tr)
}

/// Random local Lindbladian on the given geometry: one term per site plus a
/// two-site term when possible, each with a Hermitian part and 1-2 jumps.
pub fn random_lindbladian<R: Rng>(geom: &LatticeGeometry, rng: &mut R) -> Lindbladian {
    let mut terms = vec![];
    for site in 0..geom.n_sites() {
        let d = geom.local_dim(site);
        let njump = 1 + rng.gen_range(0..2);
        let jumps = (0..njump).map(|_| random_matrix(d, rng)).collect();
        terms.push(LindbladTerm::new(
            vec![site],
            Some(random_hermitian(d, rng)),
            jumps,
        ));
    }
    if geom.n_sites() >= 2 {
        let d01 = geom.local_dim(0) * geom.local_dim(1);
        terms.push(LindbladTerm::new(
            vec![0, 1],
            Some(random_hermitian(d01, rng)),
            vec![random_matrix(d01, rng)],
        ));
    }
    Lindbladian::new(geom.clone(), terms).unwrap()
}
