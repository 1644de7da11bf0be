//! Seeded generators of random operators and fields for integration tests.
#![allow(dead_code)]

use denslift::jet::DiffPolynomial;
use denslift::operator::{mi_from_axes, DensityOperator, VectorField};
use denslift::Scalar;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_jet(rng: &mut ChaCha8Rng, d: usize, names: &[&str]) -> DiffPolynomial {
    let name = names[rng.random_range(0..names.len())];
    let upper: Vec<u8> = (0..rng.random_range(0..=1)).map(|_| rng.random_range(1..=d as u8)).collect();
    let deriv: Vec<u8> = (0..rng.random_range(0..=2)).map(|_| rng.random_range(1..=d as u8)).collect();
    DiffPolynomial::sym(name, &upper).derive_seq(&deriv)
}

/// Small integer times a product of up to two jets or coordinates.
pub fn random_function(rng: &mut ChaCha8Rng, d: usize, names: &[&str]) -> DiffPolynomial {
    let mut c = rng.random_range(-3i64..=3);
    if c == 0 {
        c = 1;
    }
    let mut p = DiffPolynomial::int(c);
    for _ in 0..rng.random_range(0..=2) {
        let factor = if rng.random_bool(0.2) {
            DiffPolynomial::coord(rng.random_range(1..=d as u8))
        } else {
            random_jet(rng, d, names)
        };
        p = p.mul(&factor);
    }
    if rng.random_bool(0.15) {
        p = p.scale(&Scalar::param("l0"));
    }
    p
}

/// Random operator of total order ≤ `max_order`; `weighted` allows powers of L.
pub fn random_operator(rng: &mut ChaCha8Rng, d: usize, max_order: usize, weighted: bool) -> DensityOperator {
    let mut op = DensityOperator::zero(d);
    for _ in 0..rng.random_range(1..=5) {
        let total = rng.random_range(0..=max_order);
        let r = if weighted { rng.random_range(0..=total) } else { 0 };
        let axes: Vec<u8> = (0..total - r).map(|_| rng.random_range(1..=d as u8)).collect();
        op.add_term(r as u32, mi_from_axes(d, &axes), random_function(rng, d, &["a", "b", "c"]));
    }
    if op.is_zero() {
        op = DensityOperator::partial(d, 1);
    }
    op
}

/// Vector field whose components are random functions of the jets of `X`.
pub fn random_field(rng: &mut ChaCha8Rng, d: usize) -> VectorField {
    (0..d).map(|_| random_function(rng, d, &["X"])).collect()
}

/// Generic operator Σ N^I ∂_I with one symmetric tensor per order ≤ n.
pub fn generic(d: usize, n: usize) -> DensityOperator {
    let names = ["R", "T", "S", "U", "V"];
    denslift::lift::generic_operator(d, &names[..=n])
}
