use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::linalg::{c64, ComplexMatrix};

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut Xoshiro256PlusPlus, d: usize) -> ComplexMatrix {
    let data = (0..d * d)
        .map(|_| c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(d, data).unwrap()
}

pub fn random_hermitian(r: &mut Xoshiro256PlusPlus, d: usize) -> ComplexMatrix {
    let m = random_matrix(r, d);
    (&m + &m.adjoint()).scale(c64(0.5, 0.0))
}

pub fn random_vector(r: &mut Xoshiro256PlusPlus, d: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d)
        .map(|_| c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    let n = crate::linalg::norm_sqr(&v).sqrt();
    v.into_iter().map(|z| z / n).collect()
}
