//! Reference arithmetic for integration tests. Works on plain nested vectors so
//! the checks do not route through the library's own matrix code.

#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use weakval::{Complex64, ComplexMatrix, PureState};

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn random_dense(r: &mut Xoshiro256PlusPlus, d: usize) -> Dense {
    (0..d)
        .map(|_| (0..d).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect())
        .collect()
}

pub fn random_hermitian_dense(r: &mut Xoshiro256PlusPlus, d: usize) -> Dense {
    let m = random_dense(r, d);
    (0..d)
        .map(|i| (0..d).map(|j| (m[i][j] + m[j][i].conj()) * 0.5).collect())
        .collect()
}

pub fn random_hermitian(r: &mut Xoshiro256PlusPlus, d: usize) -> ComplexMatrix {
    to_matrix(&random_hermitian_dense(r, d))
}

pub fn random_amplitudes(r: &mut Xoshiro256PlusPlus, d: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d)
        .map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn random_state(r: &mut Xoshiro256PlusPlus, d: usize) -> PureState {
    PureState::new(random_amplitudes(r, d)).unwrap()
}

pub fn to_matrix(m: &Dense) -> ComplexMatrix {
    ComplexMatrix::from_rows(m.clone()).unwrap()
}

pub fn to_dense(m: &ComplexMatrix) -> Dense {
    m.to_rows()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn dagger(a: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

pub fn apply(a: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// `u†v`
pub fn braket(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
}

/// `|u⟩⟨v|`
pub fn ketbra(u: &[Complex64], v: &[Complex64]) -> Dense {
    u.iter().map(|x| v.iter().map(|y| x * y.conj()).collect()).collect()
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn pauli(ch: char) -> Dense {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match ch {
        'I' => vec![vec![l, o], vec![o, l]],
        'X' => vec![vec![o, l], vec![l, o]],
        'Y' => vec![vec![o, -i], vec![i, o]],
        'Z' => vec![vec![l, o], vec![o, -l]],
        _ => panic!("bad Pauli label {ch}"),
    }
}

/// Kronecker product in text order, so the leftmost label is the most
/// significant qubit.
pub fn pauli_string(label: &str) -> Dense {
    label.chars().fold(vec![vec![c(1.0, 0.0)]], |acc, ch| kron(&acc, &pauli(ch)))
}

pub fn trace(a: &Dense) -> Complex64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}
