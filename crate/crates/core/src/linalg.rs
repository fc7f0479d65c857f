//! Dense complex linear algebra for small dimensions.
//!
//! Everything here is O(d³) or better and targets d = 2^n with n ≤ 10.
//! Vectors are plain `&[Complex64]` slices; matrices are [`ComplexMatrix`].

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when a Hermitian precondition is checked on entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-14;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            data.extend(row);
        }
        Self::new(dim, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| c64(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let v: Vec<_> = entries.iter().map(|&x| c64(x, 0.0)).collect();
        Self::diag(&v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        self.rows().map(<[Complex64]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`. Panics on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry `|M - M†|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// Max-entry `|U†U - I|`.
    pub fn unitary_residual(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_residual() <= tol
    }

    pub fn mat_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.dim, v.len())?;
        Ok(self
            .rows()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Hermitian part `(M + M†)/2`.
    pub(crate) fn hermitize(&self) -> Self {
        (self + &self.adjoint()).scale(c64(0.5, 0.0))
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        if is_hermitian(self, HERMITIAN_TOL) {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                residual: self.hermitian_residual(),
            })
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

// The operator impls panic on dimension mismatch; use `mul` for a checked product.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Serialized form: row-major nested arrays whose entries are `[re, im]`
/// pairs or bare real numbers.
#[derive(Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixRepr(pub Vec<Vec<ComplexRepr>>);

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexRepr> for Complex64 {
    fn from(r: ComplexRepr) -> Self {
        match r {
            ComplexRepr::Pair([re, im]) => c64(re, im),
            ComplexRepr::Real(re) => c64(re, 0.0),
        }
    }
}

impl From<Complex64> for ComplexRepr {
    fn from(z: Complex64) -> Self {
        ComplexRepr::Pair([z.re, z.im])
    }
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        Self::from_rows(
            repr.0
                .into_iter()
                .map(|row| row.into_iter().map(Complex64::from).collect())
                .collect(),
        )
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr(
            m.rows()
                .map(|row| row.iter().map(|&z| z.into()).collect())
                .collect(),
        )
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
/// Column `i` of `eigenvectors` pairs with `eigenvalues[i]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }

    /// `V f(Λ) V†` for a function of the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum();
            }
        }
        out
    }

    /// `Σ λ_i v_i v_i†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| c64(l, 0.0))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// True iff max-entry `|M - M†| ≤ tol · max(1, max-entry |M|)`.
pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.hermitian_residual() <= tol * m.max_abs().max(1.0)
}

pub fn mul(m: &ComplexMatrix, n: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dim(m.dim(), n.dim())?;
    Ok(m * n)
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// `u v†`.
pub fn outer(u: &[Complex64], v: &[Complex64]) -> Result<ComplexMatrix> {
    check_dim(u.len(), v.len())?;
    let n = u.len();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = u[i] * v[j].conj();
        }
    }
    Ok(out)
}

/// `u† v`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
    check_dim(u.len(), v.len())?;
    Ok(u.iter().zip(v).map(|(a, b)| a.conj() * b).sum())
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `u† M v`.
pub fn sandwich(u: &[Complex64], m: &ComplexMatrix, v: &[Complex64]) -> Result<Complex64> {
    check_dim(m.dim(), u.len())?;
    inner(u, &m.mat_vec(v)?)
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies a real Givens rotation. Sweeps stop once the
/// off-diagonal Frobenius norm falls below `1e-14 · dim · max(1, ‖M‖_F)`.
/// Within a degenerate eigenspace the returned basis is arbitrary.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    m.require_hermitian()?;
    let n = m.dim();
    let mut a = m.hermitize();
    let mut v = ComplexMatrix::identity(n);
    let threshold = JACOBI_OFF_TOL * n as f64 * a.frobenius_norm().max(1.0);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut off = off_norm(&a);
    while off > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[(row, col)] = v[(row, k)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi rotation zeroing `a[p][q]`: `A ← R† A R`, `V ← V R` with
/// `R = diag(1, e^{-iα}) · [[c, s], [-s, c]]` on the (p, q) plane.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let b = a[(p, q)];
    let b_abs = b.norm();
    if b_abs == 0.0 {
        return;
    }
    let phase = b / b_abs;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * b_abs);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.dim();

    let col_update = |m: &mut ComplexMatrix| {
        for k in 0..n {
            let mkp = m[(k, p)];
            let mkq = m[(k, q)];
            m[(k, p)] = mkp * c - mkq * phase.conj() * s;
            m[(k, q)] = mkp * s + mkq * phase.conj() * c;
        }
    };
    col_update(a);
    col_update(v);
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, p)] = c64(app - t * b_abs, 0.0);
    a[(q, q)] = c64(aqq + t * b_abs, 0.0);
    a[(p, q)] = Complex64::ZERO;
    a[(q, p)] = Complex64::ZERO;
}

/// `exp(scale · A)` for Hermitian `A`, via its eigendecomposition.
pub fn exp_hermitian_times(a: &ComplexMatrix, scale: Complex64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(a)?;
    Ok(eig.map_spectrum(|l| (scale * l).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_hermitian, rng};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::real_diag(&[1.0, -1.0])
    }

    fn rel_reconstruction_error(m: &ComplexMatrix) -> f64 {
        let eig = eig_hermitian(m).unwrap();
        (&eig.reconstruct() - m).frobenius_norm() / m.frobenius_norm().max(1e-300)
    }

    #[test]
    fn hermitian_checks() {
        assert!(is_hermitian(&pauli_z(), 1e-12));
        let anti = ComplexMatrix::from_rows(vec![
            vec![c64(0.0, 0.0), c64(0.0, 1.0)],
            vec![c64(0.0, 1.0), c64(0.0, 0.0)],
        ])
        .unwrap();
        assert!(!is_hermitian(&anti, 1e-12));

        let mut nudged = pauli_z();
        nudged[(0, 1)] = c64(1e-9, 0.0);
        assert!(!is_hermitian(&nudged, 1e-12));
        assert!(is_hermitian(&nudged, 1e-6));
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(matches!(
            ComplexMatrix::new(1, vec![c64(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 0 })
        ));
        assert!(matches!(
            ComplexMatrix::from_rows(vec![vec![Complex64::ONE], vec![]]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn eig_of_z_is_diagonal() {
        let eig = eig_hermitian(&pauli_z()).unwrap();
        assert_eq!(eig.eigenvalues, vec![-1.0, 1.0]);
        assert!((eig.vector(0)[1].norm() - 1.0).abs() < 1e-15);
        assert!((eig.vector(1)[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_of_x_matches_closed_form() {
        let eig = eig_hermitian(&pauli_x()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        let minus = [c64(FRAC_1_SQRT_2, 0.0), c64(-FRAC_1_SQRT_2, 0.0)];
        let plus = [c64(FRAC_1_SQRT_2, 0.0), c64(FRAC_1_SQRT_2, 0.0)];
        // compare up to global phase
        assert!((inner(&minus, &eig.vector(0)).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!((inner(&plus, &eig.vector(1)).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_random_reconstructs_and_is_orthonormal() {
        let mut r = rng(8);
        for d in [1, 2, 3, 5, 8, 16] {
            let m = random_hermitian(&mut r, d);
            assert!(rel_reconstruction_error(&m) <= 1e-10, "d = {d}");
            let eig = eig_hermitian(&m).unwrap();
            let v = &eig.eigenvectors;
            let gram = &v.adjoint() * v;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(d)) <= 1e-10);
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_handles_degenerate_spectrum() {
        let m = ComplexMatrix::identity(4).scale(c64(3.0, 0.0));
        let eig = eig_hermitian(&m).unwrap();
        assert_eq!(eig.eigenvalues, vec![3.0; 4]);

        // Projector with a two-fold degenerate zero eigenvalue.
        let psi = [c64(0.5, 0.0), c64(0.0, 0.5), c64(0.5, 0.5), c64(0.0, 0.0)];
        let p = outer(&psi, &psi).unwrap();
        assert!(rel_reconstruction_error(&p) <= 1e-10);
    }

    #[test]
    fn eig_zero_matrix() {
        let eig = eig_hermitian(&ComplexMatrix::zeros(3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn exp_examples() {
        let z = pauli_z();
        let e0 = exp_hermitian_times(&z, Complex64::ZERO).unwrap();
        assert!(e0.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        let ez = exp_hermitian_times(&z, c64(0.0, -PI / 2.0)).unwrap();
        let expected = ComplexMatrix::diag(&[c64(0.0, -1.0), c64(0.0, 1.0)]);
        assert!(ez.max_abs_diff(&expected) < 1e-15);

        let ex = exp_hermitian_times(&pauli_x(), c64(0.0, -PI)).unwrap();
        assert!(ex.max_abs_diff(&ComplexMatrix::identity(2).scale(c64(-1.0, 0.0))) < 1e-12);
    }

    #[test]
    fn exp_inverse_pairs_are_identity() {
        let mut r = rng(99);
        for k in 0..100 {
            let d = [2, 3, 4, 8][k % 4];
            let a = random_hermitian(&mut r, d);
            let theta = rand::RngExt::random_range(&mut r, 0.0..2.0 * PI);
            let u = exp_hermitian_times(&a, c64(0.0, -theta)).unwrap();
            let u_inv = exp_hermitian_times(&a, c64(0.0, theta)).unwrap();
            assert!((&u * &u_inv).max_abs_diff(&ComplexMatrix::identity(d)) <= 1e-10);
            assert!(u.unitary_residual() <= 1e-10);
        }
    }

    #[test]
    fn products_and_sandwich() {
        let zero = [Complex64::ONE, Complex64::ZERO];
        assert_eq!(sandwich(&zero, &pauli_z(), &zero).unwrap(), Complex64::ONE);
        assert_eq!(
            outer(&zero, &zero).unwrap(),
            ComplexMatrix::real_diag(&[1.0, 0.0])
        );

        let psi = [c64(FRAC_1_SQRT_2, 0.0), c64(FRAC_1_SQRT_2, 0.0)];
        let phi = [c64((PI / 6.0).cos(), 0.0), c64((PI / 6.0).sin(), 0.0)];
        let s = sandwich(&phi, &pauli_z(), &psi).unwrap();
        let expected = (3f64.sqrt() - 1.0) / (2.0 * 2f64.sqrt());
        assert!((s - c64(expected, 0.0)).norm() < 1e-15);
        assert!((expected - 0.258819).abs() < 1e-6);

        assert!(matches!(
            mul(&pauli_z(), &ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            sandwich(&zero, &ComplexMatrix::identity(3), &zero),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn serde_accepts_pairs_and_reals() {
        let m: ComplexMatrix = serde_json::from_str("[[1, [0, -1]], [[0, 1], -1.5]]").unwrap();
        assert_eq!(m[(0, 1)], c64(0.0, -1.0));
        assert_eq!(m[(1, 1)], c64(-1.5, 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_matrix(d: usize) -> impl Strategy<Value = ComplexMatrix> {
            prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), d * d).prop_map(move |v| {
                ComplexMatrix::new(d, v.into_iter().map(|(a, b)| c64(a, b)).collect()).unwrap()
            })
        }

        proptest! {
            #[test]
            fn adjoint_is_an_involution(m in (1usize..6).prop_flat_map(arb_matrix)) {
                prop_assert_eq!(m.adjoint().adjoint(), m);
            }

            #[test]
            fn sandwich_conjugate_symmetry(
                (m, u, v) in (1usize..6).prop_flat_map(|d| (
                    arb_matrix(d),
                    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d),
                    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d),
                ))
            ) {
                let u: Vec<_> = u.into_iter().map(|(a, b)| c64(a, b)).collect();
                let v: Vec<_> = v.into_iter().map(|(a, b)| c64(a, b)).collect();
                let lhs = sandwich(&u, &m, &v).unwrap();
                let rhs = sandwich(&v, &m.adjoint(), &u).unwrap().conj();
                prop_assert!((lhs - rhs).norm() <= 1e-12);
            }

            #[test]
            fn hermitian_part_decomposes(m in (1usize..6).prop_flat_map(arb_matrix)) {
                let h = m.hermitize();
                prop_assert!(is_hermitian(&h, 1e-14));
                let eig = eig_hermitian(&h).unwrap();
                let err = (&eig.reconstruct() - &h).frobenius_norm() / h.frobenius_norm().max(1.0);
                prop_assert!(err <= 1e-10);
            }
        }
    }
}
