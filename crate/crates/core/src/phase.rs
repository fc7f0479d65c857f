//! Phase of the weak value from two strong measurements.
//!
//! `C = A P_ψ` is not Hermitian, but `C = C_R + i C_I` with
//! `C_R = ½{A, P_ψ}` and `C_I = (1/2i)[A, P_ψ]` both Hermitian. Measuring
//! `x = ⟨φ|C_R|φ⟩` and `y = ⟨φ|C_I|φ⟩` gives `⟨φ|C|φ⟩ = x + iy`, and
//! `A_w = (x + iy) / |⟨φ|ψ⟩|²`, so `arg A_w = atan2(y, x)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, ComplexMatrix};
use crate::qstate::{num_qubits_for, projector_of, PureState};

pub const DEFAULT_EPSILON_MAG: f64 = 1e-12;
/// Coefficients with modulus at or below this are left out of a decomposition.
pub const PAULI_ZERO_TOL: f64 = 1e-14;
const REAL_RESIDUE_TOL: f64 = 1e-12;

/// `C = A P_ψ` with its Hermitian and anti-Hermitian parts.
#[derive(Debug, Clone, Serialize)]
pub struct HermitianSplit {
    pub original: ComplexMatrix,
    /// `(C + C†)/2`
    pub c_r: ComplexMatrix,
    /// `(C − C†)/(2i)`
    pub c_i: ComplexMatrix,
}

impl HermitianSplit {
    /// `c_r + i c_i`
    pub fn recombine(&self) -> ComplexMatrix {
        &self.c_r + &self.c_i.scale(Complex64::I)
    }

    /// `C†C = P_ψ A² P_ψ = ⟨ψ|A²|ψ⟩ P_ψ`. This is not `B` unless `|ψ⟩` is an
    /// eigenstate of `A`; see [`HermitianSplit::c_c_dagger`].
    pub fn c_dagger_c(&self) -> ComplexMatrix {
        &self.original.adjoint() * &self.original
    }

    /// `C C† = A P_ψ A = B`.
    pub fn c_c_dagger(&self) -> ComplexMatrix {
        &self.original * &self.original.adjoint()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseReport {
    /// `⟨φ|C_R|φ⟩`
    pub x: f64,
    /// `⟨φ|C_I|φ⟩`
    pub y: f64,
    /// `atan2(y, x)` in `(−π, π]`.
    pub phase: f64,
    /// `(x + iy) / |⟨φ|ψ⟩|²`
    pub weak_value_reconstructed: Complex64,
    pub overlap_sq: f64,
}

pub fn build_c(a: &ComplexMatrix, psi: &PureState) -> Result<HermitianSplit> {
    a.require_hermitian()?;
    let p = projector_of(psi);
    let original = linalg::mul(a, p.matrix())?;
    let adj = original.adjoint();
    let c_r = (&original + &adj).scale(c64(0.5, 0.0));
    // 1/(2i) = -i/2
    let c_i = (&original - &adj).scale(c64(0.0, -0.5));
    Ok(HermitianSplit { original, c_r, c_i })
}

/// Anticommutator and commutator forms `(½{A, P_ψ}, (1/2i)[A, P_ψ])`.
pub fn commutator_forms(a: &ComplexMatrix, psi: &PureState) -> Result<(ComplexMatrix, ComplexMatrix)> {
    a.require_hermitian()?;
    let p = projector_of(psi).into_matrix();
    let ap = linalg::mul(a, &p)?;
    let pa = &p * a;
    Ok((
        (&ap + &pa).scale(c64(0.5, 0.0)),
        (&ap - &pa).scale(c64(0.0, -0.5)),
    ))
}

fn real_expectation(phi: &PureState, m: &ComplexMatrix, what: &'static str) -> Result<f64> {
    let z = linalg::sandwich(phi.amplitudes(), m, phi.amplitudes())?;
    if z.im.abs() > REAL_RESIDUE_TOL * m.max_abs().max(1.0) {
        return Err(Error::IdentityViolation {
            what,
            residual: z.im.abs(),
        });
    }
    Ok(z.re)
}

/// Recovers `arg A_w` from the two Hermitian expectations.
pub fn recover_phase(
    a: &ComplexMatrix,
    psi: &PureState,
    phi: &PureState,
    epsilon_orth: f64,
    epsilon_mag: f64,
) -> Result<PhaseReport> {
    let split = build_c(a, psi)?;
    phase_from_split(&split, psi, phi, epsilon_orth, epsilon_mag)
}

/// Same as [`recover_phase`] for an already built split.
pub fn phase_from_split(
    split: &HermitianSplit,
    psi: &PureState,
    phi: &PureState,
    epsilon_orth: f64,
    epsilon_mag: f64,
) -> Result<PhaseReport> {
    let overlap_sq = linalg::inner(phi.amplitudes(), psi.amplitudes())?.norm_sqr();
    if overlap_sq <= epsilon_orth {
        return Err(Error::OrthogonalStates {
            overlap_sq,
            threshold: epsilon_orth,
        });
    }
    let x = real_expectation(phi, &split.c_r, "<phi|C_R|phi> is real")?;
    let y = real_expectation(phi, &split.c_i, "<phi|C_I|phi> is real")?;
    phase_from_expectations(x, y, overlap_sq, epsilon_mag)
}

/// Classical step: combine measured `x`, `y` and the overlap into the phase.
/// Shared by the exact and shot-based paths.
pub fn phase_from_expectations(x: f64, y: f64, overlap_sq: f64, epsilon_mag: f64) -> Result<PhaseReport> {
    let magnitude = x.hypot(y);
    if magnitude <= epsilon_mag {
        return Err(Error::PhaseUndefined {
            magnitude,
            threshold: epsilon_mag,
        });
    }
    // atan2 returns −π for (−0.0, x < 0); fold onto the half-open range.
    let mut phase = y.atan2(x);
    if phase <= -std::f64::consts::PI {
        phase = std::f64::consts::PI;
    }
    Ok(PhaseReport {
        x,
        y,
        phase,
        weak_value_reconstructed: c64(x, y) / overlap_sq,
        overlap_sq,
    })
}

/// Tensor product of single-qubit Paulis. Text form puts qubit 0 rightmost,
/// so `"ZI"` is Z on qubit 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString(String);

impl PauliString {
    pub fn new(s: &str) -> Result<Self> {
        if s.is_empty() || !s.chars().all(|c| matches!(c, 'I' | 'X' | 'Y' | 'Z')) {
            return Err(Error::BadPauliString(s.to_string()));
        }
        Ok(Self(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    /// Bit masks `(x, z)` over qubits; Y sets both.
    fn masks(&self) -> (usize, usize) {
        let mut x = 0;
        let mut z = 0;
        for (pos, ch) in self.0.chars().enumerate() {
            let bit = 1usize << (self.0.len() - 1 - pos);
            match ch {
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit
                }
                'Z' => z |= bit,
                _ => {}
            }
        }
        (x, z)
    }

    fn y_count(&self) -> u32 {
        self.0.chars().filter(|&c| c == 'Y').count() as u32
    }

    /// Nonzero entry in column `col`: `P|col⟩ = phase · |col ⊕ x⟩`.
    fn column_entry(&self, col: usize, xz: (usize, usize), ny: u32) -> (usize, Complex64) {
        let (x, z) = xz;
        // Y = iXZ, so each Y contributes i and the Z part a sign on the input bit.
        let sign = if (col & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let phase = Complex64::I.powu(ny) * sign;
        (col ^ x, phase)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let dim = 1usize << self.num_qubits();
        let xz = self.masks();
        let ny = self.y_count();
        let mut m = ComplexMatrix::zeros(dim);
        for col in 0..dim {
            let (row, phase) = self.column_entry(col, xz, ny);
            m[(row, col)] = phase;
        }
        m
    }

    /// All `4^n` strings in lexicographic order over `{I, X, Y, Z}`.
    pub fn all(num_qubits: usize) -> impl Iterator<Item = PauliString> {
        const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];
        (0..4usize.pow(num_qubits as u32)).map(move |mut k| {
            let mut chars = vec!['I'; num_qubits];
            for slot in chars.iter_mut().rev() {
                *slot = LETTERS[k % 4];
                k /= 4;
            }
            PauliString(chars.into_iter().collect())
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl TryFrom<String> for PauliString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::new(&s)
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> Self {
        p.0
    }
}

pub type PauliMap = BTreeMap<PauliString, Complex64>;

/// `c_P = Tr(P† M) / 2^n` over all Pauli strings, dropping `|c_P| ≤ 1e-14`.
pub fn pauli_decompose(m: &ComplexMatrix) -> Result<PauliMap> {
    let n = num_qubits_for(m.dim())?;
    let dim = m.dim();
    let mut out = BTreeMap::new();
    for p in PauliString::all(n) {
        let xz = p.masks();
        let ny = p.y_count();
        // Tr(P† M) = Σ_col conj(P[row, col]) M[row, col]
        let trace: Complex64 = (0..dim)
            .map(|col| {
                let (row, phase) = p.column_entry(col, xz, ny);
                phase.conj() * m[(row, col)]
            })
            .sum();
        let coeff = trace / dim as f64;
        if coeff.norm() > PAULI_ZERO_TOL {
            out.insert(p, coeff);
        }
    }
    Ok(out)
}

/// `Σ c_P P`. All strings must have the same length.
pub fn pauli_compose(map: &PauliMap) -> Result<ComplexMatrix> {
    let n = map
        .keys()
        .next()
        .map(PauliString::num_qubits)
        .ok_or_else(|| Error::BadPauliString(String::new()))?;
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim);
    for (p, &c) in map {
        if p.num_qubits() != n {
            return Err(Error::BadPauliString(p.to_string()));
        }
        let xz = p.masks();
        let ny = p.y_count();
        for col in 0..dim {
            let (row, phase) = p.column_entry(col, xz, ny);
            m[(row, col)] += c * phase;
        }
    }
    Ok(m)
}
