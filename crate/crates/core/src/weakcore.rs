//! Weak values, the forward/reverse product, and the state-conditioned
//! effective operators `B = A P_ψ A` and `B_ρ = A ρ A`.
//!
//! The product of the forward weak value `⟨φ|A|ψ⟩/⟨φ|ψ⟩` and the reverse one
//! `⟨ψ|A|φ⟩/⟨ψ|φ⟩` is `|A_w|²`, and equals the ratio of two strong
//! expectations `⟨φ|B|φ⟩ / ⟨φ|P_ψ|φ⟩`. Its square root is the modulus of
//! the weak value.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, eig_hermitian, ComplexMatrix};
use crate::qstate::{projector_of, DensityMatrixState, PureState};

/// Default guard on `|⟨φ|ψ⟩|²` below which the weak value is refused.
pub const DEFAULT_EPSILON_ORTH: f64 = 1e-12;
/// Default concentration tolerance for the eigenstate classification.
pub const DEFAULT_EIG_TOL: f64 = 1e-10;
/// Tolerance on the internal identities checked by this module.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one eigenspace.
pub const EIGENVALUE_MERGE_TOL: f64 = 1e-9;

/// Everything the bidirectional weak value produces, from one set of
/// matrix elements.
#[derive(Debug, Clone, Serialize)]
pub struct WeakValueReport {
    /// `⟨φ|A|ψ⟩ / ⟨φ|ψ⟩`
    pub forward: Complex64,
    /// `⟨ψ|A|φ⟩ / ⟨ψ|φ⟩`
    pub reverse: Complex64,
    /// `forward · reverse`, real and non-negative up to rounding.
    pub product: Complex64,
    pub modulus: f64,
    pub overlap_sq: f64,
    pub numerator_sq: f64,
    /// `(forward + reverse) / 2`, equal to `Re(forward)`.
    pub re_from_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    /// `⟨φ|B|φ⟩`
    pub lhs: f64,
    /// `|⟨φ|A|ψ⟩|²`
    pub rhs: f64,
    /// `⟨φ|B|φ⟩ / ⟨φ|P_ψ|φ⟩`
    pub ratio: f64,
    /// `C_ψφ` from [`weak_value_product`].
    pub product: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum StructureCase {
    Eigenstate { a: f64 },
    Superposition,
}

/// Structure of `B` in the eigenbasis `{|a_i⟩}` of `A`, with `ψ = Σ c_i |a_i⟩`.
#[derive(Debug, Clone, Serialize)]
pub struct BStructure {
    #[serde(flatten)]
    pub case: StructureCase,
    pub eigenvalues: Vec<f64>,
    /// `c_i = ⟨a_i|ψ⟩`
    pub amplitudes: Vec<Complex64>,
    /// `K_ij = c_i c_j* a_i a_j`
    pub coefficients: ComplexMatrix,
    /// Diagonal of `K`.
    pub populations: Vec<f64>,
    /// Off-diagonal entries `(i, j, K_ij)`, `i ≠ j`.
    pub coherences: Vec<(usize, usize, Complex64)>,
    /// Weight `|c_i|²` per eigenvector.
    pub weights: Vec<f64>,
    /// Max-entry `|B − a² P_ψ|` in the eigenstate case.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenstate_residual: Option<f64>,
    #[serde(skip)]
    eigenvectors: ComplexMatrix,
}

impl BStructure {
    /// `Σ_ij K_ij |a_i⟩⟨a_j|` back in the computational basis.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        &(v * &self.coefficients) * &v.adjoint()
    }
}

fn check_dims(a: &ComplexMatrix, states: &[&PureState]) -> Result<()> {
    for s in states {
        if s.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: s.dim(),
            });
        }
    }
    Ok(())
}

/// `⟨φ|A|ψ⟩` and `⟨φ|ψ⟩`, with the orthogonality guard applied.
fn transition_elements(
    a: &ComplexMatrix,
    psi: &PureState,
    phi: &PureState,
    epsilon_orth: f64,
) -> Result<(Complex64, Complex64)> {
    a.require_hermitian()?;
    check_dims(a, &[psi, phi])?;
    let overlap = linalg::inner(phi.amplitudes(), psi.amplitudes())?;
    let overlap_sq = overlap.norm_sqr();
    if overlap_sq <= epsilon_orth {
        return Err(Error::OrthogonalStates {
            overlap_sq,
            threshold: epsilon_orth,
        });
    }
    let numerator = linalg::sandwich(phi.amplitudes(), a, psi.amplitudes())?;
    Ok((numerator, overlap))
}

/// `A_w = ⟨φ|A|ψ⟩ / ⟨φ|ψ⟩`.
pub fn weak_value(
    a: &ComplexMatrix,
    psi: &PureState,
    phi: &PureState,
    epsilon_orth: f64,
) -> Result<Complex64> {
    let (numerator, overlap) = transition_elements(a, psi, phi, epsilon_orth)?;
    Ok(numerator / overlap)
}

pub fn weak_value_product(
    a: &ComplexMatrix,
    psi: &PureState,
    phi: &PureState,
    epsilon_orth: f64,
) -> Result<WeakValueReport> {
    let (numerator, overlap) = transition_elements(a, psi, phi, epsilon_orth)?;
    let forward = numerator / overlap;
    let reverse_numerator = linalg::sandwich(psi.amplitudes(), a, phi.amplitudes())?;
    let reverse = reverse_numerator / overlap.conj();
    let product = forward * reverse;
    let overlap_sq = overlap.norm_sqr();
    let numerator_sq = numerator.norm_sqr();

    let mean = (forward + reverse) / 2.0;
    let mean_residual = (mean - c64(forward.re, 0.0)).norm();
    if mean_residual > 1e-12 * forward.norm().max(1.0) {
        return Err(Error::IdentityViolation {
            what: "(forward + reverse)/2 = Re(forward)",
            residual: mean_residual,
        });
    }

    Ok(WeakValueReport {
        forward,
        reverse,
        product,
        modulus: product.re.max(0.0).sqrt(),
        overlap_sq,
        numerator_sq,
        re_from_mean: mean.re,
    })
}

/// `B = A P_ψ A`, built as the outer product of `A|ψ⟩` with itself.
pub fn effective_operator(a: &ComplexMatrix, psi: &PureState) -> Result<ComplexMatrix> {
    a.require_hermitian()?;
    check_dims(a, &[psi])?;
    let a_psi = a.mat_vec(psi.amplitudes())?;
    linalg::outer(&a_psi, &a_psi)
}

/// `B_ρ = A ρ A`.
pub fn effective_operator_mixed(a: &ComplexMatrix, rho: &DensityMatrixState) -> Result<ComplexMatrix> {
    a.require_hermitian()?;
    let a_rho = linalg::mul(a, rho.matrix())?;
    Ok((&a_rho * a).hermitize())
}

/// Checks `⟨φ|B|φ⟩ = |⟨φ|A|ψ⟩|²` and `⟨φ|B|φ⟩/⟨φ|P_ψ|φ⟩ = C_ψφ`, with
/// each side computed along its own path.
pub fn expectation_identity_check(
    a: &ComplexMatrix,
    psi: &PureState,
    phi: &PureState,
    epsilon_orth: f64,
) -> Result<IdentityCheck> {
    let report = weak_value_product(a, psi, phi, epsilon_orth)?;
    let b = effective_operator(a, psi)?;
    let p_psi = projector_of(psi);
    let lhs = linalg::sandwich(phi.amplitudes(), &b, phi.amplitudes())?.re;
    let denominator = linalg::sandwich(phi.amplitudes(), p_psi.matrix(), phi.amplitudes())?.re;
    let rhs = report.numerator_sq;
    let ratio = lhs / denominator;
    let product = report.product.re;

    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    if (lhs - rhs).abs() > IDENTITY_TOL * scale {
        return Err(Error::IdentityViolation {
            what: "<phi|B|phi> = |<phi|A|psi>|^2",
            residual: (lhs - rhs).abs(),
        });
    }
    let scale = ratio.abs().max(1.0);
    if (ratio - product).abs() > IDENTITY_TOL * scale {
        return Err(Error::IdentityViolation {
            what: "<phi|B|phi>/<phi|P_psi|phi> = C_psi_phi",
            residual: (ratio - product).abs(),
        });
    }
    Ok(IdentityCheck {
        lhs,
        rhs,
        ratio,
        product,
    })
}

/// Decomposes `ψ` in the eigenbasis of `A` and classifies `B`.
///
/// `ψ` is an eigenstate when more than `1 − eig_tol` of its weight lies in a
/// single eigenspace (eigenvalues merged within 1e-9), in which case
/// `B = a² P_ψ` up to the reported residual.
pub fn analyze_structure(a: &ComplexMatrix, psi: &PureState, eig_tol: f64) -> Result<BStructure> {
    a.require_hermitian()?;
    check_dims(a, &[psi])?;
    let eig = eig_hermitian(a)?;
    let n = eig.dim();
    let v = eig.eigenvectors.clone();
    let amplitudes = v.adjoint().mat_vec(psi.amplitudes())?;
    let weights: Vec<f64> = amplitudes.iter().map(|c| c.norm_sqr()).collect();

    let mut coefficients = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            coefficients[(i, j)] =
                amplitudes[i] * amplitudes[j].conj() * (eig.eigenvalues[i] * eig.eigenvalues[j]);
        }
    }
    let populations = (0..n).map(|i| coefficients[(i, i)].re).collect();
    let coherences = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, coefficients[(i, j)]))
        .collect();

    // Eigenvalues are sorted, so eigenspaces are contiguous runs.
    let mut case = StructureCase::Superposition;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.eigenvalues[end] - eig.eigenvalues[end - 1] <= EIGENVALUE_MERGE_TOL {
            end += 1;
        }
        let weight: f64 = weights[start..end].iter().sum();
        if weight > 1.0 - eig_tol {
            let a_val = eig.eigenvalues[start..end].iter().sum::<f64>() / (end - start) as f64;
            case = StructureCase::Eigenstate { a: a_val };
            break;
        }
        start = end;
    }

    let eigenstate_residual = match case {
        StructureCase::Eigenstate { a: a_val } => {
            let b = effective_operator(a, psi)?;
            let scaled = projector_of(psi).matrix().scale(c64(a_val * a_val, 0.0));
            Some(b.max_abs_diff(&scaled))
        }
        StructureCase::Superposition => None,
    };

    Ok(BStructure {
        case,
        eigenvalues: eig.eigenvalues,
        amplitudes,
        coefficients,
        populations,
        coherences,
        weights,
        eigenstate_residual,
        eigenvectors: v,
    })
}
