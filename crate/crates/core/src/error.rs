use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("state vector is zero")]
    ZeroVector,

    #[error("state is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("not a density matrix: {reason}")]
    NotDensityMatrix { reason: String },

    #[error("bad probabilities: {reason}")]
    BadProbabilities { reason: String },

    #[error("gate matrix is not unitary (max |U^dagger U - I| = {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("qubit index {index} out of range for {num_qubits} qubit(s)")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit {index} appears more than once in a gate's target list")]
    DuplicateTarget { index: usize },

    #[error("dimension {dim} is not a power of two")]
    NotPowerOfTwoDim { dim: usize },

    #[error("invalid Pauli string {0:?}")]
    BadPauliString(String),

    #[error(
        "pre- and post-selected states are orthogonal (|<phi|psi>|^2 = {overlap_sq:.3e} <= {threshold:.3e}); the weak value diverges"
    )]
    OrthogonalStates { overlap_sq: f64, threshold: f64 },

    #[error("weak value phase is undefined: |<phi|C|phi>| = {magnitude:.3e} <= {threshold:.3e}")]
    PhaseUndefined { magnitude: f64, threshold: f64 },

    #[error(
        "phase recovery is not available for a mixed preselected state: it would require a coherent averaging of complex numbers"
    )]
    MixedPhaseUnsupported,

    #[error(
        "observable is Hermitian but not unitary (residual {residual:.3e}) and cannot be applied as a gate; estimate <phi|B|phi> with estimate_expectation on B = A P_psi A instead"
    )]
    NotUnitaryObservable { residual: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    BadParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("Kraus set is not trace preserving (max |sum K^dagger K - I| = {residual:.3e})")]
    ChannelNotTracePreserving { residual: f64 },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("numerical identity violated: {what} (residual {residual:.3e})")]
    IdentityViolation { what: &'static str, residual: f64 },
}

impl Error {
    /// Errors that come from the configuration (orthogonality, vanishing weak
    /// value, unsupported combinations) rather than from malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OrthogonalStates { .. }
                | Error::PhaseUndefined { .. }
                | Error::MixedPhaseUnsupported
                | Error::NotUnitaryObservable { .. }
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::IdentityViolation { .. }
        )
    }
}
