//! Pure states, rank-1 projectors, density matrices, and the gate sequences
//! that prepare states from `|0…0⟩`.
//!
//! Qubit 0 is the least-significant bit of a basis-state index.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, eig_hermitian, ComplexMatrix, EigenDecomposition};

/// Squared-norm deviation accepted without touching the amplitudes.
pub const NORM_ACCEPT_TOL: f64 = 1e-9;
/// Squared-norm deviation beyond which a vector is rejected.
pub const NORM_REJECT_TOL: f64 = 1e-6;
pub const GATE_UNITARY_TOL: f64 = 1e-9;
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;
const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
const DENSITY_TRACE_TOL: f64 = 1e-9;
const DENSITY_PSD_FLOOR: f64 = -1e-10;

/// Number of qubits for a power-of-two dimension.
pub fn num_qubits_for(dim: usize) -> Result<usize> {
    if dim.is_power_of_two() {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(Error::NotPowerOfTwoDim { dim })
    }
}

/// Fixed single-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedGate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
}

impl NamedGate {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::ZERO;
        let l = Complex64::ONE;
        let i = Complex64::I;
        let h = c64(FRAC_1_SQRT_2, 0.0);
        match self {
            NamedGate::H => [[h, h], [h, -h]],
            NamedGate::X => [[o, l], [l, o]],
            NamedGate::Y => [[o, -i], [i, o]],
            NamedGate::Z => [[l, o], [o, -l]],
            NamedGate::S => [[l, o], [o, i]],
            NamedGate::Sdg => [[l, o], [o, -i]],
            NamedGate::T => [[l, o], [o, c64(FRAC_1_SQRT_2, FRAC_1_SQRT_2)]],
            NamedGate::Tdg => [[l, o], [o, c64(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)]],
            NamedGate::Rx(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [[c64(c, 0.0), c64(0.0, -s)], [c64(0.0, -s), c64(c, 0.0)]]
            }
            NamedGate::Ry(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [[c64(c, 0.0), c64(-s, 0.0)], [c64(s, 0.0), c64(c, 0.0)]]
            }
            NamedGate::Rz(t) => [
                [Complex64::from_polar(1.0, -t / 2.0), o],
                [o, Complex64::from_polar(1.0, t / 2.0)],
            ],
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            NamedGate::S => NamedGate::Sdg,
            NamedGate::Sdg => NamedGate::S,
            NamedGate::T => NamedGate::Tdg,
            NamedGate::Tdg => NamedGate::T,
            NamedGate::Rx(t) => NamedGate::Rx(-t),
            NamedGate::Ry(t) => NamedGate::Ry(-t),
            NamedGate::Rz(t) => NamedGate::Rz(-t),
            g => g,
        }
    }

    /// Case-insensitive lookup; rotations need `angle`.
    pub fn parse(name: &str, angle: Option<f64>) -> std::result::Result<Self, String> {
        let name = name.to_ascii_lowercase();
        let angle = || angle.ok_or_else(|| format!("gate {name:?} needs an angle"));
        Ok(match name.as_str() {
            "h" => NamedGate::H,
            "x" => NamedGate::X,
            "y" => NamedGate::Y,
            "z" => NamedGate::Z,
            "s" => NamedGate::S,
            "sdg" => NamedGate::Sdg,
            "t" => NamedGate::T,
            "tdg" => NamedGate::Tdg,
            "rx" => NamedGate::Rx(angle()?),
            "ry" => NamedGate::Ry(angle()?),
            "rz" => NamedGate::Rz(angle()?),
            other => return Err(format!("unknown gate {other:?}")),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedGate::H => "h",
            NamedGate::X => "x",
            NamedGate::Y => "y",
            NamedGate::Z => "z",
            NamedGate::S => "s",
            NamedGate::Sdg => "sdg",
            NamedGate::T => "t",
            NamedGate::Tdg => "tdg",
            NamedGate::Rx(_) => "rx",
            NamedGate::Ry(_) => "ry",
            NamedGate::Rz(_) => "rz",
        }
    }

    pub fn angle(self) -> Option<f64> {
        match self {
            NamedGate::Rx(t) | NamedGate::Ry(t) | NamedGate::Rz(t) => Some(t),
            _ => None,
        }
    }
}

/// A gate in a preparation circuit.
///
/// For `Unitary`, bit `m` of the matrix index addresses `targets[m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRepr", into = "GateRepr")]
pub enum Gate {
    Named { gate: NamedGate, target: usize },
    Unitary {
        matrix: ComplexMatrix,
        targets: Vec<usize>,
    },
}

impl Gate {
    pub fn named(gate: NamedGate, target: usize) -> Self {
        Gate::Named { gate, target }
    }

    /// Explicit unitary gate, rejected unless unitary within 1e-9 and sized
    /// for its target list.
    pub fn unitary(matrix: ComplexMatrix, targets: Vec<usize>) -> Result<Self> {
        let gate = Gate::Unitary { matrix, targets };
        gate.check_matrix()?;
        Ok(gate)
    }

    fn check_matrix(&self) -> Result<()> {
        if let Gate::Unitary { matrix, targets } = self {
            let expected = 1usize << targets.len();
            if matrix.dim() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: matrix.dim(),
                });
            }
            let residual = matrix.unitary_residual();
            if residual > GATE_UNITARY_TOL {
                return Err(Error::NotUnitary { residual });
            }
        }
        Ok(())
    }

    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::Named { target, .. } => vec![*target],
            Gate::Unitary { targets, .. } => targets.clone(),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Gate::Named { gate, target } => Gate::Named {
                gate: gate.inverse(),
                target: *target,
            },
            Gate::Unitary { matrix, targets } => Gate::Unitary {
                matrix: matrix.adjoint(),
                targets: targets.clone(),
            },
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let targets = self.targets();
        for (k, &t) in targets.iter().enumerate() {
            if t >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: t,
                    num_qubits,
                });
            }
            if targets[..k].contains(&t) {
                return Err(Error::DuplicateTarget { index: t });
            }
        }
        self.check_matrix()
    }

    /// Applies the gate in place. Targets must already be validated.
    fn apply(&self, amps: &mut [Complex64]) {
        match self {
            Gate::Named { gate, target } => {
                let u = gate.matrix();
                let bit = 1usize << target;
                for i in 0..amps.len() {
                    if i & bit == 0 {
                        let j = i | bit;
                        let (a, b) = (amps[i], amps[j]);
                        amps[i] = u[0][0] * a + u[0][1] * b;
                        amps[j] = u[1][0] * a + u[1][1] * b;
                    }
                }
            }
            Gate::Unitary { matrix, targets } => {
                let k = 1usize << targets.len();
                let mask: usize = targets.iter().map(|t| 1usize << t).sum();
                let offsets: Vec<usize> = (0..k)
                    .map(|s| {
                        targets
                            .iter()
                            .enumerate()
                            .filter(|(m, _)| s >> m & 1 == 1)
                            .map(|(_, t)| 1usize << t)
                            .sum()
                    })
                    .collect();
                let mut gathered = vec![Complex64::ZERO; k];
                for base in 0..amps.len() {
                    if base & mask != 0 {
                        continue;
                    }
                    for (g, off) in gathered.iter_mut().zip(&offsets) {
                        *g = amps[base | off];
                    }
                    for (row, off) in offsets.iter().enumerate() {
                        amps[base | off] = (0..k).map(|c| matrix[(row, c)] * gathered[c]).sum();
                    }
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    targets: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<ComplexMatrix>,
}

#[derive(Debug)]
pub struct GateParseError(String);

impl fmt::Display for GateParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<GateRepr> for Gate {
    type Error = GateParseError;

    fn try_from(r: GateRepr) -> std::result::Result<Self, GateParseError> {
        let err = |msg: String| GateParseError(msg);
        let name = r.gate.to_ascii_lowercase();
        if name == "unitary" {
            let matrix = r.matrix.ok_or_else(|| err("unitary gate needs \"matrix\"".into()))?;
            let targets = r
                .targets
                .or(r.target.map(|t| vec![t]))
                .ok_or_else(|| err("unitary gate needs \"targets\"".into()))?;
            return Gate::unitary(matrix, targets).map_err(|e| err(e.to_string()));
        }
        let target = r
            .target
            .ok_or_else(|| err(format!("gate {name:?} needs \"target\"")))?;
        let gate = NamedGate::parse(&name, r.angle).map_err(err)?;
        Ok(Gate::Named { gate, target })
    }
}

impl From<Gate> for GateRepr {
    fn from(g: Gate) -> Self {
        match g {
            Gate::Named { gate, target } => GateRepr {
                gate: gate.name().into(),
                target: Some(target),
                angle: gate.angle(),
                targets: None,
                matrix: None,
            },
            Gate::Unitary { matrix, targets } => GateRepr {
                gate: "unitary".into(),
                target: None,
                angle: None,
                targets: Some(targets),
                matrix: Some(matrix),
            },
        }
    }
}

/// Ordered list of gates, applied first to last.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateSequence(Vec<Gate>);

impl GateSequence {
    pub fn new(gates: Vec<Gate>) -> Self {
        Self(gates)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, gate: Gate) {
        self.0.push(gate);
    }

    pub fn then(mut self, gate: Gate) -> Self {
        self.0.push(gate);
        self
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        self.0.iter().try_for_each(|g| g.validate(num_qubits))
    }

    /// Reversed order with every gate replaced by its adjoint.
    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(Gate::inverse).collect())
    }

    /// Applies the sequence to raw amplitudes of dimension `2^n`.
    pub fn apply_to(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = num_qubits_for(amplitudes.len())?;
        self.validate(n)?;
        let mut out = amplitudes.to_vec();
        for g in &self.0 {
            g.apply(&mut out);
        }
        Ok(out)
    }

    /// Full `2^n × 2^n` unitary of the sequence.
    pub fn unitary(&self, num_qubits: usize) -> Result<ComplexMatrix> {
        let dim = 1usize << num_qubits;
        let mut m = ComplexMatrix::zeros(dim);
        for col in 0..dim {
            let mut e = vec![Complex64::ZERO; dim];
            e[col] = Complex64::ONE;
            let out = self.apply_to(&e)?;
            for (row, z) in out.into_iter().enumerate() {
                m[(row, col)] = z;
            }
        }
        Ok(m)
    }
}

impl FromIterator<Gate> for GateSequence {
    fn from_iter<I: IntoIterator<Item = Gate>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Normalized state vector, optionally carrying the circuit that prepares it.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    prep: Option<GateSequence>,
}

impl PureState {
    /// Accepts, renormalizes, or rejects by squared-norm deviation:
    /// `≤ 1e-9` kept as-is, `≤ 1e-6` renormalized, otherwise an error.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(pos) = amplitudes
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { row: pos, col: 0 });
        }
        let norm_sq = linalg::norm_sqr(&amplitudes);
        if norm_sq == 0.0 {
            return Err(Error::ZeroVector);
        }
        let deviation = (norm_sq - 1.0).abs();
        let amplitudes = if deviation <= NORM_ACCEPT_TOL {
            amplitudes
        } else if deviation <= NORM_REJECT_TOL {
            let n = norm_sq.sqrt();
            amplitudes.into_iter().map(|z| z / n).collect()
        } else {
            return Err(Error::NotNormalized { norm_sq });
        };
        Ok(Self {
            amplitudes,
            prep: None,
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[index] = Complex64::ONE;
        let prep = num_qubits_for(dim).ok().map(|n| {
            (0..n)
                .filter(|q| index >> q & 1 == 1)
                .map(|q| Gate::named(NamedGate::X, q))
                .collect()
        });
        Ok(Self { amplitudes, prep })
    }

    /// State obtained by running `seq` on `|0…0⟩` of `num_qubits` qubits.
    pub fn from_sequence(seq: GateSequence, num_qubits: usize) -> Result<Self> {
        let ground = Self::basis(1usize << num_qubits, 0)?;
        apply_sequence(&seq, &ground)
    }

    /// Attaches a preparation circuit after checking that it reproduces the
    /// amplitudes up to global phase.
    pub fn with_prep(self, prep: GateSequence) -> Result<Self> {
        let prepared = Self::from_sequence(prep.clone(), num_qubits_for(self.dim())?)?;
        let fidelity = self.fidelity(&prepared)?;
        if fidelity < 1.0 - PHASE_EQUIV_TOL {
            return Err(Error::IdentityViolation {
                what: "preparation circuit does not reproduce the state",
                residual: 1.0 - fidelity,
            });
        }
        Ok(Self {
            amplitudes: self.amplitudes,
            prep: Some(prep),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn prep(&self) -> Option<&GateSequence> {
        self.prep.as_ref()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(linalg::inner(&self.amplitudes, &other.amplitudes)?.norm_sqr())
    }

    /// Equality up to global phase.
    pub fn same_ray(&self, other: &PureState) -> bool {
        self.fidelity(other)
            .map(|f| f >= 1.0 - PHASE_EQUIV_TOL)
            .unwrap_or(false)
    }
}

/// States are compared up to global phase by `|⟨u|v⟩|² ≥ 1 − 1e-9`.
pub const PHASE_EQUIV_TOL: f64 = 1e-9;

/// Three-band normalization; see [`PureState::new`].
pub fn make_pure(amplitudes: Vec<Complex64>) -> Result<PureState> {
    PureState::new(amplitudes)
}

/// `seq · ψ`. The preparation recipe is extended when `ψ` has one.
pub fn apply_sequence(seq: &GateSequence, psi: &PureState) -> Result<PureState> {
    let amplitudes = seq.apply_to(&psi.amplitudes)?;
    let prep = psi.prep.as_ref().map(|p| {
        let mut p = p.clone();
        p.0.extend(seq.0.iter().cloned());
        p
    });
    Ok(PureState { amplitudes, prep })
}

pub fn invert_sequence(seq: &GateSequence) -> GateSequence {
    seq.inverse()
}

/// Rank-1 orthogonal projector `|ψ⟩⟨ψ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
}

impl Projector {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

pub fn projector_of(psi: &PureState) -> Projector {
    let matrix = linalg::outer(&psi.amplitudes, &psi.amplitudes)
        .expect("a vector always matches itself");
    Projector { matrix }
}

/// Hermitian, unit-trace, positive semidefinite matrix. The spectral
/// decomposition is computed at most once.
#[derive(Debug, Clone)]
pub struct DensityMatrixState {
    matrix: ComplexMatrix,
    spectral: OnceLock<EigenDecomposition>,
}

impl DensityMatrixState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.hermitian_residual();
        if residual > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotDensityMatrix {
                reason: format!("not Hermitian (residual {residual:.3e})"),
            });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotDensityMatrix {
                reason: format!("trace is {trace}, expected 1"),
            });
        }
        let matrix = matrix.hermitize();
        let eig = eig_hermitian(&matrix)?;
        let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
        if min < DENSITY_PSD_FLOOR {
            return Err(Error::NotDensityMatrix {
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(Self {
            matrix,
            spectral: OnceLock::from(eig),
        })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            matrix: projector_of(psi).into_matrix(),
            spectral: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &EigenDecomposition {
        self.spectral.get_or_init(|| {
            eig_hermitian(&self.matrix).expect("density matrix is Hermitian by construction")
        })
    }

    /// Spectral ensemble `{(p_k, ψ_k)}` with `p_k > cutoff`.
    pub fn ensemble(&self, cutoff: f64) -> Vec<(f64, Vec<Complex64>)> {
        let eig = self.spectral();
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > cutoff)
            .map(|(i, &p)| (p, eig.vector(i)))
            .collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, observable: &ComplexMatrix) -> Result<Complex64> {
        Ok(linalg::mul(&self.matrix, observable)?.trace())
    }
}

pub fn make_density(matrix: ComplexMatrix) -> Result<DensityMatrixState> {
    DensityMatrixState::new(matrix)
}

/// `Σ_k p_k |ψ_k⟩⟨ψ_k|`.
pub fn mix(pairs: &[(f64, PureState)]) -> Result<DensityMatrixState> {
    let first = pairs.first().ok_or_else(|| Error::BadProbabilities {
        reason: "empty mixture".into(),
    })?;
    let dim = first.1.dim();
    let mut total = 0.0;
    let mut acc = ComplexMatrix::zeros(dim);
    for (p, psi) in pairs {
        if !p.is_finite() || *p < 0.0 {
            return Err(Error::BadProbabilities {
                reason: format!("probability {p} is negative or not finite"),
            });
        }
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.dim(),
            });
        }
        total += p;
        acc = &acc + &projector_of(psi).matrix.scale(c64(*p, 0.0));
    }
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::BadProbabilities {
            reason: format!("probabilities sum to {total}, expected 1"),
        });
    }
    DensityMatrixState::new(acc)
}
