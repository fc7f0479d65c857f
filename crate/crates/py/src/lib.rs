//! Python bindings. Matrices are lists of rows of Python `complex` (or float)
//! values, state vectors are flat lists, and gates are `(name, target)` or
//! `(name, target, angle)` tuples.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use weakval::noise::{self, KrausChannel};
use weakval::qstate::{Gate, GateSequence, NamedGate, PureState};
use weakval::{linalg, measure, phase, weakcore, ComplexMatrix, Error};

create_exception!(weakval, WeakvalError, PyValueError, "Invalid input or failed numerical check.");
create_exception!(
    weakval,
    DomainError,
    WeakvalError,
    "The configuration has no defined answer (orthogonal states, vanishing weak value, mixed-state phase)."
);

fn err(e: Error) -> PyErr {
    if e.is_domain() {
        DomainError::new_err(e.to_string())
    } else {
        WeakvalError::new_err(e.to_string())
    }
}

type Rows = Vec<Vec<Complex64>>;

fn matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(rows).map_err(err)
}

fn state(amplitudes: Vec<Complex64>) -> PyResult<PureState> {
    PureState::new(amplitudes).map_err(err)
}

/// A list of `(name, target)` or `(name, target, angle)` tuples.
type GateList<'py> = Vec<Bound<'py, PyAny>>;

fn gates(spec: GateList<'_>) -> PyResult<GateSequence> {
    spec.iter()
        .map(|item| {
            let (name, target, angle) = match item.extract::<(String, usize, f64)>() {
                Ok((n, t, a)) => (n, t, Some(a)),
                Err(_) => {
                    let (n, t) = item.extract::<(String, usize)>().map_err(|_| {
                        WeakvalError::new_err(format!(
                            "gate must be (name, target) or (name, target, angle), got {item}"
                        ))
                    })?;
                    (n, t, None)
                }
            };
            NamedGate::parse(&name, angle)
                .map(|g| Gate::named(g, target))
                .map_err(WeakvalError::new_err)
        })
        .collect()
}

#[pyclass(frozen, get_all, module = "weakval")]
pub struct WeakValueReport {
    forward: Complex64,
    reverse: Complex64,
    product: Complex64,
    modulus: f64,
    overlap_sq: f64,
    numerator_sq: f64,
}

#[pymethods]
impl WeakValueReport {
    fn __repr__(&self) -> String {
        format!(
            "WeakValueReport(forward={}, reverse={}, product={}, modulus={})",
            self.forward, self.reverse, self.product, self.modulus
        )
    }
}

#[pyclass(frozen, get_all, module = "weakval")]
pub struct PhaseReport {
    x: f64,
    y: f64,
    phase: f64,
    weak_value: Complex64,
}

#[pymethods]
impl PhaseReport {
    fn __repr__(&self) -> String {
        format!("PhaseReport(x={}, y={}, phase={})", self.x, self.y, self.phase)
    }
}

#[pyclass(frozen, get_all, module = "weakval")]
pub struct WitnessReport {
    witness: Rows,
    ideal: f64,
    real: f64,
    delta: f64,
    theta: f64,
    channel: String,
    flags: Vec<String>,
}

#[pymethods]
impl WitnessReport {
    fn __repr__(&self) -> String {
        format!(
            "WitnessReport(ideal={}, real={}, delta={}, flags={:?})",
            self.ideal, self.real, self.delta, self.flags
        )
    }
}

/// A completely positive trace-preserving map given by Kraus operators.
#[pyclass(frozen, name = "Channel", module = "weakval")]
pub struct PyChannel(KrausChannel);

#[pymethods]
impl PyChannel {
    #[new]
    #[pyo3(signature = (ops, label = "kraus".to_string()))]
    fn new(ops: Vec<Rows>, label: String) -> PyResult<Self> {
        let ops = ops.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        KrausChannel::new(ops, label).map(Self).map_err(err)
    }

    #[staticmethod]
    fn identity(dim: usize) -> Self {
        Self(KrausChannel::identity(dim))
    }

    #[staticmethod]
    fn depolarizing(epsilon: f64) -> PyResult<Self> {
        noise::depolarizing(epsilon).map(Self).map_err(err)
    }

    #[staticmethod]
    fn amplitude_damping(gamma: f64) -> PyResult<Self> {
        noise::amplitude_damping(gamma).map(Self).map_err(err)
    }

    #[staticmethod]
    fn phase_damping(lambda: f64) -> PyResult<Self> {
        noise::phase_damping(lambda).map(Self).map_err(err)
    }

    #[staticmethod]
    fn overrotation(a: Rows, delta_theta: f64) -> PyResult<Self> {
        noise::coherent_overrotation(&matrix(a)?, delta_theta).map(Self).map_err(err)
    }

    /// `noise` applied after the ideal gate `exp(-i theta A)`.
    #[staticmethod]
    fn noisy_gate(a: Rows, theta: f64, noise: &PyChannel) -> PyResult<Self> {
        noise::noisy_gate(&matrix(a)?, theta, &noise.0).map(Self).map_err(err)
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    #[getter]
    fn kraus_ops(&self) -> Vec<Rows> {
        self.0.kraus_ops().iter().map(ComplexMatrix::to_rows).collect()
    }

    fn apply(&self, rho: Rows) -> PyResult<Rows> {
        let rho = weakval::DensityMatrixState::new(matrix(rho)?).map_err(err)?;
        Ok(noise::apply_channel(&self.0, &rho).map_err(err)?.matrix().to_rows())
    }

    fn __repr__(&self) -> String {
        format!("Channel({:?}, {} Kraus operators)", self.0.label(), self.0.kraus_ops().len())
    }
}

#[pyfunction]
#[pyo3(signature = (a, psi, phi, epsilon_orth = weakcore::DEFAULT_EPSILON_ORTH))]
fn weak_value(a: Rows, psi: Vec<Complex64>, phi: Vec<Complex64>, epsilon_orth: f64) -> PyResult<Complex64> {
    weakcore::weak_value(&matrix(a)?, &state(psi)?, &state(phi)?, epsilon_orth).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, psi, phi, epsilon_orth = weakcore::DEFAULT_EPSILON_ORTH))]
fn weak_value_product(
    a: Rows,
    psi: Vec<Complex64>,
    phi: Vec<Complex64>,
    epsilon_orth: f64,
) -> PyResult<WeakValueReport> {
    let r = weakcore::weak_value_product(&matrix(a)?, &state(psi)?, &state(phi)?, epsilon_orth).map_err(err)?;
    Ok(WeakValueReport {
        forward: r.forward,
        reverse: r.reverse,
        product: r.product,
        modulus: r.modulus,
        overlap_sq: r.overlap_sq,
        numerator_sq: r.numerator_sq,
    })
}

#[pyfunction]
fn effective_operator(a: Rows, psi: Vec<Complex64>) -> PyResult<Rows> {
    Ok(weakcore::effective_operator(&matrix(a)?, &state(psi)?).map_err(err)?.to_rows())
}

#[pyfunction]
fn effective_operator_mixed(a: Rows, rho: Rows) -> PyResult<Rows> {
    let rho = weakval::DensityMatrixState::new(matrix(rho)?).map_err(err)?;
    Ok(weakcore::effective_operator_mixed(&matrix(a)?, &rho).map_err(err)?.to_rows())
}

#[pyfunction]
#[pyo3(signature = (a, psi, phi, epsilon_orth = weakcore::DEFAULT_EPSILON_ORTH, epsilon_mag = phase::DEFAULT_EPSILON_MAG))]
fn recover_phase(
    a: Rows,
    psi: Vec<Complex64>,
    phi: Vec<Complex64>,
    epsilon_orth: f64,
    epsilon_mag: f64,
) -> PyResult<PhaseReport> {
    let r = phase::recover_phase(&matrix(a)?, &state(psi)?, &state(phi)?, epsilon_orth, epsilon_mag).map_err(err)?;
    Ok(PhaseReport {
        x: r.x,
        y: r.y,
        phase: r.phase,
        weak_value: r.weak_value_reconstructed,
    })
}

/// Returns `(C_R, C_I)` for `C = A |psi><psi|`.
#[pyfunction]
fn hermitian_split(a: Rows, psi: Vec<Complex64>) -> PyResult<(Rows, Rows)> {
    let s = phase::build_c(&matrix(a)?, &state(psi)?).map_err(err)?;
    Ok((s.c_r.to_rows(), s.c_i.to_rows()))
}

#[pyfunction]
fn pauli_decompose(m: Rows) -> PyResult<BTreeMap<String, Complex64>> {
    let map = phase::pauli_decompose(&matrix(m)?).map_err(err)?;
    Ok(map.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

#[pyfunction]
fn pauli_compose(coefficients: BTreeMap<String, Complex64>) -> PyResult<Rows> {
    let mut map = phase::PauliMap::new();
    for (k, v) in coefficients {
        map.insert(phase::PauliString::new(&k).map_err(err)?, v);
    }
    Ok(phase::pauli_compose(&map).map_err(err)?.to_rows())
}

/// Eigenvalues (ascending) and the matching eigenvectors.
#[pyfunction]
fn eig_hermitian(m: Rows) -> PyResult<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let e = linalg::eig_hermitian(&matrix(m)?).map_err(err)?;
    let vectors = (0..e.dim()).map(|i| e.vector(i)).collect();
    Ok((e.eigenvalues, vectors))
}

#[pyfunction]
fn exp_hermitian_times(a: Rows, scale: Complex64) -> PyResult<Rows> {
    Ok(linalg::exp_hermitian_times(&matrix(a)?, scale).map_err(err)?.to_rows())
}

/// State prepared from `|0...0>` by a list of gates.
#[pyfunction]
fn prepare(spec: GateList<'_>, num_qubits: usize) -> PyResult<Vec<Complex64>> {
    let psi = PureState::from_sequence(gates(spec)?, num_qubits).map_err(err)?;
    Ok(psi.amplitudes().to_vec())
}

#[pyfunction]
fn witness_run(a: Rows, psi: Vec<Complex64>, theta: f64, channel: &PyChannel) -> PyResult<WitnessReport> {
    let r = noise::witness_run(&matrix(a)?, &state(psi)?, theta, &channel.0).map_err(err)?;
    Ok(WitnessReport {
        witness: r.witness.to_rows(),
        ideal: r.ideal,
        real: r.real_val,
        delta: r.delta,
        theta: r.theta,
        channel: r.channel_label,
        flags: r.flags,
    })
}

/// Returns `(mean, std_error)`.
#[pyfunction]
#[pyo3(signature = (o, phi, shots = 10_000, seed = 42))]
fn estimate_expectation(o: Rows, phi: Vec<Complex64>, shots: u64, seed: u64) -> PyResult<(f64, f64)> {
    let e = measure::estimate_expectation(&matrix(o)?, &state(phi)?, shots, seed).map_err(err)?;
    Ok((e.mean, e.std_error))
}

/// Verification circuit: prepare psi, apply A, undo the phi preparation and
/// count `|0...0>`. Returns `(mean, std_error)`.
#[pyfunction]
#[pyo3(signature = (a, psi_prep, phi_prep, shots = 10_000, seed = 42))]
fn amplitude_protocol(
    a: Rows,
    psi_prep: GateList<'_>,
    phi_prep: GateList<'_>,
    shots: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let e = measure::amplitude_protocol(&matrix(a)?, &gates(psi_prep)?, &gates(phi_prep)?, shots, seed)
        .map_err(err)?;
    Ok((e.mean, e.std_error))
}

/// One circuit run per `(weight, preparation)` component, weighted classically.
#[pyfunction]
#[pyo3(signature = (a, components, phi_prep, shots = 10_000, seed = 42))]
fn mixed_average_protocol(
    a: Rows,
    components: Vec<(f64, GateList<'_>)>,
    phi_prep: GateList<'_>,
    shots: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let components = components
        .into_iter()
        .map(|(p, g)| Ok((p, gates(g)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let e = measure::mixed_average_protocol(&matrix(a)?, &components, &gates(phi_prep)?, shots, seed)
        .map_err(err)?;
    Ok((e.mean, e.std_error))
}

#[pymodule(name = "weakval")]
fn weakval_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WeakvalError", m.py().get_type::<WeakvalError>())?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add_class::<WeakValueReport>()?;
    m.add_class::<PhaseReport>()?;
    m.add_class::<WitnessReport>()?;
    m.add_class::<PyChannel>()?;
    m.add_function(wrap_pyfunction!(weak_value, m)?)?;
    m.add_function(wrap_pyfunction!(weak_value_product, m)?)?;
    m.add_function(wrap_pyfunction!(effective_operator, m)?)?;
    m.add_function(wrap_pyfunction!(effective_operator_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(recover_phase, m)?)?;
    m.add_function(wrap_pyfunction!(hermitian_split, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_compose, m)?)?;
    m.add_function(wrap_pyfunction!(eig_hermitian, m)?)?;
    m.add_function(wrap_pyfunction!(exp_hermitian_times, m)?)?;
    m.add_function(wrap_pyfunction!(prepare, m)?)?;
    m.add_function(wrap_pyfunction!(witness_run, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(amplitude_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_average_protocol, m)?)?;
    Ok(())
}
