//! Kraus channels and the state-specific error witness.
//!
//! For a gate `U_A = e^{−iθA}` acting on `|ψ⟩`, the witness is `B = A P_ψ A`.
//! The ideal value is `⟨U_Aψ|B|U_Aψ⟩`, the real one `Tr(B ℰ(|ψ⟩⟨ψ|))` for the
//! physical operation `ℰ`, and the deviation is `Δ = |ideal − real|`.
//!
//! `ℰ` is always the complete noisy gate. Use [`noisy_gate`] to build
//! "ideal gate, then noise".

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, exp_hermitian_times, ComplexMatrix};
use crate::qstate::{projector_of, DensityMatrixState, PureState};
use crate::weakcore::effective_operator;

pub const COMPLETENESS_TOL: f64 = 1e-9;
/// `|⟨B⟩_ideal − Tr(B)/d|` at or below this makes Δ blind to depolarizing noise.
pub const BLIND_SPOT_TOL: f64 = 1e-10;
pub const DEPOLARIZING_INSENSITIVE: &str = "depolarizing-insensitive";

#[derive(Debug, Clone, Serialize)]
pub struct KrausChannel {
    kraus_ops: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    /// Validates the Kraus set: nonempty, equal dimensions, `Σ K†K = I` within 1e-9.
    pub fn new(kraus_ops: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let dim = kraus_ops
            .first()
            .map(ComplexMatrix::dim)
            .ok_or(Error::ChannelNotTracePreserving { residual: 1.0 })?;
        if let Some(k) = kraus_ops.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k.dim(),
            });
        }
        let residual = completeness_residual(&kraus_ops);
        if residual > COMPLETENESS_TOL {
            return Err(Error::ChannelNotTracePreserving { residual });
        }
        Ok(Self {
            kraus_ops,
            label: label.into(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus_ops: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    pub fn unitary(u: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        Self::new(vec![u], label)
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.kraus_ops[0].dim()
    }

    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.kraus_ops)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn after(&self, inner: &KrausChannel) -> Result<KrausChannel> {
        if self.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: inner.dim(),
            });
        }
        let ops = self
            .kraus_ops
            .iter()
            .flat_map(|k| inner.kraus_ops.iter().map(move |l| k * l))
            .filter(|m| m.max_abs() > 0.0)
            .collect();
        KrausChannel::new(ops, format!("{} . {}", self.label, inner.label))
    }
}

/// Max-entry `|Σ K†K − I|`.
pub fn completeness_residual(ops: &[ComplexMatrix]) -> f64 {
    let Some(first) = ops.first() else {
        return f64::INFINITY;
    };
    let dim = first.dim();
    let mut sum = ComplexMatrix::zeros(dim);
    for k in ops {
        if k.dim() != dim {
            return f64::INFINITY;
        }
        sum = &sum + &(&k.adjoint() * k);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(dim))
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::BadParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

fn nonzero(ops: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    ops.into_iter().filter(|m| m.max_abs() > 0.0).collect()
}

fn qubit(rows: [[Complex64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).expect("2x2")
}

/// Single-qubit `ρ → (1 − ε)ρ + ε I/2`.
pub fn depolarizing(epsilon: f64) -> Result<KrausChannel> {
    check_unit_interval("epsilon", epsilon)?;
    let o = Complex64::ZERO;
    let i = Complex64::I;
    let a = c64((1.0 - 0.75 * epsilon).sqrt(), 0.0);
    let b = (epsilon / 4.0).sqrt();
    let bb = c64(b, 0.0);
    let ops = nonzero(vec![
        qubit([[a, o], [o, a]]),
        qubit([[o, bb], [bb, o]]),
        qubit([[o, -i * b], [i * b, o]]),
        qubit([[bb, o], [o, -bb]]),
    ]);
    KrausChannel::new(ops, format!("depolarizing({epsilon})"))
}

/// Single-qubit energy relaxation `|1⟩ → |0⟩` with probability `γ`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_unit_interval("gamma", gamma)?;
    let o = Complex64::ZERO;
    let l = Complex64::ONE;
    let ops = nonzero(vec![
        qubit([[l, o], [o, c64((1.0 - gamma).sqrt(), 0.0)]]),
        qubit([[o, c64(gamma.sqrt(), 0.0)], [o, o]]),
    ]);
    KrausChannel::new(ops, format!("amplitude_damping({gamma})"))
}

/// Single-qubit dephasing: off-diagonals scale by `√(1 − λ)`.
pub fn phase_damping(lambda: f64) -> Result<KrausChannel> {
    check_unit_interval("lambda", lambda)?;
    let o = Complex64::ZERO;
    let l = Complex64::ONE;
    let ops = nonzero(vec![
        qubit([[l, o], [o, c64((1.0 - lambda).sqrt(), 0.0)]]),
        qubit([[o, o], [o, c64(lambda.sqrt(), 0.0)]]),
    ]);
    KrausChannel::new(ops, format!("phase_damping({lambda})"))
}

/// Unitary channel `{e^{−iδθ A}}`.
pub fn coherent_overrotation(a: &ComplexMatrix, delta_theta: f64) -> Result<KrausChannel> {
    if !delta_theta.is_finite() {
        return Err(Error::BadParameter {
            name: "delta_theta",
            value: delta_theta,
            reason: "must be finite",
        });
    }
    let u = exp_hermitian_times(a, c64(0.0, -delta_theta))?;
    KrausChannel::unitary(u, format!("overrotation({delta_theta})"))
}

/// The ideal gate `e^{−iθA}` followed by `noise`.
pub fn noisy_gate(a: &ComplexMatrix, theta: f64, noise: &KrausChannel) -> Result<KrausChannel> {
    let ideal = coherent_overrotation(a, theta)?;
    let mut ch = noise.after(&ideal)?;
    ch.label = format!("{} after gate(theta={theta})", noise.label);
    Ok(ch)
}

/// `Σ_k K_k ρ K_k†`.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrixState) -> Result<DensityMatrixState> {
    if ch.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: rho.dim(),
        });
    }
    let residual = ch.completeness_residual();
    if residual > COMPLETENESS_TOL {
        return Err(Error::ChannelNotTracePreserving { residual });
    }
    let mut out = ComplexMatrix::zeros(rho.dim());
    for k in &ch.kraus_ops {
        out = &out + &(&(k * rho.matrix()) * &k.adjoint());
    }
    DensityMatrixState::new(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub witness: ComplexMatrix,
    pub ideal: f64,
    #[serde(rename = "real")]
    pub real_val: f64,
    pub delta: f64,
    pub theta: f64,
    pub channel_label: String,
    pub flags: Vec<String>,
}

impl WitnessReport {
    pub fn depolarizing_insensitive(&self) -> bool {
        self.flags.iter().any(|f| f == DEPOLARIZING_INSENSITIVE)
    }
}

pub fn witness_run(
    a: &ComplexMatrix,
    psi: &PureState,
    theta: f64,
    channel: &KrausChannel,
) -> Result<WitnessReport> {
    let b = effective_operator(a, psi)?;
    if channel.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: channel.dim(),
        });
    }
    let u = exp_hermitian_times(a, c64(0.0, -theta))?;
    let ideal_state = u.mat_vec(psi.amplitudes())?;
    let ideal = linalg::sandwich(&ideal_state, &b, &ideal_state)?.re;

    let rho = DensityMatrixState::from_pure(psi);
    let out = apply_channel(channel, &rho)?;
    let real_val = out.expectation(&b)?.re;

    let maximally_mixed = b.trace().re / b.dim() as f64;
    let mut flags = Vec::new();
    if (ideal - maximally_mixed).abs() <= BLIND_SPOT_TOL {
        flags.push(DEPOLARIZING_INSENSITIVE.to_string());
    }
    Ok(WitnessReport {
        witness: b,
        ideal,
        real_val,
        delta: (ideal - real_val).abs(),
        theta,
        channel_label: channel.label.clone(),
        flags,
    })
}

/// Parameterized noise models for sweeps. Each grid value `v` yields a full
/// noisy gate for angle `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    /// `depolarizing(v)` after the ideal gate.
    Depolarizing,
    /// `amplitude_damping(v)` after the ideal gate.
    AmplitudeDamping,
    /// `phase_damping(v)` after the ideal gate.
    PhaseDamping,
    /// The gate rotated by `θ + v` instead of `θ`.
    Overrotation,
}

impl ChannelFamily {
    pub fn build(self, a: &ComplexMatrix, theta: f64, value: f64) -> Result<KrausChannel> {
        match self {
            ChannelFamily::Depolarizing => noisy_gate(a, theta, &depolarizing(value)?),
            ChannelFamily::AmplitudeDamping => noisy_gate(a, theta, &amplitude_damping(value)?),
            ChannelFamily::PhaseDamping => noisy_gate(a, theta, &phase_damping(value)?),
            ChannelFamily::Overrotation => {
                let mut ch = coherent_overrotation(a, theta + value)?;
                ch.label = format!("overrotation(theta={theta}, delta={value})");
                Ok(ch)
            }
        }
    }
}

/// One report per grid value, in grid order.
pub fn witness_sweep<F>(
    a: &ComplexMatrix,
    psi: &PureState,
    theta: f64,
    family: F,
    grid: &[f64],
) -> Result<Vec<(f64, WitnessReport)>>
where
    F: Fn(f64) -> Result<KrausChannel>,
{
    grid.iter()
        .map(|&v| Ok((v, witness_run(a, psi, theta, &family(v)?)?)))
        .collect()
}

/// [`witness_sweep`] over a built-in family.
pub fn witness_sweep_family(
    a: &ComplexMatrix,
    psi: &PureState,
    theta: f64,
    family: ChannelFamily,
    grid: &[f64],
) -> Result<Vec<(f64, WitnessReport)>> {
    witness_sweep(a, psi, theta, |v| family.build(a, theta, v), grid)
}

/// CSV rows with header `param,ideal,real,delta,flags`; flags joined by `;`.
pub fn sweep_csv(rows: &[(f64, WitnessReport)]) -> String {
    let mut out = String::from("param,ideal,real,delta,flags\n");
    for (param, r) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            crate::fmt17(*param),
            crate::fmt17(r.ideal),
            crate::fmt17(r.real_val),
            crate::fmt17(r.delta),
            r.flags.join(";")
        ));
    }
    out
}

/// Helper for callers that only have the projector.
pub fn witness_operator(a: &ComplexMatrix, psi: &PureState) -> Result<(ComplexMatrix, ComplexMatrix)> {
    Ok((effective_operator(a, psi)?, projector_of(psi).into_matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_hermitian, random_vector, rng};
    use rand::RngExt;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn z() -> ComplexMatrix {
        ComplexMatrix::real_diag(&[1.0, -1.0])
    }

    fn plus() -> PureState {
        PureState::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap()
    }

    fn random_qubit_density(r: &mut rand_xoshiro::Xoshiro256PlusPlus) -> DensityMatrixState {
        let a = PureState::new(random_vector(r, 2)).unwrap();
        let b = PureState::new(random_vector(r, 2)).unwrap();
        let p = r.random_range(0.0..1.0);
        crate::qstate::mix(&[(p, a), (1.0 - p, b)]).unwrap()
    }

    fn bloch(rho: &DensityMatrixState) -> [f64; 3] {
        let m = rho.matrix();
        [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
    }

    #[test]
    fn depolarizing_zero_is_identity() {
        let ch = depolarizing(0.0).unwrap();
        assert_eq!(ch.kraus_ops().len(), 1);
        assert_eq!(ch.kraus_ops()[0], ComplexMatrix::identity(2));
    }

    #[test]
    fn full_amplitude_damping_decays() {
        let one = DensityMatrixState::from_pure(&PureState::basis(2, 1).unwrap());
        let out = apply_channel(&amplitude_damping(1.0).unwrap(), &one).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::real_diag(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn depolarizing_shrinks_bloch_vector() {
        let mut r = rng(101);
        for _ in 0..20 {
            let eps = r.random_range(0.0..1.0);
            let rho = random_qubit_density(&mut r);
            let out = apply_channel(&depolarizing(eps).unwrap(), &rho).unwrap();
            // Convex-combination oracle.
            let oracle = &rho.matrix().scale(c64(1.0 - eps, 0.0))
                + &ComplexMatrix::identity(2).scale(c64(eps / 2.0, 0.0));
            assert!(out.matrix().max_abs_diff(&oracle) <= 1e-12);
            let (b0, b1) = (bloch(&rho), bloch(&out));
            for k in 0..3 {
                assert!((b1[k] - (1.0 - eps) * b0[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn apply_channel_examples() {
        let mut r = rng(111);
        let rho = random_qubit_density(&mut r);
        let same = apply_channel(&KrausChannel::identity(2), &rho).unwrap();
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let mixed = apply_channel(&depolarizing(1.0).unwrap(), &rho).unwrap();
        assert!(mixed.matrix().max_abs_diff(&ComplexMatrix::real_diag(&[0.5, 0.5])) < 1e-15);

        let (e1, e2) = (0.13, 0.37);
        let twice = apply_channel(
            &depolarizing(e1).unwrap(),
            &apply_channel(&depolarizing(e2).unwrap(), &rho).unwrap(),
        )
        .unwrap();
        let once = apply_channel(&depolarizing(e1 + e2 - e1 * e2).unwrap(), &rho).unwrap();
        assert!(twice.matrix().max_abs_diff(once.matrix()) <= 1e-10);

        let three = DensityMatrixState::from_pure(&PureState::basis(3, 0).unwrap());
        assert!(matches!(
            apply_channel(&depolarizing(0.1).unwrap(), &three),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bad_parameters_and_incomplete_sets() {
        assert!(matches!(depolarizing(1.5), Err(Error::BadParameter { .. })));
        assert!(matches!(amplitude_damping(-0.1), Err(Error::BadParameter { .. })));
        assert!(matches!(phase_damping(f64::NAN), Err(Error::BadParameter { .. })));
        assert!(matches!(
            coherent_overrotation(&z(), f64::INFINITY),
            Err(Error::BadParameter { .. })
        ));
        let half = ComplexMatrix::identity(2).scale(c64(0.5, 0.0));
        let err = KrausChannel::new(vec![half], "bad").unwrap_err();
        assert!(matches!(err, Error::ChannelNotTracePreserving { residual } if (residual - 0.75).abs() < 1e-15));
        assert!(KrausChannel::new(vec![], "empty").is_err());
    }

    #[test]
    fn constructors_are_complete_and_preserve_states() {
        let mut r = rng(121);
        for _ in 0..50 {
            let p = r.random_range(0.0..=1.0);
            let a = random_hermitian(&mut r, 2);
            let dt = r.random_range(-PI..PI);
            for ch in [
                depolarizing(p).unwrap(),
                amplitude_damping(p).unwrap(),
                phase_damping(p).unwrap(),
                coherent_overrotation(&a, dt).unwrap(),
            ] {
                assert!(ch.completeness_residual() <= 1e-9, "{}", ch.label());
                let rho = random_qubit_density(&mut r);
                let out = apply_channel(&ch, &rho).unwrap();
                assert!((out.matrix().trace().re - 1.0).abs() <= 1e-9);
                assert!(out.spectral().eigenvalues[0] >= -1e-9);
            }
        }
    }

    #[test]
    fn noiseless_gate_has_zero_delta() {
        let mut r = rng(131);
        for d in [2, 4] {
            let a = random_hermitian(&mut r, d);
            let psi = PureState::new(random_vector(&mut r, d)).unwrap();
            let theta = r.random_range(0.0..2.0 * PI);
            let report = witness_run(&a, &psi, theta, &coherent_overrotation(&a, theta).unwrap()).unwrap();
            assert!(report.delta <= 1e-10);
        }
    }

    #[test]
    fn depolarized_witness_example() {
        let ch = noisy_gate(&z(), PI / 2.0, &depolarizing(0.1).unwrap()).unwrap();
        let report = witness_run(&z(), &plus(), PI / 2.0, &ch).unwrap();
        assert!((report.ideal - 1.0).abs() < 1e-14);
        assert!((report.real_val - 0.95).abs() < 1e-14);
        assert!((report.delta - 0.05).abs() < 1e-14);
        assert!(!report.depolarizing_insensitive());
    }

    #[test]
    fn blind_spot_is_flagged() {
        for eps in [0.0, 0.1, 0.5, 1.0] {
            let ch = noisy_gate(&z(), PI / 4.0, &depolarizing(eps).unwrap()).unwrap();
            let report = witness_run(&z(), &plus(), PI / 4.0, &ch).unwrap();
            assert!(report.delta <= 1e-10);
            assert!(report.depolarizing_insensitive());
        }
    }

    #[test]
    fn sweeps() {
        let rows = witness_sweep_family(&z(), &plus(), PI / 2.0, ChannelFamily::Depolarizing, &[0.0, 0.05, 0.1]).unwrap();
        let deltas: Vec<f64> = rows.iter().map(|(_, r)| r.delta).collect();
        for (d, e) in deltas.iter().zip([0.0, 0.025, 0.05]) {
            assert!((d - e).abs() < 1e-14);
        }
        assert!(witness_sweep_family(&z(), &plus(), 1.0, ChannelFamily::Depolarizing, &[]).unwrap().is_empty());

        let rows = witness_sweep_family(&z(), &plus(), 0.7, ChannelFamily::Overrotation, &[0.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].1.delta <= 1e-12);

        let csv = sweep_csv(&witness_sweep_family(&z(), &plus(), PI / 4.0, ChannelFamily::Depolarizing, &[0.1]).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("param,ideal,real,delta,flags"));
        assert!(lines.next().unwrap().ends_with(",depolarizing-insensitive"));
    }

    #[test]
    fn depolarizing_delta_is_linear() {
        let mut r = rng(141);
        let a = random_hermitian(&mut r, 2);
        let psi = PureState::new(random_vector(&mut r, 2)).unwrap();
        let theta = 0.9;
        let unit = witness_run(&a, &psi, theta, &ChannelFamily::Depolarizing.build(&a, theta, 1.0).unwrap())
            .unwrap()
            .delta;
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.01).collect();
        for (eps, report) in witness_sweep_family(&a, &psi, theta, ChannelFamily::Depolarizing, &grid).unwrap() {
            assert!((report.delta - eps * unit).abs() <= 1e-10);
        }
    }
}
