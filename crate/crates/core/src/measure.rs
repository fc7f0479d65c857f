//! Shot-based strong measurements.
//!
//! Sampling uses xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). A uniform draw in `[0, 1)` is
//! `(next_u64 >> 11) · 2⁻⁵³`, and each shot picks the first outcome whose
//! cumulative probability exceeds the draw. Sub-experiments get their own
//! stream from [`derive_seed`]. Identical inputs, seed and shot count always
//! give the identical estimate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, eig_hermitian, ComplexMatrix};
use crate::phase::{build_c, phase_from_expectations, PhaseReport};
use crate::qstate::{num_qubits_for, projector_of, GateSequence, PureState, PROBABILITY_SUM_TOL};
use crate::weakcore::{effective_operator, EIGENVALUE_MERGE_TOL};

/// Unitarity tolerance for applying an observable as a gate.
pub const GATE_OBSERVABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BornOutcome {
    pub eigenvalue: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotEstimate {
    pub mean: f64,
    pub shots: u64,
    /// Sample standard deviation over `√shots`.
    pub std_error: f64,
    pub seed: u64,
}

/// SplitMix64 finalizer applied to `seed ⊕ index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = (seed ^ index).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `sqrt(p(1 − p)/shots)`.
pub fn binomial_sigma(p: f64, shots: u64) -> f64 {
    (p * (1.0 - p) / shots as f64).max(0.0).sqrt()
}

struct Sampler {
    rng: Xoshiro256PlusPlus,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Draws `shots` i.i.d. values from a discrete distribution and summarizes them.
fn sample_outcomes(outcomes: &[BornOutcome], shots: u64, seed: u64) -> Result<ShotEstimate> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    let mut cumulative = Vec::with_capacity(outcomes.len());
    let mut acc = 0.0;
    for o in outcomes {
        acc += o.probability / total;
        cumulative.push(acc);
    }
    let last = outcomes
        .iter()
        .rposition(|o| o.probability > 0.0)
        .unwrap_or(outcomes.len() - 1);

    let mut sampler = Sampler::new(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..shots {
        let u = sampler.uniform();
        let k = cumulative.iter().position(|&c| u < c).unwrap_or(last);
        let v = outcomes[k].eigenvalue;
        sum += v;
        sum_sq += v * v;
    }
    let n = shots as f64;
    let mean = sum / n;
    let std_error = if shots > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(ShotEstimate {
        mean,
        shots,
        std_error,
        seed,
    })
}

/// Outcome distribution of a projective measurement of `o` in `φ`.
/// Eigenvalues within 1e-9 are merged into one outcome.
pub fn born_probabilities(o: &ComplexMatrix, phi: &PureState) -> Result<Vec<BornOutcome>> {
    o.require_hermitian()?;
    if o.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: o.dim(),
            found: phi.dim(),
        });
    }
    let eig = eig_hermitian(o)?;
    let mut out: Vec<BornOutcome> = Vec::new();
    let mut group_len = 0usize;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let p = linalg::inner(&eig.vector(i), phi.amplitudes())?.norm_sqr();
        match out.last_mut() {
            Some(prev) if lambda - eig.eigenvalues[i - 1] <= EIGENVALUE_MERGE_TOL => {
                group_len += 1;
                prev.eigenvalue += (lambda - prev.eigenvalue) / group_len as f64;
                prev.probability += p;
            }
            _ => {
                group_len = 1;
                out.push(BornOutcome {
                    eigenvalue: lambda,
                    probability: p,
                });
            }
        }
    }
    let total: f64 = out.iter().map(|o| o.probability).sum();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::IdentityViolation {
            what: "Born probabilities sum to 1",
            residual: (total - 1.0).abs(),
        });
    }
    Ok(out)
}

/// Sample mean of `shots` projective measurements of `o` in `φ`.
pub fn estimate_expectation(o: &ComplexMatrix, phi: &PureState, shots: u64, seed: u64) -> Result<ShotEstimate> {
    let outcomes = born_probabilities(o, phi)?;
    sample_outcomes(&outcomes, shots, seed)
}

fn require_gate(a: &ComplexMatrix) -> Result<()> {
    let residual = a.unitary_residual();
    if residual <= GATE_OBSERVABLE_TOL {
        Ok(())
    } else if linalg::is_hermitian(a, linalg::HERMITIAN_TOL) {
        Err(Error::NotUnitaryObservable { residual })
    } else {
        Err(Error::NotUnitary { residual })
    }
}

/// Final state `φ_prep⁻¹ · A · ψ_prep |0…0⟩` of the verification circuit.
fn circuit_output(a: &ComplexMatrix, psi_prep: &GateSequence, phi_prep: &GateSequence) -> Result<Vec<Complex64>> {
    require_gate(a)?;
    let n = num_qubits_for(a.dim())?;
    let psi = PureState::from_sequence(psi_prep.clone(), n)?;
    let after_a = a.mat_vec(psi.amplitudes())?;
    phi_prep.inverse().apply_to(&after_a)
}

/// Exact ground-state probability of the verification circuit, `|⟨φ|A|ψ⟩|²`.
pub fn amplitude_probability(a: &ComplexMatrix, psi_prep: &GateSequence, phi_prep: &GateSequence) -> Result<f64> {
    Ok(circuit_output(a, psi_prep, phi_prep)?[0].norm_sqr())
}

/// Prepares `ψ`, applies `A` as a gate, undoes the `φ` preparation and
/// records the fraction of shots that land in `|0…0⟩`. The population value
/// is `|⟨φ|A|ψ⟩|² = ⟨φ|B|φ⟩`.
pub fn amplitude_protocol(
    a: &ComplexMatrix,
    psi_prep: &GateSequence,
    phi_prep: &GateSequence,
    shots: u64,
    seed: u64,
) -> Result<ShotEstimate> {
    let p0 = amplitude_probability(a, psi_prep, phi_prep)?.min(1.0);
    let outcomes = [
        BornOutcome {
            eigenvalue: 1.0,
            probability: p0,
        },
        BornOutcome {
            eigenvalue: 0.0,
            probability: 1.0 - p0,
        },
    ];
    sample_outcomes(&outcomes, shots, seed)
}

fn check_weights(components: &[(f64, GateSequence)]) -> Result<()> {
    if components.is_empty() {
        return Err(Error::BadProbabilities {
            reason: "no components".into(),
        });
    }
    if let Some((p, _)) = components.iter().find(|(p, _)| !p.is_finite() || *p < 0.0) {
        return Err(Error::BadProbabilities {
            reason: format!("probability {p} is negative or not finite"),
        });
    }
    let total: f64 = components.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::BadProbabilities {
            reason: format!("probabilities sum to {total}, expected 1"),
        });
    }
    Ok(())
}

/// Exact `Σ_k p_k |⟨φ|A|ψ_k⟩|²`.
pub fn mixed_average_probability(
    a: &ComplexMatrix,
    components: &[(f64, GateSequence)],
    phi_prep: &GateSequence,
) -> Result<f64> {
    check_weights(components)?;
    components
        .iter()
        .map(|(p, prep)| Ok(p * amplitude_probability(a, prep, phi_prep)?))
        .sum()
}

/// One [`amplitude_protocol`] run per mixture component, seeded with
/// `derive_seed(seed, k)`, combined classically as `Σ_k p_k · mean_k`.
/// `shots` in the result is the total over all components.
pub fn mixed_average_protocol(
    a: &ComplexMatrix,
    components: &[(f64, GateSequence)],
    phi_prep: &GateSequence,
    shots_per_component: u64,
    seed: u64,
) -> Result<ShotEstimate> {
    check_weights(components)?;
    let mut mean = 0.0;
    let mut var = 0.0;
    for (k, (p, prep)) in components.iter().enumerate() {
        let run = amplitude_protocol(a, prep, phi_prep, shots_per_component, derive_seed(seed, k as u64))?;
        mean += p * run.mean;
        var += p * p * run.std_error * run.std_error;
    }
    Ok(ShotEstimate {
        mean,
        shots: shots_per_component * components.len() as u64,
        std_error: var.sqrt(),
        seed,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShotPhaseEstimate {
    pub x: ShotEstimate,
    pub y: ShotEstimate,
    pub phase: f64,
}

/// Phase recovery with sampled `x` and `y`. The shot budget is split evenly
/// between the two ensembles (`x` gets the extra shot when odd).
pub fn estimate_phase(
    a: &ComplexMatrix,
    psi: &PureState,
    phi: &PureState,
    shots: u64,
    seed: u64,
    epsilon_mag: f64,
) -> Result<ShotPhaseEstimate> {
    if shots < 2 {
        return Err(Error::ZeroShots);
    }
    let split = build_c(a, psi)?;
    let shots_y = shots / 2;
    let x = estimate_expectation(&split.c_r.hermitize(), phi, shots - shots_y, derive_seed(seed, 0))?;
    let y = estimate_expectation(&split.c_i.hermitize(), phi, shots_y, derive_seed(seed, 1))?;
    let PhaseReport { phase, .. } = phase_from_expectations(x.mean, y.mean, 1.0, epsilon_mag)?;
    Ok(ShotPhaseEstimate { x, y, phase })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShotModulusEstimate {
    /// Estimate of `⟨φ|B|φ⟩`.
    pub numerator: ShotEstimate,
    /// Estimate of `⟨φ|P_ψ|φ⟩`.
    pub denominator: ShotEstimate,
    /// `sqrt(numerator / denominator)`
    pub modulus: f64,
}

/// `|A_w|` from sampled `⟨φ|B|φ⟩` and `⟨φ|P_ψ|φ⟩`, budget split evenly.
pub fn estimate_modulus(
    a: &ComplexMatrix,
    psi: &PureState,
    phi: &PureState,
    shots: u64,
    seed: u64,
) -> Result<ShotModulusEstimate> {
    if shots < 2 {
        return Err(Error::ZeroShots);
    }
    let b = effective_operator(a, psi)?;
    let p = projector_of(psi).into_matrix();
    let half = shots / 2;
    let numerator = estimate_expectation(&b, phi, shots - half, derive_seed(seed, 0))?;
    let denominator = estimate_expectation(&p, phi, half, derive_seed(seed, 1))?;
    let modulus = if denominator.mean > 0.0 {
        (numerator.mean / denominator.mean).max(0.0).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(ShotModulusEstimate {
        numerator,
        denominator,
        modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::qstate::{Gate, NamedGate};
    use crate::testutil::{random_hermitian, random_vector, rng};
    use crate::weakcore::{expectation_identity_check, weak_value};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn z() -> ComplexMatrix {
        ComplexMatrix::real_diag(&[1.0, -1.0])
    }

    fn seq(gates: &[NamedGate]) -> GateSequence {
        gates.iter().map(|&g| Gate::named(g, 0)).collect()
    }

    fn phi_a1() -> PureState {
        PureState::from_sequence(seq(&[NamedGate::Ry(PI / 3.0)]), 1).unwrap()
    }

    #[test]
    fn born_examples() {
        let out = born_probabilities(&z(), &PureState::basis(2, 0).unwrap()).unwrap();
        assert_eq!(
            out,
            vec![
                BornOutcome { eigenvalue: -1.0, probability: 0.0 },
                BornOutcome { eigenvalue: 1.0, probability: 1.0 },
            ]
        );

        let out = born_probabilities(&z(), &phi_a1()).unwrap();
        assert!((out[0].probability - 0.25).abs() < 1e-15);
        assert!((out[1].probability - 0.75).abs() < 1e-15);

        let plus = PureState::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let out = born_probabilities(projector_of(&plus).matrix(), &phi_a1()).unwrap();
        let one = out.iter().find(|o| (o.eigenvalue - 1.0).abs() < 1e-12).unwrap();
        assert!((one.probability - (2.0 + 3f64.sqrt()) / 4.0).abs() < 1e-14);
        assert!((one.probability - 0.933013).abs() < 1e-6);
    }

    #[test]
    fn born_merges_degenerate_outcomes() {
        let mut r = rng(3);
        let phi = PureState::new(random_vector(&mut r, 4)).unwrap();
        let o = ComplexMatrix::real_diag(&[1.0, 1.0, -1.0, 1.0 + 1e-12]);
        let out = born_probabilities(&o, &phi).unwrap();
        assert_eq!(out.len(), 2);
        let a = phi.amplitudes();
        let expected_plus = a[0].norm_sqr() + a[1].norm_sqr() + a[3].norm_sqr();
        assert!((out[1].probability - expected_plus).abs() < 1e-12);
    }

    #[test]
    fn born_sums_to_one_and_reproduces_expectation() {
        let mut r = rng(13);
        for k in 0..100 {
            let d = [2, 4, 8][k % 3];
            let o = random_hermitian(&mut r, d);
            let phi = PureState::new(random_vector(&mut r, d)).unwrap();
            let out = born_probabilities(&o, &phi).unwrap();
            let total: f64 = out.iter().map(|x| x.probability).sum();
            assert!((total - 1.0).abs() <= 1e-9);
            let mean: f64 = out.iter().map(|x| x.eigenvalue * x.probability).sum();
            let exact = linalg::sandwich(phi.amplitudes(), &o, phi.amplitudes()).unwrap().re;
            assert!((mean - exact).abs() <= 1e-10);
        }
    }

    #[test]
    fn deterministic_outcome_has_no_error_bar() {
        for seed in [0, 1, 42, u64::MAX] {
            let est = estimate_expectation(&z(), &PureState::basis(2, 0).unwrap(), 1000, seed).unwrap();
            assert_eq!(est.mean, 1.0);
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn large_sample_lands_within_five_sigma() {
        for seed in [1, 2, 3, 42] {
            let est = estimate_expectation(&z(), &phi_a1(), 1_000_000, seed).unwrap();
            assert!((est.mean - 0.5).abs() <= 5.0 * est.std_error, "seed {seed}: {est:?}");
        }
    }

    #[test]
    fn same_seed_same_mean() {
        let a = estimate_expectation(&z(), &phi_a1(), 5000, 9).unwrap();
        let b = estimate_expectation(&z(), &phi_a1(), 5000, 9).unwrap();
        assert_eq!(a, b);
        let means: Vec<f64> = (10..15)
            .map(|s| estimate_expectation(&z(), &phi_a1(), 5000, s).unwrap().mean)
            .collect();
        assert!(means.iter().any(|&m| m != a.mean));
    }

    #[test]
    fn zero_shots_rejected() {
        assert_eq!(
            estimate_expectation(&z(), &phi_a1(), 0, 1),
            Err(Error::ZeroShots)
        );
    }

    #[test]
    fn amplitude_protocol_appendix_configuration() {
        let exact = amplitude_probability(&z(), &seq(&[NamedGate::H]), &seq(&[NamedGate::Ry(PI / 3.0)])).unwrap();
        let analytic = (2.0 - 3f64.sqrt()) / 4.0;
        assert!((exact - analytic).abs() < 1e-15);

        let est = amplitude_protocol(&z(), &seq(&[NamedGate::H]), &seq(&[NamedGate::Ry(PI / 3.0)]), 10_000, 42).unwrap();
        let sigma = binomial_sigma(analytic, 10_000);
        assert!((3.0 * sigma - 0.0075).abs() < 1e-4);
        assert!((est.mean - analytic).abs() <= 3.0 * sigma);
    }

    #[test]
    fn amplitude_protocol_trivial_cases() {
        let id = ComplexMatrix::identity(2);
        let prep = seq(&[NamedGate::H, NamedGate::Ry(0.3)]);
        let est = amplitude_protocol(&id, &prep, &prep, 1000, 1).unwrap();
        assert_eq!(est.mean, 1.0);

        let exact = amplitude_probability(&z(), &seq(&[NamedGate::H]), &seq(&[NamedGate::H])).unwrap();
        assert!(exact < 1e-30);
        let est = amplitude_protocol(&z(), &seq(&[NamedGate::H]), &seq(&[NamedGate::H]), 1000, 1).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn amplitude_protocol_requires_a_gate() {
        let h = ComplexMatrix::real_diag(&[2.0, -1.0]);
        let err = amplitude_protocol(&h, &seq(&[]), &seq(&[]), 10, 1).unwrap_err();
        assert!(matches!(err, Error::NotUnitaryObservable { .. }));
        assert!(err.to_string().contains("estimate_expectation"));
    }

    #[test]
    fn amplitude_population_matches_operator_path() {
        // Shot path and operator path estimate the same quantity.
        let mut r = rng(23);
        for _ in 0..20 {
            let psi_prep: GateSequence = (0..2)
                .flat_map(|q| {
                    use rand::RngExt;
                    [
                        Gate::named(NamedGate::Ry(r.random_range(-3.0..3.0)), q),
                        Gate::named(NamedGate::Rz(r.random_range(-3.0..3.0)), q),
                    ]
                })
                .collect();
            let phi_prep: GateSequence = (0..2)
                .map(|q| {
                    use rand::RngExt;
                    Gate::named(NamedGate::Rx(r.random_range(-3.0..3.0)), q)
                })
                .collect();
            // Z ⊗ X is Hermitian and unitary.
            let a = crate::phase::PauliString::new("ZX").unwrap().matrix();
            let psi = PureState::from_sequence(psi_prep.clone(), 2).unwrap();
            let phi = PureState::from_sequence(phi_prep.clone(), 2).unwrap();
            let exact = amplitude_probability(&a, &psi_prep, &phi_prep).unwrap();
            let check = expectation_identity_check(&a, &psi, &phi, 0.0).unwrap();
            assert!((exact - check.rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn mixed_protocol_appendix_configuration() {
        let components = vec![(0.75, seq(&[])), (0.25, seq(&[NamedGate::X]))];
        let phi_prep = seq(&[NamedGate::Ry(PI / 3.0)]);
        let exact = mixed_average_probability(&z(), &components, &phi_prep).unwrap();
        let oracle = 0.75 * 0.75 + 0.25 * 0.25;
        assert!((exact - oracle).abs() < 1e-15);
        let est = mixed_average_protocol(&z(), &components, &phi_prep, 10_000, 42).unwrap();
        assert!((est.mean - 0.625).abs() <= 0.02);
        assert_eq!(est.shots, 20_000);
    }

    #[test]
    fn mixed_protocol_reductions() {
        let prep = seq(&[NamedGate::H]);
        let phi_prep = seq(&[NamedGate::Ry(PI / 3.0)]);
        // A single component uses derive_seed(seed, 0).
        let single = mixed_average_protocol(&z(), &[(1.0, prep.clone())], &phi_prep, 4000, 5).unwrap();
        let direct = amplitude_protocol(&z(), &prep, &phi_prep, 4000, derive_seed(5, 0)).unwrap();
        assert_eq!(single.mean, direct.mean);

        let split = mixed_average_protocol(&z(), &[(0.5, prep.clone()), (0.5, prep.clone())], &phi_prep, 4000, 5).unwrap();
        let exact = amplitude_probability(&z(), &prep, &phi_prep).unwrap();
        assert!((split.mean - exact).abs() <= 4.0 * binomial_sigma(exact, 8000));

        assert!(matches!(
            mixed_average_protocol(&z(), &[(0.5, prep.clone())], &phi_prep, 10, 1),
            Err(Error::BadProbabilities { .. })
        ));
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: Vec<u64> = (0..8).map(|k| derive_seed(42, k)).collect();
        let mut dedup = seeds.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), seeds.len());
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
    }

    #[test]
    fn shot_phase_and_modulus_track_exact_values() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let psi = PureState::basis(2, 0).unwrap();
        let phi = PureState::new(vec![c64(FRAC_1_SQRT_2, 0.0), c64(0.0, FRAC_1_SQRT_2)]).unwrap();
        let est = estimate_phase(&x, &psi, &phi, 200_000, 7, 1e-12).unwrap();
        assert!((est.phase + PI / 2.0).abs() < 0.05);
        assert_eq!(est.x.shots + est.y.shots, 200_000);

        let w = weak_value(&x, &psi, &phi, 1e-12).unwrap();
        let m = estimate_modulus(&x, &psi, &phi, 200_000, 7).unwrap();
        assert!((m.modulus - w.norm()).abs() < 0.02);
    }
}
