use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Read;

use serde::Serialize;
use weakval::linalg::{eig_hermitian, sandwich};
use weakval::measure::{
    amplitude_probability, amplitude_protocol, binomial_sigma, estimate_modulus, estimate_phase,
    mixed_average_protocol, ShotModulusEstimate, ShotPhaseEstimate,
};
use weakval::noise::{self, sweep_csv, WitnessReport};
use weakval::phase::{recover_phase, PhaseReport, DEFAULT_EPSILON_MAG};
use weakval::qstate::{Gate, GateSequence, NamedGate, PureState};
use weakval::weakcore::{
    analyze_structure, effective_operator, effective_operator_mixed, expectation_identity_check,
    weak_value_product, BStructure, IdentityCheck, DEFAULT_EPSILON_ORTH,
};
use weakval::{Complex64, ComplexMatrix};

use crate::output::to_json;
use crate::problem::{Preselect, ProblemSpec};
use crate::{Cli, CliError, Format, DEFAULT_SEED, DEFAULT_SHOTS};

pub struct Output {
    pub stdout: String,
    pub summary: String,
    pub code: u8,
}

fn ok(stdout: String, summary: String) -> Result<Output, CliError> {
    Ok(Output {
        stdout,
        summary,
        code: 0,
    })
}

fn load(cli: &Cli) -> Result<ProblemSpec, CliError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::input("--input PATH is required for this command"))?;
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::input(format!("cannot read standard input: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?
    };
    ProblemSpec::parse(&text)
}

fn require_json(cli: &Cli, what: &str) -> Result<(), CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::input(format!("--format csv is not available for {what}")));
    }
    Ok(())
}

struct Settings {
    shots: u64,
    seed: u64,
    epsilon_orth: f64,
    epsilon_mag: f64,
}

fn settings(cli: &Cli, spec: &ProblemSpec) -> Result<Settings, CliError> {
    let s = Settings {
        shots: cli.shots.or(spec.options.shots).unwrap_or(DEFAULT_SHOTS),
        seed: cli.seed.or(spec.options.seed).unwrap_or(DEFAULT_SEED),
        epsilon_orth: cli.epsilon_orth.or(spec.options.epsilon_orth).unwrap_or(DEFAULT_EPSILON_ORTH),
        epsilon_mag: spec.options.epsilon_mag.unwrap_or(DEFAULT_EPSILON_MAG),
    };
    for (name, v) in [("epsilon_orth", s.epsilon_orth), ("epsilon_mag", s.epsilon_mag)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::input(format!("{name} must be a non-negative number, got {v}")));
        }
    }
    if s.shots == 0 {
        return Err(weakval::Error::ZeroShots.into());
    }
    Ok(s)
}

#[derive(Serialize)]
struct Sampled {
    shots: u64,
    seed: u64,
    modulus: ShotModulusEstimate,
    phase: Option<ShotPhaseEstimate>,
}

#[derive(Serialize)]
struct WeakValueOutput {
    command: &'static str,
    dim: usize,
    epsilon_orth: f64,
    forward: Complex64,
    reverse: Complex64,
    product: Complex64,
    modulus: f64,
    overlap_sq: f64,
    numerator_sq: f64,
    re_from_mean: f64,
    phase: PhaseReport,
    identity: IdentityCheck,
    sampled: Option<Sampled>,
}

pub fn weak_value(cli: &Cli) -> Result<Output, CliError> {
    require_json(cli, "weak-value")?;
    let spec = load(cli)?;
    let s = settings(cli, &spec)?;
    let a = spec.observable()?;
    let psi = spec
        .pure_preselect(a.dim())?
        .ok_or(weakval::Error::MixedPhaseUnsupported)?;
    let phi = spec.require_postselect(a.dim())?;

    let report = weak_value_product(&a, &psi, &phi, s.epsilon_orth)?;
    let phase = recover_phase(&a, &psi, &phi, s.epsilon_orth, s.epsilon_mag)?;
    let identity = expectation_identity_check(&a, &psi, &phi, s.epsilon_orth)?;
    let sampled = if s.shots >= 2 {
        Some(Sampled {
            shots: s.shots,
            seed: s.seed,
            modulus: estimate_modulus(&a, &psi, &phi, s.shots, s.seed)?,
            // A sampled x + iy can land on zero even when the exact one does not.
            phase: estimate_phase(&a, &psi, &phi, s.shots, s.seed, s.epsilon_mag).ok(),
        })
    } else {
        None
    };

    let mut summary = String::new();
    writeln!(
        summary,
        "weak value {:.6}{:+.6}i, reverse {:.6}{:+.6}i",
        report.forward.re, report.forward.im, report.reverse.re, report.reverse.im
    )
    .unwrap();
    writeln!(
        summary,
        "product C = {:.6}, modulus {:.6}, phase {:.6} rad (x = {:.6}, y = {:.6})",
        report.product.re, report.modulus, phase.phase, phase.x, phase.y
    )
    .unwrap();
    let out = WeakValueOutput {
        command: "weak-value",
        dim: a.dim(),
        epsilon_orth: s.epsilon_orth,
        forward: report.forward,
        reverse: report.reverse,
        product: report.product,
        modulus: report.modulus,
        overlap_sq: report.overlap_sq,
        numerator_sq: report.numerator_sq,
        re_from_mean: report.re_from_mean,
        phase,
        identity,
        sampled,
    };
    ok(to_json(&out), summary)
}

#[derive(Serialize)]
struct EffectiveOpOutput {
    command: &'static str,
    dim: usize,
    mixed_preselect: bool,
    operator: ComplexMatrix,
    hermitian_residual: f64,
    eigenvalues: Vec<f64>,
    positive_semidefinite: bool,
    trace: f64,
    structure: Option<BStructure>,
    postselect_expectation: Option<f64>,
}

pub fn effective_op(cli: &Cli) -> Result<Output, CliError> {
    require_json(cli, "effective-op")?;
    let spec = load(cli)?;
    let a = spec.observable()?;
    let pre = spec.preselect(a.dim())?;
    let phi = spec.postselect(a.dim())?;

    let (b, structure, mixed) = match &pre {
        Preselect::Pure(psi) => (
            effective_operator(&a, psi)?,
            Some(analyze_structure(&a, psi, spec.eig_tol())?),
            false,
        ),
        Preselect::Mixed(rho) => (effective_operator_mixed(&a, rho)?, None, true),
    };
    let eig = eig_hermitian(&b)?;
    let floor = -1e-10 * b.max_abs().max(1.0);
    let psd = eig.eigenvalues.first().is_none_or(|&l| l >= floor);
    let expectation = match &phi {
        Some(phi) => Some(sandwich(phi.amplitudes(), &b, phi.amplitudes())?.re),
        None => None,
    };

    let mut summary = String::new();
    writeln!(
        summary,
        "B ({}x{}, {} preselection): trace {:.6}, PSD {}",
        b.dim(),
        b.dim(),
        if mixed { "mixed" } else { "pure" },
        b.trace().re,
        psd
    )
    .unwrap();
    if let Some(s) = &structure {
        match s.case {
            weakval::StructureCase::Eigenstate { a } => {
                writeln!(summary, "case: eigenstate with eigenvalue {a:.6}, B = a^2 P_psi").unwrap()
            }
            weakval::StructureCase::Superposition => writeln!(
                summary,
                "case: superposition, {} nonzero coherences",
                s.coherences.iter().filter(|c| c.2.norm() > 1e-12).count()
            )
            .unwrap(),
        }
    }
    if let Some(e) = expectation {
        writeln!(summary, "<phi|B|phi> = {e:.6}").unwrap();
    }
    let out = EffectiveOpOutput {
        command: "effective-op",
        dim: b.dim(),
        mixed_preselect: mixed,
        hermitian_residual: b.hermitian_residual(),
        eigenvalues: eig.eigenvalues,
        positive_semidefinite: psd,
        trace: b.trace().re,
        operator: b,
        structure,
        postselect_expectation: expectation,
    };
    ok(to_json(&out), summary)
}

#[derive(Serialize)]
struct SweepRow<'a> {
    param: f64,
    ideal: f64,
    real: f64,
    delta: f64,
    flags: &'a [String],
}

#[derive(Serialize)]
#[serde(untagged)]
enum WitnessOutput<'a> {
    Single {
        command: &'static str,
        report: &'a WitnessReport,
    },
    Sweep {
        command: &'static str,
        theta: f64,
        family: weakval::ChannelFamily,
        witness: &'a ComplexMatrix,
        rows: Vec<SweepRow<'a>>,
    },
}

pub fn witness(cli: &Cli) -> Result<Output, CliError> {
    let spec = load(cli)?;
    let a = spec.observable()?;
    let psi = spec
        .pure_preselect(a.dim())?
        .ok_or_else(|| CliError::input("witness needs a pure preselected state"))?;
    let w = spec
        .witness
        .as_ref()
        .ok_or_else(|| CliError::input("witness needs a \"witness\" section with \"theta\""))?;
    if !w.theta.is_finite() {
        return Err(CliError::input("witness.theta must be finite"));
    }
    let forms = [w.noise.is_some(), w.channel.is_some(), w.sweep.is_some()];
    if forms.iter().filter(|&&f| f).count() != 1 {
        return Err(CliError::input(
            "witness needs exactly one of \"noise\", \"channel\" or \"sweep\"",
        ));
    }

    if let Some(sweep) = &w.sweep {
        let rows = noise::witness_sweep_family(&a, &psi, w.theta, sweep.family, &sweep.grid)?;
        let mut summary = format!("witness sweep over {} point(s) at theta = {:.6}\n", rows.len(), w.theta);
        for (p, r) in &rows {
            writeln!(summary, "  param {p:<10.6} delta {:.6e} {}", r.delta, r.flags.join(" ")).unwrap();
        }
        if cli.format == Format::Csv {
            return ok(sweep_csv(&rows), summary);
        }
        let witness = effective_operator(&a, &psi)?;
        let out = WitnessOutput::Sweep {
            command: "witness",
            theta: w.theta,
            family: sweep.family,
            witness: &witness,
            rows: rows
                .iter()
                .map(|(p, r)| SweepRow {
                    param: *p,
                    ideal: r.ideal,
                    real: r.real_val,
                    delta: r.delta,
                    flags: &r.flags,
                })
                .collect(),
        };
        return ok(to_json(&out), summary);
    }

    require_json(cli, "single witness reports (use a sweep)")?;
    let channel = match (&w.noise, &w.channel) {
        (Some(n), None) => noise::noisy_gate(&a, w.theta, &n.build(&a)?)?,
        (None, Some(c)) => c.build(&a)?,
        _ => unreachable!(),
    };
    let report = noise::witness_run(&a, &psi, w.theta, &channel)?;
    let summary = format!(
        "witness {}: ideal {:.6}, real {:.6}, delta {:.6e}{}\n",
        report.channel_label,
        report.ideal,
        report.real_val,
        report.delta,
        if report.depolarizing_insensitive() {
            " [depolarizing-insensitive]"
        } else {
            ""
        }
    );
    ok(
        to_json(&WitnessOutput::Single {
            command: "witness",
            report: &report,
        }),
        summary,
    )
}

#[derive(Serialize)]
struct Experiment {
    name: &'static str,
    description: &'static str,
    exact: f64,
    estimate: f64,
    std_error: f64,
    sigma: f64,
    tolerance: f64,
    deviation: f64,
    pass: bool,
}

#[derive(Serialize)]
struct AppendixOutput {
    command: &'static str,
    shots: u64,
    seed: u64,
    experiments: [Experiment; 2],
    pass: bool,
}

fn experiment(
    name: &'static str,
    description: &'static str,
    exact: f64,
    estimate: weakval::ShotEstimate,
    sigma: f64,
) -> Experiment {
    let deviation = (estimate.mean - exact).abs();
    Experiment {
        name,
        description,
        exact,
        estimate: estimate.mean,
        std_error: estimate.std_error,
        sigma,
        tolerance: 3.0 * sigma,
        deviation,
        pass: deviation <= 3.0 * sigma,
    }
}

pub fn reproduce_appendix(cli: &Cli) -> Result<Output, CliError> {
    require_json(cli, "reproduce-appendix")?;
    let shots = cli.shots.unwrap_or(DEFAULT_SHOTS);
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    if shots == 0 {
        return Err(weakval::Error::ZeroShots.into());
    }
    let z = ComplexMatrix::real_diag(&[1.0, -1.0]);
    let phi_prep = GateSequence::new(vec![Gate::named(NamedGate::Ry(PI / 3.0), 0)]);
    let phi = PureState::from_sequence(phi_prep.clone(), 1)?;

    // Pure state: ψ = H|0⟩.
    let psi_prep = GateSequence::new(vec![Gate::named(NamedGate::H, 0)]);
    let psi = PureState::from_sequence(psi_prep.clone(), 1)?;
    let b = effective_operator(&z, &psi)?;
    let exact_1 = sandwich(phi.amplitudes(), &b, phi.amplitudes())?.re;
    let circuit_1 = amplitude_probability(&z, &psi_prep, &phi_prep)?;
    if (exact_1 - circuit_1).abs() > 1e-10 {
        return Err(weakval::Error::IdentityViolation {
            what: "<phi|B|phi> = |<phi|A|psi>|^2",
            residual: (exact_1 - circuit_1).abs(),
        }
        .into());
    }
    let est_1 = amplitude_protocol(&z, &psi_prep, &phi_prep, shots, seed)?;
    let a1 = experiment(
        "pure",
        "A = Z, psi = H|0>, phi = Ry(pi/3)|0>: P(0) after psi-prep, A, inverse phi-prep",
        exact_1,
        est_1,
        binomial_sigma(exact_1, shots),
    );

    // Mixed state: ρ = 0.75|0⟩⟨0| + 0.25|1⟩⟨1|, one run per component.
    let components = vec![
        (0.75, GateSequence::default()),
        (0.25, GateSequence::new(vec![Gate::named(NamedGate::X, 0)])),
    ];
    let mut exact_2 = 0.0;
    let mut var_2 = 0.0;
    for (p, prep) in &components {
        let q = amplitude_probability(&z, prep, &phi_prep)?;
        exact_2 += p * q;
        var_2 += p * p * q * (1.0 - q) / shots as f64;
    }
    let rho = weakval::qstate::DensityMatrixState::new(ComplexMatrix::real_diag(&[0.75, 0.25]))?;
    let b_rho = effective_operator_mixed(&z, &rho)?;
    let exact_rho = sandwich(phi.amplitudes(), &b_rho, phi.amplitudes())?.re;
    if (exact_rho - exact_2).abs() > 1e-10 {
        return Err(weakval::Error::IdentityViolation {
            what: "<phi|A rho A|phi> = sum_k p_k |<phi|A|psi_k>|^2",
            residual: (exact_rho - exact_2).abs(),
        }
        .into());
    }
    let est_2 = mixed_average_protocol(&z, &components, &phi_prep, shots, seed)?;
    let a2 = experiment(
        "mixed",
        "A = Z, rho = diag(0.75, 0.25), phi = Ry(pi/3)|0>: weighted average of one run per eigenstate",
        exact_2,
        est_2,
        var_2.sqrt(),
    );

    let pass = a1.pass && a2.pass;
    let mut summary = String::new();
    for e in [&a1, &a2] {
        writeln!(
            summary,
            "{:<6} exact {:.6}  estimate {:.6} +/- {:.6}  |dev| {:.6} <= 3 sigma {:.6}: {}",
            e.name,
            e.exact,
            e.estimate,
            e.std_error,
            e.deviation,
            e.tolerance,
            if e.pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    let out = AppendixOutput {
        command: "reproduce-appendix",
        shots,
        seed,
        experiments: [a1, a2],
        pass,
    };
    Ok(Output {
        stdout: to_json(&out),
        summary,
        code: if pass { 0 } else { 1 },
    })
}
