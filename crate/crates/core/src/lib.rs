//! Bidirectional weak values and the state-conditioned operators built from them.
//!
//! Given a Hermitian observable `A`, a preselected state `|ψ⟩` and a
//! postselected state `|φ⟩`, the crate computes the weak value
//! `⟨φ|A|ψ⟩/⟨φ|ψ⟩`, the operator `B = A|ψ⟩⟨ψ|A` whose ordinary expectation in
//! `|φ⟩` gives `|⟨φ|A|ψ⟩|²`, and the phase of the weak value from the
//! Hermitian and anti-Hermitian parts of `A|ψ⟩⟨ψ|`. A small shot simulator and
//! a set of Kraus channels cover the measurement and noise side.
//!
//! ```
//! use weakval::{linalg::ComplexMatrix, qstate::PureState, weakcore};
//!
//! let z = ComplexMatrix::real_diag(&[1.0, -1.0]);
//! let s = std::f64::consts::FRAC_1_SQRT_2;
//! let psi = PureState::from_real(&[s, s]).unwrap();
//! let phi = PureState::from_real(&[(0.5f64).sqrt(), -(0.5f64).sqrt()]).unwrap();
//! // ⟨−|Z|+⟩ = 1 while ⟨−|+⟩ = 0: orthogonal, so the weak value is rejected.
//! assert!(weakcore::weak_value(&z, &psi, &phi, 1e-12).is_err());
//! ```

pub mod error;
pub mod linalg;
pub mod measure;
pub mod noise;
pub mod phase;
pub mod qstate;
pub mod weakcore;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition};
pub use measure::{ShotEstimate, ShotModulusEstimate, ShotPhaseEstimate};
pub use noise::{ChannelFamily, KrausChannel, WitnessReport};
pub use phase::{HermitianSplit, PauliMap, PauliString, PhaseReport};
pub use qstate::{DensityMatrixState, Gate, GateSequence, NamedGate, Projector, PureState};
pub use weakcore::{BStructure, IdentityCheck, StructureCase, WeakValueReport};

pub use num_complex::Complex64;

/// Formats `x` like C's `%.17g`. Non-finite values come out as `NaN`, `inf`, `-inf`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::fmt17;

    #[test]
    fn fmt17_matches_printf() {
        assert_eq!(fmt17(0.1), "0.10000000000000001");
        assert_eq!(fmt17(1.0), "1");
        assert_eq!(fmt17(-2.5), "-2.5");
        assert_eq!(fmt17(0.0), "0");
        assert_eq!(fmt17(1e20), "1e+20");
        assert_eq!(fmt17(1.5e-5), "1.5e-05");
        assert_eq!(fmt17(0.0001), "0.0001");
        assert_eq!(fmt17(123456789.0), "123456789");
        assert_eq!(fmt17(1e16), "10000000000000000");
        assert_eq!(fmt17(1e17), "1e+17");
        assert_eq!(fmt17(f64::NAN), "NaN");
    }

    #[test]
    fn fmt17_round_trips() {
        for x in [std::f64::consts::PI, 1.0 / 3.0, -1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
