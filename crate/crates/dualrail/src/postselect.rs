//! Dual-rail post-selection: outcome legality, conditional error
//! probabilities, the analytic error curves, and damping sweeps.
//!
//! A legal run of the one-bit machine ends with exactly one photon in the
//! scratch pair (and it must sit in mode `b`) and one in the input pair.
//! Everything else signals loss or corruption and is rejected for a
//! re-trial. The accepted outcomes are exactly `|0101>` (type 1) and
//! `|0110>` (type 2).

use std::fmt;

use crate::error::{Error, Result};
use crate::fock::OutcomeDist;
use crate::machine::{self, FunctionType, MachineConfig, OracleSelector, MODE_D};

/// Why an outcome was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// Zero or one photons arrived: something was lost on the way.
    PhotonLoss,
    /// Three or more photons: the inputs were not prepared correctly.
    TooManyPhotons,
    /// Two photons in an illegal pattern, e.g. the scratch pair not
    /// reading logical zero.
    ScratchCorrupted,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::PhotonLoss => write!(f, "photon loss"),
            RejectReason::TooManyPhotons => write!(f, "too many photons"),
            RejectReason::ScratchCorrupted => write!(f, "scratch corrupted"),
        }
    }
}

/// Accept with an answer, or reject with a reason.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept(FunctionType),
    Reject(RejectReason),
}

/// Classify a four-mode count tuple. Total over all tuples: two-photon
/// outcomes are accepted only as `(0,1,0,1)` or `(0,1,1,0)`; fewer
/// photons mean loss, more mean bad preparation, and any other two-photon
/// pattern violates the dual-rail invariant.
pub fn classify(outcome: &[usize]) -> Result<Verdict> {
    if outcome.len() != 4 {
        return Err(Error::MalformedOutcome {
            got: outcome.len(),
            expected: 4,
        });
    }
    let total: usize = outcome.iter().sum();
    Ok(match total {
        0 | 1 => Verdict::Reject(RejectReason::PhotonLoss),
        2 => match outcome {
            [0, 1, 0, 1] => Verdict::Accept(FunctionType::Type1),
            [0, 1, 1, 0] => Verdict::Accept(FunctionType::Type2),
            _ => Verdict::Reject(RejectReason::ScratchCorrupted),
        },
        _ => Verdict::Reject(RejectReason::TooManyPhotons),
    })
}

/// Closed-form error probability of the `k1 k0 = 10` machine without
/// error correction: `(1 + e^{-gamma} - 2 e^{-3 gamma / 2}) / 4`.
pub fn p_noec_analytic(gamma: f64) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::NegativeGamma(gamma));
    }
    Ok(0.25 * (1.0 + (-gamma).exp() - 2.0 * (-1.5 * gamma).exp()))
}

/// Closed-form error probability with post-selection:
/// `(1 - sech(gamma / 2)) / 2`.
pub fn p_ec_analytic(gamma: f64) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::NegativeGamma(gamma));
    }
    Ok(0.5 * (1.0 - 1.0 / (gamma / 2.0).cosh()))
}

/// How the error probability is scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMode {
    /// Look only at the mode-`d` count `z`, legal or not.
    Raw,
    /// Condition on the accepted outcomes.
    Postselected,
}

/// Probability that the machine's answer is wrong, given the true type.
///
/// Raw mode reads `z` from mode `d` on the full distribution (a lost
/// photon reads as `z = 0`). Post-selected mode is the relative
/// probability of the wrong accepted outcome among accepted outcomes,
/// and errors out when nothing is accepted.
pub fn conditional_error(dist: &OutcomeDist, truth: FunctionType, mode: ErrorMode) -> Result<f64> {
    let expected_z = match truth {
        FunctionType::Type1 => 1,
        FunctionType::Type2 => 0,
    };
    match mode {
        // the `+ 0.0` turns an empty sum's negative zero into plain zero
        ErrorMode::Raw => Ok(dist
            .iter()
            .filter(|(outcome, _)| outcome[MODE_D] != expected_z)
            .map(|(_, p)| p)
            .sum::<f64>()
            + 0.0),
        ErrorMode::Postselected => {
            let mut accepted = 0.0;
            let mut wrong = 0.0;
            for (outcome, p) in dist.iter() {
                if let Verdict::Accept(t) = classify(outcome)? {
                    accepted += p;
                    if t != truth {
                        wrong += p;
                    }
                }
            }
            if accepted <= 0.0 {
                return Err(Error::RejectedOutcome(
                    "no accepted probability mass to condition on".into(),
                ));
            }
            Ok(wrong / accepted)
        }
    }
}

/// One row of a damping sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub gamma: f64,
    pub p_raw_sim: f64,
    pub p_raw_analytic: f64,
    pub p_ec_sim: f64,
    pub p_ec_analytic: f64,
    /// Probability that a run is accepted (the complement drives
    /// re-trials).
    pub accept_prob: f64,
}

/// Simulated and analytic error curves over a damping grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorCurve {
    rows: Vec<ErrorRow>,
}

impl ErrorCurve {
    pub fn rows(&self) -> &[ErrorRow] {
        &self.rows
    }
}

/// Run the lossy machine over a damping grid and score both error
/// definitions against the closed forms. The analytic columns are the
/// `k1 k0 = 10` formulas, the case analyzed in closed form.
pub fn sweep_gamma(selector: &OracleSelector, grid: &[f64]) -> Result<ErrorCurve> {
    let truth = selector.function_type();
    let mut rows = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let config = MachineConfig::new(selector.clone()).gamma(gamma);
        let dist = machine::run_machine(&config)?;
        let accept_prob = dist
            .iter()
            .filter(|(outcome, _)| matches!(classify(outcome), Ok(Verdict::Accept(_))))
            .map(|(_, p)| p)
            .sum::<f64>()
            + 0.0;
        rows.push(ErrorRow {
            gamma,
            p_raw_sim: conditional_error(&dist, truth, ErrorMode::Raw)?,
            p_raw_analytic: p_noec_analytic(gamma)?,
            p_ec_sim: conditional_error(&dist, truth, ErrorMode::Postselected)?,
            p_ec_analytic: p_ec_analytic(gamma)?,
            accept_prob,
        });
    }
    Ok(ErrorCurve { rows })
}
