//! The complete dual-rail Deutsch-Jozsa machine.
//!
//! Mode layout for the one-bit machine (states written `|abcd>`): modes
//! `a, b` hold the scratch qubit, modes `c, d` the input qubit, with
//! `|01>` logical zero and `|10>` logical one on each pair. Alice sends
//! single photons into `b` and `d`, splits the input qubit on a
//! beamsplitter, passes both qubits to Bob's switch network (a Fredkin
//! cell built as a Kerr-loaded Mach-Zehnder when `k1` is set, a crossover
//! when `k0` is set), applies a pi phase shift to mode `a`, lets Bob
//! undo his transform, recombines on the final beamsplitter, and counts
//! photons. The detector on mode `d` then announces the function type.
//!
//! Bob's pass enters through `B_ab`, applies the Kerr cell against mode
//! `c`, and exits through `B_ab^dag`; with loss, the damping on modes `b`
//! and `c` sits between the entry beamsplitter and the Kerr cell of the
//! second pass. This ordering reproduces both of the closed-form error
//! curves in [`crate::postselect`] exactly.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use num_complex::Complex64 as C64;

use crate::circuit::{Circuit, CircuitElement, InitialState, State};
use crate::error::{Error, Result};
use crate::fock::{required_coherent_cutoff, FockBasis, FockVector, OutcomeDist};
use crate::ops::{GateSpec, TruthTable, TruthTableClass};
use crate::postselect::{self, Verdict};

/// Mode indices of the one-bit machine.
pub const MODE_A: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_C: usize = 2;
pub const MODE_D: usize = 3;

/// Deutsch's two classes: constant or balanced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionType {
    Type1,
    Type2,
}

impl fmt::Display for FunctionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionType::Type1 => write!(f, "type1"),
            FunctionType::Type2 => write!(f, "type2"),
        }
    }
}

/// Bob's secret switch settings: `k1 k0` for the one-bit problem or
/// `k2 k1 k0` for the two-bit problem, most significant bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSelector {
    bits: Vec<bool>,
}

impl OracleSelector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.len() < 2 || bits.len() > 3 {
            return Err(Error::UnsupportedConfig(format!(
                "selector needs 2 bits (k1 k0) or 3 bits (k2 k1 k0), got {}",
                bits.len()
            )));
        }
        Ok(Self { bits })
    }

    /// Parse a bit string such as `"10"` or `"010"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bits: Result<Vec<bool>> = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::UnsupportedConfig(format!(
                    "selector bits must be 0 or 1, got '{other}'"
                ))),
            })
            .collect();
        Self::new(bits?)
    }

    /// Number of input bits of the selected function family.
    pub fn n_inputs(&self) -> usize {
        self.bits.len() - 1
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// `k0`: the constant-offset switch.
    pub fn k0(&self) -> bool {
        self.bits[self.bits.len() - 1]
    }

    /// `k1`: for the one-bit machine, the Fredkin-path switch.
    pub fn k1(&self) -> bool {
        self.bits[self.bits.len() - 2]
    }

    pub fn truth_table(&self) -> TruthTable {
        TruthTable::from_selector_bits(&self.bits)
    }

    /// The class of the selected function (always constant or balanced
    /// for the switch family).
    pub fn function_type(&self) -> FunctionType {
        match self.truth_table().classify() {
            TruthTableClass::Type1 => FunctionType::Type1,
            TruthTableClass::Type2 => FunctionType::Type2,
            TruthTableClass::Neither => unreachable!("selector family is affine"),
        }
    }
}

impl fmt::Display for OracleSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", if *b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// What Alice feeds into the logical-one rails.
#[derive(Clone, Debug, PartialEq)]
pub enum InputKind {
    /// Single-photon eigenstates (the quantum mode of operation).
    SinglePhoton,
    /// Coherent states `|alpha>`, truncated at `cutoff`.
    Coherent { alpha: C64, cutoff: usize },
}

/// Full configuration of one machine run.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineConfig {
    pub selector: OracleSelector,
    pub with_s: bool,
    pub gamma: f64,
    pub chi: f64,
    pub input: InputKind,
}

impl MachineConfig {
    /// Lossless single-photon machine with `S` in place and `chi = pi`.
    pub fn new(selector: OracleSelector) -> Self {
        Self {
            selector,
            with_s: true,
            gamma: 0.0,
            chi: PI,
            input: InputKind::SinglePhoton,
        }
    }

    pub fn with_s(mut self, with_s: bool) -> Self {
        self.with_s = with_s;
        self
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn coherent(mut self, alpha: C64, cutoff: usize) -> Self {
        self.input = InputKind::Coherent { alpha, cutoff };
        self
    }

    fn validate(&self) -> Result<()> {
        if self.gamma < 0.0 {
            return Err(Error::NegativeGamma(self.gamma));
        }
        if !self.chi.is_finite() {
            return Err(Error::UnsupportedConfig("chi must be finite".into()));
        }
        if self.selector.n_inputs() == 2 {
            if self.gamma > 0.0 {
                return Err(Error::UnsupportedConfig(
                    "loss model is defined for the one-bit machine only".into(),
                ));
            }
            if (self.chi - PI).abs() > 1e-12 {
                return Err(Error::UnsupportedConfig(
                    "the compiled two-bit oracle has no Kerr-strength parameter".into(),
                ));
            }
        }
        Ok(())
    }
}

/// The six labelled stages of a run.
const STAGES: usize = 6;

/// The labelled states `psi_0 .. psi_5` of one machine execution. Pure
/// vectors throughout a lossless run; density operators from the loss
/// point onward when `gamma > 0`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    states: Vec<State>,
}

impl Trajectory {
    /// State `psi_i`, `i` in `0..=5`.
    pub fn psi(&self, i: usize) -> &State {
        &self.states[i]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    /// The pure state `psi_i`, if the run was lossless up to that point.
    pub fn pure(&self, i: usize) -> Option<&FockVector> {
        self.states[i].as_vector()
    }
}

/// One stage of the machine between trajectory checkpoints.
fn stage_elements(config: &MachineConfig, stage: usize) -> Result<Vec<CircuitElement>> {
    let bs = |theta: f64, m1: usize, m2: usize| {
        CircuitElement::new(GateSpec::Beamsplitter { theta }, vec![m1, m2])
    };
    let n = config.selector.n_inputs();
    let mut out = Vec::new();
    match (n, stage) {
        // stage 1: split the input qubit(s)
        (1, 1) => out.push(bs(FRAC_PI_4, MODE_C, MODE_D)),
        (2, 1) => {
            out.push(bs(FRAC_PI_4, 2, 3));
            out.push(bs(FRAC_PI_4, 4, 5));
        }
        // stage 2: Bob's forward transform
        (1, 2) => {
            if config.selector.k1() {
                out.push(bs(FRAC_PI_4, MODE_A, MODE_B));
                out.push(CircuitElement::new(
                    GateSpec::Kerr { chi: config.chi },
                    vec![MODE_B, MODE_C],
                ));
                out.push(bs(-FRAC_PI_4, MODE_A, MODE_B));
            }
            if config.selector.k0() {
                out.push(CircuitElement::new(GateSpec::Swap, vec![MODE_A, MODE_B]));
            }
        }
        (2, 2) => out.push(CircuitElement::new(
            GateSpec::Oracle {
                table: config.selector.truth_table(),
            },
            (0..6).collect(),
        )),
        // stage 3: Alice's phase shift on mode a
        (_, 3) => {
            if config.with_s {
                out.push(CircuitElement::new(GateSpec::Phase { phi: PI }, vec![MODE_A]));
            }
        }
        // stage 4: Bob's inverse transform, lossy on the one-bit machine
        (1, 4) => {
            if config.selector.k0() {
                out.push(CircuitElement::new(GateSpec::Swap, vec![MODE_A, MODE_B]));
            }
            if config.selector.k1() {
                out.push(bs(FRAC_PI_4, MODE_A, MODE_B));
                if config.gamma > 0.0 {
                    out.push(CircuitElement::new(
                        GateSpec::Damp {
                            gamma: config.gamma,
                        },
                        vec![MODE_B],
                    ));
                    out.push(CircuitElement::new(
                        GateSpec::Damp {
                            gamma: config.gamma,
                        },
                        vec![MODE_C],
                    ));
                }
                out.push(CircuitElement::new(
                    GateSpec::Kerr { chi: -config.chi },
                    vec![MODE_B, MODE_C],
                ));
                out.push(bs(-FRAC_PI_4, MODE_A, MODE_B));
            } else if config.gamma > 0.0 {
                // Bob's apparatus is empty but the lossy medium still
                // sits in the beam path
                out.push(CircuitElement::new(
                    GateSpec::Damp {
                        gamma: config.gamma,
                    },
                    vec![MODE_B],
                ));
                out.push(CircuitElement::new(
                    GateSpec::Damp {
                        gamma: config.gamma,
                    },
                    vec![MODE_C],
                ));
            }
        }
        (2, 4) => out.push(CircuitElement::new(
            GateSpec::Oracle {
                table: config.selector.truth_table(),
            },
            (0..6).collect(),
        )),
        // stage 5: decorrelate and measure
        (1, 5) => out.push(bs(-FRAC_PI_4, MODE_C, MODE_D)),
        (2, 5) => {
            out.push(bs(-FRAC_PI_4, 2, 3));
            out.push(bs(-FRAC_PI_4, 4, 5));
        }
        _ => {}
    }
    Ok(out)
}

fn machine_parts(config: &MachineConfig, cutoff: usize) -> Result<(Circuit, Vec<usize>)> {
    config.validate()?;
    let n = config.selector.n_inputs();
    let num_modes = 2 * (n + 1);
    let basis = FockBasis::new(num_modes, cutoff)?;

    // logical zero on every qubit: photons in the zero rails (odd modes)
    let initial = match &config.input {
        InputKind::SinglePhoton => {
            let occ = (0..num_modes).map(|m| m % 2).collect();
            InitialState::Fock(occ)
        }
        InputKind::Coherent { alpha, .. } => {
            let alphas = (0..num_modes)
                .map(|m| if m % 2 == 1 { Some(*alpha) } else { None })
                .collect();
            InitialState::Coherent(alphas)
        }
    };

    let mut elements = Vec::new();
    let mut boundaries = Vec::with_capacity(STAGES - 1);
    for stage in 1..STAGES {
        elements.extend(stage_elements(config, stage)?);
        boundaries.push(elements.len());
    }
    let circuit = Circuit::new(basis, initial, elements)?;
    Ok((circuit, boundaries))
}

/// Build the machine circuit at its native cutoff: 2 for single-photon
/// runs, the configured cutoff for coherent input.
pub fn build_machine(config: &MachineConfig) -> Result<Circuit> {
    let cutoff = match &config.input {
        InputKind::SinglePhoton => 2,
        InputKind::Coherent { alpha, cutoff } => {
            let required = required_coherent_cutoff(*alpha, crate::fock::COHERENT_TAIL_BOUND);
            if *cutoff < required {
                return Err(Error::CutoffTooSmall {
                    cutoff: *cutoff,
                    alpha_mag: alpha.norm(),
                    tail: f64::NAN,
                    bound: crate::fock::COHERENT_TAIL_BOUND,
                    required,
                });
            }
            *cutoff
        }
    };
    build_machine_with_cutoff(config, cutoff)
}

/// Build the machine at an explicit cutoff (the observable physics of the
/// single-photon machine is cutoff-independent from 2 upward).
pub fn build_machine_with_cutoff(config: &MachineConfig, cutoff: usize) -> Result<Circuit> {
    Ok(machine_parts(config, cutoff)?.0)
}

/// Run the machine and return the six labelled states.
pub fn run_trajectory(config: &MachineConfig) -> Result<Trajectory> {
    if !matches!(config.input, InputKind::SinglePhoton) {
        return Err(Error::UnsupportedConfig(
            "trajectories are defined for single-photon input".into(),
        ));
    }
    let (circuit, boundaries) = machine_parts(config, 2)?;
    let trace = circuit.run_trace()?;
    let mut states = Vec::with_capacity(STAGES);
    states.push(trace[0].clone());
    for b in boundaries {
        states.push(trace[b].clone());
    }
    Ok(Trajectory { states })
}

/// Run the machine and measure photon counts on all modes.
pub fn run_machine(config: &MachineConfig) -> Result<OutcomeDist> {
    build_machine(config)?.measure()
}

/// Total unitary of Bob's forward transform (the switch network alone)
/// on the one-bit machine's four-mode space at cutoff 2.
pub fn switch_network_unitary(
    selector: &OracleSelector,
    chi: f64,
) -> Result<nalgebra::DMatrix<C64>> {
    if selector.n_inputs() != 1 {
        return Err(Error::UnsupportedConfig(
            "the switch network is the one-bit machine's oracle".into(),
        ));
    }
    let config = MachineConfig::new(selector.clone()).chi(chi);
    let basis = FockBasis::new(4, 2)?;
    let forward = Circuit::new(
        basis,
        InitialState::Fock(vec![0, 1, 0, 1]),
        stage_elements(&config, 2)?,
    )?;
    forward.total_unitary()
}

/// The deterministic outcome tuple of a lossless run at `chi = pi`.
pub fn expected_outcome(selector: &OracleSelector, with_s: bool) -> Vec<usize> {
    let n = selector.n_inputs();
    let mut occ: Vec<usize> = (0..2 * (n + 1)).map(|m| m % 2).collect();
    if with_s {
        // pair j of the input register reads back switch bit k_{j+1}
        for j in 0..n {
            if selector.bits[j] {
                occ[2 + 2 * j] = 1;
                occ[3 + 2 * j] = 0;
            }
        }
    }
    occ
}

/// Read Alice's answer from an accepted outcome: the mode-`d` count `z`
/// gives type 1 for `z = 1` and type 2 for `z = 0`. Rejected outcomes are
/// a contract error.
pub fn read_answer_outcome(outcome: &[usize]) -> Result<FunctionType> {
    match postselect::classify(outcome)? {
        Verdict::Accept(t) => Ok(t),
        Verdict::Reject(reason) => Err(Error::RejectedOutcome(format!(
            "{outcome:?} rejected: {reason}"
        ))),
    }
}

/// Decode the function type announced by a legal outcome of the
/// `N`-input machine: every dual-rail pair must hold exactly one photon,
/// the scratch must read logical zero, and the type is 1 exactly when the
/// input register reads all zeros. Returns `None` for illegal outcomes.
pub fn decode_outcome(outcome: &[usize]) -> Option<FunctionType> {
    if outcome.len() < 4 || !outcome.len().is_multiple_of(2) {
        return None;
    }
    if outcome[0] != 0 || outcome[1] != 1 {
        return None;
    }
    let mut any_one = false;
    for pair in outcome[2..].chunks(2) {
        match (pair[0], pair[1]) {
            (0, 1) => {}
            (1, 0) => any_one = true,
            _ => return None,
        }
    }
    Some(if any_one {
        FunctionType::Type2
    } else {
        FunctionType::Type1
    })
}

/// Read the answer from a measured distribution, post-selecting on the
/// accepted outcomes. Errors when no accepted outcome carries any
/// probability.
pub fn read_answer(dist: &OutcomeDist) -> Result<FunctionType> {
    let mut p1 = 0.0;
    let mut p2 = 0.0;
    for (outcome, p) in dist.iter() {
        if let Verdict::Accept(t) = postselect::classify(outcome)? {
            match t {
                FunctionType::Type1 => p1 += p,
                FunctionType::Type2 => p2 += p,
            }
        }
    }
    if p1 + p2 <= 0.0 {
        return Err(Error::RejectedOutcome(
            "distribution has no accepted outcomes".into(),
        ));
    }
    Ok(if p1 >= p2 {
        FunctionType::Type1
    } else {
        FunctionType::Type2
    })
}

/// One row of a Kerr-strength sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSweepRow {
    pub chi: f64,
    /// Probability that the raw mode-`d` readout names the true type.
    pub p_correct_raw: f64,
    /// Probability of the true type among accepted outcomes.
    pub p_correct_postselected: f64,
}

/// Sweep the Kerr strength of a lossless single-photon machine and score
/// the answer against the selected function's true type, both raw and
/// post-selected.
pub fn chi_sweep(
    selector: &OracleSelector,
    chis: &[f64],
    with_s: bool,
) -> Result<Vec<ChiSweepRow>> {
    let truth = selector.function_type();
    let expected_z = match truth {
        FunctionType::Type1 => 1,
        FunctionType::Type2 => 0,
    };
    let mut rows = Vec::with_capacity(chis.len());
    for &chi in chis {
        let config = MachineConfig::new(selector.clone()).with_s(with_s).chi(chi);
        let dist = run_machine(&config)?;
        // the `+ 0.0` turns an empty sum's negative zero into plain zero
        let p_correct_raw = dist
            .iter()
            .filter(|(outcome, _)| outcome[MODE_D] == expected_z)
            .map(|(_, p)| p)
            .sum::<f64>()
            + 0.0;
        let mut accepted = 0.0;
        let mut correct = 0.0;
        for (outcome, p) in dist.iter() {
            if let Verdict::Accept(t) = postselect::classify(outcome)? {
                accepted += p;
                if t == truth {
                    correct += p;
                }
            }
        }
        let p_correct_postselected = if accepted > 0.0 { correct / accepted } else { 0.0 };
        rows.push(ChiSweepRow {
            chi,
            p_correct_raw,
            p_correct_postselected,
        });
    }
    Ok(rows)
}

/// Outcome of one classical (coherent-light) run: the final field
/// amplitudes and the photon statistics they imply.
#[derive(Clone, Debug)]
pub struct ClassicalRun {
    /// Final per-mode field amplitudes.
    pub fields: Vec<C64>,
    /// Joint count distribution over modes `c` and `d`.
    pub joint_cd: OutcomeDist,
    /// Per-mode count marginals, indexed by mode then count.
    pub marginals: Vec<Vec<f64>>,
}

/// Side-by-side classical runs with and without the phase shift `S`.
#[derive(Clone, Debug)]
pub struct ClassicalComparison {
    pub with_s: ClassicalRun,
    pub without_s: ClassicalRun,
    /// Total-variation distance between the two mode-`d` distributions.
    pub tv_mode_d: f64,
}

/// Run the machine classically: coherent fields propagate as complex
/// amplitudes and the Kerr cells impart the classical cross-phase
/// `chi * |beta|^2` from the other mode's intensity. This is the
/// classical-optics model of the device, in which the measurement results
/// are provably independent of `S`; the exact quantum evolution of
/// coherent inputs (available through [`build_machine`] with
/// [`InputKind::Coherent`]) does not share that null result, because the
/// quantum Kerr cell is sensitive to photon-number parity rather than
/// intensity.
pub fn run_classical(config: &MachineConfig) -> Result<ClassicalComparison> {
    let (alpha, cutoff) = match &config.input {
        InputKind::Coherent { alpha, cutoff } => (*alpha, *cutoff),
        InputKind::SinglePhoton => {
            return Err(Error::UnsupportedConfig(
                "classical operation needs a coherent input".into(),
            ))
        }
    };
    if config.selector.n_inputs() != 1 {
        return Err(Error::UnsupportedConfig(
            "classical operation is modelled for the one-bit machine".into(),
        ));
    }
    let with_s = classical_run(&config.clone().with_s(true), alpha, cutoff)?;
    let without_s = classical_run(&config.clone().with_s(false), alpha, cutoff)?;
    let tv = tv_distance(&with_s.marginals[MODE_D], &without_s.marginals[MODE_D]);
    Ok(ClassicalComparison {
        with_s,
        without_s,
        tv_mode_d: tv,
    })
}

fn classical_run(config: &MachineConfig, alpha: C64, cutoff: usize) -> Result<ClassicalRun> {
    config.validate()?;
    let mut fields = vec![C64::new(0.0, 0.0); 4];
    fields[MODE_B] = alpha;
    fields[MODE_D] = alpha;
    for stage in 1..STAGES {
        for el in stage_elements(config, stage)? {
            apply_classical(&mut fields, &el)?;
        }
    }

    let mut marginals = Vec::with_capacity(4);
    for beta in &fields {
        marginals.push(poisson_counts(*beta, cutoff)?);
    }
    let mut entries = std::collections::BTreeMap::new();
    for (nc, pc) in marginals[MODE_C].iter().enumerate() {
        for (nd, pd) in marginals[MODE_D].iter().enumerate() {
            let p = pc * pd;
            if p > 0.0 {
                entries.insert(vec![nc, nd], p);
            }
        }
    }
    Ok(ClassicalRun {
        fields,
        joint_cd: OutcomeDist::from_entries(entries),
        marginals,
    })
}

fn apply_classical(fields: &mut [C64], el: &CircuitElement) -> Result<()> {
    match &el.spec {
        GateSpec::Beamsplitter { theta } => {
            let (i, j) = (el.modes[0], el.modes[1]);
            let (bi, bj) = (fields[i], fields[j]);
            fields[i] = bi * theta.cos() + bj * theta.sin();
            fields[j] = -bi * theta.sin() + bj * theta.cos();
        }
        GateSpec::Phase { phi } => {
            fields[el.modes[0]] *= C64::from_polar(1.0, *phi);
        }
        GateSpec::Kerr { chi } => {
            let (i, j) = (el.modes[0], el.modes[1]);
            let (ii, ij) = (fields[i].norm_sqr(), fields[j].norm_sqr());
            fields[i] *= C64::from_polar(1.0, chi * ij);
            fields[j] *= C64::from_polar(1.0, chi * ii);
        }
        GateSpec::Swap => {
            fields.swap(el.modes[0], el.modes[1]);
        }
        GateSpec::Damp { gamma } => {
            for &m in &el.modes {
                fields[m] *= C64::new((-gamma / 2.0).exp(), 0.0);
            }
        }
        GateSpec::Fredkin { .. } | GateSpec::Oracle { .. } => {
            return Err(Error::UnsupportedConfig(
                "classical fields only propagate through linear elements and Kerr cells".into(),
            ))
        }
    }
    Ok(())
}

/// Truncated, renormalized Poissonian counting statistics of a classical
/// field, with the tail bound enforced.
fn poisson_counts(beta: C64, cutoff: usize) -> Result<Vec<f64>> {
    let amps = crate::fock::coherent_amplitudes(beta, cutoff, crate::fock::COHERENT_TAIL_BOUND)?;
    Ok(amps.iter().map(|a| a.norm_sqr()).collect())
}

fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (get(a, i) - get(b, i)).abs()).sum::<f64>()
}
