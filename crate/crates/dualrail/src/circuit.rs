//! Circuits: an initial state and an ordered list of gates or channels
//! bound to modes, evaluated over a truncated Fock basis.
//!
//! Evaluation starts in the pure-state representation and promotes to a
//! density operator at the first channel element; unitary-only circuits
//! never pay the density-matrix cost.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    coherent_product, embed_operator, DensityOp, FockBasis, FockVector, OutcomeDist,
};
use crate::ops::{GateSpec, LocalOperator};

/// Initial-state specification.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// A photon-number eigenstate, one occupation per mode.
    Fock(Vec<usize>),
    /// Per-mode coherent amplitudes; `None` is vacuum.
    Coherent(Vec<Option<C64>>),
}

/// One gate or channel bound to a subset of modes (in listed order).
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitElement {
    pub spec: GateSpec,
    pub modes: Vec<usize>,
}

impl CircuitElement {
    pub fn new(spec: GateSpec, modes: Vec<usize>) -> Self {
        Self { spec, modes }
    }
}

/// Either state representation, as produced by circuit evaluation.
#[derive(Clone, Debug)]
pub enum State {
    Pure(FockVector),
    Mixed(DensityOp),
}

impl State {
    pub fn measure_counts(&self) -> Result<OutcomeDist> {
        match self {
            State::Pure(v) => v.measure_counts(),
            State::Mixed(r) => r.measure_counts(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, State::Pure(_))
    }

    /// The pure state, if this is one.
    pub fn as_vector(&self) -> Option<&FockVector> {
        match self {
            State::Pure(v) => Some(v),
            State::Mixed(_) => None,
        }
    }

    pub fn as_density(&self) -> Option<&DensityOp> {
        match self {
            State::Mixed(r) => Some(r),
            State::Pure(_) => None,
        }
    }
}

/// An executable circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    basis: FockBasis,
    initial: InitialState,
    elements: Vec<CircuitElement>,
}

impl Circuit {
    pub fn new(
        basis: FockBasis,
        initial: InitialState,
        elements: Vec<CircuitElement>,
    ) -> Result<Self> {
        match &initial {
            InitialState::Fock(occ) => {
                basis.index_of(occ)?;
            }
            InitialState::Coherent(alphas) => {
                if alphas.len() != basis.num_modes() {
                    return Err(Error::MalformedOutcome {
                        got: alphas.len(),
                        expected: basis.num_modes(),
                    });
                }
            }
        }
        for el in &elements {
            check_element(&basis, el)?;
        }
        Ok(Self {
            basis,
            initial,
            elements,
        })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    /// Count the elements matching a predicate (handy for structural tests).
    pub fn count_elements(&self, mut pred: impl FnMut(&CircuitElement) -> bool) -> usize {
        self.elements.iter().filter(|e| pred(e)).count()
    }

    /// Construct the initial state vector.
    pub fn initial_state(&self) -> Result<FockVector> {
        match &self.initial {
            InitialState::Fock(occ) => FockVector::basis_state(self.basis, occ),
            InitialState::Coherent(alphas) => coherent_product(self.basis, alphas),
        }
    }

    /// Run to the final state.
    pub fn run(&self) -> Result<State> {
        let mut state = State::Pure(self.initial_state()?);
        for el in &self.elements {
            state = apply_element(state, el, self.basis.cutoff())?;
        }
        Ok(state)
    }

    /// Run and keep every intermediate state; entry `i` is the state after
    /// the first `i` elements (entry 0 is the initial state).
    pub fn run_trace(&self) -> Result<Vec<State>> {
        let mut states = vec![State::Pure(self.initial_state()?)];
        for el in &self.elements {
            let next = apply_element(states.last().unwrap().clone(), el, self.basis.cutoff())?;
            states.push(next);
        }
        Ok(states)
    }

    /// Run and measure photon counts on all modes.
    pub fn measure(&self) -> Result<OutcomeDist> {
        self.run()?.measure_counts()
    }

    /// Product of all embedded element unitaries (rightmost applied
    /// first). Fails on channel elements.
    pub fn total_unitary(&self) -> Result<DMatrix<C64>> {
        let dim = self.basis.dim();
        let mut total = DMatrix::<C64>::identity(dim, dim);
        for el in &self.elements {
            match el.spec.build(self.basis.cutoff())? {
                LocalOperator::Unitary(local) => {
                    let full = embed_operator(&local, &el.modes, &self.basis)?;
                    total = full * total;
                }
                LocalOperator::Channel(_) => {
                    return Err(Error::UnsupportedConfig(
                        "total_unitary undefined for circuits with channels".into(),
                    ))
                }
            }
        }
        Ok(total)
    }
}

fn check_element(basis: &FockBasis, el: &CircuitElement) -> Result<()> {
    let arity_ok = match &el.spec {
        // a damping element may bind one mode or a pair
        GateSpec::Damp { .. } => el.modes.len() == 1 || el.modes.len() == 2,
        spec => el.modes.len() == spec.arity(),
    };
    if !arity_ok {
        return Err(Error::MalformedOutcome {
            got: el.modes.len(),
            expected: el.spec.arity(),
        });
    }
    for (i, &m) in el.modes.iter().enumerate() {
        if m >= basis.num_modes() {
            return Err(Error::ModeOutOfRange {
                mode: m,
                num_modes: basis.num_modes(),
            });
        }
        if el.modes[..i].contains(&m) {
            return Err(Error::RepeatedMode { mode: m });
        }
    }
    Ok(())
}

fn apply_element(state: State, el: &CircuitElement, cutoff: usize) -> Result<State> {
    match el.spec.build(cutoff)? {
        LocalOperator::Unitary(local) => match state {
            State::Pure(v) => Ok(State::Pure(v.apply_local_unitary(&local, &el.modes)?)),
            State::Mixed(r) => Ok(State::Mixed(r.apply_local_unitary(&local, &el.modes)?)),
        },
        LocalOperator::Channel(kraus) => {
            let rho = match state {
                State::Pure(v) => v.to_density()?,
                State::Mixed(r) => r,
            };
            // a pair-bound damp acts independently on each mode
            let mut rho = rho;
            for &mode in &el.modes {
                rho = rho.apply_local_channel(&kraus, &[mode])?;
            }
            Ok(State::Mixed(rho))
        }
    }
}
