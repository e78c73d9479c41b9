//! Constructors for the optical components and the truth-table oracle
//! compiler.
//!
//! All gates are built on truncated modes of a common `cutoff` and act on
//! their modes in listed order. Every constructor output commutes with the
//! total photon number (conservative logic) and passes a unitarity check
//! at the 1e-12 level; the Kraus sets pass completeness at the same level.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{self, annihilation, exp_antihermitian, max_abs};

/// Tolerance used by the constructor self-tests.
pub const TOL_CONSTRUCT: f64 = 1e-12;

/// Largest supported oracle width (dual-rail mode count `2(N+1)` stays
/// within the dense budget at cutoff 2).
pub const MAX_ORACLE_INPUTS: usize = 3;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Two-mode beamsplitter `exp[theta (a^dag b - a b^dag)]` on the truncated
/// two-mode space; `a` is the first listed mode. At `theta = pi/4` it maps
/// `|01> -> (|01> + |10>)/sqrt(2)` with real amplitudes.
pub fn beamsplitter(theta: f64, cutoff: usize) -> DMatrix<C64> {
    assert!(theta.is_finite(), "beamsplitter angle must be finite");
    let a = annihilation(cutoff);
    let adag = a.adjoint();
    let g = (adag.kronecker(&a) - a.kronecker(&adag)).map(|z| z * c(theta));
    exp_antihermitian(&g)
}

/// Single-mode phase shifter: diagonal `exp(i phi n)`. The machine's `S`
/// is `phase_shift(pi, ..)`.
pub fn phase_shift(phi: f64, cutoff: usize) -> DMatrix<C64> {
    assert!(phi.is_finite(), "phase must be finite");
    DMatrix::from_fn(cutoff, cutoff, |i, j| {
        if i == j {
            C64::from_polar(1.0, phi * i as f64)
        } else {
            c(0.0)
        }
    })
}

/// Two-mode cross-Kerr cell: diagonal `exp(i chi n_1 n_2)`.
pub fn kerr(chi: f64, cutoff: usize) -> DMatrix<C64> {
    assert!(chi.is_finite(), "Kerr strength must be finite");
    let d = cutoff;
    DMatrix::from_fn(d * d, d * d, |i, j| {
        if i == j {
            let n1 = (i / d) as f64;
            let n2 = (i % d) as f64;
            C64::from_polar(1.0, chi * n1 * n2)
        } else {
            c(0.0)
        }
    })
}

/// Three-mode Fredkin gate on `(a, b, c)` with `c` the control: the
/// controlled beamsplitter `exp[(chi/2)(a^dag b - a b^dag) n_c]`.
///
/// At `chi = pi` the single-photon block with the control set is a
/// quarter-turn, `F|101> = -|011>`, `F|011> = |101>`, and the gate is the
/// identity whenever the control mode is empty. Construction verifies
/// these identities and fails loudly if they do not hold.
pub fn fredkin(chi: f64, cutoff: usize) -> Result<DMatrix<C64>> {
    assert!(chi.is_finite(), "Kerr strength must be finite");
    let d = cutoff;
    let a = annihilation(d);
    let adag = a.adjoint();
    let n = linalg::number_op(d);
    let rot = adag.kronecker(&a) - a.kronecker(&adag);
    let g = rot.kronecker(&n).map(|z| z * c(chi / 2.0));
    let f = exp_antihermitian(&g);

    // contract identities, checked at chi = pi where they are exact
    if (chi - PI).abs() < 1e-15 {
        let basis3 = FockBasis::new(3, d)?;
        let idx = |occ: &[usize]| basis3.index_of(occ).expect("in range");
        let i101 = idx(&[1, 0, 1]);
        let i011 = idx(&[0, 1, 1]);
        let mut dev: f64 = (f[(i011, i101)] + c(1.0)).norm();
        dev = dev.max((f[(i101, i011)] - c(1.0)).norm());
        for na in 0..d.min(2) {
            for nb in 0..d.min(2) {
                let i0 = idx(&[na, nb, 0]);
                dev = dev.max((f[(i0, i0)] - c(1.0)).norm());
            }
        }
        if dev >= TOL_CONSTRUCT {
            return Err(Error::ConstructionSelfTest(format!(
                "Fredkin orientation violates its defining identities (deviation {dev:.3e})"
            )));
        }
    }
    Ok(f)
}

/// Two-mode crossover: the permutation exchanging the occupations of its
/// modes. This is the classical switch of the oracle network.
pub fn crossover(cutoff: usize) -> DMatrix<C64> {
    let d = cutoff;
    let mut m = DMatrix::<C64>::zeros(d * d, d * d);
    for n1 in 0..d {
        for n2 in 0..d {
            m[(n2 * d + n1, n1 * d + n2)] = c(1.0);
        }
    }
    m
}

/// Amplitude-damping Kraus set with coupling `gamma` on a single
/// truncated mode.
///
/// With `eta = e^{-gamma}`, the jump operators are
/// `K_m[n-m, n] = sqrt(C(n,m) eta^{n-m} (1-eta)^m)`; completeness holds
/// exactly on the truncated space. On the two-level block the induced
/// channel is `rho_11 -> eta rho_11`, `rho_01 -> sqrt(eta) rho_01`,
/// `rho_00 -> rho_00 + (1-eta) rho_11`. Zero-loss (`gamma = 0`) returns
/// the single identity operator.
pub fn damping_kraus(gamma: f64, cutoff: usize) -> Result<Vec<DMatrix<C64>>> {
    if gamma < 0.0 {
        return Err(Error::NegativeGamma(gamma));
    }
    let d = cutoff;
    let eta = (-gamma).exp();
    let mut out = Vec::new();
    for m in 0..d {
        let mut k = DMatrix::<C64>::zeros(d, d);
        let mut nonzero = false;
        for n in m..d {
            let w = binomial(n, m) * eta.powi((n - m) as i32) * (1.0 - eta).powi(m as i32);
            if w > 0.0 {
                k[(n - m, n)] = c(w.sqrt());
                nonzero = true;
            }
        }
        if nonzero {
            out.push(k);
        }
    }
    debug_assert!(linalg::kraus_completeness_deviation(&out) < TOL_CONSTRUCT);
    Ok(out)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (k - i) as f64;
    }
    acc
}

/// How a truth table sorts under Deutsch's problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthTableClass {
    /// Constant.
    Type1,
    /// Balanced: exactly half the outputs are one.
    Type2,
    /// Neither constant nor balanced.
    Neither,
}

/// A boolean function on `n_inputs` bits, tabulated over all `2^n` inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    n_inputs: usize,
    values: Vec<bool>,
}

impl TruthTable {
    pub fn new(n_inputs: usize, values: Vec<bool>) -> Result<Self> {
        let expected = 1usize << n_inputs;
        if values.len() != expected {
            return Err(Error::TruthTableLength {
                n_inputs,
                expected,
                got: values.len(),
            });
        }
        Ok(Self { n_inputs, values })
    }

    /// Table of the switch-selector family `f_k(x) = k_0 xor (+)_j k_{j+1} x_j`,
    /// with `bits` given most-significant first, e.g. `[k1, k0]` or
    /// `[k2, k1, k0]`.
    pub fn from_selector_bits(bits: &[bool]) -> Self {
        let n_inputs = bits.len() - 1;
        let k0 = bits[n_inputs];
        let values = (0..1usize << n_inputs)
            .map(|x| {
                let mut f = k0;
                for j in 0..n_inputs {
                    let kj = bits[n_inputs - 1 - j];
                    f ^= kj && (x >> j) & 1 == 1;
                }
                f
            })
            .collect();
        Self { n_inputs, values }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn value(&self, x: usize) -> bool {
        self.values[x]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn classify(&self) -> TruthTableClass {
        let ones = self.values.iter().filter(|v| **v).count();
        if ones == 0 || ones == self.values.len() {
            TruthTableClass::Type1
        } else if 2 * ones == self.values.len() {
            TruthTableClass::Type2
        } else {
            TruthTableClass::Neither
        }
    }
}

/// Dual-rail mode count used by a compiled oracle: one `(one-rail,
/// zero-rail)` pair for the scratch qubit followed by one pair per input,
/// most significant input first.
pub fn oracle_mode_count(n_inputs: usize) -> usize {
    2 * (n_inputs + 1)
}

/// Compile a truth table into the permutation `|x, y> -> |x, y xor f(x)>`
/// on the full Fock basis of `2(N+1)` dual-rail modes.
///
/// A basis state whose input pairs all hold exactly one photon decodes to
/// an input `x`; if `f(x) = 1` the scratch pair's occupations are
/// exchanged, otherwise the state is untouched. States with an undecodable
/// input pair pass through unchanged, which keeps the matrix a self-inverse
/// permutation on the whole space.
pub fn compile_oracle(table: &TruthTable, cutoff: usize) -> Result<DMatrix<C64>> {
    if table.n_inputs() == 0 || table.n_inputs() > MAX_ORACLE_INPUTS {
        return Err(Error::UnsupportedOracleWidth {
            n_inputs: table.n_inputs(),
            max: MAX_ORACLE_INPUTS,
        });
    }
    let n = table.n_inputs();
    let basis = FockBasis::new(oracle_mode_count(n), cutoff)?;
    let mut m = DMatrix::<C64>::zeros(basis.dim(), basis.dim());
    for src in 0..basis.dim() {
        let occ = basis.occupations_of(src);
        let tgt = match decode_input(&occ, n) {
            Some(x) if table.value(x) => {
                let mut flipped = occ.clone();
                flipped.swap(0, 1);
                basis.index_of(&flipped)?
            }
            _ => src,
        };
        m[(tgt, src)] = c(1.0);
    }
    Ok(m)
}

/// Decode the input register from dual-rail occupations: pair `j` (most
/// significant first) sits on modes `(2+2j, 3+2j)`; `(1,0)` is one and
/// `(0,1)` is zero. Returns `None` if any pair is not in a logical state.
fn decode_input(occ: &[usize], n_inputs: usize) -> Option<usize> {
    let mut x = 0usize;
    for j in 0..n_inputs {
        let one_rail = occ[2 + 2 * j];
        let zero_rail = occ[3 + 2 * j];
        let bit = match (one_rail, zero_rail) {
            (1, 0) => 1,
            (0, 1) => 0,
            _ => return None,
        };
        // pair 0 is the most significant input
        x |= bit << (n_inputs - 1 - j);
    }
    Some(x)
}

/// One gate or channel kind with its parameters, not yet bound to modes.
#[derive(Clone, Debug, PartialEq)]
pub enum GateSpec {
    Beamsplitter { theta: f64 },
    Phase { phi: f64 },
    Kerr { chi: f64 },
    Fredkin { chi: f64 },
    Damp { gamma: f64 },
    /// Classical crossover switch (wire exchange).
    Swap,
    Oracle { table: TruthTable },
}

/// A gate's realization on truncated modes: a unitary matrix or a Kraus set.
#[derive(Clone, Debug)]
pub enum LocalOperator {
    Unitary(DMatrix<C64>),
    Channel(Vec<DMatrix<C64>>),
}

impl GateSpec {
    /// Number of modes the gate acts on.
    pub fn arity(&self) -> usize {
        match self {
            GateSpec::Beamsplitter { .. } | GateSpec::Kerr { .. } | GateSpec::Swap => 2,
            GateSpec::Phase { .. } | GateSpec::Damp { .. } => 1,
            GateSpec::Fredkin { .. } => 3,
            GateSpec::Oracle { table } => oracle_mode_count(table.n_inputs()),
        }
    }

    /// Build the local operator at the given cutoff.
    pub fn build(&self, cutoff: usize) -> Result<LocalOperator> {
        Ok(match self {
            GateSpec::Beamsplitter { theta } => {
                LocalOperator::Unitary(beamsplitter(*theta, cutoff))
            }
            GateSpec::Phase { phi } => LocalOperator::Unitary(phase_shift(*phi, cutoff)),
            GateSpec::Kerr { chi } => LocalOperator::Unitary(kerr(*chi, cutoff)),
            GateSpec::Fredkin { chi } => LocalOperator::Unitary(fredkin(*chi, cutoff)?),
            GateSpec::Damp { gamma } => LocalOperator::Channel(damping_kraus(*gamma, cutoff)?),
            GateSpec::Swap => LocalOperator::Unitary(crossover(cutoff)),
            GateSpec::Oracle { table } => LocalOperator::Unitary(compile_oracle(table, cutoff)?),
        })
    }

    /// The adjoint gate, when one exists (channels have none).
    pub fn adjoint(&self) -> Option<GateSpec> {
        match self {
            GateSpec::Beamsplitter { theta } => Some(GateSpec::Beamsplitter { theta: -theta }),
            GateSpec::Phase { phi } => Some(GateSpec::Phase { phi: -phi }),
            GateSpec::Kerr { chi } => Some(GateSpec::Kerr { chi: -chi }),
            GateSpec::Fredkin { chi } => Some(GateSpec::Fredkin { chi: -chi }),
            GateSpec::Swap => Some(GateSpec::Swap),
            GateSpec::Oracle { table } => Some(GateSpec::Oracle {
                table: table.clone(),
            }),
            GateSpec::Damp { .. } => None,
        }
    }
}

/// Max-entry norm of `[U, N_tot]` where `N_tot` is the total photon number
/// on `n_modes` truncated modes; zero for conservative (photon-conserving)
/// optics.
pub fn number_commutator_deviation(u: &DMatrix<C64>, n_modes: usize, cutoff: usize) -> f64 {
    let basis = FockBasis::new(n_modes, cutoff).expect("small basis");
    assert_eq!(u.nrows(), basis.dim());
    let n_tot = DMatrix::from_fn(basis.dim(), basis.dim(), |i, j| {
        if i == j {
            c(basis.occupations_of(i).iter().sum::<usize>() as f64)
        } else {
            c(0.0)
        }
    });
    max_abs(&(u * &n_tot - n_tot * u))
}
