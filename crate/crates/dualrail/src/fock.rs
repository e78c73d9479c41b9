//! Truncated multimode Fock-space representation.
//!
//! States live on `num_modes` optical modes, each truncated to occupations
//! `0..cutoff`. Basis states are labelled by occupation tuples and indexed
//! big-endian mixed-radix (the first mode is the most significant digit),
//! so at cutoff 2 the ket `|0101>` sits at index 5 and four-mode states
//! read off directly as binary strings.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance for unitarity of operators fed to `apply_unitary`.
pub const TOL_UNITARY: f64 = 1e-10;
/// Tolerance for Kraus-set completeness.
pub const TOL_KRAUS: f64 = 1e-10;
/// Default bound on the truncated tail of a coherent state.
pub const COHERENT_TAIL_BOUND: f64 = 1e-10;

/// Largest dimension for which full-space dense operators are built.
pub const EMBED_BUDGET: usize = 1024;
/// Largest dimension for state vectors.
pub const VECTOR_BUDGET: usize = 1 << 20;

/// A truncated multimode Fock basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockBasis {
    num_modes: usize,
    cutoff: usize,
    dim: usize,
}

impl FockBasis {
    /// Basis of `num_modes` modes, each with occupations `0..cutoff`.
    pub fn new(num_modes: usize, cutoff: usize) -> Result<Self> {
        assert!(num_modes >= 1, "need at least one mode");
        assert!(cutoff >= 1, "cutoff must be positive");
        let dim = cutoff
            .checked_pow(num_modes as u32)
            .filter(|d| *d <= VECTOR_BUDGET)
            .ok_or(Error::DimensionBudget {
                dim: usize::MAX,
                budget: VECTOR_BUDGET,
            })?;
        Ok(Self {
            num_modes,
            cutoff,
            dim,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Total dimension `cutoff ^ num_modes`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stride of `mode` in the big-endian mixed-radix index.
    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.num_modes - 1 - mode) as u32)
    }

    /// Index of an occupation tuple: `sum_i n_i * cutoff^(m-1-i)`.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.num_modes {
            return Err(Error::MalformedOutcome {
                got: occupations.len(),
                expected: self.num_modes,
            });
        }
        let mut idx = 0;
        for (mode, &n) in occupations.iter().enumerate() {
            if n >= self.cutoff {
                return Err(Error::OccupationOutOfRange {
                    mode,
                    occupation: n as u32,
                    cutoff: self.cutoff,
                });
            }
            idx = idx * self.cutoff + n;
        }
        Ok(idx)
    }

    /// Occupation tuple of a basis index; inverse of [`index_of`](Self::index_of).
    pub fn occupations_of(&self, index: usize) -> Vec<usize> {
        assert!(index < self.dim, "basis index out of range");
        let mut occ = vec![0; self.num_modes];
        let mut rest = index;
        for mode in (0..self.num_modes).rev() {
            occ[mode] = rest % self.cutoff;
            rest /= self.cutoff;
        }
        occ
    }

    fn check_modes(&self, modes: &[usize]) -> Result<()> {
        if modes.is_empty() {
            return Err(Error::EmptyModeList);
        }
        for (i, &m) in modes.iter().enumerate() {
            if m >= self.num_modes {
                return Err(Error::ModeOutOfRange {
                    mode: m,
                    num_modes: self.num_modes,
                });
            }
            if modes[..i].contains(&m) {
                return Err(Error::RepeatedMode { mode: m });
            }
        }
        Ok(())
    }
}

/// Index offsets of local basis states within the full space, plus the
/// odometer over the untouched modes. Shared by embedding and the local
/// apply kernels.
struct LocalLayout {
    /// Full-space offset of each local basis state.
    offsets: Vec<usize>,
    /// Full-space base index of every assignment of the untouched modes.
    bases: Vec<usize>,
    local_dim: usize,
}

fn local_layout(basis: &FockBasis, modes: &[usize]) -> Result<LocalLayout> {
    basis.check_modes(modes)?;
    let d = basis.cutoff();
    let k = modes.len();
    let local_dim = d.pow(k as u32);

    let mut offsets = vec![0usize; local_dim];
    for (l, offset) in offsets.iter_mut().enumerate() {
        let mut rest = l;
        for j in (0..k).rev() {
            *offset += (rest % d) * basis.stride(modes[j]);
            rest /= d;
        }
    }

    let rest_modes: Vec<usize> = (0..basis.num_modes())
        .filter(|m| !modes.contains(m))
        .collect();
    let rest_dim = d.pow(rest_modes.len() as u32);
    let mut bases = vec![0usize; rest_dim];
    for (r, base) in bases.iter_mut().enumerate() {
        let mut rest = r;
        for j in (0..rest_modes.len()).rev() {
            *base += (rest % d) * basis.stride(rest_modes[j]);
            rest /= d;
        }
    }

    Ok(LocalLayout {
        offsets,
        bases,
        local_dim,
    })
}

/// Embed a local operator acting on `modes` (in listed order) into the
/// full space, identity on every other mode.
pub fn embed_operator(
    local: &DMatrix<C64>,
    modes: &[usize],
    basis: &FockBasis,
) -> Result<DMatrix<C64>> {
    let layout = local_layout(basis, modes)?;
    if local.nrows() != layout.local_dim || local.ncols() != layout.local_dim {
        return Err(Error::DimensionMismatch {
            got: local.nrows(),
            expected: layout.local_dim,
        });
    }
    if basis.dim() > EMBED_BUDGET {
        return Err(Error::DimensionBudget {
            dim: basis.dim(),
            budget: EMBED_BUDGET,
        });
    }
    let mut full = DMatrix::<C64>::zeros(basis.dim(), basis.dim());
    for &base in &layout.bases {
        for (li, &oi) in layout.offsets.iter().enumerate() {
            for (lj, &oj) in layout.offsets.iter().enumerate() {
                full[(base + oi, base + oj)] = local[(li, lj)];
            }
        }
    }
    Ok(full)
}

/// A pure state: complex amplitudes over the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    basis: FockBasis,
    amps: DVector<C64>,
}

impl FockVector {
    /// The basis state `|occupations>`.
    pub fn basis_state(basis: FockBasis, occupations: &[usize]) -> Result<Self> {
        let idx = basis.index_of(occupations)?;
        let mut amps = DVector::<C64>::zeros(basis.dim());
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self { basis, amps })
    }

    /// The vacuum `|0...0>`.
    pub fn vacuum(basis: FockBasis) -> Self {
        Self::basis_state(basis, &vec![0; basis.num_modes()]).expect("vacuum always valid")
    }

    /// Build from raw amplitudes (must be normalized).
    pub fn from_amplitudes(basis: FockBasis, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                got: amps.len(),
                expected: basis.dim(),
            });
        }
        let state = Self { basis, amps };
        state.check_normalized()?;
        Ok(state)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<C64> {
        Ok(self.amps[self.basis.index_of(occupations)?])
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    fn check_normalized(&self) -> Result<()> {
        let deviation = (self.norm() - 1.0).abs();
        if deviation < 1e-8 {
            Ok(())
        } else {
            Err(Error::NotNormalized { deviation })
        }
    }

    /// Apply a full-space unitary: `v -> U v`.
    pub fn apply_unitary(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                got: u.nrows(),
                expected: self.basis.dim(),
            });
        }
        linalg::check_unitary(u, TOL_UNITARY)?;
        Ok(Self {
            basis: self.basis,
            amps: u * &self.amps,
        })
    }

    /// Apply a local unitary to the listed modes without materializing
    /// the full-space matrix.
    pub fn apply_local_unitary(&self, local: &DMatrix<C64>, modes: &[usize]) -> Result<Self> {
        let layout = local_layout(&self.basis, modes)?;
        if local.nrows() != layout.local_dim || local.ncols() != layout.local_dim {
            return Err(Error::DimensionMismatch {
                got: local.nrows(),
                expected: layout.local_dim,
            });
        }
        linalg::check_unitary(local, TOL_UNITARY)?;
        let mut out = self.amps.clone();
        let mut scratch = vec![C64::new(0.0, 0.0); layout.local_dim];
        for &base in &layout.bases {
            for (li, slot) in scratch.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (lj, &oj) in layout.offsets.iter().enumerate() {
                    acc += local[(li, lj)] * self.amps[base + oj];
                }
                *slot = acc;
            }
            for (li, &oi) in layout.offsets.iter().enumerate() {
                out[base + oi] = scratch[li];
            }
        }
        Ok(Self {
            basis: self.basis,
            amps: out,
        })
    }

    /// Mean photon number in `mode`.
    pub fn mean_occupation(&self, mode: usize) -> Result<f64> {
        if mode >= self.basis.num_modes() {
            return Err(Error::ModeOutOfRange {
                mode,
                num_modes: self.basis.num_modes(),
            });
        }
        let mut acc = 0.0;
        for (i, amp) in self.amps.iter().enumerate() {
            let occ = self.basis.occupations_of(i);
            acc += amp.norm_sqr() * occ[mode] as f64;
        }
        Ok(acc)
    }

    /// Photon-counting distribution over occupation tuples (Born rule).
    pub fn measure_counts(&self) -> Result<OutcomeDist> {
        self.check_normalized()?;
        let mut entries = BTreeMap::new();
        for (i, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 0.0 {
                entries.insert(self.basis.occupations_of(i), p);
            }
        }
        Ok(OutcomeDist { entries })
    }

    /// Promote to a density operator `|v><v|`.
    pub fn to_density(&self) -> Result<DensityOp> {
        if self.basis.dim() > EMBED_BUDGET {
            return Err(Error::DimensionBudget {
                dim: self.basis.dim(),
                budget: EMBED_BUDGET,
            });
        }
        let mat = DMatrix::from_fn(self.basis.dim(), self.basis.dim(), |i, j| {
            self.amps[i] * self.amps[j].conj()
        });
        Ok(DensityOp {
            basis: self.basis,
            mat,
        })
    }

    /// Global-phase-invariant distance: aligns the two states' phases on
    /// their overlap, then takes the max-entry difference.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let inner: C64 = self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let phase = if inner.norm() > 1e-14 {
            inner / inner.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }

    /// Plain max-entry distance, signs included.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Smallest cutoff whose coherent-state tail `sum_{n>=d} e^{-|a|^2}|a|^{2n}/n!`
/// drops below `bound`.
pub fn required_coherent_cutoff(alpha: C64, bound: f64) -> usize {
    let mu = alpha.norm_sqr();
    if mu == 0.0 {
        return 1;
    }
    // walk the Poisson weights until the remaining tail is below bound
    let mut term = (-mu).exp();
    let mut cdf = term;
    let mut n = 0usize;
    while 1.0 - cdf >= bound && n < 4096 {
        n += 1;
        term *= mu / n as f64;
        cdf += term;
    }
    n + 1
}

/// Truncated coherent-state amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)`,
/// renormalized. Errors if the truncated tail exceeds `bound`.
pub fn coherent_amplitudes(alpha: C64, cutoff: usize, bound: f64) -> Result<Vec<C64>> {
    let mut amps = Vec::with_capacity(cutoff);
    let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    let mut norm_sqr = 0.0;
    for n in 0..cutoff {
        if n > 0 {
            term *= alpha / C64::new((n as f64).sqrt(), 0.0);
        }
        norm_sqr += term.norm_sqr();
        amps.push(term);
    }
    let tail = (1.0 - norm_sqr).max(0.0);
    if tail >= bound {
        return Err(Error::CutoffTooSmall {
            cutoff,
            alpha_mag: alpha.norm(),
            tail,
            bound,
            required: required_coherent_cutoff(alpha, bound),
        });
    }
    let scale = C64::new(1.0 / norm_sqr.sqrt(), 0.0);
    for a in &mut amps {
        *a *= scale;
    }
    Ok(amps)
}

/// Truncated coherent state `|alpha>` on a single-mode basis.
pub fn coherent_vector(alpha: C64, basis: FockBasis) -> Result<FockVector> {
    assert_eq!(
        basis.num_modes(),
        1,
        "coherent_vector wants a single-mode basis"
    );
    let amps = coherent_amplitudes(alpha, basis.cutoff(), COHERENT_TAIL_BOUND)?;
    FockVector::from_amplitudes(basis, DVector::from_vec(amps))
}

/// Product state with a coherent amplitude on some modes and vacuum on the
/// rest. `alphas[m] = None` means vacuum on mode `m`.
pub fn coherent_product(basis: FockBasis, alphas: &[Option<C64>]) -> Result<FockVector> {
    assert_eq!(alphas.len(), basis.num_modes());
    let d = basis.cutoff();
    let mut per_mode: Vec<Vec<C64>> = Vec::with_capacity(alphas.len());
    for a in alphas {
        match a {
            Some(alpha) => per_mode.push(coherent_amplitudes(*alpha, d, COHERENT_TAIL_BOUND)?),
            None => {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[0] = C64::new(1.0, 0.0);
                per_mode.push(v);
            }
        }
    }
    let mut amps = DVector::<C64>::zeros(basis.dim());
    for i in 0..basis.dim() {
        let occ = basis.occupations_of(i);
        let mut z = C64::new(1.0, 0.0);
        for (mode, &n) in occ.iter().enumerate() {
            z *= per_mode[mode][n];
        }
        amps[i] = z;
    }
    FockVector::from_amplitudes(basis, amps)
}

/// A mixed state: Hermitian, unit-trace, positive-semidefinite matrix over
/// the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOp {
    basis: FockBasis,
    mat: DMatrix<C64>,
}

impl DensityOp {
    pub fn from_matrix(basis: FockBasis, mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != basis.dim() || mat.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch {
                got: mat.nrows(),
                expected: basis.dim(),
            });
        }
        Ok(Self { basis, mat })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.basis.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).diagonal().iter().map(|z| z.re).sum()
    }

    /// Max-entry deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::max_abs(&(self.mat.adjoint() - &self.mat))
    }

    /// Smallest eigenvalue (negative beyond roundoff means non-physical).
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue_hermitian(&self.mat)
    }

    /// `rho -> U rho U^dag` for a full-space unitary.
    pub fn apply_unitary(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                got: u.nrows(),
                expected: self.basis.dim(),
            });
        }
        linalg::check_unitary(u, TOL_UNITARY)?;
        Ok(Self {
            basis: self.basis,
            mat: u * &self.mat * u.adjoint(),
        })
    }

    /// Apply a local unitary on the listed modes.
    pub fn apply_local_unitary(&self, local: &DMatrix<C64>, modes: &[usize]) -> Result<Self> {
        let full = embed_operator(local, modes, &self.basis)?;
        self.apply_unitary(&full)
    }

    /// `rho -> sum_i K_i rho K_i^dag` for a full-space Kraus set.
    pub fn apply_channel(&self, kraus: &[DMatrix<C64>]) -> Result<Self> {
        assert!(!kraus.is_empty(), "empty Kraus set");
        for k in kraus {
            if k.nrows() != self.basis.dim() || k.ncols() != self.basis.dim() {
                return Err(Error::DimensionMismatch {
                    got: k.nrows(),
                    expected: self.basis.dim(),
                });
            }
        }
        let deviation = linalg::kraus_completeness_deviation(kraus);
        if deviation >= TOL_KRAUS {
            return Err(Error::KrausIncomplete { deviation });
        }
        let mut out = DMatrix::<C64>::zeros(self.basis.dim(), self.basis.dim());
        for k in kraus {
            out += k * &self.mat * k.adjoint();
        }
        Ok(Self {
            basis: self.basis,
            mat: out,
        })
    }

    /// Apply a local Kraus channel on the listed modes.
    pub fn apply_local_channel(&self, kraus: &[DMatrix<C64>], modes: &[usize]) -> Result<Self> {
        let full: Vec<DMatrix<C64>> = kraus
            .iter()
            .map(|k| embed_operator(k, modes, &self.basis))
            .collect::<Result<_>>()?;
        self.apply_channel(&full)
    }

    /// Reduced density operator on `keep_modes` (in listed order).
    pub fn partial_trace(&self, keep_modes: &[usize]) -> Result<Self> {
        let layout = local_layout(&self.basis, keep_modes)?;
        let kept = FockBasis::new(keep_modes.len(), self.basis.cutoff())?;
        let mut out = DMatrix::<C64>::zeros(layout.local_dim, layout.local_dim);
        for &base in &layout.bases {
            for (li, &oi) in layout.offsets.iter().enumerate() {
                for (lj, &oj) in layout.offsets.iter().enumerate() {
                    out[(li, lj)] += self.mat[(base + oi, base + oj)];
                }
            }
        }
        Ok(Self {
            basis: kept,
            mat: out,
        })
    }

    /// Photon-counting distribution: the diagonal in the number basis.
    pub fn measure_counts(&self) -> Result<OutcomeDist> {
        let deviation = (self.trace() - 1.0).abs();
        if deviation >= 1e-8 {
            return Err(Error::NotNormalized { deviation });
        }
        let mut entries = BTreeMap::new();
        for i in 0..self.basis.dim() {
            let p = self.mat[(i, i)].re.max(0.0);
            if p > 0.0 {
                entries.insert(self.basis.occupations_of(i), p);
            }
        }
        Ok(OutcomeDist { entries })
    }
}

/// A distribution over photon-count tuples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutcomeDist {
    entries: BTreeMap<Vec<usize>, f64>,
}

impl OutcomeDist {
    pub fn from_entries(entries: BTreeMap<Vec<usize>, f64>) -> Self {
        Self { entries }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prob(&self, outcome: &[usize]) -> f64 {
        self.entries.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Marginal count distribution of a single mode, indexed by count.
    pub fn mode_marginal(&self, mode: usize) -> Vec<f64> {
        let max = self
            .entries
            .keys()
            .map(|k| k.get(mode).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let mut out = vec![0.0; max + 1];
        for (k, p) in self.iter() {
            out[k[mode]] += p;
        }
        out
    }

    /// Expected count in `mode`.
    pub fn mean_occupation(&self, mode: usize) -> f64 {
        self.iter().map(|(k, p)| k[mode] as f64 * p).sum()
    }

    /// Total-variation distance between the single-mode marginals of two
    /// distributions.
    pub fn tv_distance_marginal(&self, other: &Self, mode: usize) -> f64 {
        let a = self.mode_marginal(mode);
        let b = other.mode_marginal(mode);
        let len = a.len().max(b.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        0.5 * (0..len)
            .map(|i| (get(&a, i) - get(&b, i)).abs())
            .sum::<f64>()
    }

    /// Max-entry difference between two distributions.
    pub fn max_divergence(&self, other: &Self) -> f64 {
        let mut keys: Vec<&Vec<usize>> = self.entries.keys().collect();
        keys.extend(other.entries.keys());
        keys.sort();
        keys.dedup();
        keys.iter()
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for OutcomeDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in self.iter() {
            let digits: Vec<String> = k.iter().map(|n| n.to_string()).collect();
            writeln!(f, "|{}>  {:.12}", digits.join(""), p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::annihilation;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis42() -> FockBasis {
        FockBasis::new(4, 2).unwrap()
    }

    #[test]
    fn index_examples() {
        let b = basis42();
        assert_eq!(b.index_of(&[0, 1, 0, 1]).unwrap(), 5);
        assert_eq!(b.index_of(&[0, 0, 0, 0]).unwrap(), 0);
        let b3 = FockBasis::new(2, 3).unwrap();
        assert_eq!(b3.index_of(&[1, 0]).unwrap(), 3);
    }

    #[test]
    fn index_rejects_out_of_range_occupation() {
        let b = basis42();
        let err = b.index_of(&[0, 2, 0, 0]).unwrap_err();
        assert!(matches!(err, Error::OccupationOutOfRange { mode: 1, .. }));
    }

    #[test]
    fn index_round_trip_exhaustive_small() {
        for m in 1..=4 {
            let b = FockBasis::new(m, 2).unwrap();
            for i in 0..b.dim() {
                assert_eq!(b.index_of(&b.occupations_of(i)).unwrap(), i);
            }
        }
    }

    #[test]
    fn index_round_trip_sampled_wide() {
        let b = FockBasis::new(2, 16).unwrap();
        for i in (0..b.dim()).step_by(7) {
            assert_eq!(b.index_of(&b.occupations_of(i)).unwrap(), i);
        }
    }

    #[test]
    fn embed_identity_is_identity() {
        let b = FockBasis::new(2, 2).unwrap();
        let eye = DMatrix::<C64>::identity(4, 4);
        let full = embed_operator(&eye, &[0, 1], &b).unwrap();
        assert!(linalg::max_abs(&(full - DMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn embed_single_mode_matches_kron() {
        // X on mode 0 of a 2-mode space equals X (x) I
        let b = FockBasis::new(2, 2).unwrap();
        let mut x = DMatrix::<C64>::zeros(2, 2);
        x[(0, 1)] = c(1.0);
        x[(1, 0)] = c(1.0);
        let eye = DMatrix::<C64>::identity(2, 2);
        let via_embed = embed_operator(&x, &[0], &b).unwrap();
        let via_kron = x.kronecker(&eye);
        assert!(linalg::max_abs(&(via_embed - via_kron)) < 1e-15);
    }

    #[test]
    fn embed_repeated_mode_rejected() {
        let b = basis42();
        let eye = DMatrix::<C64>::identity(4, 4);
        assert!(matches!(
            embed_operator(&eye, &[1, 1], &b),
            Err(Error::RepeatedMode { mode: 1 })
        ));
    }

    #[test]
    fn embedding_homomorphism() {
        // embed(U V) = embed(U) embed(V) on the same target modes
        let b = FockBasis::new(3, 2).unwrap();
        let a = annihilation(2);
        let g1 = (a.adjoint().kronecker(&a) - a.kronecker(&a.adjoint())).map(|z| z * c(0.3));
        let g2 = (a.adjoint().kronecker(&a) - a.kronecker(&a.adjoint())).map(|z| z * c(-0.8));
        let u = linalg::exp_antihermitian(&g1);
        let v = linalg::exp_antihermitian(&g2);
        let lhs = embed_operator(&(&u * &v), &[0, 2], &b).unwrap();
        let rhs =
            embed_operator(&u, &[0, 2], &b).unwrap() * embed_operator(&v, &[0, 2], &b).unwrap();
        assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn local_apply_matches_embedding() {
        let b = FockBasis::new(3, 2).unwrap();
        let a = annihilation(2);
        let g = (a.adjoint().kronecker(&a) - a.kronecker(&a.adjoint())).map(|z| z * c(FRAC_PI_4));
        let u = linalg::exp_antihermitian(&g);
        let psi = FockVector::basis_state(b, &[1, 0, 1]).unwrap();
        let via_local = psi.apply_local_unitary(&u, &[2, 0]).unwrap();
        let full = embed_operator(&u, &[2, 0], &b).unwrap();
        let via_full = psi.apply_unitary(&full).unwrap();
        assert!(via_local.distance(&via_full) < 1e-13);
    }

    #[test]
    fn apply_identity_leaves_state() {
        let b = basis42();
        let psi = FockVector::basis_state(b, &[0, 1, 0, 1]).unwrap();
        let eye = DMatrix::<C64>::identity(b.dim(), b.dim());
        let out = psi.apply_unitary(&eye).unwrap();
        assert!(out.distance(&psi) < 1e-15);
    }

    #[test]
    fn apply_rejects_non_unitary() {
        let b = FockBasis::new(1, 2).unwrap();
        let psi = FockVector::basis_state(b, &[1]).unwrap();
        let half = DMatrix::<C64>::identity(2, 2).map(|z| z * c(0.5));
        assert!(matches!(
            psi.apply_unitary(&half),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn channel_identity_kraus_is_noop() {
        let b = FockBasis::new(1, 2).unwrap();
        let rho = FockVector::basis_state(b, &[1])
            .unwrap()
            .to_density()
            .unwrap();
        let eye = DMatrix::<C64>::identity(2, 2);
        let out = rho.apply_channel(&[eye]).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn channel_rejects_incomplete_kraus() {
        let b = FockBasis::new(1, 2).unwrap();
        let rho = FockVector::basis_state(b, &[1])
            .unwrap()
            .to_density()
            .unwrap();
        let half = DMatrix::<C64>::identity(2, 2).map(|z| z * c(0.5));
        let err = rho.apply_channel(&[half]).unwrap_err();
        assert!(matches!(err, Error::KrausIncomplete { .. }));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let b2 = FockBasis::new(2, 2).unwrap();
        // |1>_A (x) |0>_B
        let rho = FockVector::basis_state(b2, &[1, 0])
            .unwrap()
            .to_density()
            .unwrap();
        let red = rho.partial_trace(&[0]).unwrap();
        assert!((red.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!((red.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_entangled_pair() {
        let b2 = FockBasis::new(2, 2).unwrap();
        let mut amps = DVector::<C64>::zeros(4);
        amps[1] = c(1.0 / 2f64.sqrt()); // |01>
        amps[2] = c(1.0 / 2f64.sqrt()); // |10>
        let psi = FockVector::from_amplitudes(b2, amps).unwrap();
        let red = psi.to_density().unwrap().partial_trace(&[0]).unwrap();
        assert!((red.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((red.matrix()[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(red.matrix()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let b2 = FockBasis::new(2, 3).unwrap();
        // a fixed Hermitian unit-trace matrix with off-diagonal structure
        let dim = b2.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0 / dim as f64);
            if i + 1 < dim {
                m[(i, i + 1)] = C64::new(0.01, 0.02 * i as f64);
                m[(i + 1, i)] = m[(i, i + 1)].conj();
            }
        }
        let rho = DensityOp::from_matrix(b2, m).unwrap();
        let red = rho.partial_trace(&[1]).unwrap();
        assert!((red.trace() - rho.trace()).abs() < 1e-12);
    }

    #[test]
    fn measure_basis_state() {
        let b = basis42();
        let psi = FockVector::basis_state(b, &[0, 1, 1, 0]).unwrap();
        let dist = psi.measure_counts().unwrap();
        assert_eq!(dist.len(), 1);
        assert!((dist.prob(&[0, 1, 1, 0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measure_superposition() {
        let b = basis42();
        let mut amps = DVector::<C64>::zeros(b.dim());
        amps[5] = c(1.0 / 2f64.sqrt());
        amps[6] = c(1.0 / 2f64.sqrt());
        let psi = FockVector::from_amplitudes(b, amps).unwrap();
        let dist = psi.measure_counts().unwrap();
        assert!((dist.prob(&[0, 1, 0, 1]) - 0.5).abs() < 1e-12);
        assert!((dist.prob(&[0, 1, 1, 0]) - 0.5).abs() < 1e-12);
        assert!((dist.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_vacuum_limit() {
        let b = FockBasis::new(1, 4).unwrap();
        let v = coherent_vector(C64::new(0.0, 0.0), b).unwrap();
        assert!((v.amplitude(&[0]).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_mean_photon_number() {
        let b = FockBasis::new(1, 16).unwrap();
        let v = coherent_vector(c(1.0), b).unwrap();
        assert!((v.mean_occupation(0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_cutoff_too_small() {
        let b = FockBasis::new(1, 8).unwrap();
        let err = coherent_vector(c(2.0), b).unwrap_err();
        match err {
            Error::CutoffTooSmall { required, .. } => {
                assert!(required > 8);
                // the suggested cutoff must actually satisfy the bound
                let b2 = FockBasis::new(1, required).unwrap();
                assert!(coherent_vector(c(2.0), b2).is_ok());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn density_invariants_under_unitary() {
        let b = FockBasis::new(2, 2).unwrap();
        let rho = FockVector::basis_state(b, &[0, 1])
            .unwrap()
            .to_density()
            .unwrap();
        let a = annihilation(2);
        let g = (a.adjoint().kronecker(&a) - a.kronecker(&a.adjoint())).map(|z| z * c(FRAC_PI_4));
        let u = linalg::exp_antihermitian(&g);
        let out = rho.apply_unitary(&u).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
        assert!((out.purity() - 1.0).abs() < 1e-12);
        assert!(out.hermiticity_deviation() < 1e-12);
        assert!(out.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn embedded_phase_flips_marked_component() {
        // pi phase on the first mode maps (|0101> - |1010>)/sqrt(2) to
        // (|0101> + |1010>)/sqrt(2)
        let b = basis42();
        let mut amps = DVector::<C64>::zeros(b.dim());
        amps[5] = c(1.0 / 2f64.sqrt());
        amps[10] = c(-1.0 / 2f64.sqrt());
        let psi = FockVector::from_amplitudes(b, amps).unwrap();
        let s = DMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                C64::from_polar(1.0, std::f64::consts::PI * i as f64)
            } else {
                c(0.0)
            }
        });
        let full = embed_operator(&s, &[0], &b).unwrap();
        let out = psi.apply_unitary(&full).unwrap();
        let mut expect = DVector::<C64>::zeros(b.dim());
        expect[5] = c(1.0 / 2f64.sqrt());
        expect[10] = c(1.0 / 2f64.sqrt());
        let expect = FockVector::from_amplitudes(b, expect).unwrap();
        assert!(out.distance_up_to_phase(&expect) < 1e-12);
        assert!(out.distance(&expect) < 1e-12);
    }

    #[test]
    fn partial_trace_commutes_with_kept_mode_unitaries() {
        // tracing out untouched modes commutes with a unitary acting on
        // the kept modes
        let b = FockBasis::new(3, 2).unwrap();
        let mut amps = DVector::<C64>::zeros(b.dim());
        amps[1] = c(0.6); // |001>
        amps[6] = c(0.8); // |110>
        let rho = FockVector::from_amplitudes(b, amps).unwrap().to_density().unwrap();
        let a = annihilation(2);
        let g = (a.adjoint().kronecker(&a) - a.kronecker(&a.adjoint())).map(|z| z * c(0.5));
        let u = linalg::exp_antihermitian(&g);

        let keep = [0usize, 1];
        let evolved_then_traced = rho
            .apply_local_unitary(&u, &keep)
            .unwrap()
            .partial_trace(&keep)
            .unwrap();
        let traced_then_evolved = rho
            .partial_trace(&keep)
            .unwrap()
            .apply_unitary(&u)
            .unwrap();
        assert!(
            linalg::max_abs(&(evolved_then_traced.matrix() - traced_then_evolved.matrix()))
                < 1e-12
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_unitary(dim: usize) -> impl Strategy<Value = DMatrix<C64>> {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |vals| {
                let raw = DMatrix::from_fn(dim, dim, |i, j| {
                    let (re, im) = vals[i * dim + j];
                    C64::new(re, im)
                });
                // anti-Hermitian part generates a unitary
                let g = (&raw - raw.adjoint()).map(|z| z * c(0.5));
                linalg::exp_antihermitian(&g)
            })
        }

        fn arb_state(dim: usize) -> impl Strategy<Value = DVector<C64>> {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map(
                "nonzero vector",
                move |vals| {
                    let v = DVector::from_fn(dim, |i, _| C64::new(vals[i].0, vals[i].1));
                    let n = v.norm();
                    (n > 1e-3).then(|| v / c(n))
                },
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            // any unitary applied to any normalized state preserves the norm
            #[test]
            fn unitaries_preserve_norm(u in arb_unitary(8), amps in arb_state(8)) {
                let b = FockBasis::new(3, 2).unwrap();
                let psi = FockVector::from_amplitudes(b, amps).unwrap();
                let out = psi.apply_unitary(&u).unwrap();
                prop_assert!((out.norm() - 1.0).abs() < 1e-12);
            }

            // any complete Kraus set preserves trace, Hermiticity, and
            // positivity
            #[test]
            fn channels_preserve_density_contract(
                gamma in 0.0f64..3.0,
                u in arb_unitary(4),
                amps in arb_state(4),
            ) {
                let b = FockBasis::new(2, 2).unwrap();
                let rho = FockVector::from_amplitudes(b, amps)
                    .unwrap()
                    .to_density()
                    .unwrap()
                    .apply_unitary(&u)
                    .unwrap();
                let ks = crate::ops::damping_kraus(gamma, 2).unwrap();
                let out = rho.apply_local_channel(&ks, &[0]).unwrap();
                prop_assert!((out.trace() - rho.trace()).abs() < 1e-12);
                prop_assert!(out.hermiticity_deviation() < 1e-12);
                prop_assert!(out.min_eigenvalue() > -1e-10);
            }

            // embedding is a homomorphism on a fixed mode set
            #[test]
            fn embedding_homomorphism_random(u in arb_unitary(4), v in arb_unitary(4)) {
                let b = FockBasis::new(3, 2).unwrap();
                let lhs = embed_operator(&(&u * &v), &[2, 0], &b).unwrap();
                let rhs = embed_operator(&u, &[2, 0], &b).unwrap()
                    * embed_operator(&v, &[2, 0], &b).unwrap();
                prop_assert!(linalg::max_abs(&(lhs - rhs)) < 1e-11);
            }
        }
    }
}
