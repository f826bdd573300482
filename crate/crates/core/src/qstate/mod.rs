//! Dense state algebra for small registers of qubits and qudits.
//!
//! Basis convention: subsystem 0 is the leftmost tensor factor and the most
//! significant digit of a basis index, so `|1100>` on four qubits is index 12.

mod eigen;
mod sample;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::{eig_hermitian, psd_sqrt, trace_norm_hermitian, HermitianEigen};
pub use sample::{sample_haar_pure, sample_induced, sample_induced_on, stream_rng};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance on the 2-norm of pure-state amplitudes.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance on Hermiticity and unit trace of density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as roundoff and clamped to zero.
pub const PSD_CLAMP: f64 = 1e-9;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ordered local dimensions of a composite system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    dims: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl Register {
    /// Largest ambient dimension accepted for dense storage.
    pub const MAX_DIM: usize = 1 << 12;

    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::domain("register needs at least one subsystem"));
        }
        if dims.contains(&0) {
            return Err(Error::domain("local dimensions must be positive"));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= Self::MAX_DIM)
            .ok_or_else(|| {
                Error::domain(format!("ambient dimension exceeds {}", Self::MAX_DIM))
            })?;
        debug_assert!(total >= 1);
        Ok(Self { dims, labels: None })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Ambient Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    /// Validates a subsystem selection and returns it sorted and deduplicated.
    pub fn check_subset(&self, idx: &[usize]) -> Result<Vec<usize>> {
        if idx.is_empty() {
            return Err(Error::InvalidIndex("empty subsystem set".into()));
        }
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != idx.len() {
            return Err(Error::InvalidIndex(format!("repeated index in {idx:?}")));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidIndex(format!(
                "index {bad} out of range for {} subsystems",
                self.len()
            )));
        }
        Ok(sorted)
    }

    /// Register of the selected subsystems, in ascending index order.
    pub fn select(&self, idx: &[usize]) -> Result<Register> {
        let idx = self.check_subset(idx)?;
        let dims = idx.iter().map(|&i| self.dims[i]).collect();
        let mut out = Register::new(dims)?;
        if let Some(labels) = &self.labels {
            out.labels = Some(idx.iter().map(|&i| labels[i].clone()).collect());
        }
        Ok(out)
    }

    pub fn complement(&self, idx: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|i| !idx.contains(i)).collect()
    }

    /// Digits of a basis index, subsystem 0 first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    pub fn tensor(&self, other: &Register) -> Result<Register> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Register::new(dims)
    }

    /// Splits every basis index into (index within `part`, index within the rest).
    ///
    /// Returns the lookup `full[a * rest_dim + b]` together with both sizes.
    fn split_table(&self, part: &[usize]) -> (Vec<usize>, usize, usize) {
        let rest = self.complement(part);
        let part_dim: usize = part.iter().map(|&i| self.dims[i]).product();
        let rest_dim: usize = rest.iter().map(|&i| self.dims[i]).product();
        let mut full = vec![0usize; self.dim()];
        for i in 0..self.dim() {
            let digits = self.digits(i);
            let a = part.iter().fold(0, |acc, &p| acc * self.dims[p] + digits[p]);
            let b = rest.iter().fold(0, |acc, &p| acc * self.dims[p] + digits[p]);
            full[a * rest_dim + b] = i;
        }
        (full, part_dim, rest_dim)
    }
}

/// Two complementary groups of subsystems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    /// `side_a` against every other subsystem of a register with `n` parts.
    pub fn new(n: usize, side_a: &[usize]) -> Result<Self> {
        let side_b: Vec<usize> = (0..n).filter(|i| !side_a.contains(i)).collect();
        Self::from_sides(n, side_a, &side_b)
    }

    pub fn from_sides(n: usize, side_a: &[usize], side_b: &[usize]) -> Result<Self> {
        if side_a.is_empty() {
            return Err(Error::InvalidIndex("side A of a cut must be non-empty".into()));
        }
        let mut all: Vec<usize> = side_a.iter().chain(side_b).copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidIndex(format!(
                "{side_a:?}|{side_b:?} is not a bipartition of {n} subsystems"
            )));
        }
        let mut a = side_a.to_vec();
        let mut b = side_b.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        Ok(Self { side_a: a, side_b: b })
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn len(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Unit-norm amplitude vector on a register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    register: Register,
    amps: CVector,
}

impl PureState {
    pub fn new(register: Register, amps: CVector) -> Result<Self> {
        if amps.len() != register.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                register.dim()
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { register, amps })
    }

    /// Normalizes `amps` before construction.
    pub fn normalized(register: Register, amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(register, amps / c(norm, 0.0))
    }

    pub fn from_real(register: Register, amps: &[f64]) -> Result<Self> {
        Self::normalized(register, CVector::from_iterator(amps.len(), amps.iter().map(|&x| c(x, 0.0))))
    }

    pub fn basis(register: Register, index: usize) -> Result<Self> {
        let mut amps = CVector::zeros(register.dim());
        if index >= amps.len() {
            return Err(Error::InvalidIndex(format!("basis index {index}")));
        }
        amps[index] = c(1.0, 0.0);
        Self::new(register, amps)
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let register = self.register.tensor(&other.register)?;
        Ok(Self { register, amps: self.amps.kronecker(&other.amps) })
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<PureState> {
        let n = self.register.len();
        let mut check = order.to_vec();
        check.sort_unstable();
        if check != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidIndex(format!("{order:?} is not a permutation")));
        }
        let dims: Vec<usize> = order.iter().map(|&o| self.register.dims[o]).collect();
        let register = Register::new(dims)?;
        let mut amps = CVector::zeros(self.amps.len());
        for i in 0..self.amps.len() {
            let old = self.register.digits(i);
            let new: Vec<usize> = order.iter().map(|&o| old[o]).collect();
            amps[register.index_of(&new)] = self.amps[i];
        }
        Ok(Self { register, amps })
    }

    /// Applies a unitary acting on one subsystem.
    pub fn apply_local(&self, site: usize, unitary: &CMatrix) -> Result<PureState> {
        let d = *self
            .register
            .dims
            .get(site)
            .ok_or_else(|| Error::InvalidIndex(format!("site {site}")))?;
        if unitary.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a dimension-{d} site",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        let (full, _, rest_dim) = self.register.split_table(&[site]);
        let mut amps = CVector::zeros(self.amps.len());
        for b in 0..rest_dim {
            for a_out in 0..d {
                let mut acc = c(0.0, 0.0);
                for a_in in 0..d {
                    acc += unitary[(a_out, a_in)] * self.amps[full[a_in * rest_dim + b]];
                }
                amps[full[a_out * rest_dim + b]] = acc;
            }
        }
        Self::normalized(self.register.clone(), amps)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            register: self.register.clone(),
            matrix: &self.amps * self.amps.adjoint(),
        }
    }

    /// Reduced state on `keep` (ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = self.register.check_subset(keep)?;
        let register = self.register.select(&keep)?;
        let (full, kd, td) = self.register.split_table(&keep);
        let psi = CMatrix::from_fn(kd, td, |a, b| self.amps[full[a * td + b]]);
        let matrix = &psi * psi.adjoint();
        Ok(DensityMatrix { register, matrix: hermitize(matrix) })
    }
}

/// Hermitian, unit-trace, positive semidefinite operator on a register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    register: Register,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(register: Register, matrix: CMatrix) -> Result<Self> {
        let d = register.dim();
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > DENSITY_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let matrix = hermitize(matrix);
        let eig = eig_hermitian(&matrix)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -PSD_CLAMP {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { register, matrix })
    }

    /// Skips validation; callers guarantee the density-matrix invariants by construction.
    pub(crate) fn from_parts_unchecked(register: Register, matrix: CMatrix) -> Self {
        Self { register, matrix }
    }

    pub fn maximally_mixed(register: Register) -> Self {
        let d = register.dim();
        let matrix = CMatrix::identity(d, d) / c(d as f64, 0.0);
        Self { register, matrix }
    }

    /// Probabilistic mixture `sum p_i rho_i` of states on the same register.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::domain("empty mixture"))?
            .1;
        let d = first.dim();
        let mut m = CMatrix::zeros(d, d);
        for (p, rho) in parts {
            if rho.register != first.register {
                return Err(Error::DimensionMismatch("mixture of different registers".into()));
            }
            if *p < 0.0 {
                return Err(Error::domain("negative mixture weight"));
            }
            m += rho.matrix.map(|z| z * *p);
        }
        Self::new(first.register.clone(), m)
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Tr rho^2`, via the sum of squared moduli.
    pub fn purity(&self) -> f64 {
        purity(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let register = self.register.tensor(&other.register)?;
        Ok(Self { register, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// Reduced state on `keep` (ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = self.register.check_subset(keep)?;
        let register = self.register.select(&keep)?;
        let (full, kd, td) = self.register.split_table(&keep);
        let mut out = CMatrix::zeros(kd, kd);
        for a1 in 0..kd {
            for a2 in 0..kd {
                let mut acc = c(0.0, 0.0);
                for b in 0..td {
                    acc += self.matrix[(full[a1 * td + b], full[a2 * td + b])];
                }
                out[(a1, a2)] = acc;
            }
        }
        Ok(DensityMatrix { register, matrix: hermitize(out) })
    }

    /// Partial transpose over the subsystems in `side`. The result is Hermitian
    /// with unit trace but need not be positive.
    pub fn partial_transpose(&self, side: &[usize]) -> Result<CMatrix> {
        let side = self.register.check_subset(side)?;
        let (full, sd, rd) = self.register.split_table(&side);
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for s1 in 0..sd {
            for r1 in 0..rd {
                let i = full[s1 * rd + r1];
                for s2 in 0..sd {
                    for r2 in 0..rd {
                        let j = full[s2 * rd + r2];
                        out[(i, j)] = self.matrix[(full[s2 * rd + r1], full[s1 * rd + r2])];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Conjugation `U rho U^dagger` by a unitary on the full space.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<DensityMatrix> {
        if unitary.shape() != self.matrix.shape() {
            return Err(Error::DimensionMismatch("unitary does not match state".into()));
        }
        let m = unitary * &self.matrix * unitary.adjoint();
        Ok(Self { register: self.register.clone(), matrix: hermitize(m) })
    }
}

/// Either representation of a state on a register.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn register(&self) -> &Register {
        match self {
            QuantumState::Pure(p) => p.register(),
            QuantumState::Mixed(m) => m.register(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(p) => p.to_density(),
            QuantumState::Mixed(m) => m.clone(),
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        match self {
            QuantumState::Pure(p) => p.partial_trace(keep),
            QuantumState::Mixed(m) => m.partial_trace(keep),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            QuantumState::Pure(p) => Some(p),
            QuantumState::Mixed(_) => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateRecord::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: StateRecord = serde_json::from_str(text)?;
        rec.try_into()
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(m: DensityMatrix) -> Self {
        QuantumState::Mixed(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

/// On-disk state format: `{dims, kind, data}` with row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub dims: Vec<usize>,
    pub kind: StateKind,
    pub data: Vec<[f64; 2]>,
}

impl From<&QuantumState> for StateRecord {
    fn from(state: &QuantumState) -> Self {
        let dims = state.register().dims().to_vec();
        match state {
            QuantumState::Pure(p) => StateRecord {
                dims,
                kind: StateKind::Pure,
                data: p.amps.iter().map(|z| [z.re, z.im]).collect(),
            },
            QuantumState::Mixed(m) => {
                let d = m.dim();
                let data = (0..d * d)
                    .map(|k| {
                        let z = m.matrix[(k / d, k % d)];
                        [z.re, z.im]
                    })
                    .collect();
                StateRecord { dims, kind: StateKind::Mixed, data }
            }
        }
    }
}

impl TryFrom<StateRecord> for QuantumState {
    type Error = Error;

    fn try_from(rec: StateRecord) -> Result<Self> {
        let register = Register::new(rec.dims)?;
        let d = register.dim();
        let vals = rec.data.iter().map(|&[re, im]| c(re, im));
        match rec.kind {
            StateKind::Pure => {
                if rec.data.len() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "pure state needs {d} amplitudes, got {}",
                        rec.data.len()
                    )));
                }
                Ok(QuantumState::Pure(PureState::new(register, CVector::from_iterator(d, vals))?))
            }
            StateKind::Mixed => {
                if rec.data.len() != d * d {
                    return Err(Error::DimensionMismatch(format!(
                        "density matrix needs {} entries, got {}",
                        d * d,
                        rec.data.len()
                    )));
                }
                let m = CMatrix::from_row_iterator(d, d, vals);
                Ok(QuantumState::Mixed(DensityMatrix::new(register, m)?))
            }
        }
    }
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(m + m^dagger) / 2`.
pub(crate) fn hermitize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj).map(|z| z * 0.5)
}

/// `Tr m^2` for Hermitian `m`.
pub fn purity(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Pauli matrices and a few fixed operators.
pub mod ops {
    use super::{c, CMatrix};

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn sigma_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }
}
