//! Bipartite entanglement measures.
//!
//! Every measure has a spectral form on pure states (a function of the reduced
//! spectrum) and, where an analytic relation exists, a form as a function of the
//! squared concurrence. The second route is what makes two-qubit mixed states
//! computable: Wootters' concurrence followed by the functional.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{
    eig_hermitian, ops, purity, trace_norm_hermitian, Bipartition, CMatrix, DensityMatrix,
    PureState, QuantumState,
};

/// Values in `[-CLAMP_TOL, 0)` are reported as zero.
pub const CLAMP_TOL: f64 = 1e-10;

/// Range of Tsallis `q` for which `T_q = f_q(C^2)` holds on 2 x d states.
pub const TSALLIS_WINDOW: (f64, f64) = (
    (5.0 - 3.605_551_275_463_989) / 2.0,
    (5.0 + 3.605_551_275_463_989) / 2.0,
);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum MeasureKind {
    Concurrence,
    Negativity,
    Eof,
    Tsallis { q: f64 },
    Renyi { q: f64 },
    Unified { q: f64, s: f64 },
}

impl MeasureKind {
    /// Critical exponent: smallest power for which the measure is monogamous on qubits.
    pub fn alpha_c(&self) -> f64 {
        match self {
            MeasureKind::Eof => std::f64::consts::SQRT_2,
            _ => 2.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::Concurrence => "concurrence",
            MeasureKind::Negativity => "negativity",
            MeasureKind::Eof => "eof",
            MeasureKind::Tsallis { .. } => "tsallis",
            MeasureKind::Renyi { .. } => "renyi",
            MeasureKind::Unified { .. } => "unified",
        }
    }

    pub fn params(&self) -> BTreeMap<&'static str, f64> {
        match *self {
            MeasureKind::Tsallis { q } | MeasureKind::Renyi { q } => BTreeMap::from([("q", q)]),
            MeasureKind::Unified { q, s } => BTreeMap::from([("q", q), ("s", s)]),
            _ => BTreeMap::new(),
        }
    }

    /// Checks parameter domains. Parameter limits are never interpolated: `q = 1`
    /// must be requested as EOF, `s -> 0` as Rényi and `s = 1` is simply Tsallis.
    pub fn validate(&self) -> Result<()> {
        match *self {
            MeasureKind::Tsallis { q } => check_q(q, "Tsallis"),
            MeasureKind::Renyi { q } => check_q(q, "Renyi"),
            MeasureKind::Unified { q, s } => {
                if !(q >= 0.0 && s >= 0.0) || !q.is_finite() || !s.is_finite() {
                    return Err(Error::domain(format!("unified entropy needs q, s >= 0 (got q={q}, s={s})")));
                }
                if q == 1.0 {
                    return Err(Error::domain("unified entropy at q = 1 is the von Neumann limit; use EOF"));
                }
                if s == 0.0 {
                    return Err(Error::domain("unified entropy at s = 0 is the Renyi limit; use Renyi"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The measure as a function of the squared concurrence `x`, valid on 2 x d pure
    /// states and two-qubit mixed states.
    pub fn functional(&self, x: f64) -> Result<f64> {
        match *self {
            MeasureKind::Concurrence => Ok(check_unit(x)?.sqrt()),
            MeasureKind::Negativity => Ok(check_unit(x)?.sqrt()),
            MeasureKind::Eof => f_eof(x),
            MeasureKind::Tsallis { q } => f_tsallis(x, q),
            MeasureKind::Renyi { q } => g_renyi(x, q),
            MeasureKind::Unified { q, s } => f_unified(x, q, s),
        }
    }

    /// The measure of a pure state from the spectrum of its reduced state.
    pub fn from_spectrum(&self, spectrum: &[f64]) -> Result<f64> {
        self.validate()?;
        let p: Vec<f64> = spectrum.iter().map(|&l| l.max(0.0)).collect();
        let value = match *self {
            MeasureKind::Concurrence => (2.0 * (1.0 - p.iter().map(|l| l * l).sum::<f64>())).max(0.0).sqrt(),
            MeasureKind::Negativity => {
                let s: f64 = p.iter().map(|l| l.sqrt()).sum();
                s * s - 1.0
            }
            MeasureKind::Eof => von_neumann_entropy(&p),
            MeasureKind::Tsallis { q } => (1.0 - power_sum(&p, q)) / (q - 1.0),
            MeasureKind::Renyi { q } => power_sum(&p, q).log2() / (1.0 - q),
            MeasureKind::Unified { q, s } => (power_sum(&p, q).powf(s) - 1.0) / ((1.0 - q) * s),
        };
        Ok(clamp(value))
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MeasureKind::Tsallis { q } => write!(f, "tsallis(q={q})"),
            MeasureKind::Renyi { q } => write!(f, "renyi(q={q})"),
            MeasureKind::Unified { q, s } => write!(f, "unified(q={q},s={s})"),
            other => f.write_str(other.name()),
        }
    }
}

fn check_q(q: f64, name: &str) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::domain(format!("{name} entropy needs q > 0 (got {q})")));
    }
    if q == 1.0 {
        return Err(Error::domain(format!("{name} entropy at q = 1 is the von Neumann limit; use EOF")));
    }
    Ok(())
}

fn check_unit(x: f64) -> Result<f64> {
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&x) {
        return Err(Error::domain(format!("squared concurrence {x} outside [0, 1]")));
    }
    Ok(x.clamp(0.0, 1.0))
}

fn clamp(v: f64) -> f64 {
    if (-CLAMP_TOL..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// `sum p^q` with `0^q = 0` for `q > 0`.
fn power_sum(p: &[f64], q: f64) -> f64 {
    p.iter().filter(|&&l| l > 0.0).map(|&l| l.powf(q)).sum()
}

/// Base-2 von Neumann entropy of a spectrum, `0 log 0 = 0`.
pub fn von_neumann_entropy(spectrum: &[f64]) -> f64 {
    clamp(-spectrum.iter().filter(|&&l| l > 0.0).map(|&l| l * l.log2()).sum::<f64>())
}

/// Binary entropy `h(t)` in bits.
pub fn binary_entropy(t: f64) -> f64 {
    von_neumann_entropy(&[t, 1.0 - t])
}

/// Eigenvalues `((1 +- sqrt(1-x)) / 2)` of a qubit marginal with squared concurrence `x`.
fn schmidt_pair(x: f64) -> (f64, f64) {
    let r = (1.0 - x).max(0.0).sqrt();
    ((1.0 + r) / 2.0, (1.0 - r) / 2.0)
}

/// EOF as a function of the squared concurrence.
pub fn f_eof(x: f64) -> Result<f64> {
    let x = check_unit(x)?;
    Ok(binary_entropy(schmidt_pair(x).0))
}

/// Tsallis-q entanglement as a function of the squared concurrence.
pub fn f_tsallis(x: f64, q: f64) -> Result<f64> {
    check_q(q, "Tsallis")?;
    let (lo, hi) = TSALLIS_WINDOW;
    if q < lo - 1e-12 || q > hi + 1e-12 {
        return Err(Error::domain(format!(
            "Tsallis functional relation holds only for {lo:.6} <= q <= {hi:.6} (got {q})"
        )));
    }
    let (a, b) = schmidt_pair(check_unit(x)?);
    Ok(clamp((1.0 - power_sum(&[a, b], q)) / (q - 1.0)))
}

/// Rényi-q entanglement as a function of the squared concurrence.
pub fn g_renyi(x: f64, q: f64) -> Result<f64> {
    check_q(q, "Renyi")?;
    let (a, b) = schmidt_pair(check_unit(x)?);
    Ok(clamp(power_sum(&[a, b], q).log2() / (1.0 - q)))
}

/// Unified-(q,s) entanglement as a function of the squared concurrence.
pub fn f_unified(x: f64, q: f64, s: f64) -> Result<f64> {
    MeasureKind::Unified { q, s }.validate()?;
    let r = (1.0 - check_unit(x)?).sqrt();
    let two_qs = 2f64.powf(q * s);
    let inner = (1.0 + r).powf(q) + if r < 1.0 { (1.0 - r).powf(q) } else { 0.0 };
    Ok(clamp((inner.powf(s) - two_qs) / (s * (1.0 - q) * two_qs)))
}

fn reduced_spectrum(state: &PureState, cut: &Bipartition) -> Result<Vec<f64>> {
    check_cut(state, cut)?;
    let rho = state.partial_trace(cut.side_a())?;
    Ok(eig_hermitian(rho.matrix())?.values)
}

fn check_cut(state: &PureState, cut: &Bipartition) -> Result<()> {
    if cut.len() != state.register().len() {
        return Err(Error::InvalidIndex(format!(
            "cut over {} subsystems for a {}-subsystem state",
            cut.len(),
            state.register().len()
        )));
    }
    Ok(())
}

/// `sqrt(2 (1 - Tr rho_A^2))`.
pub fn concurrence_pure(state: &PureState, cut: &Bipartition) -> Result<f64> {
    check_cut(state, cut)?;
    let rho = state.partial_trace(cut.side_a())?;
    Ok((2.0 * (1.0 - rho.purity())).max(0.0).sqrt())
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.register().dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit state required, got dims {:?}",
            rho.register().dims()
        )));
    }
    Ok(())
}

/// `(sigma_y x sigma_y) rho^* (sigma_y x sigma_y)`.
pub fn spin_flip(rho: &DensityMatrix) -> Result<CMatrix> {
    require_two_qubit(rho)?;
    let yy = ops::sigma_y().kronecker(&ops::sigma_y());
    Ok(&yy * rho.matrix().conjugate() * &yy)
}

/// Wootters' concurrence `max(0, s1 - s2 - s3 - s4)`.
///
/// The `s_i` (square roots of the eigenvalues of `rho rho~`) are obtained as the
/// singular values of `tau = W^dagger (Y x Y) W^*`, with `W` the eigenvectors of
/// `rho` scaled by the square roots of their eigenvalues. The singular values come
/// from the Hermitian dilation `[[0, tau], [tau^dagger, 0]]`, so tiny values keep
/// absolute accuracy instead of picking up square roots of roundoff.
pub fn concurrence_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    let eig = eig_hermitian(rho.matrix())?;
    let support: Vec<usize> = (0..4).filter(|&k| eig.values[k] > SUPPORT_TOL).collect();
    let r = support.len();
    if r == 0 {
        return Err(Error::domain("zero density matrix"));
    }
    let w = CMatrix::from_fn(4, r, |i, k| {
        let j = support[k];
        eig.vectors[(i, j)] * eig.values[j].sqrt()
    });
    let yy = ops::sigma_y().kronecker(&ops::sigma_y());
    let tau = w.adjoint() * yy * w.conjugate();
    let s = singular_values(&tau)?;
    let get = |i: usize| s.get(i).copied().unwrap_or(0.0);
    Ok((get(0) - get(1) - get(2) - get(3)).max(0.0))
}

/// Eigenvalues of `rho` at or below this are treated as outside its support.
const SUPPORT_TOL: f64 = 1e-14;

/// Singular values (descending) of a square matrix via its Hermitian dilation.
fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut dil = CMatrix::zeros(2 * n, 2 * n);
    dil.view_mut((0, n), (n, n)).copy_from(m);
    dil.view_mut((n, 0), (n, n)).copy_from(&m.adjoint());
    let ev = eig_hermitian(&dil)?.values;
    Ok(ev.into_iter().take(n).map(|v| v.max(0.0)).collect())
}

/// `||rho^{T_A}||_1 - 1`.
pub fn negativity(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    if cut.len() != rho.register().len() {
        return Err(Error::InvalidIndex("cut does not match the state's register".into()));
    }
    let pt = rho.partial_transpose(cut.side_a())?;
    Ok(clamp(trace_norm_hermitian(&pt)? - 1.0))
}

pub fn eof_pure(state: &PureState, cut: &Bipartition) -> Result<f64> {
    MeasureKind::Eof.from_spectrum(&reduced_spectrum(state, cut)?)
}

pub fn tsallis_pure(state: &PureState, cut: &Bipartition, q: f64) -> Result<f64> {
    MeasureKind::Tsallis { q }.from_spectrum(&reduced_spectrum(state, cut)?)
}

pub fn renyi_pure(state: &PureState, cut: &Bipartition, q: f64) -> Result<f64> {
    MeasureKind::Renyi { q }.from_spectrum(&reduced_spectrum(state, cut)?)
}

pub fn unified_pure(state: &PureState, cut: &Bipartition, q: f64, s: f64) -> Result<f64> {
    MeasureKind::Unified { q, s }.from_spectrum(&reduced_spectrum(state, cut)?)
}

/// Squared concurrence of a pure state.
pub fn tangle_pure(state: &PureState, cut: &Bipartition) -> Result<f64> {
    Ok(concurrence_pure(state, cut)?.powi(2))
}

/// `M(rho) = 2 (1 - Tr rho^2)`.
pub fn m_functional(rho: &CMatrix) -> f64 {
    (2.0 * (1.0 - purity(rho))).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// From the reduced spectrum of a pure state (or the trace norm, for negativity).
    Spectral,
    /// Through Wootters' concurrence and the analytic function of `C^2`.
    FunctionalOfC2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    #[serde(flatten)]
    pub kind: MeasureKind,
    pub value: f64,
    pub method: Method,
}

/// Inputs for which a measure is computable without convex-roof optimization.
#[derive(Clone, Copy, Debug)]
pub enum MeasureInput<'a> {
    /// Pure state with a cut (spectral forms hold for any local dimensions).
    Pure(&'a PureState, &'a Bipartition),
    /// Two-qubit mixed state, cut between its two qubits.
    TwoQubit(&'a DensityMatrix),
}

pub fn evaluate(kind: MeasureKind, input: MeasureInput<'_>) -> Result<MeasureValue> {
    kind.validate()?;
    match input {
        MeasureInput::Pure(state, cut) => {
            let value = match kind {
                MeasureKind::Concurrence => concurrence_pure(state, cut)?,
                _ => kind.from_spectrum(&reduced_spectrum(state, cut)?)?,
            };
            Ok(MeasureValue { kind, value, method: Method::Spectral })
        }
        MeasureInput::TwoQubit(rho) => {
            require_two_qubit(rho)?;
            if let MeasureKind::Negativity = kind {
                let cut = Bipartition::new(2, &[0])?;
                return Ok(MeasureValue { kind, value: negativity(rho, &cut)?, method: Method::Spectral });
            }
            let conc = concurrence_two_qubit(rho)?;
            let value = kind.functional(conc * conc).map_err(|e| match e {
                Error::Domain(msg) => Error::unsupported(format!("two-qubit mixed state: {msg}")),
                other => other,
            })?;
            Ok(MeasureValue { kind, value, method: Method::FunctionalOfC2 })
        }
    }
}

/// Measure across `side_a | side_b` of a possibly larger state.
///
/// Pure global states with a covering cut use the spectral route. Otherwise the
/// state is reduced to `side_a + side_b`; the result must be either numerically
/// pure or a two-qubit state with one qubit per side.
pub fn evaluate_cut(
    kind: MeasureKind,
    state: &QuantumState,
    side_a: &[usize],
    side_b: &[usize],
) -> Result<MeasureValue> {
    let reg = state.register();
    let mut keep: Vec<usize> = side_a.iter().chain(side_b).copied().collect();
    keep.sort_unstable();
    let keep = reg.check_subset(&keep)?;
    if let (QuantumState::Pure(p), true) = (state, keep.len() == reg.len()) {
        let cut = Bipartition::from_sides(reg.len(), side_a, side_b)?;
        return evaluate(kind, MeasureInput::Pure(p, &cut));
    }
    let reduced = state.partial_trace(&keep)?;
    let local_a: Vec<usize> = side_a
        .iter()
        .map(|i| keep.iter().position(|k| k == i).expect("side index kept"))
        .collect();
    let cut = Bipartition::new(keep.len(), &local_a)?;
    if reduced.purity() >= 1.0 - 1e-12 {
        let eig = eig_hermitian(reduced.matrix())?;
        let top = eig.vectors.column(0).into_owned();
        let pure = PureState::normalized(reduced.register().clone(), top)?;
        return evaluate(kind, MeasureInput::Pure(&pure, &cut));
    }
    if reduced.register().dims() == [2, 2] {
        return evaluate(kind, MeasureInput::TwoQubit(&reduced));
    }
    Err(Error::unsupported(format!(
        "{kind} of a mixed {:?} state across {side_a:?}|{side_b:?} needs a convex-roof optimization",
        reduced.register().dims()
    )))
}
