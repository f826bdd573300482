//! Weighted monogamy inequalities.
//!
//! Lower bounds compare `E^alpha(A|B_0 ... B_{n-1})` against weighted sums of the
//! pairwise terms `E^alpha(A|B_j)`; upper bounds compare a multi-party cut of a
//! pure state against its single-party cuts. Every check returns a
//! [`MonogamyReport`]; premise failures are flagged rather than raised.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{evaluate_cut, MeasureKind};
use crate::numfmt;
use crate::qstate::{Bipartition, PureState, QuantumState};

/// A report passes when its residual is at least `-PASS_TOL`.
pub const PASS_TOL: f64 = 1e-9;

/// Values at or below this are treated as zero when forming ratios.
pub const ZERO_TOL: f64 = 1e-12;

/// Relative slack when testing an ordering premise against a fixed `gamma`.
const PREMISE_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    BaseDef1,
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Thm5,
    Thm6,
    Thm7Upper,
    Thm8Upper,
    Thm9Upper,
}

impl InequalityKind {
    pub fn is_upper(self) -> bool {
        matches!(self, InequalityKind::Thm7Upper | InequalityKind::Thm8Upper | InequalityKind::Thm9Upper)
    }

    pub fn name(self) -> &'static str {
        match self {
            InequalityKind::BaseDef1 => "base",
            InequalityKind::Thm1 => "thm1",
            InequalityKind::Thm2 => "thm2",
            InequalityKind::Thm3 => "thm3",
            InequalityKind::Thm4 => "thm4",
            InequalityKind::Thm5 => "thm5",
            InequalityKind::Thm6 => "thm6",
            InequalityKind::Thm7Upper => "thm7",
            InequalityKind::Thm8Upper => "thm8",
            InequalityKind::Thm9Upper => "thm9",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhsTerm {
    /// Cut of the term, e.g. `0|2` or `1|rest`.
    pub label: String,
    pub weight: f64,
    /// Unpowered measure value of the term.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub kind: InequalityKind,
    pub measure: MeasureKind,
    pub alpha: f64,
    pub gamma: f64,
    /// Exponent used by the weights.
    pub t: f64,
    /// Left-hand side, already raised to `alpha`.
    pub lhs: f64,
    pub rhs_terms: Vec<RhsTerm>,
    /// `sum weight * value^alpha`.
    pub rhs: f64,
    /// `lhs - rhs` for lower bounds, `rhs - lhs` for upper bounds.
    pub residual: f64,
    pub pass: bool,
    pub premise_ok: bool,
    /// Original subsystem index of each term, in term order.
    pub ordering: Vec<usize>,
}

impl MonogamyReport {
    #[allow(clippy::too_many_arguments)]
    fn build(
        kind: InequalityKind,
        measure: MeasureKind,
        alpha: f64,
        gamma: f64,
        t: f64,
        lhs_value: f64,
        rhs_terms: Vec<RhsTerm>,
        premise_ok: bool,
        ordering: Vec<usize>,
    ) -> Self {
        let lhs = lhs_value.powf(alpha);
        let rhs: f64 = rhs_terms.iter().map(|r| r.weight * r.value.powf(alpha)).sum();
        let residual = if kind.is_upper() { rhs - lhs } else { lhs - rhs };
        MonogamyReport {
            kind,
            measure,
            alpha,
            gamma,
            t,
            lhs,
            rhs_terms,
            rhs,
            residual,
            pass: residual >= -PASS_TOL,
            premise_ok,
            ordering,
        }
    }

    pub const CSV_HEADER: [&'static str; 10] =
        ["kind", "measure", "params", "alpha", "gamma", "lhs", "rhs", "residual", "pass", "premise_ok"];

    /// Row matching [`MonogamyReport::CSV_HEADER`]; numbers carry 12 significant digits.
    pub fn csv_record(&self) -> Vec<String> {
        let params = self
            .measure
            .params()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        vec![
            self.kind.name().to_string(),
            self.measure.name().to_string(),
            params,
            numfmt::sig(self.alpha),
            numfmt::sig(self.gamma),
            numfmt::sig(self.lhs),
            numfmt::sig(self.rhs),
            numfmt::sig(self.residual),
            self.pass.to_string(),
            self.premise_ok.to_string(),
        ]
    }

    /// Copy with every float rounded to 12 significant digits, for emission.
    pub fn rounded(&self) -> Self {
        let r = numfmt::round;
        MonogamyReport {
            alpha: r(self.alpha),
            gamma: r(self.gamma),
            t: r(self.t),
            lhs: r(self.lhs),
            rhs: r(self.rhs),
            residual: r(self.residual),
            rhs_terms: self
                .rhs_terms
                .iter()
                .map(|term| RhsTerm { label: term.label.clone(), weight: r(term.weight), value: r(term.value) })
                .collect(),
            ..self.clone()
        }
    }
}

/// Focus subsystem `A` and the parties `B_j` it is compared against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parties {
    pub focus: usize,
    pub parts: Vec<usize>,
}

impl Parties {
    pub fn new(focus: usize, parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidIndex("no parties to compare against".into()));
        }
        let mut all = parts.clone();
        all.push(focus);
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidIndex(format!("focus {focus} and parts {parts:?} overlap")));
        }
        Ok(Parties { focus, parts })
    }

    /// Subsystem 0 against every other subsystem of an `n`-party state.
    pub fn first_vs_rest(n: usize) -> Result<Self> {
        Parties::new(0, (1..n).collect())
    }
}

/// `gamma` used by the weighted bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    Fixed(f64),
    /// Largest `gamma` the ordered pairwise values allow.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaMode {
    /// `E_j >= gamma * E_{j+1}`.
    Consecutive,
    /// `E_i >= gamma * sum_{j > i} E_j`.
    Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    /// Clamped to at least 1; infinite when fewer than two terms are nonzero.
    pub gamma: f64,
    /// Minimum ratio before clamping.
    pub raw: f64,
    pub premise_ok: bool,
}

impl GammaEstimate {
    pub fn is_finite(&self) -> bool {
        self.gamma.is_finite()
    }
}

pub fn hamming_weight(j: u64) -> u32 {
    j.count_ones()
}

/// Tests `(1 + x)^t >= 1 + ((gamma0 + 1)^t - gamma0^t) x^t` with `1e-12` slack.
pub fn scalar_bound_check(x: f64, t: f64, gamma0: f64) -> Result<bool> {
    if !(gamma0 >= 1.0) || !(t >= 1.0) || !gamma0.is_finite() || !t.is_finite() {
        return Err(Error::domain(format!("need gamma0 >= 1 and t >= 1 (got gamma0={gamma0}, t={t})")));
    }
    if !(0.0..=1.0 / gamma0 + 1e-15).contains(&x) {
        return Err(Error::domain(format!("x={x} outside [0, 1/gamma0]")));
    }
    let weight = (gamma0 + 1.0).powf(t) - gamma0.powf(t);
    Ok((1.0 + x).powf(t) >= 1.0 + weight * x.powf(t) - 1e-12)
}

/// Largest `gamma` for which the descending `values` satisfy the ordering premise.
pub fn feasible_gamma(values: &[f64], mode: GammaMode) -> Result<GammaEstimate> {
    if values.len() < 2 {
        return Err(Error::domain("feasible gamma needs at least two values"));
    }
    if values.windows(2).any(|w| w[0] < w[1] - ZERO_TOL) {
        return Err(Error::domain(format!("values not sorted descending: {values:?}")));
    }
    let nonzero = values.iter().filter(|&&v| v > ZERO_TOL).count();
    if nonzero < 2 {
        return Ok(GammaEstimate { gamma: f64::INFINITY, raw: f64::INFINITY, premise_ok: false });
    }
    let mut raw = f64::INFINITY;
    for i in 0..values.len() - 1 {
        let denom = match mode {
            GammaMode::Consecutive => values[i + 1],
            GammaMode::Tail => values[i + 1..].iter().sum(),
        };
        if denom > ZERO_TOL {
            raw = raw.min(values[i] / denom);
        }
    }
    Ok(GammaEstimate { gamma: raw.max(1.0), raw, premise_ok: raw >= 1.0 })
}

/// `w_i = (i + 1)^t - i^t` for lower bounds, `t >= 1`.
pub fn lemma1_weights(n: usize, t: f64) -> Result<Vec<f64>> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(Error::domain(format!("lower-bound weights need t >= 1 (got {t})")));
    }
    Ok(rank_weights(n, t))
}

/// `w_i = (i + 1)^t - i^t` for upper bounds, `0 <= t <= 1`.
pub fn lemma2_weights(n: usize, t: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("upper-bound weights need 0 <= t <= 1 (got {t})")));
    }
    Ok(rank_weights(n, t))
}

fn rank_weights(n: usize, t: f64) -> Vec<f64> {
    (0..n).map(|i| ((i + 1) as f64).powf(t) - (i as f64).powf(t)).collect()
}

/// Base weight `(gamma0 + 1)^t - gamma0^t` with `gamma0 = gamma^alpha_c`.
pub fn gamma_weight(gamma: f64, alpha: f64, alpha_c: f64) -> f64 {
    let t = alpha / alpha_c;
    let g0 = gamma.powf(alpha_c);
    (g0 + 1.0).powf(t) - g0.powf(t)
}

/// Indices sorted by descending value, ties by original position.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be a finite non-negative number (got {alpha})")));
    }
    Ok(())
}

fn value(measure: MeasureKind, state: &QuantumState, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(evaluate_cut(measure, state, a, b)?.value)
}

struct Sorted {
    values: Vec<f64>,
    ordering: Vec<usize>,
}

fn pairwise_sorted(measure: MeasureKind, state: &QuantumState, parties: &Parties) -> Result<Sorted> {
    let raw = parties
        .parts
        .iter()
        .map(|&b| value(measure, state, &[parties.focus], &[b]))
        .collect::<Result<Vec<f64>>>()?;
    let order = descending_order(&raw);
    Ok(Sorted {
        values: order.iter().map(|&k| raw[k]).collect(),
        ordering: order.iter().map(|&k| parties.parts[k]).collect(),
    })
}

fn focus_lhs(measure: MeasureKind, state: &QuantumState, parties: &Parties) -> Result<f64> {
    let mut parts = parties.parts.clone();
    parts.sort_unstable();
    value(measure, state, &[parties.focus], &parts)
}

fn terms(focus: usize, sorted: &Sorted, weights: impl Fn(usize) -> f64) -> Vec<RhsTerm> {
    sorted
        .values
        .iter()
        .zip(&sorted.ordering)
        .enumerate()
        .map(|(j, (&v, &b))| RhsTerm { label: format!("{focus}|{b}"), weight: weights(j), value: v })
        .collect()
}

/// `E^alpha_c(A|B_0 ... B_{n-1}) >= sum_j E^alpha_c(A|B_j)`.
pub fn check_base(state: &QuantumState, measure: MeasureKind, parties: &Parties) -> Result<MonogamyReport> {
    let sorted = pairwise_sorted(measure, state, parties)?;
    let lhs = focus_lhs(measure, state, parties)?;
    let alpha = measure.alpha_c();
    Ok(MonogamyReport::build(
        InequalityKind::BaseDef1,
        measure,
        alpha,
        1.0,
        1.0,
        lhs,
        terms(parties.focus, &sorted, |_| 1.0),
        true,
        sorted.ordering.clone(),
    ))
}

fn gamma_weighted(
    kind: InequalityKind,
    state: &QuantumState,
    measure: MeasureKind,
    parties: &Parties,
    alpha: f64,
    gamma: Gamma,
) -> Result<MonogamyReport> {
    check_alpha(alpha)?;
    let sorted = pairwise_sorted(measure, state, parties)?;
    let lhs = focus_lhs(measure, state, parties)?;
    let alpha_c = measure.alpha_c();
    let t = alpha / alpha_c;
    let mode = if kind == InequalityKind::Thm3 { GammaMode::Tail } else { GammaMode::Consecutive };
    let (gamma, ordering_ok) = if sorted.values.len() < 2 {
        match gamma {
            Gamma::Fixed(g) => (g, true),
            Gamma::Auto => (1.0, true),
        }
    } else {
        let est = feasible_gamma(&sorted.values, mode)?;
        match gamma {
            Gamma::Auto => (if est.is_finite() { est.gamma } else { 1.0 }, est.premise_ok || !est.is_finite()),
            Gamma::Fixed(g) => (g, est.raw >= g * (1.0 - PREMISE_RTOL)),
        }
    };
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::domain(format!("gamma must be finite and >= 1 (got {gamma})")));
    }
    let base = gamma_weight(gamma, alpha, alpha_c);
    let weight = |j: usize| match kind {
        InequalityKind::Thm3 => base.powi(j as i32),
        _ => base.powi(hamming_weight(j as u64) as i32),
    };
    let premise_ok = ordering_ok && alpha >= alpha_c - 1e-12;
    Ok(MonogamyReport::build(
        kind,
        measure,
        alpha,
        gamma,
        t,
        lhs,
        terms(parties.focus, &sorted, weight),
        premise_ok,
        sorted.ordering.clone(),
    ))
}

/// Three-party weighted bound: `E^alpha(A|BC) >= E^alpha(A|B) + w E^alpha(A|C)`.
pub fn check_thm1(
    state: &QuantumState,
    measure: MeasureKind,
    parties: &Parties,
    alpha: f64,
    gamma: Gamma,
) -> Result<MonogamyReport> {
    if parties.parts.len() != 2 {
        return Err(Error::domain(format!("three-party bound needs two parts, got {}", parties.parts.len())));
    }
    gamma_weighted(InequalityKind::Thm1, state, measure, parties, alpha, gamma)
}

/// Hamming-weight bound with weights `w^{popcount(j)}`.
pub fn check_thm2(
    state: &QuantumState,
    measure: MeasureKind,
    parties: &Parties,
    alpha: f64,
    gamma: Gamma,
) -> Result<MonogamyReport> {
    gamma_weighted(InequalityKind::Thm2, state, measure, parties, alpha, gamma)
}

/// Tail-premise bound with weights `w^j`.
pub fn check_thm3(
    state: &QuantumState,
    measure: MeasureKind,
    parties: &Parties,
    alpha: f64,
    gamma: Gamma,
) -> Result<MonogamyReport> {
    gamma_weighted(InequalityKind::Thm3, state, measure, parties, alpha, gamma)
}

/// Residual of the Hamming-weight bound.
pub fn residual(
    state: &QuantumState,
    measure: MeasureKind,
    parties: &Parties,
    alpha: f64,
    gamma: Gamma,
) -> Result<f64> {
    Ok(check_thm2(state, measure, parties, alpha, gamma)?.residual)
}

struct PairGrid {
    /// `values[i][j] = E(A_i|B_j)`.
    values: Vec<Vec<f64>>,
    lhs: f64,
}

fn pair_grid(state: &QuantumState, measure: MeasureKind, cut: &Bipartition) -> Result<PairGrid> {
    let values = cut
        .side_a()
        .iter()
        .map(|&a| cut.side_b().iter().map(|&b| value(measure, state, &[a], &[b])).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let lhs = value(measure, state, cut.side_a(), cut.side_b())?;
    Ok(PairGrid { values, lhs })
}

/// Multi-party bound with unit weights: `E^alpha(A|B) >= sum_ij E^alpha(A_i|B_j)`.
/// Reported as the critical-exponent form when `alpha = alpha_c`.
pub fn check_thm4_5(
    state: &QuantumState,
    measure: MeasureKind,
    alpha: f64,
    cut: &Bipartition,
) -> Result<MonogamyReport> {
    check_alpha(alpha)?;
    let grid = pair_grid(state, measure, cut)?;
    let alpha_c = measure.alpha_c();
    let kind = if (alpha - alpha_c).abs() <= 1e-12 { InequalityKind::Thm4 } else { InequalityKind::Thm5 };
    let mut rhs_terms = Vec::new();
    let mut ordering = Vec::new();
    for (i, &a) in cut.side_a().iter().enumerate() {
        for (j, &b) in cut.side_b().iter().enumerate() {
            rhs_terms.push(RhsTerm { label: format!("{a}|{b}"), weight: 1.0, value: grid.values[i][j] });
            ordering.push(a * cut.len() + b);
        }
    }
    Ok(MonogamyReport::build(
        kind,
        measure,
        alpha,
        1.0,
        alpha / alpha_c,
        grid.lhs,
        rhs_terms,
        alpha >= alpha_c - 1e-12,
        ordering,
    ))
}

/// Multi-party bound with rank weights `k^t - (k-1)^t`.
///
/// Pair values are ranked in descending order; `premise_ok` reports whether that
/// ranking is a row-major walk of some relabelled `A_i x B_j` grid, which is
/// the ordering the bound assumes. `ordering` holds `a * n + b` per term.
pub fn check_thm6(
    state: &QuantumState,
    measure: MeasureKind,
    alpha: f64,
    cut: &Bipartition,
) -> Result<MonogamyReport> {
    check_alpha(alpha)?;
    let grid = pair_grid(state, measure, cut)?;
    let alpha_c = measure.alpha_c();
    let t = alpha / alpha_c;
    let (side_a, side_b) = (cut.side_a(), cut.side_b());
    let mut flat = Vec::new();
    for (i, row) in grid.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            flat.push((i, j, v));
        }
    }
    let order = descending_order(&flat.iter().map(|p| p.2).collect::<Vec<_>>());
    let weights = rank_weights(flat.len(), t);
    let rhs_terms = order
        .iter()
        .zip(&weights)
        .map(|(&k, &w)| {
            let (i, j, v) = flat[k];
            RhsTerm { label: format!("{}|{}", side_a[i], side_b[j]), weight: w, value: v }
        })
        .collect();
    let ordering = order.iter().map(|&k| side_a[flat[k].0] * cut.len() + side_b[flat[k].1]).collect();
    let premise_ok = alpha >= alpha_c - 1e-12 && grid_walk_sorted(&grid.values);
    Ok(MonogamyReport::build(InequalityKind::Thm6, measure, alpha, 1.0, t, grid.lhs, rhs_terms, premise_ok, ordering))
}

/// Rows sorted by their maximum, each row sorted descending, row-major sequence
/// non-increasing.
fn grid_walk_sorted(values: &[Vec<f64>]) -> bool {
    let mut rows: Vec<Vec<f64>> = values
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.sort_by(|a, b| b.total_cmp(a));
            r
        })
        .collect();
    rows.sort_by(|a, b| b[0].total_cmp(&a[0]));
    let walk: Vec<f64> = rows.into_iter().flatten().collect();
    walk.windows(2).all(|w| w[0] >= w[1] - ZERO_TOL)
}

fn single_party_sorted(measure: MeasureKind, state: &QuantumState, cut: &Bipartition) -> Result<Sorted> {
    let n = state.register().len();
    let raw = cut
        .side_a()
        .iter()
        .map(|&a| {
            let rest: Vec<usize> = (0..n).filter(|&k| k != a).collect();
            value(measure, state, &[a], &rest)
        })
        .collect::<Result<Vec<f64>>>()?;
    let order = descending_order(&raw);
    Ok(Sorted {
        values: order.iter().map(|&k| raw[k]).collect(),
        ordering: order.iter().map(|&k| cut.side_a()[k]).collect(),
    })
}

fn upper_bound(
    kind: InequalityKind,
    state: &PureState,
    cut: &Bipartition,
    measure: MeasureKind,
    alpha: f64,
    t: f64,
) -> Result<MonogamyReport> {
    if cut.len() != state.register().len() {
        return Err(Error::InvalidIndex(format!(
            "cut covers {} of {} subsystems",
            cut.len(),
            state.register().len()
        )));
    }
    let state = QuantumState::Pure(state.clone());
    let sorted = single_party_sorted(measure, &state, cut)?;
    let lhs = value(measure, &state, cut.side_a(), cut.side_b())?;
    let weights = lemma2_weights(sorted.values.len(), t)?;
    let rhs_terms = sorted
        .values
        .iter()
        .zip(&sorted.ordering)
        .zip(&weights)
        .map(|((&v, &a), &w)| RhsTerm { label: format!("{a}|rest"), weight: w, value: v })
        .collect();
    Ok(MonogamyReport::build(kind, measure, alpha, 1.0, t, lhs, rhs_terms, true, sorted.ordering.clone()))
}

/// `C^2(A|B) <= sum_i C^2(A_i|rest)` for a pure state.
pub fn check_thm7_upper(state: &PureState, cut: &Bipartition) -> Result<MonogamyReport> {
    upper_bound(InequalityKind::Thm7Upper, state, cut, MeasureKind::Concurrence, 2.0, 1.0)
}

/// `C^alpha(A|B) <= sum_i (i^t - (i-1)^t) C^alpha(A_i|rest)` with `t = alpha / 2`.
pub fn check_thm8_upper(state: &PureState, cut: &Bipartition, alpha: f64) -> Result<MonogamyReport> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha must lie in [0, 2] (got {alpha})")));
    }
    upper_bound(InequalityKind::Thm8Upper, state, cut, MeasureKind::Concurrence, alpha, alpha / 2.0)
}

/// Unified-entropy analogue of the weighted upper bound, `t = alpha`.
pub fn check_thm9_upper(
    state: &PureState,
    cut: &Bipartition,
    alpha: f64,
    q: f64,
    s: f64,
) -> Result<MonogamyReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha must lie in [0, 1] (got {alpha})")));
    }
    if !(q > 1.0) || !(q * s >= 1.0) || !q.is_finite() || !s.is_finite() {
        return Err(Error::domain(format!("need q > 1 and q*s >= 1 (got q={q}, s={s})")));
    }
    upper_bound(InequalityKind::Thm9Upper, state, cut, MeasureKind::Unified { q, s }, alpha, alpha)
}
