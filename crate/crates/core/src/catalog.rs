//! Example state families, their closed-form concurrences, and the residual sweeps
//! over them.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{evaluate_cut, MeasureKind};
use crate::monogamy::{check_thm1, check_thm2, Gamma, InequalityKind, Parties};
use crate::numfmt;
use crate::qstate::{c, CVector, PureState, QuantumState, Register};

pub const MAX_DICKE_QUBITS: usize = 12;

/// Amplitudes `lambda_2`, `lambda_3` of the restricted three-qubit family.
pub const ACIN_LAMBDA2: f64 = FRAC_1_SQRT_2;
pub const ACIN_LAMBDA3: f64 = 0.5;

const PARAM_TOL: f64 = 1e-10;
/// Largest norm deviation of `dfs:a,b` shorthand amplitudes before they are rescaled.
pub const SHORTHAND_NORM_TOL: f64 = 1e-3;
/// Qubit count of the bare `product` shorthand.
pub const DEFAULT_PRODUCT_QUBITS: usize = 3;

/// A named state family with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Three-qubit normal form with amplitudes `lambdas` and phase `phase` on `|100>`.
    Acin { lambdas: [f64; 5], phase: f64 },
    /// Restricted normal form at spherical angles `(theta, phi)`, phase 0.
    AcinAngles { theta: f64, phi: f64 },
    DecoherenceFree { a: f64, b: f64 },
    Dicke { n: usize, k: usize },
    Bell,
    Ghz { n: usize },
    W { n: usize },
    Product { n: usize },
}

impl FamilySpec {
    pub fn build(&self) -> Result<PureState> {
        match *self {
            FamilySpec::Acin { lambdas, phase } => acin_state(lambdas, phase),
            FamilySpec::AcinAngles { theta, phi } => acin_state(acin_from_angles(theta, phi)?, 0.0),
            FamilySpec::DecoherenceFree { a, b } => dfs_state(a, b),
            FamilySpec::Dicke { n, k } => dicke_state(n, k),
            FamilySpec::Bell => Ok(bell()),
            FamilySpec::Ghz { n } => ghz(n),
            FamilySpec::W { n } => w_state(n),
            FamilySpec::Product { n } => product(n),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilySpec::Acin { lambdas: l, phase } => {
                write!(f, "acin:{},{},{},{},{},{}", l[0], l[1], l[2], l[3], l[4], phase)
            }
            FamilySpec::AcinAngles { theta, phi } => write!(f, "acin:{theta},{phi}"),
            FamilySpec::DecoherenceFree { a, b } => write!(f, "dfs:{a},{b}"),
            FamilySpec::Dicke { n, k } => write!(f, "dicke:{n},{k}"),
            FamilySpec::Bell => f.write_str("bell"),
            FamilySpec::Ghz { n } => write!(f, "ghz:{n}"),
            FamilySpec::W { n } => write!(f, "w:{n}"),
            FamilySpec::Product { n } => write!(f, "product:{n}"),
        }
    }
}

/// Parses shorthands such as `dicke:4,2`, `dfs:0.7071,0.7071`, `acin:0.3,1.1`,
/// `acin:l0,l1,l2,l3,l4,phase`, `bell`, `ghz:3`, `w:3`, `product:2`.
impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), a.trim()),
            None => (s.trim(), ""),
        };
        let bad = || Error::domain(format!("cannot parse state shorthand '{s}'"));
        let floats = || -> Result<Vec<f64>> {
            args.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect()
        };
        let ints = || -> Result<Vec<usize>> {
            args.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| bad())).collect()
        };
        let spec = match name.to_ascii_lowercase().as_str() {
            "bell" if args.is_empty() => FamilySpec::Bell,
            "dicke" => match ints()?[..] {
                [n, k] => FamilySpec::Dicke { n, k },
                _ => return Err(bad()),
            },
            "ghz" => match ints()?[..] {
                [n] => FamilySpec::Ghz { n },
                _ => return Err(bad()),
            },
            "w" => match ints()?[..] {
                [n] => FamilySpec::W { n },
                _ => return Err(bad()),
            },
            "product" if args.is_empty() => FamilySpec::Product { n: DEFAULT_PRODUCT_QUBITS },
            "product" => match ints()?[..] {
                [n] => FamilySpec::Product { n },
                _ => return Err(bad()),
            },
            "dfs" => match floats()?[..] {
                [a, b] => {
                    // Accept amplitudes rounded to a few digits, e.g. 0.7071,0.7071.
                    let norm = a.hypot(b);
                    if (norm - 1.0).abs() > SHORTHAND_NORM_TOL {
                        return Err(Error::NotNormalized(norm));
                    }
                    FamilySpec::DecoherenceFree { a: a / norm, b: b / norm }
                }
                _ => return Err(bad()),
            },
            "acin" => match floats()?[..] {
                [theta, phi] => FamilySpec::AcinAngles { theta, phi },
                [l0, l1, l2, l3, l4, phase] => FamilySpec::Acin { lambdas: [l0, l1, l2, l3, l4], phase },
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        };
        spec.build()?;
        Ok(spec)
    }
}

fn qubits(n: usize) -> Result<Register> {
    Register::qubits(n)
}

pub fn bell() -> PureState {
    PureState::from_real(Register::qubits(2).expect("two qubits"), &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])
        .expect("normalized")
}

pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::domain(format!("GHZ state needs n >= 2 (got {n})")));
    }
    let reg = qubits(n)?;
    let mut amps = CVector::zeros(reg.dim());
    amps[0] = c(FRAC_1_SQRT_2, 0.0);
    amps[reg.dim() - 1] = c(FRAC_1_SQRT_2, 0.0);
    PureState::new(reg, amps)
}

pub fn w_state(n: usize) -> Result<PureState> {
    dicke_state(n, 1)
}

pub fn product(n: usize) -> Result<PureState> {
    PureState::basis(qubits(n)?, 0)
}

/// `l0|000> + l1 e^{i phase}|100> + l2|101> + l3|110> + l4|111>`.
pub fn acin_state(lambdas: [f64; 5], phase: f64) -> Result<PureState> {
    if lambdas.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::domain(format!("amplitudes must be non-negative: {lambdas:?}")));
    }
    if !(0.0..=PI).contains(&phase) {
        return Err(Error::domain(format!("phase {phase} outside [0, pi]")));
    }
    let norm: f64 = lambdas.iter().map(|l| l * l).sum();
    if (norm - 1.0).abs() > PARAM_TOL {
        return Err(Error::NotNormalized(norm.sqrt()));
    }
    let mut amps = CVector::zeros(8);
    amps[0b000] = c(lambdas[0], 0.0);
    amps[0b100] = c(lambdas[1] * phase.cos(), lambdas[1] * phase.sin());
    amps[0b101] = c(lambdas[2], 0.0);
    amps[0b110] = c(lambdas[3], 0.0);
    amps[0b111] = c(lambdas[4], 0.0);
    PureState::normalized(qubits(3)?, amps)
}

/// Restricted-family amplitudes at spherical angles, `0 <= theta, phi <= pi/2`.
pub fn acin_from_angles(theta: f64, phi: f64) -> Result<[f64; 5]> {
    let range = 0.0..=FRAC_PI_2 + 1e-12;
    if !range.contains(&theta) || !range.contains(&phi) {
        return Err(Error::domain(format!("angles ({theta}, {phi}) outside [0, pi/2]")));
    }
    Ok([
        0.5 * phi.sin() * theta.cos(),
        0.5 * phi.sin() * theta.sin(),
        ACIN_LAMBDA2,
        ACIN_LAMBDA3,
        0.5 * phi.cos(),
    ])
}

/// `(C(A|BC), C(A|B), C(A|C))` of the normal form with phase 0.
///
/// Uses the closed form on the restricted family and the numeric pipeline otherwise.
pub fn acin_concurrences(lambdas: [f64; 5]) -> Result<(f64, f64, f64)> {
    let restricted =
        (lambdas[2] - ACIN_LAMBDA2).abs() <= 1e-12 && (lambdas[3] - ACIN_LAMBDA3).abs() <= 1e-12;
    if restricted {
        let [l0, l1, ..] = lambdas;
        let norm: f64 = lambdas.iter().map(|l| l * l).sum();
        if (norm - 1.0).abs() > PARAM_TOL || lambdas.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::NotNormalized(norm.sqrt()));
        }
        return Ok((2.0 * l0 * (1.0 - l0 * l0 - l1 * l1).max(0.0).sqrt(), l0, SQRT_2 * l0));
    }
    let state = QuantumState::Pure(acin_state(lambdas, 0.0)?);
    let conc = |a: &[usize], b: &[usize]| -> Result<f64> {
        Ok(evaluate_cut(MeasureKind::Concurrence, &state, a, b)?.value)
    };
    Ok((conc(&[0], &[1, 2])?, conc(&[0], &[1])?, conc(&[0], &[2])?))
}

/// Logical basis states of the four-qubit decoherence-free code.
pub fn dfs_basis() -> (PureState, PureState) {
    let reg = || Register::qubits(4).expect("four qubits");
    let mut zero = [0.0; 16];
    zero[0b0101] = 0.5;
    zero[0b0110] = -0.5;
    zero[0b1001] = -0.5;
    zero[0b1010] = 0.5;
    let mut one = [0.0; 16];
    let k = 1.0 / (2.0 * 3f64.sqrt());
    one[0b1100] = 2.0 * k;
    one[0b0011] = 2.0 * k;
    for i in [0b1010, 0b1001, 0b0101, 0b0110] {
        one[i] = -k;
    }
    (
        PureState::from_real(reg(), &zero).expect("normalized"),
        PureState::from_real(reg(), &one).expect("normalized"),
    )
}

/// `a|Psi_0> + b|Psi_1>` with `a^2 + b^2 = 1`.
pub fn dfs_state(a: f64, b: f64) -> Result<PureState> {
    if ((a * a + b * b) - 1.0).abs() > PARAM_TOL {
        return Err(Error::NotNormalized((a * a + b * b).sqrt()));
    }
    let (zero, one) = dfs_basis();
    let amps = zero.amplitudes().map(|z| z * a) + one.amplitudes().map(|z| z * b);
    PureState::normalized(zero.register().clone(), amps)
}

fn check_dicke(n: usize, k: usize) -> Result<()> {
    if !(2..=MAX_DICKE_QUBITS).contains(&n) || k == 0 || k >= n {
        return Err(Error::domain(format!(
            "Dicke state needs 2 <= n <= {MAX_DICKE_QUBITS} and 1 <= k <= n-1 (got n={n}, k={k})"
        )));
    }
    Ok(())
}

/// Equal superposition of all `n`-qubit basis states with `k` ones.
pub fn dicke_state(n: usize, k: usize) -> Result<PureState> {
    check_dicke(n, k)?;
    let reg = qubits(n)?;
    let amps = CVector::from_iterator(
        reg.dim(),
        (0..reg.dim()).map(|i| if i.count_ones() as usize == k { c(1.0, 0.0) } else { c(0.0, 0.0) }),
    );
    PureState::normalized(reg, amps)
}

/// `(C(A_1|rest), C(A_1|A_i))` of the Dicke state.
pub fn dicke_concurrences(n: usize, k: usize) -> Result<(f64, f64)> {
    check_dicke(n, k)?;
    let (n, k) = (n as f64, k as f64);
    let one_vs_rest = 2.0 * (k * (n - k)).sqrt() / n;
    let pair = 2.0 * k * (n - k) / (n * (n - 1.0))
        - 2.0 * (k * (k - 1.0) * (n - k) * (n - k - 1.0)).sqrt() / (n * (n - 1.0));
    Ok((one_vs_rest, pair))
}

/// Measure sets of the three figures.
pub fn fig1_measures() -> Vec<MeasureKind> {
    vec![
        MeasureKind::Concurrence,
        MeasureKind::Eof,
        MeasureKind::Tsallis { q: 0.7 },
        MeasureKind::Renyi { q: 0.9 },
        MeasureKind::Unified { q: 1.1, s: 0.4 },
    ]
}

pub fn fig2_measures() -> Vec<MeasureKind> {
    vec![
        MeasureKind::Concurrence,
        MeasureKind::Eof,
        MeasureKind::Tsallis { q: 0.7 },
        MeasureKind::Renyi { q: 1.2 },
        MeasureKind::Unified { q: 1.4, s: 0.6 },
    ]
}

pub fn fig3_measures() -> Vec<MeasureKind> {
    vec![
        MeasureKind::Concurrence,
        MeasureKind::Eof,
        MeasureKind::Tsallis { q: 4.3 },
        MeasureKind::Renyi { q: 1.3 },
        MeasureKind::Unified { q: 2.0, s: 0.7 },
    ]
}

/// The three `(a, b)` cases of the decoherence-free sweep.
pub fn fig2_cases() -> Vec<(f64, f64)> {
    vec![
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        (6f64.sqrt() / 3.0, 1.0 / 3f64.sqrt()),
        (2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt()),
    ]
}

/// The three Dicke families `(n, k)` of the Dicke sweep.
pub fn fig3_families() -> Vec<(usize, usize)> {
    vec![(4, 2), (5, 2), (6, 3)]
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub sweep: String,
    pub family: String,
    pub inequality: InequalityKind,
    pub measures: Vec<MeasureKind>,
    pub gamma: Gamma,
    pub grid: serde_json::Value,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    /// One residual per measure; `None` where the exponent lies below the
    /// measure's critical exponent and the sweep skips it.
    pub residuals: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub meta: SweepMeta,
    pub coord_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepGrid {
    pub fn residual_names(&self) -> Vec<String> {
        self.meta.measures.iter().map(|m| format!("tau:{m}")).collect()
    }

    /// Smallest evaluated residual.
    pub fn min_residual(&self) -> Option<f64> {
        self.rows.iter().flat_map(|r| r.residuals.iter().flatten().copied()).reduce(f64::min)
    }

    /// Residual column of one measure, `None` cells dropped.
    pub fn column(&self, measure: usize) -> Vec<(Vec<f64>, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.residuals[measure].map(|v| (r.coords.clone(), v)))
            .collect()
    }

    /// A `# {json}` metadata line, then a header and one row per grid point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", serde_json::to_string(&self.meta)?)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["family".to_string()];
        header.extend(self.coord_names.iter().cloned());
        header.extend(self.residual_names());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![self.meta.family.clone()];
            rec.extend(row.coords.iter().map(|&x| numfmt::sig(x)));
            rec.extend(row.residuals.iter().map(|v| v.map(numfmt::sig).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn residual_row(
    state: &QuantumState,
    measures: &[MeasureKind],
    alpha: f64,
    eval: impl Fn(&QuantumState, MeasureKind, f64) -> Result<f64>,
    skip_below_critical: bool,
) -> Result<Vec<Option<f64>>> {
    measures
        .iter()
        .map(|&m| {
            if skip_below_critical && alpha < m.alpha_c() - 1e-12 {
                Ok(None)
            } else {
                eval(state, m, alpha).map(Some)
            }
        })
        .collect()
}

/// Three-party weighted residual over the restricted normal form on a
/// `resolution x resolution` grid of `(theta, phi)` in `[0, pi/2]^2`, `gamma = sqrt 2`.
pub fn sweep_fig1(resolution: usize, measures: &[MeasureKind], alpha: f64) -> Result<SweepGrid> {
    if resolution == 0 {
        return Err(Error::domain("grid resolution must be positive"));
    }
    let axis = linspace(0.0, FRAC_PI_2, resolution);
    let points: Vec<(f64, f64)> = axis.iter().flat_map(|&t| axis.iter().map(move |&p| (t, p))).collect();
    let parties = Parties::first_vs_rest(3)?;
    let gamma = Gamma::Fixed(SQRT_2);
    let rows = points
        .par_iter()
        .map(|&(theta, phi)| {
            let state = QuantumState::Pure(acin_state(acin_from_angles(theta, phi)?, 0.0)?);
            let residuals = residual_row(
                &state,
                measures,
                alpha,
                |s, m, a| Ok(check_thm1(s, m, &parties, a, gamma)?.residual),
                false,
            )?;
            Ok(SweepRow { coords: vec![theta, phi], residuals })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        meta: SweepMeta {
            sweep: "fig1".into(),
            family: "acin".into(),
            inequality: InequalityKind::Thm1,
            measures: measures.to_vec(),
            gamma,
            grid: serde_json::json!({
                "theta": [0.0, FRAC_PI_2, resolution],
                "phi": [0.0, FRAC_PI_2, resolution],
                "alpha": alpha,
                "lambda2": ACIN_LAMBDA2,
                "lambda3": ACIN_LAMBDA3,
            }),
            seed: None,
        },
        coord_names: vec!["theta".into(), "phi".into()],
        rows,
    })
}

/// Hamming-weight residual of the decoherence-free state for each `(a, b)` case
/// and exponent. Exponents below a measure's critical value are skipped.
pub fn sweep_fig2(
    cases: &[(f64, f64)],
    measures: &[MeasureKind],
    alphas: &[f64],
    gamma: Gamma,
) -> Result<SweepGrid> {
    let parties = Parties::first_vs_rest(4)?;
    let states = cases
        .iter()
        .map(|&(a, b)| dfs_state(a, b).map(QuantumState::Pure))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, f64)> =
        (0..cases.len()).flat_map(|i| alphas.iter().map(move |&a| (i, a))).collect();
    let rows = points
        .par_iter()
        .map(|&(i, alpha)| {
            let residuals = residual_row(
                &states[i],
                measures,
                alpha,
                |s, m, a| Ok(check_thm2(s, m, &parties, a, gamma)?.residual),
                true,
            )?;
            Ok(SweepRow { coords: vec![(i + 1) as f64, cases[i].0, cases[i].1, alpha], residuals })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        meta: SweepMeta {
            sweep: "fig2".into(),
            family: "dfs".into(),
            inequality: InequalityKind::Thm2,
            measures: measures.to_vec(),
            gamma,
            grid: serde_json::json!({ "cases": cases, "alpha": alphas }),
            seed: None,
        },
        coord_names: vec!["case".into(), "a".into(), "b".into(), "alpha".into()],
        rows,
    })
}

/// Hamming-weight residual (`gamma = 1`) of Dicke states over exponents.
/// Every exponent is evaluated, including those below the critical value.
pub fn sweep_fig3(families: &[(usize, usize)], measures: &[MeasureKind], alphas: &[f64]) -> Result<SweepGrid> {
    if let Some(a) = alphas.iter().find(|&&a| !(0.0..=5.0).contains(&a)) {
        return Err(Error::domain(format!("exponent {a} outside [0, 5]")));
    }
    let states = families
        .iter()
        .map(|&(n, k)| dicke_state(n, k).map(QuantumState::Pure))
        .collect::<Result<Vec<_>>>()?;
    let gamma = Gamma::Fixed(1.0);
    let points: Vec<(usize, f64)> =
        (0..families.len()).flat_map(|i| alphas.iter().map(move |&a| (i, a))).collect();
    let rows = points
        .par_iter()
        .map(|&(i, alpha)| {
            let (n, k) = families[i];
            let parties = Parties::first_vs_rest(n)?;
            let residuals = residual_row(
                &states[i],
                measures,
                alpha,
                |s, m, a| Ok(check_thm2(s, m, &parties, a, gamma)?.residual),
                false,
            )?;
            Ok(SweepRow { coords: vec![n as f64, k as f64, alpha], residuals })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        meta: SweepMeta {
            sweep: "fig3".into(),
            family: "dicke".into(),
            inequality: InequalityKind::Thm2,
            measures: measures.to_vec(),
            gamma,
            grid: serde_json::json!({ "families": families, "alpha": alphas }),
            seed: None,
        },
        coord_names: vec!["n".into(), "k".into(), "alpha".into()],
        rows,
    })
}
