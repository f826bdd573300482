//! Concentration of the linear-entropy functional `M(rho) = 2 (1 - Tr rho^2)` for
//! random states, and an upper bound on the mixed-state tangle of random induced
//! states.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::concurrence_two_qubit;
use crate::qstate::{
    c, eig_hermitian, sample_haar_pure, sample_induced_on, stream_rng, CMatrix, CVector, DensityMatrix,
    Register,
};

/// Eigenvalues below this fraction of the largest are outside the support.
pub const SUPPORT_RTOL: f64 = 1e-12;

/// Random support vectors probed per sample for the minimum of `M`.
pub const SUPPORT_PROBES: usize = 64;

/// Default proposals per restart of the decomposition search.
pub const DEFAULT_INNER_ITERS: usize = 400;

/// Haar average of `M` over pure states on `C^n (x) C^s`.
pub fn lubkin_mean(n: usize, s: usize) -> f64 {
    let (n, s) = (n as f64, s as f64);
    2.0 - 2.0 * (n + s) / (1.0 + n * s)
}

/// Typical tangle value `2 - 2d/(1 + d^2)` quoted for induced states on `C^d (x) C^d`.
pub fn theorem10_typical(d: usize) -> f64 {
    let d = d as f64;
    2.0 - 2.0 * d / (1.0 + d * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSpec {
    /// Dimension of the kept side.
    pub n: usize,
    /// Environment dimension.
    pub s: usize,
    pub samples: usize,
    /// Deviation threshold.
    pub t: f64,
    pub seed: u64,
}

impl ConcentrationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.s == 0 || self.samples == 0 {
            return Err(Error::domain("n, s and samples must be at least 1"));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::domain(format!("threshold t must be positive (got {})", self.t)));
        }
        Register::new(vec![self.n, self.s])?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationStats {
    pub experiment: String,
    pub n: usize,
    pub s: usize,
    pub samples: usize,
    pub t: f64,
    pub seed: u64,
    pub empirical_mean: f64,
    pub empirical_std: f64,
    pub typical: f64,
    /// Fraction of samples with `|value - typical| > t`.
    pub deviation_prob: f64,
    /// Fraction of samples with `|value - typical| <= t`.
    pub in_band_fraction: f64,
    /// Local dimension `d` of induced-state runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Per-sample tangle upper bounds of induced-state runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangle_upper_bounds: Option<Vec<f64>>,
    /// Per-sample squared two-qubit concurrence, when `d = 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concurrence_sq: Option<Vec<f64>>,
    /// Smallest `M` over random pure vectors drawn from the supports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_min_m: Option<f64>,
    /// Per-sample values behind the statistics.
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl ConcentrationStats {
    fn from_values(experiment: &str, spec: &ConcentrationSpec, typical: f64, values: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&values);
        let deviating = values.iter().filter(|&&v| (v - typical).abs() > spec.t).count();
        let deviation_prob = deviating as f64 / values.len() as f64;
        ConcentrationStats {
            experiment: experiment.into(),
            n: spec.n,
            s: spec.s,
            samples: spec.samples,
            t: spec.t,
            seed: spec.seed,
            empirical_mean: mean,
            empirical_std: std,
            typical,
            deviation_prob,
            in_band_fraction: 1.0 - deviation_prob,
            d: None,
            restarts: None,
            tangle_upper_bounds: None,
            concurrence_sq: None,
            support_min_m: None,
            values,
        }
    }

    /// Fraction of samples within `t` of an arbitrary center.
    pub fn in_band_around(&self, center: f64) -> f64 {
        let inside = self.values.iter().filter(|&&v| (v - center).abs() <= self.t).count();
        inside as f64 / self.values.len() as f64
    }

    /// Per-sample CSV: `index,value[,concurrence_sq]`.
    pub fn write_samples_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let with_c2 = self.concurrence_sq.as_ref();
        let mut header = vec!["index", "value"];
        if with_c2.is_some() {
            header.push("concurrence_sq");
        }
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut rec = vec![i.to_string(), crate::numfmt::sig(*v)];
            if let Some(c2) = with_c2 {
                rec.push(crate::numfmt::sig(c2[i]));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Copy with floats rounded to 12 significant digits, for emission.
    pub fn rounded(&self) -> Self {
        let r = crate::numfmt::round;
        let rv = |v: &Vec<f64>| v.iter().map(|&x| r(x)).collect::<Vec<_>>();
        ConcentrationStats {
            t: r(self.t),
            empirical_mean: r(self.empirical_mean),
            empirical_std: r(self.empirical_std),
            typical: r(self.typical),
            deviation_prob: r(self.deviation_prob),
            in_band_fraction: r(self.in_band_fraction),
            tangle_upper_bounds: self.tangle_upper_bounds.as_ref().map(rv),
            concurrence_sq: self.concurrence_sq.as_ref().map(rv),
            support_min_m: self.support_min_m.map(r),
            ..self.clone()
        }
    }
}

/// Compensated (Neumaier) sum.
fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and sample standard deviation.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = neumaier_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, var.sqrt())
}

/// Independent seed for sub-streams of sample `index`.
fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `M` of the first-factor marginal of a pure vector on `C^n (x) C^s`,
/// normalized by its squared norm.
fn m_of_vector(amps: &[Complex64], n: usize, s: usize) -> f64 {
    if n == 1 || s == 1 {
        return 0.0;
    }
    let x = CMatrix::from_row_iterator(n, s, amps.iter().copied());
    let rho = &x * x.adjoint();
    let norm = (0..n).map(|i| rho[(i, i)].re).sum::<f64>();
    let tr_sq: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
    (2.0 * (1.0 - tr_sq / (norm * norm))).max(0.0)
}

/// Haar pure states on `C^n (x) C^s`: statistics of `M` of the `C^n` marginal
/// against the Haar average.
pub fn run_lemma6(spec: &ConcentrationSpec) -> Result<ConcentrationStats> {
    spec.validate()?;
    let reg = Register::new(vec![spec.n, spec.s])?;
    let values: Vec<f64> = (0..spec.samples as u64)
        .into_par_iter()
        .map(|i| {
            let psi = sample_haar_pure(&reg, &mut stream_rng(spec.seed, i));
            m_of_vector(psi.amplitudes().as_slice(), spec.n, spec.s)
        })
        .collect();
    Ok(ConcentrationStats::from_values("lemma6", spec, lubkin_mean(spec.n, spec.s), values))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzProbe {
    pub pairs: usize,
    pub max_ratio: f64,
}

/// Largest `|M(psi) - M(phi)| / ||psi - phi||` over sampled unit-vector pairs on
/// `C^n (x) C^s`. Half the pairs are independent Haar draws; the rest are local
/// perturbations at log-uniform scales between `1e-6` and `1e-1`.
pub fn lipschitz_probe(n: usize, s: usize, pairs: usize, seed: u64) -> Result<LipschitzProbe> {
    if pairs == 0 {
        return Err(Error::domain("need at least one pair"));
    }
    let reg = Register::new(vec![n, s])?;
    let dim = reg.dim();
    let ratios: Vec<f64> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let psi = sample_haar_pure(&reg, &mut rng).amplitudes().clone();
            let phi = if i % 2 == 0 {
                sample_haar_pure(&reg, &mut rng).amplitudes().clone()
            } else {
                let scale = 10f64.powf(-6.0 + 5.0 * rng.random::<f64>());
                let kick = CVector::from_fn(dim, |_, _| {
                    c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
                });
                let v = &psi + kick * c(scale / (2.0 * dim as f64).sqrt(), 0.0);
                let norm = v.norm();
                v / c(norm, 0.0)
            };
            pair_ratio(&psi, &phi, n, s)
        })
        .collect();
    Ok(LipschitzProbe { pairs, max_ratio: ratios.into_iter().fold(0.0, f64::max) })
}

fn pair_ratio(psi: &CVector, phi: &CVector, n: usize, s: usize) -> f64 {
    let dist = (psi - phi).norm();
    if dist == 0.0 {
        return 0.0;
    }
    (m_of_vector(psi.as_slice(), n, s) - m_of_vector(phi.as_slice(), n, s)).abs() / dist
}

/// Ratio for one explicit pair of unit vectors.
pub fn lipschitz_ratio(psi: &CVector, phi: &CVector, n: usize, s: usize) -> Result<f64> {
    if psi.len() != n * s || phi.len() != n * s {
        return Err(Error::DimensionMismatch(format!("vectors must have length {}", n * s)));
    }
    Ok(pair_ratio(psi, phi, n, s))
}

/// Weighted support vectors `sqrt(lambda_i) v_i` as columns, with the local dimension `d`.
struct Support {
    weighted: CMatrix,
    d: usize,
}

fn support(rho: &DensityMatrix) -> Result<Support> {
    let dims = rho.register().dims();
    let d = match dims {
        [a, b] if a == b && (2..=3).contains(a) => *a,
        [4] => 2,
        [9] => 3,
        _ => {
            return Err(Error::domain(format!(
                "tangle bound needs a state on C^d (x) C^d with d in {{2, 3}} (got dims {dims:?})"
            )))
        }
    };
    let eig = eig_hermitian(rho.matrix())?;
    let top = eig.values[0].max(0.0);
    let kept: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > SUPPORT_RTOL * top).collect();
    let dim = rho.dim();
    let weighted = CMatrix::from_fn(dim, kept.len(), |row, col| {
        eig.vectors[(row, kept[col])] * eig.values[kept[col]].sqrt()
    });
    Ok(Support { weighted, d })
}

/// `p_j M(phi_j)` for the unnormalized decomposition vector `v` (norm^2 = p_j).
fn weighted_m(v: &[Complex64], d: usize) -> f64 {
    let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if p <= 0.0 {
        return 0.0;
    }
    let mut tr_sq = 0.0;
    for i in 0..d {
        for k in 0..d {
            let mut e = Complex64::new(0.0, 0.0);
            for j in 0..d {
                e += v[i * d + j] * v[k * d + j].conj();
            }
            tr_sq += e.norm_sqr();
        }
    }
    (2.0 * (p - tr_sq / p)).max(0.0)
}

fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    g.qr().q()
}

/// Rows `a`, `b` of the decomposition after the rotation
/// `[[cos, -e sin], [conj(e) sin, cos]]`.
fn rotate(va: &[Complex64], vb: &[Complex64], angle: f64, e: Complex64, out_a: &mut [Complex64], out_b: &mut [Complex64]) {
    let (cs, sn) = (angle.cos(), angle.sin());
    for k in 0..va.len() {
        out_a[k] = va[k] * cs - vb[k] * e * sn;
        out_b[k] = va[k] * e.conj() * sn + vb[k] * cs;
    }
}

/// One restart: random isometry followed by greedy moves, each a two-row
/// rotation with a random phase and the best of a few trial angles.
fn search_restart<R: Rng + ?Sized>(sup: &Support, inner_iters: usize, rng: &mut R) -> f64 {
    let r = sup.weighted.ncols();
    let rp = 2 * r;
    let dim = sup.weighted.nrows();
    let u = random_isometry(rp, r, rng);
    // Row j of the decomposition: sum_i U[j, i] sqrt(lambda_i) v_i.
    let mut vecs: Vec<Vec<Complex64>> =
        (0..rp).map(|j| (&sup.weighted * u.row(j).transpose()).iter().copied().collect()).collect();
    let mut costs: Vec<f64> = vecs.iter().map(|v| weighted_m(v, sup.d)).collect();
    let mut step = 0.5;
    let (mut ta, mut tb) = (vec![Complex64::new(0.0, 0.0); dim], vec![Complex64::new(0.0, 0.0); dim]);
    let (mut ba, mut bb) = (ta.clone(), tb.clone());
    for _ in 0..inner_iters {
        let a = rng.random_range(0..rp);
        let mut b = rng.random_range(0..rp - 1);
        if b >= a {
            b += 1;
        }
        let phase = std::f64::consts::TAU * rng.random::<f64>();
        let e = Complex64::new(phase.cos(), phase.sin());
        let current = costs[a] + costs[b];
        let mut best = (current, 0.0, 0.0, 0.0);
        for angle in [step, -step, 0.25 * step, -0.25 * step] {
            rotate(&vecs[a], &vecs[b], angle, e, &mut ta, &mut tb);
            let (ca, cb) = (weighted_m(&ta, sup.d), weighted_m(&tb, sup.d));
            if ca + cb < best.0 {
                best = (ca + cb, angle, ca, cb);
                ba.copy_from_slice(&ta);
                bb.copy_from_slice(&tb);
            }
        }
        if best.0 < current {
            vecs[a].copy_from_slice(&ba);
            vecs[b].copy_from_slice(&bb);
            costs[a] = best.2;
            costs[b] = best.3;
            if best.1.abs() == step {
                step = (step * 1.5).min(1.5);
            }
        } else {
            step = (step * 0.9).max(1e-5);
        }
    }
    neumaier_sum(costs.iter().copied())
}

/// Best-so-far decomposition cost after each restart.
pub fn tangle_upper_bound_trace(
    rho: &DensityMatrix,
    restarts: usize,
    inner_iters: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if restarts == 0 {
        return Err(Error::domain("need at least one restart"));
    }
    let sup = support(rho)?;
    if sup.weighted.ncols() == 1 {
        let v: Vec<Complex64> = sup.weighted.column(0).iter().copied().collect();
        return Ok(vec![weighted_m(&v, sup.d); restarts]);
    }
    let per_restart: Vec<f64> = (0..restarts as u64)
        .into_par_iter()
        .map(|k| search_restart(&sup, inner_iters, &mut stream_rng(seed, k)))
        .collect();
    let mut best = f64::INFINITY;
    Ok(per_restart
        .into_iter()
        .map(|v| {
            best = best.min(v);
            best
        })
        .collect())
}

/// Upper bound on the mixed-state tangle: minimum of `sum_j p_j M(phi_j)` over the
/// decompositions visited by a randomized search restricted to the support.
pub fn tangle_upper_bound(rho: &DensityMatrix, restarts: usize, inner_iters: usize, seed: u64) -> Result<f64> {
    Ok(*tangle_upper_bound_trace(rho, restarts, inner_iters, seed)?.last().expect("restarts >= 1"))
}

/// Smallest `M` among random unit vectors drawn from the support of `rho`.
fn support_min_m<R: Rng + ?Sized>(rho: &DensityMatrix, probes: usize, rng: &mut R) -> Result<f64> {
    let sup = support(rho)?;
    let basis = normalize_columns(&sup.weighted);
    let mut best = f64::INFINITY;
    for _ in 0..probes {
        let coeffs = CVector::from_fn(basis.ncols(), |_, _| {
            c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let v = &basis * coeffs;
        best = best.min(weighted_m(v.as_slice(), sup.d) / v.norm_squared());
    }
    Ok(best)
}

fn normalize_columns(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let n = col.norm();
        col /= c(n, 0.0);
    }
    out
}

/// Induced random states on `C^d (x) C^d` with environment `C^s`: tangle upper
/// bounds against the typical value `2 - 2d/(1 + d^2)`.
pub fn run_theorem10(
    d: usize,
    s: usize,
    samples: usize,
    t: f64,
    restarts: usize,
    inner_iters: usize,
    seed: u64,
) -> Result<ConcentrationStats> {
    if !(2..=3).contains(&d) {
        return Err(Error::domain(format!("d must be 2 or 3 (got {d})")));
    }
    if s > d.pow(4) {
        return Err(Error::domain(format!("environment dimension {s} exceeds d^4 = {}", d.pow(4))));
    }
    if restarts == 0 {
        return Err(Error::domain("need at least one restart"));
    }
    let spec = ConcentrationSpec { n: d * d, s, samples, t, seed };
    spec.validate()?;
    let reg = Register::new(vec![d, d])?;
    let per_sample = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let rho = sample_induced_on(&reg, s, &mut rng)?;
            let bound = tangle_upper_bound(&rho, restarts, inner_iters, derive_seed(seed, i))?;
            let c2 = if d == 2 {
                let conc = concurrence_two_qubit(&rho)?;
                Some(conc * conc)
            } else {
                None
            };
            let probe = support_min_m(&rho, SUPPORT_PROBES, &mut rng)?;
            Ok((bound, c2, probe))
        })
        .collect::<Result<Vec<_>>>()?;
    let bounds: Vec<f64> = per_sample.iter().map(|p| p.0).collect();
    let mut stats = ConcentrationStats::from_values("theorem10", &spec, theorem10_typical(d), bounds.clone());
    stats.d = Some(d);
    stats.restarts = Some(restarts);
    stats.tangle_upper_bounds = Some(bounds);
    stats.concurrence_sq = (d == 2).then(|| per_sample.iter().map(|p| p.1.unwrap_or(0.0)).collect());
    stats.support_min_m = per_sample.iter().map(|p| p.2).reduce(f64::min);
    Ok(stats)
}
