//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//!
//! Run with `cargo test -p entmono --test acceptance --release`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use entmono::catalog::{
    dfs_state, dicke_concurrences, dicke_state, fig1_measures, fig2_cases, fig2_measures, fig3_families,
    fig3_measures, sweep_fig1, sweep_fig2, sweep_fig3, SweepGrid,
};
use entmono::concentration::{
    lipschitz_probe, lubkin_mean, run_lemma6, run_theorem10, theorem10_typical, ConcentrationSpec,
    DEFAULT_INNER_ITERS,
};
use entmono::measures::{evaluate, evaluate_cut, MeasureInput, MeasureKind};
use entmono::monogamy::{
    check_base, check_thm2, check_thm3, check_thm8_upper, scalar_bound_check, Gamma, Parties, PASS_TOL,
};
use entmono::qstate::{sample_haar_pure, stream_rng, Bipartition, QuantumState, Register};

const SEED: u64 = 20_190_101;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = body();
    let elapsed = start.elapsed();
    out.detail.push_str(&format!("; {:.2}s", elapsed.as_secs_f64()));
    if let Some(limit) = limit {
        if elapsed > limit {
            out.pass = false;
            out.detail.push_str(&format!(" exceeds {}s limit", limit.as_secs()));
        }
    }
    out
}

fn pure(state: entmono::qstate::PureState) -> QuantumState {
    QuantumState::Pure(state)
}

fn dicke_oracles() -> Outcome {
    let cases = [
        ((4, 2), (1.0, 1.0 / 3.0)),
        ((5, 2), (2.0 * 6f64.sqrt() / 5.0, (3.0 - 3f64.sqrt()) / 5.0)),
        ((6, 3), (1.0, 0.2)),
    ];
    let mut worst_closed = 0.0f64;
    let mut worst_numeric = 0.0f64;
    for ((n, k), (whole, pair)) in cases {
        let (cw, cp) = dicke_concurrences(n, k).unwrap();
        worst_closed = worst_closed.max((cw - whole).abs()).max((cp - pair).abs());
        let state = pure(dicke_state(n, k).unwrap());
        let rest: Vec<usize> = (1..n).collect();
        let nw = evaluate_cut(MeasureKind::Concurrence, &state, &[0], &rest).unwrap().value;
        let np = evaluate_cut(MeasureKind::Concurrence, &state, &[0], &[1]).unwrap().value;
        worst_numeric = worst_numeric.max((nw - whole).abs()).max((np - pair).abs());
    }
    outcome(
        worst_closed <= 1e-10 && worst_numeric <= 1e-9,
        format!("closed-form err {worst_closed:.2e} (tol 1e-10), numeric err {worst_numeric:.2e} (tol 1e-9)"),
    )
}

fn decoherence_free() -> Outcome {
    let state = pure(dfs_state(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap());
    let expected = [0.9107, 0.3333, 0.2440];
    let pairs: Vec<f64> = (1..4)
        .map(|b| evaluate_cut(MeasureKind::Concurrence, &state, &[0], &[b]).unwrap().value)
        .collect();
    let pair_err = pairs.iter().zip(expected).map(|(v, e)| (v - e).abs()).fold(0.0, f64::max);
    let whole = evaluate_cut(MeasureKind::Concurrence, &state, &[0], &[1, 2, 3]).unwrap().value;
    let whole_err = (whole - 1.0).abs();
    outcome(
        pair_err <= 5e-4 && whole_err <= 1e-9,
        format!(
            "pairwise ({:.4}, {:.4}, {:.4}) vs (0.9107, 0.3333, 0.2440) max err {pair_err:.3e} (tol 5e-4); \
             C(A|BCD) err {whole_err:.2e} (tol 1e-9)",
            pairs[0], pairs[1], pairs[2]
        ),
    )
}

fn fig3_closed_form(n: usize, k: usize, alpha: f64) -> f64 {
    let (whole, pair) = dicke_concurrences(n, k).unwrap();
    let w = 2f64.powf(alpha / 2.0) - 1.0;
    let rhs: f64 = (0..n as u64 - 1).map(|j| w.powi(j.count_ones() as i32) * pair.powf(alpha)).sum();
    whole.powf(alpha) - rhs
}

fn min_over_critical(grid: &SweepGrid, alpha_col: usize) -> f64 {
    let mut min = f64::INFINITY;
    for row in &grid.rows {
        for (m, r) in grid.meta.measures.iter().zip(&row.residuals) {
            if let Some(v) = r {
                if row.coords[alpha_col] >= m.alpha_c() - 1e-12 {
                    min = min.min(*v);
                }
            }
        }
    }
    min
}

fn figure_sweeps() -> Outcome {
    let fig1: Vec<SweepGrid> = [2.0, 3.0].iter().map(|&a| sweep_fig1(50, &fig1_measures(), a).unwrap()).collect();
    let fig1_rows: usize = fig1.iter().map(|g| g.rows.len()).sum();
    let fig1_min = fig1.iter().filter_map(SweepGrid::min_residual).fold(f64::INFINITY, f64::min);

    let alphas2: Vec<f64> = (0..=36).map(|i| SQRT_2 + (5.0 - SQRT_2) * i as f64 / 36.0).collect();
    let fig2 = sweep_fig2(&fig2_cases(), &fig2_measures(), &alphas2, Gamma::Auto).unwrap();
    let fig2_min = min_over_critical(&fig2, 3);

    let alphas3: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
    let fig3 = sweep_fig3(&fig3_families(), &fig3_measures(), &alphas3).unwrap();
    let fig3_min = min_over_critical(&fig3, 2);
    let conc = fig3.meta.measures.iter().position(|m| *m == MeasureKind::Concurrence).unwrap();
    let closed_err = fig3
        .rows
        .iter()
        .filter(|r| r.coords[2] >= 2.0 - 1e-12)
        .map(|r| {
            let v = r.residuals[conc].unwrap();
            (v - fig3_closed_form(r.coords[0] as usize, r.coords[1] as usize, r.coords[2])).abs()
        })
        .fold(0.0, f64::max);

    let pass = fig1_rows == 5000 && fig1_min >= -PASS_TOL && fig2_min >= -PASS_TOL && fig3_min >= -PASS_TOL
        && closed_err <= 1e-9;
    outcome(
        pass,
        format!(
            "fig1 {fig1_rows} rows (alpha 2, 3) min {fig1_min:.3e}; fig2 min {fig2_min:.3e}; \
             fig3 min {fig3_min:.3e}; fig3 closed-form err {closed_err:.2e} (tol 1e-9)"
        ),
    )
}

fn ckw_fuzz() -> Outcome {
    let reg = Register::qubits(3).unwrap();
    let parties = Parties::first_vs_rest(3).unwrap();
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for i in 0..1000 {
        let state = pure(sample_haar_pure(&reg, &mut stream_rng(SEED, i)));
        for m in [MeasureKind::Concurrence, MeasureKind::Eof] {
            let r = check_base(&state, m, &parties).unwrap();
            worst = worst.min(r.residual);
            failures += usize::from(r.residual < -PASS_TOL);
        }
    }
    outcome(failures == 0, format!("2000 checks, {failures} below -1e-9, min residual {worst:.3e}"))
}

fn functional_relations() -> Outcome {
    let kinds = [
        MeasureKind::Eof,
        MeasureKind::Tsallis { q: 0.7 },
        MeasureKind::Tsallis { q: 2.0 },
        MeasureKind::Tsallis { q: 4.3 },
        MeasureKind::Renyi { q: 0.9 },
        MeasureKind::Renyi { q: 2.0 },
        MeasureKind::Unified { q: 1.4, s: 0.6 },
        MeasureKind::Unified { q: 2.0, s: 0.7 },
    ];
    let two = Register::qubits(2).unwrap();
    let cut = Bipartition::new(2, &[0]).unwrap();
    let mut worst_fn = 0.0f64;
    for i in 0..1000 {
        let psi = sample_haar_pure(&two, &mut stream_rng(SEED + 1, i));
        let rho = psi.to_density();
        for k in kinds {
            let spectral = evaluate(k, MeasureInput::Pure(&psi, &cut)).unwrap().value;
            let functional = evaluate(k, MeasureInput::TwoQubit(&rho)).unwrap().value;
            worst_fn = worst_fn.max((spectral - functional).abs());
        }
    }
    let two_by_four = Register::new(vec![2, 4]).unwrap();
    let mut worst_neg = 0.0f64;
    for i in 0..1000 {
        let psi = sample_haar_pure(&two_by_four, &mut stream_rng(SEED + 2, i));
        let n = evaluate(MeasureKind::Negativity, MeasureInput::Pure(&psi, &cut)).unwrap().value;
        let c = evaluate(MeasureKind::Concurrence, MeasureInput::Pure(&psi, &cut)).unwrap().value;
        worst_neg = worst_neg.max((n - c).abs());
    }
    outcome(
        worst_fn <= 1e-9 && worst_neg <= 1e-9,
        format!("spectral vs functional max err {worst_fn:.2e}; negativity vs concurrence max err {worst_neg:.2e} (tol 1e-9)"),
    )
}

fn bound_ordering() -> Outcome {
    let reg = Register::qubits(4).unwrap();
    let parties = Parties::first_vs_rest(4).unwrap();
    let cut = Bipartition::new(4, &[0, 1]).unwrap();
    let mut used = 0;
    let mut order_violations = 0;
    let mut upper_violations = 0;
    let mut worst_upper = f64::INFINITY;
    for i in 0..1000 {
        let mut rng = stream_rng(SEED + 3, i);
        let psi = sample_haar_pure(&reg, &mut rng);
        let alpha = rng.random_range(2.0..5.0);
        let state = pure(psi.clone());
        let t2 = check_thm2(&state, MeasureKind::Concurrence, &parties, alpha, Gamma::Fixed(1.0)).unwrap();
        let t3 = check_thm3(&state, MeasureKind::Concurrence, &parties, alpha, Gamma::Fixed(1.0)).unwrap();
        if t2.premise_ok && t3.premise_ok {
            used += 1;
            let base: f64 = t2.rhs_terms.iter().map(|t| t.value.powf(alpha)).sum();
            if t3.rhs < t2.rhs - 1e-12 || t2.rhs < base - 1e-12 {
                order_violations += 1;
            }
        }
        let upper = check_thm8_upper(&psi, &cut, 2.0).unwrap();
        worst_upper = worst_upper.min(upper.rhs - upper.lhs);
        upper_violations += usize::from(upper.rhs < upper.lhs - 1e-9);
    }
    outcome(
        used > 0 && order_violations == 0 && upper_violations == 0,
        format!(
            "{used} states with both premises, {order_violations} ordering violations (tol 1e-12); \
             upper bound min slack {worst_upper:.3e}, {upper_violations} violations (tol 1e-9)"
        ),
    )
}

fn scalar_lemma() -> Outcome {
    let mut rng = stream_rng(SEED + 4, 0);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let t = rng.random_range(1.0..6.0);
        let g0: f64 = rng.random_range(1.0..6.0);
        let x: f64 = rng.random_range(0.0..=1.0 / g0);
        let weight = (g0 + 1.0).powf(t) - g0.powf(t);
        let slack = (1.0 + x).powf(t) - (1.0 + weight * x.powf(t));
        worst = worst.min(slack);
        if slack < -1e-12 || !scalar_bound_check(x, t, g0).unwrap() {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("10000 samples, {failures} failures, min slack {worst:.3e} (tol 1e-12)"))
}

fn lemma6_concentration() -> Outcome {
    let ladder = [4usize, 9, 16];
    let seeds = [SEED, SEED + 10, SEED + 20];
    let mut mean_ok = true;
    let mut means = Vec::new();
    let mut decreasing_votes = 0;
    let mut probs = Vec::new();
    for (si, &seed) in seeds.iter().enumerate() {
        let row: Vec<f64> = ladder
            .iter()
            .map(|&n| {
                let stats = run_lemma6(&ConcentrationSpec { n, s: n, samples: 10_000, t: 0.1, seed }).unwrap();
                if si == 0 {
                    let sem = stats.empirical_std / (stats.samples as f64).sqrt();
                    let err = (stats.empirical_mean - lubkin_mean(n, n)).abs();
                    mean_ok &= err <= 3.0 * sem;
                    means.push(format!("n={n} |mean-lubkin|={err:.2e} vs 3sem={:.2e}", 3.0 * sem));
                }
                stats.deviation_prob
            })
            .collect();
        decreasing_votes += usize::from(row.windows(2).all(|w| w[1] < w[0]));
        probs.push(format!("{:?}", row.iter().map(|p| (p * 1e4).round() / 1e4).collect::<Vec<_>>()));
    }
    outcome(
        mean_ok && decreasing_votes >= 2,
        format!("{}; deviation_prob(t=0.1) per seed {}; decreasing in {decreasing_votes}/3 seeds", means.join(", "), probs.join(" ")),
    )
}

fn lipschitz() -> Outcome {
    let probe = lipschitz_probe(4, 4, 10_000, SEED).unwrap();
    outcome(
        probe.max_ratio <= 8.0 + 1e-6,
        format!("max ratio {:.4} over {} pairs (bound 8 + 1e-6)", probe.max_ratio, probe.pairs),
    )
}

fn theorem10_proxy() -> Outcome {
    let typical = theorem10_typical(2);
    let mut bounds_ok = true;
    let mut band_ok = true;
    let mut parts = Vec::new();
    for s in [1usize, 2, 4] {
        let stats = run_theorem10(2, s, 500, 0.5, 32, DEFAULT_INNER_ITERS, SEED + s as u64).unwrap();
        let bounds = stats.tangle_upper_bounds.as_ref().unwrap();
        let c2 = stats.concurrence_sq.as_ref().unwrap();
        let worst = bounds.iter().zip(c2).map(|(b, c)| b - c).fold(f64::INFINITY, f64::min);
        bounds_ok &= worst >= -1e-9;
        band_ok &= stats.in_band_fraction > 0.9;
        parts.push(format!(
            "s={s}: min(bound - C^2) {worst:.2e}, in-band around {typical} {:.3}, mean {:.4} \
             (diagnostic: in-band around lubkin(2,2)={:.1} {:.3})",
            stats.in_band_fraction,
            stats.empirical_mean,
            lubkin_mean(2, 2),
            stats.in_band_around(lubkin_mean(2, 2))
        ));
    }
    outcome(bounds_ok && band_ok, parts.join("; "))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_entmono");
    let commands: [&[&str]; 5] = [
        &["sweep", "--fig", "2"],
        &["sweep", "--fig", "1", "--res", "20", "--format", "json"],
        &["check", "--family", "dfs:0.7071,0.7071", "--kind", "thm3", "--gamma", "auto", "-m", "eof", "-m", "concurrence"],
        &["sample", "lemma6", "--n", "4", "--s", "4", "--N", "2000", "--t", "0.3", "--seed", "7"],
        &["sample", "thm10", "--d", "2", "--s", "2", "--N", "40", "--t", "0.5", "--restarts", "4", "--seed", "7"],
    ];
    let mut mismatched = Vec::new();
    for args in commands {
        let run = |threads: &str| {
            Command::new(bin).args(args).env("ENTMONO_THREADS", threads).output().expect("binary runs")
        };
        let (a, b, c) = (run("0"), run("0"), run("1"));
        if !a.status.success() || a.stdout != b.stdout || a.stdout != c.stdout || a.stdout.is_empty() {
            mismatched.push(args[..2].join(" "));
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("{} seeded commands run 3x (default and 1 thread), mismatches: {mismatched:?}", commands.len()),
    )
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("Dicke concurrence oracles", secs(1), dicke_oracles),
        ("decoherence-free pairwise and focus concurrence", secs(1), decoherence_free),
        ("figure sweeps non-negative, Dicke closed form", secs(60), figure_sweeps),
        ("CKW / EOF base monogamy fuzz", secs(30), ckw_fuzz),
        ("functional relations and negativity", None, functional_relations),
        ("bound ordering and pure-state upper bound", None, bound_ordering),
        ("scalar lemma fuzz", None, scalar_lemma),
        ("Lubkin mean and deviation ladder", secs(120), lemma6_concentration),
        ("Lipschitz probe", None, lipschitz),
        ("induced-state tangle proxy", secs(300), theorem10_proxy),
        ("byte-identical seeded output", None, determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, body)) in criteria.into_iter().enumerate() {
        let out = timed(limit, body);
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}: {name}: {}", i + 1, out.detail);
        if !out.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
