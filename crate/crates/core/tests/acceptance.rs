//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex;
use oddqft::bounds::{closed_form_exponents, qubit_count, qubit_estimate, register_qubits, tv_bound, TABLE1_EPSILON, TABLE1_N};
use oddqft::verify::{check_lemma, denominator_sum, distance_margin, sweep, CheckParams, ExponentRange, GridSpec, LemmaId};
use oddqft::{fft_pow2, minimal_exponents, run_trials, ComplexVec, GroupParams, Seed, TrialOptions, TrialSummary, TransformDirection};

/// Published (g, m, l) triples, rows by epsilon, columns by N.
const TABLE1: [[(u32, u32, u32); 6]; 7] = [
    [(45, 45, 28), (47, 47, 28), (48, 48, 29), (50, 50, 29), (52, 52, 30), (53, 53, 30)],
    [(36, 35, 21), (37, 37, 22), (38, 38, 23), (40, 40, 23), (42, 42, 23), (43, 43, 24)],
    [(29, 28, 17), (30, 30, 17), (31, 31, 18), (33, 33, 18), (35, 35, 19), (36, 36, 19)],
    [(26, 25, 15), (27, 27, 15), (28, 28, 16), (30, 30, 16), (32, 32, 17), (33, 33, 17)],
    [(23, 22, 13), (24, 24, 13), (25, 25, 14), (27, 27, 14), (29, 29, 15), (30, 30, 15)],
    [(21, 20, 12), (22, 22, 12), (24, 24, 12), (25, 25, 13), (27, 27, 13), (29, 28, 14)],
    [(20, 19, 11), (21, 21, 11), (22, 22, 12), (24, 24, 12), (26, 26, 13), (27, 27, 13)],
];

const SEED: Seed = Seed(20_240_601);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn table1() -> Outcome {
    let mut mismatches = Vec::new();
    for (e, &eps) in TABLE1_EPSILON.iter().enumerate() {
        for (j, &n) in TABLE1_N.iter().enumerate() {
            let (g, _) = closed_form_exponents(n, eps).expect("valid cell");
            let (m, l) = minimal_exponents(n, eps).expect("feasible cell");
            if (g, m, l) != TABLE1[e][j] {
                mismatches.push(format!("N={n} eps={eps}: got {:?}", (g, m, l)));
            }
        }
    }
    outcome(mismatches.is_empty(), format!("42 cells, {} mismatches {mismatches:?}", mismatches.len()))
}

fn simulate(n: u64, m: u32, l: u32, trials: u64, seed: Seed) -> TrialSummary {
    let params = GroupParams::from_exponents(n, m, l).expect("valid parameters");
    run_trials(&params, trials, seed, TrialOptions::default()).expect("simulation runs")
}

fn large_run(summary: &TrialSummary) -> Outcome {
    let bound = summary.bound.normalized();
    let over = summary.trials.iter().filter(|t| t.error > bound).count();
    outcome(
        summary.max_error <= 0.08 && over == 0,
        format!("max error {:.6} (<= 0.08), bound {bound:.6}, {over} trials above bound", summary.max_error),
    )
}

fn best_run(summary: &TrialSummary) -> Outcome {
    outcome(summary.max_error <= 0.2, format!("max error {:.6} over {} states (<= 0.2)", summary.max_error, summary.trials.len()))
}

fn probes() -> Outcome {
    let (m, n) = (256u64, 13u64);
    let s = denominator_sum(26, m, n);
    let weak = 2.0 * n as f64 * (n as f64).ln() / m as f64;
    let strong = 2.0 * weak;
    let denom = check_lemma(LemmaId::DenominatorSum, CheckParams::new(n, m, 16));
    let dist = check_lemma(LemmaId::DistanceLowerBound, CheckParams::new(37, 128, 2));
    let margin = distance_margin(12, 40, 128, 37);
    let outside = !oddqft::partition::interval_set(12, 128, 37).unwrap().contains(40);
    let pass = s > weak && s <= strong && denom.passed() && dist.passed() && dist.exhaustive && outside && margin >= 0.0;
    outcome(
        pass,
        format!(
            "k=26 sum {s:.6} in ({weak:.6}, {strong:.6}]; distance check {} pairs, (12,40) margin {margin:.6}",
            dist.instances_checked
        ),
    )
}

fn lemma_sweep() -> Outcome {
    let grid = GridSpec {
        n_values: (13..=51).step_by(2).collect(),
        m_exponents: ExponentRange { lo: None, hi: 16 },
        l_exponents: vec![4, 5],
        trials: 100,
        seed: SEED,
    };
    let lemmas = [
        LemmaId::SetProperties,
        LemmaId::DeltaProperties,
        LemmaId::DistanceLowerBound,
        LemmaId::AmplitudeBound,
        LemmaId::DenominatorSum,
        LemmaId::ShiftNorm,
        LemmaId::DeltaKet,
        LemmaId::WeightedSum,
        LemmaId::TailNorm,
    ];
    let report = sweep(&grid, &lemmas).expect("grid is non-empty");
    let mut problems = Vec::new();
    for lemma in lemmas {
        let of: Vec<_> = report.reports.iter().filter(|r| r.lemma == lemma).collect();
        let passed = of.iter().filter(|r| r.passed()).count();
        if passed == 0 {
            problems.push(format!("{lemma}: no applicable point"));
        }
        for r in of.iter().filter(|r| r.failed()) {
            problems.push(format!("{lemma} failed at N={} M={} L={}: {:?}", r.params.n, r.params.m, r.params.l, r.violations.first()));
        }
        let sampled = matches!(lemma, LemmaId::WeightedSum | LemmaId::TailNorm);
        if sampled && of.iter().any(|r| r.passed() && r.instances_checked < 100) {
            problems.push(format!("{lemma}: fewer than 100 vectors at some point"));
        }
        if !sampled && of.iter().any(|r| r.passed() && !r.exhaustive) {
            problems.push(format!("{lemma}: not exhaustive"));
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} reports: {} passed, {} failed, {} inapplicable {problems:?}",
            report.reports.len(),
            report.passed,
            report.failed,
            report.inapplicable
        ),
    )
}

/// Independent `O(n^2)` transform with the `+2 pi i / n` exponent.
fn oracle_dft(x: &[Complex<f64>], sign: f64) -> Vec<Complex<f64>> {
    let n = x.len();
    (0..n)
        .map(|s| {
            let acc: Complex<f64> = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * Complex::from_polar(1.0, sign * std::f64::consts::TAU * ((i * s) % n) as f64 / n as f64))
                .sum();
            acc / (n as f64).sqrt()
        })
        .collect()
}

fn transforms() -> Outcome {
    let mut worst_entry: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut worst_inner: f64 = 0.0;
    let mut worst_round: f64 = 0.0;
    for e in 1..=12u64 {
        let n = 1usize << e;
        let x: ComplexVec<f64> = oddqft::numerics::random_unit_state(n, SEED.derive(e)).unwrap();
        let y: ComplexVec<f64> = oddqft::numerics::random_unit_state(n, SEED.derive(100 + e)).unwrap();
        for (dir, sign) in [(TransformDirection::Forward, 1.0), (TransformDirection::Inverse, -1.0)] {
            let fast = fft_pow2(&x, dir).unwrap();
            let slow = oracle_dft(x.as_slice(), sign);
            for (a, b) in fast.iter().zip(&slow) {
                worst_entry = worst_entry.max((a - b).norm());
            }
            let fy = fft_pow2(&y, dir).unwrap();
            worst_norm = worst_norm.max((fast.norm() - x.norm()).abs());
            worst_inner = worst_inner.max((fast.inner(&fy).unwrap() - x.inner(&y).unwrap()).norm());
        }
        let back = fft_pow2(&fft_pow2(&x, TransformDirection::Forward).unwrap(), TransformDirection::Inverse).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            worst_round = worst_round.max((a - b).norm());
        }
    }
    let pass = worst_entry <= 1e-10 && worst_norm <= 1e-10 && worst_inner <= 1e-10 && worst_round <= 1e-10;
    outcome(
        pass,
        format!("dims 2..4096: entry {worst_entry:.2e}, norm {worst_norm:.2e}, inner {worst_inner:.2e}, round trip {worst_round:.2e}"),
    )
}

fn total_variation(runs: &[&TrialSummary], theorem_runs: &[(f64, TrialSummary)]) -> Outcome {
    let mut per_trial = 0usize;
    let mut checked = 0usize;
    for s in runs.iter().copied().chain(theorem_runs.iter().map(|(_, s)| s)) {
        checked += s.trials.len();
        per_trial += s.trials.iter().filter(|t| t.tv_distance > tv_bound(t.error) + 1e-12).count();
    }
    let mut theorem_over = 0usize;
    let mut worst = String::new();
    for (eps, s) in theorem_runs {
        theorem_over += s.trials.iter().filter(|t| t.tv_distance > tv_bound(*eps)).count();
        worst += &format!(" eps={eps}: max tv {:.6} <= {:.6};", s.max_tv, tv_bound(*eps));
    }
    outcome(
        per_trial == 0 && theorem_over == 0,
        format!("{checked} trials, {per_trial} above 2e+e^2, {theorem_over} above tv_bound(eps);{worst}"),
    )
}

fn qubits() -> Outcome {
    let mut bad = Vec::new();
    for &n in &TABLE1_N {
        for &eps in &TABLE1_EPSILON {
            let (g, _) = closed_form_exponents(n, eps).unwrap();
            if qubit_count(1 << g) > qubit_estimate(n, eps) {
                bad.push((n, eps));
            }
        }
    }
    let tight = qubit_count(1024);
    let layout = register_qubits(65, 1024, 8);
    outcome(
        bad.is_empty() && tight == 12 && layout == 12,
        format!("42 cells, {} over estimate; M=1024: {tight} qubits, N=65 layout {layout}", bad.len()),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        results.push((id, name, o, start.elapsed().as_secs_f64()));
    };

    let mut large = None;
    let mut best = None;
    timed(1, "parameter table exponents", &mut table1);
    timed(2, "large simulation N=13 M=2^19 L=2^11", &mut || {
        let s = simulate(13, 19, 11, 100, SEED);
        let o = large_run(&s);
        large = Some(s);
        o
    });
    timed(3, "best simulation N=13 M=2^11 L=2^4", &mut || {
        let s = simulate(13, 11, 4, 1000, SEED.derive(1));
        let o = best_run(&s);
        best = Some(s);
        o
    });
    timed(4, "counterexample probes", &mut probes);
    timed(5, "lemma sweep", &mut lemma_sweep);
    timed(6, "transform correctness", &mut transforms);
    timed(7, "total variation", &mut || {
        let theorem: Vec<(f64, TrialSummary)> = [0.4, 0.3]
            .into_iter()
            .map(|eps| {
                let (m, l) = minimal_exponents(13, eps).unwrap();
                (eps, simulate(13, m, l, 100, SEED.derive(7)))
            })
            .collect();
        let runs: Vec<&TrialSummary> = large.iter().chain(best.iter()).collect();
        total_variation(&runs, &theorem)
    });
    timed(8, "qubit accounting", &mut qubits);

    let mut all = true;
    for (id, name, o, secs) in &results {
        all &= o.pass;
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} [{tag}] {name} ({secs:.1}s): {}", o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
