//! Brute-force checks of every inequality the error analysis relies on.
//!
//! Each check enumerates its instance space when it holds at most
//! [`EXHAUSTIVE_LIMIT`] elementary comparisons and samples it deterministically
//! otherwise. A witness is recorded when the left side exceeds the right side
//! by more than [`VIOLATION_TOLERANCE`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{denominator_sum_bound, shift_bound, tail_bound, weighted_sum_bound, Hypotheses};
use crate::error::{Error, Result};
use crate::numerics::{is_power_of_two, l2_distance, random_real_unit, random_unit_state, sawtooth_int, ComplexVec, Seed};
use crate::partition::{a_unchecked, alpha, beta, interval_half_width, interval_set, lambda_set, DeltaDecomposition, GroupParams, IntervalSet};
use crate::pipeline::{run_trials, Simulator, TrialOptions};
use crate::transforms::{dft, TransformDirection};

pub const VIOLATION_TOLERANCE: f64 = 1e-9;
pub const EXHAUSTIVE_LIMIT: u64 = 100_000_000;
/// Witnesses kept per report; the full count is in `violation_count`.
pub const MAX_WITNESSES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    SetProperties,
    DeltaProperties,
    DistanceLowerBound,
    AmplitudeBound,
    DenominatorSum,
    WeightedSum,
    TailNorm,
    ShiftNorm,
    DeltaKet,
    UnitTriangle,
    RawOutputBound,
}

impl LemmaId {
    pub const ALL: [LemmaId; 11] = [
        LemmaId::SetProperties,
        LemmaId::DeltaProperties,
        LemmaId::DistanceLowerBound,
        LemmaId::AmplitudeBound,
        LemmaId::DenominatorSum,
        LemmaId::WeightedSum,
        LemmaId::TailNorm,
        LemmaId::ShiftNorm,
        LemmaId::DeltaKet,
        LemmaId::UnitTriangle,
        LemmaId::RawOutputBound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::SetProperties => "set_properties",
            LemmaId::DeltaProperties => "delta_properties",
            LemmaId::DistanceLowerBound => "distance_lower_bound",
            LemmaId::AmplitudeBound => "amplitude_bound",
            LemmaId::DenominatorSum => "denominator_sum",
            LemmaId::WeightedSum => "weighted_sum",
            LemmaId::TailNorm => "tail_norm",
            LemmaId::ShiftNorm => "shift_norm",
            LemmaId::DeltaKet => "delta_ket",
            LemmaId::UnitTriangle => "unit_triangle",
            LemmaId::RawOutputBound => "raw_output_bound",
        }
    }

    /// Whether the check reads `L` at all.
    pub fn uses_l(self) -> bool {
        matches!(
            self,
            LemmaId::AmplitudeBound | LemmaId::TailNorm | LemmaId::ShiftNorm | LemmaId::DeltaKet | LemmaId::RawOutputBound
        )
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownLemma(s.to_string()))
    }
}

/// Instance parameters of one check. `l` is ignored by checks that do not use it;
/// for `unit_triangle`, `n` is the vector dimension and `trials` the pair count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CheckParams {
    pub n: u64,
    pub m: u64,
    pub l: u64,
    pub trials: u64,
    pub seed: Seed,
}

impl CheckParams {
    pub fn new(n: u64, m: u64, l: u64) -> Self {
        Self {
            n,
            m,
            l,
            trials: 100,
            seed: Seed(0),
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    Inapplicable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub label: String,
    pub location: Vec<i64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub lemma: LemmaId,
    pub params: CheckParams,
    pub status: CheckStatus,
    pub instances_checked: u64,
    pub exhaustive: bool,
    pub violations: Vec<Witness>,
    pub violation_count: u64,
    /// Smallest `rhs - lhs` observed, for inequality checks.
    pub tightest_slack: Option<f64>,
    pub tightest_at: Option<Vec<i64>>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn inapplicable(lemma: LemmaId, params: CheckParams, reason: impl Into<String>) -> Self {
        Self {
            lemma,
            params,
            status: CheckStatus::Inapplicable(reason.into()),
            instances_checked: 0,
            exhaustive: false,
            violations: Vec::new(),
            violation_count: 0,
            tightest_slack: None,
            tightest_at: None,
            notes: Vec::new(),
        }
    }

    fn from_tally(lemma: LemmaId, params: CheckParams, tally: Tally, exhaustive: bool, notes: Vec<String>) -> Self {
        let status = if tally.violation_count == 0 {
            CheckStatus::Passed
        } else {
            CheckStatus::Failed
        };
        let (tightest_slack, tightest_at) = match tally.tightest {
            Some((s, at)) => (Some(s), Some(at)),
            None => (None, None),
        };
        Self {
            lemma,
            params,
            status,
            instances_checked: tally.checked,
            exhaustive,
            violations: tally.violations,
            violation_count: tally.violation_count,
            tightest_slack,
            tightest_at,
            notes,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Passed
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Failed
    }

    pub fn is_inapplicable(&self) -> bool {
        matches!(self.status, CheckStatus::Inapplicable(_))
    }
}

#[derive(Debug, Default)]
struct Tally {
    checked: u64,
    tightest: Option<(f64, Vec<i64>)>,
    violations: Vec<Witness>,
    violation_count: u64,
}

impl Tally {
    fn inequality(&mut self, label: &str, location: &[i64], lhs: f64, rhs: f64) {
        self.checked += 1;
        let slack = rhs - lhs;
        if self.tightest.as_ref().is_none_or(|(s, _)| slack < *s) {
            self.tightest = Some((slack, location.to_vec()));
        }
        if slack.is_nan() || slack < -VIOLATION_TOLERANCE {
            self.record(label, location, lhs, rhs);
        }
    }

    /// Exact predicate; recorded with `lhs = 1, rhs = 0` when it fails.
    fn predicate(&mut self, label: &str, location: &[i64], holds: bool) {
        self.checked += 1;
        if !holds {
            self.record(label, location, 1.0, 0.0);
        }
    }

    fn record(&mut self, label: &str, location: &[i64], lhs: f64, rhs: f64) {
        self.violation_count += 1;
        if self.violations.len() < MAX_WITNESSES {
            self.violations.push(Witness {
                label: label.to_string(),
                location: location.to_vec(),
                lhs,
                rhs,
            });
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.violation_count += other.violation_count;
        if let Some((s, at)) = other.tightest {
            if self.tightest.as_ref().is_none_or(|(mine, _)| s < *mine) {
                self.tightest = Some((s, at));
            }
        }
        let room = MAX_WITNESSES.saturating_sub(self.violations.len());
        self.violations.extend(other.violations.into_iter().take(room));
        self
    }
}

fn par_tally<F>(range: std::ops::Range<u64>, body: F) -> Tally
where
    F: Fn(&mut Tally, u64) + Sync + Send,
{
    range
        .into_par_iter()
        .fold(Tally::default, |mut t, x| {
            body(&mut t, x);
            t
        })
        .reduce(Tally::default, Tally::merge)
}

/// Indices to visit out of `0..total`: all of them, or one per stratum.
fn visit_plan(total: u64, seed: Seed) -> (Vec<u64>, bool) {
    if total <= EXHAUSTIVE_LIMIT {
        return ((0..total).collect(), true);
    }
    let mut rng = seed.rng();
    let picks = (0..EXHAUSTIVE_LIMIT)
        .map(|j| {
            let lo = j * total / EXHAUSTIVE_LIMIT;
            let hi = (j + 1) * total / EXHAUSTIVE_LIMIT;
            lo + rng.random_range(0..(hi - lo).max(1))
        })
        .collect();
    (picks, false)
}

fn mn_hypotheses(m: u64, n: u64) -> std::result::Result<(), String> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(format!("N = {n} must be odd and at least 3"));
    }
    if !is_power_of_two(m) || m > crate::partition::MAX_SIMULATED_M {
        return Err(format!("M = {m} must be a power of two up to 2^40"));
    }
    if m < 2 * n {
        return Err(format!("M = {m} must be at least 2N"));
    }
    Ok(())
}

fn corollary_hypotheses(m: u64, n: u64) -> std::result::Result<(), String> {
    mn_hypotheses(m, n)?;
    let h = Hypotheses::evaluate(n, m, 16);
    if !h.tail() {
        return Err(format!("needs odd N >= 13 and M >= 16N (N = {n}, M = {m})"));
    }
    Ok(())
}

/// `N |k - M i / N|_M`, an integer.
fn scaled_distance(i: u64, k: u64, m: u64, n: u64) -> i128 {
    sawtooth_int(k as i128 * n as i128 - i as i128 * m as i128, (n * m) as i128)
}

/// `|k - M i / N|_M`.
pub fn sawtooth_offset(i: u64, k: u64, m: u64, n: u64) -> f64 {
    scaled_distance(i, k, m, n) as f64 / n as f64
}

/// `|k - M i / N|_M - (M / 2N - 1)`, the margin in the distance lower bound.
pub fn distance_margin(i: u64, k: u64, m: u64, n: u64) -> f64 {
    sawtooth_offset(i, k, m, n) - (m as f64 / (2 * n) as f64 - 1.0)
}

fn interval_sets(m: u64, n: u64) -> Vec<IntervalSet> {
    (0..n).map(|i| interval_set(i, m, n).expect("validated")).collect()
}

/// The set `(i)` containing `k`, if any.
fn owner(k: u64, m: u64, n: u64, h: u64) -> Option<u64> {
    // the candidate is the nearest i' to k: i = round(k N / M) mod N
    let i = crate::numerics::round_ratio(k as i128 * n as i128, m as i128).rem_euclid(n as i128) as u64;
    let center = crate::numerics::round_ratio(i as i128 * m as i128, n as i128);
    (sawtooth_int(k as i128 - center, m as i128) <= h as i128).then_some(i)
}

/// `sum_{i : k not in (i)} 1 / |k - M i / N|_M`.
pub fn denominator_sum(k: u64, m: u64, n: u64) -> f64 {
    let h = interval_half_width(m, n);
    let own = owner(k, m, n, h);
    (0..n)
        .filter(|&i| Some(i) != own)
        .map(|i| n as f64 / scaled_distance(i, k, m, n) as f64)
        .sum()
}

pub fn check_lemma(lemma: LemmaId, params: CheckParams) -> CheckReport {
    let result = match lemma {
        LemmaId::SetProperties => check_set_properties(params),
        LemmaId::DeltaProperties => check_delta_properties(params),
        LemmaId::DistanceLowerBound => check_distance_lower_bound(params),
        LemmaId::AmplitudeBound => check_amplitude_bound(params),
        LemmaId::DenominatorSum => check_denominator_sum(params),
        LemmaId::WeightedSum => check_weighted_sum(params),
        LemmaId::TailNorm => check_tail_norm(params),
        LemmaId::ShiftNorm => check_shift_norm(params),
        LemmaId::DeltaKet => check_delta_ket(params),
        LemmaId::UnitTriangle => check_unit_triangle(params),
        LemmaId::RawOutputBound => check_raw_output_bound(params),
    };
    result.unwrap_or_else(|reason| CheckReport::inapplicable(lemma, params, reason))
}

type CheckResult = std::result::Result<CheckReport, String>;

fn group(params: &CheckParams) -> std::result::Result<GroupParams, String> {
    GroupParams::new(params.n, params.l, params.m).map_err(|e| e.to_string())
}

fn check_set_properties(p: CheckParams) -> CheckResult {
    mn_hypotheses(p.m, p.n)?;
    let sets = interval_sets(p.m, p.n);
    let mut tally = Tally::default();
    let size = sets[0].len();
    let mut owner = vec![u64::MAX; p.m as usize];
    for (i, set) in sets.iter().enumerate() {
        tally.predicate("equal_cardinality", &[i as i64], set.len() == size && set.to_sorted_vec().len() == size);
        for k in set.iter() {
            let slot = &mut owner[k as usize];
            tally.predicate("disjoint", &[i as i64, k as i64], *slot == u64::MAX);
            *slot = i as u64;
        }
    }
    let notes = vec![format!("{} sets of size {size}", p.n)];
    Ok(CheckReport::from_tally(LemmaId::SetProperties, p, tally, true, notes))
}

fn check_delta_properties(p: CheckParams) -> CheckResult {
    mn_hypotheses(p.m, p.n)?;
    let d = DeltaDecomposition::build(p.m, p.n).map_err(|e| e.to_string())?;
    let mut tally = Tally::default();
    tally.predicate("alpha_eq_beta_plus_one", &[d.alpha(), d.beta()], d.alpha() == d.beta() + 1);
    tally.predicate("alpha_formula", &[d.alpha()], d.alpha() == alpha(p.m, p.n) && d.beta() == beta(p.m, p.n));
    tally.predicate("image_size", &[d.image_size() as i64], d.image_size() as u64 == p.m);
    let mut seen = vec![false; p.n as usize * d.width()];
    for k in 0..p.m {
        let (s, t) = d.forward(k);
        let in_range = t.abs() <= d.alpha() && s < p.n;
        tally.predicate("remainder_range", &[k as i64, s as i64, t], in_range);
        if in_range {
            let cell = d.cell(k);
            tally.predicate("injective", &[k as i64], !seen[cell]);
            seen[cell] = true;
        }
    }
    for s in 0..p.n {
        let c = d.c_set(s);
        let inner = (-d.beta()..=d.beta()).all(|t| c.binary_search(&t).is_ok());
        let outer = c.iter().all(|t| t.abs() <= d.alpha());
        tally.predicate("sandwich", &[s as i64], inner && outer);
    }
    // k in (i) forces the division map to send k to row i; the converse can
    // fail on the boundary remainders, which are only counted
    let sets = interval_sets(p.m, p.n);
    let membership = par_tally(0..p.m, |t, k| {
        let (s, _) = d.forward(k);
        for (i, set) in sets.iter().enumerate() {
            if set.contains(k) {
                t.predicate("member_maps_to_row", &[k as i64, i as i64], s == i as u64);
            }
        }
    });
    let boundary = (0..p.m)
        .filter(|&k| !sets[d.forward(k).0 as usize].contains(k))
        .count();
    let notes = vec![
        format!("alpha = {}, beta = {}", d.alpha(), d.beta()),
        format!("{boundary} indices sent to row s lie outside (s)"),
    ];
    Ok(CheckReport::from_tally(LemmaId::DeltaProperties, p, tally.merge(membership), true, notes))
}

fn check_distance_lower_bound(p: CheckParams) -> CheckResult {
    mn_hypotheses(p.m, p.n)?;
    let (m, n) = (p.m, p.n);
    let sets = interval_sets(m, n);
    let rhs = m as f64 / (2 * n) as f64 - 1.0;
    let (plan, exhaustive) = visit_plan(n * m, p.seed);
    let tally = plan
        .par_iter()
        .fold(Tally::default, |mut t, &x| {
            let (i, k) = (x / m, x % m);
            if !sets[i as usize].contains(k) {
                // exact form of |k - M i/N|_M >= M/2N - 1
                let scaled = scaled_distance(i, k, m, n);
                let lhs = -(scaled as f64 / n as f64);
                t.inequality("distance", &[i as i64, k as i64], lhs, -rhs);
                if 2 * scaled < (m as i128 - 2 * n as i128) {
                    t.record("distance_exact", &[i as i64, k as i64], -lhs, rhs);
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    Ok(CheckReport::from_tally(LemmaId::DistanceLowerBound, p, tally, exhaustive, Vec::new()))
}

fn check_amplitude_bound(p: CheckParams) -> CheckResult {
    let g = group(&p)?;
    let (m, n, l) = (p.m, p.n, p.l);
    let scale = (m as f64 / (l * n) as f64).sqrt() * 2.0 / std::f64::consts::PI;
    let (plan, exhaustive) = visit_plan(n * m, p.seed);
    let tally = plan
        .par_iter()
        .fold(Tally::default, |mut t, &x| {
            let (i, k) = (x / m, x % m);
            if i == 0 && k == 0 {
                return t;
            }
            let lhs = a_unchecked::<f64>(i, k, &g).norm();
            let rhs = scale / sawtooth_offset(i, k, m, n);
            t.inequality("amplitude", &[i as i64, k as i64], lhs, rhs);
            t
        })
        .reduce(Tally::default, Tally::merge);
    Ok(CheckReport::from_tally(LemmaId::AmplitudeBound, p, tally, exhaustive, Vec::new()))
}

fn check_denominator_sum(p: CheckParams) -> CheckResult {
    corollary_hypotheses(p.m, p.n)?;
    let (m, n) = (p.m, p.n);
    let corollary = denominator_sum_bound(n, m, false).map_err(|e| e.to_string())?;
    let general = denominator_sum_bound(n, m, true).map_err(|e| e.to_string())?;
    let sums: Vec<f64> = (0..m).into_par_iter().map(|k| denominator_sum(k, m, n)).collect();
    let mut tally = Tally::default();
    for (k, &s) in sums.iter().enumerate() {
        tally.inequality("corollary", &[k as i64], s, corollary);
    }
    let mut general_tally = Tally::default();
    for (k, &s) in sums.iter().enumerate() {
        general_tally.inequality("general", &[k as i64], s, general);
    }
    let weak = 2.0 * n as f64 * (n as f64).ln() / m as f64;
    let above_weak: Vec<usize> = sums.iter().enumerate().filter(|(_, &s)| s > weak).map(|(k, _)| k).collect();
    let (k_max, s_max) = sums.iter().enumerate().fold((0, 0.0), |acc, (k, &s)| if s > acc.1 { (k, s) } else { acc });
    let mut notes = vec![
        format!("max sum {s_max:.6} at k = {k_max}; corollary bound {corollary:.6}; general bound {general:.6}"),
        format!("{} of {m} indices exceed 2N ln N / M = {weak:.6}", above_weak.len()),
    ];
    for &k in above_weak.iter().take(16) {
        notes.push(format!("k = {k}: sum {:.6} > 2N ln N / M, margin to corollary {:.6}", sums[k], corollary - sums[k]));
    }
    let general_slack = general_tally.tightest.as_ref().map(|(s, _)| *s).unwrap_or(f64::INFINITY);
    notes.push(format!("general form tightest slack {general_slack:.6}"));
    let tally = tally.merge(Tally {
        checked: general_tally.checked,
        tightest: None,
        violations: general_tally.violations,
        violation_count: general_tally.violation_count,
    });
    Ok(CheckReport::from_tally(LemmaId::DenominatorSum, p, tally, true, notes))
}

fn check_weighted_sum(p: CheckParams) -> CheckResult {
    corollary_hypotheses(p.m, p.n)?;
    let (m, n) = (p.m, p.n);
    let rhs = weighted_sum_bound(n, m).map_err(|e| e.to_string())?;
    let h = interval_half_width(m, n);
    let nn = n as usize;
    let weights: Vec<f64> = (0..m)
        .into_par_iter()
        .flat_map_iter(|k| {
            let own = owner(k, m, n, h);
            (0..n).map(move |i| {
                if Some(i) == own {
                    0.0
                } else {
                    n as f64 / scaled_distance(i, k, m, n) as f64
                }
            })
        })
        .collect();
    let mut vectors: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); nn]];
    for r in 0..p.trials {
        vectors.push(random_real_unit(nn, p.seed.derive(r)).map_err(|e| e.to_string())?);
    }
    let values: Vec<f64> = vectors
        .par_iter()
        .map(|x| {
            weights
                .chunks_exact(nn)
                .map(|row| {
                    let dot: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum();
                    dot * dot
                })
                .sum()
        })
        .collect();
    let mut tally = Tally::default();
    for (r, &v) in values.iter().enumerate() {
        tally.inequality("weighted_sum", &[r as i64 - 1], v, rhs);
    }
    let notes = vec![format!("uniform vector value {:.6} vs bound {rhs:.6} (location -1)", values[0])];
    Ok(CheckReport::from_tally(LemmaId::WeightedSum, p, tally, false, notes))
}

fn check_tail_norm(p: CheckParams) -> CheckResult {
    corollary_hypotheses(p.m, p.n)?;
    let g = group(&p)?;
    let (m, n) = (p.m, p.n);
    let rhs = tail_bound(n, m, p.l);
    let h = interval_half_width(m, n);
    let hats: Vec<ComplexVec<f64>> = (0..p.trials)
        .map(|r| random_unit_state::<f64>(n as usize, p.seed.derive(r)).map(|u| dft(&u, TransformDirection::Forward)))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let trials = hats.len();

    // route 1: sum_i u^_i T^i_k from the tail coefficients
    const CHUNK: u64 = 1024;
    let chunks: Vec<Vec<f64>> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut partial = vec![0.0; trials];
            let mut column = vec![Complex::new(0.0, 0.0); n as usize];
            for k in c * CHUNK..((c + 1) * CHUNK).min(m) {
                let own = owner(k, m, n, h);
                for i in 0..n {
                    column[i as usize] = if Some(i) == own {
                        Complex::new(0.0, 0.0)
                    } else {
                        a_unchecked::<f64>(i, k, &g)
                    };
                }
                for (acc, hat) in partial.iter_mut().zip(&hats) {
                    let z: Complex<f64> = hat.iter().zip(&column).map(|(a, b)| a * b).sum();
                    *acc += z.norm_sqr();
                }
            }
            partial
        })
        .collect();
    let mut route_tail = vec![0.0; trials];
    for chunk in &chunks {
        for (acc, v) in route_tail.iter_mut().zip(chunk) {
            *acc += v;
        }
    }

    // route 2: F_M |u_L> minus the bumps sum_i u^_i B^i
    let sim = Simulator::<f64>::new(g).map_err(|e| e.to_string())?;
    let sets = interval_sets(m, n);
    let route_fft: Vec<f64> = (0..p.trials)
        .into_par_iter()
        .map(|r| {
            let u = random_unit_state::<f64>(n as usize, p.seed.derive(r)).expect("n > 0");
            let hat = &hats[r as usize];
            let mut x = sim.transformed_copies(&u).expect("dimension checked");
            let slots = x.as_mut_slice();
            for (i, set) in sets.iter().enumerate() {
                for k in set.iter() {
                    slots[k as usize] -= hat[i] * a_unchecked::<f64>(i as u64, k, &g);
                }
            }
            x.norm_sqr()
        })
        .collect();

    let mut tally = Tally::default();
    let mut max_gap: f64 = 0.0;
    for r in 0..trials {
        let lhs = route_tail[r].sqrt();
        let gap = (lhs - route_fft[r].sqrt()).abs();
        max_gap = max_gap.max(gap);
        tally.inequality("tail_norm", &[r as i64], lhs, rhs);
        if gap > VIOLATION_TOLERANCE {
            tally.record("routes_disagree", &[r as i64], gap, VIOLATION_TOLERANCE);
        }
    }
    let max_lhs = route_tail.iter().map(|v| v.sqrt()).fold(0.0, f64::max);
    let notes = vec![
        format!("max tail norm {max_lhs:.6} vs bound {rhs:.6}"),
        format!("max disagreement between routes {max_gap:.3e}"),
    ];
    Ok(CheckReport::from_tally(LemmaId::TailNorm, p, tally, false, notes))
}

/// `|| S^i - B^i ||` evaluated on the common support `(i)`.
pub fn shift_distance(i: u64, params: &GroupParams) -> f64 {
    let set = interval_set(i, params.m(), params.n()).expect("validated");
    let m = params.m() as i64;
    set.offsets()
        .map(|(d, k)| {
            let shifted = a_unchecked::<f64>(0, d.rem_euclid(m) as u64, params);
            (shifted - a_unchecked::<f64>(i, k, params)).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

fn check_shift_norm(p: CheckParams) -> CheckResult {
    let g = group(&p)?;
    let rhs = shift_bound(p.n, p.m, p.l);
    let values: Vec<f64> = (0..p.n).into_par_iter().map(|i| shift_distance(i, &g)).collect();
    let mut tally = Tally::default();
    for (i, &v) in values.iter().enumerate() {
        tally.inequality("shift_norm", &[i as i64], v, rhs);
    }
    Ok(CheckReport::from_tally(LemmaId::ShiftNorm, p, tally, true, Vec::new()))
}

fn check_delta_ket(p: CheckParams) -> CheckResult {
    let g = group(&p)?;
    let (m, n) = (p.m, p.n);
    let d = DeltaDecomposition::build(m, n).map_err(|e| e.to_string())?;
    let lambda = lambda_set(m, n);
    let width = d.width() as i64;
    let mut tally = Tally::default();
    let h = interval_half_width(m, n) as i64;
    tally.predicate("lambda_is_unwrapped_zero_set", &[h, *lambda.last().unwrap_or(&-1)], lambda.len() as i64 == 2 * h + 1 && lambda.first() == Some(&-h));
    for i in 0..n {
        let set = interval_set(i, m, n).expect("validated");
        // S^i in grid form after the division map
        let mut seen = Vec::with_capacity(set.len());
        for (offset, k) in set.offsets() {
            let value = a_unchecked::<f64>(0, offset.rem_euclid(m as i64) as u64, &g);
            let cell = d.cell(k) as i64;
            let expected = i as i64 * width + offset + d.alpha();
            tally.predicate("cell", &[i as i64, offset, k as i64], cell == expected);
            tally.predicate("coefficient", &[i as i64, offset], value.re.is_finite() && value.im.is_finite());
            seen.push(offset);
        }
        tally.predicate("support_is_lambda", &[i as i64], seen == lambda);
    }
    let notes = vec![format!("Lambda = [-{h}, {h}], C_0 has {} elements", d.c_set(0).len())];
    Ok(CheckReport::from_tally(LemmaId::DeltaKet, p, tally, true, notes))
}

fn check_unit_triangle(p: CheckParams) -> CheckResult {
    if p.n == 0 {
        return Err("dimension must be positive".into());
    }
    let dim = p.n as usize;
    let tally = par_tally(0..p.trials, |t, r| {
        let seed = p.seed.derive(r);
        let a = random_unit_state::<f64>(dim, seed.derive(0)).expect("dim > 0");
        let dir = random_unit_state::<f64>(dim, seed.derive(1)).expect("dim > 0");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.derive(2).0);
        let eps: f64 = 1.0 - rng.random::<f64>();
        let mut b = dir;
        b.scale(eps);
        let b = a.add(&b).expect("same dim");
        let Ok(unit) = b.normalized() else {
            return;
        };
        let dist = l2_distance(&a, &b).expect("same dim");
        let lhs = l2_distance(&a, &unit).expect("same dim");
        t.inequality("unit_triangle", &[r as i64], lhs, dist * std::f64::consts::SQRT_2);
    });
    Ok(CheckReport::from_tally(LemmaId::UnitTriangle, p, tally, false, Vec::new()))
}

fn check_raw_output_bound(p: CheckParams) -> CheckResult {
    let g = group(&p)?;
    let h = Hypotheses::evaluate(p.n, p.m, p.l);
    if !h.all() {
        return Err(h.violations().join("; "));
    }
    let summary = run_trials(&g, p.trials, p.seed, TrialOptions::default()).map_err(|e| e.to_string())?;
    let mut tally = Tally::default();
    for t in &summary.trials {
        tally.inequality("raw_output", &[t.index as i64], t.raw_error, t.raw_bound);
        tally.inequality("normalized_output", &[t.index as i64], t.error, t.bound);
    }
    let notes = vec![format!(
        "max error {:.6}, bound {:.6}",
        summary.max_error,
        summary.bound.normalized()
    )];
    Ok(CheckReport::from_tally(LemmaId::RawOutputBound, p, tally, false, notes))
}

/// Range of `log2 M`; `lo = None` starts at `ceil(log2(16 N))` for each `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentRange {
    pub lo: Option<u32>,
    pub hi: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_values: Vec<u64>,
    pub m_exponents: ExponentRange,
    pub l_exponents: Vec<u32>,
    pub trials: u64,
    pub seed: Seed,
}

impl GridSpec {
    fn m_range(&self, n: u64) -> std::ops::RangeInclusive<u32> {
        let lo = self.m_exponents.lo.unwrap_or_else(|| (16 * n).next_power_of_two().trailing_zeros());
        lo..=self.m_exponents.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub reports: Vec<CheckReport>,
    pub passed: usize,
    pub failed: usize,
    pub inapplicable: usize,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Runs every lemma at every grid point. Checks that ignore `L` run once per `(N, M)`.
pub fn sweep(grid: &GridSpec, lemmas: &[LemmaId]) -> Result<SweepReport> {
    if grid.n_values.is_empty() || grid.l_exponents.is_empty() || lemmas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut jobs = Vec::new();
    for &n in &grid.n_values {
        for m_exp in grid.m_range(n) {
            if m_exp >= 63 {
                continue;
            }
            let m = 1u64 << m_exp;
            for &lemma in lemmas {
                let ls: &[u32] = if lemma.uses_l() { &grid.l_exponents } else { &grid.l_exponents[..1] };
                for &l_exp in ls {
                    let l = if lemma.uses_l() { 1u64 << l_exp } else { 0 };
                    let seed = grid.seed.derive(n).derive(m_exp as u64).derive(l_exp as u64);
                    jobs.push((lemma, CheckParams::new(n, m, l).with_trials(grid.trials).with_seed(seed)));
                }
            }
        }
    }
    if jobs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let reports: Vec<CheckReport> = jobs.into_par_iter().map(|(lemma, params)| check_lemma(lemma, params)).collect();
    let passed = reports.iter().filter(|r| r.passed()).count();
    let failed = reports.iter().filter(|r| r.failed()).count();
    let inapplicable = reports.iter().filter(|r| r.is_inapplicable()).count();
    Ok(SweepReport {
        reports,
        passed,
        failed,
        inapplicable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_ids_round_trip() {
        for id in LemmaId::ALL {
            assert_eq!(id.as_str().parse::<LemmaId>().unwrap(), id);
        }
        assert!("nope".parse::<LemmaId>().is_err());
    }

    #[test]
    fn set_properties_small() {
        let r = check_lemma(LemmaId::SetProperties, CheckParams::new(5, 32, 2));
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.notes[0], "5 sets of size 5");
    }

    #[test]
    fn owner_matches_interval_sets() {
        for (m, n) in [(32u64, 5u64), (128, 37), (256, 13), (1024, 51)] {
            let sets = interval_sets(m, n);
            let h = interval_half_width(m, n);
            for k in 0..m {
                let expected = sets.iter().position(|s| s.contains(k)).map(|i| i as u64);
                assert_eq!(owner(k, m, n, h), expected, "M={m} N={n} k={k}");
            }
        }
    }

    #[test]
    fn distance_probe_pair() {
        let r = check_lemma(LemmaId::DistanceLowerBound, CheckParams::new(37, 128, 2));
        assert!(r.passed());
        assert!(!interval_set(12, 128, 37).unwrap().contains(40));
        assert!(distance_margin(12, 40, 128, 37) > 0.0);
    }

    #[test]
    fn denominator_probe() {
        let s = denominator_sum(26, 256, 13);
        let weak = 2.0 * 13.0 * 13f64.ln() / 256.0;
        assert!(s > weak && s <= 2.0 * weak);
        let r = check_lemma(LemmaId::DenominatorSum, CheckParams::new(13, 256, 16));
        assert!(r.passed(), "{r:?}");
        let r = check_lemma(LemmaId::DenominatorSum, CheckParams::new(13, 128, 16));
        assert!(r.is_inapplicable());
    }

    #[test]
    fn unit_triangle_pairs() {
        let r = check_lemma(LemmaId::UnitTriangle, CheckParams::new(8, 0, 0).with_trials(2000).with_seed(Seed(3)));
        assert!(r.passed());
        assert_eq!(r.instances_checked, 2000);
    }

    #[test]
    fn small_l_dependent_checks() {
        let p = CheckParams::new(13, 512, 16).with_trials(8).with_seed(Seed(5));
        for lemma in [LemmaId::AmplitudeBound, LemmaId::ShiftNorm, LemmaId::DeltaKet, LemmaId::TailNorm, LemmaId::WeightedSum, LemmaId::DeltaProperties] {
            let r = check_lemma(lemma, p);
            assert!(r.passed(), "{lemma}: {r:?}");
        }
        let r = check_lemma(LemmaId::ShiftNorm, p);
        assert!(r.tightest_slack.unwrap() > 0.0);
    }

    #[test]
    fn inapplicable_is_not_failure() {
        let r = check_lemma(LemmaId::ShiftNorm, CheckParams::new(13, 128, 16));
        assert!(r.is_inapplicable() && !r.failed());
        let r = check_lemma(LemmaId::RawOutputBound, CheckParams::new(13, 2048, 4));
        assert!(r.is_inapplicable());
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = GridSpec {
            n_values: vec![],
            m_exponents: ExponentRange { lo: None, hi: 10 },
            l_exponents: vec![4],
            trials: 1,
            seed: Seed(0),
        };
        assert_eq!(sweep(&grid, &[LemmaId::SetProperties]), Err(Error::EmptyGrid));
    }
}
