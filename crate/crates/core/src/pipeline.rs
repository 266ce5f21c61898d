//! Runs the odd-order transform on concrete states and measures it against
//! the ideal product `F_N |u> (x) |psi>`.
//!
//! The `F_L` and reindexing prefix is applied analytically by
//! [`embed_copies`]; `F_M` is the radix-2 FFT and the division map is a table
//! lookup into an `N x (2 alpha + 1)` grid.

use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{main_bound, BoundReport};
use crate::error::{Error, Result};
use crate::numerics::{check_dims, random_unit_state, ComplexVec, Real, Seed};
use crate::partition::{a_unchecked, DeltaDecomposition, GroupParams};
use crate::transforms::{dft, Radix2Plan, TransformDirection};

/// Default cap on `log2 M` for trial runs.
pub const MEMORY_GUARD_EXPONENT: u32 = 24;

/// Amplitudes on `|s>|t + alpha>`, stored row-major with one row per `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGrid<T> {
    rows: usize,
    alpha: i64,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> OutputGrid<T> {
    pub fn zeros(rows: usize, alpha: i64) -> Self {
        let width = (2 * alpha + 1) as usize;
        Self {
            rows,
            alpha,
            amplitudes: vec![Complex::new(T::zero(), T::zero()); rows * width],
        }
    }

    pub fn from_amplitudes(rows: usize, alpha: i64, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let width = (2 * alpha + 1) as usize;
        check_dims(rows * width, amplitudes.len())?;
        Ok(Self { rows, alpha, amplitudes })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn alpha(&self) -> i64 {
        self.alpha
    }

    pub fn width(&self) -> usize {
        (2 * self.alpha + 1) as usize
    }

    /// Amplitude on `|s>|t + alpha>`, `-alpha <= t <= alpha`.
    pub fn get(&self, s: usize, t: i64) -> Complex<T> {
        self.amplitudes[s * self.width() + (t + self.alpha) as usize]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Row-major flattening as a plain vector.
    pub fn to_state(&self) -> ComplexVec<T> {
        ComplexVec::new(self.amplitudes.clone()).expect("grid is never empty")
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.alpha != other.alpha {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                actual: other.amplitudes.len(),
            });
        }
        Ok(())
    }
}

/// `|u_L> = L^{-1/2} sum_{i,j} u_i |i + j N>` in dimension `M`.
pub fn embed_copies<T: Real>(u: &ComplexVec<T>, params: &GroupParams) -> Result<ComplexVec<T>> {
    let n = params.n() as usize;
    check_dims(n, u.dim())?;
    let scale = T::one() / T::of(params.l() as f64).sqrt();
    let mut out = ComplexVec::zeros(params.m() as usize)?;
    let slots = out.as_mut_slice();
    for j in 0..params.l() as usize {
        for (i, z) in u.iter().enumerate() {
            slots[i + j * n] = z * scale;
        }
    }
    Ok(out)
}

/// Everything that depends only on the parameters, shared across trials.
#[derive(Debug, Clone)]
pub struct Simulator<T> {
    params: GroupParams,
    decomposition: DeltaDecomposition,
    plan: Radix2Plan<T>,
    /// `A^0_{t mod M}` on the columns `t + alpha`, `t` in Lambda.
    raw_column: Vec<Complex<T>>,
    psi: Vec<Complex<T>>,
    bound: BoundReport,
}

impl<T: Real> Simulator<T> {
    pub fn new(params: GroupParams) -> Result<Self> {
        let decomposition = DeltaDecomposition::build(params.m(), params.n())?;
        let plan = Radix2Plan::new(params.m() as usize)?;
        let alpha = decomposition.alpha();
        let mut raw_column = vec![Complex::new(T::zero(), T::zero()); decomposition.width()];
        let m = params.m() as i64;
        for &t in decomposition.lambda() {
            raw_column[(t + alpha) as usize] = a_unchecked(0, t.rem_euclid(m) as u64, &params);
        }
        let column_norm = raw_column.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        let psi = raw_column.iter().map(|z| z / column_norm).collect();
        Ok(Self {
            params,
            decomposition,
            plan,
            raw_column,
            psi,
            bound: main_bound(params.n(), params.m(), params.l()),
        })
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    pub fn decomposition(&self) -> &DeltaDecomposition {
        &self.decomposition
    }

    pub fn bound(&self) -> &BoundReport {
        &self.bound
    }

    /// The unit second-register vector `|psi>`, indexed by `t + alpha`.
    pub fn psi(&self) -> &[Complex<T>] {
        &self.psi
    }

    /// `F_M |u_L>` before the division map.
    pub fn transformed_copies(&self, u: &ComplexVec<T>) -> Result<ComplexVec<T>> {
        let mut x = embed_copies(u, &self.params)?;
        self.plan.process(x.as_mut_slice(), TransformDirection::Forward)?;
        Ok(x)
    }

    /// Output `|v>` of the algorithm, laid out on the `(s, t + alpha)` grid.
    pub fn approximate_qft(&self, u: &ComplexVec<T>) -> Result<OutputGrid<T>> {
        let x = self.transformed_copies(u)?;
        let mut grid = OutputGrid::zeros(self.params.n() as usize, self.decomposition.alpha());
        for (k, z) in x.iter().enumerate() {
            grid.amplitudes[self.decomposition.cell(k as u64)] = *z;
        }
        Ok(grid)
    }

    fn product(&self, u: &ComplexVec<T>, column: &[Complex<T>]) -> Result<OutputGrid<T>> {
        check_dims(self.params.n() as usize, u.dim())?;
        let hat = dft(u, TransformDirection::Forward);
        let mut grid = OutputGrid::zeros(self.params.n() as usize, self.decomposition.alpha());
        let width = grid.width();
        for (s, us) in hat.iter().enumerate() {
            for (c, z) in column.iter().enumerate() {
                grid.amplitudes[s * width + c] = us * z;
            }
        }
        Ok(grid)
    }

    /// The ideal output `F_N |u> (x) |psi>`.
    pub fn reference_state(&self, u: &ComplexVec<T>) -> Result<OutputGrid<T>> {
        self.product(u, &self.psi)
    }

    /// `F_N |u> (x) sum_{t in Lambda} A^0_t |t + alpha>` without normalization.
    pub fn unnormalized_reference(&self, u: &ComplexVec<T>) -> Result<OutputGrid<T>> {
        self.product(u, &self.raw_column)
    }

    /// Runs the algorithm on `u` and measures it.
    pub fn trial(&self, u: &ComplexVec<T>) -> Result<TrialMetrics> {
        let v = self.approximate_qft(u)?;
        let reference = self.reference_state(u)?;
        let raw = self.unnormalized_reference(u)?;
        Ok(TrialMetrics {
            error: trace_error(&v, &reference)?.as_f64(),
            raw_error: trace_error(&v, &raw)?.as_f64(),
            tv_distance: induced_tv(&v, &reference)?.as_f64(),
            output_norm: v.norm_sqr().sqrt().as_f64(),
        })
    }
}

/// Error metrics of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialMetrics {
    /// `|| v - F_N u (x) psi ||`.
    pub error: f64,
    /// Distance to the unnormalized product.
    pub raw_error: f64,
    pub tv_distance: f64,
    pub output_norm: f64,
}

pub fn approximate_qft<T: Real>(u: &ComplexVec<T>, params: &GroupParams) -> Result<OutputGrid<T>> {
    Simulator::new(*params)?.approximate_qft(u)
}

pub fn reference_state<T: Real>(u: &ComplexVec<T>, params: &GroupParams) -> Result<OutputGrid<T>> {
    Simulator::new(*params)?.reference_state(u)
}

/// Frobenius norm of the entrywise difference over the whole grid.
pub fn trace_error<T: Real>(v: &OutputGrid<T>, reference: &OutputGrid<T>) -> Result<T> {
    v.same_shape(reference)?;
    Ok(v
        .amplitudes
        .iter()
        .zip(&reference.amplitudes)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<T>()
        .sqrt())
}

/// Total variation `sum_cells | |v|^2 - |ref|^2 |` of the induced distributions.
pub fn induced_tv<T: Real>(v: &OutputGrid<T>, reference: &OutputGrid<T>) -> Result<T> {
    v.same_shape(reference)?;
    Ok(v
        .amplitudes
        .iter()
        .zip(&reference.amplitudes)
        .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
        .sum())
}

/// One seeded trial of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialResult {
    pub index: u64,
    pub seed: Seed,
    pub error: f64,
    /// `sqrt(2) * (tail + shift)`.
    pub bound: f64,
    pub raw_error: f64,
    /// `tail + shift`.
    pub raw_bound: f64,
    pub tv_distance: f64,
}

impl TrialResult {
    pub fn within_bound(&self) -> bool {
        self.error <= self.bound && self.raw_error <= self.raw_bound
    }

    pub fn within_tv_bound(&self) -> bool {
        self.tv_distance <= crate::bounds::tv_bound(self.error) + 1e-12
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrialOptions {
    /// Allows `M` above `2^MEMORY_GUARD_EXPONENT`.
    pub force_large: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialSummary {
    pub n: u64,
    pub m: u64,
    pub l: u64,
    pub seed: Seed,
    pub bound: BoundReport,
    pub trials: Vec<TrialResult>,
    pub max_error: f64,
    pub mean_error: f64,
    pub max_tv: f64,
}

impl TrialSummary {
    /// Trials breaking the theorem's error bound, counted only when its hypotheses hold.
    pub fn bound_violations(&self) -> Vec<&TrialResult> {
        if !self.bound.hypotheses.all() {
            return Vec::new();
        }
        self.trials.iter().filter(|t| !t.within_bound()).collect()
    }

    pub fn tv_violations(&self) -> Vec<&TrialResult> {
        self.trials.iter().filter(|t| !t.within_tv_bound()).collect()
    }
}

pub fn check_memory_guard(params: &GroupParams, options: TrialOptions) -> Result<()> {
    let exponent = params.m_exponent();
    if exponent > MEMORY_GUARD_EXPONENT && !options.force_large {
        return Err(Error::MemoryGuard {
            exponent,
            limit: MEMORY_GUARD_EXPONENT,
        });
    }
    Ok(())
}

/// Runs `trials` independent random states; trial `r` uses `seed.derive(r)`.
pub fn run_trials(params: &GroupParams, trials: u64, seed: Seed, options: TrialOptions) -> Result<TrialSummary> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    check_memory_guard(params, options)?;
    let sim = Simulator::<f64>::new(*params)?;
    let bound = *sim.bound();
    let results = (0..trials)
        .into_par_iter()
        .map(|r| {
            let trial_seed = seed.derive(r);
            let u = random_unit_state::<f64>(params.n() as usize, trial_seed)?;
            let metrics = sim.trial(&u)?;
            Ok(TrialResult {
                index: r,
                seed: trial_seed,
                error: metrics.error,
                bound: bound.normalized(),
                raw_error: metrics.raw_error,
                raw_bound: bound.main,
                tv_distance: metrics.tv_distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_error = results.iter().map(|t| t.error).fold(0.0, f64::max);
    let max_tv = results.iter().map(|t| t.tv_distance).fold(0.0, f64::max);
    let mean_error = results.iter().map(|t| t.error).sum::<f64>() / results.len() as f64;
    Ok(TrialSummary {
        n: params.n(),
        m: params.m(),
        l: params.l(),
        seed,
        bound,
        trials: results,
        max_error,
        mean_error,
        max_tv,
    })
}

/// Smallest register found empirically to meet a target error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalChoice {
    pub m_exponent: u32,
    pub l_exponent: u32,
    pub max_error: f64,
}

/// Scans `m` upward from `ceil(log2(2N))` to `max_m_exponent`. At the first `m`
/// where some `L >= 2` with `L N <= M` keeps the observed maximum error within
/// `epsilon`, returns the `l` with the smallest observed maximum.
pub fn empirical_minimum(n: u64, epsilon: f64, trials: u64, seed: Seed, max_m_exponent: u32) -> Result<Option<EmpiricalChoice>> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("N = {n} must be odd and at least 3")));
    }
    let first = (2 * n).next_power_of_two().trailing_zeros();
    for m_exp in first..=max_m_exponent {
        let mut best: Option<EmpiricalChoice> = None;
        for l_exp in 1..m_exp {
            let Ok(params) = GroupParams::from_exponents(n, m_exp, l_exp) else {
                break;
            };
            let summary = run_trials(&params, trials, seed, TrialOptions::default())?;
            if summary.max_error <= epsilon && best.is_none_or(|b| summary.max_error < b.max_error) {
                best = Some(EmpiricalChoice {
                    m_exponent: m_exp,
                    l_exponent: l_exp,
                    max_error: summary.max_error,
                });
            }
        }
        if best.is_some() {
            return Ok(best);
        }
    }
    Ok(None)
}

/// Norm tolerance applied when loading a state file.
pub const STATE_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_vec<T: Real>(v: &ComplexVec<T>) -> Self {
        Self {
            n: v.dim(),
            amplitudes: v.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes")
    }
}

/// A loaded state and whether it had to be renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedState {
    pub state: ComplexVec<f64>,
    pub original_norm: f64,
    pub renormalized: bool,
}

pub fn parse_state(json: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(json).map_err(|e| Error::StateFormat(e.to_string()))?;
    if file.n == 0 {
        return Err(Error::StateFormat("n must be positive".into()));
    }
    if file.n != file.amplitudes.len() {
        return Err(Error::StateFormat(format!(
            "n = {} but {} amplitudes given",
            file.n,
            file.amplitudes.len()
        )));
    }
    let entries: Vec<Complex<f64>> = file.amplitudes.iter().map(|&[re, im]| Complex::new(re, im)).collect();
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::StateFormat("non-finite amplitude".into()));
    }
    let raw = ComplexVec::new(entries)?;
    let norm = raw.norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let renormalized = (norm - 1.0).abs() > STATE_NORM_TOLERANCE;
    let state = if renormalized { raw.normalized()? } else { raw };
    Ok(LoadedState {
        state,
        original_norm: norm,
        renormalized,
    })
}

pub fn read_state_file(path: &Path) -> Result<LoadedState> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::StateFormat(format!("{}: {e}", path.display())))?;
    parse_state(&text)
}

pub fn write_state_file<T: Real>(path: &Path, v: &ComplexVec<T>) -> std::io::Result<()> {
    std::fs::write(path, StateFile::from_vec(v).to_json())
}
