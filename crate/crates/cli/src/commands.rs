use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use oddqft::bounds::{tv_bound, TABLE1_EPSILON, TABLE1_N};
use oddqft::pipeline::{read_state_file, write_state_file, TrialSummary};
use oddqft::verify::{ExponentRange, GridSpec};
use oddqft::{
    check_lemma, choose_parameters, empirical_minimum, minimal_exponents, run_trials, sweep, CheckParams,
    CheckReport, GroupParams, LemmaId, Seed, Simulator64, TrialOptions,
};

use crate::format::{exact, sig6};
use crate::grid::{parse_grid, DEFAULT_GRID};

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// `(N, eps)` rows of the published simulation table.
pub const TABLE2_CELLS: [(u64, f64); 6] = [(13, 0.4), (13, 0.3), (13, 0.2), (25, 0.4), (25, 0.3), (51, 0.4)];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
        }
    }
}

impl From<oddqft::Error> for CliError {
    fn from(e: oddqft::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Whether a command detected a bound or property violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Violation,
}

pub type CmdResult = Result<Outcome, CliError>;

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write as _;
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

pub fn params(n: u64, epsilon: f64) -> CmdResult {
    let choice = choose_parameters(n, epsilon)?;
    out!("N: {n}");
    out!("epsilon: {}", sig6(epsilon));
    out!("g: {}", choice.g);
    out!("l_closed_form: {}", choice.l_closed_form);
    out!("m: {}", choice.m);
    out!("l: {}", choice.l);
    for l in oddqft::bounds::valid_l_exponents(n, epsilon, choice.m).iter().skip(1) {
        out!("alternative_l: {l}");
    }
    out!("qubits: {}", choice.qubits);
    out!("qubits_closed_form: {}", oddqft::qubit_count(1 << choice.g));
    out!("qubit_estimate: {}", choice.qubit_estimate);
    out!("main_bound: {}", sig6(choice.bound.main));
    out!("target: {}", sig6(epsilon / std::f64::consts::SQRT_2));
    out!("closed_form_main_bound: {}", sig6(choice.closed_form_bound.main));
    Ok(Outcome::Clean)
}

fn summary_lines(s: &TrialSummary) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "N={} M={} L={} trials={} seed={}", s.n, s.m, s.l, s.trials.len(), s.seed.0);
    let _ = writeln!(text, "max_error: {}", exact(s.max_error));
    let _ = writeln!(text, "mean_error: {}", exact(s.mean_error));
    let _ = writeln!(text, "max_tv: {}", exact(s.max_tv));
    let _ = writeln!(text, "bound: {}", sig6(s.bound.normalized()));
    if !s.bound.hypotheses.all() {
        let _ = writeln!(text, "note: bound hypotheses fail ({})", s.bound.hypotheses.violations().join("; "));
    }
    text
}

pub fn simulate(n: u64, m: u32, l: u32, trials: u64, seed: u64, out: Option<&Path>, force_large: bool) -> CmdResult {
    let params = GroupParams::from_exponents(n, m, l)?;
    let summary = run_trials(&params, trials, Seed(seed), TrialOptions { force_large })?;
    if let Some(path) = out {
        let mut csv = String::from("trial,seed,error,bound,tv,tv_bound\n");
        for t in &summary.trials {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                t.index,
                t.seed.0,
                exact(t.error),
                sig6(t.bound),
                exact(t.tv_distance),
                sig6(tv_bound(t.error))
            );
        }
        emit(Some(path), &csv)?;
    }
    out!("{}", summary_lines(&summary).trim_end());
    let violations = summary.bound_violations().len() + summary.tv_violations().len();
    if violations > 0 {
        eprintln!("{violations} trial(s) violate their bound");
        return Ok(Outcome::Violation);
    }
    Ok(Outcome::Clean)
}

pub fn table1_csv() -> Result<String, CliError> {
    let mut csv = String::from("N,epsilon,g,m,l\n");
    for n in TABLE1_N {
        for eps in TABLE1_EPSILON {
            let (g, _) = oddqft::bounds::closed_form_exponents(n, eps)?;
            let (m, l) = minimal_exponents(n, eps)?;
            let _ = writeln!(csv, "{n},{},{g},{m},{l}", sig6(eps));
        }
    }
    Ok(csv)
}

pub fn table1(out: Option<&Path>) -> CmdResult {
    emit(out, &table1_csv()?)?;
    Ok(Outcome::Clean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Table2Mode {
    Theorem,
    Best,
    Both,
}

pub struct Table2Args {
    pub mode: Table2Mode,
    pub cells: Vec<(u64, f64)>,
    pub trials: u64,
    pub best_trials: u64,
    pub seed: u64,
}

pub fn table2(args: &Table2Args, out: Option<&Path>) -> CmdResult {
    let mut csv = String::from("N,epsilon,m,l,observed_max_error,best_m,best_l,best_observed\n");
    let mut outcome = Outcome::Clean;
    for &(n, eps) in &args.cells {
        let (m, l) = minimal_exponents(n, eps)?;
        let mut theorem = (String::new(), String::new(), String::new());
        if args.mode != Table2Mode::Best {
            let params = GroupParams::from_exponents(n, m, l)?;
            let summary = run_trials(&params, args.trials, Seed(args.seed), TrialOptions::default())?;
            if !summary.bound_violations().is_empty() || !summary.tv_violations().is_empty() || summary.max_error > eps {
                outcome = Outcome::Violation;
            }
            theorem = (m.to_string(), l.to_string(), exact(summary.max_error));
        }
        let mut best = (String::new(), String::new(), String::new());
        if args.mode != Table2Mode::Theorem {
            if let Some(c) = empirical_minimum(n, eps, args.best_trials, Seed(args.seed), m)? {
                best = (c.m_exponent.to_string(), c.l_exponent.to_string(), exact(c.max_error));
            }
        }
        let _ = writeln!(csv, "{n},{},{},{},{},{},{},{}", sig6(eps), theorem.0, theorem.1, theorem.2, best.0, best.1, best.2);
    }
    emit(out, &csv)?;
    Ok(outcome)
}

pub struct VerifyArgs {
    pub lemmas: Vec<String>,
    pub grid: Option<String>,
    pub n: Option<u64>,
    pub m_size: Option<u64>,
    pub m_exp: Option<u32>,
    pub l_size: Option<u64>,
    pub l_exp: Option<u32>,
    pub trials: u64,
    pub seed: u64,
    pub verbose: bool,
}

fn exponent_of(size: u64, name: &str) -> Result<u32, CliError> {
    if size == 0 || !size.is_power_of_two() {
        return Err(CliError::Usage(format!("{name} = {size} must be a power of two")));
    }
    Ok(size.trailing_zeros())
}

fn parse_lemmas(names: &[String]) -> Result<Vec<LemmaId>, CliError> {
    let names: Vec<&str> = names.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() || names.contains(&"all") {
        return Ok(LemmaId::ALL.to_vec());
    }
    names.iter().map(|s| s.parse::<LemmaId>().map_err(CliError::from)).collect()
}

fn describe(r: &CheckReport) -> String {
    let p = &r.params;
    let status = match &r.status {
        oddqft::CheckStatus::Passed => "pass".to_string(),
        oddqft::CheckStatus::Failed => format!("FAIL ({} violations)", r.violation_count),
        oddqft::CheckStatus::Inapplicable(why) => format!("inapplicable: {why}"),
    };
    let l = if r.lemma.uses_l() { format!(" L={}", p.l) } else { String::new() };
    let mut line = format!("{} N={} M={}{l} {status} instances={}", r.lemma, p.n, p.m, r.instances_checked);
    if let Some(s) = r.tightest_slack {
        let at = r.tightest_at.as_ref().map(|v| format!("{v:?}")).unwrap_or_default();
        let _ = write!(line, " tightest_slack={} at {at}", sig6(s));
    }
    line
}

fn single_point_grid(a: &VerifyArgs, n: u64) -> Result<GridSpec, CliError> {
    let m_exp = match (a.m_size, a.m_exp) {
        (Some(size), None) => exponent_of(size, "M")?,
        (None, Some(e)) => e,
        (None, None) => return Err(CliError::Usage("--N needs --M or --m".into())),
        (Some(_), Some(_)) => return Err(CliError::Usage("give only one of --M and --m".into())),
    };
    if m_exp > 40 {
        return Err(CliError::Usage("M must be at most 2^40".into()));
    }
    let l_exps = match (a.l_size, a.l_exp) {
        (Some(size), None) => vec![exponent_of(size, "L")?],
        (None, Some(e)) => vec![e],
        (None, None) => vec![4, 5],
        (Some(_), Some(_)) => return Err(CliError::Usage("give only one of --L and --l".into())),
    };
    Ok(GridSpec {
        n_values: vec![n],
        m_exponents: ExponentRange { lo: Some(m_exp), hi: m_exp },
        l_exponents: l_exps,
        trials: a.trials,
        seed: Seed(a.seed),
    })
}

pub fn verify(a: &VerifyArgs, out: Option<&Path>) -> CmdResult {
    let lemmas = parse_lemmas(&a.lemmas)?;
    let (grid, single) = match a.n {
        Some(n) => (single_point_grid(a, n)?, true),
        None => {
            let spec = a.grid.as_deref().unwrap_or(DEFAULT_GRID);
            (parse_grid(spec, a.trials, Seed(a.seed)).map_err(CliError::Usage)?, false)
        }
    };
    let report = if single && lemmas == [LemmaId::UnitTriangle] {
        // unit_triangle reads N as the vector dimension and needs no M
        let r = check_lemma(LemmaId::UnitTriangle, CheckParams::new(grid.n_values[0], 0, 0).with_trials(a.trials).with_seed(Seed(a.seed)));
        oddqft::SweepReport {
            passed: r.passed() as usize,
            failed: r.failed() as usize,
            inapplicable: r.is_inapplicable() as usize,
            reports: vec![r],
        }
    } else {
        sweep(&grid, &lemmas)?
    };
    let mut per_lemma: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for r in &report.reports {
        let slot = per_lemma.entry(r.lemma.as_str()).or_default();
        if r.passed() {
            slot[0] += 1;
        } else if r.failed() {
            slot[1] += 1;
        } else {
            slot[2] += 1;
        }
        if single || a.verbose || r.failed() {
            out!("{}", describe(r));
        }
        if single || r.failed() {
            for note in &r.notes {
                out!("  {note}");
            }
            for w in &r.violations {
                out!("  violation {} at {:?}: {} > {}", w.label, w.location, exact(w.lhs), exact(w.rhs));
            }
        }
    }
    for (lemma, [p, f, i]) in &per_lemma {
        out!("{lemma}: passed={p} failed={f} inapplicable={i}");
    }
    out!("total: passed={} failed={} inapplicable={}", report.passed, report.failed, report.inapplicable);
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        emit(Some(path), &(json + "\n"))?;
    }
    Ok(if report.all_passed() { Outcome::Clean } else { Outcome::Violation })
}

pub struct TransformArgs {
    pub input: PathBuf,
    pub m: u32,
    pub l: u32,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub force_large: bool,
}

pub fn transform(a: &TransformArgs) -> CmdResult {
    let loaded = read_state_file(&a.input)?;
    if loaded.renormalized {
        eprintln!("warning: input norm {} renormalized to 1", exact(loaded.original_norm));
    }
    let n = loaded.state.dim() as u64;
    let params = GroupParams::from_exponents(n, a.m, a.l)?;
    oddqft::pipeline::check_memory_guard(&params, TrialOptions { force_large: a.force_large })?;
    let sim = Simulator64::new(params)?;
    let grid = sim.approximate_qft(&loaded.state)?;
    let metrics = sim.trial(&loaded.state)?;
    write_state_file(&a.out, &grid.to_state()).map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    let bound = sim.bound().normalized();
    let report = serde_json::json!({
        "n": n,
        "m": params.m(),
        "l": params.l(),
        "rows": grid.rows(),
        "width": grid.width(),
        "error": metrics.error,
        "bound": bound,
        "tv": metrics.tv_distance,
        "tv_bound": tv_bound(bound),
        "tv_error_bound": tv_bound(metrics.error),
        "renormalized": loaded.renormalized,
    });
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".report.json");
        PathBuf::from(p)
    });
    emit(Some(&report_path), &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    out!("error: {}", exact(metrics.error));
    out!("bound: {}", sig6(bound));
    out!("tv: {}", exact(metrics.tv_distance));
    let hypotheses = sim.bound().hypotheses.all();
    if (hypotheses && metrics.error > bound) || metrics.tv_distance > tv_bound(metrics.error) + 1e-12 {
        return Ok(Outcome::Violation);
    }
    Ok(Outcome::Clean)
}
