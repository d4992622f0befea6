//! Commands over scenario files, rendered as deterministic plain-text tables.

use std::fmt::Write as _;
use std::path::Path;

use lefschetz_core::correspondence::{brute_force_fixed_points, fix_count, Correspondence};
use lefschetz_core::curve::{EllipticCurve, Space};
use lefschetz_core::properties::{run_suite, SuiteConfig};
use lefschetz_core::semilinear::Budget;
use lefschetz_core::trace_formula::{
    evaluate, woods_hole_verify, zp_counterexample, Scenario, VerifyBudget,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scenario_file::{parse_scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Trace(#[from] lefschetz_core::trace_formula::TraceFormulaError),
    #[error(transparent)]
    Correspondence(#[from] lefschetz_core::correspondence::CorrespondenceError),
    #[error(transparent)]
    Curve(#[from] lefschetz_core::curve::CurveError),
    #[error(transparent)]
    Semilinear(#[from] lefschetz_core::semilinear::SemilinearError),
}

/// Rendered rows plus the verdict tally.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub passed: usize,
    pub total: usize,
}

impl Outcome {
    fn row(&mut self, ok: bool) -> &'static str {
        self.total += 1;
        if ok {
            self.passed += 1;
            "OK"
        } else {
            "FAIL"
        }
    }

    pub fn merge(&mut self, other: Outcome) {
        self.text.push_str(&other.text);
        self.passed += other.passed;
        self.total += other.total;
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }

    pub fn summary(&self) -> String {
        let tag = if self.ok() { "OK" } else { "FAIL" };
        format!("{tag} {}/{}", self.passed, self.total)
    }

    /// The report with its trailing summary line.
    pub fn report(&self) -> String {
        format!("{}{}\n", self.text, self.summary())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    WoodsHole,
    FixCount,
    HasseWitt,
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub budget: VerifyBudget,
    pub m_override: Option<Vec<usize>>,
}

/// `2^exponent` as a field-size cap.
pub fn budget_from_exponent(exponent: u32) -> Budget {
    Budget {
        max_field_size: 1u64 << exponent.min(63),
    }
}

fn space_name(space: Space) -> &'static str {
    match space {
        Space::AffineLine => "affine_line",
        Space::OpenElliptic => "open_elliptic",
        Space::ProperElliptic => "proper_elliptic",
    }
}

fn header(out: &mut Outcome, label: &str, s: &Scenario) {
    let f = s.correspondence.field();
    let ring = s.sheaf.ring();
    let _ = writeln!(
        out.text,
        "== {label}\nspace={} p={} q={} coefficients=Z/{}",
        space_name(s.space),
        f.characteristic(),
        f.order(),
        ring.modulus()
    );
}

fn curve_of(s: &Scenario) -> Result<&EllipticCurve, RunError> {
    match &s.correspondence {
        Correspondence::Elliptic { curve, .. } => Ok(curve),
        Correspondence::AffineLine { .. } => {
            Err(RunError::Unsupported("this command needs an elliptic scenario".into()))
        }
    }
}

fn oracle_note(p: u64, degree: usize, count: Option<u64>) -> String {
    match count {
        Some(c) => format!("enumerated {c} over F_{p}^{degree}"),
        None => "closed form (enumeration over budget)".to_string(),
    }
}

fn verify_rows(label: &str, s: &Scenario, opts: &Options) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let report = evaluate(s, opts.budget)?;
    header(&mut out, label, s);
    let p = report.p;
    let _ = writeln!(out.text, "{:>3} | {:>6} | {:>6} | {:>12} | verdict | oracle", "m", "lhs", "rhs", "fix_count");
    for r in &report.rows {
        let verdict = if r.lhs != r.rhs {
            out.row(false)
        } else if !r.oracle_agrees() {
            out.row(false);
            "FAIL oracle"
        } else {
            out.row(true)
        };
        let _ = writeln!(
            out.text,
            "{:>3} | {:>6} | {:>6} | {:>12} | {:<7} | {}",
            r.m,
            r.lhs,
            r.rhs,
            r.fix_count,
            verdict,
            oracle_note(p, r.oracle_degree, r.oracle_count)
        );
    }
    Ok(out)
}

fn woods_hole_rows(label: &str, s: &Scenario, opts: &Options) -> Result<Outcome, RunError> {
    let curve = curve_of(s)?;
    let f = curve.field();
    let p = f.characteristic() as i128;
    let mut out = Outcome::default();
    header(&mut out, label, s);
    let _ = writeln!(out.text, "{:>3} | {:>4} | {:>7} | {:>13} | {:>12} | {:>5} | verdict", "m", "c", "A_q^(m)", "1 - c A_q^(m)", "fix_count", "mod p");
    for &m in opts.m_override.as_ref().unwrap_or(&s.m_range) {
        let w = woods_hole_verify(curve, &s.correspondence, m)?;
        let verdict = out.row(w.holds);
        let _ = writeln!(
            out.text,
            "{:>3} | {:>4} | {:>7} | {:>13} | {:>12} | {:>5} | {verdict}",
            m,
            f.index(&w.c),
            f.index(&w.a_qm),
            f.index(&w.coherent),
            w.fix_count,
            w.fix_count.rem_euclid(p)
        );
    }
    Ok(out)
}

fn fix_count_rows(label: &str, s: &Scenario, opts: &Options) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    header(&mut out, label, s);
    let p = s.correspondence.field().characteristic();
    let _ = writeln!(out.text, "{:>3} | {:>12} | {:>12} | verdict | oracle", "m", "formula", "enumerated");
    for &m in opts.m_override.as_ref().unwrap_or(&s.m_range) {
        let formula = fix_count(&s.correspondence, m);
        let set = brute_force_fixed_points(&s.correspondence, m, opts.budget.oracle)?;
        let count = set.complete.then(|| set.count());
        let verdict = out.row(count.is_none_or(|c| c as i128 == formula));
        let shown = count.map_or("-".to_string(), |c| c.to_string());
        let _ = writeln!(
            out.text,
            "{:>3} | {:>12} | {:>12} | {:<7} | {}",
            m,
            formula,
            shown,
            verdict,
            oracle_note(p, set.field_degree, count)
        );
    }
    Ok(out)
}

fn hasse_witt_rows(label: &str, s: &Scenario, opts: &Options) -> Result<Outcome, RunError> {
    let curve = curve_of(s)?;
    let f = curve.field();
    let p = f.characteristic() as i64;
    let mut out = Outcome::default();
    header(&mut out, label, s);
    let a = curve.hasse_witt();
    let a_q = curve.h1_module()?.linearized_f(f.degree())?[0][0].components()[0];
    let count = curve.point_count(1, opts.budget.oracle)?;
    let t = curve.trace_t();
    let rank = curve.etale_h1(opts.budget.field)?.rank();
    let congruent = f.index(&a_q) as i64 == t.rem_euclid(p);
    let consistent = curve.is_supersingular().is_ok();
    let verdict = out.row(congruent && consistent);
    let kind = if a.is_zero() { "supersingular" } else { "ordinary" };
    let _ = writeln!(out.text, "{:>4} | {:>4} | {:>8} | {:>6} | {:<13} | {:>6} | verdict", "a", "A_q", "#E(F_q)", "t", "type", "H1 rank");
    let _ = writeln!(
        out.text,
        "{:>4} | {:>4} | {:>8} | {:>6} | {:<13} | {:>7} | {verdict}",
        f.index(&a),
        f.index(&a_q),
        count,
        t,
        kind,
        rank
    );
    Ok(out)
}

fn error_block(label: &str, err: &RunError) -> Outcome {
    let mut out = Outcome::default();
    out.row(false);
    out.text = format!("== {label}\nERROR: {err}\n");
    out
}

fn with_m(mut s: Scenario, opts: &Options) -> Scenario {
    if let Some(m) = &opts.m_override {
        s.m_range = m.clone();
    }
    s
}

/// Run one command on one scenario text.
pub fn run_text(command: Command, label: &str, text: &str, opts: &Options) -> Result<Outcome, RunError> {
    let s = with_m(parse_scenario(text)?, opts);
    match command {
        Command::Verify => verify_rows(label, &s, opts),
        Command::WoodsHole => woods_hole_rows(label, &s, opts),
        Command::FixCount => fix_count_rows(label, &s, opts),
        Command::HasseWitt => hasse_witt_rows(label, &s, opts),
    }
}

/// Run one command over files in order; errors become failed rows and are also
/// returned for the diagnostics stream.
pub fn run_files(command: Command, paths: &[impl AsRef<Path>], opts: &Options) -> (Outcome, Vec<String>) {
    let mut all = Outcome::default();
    let mut diagnostics = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let label = path.display().to_string();
        let result = std::fs::read_to_string(path)
            .map_err(|source| RunError::Read {
                path: label.clone(),
                source,
            })
            .and_then(|text| run_text(command, &label, &text, opts));
        match result {
            Ok(o) => all.merge(o),
            Err(err) => {
                diagnostics.push(format!("{label}: {err}"));
                all.merge(error_block(&label, &err));
            }
        }
    }
    (all, diagnostics)
}

/// The randomized semilinear-module suite, one row per configuration.
pub fn lemma5(configs: &[SuiteConfig], seed: u64, budget: Budget) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let _ = writeln!(out.text, "seed={seed}");
    let _ = writeln!(
        out.text,
        "{:>2} | {:>1} | {:>1} | {:>6} | {:>8} | {:>8} | {:>5} | {:>5} | {:>9} | verdict",
        "p", "n", "D", "tested", "rejected", "failures", "max N", "layer", "early eq"
    );
    for (i, cfg) in configs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let res = run_suite(*cfg, budget, &mut rng)?;
        let verdict = out.row(res.failures() == 0);
        let _ = writeln!(
            out.text,
            "{:>2} | {:>1} | {:>1} | {:>6} | {:>8} | {:>8} | {:>5} | {:>5} | {:>9} | {verdict}",
            cfg.p,
            cfg.n,
            cfg.degree,
            res.tested,
            res.rejected,
            res.failures(),
            res.max_threshold,
            res.max_layer,
            res.early_equality
        );
        for msg in &res.messages {
            let _ = writeln!(out.text, "   {msg}");
        }
    }
    Ok(out)
}

/// Every `p`, `n`, `D` combination with `modules` draws each.
pub fn suite_grid(ps: &[u64], ns: &[usize], degrees: &[usize], modules: usize) -> Vec<SuiteConfig> {
    let mut out = Vec::new();
    for &p in ps {
        for &n in ns {
            for &degree in degrees {
                out.push(SuiteConfig {
                    p,
                    n,
                    degree,
                    modules,
                });
            }
        }
    }
    out
}

/// `q^m` against the vanishing inverse-limit cohomology of the affine line.
pub fn zp_demo(qs: &[u64], m_range: &[usize]) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    for &q in qs {
        let table = zp_counterexample(q, m_range)?;
        let _ = writeln!(out.text, "== q={} p={}", table.q, table.p);
        let _ = writeln!(out.text, "{:>3} | {:>3} | {:>10} | {:>9} | {:<6} | verdict | lhs == rhs mod p^n", "m", "lhs", "rhs", "valuation", "in Z_p");
        for row in &table.rows {
            let congruences: Vec<String> = row
                .congruences
                .iter()
                .map(|(n, eq)| format!("n={n}:{}", if *eq { "yes" } else { "no" }))
                .collect();
            let pattern = row
                .congruences
                .iter()
                .all(|(n, eq)| *eq == (*n <= row.valuation));
            let ok = pattern && row.differs_in_zp() && row.lhs == 0;
            let verdict = out.row(ok);
            let _ = writeln!(
                out.text,
                "{:>3} | {:>3} | {:>10} | {:>9} | {:<6} | {verdict:<7} | {}",
                row.m,
                row.lhs,
                row.rhs,
                row.valuation,
                if row.differs_in_zp() { "differ" } else { "equal" },
                congruences.join(" ")
            );
        }
    }
    Ok(out)
}
