//! Command implementations shared by the binary and the integration tests.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num::complex::Complex64;
use num::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use msumma_core::analysis::{
    borel_singularities, estimate_gevrey, summability_verdict, GevreyEstimate, SingularityMethod, SingularitySet,
    SummabilityReport, Tolerances, Verdict,
};
use msumma_core::characteristic::{characteristic, summability_levels};
use msumma_core::moments::{kernel_pair_for, MomentFunction, Rational};
use msumma_core::operators::borel;
use msumma_core::resummation::{laplace_resum, ResummationResult};
use msumma_core::solver::{solve_constant_leading, FormalSolution};
use msumma_core::{Error as CoreError, RamifiedSeries, ScaledComplex};

use crate::dsl::{self, ParseError, ProblemFile, Resolved, SemanticError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const BUNDLE_SCHEMA: &str = "msumma_bundle.v1";

#[derive(Debug)]
pub enum CliError {
    Parse(ParseError),
    Semantic(SemanticError),
    Core(CoreError),
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(e) => write!(f, "parse error at {e}"),
            CliError::Semantic(e) => write!(f, "invalid problem: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Internal(e) => write!(f, "internal error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

impl From<SemanticError> for CliError {
    fn from(e: SemanticError) -> Self {
        CliError::Semantic(e)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const SEMANTIC: i32 = 3;
    pub const INCONCLUSIVE: i32 = 4;
    pub const INTERNAL: i32 = 5;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::Semantic(_) => exit::SEMANTIC,
            CliError::Core(e) => match e {
                CoreError::UnsupportedRange(_)
                | CoreError::TruncationExhausted { .. }
                | CoreError::SingularSystem(_)
                | CoreError::RayBlocked(_)
                | CoreError::OutsideSector(_)
                | CoreError::Numerical(_) => exit::INCONCLUSIVE,
                _ => exit::SEMANTIC,
            },
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Gevrey,
    Singular,
    Verdict,
    Resum,
    Report,
}

#[derive(Debug, Clone)]
pub struct Flags {
    pub out: PathBuf,
    pub directions: Option<Vec<f64>>,
    pub multidirection: Option<Vec<f64>>,
    pub t: Option<Complex64>,
    pub d: Option<f64>,
    pub z: Complex64,
    pub trunc: Option<usize>,
    pub json: bool,
    pub csv: bool,
    pub seed: u64,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            out: PathBuf::from("."),
            directions: None,
            multidirection: None,
            t: None,
            d: None,
            z: Complex64::new(0.0, 0.0),
            trunc: None,
            json: false,
            csv: false,
            seed: DEFAULT_SEED,
        }
    }
}

/// What a command produced: text for stdout, files written, and whether every
/// verdict came back inconclusive.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
    pub inconclusive_only: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.inconclusive_only {
            exit::INCONCLUSIVE
        } else {
            exit::OK
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunRecord<'a, T: Serialize> {
    pub input_hash: String,
    pub tool_version: &'a str,
    pub timestamp: u64,
    pub seed: u64,
    pub command: &'a str,
    pub report: &'a T,
}

pub fn input_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

struct Ctx<'a> {
    text: &'a str,
    pf: ProblemFile,
    resolved: Resolved,
    flags: &'a Flags,
}

impl Ctx<'_> {
    fn write(&self, name: &str, body: &str, out: &mut Outcome) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.flags.out)?;
        let path = self.flags.out.join(name);
        std::fs::write(&path, body)?;
        out.files.push(path);
        Ok(())
    }

    fn record<T: Serialize>(&self, command: &str, report: &T, out: &mut Outcome) -> Result<(), CliError> {
        let rec = RunRecord {
            input_hash: input_hash(self.text),
            tool_version: VERSION,
            timestamp: timestamp(),
            seed: self.flags.seed,
            command,
            report,
        };
        self.write("run_record.json", &(serde_json::to_string_pretty(&rec)? + "\n"), out)
    }
}

pub fn solve(resolved: &Resolved) -> Result<FormalSolution, CliError> {
    Ok(solve_constant_leading(&resolved.problem)?)
}

/// Top summability level `K` of the problem, or `1` when the solution converges.
pub fn top_level(resolved: &Resolved) -> Result<Rational, CliError> {
    let prob = &resolved.problem;
    let ch = characteristic(&prob.p)?;
    let levels = summability_levels(&ch.roots, prob.m1.order(), prob.m2.order(), prob.gevrey_s);
    Ok(levels.first().map(|l| l.k).unwrap_or_else(Rational::one))
}

/// `û(t, z₀)` as a series in `t`.
pub fn t_series(sol: &FormalSolution, z0: Complex64) -> Result<RamifiedSeries, CliError> {
    let s = &sol.series;
    let coeffs: Vec<ScaledComplex> = (0..=s.trunc_t())
        .map(|j| {
            if z0 == Complex64::new(0.0, 0.0) {
                s.get(j, 0)
            } else {
                s.extract_row(j).eval_scaled(z0, 0)
            }
        })
        .collect();
    Ok(RamifiedSeries::new(1, coeffs)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct GevreyRow {
    pub quantity: String,
    pub estimate: Option<GevreyEstimate>,
    pub note: String,
}

fn gevrey_rows(ctx: &Ctx, sol: &FormalSolution) -> Result<Vec<GevreyRow>, CliError> {
    let z0 = ctx.flags.z;
    let mut rows = Vec::new();
    let mut push = |name: String, r: Result<GevreyEstimate, CoreError>| {
        let (estimate, note) = match r {
            Ok(e) => (Some(e), String::new()),
            Err(e) => (None, e.to_string()),
        };
        rows.push(GevreyRow {
            quantity: name,
            estimate,
            note,
        });
    };
    let u = t_series(sol, z0)?;
    push(format!("u(t,{})", fmt_c(z0)), estimate_gevrey(&u, None));

    let prob = &ctx.resolved.problem;
    let gm = MomentFunction::gamma(prob.gevrey_s);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.flags.seed);
    let samples = 64;
    let phase = rng.random::<f64>() * TAU / samples as f64;
    let r = 0.25;
    // Rows whose last retained term is not negligible on the circle are cut off.
    let mut norms = Vec::new();
    for j in 0..=sol.series.trunc_t() {
        let row = borel(&gm, &sol.series.extract_row(j))?;
        let sup = row.sup_norm_on_circle_with_phase(r, samples, phase);
        let n = row.trunc();
        let tail = row.coeff(n).log10_abs() + (n as f64 / row.kappa() as f64) * r.log10();
        if !(sup.value > 0.0) || tail > sup.value.log10() - 8.0 {
            break;
        }
        norms.push(ScaledComplex::from_real(sup.value));
    }
    let norms: Result<Vec<ScaledComplex>, CoreError> = Ok(norms);
    push(
        format!("sup|u_j| r={r}"),
        norms.and_then(|n| RamifiedSeries::new(1, n)).and_then(|s| estimate_gevrey(&s, None)),
    );
    for (i, d) in prob.data.iter().enumerate() {
        push(format!("phi_{i}(z)"), estimate_gevrey(d, None));
    }
    Ok(rows)
}

fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn gevrey_table(rows: &[GevreyRow]) -> String {
    let mut s = format!("{:<18} {:>10} {:>10} {:>12} {:>11}\n", "quantity", "order", "stderr", "window", "method");
    for r in rows {
        match &r.estimate {
            Some(e) => {
                let _ = writeln!(
                    s,
                    "{:<18} {:>10.4} {:>10.4} {:>12} {:>11}",
                    r.quantity,
                    e.order_hat,
                    e.stderr,
                    format!("{}..{}", e.window.0, e.window.1),
                    format!("{:?}", e.method).to_lowercase()
                );
            }
            None => {
                let _ = writeln!(s, "{:<18} {:>10} ({})", r.quantity, "n/a", r.note);
            }
        }
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularReport {
    pub k: String,
    pub z0: (f64, f64),
    pub t_borel: SingularitySet,
    pub data: Vec<Option<SingularitySet>>,
}

fn singular_report(ctx: &Ctx, sol: &FormalSolution) -> Result<SingularReport, CliError> {
    let k = top_level(&ctx.resolved)?;
    let u = t_series(sol, ctx.flags.z)?;
    let bt = borel(&MomentFunction::gamma(k.recip()), &u)?;
    let t_borel = borel_singularities(&bt, SingularityMethod::PadePoles)?;
    let prob = &ctx.resolved.problem;
    let gm = MomentFunction::gamma(prob.gevrey_s);
    let data = prob
        .data
        .iter()
        .map(|d| borel(&gm, d).and_then(|b| borel_singularities(&b, SingularityMethod::PadePoles)).ok())
        .collect();
    Ok(SingularReport {
        k: k.to_string(),
        z0: (ctx.flags.z.re, ctx.flags.z.im),
        t_borel,
        data,
    })
}

fn default_directions() -> Vec<f64> {
    (0..8).map(|i| i as f64 * PI / 4.0).collect()
}

fn verdict_report(ctx: &Ctx) -> Result<SummabilityReport, CliError> {
    let dirs = ctx.flags.directions.clone().unwrap_or_else(default_directions);
    Ok(summability_verdict(
        &ctx.resolved.problem,
        &dirs,
        ctx.flags.multidirection.as_deref(),
        &Tolerances::default(),
    )?)
}

fn verdict_table(rep: &SummabilityReport) -> String {
    let mut s = String::new();
    for (i, l) in rep.levels.iter().enumerate() {
        let dirs: Vec<String> = l.singular_directions.iter().map(|d| format!("{d:.6}")).collect();
        let _ = writeln!(s, "level {i}: q = {}, K = {}, singular directions [{}]", l.q, l.k, dirs.join(", "));
    }
    if rep.levels.is_empty() {
        s.push_str("no summability levels: the formal solution is convergent\n");
    }
    let _ = writeln!(s, "{:>10} {:>6} {:>13}  evidence", "direction", "level", "verdict");
    for v in &rep.verdicts {
        let evidence = match (&v.witness, v.growth.first()) {
            (Some(w), _) => format!("singularity at {}{:+}i", w.re, w.im),
            (None, Some(g)) => format!("growth A={:.3e} B={:.3e} exponent {}", g.a, g.b, g.exponent),
            _ => v.note.clone(),
        };
        let _ = writeln!(s, "{:>10.6} {:>6} {:>13}  {}", v.direction, v.level, v.verdict.to_string(), evidence);
    }
    if let Some(m) = &rep.multidirection {
        let _ = writeln!(s, "multidirection admissible: {}", m.admissible);
    }
    for n in &rep.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn resum_result(ctx: &Ctx, sol: &FormalSolution) -> Result<ResummationResult, CliError> {
    let t = ctx
        .flags
        .t
        .ok_or_else(|| CliError::Semantic(dsl::SemanticError {
            message: "`resum` needs --t".into(),
            hint: "pass a complex point, e.g. --t 0.05i".into(),
        }))?;
    let d = ctx.flags.d.unwrap_or_else(|| t.arg());
    let k = top_level(&ctx.resolved)?;
    let m = MomentFunction::gamma(k.recip());
    let u = t_series(sol, ctx.flags.z)?;
    let bt = borel(&m, &u)?;
    let kernel = kernel_pair_for(&m)?;
    Ok(laplace_resum(&bt, &kernel, d, t)?)
}

#[derive(Debug, Serialize)]
struct Bundle<'a> {
    schema: &'a str,
    input_hash: String,
    tool_version: &'a str,
    seed: u64,
    problem: String,
    gevrey: Vec<GevreyRow>,
    singularities: SingularReport,
    summability: SummabilityReport,
    resummation: Option<ResummationResult>,
}

fn csv_coefficients(u: &RamifiedSeries, b: &RamifiedSeries) -> String {
    let mut s = String::from("j,log10_abs_u,log10_abs_borel\n");
    for j in 0..=u.trunc() {
        let _ = writeln!(s, "{},{},{}", j, u.coeff(j).log10_abs(), b.coeff(j).log10_abs());
    }
    s
}

fn csv_poles(rep: &SingularReport) -> String {
    let mut s = String::from("source,re,im,confidence\n");
    for p in &rep.t_borel.points {
        let _ = writeln!(s, "t_borel,{},{},{}", p.re, p.im, p.confidence);
    }
    for (i, set) in rep.data.iter().enumerate() {
        for p in set.iter().flat_map(|x| &x.points) {
            let _ = writeln!(s, "phi_{i},{},{},{}", p.re, p.im, p.confidence);
        }
    }
    s
}

fn csv_growth(rep: &SummabilityReport) -> String {
    let mut s = String::from("direction,level,ray,exponent,a,b,observed_order,x_max\n");
    for v in &rep.verdicts {
        for g in &v.growth {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                v.direction, v.level, g.ray, g.exponent, g.a, g.b, g.observed_order, g.x_max
            );
        }
    }
    s
}

fn all_inconclusive(rep: &SummabilityReport) -> bool {
    !rep.verdicts.is_empty() && rep.verdicts.iter().all(|v| v.verdict == Verdict::Inconclusive)
}

pub fn load(text: &str, flags: &Flags) -> Result<(ProblemFile, Resolved), CliError> {
    let pf = dsl::parse_problem(text)?;
    let resolved = dsl::resolve(&pf, flags.trunc)?;
    Ok((pf, resolved))
}

pub fn run(cmd: Command, text: &str, flags: &Flags) -> Result<Outcome, CliError> {
    let (pf, resolved) = load(text, flags)?;
    let ctx = Ctx {
        text,
        pf,
        resolved,
        flags,
    };
    let mut out = Outcome::default();
    match cmd {
        Command::Solve => {
            let sol = solve(&ctx.resolved)?;
            let body = sol.series.to_literal();
            ctx.write("solution.bis", &body, &mut out)?;
            let summary = serde_json::json!({
                "trunc_t": sol.series.trunc_t(),
                "trunc_z": sol.series.trunc_z(),
                "kappa_z": sol.series.kappa_z(),
                "consumed_z": sol.consumed_z,
                "file": "solution.bis",
            });
            ctx.record("solve", &summary, &mut out)?;
            out.stdout = if flags.json {
                serde_json::to_string_pretty(&summary)? + "\n"
            } else {
                format!(
                    "solved: N_t = {}, N_z = {} on the z^(1/{}) grid -> {}\n",
                    sol.series.trunc_t(),
                    sol.series.trunc_z(),
                    sol.series.kappa_z(),
                    flags.out.join("solution.bis").display()
                )
            };
        }
        Command::Gevrey => {
            let sol = solve(&ctx.resolved)?;
            let rows = gevrey_rows(&ctx, &sol)?;
            out.stdout = if flags.json {
                serde_json::to_string_pretty(&rows)? + "\n"
            } else {
                gevrey_table(&rows)
            };
        }
        Command::Singular => {
            let sol = solve(&ctx.resolved)?;
            let rep = singular_report(&ctx, &sol)?;
            let body = serde_json::to_string_pretty(&rep)? + "\n";
            ctx.write("singularities.json", &body, &mut out)?;
            ctx.record("singular", &rep, &mut out)?;
            out.stdout = if flags.json {
                body
            } else {
                let mut s = format!("t-Borel plane (K = {}):\n", rep.k);
                if rep.t_borel.points.is_empty() {
                    let _ = writeln!(s, "  no stable singularities (inconclusive)");
                }
                for p in &rep.t_borel.points {
                    let _ = writeln!(s, "  {}{:+}i  ± {:.2e}", p.re, p.im, p.confidence);
                }
                s
            };
        }
        Command::Verdict => {
            let rep = verdict_report(&ctx)?;
            let body = serde_json::to_string_pretty(&rep)? + "\n";
            ctx.write("report.json", &body, &mut out)?;
            if flags.csv {
                ctx.write("report.csv", &rep.to_csv(), &mut out)?;
            }
            ctx.record("verdict", &rep, &mut out)?;
            out.inconclusive_only = all_inconclusive(&rep);
            out.stdout = if flags.json {
                body
            } else if flags.csv {
                rep.to_csv()
            } else {
                verdict_table(&rep)
            };
        }
        Command::Resum => {
            let sol = solve(&ctx.resolved)?;
            let r = resum_result(&ctx, &sol)?;
            out.stdout = if flags.json {
                serde_json::to_string_pretty(&r)? + "\n"
            } else {
                format!(
                    "u({}, {}) ~ {} (direction {:.6}, quadrature error {:.2e})\n",
                    fmt_c(r.t),
                    fmt_c(flags.z),
                    fmt_c(r.value),
                    r.direction,
                    r.quadrature_error
                )
            };
        }
        Command::Report => {
            let sol = solve(&ctx.resolved)?;
            let gevrey = gevrey_rows(&ctx, &sol)?;
            let singularities = singular_report(&ctx, &sol)?;
            let summability = verdict_report(&ctx)?;
            let resummation = match flags.t {
                Some(_) => Some(resum_result(&ctx, &sol)?),
                None => None,
            };
            let k = top_level(&ctx.resolved)?;
            let u = t_series(&sol, flags.z)?;
            let bt = borel(&MomentFunction::gamma(k.recip()), &u)?;
            let bundle = Bundle {
                schema: BUNDLE_SCHEMA,
                input_hash: input_hash(text),
                tool_version: VERSION,
                seed: flags.seed,
                problem: ctx.pf.to_string(),
                gevrey,
                singularities,
                summability,
                resummation,
            };
            let body = serde_json::to_string_pretty(&bundle)? + "\n";
            ctx.write("bundle.json", &body, &mut out)?;
            ctx.write("coefficients.csv", &csv_coefficients(&u, &bt), &mut out)?;
            ctx.write("poles.csv", &csv_poles(&bundle.singularities), &mut out)?;
            ctx.write("growth.csv", &csv_growth(&bundle.summability), &mut out)?;
            ctx.write("verdicts.csv", &bundle.summability.to_csv(), &mut out)?;
            ctx.record("report", &bundle, &mut out)?;
            out.inconclusive_only = all_inconclusive(&bundle.summability);
            out.stdout = if flags.json { body } else { verdict_table(&bundle.summability) };
        }
    }
    Ok(out)
}

pub fn read_problem(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Internal(format!("cannot read {}: {e}", path.display())))
}
