//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 a `repro`
//! comparison against reference values failed.

mod config;
mod repro;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::domain::{boundary_ep_check, scan_domain, DomainError, ScanSpec};
use crate::eplocate::{
    ep2_one_param, ep4_asymptotic, ep4_even, ep5_odd, ep5_odd_by_a, ep_multi_newton, default_seeds,
    EPCandidate, EpError, Ep5Solution, SeedOutcome,
};
use crate::lattice::{HamiltonianSpec, LatticeError};
use crate::secular::{lemma_coeffs_even, lemma_coeffs_odd, secular_symbolic, SecularError};
use crate::spectra::{eigen_solve, EigenOptions, SpectraError};

pub use config::expand_config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
    Gnuplot,
}

#[derive(Debug, Parser)]
#[command(name = "epforge", version, about = "Exceptional points of PT-symmetric tridiagonal Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// key=value file with default arguments.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the exact secular polynomial det(E - H).
    Secular {
        #[arg(long)]
        n: usize,
        /// Number of parameters A, B, C, ...
        #[arg(long, default_value_t = 2)]
        p: usize,
    },
    /// Closed-form trailing coefficients and their check against the recurrence.
    Lemma {
        #[arg(long, conflicts_with = "odd")]
        even: bool,
        #[arg(long)]
        odd: bool,
        #[arg(long)]
        k: usize,
    },
    /// Eigenvalues at given parameters.
    Spectrum {
        #[arg(long)]
        n: usize,
        /// Comma-separated parameter values A,B,...
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
        /// Add the kinetic diagonal 2.
        #[arg(long)]
        kinetic_shift: bool,
        /// Real potential on the middle site (odd N).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        center: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Fourth-order EPs at even N = 2K.
    Ep4(KArgs),
    /// Fifth-order EPs at odd N = 2K + 1.
    Ep5 {
        #[command(flatten)]
        k: KArgs,
        /// Parameter to eliminate.
        #[arg(long, value_enum, default_value = "a")]
        eliminate: Which,
    },
    /// Second-order EPs of the one-parameter chain.
    Ep2 {
        #[arg(long)]
        n: usize,
    },
    /// Damped Newton search for maximal-order EPs with p parameters.
    EpNewton {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        /// Seeds per axis on [-2, 2].
        #[arg(long, default_value_t = 9)]
        grid: usize,
    },
    /// Large-K approximants of the most negative EP4 coordinate.
    Asymptote {
        #[arg(long)]
        k: usize,
        /// Number of correction terms (1..3); all when omitted.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Scan the (A, B) plane and classify physical points.
    Domain {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        /// Half-width of the square scan range.
        #[arg(long, default_value_t = 2.0)]
        range: f64,
        /// Also report distances of located EPs to the boundary, in cells.
        #[arg(long)]
        check_eps: bool,
        #[arg(long, default_value_t = 2.0)]
        radius_cells: f64,
    },
    /// Regenerate the data behind a reference table or figure.
    Repro {
        #[arg(value_enum)]
        preset: Preset,
        /// Grid resolution for fig-domains.
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        /// JSON file replacing the bundled reference values.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct KArgs {
    /// Half-dimension K.
    #[arg(long, required_unless_present = "n", conflicts_with = "n")]
    pub k: Option<usize>,
    /// Dimension N (converted to K).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Table1,
    Table2,
    Table3,
    Table4,
    FigDomains,
    FigZcurves,
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<SecularError> for CliError {
    fn from(e: SecularError) -> Self {
        match e {
            SecularError::DimensionRange(_)
            | SecularError::TooManyParams { .. }
            | SecularError::SmallK(_)
            | SecularError::UnsupportedAppendix { .. } => CliError::Invalid(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<EpError> for CliError {
    fn from(e: EpError) -> Self {
        match e {
            EpError::Secular(s) => s.into(),
            EpError::Lattice(l) => l.into(),
            EpError::Parity(_) | EpError::SmallK(_) | EpError::Order(_) | EpError::ParamCount(_) => {
                CliError::Invalid(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Lattice(l) => l.into(),
            SpectraError::TooLarge(_)
            | SpectraError::LevelCount { .. }
            | SpectraError::TooFewSizes
            | SpectraError::Direction { .. } => CliError::Invalid(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// Output of one command in every format it supports.
pub(crate) struct Rendered {
    pub text: String,
    pub json: Value,
    pub csv: Option<String>,
    pub gnuplot: Option<String>,
    /// A reference comparison failed.
    pub mismatch: bool,
}

impl Rendered {
    fn new(text: String, json: Value) -> Self {
        Rendered {
            text,
            json,
            csv: None,
            gnuplot: None,
            mismatch: false,
        }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn select(self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Text => Ok(self.text),
            Format::Json => Ok(serde_json::to_string_pretty(&self.json).expect("json") + "\n"),
            Format::Csv => self
                .csv
                .ok_or_else(|| CliError::Invalid("csv output not available for this command".into())),
            Format::Gnuplot => self
                .gnuplot
                .or(self.csv)
                .ok_or_else(|| CliError::Invalid("gnuplot output not available for this command".into())),
        }
    }
}

fn k_of(args: &KArgs, even: bool) -> Result<usize, CliError> {
    match (args.k, args.n) {
        (Some(k), _) => Ok(k),
        (None, Some(n)) => {
            if (n % 2 == 0) != even {
                let want = if even { "even" } else { "odd" };
                return Err(CliError::Invalid(format!("N = {n} must be {want}")));
            }
            Ok(n / 2)
        }
        (None, None) => Err(CliError::Invalid("either --k or --n is required".into())),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{:.12}", x)
}

fn candidate_json(c: &EPCandidate) -> Value {
    serde_json::to_value(c).expect("candidate serialises")
}

fn candidates_text(cands: &[EPCandidate]) -> String {
    let mut s = String::new();
    for c in cands {
        let params: Vec<String> = c.params.iter().map(|v| fmt_f(*v)).collect();
        s.push_str(&format!(
            "  ({})  order {}  verified {}  max residual {:.2e}\n",
            params.join(", "),
            c.order,
            c.verified,
            c.max_residual()
        ));
    }
    s
}

fn candidates_csv(cands: &[EPCandidate]) -> String {
    let width = cands.iter().map(|c| c.params.len()).max().unwrap_or(0);
    let mut s = String::from("n,order,verified,max_residual");
    for k in 0..width {
        s.push_str(&format!(",{}", crate::secular::param_name(k)));
    }
    s.push('\n');
    for c in cands {
        s.push_str(&c.csv_row());
        s.push('\n');
    }
    s
}

fn cmd_secular(n: usize, p: usize) -> Result<Rendered, CliError> {
    let form = secular_symbolic(n, p)?;
    let mut text = format!("P(E) = {}\n", form.to_text());
    for (j, c) in form.coeffs.iter().enumerate() {
        text.push_str(&format!("c{} = {}\n", j + 1, c));
    }
    let json = json!({
        "n": n,
        "p": p,
        "full": form.to_text(),
        "coefficients": form.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    let mut csv = String::from("j,coefficient\n");
    for (j, c) in form.coeffs.iter().enumerate() {
        csv.push_str(&format!("{},\"{}\"\n", j + 1, c));
    }
    Ok(Rendered::new(text, json).with_csv(csv))
}

fn cmd_lemma(even: bool, odd: bool, k: usize) -> Result<Rendered, CliError> {
    if even == odd {
        return Err(CliError::Invalid("pass exactly one of --even or --odd".into()));
    }
    let (n, (ck, ck1)) = if even {
        (2 * k, lemma_coeffs_even(k)?)
    } else {
        (2 * k + 1, lemma_coeffs_odd(k)?)
    };
    let form = secular_symbolic(n, 2)?;
    let pass = form.c(k) == ck && form.c(k - 1) == ck1;
    let verdict = if pass { "PASS" } else { "FAIL" };
    let text = format!(
        "N = {n}, K = {k}\nc{k} = {ck}\nc{} = {ck1}\nidentity check: {verdict}\n",
        k - 1
    );
    let json = json!({
        "n": n,
        "k": k,
        "c_k": ck.to_string(),
        "c_k_minus_1": ck1.to_string(),
        "identity_check": pass,
    });
    let mut r = Rendered::new(text, json);
    r.mismatch = !pass;
    Ok(r)
}

fn cmd_spectrum(n: usize, params: Vec<f64>, shift: bool, center: f64, tol: f64) -> Result<Rendered, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Invalid("--tol must be positive".into()));
    }
    let spec = HamiltonianSpec::new(n, params)?
        .with_kinetic_shift(shift)
        .with_center(center)?;
    let rep = eigen_solve(&spec, &EigenOptions::with_tol(tol))?;
    let mut text = String::new();
    for (z, real) in rep.eigenvalues.iter().zip(&rep.reality_flags) {
        text.push_str(&format!("{:>22} {:>22}  {}\n", fmt_f(z.re), fmt_f(z.im), if *real { "real" } else { "complex" }));
    }
    text.push_str(&format!(
        "physical: {}  min gap: {:.3e}  route discrepancy: {:.3e}\n",
        rep.is_physical, rep.min_gap, rep.cross_discrepancy
    ));
    let json = json!({
        "n": n,
        "params": spec.params,
        "eigenvalues": rep.eigenvalues.iter().map(|z: &Complex64| [z.re, z.im]).collect::<Vec<_>>(),
        "reality_flags": rep.reality_flags,
        "min_gap": if rep.min_gap.is_finite() { json!(rep.min_gap) } else { Value::Null },
        "is_physical": rep.is_physical,
        "cross_discrepancy": rep.cross_discrepancy,
    });
    Ok(Rendered::new(text, json).with_csv(rep.to_csv()))
}

fn cmd_ep4(k: usize) -> Result<Rendered, CliError> {
    let sol = ep4_even(k)?;
    let mut text = format!("N = {}, K = {k}\n", 2 * k);
    for b in &sol.branches {
        let roots: Vec<String> = b.roots.iter().map(|x| fmt_f(*x)).collect();
        text.push_str(&format!("Z({:+}) roots: {}\n", b.sign, roots.join(", ")));
    }
    text.push_str("candidates (A, B):\n");
    text.push_str(&candidates_text(&sol.candidates));
    let json = json!({
        "n": 2 * k,
        "k": k,
        "branches": sol.branches.iter().map(|b| json!({"sign": b.sign, "roots": b.roots})).collect::<Vec<_>>(),
        "candidates": sol.candidates.iter().map(candidate_json).collect::<Vec<_>>(),
    });
    Ok(Rendered::new(text, json).with_csv(candidates_csv(&sol.candidates)))
}

fn ep5_render(sol: &Ep5Solution) -> Rendered {
    let n = 2 * sol.k + 1;
    let var = match sol.eliminated {
        crate::eplocate::Eliminated::A => "B",
        crate::eplocate::Eliminated::B => "A",
    };
    let mut text = format!("N = {n}, K = {}\n", sol.k);
    let poly_var = if sol.squared { format!("{var}^2") } else { var.to_string() };
    text.push_str(&format!("elimination polynomial in y = {poly_var}: {}\n", sol.polynomial));
    let roots: Vec<String> = sol.positive_roots.iter().map(|x| fmt_f(*x)).collect();
    text.push_str(&format!("positive {var} roots: {}\n", roots.join(", ")));
    text.push_str("candidates (A, B):\n");
    text.push_str(&candidates_text(&sol.candidates));
    let json = json!({
        "n": n,
        "k": sol.k,
        "variable": var,
        "squared": sol.squared,
        "polynomial": sol.polynomial,
        "positive_roots": sol.positive_roots,
        "candidates": sol.candidates.iter().map(candidate_json).collect::<Vec<_>>(),
    });
    Rendered::new(text, json).with_csv(candidates_csv(&sol.candidates))
}

fn cmd_ep5(k: usize, which: Which) -> Result<Rendered, CliError> {
    let sol = match which {
        Which::A => ep5_odd(k)?,
        Which::B => ep5_odd_by_a(k)?,
    };
    Ok(ep5_render(&sol))
}

fn cmd_ep2(n: usize) -> Result<Rendered, CliError> {
    let c = ep2_one_param(n)?;
    let text = format!("N = {n}, B = 0\ncandidates (A):\n{}", candidates_text(&c));
    let json = json!({ "n": n, "candidates": c.iter().map(candidate_json).collect::<Vec<_>>() });
    Ok(Rendered::new(text, json).with_csv(candidates_csv(&c)))
}

fn cmd_ep_newton(n: usize, p: usize, grid: usize) -> Result<Rendered, CliError> {
    if !(2..=25).contains(&grid) {
        return Err(CliError::Invalid("--grid must be in 2..=25".into()));
    }
    let rep = ep_multi_newton(n, p, Some(default_seeds(p, grid)))?;
    let converged = rep
        .outcomes
        .iter()
        .filter(|o| matches!(o, SeedOutcome::Converged { .. }))
        .count();
    let mut text = format!(
        "N = {n}, p = {p}: {} seeds, {converged} converged, {} distinct candidates\n",
        rep.seeds.len(),
        rep.candidates.len()
    );
    text.push_str(&candidates_text(&rep.candidates));
    let json = json!({
        "n": n,
        "p": p,
        "seeds": rep.seeds.len(),
        "converged": converged,
        "candidates": rep.candidates.iter().map(candidate_json).collect::<Vec<_>>(),
    });
    Ok(Rendered::new(text, json).with_csv(candidates_csv(&rep.candidates)))
}

fn cmd_asymptote(k: usize, order: Option<usize>) -> Result<Rendered, CliError> {
    let orders: Vec<usize> = match order {
        Some(o) => vec![o],
        None => vec![1, 2, 3],
    };
    let vals = orders
        .iter()
        .map(|&o| ep4_asymptotic(k, o))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = format!("K = {k}, g = {}\n", fmt_f(vals[0].g));
    let mut csv = String::from("k,terms,value\n");
    for v in &vals {
        text.push_str(&format!("{} term(s): {}\n", v.order, fmt_f(v.value)));
        csv.push_str(&format!("{},{},{:.12}\n", k, v.order, v.value));
    }
    let json = json!({
        "k": k,
        "g": vals[0].g,
        "approximants": vals.iter().map(|v| json!({"terms": v.order, "value": v.value})).collect::<Vec<_>>(),
    });
    Ok(Rendered::new(text, json).with_csv(csv))
}

fn located_eps(n: usize) -> Result<Vec<EPCandidate>, CliError> {
    Ok(if n % 2 == 0 {
        ep4_even(n / 2)?.candidates
    } else {
        ep5_odd(n / 2)?.candidates
    })
}

fn cmd_domain(n: usize, resolution: usize, range: f64, check: bool, radius_cells: f64) -> Result<Rendered, CliError> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(CliError::Invalid("--range must be positive".into()));
    }
    let mut spec = ScanSpec::square(n, resolution);
    spec.a_range = (-range, range);
    spec.b_range = (-range, range);
    let grid = scan_domain(&spec)?;
    let (ha, hb) = grid.cell_size();
    let cell = ha.max(hb);
    let report = if check {
        Some(boundary_ep_check(&grid, &located_eps(n)?, radius_cells * cell))
    } else {
        None
    };
    let mut text = format!(
        "N = {n}, {resolution}x{resolution} on [-{range}, {range}]^2\nphysical area: {:.6}\nunknown cells: {}\nboundary polylines: {}\n",
        grid.physical_area(),
        grid.unknown_count,
        grid.boundary.len()
    );
    if let Some(r) = &report {
        for e in &r.entries {
            let d = e.distance.map(|d| format!("{:.2} cells", d / cell)).unwrap_or_else(|| "-".into());
            text.push_str(&format!("  EP ({}, {}): {d} {:?}\n", fmt_f(e.params[0]), fmt_f(e.params[1]), e.status));
        }
    }
    let json = json!({
        "n": n,
        "resolution": resolution,
        "range": [-range, range],
        "physical_area": grid.physical_area(),
        "unknown_cells": grid.unknown_count,
        "boundary": grid.boundary_json(),
        "ep_check": report.as_ref().map(|r| serde_json::to_value(r).expect("report")),
    });
    let mut r = Rendered::new(text, json).with_csv(grid.to_csv());
    r.gnuplot = Some(grid.to_gnuplot());
    Ok(r)
}

fn dispatch(cmd: Command) -> Result<Rendered, CliError> {
    match cmd {
        Command::Secular { n, p } => cmd_secular(n, p),
        Command::Lemma { even, odd, k } => cmd_lemma(even, odd, k),
        Command::Spectrum {
            n,
            params,
            kinetic_shift,
            center,
            tol,
        } => cmd_spectrum(n, params, kinetic_shift, center, tol),
        Command::Ep4(k) => cmd_ep4(k_of(&k, true)?),
        Command::Ep5 { k, eliminate } => cmd_ep5(k_of(&k, false)?, eliminate),
        Command::Ep2 { n } => cmd_ep2(n),
        Command::EpNewton { n, p, grid } => cmd_ep_newton(n, p, grid),
        Command::Asymptote { k, order } => cmd_asymptote(k, order),
        Command::Domain {
            n,
            resolution,
            range,
            check_eps,
            radius_cells,
        } => cmd_domain(n, resolution, range, check_eps, radius_cells),
        Command::Repro {
            preset,
            resolution,
            reference,
        } => repro::run(preset, resolution, reference.as_deref()),
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("EPFORGE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs the CLI on `args` (including the program name), writing results to
/// `out` unless `--output` is given and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_threads();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let format = cli.format;
    let result = dispatch(cli.command).and_then(|r| {
        let mismatch = r.mismatch;
        r.select(format).map(|s| (s, mismatch))
    });
    match result {
        Ok((body, mismatch)) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &body).map_err(|e| e.to_string()),
                None => out.write_all(body.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return EXIT_INVALID;
            }
            if mismatch {
                let _ = writeln!(err, "reference comparison failed");
                EXIT_MISMATCH
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

/// Runs the CLI with the process arguments and standard streams.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
