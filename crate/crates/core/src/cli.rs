//! Command-line frontend.
//!
//! Exit codes: 0 success, 1 verification failed, 2 malformed input,
//! 3 hypotheses unmet, 4 resource guard exceeded.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arc::{
    flat_cap_check, is_complete, maximality_status, profile, verify_arc, ArcError, ArcMultiset,
    ArcProfile, CapReport, MaximalityStatus,
};
use crate::code::{extend_code, to_code, CodeError};
use crate::constructions::search::{search_max_arc, SearchError, SearchMode, SearchOptions};
use crate::constructions::{
    conic, delete_points, denniston, random_arc, random_multiset, ConstructionError,
};
use crate::extension::{extend_both, extend_unique, extension_candidates, ExtensionError};
use crate::field::{ArithOp, FieldDescriptor, FieldError, FieldSpec};
use crate::geometry::{Geometry, GeometryError};
use crate::io::{
    read_arc, write_arc, CertificateFile, CodeReport, GeometryDescriptor, IoError, SearchReport,
};
use crate::table::{m_table, to_csv, TableError, TableOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_HYPOTHESES: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "pgarc",
    version,
    about = "Arcs in finite projective spaces and the codes they define"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct FieldArgs {
    /// Characteristic.
    #[arg(long)]
    p: u32,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    e: u32,
    /// Monic modulus coefficients, constant term first (e.g. 1,1,0,1).
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u32>>,
}

impl FieldArgs {
    fn build(&self) -> Result<Arc<FieldSpec>, CliError> {
        Ok(Arc::new(FieldSpec::new(
            self.p,
            self.e,
            self.modulus.as_deref(),
        )?))
    }

    fn geometry(&self, k: usize) -> Result<Arc<Geometry>, CliError> {
        Ok(Arc::new(Geometry::build(self.build()?, k)?))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpArg {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Scan,
    Constructive,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Describe a field, optionally evaluating one operation.
    Field {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, requires_all = ["a", "b"])]
        op: Option<OpArg>,
        #[arg(long)]
        a: Option<u32>,
        #[arg(long)]
        b: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Point and hyperplane counts of PG(k-1, q).
    Geometry {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that an arc file holds an (n, r)-arc.
    Verify {
        #[arg(long)]
        arc: PathBuf,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hyperplane census, maximality and completeness.
    Profile {
        #[arg(long)]
        arc: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the extension point of an arc.
    Extend {
        #[arg(long)]
        arc: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Denniston maximal arc in PG(2, 2^e).
    Denniston {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The conic y^2 = xz in PG(2, q).
    Conic {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove points, given by position in the arc file's point list.
    Delete {
        #[arg(long)]
        arc: PathBuf,
        #[arg(long = "position", required = true)]
        positions: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive search for large arcs.
    Search {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: u32,
        #[arg(long, conflicts_with = "target", required_unless_present = "target")]
        prove_max: bool,
        #[arg(long)]
        target: Option<usize>,
        /// 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        budget_secs: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameters of the code whose columns are the arc points.
    Code {
        #[arg(long)]
        arc: PathBuf,
        /// Append the extension point first.
        #[arg(long)]
        extend: bool,
        /// Where to write the extended arc.
        #[arg(long, requires = "extend")]
        arc_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of m^s(k, q) values and bounds.
    Table {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "3")]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long, default_value_t = 40)]
        max_search_points: usize,
        #[arg(long, default_value_t = 10.0)]
        budget_secs: f64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random greedy arc, or multi-arc with --repeat-bias.
    Random {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        repeat_bias: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl Display) -> Self {
        CliError {
            code,
            message: message.to_string(),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        let code = if matches!(e, FieldError::TooLarge { .. }) {
            EXIT_GUARD
        } else {
            EXIT_MALFORMED
        };
        CliError::new(code, e)
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        let code = match e {
            GeometryError::TooLarge { .. } | GeometryError::FlatTooLarge { .. } => EXIT_GUARD,
            _ => EXIT_MALFORMED,
        };
        CliError::new(code, e)
    }
}

impl From<ArcError> for CliError {
    fn from(e: ArcError) -> Self {
        match e {
            ArcError::Geometry(g) => g.into(),
            ArcError::DimensionTooSmall(_) => CliError::new(EXIT_HYPOTHESES, e),
            e => CliError::new(EXIT_MALFORMED, e),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Field(f) => f.into(),
            IoError::Geometry(g) => g.into(),
            IoError::Arc(a) => a.into(),
            e => CliError::new(EXIT_MALFORMED, e),
        }
    }
}

impl From<ExtensionError> for CliError {
    fn from(e: ExtensionError) -> Self {
        match e {
            ExtensionError::NotAnArc(_) | ExtensionError::HypothesisViolation { .. } => {
                CliError::new(EXIT_HYPOTHESES, e)
            }
            ExtensionError::Arc(a) => a.into(),
            ExtensionError::Geometry(g) => g.into(),
            e => CliError::new(EXIT_FAILED, e),
        }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::Arc(a) => a.into(),
            ConstructionError::VerificationFailed(_) => CliError::new(EXIT_FAILED, e),
            e => CliError::new(EXIT_MALFORMED, e),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::GuardExceeded { .. } => CliError::new(EXIT_GUARD, e),
            SearchError::Arc(a) => a.into(),
            e => CliError::new(EXIT_MALFORMED, e),
        }
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::Extension(x) => x.into(),
            CodeError::Arc(a) => a.into(),
            CodeError::RankDeficient { .. } => CliError::new(EXIT_HYPOTHESES, e),
            e => CliError::new(EXIT_FAILED, e),
        }
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        match e {
            TableError::TooManyCells { .. } => CliError::new(EXIT_GUARD, e),
            TableError::Inconsistent { .. } => CliError::new(EXIT_FAILED, e),
            TableError::Field(f) => f.into(),
            TableError::Geometry(g) => g.into(),
            TableError::Search(s) => s.into(),
            TableError::Construction(c) => c.into(),
            TableError::Arc(a) => a.into(),
            e => CliError::new(EXIT_MALFORMED, e),
        }
    }
}

fn load(path: &Path) -> Result<ArcMultiset, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::new(
            EXIT_MALFORMED,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    Ok(read_arc(&text)?)
}

fn save(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    if let Some(path) = path {
        fs::write(path, text).map_err(|e| {
            CliError::new(
                EXIT_MALFORMED,
                format!("cannot write {}: {e}", path.display()),
            )
        })?;
    }
    Ok(())
}

fn save_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    save(path, &text)
}

fn save_arc(path: Option<&Path>, arc: &ArcMultiset) -> Result<(), CliError> {
    save(path, &write_arc(arc))
}

#[derive(Serialize)]
struct FieldReport {
    #[serde(flatten)]
    field: FieldDescriptor,
    q: u32,
    generator: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<u32>,
}

#[derive(Serialize)]
struct GeometryReport {
    geometry: GeometryDescriptor,
    points: usize,
    hyperplanes: usize,
    points_per_hyperplane: usize,
    hyperplanes_per_point: usize,
}

#[derive(Serialize)]
struct ProfileReport<'a> {
    #[serde(flatten)]
    profile: &'a ArcProfile,
    bound: i64,
    maximality: MaximalityStatus,
    complete: bool,
    is_set: bool,
    flat_cap_clean: Option<bool>,
}

fn summary(arc: &ArcMultiset) -> String {
    let g = arc.geometry();
    format!("{} points in PG({}, {})", arc.n(), g.k() - 1, g.q())
}

fn execute(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Field {
            field,
            op,
            a,
            b,
            out,
        } => {
            let f = field.build()?;
            let result = match (op, a, b) {
                (Some(op), Some(a), Some(b)) => {
                    let op = match op {
                        OpArg::Add => ArithOp::Add,
                        OpArg::Sub => ArithOp::Sub,
                        OpArg::Mul => ArithOp::Mul,
                        OpArg::Div => ArithOp::Div,
                    };
                    let x = f.element(a)?.apply(op, f.element(b)?)?;
                    Some(x.code())
                }
                _ => None,
            };
            println!(
                "GF({}) modulus {:?} generator {}",
                f.q(),
                f.modulus(),
                f.generator()
            );
            if let Some(x) = result {
                println!("result {x}");
            }
            save_json(
                out.as_deref(),
                &FieldReport {
                    field: f.descriptor(),
                    q: f.q(),
                    generator: f.generator(),
                    result,
                },
            )?;
            Ok(EXIT_OK)
        }
        Command::Geometry { field, k, out } => {
            let g = field.geometry(k)?;
            let report = GeometryReport {
                geometry: GeometryDescriptor::new(&g),
                points: g.num_points(),
                hyperplanes: g.num_hyperplanes(),
                points_per_hyperplane: g.points_per_hyperplane(),
                hyperplanes_per_point: g.hyperplanes_through_point(0).len(),
            };
            println!(
                "PG({}, {}): {} points, {} hyperplanes, {} points per hyperplane",
                k - 1,
                g.q(),
                report.points,
                report.hyperplanes,
                report.points_per_hyperplane
            );
            save_json(out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }
        Command::Verify { arc, r, out } => {
            let arc = load(&arc)?;
            let diag = verify_arc(&arc, r)?;
            match &diag.violation {
                None => println!("valid ({}, {r})-arc", diag.n),
                Some(v) => println!("not an ({}, {r})-arc: {v:?}", diag.n),
            }
            save_json(out.as_deref(), &diag)?;
            Ok(if diag.pass { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Profile { arc, out } => {
            let arc = load(&arc)?;
            let prof = profile(&arc);
            let flat_cap_clean = match flat_cap_check(&arc)? {
                CapReport::NotApplicable { .. } => None,
                report => Some(report.is_clean()),
            };
            let report = ProfileReport {
                profile: &prof,
                bound: prof.bound(),
                maximality: maximality_status(&prof),
                complete: is_complete(&arc),
                is_set: arc.is_set(),
                flat_cap_clean,
            };
            println!(
                "{}, r = {}, s = {}, histogram {:?}, {:?}, complete: {}",
                summary(&arc),
                prof.r,
                prof.s,
                prof.histogram,
                report.maximality,
                report.complete
            );
            save_json(out.as_deref(), &report)?;
            if flat_cap_clean == Some(false) {
                return Err(CliError::new(
                    EXIT_FAILED,
                    "a (k-3)-flat holds more than k-2 points of a long arc",
                ));
            }
            Ok(EXIT_OK)
        }
        Command::Extend { arc, method, out } => {
            let arc = load(&arc)?;
            let g = arc.geometry().clone();
            let cert = match method {
                MethodArg::Scan => extension_candidates(&arc)?,
                MethodArg::Constructive => extend_unique(&arc)?,
                MethodArg::Both => extend_both(&arc)?,
            };
            let file = CertificateFile::new(&g, &cert);
            println!(
                "{} candidate(s): {:?}",
                file.candidates.len(),
                file.candidates
            );
            for c in &cert.checks {
                println!("  [{}] {}", if c.pass { "ok" } else { "FAIL" }, c.name);
            }
            save_json(out.as_deref(), &file)?;
            Ok(if cert.all_checks_pass() {
                EXIT_OK
            } else {
                EXIT_FAILED
            })
        }
        Command::Denniston { field, degree, out } => {
            let arc = denniston(&field.geometry(3)?, degree)?;
            println!("Denniston arc of degree {degree}: {}", summary(&arc));
            save_arc(out.as_deref(), &arc)?;
            Ok(EXIT_OK)
        }
        Command::Conic { field, out } => {
            let arc = conic(&field.geometry(3)?)?;
            println!("conic: {}", summary(&arc));
            save_arc(out.as_deref(), &arc)?;
            Ok(EXIT_OK)
        }
        Command::Delete {
            arc,
            positions,
            out,
        } => {
            let arc = load(&arc)?;
            let support = arc.support();
            let mut indices = Vec::with_capacity(positions.len());
            for pos in positions {
                let p = *support.get(pos).ok_or_else(|| {
                    CliError::new(
                        EXIT_MALFORMED,
                        format!(
                            "position {pos} out of range (arc lists {} points)",
                            support.len()
                        ),
                    )
                })?;
                indices.push(p);
            }
            let smaller = delete_points(&arc, &indices)?;
            println!("{}", summary(&smaller));
            save_arc(out.as_deref(), &smaller)?;
            Ok(EXIT_OK)
        }
        Command::Search {
            field,
            k,
            r,
            prove_max,
            target,
            workers,
            budget_secs,
            out,
        } => {
            let g = field.geometry(k)?;
            let mode = match (prove_max, target) {
                (true, _) => SearchMode::ProveMax,
                (false, Some(target)) => SearchMode::Find { target },
                (false, None) => {
                    return Err(CliError::new(
                        EXIT_MALFORMED,
                        "give --prove-max or --target",
                    ))
                }
            };
            let budget = budget_secs
                .map(|s| {
                    Duration::try_from_secs_f64(s).map_err(|e| {
                        CliError::new(EXIT_MALFORMED, format!("bad --budget-secs: {e}"))
                    })
                })
                .transpose()?;
            let opts = SearchOptions {
                workers,
                budget,
                ..Default::default()
            };
            let res = search_max_arc(&g, r, mode, &opts)?;
            let report = SearchReport::new(&g, &res);
            println!(
                "best_n = {}, proved_max = {}, found = {}, nodes = {}, {:.3}s{}",
                res.best_n,
                res.proved_max,
                res.found,
                res.nodes_explored,
                res.wall_time.as_secs_f64(),
                if res.budget_exhausted {
                    " (budget exhausted)"
                } else {
                    ""
                }
            );
            save_json(out.as_deref(), &report)?;
            if res.witness_check.as_ref().is_some_and(|d| !d.pass) {
                return Err(CliError::new(
                    EXIT_FAILED,
                    "search witness failed verification",
                ));
            }
            Ok(match mode {
                SearchMode::ProveMax if res.proved_max => EXIT_OK,
                SearchMode::Find { .. } if res.found => EXIT_OK,
                _ if res.budget_exhausted => EXIT_GUARD,
                _ => EXIT_FAILED,
            })
        }
        Command::Code {
            arc,
            extend,
            arc_out,
            out,
        } => {
            let arc = load(&arc)?;
            let view = if extend {
                let (extended, view) = extend_code(&arc)?;
                save_arc(arc_out.as_deref(), &extended)?;
                view
            } else {
                to_code(&arc)?
            };
            let report = CodeReport::from(&view);
            println!(
                "[{}, {}, {}]_{} d_dual = {:?}, defect = {}, projective = {}, length-maximal = {}",
                view.n,
                view.k,
                view.d,
                view.q,
                view.d_dual,
                view.defect,
                view.flags.projective,
                view.flags.length_maximal
            );
            save_json(out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }
        Command::Table {
            q,
            s,
            k,
            format,
            max_search_points,
            budget_secs,
            workers,
            out,
        } => {
            let budget = Duration::try_from_secs_f64(budget_secs)
                .map_err(|e| CliError::new(EXIT_MALFORMED, format!("bad --budget-secs: {e}")))?;
            let opts = TableOptions {
                max_search_points,
                budget_per_cell: Some(budget),
                workers,
            };
            let cells = m_table(&q, &s, &k, &opts)?;
            for c in &cells {
                let shown = c
                    .value
                    .map_or_else(|| format!("<= {}", c.upper), |v| v.to_string());
                println!(
                    "q={} s={} k={}: {shown} ({:?})",
                    c.q, c.s, c.k, c.provenance
                );
            }
            match format {
                FormatArg::Json => save_json(out.as_deref(), &cells)?,
                FormatArg::Csv => save(out.as_deref(), &to_csv(&cells))?,
            }
            Ok(EXIT_OK)
        }
        Command::Random {
            field,
            k,
            r,
            n,
            seed,
            repeat_bias,
            out,
        } => {
            let g = field.geometry(k)?;
            let arc = match repeat_bias {
                Some(b) if (0.0..=1.0).contains(&b) => random_multiset(&g, r, n, seed, b)?,
                Some(b) => {
                    return Err(CliError::new(
                        EXIT_MALFORMED,
                        format!("--repeat-bias {b} is not in [0, 1]"),
                    ))
                }
                None => random_arc(&g, r, n, seed)?,
            };
            let prof = profile(&arc);
            println!("{}, max hyperplane count {}", summary(&arc), prof.r);
            save_arc(out.as_deref(), &arc)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
