//! Command-line front end: file loading, pipelines, and reports.
//!
//! One command per process. Every command loads a connection file, runs one
//! library pipeline, and prints a [`Report`] — human-readable by default,
//! machine-readable with `--json`. Exit codes: 0 success, 1 usage or parse
//! failure, 2 precondition violation, 3 a falsifier fired (a nonlinear
//! specialization witness or a commutation failure, which valid inputs must
//! never produce).

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::algebra::ratfun::RatFun;
use crate::algebra::scalar::Scalar;
use crate::connection::ElementaryModel;
use crate::dilatation::{as_spectrum, LinearForm};
use crate::error::{Error, Result};
use crate::lattices::{check_stability, malgrange_lattice, TauSection};
use crate::linear::extract_restriction;
use crate::props::{check_property_l, check_property_p, synthesize_ha};
use crate::report::Report;
use crate::schema::ConnectionFile;
use crate::vfiltration::{gr_psi, restriction_complex, OneVarModule};

/// Environment override for the series truncation order.
pub const TRUNCATION_ENV: &str = "ASD_TRUNCATION";

#[derive(Parser)]
#[command(
    name = "asd",
    version,
    about = "Exact specialization of meromorphic connections along a coordinate hyperplane"
)]
struct Cli {
    /// Print the machine-readable report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generic slope of the connection along the divisor.
    Katz { file: PathBuf },
    /// Specialize over divisor points at scaling exponent a.
    Specialize {
        /// Scaling exponent; must be at least the generic slope.
        #[arg(long)]
        a: u32,
        /// Transverse coordinates as name=value pairs, e.g. "x1=1,x2=-2/3".
        #[arg(long)]
        point: Option<String>,
        /// Series truncation order (default: adaptive per coefficient).
        #[arg(long)]
        truncation: Option<i64>,
        file: PathBuf,
    },
    /// Growth verdicts for the synthesized moving-lattice presentation.
    #[command(name = "check-l")]
    CheckL {
        /// Scaling exponent (default: the generic slope, at least 1).
        #[arg(long)]
        a: Option<i64>,
        /// Expansion order override for the degree windows.
        #[arg(long)]
        order: Option<i64>,
        file: PathBuf,
    },
    /// Nearby-cycle pieces of the induced one-variable modules.
    Psi { file: PathBuf },
    /// Malgrange lattice and its stability certificate.
    Lattice {
        /// Lower endpoint of the residue strip (default 0).
        #[arg(long = "tau-strip")]
        tau_strip: Option<String>,
        file: PathBuf,
    },
    /// Specialize, restrict to the fibre, and decompose into linear forms.
    Decompose {
        /// Scaling exponent (default: the generic slope, at least 1).
        #[arg(long)]
        a: Option<i64>,
        file: PathBuf,
    },
    /// Validate and run every connection file in a directory.
    Corpus {
        dir: PathBuf,
        /// Worker threads for independent files.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(report) => {
            if cli.json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.render_text());
            }
            0
        }
        Err(e) => {
            eprintln!("asd: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command) -> Result<Report> {
    match command {
        Command::Katz { file } => {
            let parsed = ConnectionFile::from_path(file)?;
            Ok(with_file(cmd_katz(&parsed)?, file))
        }
        Command::Specialize { a, point, truncation, file } => {
            let parsed = ConnectionFile::from_path(file)?;
            let truncation = match truncation {
                Some(t) => Some(*t),
                None => truncation_from_env()?,
            };
            Ok(with_file(
                cmd_specialize(&parsed, *a, point.as_deref(), truncation)?,
                file,
            ))
        }
        Command::CheckL { a, order, file } => {
            let parsed = ConnectionFile::from_path(file)?;
            Ok(with_file(cmd_check_l(&parsed, *a, *order)?, file))
        }
        Command::Psi { file } => {
            let parsed = ConnectionFile::from_path(file)?;
            Ok(with_file(cmd_psi(&parsed)?, file))
        }
        Command::Lattice { tau_strip, file } => {
            let parsed = ConnectionFile::from_path(file)?;
            Ok(with_file(cmd_lattice(&parsed, tau_strip.as_deref())?, file))
        }
        Command::Decompose { a, file } => {
            let parsed = ConnectionFile::from_path(file)?;
            Ok(with_file(cmd_decompose(&parsed, *a)?, file))
        }
        Command::Corpus { dir, jobs } => cmd_corpus(dir, *jobs),
    }
}

fn with_file(mut report: Report, path: &Path) -> Report {
    report.inputs.insert(
        "file".to_string(),
        serde_json::Value::String(path.display().to_string()),
    );
    report
}

fn truncation_from_env() -> Result<Option<i64>> {
    match std::env::var(TRUNCATION_ENV) {
        Ok(raw) => raw.trim().parse::<i64>().map(Some).map_err(|_| {
            Error::parse(format!("{TRUNCATION_ENV} must be an integer, found {raw:?}"))
        }),
        Err(_) => Ok(None),
    }
}

/// Parses "x1=1,x3=-2/3" into transverse coordinates in declaration order;
/// every non-divisor variable must be bound exactly once.
fn parse_point(spec: &str, vars: &[String]) -> Result<Vec<Scalar>> {
    let transverse = &vars[..vars.len() - 1];
    let mut bound: BTreeMap<String, Scalar> = BTreeMap::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(format!("point binding {part:?} is not name=value")))?;
        let name = name.trim().to_string();
        if !transverse.contains(&name) {
            return Err(Error::parse(format!(
                "point binds {name:?}, which is not a transverse variable"
            )));
        }
        if bound.insert(name.clone(), value.trim().parse()?).is_some() {
            return Err(Error::parse(format!("point binds {name:?} twice")));
        }
    }
    transverse
        .iter()
        .map(|v| {
            bound
                .remove(v)
                .ok_or_else(|| Error::parse(format!("point does not bind {v:?}")))
        })
        .collect()
}

fn point_label(vars: &[String], point: &[Scalar]) -> String {
    if point.is_empty() {
        return "origin".to_string();
    }
    vars.iter()
        .zip(point)
        .map(|(v, c)| format!("{v}={c}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn forms_line(forms: &[LinearForm]) -> String {
    if forms.is_empty() {
        return "(empty)".to_string();
    }
    forms
        .iter()
        .map(|f| {
            if f.multiplicity == 1 {
                format!("{f}")
            } else {
                format!("{f} [x{}]", f.multiplicity)
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Generic slope along the divisor, computed by pole order on elementary
/// models and through a cyclic vector and its Newton polygon on matrix
/// connections.
pub fn cmd_katz(file: &ConnectionFile) -> Result<Report> {
    let (rank, kind, method) = if file.is_elementary() {
        (file.elementary()?.katz_generic_rank(), "elementary", "pole order")
    } else {
        (
            file.matrix()?.katz_generic_rank()?,
            "matrix",
            "cyclic vector and Newton polygon",
        )
    };
    Ok(Report::new("katz")
        .with_input("kind", kind)
        .with_result("rho", rank.rho.to_string())
        .with_result("integral", rank.integral)
        .with_result("method", method))
}

/// Specialize the model at scaling exponent `a` over one or more divisor
/// points: `--point` overrides the points declared in the file.
pub fn cmd_specialize(
    file: &ConnectionFile,
    a: u32,
    point_spec: Option<&str>,
    truncation: Option<i64>,
) -> Result<Report> {
    let model = if file.is_elementary() {
        file.elementary()?
    } else {
        file.matrix()?.to_elementary_rank_one()?
    };
    let points: Vec<Vec<Scalar>> = match point_spec {
        Some(spec) => vec![parse_point(spec, model.vars())?],
        None => {
            let declared = file.point_values()?;
            if declared.is_empty() {
                return Err(Error::bad_parameters(
                    "no divisor point: pass --point or declare points in the file",
                ));
            }
            declared
        }
    };
    let mut spectra = Vec::with_capacity(points.len());
    let mut lines = Vec::with_capacity(points.len());
    for point in &points {
        let spectrum = as_spectrum(&model, a, point, truncation)?;
        lines.push(format!(
            "[{}] {}",
            point_label(&model.vars()[..model.dimension() - 1], point),
            forms_line(&spectrum.surviving)
        ));
        spectra.push(spectrum);
    }
    Ok(Report::new("specialize")
        .with_input("a", a)
        .with_result("forms", lines)
        .with_result("spectra", &spectra)
        .with_note(
            "truncation",
            match truncation {
                Some(t) => format!("order {t}"),
                None => "adaptive per coefficient".to_string(),
            },
        ))
}

/// Growth verdicts for the presentation synthesized at exponent `a`
/// (default: the generic slope, at least 1).
pub fn cmd_check_l(
    file: &ConnectionFile,
    a: Option<i64>,
    order: Option<i64>,
) -> Result<Report> {
    let model = file.elementary()?;
    let rho = model.katz_generic_rank().as_integer()?;
    let a = a.unwrap_or(rho.max(1));
    let presentation = synthesize_ha(&model, a, 0, None)?;
    let l = check_property_l(&presentation, order)?;
    let p = check_property_p(&presentation);
    let mut report = Report::new("check-l")
        .with_input("a", a)
        .with_input("rho", rho)
        .with_result("l_holds", l.holds)
        .with_result("p_holds", p.holds)
        .with_note("window", format!("degree {}", l.window));
    if let Some(w) = &l.witness {
        report = report.with_result("l_witness", w.describe());
    }
    if let Some((i, q, u)) = p.witness {
        report = report.with_result("p_witness", format!("coefficient ({i},{q},{u})"));
    }
    Ok(report)
}

/// The one-variable module induced on the divisor slice through a point:
/// one leaf per diagonal residue entry of each summand, exponential when
/// the twist stays polar at the point.
fn one_var_slice(
    model: &ElementaryModel,
    point: &[Scalar],
) -> Result<OneVarModule> {
    let n = model.dimension();
    let bindings: BTreeMap<String, Scalar> = model.vars()[..n - 1]
        .iter()
        .cloned()
        .zip(point.iter().cloned())
        .collect();
    let mut leaves = Vec::new();
    for (k, s) in model.summands().iter().enumerate() {
        let res = s.reg.residue();
        for i in 0..res.rows() {
            for j in 0..res.rows() {
                if i != j && !res.get(i, j).is_zero() {
                    return Err(Error::unsupported(format!(
                        "summand {k}: nearby cycles need a diagonal residue"
                    )));
                }
            }
        }
        let mut polar: Vec<(u32, RatFun)> = Vec::new();
        for (ord, coeff) in model.polar_part(&s.phi)? {
            if ord < 1 {
                continue;
            }
            let value = coeff.eval(&bindings)?;
            if !value.is_zero() {
                polar.push((ord as u32, RatFun::from_scalar(value)));
            }
        }
        for d in 0..res.rows() {
            let alpha = res.get(d, d).clone();
            leaves.push(if polar.is_empty() {
                OneVarModule::Monomial { alpha, localized: false }
            } else {
                OneVarModule::exponential(polar.clone(), alpha)?
            });
        }
    }
    Ok(if leaves.len() == 1 {
        leaves.pop().expect("nonempty")
    } else {
        OneVarModule::DirectSum(leaves)
    })
}

/// Nearby-cycle pieces of the induced one-variable module at the first
/// declared point (origin if the file declares none).
pub fn cmd_psi(file: &ConnectionFile) -> Result<Report> {
    let model = file.elementary()?;
    let n = model.dimension();
    let declared = file.point_values()?;
    let point = declared
        .first()
        .cloned()
        .unwrap_or_else(|| vec![Scalar::zero(); n - 1]);
    let module = one_var_slice(&model, &point)?;
    let pieces = gr_psi(&module)?;
    let complex = restriction_complex(&module)?;
    let psi: Vec<serde_json::Value> = pieces
        .iter()
        .map(|p| {
            serde_json::json!({
                "index": p.a.to_string(),
                "dim": p.basis.len(),
            })
        })
        .collect();
    let empty = pieces.iter().all(|p| p.basis.is_empty());
    Ok(Report::new("psi")
        .with_input("point", point_label(&model.vars()[..n - 1], &point))
        .with_result("psi", psi)
        .with_result("psi_empty", empty)
        .with_result("h0_dim", complex.h0_dim)
        .with_result("h_minus1_dim", complex.hminus1_dim)
        .with_note("indices", "half-open window [-1, 0)"))
}

/// Malgrange lattice of the model for the given strip, with its stability
/// certificate at the generic slope.
pub fn cmd_lattice(file: &ConnectionFile, tau_strip: Option<&str>) -> Result<Report> {
    let model = file.elementary()?;
    let offset = match tau_strip {
        Some(raw) => raw.trim().parse()?,
        None => Scalar::zero(),
    };
    let tau = TauSection::new(offset);
    let lattice = malgrange_lattice(&model, &tau, 1)?;
    let rho = model.katz_generic_rank().as_integer()?;
    let stability = check_stability(&lattice, rho)?;
    Ok(Report::new("lattice")
        .with_input("tau_strip", tau.offset().to_string())
        .with_result("basis", lattice.basis_labels())
        .with_result("exponents", lattice.exponents())
        .with_result(
            "eigenvalues",
            lattice
                .eigenvalues()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
        )
        .with_result("stable_weight", stability.weight)
        .with_result("dgen_twist", stability.dgen_twist)
        .with_result("receipts", &stability.receipts))
}

/// Specialize at exponent `a`, restrict to the divisor fibre, and decompose
/// the commuting constant system into linear forms.
pub fn cmd_decompose(file: &ConnectionFile, a: Option<i64>) -> Result<Report> {
    let model = file.elementary()?;
    let rho = model.katz_generic_rank().as_integer()?;
    let a = a.unwrap_or(rho.max(1));
    if a < rho {
        return Err(Error::RankTooSmall { a, rho: rho.to_string() });
    }
    let presentation = synthesize_ha(&model, a, 0, None)?;
    let extraction = extract_restriction(&presentation)?;
    let forms: Vec<String> = extraction
        .module
        .forms()
        .iter()
        .map(|f| {
            if f.multiplicity == 1 {
                format!("{f}")
            } else {
                format!("{f} [x{}]", f.multiplicity)
            }
        })
        .collect();
    Ok(Report::new("decompose")
        .with_input("a", a)
        .with_input("rho", rho)
        .with_result("kept", extraction.kept.clone())
        .with_result("forms", forms)
        .with_result("module", &extraction.module)
        .with_note("fibre", "coefficients evaluated at t = 0"))
}

/// One corpus entry: slope, points specialized, distinct surviving forms,
/// and the growth verdict of the synthesized presentation.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusRow {
    pub file: String,
    pub kind: String,
    pub rho: String,
    pub points: usize,
    pub forms: Vec<String>,
    pub l_holds: bool,
}

fn corpus_row(path: &Path) -> Result<CorpusRow> {
    let file = ConnectionFile::from_path(path)?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    if !file.is_elementary() {
        let rank = file.matrix()?.katz_generic_rank()?;
        return Ok(CorpusRow {
            file: name,
            kind: "matrix".to_string(),
            rho: rank.rho.to_string(),
            points: 0,
            forms: Vec::new(),
            l_holds: true,
        });
    }
    let model = file.elementary()?;
    let rank = model.katz_generic_rank();
    let rho = rank.as_integer()?;
    let n = model.dimension();
    let mut forms = BTreeSet::new();
    let mut points = 0usize;
    if rho >= 1 {
        let declared = file.point_values()?;
        let declared = if declared.is_empty() {
            vec![vec![Scalar::zero(); n - 1]]
        } else {
            declared
        };
        for point in &declared {
            let spectrum = as_spectrum(&model, rho as u32, point, None)?;
            points += 1;
            for f in &spectrum.surviving {
                forms.insert(f.to_string());
            }
        }
    }
    let presentation = synthesize_ha(&model, rho.max(1), 0, None)?;
    let l = check_property_l(&presentation, None)?;
    Ok(CorpusRow {
        file: name,
        kind: "elementary".to_string(),
        rho: rank.rho.to_string(),
        points,
        forms: forms.into_iter().collect(),
        l_holds: l.holds,
    })
}

/// Keeps falsifier errors intact (their exit code is the result); everything
/// else gains the file name as context.
fn contextualize(path: &Path, e: Error) -> Error {
    if e.exit_code() == 3 {
        return e;
    }
    Error::unsupported(format!("{}: {e}", path.display()))
}

fn corpus_rows(paths: &[PathBuf], jobs: usize) -> Result<Vec<CorpusRow>> {
    if jobs <= 1 || paths.len() <= 1 {
        return paths
            .iter()
            .map(|p| corpus_row(p).map_err(|e| contextualize(p, e)))
            .collect();
    }
    let slots: Mutex<Vec<Option<Result<CorpusRow>>>> =
        Mutex::new((0..paths.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(paths.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= paths.len() {
                    break;
                }
                let row = corpus_row(&paths[i]).map_err(|e| contextualize(&paths[i], e));
                slots.lock().expect("corpus worker panicked")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("corpus worker panicked")
        .into_iter()
        .map(|slot| slot.expect("every index visited"))
        .collect()
}

/// Runs every `.json` connection file under a directory in name order;
/// failures abort with the file named, falsifiers keep their exit code.
pub fn cmd_corpus(dir: &Path, jobs: usize) -> Result<Report> {
    if jobs == 0 {
        return Err(Error::bad_parameters("--jobs must be at least 1"));
    }
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        detail: format!("{}: {e}", dir.display()),
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::bad_parameters(format!(
            "no .json connection files under {}",
            dir.display()
        )));
    }
    let rows = corpus_rows(&paths, jobs)?;
    let points: usize = rows.iter().map(|r| r.points).sum();
    let all_l = rows.iter().all(|r| r.l_holds);
    Ok(Report::new("corpus")
        .with_input("dir", dir.display().to_string())
        .with_input("jobs", jobs as u64)
        .with_result("files", rows.len())
        .with_result("points_checked", points)
        .with_result("l_holds_everywhere", all_l)
        .with_result("rows", &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elementary_src(phi: &str, residue: &str, points: &str) -> String {
        format!(
            r#"{{
                "schema": "asd-connection/1",
                "variables": ["x1", "x2"],
                "divisor": "x2",
                "model": {{
                    "kind": "elementary",
                    "summands": [{{"phi": "{phi}", "residue": {residue}}}]
                }}{points}
            }}"#
        )
    }

    fn exp_file(phi: &str) -> ConnectionFile {
        ConnectionFile::parse(&elementary_src(phi, r#"[["0"]]"#, "")).unwrap()
    }

    #[test]
    fn katz_reports_pole_order_for_elementary_models() {
        let report = cmd_katz(&exp_file("1/x2")).unwrap();
        assert_eq!(report.results["rho"], "1");
        assert_eq!(report.results["method"], "pole order");
    }

    #[test]
    fn katz_handles_rank_one_matrix_connections() {
        let src = r#"{
            "schema": "asd-connection/1",
            "variables": ["x1", "x2"],
            "divisor": "x2",
            "model": {
                "kind": "matrix",
                "matrices": [[["1/x2^2"]], [["-2*x1/x2^3"]]]
            }
        }"#;
        let file = ConnectionFile::parse(src).unwrap();
        let report = cmd_katz(&file).unwrap();
        assert_eq!(report.results["rho"], "2");
        assert_eq!(report.results["method"], "cyclic vector and Newton polygon");
    }

    #[test]
    fn specialize_produces_the_oracle_form() {
        let file = ConnectionFile::parse(&elementary_src(
            "x1/x2^2",
            r#"[["0"]]"#,
            r#", "points": [["1"]]"#,
        ))
        .unwrap();
        let report = cmd_specialize(&file, 2, None, None).unwrap();
        let forms = report.results["forms"].as_array().unwrap();
        assert_eq!(forms.len(), 1);
        assert_eq!(forms[0], "[x1=1] y1 - 2*y2");
    }

    #[test]
    fn specialize_above_the_slope_collapses_to_zero() {
        let file = ConnectionFile::parse(&elementary_src(
            "x1/x2^2",
            r#"[["0"]]"#,
            r#", "points": [["1"]]"#,
        ))
        .unwrap();
        let report = cmd_specialize(&file, 3, None, None).unwrap();
        let forms = report.results["forms"].as_array().unwrap();
        assert_eq!(forms[0], "[x1=1] 0");
    }

    #[test]
    fn specialize_below_the_slope_is_a_precondition_error() {
        let file = ConnectionFile::parse(&elementary_src(
            "x1/x2^2",
            r#"[["0"]]"#,
            r#", "points": [["1"]]"#,
        ))
        .unwrap();
        let err = cmd_specialize(&file, 1, None, None).unwrap_err();
        assert!(matches!(err, Error::RankTooSmall { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn specialize_point_flag_overrides_file_points() {
        let file = ConnectionFile::parse(&elementary_src(
            "x1/x2^2",
            r#"[["0"]]"#,
            r#", "points": [["1"]]"#,
        ))
        .unwrap();
        let report = cmd_specialize(&file, 2, Some("x1=3"), None).unwrap();
        let forms = report.results["forms"].as_array().unwrap();
        assert_eq!(forms.len(), 1);
        assert_eq!(forms[0], "[x1=3] y1 - 6*y2");
    }

    #[test]
    fn specialize_without_any_point_is_rejected() {
        let file = exp_file("x1/x2^2");
        assert!(cmd_specialize(&file, 2, None, None).is_err());
    }

    #[test]
    fn point_parser_requires_every_transverse_variable() {
        let vars: Vec<String> = vec!["x1".into(), "x2".into(), "x3".into()];
        let point = parse_point("x2=-1/2, x1=4", &vars).unwrap();
        assert_eq!(point, vec!["4".parse().unwrap(), "-1/2".parse().unwrap()]);
        assert!(parse_point("x1=4", &vars).is_err());
        assert!(parse_point("x1=4,x3=0,x2=0", &vars).is_err());
        assert!(parse_point("x1=4,x1=5,x2=0", &vars).is_err());
    }

    #[test]
    fn check_l_holds_on_a_synthesized_presentation() {
        let report = cmd_check_l(&exp_file("1/x2"), None, None).unwrap();
        assert_eq!(report.results["l_holds"], true);
        assert_eq!(report.results["p_holds"], true);
        assert_eq!(report.inputs["a"], 1);
        assert!(report.notes["window"].starts_with("degree"));
    }

    #[test]
    fn check_l_reports_the_below_slope_witness() {
        let report = cmd_check_l(&exp_file("1/x2^2"), Some(1), None).unwrap();
        assert_eq!(report.results["l_holds"], false);
        let witness = report.results["l_witness"].as_str().unwrap();
        assert!(witness.contains("coefficient (1,0,0)"));
    }

    #[test]
    fn psi_is_empty_for_a_polar_exponential() {
        let src = r#"{
            "schema": "asd-connection/1",
            "variables": ["t"],
            "divisor": "t",
            "model": {
                "kind": "elementary",
                "summands": [{"phi": "1/t", "residue": [["0"]]}]
            }
        }"#;
        let file = ConnectionFile::parse(src).unwrap();
        let report = cmd_psi(&file).unwrap();
        assert_eq!(report.results["psi_empty"], true);
        assert_eq!(report.results["h0_dim"], 0);
        assert_eq!(report.results["h_minus1_dim"], 0);
    }

    #[test]
    fn psi_sees_the_monodromy_of_a_regular_summand() {
        let file = ConnectionFile::parse(&elementary_src("0", r#"[["-1/2"]]"#, "")).unwrap();
        let report = cmd_psi(&file).unwrap();
        assert_eq!(report.results["psi_empty"], false);
        let pieces = report.results["psi"].as_array().unwrap();
        let total: u64 = pieces
            .iter()
            .map(|p| p["dim"].as_u64().unwrap())
            .sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn lattice_reports_shift_and_certificate() {
        let file =
            ConnectionFile::parse(&elementary_src("1/x2", r#"[["5/2"]]"#, "")).unwrap();
        let report = cmd_lattice(&file, None).unwrap();
        assert_eq!(report.results["exponents"], serde_json::json!([-2]));
        assert_eq!(report.results["eigenvalues"], serde_json::json!(["1/2"]));
        assert_eq!(report.results["stable_weight"], 1);
        assert!(!report.results["receipts"].as_array().unwrap().is_empty());
    }

    #[test]
    fn decompose_splits_a_two_summand_model() {
        let src = r#"{
            "schema": "asd-connection/1",
            "variables": ["x1", "x2"],
            "divisor": "x2",
            "model": {
                "kind": "elementary",
                "summands": [
                    {"phi": "1/x2", "residue": [["0"]]},
                    {"phi": "2/x2", "residue": [["0"]]}
                ]
            }
        }"#;
        let file = ConnectionFile::parse(src).unwrap();
        let report = cmd_decompose(&file, None).unwrap();
        let forms = report.results["forms"].as_array().unwrap();
        assert_eq!(forms.len(), 2);
    }

    #[test]
    fn corpus_runs_a_directory_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("a.json"),
            elementary_src("1/x2", r#"[["0"]]"#, r#", "points": [["1"], ["2"]]"#),
        )
        .unwrap();
        std::fs::write(
            dir.path().join("b.json"),
            elementary_src("x1/x2^2", r#"[["1/2"]]"#, r#", "points": [["1"]]"#),
        )
        .unwrap();
        let first = cmd_corpus(dir.path(), 1).unwrap();
        let second = cmd_corpus(dir.path(), 2).unwrap();
        assert_eq!(first.results["files"], 2);
        assert_eq!(first.results["points_checked"], 3);
        assert_eq!(first.results["l_holds_everywhere"], true);
        assert_eq!(first.results["rows"], second.results["rows"]);
    }

    #[test]
    fn corpus_rejects_empty_directories() {
        let dir = tempfile::tempdir().unwrap();
        assert!(cmd_corpus(dir.path(), 1).is_err());
    }
}
