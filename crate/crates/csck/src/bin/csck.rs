//! Command-line front end: admissibility checks, configuration search, the
//! worked-example catalog, the scalar-flat model ODE, the gluing-exponent
//! ledger, and the biharmonic mode-matching sweep.
//!
//! Exit codes: 0 all requested checks pass, 1 a check ran to completion and
//! came back false, 2 bad input, 3 internal/solver failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use csck::admissibility::{self, AdmissibilityReport};
use csck::asymptotics::{self, InequalityGroup, Q};
use csck::biharmonic::{
    inner_extension_mode, match_mode, outer_extension_mode, poisson_map_mode, ModeData,
};
use csck::error::Error;
use csck::kernel_basis::{
    product_kernel_basis, sample_point, ConfigPoint, Factor, FactorAction, FactorPoint,
    GroupElement, KernelBasis, KernelFn, ModelManifold, SymmetryGroup,
};
use csck::point_search::{
    self, adjoin_point, example2_boundary, example4_boundary, example_catalog, CatalogOutcome,
    CatalogParams, Configuration, MatrixMatch,
};
use csck::simanca_ode::{
    expansion_fit, integrate_zeta, integrate_zeta_with, reconstruct_potential, Integrator,
};
use csck::{DEFAULT_SEED, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "csck", version, about = "Blow-up admissibility and gluing diagnostics")]
struct Cli {
    /// RNG seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Check admissibility of a point configuration from a JSON config file.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Random full-rank search for an admissible configuration.
    Search {
        /// Complex projective dimension (single-factor model).
        #[arg(long)]
        n: Option<usize>,
        /// Number of points; defaults to d + 1.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        max_tries: usize,
        /// Optional JSON file {"manifold":..., "m":..., "max_tries":...}.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run one worked example (1..6) and diff against its documented matrix.
    Catalog {
        #[arg(long)]
        id: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
    },
    /// Integrate the scalar-flat model ODE and fit the far-field expansion.
    Ode {
        #[arg(long)]
        n: usize,
        /// Integration endpoint. The far-field fit window scales with smax;
        /// a few hundred keeps the decaying terms above f64 rounding.
        #[arg(long, default_value_t = 300.0)]
        smax: f64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        /// Include the (s, zeta, f) samples in the JSON report.
        #[arg(long, default_value_t = false)]
        samples: bool,
    },
    /// Verify the gluing-exponent inequality ledger at a rational delta.
    Ledger {
        #[arg(long)]
        n: usize,
        /// Rational weight exponent, e.g. "9/10" or "-3/2".
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
    },
    /// Sweep the Cauchy-data mode maps and report determinants/conditioning.
    Match {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        gamma_max: usize,
    },
    /// Run the whole example catalog, ODE checks, ledgers, and mode sweep.
    PaperSuite,
}

/// One finished subcommand: a JSON report plus a tabular view of the same
/// data, and the overall verdict that drives the exit code.
struct Outcome {
    report: Value,
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(classify(&e));
        }
    };
    let body = render(&cli, &outcome);
    if let Some(path) = &cli.out {
        if let Err(e) = atomic_write(path, &body) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else {
        use std::io::Write as _;
        // Ignore EPIPE so `csck ... | head` exits quietly.
        let _ = writeln!(std::io::stdout(), "{body}");
    }
    ExitCode::from(if outcome.pass { 0 } else { 1 })
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::InvalidDimension(..)
        | Error::DimensionMismatch(..)
        | Error::EmptyKernel
        | Error::InvalidGroup(..)
        | Error::InvalidInput(..)
        | Error::MeanZeroViolation(..) => 2,
        _ => 3,
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Check { config } => cmd_check(config, cli.seed),
        Command::Search { n, m, max_tries, config } => {
            cmd_search(*n, *m, *max_tries, config.as_deref(), cli.seed)
        }
        Command::Catalog { id, n, alpha, beta } => cmd_catalog(*id, *n, *alpha, *beta),
        Command::Ode { n, smax, rtol, samples } => cmd_ode(*n, *smax, *rtol, *samples),
        Command::Ledger { n, delta } => cmd_ledger(*n, delta),
        Command::Match { n, gamma_max } => cmd_match(*n, *gamma_max),
        Command::PaperSuite => cmd_suite(cli.seed),
    }
    .map(|mut o| {
        o.report = envelope(cli, o.report);
        o
    })
}

fn envelope(cli: &Cli, report: Value) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
        "command": command_name(&cli.command),
        "report": report,
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Search { .. } => "search",
        Command::Catalog { .. } => "catalog",
        Command::Ode { .. } => "ode",
        Command::Ledger { .. } => "ledger",
        Command::Match { .. } => "match",
        Command::PaperSuite => "paper-suite",
    }
}

fn render(cli: &Cli, o: &Outcome) -> String {
    match cli.format {
        Format::Json => serde_json::to_string_pretty(&o.report).expect("report serializes"),
        Format::Csv => {
            let mut s = o.headers.join(",");
            for row in &o.rows {
                s.push('\n');
                s.push_str(&row.join(","));
            }
            s
        }
        Format::Table => {
            let mut widths: Vec<usize> = o.headers.iter().map(|h| h.len()).collect();
            for row in &o.rows {
                for (i, cell) in row.iter().enumerate() {
                    widths[i] = widths[i].max(cell.len());
                }
            }
            let mut s = String::new();
            let line = |cells: Vec<&str>, s: &mut String| {
                for (i, c) in cells.iter().enumerate() {
                    if i > 0 {
                        s.push_str("  ");
                    }
                    let _ = write!(s, "{:<1$}", c, widths[i]);
                }
                s.push('\n');
            };
            line(o.headers.to_vec(), &mut s);
            for row in &o.rows {
                line(row.iter().map(String::as_str).collect(), &mut s);
            }
            s.pop();
            s
        }
    }
}

fn atomic_write(path: &Path, body: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, body)?;
    fs::rename(&tmp, path)
}

// ---------------------------------------------------------------------------
// JSON <-> domain plumbing.

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn parse_manifold(v: &Value) -> Result<ModelManifold, Error> {
    let arr = v
        .get("factors")
        .and_then(Value::as_array)
        .or_else(|| v.as_array())
        .ok_or_else(|| invalid("manifold: expected {\"factors\": [...]}"))?;
    let mut factors = Vec::new();
    for f in arr {
        if let Some(n) = f.get("P").and_then(Value::as_u64) {
            factors.push(Factor::Projective(n as usize));
        } else if f.get("rigid").is_some() {
            let dim = f.get("dim").and_then(Value::as_u64).map(|d| d as usize);
            factors.push(Factor::Rigid { dim });
        } else {
            return Err(invalid(format!("manifold factor {f}: expected {{\"P\": n}} or {{\"rigid\": true}}")));
        }
    }
    ModelManifold::new(factors)
}

fn parse_complex(v: &Value) -> Result<Complex64, Error> {
    let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| invalid("coordinate: expected [re, im]"))?;
    let re = pair[0].as_f64().ok_or_else(|| invalid("coordinate: non-numeric real part"))?;
    let im = pair[1].as_f64().ok_or_else(|| invalid("coordinate: non-numeric imaginary part"))?;
    Ok(Complex64::new(re, im))
}

fn parse_point(v: &Value, m: &ModelManifold) -> Result<ConfigPoint, Error> {
    let arr = v
        .get("factors")
        .and_then(Value::as_array)
        .or_else(|| v.as_array())
        .ok_or_else(|| invalid("point: expected an array with one entry per factor"))?;
    // Single-factor shorthand: a bare coordinate list instead of [[coords]].
    let wrapped;
    let arr = if m.factors.len() == 1
        && arr.len() != 1
        && arr.iter().all(|e| e.is_array() && e.get(0).map_or(false, Value::is_number))
    {
        wrapped = vec![Value::Array(arr.clone())];
        &wrapped
    } else {
        arr
    };
    if arr.len() != m.factors.len() {
        return Err(invalid(format!(
            "point has {} factor entries, manifold has {}",
            arr.len(),
            m.factors.len()
        )));
    }
    let mut factors = Vec::new();
    for (entry, f) in arr.iter().zip(&m.factors) {
        match f {
            Factor::Projective(n) => {
                let coords = entry
                    .as_array()
                    .ok_or_else(|| invalid("projective point: expected [[re,im], ...]"))?;
                if coords.len() != n + 1 {
                    return Err(invalid(format!(
                        "projective point: expected {} coordinates, got {}",
                        n + 1,
                        coords.len()
                    )));
                }
                let z = coords.iter().map(parse_complex).collect::<Result<Vec<_>, _>>()?;
                factors.push(FactorPoint::Projective(z));
            }
            Factor::Rigid { .. } => {
                let label = entry
                    .as_str()
                    .ok_or_else(|| invalid("rigid-factor point: expected a string label"))?;
                factors.push(FactorPoint::Rigid(label.to_string()));
            }
        }
    }
    ConfigPoint::new(factors)
}

fn parse_group(v: &Value, m: &ModelManifold) -> Result<SymmetryGroup, Error> {
    let coord_sizes: Vec<usize> = m.projective_factors().iter().map(|&(_, n)| n + 1).collect();
    let gens = v
        .get("generators")
        .and_then(Value::as_array)
        .or_else(|| v.as_array())
        .ok_or_else(|| Error::InvalidGroup("group: expected {\"generators\": [...]}".into()))?;
    let mut elements = Vec::new();
    for g in gens {
        let actions_json = g
            .get("actions")
            .and_then(Value::as_array)
            .or_else(|| g.as_array())
            .ok_or_else(|| Error::InvalidGroup("group element: expected an action per projective factor".into()))?;
        if actions_json.len() != coord_sizes.len() {
            return Err(Error::InvalidGroup(format!(
                "group element acts on {} factors, expected {}",
                actions_json.len(),
                coord_sizes.len()
            )));
        }
        let mut actions = Vec::new();
        for a in actions_json {
            let perm: Vec<usize> = a
                .get("perm")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidGroup("action: missing \"perm\"".into()))?
                .iter()
                .map(|x| x.as_u64().map(|u| u as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::InvalidGroup("action: non-integer perm entry".into()))?;
            let phase = match a.get("phase").and_then(Value::as_array) {
                Some(ph) => ph.iter().map(parse_complex).collect::<Result<Vec<_>, _>>()?,
                None => vec![Complex64::new(1.0, 0.0); perm.len()],
            };
            actions.push(FactorAction { perm, phase });
        }
        elements.push(GroupElement { actions });
    }
    SymmetryGroup::from_generators(coord_sizes, elements, 4096)
}

fn complex_json(z: &Complex64) -> Value {
    json!([z.re, z.im])
}

fn point_json(p: &ConfigPoint) -> Value {
    let factors: Vec<Value> = p
        .factors
        .iter()
        .map(|f| match f {
            FactorPoint::Projective(z) => Value::Array(z.iter().map(complex_json).collect()),
            FactorPoint::Rigid(label) => Value::String(label.clone()),
        })
        .collect();
    Value::Array(factors)
}

fn manifold_json(m: &ModelManifold) -> Value {
    let factors: Vec<Value> = m
        .factors
        .iter()
        .map(|f| match f {
            Factor::Projective(n) => json!({ "P": n }),
            Factor::Rigid { dim } => json!({ "rigid": true, "dim": dim }),
        })
        .collect();
    json!({ "factors": factors })
}

fn config_json(c: &Configuration, report: &AdmissibilityReport) -> Value {
    json!({
        "manifold": manifold_json(&c.manifold),
        "points": c.points.iter().map(point_json).collect::<Vec<_>>(),
        "provenance": c.provenance,
        "report": serde_json::to_value(report).expect("report serializes"),
    })
}

fn q_str(x: Q) -> String {
    format!("{x}")
}

// ---------------------------------------------------------------------------
// Subcommands.

fn report_rows(r: &AdmissibilityReport) -> (Vec<&'static str>, Vec<Vec<String>>) {
    (
        vec!["d", "m", "c1", "kernel_dim", "c2", "margin", "marginal", "verdict"],
        vec![vec![
            r.d.to_string(),
            r.m.to_string(),
            r.c1.to_string(),
            r.kernel_dim.to_string(),
            r.c2.to_string(),
            format!("{:e}", r.margin),
            r.marginal.to_string(),
            r.verdict.to_string(),
        ]],
    )
}

fn cmd_check(path: &Path, seed: u64) -> Result<Outcome, Error> {
    let cfg = read_json(path)?;
    let manifold = parse_manifold(
        cfg.get("manifold").ok_or_else(|| invalid("config: missing \"manifold\""))?,
    )?;
    let points_json = cfg
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("config: missing \"points\" array"))?;
    let points = points_json
        .iter()
        .map(|p| parse_point(p, &manifold))
        .collect::<Result<Vec<_>, _>>()?;
    let basis = product_kernel_basis(&manifold)?;

    let (report_value, report, extra_pass) = match cfg.get("group") {
        Some(gv) if !gv.is_null() => {
            let group = parse_group(gv, &manifold)?;
            let eq = admissibility::equivariant_check(&basis, &group, &points, seed)?;
            let value = serde_json::to_value(&eq).expect("report serializes");
            (value, eq.reduced.clone(), eq.consistent)
        }
        _ => {
            let r = admissibility::check(&basis, &points)?;
            (serde_json::to_value(&r).expect("report serializes"), r, true)
        }
    };
    let (headers, rows) = report_rows(&report);
    let pass = report.verdict && extra_pass;
    Ok(Outcome {
        report: json!({ "config": cfg, "admissibility": report_value }),
        headers,
        rows,
        pass,
    })
}

fn cmd_search(
    n: Option<usize>,
    m: Option<usize>,
    max_tries: usize,
    config: Option<&Path>,
    seed: u64,
) -> Result<Outcome, Error> {
    let (manifold, m, max_tries) = match config {
        Some(path) => {
            let cfg = read_json(path)?;
            let manifold = parse_manifold(
                cfg.get("manifold").ok_or_else(|| invalid("config: missing \"manifold\""))?,
            )?;
            let m_cfg = cfg.get("m").and_then(Value::as_u64).map(|x| x as usize);
            let tries = cfg
                .get("max_tries")
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .unwrap_or(max_tries);
            (manifold, m_cfg, tries)
        }
        None => {
            let n = n.ok_or_else(|| invalid("search: give --n or --config"))?;
            (ModelManifold::pn(n)?, m, max_tries)
        }
    };
    let basis = product_kernel_basis(&manifold)?;
    let m = m.unwrap_or(basis.len() + 1);
    let result = point_search::random_rank_search(&basis, m, seed, max_tries)?;
    let (headers, mut rows) = report_rows(&result.report);
    rows[0].push(result.tries.to_string());
    let mut headers = headers;
    headers.push("tries");
    let pass = result.report.verdict;
    Ok(Outcome {
        report: json!({
            "configuration": config_json(&result.config, &result.report),
            "tries": result.tries,
        }),
        headers,
        rows,
        pass,
    })
}

fn matrix_match_str(m: MatrixMatch) -> &'static str {
    match m {
        MatrixMatch::Exact => "exact",
        MatrixMatch::UpToSigns => "up_to_signs",
        MatrixMatch::Mismatch => "mismatch",
    }
}

fn catalog_json(o: &CatalogOutcome) -> Value {
    json!({
        "id": o.id,
        "configuration": config_json(&o.config, &o.report),
        "basis_labels": o.basis_labels,
        "expected_matrix": o.expected_matrix,
        "matrix_match": matrix_match_str(o.matrix_match),
        "expected_witness": o.expected_witness,
        "witness_direction_error": o.witness_direction_error,
        "source_expected_admissible": o.source_expected_admissible,
        "verdict_match": o.verdict_match,
        "row_sum_max": o.row_sum_max,
        "notes": o.notes,
    })
}

fn cmd_catalog(id: usize, n: usize, alpha: f64, beta: f64) -> Result<Outcome, Error> {
    let params = CatalogParams { n, alpha, beta };
    let o = example_catalog(id, &params)?;
    let headers = vec!["id", "verdict", "matrix_match", "verdict_match", "witness_err", "notes"];
    let rows = vec![vec![
        o.id.to_string(),
        o.report.verdict.to_string(),
        matrix_match_str(o.matrix_match).to_string(),
        o.verdict_match.to_string(),
        o.witness_direction_error.map_or_else(|| "-".into(), |e| format!("{e:e}")),
        o.notes.join("; "),
    ]];
    let pass = o.verdict_match;
    Ok(Outcome { report: catalog_json(&o), headers, rows, pass })
}

fn cmd_ode(n: usize, smax: f64, rtol: f64, with_samples: bool) -> Result<Outcome, Error> {
    let traj = integrate_zeta(n, smax, rtol)?;
    let potential = reconstruct_potential(&traj);
    let (lambda, c, slope) = if n >= 3 {
        let fit = expansion_fit(&potential, n)?;
        (fit.lambda, fit.c, Some(fit.remainder_slope))
    } else {
        // n = 2 closed form: zeta = 1, f = log s + s; no decaying tail to fit.
        (traj.lambda, 0.0, None)
    };
    let mut report = json!({
        "n": n,
        "smax": smax,
        "rtol": rtol,
        "lambda": lambda,
        "c": c,
        "remainder_slope": slope,
        "steps": traj.steps,
        "rejected": traj.rejected,
    });
    let mut headers = vec!["s", "zeta", "f"];
    let mut rows: Vec<Vec<String>> = traj
        .samples
        .iter()
        .zip(&potential)
        .map(|(&(s, z), &(_, f))| vec![format!("{s:e}"), format!("{z:.17}"), format!("{f:.17}")])
        .collect();
    if with_samples {
        let samples: Vec<Value> = traj
            .samples
            .iter()
            .zip(&potential)
            .map(|(&(s, z), &(_, f))| json!([s, z, f]))
            .collect();
        report["samples"] = Value::Array(samples);
    } else if rows.len() > 1 {
        // Tabular output without --samples: just the endpoints.
        rows = vec![rows[0].clone(), rows[rows.len() - 1].clone()];
    }
    headers.push("lambda");
    for row in &mut rows {
        row.push(format!("{lambda:.12}"));
    }
    Ok(Outcome { report, headers, rows, pass: lambda > 0.0 })
}

fn cmd_ledger(n: usize, delta: &str) -> Result<Outcome, Error> {
    let delta: Q = Q::from_str(delta)
        .map_err(|e| invalid(format!("delta: expected a rational like 9/10: {e}")))?;
    let ledger = asymptotics::verify_ledger(n, delta)?;
    let headers = vec!["name", "group", "lhs_exp", "rhs_exp", "gap", "pass", "note"];
    let rows: Vec<Vec<String>> = ledger
        .entries
        .iter()
        .map(|e| {
            vec![
                e.name.to_string(),
                format!("{:?}", e.group).to_lowercase(),
                q_str(e.lhs_exponent),
                q_str(e.rhs_exponent),
                q_str(e.gap),
                e.pass.to_string(),
                e.note.to_string(),
            ]
        })
        .collect();
    if !ledger.all_pass {
        for e in ledger.entries.iter().filter(|e| !e.pass) {
            eprintln!("ledger: inequality '{}' fails at delta = {} (gap {})", e.name, delta, e.gap);
        }
    }
    let pass = ledger.all_pass && ledger.in_window;
    Ok(Outcome {
        report: serde_json::to_value(&ledger).expect("ledger serializes"),
        headers,
        rows,
        pass,
    })
}

fn cmd_match(n: usize, gamma_max: usize) -> Result<Outcome, Error> {
    let headers = vec![
        "gamma",
        "inner_exps",
        "outer_exps",
        "det",
        "condition",
        "restricted",
        "roundtrip_err",
    ];
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut pass = true;
    for gamma in 0..=gamma_max {
        let pm = poisson_map_mode(gamma, n);
        let inner = inner_extension_mode(ModeData { gamma, n, h: 1.0, k: 0.0 });
        let outer = outer_extension_mode(ModeData { gamma, n, h: 1.0, k: 0.0 })?;
        let rt = if gamma >= 1 {
            let mdi = ModeData { gamma, n, h: 0.4, k: 1.7 };
            let mdo = ModeData { gamma, n, h: -1.1, k: 0.6 };
            let i = inner_extension_mode(mdi);
            let o = outer_extension_mode(mdo)?;
            let m = match_mode(
                gamma,
                n,
                o.profile(1.0) - i.profile(1.0),
                o.profile_dr(1.0) - i.profile_dr(1.0),
                o.laplacian_profile(1.0) - i.laplacian_profile(1.0),
                o.laplacian_profile_dr(1.0) - i.laplacian_profile_dr(1.0),
            )?;
            [(m.inner.h + mdi.h).abs(), (m.inner.k + mdi.k).abs(), (m.outer.h + mdo.h).abs(), (m.outer.k + mdo.k).abs()]
                .into_iter()
                .fold(0.0_f64, f64::max)
        } else {
            0.0
        };
        pass &= pm.det.abs() > 1e-8 && rt < 1e-10;
        entries.push(json!({
            "gamma": gamma,
            "inner_exponents": inner.exponents,
            "outer_exponents": outer.exponents,
            "matrix": pm.matrix,
            "det": pm.det,
            "condition": pm.condition,
            "restricted": pm.restricted,
            "roundtrip_error": rt,
        }));
        rows.push(vec![
            gamma.to_string(),
            format!("{:?}", inner.exponents),
            format!("{:?}", outer.exponents),
            format!("{:e}", pm.det),
            format!("{:.3e}", pm.condition),
            pm.restricted.to_string(),
            format!("{rt:.3e}"),
        ]);
    }
    Ok(Outcome {
        report: json!({ "n": n, "gamma_max": gamma_max, "modes": entries, "all_pass": pass }),
        headers,
        rows,
        pass,
    })
}

// ---------------------------------------------------------------------------
// paper-suite: every headline check, one summary row each. Two rows report
// "discrepancy-documented": the source text's beta range for the weighted
// two-point family and one displayed matrix entry for the product example.

struct SuiteRow {
    criterion: &'static str,
    status: String,
    detail: String,
}

fn suite_row(criterion: &'static str, ok: bool, detail: String) -> SuiteRow {
    SuiteRow { criterion, status: if ok { "pass" } else { "fail" }.to_string(), detail }
}

fn cmd_suite(seed: u64) -> Result<Outcome, Error> {
    let mut rows = Vec::new();
    rows.push(suite_example1()?);
    rows.push(suite_example3()?);
    rows.push(suite_example4()?);
    rows.push(suite_example5(seed)?);
    rows.push(suite_example6()?);
    rows.push(suite_example2()?);
    rows.push(suite_ode()?);
    rows.push(suite_ledger()?);
    rows.push(suite_mode_map()?);
    rows.push(suite_property_sample(seed)?);

    let pass = rows.iter().all(|r| r.status != "fail");
    let headers = vec!["criterion", "status", "detail"];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.criterion.to_string(), r.status.clone(), r.detail.clone()])
        .collect();
    let report = json!({
        "rows": rows
            .iter()
            .map(|r| json!({ "criterion": r.criterion, "status": r.status, "detail": r.detail }))
            .collect::<Vec<_>>(),
        "all_pass": pass,
    });
    Ok(Outcome { report, headers, rows: table, pass })
}

fn suite_example1() -> Result<SuiteRow, Error> {
    let mut ok = true;
    let mut worst = 0.0_f64;
    for n in 2..=6 {
        let o = example_catalog(1, &CatalogParams { n, ..CatalogParams::default() })?;
        let werr = o.witness_direction_error.unwrap_or(f64::INFINITY);
        ok &= o.matrix_match == MatrixMatch::Exact && o.report.verdict && werr <= 1e-10;
        worst = worst.max(werr);
    }
    Ok(suite_row(
        "example-1 bidiagonal, n=2..6",
        ok,
        format!("max witness direction error {worst:.2e}"),
    ))
}

fn suite_example3() -> Result<SuiteRow, Error> {
    let mut ok = true;
    let mut worst = 0.0_f64;
    for n in 2..=3 {
        let o = example_catalog(3, &CatalogParams { n, ..CatalogParams::default() })?;
        let rs = o.row_sum_max.unwrap_or(f64::INFINITY);
        ok &= rs < 1e-12 && o.report.verdict && o.config.m() == 2 * n * (n + 1);
        worst = worst.max(rs);
    }
    Ok(suite_row(
        "example-3 balanced configuration, n=2,3",
        ok,
        format!("max |row sum| {worst:.2e}; admissible with m = 2n(n+1)"),
    ))
}

fn suite_example4() -> Result<SuiteRow, Error> {
    let mut ok = true;
    let mut worst = 0.0_f64;
    for n in 2..=5 {
        let o = example_catalog(4, &CatalogParams { n, alpha: n as f64, ..CatalogParams::default() })?;
        ok &= o.matrix_match == MatrixMatch::Exact && o.report.verdict;
        let b = example4_boundary(n, 1e-8)?;
        let err = (b - (n as f64 - 1.0) / 2.0).abs();
        ok &= err <= 1e-6;
        worst = worst.max(err);
    }
    Ok(suite_row(
        "example-4 weighted pair boundary at (n-1)/2, n=2..5",
        ok,
        format!("max boundary error {worst:.2e}"),
    ))
}

fn suite_example5(seed: u64) -> Result<SuiteRow, Error> {
    let o = example_catalog(5, &CatalogParams::default())?;
    let mut ok = o.matrix_match == MatrixMatch::Exact && o.report.verdict;
    // Adjoin 50 random product points; admissibility must survive each one.
    let basis = KernelBasis {
        manifold: o.config.manifold.clone(),
        functions: vec![KernelFn::XiHat { factor: 0, a: 0, b: 1 }],
        labels: vec!["xihat_12".into()],
    };
    let mut rng = csck::rng::derive(seed, "suite-ex5-adjoin", 0);
    let mut cfg = o.config.clone();
    let mut rep = o.report.clone();
    let mut adjoined = 0;
    while adjoined < 50 {
        let p = sample_point(&cfg.manifold, &mut rng);
        match adjoin_point(&basis, &cfg, &rep, p) {
            Ok((c, r)) => {
                ok &= r.verdict;
                cfg = c;
                rep = r;
                adjoined += 1;
            }
            // Rigid-factor labels can collide; resample.
            Err(Error::InvalidInput(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(suite_row(
        "example-5 two-point product + 50 adjunctions",
        ok,
        format!("final m = {}, margin {:.2e}", cfg.m(), rep.margin),
    ))
}

fn suite_example6() -> Result<SuiteRow, Error> {
    let o = example_catalog(6, &CatalogParams::default())?;
    let werr = o.witness_direction_error.unwrap_or(f64::INFINITY);
    let ok = o.report.c1 == 3 && o.report.verdict && werr <= 1e-8 && !o.notes.is_empty();
    Ok(SuiteRow {
        criterion: "example-6 product model, rank 3 + witness",
        status: if ok { "discrepancy-documented".into() } else { "fail".into() },
        detail: format!("witness error {werr:.2e}; {}", o.notes.join("; ")),
    })
}

fn suite_example2() -> Result<SuiteRow, Error> {
    let b = example2_boundary(2, 1e-8)?;
    let err = (b - std::f64::consts::FRAC_1_SQRT_2).abs();
    let o = example_catalog(2, &CatalogParams::default())?;
    let ok = err <= 1e-6 && !o.notes.is_empty();
    Ok(SuiteRow {
        criterion: "example-2 beta sweep, boundary at 1/sqrt(2)",
        status: if ok { "discrepancy-documented".into() } else { "fail".into() },
        detail: format!("boundary error {err:.2e}; {}", o.notes.join("; ")),
    })
}

fn suite_ode() -> Result<SuiteRow, Error> {
    let traj2 = integrate_zeta(2, 300.0, 1e-10)?;
    let sup = traj2.samples.iter().map(|&(_, z)| (z - 1.0).abs()).fold(0.0_f64, f64::max);
    let pot2 = reconstruct_potential(&traj2);
    let f_err = pot2
        .iter()
        .map(|&(s, f)| (f - (s.ln() + s)).abs() / s.max(1.0))
        .fold(0.0_f64, f64::max);
    let mut ok = sup < 1e-10 && f_err < 1e-8;
    let mut detail = format!("n=2 sup|zeta-1| {sup:.1e}, rel f error {f_err:.1e}");
    for n in 3..=5 {
        let a = integrate_zeta_with(n, 300.0, 1e-10, Integrator::DormandPrince)?;
        let b = integrate_zeta_with(n, 300.0, 1e-12, Integrator::Fehlberg)?;
        let fit = expansion_fit(&reconstruct_potential(&a), n)?;
        let agree = (a.lambda - b.lambda).abs();
        // One-sided slope bound: the remainder may decay faster than its
        // leading order inside a finite window, never slower.
        let slope_ok = fit.remainder_slope <= 1.0 - n as f64 + 0.2;
        ok &= a.lambda > 0.0 && agree < 1e-6 && slope_ok;
        let _ = write!(detail, "; n={n} lambda {:.6} (dual gap {agree:.1e}, slope {:.2})", a.lambda, fit.remainder_slope);
    }
    Ok(suite_row("ode far-field expansion, n=2..5", ok, detail))
}

fn suite_ledger() -> Result<SuiteRow, Error> {
    let mut ok = true;
    let mut detail = String::new();
    for n in 2..=6 {
        let (lo, hi) = asymptotics::stated_window(n)?;
        let mid = (lo + hi) / 2;
        let ledger = asymptotics::verify_ledger(n, mid)?;
        let core_pass = ledger
            .entries
            .iter()
            .filter(|e| e.group != InequalityGroup::Radial)
            .all(|e| e.pass && e.gap > Q::from_integer(0));
        ok &= core_pass && ledger.in_window;
        if !detail.is_empty() {
            detail.push_str("; ");
        }
        let _ = write!(detail, "n={n} delta={mid} ok={core_pass}");
    }
    let neck = asymptotics::delta_window(2, &[InequalityGroup::Neck])?;
    let endpoint_ok = neck.hi == Some(asymptotics::q(2, 3));
    ok &= endpoint_ok;
    let _ = write!(detail, "; n=2 neck upper endpoint 2/3: {endpoint_ok}");
    Ok(suite_row("ledger midpoints, n=2..6", ok, detail))
}

fn suite_mode_map() -> Result<SuiteRow, Error> {
    let mut min_det = f64::INFINITY;
    let mut max_rt = 0.0_f64;
    let mut ok = true;
    for n in 2..=5 {
        for gamma in 0..=20 {
            let pm = poisson_map_mode(gamma, n);
            min_det = min_det.min(pm.det.abs());
            ok &= pm.det.abs() > 1e-8;
        }
        for gamma in 1..=8 {
            let mdi = ModeData { gamma, n, h: 0.4, k: 1.7 };
            let mdo = ModeData { gamma, n, h: -1.1, k: 0.6 };
            let i = inner_extension_mode(mdi);
            let o = outer_extension_mode(mdo)?;
            let m = match_mode(
                gamma,
                n,
                o.profile(1.0) - i.profile(1.0),
                o.profile_dr(1.0) - i.profile_dr(1.0),
                o.laplacian_profile(1.0) - i.laplacian_profile(1.0),
                o.laplacian_profile_dr(1.0) - i.laplacian_profile_dr(1.0),
            )?;
            let rt = [
                (m.inner.h + mdi.h).abs(),
                (m.inner.k + mdi.k).abs(),
                (m.outer.h + mdo.h).abs(),
                (m.outer.k + mdo.k).abs(),
            ]
            .into_iter()
            .fold(0.0_f64, f64::max);
            max_rt = max_rt.max(rt);
            ok &= rt < 1e-10;
        }
    }
    Ok(suite_row(
        "mode-map determinant sweep + matching round trip",
        ok,
        format!("min |det| {min_det:.2e}, max round-trip error {max_rt:.2e}"),
    ))
}

/// A fast deterministic slice of the randomized property suites: LP verdicts
/// against a brute-force cone grid for small kernels, scaling invariance of
/// the verdict, and the Monte Carlo mean-zero check on the full basis.
fn suite_property_sample(seed: u64) -> Result<SuiteRow, Error> {
    use rand::Rng;

    let mut ok = true;
    let mut rng = csck::rng::derive(seed, "suite-property-sample", 0);
    let mut agreements = 0;
    for case in 0..100 {
        let d = rng.gen_range(1..=4);
        let kdim = rng.gen_range(1..=2);
        let m = d + kdim;
        let mut data = Vec::with_capacity(d * m);
        for _ in 0..d * m {
            data.push(rng.gen_range(-1.0..1.0));
        }
        let mat = admissibility::AdmissibilityMatrix {
            matrix: nalgebra::DMatrix::from_row_slice(d, m, &data),
            row_labels: (0..d).map(|i| format!("r{i}")).collect(),
        };
        if admissibility::rank(&mat) != d {
            continue;
        }
        let lp = admissibility::positive_kernel(&mat)?;
        let brute = admissibility::brute_force_positive(&mat, 20_000)?;
        // Skip near-boundary cases where grid resolution decides.
        if lp.t_star.abs() < 1e-3 {
            continue;
        }
        if lp.positive != brute.is_some() {
            ok = false;
            eprintln!(
                "property sample: LP/brute-force disagreement in case {case}: lp {} (t* {:e}) vs grid {}",
                lp.positive,
                lp.t_star,
                brute.is_some()
            );
        } else {
            agreements += 1;
        }
        // Row scaling must not change the verdict.
        let mut scaled = mat.matrix.clone();
        for i in 0..d {
            let c = 10f64.powi(rng.gen_range(-3..=3));
            for j in 0..m {
                scaled[(i, j)] *= c;
            }
        }
        let smat = admissibility::AdmissibilityMatrix {
            matrix: scaled,
            row_labels: mat.row_labels.clone(),
        };
        let slp = admissibility::positive_kernel(&smat)?;
        ok &= slp.positive == lp.positive;
    }
    // Monte Carlo mean-zero on the full degree-2 invariant basis.
    let basis = csck::kernel_basis::pn_kernel_basis(2)?;
    let stats = csck::kernel_basis::mean_zero_check(&basis, 20_000, seed)?;
    let mz = stats.iter().all(|&(mean, sigma)| mean.abs() <= 3.0 * sigma);
    ok &= mz;
    Ok(suite_row(
        "property sample: LP vs brute force, scaling, mean zero",
        ok,
        format!("{agreements} decisive LP/grid agreements; mean-zero within 3 sigma: {mz}"),
    ))
}
