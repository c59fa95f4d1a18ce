//! Command-line front end for `minrep-core`: model selection, suite
//! orchestration, JSON reports and CSV tables.

pub mod cli;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use minrep_core::bessel;
use minrep_core::catalog::{self, Family, FamilyDescriptor, GroupClass};
use minrep_core::liealg::{build_model, GradedModel};
use minrep_core::orbit::{self, OrbitGeometry};
use minrep_core::rational::{format_q, HalfInt};
use minrep_core::report::{Status, VerificationReport};
use minrep_core::sphver::{self, GridSpec, SphericalPoint};
use minrep_core::tensor::{self, StabilizerDims};

use cli::{Format, ModelArgs, Suite};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Bad input: unknown model, excluded group, bad range. Exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Resolves `--model` to a table instance with a matrix model.
pub fn resolve_class(args: &ModelArgs) -> Result<GroupClass> {
    let key = args.model.to_ascii_lowercase();
    let desc = match key.as_str() {
        "o2n2n" => FamilyDescriptor::Class(class(Family::OSplit, args.n)?),
        "gl2n" => FamilyDescriptor::Class(class(Family::GlReal, args.n)?),
        "opq" => {
            let (Some(p), Some(q)) = (args.p, args.q) else {
                return Err(usage("--model opq needs --p and --q"));
            };
            FamilyDescriptor::Orthogonal { p, q }
        }
        _ => {
            let fam = Family::from_tag(&args.model)
                .ok_or_else(|| usage(format!("unknown model {:?}", args.model)))?;
            FamilyDescriptor::Class(
                fam.row()
                    .instantiate(args.n, args.p)
                    .map_err(|e| usage(e.to_string()))?,
            )
        }
    };
    let adm = catalog::validate_admissible(&desc);
    if !adm.admissible {
        return Err(usage(format!("rejected: {}", adm.diagnostic)));
    }
    adm.class
        .ok_or_else(|| usage(format!("rejected: {}", adm.diagnostic)))
}

fn class(f: Family, n: u32) -> Result<GroupClass> {
    GroupClass::new(f, n).map_err(|e| usage(e.to_string()))
}

pub fn resolve_model(args: &ModelArgs) -> Result<GradedModel> {
    let c = resolve_class(args)?;
    if !c.model_available {
        return Err(usage(format!(
            "{} is in the table but has no matrix model; models exist for {} and {}",
            c.family,
            Family::OSplit,
            Family::GlReal
        )));
    }
    build_model(c.family, c.n as usize).map_err(|e| usage(e.to_string()))
}

/// One row of `table`, flattened for CSV and JSON.
#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub family: String,
    pub group: String,
    pub n: String,
    pub d: String,
    pub e: u32,
    pub km_label: String,
    pub dual_family: String,
}

pub fn table_rows(family: Option<&str>) -> Result<Vec<TableRow>> {
    let filter = match family {
        Some(t) => Some(Family::from_tag(t).ok_or_else(|| usage(format!("unknown family {t:?}")))?),
        None => None,
    };
    Ok(catalog::list_classes()
        .iter()
        .filter(|r| filter.map_or(true, |f| r.family == f))
        .map(|r| TableRow {
            family: r.family.tag().into(),
            group: r.group_label.into(),
            n: r.rank.to_string(),
            d: r.d.to_string(),
            e: r.e,
            km_label: r.km_label.into(),
            dual_family: r.dual_family(),
        })
        .collect())
}

pub fn cmd_table(format: Format, family: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let rows = table_rows(family)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "{:<10} {:<12} {:>2} {:>2} {:>2}  {:<26} dual pair", "family", "G", "n", "d", "e", "K/M")?;
            for r in &rows {
                writeln!(
                    out,
                    "{:<10} {:<12} {:>2} {:>2} {:>2}  {:<26} {}",
                    r.family, r.group, r.n, r.d, r.e, r.km_label, r.dual_family
                )?;
            }
        }
    }
    Ok(EXIT_PASS)
}

/// Everything that determines a `verify` run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub model: ModelArgs,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Serialize, Debug, Clone)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub suite: String,
    pub model: String,
    pub seed: u64,
    pub samples: u64,
    pub status: Status,
    /// Seconds since the epoch; the only field that differs between
    /// identical runs.
    pub timestamp: u64,
    pub reports: Vec<VerificationReport>,
    #[serde(skip)]
    pub grid: Vec<SphericalPoint>,
}

fn run_one(suite: Suite, m: &GradedModel, samples: u64, seed: u64) -> (VerificationReport, Vec<SphericalPoint>) {
    let mut grid = Vec::new();
    let mut rep = match suite {
        Suite::Structural => m.structural_suite(seed),
        Suite::Modular => m.modular_character_check(),
        Suite::Constants => sphver::exact_suite(m, 100, seed),
        Suite::Action => sphver::verify_action_operator(m, 400, seed),
        Suite::Spherical => {
            let (r, g) = sphver::spherical_suite_with_grid(m, &GridSpec::default(), samples, seed);
            grid = g;
            r
        }
        Suite::Orbit => orbit::orbit_suite(m, samples, seed),
        Suite::Bessel => {
            let (taus, zs) = bessel::default_suite_grid();
            bessel::bessel_suite(&taus, &zs)
        }
        Suite::L2 => orbit::square_integrability_suite(),
        Suite::Tensor => tensor::tensor_suite(m).unwrap_or_else(|e| {
            let mut r = VerificationReport::new("tensor", m.name());
            r.push(minrep_core::report::CheckOutcome::float("tensor", 0, 1, f64::INFINITY, 0.0, e.to_string()));
            r
        }),
        Suite::Catalog => catalog::catalog_suite(),
        Suite::All => unreachable!("expanded by the caller"),
    };
    rep.suite = format!("{}:{}", suite.name(), rep.suite);
    (rep, grid)
}

pub fn run_verify(cfg: &SuiteConfig) -> Result<RunReport> {
    let m = resolve_model(&cfg.model)?;
    let suites: Vec<Suite> = match cfg.suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let results: Vec<(VerificationReport, Vec<SphericalPoint>)> = suites
        .par_iter()
        .map(|&s| run_one(s, &m, cfg.samples, cfg.seed))
        .collect();
    let mut reports = Vec::new();
    let mut grid = Vec::new();
    for (r, g) in results {
        reports.push(r);
        grid.extend(g);
    }
    let status = reports
        .iter()
        .fold(Status::Pass, |acc, r| acc.merge(r.status()));
    Ok(RunReport {
        tool: "minrep",
        version: env!("CARGO_PKG_VERSION"),
        suite: cfg.suite.name().into(),
        model: m.name(),
        seed: cfg.seed,
        samples: cfg.samples,
        status,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        reports,
        grid,
    })
}

pub fn write_text_report(run: &RunReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{} on {} (seed {}, {} samples): {}", run.suite, run.model, run.seed, run.samples, run.status)?;
    for r in &run.reports {
        writeln!(out, "{}: {}", r.suite, r.status())?;
        for c in &r.checks {
            writeln!(out, "  [{}] {:<34} {:>12}  {}", c.status, c.name, c.residual, c.detail)?;
        }
        for n in &r.notes {
            writeln!(out, "  note: {n}")?;
        }
    }
    Ok(())
}

pub fn write_grid_csv(points: &[SphericalPoint], path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        ray: &'a str,
        t: f64,
        combined: f64,
        combined_stderr: f64,
        z: f64,
        term_y1: f64,
        term_theta: f64,
        control: f64,
        control_stderr: f64,
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for p in points {
        w.serialize(Row {
            ray: &p.ray,
            t: p.t,
            combined: p.combined.value,
            combined_stderr: p.combined.stderr,
            z: p.combined.z_score(),
            term_y1: p.term_y1.value,
            term_theta: p.term_theta.value,
            control: p.control.value,
            control_stderr: p.control.stderr,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_verify(args: &cli::VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = SuiteConfig {
        suite: args.suite,
        model: args.model.clone(),
        samples: args.samples,
        seed: args.seed,
    };
    let run = run_verify(&cfg)?;
    if let Some(p) = &args.json {
        fs::write(p, serde_json::to_string_pretty(&run)? + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &args.grid_csv {
        write_grid_csv(&run.grid, p)?;
    }
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &run)?;
            writeln!(out)?;
        }
        _ => write_text_report(&run, out)?,
    }
    for r in &run.reports {
        for c in r.failures() {
            writeln!(err, "{} {}/{}: {} ({})", c.status, r.suite, c.name, c.residual, c.detail)?;
        }
    }
    Ok(exit_code(run.status))
}

/// `(z, K_τ(z), φ_τ(z), residual)` rows; the residual is the relative
/// size of `Dφ_τ(z)`.
#[derive(Serialize, Debug, Clone, Copy, PartialEq)]
pub struct BesselRow {
    pub z: f64,
    pub k_tau: f64,
    pub phi_tau: f64,
    pub residual: f64,
}

pub fn bessel_rows(tau: HalfInt, zmin: f64, zmax: f64, steps: usize) -> Result<Vec<BesselRow>> {
    if !(zmin > 0.0) || !(zmax >= zmin) || !zmax.is_finite() || steps == 0 {
        return Err(usage(format!(
            "need 0 < zmin <= zmax and steps >= 1, got zmin = {zmin}, zmax = {zmax}, steps = {steps}"
        )));
    }
    let h = if steps > 1 { (zmax - zmin) / (steps - 1) as f64 } else { 0.0 };
    (0..steps)
        .map(|i| {
            let z = zmin + h * i as f64;
            let (phi, d1, d2) = bessel::phi_tau(tau, z)?;
            let terms = [4.0 * z * d2, 4.0 * (tau.to_f64() + 1.0) * d1, -phi];
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            Ok(BesselRow {
                z,
                k_tau: bessel::bessel_k(tau, z)?,
                phi_tau: phi,
                residual: (terms[0] + terms[1] + terms[2]).abs() / scale,
            })
        })
        .collect::<std::result::Result<Vec<_>, minrep_core::error::Error>>()
        .map_err(|e| usage(e.to_string()))
}

pub fn cmd_bessel(args: &cli::BesselArgs, out: &mut dyn Write) -> Result<i32> {
    let tau = HalfInt::parse(&args.tau).map_err(|e| usage(e.to_string()))?;
    let rows = bessel_rows(tau, args.zmin, args.zmax, args.steps)?;
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        _ => {
            let mut w = csv::Writer::from_writer(out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(EXIT_PASS)
}

#[derive(Serialize, Debug, Clone)]
pub struct TensorAudit {
    pub model: String,
    pub k: usize,
    pub dual_pair: String,
    pub dims: StabilizerDims,
    pub expected: ExpectedDims,
    pub pass: bool,
    pub report: VerificationReport,
}

#[derive(Serialize, Debug, Clone)]
pub struct ExpectedDims {
    pub g_k: u64,
    pub h_k: u64,
    pub orbit: Option<usize>,
}

pub fn tensor_audit(model: &ModelArgs, k: usize) -> Result<TensorAudit> {
    let m = resolve_model(model)?;
    let report = tensor::audit_dual_pair(&m, k).map_err(|e| usage(e.to_string()))?;
    let pair = catalog::dual_pair(&m.class(), k as u32).map_err(|e| usage(e.to_string()))?;
    let dims = tensor::stabilizer_sk(&m, k)?.dims();
    Ok(TensorAudit {
        model: m.name(),
        k,
        dual_pair: pair.to_string(),
        dims,
        expected: ExpectedDims {
            g_k: pair.g.real_dim(),
            h_k: pair.h.real_dim(),
            orbit: tensor::expected_orbit_dim(&m, k),
        },
        pass: report.passed(),
        report,
    })
}

pub fn cmd_tensor_audit(model: &ModelArgs, k: usize, json: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let audit = tensor_audit(model, k)?;
    let text = serde_json::to_string_pretty(&audit)? + "\n";
    if let Some(p) = json {
        fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
    }
    out.write_all(text.as_bytes())?;
    Ok(if audit.pass { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize, Debug)]
struct ModelDump {
    name: String,
    family: String,
    n: usize,
    d: u32,
    e: u32,
    tau: String,
    dim: usize,
    matrix_size: usize,
    nbar: [usize; 2],
    l: [usize; 2],
    n_range: [usize; 2],
    form_scale: String,
    nu: Vec<String>,
    triples: Vec<TripleDump>,
    basis: Vec<BasisDump>,
}

#[derive(Serialize, Debug)]
struct TripleDump {
    x: usize,
    y: usize,
    h: Vec<String>,
}

#[derive(Serialize, Debug)]
struct BasisDump {
    grade: i8,
    entries: Vec<(usize, usize, String)>,
}

pub fn cmd_model_dump(model: &ModelArgs, format: Format, out: &mut dyn Write) -> Result<i32> {
    let m = resolve_model(model)?;
    let pivot_index = |v: &[minrep_core::rational::Q]| v.iter().position(|c| !num_is_zero(c)).unwrap_or(0);
    let dump = ModelDump {
        name: m.name(),
        family: m.family().tag().into(),
        n: m.rank(),
        d: m.d(),
        e: m.e(),
        tau: format_q(&m.class().tau().to_q()),
        dim: m.dim(),
        matrix_size: m.dim_ambient(),
        nbar: [m.nbar_range().start, m.nbar_range().end],
        l: [m.l_range().start, m.l_range().end],
        n_range: [m.n_range().start, m.n_range().end],
        form_scale: format_q(m.form_scale()),
        nu: m.nu_covector().iter().map(format_q).collect(),
        triples: (0..m.rank())
            .map(|j| TripleDump {
                x: pivot_index(m.x(j)),
                y: pivot_index(m.y(j)),
                h: m.h(j).iter().map(format_q).collect(),
            })
            .collect(),
        basis: m
            .basis()
            .iter()
            .zip(m.grades())
            .map(|(b, &g)| BasisDump {
                grade: g,
                entries: b.entries.iter().map(|(i, j, v)| (*i, *j, format_q(v))).collect(),
            })
            .collect(),
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &dump)?;
            writeln!(out)?;
        }
        _ => {
            writeln!(out, "{} (d = {}, e = {}, τ = {})", dump.name, dump.d, dump.e, dump.tau)?;
            writeln!(out, "dim g = {} in {}×{} matrices", dump.dim, dump.matrix_size, dump.matrix_size)?;
            writeln!(out, "n̄ = {:?}, l = {:?}, n = {:?}", dump.nbar, dump.l, dump.n_range)?;
            for (j, t) in dump.triples.iter().enumerate() {
                writeln!(out, "triple {}: x = e{}, y = e{}", j + 1, t.x, t.y)?;
            }
        }
    }
    Ok(EXIT_PASS)
}

fn num_is_zero(q: &minrep_core::rational::Q) -> bool {
    q == &minrep_core::rational::zero()
}

pub fn cmd_orbit_sample(model: &ModelArgs, count: usize, seed: u64, exact: bool, out: &mut dyn Write) -> Result<i32> {
    let m = resolve_model(model)?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let dim = m.nbar_range().len();
    let mut header = vec!["index".to_string(), "radius".into(), "membership_residual".into()];
    header.extend((0..dim).map(|a| format!("y{a}")));
    w.write_record(&header)?;
    if exact {
        for (i, p) in orbit::sample_orbit_rational(&m, count, seed).iter().enumerate() {
            let res = orbit::membership_residual(&m, &p.y);
            let worst = res.iter().map(minrep_core::rational::to_f64).fold(0.0f64, |a, b| a.max(b.abs()));
            let mut rec = vec![i.to_string(), format!("{}", p.radius()), format!("{worst}")];
            rec.extend(m.restrict(&p.y, -1).iter().map(format_q));
            w.write_record(&rec)?;
        }
    } else {
        let geom = OrbitGeometry::new(&m);
        for (i, p) in orbit::sample_base(&m, count, seed).iter().enumerate() {
            let mut rec = vec![
                i.to_string(),
                format!("{}", p.radius),
                format!("{:e}", geom.membership_residual(&p.y)),
            ];
            rec.extend(p.y.iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(EXIT_PASS)
}

/// Dispatches a parsed command line; errors carry their own exit code.
pub fn run(cli: cli::Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    use cli::{Command, ModelCommand, OrbitCommand, TensorCommand};
    match cli.command {
        Command::Table { format, family } => cmd_table(format, family.as_deref(), out),
        Command::Verify(a) => cmd_verify(&a, out, err),
        Command::Bessel(a) => cmd_bessel(&a, out),
        Command::Tensor {
            command: TensorCommand::Audit { model, k, json },
        } => cmd_tensor_audit(&model, k, json.as_deref(), out),
        Command::Model {
            command: ModelCommand::Dump { model, format },
        } => cmd_model_dump(&model, format, out),
        Command::Orbit {
            command: OrbitCommand::Sample { model, count, seed, exact },
        } => cmd_orbit_sample(&model, count, seed, exact, out),
    }
}

/// Exit code for an error escaping [`run`].
pub fn error_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<UsageError>().is_some() {
        EXIT_USAGE
    } else {
        EXIT_FAIL
    }
}
