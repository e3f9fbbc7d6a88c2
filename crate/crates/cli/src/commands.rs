use hhl_lab_core::disorder::{self, DisorderConfig, DISORDER_QUANTITIES};
use hhl_lab_core::hhl::{self, LinearSystem, SpectralData, Stage};
use hhl_lab_core::resources::{self, ResourceReport};
use hhl_lab_core::{CVector, Error as CoreError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{self, Axis, RunConfig};
use crate::table::{format_number, number, Header, Table};
use crate::CliError;

/// Threshold below which a GGM is reported as vanishing.
pub const ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    SweepB,
    SweepKappa,
    Disorder,
    MicroGgm,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::SweepB => "sweep-b",
            Command::SweepKappa => "sweep-kappa",
            Command::Disorder => "disorder",
            Command::MicroGgm => "micro-ggm",
        }
    }
}

/// Result of a command, fully built before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(Table),
    Report { text: String, json: Value },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Output {
    /// Tables default to CSV, reports to text.
    pub fn render(&self, format: Option<Format>, header: &Header) -> String {
        match (self, format) {
            (Output::Table(t), Some(Format::Json)) => pretty(&t.to_json(header)),
            (Output::Table(t), _) => t.to_csv(header),
            (Output::Report { json, .. }, Some(Format::Json)) => {
                let mut doc = json.clone();
                doc["version"] = json!(header.version);
                doc["seed"] = json!(header.seed);
                doc["config"] = json!(header.config);
                pretty(&doc)
            }
            (Output::Report { text, .. }, _) => text.clone(),
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// The document the config hash is taken over.
pub fn provenance(command: Command, cfg: &RunConfig) -> Value {
    json!({ "command": command.name(), "config": cfg })
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match command {
        Command::Solve => solve(cfg),
        Command::SweepB => sweep_b(cfg).map(Output::Table),
        Command::SweepKappa => sweep_kappa(cfg).map(Output::Table),
        Command::Disorder => disorder_sweep(cfg).map(Output::Table),
        Command::MicroGgm => micro_ggm(cfg),
    }
}

fn complex_text(z: Complex64) -> String {
    if z.im == 0.0 {
        format_number(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{}{}i", format_number(z.re), sign, format_number(z.im.abs()))
    }
}

fn vector_text(v: &CVector) -> String {
    let parts: Vec<String> = v.iter().map(|&z| complex_text(z)).collect();
    format!("[{}]", parts.join(", "))
}

fn vector_json(v: &CVector) -> Value {
    Value::Array(
        v.iter()
            .map(|z| if z.im == 0.0 { number(z.re) } else { json!([number(z.re), number(z.im)]) })
            .collect(),
    )
}

fn report_json(r: &ResourceReport) -> Value {
    Value::Object(
        ResourceReport::SCALAR_NAMES
            .iter()
            .zip(r.scalars())
            .map(|(n, v)| (n.to_string(), number(v)))
            .collect(),
    )
}

pub fn solve(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = cfg.spectral()?;
    let stage = cfg.stage()?;
    let sol = hhl::solution(&spec);
    let report = resources::report(&spec, stage)?;
    let kappa = hhl::condition_number(&spec);

    let mut text = String::new();
    let eigs: Vec<String> = spec.lambdas.iter().map(|&l| format_number(l)).collect();
    text.push_str(&format!(
        "system: N = {}, C = {}, n = {}\n",
        spec.dim(),
        format_number(spec.c),
        spec.n
    ));
    text.push_str(&format!("eigenvalues: {}\n", eigs.join(", ")));
    text.push_str(&format!("x = {}\n", vector_text(&sol.x_classical)));
    text.push_str(&format!("psi_x = {}\n", vector_text(&sol.x_state)));
    text.push_str(&format!("sp = {}\n", format_number(sol.sp)));
    text.push_str(&format!("kappa = {}\n", format_number(kappa)));
    text.push_str(&format!("resources at {stage}:\n"));
    for (name, v) in ResourceReport::SCALAR_NAMES.iter().zip(report.scalars()) {
        if matches!(*name, "sp" | "kappa" | "trivial") {
            continue;
        }
        text.push_str(&format!("  {name} = {}\n", format_number(v)));
    }
    if report.trivial {
        text.push_str("trivial instance: b lies in a single eigenspace\n");
    }

    let json = json!({
        "eigenvalues": spec.lambdas.iter().map(|&l| number(l)).collect::<Vec<_>>(),
        "c": number(spec.c),
        "n": spec.n,
        "x": vector_json(&sol.x_classical),
        "psi_x": vector_json(&sol.x_state),
        "sp": number(sol.sp),
        "kappa": number(kappa),
        "stage": stage.label(),
        "report": report_json(&report),
        "trivial": report.trivial,
    });
    Ok(Output::Report { text, json })
}

fn unit_axes(axes: &[Axis]) -> Result<(), CliError> {
    for a in axes {
        if a.min < 0.0 || a.max > 1.0 {
            return Err(CoreError::RangeError(format!(
                "squared components must lie in [0, 1], got grid {}:{}",
                a.min, a.max
            ))
            .into());
        }
    }
    Ok(())
}

fn report_row(cfg: &RunConfig, sys: Result<LinearSystem, CoreError>, stage: Stage) -> Result<Vec<f64>, CliError> {
    let spec = cfg.decompose(&sys?)?;
    Ok(resources::report(&spec, stage)?.scalars().to_vec())
}

fn sqrt_vector(squares: &[f64]) -> CVector {
    hhl_lab_core::tensor::real_vector(&squares.iter().map(|s| s.max(0.0).sqrt()).collect::<Vec<_>>())
}

/// Resource report over a grid of squared right-hand-side components:
/// `b₀²` for a 2-dimensional system, `(b₀², b₁²)` for a 3-dimensional one.
/// Components are taken nonnegative; simplex points with `b₂² < 0` are skipped.
pub fn sweep_b(cfg: &RunConfig) -> Result<Table, CliError> {
    let a = cfg.matrix()?;
    let dim = a.nrows();
    let stage = cfg.stage()?;
    let mut axes = cfg.axes()?;
    if axes.is_empty() {
        let default = if dim == 3 { "0:1:41" } else { "0:1:101" };
        axes = vec![Axis::parse(default)?; dim.saturating_sub(1).max(1)];
    }
    unit_axes(&axes)?;
    let points: Vec<Vec<f64>> = match (dim, axes.len()) {
        (2, 1) => axes[0].points().into_iter().map(|s| vec![s, 1.0 - s]).collect(),
        (3, 2) => {
            let mut pts = Vec::new();
            for s0 in axes[0].points() {
                for s1 in axes[1].points() {
                    let s2 = 1.0 - s0 - s1;
                    if s2 >= -1e-12 {
                        pts.push(vec![s0, s1, s2.max(0.0)]);
                    }
                }
            }
            pts
        }
        (2 | 3, k) => {
            return Err(CliError::validation(format!(
                "a {dim}-dimensional system takes {} grid axes, got {k}",
                dim - 1
            )))
        }
        _ => {
            return Err(CoreError::ShapeError(format!(
                "sweep-b needs a 2- or 3-dimensional system, got N = {dim}"
            ))
            .into())
        }
    };
    let axis_names = ["b0_sq", "b1_sq"];
    let mut columns: Vec<String> = axis_names[..dim - 1].iter().map(|s| s.to_string()).collect();
    columns.extend(ResourceReport::SCALAR_NAMES.iter().map(|s| s.to_string()));
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| {
            let sys = LinearSystem::new(a.clone(), sqrt_vector(p));
            let mut row = p[..dim - 1].to_vec();
            row.extend(report_row(cfg, sys, stage)?);
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(Table { columns, rows })
}

/// Resource report along the 2-dimensional family with eigenvalues `1` and `κ`.
pub fn sweep_kappa(cfg: &RunConfig) -> Result<Table, CliError> {
    if cfg.matrix.is_some() || cfg.eigenvalues.is_some() || cfg.system.is_some() {
        return Err(CliError::validation("sweep-kappa builds its own systems; drop --system"));
    }
    let stage = cfg.stage()?;
    let b = match cfg.b {
        Some(_) => cfg.rhs(2)?,
        None => config::complete_2d(0.3)?,
    };
    let axes = cfg.axes()?;
    let axis = match axes.as_slice() {
        [] => Axis::parse("2:10:50")?,
        [a] => *a,
        _ => return Err(CliError::validation("sweep-kappa takes one grid axis")),
    };
    let mut columns = vec!["kappa".to_string()];
    columns.extend(
        ResourceReport::SCALAR_NAMES
            .iter()
            .filter(|&&n| n != "kappa")
            .map(|s| s.to_string()),
    );
    let kappa_at = ResourceReport::SCALAR_NAMES.iter().position(|&n| n == "kappa").unwrap();
    let rows: Vec<Vec<f64>> = axis
        .points()
        .par_iter()
        .map(|&kappa| {
            let sys = hhl::kappa_family(kappa, b.clone());
            let mut scalars = report_row(cfg, sys, stage)?;
            scalars.remove(kappa_at);
            let mut row = vec![kappa];
            row.extend(scalars);
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(Table { columns, rows })
}

/// Quenched averages under Gaussian rotation errors, one row per
/// `(b₀², σ)`. Systems of other dimension are evaluated at their configured `b`.
pub fn disorder_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let a = cfg.matrix()?;
    let dim = a.nrows();
    let sigmas = cfg.sigma.clone().unwrap_or_else(|| vec![0.01, 0.05, 0.1]);
    if sigmas.is_empty() {
        return Err(CliError::validation("empty σ list"));
    }
    let base = DisorderConfig {
        sigma: 0.0,
        mean: cfg.mean.unwrap_or(0.0),
        realizations: cfg.realizations.unwrap_or(10_000),
        seed: cfg.seed(),
    };
    let systems: Vec<(f64, LinearSystem)> = if dim == 2 {
        let axes = cfg.axes()?;
        let axis = match axes.as_slice() {
            [] => Axis::parse("0:1:21")?,
            [a] => *a,
            _ => return Err(CliError::validation("disorder takes one grid axis")),
        };
        unit_axes(&[axis])?;
        axis.points()
            .into_iter()
            .map(|s| Ok((s, LinearSystem::new(a.clone(), sqrt_vector(&[s, 1.0 - s]))?)))
            .collect::<Result<_, CliError>>()?
    } else {
        if cfg.grid.is_some() {
            return Err(CliError::validation("a b₀² grid needs a 2-dimensional system"));
        }
        let sys = LinearSystem::normalized(a, cfg.rhs(dim)?)?;
        vec![(sys.b()[0].norm_sqr(), sys)]
    };

    let mut columns = vec!["b0_sq".to_string(), "sigma".to_string()];
    columns.extend(DISORDER_QUANTITIES.iter().map(|q| format!("clean_{q}")));
    for q in DISORDER_QUANTITIES {
        columns.push(format!("mean_{q}"));
        columns.push(format!("stderr_{q}"));
    }
    columns.push("skipped".into());
    columns.push("clamped".into());

    let mut table = Table::new(columns);
    for (s, sys) in &systems {
        let spec = cfg.decompose(sys)?;
        let zeros = vec![0.0; spec.lambdas.len()];
        let clean = disorder::disorder_quantities(&spec, &zeros)?;
        for &sigma in &sigmas {
            let dc = DisorderConfig { sigma, ..base };
            dc.validate()?;
            let run = disorder::quenched_run(
                &DISORDER_QUANTITIES,
                disorder::disorder_quantities,
                &spec,
                &dc,
                false,
            )?;
            let mut row = vec![*s, sigma];
            row.extend(&clean);
            for q in DISORDER_QUANTITIES {
                let stat = run.get(q).expect("named quantity");
                row.push(stat.mean);
                row.push(stat.stderr);
            }
            row.push(run.skipped as f64);
            row.push(run.clamped as f64);
            table.rows.push(row);
        }
    }
    Ok(table)
}

/// Factorization witness for a vanishing micro GGM.
pub fn witness(spec: &SpectralData) -> Result<Option<String>, CliError> {
    if spec.is_trivial() {
        return Ok(Some("trivial instance".into()));
    }
    let bits = resources::common_bits(spec)?;
    if bits.is_empty() {
        return Ok(None);
    }
    let parts: Vec<String> = bits.iter().map(|(b, v)| format!("bit {b} (value {v})")).collect();
    let joined = match parts.split_last() {
        Some((last, rest)) if !rest.is_empty() => format!("{} and {last}", rest.join(", ")),
        _ => parts.join(""),
    };
    Ok(Some(format!("{joined} common")))
}

pub fn micro_ggm(cfg: &RunConfig) -> Result<Output, CliError> {
    let sys = cfg.linear_system()?;
    let spec = hhl::spectral_decompose(&sys, cfg.circuit_constant()?, cfg.n)?;
    let value = resources::micro_ggm(&spec)?;
    let witness = if value < ZERO_TOL { witness(&spec)? } else { None };
    let scaled = spec.scaled.clone().unwrap_or_default();
    let mut text = format!("micro_ggm = {}\n", format_number(value));
    text.push_str(&format!("register: n = {}, encoded eigenvalues {:?}\n", spec.n, scaled));
    match &witness {
        Some(w) => text.push_str(&format!("witness: {w}\n")),
        None if value < ZERO_TOL => text.push_str("witness: none found\n"),
        None => {}
    }
    let json = json!({
        "micro_ggm": number(value),
        "n": spec.n,
        "encoded": scaled,
        "witness": witness,
    });
    Ok(Output::Report { text, json })
}
