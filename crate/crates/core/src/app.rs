//! Command implementations behind the `pathinv` binary.
//!
//! Every command returns a deterministic JSON report plus a process exit
//! code. Exit codes follow the convention: 0 success (or "flat" verdict),
//! 1 negative verdict, 2 configuration or validation failure, 3 numerical
//! failure.

use crate::charts::{self, PBox, PChartOde};
use crate::config::{ConfigError, ReportFormat, RunConfig, StructureKind};
use crate::expr::{self, Chart, ExprError, PeriodicityCheck};
use crate::families::{heisenberg_model, FamilyError, FamilyReport, Su2Structure, TightTorusStructure};
use crate::field::{FieldError, PeriodicScalarField};
use crate::ode::{self, OdeTorusStructure};
use crate::oracle;
use crate::report::{resolved_constants, InvariantReport, Json, SCHEMA_VERSION};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("expression error: {0}")]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Ode(#[from] ode::OdeError),
    #[error(transparent)]
    Chart(#[from] charts::ChartError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
}

impl AppError {
    /// 2 for configuration/validation problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Validation(_) | AppError::Io { .. } => 2,
            AppError::Expr(e) => match e {
                ExprError::DivisionByZero { .. } | ExprError::NonFinite { .. } => 3,
                _ => 2,
            },
            AppError::Family(_) => 2,
            AppError::Field(e) => match e {
                FieldError::UnderResolved { .. } | FieldError::NonFinite(_) => 3,
                _ => 2,
            },
            AppError::Ode(e) => match e {
                ode::OdeError::Field(FieldError::UnderResolved { .. })
                | ode::OdeError::Field(FieldError::NonFinite(_)) => 3,
                _ => 2,
            },
            AppError::Chart(_) => 3,
        }
    }
}

/// Report plus suggested process exit code.
#[derive(Debug)]
pub struct CmdOutput {
    pub report: Json,
    pub exit_code: i32,
}

fn grid_json(cfg: &RunConfig) -> Json {
    Json::obj([
        ("na", Json::Int(cfg.grid.na as i64)),
        ("nx", Json::Int(cfg.grid.nx as i64)),
        ("ny", Json::Int(cfg.grid.ny as i64)),
    ])
}

/// Build the torus structure from the configured expression or CSV grid.
fn load_structure(cfg: &RunConfig) -> Result<(OdeTorusStructure, Vec<String>), AppError> {
    if let Some(text) = &cfg.expr {
        let ast = expr::parse(text, Chart::Torus)?;
        let mode = if cfg.strict_periodic {
            PeriodicityCheck::Strict
        } else {
            PeriodicityCheck::Warn
        };
        let eval = expr::evaluate_on_grid(&ast, cfg.grid, mode)?;
        Ok((OdeTorusStructure::new(eval.field), eval.warnings))
    } else if let Some(path) = &cfg.csv_input {
        let text = std::fs::read_to_string(path)
            .map_err(|source| AppError::Io { path: path.clone(), source })?;
        let field = PeriodicScalarField::from_csv(&text)?;
        Ok((OdeTorusStructure::new(field), Vec::new()))
    } else {
        Err(AppError::Validation("no structure function given".into()))
    }
}

fn family_report_json(kind: StructureKind, rep: &FamilyReport, extra: Vec<(&'static str, Json)>) -> Json {
    let mut pairs = vec![
        ("schema", Json::Int(SCHEMA_VERSION)),
        ("kind", Json::Str(kind.name().into())),
        ("q1", Json::Num(rep.q1)),
        ("q2", Json::Num(rep.q2)),
        ("mu", Json::Num(rep.mu_analytic)),
        ("mu_numeric", Json::Num(rep.mu_numeric)),
        ("mu_difference", Json::Num(rep.mu_numeric - rep.mu_analytic)),
        ("flat", Json::Bool(rep.flat)),
        ("resolved_constants", resolved_constants()),
    ];
    pairs.extend(extra);
    Json::obj(pairs)
}

fn family_for(cfg: &RunConfig) -> Result<(FamilyReport, Vec<(&'static str, Json)>), AppError> {
    match cfg.kind {
        StructureKind::TightTorus => {
            let t = cfg.tight;
            let s = TightTorusStructure::new(
                t.n.unwrap(),
                t.a.unwrap(),
                t.b.unwrap(),
                t.c.unwrap(),
                t.f.unwrap(),
            )?;
            let rep = s.invariants();
            let trans = s
                .transgression_mu()
                .map_err(|e| AppError::Validation(e.to_string()))?;
            Ok((
                rep,
                vec![
                    (
                        "parameters",
                        Json::obj([
                            ("a", Json::Num(s.a)),
                            ("b", Json::Num(s.b)),
                            ("c", Json::Num(s.c)),
                            ("f", Json::Num(s.f)),
                            ("n", Json::Int(s.n as i64)),
                        ]),
                    ),
                    ("mu_transgression", Json::Num(trans)),
                ],
            ))
        }
        StructureKind::Su2 => {
            let u = cfg.su2;
            let s = Su2Structure::new(u.r1.unwrap(), u.r2.unwrap(), u.s1.unwrap(), u.s2.unwrap())?;
            let rep = s.invariants();
            Ok((
                rep,
                vec![(
                    "parameters",
                    Json::obj([
                        ("r1", Json::Num(s.r1)),
                        ("r2", Json::Num(s.r2)),
                        ("s1", Json::Num(s.s1)),
                        ("s2", Json::Num(s.s2)),
                        ("x", Json::Num(s.x())),
                    ]),
                )],
            ))
        }
        StructureKind::Heisenberg => Ok((heisenberg_model(), vec![])),
        _ => Err(AppError::Validation(format!(
            "{} is not a closed-form family",
            cfg.kind.name()
        ))),
    }
}

/// `mu` command: the invariant by the closed-form route, with the
/// transgression cross-check when requested.
pub fn cmd_mu(cfg: &RunConfig) -> Result<CmdOutput, AppError> {
    let report = match cfg.kind {
        StructureKind::OdeTorus => {
            let (s, warnings) = load_structure(cfg)?;
            let mut rep = InvariantReport {
                kind: "ode-torus",
                grid: Some(cfg.grid),
                mu: Some(ode::mu(&s)?),
                warnings: Some(warnings),
                with_constants: true,
                ..Default::default()
            };
            if cfg.cross_check {
                rep.mu_transgression = Some(ode::mu_via_transgression(&s)?);
            }
            rep.to_json()
        }
        StructureKind::PChart => {
            return Err(AppError::Validation(
                "the global invariant lives on the torus model; p-chart structures expose q1/q2 via `convert-chart`"
                    .into(),
            ))
        }
        _ => {
            let (rep, extra) = family_for(cfg)?;
            family_report_json(cfg.kind, &rep, extra)
        }
    };
    Ok(CmdOutput { report, exit_code: 0 })
}

/// `curvature` command: CSV field dumps plus a norm summary.
pub fn cmd_curvature(cfg: &RunConfig, out_dir: &Path) -> Result<CmdOutput, AppError> {
    if cfg.kind != StructureKind::OdeTorus {
        return Err(AppError::Validation(
            "curvature field dumps are defined for ode-torus structures".into(),
        ));
    }
    let (s, warnings) = load_structure(cfg)?;
    let bundle = ode::curvature_chain(&s)?;
    let q1 = ode::q1(&s)?;
    let q2 = ode::q2(&s)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|source| AppError::Io { path: out_dir.to_path_buf(), source })?;
    let mut fields = std::collections::BTreeMap::new();
    for (name, field) in [
        ("q1", &q1),
        ("q2", &q2),
        ("s", &bundle.s),
        ("c", &bundle.c),
        ("d", &bundle.d),
        ("tau21", &bundle.tau21),
    ] {
        let path = out_dir.join(format!("{name}.csv"));
        std::fs::write(&path, field.to_csv())
            .map_err(|source| AppError::Io { path: path.clone(), source })?;
        fields.insert(
            name.to_string(),
            Json::obj([
                ("l2", Json::Num(field.l2_norm())),
                ("max", Json::Num(field.max_abs())),
                ("path", Json::Str(path.display().to_string())),
            ]),
        );
    }
    let report = Json::obj([
        ("schema", Json::Int(SCHEMA_VERSION)),
        ("kind", Json::Str("ode-torus".into())),
        ("grid", grid_json(cfg)),
        ("fields", Json::Obj(fields)),
        (
            "warnings",
            Json::Arr(warnings.into_iter().map(Json::Str).collect()),
        ),
    ]);
    Ok(CmdOutput { report, exit_code: 0 })
}

/// `flat-check` command: exit 0 when flat, 1 when not.
pub fn cmd_flat_check(cfg: &RunConfig) -> Result<CmdOutput, AppError> {
    let (report, flat) = match cfg.kind {
        StructureKind::OdeTorus => {
            let (s, warnings) = load_structure(cfg)?;
            let rep = ode::flatness_report(&s, cfg.flat_tolerance)?;
            let typed = InvariantReport {
                kind: "ode-torus",
                grid: Some(cfg.grid),
                mu: Some(rep.mu),
                max_q1: Some(rep.max_q1),
                max_q2: Some(rep.max_q2),
                kernel_residual: Some(rep.kernel_residual),
                q1_flat: Some(rep.q1_flat),
                q2_flat: Some(rep.q2_flat),
                flat: Some(rep.flat),
                mu_zero: Some(rep.mu_zero),
                tolerance: Some(rep.tolerance),
                warnings: Some(warnings),
                ..Default::default()
            };
            (typed.to_json(), rep.flat)
        }
        StructureKind::PChart => {
            return Err(AppError::Validation(
                "use `convert-chart` for p-chart flatness loci".into(),
            ))
        }
        _ => {
            let (rep, extra) = family_for(cfg)?;
            let flat = rep.flat;
            (family_report_json(cfg.kind, &rep, extra), flat)
        }
    };
    Ok(CmdOutput { report, exit_code: if flat { 0 } else { 1 } })
}

/// `family` command: closed-form family report.
pub fn cmd_family(cfg: &RunConfig) -> Result<CmdOutput, AppError> {
    let (rep, extra) = family_for(cfg)?;
    Ok(CmdOutput { report: family_report_json(cfg.kind, &rep, extra), exit_code: 0 })
}

/// `convert-chart` command: the p-chart invariants on the sampling box.
///
/// With `kind = ode-torus` the torus structure function is converted through
/// `G(x, y, p) = F(x, y, arctan p)(1+p^2)^{3/2}`; with `kind = p-chart` the
/// expression is read directly as `G(x, y, p)`.
pub fn cmd_convert_chart(cfg: &RunConfig, csv_out: Option<&Path>) -> Result<CmdOutput, AppError> {
    let boxx = PBox {
        p_min: cfg.p_box.0,
        p_max: cfg.p_box.1,
        np: 65,
        nx: 8,
        ny: 8,
    };
    if cfg.kind == StructureKind::PChart {
        let src = cfg
            .expr
            .as_deref()
            .ok_or_else(|| AppError::Validation("p-chart requires an expression".into()))?;
        let ast = expr::parse(src, Chart::PChart)?;
        let chart = PChartOde::from_expr(ast, boxx);
        let max_q1 = charts::max_abs_on_box(&chart, charts::q1_p)?;
        let max_q2 = charts::max_abs_on_box(&chart, charts::q2_p)?;
        let report = Json::obj([
            ("schema", Json::Int(SCHEMA_VERSION)),
            ("kind", Json::Str("p-chart".into())),
            ("p_box", Json::Arr(vec![Json::Num(boxx.p_min), Json::Num(boxx.p_max)])),
            ("max_q1_on_box", Json::Num(max_q1)),
            ("max_q2_on_box", Json::Num(max_q2)),
            ("q1_flat_on_box", Json::Bool(max_q1 <= 1e-6)),
            ("warnings", Json::Arr(vec![])),
        ]);
        return Ok(CmdOutput { report, exit_code: 0 });
    }
    let (s, warnings) = load_structure(cfg)?;
    let chart = charts::alpha_to_p(s.f(), boxx);
    let max_q1 = charts::max_abs_on_box(&chart, charts::q1_p)?;
    let max_q2 = charts::max_abs_on_box(&chart, charts::q2_p)?;
    if let Some(path) = csv_out {
        let mut text = String::from("x,y,p,g\n");
        let spec = s.spec();
        let step_x = (spec.nx / boxx.nx).max(1);
        let step_y = (spec.ny / boxx.ny).max(1);
        for &p in &boxx.p_nodes() {
            for j in (0..spec.ny).step_by(step_y) {
                for i in (0..spec.nx).step_by(step_x) {
                    let (x, y) = (spec.x(i), spec.y(j));
                    let g = match &chart {
                        PChartOde::AlphaField(a) => a.eval(x, y, p)?,
                        _ => unreachable!("alpha_to_p returns a field chart"),
                    };
                    use std::fmt::Write as _;
                    let _ = writeln!(text, "{x:.17e},{y:.17e},{p:.17e},{g:.17e}");
                }
            }
        }
        std::fs::write(path, text)
            .map_err(|source| AppError::Io { path: path.to_path_buf(), source })?;
    }
    let report = Json::obj([
        ("schema", Json::Int(SCHEMA_VERSION)),
        ("kind", Json::Str("p-chart".into())),
        ("p_box", Json::Arr(vec![Json::Num(boxx.p_min), Json::Num(boxx.p_max)])),
        ("max_q1_on_box", Json::Num(max_q1)),
        ("max_q2_on_box", Json::Num(max_q2)),
        ("q1_flat_on_box", Json::Bool(max_q1 <= 1e-6)),
        (
            "warnings",
            Json::Arr(warnings.into_iter().map(Json::Str).collect()),
        ),
    ]);
    Ok(CmdOutput { report, exit_code: 0 })
}

/// `selftest` command: the randomized oracle suite; nonzero exit on any
/// failure.
pub fn cmd_selftest(seed: u64, size: usize) -> CmdOutput {
    let summary = oracle::property_harness(seed, size);
    let properties: Vec<Json> = summary
        .outcomes
        .iter()
        .map(|o| {
            Json::obj([
                ("detail", Json::Str(o.detail.clone())),
                ("name", Json::Str(o.name.into())),
                ("passed", Json::Bool(o.passed)),
                ("tolerance", Json::Num(o.tolerance)),
                ("worst", Json::Num(o.worst)),
            ])
        })
        .collect();
    let all = summary.all_passed();
    let report = Json::obj([
        ("schema", Json::Int(SCHEMA_VERSION)),
        ("all_passed", Json::Bool(all)),
        ("corpus_size", Json::Int(summary.corpus_size as i64)),
        ("properties", Json::Arr(properties)),
        ("seed", Json::Int(summary.seed as i64)),
    ]);
    CmdOutput { report, exit_code: if all { 0 } else { 1 } }
}

/// Write a report to the configured output path, or return it for stdout.
pub fn emit(cfg_output: Option<&Path>, format: ReportFormat, out: &CmdOutput) -> Result<String, AppError> {
    let text = match format {
        ReportFormat::Json => out.report.render(),
        ReportFormat::Csv => report_to_csv(&out.report),
    };
    if let Some(path) = cfg_output {
        std::fs::write(path, &text)
            .map_err(|source| AppError::Io { path: path.to_path_buf(), source })?;
    }
    Ok(text)
}

/// Flatten a report into `key,value` CSV lines (scalar leaves only).
fn report_to_csv(report: &Json) -> String {
    let mut rows = Vec::new();
    flatten("", report, &mut rows);
    let mut text = String::from("key,value\n");
    for (k, v) in rows {
        text.push_str(&format!("{k},{v}\n"));
    }
    text
}

fn flatten(prefix: &str, value: &Json, rows: &mut Vec<(String, String)>) {
    match value {
        Json::Obj(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, rows);
            }
        }
        Json::Arr(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        Json::Null => rows.push((prefix.to_string(), "null".into())),
        Json::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Json::Int(i) => rows.push((prefix.to_string(), i.to_string())),
        Json::Num(v) => rows.push((prefix.to_string(), format!("{v:.16e}"))),
        Json::Str(s) => rows.push((prefix.to_string(), s.replace(',', ";"))),
    }
}
