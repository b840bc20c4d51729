//! Run configuration: TOML config files, environment defaults, and the
//! validated record the commands consume.
//!
//! Config files carry a `[structure]` table plus optional `[grid]`,
//! `[tolerances]` and `[output]` tables; every value can be overridden by a
//! CLI flag, and flags win. The default grid can also be set through the
//! `PATHINV_GRID` environment variable as `NXxNYxNA`.

use crate::field::GridSpec;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config error: {0}")]
    Invalid(String),
    #[error("bad grid specification `{0}`, expected NXxNYxNA with even counts >= 4")]
    BadGrid(String),
}

/// Environment variable holding the default grid.
pub const GRID_ENV_VAR: &str = "PATHINV_GRID";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    OdeTorus,
    TightTorus,
    Su2,
    Heisenberg,
    PChart,
}

impl StructureKind {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "ode-torus" => Ok(StructureKind::OdeTorus),
            "tight-torus" => Ok(StructureKind::TightTorus),
            "su2" => Ok(StructureKind::Su2),
            "heisenberg" => Ok(StructureKind::Heisenberg),
            "p-chart" => Ok(StructureKind::PChart),
            other => Err(ConfigError::Invalid(format!(
                "unknown structure kind `{other}` (expected ode-torus | tight-torus | su2 | heisenberg | p-chart)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::OdeTorus => "ode-torus",
            StructureKind::TightTorus => "tight-torus",
            StructureKind::Su2 => "su2",
            StructureKind::Heisenberg => "heisenberg",
            StructureKind::PChart => "p-chart",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

/// Tight-torus family parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct TightParams {
    pub n: Option<i32>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub f: Option<f64>,
}

/// SU(2) family parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct Su2Params {
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
}

/// Fully assembled run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kind: StructureKind,
    pub expr: Option<String>,
    pub csv_input: Option<PathBuf>,
    pub tight: TightParams,
    pub su2: Su2Params,
    pub grid: GridSpec,
    pub flat_tolerance: f64,
    pub cross_check: bool,
    pub strict_periodic: bool,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
    /// p-chart sampling box bounds.
    pub p_box: (f64, f64),
}

/// Unvalidated values accumulated from file, environment and flags.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    pub kind: Option<String>,
    pub expr: Option<String>,
    pub csv_input: Option<PathBuf>,
    pub tight: TightParams,
    pub su2: Su2Params,
    pub grid: Option<String>,
    pub flat_tolerance: Option<f64>,
    pub cross_check: Option<bool>,
    pub strict_periodic: Option<bool>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
}

fn parse_grid(text: &str) -> Result<GridSpec, ConfigError> {
    let parts: Vec<_> = text.split('x').collect();
    if parts.len() != 3 {
        return Err(ConfigError::BadGrid(text.to_string()));
    }
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| ConfigError::BadGrid(text.to_string()));
    GridSpec::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
        .map_err(|_| ConfigError::BadGrid(text.to_string()))
}

impl ConfigBuilder {
    /// Read a TOML config file into the builder. Later `merge_flag_*` calls
    /// override these values.
    pub fn from_file(path: &PathBuf) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let value: toml::Value = text.parse()?;
        let mut b = ConfigBuilder::default();
        let as_f64 = |v: &toml::Value, what: &str| -> Result<f64, ConfigError> {
            v.as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or_else(|| ConfigError::Invalid(format!("{what} must be a number")))
        };
        if let Some(structure) = value.get("structure") {
            let t = structure
                .as_table()
                .ok_or_else(|| ConfigError::Invalid("[structure] must be a table".into()))?;
            for (key, v) in t {
                match key.as_str() {
                    "kind" => {
                        b.kind = Some(
                            v.as_str()
                                .ok_or_else(|| {
                                    ConfigError::Invalid("structure.kind must be a string".into())
                                })?
                                .to_string(),
                        )
                    }
                    "expr" => {
                        b.expr = Some(
                            v.as_str()
                                .ok_or_else(|| {
                                    ConfigError::Invalid("structure.expr must be a string".into())
                                })?
                                .to_string(),
                        )
                    }
                    "csv" => {
                        b.csv_input = Some(PathBuf::from(v.as_str().ok_or_else(|| {
                            ConfigError::Invalid("structure.csv must be a string".into())
                        })?))
                    }
                    "n" => {
                        b.tight.n = Some(v.as_integer().ok_or_else(|| {
                            ConfigError::Invalid("structure.n must be an integer".into())
                        })? as i32)
                    }
                    "a" => b.tight.a = Some(as_f64(v, "structure.a")?),
                    "b" => b.tight.b = Some(as_f64(v, "structure.b")?),
                    "c" => b.tight.c = Some(as_f64(v, "structure.c")?),
                    "f" => b.tight.f = Some(as_f64(v, "structure.f")?),
                    "r1" => b.su2.r1 = Some(as_f64(v, "structure.r1")?),
                    "r2" => b.su2.r2 = Some(as_f64(v, "structure.r2")?),
                    "s1" => b.su2.s1 = Some(as_f64(v, "structure.s1")?),
                    "s2" => b.su2.s2 = Some(as_f64(v, "structure.s2")?),
                    "p_min" => b.p_min = Some(as_f64(v, "structure.p_min")?),
                    "p_max" => b.p_max = Some(as_f64(v, "structure.p_max")?),
                    other => {
                        return Err(ConfigError::Invalid(format!(
                            "unknown key structure.{other}"
                        )))
                    }
                }
            }
        }
        if let Some(grid) = value.get("grid") {
            let t = grid
                .as_table()
                .ok_or_else(|| ConfigError::Invalid("[grid] must be a table".into()))?;
            let get = |k: &str| -> Result<Option<usize>, ConfigError> {
                t.get(k)
                    .map(|v| {
                        v.as_integer()
                            .filter(|&i| i > 0)
                            .map(|i| i as usize)
                            .ok_or_else(|| {
                                ConfigError::Invalid(format!("grid.{k} must be a positive integer"))
                            })
                    })
                    .transpose()
            };
            let (nx, ny, na) = (get("nx")?, get("ny")?, get("na")?);
            if nx.is_some() || ny.is_some() || na.is_some() {
                let (nx, ny, na) = (
                    nx.ok_or_else(|| ConfigError::Invalid("grid.nx missing".into()))?,
                    ny.ok_or_else(|| ConfigError::Invalid("grid.ny missing".into()))?,
                    na.ok_or_else(|| ConfigError::Invalid("grid.na missing".into()))?,
                );
                b.grid = Some(format!("{nx}x{ny}x{na}"));
            }
        }
        if let Some(tol) = value.get("tolerances") {
            if let Some(flat) = tol.get("flat") {
                b.flat_tolerance = Some(as_f64(flat, "tolerances.flat")?);
            }
        }
        if let Some(outp) = value.get("output") {
            if let Some(path) = outp.get("path") {
                b.output = Some(PathBuf::from(path.as_str().ok_or_else(|| {
                    ConfigError::Invalid("output.path must be a string".into())
                })?));
            }
            if let Some(fm) = outp.get("format") {
                b.format = Some(
                    fm.as_str()
                        .ok_or_else(|| ConfigError::Invalid("output.format must be a string".into()))?
                        .to_string(),
                );
            }
            if let Some(cc) = outp.get("cross_check") {
                b.cross_check = Some(cc.as_bool().ok_or_else(|| {
                    ConfigError::Invalid("output.cross_check must be a boolean".into())
                })?);
            }
        }
        Ok(b)
    }

    /// Finalize, applying the `PATHINV_GRID` environment default and the
    /// built-in defaults.
    pub fn build(self) -> Result<RunConfig, ConfigError> {
        let kind = StructureKind::parse(
            self.kind
                .as_deref()
                .ok_or_else(|| ConfigError::Invalid("structure kind is required".into()))?,
        )?;
        let grid = match self.grid {
            Some(text) => parse_grid(&text)?,
            None => match std::env::var(GRID_ENV_VAR) {
                Ok(text) => parse_grid(&text)?,
                Err(_) => GridSpec::default_grid(),
            },
        };
        let format = match self.format.as_deref() {
            None | Some("json") => ReportFormat::Json,
            Some("csv") => ReportFormat::Csv,
            Some(other) => {
                return Err(ConfigError::Invalid(format!(
                    "unknown report format `{other}` (expected json | csv)"
                )))
            }
        };
        match kind {
            StructureKind::OdeTorus | StructureKind::PChart => {
                if self.expr.is_none() && self.csv_input.is_none() {
                    return Err(ConfigError::Invalid(format!(
                        "{} requires an expression or a CSV sample grid",
                        kind.name()
                    )));
                }
            }
            StructureKind::TightTorus => {
                let t = &self.tight;
                if t.n.is_none() || t.a.is_none() || t.b.is_none() || t.c.is_none() || t.f.is_none()
                {
                    return Err(ConfigError::Invalid(
                        "tight-torus requires n, a, b, c, f".into(),
                    ));
                }
            }
            StructureKind::Su2 => {
                let u = &self.su2;
                if u.r1.is_none() || u.r2.is_none() || u.s1.is_none() || u.s2.is_none() {
                    return Err(ConfigError::Invalid("su2 requires r1, r2, s1, s2".into()));
                }
            }
            StructureKind::Heisenberg => {}
        }
        Ok(RunConfig {
            kind,
            expr: self.expr,
            csv_input: self.csv_input,
            tight: self.tight,
            su2: self.su2,
            grid,
            flat_tolerance: self.flat_tolerance.unwrap_or(1e-9),
            cross_check: self.cross_check.unwrap_or(false),
            strict_periodic: self.strict_periodic.unwrap_or(false),
            output: self.output,
            format,
            p_box: (self.p_min.unwrap_or(-4.0), self.p_max.unwrap_or(4.0)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_structure_table() {
        let b = ConfigBuilder::from_toml_str(
            r#"
[structure]
kind = "tight-torus"
n = 2
a = 1.0
b = 1.0
c = 0.0
f = 1.0

[grid]
nx = 16
ny = 16
na = 32

[tolerances]
flat = 1e-8
"#,
        )
        .unwrap();
        let cfg = b.build().unwrap();
        assert_eq!(cfg.kind, StructureKind::TightTorus);
        assert_eq!(cfg.tight.n, Some(2));
        assert_eq!(cfg.grid, GridSpec::new(16, 16, 32).unwrap());
        assert_eq!(cfg.flat_tolerance, 1e-8);
    }

    #[test]
    fn missing_required_fields_rejected() {
        let b = ConfigBuilder::from_toml_str("[structure]\nkind = \"su2\"\n").unwrap();
        assert!(matches!(b.build(), Err(ConfigError::Invalid(_))));
        let b = ConfigBuilder::from_toml_str("[structure]\nkind = \"ode-torus\"\n").unwrap();
        assert!(b.build().is_err());
    }

    #[test]
    fn grid_string_validation() {
        assert!(parse_grid("64x64x128").is_ok());
        assert!(parse_grid("3x4x8").is_err());
        assert!(parse_grid("64x64").is_err());
        assert!(parse_grid("axbxc").is_err());
    }

    #[test]
    fn unknown_kind_rejected() {
        let b = ConfigBuilder::from_toml_str("[structure]\nkind = \"nope\"\n").unwrap();
        assert!(b.build().is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut b = ConfigBuilder::from_toml_str(
            "[structure]\nkind = \"ode-torus\"\nexpr = \"sin(alpha)\"\n[grid]\nnx = 8\nny = 8\nna = 16\n",
        )
        .unwrap();
        b.grid = Some("16x16x32".into());
        let cfg = b.build().unwrap();
        assert_eq!(cfg.grid, GridSpec::new(16, 16, 32).unwrap());
    }
}
