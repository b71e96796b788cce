//! Scenario descriptions and their TOML form.

use std::path::{Path, PathBuf};

use geofreq::circuits::{
    build_rc, build_rlc, build_third_order, build_tunnel_diode, DiodeCharacteristic, RcParams,
    RlcParams, ThirdOrderParams, TunnelDiodeParams, DEFAULT_DIODE,
};
use geofreq::dynsys::{SystemModel, DEFAULT_STEP};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Default tail window as a fraction of the horizon.
pub const DEFAULT_TAIL_WINDOW: f64 = 0.2;
/// Default absolute tolerance of the `modal-identity` check.
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub system: SystemSpec,
    pub initial: Initial,
    pub integration: Integration,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub output: OutputOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    Rc {
        r: f64,
        c: f64,
        v_dc: f64,
    },
    /// State `(i, v)`.
    Rlc {
        r: f64,
        l: f64,
        c: f64,
        v_dc: f64,
    },
    ThirdOrder {
        r1: f64,
        l: f64,
        c1: f64,
        r2: f64,
        c2: f64,
        v_dc: f64,
    },
    /// State `(v_C, i_L)`. `diode` holds the polynomial coefficients
    /// `[a1, ..., an]` of `i(v) = Σ a_k v^k`.
    TunnelDiode {
        l: f64,
        c: f64,
        r: f64,
        v_dc: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diode: Option<Vec<f64>>,
    },
    /// `x' = A x + b` with `A` given row by row.
    Linear {
        a: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integration {
    pub t_end: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    #[default]
    None,
    /// Every modal block frequency equals its eigenvalue at every valid
    /// sample (affine systems).
    ModalIdentity,
    /// The tail of `rho` and `|omega|` matches the forecast from the
    /// Jacobian at the attained equilibrium.
    Asymptote,
    /// A periodic orbit is detected and `∮ rho dt` vanishes over it.
    LimitCycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominantKind {
    Real,
    Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Append modal block columns for affine systems.
    #[serde(default = "default_true")]
    pub modal: bool,
    #[serde(default = "default_tail_window")]
    pub tail_window: f64,
    #[serde(default)]
    pub expect: Expectation,
    /// Kind of the dominant mode the `asymptote` check must find.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominant: Option<DominantKind>,
    /// Relative tolerance of the tail means (or of every sample when
    /// `uniform`). Defaults: 0.01 for a real forecast, 0.05 for a pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Bound on `|omega|` when it should vanish. Default 1e-3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    /// Default 0 for a real forecast, 2 for a pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_sign_changes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_tol: Option<f64>,
}

fn default_true() -> bool {
    true
}

fn default_tail_window() -> f64 {
    DEFAULT_TAIL_WINDOW
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            modal: true,
            tail_window: DEFAULT_TAIL_WINDOW,
            expect: Expectation::None,
            dominant: None,
            rel_tol: None,
            abs_tol: None,
            min_sign_changes: None,
            uniform: None,
            identity_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Write every `stride`-th sample.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    1
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            dir: None,
            stride: 1,
        }
    }
}

impl SystemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Rc { .. } => "rc",
            Self::Rlc { .. } => "rlc",
            Self::ThirdOrder { .. } => "third-order",
            Self::TunnelDiode { .. } => "tunnel-diode",
            Self::Linear { .. } => "linear",
        }
    }

    pub fn build(&self) -> Result<SystemModel> {
        let model = match self {
            Self::Rc { r, c, v_dc } => build_rc(&RcParams {
                r: *r,
                c: *c,
                v_dc: *v_dc,
            })?,
            Self::Rlc { r, l, c, v_dc } => build_rlc(&RlcParams {
                r: *r,
                l: *l,
                c: *c,
                v_dc: *v_dc,
            })?,
            Self::ThirdOrder {
                r1,
                l,
                c1,
                r2,
                c2,
                v_dc,
            } => build_third_order(&ThirdOrderParams {
                r1: *r1,
                l: *l,
                c1: *c1,
                r2: *r2,
                c2: *c2,
                v_dc: *v_dc,
            })?,
            Self::TunnelDiode {
                l,
                c,
                r,
                v_dc,
                diode,
            } => {
                let coeffs = diode.clone().unwrap_or_else(|| DEFAULT_DIODE.to_vec());
                build_tunnel_diode(&TunnelDiodeParams {
                    l: *l,
                    c: *c,
                    r: *r,
                    v_dc: *v_dc,
                    diode: DiodeCharacteristic::new(coeffs)?,
                })?
            }
            Self::Linear { a, b } => {
                let n = a.len();
                if n == 0 || a.iter().any(|row| row.len() != n) {
                    return Err(invalid("system.a must be a non-empty square matrix"));
                }
                let a = DMatrix::from_row_iterator(n, n, a.iter().flatten().copied());
                let b = match b {
                    Some(b) if b.len() != n => {
                        return Err(invalid(format!(
                            "system.b has {} entries, expected {n}",
                            b.len()
                        )))
                    }
                    Some(b) => DVector::from_column_slice(b),
                    None => DVector::zeros(n),
                };
                SystemModel::affine(a, b)?
            }
        };
        Ok(model)
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError::Invalid {
        origin: "scenario".into(),
        message: message.into(),
    }
}

impl Scenario {
    /// Parses a scenario from TOML text. `origin` names the source in
    /// diagnostics.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        let scenario: Self = toml::from_str(text).map_err(|e| CliError::Parse {
            origin: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        scenario.validate().map_err(|e| match e {
            CliError::Invalid { message, .. } => CliError::Invalid {
                origin: origin.to_string(),
                message,
            },
            other => CliError::Invalid {
                origin: origin.to_string(),
                message: other.to_string(),
            },
        })?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are all representable in TOML")
    }

    /// Checks everything that can be checked without integrating.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(invalid(format!(
                "name `{}` must be non-empty and use only letters, digits, `-` and `_`",
                self.name
            )));
        }
        let model = self.system.build()?;
        if self.initial.x0.len() != model.dim() {
            return Err(invalid(format!(
                "initial.x0 has {} entries, the {} system has dimension {}",
                self.initial.x0.len(),
                self.system.kind(),
                model.dim()
            )));
        }
        if self.initial.x0.iter().any(|v| !v.is_finite()) {
            return Err(invalid("initial.x0 must be finite"));
        }
        let Integration { t_end, step } = self.integration;
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(invalid(format!(
                "integration.t_end = {t_end} must be positive"
            )));
        }
        if !(step.is_finite() && step > 0.0 && step <= t_end) {
            return Err(invalid(format!(
                "integration.step = {step} must be positive and at most t_end"
            )));
        }
        let a = &self.analysis;
        if !(a.tail_window > 0.0 && a.tail_window <= 1.0) {
            return Err(invalid(format!(
                "analysis.tail_window = {} must lie in (0, 1]",
                a.tail_window
            )));
        }
        for (key, value) in [
            ("rel_tol", a.rel_tol),
            ("abs_tol", a.abs_tol),
            ("identity_tol", a.identity_tol),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(invalid(format!("analysis.{key} = {v} must be positive")));
                }
            }
        }
        if a.expect == Expectation::ModalIdentity && model.affine_parts().is_none() {
            return Err(invalid(
                "analysis.expect = \"modal-identity\" needs an affine system",
            ));
        }
        if self.output.stride == 0 {
            return Err(invalid("output.stride must be at least 1"));
        }
        Ok(())
    }
}

/// Where a `run` argument comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Builtin(&'static str),
    File(PathBuf),
}

/// Resolves a `run`/`validate` argument: an existing file wins over a
/// builtin of the same name.
pub fn resolve(arg: &str) -> Result<(Scenario, Source)> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok((Scenario::load(path)?, Source::File(path.to_path_buf())));
    }
    match crate::builtins::find(arg) {
        Some(b) => Ok((b.scenario()?, Source::Builtin(b.name))),
        None => Err(CliError::UnknownScenario(arg.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "mini"

[system]
kind = "rc"
r = 1.0
c = 2.0
v_dc = 3.0

[initial]
x0 = [0.0]

[integration]
t_end = 1.0
"#;

    #[test]
    fn defaults_fill_optional_sections() {
        let s = Scenario::from_toml(MINIMAL, "mini.toml").unwrap();
        assert_eq!(s.integration.step, DEFAULT_STEP);
        assert_eq!(s.analysis, AnalysisOptions::default());
        assert_eq!(s.output, OutputOptions::default());
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut s = Scenario::from_toml(MINIMAL, "mini.toml").unwrap();
        s.system = SystemSpec::Linear {
            a: vec![vec![0.1, -1.0 / 3.0], vec![1e-300, std::f64::consts::PI]],
            b: Some(vec![f64::MIN_POSITIVE, -0.0]),
        };
        s.initial.x0 = vec![0.1 + 0.2, 5e-324];
        s.analysis.rel_tol = Some(1e-8);
        s.analysis.expect = Expectation::Asymptote;
        s.output.dir = Some("out/x".into());
        let back = Scenario::from_toml(&s.to_toml(), "round-trip").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_errors_name_line_and_key() {
        let text = MINIMAL.replace("c = 2.0", "c = \"two\"");
        let err = Scenario::from_toml(&text, "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("bad.toml:"), "{err}");
        // Fields of the tagged `[system]` table are reported at the table.
        assert!(err.contains("line 4") && err.contains("\"two\""), "{err}");

        let text = MINIMAL.replace("x0 = [0.0]", "x0 = 0.0");
        let err = Scenario::from_toml(&text, "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 11") && err.contains("x0"), "{err}");

        let text = MINIMAL.replace("v_dc = 3.0", "v_dc = 3.0\nvdc = 3.0");
        let err = Scenario::from_toml(&text, "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(err.contains("vdc"), "{err}");

        let text = MINIMAL.replace("t_end = 1.0", "t_end = 1.0\nsteps = 3");
        let err = Scenario::from_toml(&text, "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(err.contains("steps"), "{err}");

        let text = MINIMAL.replace("kind = \"rc\"", "kind = \"rcl\"");
        let err = Scenario::from_toml(&text, "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(err.contains("rcl"), "{err}");
    }

    #[test]
    fn validation_rejects_bad_values() {
        for (from, to, needle) in [
            ("r = 1.0", "r = -1.0", "r"),
            ("x0 = [0.0]", "x0 = [0.0, 1.0]", "x0"),
            ("t_end = 1.0", "t_end = 0.0", "t_end"),
            ("name = \"mini\"", "name = \"a b\"", "name"),
        ] {
            let err = Scenario::from_toml(&MINIMAL.replace(from, to), "bad.toml")
                .unwrap_err()
                .to_string();
            assert!(err.contains(needle), "{to}: {err}");
        }
    }

    #[test]
    fn non_square_linear_system_is_rejected() {
        let text = r#"
name = "lin"
[system]
kind = "linear"
a = [[1.0, 2.0], [3.0]]
[initial]
x0 = [1.0, 0.0]
[integration]
t_end = 1.0
"#;
        let err = Scenario::from_toml(text, "lin.toml")
            .unwrap_err()
            .to_string();
        assert!(err.contains("square"), "{err}");
    }
}
