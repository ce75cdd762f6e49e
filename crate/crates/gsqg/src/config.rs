//! Run configuration: a UTF-8 file of `dotted.key = value` lines with `#`
//! comments. Unknown and repeated keys are rejected.
//!
//! ```text
//! params.alpha = 1.5
//! params.m = 3
//! params.vartheta = 1
//! params.b = 0.5, 0.5, 0.5
//! params.d1 = 1
//! params.d2 = 1.3
//! params.gamma0 = 1
//! params.gamma1 = 1
//! solve.eps_max = 0.4
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contour::SelfQuadrature;
use crate::dynamics::{Tangential, VelocityOptions};
use crate::equilibria::ConfigParams;
use crate::solver::{JacobianStrategy, SolveOptions};
use crate::specfun::Alpha;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Evolution time as a fraction of the rotation period `2π/|Ω|`.
    pub t_fraction_of_period: f64,
    /// Time step; `0` picks [`crate::dynamics::stable_dt`].
    pub dt: f64,
    /// Nodes per boundary.
    pub nodes: usize,
    pub velocity: VelocityOptions,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            t_fraction_of_period: 0.1,
            dt: 0.0,
            nodes: 32,
            velocity: VelocityOptions::default(),
        }
    }
}

/// A parameter that `sweep` can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    M,
    Vartheta,
    B0,
    B1,
    B2,
    D1,
    D2,
    Gamma0,
    Gamma1,
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().trim_start_matches("params.") {
            "alpha" => SweepAxis::Alpha,
            "m" => SweepAxis::M,
            "vartheta" => SweepAxis::Vartheta,
            "b0" => SweepAxis::B0,
            "b1" => SweepAxis::B1,
            "b2" => SweepAxis::B2,
            "d1" => SweepAxis::D1,
            "d2" => SweepAxis::D2,
            "gamma0" => SweepAxis::Gamma0,
            "gamma1" => SweepAxis::Gamma1,
            other => {
                return Err(Error::Configuration(format!(
                    "unknown sweep axis '{other}'"
                )))
            }
        })
    }
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::M => "m",
            SweepAxis::Vartheta => "vartheta",
            SweepAxis::B0 => "b0",
            SweepAxis::B1 => "b1",
            SweepAxis::B2 => "b2",
            SweepAxis::D1 => "d1",
            SweepAxis::D2 => "d2",
            SweepAxis::Gamma0 => "gamma0",
            SweepAxis::Gamma1 => "gamma1",
        }
    }

    /// `base` with this parameter set to `value`. Integer axes reject
    /// non-integral values.
    pub fn apply(self, base: &ConfigParams, value: f64) -> Result<ConfigParams> {
        let mut p = base.clone();
        let integral = || -> Result<u64> {
            if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
                return Err(Error::Configuration(format!(
                    "{} needs a non-negative integer, got {value}",
                    self.name()
                )));
            }
            Ok(value as u64)
        };
        match self {
            SweepAxis::Alpha => p.alpha = Alpha::new(value)?,
            SweepAxis::M => p.m = integral()? as usize,
            SweepAxis::Vartheta => p.vartheta = integral()?.min(u8::MAX as u64) as u8,
            SweepAxis::B0 => p.b[0] = value,
            SweepAxis::B1 => p.b[1] = value,
            SweepAxis::B2 => p.b[2] = value,
            SweepAxis::D1 => p.d1 = value,
            SweepAxis::D2 => p.d2 = value,
            SweepAxis::Gamma0 => p.gamma0 = value,
            SweepAxis::Gamma1 => p.gamma1 = value,
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepConfig {
    pub axis: Option<SweepAxis>,
    pub grid: Vec<f64>,
    /// Also solve at `eps_max` for every grid point.
    pub solve: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: ConfigParams,
    pub solve: SolveOptions,
    /// Largest `ε` of the continuation ladder.
    pub eps_max: f64,
    /// Explicit `ε` targets; replaces the geometric ladder when present.
    pub targets: Option<Vec<f64>>,
    pub dynamics: DynamicsConfig,
    /// Multiplies the solver's `Ω` before comparison in `verify` (1 in
    /// normal use; anything else is a negative control).
    pub omega_scale: f64,
    pub sweep: SweepConfig,
    pub output_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "params.alpha",
    "params.m",
    "params.vartheta",
    "params.b",
    "params.b0",
    "params.b1",
    "params.b2",
    "params.d1",
    "params.d2",
    "params.gamma0",
    "params.gamma1",
    "solve.n_modes",
    "solve.n_quad",
    "solve.tol",
    "solve.max_iter",
    "solve.continuation_steps",
    "solve.eps_max",
    "solve.targets",
    "solve.jacobian",
    "solve.quadrature",
    "solve.fd_step",
    "dynamics.t_fraction_of_period",
    "dynamics.dt",
    "dynamics.nodes",
    "dynamics.tangential",
    "dynamics.filter",
    "dynamics.quadrature",
    "verify.omega_scale",
    "sweep.axis",
    "sweep.grid",
    "sweep.solve",
    "output_dir",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 'key = value', got '{content}'"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key '{key}'"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("empty value for '{key}'"),
                });
            }
            if let Some((first, _)) = map.insert(key.to_string(), (line, value.to_string())) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key '{key}' (first on line {first})"),
                });
            }
        }
        Ok(Entries { map })
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| Error::Parse {
                line: *line,
                message: format!("cannot parse '{v}' for '{key}'"),
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Configuration(format!("missing required key '{key}'")))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::Parse {
                            line: *line,
                            message: format!("bad number '{s}' in '{key}'"),
                        })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, v)) => match v.as_str() {
                "true" | "yes" | "1" => Ok(Some(true)),
                "false" | "no" | "0" => Ok(Some(false)),
                _ => Err(Error::Parse {
                    line: *line,
                    message: format!("expected a boolean for '{key}', got '{v}'"),
                }),
            },
        }
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map(|e| e.0).unwrap_or(0)
    }

    fn choice<T>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>>
    where
        T: Copy,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, v)) => options
                .iter()
                .find(|(name, _)| name == v)
                .map(|(_, t)| Some(*t))
                .ok_or_else(|| {
                    let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                    Error::Parse {
                        line: *line,
                        message: format!("'{key}' must be one of {names:?}, got '{v}'"),
                    }
                }),
        }
    }
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other if line > 0 => Error::Parse {
            line,
            message: other.to_string(),
        },
        other => other,
    }
}

fn quadrature_choice() -> [(&'static str, SelfQuadrature); 2] {
    [
        ("spectral", SelfQuadrature::Spectral),
        ("skip_node", SelfQuadrature::SkipNode),
    ]
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let e = Entries::parse(text)?;
        let alpha: f64 = e.require("params.alpha")?;
        let alpha = Alpha::new(alpha).map_err(|err| at_line(e.line("params.alpha"), err))?;
        let b = if let Some(list) = e.list("params.b")? {
            if e.has("params.b0") || e.has("params.b1") || e.has("params.b2") {
                return Err(Error::Parse {
                    line: e.line("params.b"),
                    message: "give params.b or params.b0..b2, not both".into(),
                });
            }
            <[f64; 3]>::try_from(list).map_err(|l| Error::Parse {
                line: e.line("params.b"),
                message: format!("params.b needs 3 values, got {}", l.len()),
            })?
        } else {
            [
                e.require("params.b0")?,
                e.require("params.b1")?,
                e.require("params.b2")?,
            ]
        };
        let params = ConfigParams {
            alpha,
            m: e.require("params.m")?,
            vartheta: e.require("params.vartheta")?,
            b,
            d1: e.require("params.d1")?,
            d2: e.require("params.d2")?,
            gamma0: e.require("params.gamma0")?,
            gamma1: e.require("params.gamma1")?,
        };
        params.validate()?;

        let d = SolveOptions::default();
        let solve = SolveOptions {
            n_modes: e.get("solve.n_modes")?.unwrap_or(d.n_modes),
            n_quad: e.get("solve.n_quad")?.unwrap_or(d.n_quad),
            tol: e.get("solve.tol")?.unwrap_or(d.tol),
            max_iter: e.get("solve.max_iter")?.unwrap_or(d.max_iter),
            continuation_steps: e
                .get("solve.continuation_steps")?
                .unwrap_or(d.continuation_steps),
            jacobian: e
                .choice(
                    "solve.jacobian",
                    &[
                        ("finite_difference", JacobianStrategy::FiniteDifference),
                        ("frozen", JacobianStrategy::Frozen),
                    ],
                )?
                .unwrap_or(d.jacobian),
            quadrature: e
                .choice("solve.quadrature", &quadrature_choice())?
                .unwrap_or(d.quadrature),
            fd_step: e.get("solve.fd_step")?.unwrap_or(d.fd_step),
        };
        solve.validate()?;
        let eps_max: f64 = e.get("solve.eps_max")?.unwrap_or(0.1);
        if !(eps_max.is_finite() && eps_max > 0.0) {
            return Err(Error::Parse {
                line: e.line("solve.eps_max"),
                message: format!("eps_max must be positive, got {eps_max}"),
            });
        }
        let targets = e.list("solve.targets")?;

        let dd = DynamicsConfig::default();
        let dynamics = DynamicsConfig {
            t_fraction_of_period: e
                .get("dynamics.t_fraction_of_period")?
                .unwrap_or(dd.t_fraction_of_period),
            dt: e.get("dynamics.dt")?.unwrap_or(dd.dt),
            nodes: e.get("dynamics.nodes")?.unwrap_or(dd.nodes),
            velocity: VelocityOptions {
                quadrature: e
                    .choice("dynamics.quadrature", &quadrature_choice())?
                    .unwrap_or(dd.velocity.quadrature),
                tangential: e
                    .choice(
                        "dynamics.tangential",
                        &[
                            ("arclength", Tangential::Arclength),
                            ("subtracted", Tangential::Subtracted),
                        ],
                    )?
                    .unwrap_or(dd.velocity.tangential),
                filter: e.bool("dynamics.filter")?.unwrap_or(dd.velocity.filter),
            },
        };
        if !(dynamics.t_fraction_of_period > 0.0 && dynamics.t_fraction_of_period.is_finite())
            || !(dynamics.dt >= 0.0 && dynamics.dt.is_finite())
            || dynamics.nodes < 8
            || dynamics.nodes % 2 != 0
        {
            return Err(Error::Configuration(
                "dynamics needs t_fraction_of_period > 0, dt >= 0 and an even node count >= 8"
                    .into(),
            ));
        }
        let omega_scale: f64 = e.get("verify.omega_scale")?.unwrap_or(1.0);
        if !omega_scale.is_finite() {
            return Err(Error::Parse {
                line: e.line("verify.omega_scale"),
                message: "omega_scale must be finite".into(),
            });
        }
        let axis = match e.map.get("sweep.axis") {
            None => None,
            Some((line, v)) => Some(v.parse::<SweepAxis>().map_err(|err| at_line(*line, err))?),
        };
        let sweep = SweepConfig {
            axis,
            grid: e.list("sweep.grid")?.unwrap_or_default(),
            solve: e.bool("sweep.solve")?.unwrap_or(false),
        };
        let output_dir = e
            .get::<String>("output_dir")?
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(RunConfig {
            params,
            solve,
            eps_max,
            targets,
            dynamics,
            omega_scale,
            sweep,
            output_dir,
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }
}
