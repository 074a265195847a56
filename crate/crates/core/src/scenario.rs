//! Benchmark presets and the `key = value` configuration shared by config
//! files and command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::boundary::{Side, WallSpec};
use crate::cdvm::{DvConfig, DvField, DvGrid, DV_STEADY_THRESHOLD};
use crate::closure::ClosureMode;
use crate::error::{Error, Result};
use crate::limiter;
use crate::moments::{MomentSpace, MomentState};
use crate::solver1d::{
    Boundary, EdgeClosure, Grid1D, RunConfig, Splitting, StopRule, STEADY_THRESHOLD,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Shock,
    Couette,
    Poiseuille,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Shock => "shock",
            Self::Couette => "couette",
            Self::Poiseuille => "poiseuille",
            Self::Custom => "custom",
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shock" => Ok(Self::Shock),
            "couette" => Ok(Self::Couette),
            "poiseuille" => Ok(Self::Poiseuille),
            "custom" => Ok(Self::Custom),
            _ => Err(Error::Unknown {
                kind: "scenario",
                name: s.to_string(),
            }),
        }
    }
}

/// One end of the domain. `None` in [`ScenarioConfig`] means a free end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallConfig {
    pub u: [f64; 3],
    pub theta: f64,
}

impl WallConfig {
    pub const STATIONARY: Self = Self {
        u: [0.0; 3],
        theta: 1.0,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub solver: String,
    pub order: usize,
    pub kn: f64,
    pub prandtl: f64,
    pub chi: f64,
    pub left: Option<WallConfig>,
    pub right: Option<WallConfig>,
    pub force: [f64; 3],
    pub cells: usize,
    pub y_lo: f64,
    pub y_hi: f64,
    pub rho0: f64,
    pub u0: [f64; 3],
    pub theta0: f64,
    /// `None` runs to a steady state.
    pub t_end: Option<f64>,
    /// `None` picks the solver's default threshold.
    pub steady: Option<f64>,
    pub max_steps: usize,
    pub cfl: f64,
    pub speed_factor: f64,
    pub limiter: String,
    pub splitting: Splitting,
    pub closure: ClosureMode,
    pub edge_closure: EdgeClosure,
    pub implicit_closure: bool,
    pub predictor: bool,
    pub dv_nodes: [usize; 3],
    pub dv_half_width: f64,
    pub dv_second_order: bool,
    pub out: PathBuf,
    pub snapshot_every: usize,
    /// 0: rayon's default.
    pub threads: usize,
}

/// Couette wall speed.
pub const COUETTE_WALL_SPEED: f64 = 0.6296;
/// Poiseuille body force along `x`.
pub const POISEUILLE_FORCE: f64 = 0.2555;

impl ScenarioConfig {
    fn base(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            solver: "nrxx".into(),
            order: 5,
            kn: 0.1,
            prandtl: 2.0 / 3.0,
            chi: 1.0,
            left: Some(WallConfig::STATIONARY),
            right: Some(WallConfig::STATIONARY),
            force: [0.0; 3],
            cells: 100,
            y_lo: -0.5,
            y_hi: 0.5,
            rho0: 1.0,
            u0: [0.0; 3],
            theta0: 1.0,
            t_end: None,
            steady: None,
            max_steps: 1_000_000,
            cfl: 0.95,
            speed_factor: 1.2,
            limiter: "none".into(),
            splitting: Splitting::Lie,
            closure: ClosureMode::Interface,
            edge_closure: EdgeClosure::None,
            implicit_closure: true,
            predictor: true,
            dv_nodes: [32; 3],
            dv_half_width: 8.0,
            dv_second_order: false,
            out: PathBuf::from("out"),
            snapshot_every: 0,
            threads: 0,
        }
    }

    pub fn preset(scenario: ScenarioKind) -> Self {
        let mut c = Self::base(scenario);
        match scenario {
            ScenarioKind::Shock => {
                c.kn = 0.5;
                c.y_lo = -5.0;
                c.y_hi = 0.0;
                c.u0 = [0.0, 0.5, 0.0];
                c.left = None;
                c.cells = 500;
                c.t_end = Some(1.0);
                c.limiter = "minmod".into();
                c.dv_second_order = true;
            }
            ScenarioKind::Couette => {
                c.left = Some(WallConfig {
                    u: [-COUETTE_WALL_SPEED, 0.0, 0.0],
                    theta: 1.0,
                });
                c.right = Some(WallConfig {
                    u: [COUETTE_WALL_SPEED, 0.0, 0.0],
                    theta: 1.0,
                });
            }
            ScenarioKind::Poiseuille => {
                c.force = [POISEUILLE_FORCE, 0.0, 0.0];
            }
            ScenarioKind::Custom => {}
        }
        c
    }

    pub fn preset_named(name: &str) -> Result<Self> {
        Ok(Self::preset(name.parse()?))
    }

    /// Set one field from its textual form. Keys are the long flag names.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "scenario" => self.scenario = v.parse()?,
            "solver" => self.solver = v.to_string(),
            "M" | "order" => self.order = num(key, v)?,
            "kn" => self.kn = num(key, v)?,
            "pr" => self.prandtl = num(key, v)?,
            "chi" => self.chi = num(key, v)?,
            "cells" => self.cells = num(key, v)?,
            "y-lo" => self.y_lo = num(key, v)?,
            "y-hi" => self.y_hi = num(key, v)?,
            "rho0" => self.rho0 = num(key, v)?,
            "u0" => self.u0 = vec3(key, v)?,
            "theta0" => self.theta0 = num(key, v)?,
            "left" => self.left = end(key, v, self.left)?,
            "right" => self.right = end(key, v, self.right)?,
            "left-u" => wall_mut(key, &mut self.left)?.u = vec3(key, v)?,
            "right-u" => wall_mut(key, &mut self.right)?.u = vec3(key, v)?,
            "left-theta" => wall_mut(key, &mut self.left)?.theta = num(key, v)?,
            "right-theta" => wall_mut(key, &mut self.right)?.theta = num(key, v)?,
            "force" => self.force = vec3(key, v)?,
            "tend" => {
                self.t_end = if v == "steady" {
                    None
                } else {
                    Some(num(key, v)?)
                };
            }
            "steady" => {
                self.steady = Some(num(key, v)?);
                self.t_end = None;
            }
            "max-steps" => self.max_steps = num(key, v)?,
            "cfl" => self.cfl = num(key, v)?,
            "speed-factor" => self.speed_factor = num(key, v)?,
            "limiter" => {
                limiter::by_name(v)?;
                self.limiter = v.to_string();
            }
            "splitting" => self.splitting = v.parse()?,
            "closure" => self.closure = v.parse()?,
            "edge-closure" => self.edge_closure = v.parse()?,
            "implicit" => self.implicit_closure = flag(key, v)?,
            "predictor" => self.predictor = flag(key, v)?,
            "dv-nodes" => {
                let n: Vec<usize> = list(key, v)?;
                self.dv_nodes = match n[..] {
                    [a] => [a; 3],
                    [a, b, c] => [a, b, c],
                    _ => return Err(bad(key, v)),
                };
            }
            "dv-half-width" => self.dv_half_width = num(key, v)?,
            "dv-order" => {
                self.dv_second_order = match v {
                    "1" => false,
                    "2" => true,
                    _ => return Err(bad(key, v)),
                }
            }
            "out" => self.out = PathBuf::from(v),
            "snapshot-every" => self.snapshot_every = num(key, v)?,
            "threads" => self.threads = num(key, v)?,
            _ => {
                return Err(Error::Unknown {
                    kind: "config key",
                    name: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Config text: `key = value` lines under any `[section]` headers.
    /// A `scenario` key selects the preset the other keys start from.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let pairs = toml_pairs(text)?;
        let mut c = match pairs.iter().find(|(k, _)| k == "scenario") {
            Some((_, v)) => Self::preset_named(v)?,
            None => Self::preset(ScenarioKind::Custom),
        };
        for (k, v) in &pairs {
            c.apply(k, v)?;
        }
        Ok(c)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn wall_spec(&self, w: Option<WallConfig>, side: Side) -> Result<Boundary> {
        Ok(match w {
            Some(w) => Boundary::Wall(WallSpec::new(self.chi, w.u, w.theta, side)?),
            None => Boundary::Free,
        })
    }

    pub fn boundaries(&self) -> Result<(Boundary, Boundary)> {
        Ok((
            self.wall_spec(self.left, Side::Left)?,
            self.wall_spec(self.right, Side::Right)?,
        ))
    }

    fn stop(&self, default_threshold: f64) -> StopRule {
        match self.t_end {
            Some(t) => StopRule::EndTime(t),
            None => StopRule::Steady {
                threshold: self.steady.unwrap_or(default_threshold),
                max_steps: self.max_steps,
            },
        }
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let (left, right) = self.boundaries()?;
        let mut r = RunConfig::new(self.order, self.kn, left, right);
        r.prandtl = self.prandtl;
        r.cfl = self.cfl;
        r.speed_factor = self.speed_factor;
        r.force = self.force;
        r.limiter = limiter::by_name(&self.limiter)?;
        r.splitting = self.splitting;
        r.closure = self.closure;
        r.implicit_closure = self.implicit_closure;
        r.edge_closure = self.edge_closure;
        r.predictor = self.predictor;
        r.stop = self.stop(STEADY_THRESHOLD);
        r.snapshot_every = self.snapshot_every;
        r.check()?;
        Ok(r)
    }

    /// Uniform Maxwellian initial grid.
    pub fn initial_grid(&self) -> Result<Grid1D> {
        let space = MomentSpace::new(self.order)?;
        Grid1D::from_fn(self.y_lo, self.y_hi, self.cells, |_| {
            MomentState::maxwellian(&space, self.rho0, self.u0, self.theta0)
        })
    }

    pub fn dv_config(&self) -> Result<DvConfig> {
        if self.force.iter().any(|f| *f != 0.0) {
            return Err(Error::Config(
                "the cdvm solver does not support a body force".into(),
            ));
        }
        let (left, right) = self.boundaries()?;
        let mut d = DvConfig::new(self.kn, left, right);
        d.prandtl = self.prandtl;
        d.cfl = self.cfl;
        d.second_order = self.dv_second_order;
        d.stop = self.stop(DV_STEADY_THRESHOLD);
        d.check()?;
        Ok(d)
    }

    /// Velocity grid on `[-w, w]` per axis.
    pub fn dv_grid(&self) -> Result<DvGrid> {
        let w = self.dv_half_width;
        DvGrid::new(self.dv_nodes, [-w; 3], [w; 3])
    }

    pub fn initial_field(&self) -> Result<DvField> {
        let grid = Arc::new(self.dv_grid()?);
        DvField::from_fn(grid, self.y_lo, self.y_hi, self.cells, |_| {
            (self.rho0, self.u0, self.theta0)
        })
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("bad value {value:?} for {key}"))
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(key, v))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|s| num(key, s.trim()))
        .collect()
}

fn vec3(key: &str, v: &str) -> Result<[f64; 3]> {
    list::<f64>(key, v)?.try_into().map_err(|_| bad(key, v))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(bad(key, v)),
    }
}

fn end(key: &str, v: &str, current: Option<WallConfig>) -> Result<Option<WallConfig>> {
    match v {
        "free" => Ok(None),
        "wall" => Ok(Some(current.unwrap_or(WallConfig::STATIONARY))),
        _ => Err(bad(key, v)),
    }
}

fn wall_mut<'a>(key: &str, w: &'a mut Option<WallConfig>) -> Result<&'a mut WallConfig> {
    w.as_mut()
        .ok_or_else(|| Error::Config(format!("{key} given for a free end")))
}

fn toml_scalar(key: &str, v: &toml::Value) -> Result<String> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(a) => a
            .iter()
            .map(|x| toml_scalar(key, x))
            .collect::<Result<Vec<_>>>()?
            .join(","),
        _ => return Err(Error::Config(format!("unsupported value for {key}"))),
    })
}

/// Flattened `(key, value)` pairs in file order; section names are only
/// grouping.
pub fn toml_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let mut out = Vec::new();
    for (k, v) in &table {
        match v {
            toml::Value::Table(section) => {
                for (k2, v2) in section {
                    out.push((k2.clone(), toml_scalar(k2, v2)?));
                }
            }
            _ => out.push((k.clone(), toml_scalar(k, v)?)),
        }
    }
    Ok(out)
}

/// Mean `|f_α|` over each grade `k = 1..=M`.
pub fn decay_diagnostic(state: &MomentState) -> Vec<f64> {
    state.grade_averages()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_carry_the_benchmark_values() {
        let s = ScenarioConfig::preset(ScenarioKind::Shock);
        assert_eq!(
            (s.y_lo, s.y_hi, s.kn, s.u0, s.t_end),
            (-5.0, 0.0, 0.5, [0.0, 0.5, 0.0], Some(1.0))
        );
        assert_eq!(s.left, None);
        assert_eq!(
            s.right,
            Some(WallConfig {
                u: [0.0; 3],
                theta: 1.0
            })
        );
        let c = ScenarioConfig::preset(ScenarioKind::Couette);
        assert_eq!(c.left.unwrap().u, [-0.6296, 0.0, 0.0]);
        assert_eq!(c.right.unwrap().u, [0.6296, 0.0, 0.0]);
        assert_eq!((c.y_lo, c.y_hi), (-0.5, 0.5));
        let p = ScenarioConfig::preset(ScenarioKind::Poiseuille);
        assert_eq!((p.force, p.kn), ([0.2555, 0.0, 0.0], 0.1));
        for c in [s, c, p] {
            assert_eq!((c.chi, c.cfl), (1.0, 0.95));
            for w in [c.left, c.right].into_iter().flatten() {
                assert_eq!(w.theta, 1.0);
            }
        }
        assert!(matches!(
            ScenarioConfig::preset_named("cavity"),
            Err(Error::Unknown { .. })
        ));
    }

    #[test]
    fn config_text_and_overrides() {
        let text = r#"
scenario = "couette"
[model]
M = 7
kn = 0.5
[numerics]
limiter = "minmod"
dv-nodes = [16, 24, 16]
[walls]
right-u = [0.1, 0, 0]
"#;
        let c = ScenarioConfig::from_toml_str(text).unwrap();
        assert_eq!((c.scenario, c.order, c.kn), (ScenarioKind::Couette, 7, 0.5));
        assert_eq!(c.limiter, "minmod");
        assert_eq!(c.dv_nodes, [16, 24, 16]);
        assert_eq!(c.right.unwrap().u, [0.1, 0.0, 0.0]);
        assert_eq!(c.left.unwrap().u, [-0.6296, 0.0, 0.0]);
        assert!(ScenarioConfig::from_toml_str("bogus = 1").is_err());
        assert!(ScenarioConfig::from_toml_str("limiter = \"superbee\"").is_err());
        let mut c = ScenarioConfig::preset(ScenarioKind::Shock);
        assert!(c.apply("left-u", "1,0,0").is_err());
        c.apply("tend", "steady").unwrap();
        assert_eq!(c.t_end, None);
    }

    #[test]
    fn decay_of_equilibrium_is_zero() {
        let space = MomentSpace::new(6).unwrap();
        let s = MomentState::maxwellian(&space, 1.2, [0.1, 0.2, 0.0], 0.8).unwrap();
        let d = decay_diagnostic(&s);
        assert_eq!(d.len(), 6);
        assert!(d.iter().all(|v| *v == 0.0));
    }
}
