//! Solvers behind one trait, chosen by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cdvm::dv_run;
use crate::error::{Error, Result};
use crate::io::Profile;
use crate::scenario::{decay_diagnostic, ScenarioConfig};
use crate::solver1d::{run, Grid1D};

/// What a finished run reports, independent of the solver.
#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub profile: Profile,
    pub time: f64,
    pub steps: usize,
    pub dt_history: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `(step, time, profile)`.
    pub snapshots: Vec<(usize, f64, Profile)>,
    /// Final moment grid; `None` for velocity-grid solvers.
    pub grid: Option<Grid1D>,
}

impl SolveOutput {
    /// Per-grade averages of `|f_α|` in the first and last cell.
    pub fn wall_decay(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let g = self.grid.as_ref()?;
        Some((
            decay_diagnostic(&g.cells[0]),
            decay_diagnostic(&g.cells[g.len() - 1]),
        ))
    }
}

pub trait KineticSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, config: &ScenarioConfig) -> Result<SolveOutput>;
}

/// The regularized moment method.
#[derive(Debug, Default)]
pub struct NrxxSolver;

impl KineticSolver for NrxxSolver {
    fn name(&self) -> &'static str {
        "nrxx"
    }

    fn solve(&self, config: &ScenarioConfig) -> Result<SolveOutput> {
        let rc = config.run_config()?;
        let out = run(config.initial_grid()?, &rc)?;
        Ok(SolveOutput {
            profile: Profile::from_grid(&out.grid),
            time: out.time,
            steps: out.steps,
            dt_history: out.dt_history,
            residuals: out.residuals,
            snapshots: out
                .snapshots
                .iter()
                .map(|s| (s.step, s.time, Profile::from_grid(&s.grid)))
                .collect(),
            grid: Some(out.grid),
        })
    }
}

/// Discrete velocity reference solver.
#[derive(Debug, Default)]
pub struct CdvmSolver;

impl KineticSolver for CdvmSolver {
    fn name(&self) -> &'static str {
        "cdvm"
    }

    fn solve(&self, config: &ScenarioConfig) -> Result<SolveOutput> {
        let mut dc = config.dv_config()?;
        dc.snapshot_every = config.snapshot_every;
        let out = dv_run(config.initial_field()?, &dc)?;
        Ok(SolveOutput {
            profile: Profile::from_field(&out.field),
            time: out.time,
            steps: out.steps,
            dt_history: out.dt_history,
            residuals: out.residuals,
            snapshots: out
                .snapshots
                .iter()
                .map(|(step, t, f)| (*step, *t, Profile::from_field(f)))
                .collect(),
            grid: None,
        })
    }
}

#[derive(Clone)]
pub struct SolverRegistry {
    entries: BTreeMap<&'static str, Arc<dyn KineticSolver>>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = Self {
            entries: BTreeMap::new(),
        };
        r.register(Arc::new(NrxxSolver));
        r.register(Arc::new(CdvmSolver));
        r
    }
}

impl SolverRegistry {
    pub fn register(&mut self, solver: Arc<dyn KineticSolver>) {
        self.entries.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn KineticSolver>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Unknown {
                kind: "solver",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// Look up `config.solver` and run it.
    pub fn solve(&self, config: &ScenarioConfig) -> Result<SolveOutput> {
        self.get(&config.solver)?.solve(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioKind;

    #[test]
    fn registry_names() {
        let r = SolverRegistry::default();
        assert_eq!(r.names().collect::<Vec<_>>(), ["cdvm", "nrxx"]);
        assert!(matches!(r.get("dsmc"), Err(Error::Unknown { .. })));
    }

    #[test]
    fn both_solvers_keep_a_resting_gas() {
        let mut c = ScenarioConfig::preset(ScenarioKind::Custom);
        c.cells = 8;
        c.t_end = Some(0.05);
        c.dv_nodes = [16; 3];
        let r = SolverRegistry::default();
        for name in ["nrxx", "cdvm"] {
            c.solver = name.into();
            let out = r.solve(&c).unwrap();
            assert!((out.time - 0.05).abs() < 1e-14);
            assert_eq!(out.profile.len(), 8);
            for row in &out.profile.rows {
                assert!((row.rho - 1.0).abs() < 1e-6, "{name}: {row:?}");
                assert!(row.u.iter().all(|u| u.abs() < 1e-10));
            }
        }
    }
}
