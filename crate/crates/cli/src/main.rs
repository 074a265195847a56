use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;

use nrxx::io::{compare, write_run_log, write_state_csv, Profile};
use nrxx::scenario::{toml_pairs, ScenarioConfig};
use nrxx::strategy::{SolveOutput, SolverRegistry};

#[derive(Parser)]
#[command(
    name = "nrxx",
    version,
    about = "Regularized moment and discrete velocity solvers for 1-D rarefied gas flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write profiles, snapshots and a run log.
    Run(Box<RunArgs>),
    /// Relative differences between two profile CSV files.
    Compare {
        a: PathBuf,
        /// Reference profile.
        b: PathBuf,
        #[arg(long, default_value = "l2rel", value_parser = ["l2rel"])]
        norm: String,
    },
}

#[derive(Parser, Debug, Default)]
struct RunArgs {
    /// Config file of `key = value` lines under `[section]` headers.
    #[arg(long)]
    config: Option<PathBuf>,
    /// shock | couette | poiseuille | custom
    #[arg(long)]
    scenario: Option<String>,
    /// nrxx | cdvm
    #[arg(long)]
    solver: Option<String>,
    /// Moment order.
    #[arg(long = "M")]
    order: Option<usize>,
    #[arg(long)]
    kn: Option<f64>,
    #[arg(long)]
    pr: Option<f64>,
    /// Accommodation coefficient of both walls.
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    /// End time, or `steady`.
    #[arg(long)]
    tend: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// none | minmod
    #[arg(long)]
    limiter: Option<String>,
    /// lie | strang
    #[arg(long)]
    splitting: Option<String>,
    /// Any other config key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        let mut push = |k: &str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k.to_string(), x));
            }
        };
        push("solver", self.solver.clone());
        push("M", self.order.map(|x| x.to_string()));
        push("kn", self.kn.map(|x| x.to_string()));
        push("pr", self.pr.map(|x| x.to_string()));
        push("chi", self.chi.map(|x| x.to_string()));
        push("cells", self.cells.map(|x| x.to_string()));
        push("tend", self.tend.clone());
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("threads", self.threads.map(|x| x.to_string()));
        push("limiter", self.limiter.clone());
        push("splitting", self.splitting.clone());
        v
    }

    /// Preset, then config file, then flags, then `--set`.
    fn resolve(&self) -> Result<ScenarioConfig> {
        let file = match &self.config {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml_pairs(&text)?
            }
            None => Vec::new(),
        };
        let from_file = file
            .iter()
            .find(|(k, _)| k == "scenario")
            .map(|(_, v)| v.clone());
        let name = self
            .scenario
            .clone()
            .or(from_file)
            .unwrap_or_else(|| "couette".into());
        let mut c = ScenarioConfig::preset_named(&name)?;
        for (k, v) in file.iter().filter(|(k, _)| k != "scenario") {
            c.apply(k, v).with_context(|| format!("config key {k}"))?;
        }
        for (k, v) in self.flag_pairs() {
            c.apply(&k, &v).with_context(|| format!("--{k}"))?;
        }
        for s in &self.set {
            let Some((k, v)) = s.split_once('=') else {
                bail!("--set expects KEY=VALUE, got {s:?}");
            };
            c.apply(k.trim(), v).with_context(|| format!("--set {k}"))?;
        }
        Ok(c)
    }
}

fn log_header(c: &ScenarioConfig, out: &SolveOutput) -> Vec<(String, String)> {
    let wall = |w: Option<nrxx::scenario::WallConfig>| match w {
        Some(w) => format!("wall u={:?} theta={}", w.u, w.theta),
        None => "free".into(),
    };
    [
        ("scenario", c.scenario.name().to_string()),
        ("solver", c.solver.clone()),
        ("M", c.order.to_string()),
        ("kn", c.kn.to_string()),
        ("pr", c.prandtl.to_string()),
        ("chi", c.chi.to_string()),
        ("cells", c.cells.to_string()),
        ("domain", format!("[{}, {}]", c.y_lo, c.y_hi)),
        ("left", wall(c.left)),
        ("right", wall(c.right)),
        ("force", format!("{:?}", c.force)),
        ("cfl", c.cfl.to_string()),
        ("limiter", c.limiter.clone()),
        ("steps", out.steps.to_string()),
        ("time", out.time.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn write_outputs(dir: &Path, c: &ScenarioConfig, out: &SolveOutput) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    out.profile.write_csv(dir.join("profile.csv"))?;
    for (step, _, p) in &out.snapshots {
        p.write_csv(dir.join(format!("snapshot_{step:08}.csv")))?;
    }
    write_run_log(
        dir.join("run.log"),
        &log_header(c, out),
        &out.dt_history,
        &out.residuals,
    )?;
    if let Some(g) = &out.grid {
        write_state_csv(g, dir.join("state.csv"))?;
    }
    if let Some((lo, hi)) = out.wall_decay() {
        let mut text = String::from("k,left_wall,right_wall\n");
        for (k, (a, b)) in lo.iter().zip(&hi).enumerate() {
            text.push_str(&format!("{},{a:e},{b:e}\n", k + 1));
        }
        fs::write(dir.join("decay.csv"), text)?;
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    let c = args.resolve()?;
    if c.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(c.threads)
            .build_global()?;
    }
    info!("running {} with {}", c.scenario.name(), c.solver);
    let out = SolverRegistry::default()
        .solve(&c)
        .with_context(|| format!("{} solver failed", c.solver))?;
    write_outputs(&c.out, &c, &out)?;
    println!(
        "{} steps, t = {:.6}, wrote {}",
        out.steps,
        out.time,
        c.out.join("profile.csv").display()
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run(args) => run(&args),
        Command::Compare { a, b, norm: _ } => {
            let pa = Profile::read_csv(&a).with_context(|| format!("reading {}", a.display()))?;
            let pb = Profile::read_csv(&b).with_context(|| format!("reading {}", b.display()))?;
            let diffs = compare(&pa, &pb)?;
            for (col, d) in &diffs {
                println!("{col:<8} {d:.6e}");
            }
            let worst = diffs
                .iter()
                .filter(|(_, d)| d.is_finite())
                .map(|(_, d)| *d)
                .fold(0.0, f64::max);
            println!("max      {worst:.6e}");
            Ok(())
        }
    }
}
