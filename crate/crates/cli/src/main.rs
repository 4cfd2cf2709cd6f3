use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cns_core::besov::{besov_norm, block_norms, BesovIndex, Cutoff};
use cns_core::experiments::data::base_state;
use cns_core::experiments::{self, ExperimentSpec, NAMES};
use cns_core::solvers::{checkpoint, Horizon};

#[derive(Parser)]
#[command(name = "cns-toolkit", version, about = "Solves the periodic compressible flow and runs the continuity experiments")]
struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve from the default smooth datum and write a checkpoint plus norm table.
    Solve(Overrides),
    /// Run a named experiment and write its report.
    Experiment {
        name: String,
        #[command(flatten)]
        over: Overrides,
    },
    /// Besov norms of one slot of a checkpoint at every stored time.
    Norms {
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value = "u")]
        slot: String,
    },
    /// List experiment names.
    List,
}

#[derive(Args, Default)]
struct Overrides {
    /// JSON spec file; flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Final time, or `auto` for the admissible horizon.
    #[arg(long = "T")]
    t: Option<String>,
    /// Comma-separated perturbation sizes.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
}

struct Failure {
    code: u8,
    msg: String,
}

fn config_err(msg: impl ToString) -> Failure {
    Failure { code: 2, msg: msg.to_string() }
}

/// Bad input or I/O exits with 2; a run that breaks down numerically counts
/// as a failed check.
fn run_err(e: cns_core::Error) -> Failure {
    use cns_core::Error as E;
    let code = match e {
        E::Domain(_) | E::Data(_) | E::Index(_) | E::Precondition(_) | E::Io(_) | E::Ellipticity(_) => 2,
        _ => 1,
    };
    Failure { code, msg: e.to_string() }
}

impl Overrides {
    fn apply(&self, name: &str) -> Result<ExperimentSpec, Failure> {
        let mut spec = match &self.spec {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                let mut s: ExperimentSpec = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                s.name = name.into();
                s
            }
            None if name == "solve" => ExperimentSpec { name: name.into(), ..Default::default() },
            None => ExperimentSpec::for_experiment(name).map_err(config_err)?,
        };
        if let Some(d) = self.d {
            spec.dim = d;
        }
        if let Some(p) = self.p {
            spec.p = p;
        }
        if let Some(n) = self.n {
            spec.n = n;
        }
        if let Some(dt) = self.dt {
            spec.dt = dt;
        }
        if let Some(t) = &self.t {
            spec.horizon = if t == "auto" {
                match spec.horizon {
                    Horizon::Auto { .. } => spec.horizon,
                    Horizon::Fixed(t) => Horizon::Auto { t_max: t },
                }
            } else {
                Horizon::Fixed(t.parse().map_err(|_| config_err(format!("--T expects a number or auto, got {t}")))?)
            };
        }
        if let Some(eps) = &self.eps {
            spec.epsilons = eps.clone();
        }
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        Ok(spec)
    }
}

fn solve(over: &Overrides, verbose: bool) -> Result<(), Failure> {
    let spec = over.apply("solve")?;
    let g = spec.grid().map_err(config_err)?;
    let s0 = base_state(&g, spec.p, spec.a_amp, spec.u_amp, spec.seed).map_err(config_err)?;
    let horizon = spec.resolve_horizon(&s0).map_err(run_err)?;
    if verbose {
        eprintln!("solving on {}^{} to T = {horizon}", spec.n, spec.dim);
    }
    let sol = spec.solve(&s0, horizon).map_err(run_err)?;
    let mut traj = sol.traj;
    traj.cache_norms(spec.p).map_err(config_err)?;
    std::fs::create_dir_all(&over.out).map_err(config_err)?;
    let path = over.out.join("solution.bin");
    checkpoint::save(&traj, spec.to_json(), &path).map_err(config_err)?;
    let d = spec.dim as f64;
    let p = spec.p;
    let ia = BesovIndex::new(d / p, p, 1.0).map_err(config_err)?;
    let iu = BesovIndex::new(d / p - 1.0, p, 1.0).map_err(config_err)?;
    let (na, nu) = (traj.norm_series("a", p).map_err(config_err)?, traj.norm_series("u", p).map_err(config_err)?);
    let mut csv = String::from("t,a_critical,u_critical,min_density\n");
    for (i, t) in traj.times().iter().enumerate() {
        let a = besov_norm(&na[i], ia, None, Cutoff::None).map_err(config_err)?;
        let u = besov_norm(&nu[i], iu, None, Cutoff::None).map_err(config_err)?;
        let rho = 1.0 + traj.field("a", i).map_err(config_err)?.physical(0).iter().fold(f64::INFINITY, |m, &v| m.min(v));
        csv.push_str(&format!("{t:e},{a:e},{u:e},{rho:e}\n"));
    }
    let table = over.out.join("solution_norms.csv");
    std::fs::write(&table, csv).map_err(config_err)?;
    println!("wrote {} and {}", path.display(), table.display());
    Ok(())
}

fn experiment(name: &str, over: &Overrides, verbose: bool) -> Result<(), Failure> {
    if !NAMES.contains(&name) {
        return Err(config_err(format!("unknown experiment {name}; valid names: {}", NAMES.join(", "))));
    }
    let spec = over.apply(name)?;
    if verbose {
        eprintln!("running {name}");
    }
    let report = experiments::run(&spec).map_err(run_err)?;
    let files = report.write(&over.out).map_err(config_err)?;
    print!("{}", report.summary());
    for f in files {
        println!("wrote {}", f.display());
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure { code: 1, msg: format!("{name}: some criteria failed") })
    }
}

/// Prints `t,norm` per stored time and compares block norms to the cached
/// ones when the checkpoint carries them.
fn norms(path: &Path, s: f64, p: f64, r: f64, slot: &str) -> Result<(), Failure> {
    let (traj, _) = checkpoint::load(path).map_err(config_err)?;
    let idx = BesovIndex::new(s, p, r).map_err(config_err)?;
    let fields = traj.series(slot).map_err(config_err)?;
    let cached = traj.cached(slot, p).cloned();
    let mut worst = 0.0f64;
    println!("t,norm");
    for (i, f) in fields.iter().enumerate() {
        let series = block_norms(f, p).map_err(config_err)?;
        let n = besov_norm(&series, idx, None, Cutoff::None).map_err(config_err)?;
        if let Some(c) = &cached {
            let old = besov_norm(&c.series[i], idx, None, Cutoff::None).map_err(config_err)?;
            worst = worst.max((n - old).abs() / old.abs().max(f64::MIN_POSITIVE));
        }
        println!("{:e},{n:e}", traj.times()[i]);
    }
    if cached.is_some() {
        eprintln!("max relative deviation from cached norms: {worst:e}");
        if !(worst <= 1e-12) {
            return Err(Failure { code: 1, msg: "recomputed norms differ from the cached ones".into() });
        }
    }
    Ok(())
}

fn init_threads() {
    if let Some(n) = std::env::var("ARTIFACT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    init_threads();
    let out = match &cli.cmd {
        Command::Solve(over) => solve(over, cli.verbose),
        Command::Experiment { name, over } => experiment(name, over, cli.verbose),
        Command::Norms { checkpoint, s, p, r, slot } => norms(checkpoint, *s, *p, *r, slot),
        Command::List => {
            for n in NAMES {
                println!("{n}");
            }
            Ok(())
        }
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
