//! Command-line surface. Options may also come from a flat `key=value`
//! config file (`--config`); flags given on the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bifurcation::{self, ClassifyOptions, CollapsePolicy};
use crate::bursting::{self, NoiseScheme, NoiseSpec, SweepSettings};
use crate::equilibrium;
use crate::error::{Error, Result};
use crate::growth::{GrowthModel, ModelFamily, PlantEquilibriumReport};
use crate::io;
use crate::reproduce::{self, Target};
use crate::system::{SimOptions, State, SystemSpec, Variant};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Parser)]
#[command(name = "herbidyn", version, about = "Plant-herbivore map dynamics: equilibria, bifurcations, noisy bursts")]
#[command(args_override_self = true)]
pub struct RunConfig {
    /// Flat key=value file with default option values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Base random seed.
    #[arg(long, global = true, env = "HERBIDYN_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Iterate the map and write the trajectory.
    Simulate(SimulateArgs),
    /// Boundary and interior equilibria with eigenvalues (JSON).
    Equilibria(SpecArgs),
    /// Transcritical, extinction and persistence predicates (JSON).
    Thresholds(SpecArgs),
    /// Neimark-Sacker and transcritical curves over an r range.
    NsCurve(CurveArgs),
    /// Numerical-collapse or heteroclinic curve over an r range.
    CollapseCurve(CollapseArgs),
    /// Attractor labels over an (a, r) grid.
    Scan(ScanArgs),
    /// Burst statistics of noisy runs for several noise amplitudes.
    Burst(BurstArgs),
    /// Regenerate the data and plot script behind a figure or table.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long, default_value = "II")]
    pub variant: Variant,
    /// Growth law kind (bh, holling3, ricker, logistic, log-ricker, bh-table,
    /// hassell, power-bh, generalized-bh, holling-growth).
    #[arg(long, default_value = "bh")]
    pub model: String,
    /// Growth parameter of the bh, holling3 and ricker families.
    #[arg(long)]
    pub r: Option<f64>,
    /// Other growth parameters as NAME=VALUE (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Attack rate.
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Initial plant density (default 0.9 times the largest plant equilibrium).
    #[arg(long)]
    pub p0: Option<f64>,
    /// Initial herbivore density (default 0.1).
    #[arg(long)]
    pub h0: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub gens: usize,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Additive herbivore noise amplitude.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, default_value = "herbivore-additive")]
    pub scheme: NoiseScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Numeric,
    Heteroclinic,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(long, default_value = "II")]
    pub variant: Variant,
    #[arg(long, default_value = "bh")]
    pub model: ModelFamily,
    /// r grid as start:stop:step.
    #[arg(long)]
    pub r: String,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CollapseArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Defaults to heteroclinic for holling3, numeric otherwise.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    #[arg(long, default_value_t = 10_000)]
    pub transient: usize,
    #[arg(long, default_value_t = 2000)]
    pub sample: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value = "II")]
    pub variant: Variant,
    #[arg(long, default_value = "bh")]
    pub model: ModelFamily,
    /// a grid as start:stop:step.
    #[arg(long)]
    pub a: String,
    /// r grid as start:stop:step.
    #[arg(long)]
    pub r: String,
    #[arg(long, default_value_t = 10_000)]
    pub transient: usize,
    #[arg(long, default_value_t = 2000)]
    pub sample: usize,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BurstArgs {
    #[arg(long, default_value = "II")]
    pub variant: Variant,
    #[arg(long, default_value = "bh")]
    pub model: ModelFamily,
    #[arg(long, default_value_t = 3.95)]
    pub a: f64,
    #[arg(long, default_value_t = 4.55)]
    pub r: f64,
    /// Comma-separated noise amplitudes.
    #[arg(long, default_value = "1e-2,1e-3,1e-4,1e-5,1e-6,1e-7")]
    pub omega: String,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    #[arg(long, default_value_t = 1000)]
    pub gens: usize,
    #[arg(long, default_value_t = bursting::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = bursting::DEFAULT_TRANSIENT)]
    pub transient: usize,
    #[arg(long, default_value = "herbivore-additive")]
    pub scheme: NoiseScheme,
    /// Per-run CSV; the aggregate goes to `--summary` or `<out>.summary.csv`.
    #[arg(long, default_value = "burst.csv")]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    pub target: Target,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

/// Parses `start:stop:step` into the inclusive grid `start + i*step`.
pub fn parse_range(flag: &str, text: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::usage(format!("malformed range `--{flag} {text}`: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(bad("expected start:stop:step"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if step <= 0.0 {
        return Err(bad("step must be positive"));
    }
    if stop < start {
        return Err(bad("stop is below start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

pub fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>> {
    let out = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::usage(format!("malformed list `--{flag} {text}`")))?;
    if out.is_empty() {
        return Err(Error::usage(format!("`--{flag}` needs at least one value")));
    }
    Ok(out)
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::usage(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

const SUBCOMMANDS: [&str; 8] =
    ["simulate", "equilibria", "thresholds", "ns-curve", "collapse-curve", "scan", "burst", "reproduce"];

/// Parses arguments, folding in the config file if one is named. Config
/// entries become flags placed before the user's own, so the latter win;
/// keys the subcommand does not know are rejected like unknown flags.
pub fn parse_config<I, T>(args: I) -> std::result::Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(path) = config_path(&args) {
        let entries = read_config_file(&path)
            .map_err(|e| RunConfig::command().error(ErrorKind::InvalidValue, e.to_string()))?;
        let pos = args
            .iter()
            .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
            .map(|i| i + 1)
            .unwrap_or(args.len());
        let mut injected = Vec::new();
        for (k, v) in entries {
            if k == "config" {
                return Err(RunConfig::command().error(ErrorKind::InvalidValue, "config files cannot nest"));
            }
            match v.as_str() {
                "true" => injected.push(OsString::from(format!("--{k}"))),
                "false" => {}
                _ => {
                    injected.push(OsString::from(format!("--{k}")));
                    injected.push(OsString::from(v));
                }
            }
        }
        args.splice(pos..pos, injected);
    }
    let matches = RunConfig::command().try_get_matches_from(args)?;
    RunConfig::from_arg_matches(&matches)
}

fn build_model(kind: &str, r: Option<f64>, params: &[String]) -> Result<GrowthModel> {
    let mut map = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::usage(format!("`--param {p}` is not NAME=VALUE")))?;
        let v: f64 = v.parse().map_err(|_| Error::usage(format!("`--param {p}`: not a number")))?;
        map.insert(k.to_string(), v);
    }
    match (kind.parse::<ModelFamily>(), r) {
        (Ok(family), Some(r)) if map.is_empty() => family.model(r),
        _ => {
            if let Some(r) = r {
                map.insert("r".into(), r);
            }
            GrowthModel::from_params(kind, &map)
        }
    }
}

pub fn build_spec(args: &SpecArgs) -> Result<SystemSpec> {
    SystemSpec::new(args.variant, build_model(&args.model, args.r, &args.params)?, args.a)
}

fn output(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    if path.as_os_str() == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        f(&mut lock)?;
        lock.flush()?;
        Ok(())
    } else {
        io::to_file(path, |w| f(w))
    }
}

#[derive(Serialize)]
struct EquilibriaOutput {
    plant: PlantEquilibriumReport,
    #[serde(flatten)]
    system: equilibrium::SystemReport,
}

/// Executes a parsed configuration on a thread pool of the requested size.
pub fn run(cfg: RunConfig) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(Error::usage("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::usage(format!("cannot start thread pool: {e}")))?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    pool.install(|| dispatch(cfg.command, seed))
}

fn dispatch(command: Command, seed: u64) -> Result<()> {
    match command {
        Command::Simulate(args) => {
            let spec = build_spec(&args.spec)?;
            let d = spec.default_start()?;
            let s0 = State::new(args.p0.unwrap_or(d.p), args.h0.unwrap_or(d.h))?;
            let traj = match args.omega {
                Some(omega) => {
                    if args.stride != 1 {
                        return Err(Error::usage("--stride is not supported with --omega"));
                    }
                    bursting::simulate_noisy(&spec, &NoiseSpec::new(omega, seed, args.scheme)?, s0, args.gens)?
                }
                None => spec.simulate_with(s0, args.gens, SimOptions { stride: args.stride })?,
            };
            output(&args.spec.out, |w| io::write_csv(w, io::Schema::Trajectory, io::trajectory_rows(&traj)))
        }
        Command::Equilibria(args) => {
            let spec = build_spec(&args)?;
            let set = spec.model.plant_equilibria(spec.model.default_search_bound())?;
            let report = EquilibriaOutput {
                plant: PlantEquilibriumReport::new(&spec.model, &set),
                system: equilibrium::analyze(&spec)?,
            };
            output(&args.out, |w| io::write_json(w, &report))
        }
        Command::Thresholds(args) => {
            let spec = build_spec(&args)?;
            let t = equilibrium::thresholds(&spec)?;
            output(&args.out, |w| io::write_json(w, &t))
        }
        Command::NsCurve(args) => {
            let grid = parse_range("r", &args.r)?;
            let tc = bifurcation::transcritical_curve(args.model, &grid)?;
            let ns = bifurcation::ns_curve(args.variant, args.model, &grid)?;
            report_gaps(&ns);
            output(&args.out, |w| io::write_curves(w, &[&tc, &ns]))
        }
        Command::CollapseCurve(args) => {
            let grid = parse_range("r", &args.curve.r)?;
            let policy = match args.policy {
                Some(PolicyArg::Numeric) => CollapsePolicy::Numeric,
                Some(PolicyArg::Heteroclinic) => CollapsePolicy::Heteroclinic,
                None => CollapsePolicy::for_family(args.curve.model),
            };
            let opts = classify_options(args.transient, args.sample)?;
            let c = bifurcation::collapse_curve(args.curve.variant, args.curve.model, &grid, policy, opts)?;
            report_gaps(&c);
            output(&args.curve.out, |w| io::write_curves(w, &[&c]))
        }
        Command::Scan(args) => {
            let a = parse_range("a", &args.a)?;
            let r = parse_range("r", &args.r)?;
            let opts = classify_options(args.transient, args.sample)?;
            let cells = bifurcation::grid_scan(args.variant, args.model, &a, &r, opts)?;
            output(&args.out, |w| io::write_scan(w, &cells))
        }
        Command::Burst(args) => {
            let omegas = parse_list("omega", &args.omega)?;
            let spec = SystemSpec::new(args.variant, args.model.model(args.r)?, args.a)?;
            let settings = SweepSettings {
                runs: args.runs,
                generations: args.gens,
                seed,
                threshold: args.threshold,
                transient: args.transient,
                scheme: args.scheme,
            };
            let stats = bursting::noise_sweep(&spec, spec.default_start()?, &omegas, &settings)?;
            let summary = args.summary.clone().unwrap_or_else(|| args.out.with_extension("summary.csv"));
            output(&args.out, |w| io::write_burst_runs(w, &stats))?;
            output(&summary, |w| io::write_burst_summary(w, &stats))
        }
        Command::Reproduce(args) => {
            let written = reproduce::reproduce(args.target, &args.out_dir, seed)?;
            for p in written {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn classify_options(transient: usize, sample: usize) -> Result<ClassifyOptions> {
    if transient < 1000 || sample < 1000 {
        return Err(Error::usage("--transient and --sample must each be at least 1000"));
    }
    Ok(ClassifyOptions { transient, sample })
}

fn report_gaps(c: &bifurcation::BifurcationCurve) {
    for g in &c.gaps {
        eprintln!("note: no {} point at r = {}: {}", c.kind, g.r, g.reason);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_example_parses() {
        let cfg = parse_config(
            "herbidyn simulate --variant II --model bh --r 2.5 --a 2 --p0 1 --h0 0.5 --gens 2000 --out traj.csv"
                .split_whitespace(),
        )
        .unwrap();
        let Command::Simulate(s) = cfg.command else { panic!() };
        assert_eq!(s.gens, 2000);
        assert_eq!(s.spec.a, 2.0);
        assert_eq!(build_spec(&s.spec).unwrap().model, GrowthModel::beverton_holt(2.5).unwrap());
    }

    #[test]
    fn ranges() {
        let g = parse_range("a", "0.1:0.5:0.1").unwrap();
        assert_eq!(g.len(), 5);
        assert!(matches!(parse_range("a", "4:1:0.1"), Err(Error::Usage(m)) if m.contains("--a 4:1:0.1")));
        assert!(parse_range("a", "1:2").is_err());
        assert!(parse_range("a", "1:2:0").is_err());
    }

    #[test]
    fn config_file_defaults_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# defaults\na=1.5\ngens=10\nr=3\n").unwrap();
        let cfg = parse_config([
            "herbidyn",
            "simulate",
            "--config",
            path.to_str().unwrap(),
            "--gens",
            "20",
        ])
        .unwrap();
        let Command::Simulate(s) = cfg.command else { panic!() };
        assert_eq!(s.gens, 20);
        assert_eq!(s.spec.a, 1.5);
        assert_eq!(s.spec.r, Some(3.0));

        std::fs::write(&path, "bogus=1\n").unwrap();
        let err = parse_config(["herbidyn", "simulate", "--a", "1", "--config", path.to_str().unwrap()]).unwrap_err();
        assert!(err.to_string().contains("--bogus"));
    }

    #[test]
    fn generic_law_from_params() {
        let m = build_model("hassell", None, &["w=2.5".into(), "b=1.5".into()]).unwrap();
        assert_eq!(m.kind_name(), "hassell");
        assert!(build_model("hassell", None, &["w=2.5".into()]).is_err());
    }
}
