//! Command-line front end: experiment configuration, execution, and
//! bit-stable result emission.
//!
//! Exit codes: 0 ok, 2 config error, 3 invariant violation, 4 resource
//! guard. Every output file starts with a `# config_hash=… seed=…` header
//! line; re-running a command with the same config and seed produces
//! byte-identical files. `QLIMIT_SEED` overrides the config seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qstack::{
    egorov_defect, epsilon_n, glue, internal_segments, run_qlimit_experiment_threads,
    schedule_n_of_n, util, DiscreteMap, Error, ExperimentConfig, FamilyMap, GluingPolicy,
    UnitaryMap,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_GUARD: u8 = 4;

/// Lattice sizes past this need more care than this tool offers.
const N_GUARD: usize = 1 << 22;
/// The closed-form spectrum stores O(K) amplitudes per eigenpair; cap the
/// spectrum export accordingly.
const SPECTRUM_GUARD: usize = 1 << 14;

#[derive(Parser)]
#[command(name = "qstack", about = "quantised cutting-and-stacking maps — build, spectra, sweeps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment configuration (JSON).
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the N sweep.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Size cap for dense-matrix oracle paths.
    #[arg(long, global = true, default_value_t = 512)]
    oracle_limit: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the lattice maps f_N and write one CSV per N.
    Build,
    /// Build maps, compute full spectra, and write one CSV per N.
    Spectrum,
    /// Run the sweep experiment: summary JSON plus per-orbit CSVs.
    Qlimit,
    /// Measure Egorov defects and delta_N across the sweep.
    Egorov,
    /// Verify the trace identity (1/N)·Tr Op[a] = â_0 against dense matrices.
    TraceCheck,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, msg: msg.into() }
    }

    fn guard(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_GUARD, msg: msg.into() }
    }

    fn invariant(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_INVARIANT, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_)
            | Error::BadRational(_)
            | Error::BadInterval { .. }
            | Error::ShortSweep { .. } => EXIT_CONFIG,
            Error::OracleLimit { .. } => EXIT_GUARD,
            _ => EXIT_INVARIANT,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_INVARIANT, msg: format!("io: {e}") }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qstack: error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    if let Ok(seed) = std::env::var("QLIMIT_SEED") {
        cfg.seed = seed
            .parse()
            .map_err(|_| Failure::config(format!("QLIMIT_SEED must be a u64, got {seed:?}")))?;
    }
    cfg.validate().map_err(Failure::from)?;
    Ok(cfg)
}

/// Write via a temp file and rename, so partial output never lands under the
/// final name.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn header(cfg: &ExperimentConfig, n: Option<usize>) -> String {
    match n {
        Some(n) => format!("config_hash={} seed={} N={n}", cfg.hash(), cfg.seed),
        None => format!("config_hash={} seed={}", cfg.hash(), cfg.seed),
    }
}

fn build_map_at(
    cfg: &ExperimentConfig,
    built: &qstack::BuiltMap,
    policy: &GluingPolicy,
    n: usize,
) -> Result<(DiscreteMap, qstack::StackFamily), Failure> {
    let mut stage = schedule_n_of_n(&built.program, n, cfg.kappa)?;
    if let Some(cap) = cfg.stage_cap {
        stage = stage.min(cap.max(1));
    }
    let family = built.program.refine(stage)?;
    let (partial, index) = internal_segments(&family, n);
    let out = glue(&partial, &index, policy, &family, built.classical.as_ref())?;
    Ok((out.map, family))
}

fn check_guard(sweep: &[usize], guard: usize, what: &str) -> Result<(), Failure> {
    if let Some(&n) = sweep.iter().find(|&&n| n > guard) {
        return Err(Failure::guard(format!("N = {n} exceeds the {what} guard ({guard})")));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli.config)?;
    fs::create_dir_all(&cli.out)?;
    match cli.cmd {
        Cmd::Build => cmd_build(cli, &cfg),
        Cmd::Spectrum => cmd_spectrum(cli, &cfg),
        Cmd::Qlimit => cmd_qlimit(cli, &cfg),
        Cmd::Egorov => cmd_egorov(cli, &cfg),
        Cmd::TraceCheck => cmd_trace_check(cli, &cfg),
    }
}

fn cmd_build(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), Failure> {
    check_guard(&cfg.sweep, N_GUARD, "lattice size")?;
    let built = cfg.map.build()?;
    let policy = cfg.policy.build()?;
    for &n in &cfg.sweep {
        let (map, _) = build_map_at(cfg, &built, &policy, n)?;
        let mut buf = Vec::new();
        map.write_csv(&mut buf, Some(&header(cfg, Some(n))))?;
        write_atomic(&cli.out.join(format!("map_N{n}.csv")), &buf)?;
    }
    println!("built {} map(s) into {}", cfg.sweep.len(), cli.out.display());
    Ok(())
}

fn cmd_spectrum(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), Failure> {
    check_guard(&cfg.sweep, SPECTRUM_GUARD, "spectrum size")?;
    let built = cfg.map.build()?;
    let policy = cfg.policy.build()?;
    let mut summary = String::from("N,eigenpairs,max_residual\n");
    let mut worst_all = 0.0f64;
    for &n in &cfg.sweep {
        let (map, _) = build_map_at(cfg, &built, &policy, n)?;
        let u = UnitaryMap::new(map);
        let mut buf = Vec::new();
        let worst = qstack::write_spectrum_csv(&u, &mut buf, Some(&header(cfg, Some(n))))?;
        write_atomic(&cli.out.join(format!("spectrum_N{n}.csv")), &buf)?;
        summary.push_str(&format!("{n},{n},{}\n", util::fmt_f64(worst)));
        worst_all = worst_all.max(worst);
    }
    let mut buf = format!("# {}\n", header(cfg, None)).into_bytes();
    buf.extend(summary.as_bytes());
    write_atomic(&cli.out.join("spectrum_residuals.csv"), &buf)?;
    if worst_all > 1e-10 {
        return Err(Failure::invariant(format!("eigenpair residual {worst_all:e} exceeds 1e-10")));
    }
    println!("spectra written; max residual {worst_all:e}");
    Ok(())
}

fn cmd_qlimit(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), Failure> {
    check_guard(&cfg.sweep, N_GUARD, "lattice size")?;
    let report = run_qlimit_experiment_threads(cfg, cli.threads)?;
    for row in &report.sweep {
        let mut buf = format!("# {}\n", header(cfg, Some(row.n))).into_bytes();
        let mut line = String::from("orbit_id,K,distance_lebesgue");
        for i in 0..cfg.targets.len() {
            line.push_str(&format!(",distance_target_{i}"));
        }
        for i in 0..cfg.observables.len() {
            line.push_str(&format!(",re_expect_{i},im_expect_{i}"));
        }
        line.push('\n');
        buf.extend(line.as_bytes());
        for orbit in &row.orbits {
            let mut line = format!(
                "{},{},{}",
                orbit.orbit_id,
                orbit.k,
                util::fmt_f64(orbit.distance_lebesgue)
            );
            for d in &orbit.distance_target {
                line.push_str(&format!(",{}", util::fmt_f64(*d)));
            }
            for e in &orbit.expectations {
                line.push_str(&format!(",{},{}", util::fmt_f64(e[0]), util::fmt_f64(e[1])));
            }
            line.push('\n');
            buf.extend(line.as_bytes());
        }
        write_atomic(&cli.out.join(format!("orbits_N{}.csv", row.n)), &buf)?;
    }
    let json = serde_json::to_vec_pretty(&report).map_err(Error::from)?;
    write_atomic(&cli.out.join("summary.json"), &json)?;
    println!("experiment complete: {} sweep points, summary.json written", report.sweep.len());
    Ok(())
}

fn cmd_egorov(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), Failure> {
    check_guard(&cfg.sweep, N_GUARD, "lattice size")?;
    if cfg.observables.is_empty() {
        return Err(Failure::config("egorov needs at least one observable in the config"));
    }
    let built = cfg.map.build()?;
    let policy = cfg.policy.build()?;
    let (a, bump) = cfg.observables[0].build()?;
    let mut buf = format!("# {}\n", header(cfg, None)).into_bytes();
    buf.extend(
        b"N,stage,epsilon,delta,delta_internal,delta_completion,defect,ratio,undefined_excluded\n"
            .iter(),
    );
    for &n in &cfg.sweep {
        let (map, family) = build_map_at(cfg, &built, &policy, n)?;
        let u = UnitaryMap::new(map);
        let eps = epsilon_n(&family);
        let stage_map = FamilyMap(family.clone());
        let rep = egorov_defect(&a, &stage_map, &u, eps, &built.singular_image, cli.oracle_limit)?;
        let ratio = if rep.delta.delta > 0.0 { rep.defect / rep.delta.delta } else { f64::NAN };
        buf.extend(
            format!(
                "{n},{},{},{},{},{},{},{},{}\n",
                family.stage(),
                util::fmt_f64(eps),
                util::fmt_f64(rep.delta.delta),
                util::fmt_f64(rep.delta.delta_internal),
                util::fmt_f64(rep.delta.delta_completion),
                util::fmt_f64(rep.defect),
                util::fmt_f64(ratio),
                rep.delta.excluded_undefined
            )
            .as_bytes(),
        );
    }
    write_atomic(&cli.out.join("egorov.csv"), &buf)?;
    if let Some(bump) = bump {
        let json = serde_json::to_vec_pretty(&bump).map_err(Error::from)?;
        write_atomic(&cli.out.join("bump_report.json"), &json)?;
    }
    println!("egorov sweep written to {}", cli.out.join("egorov.csv").display());
    Ok(())
}

fn cmd_trace_check(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), Failure> {
    if cfg.observables.is_empty() {
        return Err(Failure::config("trace-check needs observables in the config"));
    }
    check_guard(&cfg.sweep, cli.oracle_limit, "dense oracle")?;
    let mut worst = 0.0f64;
    let mut buf = format!("# {}\n", header(cfg, None)).into_bytes();
    buf.extend(b"N,observable,deviation\n".iter());
    for &n in &cfg.sweep {
        for (i, spec) in cfg.observables.iter().enumerate() {
            let (a, _) = spec.build()?;
            let fast = qstack::op_trace(&a, n)?;
            let dense = qstack::op_dense(&a, n)?.trace() / n as f64;
            let dev = (fast - dense).norm();
            worst = worst.max(dev);
            buf.extend(format!("{n},{i},{}\n", util::fmt_f64(dev)).as_bytes());
        }
    }
    write_atomic(&cli.out.join("trace_check.csv"), &buf)?;
    if worst > 1e-12 {
        return Err(Failure::invariant(format!("trace identity violated by {worst:e}")));
    }
    println!("trace-check: OK (max deviation {worst:e})");
    Ok(())
}
