use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use thinfilm::experiments::{
    bubble_construction_check, bv_suite, check_bv_bounds, compactness_diagnostic,
    interpolation_suite, kernel_check, onset_scan, resolution_note, scaling_sweep, BvOptions,
    CheckRecord, ConstructionOptions, DomainDescriptor, ExperimentConfig, ExperimentResult,
    Provenance, SnapshotSink, Table,
};
use thinfilm::field_energy::guard::{self, LOWER_BOUND_CONSTANT, LOWER_BOUND_TOL};
use thinfilm::field_energy::{e_eps, f_eps, f_eps_finite_range};
use thinfilm::minimize::{initial_field, minimize_with};
use thinfilm::{EnergyModel, Magnetization2D};

/// Reduced thin-film energy: evaluation, minimization and bound checks.
#[derive(Parser, Debug)]
#[command(name = "thinfilm", version)]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for results.json, table.csv and snapshots.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a field snapshot.
    Energy {
        snapshot: PathBuf,
        /// Also evaluate G_eps and E_eps under the extrusion ansatz.
        #[arg(long)]
        stray: bool,
        /// Interaction range for F_eps,R.
        #[arg(long)]
        range: Option<f64>,
    },
    /// Minimize F_eps from the configured start.
    Minimize,
    /// Phase table over (eps, diam).
    OnsetScan,
    /// Run one checker suite.
    Check {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Sweep over eps on the configured domain.
    Sweep {
        #[arg(long, value_enum, default_value_t = SweepKind::Scaling)]
        kind: SweepKind,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Interpolation,
    Bv,
    Kernels,
    Construction,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepKind {
    Scaling,
    Compactness,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.solver.seed = s;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<ExperimentResult> {
    let cfg = load_config(cli)?;
    let sink = SnapshotSink::new(Some(cli.out.join("snapshots")));
    let res = match &cli.command {
        Command::Energy {
            snapshot,
            stray,
            range,
        } => energy(snapshot, *stray, *range, cfg.seed)?,
        Command::Minimize => minimize(&cfg, &cli.out)?,
        Command::OnsetScan => onset_scan(&cfg, &sink)?,
        Command::Check { suite } => match suite {
            Suite::Interpolation => interpolation_suite(&cfg)?,
            Suite::Bv => bv_suite(&cfg, &sink)?,
            Suite::Kernels => kernel_check()?,
            Suite::Construction => bubble_construction_check(&ConstructionOptions::default())?,
        },
        Command::Sweep { kind } => match kind {
            SweepKind::Scaling => scaling_sweep(&cfg, &sink)?,
            SweepKind::Compactness => compactness_diagnostic(&cfg, &sink)?,
        },
    };
    Ok(res)
}

fn energy(path: &Path, stray: bool, range: Option<f64>, seed: u64) -> Result<ExperimentResult> {
    let (m, p) = Magnetization2D::read_snapshot(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut b = if stray {
        e_eps(&m, &p)?
    } else {
        f_eps(&m, &p)?
    };
    if let Some(r) = range {
        b.f_eps_r = Some(f_eps_finite_range(&m, &p, r)?);
        b.range = Some(r);
    }
    let area = m.mask().area()?;
    let mut table = Table::new(&[
        "l_eps", "n", "f_eps", "f_eps_r", "g_eps", "e_eps", "bv", "mm_gap",
    ]);
    let g = b.g_eps.map(|g| g.total());
    table.push(vec![
        b.l_eps,
        b.n,
        b.f_eps,
        b.f_eps_r.unwrap_or(f64::NAN),
        g.unwrap_or(f64::NAN),
        b.e_eps.unwrap_or(f64::NAN),
        b.bv_norm,
        b.mm_gap,
    ]);
    let mut res = ExperimentResult::new("energy", Provenance::new(seed, Some(m.mask().h())), table);
    res.params = Some(p);
    res.domain = Some(DomainDescriptor::of(m.mask()));
    res.checks.push(CheckRecord::check(
        "lower bound F >= -(pi^2 e/4)|Omega|",
        "universal lower bound on F_eps for convex domains",
        -LOWER_BOUND_CONSTANT * area,
        b.f_eps,
        LOWER_BOUND_TOL * area,
    ));
    if let Some(g) = b.g_eps {
        res.checks.push(
            CheckRecord::check(
                "G_eps >= 0",
                "E_eps = F_eps + G_eps with G_eps >= 0",
                -g.total(),
                0.0,
                1e-8,
            )
            .with_note(format!(
                "exterior tail bound {:.3e}, unquantified remainder {:.3e}",
                g.exterior_tail_bound, g.error_term
            )),
        );
    }
    res.notes.push(serde_json::to_string(&b)?);
    res.notes.extend(resolution_note(m.mask().h(), p.epsilon));
    Ok(res)
}

fn minimize(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentResult> {
    let p = cfg.params()?;
    let mask = cfg.domain.mask()?;
    let model = EnergyModel::new(mask.clone(), p)?;
    let m0 = initial_field(&mask, &p, &cfg.solver)?;
    let tr = minimize_with(&model, m0, &cfg.solver)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let snap = out.join("final.field");
    tr.field.write_snapshot(&snap, &p)?;
    let mut table = Table::new(&["iteration", "f_eps", "l_eps", "n", "bv", "gradnorm", "step"]);
    for r in &tr.rows {
        table.push(vec![
            r.iteration as f64,
            r.f_eps,
            r.l_eps,
            r.n,
            r.bv,
            r.grad_norm,
            r.step,
        ]);
    }
    let mut res =
        ExperimentResult::new("minimize", Provenance::new(cfg.seed, Some(mask.h())), table);
    res.params = Some(p);
    res.domain = Some(DomainDescriptor::of(&mask));
    res.checks.push(CheckRecord::check(
        "descent trace monotone",
        "monotone line search",
        if tr.is_monotone() { 0.0 } else { 1.0 },
        0.0,
        0.0,
    ));
    let opts = BvOptions {
        alpha: cfg.alpha,
        eps0: cfg.eps0,
        ..BvOptions::default()
    };
    let mut recs = check_bv_bounds(&tr.field, &p, &opts)?;
    for r in recs.iter_mut().filter(|r| !r.passed()) {
        r.snapshot = Some(snap.clone());
    }
    res.checks.extend(recs);
    res.notes.push(format!("termination: {}", tr.termination));
    res.notes.extend(resolution_note(mask.h(), p.epsilon));
    Ok(res)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut res = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let g = guard::stats();
    res.checks.push(CheckRecord::check(
        "lower-bound guard violations over all evaluations",
        "universal lower bound on F_eps for convex domains",
        g.violations as f64,
        0.0,
        0.0,
    ));
    if let Err(e) = res.write(&cli.out) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let failed: Vec<_> = res.failures().collect();
    println!(
        "{}: {} checks, {} failed -> {}",
        res.experiment,
        res.checks.len(),
        failed.len(),
        cli.out.display()
    );
    for f in &failed {
        println!("FAIL {} (lhs {:.6e}, rhs {:.6e})", f.claim, f.lhs, f.rhs);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
