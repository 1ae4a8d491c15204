//! `stokes`: command line front end for the resolvent solvers.
//!
//! Every subcommand prints human-readable PASS/FAIL lines for the checks it
//! runs and exits 0 only when all of them pass, so the binary slots directly
//! into scripts and CI. Exit code 1 means a check failed, 2 means the run
//! itself errored (bad configuration, I/O, solver refusal).

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, TAU};
use std::path::PathBuf;
use stokes_core::graph::{self, GraphOptions, GraphProfile};
use stokes_core::halfspace::{self, corrector_decay_probe, ExtensionMode};
use stokes_core::harness::config::SweepConfig;
use stokes_core::harness::duality::duality_check;
use stokes_core::harness::semigroup::{resolvent_identity_gap, semigroup_apply, SemigroupOptions};
use stokes_core::harness::{data, run_sweep};
use stokes_core::sector::{ResolventParam, Sector};
use stokes_core::wholespace;
use stokes_core::{dump, ScalarField, SlabGrid, TorusGrid, VectorField};

#[derive(Parser)]
#[command(name = "stokes", version, about = "Stokes resolvent solvers and verification sweeps")]
struct Cli {
    /// Worker threads for parallel sections (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write sweep.json / sweep.csv.
    Sweep {
        /// Configuration file (key = value lines); defaults apply if absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inline overrides, e.g. --set n=32 --set "qs = 2,4".
        #[arg(long = "set")]
        set: Vec<String>,
        /// Output directory for the report files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve one seeded problem and report its residuals.
    Solve {
        /// Domain: whole, half or graph.
        #[arg(long, default_value = "whole")]
        domain: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 65)]
        n_vertical: usize,
        #[arg(long, default_value_t = 8.0)]
        height: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda_abs: f64,
        /// Angular position as a fraction of the sector half-opening.
        #[arg(long, default_value_t = 0.0)]
        lambda_frac: f64,
        #[arg(long, default_value_t = FRAC_PI_4)]
        theta: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Cosine boundary amplitude for the graph domain.
        #[arg(long, default_value_t = 0.05)]
        lip: f64,
        /// If set, dump u and p (binary + JSON header) under this prefix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weak-form duality identity on the torus over several seeds.
    Duality {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = FRAC_PI_4)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda_abs: f64,
        #[arg(long, default_value_t = 0.5)]
        lambda_frac: f64,
    },
    /// Semigroup checks: single-mode decay, the semigroup property, and the
    /// resolvent identity.
    Semigroup {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = FRAC_PI_4)]
        theta: f64,
    },
    /// Decay probe for the boundary corrector multipliers.
    ProbeKernel {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = FRAC_PI_4)]
        theta: f64,
        /// Sector-edge fraction for the probed resolvent parameter.
        #[arg(long, default_value_t = 0.9)]
        lambda_frac: f64,
        /// Decay reserve: the probe weights by e^{+delta·s·x}.
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
    },
    /// Power-iteration estimate of the graph remainder contraction factor.
    ProbeContraction {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 33)]
        n_vertical: usize,
        #[arg(long, default_value_t = 4.0)]
        height: f64,
        #[arg(long, default_value_t = 0.05)]
        lip: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda_abs: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda_frac: f64,
        #[arg(long, default_value_t = FRAC_PI_4)]
        theta: f64,
        #[arg(long, default_value_t = 3)]
        probes: usize,
        #[arg(long, default_value_t = 4)]
        steps: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Global pool for subcommands that do not build their own.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn check(name: &str, value: f64, tol: f64) -> bool {
    let ok = value <= tol;
    println!("{}: {} ({value:.3e} vs {tol:.1e})", name, if ok { "PASS" } else { "FAIL" });
    ok
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep { config, set, out } => cmd_sweep(config, set, out, cli.threads),
        Command::Solve {
            domain,
            dim,
            n,
            n_vertical,
            height,
            lambda_abs,
            lambda_frac,
            theta,
            seed,
            lip,
            out,
        } => cmd_solve(&domain, dim, n, n_vertical, height, lambda_abs, lambda_frac, theta, seed, lip, out),
        Command::Duality { dim, n, seeds, theta, lambda_abs, lambda_frac } => {
            cmd_duality(dim, n, seeds, theta, lambda_abs, lambda_frac)
        }
        Command::Semigroup { n, t, theta } => cmd_semigroup(n, t, theta),
        Command::ProbeKernel { dim, theta, lambda_frac, delta } => {
            cmd_probe_kernel(dim, theta, lambda_frac, delta)
        }
        Command::ProbeContraction {
            dim,
            n,
            n_vertical,
            height,
            lip,
            lambda_abs,
            lambda_frac,
            theta,
            probes,
            steps,
        } => cmd_probe_contraction(
            dim, n, n_vertical, height, lip, lambda_abs, lambda_frac, theta, probes, steps,
        ),
    }
}

fn cmd_sweep(config: Option<PathBuf>, set: Vec<String>, out: PathBuf, threads: usize) -> Result<bool> {
    let mut text = match &config {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => String::new(),
    };
    for kv in &set {
        text.push('\n');
        text.push_str(kv);
    }
    let mut cfg = SweepConfig::parse(&text)?;
    if threads > 0 {
        cfg.threads = threads;
    }
    let report = run_sweep(&cfg)?;
    std::fs::create_dir_all(&out)?;
    let json_path = out.join("sweep.json");
    let csv_path = out.join("sweep.csv");
    std::fs::write(&json_path, report.to_json()?)?;
    std::fs::write(&csv_path, report.to_csv())?;
    println!("wrote {} and {}", json_path.display(), csv_path.display());

    let mut pass = true;
    for s in &report.summaries {
        println!(
            "{} q={}: ratio_u in [{:.3e}, {:.3e}], uniformity {:.2}; ratio_grad uniformity {:.2}",
            s.domain, s.q, s.baseline_ratio_u, s.max_ratio_u, s.uniformity_u, s.uniformity_grad
        );
        pass &= s.uniformity_u <= 10.0 && s.uniformity_grad <= 10.0;
    }
    let worst_residual = report.rows.iter().fold(0.0f64, |m, r| m.max(r.residual_rel));
    pass &= check("sweep residuals", worst_residual, 1e-8);
    println!("sweep uniformity: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    domain: &str,
    dim: usize,
    n: usize,
    n_vertical: usize,
    height: f64,
    lambda_abs: f64,
    lambda_frac: f64,
    theta: f64,
    seed: u64,
    lip: f64,
    out: Option<PathBuf>,
) -> Result<bool> {
    let sector = Sector::new(theta)?;
    let lambda = sector.lambda_at(lambda_abs, lambda_frac);
    let param = ResolventParam::in_sector(lambda, &sector)?;
    println!("domain {domain}, lambda = {:.6e} + {:.6e}i, seed {seed}", lambda.re, lambda.im);

    let (u, p, pass) = match domain {
        "whole" => {
            let grid = TorusGrid::cubic(dim, n, TAU)?;
            let rhs = data::band_limited_rhs(&grid, seed, true, true, true)?;
            let sol = wholespace::solve_whole_space(&rhs, &param)?;
            let rep = wholespace::residual(&sol.u, &sol.p, &rhs, &param)?;
            let pass = check("momentum residual", rep.momentum_rel, 1e-10)
                & check("divergence residual", rep.divergence_rel, 1e-10);
            (sol.u, sol.p, pass)
        }
        "half" => {
            let slab = SlabGrid::isotropic(dim, n, TAU, n_vertical, height)?;
            let rhs = data::parity_rhs_on_slab(&slab, seed, true, true, true)?;
            let sol = halfspace::solve_half_space(&rhs, &param, ExtensionMode::Strict)?;
            let rep = halfspace::residual(&sol, &rhs)?;
            let pass = check("momentum residual", rep.momentum_rel, 1e-9)
                & check("divergence residual", rep.divergence_rel, 1e-9)
                & check("wall trace", rep.trace_rel, 1e-10);
            (sol.u, sol.p, pass)
        }
        "graph" => {
            let slab = SlabGrid::isotropic(dim, n, TAU, n_vertical, height)?;
            let profile = GraphProfile::cosine(&slab.horizontal, lip, 1)?;
            let rhs = data::parity_rhs_on_slab(&slab, seed, true, true, true)?;
            let sol = graph::solve_graph(&rhs, &profile, lambda, &GraphOptions::default())?;
            println!(
                "iterations {}, contraction factor {:.3}",
                sol.log.iterations, sol.log.rho
            );
            let rep = graph::residual(&sol)?;
            let pass = check("momentum residual", rep.momentum_rel, 1e-8)
                & check("divergence residual", rep.divergence_rel, 1e-8);
            (sol.u, sol.p, pass)
        }
        other => anyhow::bail!("unknown domain {other:?} (expected whole, half or graph)"),
    };

    if let Some(prefix) = out {
        if let Some(parent) = prefix.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let u_base = prefix.join("u");
        let p_base = prefix.join("p");
        std::fs::create_dir_all(&prefix)?;
        dump::dump_vector(&u_base, &u)?;
        dump::dump_scalar(&p_base, &p)?;
        println!("dumped fields under {}", prefix.display());
    }
    Ok(pass)
}

fn cmd_duality(dim: usize, n: usize, seeds: u64, theta: f64, abs: f64, frac: f64) -> Result<bool> {
    let grid = TorusGrid::cubic(dim, n, TAU)?;
    let sector = Sector::new(theta)?;
    let lambda = sector.lambda_at(abs, frac);
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let rep = duality_check(&grid, seed, lambda)?;
        println!("seed {seed}: energy {:.6e}, gap {:.3e}", rep.energy, rep.rel_gap);
        worst = worst.max(rep.rel_gap);
    }
    Ok(check("duality pairing", worst, 1e-9))
}

fn cmd_semigroup(n: usize, t: f64, theta: f64) -> Result<bool> {
    let grid = TorusGrid::cubic(2, n, TAU)?;
    let opts = SemigroupOptions { theta, ..SemigroupOptions::default() };

    let ux = ScalarField::from_fn(grid.clone(), |x| Complex64::new(x[1].cos(), 0.0));
    let u0 = VectorField::from_components(vec![ux, ScalarField::zeros(grid.clone())])?;
    let ut = semigroup_apply(&u0, t, &opts)?;
    let expect = u0.scale(Complex64::new((-t).exp(), 0.0));
    let decay_gap = ut.sub(&expect)?.max_abs() / (-t).exp();
    let mut pass = check("single-mode decay", decay_gap, 1e-6);

    let half = semigroup_apply(&u0, 0.5 * t, &opts)?;
    let twice = semigroup_apply(&half, 0.5 * t, &opts)?;
    let once = semigroup_apply(&u0, t, &opts)?;
    let semi_gap = twice.sub(&once)?.max_abs() / once.max_abs().max(1e-300);
    pass &= check("semigroup property", semi_gap, 1e-6);

    let force = data::band_limited_vector(&grid, 3, n / 4)?;
    let identity_gap = resolvent_identity_gap(
        &force,
        Complex64::new(1.0, 2.0),
        Complex64::from_polar(30.0, -1.9),
    )?;
    pass &= check("resolvent identity", identity_gap, 1e-9);
    Ok(pass)
}

fn cmd_probe_kernel(dim: usize, theta: f64, frac: f64, delta: f64) -> Result<bool> {
    let sector = Sector::new(theta)?;
    let lambda = sector.lambda_at(1.0, frac);
    let s_samples: Vec<f64> = (0..=32).map(|i| 0.5 * i as f64).collect();
    let x_samples: Vec<f64> = (0..=32).map(|i| 0.25 * i as f64).collect();
    let (velocity, rows) = corrector_decay_probe(dim, lambda, delta, &s_samples, &x_samples)?;
    println!(
        "velocity block: sup {:.4e} at s = {}, x = {}, order {:?}",
        velocity.sup, velocity.arg_s, velocity.arg_x, velocity.order
    );
    let mut worst = velocity.sup;
    for (row, col, rep) in &rows {
        println!(
            "entry ({row}, {col}): sup {:.4e} at s = {}, x = {}, order {:?}",
            rep.sup, rep.arg_s, rep.arg_x, rep.order
        );
        worst = worst.max(rep.sup);
    }
    let pass = worst.is_finite();
    println!(
        "kernel decay probe: {} (weighted sup {:.4e})",
        if pass { "PASS" } else { "FAIL" },
        worst
    );
    Ok(pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_probe_contraction(
    dim: usize,
    n: usize,
    n_vertical: usize,
    height: f64,
    lip: f64,
    abs: f64,
    frac: f64,
    theta: f64,
    probes: usize,
    steps: usize,
) -> Result<bool> {
    let slab = SlabGrid::isotropic(dim, n, TAU, n_vertical, height)?;
    let profile = GraphProfile::cosine(&slab.horizontal, lip, 1)?;
    let sector = Sector::new(theta)?;
    let lambda = sector.lambda_at(abs, frac);
    let report = graph::contraction_probe(&slab, &profile, lambda, probes, steps, 2.0)?;
    for (i, est) in report.estimates.iter().enumerate() {
        println!("probe {i}: contraction estimate {est:.4}");
    }
    let pass = report.max < 1.0;
    println!(
        "contraction probe: {} (max {:.4}, slope {:.3})",
        if pass { "PASS" } else { "FAIL" },
        report.max,
        profile.lip()
    );
    Ok(pass)
}
