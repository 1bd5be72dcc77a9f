//! Command-line frontend: configure runs, execute simulations and
//! cross-checks, emit trajectories and reports.
//!
//! Exit codes: 0 success, 1 configuration error, 2 halted integration or a
//! cross-check beyond tolerance.

mod config;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};

use config::{Level, RunConfig, StabilityConfig};
use output::{read_trajectory_csv, run_summary, state_columns, write_trajectory_csv};
use vortexsphere::lifted::{momentum_l, LiftedField, LiftedState};
use vortexsphere::liepoisson::LiePoissonField;
use vortexsphere::shape::{shape_from_sphere, ShapeField};
use vortexsphere::sphere::{radius_projection, Circulations, SphereField, SphereState};
use vortexsphere::stability::{analyze_tetrahedron, EnergyCasimirSpec, Verdict};
use vortexsphere::timeint::{
    integrate, integrate_at_times, Monitor, TrajectoryRecord, VectorField,
};

#[derive(Parser)]
#[command(
    name = "vortexsphere",
    about = "Point-vortex dynamics on the sphere: simulate, cross-check, analyze"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one level and write trajectory.csv + summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the seed of a random preset.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the reduction-chain consistency checks and report deviations.
    Crosscheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Energy-Casimir analysis of the tetrahedron equilibrium.
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Recompute invariant monitors from a saved trajectory.
    Invariants {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Simulate { config, out, seed } => cmd_simulate(&config, &out, seed),
        Cmd::Crosscheck {
            config,
            out,
            tolerance,
            seed,
        } => cmd_crosscheck(&config, &out, tolerance, seed),
        Cmd::Stability { config, out } => cmd_stability(&config, &out),
        Cmd::Invariants { config, out } => cmd_invariants(&config, &out),
    }
}

fn load(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn monitors_for(level: Level, c: &Circulations) -> Vec<Monitor> {
    match level {
        Level::Sphere => vortexsphere::sphere::monitors(c),
        Level::Lifted => vortexsphere::lifted::monitors(c),
        Level::Liepoisson => vortexsphere::liepoisson::monitors(c),
        Level::Shape => vortexsphere::shape::monitors(c),
    }
}

/// Initial flat state and vector field for the configured level.
fn build_problem(
    cfg: &RunConfig,
    c: &Circulations,
    seed: Option<u64>,
) -> Result<(Vec<f64>, Box<dyn VectorField>)> {
    Ok(match cfg.level {
        Level::Sphere => {
            let state = cfg.sphere_initial(c, seed)?;
            (state.to_flat(), Box::new(SphereField::new(c.clone())))
        }
        Level::Lifted => {
            let state = cfg.sphere_initial(c, seed)?;
            let phases = match &cfg.phases {
                Some(p) => {
                    if p.len() != c.n() {
                        anyhow::bail!(
                            "field 'phases' has {} entries, expected {}",
                            p.len(),
                            c.n()
                        );
                    }
                    p.clone()
                }
                None => vec![0.0; c.n()],
            };
            let lifted = LiftedState::from_sphere_with_phases(&state, &phases)
                .map_err(|e| anyhow::anyhow!("field 'phases': {e}"))?;
            (lifted.to_flat(), Box::new(LiftedField::new(c.clone())))
        }
        Level::Liepoisson => {
            let state = cfg.sphere_initial(c, seed)?;
            let lam = momentum_l(&LiftedState::from_sphere(&state, c)?, c);
            (lam.to_flat(), Box::new(LiePoissonField::new(c.clone())))
        }
        Level::Shape => {
            let zeta = cfg.shape_initial(c, seed)?;
            (zeta.to_flat(), Box::new(ShapeField::new(c.clone())))
        }
    })
}

fn cmd_simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<i32> {
    let cfg = RunConfig::parse(&load(config)?)?;
    let c = cfg.circulations_checked()?;
    let int_cfg = cfg.integrator.to_config()?;
    let (y0, field) = build_problem(&cfg, &c, seed)?;
    let monitors = monitors_for(cfg.level, &c);

    let projection = match cfg.level {
        Level::Sphere => Some(radius_projection(&c)),
        _ => None,
    };
    let rec = match &projection {
        Some(p) => integrate(field.as_ref(), &y0, &int_cfg, &monitors, Some(p))?,
        None => integrate(field.as_ref(), &y0, &int_cfg, &monitors, None)?,
    };

    ensure_out(out)?;
    let cols = state_columns(cfg.level, c.n());
    write_trajectory_csv(&out.join("trajectory.csv"), &rec, &cols)?;
    let summary = run_summary(cfg.level, c.n(), &rec);
    std::fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;

    if let Some(halt) = &rec.halt {
        eprintln!(
            "integration halted at t = {}: {} (partial trajectory written)",
            halt.t, halt.error
        );
        return Ok(2);
    }
    if cfg.level == Level::Liepoisson {
        // Casimir drift is the proxy for staying on the coadjoint orbit
        for m in &rec.monitors {
            if m.name.starts_with('C') {
                let drift = rec.max_drift(&m.name).unwrap_or(0.0);
                if drift > 1e-6 {
                    eprintln!(
                        "warning: {} drifted by {drift:.3e}; the trajectory may have left its coadjoint orbit",
                        m.name
                    );
                }
            }
        }
    }
    println!(
        "{} level, N = {}: {} samples to t = {}, {} steps ({} rejected), {} renormalizations",
        cfg.level.name(),
        c.n(),
        rec.times.len(),
        rec.times.last().unwrap(),
        rec.steps_accepted,
        rec.steps_rejected,
        rec.renormalizations
    );
    Ok(0)
}

fn cmd_crosscheck(config: &Path, out: &Path, tolerance: f64, seed: Option<u64>) -> Result<i32> {
    let cfg = RunConfig::parse(&load(config)?)?;
    let c = cfg.circulations_checked()?;
    let int_cfg = cfg.integrator.to_config()?;
    let method = int_cfg.method;
    let state = cfg.sphere_initial(&c, seed)?;
    let t_end = int_cfg.t_end;
    let samples = 100usize;
    let times: Vec<f64> = (0..=samples)
        .map(|k| t_end * k as f64 / samples as f64)
        .collect();

    let run = |field: &dyn VectorField, y0: &[f64]| -> Result<TrajectoryRecord> {
        let rec = integrate_at_times(field, y0, &times, method, &[], None)?;
        if let Some(h) = &rec.halt {
            anyhow::bail!("integration halted at t = {}: {}", h.t, h.error);
        }
        Ok(rec)
    };

    // Hopf-projected lifted flow against the direct sphere flow
    let sphere_rec = run(&SphereField::new(c.clone()), &state.to_flat())?;
    let lifted_rec = run(
        &LiftedField::new(c.clone()),
        &LiftedState::from_sphere(&state, &c)?.to_flat(),
    )?;
    let mut lifted_dev = 0.0f64;
    for (ys, yl) in sphere_rec.states.iter().zip(&lifted_rec.states) {
        let projected = LiftedState::from_flat(yl).project().to_flat();
        for (a, b) in projected.iter().zip(ys) {
            lifted_dev = lifted_dev.max((a - b).abs());
        }
    }

    // shape coordinates extracted from the sphere flow against the
    // shape-level integration (needs at least two vortices)
    let shape_dev = if c.n() >= 2 {
        let zeta0 = shape_from_sphere(&state, &c)?;
        let shape_rec = run(&ShapeField::new(c.clone()), &zeta0.to_flat())?;
        let mut dev = 0.0f64;
        for (ys, yz) in sphere_rec.states.iter().zip(&shape_rec.states) {
            let extracted = shape_from_sphere(&SphereState::from_flat(ys), &c)?.to_flat();
            for (a, b) in extracted.iter().zip(yz) {
                dev = dev.max((a - b).abs());
            }
        }
        Some(dev)
    } else {
        None
    };

    let pass = lifted_dev <= tolerance && shape_dev.is_none_or(|d| d <= tolerance);
    let report = json!({
        "n": c.n(),
        "t_end": t_end,
        "samples": samples + 1,
        "tolerance": tolerance,
        "lifted_vs_sphere_supnorm": lifted_dev,
        "shape_vs_sphere_supnorm": shape_dev,
        "pass": pass,
    });
    ensure_out(out)?;
    std::fs::write(
        out.join("crosscheck.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    println!(
        "lifted vs sphere: {lifted_dev:.3e}; shape vs sphere: {}; tolerance {tolerance:.1e} -> {}",
        shape_dev
            .map(|d| format!("{d:.3e}"))
            .unwrap_or_else(|| "n/a".into()),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 2 })
}

fn cmd_stability(config: &Path, out: &Path) -> Result<i32> {
    let cfg = StabilityConfig::parse(&load(config)?)?;
    let spec = match cfg.psi_hessian_diag {
        Some(diag) => EnergyCasimirSpec::with_psi_diag(diag),
        None => EnergyCasimirSpec::default(),
    };
    let gamma = [
        cfg.circulations[0],
        cfg.circulations[1],
        cfg.circulations[2],
        cfg.circulations[3],
    ];
    let report = analyze_tetrahedron(gamma, cfg.radius, &spec)
        .map_err(|e| anyhow::anyhow!("analysis failed: {e}"))?;

    let verdict = match report.verdict {
        Verdict::Stable => "stable",
        Verdict::Inconclusive => "inconclusive",
    };
    let value = json!({
        "circulations": report.gamma,
        "radius": report.radius,
        "gradient_norm": report.gradient_norm,
        "eigenvalues": report.eigenvalues,
        "minors_numeric": report.minors_numeric.to_vec(),
        "minors_closed": report.minors_closed.map(|m| m.to_vec()),
        "minors_match_d123": report.minors_match_d123,
        "minors_max_rel_dev": report.minors_max_rel_dev,
        "verdict": verdict,
    });
    ensure_out(out)?;
    std::fs::write(
        out.join("stability.json"),
        serde_json::to_string_pretty(&value)?,
    )?;

    println!("tetrahedron stability analysis");
    println!(
        "  circulations: {:?}, radius: {}",
        report.gamma, report.radius
    );
    println!(
        "  gradient norm at equilibrium: {:.3e}",
        report.gradient_norm
    );
    println!("  eigenvalues of the scaled Hessian:");
    for ev in &report.eigenvalues {
        println!("    {ev:.6e}");
    }
    println!("  leading principal minors (numeric vs closed form):");
    for k in 0..9 {
        match report.minors_closed {
            Some(cl) => println!(
                "    d{}: {:.6e}  vs  {:.6e}",
                k + 1,
                report.minors_numeric[k],
                cl[k]
            ),
            None => println!(
                "    d{}: {:.6e}  (no closed form for this spec)",
                k + 1,
                report.minors_numeric[k]
            ),
        }
    }
    println!("  verdict: {verdict}");
    Ok(0)
}

fn cmd_invariants(config: &Path, out: &Path) -> Result<i32> {
    let cfg = RunConfig::parse(&load(config)?)?;
    let c = cfg.circulations_checked()?;
    let path = cfg
        .trajectory
        .as_ref()
        .context("field 'trajectory' is required for the invariants command")?;
    let cols = state_columns(cfg.level, c.n());
    let (times, states) = read_trajectory_csv(path, &cols)?;
    if times.is_empty() {
        anyhow::bail!("trajectory file has no samples");
    }

    let monitors = monitors_for(cfg.level, &c);
    let mut rec = TrajectoryRecord {
        times,
        states,
        monitors: Vec::new(),
        halt: None,
        steps_accepted: 0,
        steps_rejected: 0,
        renormalizations: 0,
    };
    rec.monitors = monitors
        .iter()
        .map(|m| vortexsphere::timeint::MonitorSeries {
            name: m.name.clone(),
            values: rec.states.iter().map(|y| (m.eval)(y)).collect(),
        })
        .collect();

    ensure_out(out)?;
    // t plus the recomputed invariant columns only
    let mut stripped = rec.clone();
    stripped.states = vec![Vec::new(); rec.times.len()];
    write_trajectory_csv(&out.join("invariants.csv"), &stripped, &[])?;
    let summary = run_summary(cfg.level, c.n(), &rec);
    std::fs::write(
        out.join("invariants_summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "recomputed {} invariant series over {} samples",
        rec.monitors.len(),
        rec.times.len()
    );
    Ok(0)
}
