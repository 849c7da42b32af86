//! `ipfe`: command-line driver for moment-kernel evolution, split-step
//! Monte-Carlo runs and the cross-validation report.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ipfe_core::array_io::{read_kernel, write_kernel};
use ipfe_core::config::{load_config, parse_config, RunConfig};
use ipfe_core::exec::configure_threads;
use ipfe_core::moments::{diagnostics, evolve_snapshots, Medium, MomentKernel, MAX_STEP_PHASE};
use ipfe_core::phase_screen::{draw_screen, phase_screen_position, screen_statistics};
use ipfe_core::rng::derive_seed;
use ipfe_core::splitstep::ensemble_moments;
use ipfe_core::states::{fock_generating, fock_wigner, FockSpec};
use ipfe_core::validate::{run_validate, stationarity_table};
use ipfe_core::Execution;
use serde_json::json;

use output::{freq_units, write_moment, write_real, write_tensor, CsvOut};

const REFERENCE_CONFIG: &str = include_str!("../../../configs/reference.json");

#[derive(Parser, Debug)]
#[command(name = "ipfe", version, about, long_about = None)]
#[command(after_help = "\
Configuration (JSON, unknown keys rejected):
  model       kind (kolmogorov | von_karman), cn2 [m^-2/3], outer_scale [m] (default inf),
              inner_scale [m] (default 0), inner_scale_constant (default 35)
  grid        dim (1 | 2), n (power of two), delta_a [cycles/m], wavelength [m]
  plan        z_total [m], n_slabs (default 64), n_realizations (default 500),
              master_seed (default 1)
  beam        width [cycles/m] (default 20), center [cycles/m], offset [m]
  task        optional subcommand name
  output_dir  optional, overridden by --out (default ./ipfe-out)
  tolerances  optional overrides of the validation thresholds

Without --config the shipped reference configuration is used.")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides plan.master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true, env = "IPFE_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split-step Monte-Carlo ensemble of the configured beam.
    Simulate,
    /// Integrates a moment kernel and writes snapshots plus diagnostics.
    EvolveKernel {
        /// Initial kernel in the binary array format (sidecar alongside).
        /// Defaults to G0 G0* of the configured beam.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Snapshot distances in m, ascending, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<f64>,
        /// Largest integration step in m (default: half the step guard).
        #[arg(long)]
        max_dz: Option<f64>,
    },
    /// Fock-state Wigner functional on a radial sweep α = r·F.
    States {
        /// Emit the Gaussian drift residual table instead.
        #[arg(long)]
        stationarity: bool,
        /// Photon number.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Largest sweep radius r = ‖α‖.
        #[arg(long, default_value_t = 2.0)]
        r_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Generating-function argument η.
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        eta: f64,
    },
    /// Draws a phase screen, or with --validate tabulates screen statistics.
    Screens {
        #[arg(long)]
        validate: bool,
        /// Screens drawn for --validate.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Transverse PSD Φn(a, 0) on a log-spaced |a| range.
    SpectrumTable {
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Smallest |a| in cycles/m (default delta_a/100).
        #[arg(long)]
        a_min: Option<f64>,
        /// Largest |a| in cycles/m (default n*delta_a/2).
        #[arg(long)]
        a_max: Option<f64>,
    },
    /// Runs the cross-validation suite and writes report.json / report.txt.
    Validate,
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
    exec: Execution,
    threads: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => parse_config(REFERENCE_CONFIG)?,
    };
    if let Some(s) = cli.seed {
        cfg = cfg.with_seed(s);
    }
    if cli.threads == Some(0) {
        bail!("--threads must be >= 1");
    }
    let threads = configure_threads(cli.threads);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("ipfe-out"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let ctx = Run {
        cfg,
        out,
        exec: Execution::default(),
        threads,
    };
    match cli.command {
        Command::Simulate => simulate(&ctx),
        Command::EvolveKernel { input, z, max_dz } => evolve(&ctx, input.as_deref(), &z, max_dz),
        Command::States {
            stationarity: true, ..
        } => stationarity(&ctx),
        Command::States {
            n, r_max, points, eta, ..
        } => fock_sweep(&ctx, n, r_max, points, eta),
        Command::Screens { validate: true, samples } => screens_validate(&ctx, samples),
        Command::Screens { validate: false, .. } => screen(&ctx),
        Command::SpectrumTable { points, a_min, a_max } => spectrum_table(&ctx, points, a_min, a_max),
        Command::Validate => validate(&ctx),
    }
}

fn simulate(ctx: &Run) -> Result<ExitCode> {
    let cfg = &ctx.cfg;
    let plan = cfg.propagation_plan();
    let guards = plan.validate()?;
    let g = cfg.grid;
    let s0 = cfg.beam.spectrum(g);
    let t0 = Instant::now();
    let st = ensemble_moments(&s0, &plan, ctx.exec)?;
    let wall = t0.elapsed().as_secs_f64();

    let d = g.dim;
    let z = plan.z_total;
    let field = vec![g.n; d];
    let pair = vec![g.n; 2 * d];
    let se: Vec<_> = st
        .coherence_se_re
        .iter()
        .zip(&st.coherence_se_im)
        .map(|(r, i)| ipfe_core::Complex64::new(*r, *i))
        .collect();
    let files = [
        write_moment(&ctx.out, "initial_field", (1, 0), &s0.values, g, 0.0, "G0(a)")?,
        write_moment(&ctx.out, "free_space", (1, 0), &st.free_space.values, g, z, "free-space G(a)")?,
        write_moment(&ctx.out, "mean_field", (1, 0), &st.mean_field.values, g, z, "<G(a)>")?,
        write_real(&ctx.out, "mean_field_se", &field, &st.mean_field_se, g, "standard error of <G(a)>", "field")?,
        write_moment(&ctx.out, "coherence", (1, 1), &st.coherence, g, z, "<G(a)G*(a')>")?,
        write_tensor(
            &ctx.out,
            "coherence_se",
            &pair,
            &se,
            g,
            "standard errors of Re and Im <G(a)G*(a')> (stored as re + i im)",
            "field^2",
        )?,
        write_moment(&ctx.out, "pair", (2, 0), &st.pair, g, z, "<G(a)G(a')>")?,
    ];
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "master_seed": plan.master_seed,
        "seed_derivation": "per (realization, slab): splitmix64 chain of master seed, see ipfe_core::rng",
        "threads": ctx.threads,
        "execution": format!("{:?}", ctx.exec),
        "guards": guards,
        "wall_time_s": wall,
        "n_samples": st.n_samples,
        "coherent_fraction": [st.coherent_fraction.re, st.coherent_fraction.im],
        "coherent_fraction_se": st.coherent_fraction_se,
        "max_norm_drift": st.max_norm_drift,
        "files": files,
    });
    output::write_json(&ctx.out.join("manifest.json"), &manifest)?;
    println!(
        "simulate: {} realizations, {} slabs, coherent fraction {:.6} ± {:.2e}, {:.2} s -> {}",
        st.n_samples,
        plan.n_slabs,
        st.coherent_fraction.re,
        st.coherent_fraction_se,
        wall,
        ctx.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn evolve(ctx: &Run, input: Option<&Path>, z: &[f64], max_dz: Option<f64>) -> Result<ExitCode> {
    let h0 = match input {
        Some(p) => read_kernel(p).with_context(|| format!("reading kernel {}", p.display()))?,
        None => MomentKernel::outer(&ctx.cfg.beam.spectrum(ctx.cfg.grid)),
    };
    if !h0.grid.same_as(&ctx.cfg.grid) {
        log::info!("using the kernel grid {:?} instead of the configured grid", h0.grid);
    }
    let medium = Medium::new(&ctx.cfg.model, h0.grid)?;
    let per_meter = medium.step_phase(1.0);
    let dz = max_dz.unwrap_or(if per_meter > 0.0 {
        0.5 * MAX_STEP_PHASE / per_meter
    } else {
        f64::INFINITY
    });
    let snaps = evolve_snapshots(&h0, &medium, z, dz)?;

    let tag = format!("h{}{}", h0.m, h0.n);
    let mut csv = CsvOut::create(
        &ctx.out.join("diagnostics.csv"),
        &[
            "z [m]",
            &format!("trace [field^{}]", h0.rank()),
            "hermiticity_residual [1]",
            "boundary_mass [1]",
        ],
    )?;
    for h in std::iter::once(&h0).chain(&snaps) {
        let d = diagnostics(h)?;
        csv.row(&[d.z, d.trace, d.hermiticity_residual, d.boundary_mass])?;
    }
    csv.finish()?;
    for (i, h) in snaps.iter().enumerate() {
        let path = ctx.out.join(format!("{tag}_z{i:03}.ipfe"));
        write_kernel(&path, h, &format!("H_{{{},{}}} at z = {} m", h.m, h.n, h.z))?;
    }
    println!(
        "evolve-kernel: order ({},{}), {} snapshot(s), max step {:.4e} m -> {}",
        h0.m,
        h0.n,
        snaps.len(),
        dz,
        ctx.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn fock_sweep(ctx: &Run, n: usize, r_max: f64, points: usize, eta: f64) -> Result<ExitCode> {
    if points < 2 || !(r_max > 0.0) {
        bail!("need --points >= 2 and --r-max > 0");
    }
    let g = ctx.cfg.grid;
    let mode = ctx.cfg.beam.spectrum(g).normalized()?;
    let f = FockSpec::normalized(&mode, n)?;
    let mut csv = CsvOut::create(
        &ctx.out.join(format!("fock_n{n}.csv")),
        &[
            "r [1]",
            "overlap_sq [1]",
            &format!("wigner_n{n} [1]"),
            &format!("generating_eta{eta} [1]"),
        ],
    )?;
    for i in 0..points {
        let r = r_max * i as f64 / (points - 1) as f64;
        let mut alpha = mode.clone();
        alpha.scale(r.into());
        let w = fock_wigner(n, &f, &alpha)?;
        let gen = fock_generating(eta, &f, &alpha)?;
        csv.row(&[r, f.overlap_sq(&alpha)?, w.re, gen.re])?;
    }
    csv.finish()?;
    println!("states: n = {n}, {points} radii up to {r_max} -> {}", ctx.out.display());
    Ok(ExitCode::SUCCESS)
}

fn stationarity(ctx: &Run) -> Result<ExitCode> {
    let medium = Medium::new(&ctx.cfg.model, ctx.cfg.grid)?;
    let rows = stationarity_table(&medium, &[0.5, 1.0, 4.0], &[1e-4, 1e-3, 1e-2])?;
    let path = ctx.out.join("stationarity.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "state",
        "c [1]",
        "epsilon [1]",
        "rhs_relative [1]",
        "second_order_residual [1]",
        "fourth_order_residual [1]",
    ])?;
    for r in &rows {
        w.write_record([
            r.state.clone(),
            r.c.to_string(),
            r.epsilon.to_string(),
            format!("{:e}", r.rhs_relative),
            format!("{:e}", r.second_order_residual),
            format!("{:e}", r.fourth_order_residual),
        ])?;
        println!(
            "{:>9} c={:<4} eps={:<7e} second={:.3e} fourth={:.3e}",
            r.state, r.c, r.epsilon, r.second_order_residual, r.fourth_order_residual
        );
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn screen(ctx: &Run) -> Result<ExitCode> {
    let cfg = &ctx.cfg;
    let g = cfg.grid;
    let dz = cfg.propagation_plan().slab_thickness();
    let s = draw_screen(&cfg.model, g, dz, derive_seed(cfg.plan.master_seed, 0, 0))?;
    let phi = phase_screen_position(&s, g.wavenumber())?;
    let mut header = vec!["x [m]"];
    if g.dim == 2 {
        header.push("y [m]");
    }
    header.push("phase [rad]");
    let mut csv = CsvOut::create(&ctx.out.join("screen.csv"), &header)?;
    for (site, p) in phi.iter().enumerate() {
        let x = g.position(site);
        let mut row = x[..g.dim].to_vec();
        row.push(*p);
        csv.row(&row)?;
    }
    csv.finish()?;
    println!("screens: slab 0 of realization 0, dz = {dz} m -> {}", ctx.out.display());
    Ok(ExitCode::SUCCESS)
}

fn screens_validate(ctx: &Run, samples: usize) -> Result<ExitCode> {
    let cfg = &ctx.cfg;
    let g = cfg.grid;
    let dz = cfg.propagation_plan().slab_thickness();
    let st = screen_statistics(&cfg.model, g, dz, samples, cfg.plan.master_seed, ctx.exec)?;
    let var_units = format!("m^2 {}", freq_units(-2.0 * g.dim as f64));
    let mut modes = CsvOut::create(
        &ctx.out.join("screen_modes.csv"),
        &[
            "site",
            "a_x [cycles/m]",
            "a_y [cycles/m]",
            &format!("target_variance [{var_units}]"),
            &format!("sample_variance [{var_units}]"),
            &format!("std_error [{var_units}]"),
        ],
    )?;
    for m in &st.modes {
        modes.row(&[
            m.site as f64,
            m.frequency[0],
            m.frequency[1],
            m.target,
            m.sample_variance,
            m.std_error,
        ])?;
    }
    modes.finish()?;
    let mut cross = CsvOut::create(
        &ctx.out.join("screen_cross.csv"),
        &[
            "site1",
            "site2",
            &format!("covariance_re [{var_units}]"),
            &format!("covariance_im [{var_units}]"),
            &format!("std_error [{var_units}]"),
        ],
    )?;
    for c in &st.cross {
        cross.row(&[
            c.site1 as f64,
            c.site2 as f64,
            c.covariance.re,
            c.covariance.im,
            c.std_error,
        ])?;
    }
    cross.finish()?;
    let tol = cfg.tolerances;
    let ok = st.max_relative_deviation < tol.screen_variance && st.max_cross_z < tol.screen_cross_z;
    println!(
        "screens --validate: {} screens, max relative variance deviation {:.4} (tol {}), max cross |z| {:.3} (tol {}): {}",
        st.n_samples,
        st.max_relative_deviation,
        tol.screen_variance,
        st.max_cross_z,
        tol.screen_cross_z,
        if ok { "PASS" } else { "FAIL" }
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn spectrum_table(ctx: &Run, points: usize, a_min: Option<f64>, a_max: Option<f64>) -> Result<ExitCode> {
    let g = ctx.cfg.grid;
    let lo = a_min.unwrap_or(g.delta_a / 100.0);
    let hi = a_max.unwrap_or(g.n as f64 * g.delta_a / 2.0);
    if points < 2 || !(lo > 0.0 && hi > lo) {
        bail!("need --points >= 2 and 0 < a_min < a_max, got {lo}..{hi}");
    }
    let mut csv = CsvOut::create(
        &ctx.out.join("spectrum.csv"),
        &["a_abs [cycles/m]", "psd_transverse [m^3]"],
    )?;
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    for i in 0..points {
        let a = lo * (ratio * i as f64).exp();
        csv.row(&[a, ctx.cfg.model.psd_transverse(&[a])?])?;
    }
    csv.finish()?;
    println!("spectrum-table: {points} points in [{lo}, {hi}] cycles/m -> {}", ctx.out.display());
    Ok(ExitCode::SUCCESS)
}

fn validate(ctx: &Run) -> Result<ExitCode> {
    let report = run_validate(&ctx.cfg, ctx.exec, ctx.threads);
    let text = report.to_text();
    std::fs::write(ctx.out.join("report.json"), report.to_json() + "\n")?;
    std::fs::write(ctx.out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
