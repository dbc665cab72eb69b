use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlwave::energy::{modified_energy, positivity_check, rep_u_residual, PositivityOptions};
use qlwave::filters::{
    check_assumptions, default_xi_grid, lemma_scalar_inequality, linspace, scalar_inequality_a_grid, FilterSpec,
};
use qlwave::harness::{
    estimate_order, estimate_spatial_order, fit_power_law, format_float, run_convergence_space,
    run_convergence_time, series, write_outputs, Config, ConvergenceRow, RowStatus,
};
use qlwave::integrator::{evolve, steps_for};
use qlwave::problem::{ellipticity_report_default, paper_initial_data};
use qlwave::reference::local_error;
use qlwave::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_CHECK: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "qlwave", version, about = "Trigonometric integrators for 1-D periodic quasilinear wave equations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Directory for all output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Also write gnuplot-friendly .dat files next to the CSV.
    #[arg(long, global = true)]
    dat: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and report norms (and energies if energy.every is set).
    Simulate,
    /// Temporal convergence sweep against same-K references.
    ConvTime,
    /// Spatial convergence sweep against a high-K solution.
    ConvSpace,
    /// Check the filter assumptions and the scalar inequality for given bounds.
    FilterCheck {
        #[arg(long)]
        filter: FilterSpec,
        #[arg(long = "A0")]
        a0: f64,
        #[arg(long)]
        delta: f64,
        /// Points per axis of the (A, xi) grid for the scalar inequality.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
    /// Positivity and energy diagnostics on the initial data.
    EnergyCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "A0")]
        a0: Option<f64>,
    },
    /// One-step errors against a fine reference, with the fitted order.
    LocalError,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Divergence { .. } | Error::Guard { .. } | Error::NonFinite(_) => EXIT_DIVERGENCE,
        Error::Precondition(_) | Error::Reference(_) | Error::Estimation(_) => EXIT_CHECK,
        Error::Aliasing { .. } | Error::Config(_) | Error::Unsupported(_) | Error::Io(_) => EXIT_CONFIG,
    }
}

fn load_config(common: &Common) -> qlwave::Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for s in &common.sets {
        cfg.set_assignment(s)?;
    }
    Ok(cfg)
}

/// `--out`, extended by `output.dir` when the configuration sets it.
fn out_dir(common: &Common, cfg: &Config) -> PathBuf {
    match cfg.get("output.dir") {
        Some(sub) => common.out.join(sub),
        None => common.out.clone(),
    }
}

fn run(cli: &Cli) -> qlwave::Result<u8> {
    let common = &cli.common;
    if let Command::FilterCheck { filter, a0, delta, grid } = &cli.command {
        return filter_check(filter, *a0, *delta, *grid);
    }
    let cfg = load_config(common)?;
    let out = out_dir(common, &cfg);
    match &cli.command {
        Command::FilterCheck { .. } => unreachable!("handled above"),
        Command::Simulate => simulate(&cfg, &out),
        Command::ConvTime => conv_time(&cfg, &out, common.dat),
        Command::ConvSpace => conv_space(&cfg, &out, common.dat),
        Command::EnergyCheck { samples, seed, delta, a0 } => {
            let opts = PositivityOptions {
                delta: *delta,
                a0: *a0,
                seed: *seed,
            };
            energy_check(&cfg, &out, *samples, opts)
        }
        Command::LocalError => local_error_cmd(&cfg, &out),
    }
}

fn filter_check(filter: &FilterSpec, a0: f64, delta: f64, grid: usize) -> qlwave::Result<u8> {
    let r = check_assumptions(filter, delta, a0, &default_xi_grid())?;
    let a_grid = scalar_inequality_a_grid(a0, delta, grid);
    let xi_grid = linspace(0.0, 2.0 * std::f64::consts::PI, grid);
    let s = lemma_scalar_inequality(filter, delta, &a_grid, &xi_grid)?;
    let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
    println!("filter {filter}  A0 = {a0}  delta = {delta}  c0 = {}", filter.c0);
    println!("  bounds and consistency      {}  (margin {:.6e})", verdict(r.assumption1_ok), r.margin1);
    println!("  psi1 = sinc * phi           {}  (margin {:.6e})", verdict(r.assumption2_ok), r.margin2);
    println!("  A0 sin^2(xi/2) phi^2 <= 1-d {}  (margin {:.6e})", verdict(r.assumption3_ok), r.margin3);
    println!(
        "  scalar inequality           {}  (min margin {:.6e} at A = {:.4}, xi = {:.4})",
        verdict(s.certified()),
        s.min_margin,
        s.worst_a,
        s.worst_xi
    );
    Ok(if r.all_ok() && s.certified() { 0 } else { EXIT_CHECK })
}

fn simulate(cfg: &Config, out: &Path) -> qlwave::Result<u8> {
    let p = cfg.problem()?;
    let icfg = cfg.integrator()?;
    let t_final = cfg.final_time()?;
    let n = steps_for(t_final, icfg.tau)?;
    let state0 = paper_initial_data(icfg.degree);
    fs::create_dir_all(out)?;
    let path = out.join("trajectory.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "n,t,norm_h2h1,energy")?;
    let every = (n / 1000).max(1);
    let mut io_err = None;
    let result = evolve(&state0, &p, &icfg, n, |rec| {
        if rec.n % every == 0 || rec.n == n || rec.energy.is_some() {
            let energy = rec.energy.map(|e| format_float(e.e_value)).unwrap_or_default();
            if let Err(e) = writeln!(w, "{},{},{},{}", rec.n, format_float(rec.t), format_float(rec.state.norm(1.0)), energy) {
                io_err.get_or_insert(e);
            }
        }
    });
    if let Some(e) = io_err {
        return Err(e.into());
    }
    w.flush()?;
    let fin = result?;
    let ell = ellipticity_report_default(&p, &fin.u)?;
    println!("problem {} kappa = {}  filter {}  K = {}  tau = {}", p.name, p.kappa, icfg.filter, icfg.degree, icfg.tau);
    println!("steps {n}  T = {t_final}");
    println!("|||state_0|||_1 = {:.6e}", state0.norm(1.0));
    println!("|||state_T|||_1 = {:.6e}", fin.norm(1.0));
    println!("delta_est = {:.6}  A0_est = {:.6}", ell.delta_est, ell.a0_est);
    if ell.hyperbolicity_lost {
        println!("warning: 1 + kappa a(u) is no longer positive");
    }
    println!("trajectory written to {}", path.display());
    Ok(0)
}

fn print_rows(rows: &[ConvergenceRow]) {
    for r in rows {
        println!("  {:<8} K={:<5} tau={:<12.6e} err={:<14.6e} {}", r.filter, r.k, r.tau, r.err, r.status);
    }
}

fn conv_time(cfg: &Config, out: &Path, dat: bool) -> qlwave::Result<u8> {
    let plan = cfg.plan()?;
    let rows = run_convergence_time(&plan)?;
    let path = write_outputs(&rows, out, "conv_time", dat)?;
    print_rows(&rows);
    for f in &plan.filters {
        for &k in &plan.k_list {
            match estimate_order(&series(&rows, &f.id(), k)) {
                Ok(fit) => println!("order {f} K={k}: {:.4} (R^2 {:.4}, {} excluded)", fit.slope, fit.r_squared, fit.n_excluded),
                Err(e) => println!("order {f} K={k}: n/a ({e})"),
            }
        }
    }
    let bad = rows.iter().filter(|r| r.status != RowStatus::Ok).count();
    println!("{} rows, {bad} not ok; CSV at {}", rows.len(), path.display());
    Ok(0)
}

fn conv_space(cfg: &Config, out: &Path, dat: bool) -> qlwave::Result<u8> {
    let plan = cfg.plan()?;
    let rows = run_convergence_space(&plan)?;
    let path = write_outputs(&rows, out, "conv_space", dat)?;
    print_rows(&rows);
    for f in &plan.filters {
        let s: Vec<ConvergenceRow> = rows.iter().filter(|r| r.filter == f.id()).cloned().collect();
        match estimate_spatial_order(&s) {
            Ok(fit) => println!("spatial order {f}: {:.4} (R^2 {:.4})", fit.slope, fit.r_squared),
            Err(e) => println!("spatial order {f}: n/a ({e})"),
        }
    }
    println!("CSV at {}", path.display());
    Ok(0)
}

fn energy_check(cfg: &Config, out: &Path, samples: usize, opts: PositivityOptions) -> qlwave::Result<u8> {
    let p = cfg.problem()?;
    let icfg = cfg.integrator()?;
    let state0 = paper_initial_data(icfg.degree);
    let u = match cfg.parse_value::<f64>("time.T")? {
        Some(t) if t > 0.0 => evolve(&state0, &p, &icfg, steps_for(t, icfg.tau)?, |_| {})?.u,
        _ => state0.u.clone(),
    };
    let report = positivity_check(&u, &p, &icfg, samples, opts)?;
    let energy = modified_energy(&u, &state0.udot, &u, &p, &icfg)?;
    let rep_u = rep_u_residual(&u, &u, &p, &icfg)?;
    fs::create_dir_all(out)?;
    let path = out.join("energy_probes.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "probe,margin")?;
    for pr in &report.probes {
        writeln!(w, "{},{}", pr.label, format_float(pr.margin))?;
    }
    w.flush()?;
    println!("problem {} kappa = {}  filter {}  K = {}  tau = {}", p.name, p.kappa, icfg.filter, icfg.degree, icfg.tau);
    println!("delta = {:.6}  A0 = {:.6}", report.delta, report.a0);
    println!(
        "positivity margin {:.6e} (worst probe {}, {} probes): {}",
        report.margin,
        report.worst_probe,
        report.probes.len(),
        if report.certified() { "pass" } else { "FAIL" }
    );
    println!(
        "energy E = {:.6e}  |||(u, udot)|||_1^2 = {:.6e}  U = {:.6e}",
        energy.e_value, energy.pair_norm_sq, energy.u_value
    );
    println!("operator identity residual {rep_u:.3e}");
    println!("probe margins written to {}", path.display());
    Ok(if report.certified() { 0 } else { EXIT_CHECK })
}

fn local_error_cmd(cfg: &Config, out: &Path) -> qlwave::Result<u8> {
    let p = cfg.problem()?;
    let k: usize = cfg.require("grid.K")?;
    let filter = cfg.filter()?;
    let rc = cfg.reference()?;
    let taus = match cfg.list::<f64>("sweep.tau")? {
        Some(t) => t,
        None => {
            let lo: u32 = cfg.value_or("sweep.m_min", 4)?;
            let hi: u32 = cfg.value_or("sweep.m_max", 9)?;
            (lo..=hi).map(|m| 2f64.powi(-(m as i32))).collect()
        }
    };
    let state0 = paper_initial_data(k);
    let mut pts = Vec::with_capacity(taus.len());
    fs::create_dir_all(out)?;
    let path = out.join("local_error.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "tau,err_h2h1")?;
    for &tau in &taus {
        let e = local_error(&p, &state0, tau, filter, &rc)?;
        println!("  tau={tau:<12.6e} local err={e:.6e}");
        writeln!(w, "{},{}", format_float(tau), format_float(e))?;
        pts.push((tau, e));
    }
    w.flush()?;
    match fit_power_law(&pts) {
        Ok(fit) => println!("local order {:.4} (R^2 {:.4})", fit.slope, fit.r_squared),
        Err(e) => println!("local order n/a ({e})"),
    }
    println!("CSV at {}", path.display());
    Ok(0)
}
