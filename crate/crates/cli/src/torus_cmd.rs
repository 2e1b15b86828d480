use crate::output::{parse_pair, CmdError, Run};
use serde::Serialize;
use std::path::PathBuf;
use syl_core::bubble::{find_ground_state, BubbleParams};
use syl_core::torus::{
    read_solver_config, solve, sweep_eps, write_abs_psi_csv, write_result_json, write_sweep_csv, SeedMode, SweepRow,
};
use syl_core::{SolverConfig, TorusGrid};

pub const AFTER_HELP: &str = "\
Configuration: --config FILE (JSON {grid: {N1, N2, L1, L2, delta}, eps, a, p, tolerances, seed,
dealias, center}); inline flags override file values. Seeds: bubble | random:N.
Outputs (in --out), single run:
  torus_result.json    eps, mu_eps, grad_norm, converged, t_star history, peak, peak_index,
                       peak_tie, width, decay_c, decay_r_squared, tau0, energy_identity,
                       outer/newton iteration counts, global_minimality_certified
  abs_psi.csv          columns i,j,abs_psi: |psi| at grid node (i h1, j h2)
Outputs, --sweep:
  sweep.csv            columns eps,mu_eps,width,decay_c,grad_norm (NaN marks a failed row)
  sweep.json           the rows with converged flags and errors, mu0 of the planar bubble,
                       gaps |mu_eps - mu0| and whether they decrease strictly
  torus.manifest.json  run manifest
Exit codes: 0 success, 1 invalid input, 2 NOT_CONVERGED or solver failure (partial outputs
are still written; torus_error.json carries the failure).";

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Solver configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Square grid size N (N x N nodes).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Side length of the square torus (default 2 pi).
    #[arg(long)]
    pub length: Option<f64>,
    /// `bubble` or `random:SEED`.
    #[arg(long, value_parser = parse_seed)]
    pub seed: Option<SeedMode>,
    /// Bubble transplant centre `x,y`.
    #[arg(long, value_parser = parse_pair)]
    pub center: Option<[f64; 2]>,
    /// Apply the 2/3 dealiasing rule to the nonlinearity.
    #[arg(long)]
    pub dealias: bool,
    /// Strictly decreasing eps list, e.g. `0.4,0.2,0.1`; warm-started in order.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
}

fn parse_seed(s: &str) -> Result<SeedMode, String> {
    match s.split_once(':') {
        None if s == "bubble" => Ok(SeedMode::BubbleTransplant),
        Some(("random", n)) => n
            .parse()
            .map(SeedMode::Random)
            .map_err(|e| format!("bad random seed '{n}': {e}")),
        _ => Err(format!("expected 'bubble' or 'random:N', got '{s}'")),
    }
}

pub fn config(args: &Args, run: &mut Run) -> Result<SolverConfig, CmdError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| CmdError::usage(format!("cannot open config {}: {e}", path.display())))?;
            run.add_input(path);
            read_solver_config(file).map_err(|e| CmdError::usage(e.to_string()))?
        }
        None => SolverConfig::new(TorusGrid::square(128, 2.0 * std::f64::consts::PI), 0.2, 1.0, 3.0),
    };
    if let Some(n) = args.grid {
        cfg.grid.n1 = n;
        cfg.grid.n2 = n;
    }
    if let Some(l) = args.length {
        cfg.grid.l1 = l;
        cfg.grid.l2 = l;
    }
    if let Some(v) = args.eps {
        cfg.eps = v;
    }
    if let Some(v) = args.a {
        cfg.a = v;
    }
    if let Some(v) = args.p {
        cfg.p = v;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.center.is_some() {
        cfg.center = args.center;
    }
    cfg.dealias |= args.dealias;
    if let Some(list) = &args.sweep {
        if let Some(&first) = list.first() {
            cfg.eps = first;
        }
    }
    // surfaces bad eps/a/p/grid as input errors before any work
    cfg.problem()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Snapshot<'a> {
    solver: &'a SolverConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<&'a [f64]>,
}

#[derive(Serialize)]
struct SweepOutput {
    mu0: f64,
    rows: Vec<SweepRow>,
    gaps: Vec<f64>,
    gap_strictly_decreasing: bool,
}

fn run_single(cfg: &SolverConfig, run: &mut Run) -> Result<(), CmdError> {
    let result = solve(cfg)?;
    let problem = cfg.problem()?;
    run.write("torus_result.json", "result", |w| Ok(write_result_json(&result, w)?))?;
    run.write("abs_psi.csv", "field", |w| Ok(write_abs_psi_csv(&result.psi, problem.table.fft(), w)?))?;
    run.emit(
        &result,
        &format!(
            "torus eps={} N={}x{}: mu_eps={} (tau0={}) grad_norm={:e} peak={:?} width={} decay_c={} converged={}",
            result.eps,
            cfg.grid.n1,
            cfg.grid.n2,
            result.mu_eps,
            result.tau0,
            result.grad_norm,
            result.peak,
            result.width,
            result.decay_c,
            result.converged
        ),
    );
    if !result.converged {
        return Err(CmdError::numerical(
            "NOT_CONVERGED",
            format!("gradient norm {:e} above tolerance {:e}", result.grad_norm, cfg.tolerances.tol_outer),
        ));
    }
    Ok(())
}

fn run_sweep(cfg: &SolverConfig, list: &[f64], run: &mut Run) -> Result<(), CmdError> {
    let rows = sweep_eps(list, cfg)?;
    let mu0 = find_ground_state(&BubbleParams::new(cfg.a, cfg.p))?.report.mu0;
    let gaps: Vec<f64> = rows.iter().map(|r| (r.mu_eps - mu0).abs()).collect();
    let out = SweepOutput {
        mu0,
        gap_strictly_decreasing: gaps.windows(2).all(|w| w[1] < w[0]),
        gaps,
        rows,
    };
    run.write("sweep.csv", "sweep", |w| Ok(write_sweep_csv(&out.rows, w)?))?;
    run.write_json("sweep.json", "sweep", &out)?;
    let mut human = format!("torus sweep, mu0 = {mu0}");
    for (r, g) in out.rows.iter().zip(&out.gaps) {
        human += &format!(
            "\n  eps={} mu_eps={} gap={:e} width={} decay_c={} grad_norm={:e}{}",
            r.eps,
            r.mu_eps,
            g,
            r.width,
            r.decay_c,
            r.grad_norm,
            if r.converged { "" } else { " [FAILED]" }
        );
    }
    run.emit(&out, &human);
    let failed: Vec<String> = out.rows.iter().filter(|r| !r.converged).map(|r| r.eps.to_string()).collect();
    if !failed.is_empty() {
        return Err(CmdError::numerical(
            "NOT_CONVERGED",
            format!("sweep rows eps = {} did not converge", failed.join(", ")),
        ));
    }
    Ok(())
}

pub fn run(args: &Args, run: &mut Run) -> Result<(), CmdError> {
    let cfg = config(args, run)?;
    run.set_config(&Snapshot {
        solver: &cfg,
        sweep: args.sweep.as_deref(),
    });
    match &args.sweep {
        Some(list) => run_sweep(&cfg, list, run),
        None => run_single(&cfg, run),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seed("bubble").unwrap(), SeedMode::BubbleTransplant);
        assert_eq!(parse_seed("random:7").unwrap(), SeedMode::Random(7));
        assert!(parse_seed("random:x").is_err());
        assert!(parse_seed("gauss").is_err());
    }
}
