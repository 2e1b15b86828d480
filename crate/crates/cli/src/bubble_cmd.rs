use crate::output::{CmdError, Run};
use syl_core::bubble::{find_ground_state, write_profile_csv, BubbleParams};

pub const AFTER_HELP: &str = "\
Outputs (in --out):
  profile.csv          columns r,u,v: radius and the radial components of
                       psi = (v(r) e^{i S theta}, i u(r) e^{i (S+1) theta})
  bubble_report.json   v0_star, mu0, decay_rate, residual_2d, moments {I_p0, I_p2}, params
  bubble.manifest.json run manifest
Exit codes: 0 success, 1 invalid input, 2 NO_BRACKET / NOT_CONVERGED (error JSON written).";

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Mass parameter lambda > 0.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Nonlinearity exponent, 2 < p < 4.
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    /// Angular winding S of the ansatz.
    #[arg(long = "S", default_value_t = 0, allow_hyphen_values = true)]
    pub s: i32,
    /// Largest integration radius (default 40 / lambda).
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Spacing of the exported radial grid (default 0.005 / lambda).
    #[arg(long)]
    pub grid_step: Option<f64>,
}

pub fn params(args: &Args) -> BubbleParams {
    let mut params = BubbleParams::new(args.lambda, args.p).with_winding(args.s);
    if let Some(r) = args.r_max {
        params.r_max = r;
    }
    if let Some(h) = args.grid_step {
        params.grid_step = h;
    }
    params
}

pub fn run(args: &Args, run: &mut Run) -> Result<(), CmdError> {
    let params = params(args);
    run.set_config(&params);
    let ground = find_ground_state(&params)?;
    run.write("profile.csv", "profile", |w| Ok(write_profile_csv(&ground.profile, w)?))?;
    run.write_json("bubble_report.json", "report", &ground.report)?;
    let r = &ground.report;
    run.emit(
        r,
        &format!(
            "bubble lambda={} p={} S={}: v0*={} mu0={} decay_rate={} residual_2d={:e}",
            params.lambda, params.p, params.s, r.v0_star, r.mu0, r.decay_rate, r.residual_2d
        ),
    );
    Ok(())
}
