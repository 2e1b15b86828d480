use super::{
    decay_fit, energy, full_residual, moment_integrals, BubbleParams, BubbleReport, RadialProfile,
};
use crate::error::{Result, SylError};
use crate::ode::{Control, Dopri5};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outcome of a single shot from the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShotClass {
    /// Reached `r_max` without an event.
    Decays,
    /// The leading component changed sign: `v0` too large.
    VCrossesZero,
    /// The leading component turned back up or blew up: `v0` too small.
    UDominates,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Shot {
    pub v0: f64,
    pub class: ShotClass,
    /// Which side of the ground state this shot lies on.
    pub overshoot: bool,
    pub r_end: f64,
    pub trajectory: Trajectory,
}

/// A converged ground state with its diagnostics.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub profile: RadialProfile,
    pub report: BubbleReport,
}

/// Right-hand side `(u', v')` of the radial system.
pub fn radial_rhs(params: &BubbleParams, r: f64, uv: [f64; 2]) -> [f64; 2] {
    let [u, v] = uv;
    let f = params.nonlinearity(u.hypot(v));
    let s = params.s as f64;
    let lam = params.lambda;
    [-(s + 1.0) * u / r - (f - lam) * v, s * v / r + (f + lam) * u]
}

/// Both winding branches share the form
/// `a' = n a / r + (f + m) b`, `b' = -(n+1) b / r - (f - m) a`, regular as `a ~ r^n`.
/// For `S >= 0`: `a = v, b = u, n = S, m = lambda`;
/// for `S <= -1`: `a = u, b = -v, n = -S-1, m = -lambda`.
#[derive(Clone, Copy, Debug)]
struct Canonical {
    n: f64,
    m: f64,
    negative: bool,
}

impl Canonical {
    fn new(params: &BubbleParams) -> Self {
        if params.s >= 0 {
            Canonical {
                n: params.s as f64,
                m: params.lambda,
                negative: false,
            }
        } else {
            Canonical {
                n: (-params.s - 1) as f64,
                m: -params.lambda,
                negative: true,
            }
        }
    }

    fn to_uv(self, ab: [f64; 2]) -> [f64; 2] {
        if self.negative {
            [ab[0], -ab[1]]
        } else {
            [ab[1], ab[0]]
        }
    }

    fn rhs(self, params: &BubbleParams, r: f64, ab: &[f64; 2]) -> [f64; 2] {
        let [a, b] = *ab;
        let f = params.nonlinearity(a.hypot(b));
        [
            self.n * a / r + (f + self.m) * b,
            -(self.n + 1.0) * b / r - (f - self.m) * a,
        ]
    }

    /// Regular series at the origin: `a = v0 r^n + a2 r^{n+2}`, `b = c1 r^{n+1}`.
    fn initial(self, params: &BubbleParams, v0: f64, r0: f64) -> [f64; 2] {
        let f0 = if self.n == 0.0 { params.nonlinearity(v0) } else { 0.0 };
        let c1 = -(f0 - self.m) * v0 / (2.0 * (self.n + 1.0));
        let a2 = (f0 + self.m) * c1 / 2.0;
        let rn = r0.powf(self.n);
        [rn * (v0 + a2 * r0 * r0), rn * c1 * r0]
    }

    /// Component along the growing mode at infinity; positive on the undershoot side.
    fn growing(self, ab: &[f64; 2]) -> f64 {
        ab[0] + self.m.signum() * ab[1]
    }

    fn origin_uv(self, v0: f64) -> [f64; 2] {
        let a = if self.n == 0.0 { v0 } else { 0.0 };
        self.to_uv([a, 0.0])
    }
}

struct RunOutput {
    class: ShotClass,
    overshoot: bool,
    r_end: f64,
    trajectory: Trajectory,
}

fn run(params: &BubbleParams, v0: f64, stops: &[f64], only_stops: bool) -> Result<RunOutput> {
    let canon = Canonical::new(params);
    let r0 = 1e-6 / params.lambda;
    let y0 = canon.initial(params, v0, r0);
    let blow_up = 10.0 * v0.max(params.amplitude_scale());
    let mut solver = Dopri5::with_tol(params.tol_ode);
    solver.h_max = 0.05 / params.lambda;
    solver.h_init = r0;

    let mut traj = Trajectory::default();
    let mut class = ShotClass::Decays;
    let mut overshoot = false;
    let mut decreasing = false;
    let mut next_stop = 0usize;

    let (r_end, y_end) = solver.integrate(
        |r, ab| canon.rhs(params, r, ab),
        r0,
        y0,
        params.r_max,
        stops,
        |r, ab, dab| {
            let at_stop = next_stop < stops.len() && r == stops[next_stop];
            if at_stop {
                next_stop += 1;
            }
            if at_stop || !only_stops {
                let [u, v] = canon.to_uv(*ab);
                traj.r.push(r);
                traj.u.push(u);
                traj.v.push(v);
            }
            if ab[0] <= 0.0 {
                class = ShotClass::VCrossesZero;
                overshoot = true;
                return Control::Stop;
            }
            if dab[0] < 0.0 {
                decreasing = true;
            } else if decreasing && dab[0] > 0.0 {
                class = ShotClass::UDominates;
                return Control::Stop;
            }
            if ab[0].abs() + ab[1].abs() > blow_up {
                overshoot = canon.growing(ab) < 0.0;
                class = if overshoot {
                    ShotClass::VCrossesZero
                } else {
                    ShotClass::UDominates
                };
                return Control::Stop;
            }
            Control::Continue
        },
    )?;
    if class == ShotClass::Decays {
        overshoot = canon.growing(&y_end) < 0.0;
    }
    Ok(RunOutput {
        class,
        overshoot,
        r_end,
        trajectory: traj,
    })
}

/// Integrate outward from the regular origin data with leading coefficient `v0`.
pub fn shoot(v0: f64, params: &BubbleParams) -> Result<Shot> {
    params.validate()?;
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(SylError::InvalidParameter(format!("v0 = {v0} must be positive")));
    }
    let out = run(params, v0, &[], false)?;
    Ok(Shot {
        v0,
        class: out.class,
        overshoot: out.overshoot,
        r_end: out.r_end,
        trajectory: out.trajectory,
    })
}

const SCAN_POINTS: usize = 49;

/// Scan, bisect, and assemble the nodeless ground state.
pub fn find_ground_state(params: &BubbleParams) -> Result<GroundState> {
    params.validate()?;
    let scale = params.amplitude_scale();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| scale * 10f64.powf(-2.0 + 4.0 * i as f64 / (SCAN_POINTS - 1) as f64))
        .collect();
    let sides: Vec<Option<bool>> = grid
        .par_iter()
        .map(|&v0| run(params, v0, &[], false).ok().map(|o| o.overshoot))
        .collect();
    let idx = sides
        .windows(2)
        .position(|w| w[0] == Some(false) && w[1] == Some(true))
        .ok_or(SylError::NoBracket {
            lo: grid[0],
            hi: grid[SCAN_POINTS - 1],
        })?;
    let (mut lo, mut hi) = (grid[idx], grid[idx + 1]);

    let mut iterations = 0usize;
    while hi - lo > params.tol_shoot * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if iterations > params.max_bisect {
            return Err(SylError::NotConverged {
                what: "shooting bisection",
                iterations: params.max_bisect,
                residual: (hi - lo) / hi,
            });
        }
        if run(params, mid, &[], false)?.overshoot {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let dr = params.grid_step;
    let n_stops = (params.r_max / dr).floor() as usize;
    let stops: Vec<f64> = (1..=n_stops).map(|i| i as f64 * dr).collect();
    let (low, high) = rayon::join(
        || run(params, lo, &stops, true),
        || run(params, hi, &stops, true),
    );
    let (low, high) = (low?.trajectory, high?.trajectory);

    let v0_star = 0.5 * (lo + hi);
    let origin = Canonical::new(params).origin_uv(v0_star);
    let mut r = vec![0.0];
    let mut u = vec![origin[0]];
    let mut v = vec![origin[1]];
    for i in 0..low.r.len().min(high.r.len()) {
        let rho_lo = low.u[i].hypot(low.v[i]);
        let rho_hi = high.u[i].hypot(high.v[i]);
        let rho_mid = 0.5 * (rho_lo + rho_hi);
        if (rho_lo - rho_hi).abs() > 1e-3 * rho_mid {
            break;
        }
        r.push(low.r[i]);
        u.push(0.5 * (low.u[i] + high.u[i]));
        v.push(0.5 * (low.v[i] + high.v[i]));
    }
    let r_trusted = *r.last().unwrap();
    let profile = RadialProfile::new(r, u, v, params.clone())?;

    let fit = decay_fit(&profile)?;
    let report = BubbleReport {
        v0_star,
        mu0: energy(&profile),
        decay_rate: fit.rate,
        residual_2d: full_residual(&profile).relative,
        moments: moment_integrals(&profile),
        params: params.clone(),
        bisect_iterations: iterations,
        r_trusted,
    };
    Ok(GroundState { profile, report })
}
