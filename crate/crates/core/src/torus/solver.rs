use super::diagnostics::localization_report;
use super::operator::{assemble_with, Linearization, ModeTable, TorusProblem};
use super::reduction::{line_max_t, InnerSolution};
use super::{FourierSpinor, TorusGrid};
use crate::bubble::{find_ground_state, BubbleParams, RadialProfile};
use crate::clifford::C64;
use crate::error::{Result, SylError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Bound on the `E-` gradient norm of the inner problem.
    pub tol_inner: f64,
    /// Bound on the full gradient norm `||L'_eps||` at the solution.
    pub tol_outer: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    /// Gradient norm below which Newton-MINRES steps replace descent steps.
    pub newton_switch: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_inner: 1e-10,
            tol_outer: 1e-9,
            max_inner: 50,
            max_outer: 500,
            newton_switch: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeedMode {
    /// The planar ground state `eta(x - c) phi((x - c) / eps)`, projected to `E+`.
    BubbleTransplant,
    /// A randomly placed and weighted Gaussian bump, reproducible from the seed.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: TorusGrid,
    pub eps: f64,
    pub a: f64,
    pub p: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_seed")]
    pub seed: SeedMode,
    #[serde(default)]
    pub dealias: bool,
    /// Transplant centre; defaults to the middle of the torus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
}

fn default_seed() -> SeedMode {
    SeedMode::BubbleTransplant
}

impl SolverConfig {
    pub fn new(grid: TorusGrid, eps: f64, a: f64, p: f64) -> Self {
        SolverConfig {
            grid,
            eps,
            a,
            p,
            tolerances: Tolerances::default(),
            seed: SeedMode::BubbleTransplant,
            dealias: false,
            center: None,
        }
    }

    pub fn problem(&self) -> Result<TorusProblem> {
        TorusProblem::new(assemble_with(self.grid, self.eps, self.a, self.dealias)?, self.p)
    }

    pub fn center(&self) -> [f64; 2] {
        self.center.unwrap_or([0.5 * self.grid.l1, 0.5 * self.grid.l2])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub psi: FourierSpinor,
    pub eps: f64,
    pub mu_eps: f64,
    pub grad_norm: f64,
    pub converged: bool,
    /// Nehari parameters of the accepted descent steps.
    pub t_star: Vec<f64>,
    pub peak: [f64; 2],
    pub peak_index: [usize; 2],
    /// Another grid point attains the same maximum.
    pub peak_tie: bool,
    pub width: f64,
    pub decay_c: f64,
    pub decay_r_squared: f64,
    pub tau0: f64,
    /// `eps^{-2} int (f|psi|^2/2 - F)`, equal to `mu_eps` at a critical point.
    pub energy_identity: f64,
    pub outer_iterations: usize,
    pub newton_iterations: usize,
    /// The solver finds a critical point on the Nehari set, not a certified infimum.
    pub global_minimality_certified: bool,
}

/// Lower bound for `I_eps` on the Nehari set of the discrete problem.
///
/// With `|u|_inf <= C ||u||_eps`, `C^2 = eps^2 sum_k mu(k)^{-1} / (L1 L2)`, and
/// `int |u|^2 <= eps^2 ||u||^2 / a`, every `u` in `E+` has
/// `I(u) >= ||u||^2/2 - C^{p-2} ||u||^p / (p a)`, whose maximum is
/// `tau0 = (1/2 - 1/p) a^{2/(p-2)} / C^2`.
pub fn tau0(table: &ModeTable, p: f64) -> f64 {
    let inv: f64 = table.mu.iter().zip(&table.mask).filter(|(_, k)| **k).map(|(m, _)| 1.0 / m).sum();
    let c2 = table.eps * table.eps * inv / table.grid.area();
    (0.5 - 1.0 / p) * table.a.powf(2.0 / (p - 2.0)) / c2
}

fn cutoff(r: f64, ell: f64) -> f64 {
    let s = (r - ell / 8.0) / (ell / 8.0);
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * s).cos())
    }
}

/// `P+ [eta(x - c) phi((x - c)/eps)]` with `eta = 1` on `|x| <= L/8` and
/// `eta = 0` beyond `L/4`.
pub fn transplant_bubble(problem: &TorusProblem, profile: &RadialProfile, center: [f64; 2]) -> FourierSpinor {
    let grid = problem.grid();
    let eps = problem.eps();
    let ell = grid.l1.min(grid.l2);
    let field = FourierSpinor::from_fn(grid, |x| {
        let d = grid.displacement(x, center);
        let eta = cutoff(d[0].hypot(d[1]), ell);
        if eta == 0.0 {
            return [C64::new(0.0, 0.0); 2];
        }
        let s = profile.spinor_at([d[0] / eps, d[1] / eps]);
        [s[0] * eta, s[1] * eta]
    });
    problem.table.proj_plus(&field.to_fourier(problem.table.fft()))
}

fn random_seed(problem: &TorusProblem, seed: u64) -> FourierSpinor {
    let grid = problem.grid();
    let eps = problem.eps();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // centred on a node: off-node bumps creep towards the lattice through an
    // exponentially weak pinning force that neither descent nor Newton resolves
    let center = grid.point(rng.gen_range(0..grid.n1), rng.gen_range(0..grid.n2));
    let amp = [
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ];
    let width = 1.5 * eps;
    let field = FourierSpinor::from_fn(grid, |x| {
        let d = grid.displacement(x, center);
        let g = (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * width * width)).exp();
        [amp[0] * g, amp[1] * g]
    });
    let mut coeffs = field.to_fourier(problem.table.fft());
    // low-mode noise breaks any accidental symmetry of the bump
    let scale = 0.05 * coeffs.data[0][0].norm().max(coeffs.data[1][0].norm());
    for i1 in 0..grid.n1 {
        for i2 in 0..grid.n2 {
            let m = i1 * grid.n2 + i2;
            if TorusGrid::mode_number(i1, grid.n1).abs() <= 3 && TorusGrid::mode_number(i2, grid.n2).abs() <= 3 {
                for c in 0..2 {
                    coeffs.data[c][m] += C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
                }
            }
        }
    }
    problem.table.proj_plus(&coeffs)
}

/// Minimal-residual iteration for `H x = b` with `H` self-adjoint in the eps
/// inner product (indefinite in general).
fn minres(problem: &TorusProblem, lin: &Linearization, b: &FourierSpinor, rtol: f64, max_iter: usize) -> FourierSpinor {
    let t = &problem.table;
    let mut x = problem.zeros();
    let beta1 = t.norm_eps_sq(b).sqrt();
    if beta1 == 0.0 {
        return x;
    }
    let mut r1 = b.clone();
    let mut r2 = b.clone();
    let mut y = b.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = problem.zeros();
    let mut w2 = problem.zeros();
    for itn in 0..max_iter {
        let v = y.scaled(1.0 / beta);
        y = problem.hessian_apply(lin, &v);
        if itn > 0 {
            y.axpy(-beta / oldb, &r1);
        }
        let alfa = t.inner_eps(&v, &y);
        y.axpy(-alfa / beta, &r2);
        r1 = r2;
        r2 = y.clone();
        oldb = beta;
        beta = t.norm_eps_sq(&y).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::MIN_POSITIVE);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w.clone());
        let mut wn = v;
        wn.axpy(-oldeps, &w1);
        wn.axpy(-delta, &w2);
        w = wn.scaled(1.0 / gamma);
        x.axpy(phi, &w);
        if phibar <= rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    x
}

struct Iterate {
    u: FourierSpinor,
    inner: InnerSolution,
}

impl Iterate {
    fn psi(&self) -> FourierSpinor {
        self.u.add(&self.inner.chi)
    }
}

fn nehari_point(problem: &TorusProblem, u: &FourierSpinor, tol: &Tolerances, chi: Option<&FourierSpinor>) -> Result<(Iterate, f64)> {
    let lm = line_max_t(problem, u, tol, 1.0, chi)?;
    Ok((
        Iterate {
            u: u.scaled(lm.t_star),
            inner: lm.inner,
        },
        lm.t_star,
    ))
}

/// Translates `psi` so that the `|psi|^4`-centroid of its main peak sits on
/// the nearest grid node.
fn recenter(problem: &TorusProblem, psi: &FourierSpinor) -> FourierSpinor {
    let grid = problem.grid();
    let abs = psi.to_physical(problem.table.fft()).abs();
    let (best, max) = abs
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (m, &v)| if v > acc.1 { (m, v) } else { acc });
    let peak = grid.point(best / grid.n2, best % grid.n2);
    let (mut w, mut d) = (0.0, [0.0; 2]);
    for (m, &v) in abs.iter().enumerate() {
        if v > 0.1 * max {
            let x = grid.displacement(grid.point(m / grid.n2, m % grid.n2), peak);
            let wt = v.powi(4);
            w += wt;
            d[0] += wt * x[0];
            d[1] += wt * x[1];
        }
    }
    let h = grid.spacing();
    let centroid = [peak[0] + d[0] / w, peak[1] + d[1] / w];
    let node = [(centroid[0] / h[0]).round() * h[0], (centroid[1] / h[1]).round() * h[1]];
    psi.translated([node[0] - centroid[0], node[1] - centroid[1]])
}

/// Runs the reduction scheme from `u0` in `E+` and returns the final state,
/// converged or not.
///
/// Descent: `u <- u - s P+ grad I(u)`, rescaled onto the Nehari set, with
/// backtracking from the last accepted step. Below `newton_switch` the full
/// gradient is driven to zero by Newton steps with MINRES inner solves.
pub fn minimize_nehari_from(problem: &TorusProblem, u0: &FourierSpinor, tol: &Tolerances) -> Result<SolveResult> {
    let t = &problem.table;
    let (mut it_state, t0) = nehari_point(problem, u0, tol, None)?;
    let mut t_hist = vec![t0];
    let mut psi = it_state.psi();
    let mut grad = it_state.inner.gradient.clone();
    let mut gn = t.norm_eps_sq(&grad).sqrt();
    let mut energy = it_state.inner.energy;
    let mut split_stale = false;
    let mut switch = tol.newton_switch;
    let mut step = 1.0;
    let (mut outer, mut newton) = (0, 0);
    let mut retries = 0u32;
    let mut converged = gn < tol.tol_outer;
    while !converged && outer < tol.max_outer {
        outer += 1;
        if gn < switch {
            let lin = problem.linearize(&psi);
            let dir = minres(problem, &lin, &grad.scaled(-1.0), gn.clamp(1e-10, 0.1), 400 << (2 * retries));
            let mut s = 1.0;
            let mut accepted = false;
            for _ in 0..8 {
                let trial = psi.add(&dir.scaled(s));
                let g_trial = problem.gradient(&trial);
                let gn_trial = t.norm_eps_sq(&g_trial).sqrt();
                if gn_trial < gn {
                    psi = trial;
                    grad = g_trial;
                    gn = gn_trial;
                    energy = problem.energy_l(&psi);
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if accepted {
                newton += 1;
                split_stale = true;
                converged = gn < tol.tol_outer;
                continue;
            }
            switch *= 0.1;
        }
        if split_stale {
            let (state, ts) = nehari_point(problem, &t.proj_plus(&psi), tol, Some(&t.proj_minus(&psi)))?;
            it_state = state;
            t_hist.push(ts);
            grad = it_state.inner.gradient.clone();
            gn = t.norm_eps_sq(&grad).sqrt();
            energy = it_state.inner.energy;
            split_stale = false;
        }

        let gp = t.proj_plus(&grad);
        let gp_sq = t.norm_eps_sq(&gp);
        loop {
            let trial = it_state.u.sub(&gp.scaled(step));
            let attempt = nehari_point(problem, &trial, tol, Some(&it_state.inner.chi));
            if let Ok((state, ts)) = attempt {
                let e_new = state.inner.energy;
                let gn_new = t.norm_eps_sq(&state.inner.gradient).sqrt();
                let decrease = e_new < energy - 1e-4 * step * gp_sq;
                let flat = (e_new - energy).abs() <= 1e-13 * energy.abs() && gn_new < gn;
                if decrease || flat {
                    it_state = state;
                    t_hist.push(ts);
                    psi = it_state.psi();
                    grad = it_state.inner.gradient.clone();
                    gn = gn_new;
                    energy = e_new;
                    step = (1.5 * step).min(4.0);
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                // descent has hit the rounding floor of the energy; near a
                // critical point hand over to Newton with a larger Krylov budget
                if gn < tol.newton_switch && retries < 3 {
                    retries += 1;
                    // the soft direction is usually a drift across the lattice
                    psi = recenter(problem, &psi);
                    grad = problem.gradient(&psi);
                    gn = t.norm_eps_sq(&grad).sqrt();
                    energy = problem.energy_l(&psi);
                    split_stale = true;
                    switch = tol.newton_switch;
                    step = 1.0;
                    break;
                }
                return Err(SylError::SaddleEscapeFailed { step });
            }
        }
        converged = gn < tol.tol_outer;
    }
    let loc = localization_report(problem, &psi);
    Ok(SolveResult {
        eps: problem.eps(),
        mu_eps: energy,
        grad_norm: gn,
        converged,
        t_star: t_hist,
        peak: loc.peak,
        peak_index: loc.peak_index,
        peak_tie: loc.peak_tie,
        width: loc.width,
        decay_c: loc.decay_c,
        decay_r_squared: loc.r_squared,
        tau0: tau0(t, problem.p),
        energy_identity: problem.energy_identity(&psi),
        outer_iterations: outer,
        newton_iterations: newton,
        global_minimality_certified: false,
        psi,
    })
}

/// Seeds per the configuration and runs the solver; non-convergence is
/// reported through `SolveResult::converged` rather than as an error.
pub fn solve(config: &SolverConfig) -> Result<SolveResult> {
    let problem = config.problem()?;
    let u0 = match config.seed {
        SeedMode::BubbleTransplant => {
            let ground = find_ground_state(&BubbleParams::new(config.a, config.p))?;
            transplant_bubble(&problem, &ground.profile, config.center())
        }
        SeedMode::Random(seed) => random_seed(&problem, seed),
    };
    minimize_nehari_from(&problem, &u0, &config.tolerances)
}

/// [`solve`], failing with `NotConverged` when the gradient tolerance is not met.
pub fn minimize_nehari(config: &SolverConfig) -> Result<SolveResult> {
    let r = solve(config)?;
    if !r.converged {
        return Err(SylError::NotConverged {
            what: "Nehari minimization",
            iterations: r.outer_iterations,
            residual: r.grad_norm,
        });
    }
    Ok(r)
}

/// Both sides of the Palais-Smale inequality
/// `max_t I(t phi+) <= L(phi) + O(||L'(phi)||^2)` at a field `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorollaryProbe {
    pub max_line: f64,
    pub energy: f64,
    pub grad_norm: f64,
}

pub fn corollary_probe(problem: &TorusProblem, phi: &FourierSpinor, tol: &Tolerances) -> Result<CorollaryProbe> {
    let plus = problem.table.proj_plus(phi);
    let lm = line_max_t(problem, &plus, tol, 1.0, Some(&problem.table.proj_minus(phi)))?;
    Ok(CorollaryProbe {
        max_line: lm.energy,
        energy: problem.energy_l(phi),
        grad_norm: problem.gradient_norm(phi),
    })
}
