use super::operator::TorusProblem;
use super::solver::Tolerances;
use super::FourierSpinor;
use crate::error::{Result, SylError};

/// `chi(u)`, the maximizer of `w -> L_eps(u + w)` over `E-`.
#[derive(Clone, Debug)]
pub struct InnerSolution {
    pub chi: FourierSpinor,
    /// `L_eps(u + chi)`, i.e. `I_eps(u)`.
    pub energy: f64,
    /// Full Riesz gradient at `u + chi`; its `E-` part is below tolerance.
    pub gradient: FourierSpinor,
    /// Norm of the `E-` part of the gradient.
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Conjugate gradients for `op(x) = b` with `op` SPD in the eps inner product.
fn cg(
    problem: &TorusProblem,
    op: impl Fn(&FourierSpinor) -> FourierSpinor,
    b: &FourierSpinor,
    rtol: f64,
    max_iter: usize,
) -> FourierSpinor {
    let t = &problem.table;
    let mut x = problem.zeros();
    let mut r = b.clone();
    let mut d = r.clone();
    let mut rr = t.norm_eps_sq(&r);
    let stop = rtol * rtol * rr;
    for _ in 0..max_iter {
        if rr <= stop {
            break;
        }
        let ad = op(&d);
        let curv = t.inner_eps(&d, &ad);
        if curv <= 0.0 {
            break;
        }
        let alpha = rr / curv;
        x.axpy(alpha, &d);
        r.axpy(-alpha, &ad);
        let rr_new = t.norm_eps_sq(&r);
        let beta = rr_new / rr;
        rr = rr_new;
        d = r.add(&d.scaled(beta));
    }
    x
}

/// Newton-CG ascent on the concave map `w -> L_eps(u + w)` over `E-`, with
/// Armijo damping and a gradient-ascent fallback.
pub fn inner_maximize(
    problem: &TorusProblem,
    u: &FourierSpinor,
    tol: &Tolerances,
    guess: Option<&FourierSpinor>,
) -> Result<InnerSolution> {
    let t = &problem.table;
    let mut w = match guess {
        Some(g) => t.proj_minus(g),
        None => problem.zeros(),
    };
    let mut psi = u.add(&w);
    let mut lin = problem.linearize(&psi);
    let mut energy = problem.quadratic(&psi) - problem.potential(&lin);
    for it in 0..=tol.max_inner {
        let gradient = problem.gradient_at(&psi, &lin);
        let gm = t.proj_minus(&gradient);
        let gn = t.norm_eps_sq(&gm).sqrt();
        if gn < tol.tol_inner {
            return Ok(InnerSolution {
                chi: w,
                energy,
                gradient,
                grad_norm: gn,
                iterations: it,
            });
        }
        if it == tol.max_inner {
            return Err(SylError::NotConverged {
                what: "inner maximization",
                iterations: it,
                residual: gn,
            });
        }
        // -P- H P- is bounded below by the identity on E-
        let op = |v: &FourierSpinor| t.proj_minus(&problem.hessian_apply(&lin, v)).scaled(-1.0);
        // op annihilates E+, so rounding-level E+ content in the Krylov vectors
        // would otherwise grow unchecked and drag w off E-
        let mut dir = t.proj_minus(&cg(problem, op, &gm, gn.sqrt().min(0.1), 200));
        let mut slope = t.inner_eps(&gm, &dir);
        if slope <= 0.0 {
            dir = gm.clone();
            slope = gn * gn;
        }
        let mut step = 1.0;
        loop {
            let w_new = w.add(&dir.scaled(step));
            let psi_new = u.add(&w_new);
            let lin_new = problem.linearize(&psi_new);
            let e_new = problem.quadratic(&psi_new) - problem.potential(&lin_new);
            // once the expected gain is at rounding level the comparison carries no information
            let flat = slope * step <= 1e-13 * energy.abs().max(1.0);
            if e_new >= energy + 1e-4 * step * slope || flat || step < 1e-8 {
                w = w_new;
                psi = psi_new;
                lin = lin_new;
                energy = e_new;
                break;
            }
            step *= 0.5;
        }
    }
    unreachable!()
}

/// The reduced functional `I_eps(u) = L_eps(u + chi(u))`.
pub fn reduced_i(problem: &TorusProblem, u: &FourierSpinor, tol: &Tolerances) -> Result<f64> {
    Ok(inner_maximize(problem, u, tol, None)?.energy)
}

/// The maximum of `t -> I_eps(t u)` on the positive half-line.
#[derive(Clone, Debug)]
pub struct LineMax {
    pub t_star: f64,
    /// `I_eps(t_star u)`.
    pub energy: f64,
    /// Inner solution at `t_star u`.
    pub inner: InnerSolution,
    /// Sign changes of `d/dt I(t u)` among all sampled `t`; uniqueness means 1.
    pub sign_changes: usize,
    pub evaluations: usize,
}

struct LineProbe<'a> {
    problem: &'a TorusProblem,
    u: &'a FourierSpinor,
    tol: &'a Tolerances,
    last: Option<(f64, FourierSpinor)>,
    samples: Vec<(f64, f64)>,
}

impl LineProbe<'_> {
    /// `d/dt I(t u) = L'(t u + chi)[u]`, the `chi'` contribution vanishing.
    fn eval(&mut self, t: f64) -> Result<(f64, InnerSolution)> {
        let guess = self.last.as_ref().map(|(t0, chi)| chi.scaled(t / t0));
        let tu = self.u.scaled(t);
        let inner = inner_maximize(self.problem, &tu, self.tol, guess.as_ref())?;
        let d = self.problem.table.inner_eps(&inner.gradient, self.u);
        self.last = Some((t, inner.chi.clone()));
        self.samples.push((t, d));
        Ok((d, inner))
    }
}

fn count_sign_changes(samples: &[(f64, f64)]) -> usize {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    s.windows(2).filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0)).count()
}

/// Nehari rescaling: brackets the sign change of `d/dt I(t u)` by doubling or
/// halving from `t0`, then refines with the Illinois variant of regula falsi.
pub fn line_max_t(
    problem: &TorusProblem,
    u: &FourierSpinor,
    tol: &Tolerances,
    t0: f64,
    chi_guess: Option<&FourierSpinor>,
) -> Result<LineMax> {
    let t = &problem.table;
    let norm_sq = t.norm_eps_sq(u);
    if !(norm_sq.sqrt() >= 1e-12) {
        return Err(SylError::NoSignChange);
    }
    let mut probe = LineProbe {
        problem,
        u,
        tol,
        last: chi_guess.map(|c| (t0, c.clone())),
        samples: Vec::new(),
    };
    let mut t_cur = if t0 > 0.0 { t0 } else { 1.0 };
    let (mut d_cur, _) = probe.eval(t_cur)?;
    let mut inner;
    let (mut lo, mut hi);
    let (mut d_lo, mut d_hi);
    if d_cur > 0.0 {
        lo = t_cur;
        d_lo = d_cur;
        loop {
            t_cur *= 2.0;
            let r = probe.eval(t_cur)?;
            d_cur = r.0;
            inner = r.1;
            if d_cur <= 0.0 {
                hi = t_cur;
                d_hi = d_cur;
                break;
            }
            lo = t_cur;
            d_lo = d_cur;
            if t_cur > 1e12 {
                return Err(SylError::NoSignChange);
            }
        }
    } else {
        hi = t_cur;
        d_hi = d_cur;
        loop {
            t_cur *= 0.5;
            let r = probe.eval(t_cur)?;
            d_cur = r.0;
            inner = r.1;
            if d_cur > 0.0 {
                lo = t_cur;
                d_lo = d_cur;
                break;
            }
            hi = t_cur;
            d_hi = d_cur;
            if t_cur < 1e-12 {
                return Err(SylError::NoSignChange);
            }
        }
    }
    let d_tol = 1e-13 * norm_sq;
    let mut side = 0i8;
    for _ in 0..200 {
        if d_cur.abs() <= d_tol || hi - lo <= 1e-15 * hi {
            break;
        }
        let mut next = (lo * d_hi - hi * d_lo) / (d_hi - d_lo);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let r = probe.eval(next)?;
        t_cur = next;
        d_cur = r.0;
        inner = r.1;
        if d_cur > 0.0 {
            lo = next;
            d_lo = d_cur;
            if side == 1 {
                d_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = next;
            d_hi = d_cur;
            if side == -1 {
                d_lo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(LineMax {
        t_star: t_cur,
        energy: inner.energy,
        inner,
        sign_changes: count_sign_changes(&probe.samples),
        evaluations: probe.samples.len(),
    })
}

/// `(t, d/dt I(t u))` at the given parameters, warm-started in order.
pub fn line_derivative_scan(
    problem: &TorusProblem,
    u: &FourierSpinor,
    tol: &Tolerances,
    ts: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut probe = LineProbe {
        problem,
        u,
        tol,
        last: None,
        samples: Vec::new(),
    };
    for &t in ts {
        probe.eval(t)?;
    }
    Ok(probe.samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::C64;
    use crate::torus::{assemble, Representation, TorusGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn problem() -> TorusProblem {
        TorusProblem::new(assemble(TorusGrid::square(16, 2.0 * PI), 0.5, 1.0).unwrap(), 3.0).unwrap()
    }

    fn random_field(p: &TorusProblem, seed: u64, amp: f64) -> FourierSpinor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = FourierSpinor::zeros(p.grid(), Representation::Fourier);
        for m in 0..p.table.mu.len() {
            let decay = amp / p.table.mu[m].powi(3);
            for c in 0..2 {
                f.data[c][m] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
            }
        }
        f
    }

    fn random_plus(p: &TorusProblem, seed: u64, amp: f64) -> FourierSpinor {
        p.table.proj_plus(&random_field(p, seed, amp))
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = problem();
        let s = inner_maximize(&p, &p.zeros(), &Tolerances::default(), None).unwrap();
        assert!(s.chi.data.iter().all(|c| c.iter().all(|z| *z == C64::new(0.0, 0.0))));
        assert_eq!(s.energy, 0.0);
    }

    #[test]
    fn inner_solution_is_a_maximum() {
        let p = problem();
        let tol = Tolerances::default();
        let u = random_plus(&p, 1, 2.0);
        let s = inner_maximize(&p, &u, &tol, None).unwrap();
        assert!(s.grad_norm < tol.tol_inner);
        let base = u.add(&s.chi);
        for seed in 0..10 {
            let w = p.table.proj_minus(&random_field(&p, 100 + seed, 0.1));
            assert!(p.energy_l(&base.add(&w)) <= s.energy);
        }
        assert!(s.energy >= p.energy_l(&u));
    }

    #[test]
    fn line_maximum_halves_under_doubling() {
        let p = problem();
        let tol = Tolerances::default();
        let u = random_plus(&p, 2, 1.0);
        let a = line_max_t(&p, &u, &tol, 1.0, None).unwrap();
        let b = line_max_t(&p, &u.scaled(2.0), &tol, 1.0, None).unwrap();
        assert_eq!(a.sign_changes, 1);
        assert!((b.t_star - a.t_star / 2.0).abs() < 1e-9 * a.t_star, "{} {}", a.t_star, b.t_star);
        assert!((a.energy - b.energy).abs() < 1e-10 * a.energy);
    }

    #[test]
    fn degenerate_direction_rejected() {
        let p = problem();
        assert!(matches!(
            line_max_t(&p, &p.zeros(), &Tolerances::default(), 1.0, None),
            Err(SylError::NoSignChange)
        ));
    }
}
