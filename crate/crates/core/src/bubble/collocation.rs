//! Independent ground-state solver: Chebyshev collocation of the radial system
//! on `[-R, R]` with parity folding, Newton iteration, and a Bessel-ratio
//! Robin condition at `r = R`. Used to cross-check the shooting solver.

use super::BubbleParams;
use crate::error::{Result, SylError};
use crate::quad::clenshaw_curtis_weights;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct CollocationConfig {
    /// Number of collocation nodes in `(0, R]`.
    pub nodes: usize,
    /// Outer radius; defaults to `20 / lambda`.
    pub radius: Option<f64>,
    pub max_newton: usize,
    /// Newton stops once the largest update is below `tol` times the amplitude scale.
    pub tol: f64,
    /// Clenshaw-Curtis points used for the energy integral.
    pub quadrature_points: usize,
}

impl Default for CollocationConfig {
    fn default() -> Self {
        CollocationConfig {
            nodes: 241,
            radius: None,
            max_newton: 60,
            tol: 1e-12,
            quadrature_points: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSolution {
    pub v0: f64,
    pub mu0: f64,
    pub i_p0: f64,
    /// Positive collocation nodes (descending) and the components there.
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub newton_iterations: usize,
    pub residual: f64,
}

/// `K_{n+1}(x) / K_n(x)` from the large-argument expansion.
fn bessel_k_ratio(n: f64, x: f64) -> f64 {
    let series = |nu: f64| {
        let mu = 4.0 * nu * nu;
        let (mut sum, mut term) = (1.0, 1.0);
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    };
    series(n + 1.0) / series(n)
}

/// Chebyshev-Lobatto points `cos(j pi / n)` and the differentiation matrix.
fn cheb(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let x: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    let c: Vec<f64> = (0..=n)
        .map(|j| {
            let edge = if j == 0 || j == n { 2.0 } else { 1.0 };
            if j % 2 == 0 {
                edge
            } else {
                -edge
            }
        })
        .collect();
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row = 0.0;
        for j in 0..=n {
            if i != j {
                let v = c[i] / c[j] / (x[i] - x[j]);
                d[(i, j)] = v;
                row += v;
            }
        }
        d[(i, i)] = -row;
    }
    (x, d)
}

struct System {
    n: f64,
    m: f64,
    p: f64,
    r: Vec<f64>,
    d_even: DMatrix<f64>,
    d_odd: DMatrix<f64>,
    ratio: f64,
    boundary: usize,
}

impl System {
    fn size(&self) -> usize {
        self.r.len()
    }

    fn f_and_grad(&self, a: f64, b: f64) -> (f64, f64, f64) {
        let rho = a.hypot(b);
        if rho == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let f = rho.powf(self.p - 2.0);
        let g = (self.p - 2.0) * rho.powf(self.p - 4.0);
        (f, g * a, g * b)
    }

    fn residual(&self, z: &DVector<f64>) -> DVector<f64> {
        let m = self.size();
        let a = z.rows(0, m);
        let b = z.rows(m, m);
        let da = &self.d_even * a;
        let db = &self.d_odd * b;
        let mut out = DVector::zeros(2 * m);
        for i in 0..m {
            let (f, _, _) = self.f_and_grad(a[i], b[i]);
            out[i] = da[i] - self.n * a[i] / self.r[i] - (f + self.m) * b[i];
            out[m + i] = db[i] + (self.n + 1.0) * b[i] / self.r[i] + (f - self.m) * a[i];
        }
        let k = self.boundary;
        out[m + k] = b[k] + self.ratio * a[k];
        out
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let m = self.size();
        let mut j = DMatrix::zeros(2 * m, 2 * m);
        j.view_mut((0, 0), (m, m)).copy_from(&self.d_even);
        j.view_mut((m, m), (m, m)).copy_from(&self.d_odd);
        for i in 0..m {
            let (a, b) = (z[i], z[m + i]);
            let (f, fa, fb) = self.f_and_grad(a, b);
            j[(i, i)] += -self.n / self.r[i] - fa * b;
            j[(i, m + i)] += -(f + self.m) - fb * b;
            j[(m + i, i)] += (f - self.m) + fa * a;
            j[(m + i, m + i)] += (self.n + 1.0) / self.r[i] + fb * a;
        }
        let k = self.boundary;
        for col in 0..2 * m {
            j[(m + k, col)] = 0.0;
        }
        j[(m + k, k)] = self.ratio;
        j[(m + k, m + k)] = 1.0;
        j
    }
}

/// Barycentric interpolation on the full Chebyshev grid.
fn barycentric(x: &[f64], vals: &[f64], t: f64) -> f64 {
    let n = x.len() - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..=n {
        let diff = t - x[j];
        if diff == 0.0 {
            return vals[j];
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            w *= 0.5;
        }
        num += w * vals[j] / diff;
        den += w / diff;
    }
    num / den
}

/// Solve for the nodeless ground state by collocation. Only `S >= 0`.
pub fn collocation_ground_state(
    params: &BubbleParams,
    cfg: &CollocationConfig,
) -> Result<CollocationSolution> {
    params.validate()?;
    if params.s < 0 {
        return Err(SylError::InvalidParameter(
            "collocation oracle supports S >= 0 only".into(),
        ));
    }
    if cfg.nodes < 8 {
        return Err(SylError::InvalidParameter("need at least 8 collocation nodes".into()));
    }
    let radius = cfg.radius.unwrap_or(20.0 / params.lambda);
    let n_ord = params.s as f64;
    let m_par = params.lambda;
    if m_par * radius < 10.0 {
        return Err(SylError::InvalidParameter(
            "collocation radius must satisfy lambda R >= 10".into(),
        ));
    }

    // odd polynomial degree keeps r = 0 off the grid
    let big_n = 2 * cfg.nodes - 1;
    let (x, d) = cheb(big_n);
    let m = cfg.nodes;
    let r_full: Vec<f64> = x.iter().map(|x| radius * x).collect();
    // node j and its mirror big_n - j; positive nodes are j < m
    let a_parity = if params.s % 2 == 0 { 1.0 } else { -1.0 };
    let mut d_even = DMatrix::zeros(m, m);
    let mut d_odd = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let direct = d[(i, j)] / radius;
            let mirror = d[(i, big_n - j)] / radius;
            d_even[(i, j)] = direct + a_parity * mirror;
            d_odd[(i, j)] = direct - a_parity * mirror;
        }
    }
    let sys = System {
        n: n_ord,
        m: m_par,
        p: params.p,
        r: r_full[..m].to_vec(),
        d_even,
        d_odd,
        ratio: bessel_k_ratio(n_ord, m_par * radius),
        boundary: 0,
    };

    let scale = params.amplitude_scale();
    // sech-shaped seeds in a fixed order; the first nodeless, nontrivial
    // Newton limit is the ground state
    let mut seeds = Vec::new();
    for amp in [2.5, 2.0, 3.0] {
        for width in [1.0, 1.4] {
            for ub in [0.6, 0.3, 1.0] {
                seeds.push((amp * scale, width * params.lambda, ub));
            }
        }
    }
    let mut best: Option<(f64, DVector<f64>, usize, f64)> = None;
    for (amp, w, ub) in seeds {
        let mut z = DVector::zeros(2 * m);
        for i in 0..m {
            let r = sys.r[i];
            let sech = 1.0 / (w * r).cosh();
            z[i] = amp * sech * r.powf(n_ord);
            z[m + i] = -ub * amp * (w * r).tanh() * sech * r.powf(n_ord);
        }
        let Some((iters, res)) = newton(&sys, &mut z, amp, cfg) else {
            continue;
        };
        // the far tail sits below the discretisation error and may change sign
        let nodeless = (0..m).all(|i| z[i] > 0.0 || sys.r[i] > 0.7 * radius);
        let nontrivial = z.rows(0, m).amax() > 0.1 * scale;
        if nodeless && nontrivial {
            let i_p0 = energy_integral(&sys, &x, &z, radius, params, cfg.quadrature_points, a_parity);
            best = Some((i_p0, z, iters, res));
            break;
        }
    }
    let (i_p0, z, iters, res) = best.ok_or(SylError::NotConverged {
        what: "collocation Newton",
        iterations: cfg.max_newton,
        residual: f64::NAN,
    })?;

    let (a_full, _) = unfold(&z, m, big_n, a_parity);
    let v0 = if params.s == 0 {
        barycentric(&x, &a_full, 0.0)
    } else {
        0.0
    };
    let a: Vec<f64> = z.rows(0, m).iter().copied().collect();
    let b: Vec<f64> = z.rows(m, m).iter().copied().collect();
    Ok(CollocationSolution {
        v0,
        mu0: 2.0 * PI * (0.5 - 1.0 / params.p) * i_p0,
        i_p0,
        r: sys.r.clone(),
        u: b,
        v: a,
        newton_iterations: iters,
        residual: res,
    })
}

fn newton(sys: &System, z: &mut DVector<f64>, amp: f64, cfg: &CollocationConfig) -> Option<(usize, f64)> {
    for it in 0..cfg.max_newton {
        let f = sys.residual(z);
        let j = sys.jacobian(z);
        let dz = j.lu().solve(&(-&f))?;
        let step = dz.amax();
        if !step.is_finite() {
            return None;
        }
        let t = (0.5 * amp / step).min(1.0);
        *z += t * &dz;
        if step < cfg.tol * amp {
            return Some((it + 1, sys.residual(z).amax()));
        }
    }
    None
}

fn unfold(z: &DVector<f64>, m: usize, big_n: usize, a_parity: f64) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; big_n + 1];
    let mut b = vec![0.0; big_n + 1];
    for i in 0..m {
        a[i] = z[i];
        b[i] = z[m + i];
        a[big_n - i] = a_parity * z[i];
        b[big_n - i] = -a_parity * z[m + i];
    }
    (a, b)
}

fn energy_integral(
    sys: &System,
    x: &[f64],
    z: &DVector<f64>,
    radius: f64,
    params: &BubbleParams,
    q: usize,
    a_parity: f64,
) -> f64 {
    let m = sys.size();
    let big_n = x.len() - 1;
    let (a_full, b_full) = unfold(z, m, big_n, a_parity);
    let w = clenshaw_curtis_weights(q);
    (0..=q)
        .map(|k| {
            let t = (PI * k as f64 / q as f64).cos();
            let r = 0.5 * radius * (t + 1.0);
            let xr = r / radius;
            let a = barycentric(x, &a_full, xr);
            let b = barycentric(x, &b_full, xr);
            0.5 * radius * w[k] * a.hypot(b).powf(params.p) * r
        })
        .sum()
}
