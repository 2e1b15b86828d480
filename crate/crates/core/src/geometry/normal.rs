use super::curvature::{christoffel, curvature_at};
use super::SurfaceChart;
use crate::bubble::RadialProfile;
use crate::error::{Result, SylError};
use crate::ode::rk4_step;
use crate::quad::{fit_line, gauss_legendre_on};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Target step length of the geodesic integrator (in units of the initial speed).
const GEODESIC_STEP: f64 = 2e-3;

fn steps_for(len: f64) -> usize {
    ((len / GEODESIC_STEP).ceil() as usize).max(16)
}

fn frame_at(chart: &SurfaceChart, y: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    Ok(curvature_at(chart, y)?.frame)
}

fn geodesic_rhs(chart: &SurfaceChart, state: &[f64; 4]) -> Result<[f64; 4]> {
    let q = [state[0], state[1]];
    let jet = chart.jet(q)?;
    let gam = christoffel(&jet.g, &jet.dg);
    let v = [state[2], state[3]];
    let mut acc = [0.0; 2];
    for (k, a) in acc.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                *a -= gam[k][i][j] * v[i] * v[j];
            }
        }
    }
    Ok([v[0], v[1], acc[0], acc[1]])
}

/// Unwrapped geodesic with a fixed number of RK4 steps; the observer sees
/// every intermediate state.
fn geodesic(
    chart: &SurfaceChart,
    y: [f64; 2],
    frame: &[[f64; 2]; 2],
    x: [f64; 2],
    steps: usize,
    mut observer: impl FnMut(&[f64; 4]),
) -> Result<[f64; 2]> {
    let v = [
        x[0] * frame[0][0] + x[1] * frame[1][0],
        x[0] * frame[0][1] + x[1] * frame[1][1],
    ];
    let mut state = [y[0], y[1], v[0], v[1]];
    observer(&state);
    if x == [0.0, 0.0] {
        return Ok(y);
    }
    let h = 1.0 / steps as f64;
    let domain = *chart.domain();
    let mut failure = None;
    for n in 0..steps {
        let mut rhs = |_t: f64, s: &[f64; 4]| match geodesic_rhs(chart, s) {
            Ok(d) => d,
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; 4]
            }
        };
        state = rk4_step(&mut rhs, n as f64 * h, &state, h);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if !domain.contains([state[0], state[1]]) {
            return Err(SylError::GeodesicLeftDomain {
                s: state[0],
                t: state[1],
            });
        }
        observer(&state);
    }
    Ok([state[0], state[1]])
}

/// `exp_y(x)` with `x` in orthonormal-frame components at `y`; periodic
/// coordinates of the result are wrapped into the domain.
pub fn exp_map(chart: &SurfaceChart, y: [f64; 2], x: [f64; 2]) -> Result<[f64; 2]> {
    let frame = frame_at(chart, y)?;
    let len = x[0].hypot(x[1]);
    let end = geodesic(chart, y, &frame, x, steps_for(len), |_| {})?;
    Ok(chart.domain().wrap(end))
}

/// Points and speeds `|c'(t)|_g` along `t -> exp_y(t x)`, `t in [0, 1]`.
pub fn exp_map_path(chart: &SurfaceChart, y: [f64; 2], x: [f64; 2]) -> Result<Vec<([f64; 2], f64)>> {
    let frame = frame_at(chart, y)?;
    let len = x[0].hypot(x[1]);
    let mut out = Vec::new();
    let mut err = None;
    geodesic(chart, y, &frame, x, steps_for(len), |s| {
        let g = chart.metric([s[0], s[1]]);
        let speed2 = g[0][0] * s[2] * s[2] + 2.0 * g[0][1] * s[2] * s[3] + g[1][1] * s[3] * s[3];
        if !speed2.is_finite() {
            err.get_or_insert(SylError::IntegrationFailure {
                r: 0.0,
                reason: "non-finite geodesic speed".into(),
            });
        }
        out.push((chart.domain().wrap([s[0], s[1]]), speed2.sqrt()));
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Metric in normal coordinates at `y`, `g_ab(exp_y x)`, from a Richardson
/// extrapolated central-difference Jacobian of the exponential map.
pub fn normal_metric(chart: &SurfaceChart, y: [f64; 2], x: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    let frame = frame_at(chart, y)?;
    normal_metric_with_frame(chart, y, &frame, x)
}

fn normal_metric_with_frame(
    chart: &SurfaceChart,
    y: [f64; 2],
    frame: &[[f64; 2]; 2],
    x: [f64; 2],
) -> Result<[[f64; 2]; 2]> {
    let h = 1e-3;
    // one step count for the centre and all perturbed geodesics keeps the
    // discrete map smooth in x
    let steps = steps_for(x[0].hypot(x[1]) + 2.0 * h);
    let end = |x: [f64; 2]| geodesic(chart, y, frame, x, steps, |_| {});
    let mut jac = [[0.0; 2]; 2]; // jac[a][i] = d q^i / d x_a
    for a in 0..2 {
        let diff = |h: f64| -> Result<[f64; 2]> {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let (p, m) = (end(xp)?, end(xm)?);
            Ok([(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)])
        };
        let coarse = diff(h)?;
        let fine = diff(0.5 * h)?;
        for i in 0..2 {
            jac[a][i] = (4.0 * fine[i] - coarse[i]) / 3.0;
        }
    }
    let g = chart.metric(end(x)?);
    let mut gn = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    gn[a][b] += jac[a][i] * g[i][j] * jac[b][j];
                }
            }
        }
    }
    Ok(gn)
}

fn sqrt_det(g: &[[f64; 2]; 2]) -> f64 {
    (g[0][0] * g[1][1] - g[0][1] * g[1][0]).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricExpansion {
    /// Smallest fitted log-log slope of `g_ab - delta_ab + R(e_a,x,x,e_b)/3`
    /// over directions and components; infinite if the remainder vanishes.
    pub fitted_order: f64,
    /// Relative error of the fitted `|x|^2` coefficient against `-R/3`.
    pub coeff_error: f64,
    /// Same two quantities for `sqrt(det g) = 1 - Ric(x,x)/6 + O(|x|^3)`.
    pub det_fitted_order: f64,
    pub det_coeff_error: f64,
}

/// Noise floor below which remainders are treated as exactly zero.
const REMAINDER_FLOOR: f64 = 1e-10;

fn remainder_order(radii: &[f64], rem: &[f64]) -> Option<f64> {
    if rem.iter().all(|r| r.abs() <= REMAINDER_FLOOR) {
        return None;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(rem)
        .filter(|(_, r)| r.abs() > REMAINDER_FLOOR)
        .map(|(r, v)| (r.ln(), v.abs().ln()))
        .unzip();
    fit_line(&xs, &ys).map(|f| f.slope)
}

/// Least-squares `c2 r^2 + c3 r^3 + c4 r^4` fit; returns `c2`.
fn quadratic_coefficient(radii: &[f64], vals: &[f64]) -> f64 {
    let n = radii.len();
    let cols = if n >= 4 { 3 } else { n.min(2) };
    let a = DMatrix::from_fn(n, cols, |i, j| radii[i].powi(2 + j as i32));
    let b = DVector::from_column_slice(vals);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14).map(|c| c[0]).unwrap_or(f64::NAN)
}

/// Check `g_ab(exp_y x) = delta_ab - R(e_a,x,x,e_b)/3 + O(|x|^3)` and the
/// determinant development along four directions.
pub fn metric_expansion_check(chart: &SurfaceChart, y: [f64; 2], radii: &[f64]) -> Result<MetricExpansion> {
    if radii.len() < 3 || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(SylError::InvalidParameter("need at least three positive radii".into()));
    }
    let curv = curvature_at(chart, y)?;
    let frame = curv.frame;
    let directions: Vec<[f64; 2]> = (0..4)
        .map(|k| {
            let a = PI * k as f64 / 4.0;
            [a.cos(), a.sin()]
        })
        .collect();

    let mut orders = Vec::new();
    let mut det_orders = Vec::new();
    let (mut coeff_err, mut coeff_scale) = (0.0f64, 0.0f64);
    let (mut det_err, mut det_scale) = (0.0f64, 0.0f64);

    for u in &directions {
        let metrics: Vec<[[f64; 2]; 2]> = radii
            .par_iter()
            .map(|r| normal_metric_with_frame(chart, y, &frame, [r * u[0], r * u[1]]))
            .collect::<Result<_>>()?;
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            let delta = if a == b { 1.0 } else { 0.0 };
            let c0 = -curv.riemann(a, *u, b) / 3.0;
            let dev: Vec<f64> = metrics.iter().map(|g| g[a][b] - delta).collect();
            let rem: Vec<f64> = dev.iter().zip(radii).map(|(d, r)| d - c0 * r * r).collect();
            if let Some(o) = remainder_order(radii, &rem) {
                orders.push(o);
            }
            coeff_err = coeff_err.max((quadratic_coefficient(radii, &dev) - c0).abs());
            coeff_scale = coeff_scale.max(c0.abs());
        }
        let c0 = -curv.ricci(*u) / 6.0;
        let dev: Vec<f64> = metrics.iter().map(|g| sqrt_det(g) - 1.0).collect();
        let rem: Vec<f64> = dev.iter().zip(radii).map(|(d, r)| d - c0 * r * r).collect();
        if let Some(o) = remainder_order(radii, &rem) {
            det_orders.push(o);
        }
        det_err = det_err.max((quadratic_coefficient(radii, &dev) - c0).abs());
        det_scale = det_scale.max(c0.abs());
    }
    let min_or_inf = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let rel = |err: f64, scale: f64| if scale > 0.0 { err / scale } else { err };
    Ok(MetricExpansion {
        fitted_order: min_or_inf(&orders),
        coeff_error: rel(coeff_err, coeff_scale),
        det_fitted_order: min_or_inf(&det_orders),
        det_coeff_error: rel(det_err, det_scale),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub eps: f64,
    pub d_eps: f64,
    pub limit: f64,
    pub rel_error: f64,
}

/// `D_eps = int F(|psi(s)|) (1 - sqrt(det g)(exp_y(eps s))) ds / eps^2`
/// against its limit `(1/6) int Ric_y(s,s) F(|psi(s)|) ds`.
pub fn volume_expansion_test(
    chart: &SurfaceChart,
    y: [f64; 2],
    profile: &RadialProfile,
    eps_list: &[f64],
) -> Result<Vec<VolumeRow>> {
    let curv = curvature_at(chart, y)?;
    let frame = curv.frame;
    let params = &profile.params;
    let (nodes, weights) = gauss_legendre_on(48, 0.0, 12.0 / params.lambda);
    let n_ang = 8;
    let angles: Vec<[f64; 2]> = (0..n_ang)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n_ang as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    let dalpha = 2.0 * PI / n_ang as f64;
    let f_vals: Vec<f64> = nodes
        .iter()
        .map(|&s| {
            let (u, v) = profile.eval(s);
            params.primitive(u.hypot(v))
        })
        .collect();

    let mut limit = 0.0;
    for (i, &s) in nodes.iter().enumerate() {
        for u in &angles {
            limit += weights[i] * dalpha * s * f_vals[i] * curv.ricci([s * u[0], s * u[1]]) / 6.0;
        }
    }

    eps_list
        .iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return Err(SylError::InvalidParameter(format!("eps = {eps} must be positive")));
            }
            let pts: Vec<(usize, [f64; 2])> = nodes
                .iter()
                .enumerate()
                .flat_map(|(i, &s)| angles.iter().map(move |u| (i, [s * u[0], s * u[1]])))
                .collect();
            let terms: Vec<f64> = pts
                .par_iter()
                .map(|&(i, sig)| {
                    let g = normal_metric_with_frame(chart, y, &frame, [eps * sig[0], eps * sig[1]])?;
                    Ok(weights[i] * dalpha * nodes[i] * f_vals[i] * (1.0 - sqrt_det(&g)))
                })
                .collect::<Result<_>>()?;
            let d_eps = terms.iter().sum::<f64>() / (eps * eps);
            let rel_error = if limit != 0.0 {
                (d_eps - limit).abs() / limit.abs()
            } else {
                d_eps.abs()
            };
            Ok(VolumeRow {
                eps,
                d_eps,
                limit,
                rel_error,
            })
        })
        .collect()
}
