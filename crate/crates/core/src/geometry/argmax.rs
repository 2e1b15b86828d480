use super::curvature::{curvature_at, sample_grid};
use super::theta::{theta_ansatz, ThetaReport};
use super::SurfaceChart;
use crate::bubble::RadialProfile;
use crate::error::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Downhill simplex minimisation in two variables.
pub fn nelder_mead(
    f: impl Fn([f64; 2]) -> f64,
    x0: [f64; 2],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    let mut simplex = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut vals = simplex.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.map(|i| simplex[i]);
        vals = order.map(|i| vals[i]);
        let size = (0..2)
            .map(|k| (simplex[1][k] - simplex[0][k]).abs().max((simplex[2][k] - simplex[0][k]).abs()))
            .fold(0.0, f64::max);
        if size < tol {
            break;
        }
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(simplex[2], centroid, 2.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = lerp(simplex[2], centroid, 3.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                vals[2] = fe;
            } else {
                simplex[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = reflected;
            vals[2] = fr;
        } else {
            let contracted = lerp(simplex[2], centroid, 0.5);
            let fc = f(contracted);
            if fc < vals[2] {
                simplex[2] = contracted;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = lerp(simplex[0], simplex[k], 0.5);
                    vals[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (simplex[best], vals[best])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxResult {
    pub point: [f64; 2],
    pub report: ThetaReport,
    /// All maximisers found (distinct up to 1e-6 in chart coordinates).
    pub ties: Vec<[f64; 2]>,
    /// Theta is constant over the chart; any point is a maximiser.
    pub degenerate: bool,
}

const SCAN: usize = 48;

/// Maximise `Theta(y) = c K(y)` over the chart for the ansatz profile:
/// coarse scan, Nelder-Mead refinement of every near-best local maximum.
pub fn argmax_theta(chart: &SurfaceChart, profile: &RadialProfile) -> Result<ArgmaxResult> {
    let coeff = theta_ansatz(1.0, profile).theta;
    let domain = *chart.domain();
    let objective = |q: [f64; 2]| -> f64 {
        if !domain.contains(q) {
            return f64::NEG_INFINITY;
        }
        curvature_at(chart, domain.wrap(q)).map_or(f64::NEG_INFINITY, |c| coeff * c.gauss)
    };

    let pts = sample_grid(chart, SCAN, SCAN);
    let vals: Vec<f64> = pts.par_iter().map(|q| objective(*q)).collect();
    let finite = vals.iter().copied().filter(|v| v.is_finite());
    let best = finite.clone().fold(f64::NEG_INFINITY, f64::max);
    let worst = finite.fold(f64::INFINITY, f64::min);
    let spread = best - worst;
    let report_at = |q: [f64; 2]| -> Result<ThetaReport> {
        let mut r = theta_ansatz(curvature_at(chart, q)?.gauss, profile);
        r.point = Some(q);
        Ok(r)
    };

    if !(spread > 1e-9 * best.abs().max(1e-300)) {
        let q = pts[vals.iter().position(|v| v.is_finite()).unwrap_or(0)];
        return Ok(ArgmaxResult {
            point: q,
            report: report_at(q)?,
            ties: vec![q],
            degenerate: true,
        });
    }

    let at = |i: isize, j: isize| -> f64 {
        let wrap = |k: isize, periodic: bool| {
            if periodic {
                Some(k.rem_euclid(SCAN as isize) as usize)
            } else if k < 0 || k >= SCAN as isize {
                None
            } else {
                Some(k as usize)
            }
        };
        match (wrap(i, domain.periodic[0]), wrap(j, domain.periodic[1])) {
            (Some(i), Some(j)) => vals[i * SCAN + j],
            _ => f64::NEG_INFINITY,
        }
    };
    let mut candidates = Vec::new();
    for i in 0..SCAN as isize {
        for j in 0..SCAN as isize {
            let v = at(i, j);
            if v < best - 0.05 * spread {
                continue;
            }
            let is_max = (-1..=1)
                .flat_map(|di| (-1..=1).map(move |dj| (di, dj)))
                .all(|(di, dj)| at(i + di, j + dj) <= v);
            if is_max {
                candidates.push(pts[i as usize * SCAN + j as usize]);
            }
        }
    }

    let step = ((domain.s[1] - domain.s[0]) / SCAN as f64).min((domain.t[1] - domain.t[0]) / SCAN as f64);
    let refined: Vec<([f64; 2], f64)> = candidates
        .par_iter()
        .map(|q| {
            let (x, fx) = nelder_mead(|x| -objective(x), *q, 0.5 * step, 1e-10, 500);
            (domain.wrap(x), -fx)
        })
        .collect();
    let top = refined.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let mut ties: Vec<[f64; 2]> = Vec::new();
    for (q, v) in &refined {
        if *v >= top - 1e-9 * top.abs() {
            let distinct = ties.iter().all(|t| {
                (0..2).any(|k| {
                    let period = if k == 0 { domain.s[1] - domain.s[0] } else { domain.t[1] - domain.t[0] };
                    let mut d = (t[k] - q[k]).abs();
                    if domain.periodic[k] {
                        d = d.min(period - d);
                    }
                    d > 1e-6
                })
            });
            if distinct {
                ties.push(*q);
            }
        }
    }
    let point = ties[0];
    Ok(ArgmaxResult {
        point,
        report: report_at(point)?,
        ties,
        degenerate: false,
    })
}
