use super::operator::TorusProblem;
use super::solver::{minimize_nehari_from, solve, SolveResult, SolverConfig};
use super::{FourierSpinor, Representation};
use crate::clifford::C64;
use crate::error::{Result, SylError};
use crate::quad::fit_line;
use serde::{Deserialize, Serialize};

/// Concentration diagnostics of a field on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub peak: [f64; 2],
    pub peak_index: [usize; 2],
    pub peak_tie: bool,
    pub max_abs: f64,
    /// Half-maximum radius, averaged over the four axis rays from the peak.
    pub width: f64,
    /// `c` in `|psi| ~ C exp(-c dist / eps)`.
    pub decay_c: f64,
    pub decay_amplitude: f64,
    pub r_squared: f64,
}

fn half_max_radius(coeffs: &FourierSpinor, peak: [f64; 2], max: f64, axis: usize, sign: f64) -> f64 {
    let g = coeffs.grid;
    let (len, h) = if axis == 0 { (g.l1, g.spacing()[0]) } else { (g.l2, g.spacing()[1]) };
    let ds = h / 32.0;
    let n = (0.5 * len / ds) as usize;
    let offsets: Vec<f64> = (0..=n).map(|i| sign * i as f64 * ds).collect();
    let line: Vec<f64> = offsets.iter().map(|o| peak[axis] + o).collect();
    let fixed = [peak[1 - axis]];
    let vals = if axis == 0 {
        coeffs.eval_tensor(&line, &fixed)
    } else {
        coeffs.eval_tensor(&fixed, &line)
    };
    let abs: Vec<f64> = vals[0].iter().zip(&vals[1]).map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt()).collect();
    let half = 0.5 * max;
    for i in 1..abs.len() {
        if abs[i] <= half {
            let frac = (abs[i - 1] - half) / (abs[i - 1] - abs[i]);
            return (i as f64 - 1.0 + frac) * ds;
        }
    }
    0.5 * len
}

/// Peak (first grid maximum in index order), half-maximum width and the
/// log-linear fit of `|psi|` against `dist / eps` over the mid-range: from
/// `3 width / eps` to `0.45 min(L) / eps` or the `1e-7` relative noise floor.
pub fn localization_report(problem: &TorusProblem, psi: &FourierSpinor) -> Localization {
    let fft = problem.table.fft();
    let grid = psi.grid;
    let eps = problem.eps();
    let phys = psi.to_physical(fft);
    let coeffs = psi.to_fourier(fft);
    let abs = phys.abs();
    let (mut best, mut max) = (0, f64::NEG_INFINITY);
    for (m, &v) in abs.iter().enumerate() {
        if v > max {
            best = m;
            max = v;
        }
    }
    let peak_tie = abs
        .iter()
        .enumerate()
        .any(|(m, &v)| m != best && (max - v).abs() <= 1e-12 * max);
    let peak_index = [best / grid.n2, best % grid.n2];
    let peak = grid.point(peak_index[0], peak_index[1]);
    let width = [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)]
        .iter()
        .map(|&(axis, sign)| half_max_radius(&coeffs, peak, max, axis, sign))
        .sum::<f64>()
        / 4.0;
    let r_lo = 3.0 * width / eps;
    let r_hi = 0.45 * grid.l1.min(grid.l2) / eps;
    // median of log|psi| in radial bins of width 1/2: the truncated symbol leaves
    // a slowly decaying trace along the grid lines through the peak, and the
    // median over each annulus is insensitive to it
    let bin_width = 0.5;
    let nbins = ((r_hi - r_lo) / bin_width).floor().max(0.0) as usize;
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); nbins];
    for (m, &v) in abs.iter().enumerate() {
        let d = grid.displacement(grid.point(m / grid.n2, m % grid.n2), peak);
        let r = d[0].hypot(d[1]) / eps;
        if r >= r_lo && v > 0.0 {
            let b = ((r - r_lo) / bin_width) as usize;
            if b < nbins {
                bins[b].push(v.ln());
            }
        }
    }
    let floor = (1e-7 * max).ln();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (b, vals) in bins.iter_mut().enumerate() {
        if vals.len() < 4 {
            continue;
        }
        vals.sort_by(f64::total_cmp);
        let med = vals[vals.len() / 2];
        if med < floor {
            break;
        }
        xs.push(r_lo + (b as f64 + 0.5) * bin_width);
        ys.push(med);
    }
    let (decay_c, decay_amplitude, r_squared) = match fit_line(&xs, &ys) {
        Some(fit) => (-fit.slope, fit.intercept.exp(), fit.r_squared),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    Localization {
        peak,
        peak_index,
        peak_tie,
        max_abs: max,
        width,
        decay_c,
        decay_amplitude,
        r_squared,
    }
}

/// One row of an eps sweep; failed rows carry NaN values and the error text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub mu_eps: f64,
    pub width: f64,
    pub decay_c: f64,
    pub decay_r_squared: f64,
    pub grad_norm: f64,
    pub tau0: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    fn from_result(r: &SolveResult) -> Self {
        SweepRow {
            eps: r.eps,
            mu_eps: r.mu_eps,
            width: r.width,
            decay_c: r.decay_c,
            decay_r_squared: r.decay_r_squared,
            grad_norm: r.grad_norm,
            tau0: r.tau0,
            converged: r.converged,
            error: (!r.converged).then(|| "gradient tolerance not reached".to_string()),
        }
    }

    fn failed(eps: f64, e: &SylError) -> Self {
        SweepRow {
            eps,
            mu_eps: f64::NAN,
            width: f64::NAN,
            decay_c: f64::NAN,
            decay_r_squared: f64::NAN,
            grad_norm: f64::NAN,
            tau0: f64::NAN,
            converged: false,
            error: Some(e.to_string()),
        }
    }
}

/// `psi_prev(c + (x - c) eps_prev / eps)`, cut off outside `|x - c| <= L/4`
/// and projected to `E+`: the previous solution rescaled to the new eps.
fn rescaled_seed(problem: &TorusProblem, prev: &FourierSpinor, eps_prev: f64, center: [f64; 2]) -> FourierSpinor {
    let grid = problem.grid();
    let ratio = eps_prev / problem.eps();
    let h = grid.spacing();
    let disp = |i: usize, hh: f64, c: f64, l: f64| {
        let d = i as f64 * hh - c;
        d - l * (d / l).round()
    };
    let d1: Vec<f64> = (0..grid.n1).map(|i| disp(i, h[0], center[0], grid.l1)).collect();
    let d2: Vec<f64> = (0..grid.n2).map(|i| disp(i, h[1], center[1], grid.l2)).collect();
    let xs: Vec<f64> = d1.iter().map(|d| center[0] + d * ratio).collect();
    let ys: Vec<f64> = d2.iter().map(|d| center[1] + d * ratio).collect();
    let vals = prev.eval_tensor(&xs, &ys);
    let ell = grid.l1.min(grid.l2);
    let mut field = FourierSpinor::zeros(grid, Representation::Physical);
    for i1 in 0..grid.n1 {
        for i2 in 0..grid.n2 {
            let m = i1 * grid.n2 + i2;
            let r = d1[i1].hypot(d2[i2]);
            let s = (r - ell / 8.0) / (ell / 8.0);
            let eta = if s <= 0.0 {
                1.0
            } else if s >= 1.0 {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * s).cos())
            };
            for c in 0..2 {
                field.data[c][m] = if eta == 0.0 { C64::new(0.0, 0.0) } else { vals[c][m] * eta };
            }
        }
    }
    problem.table.proj_plus(&field.to_fourier(problem.table.fft()))
}

/// Solves along a decreasing eps list, warm-starting each run from the
/// previous solution rescaled about its peak. Failures are recorded per row.
pub fn sweep_eps(eps_list: &[f64], config: &SolverConfig) -> Result<Vec<SweepRow>> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SylError::InvalidParameter("eps list must be non-empty and strictly decreasing".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut prev: Option<SolveResult> = None;
    for &eps in eps_list {
        let cfg = SolverConfig { eps, ..config.clone() };
        let outcome = match &prev {
            Some(p) => cfg.problem().and_then(|problem| {
                let seed = rescaled_seed(&problem, &p.psi, p.eps, p.peak);
                minimize_nehari_from(&problem, &seed, &cfg.tolerances)
            }),
            None => solve(&cfg),
        };
        match outcome {
            Ok(r) => {
                rows.push(SweepRow::from_result(&r));
                prev = Some(r);
            }
            Err(e) => {
                rows.push(SweepRow::failed(eps, &e));
                prev = None;
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{assemble, TorusGrid};
    use std::f64::consts::PI;

    #[test]
    fn planted_exponential() {
        let eps = 0.2;
        let p = TorusProblem::new(assemble(TorusGrid::square(128, 2.0 * PI), eps, 1.0).unwrap(), 3.0).unwrap();
        let grid = p.grid();
        let c = [PI, PI];
        let psi = FourierSpinor::from_fn(grid, |x| {
            let d = grid.displacement(x, c);
            [C64::new((-d[0].hypot(d[1]) / eps).exp(), 0.0), C64::new(0.0, 0.0)]
        });
        let loc = localization_report(&p, &psi.to_fourier(p.table.fft()));
        assert_eq!(loc.peak, c);
        assert!(!loc.peak_tie);
        assert!((loc.decay_c - 1.0).abs() < 0.05, "{loc:?}");
        assert!(loc.r_squared > 0.98);
    }

    #[test]
    fn sweep_rejects_increasing_list() {
        let cfg = SolverConfig::new(TorusGrid::square(16, 2.0 * PI), 0.4, 1.0, 3.0);
        assert!(sweep_eps(&[0.1, 0.2], &cfg).is_err());
        assert!(sweep_eps(&[], &cfg).is_err());
    }
}
