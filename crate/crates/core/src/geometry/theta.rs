use super::curvature::CurvatureData;
use crate::bubble::{decay_fit, moment_integrals, RadialProfile};
use crate::clifford::{clifford_mul, spinor_dot, spinor_norm_sqr, Spinor, C64};
use crate::error::{Result, SylError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ThetaMethod {
    FullGrid,
    AnsatzClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub point: Option<[f64; 2]>,
    #[serde(rename = "K")]
    pub k: f64,
    pub theta: f64,
    pub term_ricci: f64,
    pub term_riemann: f64,
    pub method: ThetaMethod,
}

/// Closed form for ansatz spinors on a surface:
/// `Theta = (pi K / 3)(1/2 - 1/p) int rho^p r^3 dr`, i.e. `pi K / 18 int rho^3 r^3 dr` at `p = 3`.
pub fn theta_ansatz(k: f64, profile: &RadialProfile) -> ThetaReport {
    let p = profile.params.p;
    let theta = PI * k / 3.0 * (0.5 - 1.0 / p) * moment_integrals(profile).i_p2;
    ThetaReport {
        point: None,
        k,
        theta,
        term_ricci: theta,
        term_riemann: 0.0,
        method: ThetaMethod::AnsatzClosedForm,
    }
}

/// Spinor samples on the square `[-L, L]^2` of tangent-plane coordinates
/// (orthonormal frame components), row-major with `x` varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorGrid2D {
    pub n: usize,
    pub half_width: f64,
    pub values: Vec<Spinor>,
}

impl SpinorGrid2D {
    pub fn from_fn(n: usize, half_width: f64, f: impl Fn([f64; 2]) -> Spinor + Sync) -> Self {
        let h = 2.0 * half_width / (n - 1) as f64;
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (j, i) = (idx / n, idx % n);
                f([-half_width + i as f64 * h, -half_width + j as f64 * h])
            })
            .collect();
        SpinorGrid2D { n, half_width, values }
    }

    pub fn from_profile(profile: &RadialProfile, n: usize, half_width: f64) -> Self {
        Self::from_fn(n, half_width, |x| profile.spinor_at(x))
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    fn at(&self, i: isize, j: isize) -> Spinor {
        let n = self.n as isize;
        if i < 0 || j < 0 || i >= n || j >= n {
            [C64::new(0.0, 0.0); 2]
        } else {
            self.values[(j * n + i) as usize]
        }
    }

    /// Largest `|psi|` on the boundary of the square.
    pub fn boundary_max(&self) -> f64 {
        let n = self.n;
        let mut m = 0.0f64;
        for k in 0..n {
            for (i, j) in [(k, 0), (k, n - 1), (0, k), (n - 1, k)] {
                m = m.max(spinor_norm_sqr(&self.values[j * n + i]).sqrt());
            }
        }
        m
    }

    /// Sixth-order central difference along `axis` (0 = x, 1 = y) at `(i, j)`;
    /// values beyond the square are taken as zero.
    fn derivative(&self, axis: usize, i: usize, j: usize) -> Spinor {
        const C: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        let h = self.spacing();
        let mut out = [C64::new(0.0, 0.0); 2];
        for (k, c) in C.iter().enumerate() {
            let d = k as isize + 1;
            let (fwd, bwd) = if axis == 0 {
                (self.at(i as isize + d, j as isize), self.at(i as isize - d, j as isize))
            } else {
                (self.at(i as isize, j as isize + d), self.at(i as isize, j as isize - d))
            };
            for s in 0..2 {
                out[s] += (fwd[s] - bwd[s]) * (*c / h);
            }
        }
        out
    }
}

/// Half-width of the Theta quadrature square: at least `12 / decay_rate`,
/// enlarged until the profile is below `1e-11` at the edge.
pub fn theta_grid_half_width(profile: &RadialProfile) -> f64 {
    let rate = decay_fit(profile).map(|f| f.rate).unwrap_or(profile.params.lambda).max(1e-3);
    let mut half = 12.0 / rate;
    for _ in 0..200 {
        let (u, v) = profile.eval(half);
        if u.hypot(v) < 1e-11 {
            break;
        }
        half += 1.0 / rate;
    }
    half
}

/// Theta from its definition on a spinor grid:
/// `(1/6) int Ric(x,x) (f|psi|^2/2 - F) + (1/12) sum_ij Re int R(e_i,x,x,e_j) (d_j psi, e_i . psi)`.
pub fn theta_full(curv: &CurvatureData, psi: &SpinorGrid2D, p: f64) -> Result<ThetaReport> {
    if psi.n < 7 {
        return Err(SylError::InvalidParameter("spinor grid needs at least 7 points per side".into()));
    }
    let boundary = psi.boundary_max();
    if boundary > 1e-10 {
        return Err(SylError::InsufficientDecay { boundary });
    }
    let n = psi.n;
    let h2 = psi.spacing().powi(2);
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let (mut ricci, mut riemann) = (0.0, 0.0);
            let y = psi.coord(j);
            for i in 0..n {
                let x = [psi.coord(i), y];
                let v = psi.values[j * n + i];
                let rho = spinor_norm_sqr(&v).sqrt();
                if rho == 0.0 {
                    continue;
                }
                let rp = rho.powf(p);
                ricci += curv.ricci(x) * (0.5 * rp - rp / p);
                let d = [psi.derivative(0, i, j), psi.derivative(1, i, j)];
                for a in 0..2 {
                    let mut e = [0.0; 2];
                    e[a] = 1.0;
                    let cl = clifford_mul(e, &v);
                    for b in 0..2 {
                        riemann += curv.riemann(a, x, b) * spinor_dot(&d[b], &cl).re;
                    }
                }
            }
            (ricci, riemann)
        })
        .collect();
    let (ricci, riemann) = rows.iter().fold((0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
    let term_ricci = ricci * h2 / 6.0;
    let term_riemann = riemann * h2 / 12.0;
    Ok(ThetaReport {
        point: Some(curv.point),
        k: curv.gauss,
        theta: term_ricci + term_riemann,
        term_ricci,
        term_riemann,
        method: ThetaMethod::FullGrid,
    })
}
