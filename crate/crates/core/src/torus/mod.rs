//! The reduced equation `eps D psi + a gamma3 psi = |psi|^{p-2} psi` on a flat
//! 2-torus, solved by the strongly indefinite reduction: spectral split
//! `E+ (+) E-` of `A = eps D + a gamma3`, inner maximization over `E-`, and
//! minimization of the reduced functional over its Nehari set.
//!
//! Fields are expanded as `psi(x) = sum_k c_k exp(i k.x)` with
//! `k = 2 pi (j + delta) / L`; coefficients are indexed `i1 * N2 + i2` in FFT order.

mod diagnostics;
mod io;
mod operator;
mod reduction;
mod solver;

pub use diagnostics::{localization_report, sweep_eps, Localization, SweepRow};
pub use io::{read_solver_config, write_abs_psi_csv, write_result_json, write_sweep_csv};
pub use operator::{assemble, assemble_with, Linearization, ModeTable, TorusProblem};
pub use reduction::{inner_maximize, line_derivative_scan, line_max_t, reduced_i, InnerSolution, LineMax};
pub use solver::{
    corollary_probe, minimize_nehari, minimize_nehari_from, solve, tau0, transplant_bubble, CorollaryProbe,
    SeedMode, SolveResult, SolverConfig, Tolerances,
};

use crate::clifford::C64;
use crate::error::{Result, SylError};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Uniform periodic grid on `[0, L1) x [0, L2)` with spin-structure offsets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(default)]
    pub delta: [f64; 2],
}

impl TorusGrid {
    pub fn square(n: usize, l: f64) -> Self {
        TorusGrid {
            n1: n,
            n2: n,
            l1: l,
            l2: l,
            delta: [0.0; 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SylError::InvalidParameter(m));
        for n in [self.n1, self.n2] {
            if n < 16 || n % 2 != 0 {
                return bad(format!("grid size {n} must be even and at least 16"));
            }
        }
        if !(self.l1 > 0.0 && self.l2 > 0.0 && self.l1.is_finite() && self.l2.is_finite()) {
            return bad("periods must be positive".into());
        }
        if self.delta.iter().any(|&d| d != 0.0 && d != 0.5) {
            return bad(format!("spin offsets {:?} must be 0 or 1/2", self.delta));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn area(&self) -> f64 {
        self.l1 * self.l2
    }

    pub fn spacing(&self) -> [f64; 2] {
        [self.l1 / self.n1 as f64, self.l2 / self.n2 as f64]
    }

    /// Area weight of one grid point.
    pub fn cell(&self) -> f64 {
        self.area() / self.len() as f64
    }

    pub fn point(&self, i1: usize, i2: usize) -> [f64; 2] {
        let h = self.spacing();
        [i1 as f64 * h[0], i2 as f64 * h[1]]
    }

    /// Signed mode number of FFT slot `i` out of `n`.
    pub fn mode_number(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn wavevector(&self, i1: usize, i2: usize) -> [f64; 2] {
        [
            2.0 * PI * (Self::mode_number(i1, self.n1) as f64 + self.delta[0]) / self.l1,
            2.0 * PI * (Self::mode_number(i2, self.n2) as f64 + self.delta[1]) / self.l2,
        ]
    }

    /// Minimal-image displacement `x - c` on the torus.
    pub fn displacement(&self, x: [f64; 2], c: [f64; 2]) -> [f64; 2] {
        let wrap = |d: f64, l: f64| d - l * (d / l).round();
        [wrap(x[0] - c[0], self.l1), wrap(x[1] - c[1], self.l2)]
    }

    pub fn transform(&self) -> GridFft {
        GridFft::new(self)
    }
}

/// Cached FFT plans plus the spin-structure twist of a grid.
#[derive(Clone)]
pub struct GridFft {
    n1: usize,
    n2: usize,
    fwd: [Arc<dyn Fft<f64>>; 2],
    inv: [Arc<dyn Fft<f64>>; 2],
    /// `exp(2 pi i (delta1 i1 / N1 + delta2 i2 / N2))`, absent for `delta = 0`.
    twist: Option<Vec<C64>>,
}

impl std::fmt::Debug for GridFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GridFft({}x{})", self.n1, self.n2)
    }
}

impl GridFft {
    fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let twist = (grid.delta != [0.0; 2]).then(|| {
            let mut t = Vec::with_capacity(grid.len());
            for i1 in 0..grid.n1 {
                for i2 in 0..grid.n2 {
                    let ph = 2.0
                        * PI
                        * (grid.delta[0] * i1 as f64 / grid.n1 as f64 + grid.delta[1] * i2 as f64 / grid.n2 as f64);
                    t.push(C64::from_polar(1.0, ph));
                }
            }
            t
        });
        GridFft {
            n1: grid.n1,
            n2: grid.n2,
            fwd: [planner.plan_fft_forward(grid.n1), planner.plan_fft_forward(grid.n2)],
            inv: [planner.plan_fft_inverse(grid.n1), planner.plan_fft_inverse(grid.n2)],
            twist,
        }
    }

    fn pass(&self, data: &mut [C64], plans: &[Arc<dyn Fft<f64>>; 2]) {
        let (n1, n2) = (self.n1, self.n2);
        data.par_chunks_mut(n2).for_each(|row| plans[1].process(row));
        let mut cols = vec![C64::new(0.0, 0.0); n1 * n2];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                cols[i2 * n1 + i1] = data[i1 * n2 + i2];
            }
        }
        cols.par_chunks_mut(n1).for_each(|col| plans[0].process(col));
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                data[i1 * n2 + i2] = cols[i2 * n1 + i1];
            }
        }
    }

    /// Coefficients to point values.
    pub fn synthesize(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut data = coeffs.to_vec();
        self.pass(&mut data, &self.inv);
        if let Some(t) = &self.twist {
            data.iter_mut().zip(t).for_each(|(d, t)| *d *= t);
        }
        data
    }

    /// Point values to coefficients.
    pub fn analyze(&self, values: &[C64]) -> Vec<C64> {
        let mut data = values.to_vec();
        if let Some(t) = &self.twist {
            data.iter_mut().zip(t).for_each(|(d, t)| *d *= t.conj());
        }
        self.pass(&mut data, &self.fwd);
        let scale = 1.0 / (self.n1 * self.n2) as f64;
        data.iter_mut().for_each(|d| *d *= scale);
        data
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Representation {
    Physical,
    Fourier,
}

/// A C^2-valued field on the torus, stored as point values or coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpinor {
    pub grid: TorusGrid,
    pub repr: Representation,
    pub data: [Vec<C64>; 2],
}

impl FourierSpinor {
    pub fn zeros(grid: TorusGrid, repr: Representation) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.len()];
        FourierSpinor {
            grid,
            repr,
            data: [z.clone(), z],
        }
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2]) -> [C64; 2] + Sync) -> Self {
        let vals: Vec<[C64; 2]> = (0..grid.len())
            .into_par_iter()
            .map(|m| f(grid.point(m / grid.n2, m % grid.n2)))
            .collect();
        FourierSpinor {
            grid,
            repr: Representation::Physical,
            data: [vals.iter().map(|v| v[0]).collect(), vals.iter().map(|v| v[1]).collect()],
        }
    }

    pub fn to_physical(&self, fft: &GridFft) -> FourierSpinor {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Fourier => FourierSpinor {
                grid: self.grid,
                repr: Representation::Physical,
                data: [fft.synthesize(&self.data[0]), fft.synthesize(&self.data[1])],
            },
        }
    }

    pub fn to_fourier(&self, fft: &GridFft) -> FourierSpinor {
        match self.repr {
            Representation::Fourier => self.clone(),
            Representation::Physical => FourierSpinor {
                grid: self.grid,
                repr: Representation::Fourier,
                data: [fft.analyze(&self.data[0]), fft.analyze(&self.data[1])],
            },
        }
    }

    /// `int |psi|^2` by Parseval (Fourier) or the grid rule (physical).
    pub fn l2_sqr(&self) -> f64 {
        let s: f64 = self.data.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum();
        match self.repr {
            Representation::Fourier => s * self.grid.area(),
            Representation::Physical => s * self.grid.cell(),
        }
    }

    /// Pointwise `|psi|` (physical representation required).
    pub fn abs(&self) -> Vec<f64> {
        debug_assert_eq!(self.repr, Representation::Physical);
        self.data[0]
            .iter()
            .zip(&self.data[1])
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .collect()
    }

    pub fn scaled(&self, s: f64) -> FourierSpinor {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|c| c.iter_mut().for_each(|z| *z *= s));
        out
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &FourierSpinor) {
        debug_assert_eq!(self.repr, x.repr);
        for (c, xc) in self.data.iter_mut().zip(&x.data) {
            c.iter_mut().zip(xc).for_each(|(z, w)| *z += w * alpha);
        }
    }

    pub fn add(&self, x: &FourierSpinor) -> FourierSpinor {
        let mut out = self.clone();
        out.axpy(1.0, x);
        out
    }

    pub fn sub(&self, x: &FourierSpinor) -> FourierSpinor {
        let mut out = self.clone();
        out.axpy(-1.0, x);
        out
    }

    /// Multiplies every value by `exp(i theta)`.
    pub fn rotate_phase(&self, theta: f64) -> FourierSpinor {
        let ph = C64::from_polar(1.0, theta);
        let mut out = self.clone();
        out.data.iter_mut().for_each(|c| c.iter_mut().for_each(|z| *z *= ph));
        out
    }

    /// `x -> psi(x - shift)`, exact on the represented modes.
    pub fn translated(&self, shift: [f64; 2]) -> FourierSpinor {
        debug_assert_eq!(self.repr, Representation::Fourier);
        let g = self.grid;
        let mut out = self.clone();
        for i1 in 0..g.n1 {
            for i2 in 0..g.n2 {
                let k = g.wavevector(i1, i2);
                let ph = C64::from_polar(1.0, -(k[0] * shift[0] + k[1] * shift[1]));
                let m = i1 * g.n2 + i2;
                out.data[0][m] *= ph;
                out.data[1][m] *= ph;
            }
        }
        out
    }

    /// Values at the tensor product of arbitrary coordinates `xs x ys`, by
    /// direct evaluation of the Fourier series (row-major in `xs`).
    pub fn eval_tensor(&self, xs: &[f64], ys: &[f64]) -> [Vec<C64>; 2] {
        debug_assert_eq!(self.repr, Representation::Fourier);
        let g = self.grid;
        let k1: Vec<f64> = (0..g.n1).map(|i| g.wavevector(i, 0)[0]).collect();
        let k2: Vec<f64> = (0..g.n2).map(|i| g.wavevector(0, i)[1]).collect();
        let e2: Vec<Vec<C64>> = ys
            .iter()
            .map(|&y| k2.iter().map(|&k| C64::from_polar(1.0, k * y)).collect())
            .collect();
        let e1: Vec<Vec<C64>> = xs
            .iter()
            .map(|&x| k1.iter().map(|&k| C64::from_polar(1.0, k * x)).collect())
            .collect();
        let mut out = [Vec::new(), Vec::new()];
        for (c, coeffs) in self.data.iter().enumerate() {
            // contract the second index first: tmp[i1][b] = sum_i2 c[i1][i2] e2[b][i2]
            let tmp: Vec<Vec<C64>> = (0..g.n1)
                .into_par_iter()
                .map(|i1| {
                    let row = &coeffs[i1 * g.n2..(i1 + 1) * g.n2];
                    e2.iter()
                        .map(|e| row.iter().zip(e).map(|(a, b)| a * b).sum())
                        .collect()
                })
                .collect();
            out[c] = e1
                .par_iter()
                .flat_map_iter(|e| {
                    let tmp = &tmp;
                    (0..ys.len()).map(move |b| (0..g.n1).map(|i1| tmp[i1][b] * e[i1]).sum::<C64>())
                })
                .collect();
        }
        out
    }
}
