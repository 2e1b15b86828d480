//! Ground states of the planar limit equation `D psi + lambda gamma3 psi = |psi|^{p-2} psi`
//! inside the symmetric ansatz
//!
//! ```text
//! psi(r, theta) = ( v(r) e^{i S theta},  i u(r) e^{i (S+1) theta} )
//! ```
//!
//! which reduces the PDE to the radial system
//! `u' = -(S+1) u / r - (f(rho) - lambda) v`, `v' = S v / r + (f(rho) + lambda) u`
//! with `rho = sqrt(u^2 + v^2)` and `f(s) = s^{p-2}`.

mod collocation;
mod io;
mod shooting;

pub use collocation::{collocation_ground_state, CollocationConfig, CollocationSolution};
pub use io::{read_profile_csv, write_profile_csv, write_report_json};
pub use shooting::{find_ground_state, radial_rhs, shoot, GroundState, Shot, ShotClass, Trajectory};

use crate::clifford::{spinor_norm_sqr, CliffordRep2, Spinor, C64};
use crate::error::{Result, SylError};
use crate::quad::{fit_line, simpson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Parameters of the radial ground-state computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub lambda: f64,
    pub p: f64,
    #[serde(rename = "S")]
    pub s: i32,
    /// Largest radius the shooting integration may reach.
    pub r_max: f64,
    /// Relative bracket width at which bisection stops.
    pub tol_shoot: f64,
    /// Absolute and relative tolerance of the adaptive integrator.
    pub tol_ode: f64,
    pub max_bisect: usize,
    /// Spacing of the output radial grid.
    pub grid_step: f64,
}

impl BubbleParams {
    pub fn new(lambda: f64, p: f64) -> Self {
        BubbleParams {
            lambda,
            p,
            s: 0,
            r_max: 40.0 / lambda,
            tol_shoot: 4.0 * f64::EPSILON,
            tol_ode: 1e-11,
            max_bisect: 200,
            grid_step: 0.005 / lambda,
        }
    }

    pub fn with_winding(mut self, s: i32) -> Self {
        self.s = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SylError::InvalidParameter(m));
        if !(self.p > 2.0 && self.p < 4.0) {
            return bad(format!("exponent p = {} must lie in (2, 4)", self.p));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda = {} must be positive", self.lambda));
        }
        if !(self.r_max > 0.0) || !(self.grid_step > 0.0) || self.grid_step >= self.r_max {
            return bad("need 0 < grid_step < r_max".into());
        }
        if !(self.tol_shoot > 0.0) || !(self.tol_ode > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_bisect == 0 {
            return bad("max_bisect must be positive".into());
        }
        Ok(())
    }

    /// `lambda^{1/(p-2)}`, the amplitude of the constant solution `(0, v)`.
    pub fn amplitude_scale(&self) -> f64 {
        self.lambda.powf(1.0 / (self.p - 2.0))
    }

    #[inline]
    pub fn nonlinearity(&self, rho: f64) -> f64 {
        rho.powf(self.p - 2.0)
    }

    /// `F(s) = s^p / p`, the primitive of `f(s) s`.
    #[inline]
    pub fn primitive(&self, rho: f64) -> f64 {
        rho.powf(self.p) / self.p
    }
}

/// Exponential tail `rho(r) ~ amplitude * exp(-rate * r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    pub r_squared: f64,
}

/// Radial bubble data on a uniform grid starting at `r = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub params: BubbleParams,
    #[serde(skip)]
    tail: OnceLock<f64>,
}

// the cached tail rate is derived data and takes no part in equality
impl PartialEq for RadialProfile {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.u == other.u && self.v == other.v && self.params == other.params
    }
}

/// Named moment integrals `int rho^p r dr` and `int rho^p r^3 dr`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    #[serde(rename = "I_p0")]
    pub i_p0: f64,
    #[serde(rename = "I_p2")]
    pub i_p2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleReport {
    pub v0_star: f64,
    pub mu0: f64,
    pub decay_rate: f64,
    pub residual_2d: f64,
    pub moments: Moments,
    pub params: BubbleParams,
    pub bisect_iterations: usize,
    /// Radius up to which the integrated profile is trusted.
    pub r_trusted: f64,
}

/// Relative L2 residual of the reconstructed planar spinor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub relative: f64,
    /// Set when the profile is identically zero and the ratio is 0/0.
    pub degenerate: bool,
}

impl RadialProfile {
    pub fn new(r: Vec<f64>, u: Vec<f64>, v: Vec<f64>, params: BubbleParams) -> Result<Self> {
        if r.len() != u.len() || r.len() != v.len() {
            return Err(SylError::InvalidParameter("profile arrays differ in length".into()));
        }
        if r.len() < 8 {
            return Err(SylError::InvalidParameter("profile needs at least 8 radii".into()));
        }
        if r[0] != 0.0 {
            return Err(SylError::InvalidParameter("profile grid must start at r = 0".into()));
        }
        let dr = r[1] - r[0];
        for w in r.windows(2) {
            let step = w[1] - w[0];
            if step <= 0.0 {
                return Err(SylError::InvalidParameter("radii must be strictly increasing".into()));
            }
            if (step - dr).abs() > 1e-9 * dr.max(1.0) {
                return Err(SylError::InvalidParameter("radial grid must be uniform".into()));
            }
        }
        Ok(RadialProfile {
            r,
            u,
            v,
            params,
            tail: OnceLock::new(),
        })
    }

    /// Synthetic profile from closed-form components (used in tests and oracles).
    pub fn from_fn(
        params: BubbleParams,
        r_end: f64,
        n: usize,
        f: impl Fn(f64) -> (f64, f64),
    ) -> Result<Self> {
        let dr = r_end / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * dr).collect();
        let (u, v): (Vec<f64>, Vec<f64>) = r.iter().map(|&x| f(x)).unzip();
        RadialProfile::new(r, u, v, params)
    }

    pub fn dr(&self) -> f64 {
        self.r[1] - self.r[0]
    }

    pub fn r_end(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn rho(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(u, v)| u.hypot(*v)).collect()
    }

    /// `(u, v)` at any radius: 6-point Lagrange interpolation inside the grid,
    /// the fitted exponential tail beyond it.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let n = self.r.len();
        let r = r.abs();
        if r <= self.r_end() {
            let dr = self.dr();
            let x = r / dr;
            let i = (x.floor() as isize).clamp(0, n as isize - 2);
            let start = (i - 2).clamp(0, n as isize - 6) as usize;
            let (mut u, mut v) = (0.0, 0.0);
            for j in start..start + 6 {
                let mut w = 1.0;
                for m in start..start + 6 {
                    if m != j {
                        w *= (x - m as f64) / (j as f64 - m as f64);
                    }
                }
                u += w * self.u[j];
                v += w * self.v[j];
            }
            return (u, v);
        }
        let (ue, ve) = (self.u[n - 1], self.v[n - 1]);
        let rate = self.tail_rate();
        let damp = (-rate * (r - self.r_end())).exp();
        (ue * damp, ve * damp)
    }

    fn tail_rate(&self) -> f64 {
        *self.tail.get_or_init(|| match decay_fit(self) {
            Ok(fit) if fit.rate > 0.0 => fit.rate,
            _ => self.params.lambda,
        })
    }

    /// The planar spinor value of the ansatz at Cartesian point `x`.
    pub fn spinor_at(&self, x: [f64; 2]) -> Spinor {
        let r = x[0].hypot(x[1]);
        let th = x[1].atan2(x[0]);
        let (u, v) = self.eval(r);
        let s = self.params.s as f64;
        [
            C64::from_polar(v, s * th),
            C64::new(0.0, u) * C64::from_polar(1.0, (s + 1.0) * th),
        ]
    }

    /// The profile of the same family at mass `lambda_new`:
    /// `(u, v)(r) -> k^{1/(p-2)} (u, v)(k r)` with `k = lambda_new / lambda`.
    pub fn rescale(&self, lambda_new: f64) -> RadialProfile {
        let k = lambda_new / self.params.lambda;
        let amp = k.powf(1.0 / (self.params.p - 2.0));
        let mut params = self.params.clone();
        params.lambda = lambda_new;
        params.r_max /= k;
        params.grid_step /= k;
        RadialProfile {
            r: self.r.iter().map(|r| r / k).collect(),
            u: self.u.iter().map(|u| u * amp).collect(),
            v: self.v.iter().map(|v| v * amp).collect(),
            params,
            tail: OnceLock::new(),
        }
    }

    /// `du/dr, dv/dr` by 6th-order central differences, with ghost points
    /// at the origin taken from the parity of the ansatz.
    pub fn radial_derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.r.len();
        let dr = self.dr();
        let s = self.params.s;
        // v ~ r^S and u ~ r^{S+1} near 0 for S >= 0; swapped roles for S < 0
        let v_par = if s.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let u_par = -v_par;
        let get = |arr: &[f64], par: f64, i: isize| -> f64 {
            if i < 0 {
                par * arr[(-i) as usize]
            } else {
                arr[i as usize]
            }
        };
        let c = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        let mut du = vec![0.0; n];
        let mut dv = vec![0.0; n];
        for i in 0..n {
            let ii = i as isize;
            if i + 3 < n {
                let (mut a, mut b) = (0.0, 0.0);
                for (k, ck) in c.iter().enumerate() {
                    let j = ii + k as isize - 3;
                    a += ck * get(&self.u, u_par, j);
                    b += ck * get(&self.v, v_par, j);
                }
                du[i] = a / dr;
                dv[i] = b / dr;
            } else {
                // one-sided 4th order on the far tail
                let one_sided = |arr: &[f64]| {
                    (25.0 * arr[i] - 48.0 * arr[i - 1] + 36.0 * arr[i - 2] - 16.0 * arr[i - 3]
                        + 3.0 * arr[i - 4])
                        / (12.0 * dr)
                };
                du[i] = one_sided(&self.u);
                dv[i] = one_sided(&self.v);
            }
        }
        (du, dv)
    }
}

/// Radial integral `int_0^inf g(r) dr` of grid samples with an analytic
/// exponential tail `g ~ C r^k exp(-q r)` beyond the grid.
fn radial_integral_with_tail(profile: &RadialProfile, power: f64, r_power: i32) -> f64 {
    let rho = profile.rho();
    let vals: Vec<f64> = rho
        .iter()
        .zip(&profile.r)
        .map(|(rho, r)| rho.powf(power) * r.powi(r_power))
        .collect();
    let body = simpson(&vals, profile.dr());
    let rho_end = *rho.last().unwrap();
    if rho_end == 0.0 {
        return body;
    }
    let rate = profile.tail_rate();
    let q = power * rate;
    let big_r = profile.r_end();
    // int_R^inf rho_end^power e^{-q (r - R)} r^k dr
    let mut poly = 0.0;
    let mut fact = 1.0;
    for j in 0..=r_power {
        if j > 0 {
            fact *= (r_power - j + 1) as f64;
        }
        poly += fact * big_r.powi(r_power - j) / q.powi(j + 1);
    }
    body + rho_end.powf(power) * poly
}

/// `int rho^p r dr` and `int rho^p r^3 dr`, Simpson plus analytic tail.
pub fn moment_integrals(profile: &RadialProfile) -> Moments {
    let p = profile.params.p;
    Moments {
        i_p0: radial_integral_with_tail(profile, p, 1),
        i_p2: radial_integral_with_tail(profile, p, 3),
    }
}

/// Energy of a critical point: `2 pi (1/2 - 1/p) int rho^p r dr`.
pub fn energy(profile: &RadialProfile) -> f64 {
    let p = profile.params.p;
    2.0 * PI * (0.5 - 1.0 / p) * moment_integrals(profile).i_p0
}

/// The limit functional evaluated from its definition,
/// `1/2 int (D psi + lambda gamma3 psi, psi) - int F(|psi|)`, with radial
/// derivatives taken by finite differences rather than from the ODE.
pub fn functional_from_definition(profile: &RadialProfile) -> f64 {
    let (du, dv) = profile.radial_derivatives();
    let lam = profile.params.lambda;
    let s = profile.params.s as f64;
    let quad: Vec<f64> = (0..profile.r.len())
        .map(|i| {
            let (r, u, v) = (profile.r[i], profile.u[i], profile.v[i]);
            // (D psi, psi) = v' u - u' v - (2S+1) u v / r ; times r dr
            let kinetic = (dv[i] * u - du[i] * v) * r - (2.0 * s + 1.0) * u * v;
            kinetic + lam * (v * v - u * u) * r
        })
        .collect();
    let quadratic = PI * simpson(&quad, profile.dr());
    let p = profile.params.p;
    quadratic - 2.0 * PI / p * radial_integral_with_tail(profile, p, 1)
}

/// Least-squares slope of `log rho` on the last third of the grid.
pub fn decay_fit(profile: &RadialProfile) -> Result<DecayFit> {
    let n = profile.r.len();
    let start = 2 * n / 3;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in start..n {
        let rho = profile.u[i].hypot(profile.v[i]);
        if rho > 0.0 && rho.is_finite() {
            xs.push(profile.r[i]);
            ys.push(rho.ln());
        }
    }
    if xs.len() < 2 {
        return Err(SylError::TailUnderflow);
    }
    let fit = fit_line(&xs, &ys).ok_or(SylError::TailUnderflow)?;
    Ok(DecayFit {
        rate: -fit.slope,
        amplitude: fit.intercept.exp(),
        r_squared: fit.r_squared,
    })
}

/// Pointwise residual of the planar equation for the reconstructed spinor on
/// a polar grid, using Clifford matrices and analytic angular derivatives.
pub fn full_residual(profile: &RadialProfile) -> ResidualReport {
    full_residual_with(profile, 64)
}

pub fn full_residual_with(profile: &RadialProfile, n_theta: usize) -> ResidualReport {
    let cl = CliffordRep2::STANDARD;
    let (du, dv) = profile.radial_derivatives();
    let lam = profile.params.lambda;
    let s = profile.params.s as f64;
    let n = profile.r.len();
    let (mut num, mut den) = (0.0, 0.0);
    // skip the origin and the one-sided stencil region at the far end
    for i in 1..n.saturating_sub(3) {
        let r = profile.r[i];
        let (u, v, up, vp) = (profile.u[i], profile.v[i], du[i], dv[i]);
        let f = profile.params.nonlinearity(u.hypot(v));
        for j in 0..n_theta {
            let th = 2.0 * PI * j as f64 / n_theta as f64;
            let e_s = C64::from_polar(1.0, s * th);
            let e_s1 = C64::from_polar(1.0, (s + 1.0) * th);
            let psi: Spinor = [e_s * v, C64::i() * e_s1 * u];
            let d_r: Spinor = [e_s * vp, C64::i() * e_s1 * up];
            let d_th: Spinor = [C64::i() * s * psi[0], C64::i() * (s + 1.0) * psi[1]];
            let (c, sn) = (th.cos(), th.sin());
            let d1: Spinor = [c * d_r[0] - sn / r * d_th[0], c * d_r[1] - sn / r * d_th[1]];
            let d2: Spinor = [sn * d_r[0] + c / r * d_th[0], sn * d_r[1] + c / r * d_th[1]];
            let g1 = cl.gamma1.apply(&d1);
            let g2 = cl.gamma2.apply(&d2);
            let g3 = cl.gamma3.apply(&psi);
            let res: Spinor = [
                g1[0] + g2[0] + lam * g3[0] - f * psi[0],
                g1[1] + g2[1] + lam * g3[1] - f * psi[1],
            ];
            let rhs: Spinor = [f * psi[0], f * psi[1]];
            num += spinor_norm_sqr(&res) * r;
            den += spinor_norm_sqr(&rhs) * r;
        }
    }
    if den == 0.0 {
        return ResidualReport {
            relative: 0.0,
            degenerate: true,
        };
    }
    ResidualReport {
        relative: (num / den).sqrt(),
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_profile(p: f64) -> RadialProfile {
        RadialProfile::from_fn(BubbleParams::new(1.0, p), 40.0, 8001, |r| (0.0, (-r).exp())).unwrap()
    }

    #[test]
    fn gamma_integral_moments() {
        let m = moment_integrals(&exp_profile(3.0));
        assert!((m.i_p0 - 1.0 / 9.0).abs() < 1e-10, "{}", m.i_p0);
        assert!((m.i_p2 - 6.0 / 81.0).abs() < 1e-10, "{}", m.i_p2);
    }

    #[test]
    fn moments_include_tail() {
        // grid truncated at r = 6: the tail supplies most of the remaining mass
        let prof =
            RadialProfile::from_fn(BubbleParams::new(1.0, 3.0), 6.0, 1201, |r| (0.0, (-r).exp())).unwrap();
        let m = moment_integrals(&prof);
        assert!((m.i_p2 - 6.0 / 81.0).abs() < 1e-9, "{}", m.i_p2);
    }

    #[test]
    fn energy_p3_coefficient() {
        let prof = exp_profile(3.0);
        let e = energy(&prof);
        assert!((e - PI / 3.0 / 9.0).abs() < 1e-10);
    }

    #[test]
    fn zero_profile() {
        let prof = RadialProfile::from_fn(BubbleParams::new(1.0, 3.0), 10.0, 101, |_| (0.0, 0.0)).unwrap();
        assert_eq!(energy(&prof), 0.0);
        let res = full_residual(&prof);
        assert!(res.degenerate && res.relative == 0.0);
        assert!(matches!(decay_fit(&prof), Err(SylError::TailUnderflow)));
    }

    #[test]
    fn synthetic_decay_rate() {
        let fit = decay_fit(&exp_profile(3.0)).unwrap();
        assert!((fit.rate - 1.0).abs() < 1e-6);
        assert!((fit.amplitude - 1.0).abs() < 1e-6);
    }

    #[test]
    fn interpolation_and_tail() {
        let prof =
            RadialProfile::from_fn(BubbleParams::new(1.0, 3.0), 10.0, 2001, |r| (r * (-r).exp(), (-r * r).exp()))
                .unwrap();
        for &r in &[0.0, 0.0013, 1.234567, 4.999, 9.9999] {
            let (u, v) = prof.eval(r);
            assert!((u - r * (-r).exp()).abs() < 1e-11, "r={r}");
            assert!((v - (-r * r).exp()).abs() < 1e-11, "r={r}");
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let p = BubbleParams::new(1.0, 3.0);
        assert!(RadialProfile::new(vec![0.1; 10], vec![0.0; 10], vec![0.0; 10], p.clone()).is_err());
        let r: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        assert!(RadialProfile::new(r, vec![0.0; 10], vec![0.0; 10], p).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(BubbleParams::new(1.0, 5.0).validate().is_err());
        assert!(BubbleParams::new(-1.0, 3.0).validate().is_err());
        assert!(BubbleParams::new(1.0, 2.0).validate().is_err());
        assert!(BubbleParams::new(1.0, 3.0).validate().is_ok());
    }
}
