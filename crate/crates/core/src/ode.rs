//! Explicit Runge-Kutta integrators: an adaptive Dormand-Prince 5(4) pair for
//! the radial shooting problem and a fixed-step classical RK4 for geodesics.

use crate::error::{Result, SylError};

/// Observer verdict after each accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Adaptive Dormand-Prince 5(4) with standard PI-free step control.
#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-4,
            h_min: 1e-14,
            h_max: 0.1,
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    pub fn with_tol(tol: f64) -> Self {
        Dopri5 {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }

    /// Integrate from `t0` to `t_end`, landing exactly on every time in `stops`
    /// (ascending, inside `(t0, t_end]`). The observer sees every accepted step
    /// and may stop the integration early. Returns the final `(t, y)`.
    pub fn integrate<const N: usize, F, O>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        stops: &[f64],
        mut observer: O,
    ) -> Result<(f64, [f64; N])>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N], &[f64; N]) -> Control,
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        let mut h = self.h_init.min(t_end - t0);
        let mut stop_idx = stops.iter().position(|&s| s > t0).unwrap_or(stops.len());
        let mut steps = 0usize;

        while t < t_end {
            if steps >= self.max_steps {
                return Err(SylError::IntegrationFailure {
                    r: t,
                    reason: format!("step budget {} exhausted", self.max_steps),
                });
            }
            let target = if stop_idx < stops.len() {
                stops[stop_idx].min(t_end)
            } else {
                t_end
            };
            let mut hit = false;
            let mut h_try = h.min(self.h_max);
            if t + h_try >= target {
                h_try = target - t;
                hit = true;
            }

            let k2 = rhs(t + C2 * h_try, &axpy(&y, &[(A21, &k1)], h_try));
            let k3 = rhs(t + C3 * h_try, &axpy(&y, &[(A31, &k1), (A32, &k2)], h_try));
            let k4 = rhs(
                t + C4 * h_try,
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h_try),
            );
            let k5 = rhs(
                t + C5 * h_try,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h_try),
            );
            let k6 = rhs(
                t + h_try,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    h_try,
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                h_try,
            );
            let t_new = if hit { target } else { t + h_try };
            let k7 = rhs(t_new, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = h_try
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                h = 0.25 * h_try;
                if h < self.h_min {
                    return Err(SylError::IntegrationFailure {
                        r: t,
                        reason: "non-finite state".into(),
                    });
                }
                continue;
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                steps += 1;
                t = t_new;
                y = y_new;
                k1 = k7;
                if hit && stop_idx < stops.len() && target == stops[stop_idx] {
                    stop_idx += 1;
                }
                // keep the pre-clipping step size so output stops don't shrink h
                h = if hit { h.max(h_try) } else { h_try * factor };
                if observer(t, &y, &k1) == Control::Stop {
                    break;
                }
            } else {
                h = h_try * factor.min(1.0);
                if h < self.h_min {
                    return Err(SylError::IntegrationFailure {
                        r: t,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        Ok((t, y))
    }
}

/// One classical RK4 step.
#[inline]
pub fn rk4_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, &[(0.5, &k1)], h));
    let k3 = rhs(t + 0.5 * h, &axpy(y, &[(0.5, &k2)], h));
    let k4 = rhs(t + h, &axpy(y, &[(1.0, &k3)], h));
    axpy(
        y,
        &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
        h,
    )
}
