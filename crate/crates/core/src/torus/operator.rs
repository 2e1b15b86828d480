use super::{FourierSpinor, GridFft, Representation, TorusGrid};
use crate::clifford::{dirac_symbol, ModeSymbol, C64};
use crate::error::{Result, SylError};

/// Per-mode data of `A = eps D + a gamma3`. The symbol at `k` is
/// `[[a, w], [conj w, -a]]` with `w = eps(-k1 + i k2)`.
#[derive(Clone, Debug)]
pub struct ModeTable {
    pub grid: TorusGrid,
    pub eps: f64,
    pub a: f64,
    pub dealias: bool,
    /// `mu(k) = sqrt(eps^2 |k|^2 + a^2)`.
    pub mu: Vec<f64>,
    off: Vec<C64>,
    /// Retained modes (all of them unless dealiasing).
    pub mask: Vec<bool>,
    fft: GridFft,
}

pub fn assemble(grid: TorusGrid, eps: f64, a: f64) -> Result<ModeTable> {
    assemble_with(grid, eps, a, false)
}

/// As [`assemble`], optionally keeping only modes with `|j| <= N/3` (2/3 rule).
pub fn assemble_with(grid: TorusGrid, eps: f64, a: f64, dealias: bool) -> Result<ModeTable> {
    grid.validate()?;
    if !(eps > 0.0 && eps.is_finite()) || !(a > 0.0 && a.is_finite()) {
        return Err(SylError::InvalidParameter(format!("need eps > 0 and a > 0, got {eps}, {a}")));
    }
    let n = grid.len();
    let (mut mu, mut off, mut mask) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i1 in 0..grid.n1 {
        for i2 in 0..grid.n2 {
            let k = grid.wavevector(i1, i2);
            mu.push((eps * eps * (k[0] * k[0] + k[1] * k[1]) + a * a).sqrt());
            off.push(C64::new(-eps * k[0], eps * k[1]));
            let keep = !dealias
                || (TorusGrid::mode_number(i1, grid.n1).unsigned_abs() as usize * 3 <= grid.n1
                    && TorusGrid::mode_number(i2, grid.n2).unsigned_abs() as usize * 3 <= grid.n2);
            mask.push(keep);
        }
    }
    Ok(ModeTable {
        grid,
        eps,
        a,
        dealias,
        mu,
        off,
        mask,
        fft: grid.transform(),
    })
}

impl ModeTable {
    pub fn fft(&self) -> &GridFft {
        &self.fft
    }

    /// Full symbol with projectors for slot `m`.
    pub fn symbol(&self, m: usize) -> ModeSymbol {
        let k = self.grid.wavevector(m / self.grid.n2, m % self.grid.n2);
        dirac_symbol(k, self.eps, self.a)
    }

    pub fn apply_a(&self, x: &FourierSpinor) -> FourierSpinor {
        debug_assert_eq!(x.repr, Representation::Fourier);
        let mut out = x.clone();
        for m in 0..self.mu.len() {
            let (z0, z1) = (x.data[0][m], x.data[1][m]);
            let w = self.off[m];
            out.data[0][m] = z0 * self.a + w * z1;
            out.data[1][m] = w.conj() * z0 - z1 * self.a;
        }
        out
    }

    fn project(&self, x: &FourierSpinor, sign: f64) -> FourierSpinor {
        let ax = self.apply_a(x);
        let mut out = x.clone();
        for m in 0..self.mu.len() {
            let s = 0.5 * sign / self.mu[m];
            for c in 0..2 {
                out.data[c][m] = if self.mask[m] {
                    x.data[c][m] * 0.5 + ax.data[c][m] * s
                } else {
                    C64::new(0.0, 0.0)
                };
            }
        }
        out
    }

    /// Projection onto `E+` (positive spectrum), restricted to retained modes.
    pub fn proj_plus(&self, x: &FourierSpinor) -> FourierSpinor {
        self.project(x, 1.0)
    }

    pub fn proj_minus(&self, x: &FourierSpinor) -> FourierSpinor {
        self.project(x, -1.0)
    }

    /// Zeroes discarded modes.
    pub fn truncate(&self, x: &FourierSpinor) -> FourierSpinor {
        let mut out = x.clone();
        for c in 0..2 {
            for (z, keep) in out.data[c].iter_mut().zip(&self.mask) {
                if !keep {
                    *z = C64::new(0.0, 0.0);
                }
            }
        }
        out
    }

    /// `<x, y>_eps = eps^{-2} L1 L2 sum_k mu(k) Re(x_k . conj y_k)`.
    pub fn inner_eps(&self, x: &FourierSpinor, y: &FourierSpinor) -> f64 {
        debug_assert!(x.repr == Representation::Fourier && y.repr == Representation::Fourier);
        let mut s = 0.0;
        for m in 0..self.mu.len() {
            let d = x.data[0][m] * y.data[0][m].conj() + x.data[1][m] * y.data[1][m].conj();
            s += self.mu[m] * d.re;
        }
        s * self.grid.area() / (self.eps * self.eps)
    }

    /// The squared norm `||x||_eps^2`.
    pub fn norm_eps_sq(&self, x: &FourierSpinor) -> f64 {
        self.inner_eps(x, x)
    }
}

/// Pointwise data of the nonlinearity at a base field, reused by Hessian products.
#[derive(Clone, Debug)]
pub struct Linearization {
    pub values: FourierSpinor,
    /// `f(|psi|) = |psi|^{p-2}`.
    pub f: Vec<f64>,
    /// `f'(|psi|) / |psi|`, zero where `psi` vanishes.
    pub df_over_rho: Vec<f64>,
    pub rho: Vec<f64>,
}

/// `L_eps`, its Riesz gradient and Hessian for a fixed mode table and exponent.
#[derive(Clone, Debug)]
pub struct TorusProblem {
    pub table: ModeTable,
    pub p: f64,
}

impl TorusProblem {
    pub fn new(table: ModeTable, p: f64) -> Result<Self> {
        if !(p > 2.0 && p < 4.0) {
            return Err(SylError::InvalidParameter(format!("exponent p = {p} must lie in (2, 4)")));
        }
        Ok(TorusProblem { table, p })
    }

    pub fn eps(&self) -> f64 {
        self.table.eps
    }

    pub fn grid(&self) -> TorusGrid {
        self.table.grid
    }

    pub fn zeros(&self) -> FourierSpinor {
        FourierSpinor::zeros(self.table.grid, Representation::Fourier)
    }

    pub fn linearize(&self, psi: &FourierSpinor) -> Linearization {
        let values = psi.to_physical(&self.table.fft);
        let rho = values.abs();
        let q = self.p - 2.0;
        let f: Vec<f64> = rho.iter().map(|r| r.powf(q)).collect();
        let df_over_rho = rho
            .iter()
            .zip(&f)
            .map(|(&r, &fr)| if r > 0.0 { q * fr / (r * r) } else { 0.0 })
            .collect();
        Linearization {
            values,
            f,
            df_over_rho,
            rho,
        }
    }

    /// `eps^{-2} int F(|psi|)` with `F(s) = s^p / p`, by the grid rule.
    pub fn potential(&self, lin: &Linearization) -> f64 {
        let s: f64 = lin.rho.iter().zip(&lin.f).map(|(r, f)| f * r * r).sum();
        s / self.p * self.table.grid.cell() / (self.eps() * self.eps())
    }

    /// `eps^{-2} int (f(|psi|)|psi|^2 / 2 - F(|psi|))`, which equals `L_eps` at critical points.
    pub fn energy_identity(&self, psi: &FourierSpinor) -> f64 {
        let lin = self.linearize(psi);
        let s: f64 = lin.rho.iter().zip(&lin.f).map(|(r, f)| f * r * r).sum();
        s * (0.5 - 1.0 / self.p) * self.table.grid.cell() / (self.eps() * self.eps())
    }

    /// `(1/2) <A psi, psi> eps^{-2}`, i.e. `(||psi+||^2 - ||psi-||^2) / 2`.
    pub fn quadratic(&self, psi: &FourierSpinor) -> f64 {
        let ax = self.table.apply_a(psi);
        let mut s = 0.0;
        for m in 0..self.table.mu.len() {
            s += (ax.data[0][m] * psi.data[0][m].conj() + ax.data[1][m] * psi.data[1][m].conj()).re;
        }
        0.5 * s * self.table.grid.area() / (self.eps() * self.eps())
    }

    /// `L_eps(psi) = (||psi+||^2 - ||psi-||^2)/2 - eps^{-2} int F(|psi|)`.
    pub fn energy_l(&self, psi: &FourierSpinor) -> f64 {
        self.quadratic(psi) - self.potential(&self.linearize(psi))
    }

    fn riesz(&self, psi: &FourierSpinor, nonlinear: &FourierSpinor) -> FourierSpinor {
        let t = &self.table;
        let mut g = t.apply_a(psi);
        let nl = nonlinear.to_fourier(&t.fft);
        for m in 0..t.mu.len() {
            for c in 0..2 {
                g.data[c][m] = if t.mask[m] {
                    (g.data[c][m] - nl.data[c][m]) / t.mu[m]
                } else {
                    C64::new(0.0, 0.0)
                };
            }
        }
        g
    }

    /// Riesz representative of `L'_eps(psi)` in the eps inner product.
    pub fn gradient(&self, psi: &FourierSpinor) -> FourierSpinor {
        self.gradient_at(psi, &self.linearize(psi))
    }

    pub fn gradient_at(&self, psi: &FourierSpinor, lin: &Linearization) -> FourierSpinor {
        let mut nl = lin.values.clone();
        for c in 0..2 {
            nl.data[c].iter_mut().zip(&lin.f).for_each(|(z, f)| *z *= *f);
        }
        self.riesz(psi, &nl)
    }

    /// Riesz representative of `L''_eps(psi)[v, .]`.
    pub fn hessian_apply(&self, lin: &Linearization, v: &FourierSpinor) -> FourierSpinor {
        let w = v.to_physical(&self.table.fft);
        let y = &lin.values;
        let mut nl = w.clone();
        for m in 0..lin.f.len() {
            let re = (y.data[0][m] * w.data[0][m].conj() + y.data[1][m] * w.data[1][m].conj()).re;
            let c = lin.df_over_rho[m] * re;
            for k in 0..2 {
                nl.data[k][m] = w.data[k][m] * lin.f[m] + y.data[k][m] * c;
            }
        }
        self.riesz(v, &nl)
    }

    /// `||L'_eps(psi)||`, the dual norm of the derivative.
    pub fn gradient_norm(&self, psi: &FourierSpinor) -> f64 {
        let g = self.gradient(psi);
        self.table.norm_eps_sq(&g).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_coeffs(table: &ModeTable, seed: u64, amp: f64) -> FourierSpinor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = FourierSpinor::zeros(table.grid, Representation::Fourier);
        for m in 0..table.mu.len() {
            let decay = amp / table.mu[m].powi(2);
            for c in 0..2 {
                f.data[c][m] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
            }
        }
        table.truncate(&f)
    }

    fn table() -> ModeTable {
        assemble(TorusGrid::square(16, 2.0 * PI), 0.5, 1.0).unwrap()
    }

    #[test]
    fn symbols_agree_with_fast_application() {
        let t = table();
        let x = random_coeffs(&t, 1, 1.0);
        let ax = t.apply_a(&x);
        for m in [0, 5, 77, 255] {
            let s = t.symbol(m);
            let want = s.matrix.apply(&[x.data[0][m], x.data[1][m]]);
            assert!((want[0] - ax.data[0][m]).norm() < 1e-14);
            assert!((want[1] - ax.data[1][m]).norm() < 1e-14);
            assert!((s.mu() - t.mu[m]).abs() < 1e-14);
        }
        let zero = t.symbol(0);
        assert_eq!(zero.eigen_pair, (-1.0, 1.0));
    }

    #[test]
    fn shifted_spin_structure_opens_the_gap() {
        let mut grid = TorusGrid::square(16, 2.0 * PI);
        grid.delta = [0.5, 0.5];
        let t = assemble(grid, 0.5, 1.0).unwrap();
        let min = t.mu.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min - (0.25f64 * 0.5 + 1.0).sqrt()).abs() < 1e-14);
        assert!(min > 1.0);
    }

    #[test]
    fn single_mode_norm() {
        let t = assemble(TorusGrid::square(16, 2.0 * PI), 1.0, 1.0).unwrap();
        let mut x = FourierSpinor::zeros(t.grid, Representation::Fourier);
        x.data[0][0] = C64::new(1.0, 0.0);
        assert!((t.norm_eps_sq(&x) - 4.0 * PI * PI).abs() < 1e-12);
        assert_eq!(t.norm_eps_sq(&t.proj_plus(&x.scaled(0.0))), 0.0);
    }

    #[test]
    fn splitting_is_complete_and_orthogonal() {
        let t = table();
        let x = random_coeffs(&t, 2, 1.0);
        let y = random_coeffs(&t, 3, 1.0);
        let (xp, xm) = (t.proj_plus(&x), t.proj_minus(&x));
        let scale = t.norm_eps_sq(&x);
        assert!(t.norm_eps_sq(&x.sub(&xp.add(&xm))) < 1e-24 * scale);
        assert!(t.inner_eps(&xp, &t.proj_minus(&y)).abs() < 1e-12 * scale);
        assert!((t.norm_eps_sq(&xp) + t.norm_eps_sq(&xm) - scale).abs() < 1e-12 * scale);
        // A is positive on E+ and negative on E-
        let tp = TorusProblem::new(t.clone(), 3.0).unwrap();
        assert!(tp.quadratic(&xp) > 0.0 && tp.quadratic(&xm) < 0.0);
        assert!((2.0 * tp.quadratic(&xp) - t.norm_eps_sq(&xp)).abs() < 1e-12 * scale);
    }

    #[test]
    fn pure_negative_field_has_negative_energy() {
        let t = table();
        let p = TorusProblem::new(t.clone(), 3.0).unwrap();
        let xm = t.proj_minus(&random_coeffs(&t, 4, 1.0));
        assert!(p.energy_l(&xm) < 0.0);
        assert_eq!(p.energy_l(&p.zeros()), 0.0);
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let t = table();
        let p = TorusProblem::new(t.clone(), 3.0).unwrap();
        let psi = random_coeffs(&t, 5, 3.0);
        let dir = random_coeffs(&t, 6, 1.0);
        let h = 1e-4;
        let fd = (p.energy_l(&psi.add(&dir.scaled(h))) - p.energy_l(&psi.sub(&dir.scaled(h)))) / (2.0 * h);
        let an = t.inner_eps(&p.gradient(&psi), &dir);
        assert!((fd - an).abs() < 1e-6 * an.abs(), "{fd} {an}");
        let lin = p.linearize(&psi);
        let hv = p.hessian_apply(&lin, &dir);
        let gp = p.gradient(&psi.add(&dir.scaled(h)));
        let gm = p.gradient(&psi.sub(&dir.scaled(h)));
        let fd_h = gp.sub(&gm).scaled(0.5 / h);
        let err = t.norm_eps_sq(&fd_h.sub(&hv)).sqrt() / t.norm_eps_sq(&hv).sqrt();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn dealiasing_keeps_low_modes_only() {
        let t = assemble_with(TorusGrid::square(24, 1.0), 0.1, 1.0, true).unwrap();
        let kept = t.mask.iter().filter(|&&k| k).count();
        assert_eq!(kept, 17 * 17);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(assemble(TorusGrid::square(16, 1.0), 0.0, 1.0).is_err());
        assert!(assemble(TorusGrid::square(16, 1.0), 0.1, -1.0).is_err());
        assert!(TorusProblem::new(table(), 4.0).is_err());
    }
}
