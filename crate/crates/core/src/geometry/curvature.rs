use super::{dot3, MetricJet, SurfaceChart};
use crate::error::{Result, SylError};
use serde::Serialize;
use std::io::Write;

type T3 = [[[f64; 2]; 2]; 2];
type T4 = [[[[f64; 2]; 2]; 2]; 2];

/// Curvature at a point. `christoffel[k][i][j] = Gamma^k_ij`,
/// `riemann_coord[i][j][k][l] = <R(d_i, d_j) d_k, d_l>` with
/// `R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`, and `riemann_frame` the same
/// tensor in the orthonormal frame obtained by Gram-Schmidt on `(d_s, d_t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureData {
    pub point: [f64; 2],
    pub g: [[f64; 2]; 2],
    pub christoffel: T3,
    pub riemann_coord: T4,
    /// `frame[a]` holds the coordinate components of `e_a`.
    pub frame: [[f64; 2]; 2],
    pub riemann_frame: T4,
    pub gauss: f64,
    pub scal: f64,
}

impl CurvatureData {
    /// `R(e_i, x, x, e_j)` for `x` given in frame components.
    pub fn riemann(&self, i: usize, x: [f64; 2], j: usize) -> f64 {
        let mut acc = 0.0;
        for b in 0..2 {
            for c in 0..2 {
                acc += self.riemann_frame[i][b][c][j] * x[b] * x[c];
            }
        }
        acc
    }

    /// `Ric(x, x) = sum_i R(e_i, x, x, e_i)`.
    pub fn ricci(&self, x: [f64; 2]) -> f64 {
        (0..2).map(|i| self.riemann(i, x, i)).sum()
    }
}

fn inverse(g: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
}

/// Christoffel symbols from the first derivatives of the metric.
pub(crate) fn christoffel(g: &[[f64; 2]; 2], dg: &T3) -> T3 {
    let gi = inverse(g);
    let mut gam = [[[0.0; 2]; 2]; 2];
    for (k, gam_k) in gam.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                gam_k[i][j] = (0..2)
                    .map(|l| 0.5 * gi[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]))
                    .sum();
            }
        }
    }
    gam
}

/// `d_m Gamma^k_ij`, indexed `[m][k][i][j]`.
fn christoffel_derivative(jet: &MetricJet) -> T4 {
    let gi = inverse(&jet.g);
    let mut out = [[[[0.0; 2]; 2]; 2]; 2];
    for (m, out_m) in out.iter_mut().enumerate() {
        let mut dgi = [[0.0; 2]; 2];
        for (k, row) in dgi.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        *v -= gi[k][a] * jet.dg[m][a][b] * gi[b][l];
                    }
                }
            }
        }
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for l in 0..2 {
                        let t = jet.dg[i][j][l] + jet.dg[j][i][l] - jet.dg[l][i][j];
                        let dt = jet.ddg[m][i][j][l] + jet.ddg[m][j][i][l] - jet.ddg[m][l][i][j];
                        acc += 0.5 * (dgi[k][l] * t + gi[k][l] * dt);
                    }
                    out_m[k][i][j] = acc;
                }
            }
        }
    }
    out
}

pub fn curvature_at(chart: &SurfaceChart, q: [f64; 2]) -> Result<CurvatureData> {
    let jet = chart.jet(q)?;
    let g = jet.g;
    let gam = christoffel(&g, &jet.dg);
    let dgam = christoffel_derivative(&jet);

    // R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    let mut r_up = [[[[0.0; 2]; 2]; 2]; 2];
    for (l, r_l) in r_up.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut v = dgam[i][l][j][k] - dgam[j][l][i][k];
                    for m in 0..2 {
                        v += gam[l][i][m] * gam[m][j][k] - gam[l][j][m] * gam[m][i][k];
                    }
                    r_l[i][j][k] = v;
                }
            }
        }
    }
    let mut r = [[[[0.0; 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    r[i][j][k][l] = (0..2).map(|m| g[l][m] * r_up[m][i][j][k]).sum();
                }
            }
        }
    }

    // Gram-Schmidt on (d_s, d_t)
    let e1 = [1.0 / g[0][0].sqrt(), 0.0];
    let proj = g[0][1] / g[0][0];
    let norm2 = (g[1][1] - g[0][1] * proj).sqrt();
    let e2 = [-proj / norm2, 1.0 / norm2];
    let frame = [e1, e2];

    let mut rf = [[[[0.0; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let mut v = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            for k in 0..2 {
                                for l in 0..2 {
                                    v += frame[a][i] * frame[b][j] * frame[c][k] * frame[d][l] * r[i][j][k][l];
                                }
                            }
                        }
                    }
                    rf[a][b][c][d] = v;
                }
            }
        }
    }
    let gauss = rf[0][1][1][0];
    let mut data = CurvatureData {
        point: q,
        g,
        christoffel: gam,
        riemann_coord: r,
        frame,
        riemann_frame: rf,
        gauss,
        scal: 0.0,
    };
    data.scal = data.ricci([1.0, 0.0]) + data.ricci([0.0, 1.0]);
    Ok(data)
}

/// Gaussian curvature from the first and second fundamental forms of an
/// embedded chart; independent of the intrinsic path above.
pub fn gauss_curvature_embedded(chart: &SurfaceChart, q: [f64; 2]) -> Result<f64> {
    let xs = chart
        .embedding_partial(q, 1, 0)
        .ok_or_else(|| SylError::InvalidParameter("chart has no embedding".into()))?;
    let xt = chart.embedding_partial(q, 0, 1).unwrap();
    let n = [
        xs[1] * xt[2] - xs[2] * xt[1],
        xs[2] * xt[0] - xs[0] * xt[2],
        xs[0] * xt[1] - xs[1] * xt[0],
    ];
    let e = dot3(xs, xs);
    let f = dot3(xs, xt);
    let g = dot3(xt, xt);
    let det = e * g - f * f;
    if !(det > 1e-20) {
        return Err(SylError::SingularMetric { s: q[0], t: q[1], det });
    }
    let nn = dot3(n, n).sqrt();
    let sff = |a, b| dot3(chart.embedding_partial(q, a, b).unwrap(), n) / nn;
    let (l, m, nv) = (sff(2, 0), sff(1, 1), sff(0, 2));
    Ok((l * nv - m * m) / det)
}

/// Sample points of a chart: cell centres in non-periodic directions so
/// coordinate singularities on the boundary are avoided.
pub(crate) fn sample_grid(chart: &SurfaceChart, ns: usize, nt: usize) -> Vec<[f64; 2]> {
    let d = chart.domain();
    let coord = |range: [f64; 2], n: usize, i: usize, periodic: bool| {
        let h = (range[1] - range[0]) / n as f64;
        range[0] + h * (i as f64 + if periodic { 0.0 } else { 0.5 })
    };
    let mut pts = Vec::with_capacity(ns * nt);
    for i in 0..ns {
        for j in 0..nt {
            pts.push([coord(d.s, ns, i, d.periodic[0]), coord(d.t, nt, j, d.periodic[1])]);
        }
    }
    pts
}

/// Gaussian-curvature field as CSV `s,t,K`.
pub fn write_curvature_csv<W: Write>(chart: &SurfaceChart, ns: usize, nt: usize, mut out: W) -> Result<()> {
    writeln!(out, "s,t,K")?;
    for q in sample_grid(chart, ns, nt) {
        let k = curvature_at(chart, q)?.gauss;
        writeln!(out, "{:e},{:e},{:e}", q[0], q[1], k)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn assert_symmetries(c: &CurvatureData) {
        let r = &c.riemann_coord;
        let scale = r.iter().flatten().flatten().flatten().fold(1e-4f64, |m, v| m.max(v.abs()));
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let v = r[i][j][k][l];
                        assert!((v + r[j][i][k][l]).abs() <= 1e-8 * scale);
                        assert!((v + r[i][j][l][k]).abs() <= 1e-8 * scale);
                        assert!((v - r[k][l][i][j]).abs() <= 1e-8 * scale);
                        // first Bianchi identity
                        assert!((v + r[j][k][i][l] + r[k][i][j][l]).abs() <= 1e-8 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_has_unit_curvature() {
        for r in [1.0, 2.5] {
            let chart = SurfaceChart::sphere(r);
            for q in [[0.3, 0.1], [PI / 2.0, 2.0], [2.9, 5.0]] {
                let c = curvature_at(&chart, q).unwrap();
                assert!((c.gauss - 1.0 / (r * r)).abs() < 1e-12, "{}", c.gauss);
                assert!((c.scal - 2.0 * c.gauss).abs() < 1e-12);
                assert_symmetries(&c);
            }
        }
    }

    #[test]
    fn torus_matches_closed_form_and_fundamental_forms() {
        let (big, small) = (2.0, 1.0);
        let chart = SurfaceChart::torus(big, small);
        for phi in [0.0, 0.7, PI / 2.0, 2.0, PI] {
            let q = [phi, 1.3];
            let exact = phi.cos() / (small * (big + small * phi.cos()));
            let c = curvature_at(&chart, q).unwrap();
            assert!((c.gauss - exact).abs() < 1e-12);
            assert!((gauss_curvature_embedded(&chart, q).unwrap() - exact).abs() < 1e-12);
            assert_symmetries(&c);
        }
    }

    #[test]
    fn ellipsoid_intrinsic_equals_extrinsic() {
        let chart = SurfaceChart::ellipsoid(2.0, 1.0, 1.5);
        for q in [[0.4, 0.2], [1.5, 3.0], [2.5, 4.4]] {
            let a = curvature_at(&chart, q).unwrap().gauss;
            let b = gauss_curvature_embedded(&chart, q).unwrap();
            assert!((a - b).abs() < 1e-11 * b.abs().max(1.0));
        }
        let tip = curvature_at(&SurfaceChart::ellipsoid(2.0, 1.0, 1.0), [PI / 2.0, 0.0]).unwrap();
        assert!((tip.gauss - 4.0).abs() < 1e-11);
    }

    #[test]
    fn flat_torus_is_flat() {
        let c = curvature_at(&SurfaceChart::flat_torus(3.0, 4.0), [1.0, 2.0]).unwrap();
        assert!(c.riemann_coord.iter().flatten().flatten().flatten().all(|v| *v == 0.0));
        assert_eq!(c.gauss, 0.0);
    }

    #[test]
    fn ricci_quadratic_form() {
        let c = curvature_at(&SurfaceChart::torus(3.0, 1.0), [0.5, 0.0]).unwrap();
        let x = [0.3, -1.2];
        let n2 = x[0] * x[0] + x[1] * x[1];
        assert!((c.ricci(x) - c.gauss * n2).abs() < 1e-12);
        // R(e_i, x, x, e_j) = K (|x|^2 delta_ij - x_i x_j)
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                assert!((c.riemann(i, x, j) - c.gauss * (n2 * delta - x[i] * x[j])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_is_orthonormal() {
        let chart = SurfaceChart::from_metric_fn(*SurfaceChart::flat_torus(1.0, 1.0).domain(), |s, t| {
            [2.0 + s.sin(), 0.3 * t.cos(), 1.5]
        });
        let c = curvature_at(&chart, [0.2, 0.4]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut ip = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        ip += c.frame[a][i] * c.g[i][j] * c.frame[b][j];
                    }
                }
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert_symmetries(&c);
    }

    #[test]
    fn metric_table_of_sphere() {
        use super::super::MetricTable;
        let (ns, nt) = (181, 64);
        let ds = PI / (ns - 1) as f64;
        let dt = 2.0 * PI / nt as f64;
        let g22: Vec<Vec<f64>> = (0..ns).map(|i| vec![(i as f64 * ds).sin().powi(2); nt]).collect();
        let table = MetricTable {
            s0: 0.0,
            ds,
            t0: 0.0,
            dt,
            periodic: [false, true],
            g11: vec![vec![1.0; nt]; ns],
            g12: vec![vec![0.0; nt]; ns],
            g22,
        };
        let chart = SurfaceChart::from_table(table).unwrap();
        let k = curvature_at(&chart, [1.0, 0.5]).unwrap().gauss;
        assert!((k - 1.0).abs() < 1e-5, "{k}");
    }
}
