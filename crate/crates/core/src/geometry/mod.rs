//! Parametrized closed surfaces: metric jets, curvature, normal coordinates
//! and the concentration functional Theta.

mod argmax;
mod curvature;
mod normal;
mod theta;

pub use argmax::{argmax_theta, nelder_mead, ArgmaxResult};
pub use curvature::{curvature_at, gauss_curvature_embedded, write_curvature_csv, CurvatureData};
pub use normal::{
    exp_map, exp_map_path, metric_expansion_check, normal_metric, volume_expansion_test,
    MetricExpansion, VolumeRow,
};
pub use theta::{theta_ansatz, theta_full, theta_grid_half_width, SpinorGrid2D, ThetaMethod, ThetaReport};

use crate::error::{Result, SylError};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChartKind {
    Embedded,
    Metric,
}

/// Coordinate rectangle `[s0, s1] x [t0, t1]`; periodic directions wrap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub s: [f64; 2],
    pub t: [f64; 2],
    pub periodic: [bool; 2],
}

impl Domain {
    fn range(&self, i: usize) -> [f64; 2] {
        if i == 0 {
            self.s
        } else {
            self.t
        }
    }

    pub fn wrap(&self, q: [f64; 2]) -> [f64; 2] {
        let mut out = q;
        for (i, qi) in out.iter_mut().enumerate() {
            if self.periodic[i] {
                let [a, b] = self.range(i);
                *qi = a + (*qi - a).rem_euclid(b - a);
                // rem_euclid of a tiny negative number rounds up to the period
                if *qi >= b {
                    *qi = a;
                }
            }
        }
        out
    }

    /// True when the non-periodic coordinates lie strictly inside.
    pub fn contains(&self, q: [f64; 2]) -> bool {
        (0..2).all(|i| {
            let [a, b] = self.range(i);
            self.periodic[i] || (q[i] > a && q[i] < b)
        })
    }
}

/// Metric with first and second coordinate derivatives at a point:
/// `dg[k][i][j] = d_k g_ij`, `ddg[k][l][i][j] = d_k d_l g_ij`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricJet {
    pub g: [[f64; 2]; 2],
    pub dg: [[[f64; 2]; 2]; 2],
    pub ddg: [[[[f64; 2]; 2]; 2]; 2],
}

#[derive(Clone, Copy, Debug)]
enum Wave {
    One,
    Sin,
    Cos,
}

impl Wave {
    fn deriv(self, x: f64, n: usize) -> f64 {
        let shift = n as f64 * FRAC_PI_2;
        match self {
            Wave::One => {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Wave::Sin => (x + shift).sin(),
            Wave::Cos => (x + shift).cos(),
        }
    }
}

/// Embedding whose components are sums of `c * w1(s) * w2(t)` with
/// trigonometric factors, so every partial derivative is exact.
#[derive(Clone, Debug)]
struct TrigEmbedding {
    comps: [Vec<(f64, Wave, Wave)>; 3],
}

impl TrigEmbedding {
    fn partial(&self, q: [f64; 2], ds: usize, dt: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, terms) in self.comps.iter().enumerate() {
            out[c] = terms
                .iter()
                .map(|(k, ws, wt)| k * ws.deriv(q[0], ds) * wt.deriv(q[1], dt))
                .sum();
        }
        out
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Metric samples on a uniform coordinate grid, indexed `[i_s][i_t]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub s0: f64,
    pub ds: f64,
    pub t0: f64,
    pub dt: f64,
    pub periodic: [bool; 2],
    pub g11: Vec<Vec<f64>>,
    pub g12: Vec<Vec<f64>>,
    pub g22: Vec<Vec<f64>>,
}

impl MetricTable {
    fn dims(&self) -> (usize, usize) {
        (self.g11.len(), self.g11.first().map_or(0, Vec::len))
    }

    fn validate(&self) -> Result<()> {
        let (ns, nt) = self.dims();
        let shape_ok = [&self.g12, &self.g22]
            .iter()
            .all(|g| g.len() == ns && g.iter().all(|row| row.len() == nt))
            && self.g11.iter().all(|row| row.len() == nt);
        if !shape_ok {
            return Err(SylError::InvalidParameter("metric table components differ in shape".into()));
        }
        if ns < 5 || nt < 5 {
            return Err(SylError::InvalidParameter("metric table needs at least 5x5 samples".into()));
        }
        if !(self.ds > 0.0 && self.dt > 0.0) {
            return Err(SylError::InvalidParameter("table spacings must be positive".into()));
        }
        Ok(())
    }

    fn domain(&self) -> Domain {
        let (ns, nt) = self.dims();
        let extent = |n: usize, h: f64, periodic: bool| if periodic { n as f64 * h } else { (n - 1) as f64 * h };
        Domain {
            s: [self.s0, self.s0 + extent(ns, self.ds, self.periodic[0])],
            t: [self.t0, self.t0 + extent(nt, self.dt, self.periodic[1])],
            periodic: self.periodic,
        }
    }

    /// Index window of five samples and the query offset in grid units.
    fn window(&self, x: f64, x0: f64, h: f64, n: usize, periodic: bool) -> ([usize; 5], f64) {
        let pos = (x - x0) / h;
        let mut centre = pos.round() as isize;
        if !periodic {
            centre = centre.clamp(2, n as isize - 3);
        }
        let offset = pos - centre as f64;
        let mut idx = [0usize; 5];
        for (k, slot) in idx.iter_mut().enumerate() {
            *slot = (centre + k as isize - 2).rem_euclid(n as isize) as usize;
        }
        (idx, offset)
    }
}

#[derive(Clone)]
enum Source {
    Embedded(TrigEmbedding),
    Flat,
    MetricFn(Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>),
    Table(Arc<MetricTable>),
}

/// A coordinate chart of a closed surface, either through an embedding in
/// R^3 or through its metric coefficients `(g11, g12, g22)`.
#[derive(Clone)]
pub struct SurfaceChart {
    kind: ChartKind,
    domain: Domain,
    source: Source,
    name: String,
}

impl std::fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceChart")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Built-in surfaces addressable from a chart file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum BuiltinSurface {
    Sphere { radius: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    Torus { major: f64, minor: f64 },
    FlatTorus { l1: f64, l2: f64 },
}

/// Chart file contents: `{kind, params | table}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BuiltinSurface>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<MetricTable>,
}

/// 5-point Lagrange weights on nodes `-2..=2` for the value, first and
/// second derivative at `x` (unit spacing). At `x = 0` these are the
/// standard fourth-order central stencils.
fn lagrange5(x: f64) -> [[f64; 5]; 3] {
    let mut w = [[0.0; 5]; 3];
    for j in 0..5 {
        // coefficients of the basis polynomial, lowest degree first
        let mut poly = vec![1.0];
        let xj = j as f64 - 2.0;
        for m in 0..5 {
            if m == j {
                continue;
            }
            let xm = m as f64 - 2.0;
            let denom = xj - xm;
            let mut next = vec![0.0; poly.len() + 1];
            for (d, c) in poly.iter().enumerate() {
                next[d + 1] += c / denom;
                next[d] -= c * xm / denom;
            }
            poly = next;
        }
        for (d, c) in poly.iter().enumerate() {
            let di = d as i32;
            w[0][j] += c * x.powi(di);
            if d >= 1 {
                w[1][j] += c * di as f64 * x.powi(di - 1);
            }
            if d >= 2 {
                w[2][j] += c * (di * (di - 1)) as f64 * x.powi(di - 2);
            }
        }
    }
    w
}

fn jet_from_samples(samples: &[[[f64; 3]; 5]; 5], ws: &[[f64; 5]; 3], wt: &[[f64; 5]; 3], hs: f64, ht: f64) -> MetricJet {
    // derivative of order (a, b) in (s, t) of component c
    let d = |a: usize, b: usize, c: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                acc += ws[a][i] * wt[b][j] * samples[i][j][c];
            }
        }
        acc / (hs.powi(a as i32) * ht.powi(b as i32))
    };
    let to_mat = |a: usize, b: usize| {
        let (g11, g12, g22) = (d(a, b, 0), d(a, b, 1), d(a, b, 2));
        [[g11, g12], [g12, g22]]
    };
    let g = to_mat(0, 0);
    let dg = [to_mat(1, 0), to_mat(0, 1)];
    let mixed = to_mat(1, 1);
    let ddg = [[to_mat(2, 0), mixed], [mixed, to_mat(0, 2)]];
    MetricJet { g, dg, ddg }
}

impl SurfaceChart {
    /// Round sphere, `s` polar angle in `(0, pi)`, `t` azimuth.
    pub fn sphere(radius: f64) -> Self {
        let mut c = Self::ellipsoid(radius, radius, radius);
        c.name = format!("sphere(r={radius})");
        c
    }

    /// `(a sin s cos t, b sin s sin t, c cos s)`.
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        use Wave::*;
        SurfaceChart {
            kind: ChartKind::Embedded,
            domain: Domain {
                s: [0.0, PI],
                t: [0.0, 2.0 * PI],
                periodic: [false, true],
            },
            source: Source::Embedded(TrigEmbedding {
                comps: [vec![(a, Sin, Cos)], vec![(b, Sin, Sin)], vec![(c, Cos, One)]],
            }),
            name: format!("ellipsoid({a},{b},{c})"),
        }
    }

    /// Torus of revolution; `s` is the tube angle (`s = 0` the outer equator).
    pub fn torus(major: f64, minor: f64) -> Self {
        use Wave::*;
        SurfaceChart {
            kind: ChartKind::Embedded,
            domain: Domain {
                s: [0.0, 2.0 * PI],
                t: [0.0, 2.0 * PI],
                periodic: [true, true],
            },
            source: Source::Embedded(TrigEmbedding {
                comps: [
                    vec![(major, One, Cos), (minor, Cos, Cos)],
                    vec![(major, One, Sin), (minor, Cos, Sin)],
                    vec![(minor, Sin, One)],
                ],
            }),
            name: format!("torus({major},{minor})"),
        }
    }

    pub fn flat_torus(l1: f64, l2: f64) -> Self {
        SurfaceChart {
            kind: ChartKind::Metric,
            domain: Domain {
                s: [0.0, l1],
                t: [0.0, l2],
                periodic: [true, true],
            },
            source: Source::Flat,
            name: format!("flat_torus({l1},{l2})"),
        }
    }

    /// User metric `(s, t) -> (g11, g12, g22)`; derivatives by finite differences.
    pub fn from_metric_fn<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
    {
        SurfaceChart {
            kind: ChartKind::Metric,
            domain,
            source: Source::MetricFn(Arc::new(f)),
            name: "metric_fn".into(),
        }
    }

    pub fn from_table(table: MetricTable) -> Result<Self> {
        table.validate()?;
        Ok(SurfaceChart {
            kind: ChartKind::Metric,
            domain: table.domain(),
            source: Source::Table(Arc::new(table)),
            name: "metric_table".into(),
        })
    }

    pub fn from_spec(spec: &ChartSpec) -> Result<Self> {
        let positive = |vals: &[f64]| vals.iter().all(|v| *v > 0.0 && v.is_finite());
        match (&spec.params, &spec.table) {
            (Some(surface), None) => {
                let (chart, ok) = match *surface {
                    BuiltinSurface::Sphere { radius } => (Self::sphere(radius), positive(&[radius])),
                    BuiltinSurface::Ellipsoid { a, b, c } => (Self::ellipsoid(a, b, c), positive(&[a, b, c])),
                    BuiltinSurface::Torus { major, minor } => {
                        (Self::torus(major, minor), positive(&[major, minor]) && minor < major)
                    }
                    BuiltinSurface::FlatTorus { l1, l2 } => (Self::flat_torus(l1, l2), positive(&[l1, l2])),
                };
                if !ok {
                    return Err(SylError::InvalidParameter(format!("bad surface parameters {surface:?}")));
                }
                if chart.kind != spec.kind {
                    return Err(SylError::InvalidParameter(format!(
                        "surface {surface:?} is not of kind {:?}",
                        spec.kind
                    )));
                }
                Ok(chart)
            }
            (None, Some(table)) if spec.kind == ChartKind::Metric => Self::from_table(table.clone()),
            _ => Err(SylError::InvalidParameter(
                "chart needs exactly one of params or table (tables are METRIC)".into(),
            )),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ChartSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Partial derivative `d_s^ds d_t^dt X` of the embedding, if any.
    pub fn embedding_partial(&self, q: [f64; 2], ds: usize, dt: usize) -> Option<[f64; 3]> {
        match &self.source {
            Source::Embedded(e) => Some(e.partial(q, ds, dt)),
            _ => None,
        }
    }

    pub fn embedding(&self, q: [f64; 2]) -> Option<[f64; 3]> {
        self.embedding_partial(q, 0, 0)
    }

    /// Metric only (cheap path for geodesics and quadrature).
    pub fn metric(&self, q: [f64; 2]) -> [[f64; 2]; 2] {
        match &self.source {
            Source::Embedded(e) => {
                let xs = e.partial(q, 1, 0);
                let xt = e.partial(q, 0, 1);
                let g12 = dot3(xs, xt);
                [[dot3(xs, xs), g12], [g12, dot3(xt, xt)]]
            }
            Source::Flat => [[1.0, 0.0], [0.0, 1.0]],
            _ => self.jet_unchecked(q).g,
        }
    }

    /// Metric jet, rejecting points where `g` is not positive definite.
    pub fn jet(&self, q: [f64; 2]) -> Result<MetricJet> {
        let jet = self.jet_unchecked(q);
        let g = jet.g;
        let tr = g[0][0] + g[1][1];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        let lmin = 0.5 * tr - disc;
        if !(lmin > 1e-10) || !det.is_finite() {
            return Err(SylError::SingularMetric { s: q[0], t: q[1], det });
        }
        Ok(jet)
    }

    fn jet_unchecked(&self, q: [f64; 2]) -> MetricJet {
        match &self.source {
            Source::Embedded(e) => {
                let x1 = [e.partial(q, 1, 0), e.partial(q, 0, 1)];
                let d = |ord: [usize; 2]| e.partial(q, ord[0], ord[1]);
                // multi-index of a mixed partial in coordinates (i, j, ...)
                let idx2 = |i: usize, j: usize| {
                    let mut o = [0, 0];
                    o[i] += 1;
                    o[j] += 1;
                    o
                };
                let idx3 = |i: usize, j: usize, k: usize| {
                    let mut o = idx2(i, j);
                    o[k] += 1;
                    o
                };
                let mut jet = MetricJet {
                    g: [[0.0; 2]; 2],
                    dg: [[[0.0; 2]; 2]; 2],
                    ddg: [[[[0.0; 2]; 2]; 2]; 2],
                };
                for i in 0..2 {
                    for j in 0..2 {
                        jet.g[i][j] = dot3(x1[i], x1[j]);
                        for k in 0..2 {
                            let xik = d(idx2(i, k));
                            let xjk = d(idx2(j, k));
                            jet.dg[k][i][j] = dot3(xik, x1[j]) + dot3(x1[i], xjk);
                            for l in 0..2 {
                                jet.ddg[k][l][i][j] = dot3(d(idx3(i, k, l)), x1[j])
                                    + dot3(xik, d(idx2(j, l)))
                                    + dot3(d(idx2(i, l)), xjk)
                                    + dot3(x1[i], d(idx3(j, k, l)));
                            }
                        }
                    }
                }
                jet
            }
            Source::Flat => MetricJet {
                g: [[1.0, 0.0], [0.0, 1.0]],
                dg: [[[0.0; 2]; 2]; 2],
                ddg: [[[[0.0; 2]; 2]; 2]; 2],
            },
            Source::MetricFn(f) => {
                let h = 2e-3;
                let mut samples = [[[0.0; 3]; 5]; 5];
                for (i, row) in samples.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = f(q[0] + (i as f64 - 2.0) * h, q[1] + (j as f64 - 2.0) * h);
                    }
                }
                let w = lagrange5(0.0);
                jet_from_samples(&samples, &w, &w, h, h)
            }
            Source::Table(tab) => {
                let (ns, nt) = tab.dims();
                let (is, xs) = tab.window(q[0], tab.s0, tab.ds, ns, tab.periodic[0]);
                let (it, xt) = tab.window(q[1], tab.t0, tab.dt, nt, tab.periodic[1]);
                let mut samples = [[[0.0; 3]; 5]; 5];
                for (a, &i) in is.iter().enumerate() {
                    for (b, &j) in it.iter().enumerate() {
                        samples[a][b] = [tab.g11[i][j], tab.g12[i][j], tab.g22[i][j]];
                    }
                }
                jet_from_samples(&samples, &lagrange5(xs), &lagrange5(xt), tab.ds, tab.dt)
            }
        }
    }
}
