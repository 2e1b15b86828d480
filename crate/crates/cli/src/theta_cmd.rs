use crate::output::{parse_pair, CmdError, Run};
use serde::Serialize;
use std::path::{Path, PathBuf};
use syl_core::bubble::{find_ground_state, read_profile_csv, BubbleParams};
use syl_core::geometry::{
    argmax_theta, curvature_at, theta_ansatz, theta_full, theta_grid_half_width, write_curvature_csv, ArgmaxResult,
    BuiltinSurface, ChartKind, ChartSpec, SpinorGrid2D, SurfaceChart, ThetaReport,
};
use syl_core::{RadialProfile, SylError};

pub const AFTER_HELP: &str = "\
Charts (--chart):
  sphere:R  ellipsoid:A,B,C  torus:R,r  flat  flat:L1,L2
  or a JSON file {\"kind\": \"EMBEDDED\"|\"METRIC\", \"params\": {\"surface\": ...} | \"table\": {...}}
Outputs (in --out):
  theta_report.json    chart, evaluation point, K, the closed-form (ansatz) and full-grid
                       Theta reports with term_ricci / term_riemann, riemann_ratio, and the
                       argmax {point, report, ties, degenerate}
  curvature.csv        with --curvature-csv: columns s,t,K over the chart domain
  theta.manifest.json  run manifest
Exit codes: 0 success, 1 invalid input, 2 chart validation or numerical failure.";

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Builtin chart name with parameters, or a chart JSON file.
    #[arg(long)]
    pub chart: String,
    /// Bubble profile CSV (r,u,v); computed from --lambda/--p when omitted.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    /// Chart point `s,t` for the full evaluation (default: domain centre).
    #[arg(long, value_parser = parse_pair)]
    pub point: Option<[f64; 2]>,
    /// Evaluate the full functional at the maximiser of Theta instead.
    #[arg(long, conflicts_with = "point")]
    pub argmax: bool,
    /// Also write the curvature field.
    #[arg(long)]
    pub curvature_csv: bool,
    /// Samples `ns,nt` of the curvature field.
    #[arg(long, value_parser = parse_pair, default_value = "64,64")]
    pub curvature_grid: [f64; 2],
    /// Nodes per side of the tangent-plane quadrature grid.
    #[arg(long, default_value_t = 401)]
    pub grid_n: usize,
}

#[derive(Serialize)]
struct ChartSnapshot<'a> {
    chart: &'a str,
    profile: Option<&'a Path>,
    lambda: f64,
    p: f64,
    point: Option<[f64; 2]>,
    argmax: bool,
    grid_n: usize,
}

#[derive(Serialize)]
struct ThetaOutput {
    chart: String,
    point: [f64; 2],
    #[serde(rename = "K")]
    k: f64,
    ansatz: ThetaReport,
    full: ThetaReport,
    /// `|term_riemann| / |term_ricci|` of the full evaluation.
    riemann_ratio: f64,
    argmax: ArgmaxResult,
}

/// Every chart problem is a numerical-class failure for this command.
fn chart_error(e: impl Into<CmdError>) -> CmdError {
    let mut e = e.into();
    e.code = 2;
    e
}

fn builtin(kind: ChartKind, surface: BuiltinSurface) -> Result<SurfaceChart, SylError> {
    SurfaceChart::from_spec(&ChartSpec {
        kind,
        params: Some(surface),
        table: None,
    })
}

pub fn parse_chart(spec: &str, run: &mut Run) -> Result<SurfaceChart, CmdError> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = || -> Result<Vec<f64>, CmdError> {
        crate::output::parse_list(rest).map_err(|m| chart_error(CmdError::usage(format!("chart '{spec}': {m}"))))
    };
    let arity = |v: Vec<f64>, n: usize| -> Result<Vec<f64>, CmdError> {
        if v.len() == n {
            Ok(v)
        } else {
            Err(chart_error(SylError::InvalidParameter(format!("chart '{name}' takes {n} parameters"))))
        }
    };
    use BuiltinSurface::*;
    use ChartKind::*;
    let chart = match name {
        "sphere" => builtin(Embedded, Sphere { radius: arity(nums()?, 1)?[0] }),
        "ellipsoid" => {
            let v = arity(nums()?, 3)?;
            builtin(Embedded, Ellipsoid { a: v[0], b: v[1], c: v[2] })
        }
        "torus" => {
            let v = arity(nums()?, 2)?;
            builtin(Embedded, Torus { major: v[0], minor: v[1] })
        }
        "flat" if rest.is_empty() => builtin(Metric, FlatTorus { l1: 2.0 * std::f64::consts::PI, l2: 2.0 * std::f64::consts::PI }),
        "flat" => {
            let v = arity(nums()?, 2)?;
            builtin(Metric, FlatTorus { l1: v[0], l2: v[1] })
        }
        _ => {
            let path = Path::new(spec);
            let text = std::fs::read_to_string(path)
                .map_err(|e| chart_error(CmdError::usage(format!("chart '{spec}' is neither builtin nor a readable file: {e}"))))?;
            run.add_input(path);
            SurfaceChart::from_json(&text)
        }
    };
    chart.map_err(chart_error)
}

fn load_profile(args: &Args, run: &mut Run) -> Result<RadialProfile, CmdError> {
    let params = BubbleParams::new(args.lambda, args.p);
    params.validate()?;
    match &args.profile {
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| CmdError::usage(format!("cannot open profile {}: {e}", path.display())))?;
            run.add_input(path);
            Ok(read_profile_csv(file, params)?)
        }
        None => Ok(find_ground_state(&params)?.profile),
    }
}

pub fn run(args: &Args, run: &mut Run) -> Result<(), CmdError> {
    run.set_config(&ChartSnapshot {
        chart: &args.chart,
        profile: args.profile.as_deref(),
        lambda: args.lambda,
        p: args.p,
        point: args.point,
        argmax: args.argmax,
        grid_n: args.grid_n,
    });
    if args.grid_n < 21 {
        return Err(CmdError::usage("--grid-n must be at least 21"));
    }
    let [ns, nt] = args.curvature_grid;
    if !(ns >= 1.0 && nt >= 1.0 && ns.fract() == 0.0 && nt.fract() == 0.0) {
        return Err(CmdError::usage("--curvature-grid needs two positive integers"));
    }
    let chart = parse_chart(&args.chart, run)?;
    let profile = load_profile(args, run)?;

    let argmax = argmax_theta(&chart, &profile).map_err(chart_error)?;
    let point = match (args.point, args.argmax) {
        (Some(q), _) => q,
        (None, true) => argmax.point,
        (None, false) => {
            let d = chart.domain();
            [0.5 * (d.s[0] + d.s[1]), 0.5 * (d.t[0] + d.t[1])]
        }
    };
    if !chart.domain().contains(point) {
        return Err(chart_error(SylError::InvalidParameter(format!("point {point:?} outside the chart domain"))));
    }
    let curv = curvature_at(&chart, point).map_err(chart_error)?;
    let mut ansatz = theta_ansatz(curv.gauss, &profile);
    ansatz.point = Some(point);
    let grid = SpinorGrid2D::from_profile(&profile, args.grid_n, theta_grid_half_width(&profile));
    let full = theta_full(&curv, &grid, profile.params.p)?;
    let riemann_ratio = if full.term_ricci != 0.0 {
        full.term_riemann.abs() / full.term_ricci.abs()
    } else {
        0.0
    };

    if args.curvature_csv {
        run.write("curvature.csv", "curvature", |w| {
            write_curvature_csv(&chart, ns as usize, nt as usize, w).map_err(chart_error)
        })?;
    }
    let out = ThetaOutput {
        chart: chart.name().to_string(),
        point,
        k: curv.gauss,
        ansatz,
        full,
        riemann_ratio,
        argmax,
    };
    run.write_json("theta_report.json", "report", &out)?;
    let a = &out.argmax;
    let argmax_note = if a.degenerate {
        "constant K: every point maximises Theta".to_string()
    } else {
        format!("argmax {:?} (K = {}, {} tie(s))", a.point, a.report.k, a.ties.len())
    };
    run.emit(
        &out,
        &format!(
            "theta on {} at {:?}: K={} ansatz={} full={} (ricci {}, riemann {}); {}",
            out.chart, point, out.k, out.ansatz.theta, out.full.theta, out.full.term_ricci, out.full.term_riemann, argmax_note
        ),
    );
    Ok(())
}
