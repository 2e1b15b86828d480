use super::diagnostics::SweepRow;
use super::solver::{SolveResult, SolverConfig};
use super::{FourierSpinor, GridFft};
use crate::error::Result;
use std::io::{Read, Write};

pub fn read_solver_config<R: Read>(input: R) -> Result<SolverConfig> {
    let cfg: SolverConfig = serde_json::from_reader(input)?;
    cfg.grid.validate()?;
    Ok(cfg)
}

/// `i,j,abs_psi` rows in grid order.
pub fn write_abs_psi_csv<W: Write>(psi: &FourierSpinor, fft: &GridFft, mut out: W) -> Result<()> {
    let phys = psi.to_physical(fft);
    let n2 = psi.grid.n2;
    writeln!(out, "i,j,abs_psi")?;
    for (m, v) in phys.abs().iter().enumerate() {
        writeln!(out, "{},{},{:e}", m / n2, m % n2, v)?;
    }
    Ok(())
}

/// `eps,mu_eps,width,decay_c,grad_norm`; failed rows hold NaN.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "eps,mu_eps,width,decay_c,grad_norm")?;
    for r in rows {
        writeln!(out, "{:e},{:e},{:e},{:e},{:e}", r.eps, r.mu_eps, r.width, r.decay_c, r.grad_norm)?;
    }
    Ok(())
}

pub fn write_result_json<W: Write>(result: &SolveResult, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, result)?;
    Ok(())
}
