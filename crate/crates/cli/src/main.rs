mod bubble_cmd;
mod output;
mod theta_cmd;
mod torus_cmd;

use clap::{Parser, Subcommand};
use output::Run;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "syl", version, about = "Bubble, curvature-functional and torus experiments for spinorial Yamabe-type equations")]
struct Cli {
    /// Print the command's JSON report (or error object) on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radial ground state of the planar nonlinear Dirac equation.
    #[command(after_help = bubble_cmd::AFTER_HELP)]
    Bubble(bubble_cmd::Args),
    /// Curvature functional Theta on a surface chart.
    #[command(after_help = theta_cmd::AFTER_HELP)]
    Theta(theta_cmd::Args),
    /// Min-max solver on a flat torus, single run or eps sweep.
    #[command(after_help = torus_cmd::AFTER_HELP)]
    Torus(torus_cmd::Args),
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SYL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SYL_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let (name, result) = {
        match &cli.command {
            Command::Bubble(a) => ("bubble", Run::new("bubble", &cli.out, cli.json).and_then(|mut r| {
                let res = bubble_cmd::run(a, &mut r);
                r.finish(res)
            })),
            Command::Theta(a) => ("theta", Run::new("theta", &cli.out, cli.json).and_then(|mut r| {
                let res = theta_cmd::run(a, &mut r);
                r.finish(res)
            })),
            Command::Torus(a) => ("torus", Run::new("torus", &cli.out, cli.json).and_then(|mut r| {
                let res = torus_cmd::run(a, &mut r);
                r.finish(res)
            })),
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            // failure before the run directory existed
            e.report(name, cli.json);
            ExitCode::from(e.code)
        }
    }
}
