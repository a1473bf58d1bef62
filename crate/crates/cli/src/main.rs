//! `emfield` — scene-to-exposure-map pipeline over the field engine.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emfield_core::metrics::SsimMode;

use emfield_cli::commands::{
    cmd_baseline, cmd_incident, cmd_loss, cmd_metrics, cmd_reconstruct, cmd_solve,
    cmd_solve_batch, BaselineModel,
};
use emfield_cli::error::CliError;
use emfield_cli::images::Colormap;
use emfield_cli::selftest;

#[derive(Parser)]
#[command(
    name = "emfield",
    version,
    about = "2-D electromagnetic exposure mapping: incident fields, forward solves, \
             physics-loss reconstruction, exposure maps, baselines, and metrics",
    after_help = "Exit codes: 0 success, 1 validation error, 2 I/O error, \
                  3 numerical breakdown, 4 self-test failure.\n\
                  EMFIELD_THREADS caps the batch worker pool."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// SSIM statistics flavor exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SsimModeArg {
    /// Whole-map moments.
    Global,
    /// Mean over sliding 11x11 windows.
    Windowed,
}

impl From<SsimModeArg> for SsimMode {
    fn from(arg: SsimModeArg) -> Self {
        match arg {
            SsimModeArg::Global => SsimMode::Global,
            SsimModeArg::Windowed => SsimMode::Windowed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the transmitter's free-space field for a scene.
    Incident {
        /// Scene manifest file.
        manifest: PathBuf,
        /// Output directory.
        out: PathBuf,
        /// Heatmap color scheme.
        #[arg(long, value_enum, default_value_t = Colormap::Grayscale)]
        colormap: Colormap,
    },

    /// Solve the forward scattering problem and derive the exposure map.
    ///
    /// Single scene: `emfield solve <MANIFEST> <OUT>`. Batch:
    /// `emfield solve --manifest-dir <DIR> <OUT>` solves every *.txt
    /// manifest in DIR into per-scene subdirectories of OUT.
    Solve {
        /// Scene manifest file (omit when using --manifest-dir).
        #[arg(value_name = "MANIFEST")]
        manifest: Option<PathBuf>,
        /// Output directory (per-scene subdirectories in batch mode).
        #[arg(value_name = "OUT")]
        out: Option<PathBuf>,
        /// Process every *.txt manifest in this directory instead.
        #[arg(long, value_name = "DIR")]
        manifest_dir: Option<PathBuf>,
        /// Relative residual tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Iteration cap.
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
        /// Heatmap color scheme.
        #[arg(long, value_enum, default_value_t = Colormap::Grayscale)]
        colormap: Colormap,
    },

    /// Reconstruct the field by minimizing the physics losses.
    Reconstruct {
        /// Scene manifest file.
        manifest: PathBuf,
        /// Output directory.
        out: PathBuf,
        /// Weight of the propagation (Helmholtz residual) loss.
        #[arg(long, default_value_t = 0.5)]
        lambda_pde: f64,
        /// Weight of the coupling (integral-equation residual) loss.
        #[arg(long, default_value_t = 0.5)]
        lambda_vie: f64,
        /// Propagation coefficient in the residual stencil.
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        /// Sign of the propagation coefficient: +1 or -1.
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        pde_sign: f64,
        /// Iteration cap for the optimizer.
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        /// Heatmap color scheme.
        #[arg(long, value_enum, default_value_t = Colormap::Grayscale)]
        colormap: Colormap,
    },

    /// Evaluate the physics losses of a stored field against a scene.
    Loss {
        /// Scene manifest file.
        manifest: PathBuf,
        /// Portable grid file (c64) holding the field to score.
        field: PathBuf,
        /// Weight of the propagation loss in the composite.
        #[arg(long, default_value_t = 0.5)]
        lambda_pde: f64,
        /// Weight of the coupling loss in the composite.
        #[arg(long, default_value_t = 0.5)]
        lambda_vie: f64,
        /// Propagation coefficient in the residual stencil.
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        /// Sign of the propagation coefficient: +1 or -1.
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        pde_sign: f64,
        /// Also write the printed record to this file.
        #[arg(long)]
        record: Option<PathBuf>,
    },

    /// Compare a predicted map against a reference map.
    Metrics {
        /// Prediction: .png (normalized 8-bit) or portable f32 grid.
        pred: PathBuf,
        /// Reference: .png (normalized 8-bit) or portable f32 grid.
        truth: PathBuf,
        /// SSIM statistics flavor.
        #[arg(long, value_enum, default_value_t = SsimModeArg::Global)]
        ssim_mode: SsimModeArg,
        /// Also write the printed record to this file.
        #[arg(long)]
        record: Option<PathBuf>,
    },

    /// Evaluate a closed-form path-loss baseline over a scene.
    Baseline {
        /// Scene manifest file.
        manifest: PathBuf,
        /// Output directory.
        out: PathBuf,
        /// Which model to evaluate.
        #[arg(long, value_enum)]
        model: BaselineModel,
        /// Path-loss exponent (log-distance model).
        #[arg(long, default_value_t = 2.0)]
        n: f64,
        /// Reference loss in dB at the reference distance (log-distance).
        #[arg(long, default_value_t = 40.0)]
        pl0: f64,
        /// Reference distance in meters (log-distance).
        #[arg(long, default_value_t = 1.0)]
        d0: f64,
        /// Override the manifest's normalization window bottom (dB).
        #[arg(long, requires = "norm_max_db", allow_hyphen_values = true)]
        norm_min_db: Option<f64>,
        /// Override the manifest's normalization window top (dB).
        #[arg(long, requires = "norm_min_db", allow_hyphen_values = true)]
        norm_max_db: Option<f64>,
        /// Heatmap color scheme.
        #[arg(long, value_enum, default_value_t = Colormap::Grayscale)]
        colormap: Colormap,
    },

    /// Run the numerical self-test suite (the acceptance checks).
    Selftest {
        /// Side length of the randomized test instances.
        #[arg(long, default_value_t = 12)]
        size: usize,
        /// Seed for the randomized test instances.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn run(cli: Cli) -> emfield_cli::Result<()> {
    match cli.command {
        Command::Incident {
            manifest,
            out,
            colormap,
        } => cmd_incident(&manifest, &out, colormap),
        Command::Solve {
            manifest,
            out,
            manifest_dir,
            tol,
            max_iter,
            colormap,
        } => match (manifest, out, manifest_dir) {
            (Some(path), Some(out), None) => cmd_solve(&path, &out, tol, max_iter, colormap),
            // In batch mode the single positional is the output directory.
            (Some(out), None, Some(dir)) => cmd_solve_batch(&dir, &out, tol, max_iter, colormap),
            (_, _, Some(_)) => Err(CliError::invalid(
                "usage: emfield solve --manifest-dir <DIR> <OUT>",
            )),
            _ => Err(CliError::invalid(
                "usage: emfield solve <MANIFEST> <OUT>  (or --manifest-dir <DIR> <OUT>)",
            )),
        },
        Command::Reconstruct {
            manifest,
            out,
            lambda_pde,
            lambda_vie,
            beta,
            pde_sign,
            max_iters,
            colormap,
        } => cmd_reconstruct(
            &manifest, &out, lambda_pde, lambda_vie, beta, pde_sign, max_iters, colormap,
        ),
        Command::Loss {
            manifest,
            field,
            lambda_pde,
            lambda_vie,
            beta,
            pde_sign,
            record,
        } => cmd_loss(
            &manifest,
            &field,
            lambda_pde,
            lambda_vie,
            beta,
            pde_sign,
            record.as_deref(),
        ),
        Command::Metrics {
            pred,
            truth,
            ssim_mode,
            record,
        } => cmd_metrics(&pred, &truth, ssim_mode.into(), record.as_deref()),
        Command::Baseline {
            manifest,
            out,
            model,
            n,
            pl0,
            d0,
            norm_min_db,
            norm_max_db,
            colormap,
        } => {
            let window = norm_min_db.zip(norm_max_db);
            cmd_baseline(&manifest, &out, model, n, pl0, d0, window, colormap)
        }
        Command::Selftest { size, seed } => selftest::cmd_selftest(size, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; bad usage is a
            // validation failure (exit 1).
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
