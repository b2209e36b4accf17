//! `gbound`: certification, form evaluation, tunnelling, and ultra-quantum
//! workflows with reproducible machine-readable output.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use gbound_core::forms::{self, AnalyzeOpts};
use gbound_core::physics::{self, BarrierParams};
use gbound_core::rescaling::capacity;
use gbound_core::ultraquantum::{self, UltraOpts};
use gbound_core::{CMat, Error};

mod flatten;
mod parse;

#[derive(Parser)]
#[command(name = "gbound", version, about = "Grothendieck bound formalism toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// RNG seed echoed into every report.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Optimizer restarts.
    #[arg(long, global = true, default_value_t = 64)]
    restarts: usize,

    /// Membership and flag tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a matrix: g estimate, g', window, optional classification.
    Certify {
        /// Matrix file: {"rows": d, "cols": d, "data": [[re, im], ..]}.
        matrix: String,
        /// Classify lambda * theta.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Evaluate the classical and/or quantum quadratic forms.
    Forms {
        /// Matrix file for theta.
        #[arg(long)]
        theta: String,
        /// Matrix file for V (quantum form).
        #[arg(long, requires = "w")]
        v: Option<String>,
        /// Matrix file for W (quantum form).
        #[arg(long, requires = "v")]
        w: Option<String>,
        /// Comma-separated unit-disc coefficients, e.g. "1,-i,0.5+0.5i".
        #[arg(long, requires = "b", allow_hyphen_values = true)]
        a: Option<String>,
        /// Coefficients for the second index.
        #[arg(long, requires = "a", allow_hyphen_values = true)]
        b: Option<String>,
    },
    /// Square-barrier amplitudes, projector blocks, and the exDC window.
    Tunnel {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        k: f64,
        #[arg(long = "V0")]
        v0: f64,
        #[arg(long)]
        a: f64,
        /// Analyze the 2x2 tunnelling template with this real B instead of |B|.
        #[arg(long = "exdc-B")]
        exdc_b: Option<f64>,
    },
    /// Ultra-quantum window for Pi(z) with z = exp(i phase).
    Ultra {
        /// Phase of z in radians.
        #[arg(long, allow_hyphen_values = true)]
        phase: f64,
        /// Evaluate Q(xi Pi(z)) at this coefficient.
        #[arg(long)]
        xi: Option<f64>,
    },
}

#[derive(Serialize)]
struct FormsOut {
    classical: Option<f64>,
    quantum: Option<f64>,
    seed: u64,
    restarts: usize,
}

#[derive(Serialize)]
struct TunnelOut {
    b_re: f64,
    b_im: f64,
    b_abs: f64,
    c_re: f64,
    c_im: f64,
    c_abs: f64,
    flux: f64,
    xi_l: f64,
    xi_r: f64,
    w_capacity: f64,
    exdc: Option<ExdcOut>,
    seed: u64,
    restarts: usize,
}

#[derive(Serialize)]
struct ExdcOut {
    b: f64,
    g: f64,
    g_prime: f64,
    window_lo: f64,
    window_hi: f64,
    window_empty: bool,
}

fn load_matrix(path: &str) -> Result<CMat, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {path}: {e}")))?;
    CMat::from_json(&text)
}

fn run(cli: &Cli) -> Result<String, Error> {
    match &cli.command {
        Command::Certify { matrix, lambda } => {
            let theta = load_matrix(matrix)?;
            let opts = AnalyzeOpts {
                restarts: cli.restarts,
                seed: cli.seed,
                lambda: *lambda,
                tol: cli.tol,
                ..Default::default()
            };
            let report = forms::analyze(&theta, &opts)?;
            render(cli.format, &report)
        }
        Command::Forms { theta, v, w, a, b } => {
            let theta = load_matrix(theta)?;
            if v.is_none() && a.is_none() {
                return Err(Error::InvalidInput(
                    "forms needs either --v/--w or --a/--b".into(),
                ));
            }
            let quantum = match (v, w) {
                (Some(v), Some(w)) => {
                    Some(forms::quantum_form(&theta, &load_matrix(v)?, &load_matrix(w)?)?)
                }
                _ => None,
            };
            let classical = match (a, b) {
                (Some(a), Some(b)) => {
                    let a = parse::complex_list(a)?;
                    let b = parse::complex_list(b)?;
                    Some(forms::classical_form(&theta, &a, &b)?)
                }
                _ => None,
            };
            render(
                cli.format,
                &FormsOut {
                    classical,
                    quantum,
                    seed: cli.seed,
                    restarts: cli.restarts,
                },
            )
        }
        Command::Tunnel { m, k, v0, a, exdc_b } => {
            let params = BarrierParams::new(*m, *k, *v0, *a)?;
            let amps = physics::scattering_amplitudes(&params)?;
            let blocks = physics::tunnel_blocks_from_amps(&params, &amps)?;
            let (_, _, w) = physics::tunnel_states(&params)?;
            let exdc_b = exdc_b.unwrap_or_else(|| amps.b().norm());
            let exdc = physics::exdc_report(exdc_b, m / k)?;
            render(
                cli.format,
                &TunnelOut {
                    b_re: amps.b_re,
                    b_im: amps.b_im,
                    b_abs: amps.b().norm(),
                    c_re: amps.c_re,
                    c_im: amps.c_im,
                    c_abs: amps.c().norm(),
                    flux: amps.b().norm_sqr() + amps.c().norm_sqr(),
                    xi_l: blocks.xi_l,
                    xi_r: blocks.xi_r,
                    w_capacity: capacity(&w),
                    exdc: Some(ExdcOut {
                        b: exdc.b,
                        g: exdc.g,
                        g_prime: exdc.g_prime,
                        window_lo: exdc.window_lo,
                        window_hi: exdc.window_hi,
                        window_empty: exdc.window_empty,
                    }),
                    seed: cli.seed,
                    restarts: cli.restarts,
                },
            )
        }
        Command::Ultra { phase, xi } => {
            let z = C64::from_polar(1.0, *phase);
            let opts = UltraOpts {
                restarts: cli.restarts.max(200),
                seed: cli.seed,
                xi_l: *xi,
                ..Default::default()
            };
            let report = ultraquantum::ultra_window(z, &opts)?;
            render(cli.format, &report)
        }
    }
}

fn render<T: Serialize>(format: Format, value: &T) -> Result<String, Error> {
    let json = serde_json::to_value(value)
        .map_err(|e| Error::Numerical(format!("serialization: {e}")))?;
    flatten::reject_non_finite(&json)?;
    match format {
        Format::Json => serde_json::to_string(&json)
            .map_err(|e| Error::Numerical(format!("serialization: {e}"))),
        Format::Csv => Ok(flatten::to_csv(&json)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            println!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = match e {
                Error::Numerical(_) => "numerical",
                _ => "validation",
            };
            eprintln!("error: {kind}: {e}");
            match kind {
                "numerical" => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
