use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use engel::expmap::DEFAULT_TOL;
use engel::pendulum::{from_elliptic, EllipticCoords};
use engel::{Covector, Stratum};

use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "engel", version, about = "Geodesics, conjugate times and Maxwell bounds on the Engel group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an extremal trajectory on a uniform time grid.
    Geodesic {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[arg(long)]
        t_end: f64,
        /// Number of sampled intervals; the grid has `samples + 1` points.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Report the stratum, energy and elliptic coordinates of a covector.
    Classify {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search conjugate times and check them against the Maxwell bounds.
    Conjugate {
        #[command(flatten)]
        lambda: LambdaArgs,
        /// Search ceiling; defaults to a margin past the upper bound.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = engel::conj::DEFAULT_GRID)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maxwell-time bounds of a covector.
    Maxwell {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run certificate suites and report one record per check.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Random covectors per stratum in the sandwich suite.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Points per lemma grid.
        #[arg(long, default_value_t = engel::jacobian_closed::certify::DEFAULT_GRID)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bounds and first conjugate time over a range of moduli at alpha = 1.
    Sweep {
        #[arg(long, value_parser = parse_stratum)]
        stratum: Stratum,
        #[arg(long)]
        k_from: f64,
        #[arg(long)]
        k_to: f64,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = engel::conj::DEFAULT_GRID)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the integrated determinant with the closed-form kernel.
    Xval {
        #[command(flatten)]
        lambda: LambdaArgs,
        /// Comparison horizon; defaults to 1.05 times the upper bound.
        #[arg(long)]
        t_end: Option<f64>,
        /// Number of comparison times.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// A covector either as `(θ, c, α)` or in elliptic coordinates.
#[derive(Debug, Clone, Args)]
pub struct LambdaArgs {
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["phi", "k"])]
    pub theta: Option<f64>,
    #[arg(long = "c", allow_negative_numbers = true, conflicts_with_all = ["phi", "k"])]
    pub c: Option<f64>,
    /// Defaults to 1 with elliptic coordinates.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Stratum of the elliptic coordinates, C1 (default) or C2.
    #[arg(long, value_parser = parse_stratum, requires = "phi")]
    pub stratum: Option<Stratum>,
    /// Rotation sense on C2, +1 (default) or -1.
    #[arg(long, allow_negative_numbers = true, requires = "phi")]
    pub sign: Option<f64>,
}

impl LambdaArgs {
    pub fn covector(&self) -> Result<Covector, Failure> {
        match (self.theta, self.c, self.phi, self.k) {
            (Some(theta), Some(c), None, None) => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Failure::Usage("--theta and --c need --alpha".into()))?;
                finite(&[theta, c, alpha])?;
                Ok(Covector::new(theta, c, alpha))
            }
            (None, None, Some(phi), Some(k)) => {
                let alpha = self.alpha.unwrap_or(1.0);
                finite(&[phi, k, alpha])?;
                let ec = match self.stratum.unwrap_or(Stratum::C1) {
                    Stratum::C1 if self.sign.is_some() => {
                        return Err(Failure::Usage("--sign applies to C2 only".into()))
                    }
                    Stratum::C1 => EllipticCoords::c1(phi, k, alpha),
                    Stratum::C2 => EllipticCoords::c2(phi, k, alpha, self.sign.unwrap_or(1.0)),
                    other => {
                        return Err(Failure::Usage(format!("elliptic coordinates exist on C1 and C2, not {other}")))
                    }
                };
                Ok(from_elliptic(&ec)?)
            }
            _ => Err(Failure::Usage(
                "give the covector as --theta --c --alpha or as --phi --k [--stratum]".into(),
            )),
        }
    }
}

fn finite(vals: &[f64]) -> Result<(), Failure> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Failure::Usage("covector components must be finite".into()))
    }
}

fn parse_stratum(s: &str) -> Result<Stratum, String> {
    s.parse().map_err(|e: engel::EngelError| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemmas,
    Symmetry,
    Sandwich,
    Xval,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

pub fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--tol must be positive, got {tol}")))
    }
}

pub fn check_grid(grid: usize) -> Result<(), Failure> {
    if grid >= 16 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--grid must be at least 16, got {grid}")))
    }
}

pub fn check_t_end(t: f64) -> Result<(), Failure> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--t-end must be positive and finite, got {t}")))
    }
}
