//! `engel`: geodesics, conjugate times and Maxwell bounds from the command line.
//!
//! Exit status: 0 success, 1 a verification failed, 2 usage error,
//! 3 numerical or I/O failure. Every failure writes one JSON line
//! `{"error": kind, "reason": text}` to standard error.

mod args;
mod report;
mod sample;
mod suites;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use engel::batch;
use engel::conj::{self, SearchMethod, SearchOptions};
use engel::expmap::{self, write_trajectory_csv};
use engel::pendulum::{energy, to_elliptic};
use engel::{Covector, EngelError, Stratum};
use log::{info, LevelFilter};
use serde::Serialize;

use args::{check_grid, check_t_end, check_tol, Cli, Command, Format, LambdaArgs, OutputArgs, Suite};
use report::*;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) | Failure::Io(_) => 3,
        }
    }

    fn line(&self) -> String {
        let (kind, reason) = match self {
            Failure::Usage(r) => ("usage", r),
            Failure::Verification(r) => ("verification", r),
            Failure::Numerical(r) => ("numerical", r),
            Failure::Io(r) => ("io", r),
        };
        serde_json::json!({ "error": kind, "reason": reason }).to_string()
    }
}

impl From<EngelError> for Failure {
    fn from(e: EngelError) -> Self {
        match e {
            EngelError::Domain(_) | EngelError::Stratum(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn init_logging() {
    let raw = std::env::var("ENGEL_LOG").unwrap_or_default();
    let level = match raw.as_str() {
        "quiet" => LevelFilter::Off,
        "info" => LevelFilter::Info,
        "debug" => LevelFilter::Debug,
        _ => LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    if !matches!(raw.as_str(), "" | "quiet" | "info" | "debug") {
        log::warn!("ENGEL_LOG={raw} not recognized; expected quiet, info or debug");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let reason = rendered.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", Failure::Usage(reason).line());
            return ExitCode::from(2);
        }
    };
    init_logging();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Geodesic { lambda, t_end, samples, tol, output } => geodesic(&lambda, t_end, samples, tol, &output),
        Command::Classify { lambda, output } => classify(&lambda, &output),
        Command::Conjugate { lambda, t_end, tol, grid, output } => conjugate(&lambda, t_end, tol, grid, &output),
        Command::Maxwell { lambda, output } => maxwell(&lambda, &output),
        Command::Verify { suite, samples, seed, grid, output } => verify(suite, samples, seed, grid, &output),
        Command::Sweep { stratum, k_from, k_to, n, phi, tol, grid, output } => {
            sweep(stratum, k_from, k_to, n, phi, tol, grid, &output)
        }
        Command::Xval { lambda, t_end, n, output } => xval(&lambda, t_end, n, &output),
    }
}

#[derive(Serialize)]
struct PointJson {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    v: f64,
    theta: f64,
    c: f64,
}

fn geodesic(lambda: &LambdaArgs, t_end: f64, samples: usize, tol: f64, output: &OutputArgs) -> Result<(), Failure> {
    let lam = lambda.covector()?;
    check_t_end(t_end)?;
    check_tol(tol)?;
    if samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let times: Vec<f64> = (0..=samples).map(|i| t_end * i as f64 / samples as f64).collect();
    let pts = expmap::trajectory(&lam, &times, tol)?;
    let speed = pts.iter().map(|p| p.speed_residual()).fold(0.0, f64::max);
    info!("unit-speed residual {speed:e}, energy drift {:e}", expmap::energy_drift(&lam, &pts));
    let rows: Vec<PointJson> = pts
        .iter()
        .map(|p| PointJson { t: p.t, x: p.q.x, y: p.q.y, z: p.q.z, v: p.q.v, theta: p.theta, c: p.c })
        .collect();
    render(output, Format::Csv, &rows, || {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &pts).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    })
}

fn classify(lambda: &LambdaArgs, output: &OutputArgs) -> Result<(), Failure> {
    let lam = lambda.covector()?;
    let st = lam.stratum();
    let elliptic = if st.is_elliptic() && lam.alpha > 0.0 {
        let ec = to_elliptic(&lam)?;
        Some(EllipticJson { phi: ec.phi, k: ec.k, alpha: ec.alpha, sign: ec.sign })
    } else {
        None
    };
    let rep = ClassifyReport { lambda: (&lam).into(), stratum: st.to_string(), energy: energy(&lam), elliptic };
    render(output, Format::Json, &rep, || {
        let (phi, k) = elliptic.map_or((String::new(), String::new()), |e| (num(e.phi), num(e.k)));
        csv(
            &["theta", "c", "alpha", "stratum", "energy", "phi", "k"],
            [vec![num(lam.theta), num(lam.c), num(lam.alpha), st.to_string(), num(rep.energy), phi, k]],
        )
    })
}

fn maxwell(lambda: &LambdaArgs, output: &OutputArgs) -> Result<(), Failure> {
    let lam = lambda.covector()?;
    let st = lam.stratum();
    let b = conj::time_bounds(&lam)?;
    let k = if st.is_elliptic() {
        Some(to_elliptic(&engel::pendulum::with_nonnegative_alpha(&lam).0)?.k)
    } else {
        None
    };
    let p_z1 = match (st, k) {
        (Stratum::C1, Some(k)) => Some(conj::p_z1(k)?),
        _ => None,
    };
    let rep = MaxwellReport { lambda: (&lam).into(), stratum: st.to_string(), t_max1: b.t_max1, t_max2: b.t_max2, k, p_z1 };
    render(output, Format::Json, &rep, || {
        csv(
            &["theta", "c", "alpha", "stratum", "t_max1", "t_max2"],
            [vec![num(lam.theta), num(lam.c), num(lam.alpha), st.to_string(), num(b.t_max1), num(b.t_max2)]],
        )
    })
}

/// Why the detected times contradict the bounds, if they do.
fn bound_violation(st: Stratum, b: &conj::TimeBounds, res: &conj::ConjugateSearchResult) -> Option<String> {
    let tol = if b.t_max1.is_finite() { 1e-6 * b.t_max1 } else { 0.0 };
    match res.first() {
        Some(t) if t < b.t_max1 - tol => Some(format!("first conjugate time {t} below t_max1 {}", b.t_max1)),
        Some(t) if st.is_elliptic() && t > b.t_max2 + tol => {
            Some(format!("first conjugate time {t} above t_max2 {}", b.t_max2))
        }
        None if st.is_elliptic() && res.ceiling >= b.t_max2 + tol => {
            Some(format!("no conjugate time up to t_max2 {}", b.t_max2))
        }
        _ => None,
    }
}

fn method_name(m: SearchMethod) -> &'static str {
    match m {
        SearchMethod::ClosedKernel => "closed_kernel",
        SearchMethod::Separatrix => "separatrix",
        SearchMethod::NumericalDeterminant => "numerical_determinant",
    }
}

fn status_str(pass: bool) -> &'static str {
    if pass {
        conj::Status::Pass.as_str()
    } else {
        conj::Status::Fail.as_str()
    }
}

fn conjugate(
    lambda: &LambdaArgs,
    t_end: Option<f64>,
    tol: f64,
    grid: usize,
    output: &OutputArgs,
) -> Result<(), Failure> {
    let lam = lambda.covector()?;
    check_tol(tol)?;
    check_grid(grid)?;
    let ceiling = match t_end {
        Some(t) => {
            check_t_end(t)?;
            t
        }
        None => conj::default_ceiling(&lam)?,
    };
    let st = lam.stratum();
    let b = conj::time_bounds(&lam)?;
    let opts = SearchOptions { grid, tol, force_numerical: false };
    let res = conj::conjugate_times(&lam, ceiling, &opts)?;
    let reason = bound_violation(st, &b, &res);
    let status = status_str(reason.is_none());
    let rep = ConjugateReport {
        lambda: (&lam).into(),
        stratum: st.to_string(),
        t_max1: b.t_max1,
        t_max2: b.t_max2,
        conj_times: res.times.clone(),
        status,
        method: method_name(res.method),
        ceiling,
        flagged: res.flagged.clone(),
        identically_degenerate: res.identically_degenerate,
        reason: reason.clone(),
    };
    render(output, Format::Json, &rep, || {
        let head = || vec![num(lam.theta), num(lam.c), num(lam.alpha), st.to_string(), num(b.t_max1), num(b.t_max2)];
        let mut rows: Vec<Vec<String>> = res
            .times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut r = head();
                r.extend([(i + 1).to_string(), num(t), status.to_string()]);
                r
            })
            .collect();
        if rows.is_empty() {
            let mut r = head();
            r.extend([String::new(), String::new(), status.to_string()]);
            rows.push(r);
        }
        csv(&["theta", "c", "alpha", "stratum", "t_max1", "t_max2", "index", "t_conj", "status"], rows)
    })?;
    match reason {
        Some(r) => Err(Failure::Verification(r)),
        None => Ok(()),
    }
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Lemmas => "lemmas",
        Suite::Symmetry => "symmetry",
        Suite::Sandwich => "sandwich",
        Suite::Xval => "xval",
        Suite::All => "all",
    }
}

fn verify(suite: Suite, samples: usize, seed: u64, grid: usize, output: &OutputArgs) -> Result<(), Failure> {
    check_grid(grid)?;
    if samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let mut records = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Lemmas {
        records.extend(suites::lemmas(grid)?);
    }
    if all || suite == Suite::Symmetry {
        records.extend(suites::symmetry(seed)?);
    }
    if all || suite == Suite::Sandwich {
        records.extend(suites::sandwich(samples, seed)?);
    }
    if all || suite == Suite::Xval {
        records.extend(suites::xval(seed)?);
    }
    let failed: Vec<&str> = records.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let rep = VerifyReport { suite: suite_name(suite), seed, status: status_str(failed.is_empty()), records: records.clone() };
    render(output, Format::Json, &rep, || {
        csv(
            &["suite", "name", "size", "min_margin", "violations", "pass"],
            records.iter().map(|c| {
                vec![
                    c.suite.to_string(),
                    format!("\"{}\"", c.name),
                    c.size.to_string(),
                    c.min_margin.map(num).unwrap_or_default(),
                    c.violations.map(|v| v.to_string()).unwrap_or_default(),
                    c.pass.to_string(),
                ]
            }),
        )
    })?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} of {} checks failed: {}", failed.len(), records.len(), failed.join("; "))))
    }
}

#[derive(Serialize)]
struct SweepRowJson {
    k: f64,
    t_max1: f64,
    t_max2: f64,
    t_conj1: f64,
}

#[derive(Serialize)]
struct SweepJson {
    stratum: String,
    phi: f64,
    rows: Vec<SweepRowJson>,
    status: &'static str,
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    stratum: Stratum,
    k_from: f64,
    k_to: f64,
    n: usize,
    phi: f64,
    tol: f64,
    grid: usize,
    output: &OutputArgs,
) -> Result<(), Failure> {
    if !stratum.is_elliptic() {
        return Err(Failure::Usage(format!("sweep needs --stratum C1 or C2, got {stratum}")));
    }
    if !(k_from > 0.0 && k_from < 1.0 && k_to > 0.0 && k_to < 1.0) {
        return Err(Failure::Usage(format!("moduli must lie in (0, 1), got {k_from} and {k_to}")));
    }
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    if !phi.is_finite() {
        return Err(Failure::Usage("--phi must be finite".into()));
    }
    check_tol(tol)?;
    check_grid(grid)?;
    let ks: Vec<f64> = if n == 1 {
        vec![k_from]
    } else {
        (0..n).map(|i| k_from + (k_to - k_from) * i as f64 / (n - 1) as f64).collect()
    };
    let opts = SearchOptions { grid, tol, force_numerical: false };
    let rows = conj::sweep(stratum, &ks, phi, &opts)
        .into_iter()
        .collect::<engel::Result<Vec<_>>>()?;
    let bad: Vec<f64> = rows
        .iter()
        .filter(|r| {
            let tol = 1e-6 * r.t_max1;
            !(r.t_conj1 >= r.t_max1 - tol && r.t_conj1 <= r.t_max2 + tol)
        })
        .map(|r| r.k)
        .collect();
    let rep = SweepJson {
        stratum: stratum.to_string(),
        phi,
        rows: rows.iter().map(|r| SweepRowJson { k: r.k, t_max1: r.t_max1, t_max2: r.t_max2, t_conj1: r.t_conj1 }).collect(),
        status: status_str(bad.is_empty()),
    };
    render(output, Format::Csv, &rep, || {
        csv(
            &["k", "t_max1", "t_max2", "t_conj1"],
            rows.iter().map(|r| vec![num(r.k), num(r.t_max1), num(r.t_max2), num(r.t_conj1)]),
        )
    })?;
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("first conjugate time outside [t_max1, t_max2] at k = {bad:?}")))
    }
}

fn xval(lambda: &LambdaArgs, t_end: Option<f64>, n: usize, output: &OutputArgs) -> Result<(), Failure> {
    let lam: Covector = lambda.covector()?;
    let st = lam.stratum();
    if !st.is_elliptic() {
        return Err(Failure::Usage(format!("xval needs a covector in C1 or C2, got {st}")));
    }
    if n < 2 {
        return Err(Failure::Usage("--n must be at least 2".into()));
    }
    let horizon = match t_end {
        Some(t) => {
            check_t_end(t)?;
            t
        }
        None => 1.05 * conj::t_max2(&lam)?,
    };
    let rep = conj::cross_validate(&lam, &batch::interior_grid(0.0, horizon, n), horizon, 1e-6)?;
    let pass = rep.spread <= 1e-4 && rep.zero_sets_match;
    info!("ratio spread {:e} over {} rows, {} skipped", rep.spread, rep.rows.len() - rep.skipped, rep.skipped);
    let ec = rep.coords;
    let out = XvalJson {
        lambda: (&lam).into(),
        stratum: st.to_string(),
        elliptic: EllipticJson { phi: ec.phi, k: ec.k, alpha: ec.alpha, sign: ec.sign },
        rows: rep
            .rows
            .iter()
            .map(|r| XvalRowJson { t: r.t, det: r.det, rj1: r.rj1, ratio: r.ratio, used: r.used })
            .collect(),
        spread: rep.spread,
        skipped: rep.skipped,
        skipped_reason: "kernel or determinant sign undetermined, kernel error bound above 1e-3 of its value, \
                         or magnitude below 1e-6 of the largest sample",
        kernel_roots: rep.kernel_roots.clone(),
        det_roots: rep.det_roots.clone(),
        zero_sets_match: rep.zero_sets_match,
        status: status_str(pass),
    };
    render(output, Format::Json, &out, || {
        csv(
            &["t", "det", "rj1", "ratio", "used"],
            rep.rows.iter().map(|r| vec![num(r.t), num(r.det), num(r.rj1), num(r.ratio), r.used.to_string()]),
        )
    })?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "ratio spread {:e} (limit 1e-4), zero sets match: {}",
            rep.spread, rep.zero_sets_match
        )))
    }
}
