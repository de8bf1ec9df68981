//! Command-line front end: sampling, exact tables, enumeration tables,
//! verification suites, and profile/Psi sweeps. Exit codes: 0 all
//! checks pass, 1 a verification check failed, 2 usage or input error.

use clap::{Args, Parser, Subcommand};
use gwtree::labels::{
    gamma, normalized_profile, psi_sweep, vertical_profile, DisplacementDist,
};
use gwtree::mc::replicate_rng;
use gwtree::offspring::OffspringDist;
use gwtree::oracle::exact_conditioned_expectation;
use gwtree::report::{fmt_f64, Format, Report};
use gwtree::series::GwSeries;
use gwtree::stats::{level_profile, pair_profile};
use gwtree::trees::sample_conditioned;
use gwtree::verify::{run_suite, VerifyConfig, SUITES};
use gwtree::{Error, Result};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gwt",
    about = "Conditioned Galton-Watson trees: sampling, exact statistics, verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Offspring law: geometric | poisson | binary | d-ary:D | custom:p0,p1,...
    #[arg(long, default_value = "geometric")]
    offspring: String,
    /// Edge displacement law: pm1 | uniform3 | custom:v1:w1,v2:w2,...
    #[arg(long, default_value = "uniform3")]
    eta: String,
    /// Master seed; fully determines all randomized output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample conditioned trees; one preorder outdegree sequence per row.
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        /// Tree size.
        #[arg(long)]
        n: usize,
        /// Number of trees.
        #[arg(long, default_value_t = 1)]
        reps: u64,
    },
    /// Exact conditioned means from the series engine.
    Exact {
        #[command(flatten)]
        common: CommonArgs,
        /// Tree size.
        #[arg(long)]
        n: usize,
        /// Emit E P_k rows (default when no table is selected).
        #[arg(long)]
        pk: bool,
        /// Emit E Z_k rows.
        #[arg(long)]
        zk: bool,
        /// Emit E Y_{l,m} rows.
        #[arg(long)]
        ylm: bool,
        /// Largest k (defaults to n-1).
        #[arg(long)]
        k: Option<usize>,
        /// Row cap for the Y table.
        #[arg(long, default_value_t = 8)]
        lmax: usize,
        /// Column cap for the Y table.
        #[arg(long, default_value_t = 8)]
        mmax: usize,
    },
    /// The same tables by exhaustive enumeration (small n only).
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Tree size (enumeration guard applies).
        #[arg(long)]
        n: usize,
        /// Row cap for the Y table.
        #[arg(long, default_value_t = 8)]
        lmax: usize,
        /// Column cap for the Y table.
        #[arg(long, default_value_t = 8)]
        mmax: usize,
    },
    /// Run a named verification suite.
    Verify {
        /// Suite name.
        #[arg(value_parser = SUITES.to_vec())]
        suite: String,
        #[command(flatten)]
        common: CommonArgs,
        /// Size parameter (suite-specific default).
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated size sweep.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Depth/distance parameter.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long)]
        mmax: Option<usize>,
        /// Monte Carlo replicates (suite-specific default).
        #[arg(long)]
        reps: Option<u64>,
        /// Domain opening angle.
        #[arg(long, default_value_t = PI / 8.0)]
        beta: f64,
        /// Domain radius excess.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Grid point count.
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Vertical profiles: histogram, normalized curve, or a Psi sweep.
    Profile {
        #[command(flatten)]
        common: CommonArgs,
        /// Tree size.
        #[arg(long)]
        n: usize,
        /// Emit the normalized profile on an x-grid instead of counts.
        #[arg(long)]
        normalized: bool,
        /// Emit a Psi(n,t) sweep over a t-grid in [-pi, pi].
        #[arg(long)]
        psi: bool,
        /// Monte Carlo replicates (Psi sweep only).
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        /// Grid point count (x-grid or t-grid).
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
}

fn common_setup(common: &CommonArgs) -> Result<(OffspringDist, DisplacementDist, Format)> {
    Ok((
        OffspringDist::from_spec(&common.offspring)?,
        DisplacementDist::from_spec(&common.eta)?,
        common.format.parse()?,
    ))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Sample { common, n, reps } => {
            let (dist, _, format) = common_setup(&common)?;
            let mut report = Report::new(
                "sampled conditioned trees (preorder outdegrees)",
                &[
                    ("offspring", dist.spec().to_string()),
                    ("n", n.to_string()),
                    ("seed", common.seed.to_string()),
                ],
            );
            report.columns(&["tree", "degrees"]);
            for rep in 0..reps {
                let mut rng = replicate_rng(common.seed, rep);
                let tree = sample_conditioned(&dist, n, &mut rng)?;
                let degs: Vec<String> = tree.degrees().iter().map(|d| d.to_string()).collect();
                report.push_row(vec![rep.to_string(), degs.join(" ")]);
            }
            report.write(common.out.as_deref(), format)?;
            Ok(true)
        }
        Cmd::Exact {
            common,
            n,
            pk,
            zk,
            ylm,
            k,
            lmax,
            mmax,
        } => {
            let (dist, _, format) = common_setup(&common)?;
            let (pk, zk, ylm) = if pk || zk || ylm {
                (pk, zk, ylm)
            } else {
                (true, false, false)
            };
            let kmax = k.unwrap_or(n.saturating_sub(1)).min(n.saturating_sub(1));
            let engine = GwSeries::cached(&dist, n);
            let mut report = Report::new(
                "exact conditioned means",
                &[
                    ("offspring", dist.spec().to_string()),
                    ("n", n.to_string()),
                ],
            );
            report.columns(&["stat", "n", "k", "m", "value"]);
            if zk {
                for k in 0..=kmax {
                    let v = engine.mean_z(n, k)?;
                    report.push_row(vec![
                        "Z".into(),
                        n.to_string(),
                        k.to_string(),
                        String::new(),
                        fmt_f64(v),
                    ]);
                }
            }
            if pk {
                for k in 1..=kmax.max(1) {
                    let v = engine.mean_p(n, k)?;
                    report.push_row(vec![
                        "P".into(),
                        n.to_string(),
                        k.to_string(),
                        String::new(),
                        fmt_f64(v),
                    ]);
                }
            }
            if ylm {
                for l in 0..=lmax.min(n - 1) {
                    for m in 0..=mmax.min(n - 1) {
                        let v = engine.mean_y(n, l, m)?;
                        report.push_row(vec![
                            "Y".into(),
                            n.to_string(),
                            l.to_string(),
                            m.to_string(),
                            fmt_f64(v),
                        ]);
                    }
                }
            }
            report.write(common.out.as_deref(), format)?;
            Ok(true)
        }
        Cmd::Oracle {
            common,
            n,
            lmax,
            mmax,
        } => {
            let (dist, _, format) = common_setup(&common)?;
            let mut report = Report::new(
                "enumeration conditioned means",
                &[
                    ("offspring", dist.spec().to_string()),
                    ("n", n.to_string()),
                ],
            );
            report.columns(&["stat", "n", "k", "m", "value"]);
            let z = exact_conditioned_expectation(&dist, n, |t| {
                level_profile(t).z.iter().map(|&c| c as f64).collect()
            })?;
            for (k, v) in z.iter().enumerate() {
                report.push_row(vec![
                    "Z".into(),
                    n.to_string(),
                    k.to_string(),
                    String::new(),
                    fmt_f64(*v),
                ]);
            }
            let p = exact_conditioned_expectation(&dist, n, |t| {
                pair_profile(t, 0, 0).p.iter().map(|&c| c as f64).collect()
            })?;
            for (k, v) in p.iter().enumerate().skip(1) {
                report.push_row(vec![
                    "P".into(),
                    n.to_string(),
                    k.to_string(),
                    String::new(),
                    fmt_f64(*v),
                ]);
            }
            for l in 0..=lmax.min(n - 1) {
                let y = exact_conditioned_expectation(&dist, n, |t| {
                    pair_profile(t, lmax, mmax).y[l]
                        .iter()
                        .map(|&c| c as f64)
                        .collect()
                })?;
                for m in 0..=mmax.min(n - 1) {
                    report.push_row(vec![
                        "Y".into(),
                        n.to_string(),
                        l.to_string(),
                        m.to_string(),
                        fmt_f64(y.get(m).copied().unwrap_or(0.0)),
                    ]);
                }
            }
            report.write(common.out.as_deref(), format)?;
            Ok(true)
        }
        Cmd::Verify {
            suite,
            common,
            n,
            n_list,
            k,
            lmax,
            mmax,
            reps,
            beta,
            delta,
            grid,
        } => {
            let (dist, eta, format) = common_setup(&common)?;
            let mut cfg = VerifyConfig::new(dist, eta);
            cfg.n = n;
            cfg.n_list = n_list;
            cfg.k = k;
            cfg.lmax = lmax;
            cfg.mmax = mmax;
            cfg.reps = reps;
            cfg.seed = common.seed;
            cfg.beta = beta;
            cfg.delta = delta;
            cfg.grid = grid;
            let report = run_suite(&suite, &cfg)?;
            for c in &report.checks {
                if c.passed {
                    eprintln!(
                        "PASS {}: {} ({} <= {})",
                        report.suite,
                        c.name,
                        fmt_f64(c.observed),
                        fmt_f64(c.bound)
                    );
                } else {
                    eprintln!(
                        "FAIL {}: {} (observed {}, bound {}, anchor {})",
                        report.suite,
                        c.name,
                        fmt_f64(c.observed),
                        fmt_f64(c.bound),
                        c.anchor
                    );
                }
            }
            report.table.write(common.out.as_deref(), format)?;
            Ok(report.passed())
        }
        Cmd::Profile {
            common,
            n,
            normalized,
            psi,
            reps,
            grid,
        } => {
            let (dist, eta, format) = common_setup(&common)?;
            if psi {
                if grid < 2 {
                    return Err(Error::InvalidArgument("psi sweep needs --grid >= 2".into()));
                }
                let tgrid: Vec<f64> = (0..grid)
                    .map(|i| -PI + 2.0 * PI * i as f64 / (grid - 1) as f64)
                    .collect();
                let table = psi_sweep(&dist, &eta, n, &tgrid, reps, common.seed)?;
                let mut report = Report::new(
                    "label characteristic-function sweep",
                    &[
                        ("offspring", dist.spec().to_string()),
                        ("eta", eta.spec().to_string()),
                        ("n", n.to_string()),
                        ("reps", reps.to_string()),
                        ("seed", common.seed.to_string()),
                    ],
                );
                report.columns(&["n", "t", "psi", "stderr"]);
                for (i, &t) in tgrid.iter().enumerate() {
                    report.push_row(vec![
                        n.to_string(),
                        fmt_f64(t),
                        fmt_f64(table.mean[i]),
                        fmt_f64(table.stderr[i]),
                    ]);
                }
                report.write(common.out.as_deref(), format)?;
                return Ok(true);
            }
            let mut rng = replicate_rng(common.seed, 0);
            let tree = sample_conditioned(&dist, n, &mut rng)?;
            let prof = vertical_profile(&tree, &eta, &mut rng);
            let config = [
                ("offspring", dist.spec().to_string()),
                ("eta", eta.spec().to_string()),
                ("n", n.to_string()),
                ("seed", common.seed.to_string()),
            ];
            let report = if normalized {
                let g = gamma(&dist, &eta);
                let mut r = Report::new("normalized vertical profile", &config);
                r.columns(&["x", "value"]);
                let xgrid: Vec<f64> = (0..grid.max(2))
                    .map(|i| -3.0 + 6.0 * i as f64 / (grid.max(2) - 1) as f64)
                    .collect();
                for (x, v) in xgrid.iter().zip(normalized_profile(&prof, g, &xgrid)) {
                    r.push_row(vec![fmt_f64(*x), fmt_f64(v)]);
                }
                r
            } else {
                let mut r = Report::new("vertical profile histogram", &config);
                r.columns(&["j", "count"]);
                for (j, c) in prof.counts() {
                    r.push_row(vec![j.to_string(), c.to_string()]);
                }
                r
            };
            report.write(common.out.as_deref(), format)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
