//! The five subcommands. Each returns the process exit code for a completed
//! run; failures map to exit codes through [`CliError`].
//!
//! Human-readable reports go to standard error. The machine-readable
//! artifact, a certificate or an ensemble, goes to `--out` when given and to
//! standard output otherwise, so pipelines always see exactly one JSON
//! document on stdout.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use entwine_core::{
    avg_entanglement, build_cross_table, eof_2qubit, herm_eig, hermiticity_check, improve,
    optimal_decomposition_2qubit, tensor_product_ensemble, tol, DensityOperator, EofOpts,
    EofSearch, MinimizeOpts, TwoQubitState, Verdict,
};

use crate::driver;
use crate::formats::{self, CertificateFile, DensityFile, EnsembleFile};
use crate::CliError;

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Ensemble file to test.
    pub input: PathBuf,
    /// Write the certificate here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the added random starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random starts added to the deterministic start list.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Iteration cap per start.
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Violation threshold in bits: VIOLATED means gap < -tau_gap.
    #[arg(long, default_value_t = tol::TAU_GAP)]
    pub tau_gap: f64,
}

#[derive(Debug, Args)]
pub struct EofArgs {
    /// Density-matrix file with its split declared.
    pub input: PathBuf,
    /// Write the minimizing ensemble here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decomposition size to search; defaults to rank squared.
    #[arg(long)]
    pub m: Option<usize>,
    /// Seed for the added random starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random starts added to the deterministic one.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Iteration cap per start.
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct WoottersArgs {
    /// Two-qubit density-matrix file (dims [2, 2]).
    pub input: PathBuf,
    /// Write the optimal ensemble here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImproveArgs {
    /// Ensemble file the certificate refers to.
    pub input: PathBuf,
    /// Violation certificate produced by check on exactly this input.
    pub cert: PathBuf,
    /// Write the improved ensemble here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdditivityArgs {
    /// First ensemble file.
    pub input1: PathBuf,
    /// Second ensemble file.
    pub input2: PathBuf,
    /// Write the certificate here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the added random starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random starts added to the deterministic start list.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Iteration cap per start.
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Violation threshold in bits: VIOLATED means gap < -tau_gap.
    #[arg(long, default_value_t = tol::TAU_GAP)]
    pub tau_gap: f64,
}

fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::Violated => 3,
        Verdict::NoViolationFound => 0,
    }
}

fn minimize_opts(seed: u64, restarts: usize, max_iters: usize, tau_gap: f64) -> Result<MinimizeOpts, CliError> {
    if !(tau_gap >= 0.0) {
        return Err(CliError::Input(format!(
            "--tau-gap must be nonnegative, got {tau_gap}"
        )));
    }
    Ok(MinimizeOpts {
        restarts,
        max_iters,
        seed,
        tau_gap,
    })
}

/// Rank of a density operator, counting eigenvalues above the kernel cutoff.
fn rank(rho: &DensityOperator) -> usize {
    let eig = herm_eig(rho.matrix()).expect("density operators are Hermitian");
    let top = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let r = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > tol::EPS_KER * top)
        .count();
    r.max(1)
}

/// Gap-tests an ensemble file and writes the certificate.
pub fn cmd_check(args: &CheckArgs) -> Result<i32, CliError> {
    let bytes = formats::read_bytes(&args.input)?;
    let file: EnsembleFile = formats::parse_json(&bytes, "ensemble file")?;
    let ensemble = file.to_ensemble()?;
    let states = ensemble.normalized_states();
    let ct = build_cross_table(&states).map_err(CliError::input)?;
    let opts = minimize_opts(args.seed, args.restarts, args.max_iters, args.tau_gap)?;
    let residual = hermiticity_check(&ct);
    let cert = driver::run_gap(&ct, &opts)?;
    let artifact = CertificateFile::new(&cert, residual, args.seed, formats::digest(&bytes));
    formats::write_artifact(args.out.as_deref(), &formats::to_json(&artifact))?;
    eprintln!("verdict: {}", formats::verdict_label(cert.verdict));
    eprintln!("gap: {:e} bits (violation threshold {:e})", cert.gap, -opts.tau_gap);
    eprintln!("hermiticity residual: {residual:e}");
    eprintln!("starts: {}, seed: {}", cert.restarts_used, args.seed);
    Ok(verdict_exit(cert.verdict))
}

/// Minimizes average entanglement over decompositions of a density matrix
/// and writes the best ensemble found.
pub fn cmd_eof(args: &EofArgs) -> Result<i32, CliError> {
    let bytes = formats::read_bytes(&args.input)?;
    let file: DensityFile = formats::parse_json(&bytes, "density file")?;
    let rho = file.to_operator()?;
    let [dim_a, dim_b] = file.dims;
    let m = args.m.unwrap_or_else(|| {
        let r = rank(&rho);
        r * r
    });
    let opts = EofOpts {
        restarts: args.restarts,
        max_iters: args.max_iters,
        seed: args.seed,
        ..EofOpts::default()
    };
    let search = EofSearch::new(&rho, dim_a, dim_b, m, opts).map_err(CliError::input)?;
    let result = driver::run_eof(&search)?;
    let artifact = EnsembleFile::from_ensemble(&result.ensemble);
    formats::write_artifact(args.out.as_deref(), &formats::to_json(&artifact))?;
    eprintln!("eof upper bound: {} bits", result.value);
    eprintln!(
        "members: {}, iterations: {}, starts: {}, seed: {}",
        result.m, result.iterations, result.restarts, result.seed
    );
    Ok(0)
}

/// Closed-form two-qubit analysis; writes the constructed optimal ensemble.
pub fn cmd_wootters(args: &WoottersArgs) -> Result<i32, CliError> {
    let bytes = formats::read_bytes(&args.input)?;
    let file: DensityFile = formats::parse_json(&bytes, "density file")?;
    if file.dims != [2, 2] {
        return Err(CliError::Input(format!(
            "wootters needs a two-qubit split, got dims [{}, {}]",
            file.dims[0], file.dims[1]
        )));
    }
    let rho = file.to_operator()?;
    let state = TwoQubitState::new(rho.matrix().clone()).map_err(CliError::input)?;
    let dec = optimal_decomposition_2qubit(&state).map_err(CliError::compute)?;
    let artifact = EnsembleFile::from_ensemble(&dec.ensemble);
    formats::write_artifact(args.out.as_deref(), &formats::to_json(&artifact))?;
    eprintln!("concurrence: {}", dec.concurrence);
    eprintln!("entanglement of formation: {} bits", eof_2qubit(&state));
    eprintln!("members: {}", dec.ensemble.count());
    if let Some(eps) = dec.jitter {
        eprintln!("note: diagonal jittered by {eps:e} to escape a degenerate branch");
    }
    Ok(0)
}

/// Applies a violation certificate to its ensemble and writes the strictly
/// better decomposition it seeds.
pub fn cmd_improve(args: &ImproveArgs) -> Result<i32, CliError> {
    let bytes = formats::read_bytes(&args.input)?;
    let file: EnsembleFile = formats::parse_json(&bytes, "ensemble file")?;
    let ensemble = file.to_ensemble()?;
    let cert_bytes = formats::read_bytes(&args.cert)?;
    let cert_file: CertificateFile = formats::parse_json(&cert_bytes, "certificate file")?;
    let expected = formats::digest(&bytes);
    if cert_file.input_digest != expected {
        return Err(CliError::Input(format!(
            "certificate digest {} does not match input digest {expected}",
            cert_file.input_digest
        )));
    }
    let cert = cert_file.to_certificate()?;
    let before = avg_entanglement(&ensemble);
    let better = improve(&ensemble, &cert).map_err(CliError::compute)?;
    let after = avg_entanglement(&better);
    let artifact = EnsembleFile::from_ensemble(&better);
    formats::write_artifact(args.out.as_deref(), &formats::to_json(&artifact))?;
    eprintln!("average entanglement: {before:e} -> {after:e} bits");
    Ok(0)
}

/// Gap-tests the tensor product of two ensembles and writes the certificate.
pub fn cmd_additivity(args: &AdditivityArgs) -> Result<i32, CliError> {
    let bytes1 = formats::read_bytes(&args.input1)?;
    let file1: EnsembleFile = formats::parse_json(&bytes1, "first ensemble file")?;
    let e1 = file1.to_ensemble()?;
    let bytes2 = formats::read_bytes(&args.input2)?;
    let file2: EnsembleFile = formats::parse_json(&bytes2, "second ensemble file")?;
    let e2 = file2.to_ensemble()?;
    let opts = minimize_opts(args.seed, args.restarts, args.max_iters, args.tau_gap)?;

    let started = Instant::now();
    let product = tensor_product_ensemble(&e1, &e2);
    if product.count() == 0 {
        return Err(CliError::Input("product ensemble is empty".into()));
    }
    let states = product.normalized_states();
    let ct = build_cross_table(&states).map_err(CliError::input)?;
    let residual = hermiticity_check(&ct);
    let cert = driver::run_gap(&ct, &opts)?;
    let elapsed = started.elapsed();

    let mut digest_input = bytes1;
    digest_input.extend_from_slice(&bytes2);
    let artifact = CertificateFile::new(&cert, residual, args.seed, formats::digest(&digest_input));
    formats::write_artifact(args.out.as_deref(), &formats::to_json(&artifact))?;
    eprintln!("product members: {}", product.count());
    eprintln!("hermiticity residual: {residual:e}");
    eprintln!(
        "verdict: {}, gap: {:e} bits",
        formats::verdict_label(cert.verdict),
        cert.gap
    );
    eprintln!("elapsed: {:.2}s", elapsed.as_secs_f64());
    if cert.verdict == Verdict::Violated {
        eprintln!(
            "note: this contradicts additivity for the pair; double-check with \
             improve and eof on the product before trusting it"
        );
    }
    Ok(verdict_exit(cert.verdict))
}
