//! Multistart execution on a capped worker pool.
//!
//! Start indices are split into contiguous chunks, one worker per chunk, and
//! chunk results are concatenated in chunk order, so the merged output is
//! identical for every worker count including one. `ENTWINE_THREADS` caps
//! the pool.

use std::env;
use std::thread;

use entwine_core::{
    certificate_from_minima, gap_start_points, minimize_gap_at, CrossTable, EofResult, EofSearch,
    GapCertificate, MinimizeOpts,
};

use crate::CliError;

fn parse_cap(s: &str) -> Option<usize> {
    s.trim().parse().ok().filter(|&n| n > 0)
}

/// Worker count for `total` independent starts: available parallelism,
/// capped by `ENTWINE_THREADS` when set, never more than `total`.
pub fn worker_count(total: usize) -> Result<usize, CliError> {
    let default = thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = match env::var("ENTWINE_THREADS") {
        Ok(s) => parse_cap(&s).ok_or_else(|| {
            CliError::Input(format!("ENTWINE_THREADS must be a positive integer, got {s:?}"))
        })?,
        Err(env::VarError::NotPresent) => usize::MAX,
        Err(env::VarError::NotUnicode(_)) => {
            return Err(CliError::Input("ENTWINE_THREADS is not valid UTF-8".into()))
        }
    };
    Ok(default.min(cap).clamp(1, total.max(1)))
}

/// Runs `run` on every index in `0..total`, returning results in index order
/// regardless of `workers`.
pub fn run_starts<T, F>(total: usize, workers: usize, run: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if total == 0 {
        return Vec::new();
    }
    let workers = workers.clamp(1, total);
    if workers == 1 {
        return (0..total).map(run).collect();
    }
    let chunk = total.div_ceil(workers);
    let mut merged = Vec::with_capacity(total);
    thread::scope(|scope| {
        let run = &run;
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(total);
                let hi = (lo + chunk).min(total);
                scope.spawn(move || (lo..hi).map(run).collect::<Vec<T>>())
            })
            .collect();
        for handle in handles {
            match handle.join() {
                Ok(part) => merged.extend(part),
                Err(payload) => std::panic::resume_unwind(payload),
            }
        }
    });
    merged
}

/// Gap minimization over the worker pool; same starts, same merge, same
/// certificate as the serial search.
pub fn run_gap(ct: &CrossTable, opts: &MinimizeOpts) -> Result<GapCertificate, CliError> {
    let starts = gap_start_points(ct, opts);
    let workers = worker_count(starts.len())?;
    let minima = run_starts(starts.len(), workers, |k| {
        minimize_gap_at(ct, k, &starts[k], opts)
    });
    Ok(certificate_from_minima(&minima, opts))
}

/// Brute-force EoF search over the worker pool.
pub fn run_eof(search: &EofSearch) -> Result<EofResult, CliError> {
    let workers = worker_count(search.start_count())?;
    let minima = run_starts(search.start_count(), workers, |k| search.run_start(k));
    search.finish(&minima).map_err(CliError::compute)
}
