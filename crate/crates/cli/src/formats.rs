//! JSON file formats: ensembles, density matrices, and gap certificates.
//!
//! Complex values are `[re, im]` pairs and split sizes are always declared,
//! so fixtures are unambiguous and diff-able. Writers emit pretty-printed
//! UTF-8 with a trailing newline, and parsing back what was written
//! reproduces every value bit for bit. Digests are SHA-256 over raw input
//! bytes, rendered as `sha256:<hex>`.

use core::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use entwine_core::linalg::C64;
use entwine_core::{
    from_weighted, BipartiteVector, CMat, CVec, DensityOperator, Ensemble, GapCertificate, Verdict,
};

use crate::CliError;

/// Certificate verdict string for a found violation.
pub const VIOLATED: &str = "VIOLATED";
/// Certificate verdict string for an exhausted search without a violation.
pub const NO_VIOLATION_FOUND: &str = "NO_VIOLATION_FOUND";

/// String form of a verdict, as stored in certificate files.
pub fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Violated => VIOLATED,
        Verdict::NoViolationFound => NO_VIOLATION_FOUND,
    }
}

/// An ensemble on one bipartite split.
///
/// Without `weights`, the vectors are tilde members whose squared norms are
/// the probability weights. With `weights`, the vectors must be normalized
/// states and the two lists are zipped into the same tilde form on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    /// Split sizes `[dim_a, dim_b]`; every vector has `dim_a * dim_b` entries.
    pub dims: [usize; 2],
    /// One amplitude array per member, each entry a `[re, im]` pair, indexed
    /// as `a * dim_b + b`.
    pub vectors: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl EnsembleFile {
    /// Writes an ensemble in tilde form; `weights` is omitted because the
    /// vector norms already carry it.
    pub fn from_ensemble(e: &Ensemble) -> Self {
        Self {
            dims: [e.dim_a(), e.dim_b()],
            vectors: e
                .vectors()
                .iter()
                .map(|v| v.amplitudes().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            weights: None,
        }
    }

    /// Validates shapes and builds the ensemble.
    pub fn to_ensemble(&self) -> Result<Ensemble, CliError> {
        let [da, db] = self.dims;
        let n = da
            .checked_mul(db)
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("dims [{da}, {db}] must be positive")))?;
        if self.vectors.is_empty() {
            return Err(CliError::Input("vectors must be nonempty".into()));
        }
        let mut members = Vec::with_capacity(self.vectors.len());
        for (k, amps) in self.vectors.iter().enumerate() {
            if amps.len() != n {
                return Err(CliError::Input(format!(
                    "vector {k} has {} amplitudes, expected {n} for a {da}x{db} split",
                    amps.len()
                )));
            }
            let v = CVec::from_iterator(n, amps.iter().map(|&[re, im]| C64::new(re, im)));
            members.push(BipartiteVector::new(da, db, v).map_err(CliError::input)?);
        }
        match &self.weights {
            Some(w) => {
                if w.len() != members.len() {
                    return Err(CliError::Input(format!(
                        "{} weights for {} vectors",
                        w.len(),
                        members.len()
                    )));
                }
                from_weighted(w, &members).map_err(CliError::input)
            }
            None => Ensemble::new(da, db, members).map_err(CliError::input),
        }
    }
}

/// A density matrix with its bipartite split declared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    /// Split sizes `[dim_a, dim_b]`; the matrix is `dim_a·dim_b` square.
    pub dims: [usize; 2],
    /// Row-major entries as `[re, im]` pairs.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl DensityFile {
    pub fn from_operator(rho: &DensityOperator, dim_a: usize, dim_b: usize) -> Self {
        let m = rho.matrix();
        Self {
            dims: [dim_a, dim_b],
            matrix: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        }
    }

    /// Validates shapes, Hermiticity, and positivity, and builds the operator.
    pub fn to_operator(&self) -> Result<DensityOperator, CliError> {
        let [da, db] = self.dims;
        let n = da
            .checked_mul(db)
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("dims [{da}, {db}] must be positive")))?;
        if self.matrix.len() != n {
            return Err(CliError::Input(format!(
                "matrix has {} rows, expected {n} for a {da}x{db} split",
                self.matrix.len()
            )));
        }
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(CliError::Input(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        let m = CMat::from_fn(n, n, |r, c| {
            let [re, im] = self.matrix[r][c];
            C64::new(re, im)
        });
        DensityOperator::new(m).map_err(CliError::input)
    }
}

/// Outcome of a gap search, self-describing enough to be replayed: the tool
/// version, the seed, and a digest of the exact input bytes it was computed
/// from all travel with the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    /// `VIOLATED` or `NO_VIOLATION_FOUND`.
    pub verdict: String,
    /// Best gap found, in bits.
    pub gap: f64,
    /// Unit coefficient vector attaining the gap, as `[re, im]` pairs.
    pub c: Vec<[f64; 2]>,
    pub hermiticity_residual: f64,
    /// Total number of starts searched.
    pub restarts: usize,
    pub seed: u64,
    pub tool_version: String,
    /// `sha256:<hex>` over the input file bytes (concatenated, in argument
    /// order, when a command takes several inputs).
    pub input_digest: String,
}

impl CertificateFile {
    pub fn new(cert: &GapCertificate, hermiticity_residual: f64, seed: u64, digest: String) -> Self {
        Self {
            verdict: verdict_label(cert.verdict).into(),
            gap: cert.gap,
            c: cert.c.iter().map(|z| [z.re, z.im]).collect(),
            hermiticity_residual,
            restarts: cert.restarts_used,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            input_digest: digest,
        }
    }

    pub fn verdict(&self) -> Result<Verdict, CliError> {
        match self.verdict.as_str() {
            VIOLATED => Ok(Verdict::Violated),
            NO_VIOLATION_FOUND => Ok(Verdict::NoViolationFound),
            other => Err(CliError::Input(format!("unknown verdict {other:?}"))),
        }
    }

    /// Rebuilds the in-memory certificate, for feeding back into improve.
    pub fn to_certificate(&self) -> Result<GapCertificate, CliError> {
        let verdict = self.verdict()?;
        if self.c.is_empty() {
            return Err(CliError::Input("certificate coefficient vector is empty".into()));
        }
        Ok(GapCertificate {
            c: CVec::from_iterator(self.c.len(), self.c.iter().map(|&[re, im]| C64::new(re, im))),
            gap: self.gap,
            verdict,
            restarts_used: self.restarts,
            min_history: Vec::new(),
        })
    }
}

/// `sha256:<hex>` digest of raw bytes.
pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut out = String::with_capacity(7 + 2 * hash.len());
    out.push_str("sha256:");
    for b in hash {
        write!(out, "{b:02x}").expect("writing to a String cannot fail");
    }
    out
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Parses a JSON document; the error carries serde's line/column diagnostic.
pub fn parse_json<T: DeserializeOwned>(bytes: &[u8], what: &str) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

/// Pretty-printed JSON with a trailing newline, the only form writers emit.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("formats serialize infallibly");
    s.push('\n');
    s
}

/// Routes the machine-readable artifact: to `out` when given, otherwise to
/// standard output.
pub fn write_artifact(out: Option<&Path>, json: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, json)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| CliError::Internal(format!("cannot write to stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_ensemble_file() -> EnsembleFile {
        let s = 0.5_f64.sqrt();
        EnsembleFile {
            dims: [2, 2],
            vectors: vec![
                vec![[s / 3.0, 0.1], [0.0, -0.2], [1.0 / 3.0, 0.0], [s, 0.05]],
                vec![[0.3, 0.7], [-s, 0.0], [0.0, 0.0], [0.1, -1.0 / 7.0]],
            ],
            weights: None,
        }
    }

    #[test]
    fn ensemble_file_round_trip_is_byte_exact() {
        let file = sample_ensemble_file();
        let json = to_json(&file);
        assert!(json.ends_with('\n'));
        let back: EnsembleFile = parse_json(json.as_bytes(), "ensemble").unwrap();
        assert_eq!(to_json(&back), json);
        for (v, w) in file.vectors.iter().zip(&back.vectors) {
            for (a, b) in v.iter().zip(w) {
                assert_eq!(a[0].to_bits(), b[0].to_bits());
                assert_eq!(a[1].to_bits(), b[1].to_bits());
            }
        }
    }

    #[test]
    fn ensemble_conversions_invert_each_other() {
        let e = sample_ensemble_file().to_ensemble().unwrap();
        let again = EnsembleFile::from_ensemble(&e);
        assert_eq!(sample_ensemble_file(), again);
    }

    #[test]
    fn weighted_form_loads_through_normalized_states() {
        let s = 0.5_f64.sqrt();
        let file = EnsembleFile {
            dims: [2, 2],
            vectors: vec![
                vec![[s, 0.0], [0.0, 0.0], [0.0, 0.0], [s, 0.0]],
                vec![[s, 0.0], [0.0, 0.0], [0.0, 0.0], [-s, 0.0]],
            ],
            weights: Some(vec![0.25, 0.75]),
        };
        let e = file.to_ensemble().unwrap();
        let w = e.weights();
        assert!((w[0] - 0.25).abs() < 1e-12);
        assert!((w[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn certificate_round_trip_preserves_bits() {
        let cert = GapCertificate {
            c: CVec::from_iterator(
                2,
                [C64::new(0.5_f64.sqrt(), 1.0 / 3.0), C64::new(-0.1, 0.7)].into_iter(),
            ),
            gap: -1.0 + 1.0 / 3.0e7,
            verdict: Verdict::Violated,
            restarts_used: 76,
            min_history: Vec::new(),
        };
        let file = CertificateFile::new(&cert, 2.5e-13, 9, digest(b"input bytes"));
        let json = to_json(&file);
        let back: CertificateFile = parse_json(json.as_bytes(), "certificate").unwrap();
        assert_eq!(to_json(&back), json);
        assert_eq!(back.gap.to_bits(), cert.gap.to_bits());
        let rebuilt = back.to_certificate().unwrap();
        assert_eq!(rebuilt.c[0].re.to_bits(), cert.c[0].re.to_bits());
        assert_eq!(rebuilt.c[1].im.to_bits(), cert.c[1].im.to_bits());
        assert_eq!(rebuilt.verdict, Verdict::Violated);
    }

    #[test]
    fn malformed_documents_are_rejected_with_positions() {
        let err = parse_json::<EnsembleFile>(b"{\"dims\": [2, 2], \"vec", "ensemble").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "no position in {msg:?}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let mut file = sample_ensemble_file();
        file.vectors[1].pop();
        assert!(file.to_ensemble().is_err());

        let mut file = sample_ensemble_file();
        file.weights = Some(vec![0.5]);
        assert!(file.to_ensemble().is_err());

        let bad = DensityFile {
            dims: [2, 2],
            matrix: vec![vec![[1.0, 0.0]; 3]; 4],
        };
        assert!(bad.to_operator().is_err());

        let zero = EnsembleFile {
            dims: [0, 2],
            vectors: vec![vec![]],
            weights: None,
        };
        assert!(zero.to_ensemble().is_err());
    }

    #[test]
    fn unknown_verdicts_are_rejected() {
        let mut file = CertificateFile::new(
            &GapCertificate {
                c: CVec::from_element(1, C64::new(1.0, 0.0)),
                gap: 0.0,
                verdict: Verdict::NoViolationFound,
                restarts_used: 1,
                min_history: Vec::new(),
            },
            0.0,
            0,
            digest(b""),
        );
        file.verdict = "MAYBE".into();
        assert!(file.to_certificate().is_err());
    }

    #[test]
    fn digest_matches_reference_value() {
        assert_eq!(
            digest(b""),
            "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert!(digest(b"x").starts_with("sha256:"));
    }

    #[test]
    fn density_file_round_trips_through_operator() {
        let file = DensityFile {
            dims: [2, 2],
            matrix: vec![
                vec![[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.3, 0.1]],
                vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                vec![[0.3, -0.1], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]],
            ],
        };
        let rho = file.to_operator().unwrap();
        let again = DensityFile::from_operator(&rho, 2, 2);
        assert_eq!(file, again);
    }
}
