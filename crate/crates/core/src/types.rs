//! Gaussian array specifications, order-statistic selectors and threshold
//! vectors.
//!
//! A `d x n` array is stored as a `dn`-dimensional vector whose entry `(i, j)`
//! (0-based here; `(i-1)n + j` in 1-based notation) sits at flat index
//! `i * n + j`. Every module indexes covariances through this convention.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const DIAGONAL_TOL: f64 = 1e-12;
/// Relative eigenvalue floor: `lambda_min >= -PSD_REL_TOL * lambda_max`.
pub const PSD_REL_TOL: f64 = 1e-10;

/// A validated standard Gaussian array: unit variances, correlation matrix
/// positive semidefinite up to round-off. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianArraySpec {
    d: usize,
    n: usize,
    cov: DMatrix<f64>,
}

/// Validate a `dn x dn` correlation matrix for a `d x n` array, collecting
/// every violated invariant.
pub fn validate_spec(d: usize, n: usize, cov: DMatrix<f64>) -> Result<GaussianArraySpec> {
    if d == 0 || n == 0 {
        return Err(Error::param("d/n", "array dimensions must be positive"));
    }
    let dim = d * n;
    if cov.nrows() != dim || cov.ncols() != dim {
        return Err(Error::InvalidSpec(vec![Violation::DimensionMismatch {
            expected: dim,
            rows: cov.nrows(),
            cols: cov.ncols(),
        }]));
    }
    let mut violations = Vec::new();
    if let Some((row, col)) = (0..dim)
        .flat_map(|p| (0..dim).map(move |q| (p, q)))
        .find(|&(p, q)| !cov[(p, q)].is_finite())
    {
        violations.push(Violation::NonFinite { row, col });
        return Err(Error::InvalidSpec(violations));
    }

    let mut max_asym = 0.0f64;
    for p in 0..dim {
        for q in (p + 1)..dim {
            max_asym = max_asym.max((cov[(p, q)] - cov[(q, p)]).abs());
        }
    }
    if max_asym > SYMMETRY_TOL {
        violations.push(Violation::Asymmetry { max_abs: max_asym });
    }
    for p in 0..dim {
        let v = cov[(p, p)];
        if (v - 1.0).abs() > DIAGONAL_TOL {
            violations.push(Violation::NonUnitDiagonal { index: p, value: v });
        }
    }
    for p in 0..dim {
        for q in 0..dim {
            let v = cov[(p, q)];
            if p != q && !(-1.0..=1.0).contains(&v) {
                violations.push(Violation::EntryOutOfRange { row: p, col: q, value: v });
            }
        }
    }
    let (min_eig, max_eig) = eigen_range(&cov);
    if min_eig < -PSD_REL_TOL * max_eig.abs().max(f64::MIN_POSITIVE) {
        violations.push(Violation::NotPositiveSemidefinite {
            min_eigenvalue: min_eig,
            max_eigenvalue: max_eig,
        });
    }
    if violations.is_empty() {
        Ok(GaussianArraySpec { d, n, cov })
    } else {
        Err(Error::InvalidSpec(violations))
    }
}

/// Smallest and largest eigenvalue of the symmetric part of `m`.
pub fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

impl GaussianArraySpec {
    pub fn new(d: usize, n: usize, cov: DMatrix<f64>) -> Result<Self> {
        validate_spec(d, n, cov)
    }

    /// Build from row-major nested rows.
    pub fn from_rows(d: usize, n: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidSpec(vec![Violation::DimensionMismatch {
                expected: d * n,
                rows: dim,
                cols: rows.iter().map(Vec::len).max().unwrap_or(0),
            }]));
        }
        let cov = DMatrix::from_fn(dim, width, |p, q| rows[p][q]);
        validate_spec(d, n, cov)
    }

    /// The `dn x dn` identity: all entries independent.
    pub fn independent(d: usize, n: usize) -> Result<Self> {
        validate_spec(d, n, DMatrix::identity(d * n, d * n))
    }

    /// Column-independent array (`sigma_{ij,lk} = s_{il} 1{j = k}`) from a
    /// `d x d` row correlation matrix.
    pub fn column_independent(n: usize, row_corr: &DMatrix<f64>) -> Result<Self> {
        let d = row_corr.nrows();
        let cov = DMatrix::from_fn(d * n, d * n, |p, q| {
            let (i, j) = (p / n, p % n);
            let (l, k) = (q / n, q % n);
            if j == k {
                row_corr[(i, l)]
            } else {
                0.0
            }
        });
        validate_spec(d, n, cov)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.d, self.n)
    }

    pub fn dim(&self) -> usize {
        self.d * self.n
    }

    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// `sigma_{ij,lk}` with 0-based row/column indices.
    pub fn sigma(&self, i: usize, j: usize, l: usize, k: usize) -> f64 {
        self.cov[(self.flat_index(i, j), self.flat_index(l, k))]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|p| (0..self.dim()).map(|q| self.cov[(p, q)]).collect())
            .collect()
    }

    /// Same array with rows reordered: new row `i` is old row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.d {
            return Err(Error::param("perm", "length must equal d"));
        }
        let n = self.n;
        let cov = DMatrix::from_fn(self.dim(), self.dim(), |p, q| {
            let (i, j) = (p / n, p % n);
            let (l, k) = (q / n, q % n);
            self.sigma(perm[i], j, perm[l], k)
        });
        validate_spec(self.d, n, cov)
    }

    /// Load a correlation matrix from JSON or CSV. The file gives the
    /// `dn x dn` matrix; `d` splits it into rows. JSON may be a bare nested
    /// array or an object `{"d": .., "n": .., "cov": [[..]]}`.
    pub fn from_file(path: impl AsRef<Path>, d: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        let is_json = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or_else(|| text.trim_start().starts_with(['[', '{']));
        let (rows, declared) = if is_json {
            parse_json_matrix(&text).map_err(|reason| Error::Parse {
                path: path.display().to_string(),
                reason,
            })?
        } else {
            (
                parse_csv_matrix(&text).map_err(|reason| Error::Parse {
                    path: path.display().to_string(),
                    reason,
                })?,
                None,
            )
        };
        let dim = rows.len();
        let (d, n) = match declared {
            Some((fd, fn_)) => {
                if fd != d {
                    return Err(Error::param(
                        "d",
                        format!("file declares d={fd} but thresholds have length {d}"),
                    ));
                }
                (fd, fn_)
            }
            None => {
                if d == 0 || dim % d != 0 {
                    return Err(Error::param(
                        "d",
                        format!("matrix dimension {dim} is not a multiple of d={d}"),
                    ));
                }
                (d, dim / d)
            }
        };
        Self::from_rows(d, n, &rows)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonMatrix {
    Bare(Vec<Vec<f64>>),
    Declared { d: usize, n: usize, cov: Vec<Vec<f64>> },
}

type ParsedMatrix = (Vec<Vec<f64>>, Option<(usize, usize)>);

fn parse_json_matrix(text: &str) -> std::result::Result<ParsedMatrix, String> {
    match serde_json::from_str::<JsonMatrix>(text).map_err(|e| e.to_string())? {
        JsonMatrix::Bare(rows) => Ok((rows, None)),
        JsonMatrix::Declared { d, n, cov } => Ok((cov, Some((d, n)))),
    }
}

fn parse_csv_matrix(text: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            // a non-numeric first line is a header
            Err(_) if line == 0 => continue,
            Err(e) => return Err(format!("line {}: {e}", line + 1)),
        }
    }
    Ok(rows)
}

/// Entrywise `max(|sigma_x|, |sigma_y|)`.
pub fn pairwise_max_corr(x: &GaussianArraySpec, y: &GaussianArraySpec) -> Result<DMatrix<f64>> {
    check_same_shape(x, y)?;
    Ok(x.cov.zip_map(&y.cov, |a, b| a.abs().max(b.abs())))
}

/// `h * Sigma_x + (1 - h) * Sigma_y`.
pub fn interpolate_covariance(
    x: &GaussianArraySpec,
    y: &GaussianArraySpec,
    h: f64,
) -> Result<GaussianArraySpec> {
    check_same_shape(x, y)?;
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::param("h", format!("{h} is outside [0, 1]")));
    }
    let cov = x.cov.zip_map(&y.cov, |a, b| h * a + (1.0 - h) * b);
    validate_spec(x.d, x.n, cov)
}

pub(crate) fn check_same_shape(x: &GaussianArraySpec, y: &GaussianArraySpec) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch { left: x.shape(), right: y.shape() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Rank 1 is the row minimum (array convention).
    Ascending,
    /// Rank 1 is the maximum (process convention).
    Descending,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asc" | "ascending" => Ok(Convention::Ascending),
            "desc" | "descending" => Ok(Convention::Descending),
            other => Err(Error::param("convention", format!("unknown convention `{other}`"))),
        }
    }
}

/// Which order statistic of `n` values to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderStatSelector {
    n: usize,
    rank: usize,
    convention: Convention,
}

impl OrderStatSelector {
    pub fn new(n: usize, rank: usize, convention: Convention) -> Result<Self> {
        if n == 0 || rank == 0 || rank > n {
            return Err(Error::param("r", format!("rank {rank} is outside 1..={n}")));
        }
        Ok(Self { n, rank, convention })
    }

    pub fn ascending(n: usize, rank: usize) -> Result<Self> {
        Self::new(n, rank, Convention::Ascending)
    }

    pub fn descending(n: usize, rank: usize) -> Result<Self> {
        Self::new(n, rank, Convention::Descending)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// The same statistic expressed in the other convention (`r <-> n - r + 1`).
    pub fn converted(&self) -> Self {
        Self {
            n: self.n,
            rank: self.n - self.rank + 1,
            convention: match self.convention {
                Convention::Ascending => Convention::Descending,
                Convention::Descending => Convention::Ascending,
            },
        }
    }

    /// Rank counted from the minimum.
    pub fn ascending_rank(&self) -> usize {
        match self.convention {
            Convention::Ascending => self.rank,
            Convention::Descending => self.n - self.rank + 1,
        }
    }

    /// 0-based position in an ascending sort.
    pub(crate) fn sorted_position(&self) -> usize {
        self.ascending_rank() - 1
    }

    /// Pick the statistic from `values`, reordering the slice in place.
    pub fn select(&self, values: &mut [f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let pos = self.sorted_position();
        if self.n <= 8 {
            values.sort_unstable_by(f64::total_cmp);
            values[pos]
        } else {
            *values.select_nth_unstable_by(pos, f64::total_cmp).1
        }
    }
}

/// Per-row thresholds `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVector(Vec<f64>);

impl ThresholdVector {
    pub fn new(u: Vec<f64>) -> Self {
        ThresholdVector(u)
    }

    pub fn for_spec(u: Vec<f64>, spec: &GaussianArraySpec) -> Result<Self> {
        let t = ThresholdVector(u);
        t.check(spec)?;
        Ok(t)
    }

    pub fn check(&self, spec: &GaussianArraySpec) -> Result<()> {
        if self.0.len() != spec.d() {
            return Err(Error::param(
                "u",
                format!("has length {} but the array has d={} rows", self.0.len(), spec.d()),
            ));
        }
        if self.0.iter().any(|v| v.is_nan()) {
            return Err(Error::param("u", "contains NaN"));
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

impl From<Vec<f64>> for ThresholdVector {
    fn from(u: Vec<f64>) -> Self {
        ThresholdVector(u)
    }
}

impl std::ops::Index<usize> for ThresholdVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
