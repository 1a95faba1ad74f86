//! Design assembly and ordinary / Christoffel-weighted / tempered
//! least-squares regression with stability diagnostics.
//!
//! The Christoffel value of sample i is K_i = psi_i^T G^{-1} psi_i with
//! G = (1/M) Psi^T Psi; its maximum kappa enters the stability score
//! M / (kappa ln M). Tempered weights follow w_i(alpha) proportional to
//! K_i^alpha, normalized so the weights sum to M: alpha = 0 recovers
//! ordinary least squares and alpha = -1 the inverse-Christoffel weighting.
//! All three schemes run through the same code path.
//!
//! Fits solve the row-scaled system diag(sqrt(w)) Psi c = diag(sqrt(w)) y by
//! Householder QR, which is algebraically the weighted normal equations but
//! better conditioned. Rank-deficient designs are rejected, never
//! pseudo-inverted.

use ndarray::{Array1, Array2};

use crate::basis::{EvalScratch, MultivariateBasis};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::SampleSet;

/// Sample-evaluated basis matrix, Psi_ij = psi_j(x_i).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    psi: Array2<f64>,
}

impl DesignMatrix {
    /// Wraps a pre-assembled design matrix.
    pub fn from_matrix(psi: Array2<f64>) -> DesignMatrix {
        DesignMatrix { psi }
    }

    pub fn nrows(&self) -> usize {
        self.psi.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.psi.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.psi
    }

    fn row(&self, i: usize) -> ndarray::ArrayView1<'_, f64> {
        self.psi.row(i)
    }

    /// Contiguous view of row i; the matrix is always standard layout.
    fn row_slice(&self, i: usize) -> &[f64] {
        let n = self.psi.ncols();
        &self.psi.as_slice().expect("standard layout")[i * n..(i + 1) * n]
    }
}

/// Evaluates every basis function at every sample point.
pub fn assemble_design(basis: &MultivariateBasis, samples: &SampleSet) -> Result<DesignMatrix> {
    if basis.input_dim() != samples.dim() {
        return Err(Error::Config(format!(
            "basis dimension {} does not match sample dimension {}",
            basis.input_dim(),
            samples.dim()
        )));
    }
    let m = samples.len();
    let n = basis.len();
    let mut psi = Array2::<f64>::zeros((m, n));
    let mut scratch = EvalScratch::new(basis);
    let mut row = vec![0.0; n];
    let mut point = vec![0.0; basis.input_dim()];
    for i in 0..m {
        for (j, p) in point.iter_mut().enumerate() {
            *p = samples.x()[[i, j]];
        }
        basis.evaluate_into(&point, &mut scratch, &mut row);
        for (j, &v) in row.iter().enumerate() {
            psi[[i, j]] = v;
        }
    }
    Ok(DesignMatrix { psi })
}

/// Empirical Gram matrix (1/M) Psi^T W Psi, symmetrized; W = I when no
/// weights are given.
pub fn gram(design: &DesignMatrix, weights: Option<&WeightVector>) -> Array2<f64> {
    let m = design.nrows();
    let n = design.ncols();
    let mut g = vec![0.0; n * n];
    for i in 0..m {
        let w = weights.map_or(1.0, |wv| wv.values()[i]);
        let row = design.row_slice(i);
        for a in 0..n {
            let wa = w * row[a];
            let out = &mut g[a * n..(a + 1) * n];
            for b in a..n {
                out[b] += wa * row[b];
            }
        }
    }
    let mf = m as f64;
    let mut out = Array2::<f64>::zeros((n, n));
    for a in 0..n {
        for b in a..n {
            let v = g[a * n + b] / mf;
            out[[a, b]] = v;
            out[[b, a]] = v;
        }
    }
    out
}

/// The Cohen-Davenport-Leviatan stability score M / (kappa ln M).
///
/// Natural logarithm; infinite for M < 2 where the criterion is vacuous.
pub fn stability_score(m: usize, kappa: f64) -> f64 {
    if m < 2 {
        return f64::INFINITY;
    }
    m as f64 / (kappa * (m as f64).ln())
}

/// Per-sample Christoffel values and derived stability diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelDiagnostics {
    christoffel: Vec<f64>,
    kappa: f64,
    gram_condition: f64,
    score_lr: f64,
}

impl ChristoffelDiagnostics {
    /// K_i for each sample.
    pub fn christoffel(&self) -> &[f64] {
        &self.christoffel
    }

    /// Coherence: the largest Christoffel value.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Two-norm condition number of the Gram matrix.
    pub fn gram_condition(&self) -> f64 {
        self.gram_condition
    }

    /// M / (kappa ln M).
    pub fn score_lr(&self) -> f64 {
        self.score_lr
    }

    pub fn sample_count(&self) -> usize {
        self.christoffel.len()
    }
}

/// Computes K_i = psi_i^T G^{-1} psi_i through the Cholesky factor of G.
pub fn christoffel(design: &DesignMatrix) -> Result<ChristoffelDiagnostics> {
    let g = gram(design, None);
    let l = linalg::flatten(&linalg::cholesky(&g)?);
    let m = design.nrows();
    let n = design.ncols();
    let mut k = Vec::with_capacity(m);
    let mut buf = vec![0.0; n];
    for i in 0..m {
        buf.copy_from_slice(design.row_slice(i));
        linalg::forward_substitute(&l, n, &mut buf);
        k.push(buf.iter().map(|v| v * v).sum::<f64>());
    }
    let kappa = k.iter().cloned().fold(0.0, f64::max);
    Ok(ChristoffelDiagnostics {
        kappa,
        score_lr: stability_score(m, kappa),
        gram_condition: linalg::symmetric_condition(&g),
        christoffel: k,
    })
}

/// Regression weighting scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Uniform weights.
    Ols,
    /// Inverse-Christoffel weights, w_i proportional to 1/K_i.
    Cls,
    /// Tempered weights, w_i proportional to K_i^alpha.
    Tempered(f64),
}

impl Scheme {
    /// The exponent applied to K_i; Ols and Cls are the alpha = 0 and
    /// alpha = -1 points of the tempered family.
    pub fn exponent(&self) -> f64 {
        match self {
            Scheme::Ols => 0.0,
            Scheme::Cls => -1.0,
            Scheme::Tempered(a) => *a,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Scheme::Ols => "ols".into(),
            Scheme::Cls => "cls".into(),
            Scheme::Tempered(a) => format!("tempered({a})"),
        }
    }
}

/// Positive sample weights normalized to sum to M.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Array1<f64>,
    scheme: Scheme,
}

impl WeightVector {
    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn alpha(&self) -> f64 {
        self.scheme.exponent()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Tempered weights w_i = M K_i^alpha / sum_j K_j^alpha.
///
/// Every scheme routes through this expression (computed in log space with
/// the maximum subtracted, so extreme alpha stays in range), which is what
/// makes tempered(0) identical to OLS and tempered(-1) identical to CLS
/// bit for bit.
pub fn weights(diag: &ChristoffelDiagnostics, scheme: Scheme) -> Result<WeightVector> {
    let k = diag.christoffel();
    if k.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NumericRange(
            "christoffel values must be strictly positive for weighting".into(),
        ));
    }
    let alpha = scheme.exponent();
    let m = k.len() as f64;
    let logs: Vec<f64> = k.iter().map(|&v| alpha * v.ln()).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NumericRange(format!(
            "tempering exponent {alpha} overflows the weight computation"
        )));
    }
    let u: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = u.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NumericRange(format!(
            "weight normalization degenerated (sum = {total}) at alpha = {alpha}"
        )));
    }
    let values = Array1::from_iter(u.into_iter().map(|v| m * v / total));
    Ok(WeightVector { values, scheme })
}

/// Stability diagnostics of the weighted system G_w(alpha).
///
/// The weighted design has rows sqrt(w_i) psi_i, so its Christoffel values
/// are w_i psi_i^T G_w^{-1} psi_i; they satisfy the same trace identity and
/// feed the same M / (kappa ln M) score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedDiagnostics {
    pub kappa: f64,
    pub gram_condition: f64,
    pub score_lr: f64,
}

fn weighted_diagnostics(
    design: &DesignMatrix,
    weights: &WeightVector,
    columns: &[usize],
) -> Result<WeightedDiagnostics> {
    let m = design.nrows();
    let n = columns.len();
    let mf = m as f64;
    let mut g = Array2::<f64>::zeros((n, n));
    for i in 0..m {
        let w = weights.values()[i];
        let row = design.row_slice(i);
        for (a, &ca) in columns.iter().enumerate() {
            let wa = w * row[ca];
            for (b, &cb) in columns.iter().enumerate().skip(a) {
                g[[a, b]] += wa * row[cb];
            }
        }
    }
    for a in 0..n {
        for b in a..n {
            let v = g[[a, b]] / mf;
            g[[a, b]] = v;
            g[[b, a]] = v;
        }
    }
    let l = linalg::flatten(&linalg::cholesky(&g)?);
    let mut kappa: f64 = 0.0;
    let mut buf = vec![0.0; n];
    for i in 0..m {
        let row = design.row_slice(i);
        for (b, &col) in buf.iter_mut().zip(columns) {
            *b = row[col];
        }
        linalg::forward_substitute(&l, n, &mut buf);
        let k = weights.values()[i] * buf.iter().map(|v| v * v).sum::<f64>();
        kappa = kappa.max(k);
    }
    Ok(WeightedDiagnostics {
        kappa,
        gram_condition: linalg::symmetric_condition(&g),
        score_lr: stability_score(m, kappa),
    })
}

/// Outcome of a (possibly sparse) weighted least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Full-length coefficient vector; entries off the active set are zero.
    pub coefficients: Array1<f64>,
    /// Diagnostics of the unweighted design (active columns for sparse
    /// underdetermined fits).
    pub diagnostics: ChristoffelDiagnostics,
    /// Diagnostics of the weighted system over the active columns.
    pub weighted: WeightedDiagnostics,
    pub weights: WeightVector,
    /// Weighted root-mean-square residual sqrt((1/M) sum w_i r_i^2).
    pub residual_rms: f64,
    /// Selected basis indices, ascending; the full set unless sparse
    /// selection ran.
    pub active_set: Vec<usize>,
}

/// Solves the weighted least-squares problem for the requested scheme.
pub fn fit(design: &DesignMatrix, y: &Array1<f64>, scheme: Scheme) -> Result<FitResult> {
    let m = design.nrows();
    let n = design.ncols();
    check_response(design, y)?;
    if m < n {
        return Err(Error::Underdetermined { rows: m, cols: n });
    }
    let diag = christoffel(design)?;
    let w = weights(&diag, scheme)?;
    let all: Vec<usize> = (0..n).collect();
    let coefficients = solve_weighted(design, y, &w, &all)?;
    let residual_rms = weighted_rms(design, y, &w, &coefficients);
    let weighted = weighted_diagnostics(design, &w, &all)?;
    Ok(FitResult {
        coefficients,
        diagnostics: diag,
        weighted,
        weights: w,
        residual_rms,
        active_set: all,
    })
}

/// Stopping rule for greedy sparse selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparseStop {
    /// Stop once this many basis functions are active.
    TargetSparsity(usize),
    /// Stop once the relative weighted residual drops to this level.
    Epsilon(f64),
}

/// Greedy forward selection (orthogonal matching pursuit) on the weighted
/// residual: repeatedly add the column with the largest weighted
/// correlation, re-solving the weighted least squares on the active set.
///
/// With an OLS scheme this also covers the underdetermined case M < N; the
/// Christoffel-based schemes need the full Gram matrix and therefore M >= N.
/// For underdetermined fits the reported unweighted diagnostics refer to
/// the selected columns.
pub fn sparse_fit(
    design: &DesignMatrix,
    y: &Array1<f64>,
    scheme: Scheme,
    stop: SparseStop,
) -> Result<FitResult> {
    let m = design.nrows();
    let n = design.ncols();
    check_response(design, y)?;
    if let SparseStop::TargetSparsity(0) = stop {
        return Err(Error::Config("target sparsity must be at least 1".into()));
    }
    if let SparseStop::Epsilon(e) = stop {
        if !(e >= 0.0) {
            return Err(Error::Config(format!("epsilon must be non-negative, got {e}")));
        }
    }

    // Weights need the full-design Christoffel values; that path requires a
    // positive-definite Gram. Uniform weighting (exponent 0) sidesteps it
    // and works for M < N.
    let full_diag = if scheme.exponent() == 0.0 && m < n {
        None
    } else {
        Some(christoffel(design)?)
    };
    let w = match &full_diag {
        Some(diag) => weights(diag, scheme)?,
        None => WeightVector {
            values: Array1::ones(m),
            scheme,
        },
    };

    let sqrt_w: Vec<f64> = w.values().iter().map(|v| v.sqrt()).collect();
    let z: Vec<f64> = y.iter().zip(&sqrt_w).map(|(yi, sw)| yi * sw).collect();
    let z_norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();

    let limit = match stop {
        SparseStop::TargetSparsity(k) => k.min(n).min(m),
        SparseStop::Epsilon(_) => n.min(m),
    };

    let mut active: Vec<usize> = Vec::new();
    let mut residual = z.clone();
    let mut residual_norm = z_norm;

    while active.len() < limit {
        if let SparseStop::Epsilon(eps) = stop {
            if z_norm == 0.0 || residual_norm <= eps * z_norm {
                break;
            }
        }
        // Largest weighted correlation; ties go to the lowest index.
        let mut best = None;
        let mut best_corr = 0.0;
        for j in 0..n {
            if active.contains(&j) {
                continue;
            }
            let corr: f64 = (0..m)
                .map(|i| sqrt_w[i] * design.row(i)[j] * residual[i])
                .sum::<f64>()
                .abs();
            if corr > best_corr {
                best_corr = corr;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        active.push(j);
        active.sort_unstable();

        let c_active = solve_weighted(design, y, &w, &active)?;
        let mut new_norm_sq = 0.0;
        for i in 0..m {
            let row = design.row(i);
            let pred: f64 = active
                .iter()
                .zip(c_active.iter())
                .map(|(&col, &c)| row[col] * c)
                .sum();
            residual[i] = sqrt_w[i] * (y[i] - pred);
            new_norm_sq += residual[i] * residual[i];
        }
        let new_norm = new_norm_sq.sqrt();
        if let SparseStop::Epsilon(_) = stop {
            // No measurable progress: the remaining columns cannot explain
            // the residual, stop instead of cycling.
            if new_norm >= residual_norm * (1.0 - 1e-12) {
                break;
            }
        }
        residual_norm = new_norm;
    }

    let c_active = if active.is_empty() {
        Array1::zeros(0)
    } else {
        solve_weighted(design, y, &w, &active)?
    };
    let mut coefficients = Array1::<f64>::zeros(n);
    for (&col, &c) in active.iter().zip(c_active.iter()) {
        coefficients[col] = c;
    }
    let residual_rms = weighted_rms(design, y, &w, &coefficients);

    let report_cols: Vec<usize> = if active.is_empty() { vec![0] } else { active.clone() };
    let diagnostics = match full_diag {
        Some(d) => d,
        None => christoffel_of_columns(design, &report_cols)?,
    };
    let weighted = weighted_diagnostics(design, &w, &report_cols)?;

    Ok(FitResult {
        coefficients,
        diagnostics,
        weighted,
        weights: w,
        residual_rms,
        active_set: active,
    })
}

fn check_response(design: &DesignMatrix, y: &Array1<f64>) -> Result<()> {
    if y.len() != design.nrows() {
        return Err(Error::Config(format!(
            "response length {} does not match {} design rows",
            y.len(),
            design.nrows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericRange("response vector contains a non-finite entry".into()));
    }
    Ok(())
}

/// Weighted least squares on a column subset via QR of diag(sqrt(w)) Psi.
fn solve_weighted(
    design: &DesignMatrix,
    y: &Array1<f64>,
    w: &WeightVector,
    columns: &[usize],
) -> Result<Array1<f64>> {
    let m = design.nrows();
    let k = columns.len();
    let mut b = Array2::<f64>::zeros((m, k));
    let mut z = Array1::<f64>::zeros(m);
    for i in 0..m {
        let sw = w.values()[i].sqrt();
        let row = design.row(i);
        for (a, &col) in columns.iter().enumerate() {
            b[[i, a]] = sw * row[col];
        }
        z[i] = sw * y[i];
    }
    linalg::qr_least_squares(&b, &z)
}

fn weighted_rms(
    design: &DesignMatrix,
    y: &Array1<f64>,
    w: &WeightVector,
    coefficients: &Array1<f64>,
) -> f64 {
    let m = design.nrows();
    let mut acc = 0.0;
    for i in 0..m {
        let row = design.row(i);
        let pred: f64 = row.iter().zip(coefficients.iter()).map(|(p, c)| p * c).sum();
        let r = y[i] - pred;
        acc += w.values()[i] * r * r;
    }
    (acc / m as f64).sqrt()
}

fn christoffel_of_columns(design: &DesignMatrix, columns: &[usize]) -> Result<ChristoffelDiagnostics> {
    let m = design.nrows();
    let mut sub = Array2::<f64>::zeros((m, columns.len()));
    for i in 0..m {
        let row = design.row(i);
        for (a, &col) in columns.iter().enumerate() {
            sub[[i, a]] = row[col];
        }
    }
    christoffel(&DesignMatrix::from_matrix(sub))
}
