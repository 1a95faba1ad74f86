//! Evaluation of fitted expansions and statistics derived from them.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::basis::{EvalScratch, MultivariateBasis};
use crate::error::{Error, Result};
use crate::regression::{FitResult, Scheme};
use crate::sampling::{draw_samples, InputSpec};

/// Scalar summary of a fit, sufficient to reload and evaluate a surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct FitInfo {
    pub scheme: Scheme,
    /// Stability score of the unweighted design.
    pub score_lr: f64,
    /// Stability score of the weighted system G_w(alpha).
    pub weighted_score_lr: f64,
    pub gram_condition: f64,
    pub weighted_gram_condition: f64,
    pub residual_rms: f64,
}

impl FitInfo {
    pub fn from_fit(fit: &FitResult) -> FitInfo {
        FitInfo {
            scheme: fit.weights.scheme(),
            score_lr: fit.diagnostics.score_lr(),
            weighted_score_lr: fit.weighted.score_lr,
            gram_condition: fit.diagnostics.gram_condition(),
            weighted_gram_condition: fit.weighted.gram_condition,
            residual_rms: fit.residual_rms,
        }
    }
}

/// Batch prediction values plus how many points fell outside the
/// per-dimension range of the training samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchPrediction {
    pub values: Vec<f64>,
    pub extrapolated: usize,
}

/// A fitted expansion bound to its basis, evaluable at new points.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    basis: MultivariateBasis,
    coefficients: Array1<f64>,
    active_set: Vec<usize>,
    info: FitInfo,
}

impl SurrogateModel {
    pub fn new(basis: MultivariateBasis, fit: &FitResult) -> Result<SurrogateModel> {
        if fit.coefficients.len() != basis.len() {
            return Err(Error::Config(format!(
                "{} coefficients do not match basis of size {}",
                fit.coefficients.len(),
                basis.len()
            )));
        }
        Ok(SurrogateModel {
            basis,
            coefficients: fit.coefficients.clone(),
            active_set: fit.active_set.clone(),
            info: FitInfo::from_fit(fit),
        })
    }

    pub fn basis(&self) -> &MultivariateBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &Array1<f64> {
        &self.coefficients
    }

    pub fn active_set(&self) -> &[usize] {
        &self.active_set
    }

    pub fn info(&self) -> &FitInfo {
        &self.info
    }

    /// Evaluates sum_j c_j psi_j(x) at one point.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.basis.input_dim() {
            return Err(Error::Config(format!(
                "point has {} coordinates, model expects {}",
                x.len(),
                self.basis.input_dim()
            )));
        }
        let mut scratch = EvalScratch::new(&self.basis);
        let mut row = vec![0.0; self.basis.len()];
        Ok(self.predict_with(x, &mut scratch, &mut row))
    }

    fn predict_with(&self, x: &[f64], scratch: &mut EvalScratch, row: &mut [f64]) -> f64 {
        self.basis.evaluate_into(x, scratch, row);
        row.iter().zip(self.coefficients.iter()).map(|(p, c)| p * c).sum()
    }

    /// Elementwise prediction over the rows of `x`, counting points outside
    /// the training hull.
    pub fn predict_batch(&self, x: &Array2<f64>) -> Result<BatchPrediction> {
        if x.ncols() != self.basis.input_dim() {
            return Err(Error::Config(format!(
                "batch has {} columns, model expects {}",
                x.ncols(),
                self.basis.input_dim()
            )));
        }
        let mut scratch = EvalScratch::new(&self.basis);
        let mut row = vec![0.0; self.basis.len()];
        let mut point = vec![0.0; x.ncols()];
        let mut values = Vec::with_capacity(x.nrows());
        let mut extrapolated = 0;
        for i in 0..x.nrows() {
            for (j, p) in point.iter_mut().enumerate() {
                *p = x[[i, j]];
            }
            if !self.basis.in_sample_hull(&point) {
                extrapolated += 1;
            }
            values.push(self.predict_with(&point, &mut scratch, &mut row));
        }
        Ok(BatchPrediction { values, extrapolated })
    }

    /// Mean and variance of the surrogate under the empirical training
    /// measure: mean = c_0, variance = sum of the remaining c_j^2.
    ///
    /// Exact when the design Gram is the identity; univariate bases satisfy
    /// that by construction, tensorized bases up to the tensor Gram
    /// convergence error.
    pub fn analytic_moments(&self) -> (f64, f64) {
        let mean = self.coefficients[0];
        let variance = self.coefficients.iter().skip(1).map(|c| c * c).sum();
        (mean, variance)
    }

    /// Draws `m` inputs from `spec` and predicts each; deterministic in the
    /// seed.
    pub fn sample_output_distribution(
        &self,
        spec: &InputSpec,
        m: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        let samples = draw_samples(spec, m, seed)?;
        Ok(self.predict_batch(samples.x())?.values)
    }

    /// Text serialization embedding the basis, so the model reloads without
    /// the original samples.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ddpce-model 1");
        match self.info.scheme {
            Scheme::Ols => s.push_str("scheme ols\n"),
            Scheme::Cls => s.push_str("scheme cls\n"),
            Scheme::Tempered(a) => {
                let _ = writeln!(s, "scheme tempered {a}");
            }
        }
        let _ = writeln!(s, "score_lr {}", self.info.score_lr);
        let _ = writeln!(s, "weighted_score_lr {}", self.info.weighted_score_lr);
        let _ = writeln!(s, "gram_condition {}", self.info.gram_condition);
        let _ = writeln!(s, "weighted_gram_condition {}", self.info.weighted_gram_condition);
        let _ = writeln!(s, "residual_rms {}", self.info.residual_rms);
        let _ = write!(s, "active {}", self.active_set.len());
        for i in &self.active_set {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
        let _ = write!(s, "coeffs {}", self.coefficients.len());
        for c in &self.coefficients {
            let _ = write!(s, " {c}");
        }
        s.push('\n');
        s.push_str(&self.basis.to_text());
        s
    }

    pub fn from_text(text: &str) -> Result<SurrogateModel> {
        let fail = |line: usize, message: &str| Error::Parse {
            path: "<model text>".into(),
            line,
            column: 1,
            message: message.into(),
        };
        let mut lines = text.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, Vec<String>)> {
            for (i, l) in lines.by_ref() {
                if l.trim().is_empty() {
                    continue;
                }
                let fields: Vec<String> = l.split_whitespace().map(str::to_string).collect();
                if fields.first().map(String::as_str) != Some(expect) {
                    return Err(Error::Parse {
                        path: "<model text>".into(),
                        line: i + 1,
                        column: 1,
                        message: format!("expected {expect:?}, found {l:?}"),
                    });
                }
                return Ok((i + 1, fields));
            }
            Err(Error::Parse {
                path: "<model text>".into(),
                line: 0,
                column: 1,
                message: format!("missing {expect:?} line"),
            })
        };

        let (l0, header) = next("ddpce-model")?;
        if header != ["ddpce-model", "1"] {
            return Err(fail(l0, "unsupported model format"));
        }
        let (ls, scheme_fields) = next("scheme")?;
        let scheme = match scheme_fields.iter().map(String::as_str).collect::<Vec<_>>().as_slice()
        {
            ["scheme", "ols"] => Scheme::Ols,
            ["scheme", "cls"] => Scheme::Cls,
            ["scheme", "tempered", a] => Scheme::Tempered(
                a.parse().map_err(|_| fail(ls, "malformed tempering exponent"))?,
            ),
            _ => return Err(fail(ls, "malformed scheme line")),
        };
        let mut scalar = |name: &str| -> Result<f64> {
            let (ln, fields) = next(name)?;
            if fields.len() != 2 {
                return Err(fail(ln, "expected a single value"));
            }
            fields[1].parse().map_err(|_| fail(ln, "malformed number"))
        };
        let score_lr = scalar("score_lr")?;
        let weighted_score_lr = scalar("weighted_score_lr")?;
        let gram_condition = scalar("gram_condition")?;
        let weighted_gram_condition = scalar("weighted_gram_condition")?;
        let residual_rms = scalar("residual_rms")?;

        let (la, active_fields) = next("active")?;
        let count: usize = active_fields
            .get(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| fail(la, "malformed active count"))?;
        if active_fields.len() != count + 2 {
            return Err(fail(la, "active count mismatch"));
        }
        let active_set = active_fields[2..]
            .iter()
            .map(|v| v.parse::<usize>().map_err(|_| fail(la, "malformed active index")))
            .collect::<Result<Vec<usize>>>()?;

        let (lc, coeff_fields) = next("coeffs")?;
        let n: usize = coeff_fields
            .get(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| fail(lc, "malformed coefficient count"))?;
        if coeff_fields.len() != n + 2 {
            return Err(fail(lc, "coefficient count mismatch"));
        }
        let coefficients = coeff_fields[2..]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| fail(lc, "malformed coefficient")))
            .collect::<Result<Vec<f64>>>()?;

        let basis_start = text
            .find("ddpce-basis")
            .ok_or_else(|| fail(lc + 1, "missing embedded basis block"))?;
        let basis = MultivariateBasis::from_text(&text[basis_start..])?;
        if coefficients.len() != basis.len() {
            return Err(Error::Config(format!(
                "{} coefficients do not match basis of size {}",
                coefficients.len(),
                basis.len()
            )));
        }
        Ok(SurrogateModel {
            basis,
            coefficients: Array1::from_vec(coefficients),
            active_set,
            info: FitInfo {
                scheme,
                score_lr,
                weighted_score_lr,
                gram_condition,
                weighted_gram_condition,
                residual_rms,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SurrogateModel> {
        let text = fs::read_to_string(path)?;
        SurrogateModel::from_text(&text)
    }
}
