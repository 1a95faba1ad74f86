//! Orthonormal polynomial bases built directly from sample data.
//!
//! Univariate bases are orthonormalized against the empirical measure of
//! the construction samples: (1/M) sum_i phi_k(x_i) phi_l(x_i) = delta_kl.
//! The reference construction is modified Gram-Schmidt (with one
//! re-orthogonalization pass) on the sample-evaluated monomial matrix;
//! a discrete Stieltjes three-term recurrence is kept as an independent
//! cross-check route. Multivariate bases are tensor products truncated by
//! total degree.
//!
//! Samples are affinely standardized to zero mean / unit variance before
//! orthogonalization because raw-moment conditioning degrades quickly with
//! scale; the map is stored and the composed polynomials are exposed in
//! original coordinates.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Default cap on the number of tensorized basis terms.
pub const DEFAULT_BASIS_CAP: usize = 100_000;

/// Raw empirical moments mu_r = (1/M) sum_i x_i^r for r = 0..=max_order.
///
/// mu_0 is exactly 1.
pub fn empirical_moments(samples: &[f64], max_order: usize) -> Vec<f64> {
    let m = samples.len() as f64;
    let mut mu = vec![0.0; max_order + 1];
    mu[0] = 1.0;
    for r in 1..=max_order {
        mu[r] = samples.iter().map(|&x| x.powi(r as i32)).sum::<f64>() / m;
    }
    mu
}

/// Univariate polynomials orthonormal w.r.t. the empirical sample measure.
///
/// Row `k` of [`UnivariateBasis::coeffs`] holds the monomial coefficients of
/// phi_k in original coordinates (lower triangular, positive leading
/// coefficient). Evaluation goes through the standardized coordinates for
/// numerical robustness.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateBasis {
    degree: usize,
    /// Monomial coefficients in original coordinates, row k = phi_k.
    coeffs: Array2<f64>,
    /// Monomial coefficients in standardized coordinates z = (x-shift)/scale.
    z_coeffs: Array2<f64>,
    shift: f64,
    scale: f64,
    sample_min: f64,
    sample_max: f64,
    /// Empirical moments mu_0..mu_2p of the construction samples.
    moments: Vec<f64>,
}

impl UnivariateBasis {
    /// Builds phi_0..phi_p by modified Gram-Schmidt on the standardized
    /// sample Vandermonde matrix.
    pub fn build(samples: &[f64], degree: usize) -> Result<UnivariateBasis> {
        let prep = Preparation::new(samples, degree)?;
        let m = samples.len();
        let p = degree;

        // Sample values of the orthonormalized columns, plus the coefficient
        // rows that express each column in z-monomials.
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
        let mut c = Array2::<f64>::zeros((p + 1, p + 1));

        let mut zpow: Vec<f64> = vec![1.0; m];
        for k in 0..=p {
            if k > 0 {
                for (v, z) in zpow.iter_mut().zip(&prep.z) {
                    *v *= z;
                }
            }
            let mut w = zpow.clone();
            let mut row = vec![0.0; p + 1];
            row[k] = 1.0;
            // Two MGS passes keep the discrete Gram at machine precision.
            for _ in 0..2 {
                for (j, qj) in q.iter().enumerate() {
                    let proj = dot_mean(&w, qj);
                    for (wi, qi) in w.iter_mut().zip(qj) {
                        *wi -= proj * qi;
                    }
                    for t in 0..=j {
                        row[t] -= proj * c[[j, t]];
                    }
                }
            }
            let norm_sq = dot_mean(&w, &w);
            if !(norm_sq > f64::EPSILON * (k as f64 + 1.0)) {
                return Err(Error::DegenerateSamples {
                    distinct: prep.distinct,
                    max_degree: k.saturating_sub(1),
                    requested: p,
                });
            }
            let norm = norm_sq.sqrt();
            for wi in &mut w {
                *wi /= norm;
            }
            for t in 0..=k {
                row[t] /= norm;
            }
            // Sign convention: positive leading coefficient.
            if row[k] < 0.0 {
                for t in 0..=k {
                    row[t] = -row[t];
                }
                for wi in &mut w {
                    *wi = -*wi;
                }
            }
            for t in 0..=k {
                c[[k, t]] = row[t];
            }
            q.push(w);
        }

        Ok(prep.finish(c))
    }

    /// Alternative construction via the discrete Stieltjes procedure: the
    /// monic three-term recurrence with coefficients taken from empirical
    /// inner products. Retained as an independent cross-check of
    /// [`UnivariateBasis::build`].
    pub fn build_stieltjes(samples: &[f64], degree: usize) -> Result<UnivariateBasis> {
        let prep = Preparation::new(samples, degree)?;
        let m = samples.len();
        let p = degree;

        // Monic pi_k tracked both as sample values and z-monomial rows.
        let mut c = Array2::<f64>::zeros((p + 1, p + 1));
        let mut monic = Array2::<f64>::zeros((p + 1, p + 1));
        monic[[0, 0]] = 1.0;
        let mut prev: Vec<f64> = vec![0.0; m];
        let mut cur: Vec<f64> = vec![1.0; m];
        let mut nsq_prev = 0.0;
        let mut nsq_cur = 1.0;

        for k in 0..=p {
            if !(nsq_cur > f64::EPSILON * (k as f64 + 1.0)) {
                return Err(Error::DegenerateSamples {
                    distinct: prep.distinct,
                    max_degree: k.saturating_sub(1),
                    requested: p,
                });
            }
            let norm = nsq_cur.sqrt();
            for t in 0..=k {
                c[[k, t]] = monic[[k, t]] / norm;
            }
            // Monic leading coefficient is 1, so rows are already
            // positively signed.
            if k == p {
                break;
            }

            let a = prep
                .z
                .iter()
                .zip(&cur)
                .map(|(&z, &v)| z * v * v)
                .sum::<f64>()
                / (m as f64)
                / nsq_cur;
            let b = if k == 0 { 0.0 } else { nsq_cur / nsq_prev };

            let mut next = vec![0.0; m];
            for i in 0..m {
                next[i] = (prep.z[i] - a) * cur[i] - b * prev[i];
            }
            // Coefficient recurrence: pi_{k+1} = (z - a) pi_k - b pi_{k-1}.
            for t in 0..=k {
                monic[[k + 1, t + 1]] += monic[[k, t]];
                monic[[k + 1, t]] -= a * monic[[k, t]];
            }
            if k > 0 {
                for t in 0..k {
                    monic[[k + 1, t]] -= b * monic[[k - 1, t]];
                }
            }

            prev = cur;
            cur = next;
            nsq_prev = nsq_cur;
            nsq_cur = dot_mean(&cur, &cur);
        }

        Ok(prep.finish(c))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monomial coefficient table in original coordinates; row k = phi_k.
    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    /// Empirical moments mu_0..mu_2p of the construction samples.
    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    /// Range of the construction samples (the per-dimension training hull).
    pub fn sample_range(&self) -> (f64, f64) {
        (self.sample_min, self.sample_max)
    }

    pub fn standardization(&self) -> (f64, f64) {
        (self.shift, self.scale)
    }

    /// Evaluates phi_k at x.
    pub fn evaluate(&self, k: usize, x: f64) -> f64 {
        let z = (x - self.shift) / self.scale;
        horner(self.z_coeffs.row(k).as_slice().unwrap(), k, z)
    }

    /// Evaluates phi_0..phi_p at x into `out` (length >= degree + 1).
    pub fn evaluate_all(&self, x: f64, out: &mut [f64]) {
        let z = (x - self.shift) / self.scale;
        for k in 0..=self.degree {
            out[k] = horner(self.z_coeffs.row(k).as_slice().unwrap(), k, z);
        }
    }
}

fn dot_mean(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len() as f64;
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / m
}

fn horner(coeffs: &[f64], degree: usize, z: f64) -> f64 {
    let mut v = coeffs[degree];
    for t in (0..degree).rev() {
        v = v * z + coeffs[t];
    }
    v
}

/// Shared setup for both construction routes.
struct Preparation {
    z: Vec<f64>,
    shift: f64,
    scale: f64,
    distinct: usize,
    degree: usize,
    sample_min: f64,
    sample_max: f64,
    moments: Vec<f64>,
}

impl Preparation {
    fn new(samples: &[f64], degree: usize) -> Result<Preparation> {
        if samples.is_empty() {
            return Err(Error::Empty("basis construction needs samples".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = 1;
        for w in sorted.windows(2) {
            if w[0] != w[1] {
                distinct += 1;
            }
        }
        if distinct < degree + 1 {
            return Err(Error::DegenerateSamples {
                distinct,
                max_degree: distinct - 1,
                requested: degree,
            });
        }
        let m = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / m;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let z: Vec<f64> = samples.iter().map(|x| (x - mean) / scale).collect();
        Ok(Preparation {
            z,
            shift: mean,
            scale,
            distinct,
            degree,
            sample_min: sorted[0],
            sample_max: sorted[sorted.len() - 1],
            moments: empirical_moments(samples, 2 * degree),
        })
    }

    fn finish(self, z_coeffs: Array2<f64>) -> UnivariateBasis {
        let coeffs = compose_affine(&z_coeffs, self.shift, self.scale);
        UnivariateBasis {
            degree: self.degree,
            coeffs,
            z_coeffs,
            shift: self.shift,
            scale: self.scale,
            sample_min: self.sample_min,
            sample_max: self.sample_max,
            moments: self.moments,
        }
    }
}

/// Rewrites polynomials in z = (x - shift)/scale as polynomials in x.
fn compose_affine(z_coeffs: &Array2<f64>, shift: f64, scale: f64) -> Array2<f64> {
    let n = z_coeffs.nrows();
    let mut binom = vec![vec![0.0f64; n]; n];
    for (t, row) in binom.iter_mut().enumerate() {
        row[0] = 1.0;
        for s in 1..=t {
            row[s] = row[s - 1] * ((t - s + 1) as f64) / (s as f64);
        }
    }
    let mut out = Array2::<f64>::zeros((n, n));
    for k in 0..n {
        for t in 0..=k {
            let ct = z_coeffs[[k, t]];
            if ct == 0.0 {
                continue;
            }
            let inv_scale_t = scale.powi(-(t as i32));
            for s in 0..=t {
                out[[k, s]] += ct * inv_scale_t * binom[t][s] * (-shift).powi((t - s) as i32);
            }
        }
    }
    out
}

/// Total-degree truncated set of tensorization multi-indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    indices: Vec<Vec<usize>>,
    dims: usize,
    degree: usize,
}

impl MultiIndexSet {
    /// Enumerates all nu with |nu| <= degree in canonical order: total
    /// degree ascending, then lexicographically descending, so the first
    /// index is always the zero vector.
    pub fn total_degree(dims: usize, degree: usize) -> Result<MultiIndexSet> {
        Self::total_degree_capped(dims, degree, DEFAULT_BASIS_CAP)
    }

    pub fn total_degree_capped(dims: usize, degree: usize, cap: usize) -> Result<MultiIndexSet> {
        if dims == 0 {
            return Err(Error::Config("multi-index set needs at least one dimension".into()));
        }
        let count = binomial(dims as u128 + degree as u128, degree as u128)
            .ok_or(Error::BasisTooLarge { terms: u128::MAX, cap })?;
        if count > cap as u128 {
            return Err(Error::BasisTooLarge { terms: count, cap });
        }
        let mut indices = Vec::with_capacity(count as usize);
        let mut current = vec![0usize; dims];
        for total in 0..=degree {
            enumerate(0, total, &mut current, &mut indices);
        }
        debug_assert_eq!(indices.len(), count as usize);
        Ok(MultiIndexSet { indices, dims, degree })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }
}

fn enumerate(dim: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if dim + 1 == current.len() {
        current[dim] = remaining;
        out.push(current.clone());
        return;
    }
    for v in (0..=remaining).rev() {
        current[dim] = v;
        enumerate(dim + 1, remaining - v, current, out);
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// Tensorized multivariate basis: per-dimension univariate bases plus a
/// truncated multi-index set.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateBasis {
    dims: Vec<UnivariateBasis>,
    index_set: MultiIndexSet,
}

impl MultivariateBasis {
    /// Builds one univariate basis per column of `x` at the given total
    /// degree and tensorizes them.
    pub fn build(x: &Array2<f64>, degree: usize) -> Result<MultivariateBasis> {
        Self::build_capped(x, degree, DEFAULT_BASIS_CAP)
    }

    pub fn build_capped(x: &Array2<f64>, degree: usize, cap: usize) -> Result<MultivariateBasis> {
        let d = x.ncols();
        let index_set = MultiIndexSet::total_degree_capped(d, degree, cap)?;
        let mut dims = Vec::with_capacity(d);
        for j in 0..d {
            let col = x.column(j).to_vec();
            dims.push(UnivariateBasis::build(&col, degree)?);
        }
        Ok(MultivariateBasis { dims, index_set })
    }

    pub fn from_parts(dims: Vec<UnivariateBasis>, index_set: MultiIndexSet) -> Result<MultivariateBasis> {
        if dims.len() != index_set.dims() {
            return Err(Error::Config(format!(
                "{} univariate bases do not match {}-dimensional index set",
                dims.len(),
                index_set.dims()
            )));
        }
        for (j, (b, max_nu)) in dims
            .iter()
            .zip(index_set.indices().iter().fold(vec![0usize; dims.len()], |mut acc, nu| {
                for (a, v) in acc.iter_mut().zip(nu) {
                    *a = (*a).max(*v);
                }
                acc
            }))
            .enumerate()
        {
            if b.degree() < max_nu {
                return Err(Error::Config(format!(
                    "dimension {j}: univariate degree {} below index requirement {max_nu}",
                    b.degree()
                )));
            }
        }
        Ok(MultivariateBasis { dims, index_set })
    }

    /// Number of input dimensions d.
    pub fn input_dim(&self) -> usize {
        self.dims.len()
    }

    /// Number of basis functions N.
    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn univariate(&self, j: usize) -> &UnivariateBasis {
        &self.dims[j]
    }

    /// True when x lies inside the per-dimension range of the construction
    /// samples.
    pub fn in_sample_hull(&self, x: &[f64]) -> bool {
        self.dims.iter().zip(x).all(|(b, &v)| {
            let (lo, hi) = b.sample_range();
            v >= lo && v <= hi
        })
    }

    /// Evaluates all N basis functions at the point x.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Config(format!(
                "point has {} coordinates, basis expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut scratch = EvalScratch::new(self);
        let mut out = vec![0.0; self.len()];
        self.evaluate_into(x, &mut scratch, &mut out);
        Ok(out)
    }

    /// Non-allocating evaluation used by design assembly and batch
    /// prediction. `x` must have length d and `out` length N.
    pub fn evaluate_into(&self, x: &[f64], scratch: &mut EvalScratch, out: &mut [f64]) {
        for (j, basis) in self.dims.iter().enumerate() {
            basis.evaluate_all(x[j], &mut scratch.uni[j]);
        }
        for (slot, nu) in out.iter_mut().zip(self.index_set.indices()) {
            let mut v = 1.0;
            for (j, &k) in nu.iter().enumerate() {
                if k > 0 {
                    v *= scratch.uni[j][k];
                }
            }
            *slot = v;
        }
    }

    /// Text serialization sufficient to reload the basis without the
    /// original samples.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ddpce-basis 1");
        let _ = writeln!(s, "dims {} degree {}", self.input_dim(), self.index_set.degree());
        for (j, b) in self.dims.iter().enumerate() {
            let _ = writeln!(
                s,
                "dim {} degree {} shift {} scale {} min {} max {}",
                j, b.degree, b.shift, b.scale, b.sample_min, b.sample_max
            );
            let _ = write!(s, "dim {j} moments");
            for m in &b.moments {
                let _ = write!(s, " {m}");
            }
            s.push('\n');
            for k in 0..=b.degree {
                let _ = write!(s, "dim {j} zrow {k}");
                for t in 0..=k {
                    let _ = write!(s, " {}", b.z_coeffs[[k, t]]);
                }
                s.push('\n');
            }
        }
        let _ = writeln!(s, "indices {}", self.len());
        for nu in self.index_set.indices() {
            let _ = write!(s, "idx");
            for v in nu {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        s.push_str("end\n");
        s
    }

    /// Parses the [`MultivariateBasis::to_text`] format.
    pub fn from_text(text: &str) -> Result<MultivariateBasis> {
        let mut parser = TextParser::new(text);
        parser.expect_line("ddpce-basis 1")?;
        let header = parser.next_fields()?;
        let (d, degree) = match header.as_slice() {
            ["dims", d, "degree", p] => (parse_usize(d)?, parse_usize(p)?),
            _ => return parser.fail("expected `dims <d> degree <p>`"),
        };

        let mut dims = Vec::with_capacity(d);
        for j in 0..d {
            let fields = parser.next_fields()?;
            let (pj, shift, scale, min, max) = match fields.as_slice() {
                ["dim", jj, "degree", p, "shift", s, "scale", c, "min", a, "max", b]
                    if parse_usize(jj)? == j =>
                {
                    (parse_usize(p)?, parse_f64(s)?, parse_f64(c)?, parse_f64(a)?, parse_f64(b)?)
                }
                _ => return parser.fail("expected per-dimension header"),
            };
            let fields = parser.next_fields()?;
            let moments = match fields.as_slice() {
                ["dim", jj, "moments", rest @ ..] if parse_usize(jj)? == j => rest
                    .iter()
                    .map(|v| parse_f64(v))
                    .collect::<Result<Vec<f64>>>()?,
                _ => return parser.fail("expected moments line"),
            };
            let mut z_coeffs = Array2::<f64>::zeros((pj + 1, pj + 1));
            for k in 0..=pj {
                let fields = parser.next_fields()?;
                match fields.as_slice() {
                    ["dim", jj, "zrow", kk, rest @ ..]
                        if parse_usize(jj)? == j && parse_usize(kk)? == k && rest.len() == k + 1 =>
                    {
                        for (t, v) in rest.iter().enumerate() {
                            z_coeffs[[k, t]] = parse_f64(v)?;
                        }
                    }
                    _ => return parser.fail("expected coefficient row"),
                }
            }
            let coeffs = compose_affine(&z_coeffs, shift, scale);
            dims.push(UnivariateBasis {
                degree: pj,
                coeffs,
                z_coeffs,
                shift,
                scale,
                sample_min: min,
                sample_max: max,
                moments,
            });
        }

        let fields = parser.next_fields()?;
        let n = match fields.as_slice() {
            ["indices", n] => parse_usize(n)?,
            _ => return parser.fail("expected `indices <N>`"),
        };
        let mut indices = Vec::with_capacity(n);
        for _ in 0..n {
            let fields = parser.next_fields()?;
            match fields.as_slice() {
                ["idx", rest @ ..] if rest.len() == d => {
                    indices.push(rest.iter().map(|v| parse_usize(v)).collect::<Result<Vec<usize>>>()?);
                }
                _ => return parser.fail("expected index line"),
            }
        }
        parser.expect_line("end")?;
        let index_set = MultiIndexSet { indices, dims: d, degree };
        MultivariateBasis::from_parts(dims, index_set)
    }
}

/// Reusable buffers for [`MultivariateBasis::evaluate_into`].
pub struct EvalScratch {
    uni: Vec<Vec<f64>>,
}

impl EvalScratch {
    pub fn new(basis: &MultivariateBasis) -> EvalScratch {
        EvalScratch {
            uni: basis.dims.iter().map(|b| vec![0.0; b.degree() + 1]).collect(),
        }
    }
}

struct TextParser<'a> {
    lines: std::str::Lines<'a>,
    lineno: usize,
}

impl<'a> TextParser<'a> {
    fn new(text: &'a str) -> TextParser<'a> {
        TextParser { lines: text.lines(), lineno: 0 }
    }

    fn next_raw(&mut self) -> Result<&'a str> {
        loop {
            self.lineno += 1;
            match self.lines.next() {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => return Ok(l.trim()),
                None => {
                    return Err(Error::Parse {
                        path: "<basis text>".into(),
                        line: self.lineno,
                        column: 1,
                        message: "unexpected end of input".into(),
                    })
                }
            }
        }
    }

    fn next_fields(&mut self) -> Result<Vec<&'a str>> {
        Ok(self.next_raw()?.split_whitespace().collect())
    }

    fn expect_line(&mut self, expected: &str) -> Result<()> {
        let line = self.next_raw()?;
        if line != expected {
            return Err(Error::Parse {
                path: "<basis text>".into(),
                line: self.lineno,
                column: 1,
                message: format!("expected {expected:?}, found {line:?}"),
            });
        }
        Ok(())
    }

    fn fail<T>(&self, message: &str) -> Result<T> {
        Err(Error::Parse {
            path: "<basis text>".into(),
            line: self.lineno,
            column: 1,
            message: message.into(),
        })
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Config(format!("expected an integer, found {s:?}")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Config(format!("expected a number, found {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Normal};

    fn gram(basis: &UnivariateBasis, samples: &[f64]) -> Array2<f64> {
        let p = basis.degree();
        let m = samples.len() as f64;
        let mut g = Array2::<f64>::zeros((p + 1, p + 1));
        let mut vals = vec![0.0; p + 1];
        for &x in samples {
            basis.evaluate_all(x, &mut vals);
            for k in 0..=p {
                for l in 0..=p {
                    g[[k, l]] += vals[k] * vals[l] / m;
                }
            }
        }
        g
    }

    fn max_gram_error(basis: &UnivariateBasis, samples: &[f64]) -> f64 {
        let g = gram(basis, samples);
        let p = basis.degree();
        let mut err: f64 = 0.0;
        for k in 0..=p {
            for l in 0..=p {
                let target = if k == l { 1.0 } else { 0.0 };
                err = err.max((g[[k, l]] - target).abs());
            }
        }
        err
    }

    #[test]
    fn moments_hand_sum() {
        let mu = empirical_moments(&[1.0, 2.0, 3.0], 2);
        assert_eq!(mu[0], 1.0);
        assert_abs_diff_eq!(mu[1], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mu[2], 14.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn moments_of_zero_sample() {
        let mu = empirical_moments(&[0.0], 4);
        assert_eq!(mu, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn symmetric_samples_kill_odd_moments() {
        let mu = empirical_moments(&[-1.0, 1.0], 3);
        assert_eq!(mu, vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn three_point_basis_matches_gram_schmidt_oracle() {
        // Empirical measure on {-1, 0, 1}: phi_0 = 1, phi_1 = sqrt(3/2) x,
        // phi_2 = (3x^2 - 2)/sqrt(2), derived by hand Gram-Schmidt.
        let samples = [-1.0, 0.0, 1.0];
        let b = UnivariateBasis::build(&samples, 2).unwrap();
        let c = b.coeffs();
        assert_abs_diff_eq!(c[[0, 0]], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[[1, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[[1, 1]], (1.5f64).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[[2, 0]], -2.0 / 2.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[[2, 1]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[[2, 2]], 3.0 / 2.0f64.sqrt(), epsilon = 1e-12);
        assert!(max_gram_error(&b, &samples) < 1e-12);
    }

    #[test]
    fn degree_zero_is_the_constant_one() {
        let b = UnivariateBasis::build(&[4.0, 4.0, 9.0], 0).unwrap();
        assert_abs_diff_eq!(b.coeffs()[[0, 0]], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.evaluate(0, 123.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_samples_approach_hermite() {
        // Orthonormal probabilists' Hermite: He_k / sqrt(k!).
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let samples: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let b = UnivariateBasis::build(&samples, 3).unwrap();
        let c = b.coeffs();
        let expected = [
            vec![1.0],
            vec![0.0, 1.0],
            vec![-1.0 / 2.0f64.sqrt(), 0.0, 1.0 / 2.0f64.sqrt()],
            vec![0.0, -3.0 / 6.0f64.sqrt(), 0.0, 1.0 / 6.0f64.sqrt()],
        ];
        for (k, row) in expected.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                assert!(
                    (c[[k, t]] - v).abs() < 0.05,
                    "coeff[{k},{t}] = {} vs Hermite {v}",
                    c[[k, t]]
                );
            }
        }
    }

    #[test]
    fn orthonormal_to_1e8_at_degree_six() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let samples: Vec<f64> = (0..1000).map(|_| rng.gen_range(-3.0..7.0)).collect();
        let b = UnivariateBasis::build(&samples, 6).unwrap();
        assert!(max_gram_error(&b, &samples) < 1e-8);
    }

    #[test]
    fn degenerate_samples_report_achievable_degree() {
        match UnivariateBasis::build(&[1.0, 1.0, 2.0], 2) {
            Err(Error::DegenerateSamples { distinct, max_degree, requested }) => {
                assert_eq!(distinct, 2);
                assert_eq!(max_degree, 1);
                assert_eq!(requested, 2);
            }
            other => panic!("expected degenerate-samples error, got {other:?}"),
        }
        // Duplicates are fine as long as enough distinct values remain.
        assert!(UnivariateBasis::build(&[1.0, 1.0, 2.0], 1).is_ok());
    }

    #[test]
    fn nesting_lower_degree_rows_are_a_prefix() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let samples: Vec<f64> = (0..300).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let b4 = UnivariateBasis::build(&samples, 4).unwrap();
        let b5 = UnivariateBasis::build(&samples, 5).unwrap();
        for k in 0..=4 {
            for t in 0..=k {
                assert_eq!(b4.z_coeffs[[k, t]], b5.z_coeffs[[k, t]]);
            }
        }
    }

    #[test]
    fn stieltjes_agrees_with_gram_schmidt() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let samples: Vec<f64> = (0..2000).map(|_| rng.gen_range(0.0..10.0)).collect();
        let mgs = UnivariateBasis::build(&samples, 6).unwrap();
        let st = UnivariateBasis::build_stieltjes(&samples, 6).unwrap();
        let mut diff: f64 = 0.0;
        for &x in &samples {
            for k in 0..=6 {
                diff = diff.max((mgs.evaluate(k, x) - st.evaluate(k, x)).abs());
            }
        }
        assert!(diff < 1e-6, "construction routes disagree by {diff}");
    }

    #[test]
    fn multi_index_counts_and_order() {
        let s = MultiIndexSet::total_degree(3, 2).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.indices()[0], vec![0, 0, 0]);

        let s = MultiIndexSet::total_degree(1, 5).unwrap();
        let got: Vec<usize> = s.indices().iter().map(|nu| nu[0]).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 4, 5]);

        let s = MultiIndexSet::total_degree(2, 1).unwrap();
        assert_eq!(s.indices(), &[vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn multi_index_cap_is_enforced() {
        match MultiIndexSet::total_degree_capped(3, 2, 9) {
            Err(Error::BasisTooLarge { terms, cap }) => {
                assert_eq!(terms, 10);
                assert_eq!(cap, 9);
            }
            other => panic!("expected basis-too-large, got {other:?}"),
        }
    }

    #[test]
    fn tensor_evaluation_matches_univariate_products() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut x = Array2::<f64>::zeros((200, 2));
        for v in x.iter_mut() {
            *v = rng.gen::<f64>() * 2.0 - 1.0;
        }
        let basis = MultivariateBasis::build(&x, 2).unwrap();
        let point = [0.3, -0.7];
        let vals = basis.evaluate(&point).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-14);
        for (v, nu) in vals.iter().zip(basis.index_set().indices()) {
            let expect: f64 = nu
                .iter()
                .enumerate()
                .map(|(j, &k)| basis.univariate(j).evaluate(k, point[j]))
                .product();
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn degree_one_truncation_excludes_cross_terms() {
        let s = MultiIndexSet::total_degree(2, 1).unwrap();
        assert!(!s.indices().iter().any(|nu| nu == &vec![1, 1]));
    }

    #[test]
    fn univariate_evaluation_example() {
        let b = UnivariateBasis::build(&[-1.0, 0.0, 1.0], 2).unwrap();
        assert_abs_diff_eq!(b.evaluate(0, 1.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.evaluate(1, 1.0), (1.5f64).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.evaluate(2, 1.0), 1.0 / 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn tensor_gram_converges_for_independent_dimensions() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let m = 50_000;
        let mut x = Array2::<f64>::zeros((m, 2));
        for i in 0..m {
            x[[i, 0]] = rng.gen::<f64>();
            x[[i, 1]] = rng.gen::<f64>() * 3.0 + 1.0;
        }
        let basis = MultivariateBasis::build(&x, 2).unwrap();
        let n = basis.len();
        let mut g = Array2::<f64>::zeros((n, n));
        let mut scratch = EvalScratch::new(&basis);
        let mut row = vec![0.0; n];
        for i in 0..m {
            let xi = [x[[i, 0]], x[[i, 1]]];
            basis.evaluate_into(&xi, &mut scratch, &mut row);
            for a in 0..n {
                for b in 0..n {
                    g[[a, b]] += row[a] * row[b] / m as f64;
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (g[[a, b]] - target).abs() < 0.05,
                    "tensor gram entry ({a},{b}) = {}",
                    g[[a, b]]
                );
            }
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let mut x = Array2::<f64>::zeros((120, 3));
        for v in x.iter_mut() {
            *v = rng.gen::<f64>() * 5.0;
        }
        let basis = MultivariateBasis::build(&x, 3).unwrap();
        let text = basis.to_text();
        let parsed = MultivariateBasis::from_text(&text).unwrap();
        assert_eq!(parsed, basis);
        let p = [1.25, 2.5, 3.75];
        assert_eq!(basis.evaluate(&p).unwrap(), parsed.evaluate(&p).unwrap());
    }
}
