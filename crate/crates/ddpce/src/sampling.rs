//! Monte Carlo input sampling and CSV persistence of sample sets.
//!
//! Draws are reproducible: every dimension reads from its own ChaCha12
//! stream derived from the seed and the dimension index, so adding a
//! dimension never perturbs the values drawn for earlier ones.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Marginal distribution of one input dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Dist {
    /// Uniform on the half-open interval `[lo, hi)`.
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, std: f64 },
    /// Equal-probability draw from a finite value set.
    DiscreteUniform { values: Vec<f64> },
    /// Resampling of observed values loaded from a file.
    Empirical { values: Vec<f64>, source: String },
}

impl Dist {
    /// Loads an empirical distribution: one value per line, `#` comments
    /// and blank lines ignored.
    pub fn empirical_from_file(path: &Path) -> Result<Dist> {
        let text = fs::read_to_string(path)?;
        let display = path.display().to_string();
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: lineno + 1,
                column: 1,
                message: format!("expected a number, found {line:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: display.clone(),
                    line: lineno + 1,
                    column: 1,
                    message: "non-finite value".into(),
                });
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::Empty(format!("empirical file {display} has no values")));
        }
        Ok(Dist::Empirical { values, source: display })
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Dist::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::Config(format!(
                        "dimension {dim}: uniform requires lo < hi, got [{lo}, {hi})"
                    )));
                }
            }
            Dist::Normal { mean, std } => {
                if !(mean.is_finite() && std.is_finite() && *std > 0.0) {
                    return Err(Error::Config(format!(
                        "dimension {dim}: normal requires std > 0, got std = {std}"
                    )));
                }
            }
            Dist::DiscreteUniform { values } | Dist::Empirical { values, .. } => {
                if values.is_empty() {
                    return Err(Error::Config(format!(
                        "dimension {dim}: value set must be non-empty"
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(format!(
                        "dimension {dim}: value set contains a non-finite entry"
                    )));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> f64 {
        match self {
            Dist::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            Dist::Normal { mean, std } => {
                // Parameters validated at construction.
                Normal::new(*mean, *std).expect("validated normal").sample(rng)
            }
            Dist::DiscreteUniform { values } | Dist::Empirical { values, .. } => {
                values[rng.gen_range(0..values.len())]
            }
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Uniform { lo, hi } => write!(f, "uniform({lo}, {hi})"),
            Dist::Normal { mean, std } => write!(f, "normal({mean}, {std})"),
            Dist::DiscreteUniform { values } => {
                write!(f, "discrete(")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            Dist::Empirical { source, .. } => write!(f, "empirical({source})"),
        }
    }
}

/// Per-dimension distribution descriptors for the uncertain input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    dims: Vec<Dist>,
}

impl InputSpec {
    pub fn new(dims: Vec<Dist>) -> Result<InputSpec> {
        if dims.is_empty() {
            return Err(Error::Config("input spec needs at least one dimension".into()));
        }
        for (j, d) in dims.iter().enumerate() {
            d.validate(j + 1)?;
        }
        Ok(InputSpec { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dists(&self) -> &[Dist] {
        &self.dims
    }
}

/// A matrix of input realizations with optional paired responses.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    x: Array2<f64>,
    y: Option<Array1<f64>>,
    seed: Option<u64>,
}

impl SampleSet {
    /// Builds a sample set from raw parts, enforcing shape and finiteness.
    pub fn new(x: Array2<f64>, y: Option<Array1<f64>>, seed: Option<u64>) -> Result<SampleSet> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Empty("sample matrix must be at least 1x1".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericRange("sample matrix contains a non-finite entry".into()));
        }
        if let Some(y) = &y {
            if y.len() != x.nrows() {
                return Err(Error::Config(format!(
                    "response length {} does not match {} rows",
                    y.len(),
                    x.nrows()
                )));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericRange("response vector contains a non-finite entry".into()));
            }
        }
        Ok(SampleSet { x, y, seed })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> Option<&Array1<f64>> {
        self.y.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Returns a copy with the responses replaced.
    pub fn with_responses(&self, y: Array1<f64>) -> Result<SampleSet> {
        SampleSet::new(self.x.clone(), Some(y), self.seed)
    }

    /// Column `j` of the sample matrix as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.column(j).to_vec()
    }
}

/// Draws `m` realizations of the input vector.
///
/// Dimension `j` consumes stream `j` of a ChaCha12 generator keyed by
/// `seed`, so identical `(spec, m, seed)` triples are bit-reproducible and
/// independent of how many other dimensions exist.
pub fn draw_samples(spec: &InputSpec, m: usize, seed: u64) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let d = spec.dim();
    let mut x = Array2::<f64>::zeros((m, d));
    for (j, dist) in spec.dists().iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        for i in 0..m {
            x[[i, j]] = dist.draw(&mut rng);
        }
    }
    SampleSet::new(x, None, Some(seed))
}

/// Reads a sample set from the CSV schema `x1,...,xd[,y]`.
pub fn load_samples(path: &Path) -> Result<SampleSet> {
    let text = fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: display.clone(),
        line: 1,
        column: 1,
        message: "missing header row".into(),
    })?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let has_y = columns.last() == Some(&"y");
    let d = if has_y { columns.len() - 1 } else { columns.len() };
    if d == 0 {
        return Err(Error::Parse {
            path: display.clone(),
            line: 1,
            column: 1,
            message: "header declares no input columns".into(),
        });
    }
    for (j, name) in columns.iter().take(d).enumerate() {
        let expect = format!("x{}", j + 1);
        if *name != expect {
            return Err(Error::Parse {
                path: display.clone(),
                line: 1,
                column: j + 1,
                message: format!("expected column {expect:?}, found {name:?}"),
            });
        }
    }

    let mut rows: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut m = 0usize;
    for (lineno, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').collect();
        if cells.len() != columns.len() {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno + 1,
                column: cells.len(),
                message: format!("expected {} cells, found {}", columns.len(), cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: lineno + 1,
                column: j + 1,
                message: format!("expected a number, found {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: display.clone(),
                    line: lineno + 1,
                    column: j + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            if has_y && j == d {
                ys.push(v);
            } else {
                rows.push(v);
            }
        }
        m += 1;
    }
    if m == 0 {
        return Err(Error::Empty(format!("{display} has a header but no data rows")));
    }
    let x = Array2::from_shape_vec((m, d), rows)
        .map_err(|e| Error::Config(format!("internal shape error: {e}")))?;
    let y = if has_y { Some(Array1::from_vec(ys)) } else { None };
    SampleSet::new(x, y, None)
}

/// Writes the CSV schema `x1,...,xd[,y]` with LF line endings.
///
/// Values are printed with the shortest representation that parses back to
/// the same f64, so a save/load round trip is exact.
pub fn save_samples(set: &SampleSet, path: &Path) -> Result<()> {
    let mut out = String::new();
    let d = set.dim();
    for j in 0..d {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&format!("x{}", j + 1));
    }
    if set.y().is_some() {
        out.push_str(",y");
    }
    out.push('\n');
    for i in 0..set.len() {
        for j in 0..d {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", set.x()[[i, j]]));
        }
        if let Some(y) = set.y() {
            out.push_str(&format!(",{}", y[i]));
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}
