//! Flat key=value experiment configuration.
//!
//! The format is line oriented and diff friendly: one `key = value` pair
//! per line, `#` starts a comment, keys are documented in the README.
//! Input dimensions are declared as `dim.1`, `dim.2`, ... with one of
//! `uniform(lo, hi)`, `normal(mean, std)`, `discrete(a, b, ...)`,
//! `discrete(a..b)` or `empirical(path)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::models::{DispatchConfig, PriorityLevel, Storage, TestFunction};
use crate::regression::{Scheme, SparseStop};
use crate::sampling::{Dist, InputSpec};

/// Ground-truth model evaluated inside the Monte Carlo loop.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSelector {
    Dispatch(DispatchConfig),
    Test(TestFunction),
}

impl ModelSelector {
    pub fn arity(&self) -> usize {
        match self {
            ModelSelector::Dispatch(_) => 3,
            ModelSelector::Test(f) => f.arity(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModelSelector::Dispatch(_) => "dispatch".into(),
            ModelSelector::Test(f) => f.name().into(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            ModelSelector::Dispatch(cfg) => Ok(crate::models::eval_dispatch(cfg, x)?.total_cost),
            ModelSelector::Test(f) => f.eval(x),
        }
    }
}

/// How a sweep value `a >= 0` maps onto the tempering exponent.
///
/// `Direct` applies the exponent literally (w_i proportional to K_i^a, so
/// a = -1 is the inverse-Christoffel weighting). `Inverse` negates the
/// sweep value, so a sweep labeled 0, 0.5, 1.0 tempers toward the
/// inverse-Christoffel limit with a = 1.0 being the classical weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaDirection {
    Direct,
    Inverse,
}

impl AlphaDirection {
    pub fn apply(&self, sweep_value: f64) -> f64 {
        match self {
            AlphaDirection::Direct => sweep_value,
            AlphaDirection::Inverse => -sweep_value,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AlphaDirection::Direct => "direct",
            AlphaDirection::Inverse => "inverse",
        }
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub input: InputSpec,
    pub model: ModelSelector,
    pub train_size: usize,
    pub ref_size: usize,
    pub degree: usize,
    /// Tempered sweep values, reported under their own labels.
    pub alphas: Vec<f64>,
    pub alpha_direction: AlphaDirection,
    /// Dedicated scheme rows (ols / cls) reported before the sweep.
    pub schemes: Vec<Scheme>,
    pub sparse: Option<SparseStop>,
    pub seed_train: u64,
    pub seed_ref: u64,
    pub quantile_levels: Vec<f64>,
    pub stability_threshold: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub basis_cap: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input.dim() != self.model.arity() {
            return Err(Error::Config(format!(
                "model {} takes {} inputs but {} dimensions are declared",
                self.model.label(),
                self.model.arity(),
                self.input.dim()
            )));
        }
        if self.train_size < 2 || self.ref_size < 2 {
            return Err(Error::Config("train_size and ref_size must be at least 2".into()));
        }
        if self.alphas.is_empty() && self.schemes.is_empty() {
            return Err(Error::Config("no cases requested: alphas and schemes are both empty".into()));
        }
        for &level in &self.quantile_levels {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::Config(format!("quantile level {level} outside (0, 1)")));
            }
        }
        for required in [0.05, 0.95] {
            if !self.quantile_levels.contains(&required) {
                return Err(Error::Config(format!(
                    "quantile_levels must include {required} for the deviation columns"
                )));
            }
        }
        if let ModelSelector::Dispatch(cfg) = &self.model {
            cfg.validate()?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path)?;
        Self::from_str_named(&text, &path.display().to_string())
    }

    pub fn from_str_named(text: &str, name: &str) -> Result<ExperimentConfig> {
        let raw = RawConfig::parse(text, name)?;
        raw.build()
    }
}

/// Key=value pairs with consumption tracking so unknown keys are reported.
struct RawConfig {
    name: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str, name: &str) -> Result<RawConfig> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: name.into(),
                    line: lineno + 1,
                    column: 1,
                    message: format!("expected `key = value`, found {line:?}"),
                });
            };
            let key = key.trim().to_string();
            if entries.insert(key.clone(), (lineno + 1, value.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    path: name.into(),
                    line: lineno + 1,
                    column: 1,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(RawConfig { name: name.into(), entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::Config(format!("{}: missing required key {key:?}", self.name)))
    }

    fn build(mut self) -> Result<ExperimentConfig> {
        let model_name = self.require("model")?;

        let mut dims: Vec<Dist> = Vec::new();
        loop {
            let key = format!("dim.{}", dims.len() + 1);
            match self.take(&key) {
                Some(value) => dims.push(parse_dist(&value)?),
                None => break,
            }
        }
        if dims.is_empty() {
            return Err(Error::Config(format!("{}: no input dimensions (dim.1 = ...)", self.name)));
        }
        let input = InputSpec::new(dims)?;

        let model = if model_name == "dispatch" {
            ModelSelector::Dispatch(self.dispatch_config()?)
        } else {
            ModelSelector::Test(TestFunction::from_name(&model_name)?)
        };

        let train_size = parse_num::<usize>(&self.require("train_size")?)?;
        let ref_size = parse_num::<usize>(&self.require("ref_size")?)?;
        let degree = parse_num::<usize>(&self.require("degree")?)?;

        let alphas = match self.take("alphas") {
            Some(v) if !v.is_empty() => parse_list(&v)?,
            _ => Vec::new(),
        };
        let alpha_direction = match self.take("alpha_direction").as_deref() {
            None | Some("direct") => AlphaDirection::Direct,
            Some("inverse") => AlphaDirection::Inverse,
            Some(other) => {
                return Err(Error::Config(format!(
                    "alpha_direction must be `direct` or `inverse`, got {other:?}"
                )))
            }
        };
        let schemes = match self.take("schemes") {
            Some(v) if !v.is_empty() => v
                .split(',')
                .map(|s| match s.trim() {
                    "ols" => Ok(Scheme::Ols),
                    "cls" => Ok(Scheme::Cls),
                    other => Err(Error::Config(format!(
                        "schemes entries must be `ols` or `cls`, got {other:?}"
                    ))),
                })
                .collect::<Result<Vec<Scheme>>>()?,
            _ => Vec::new(),
        };
        let sparse = match self.take("sparse").as_deref() {
            None | Some("none") => None,
            Some(v) => Some(parse_sparse(v)?),
        };
        let seed_train = match self.take("seed_train") {
            Some(v) => parse_num(&v)?,
            None => 1,
        };
        let seed_ref = match self.take("seed_ref") {
            Some(v) => parse_num(&v)?,
            None => 2,
        };
        let quantile_levels = match self.take("quantile_levels") {
            Some(v) => parse_list(&v)?,
            None => vec![0.05, 0.95],
        };
        let stability_threshold = match self.take("stability_threshold") {
            Some(v) => Some(parse_num(&v)?),
            None => None,
        };
        let output_dir = self.take("output_dir").map(PathBuf::from);
        let basis_cap = match self.take("basis_cap") {
            Some(v) => parse_num(&v)?,
            None => crate::basis::DEFAULT_BASIS_CAP,
        };

        if let Some((key, (line, _))) = self.entries.iter().next() {
            return Err(Error::Parse {
                path: self.name.clone(),
                line: *line,
                column: 1,
                message: format!("unknown key {key:?}"),
            });
        }

        let config = ExperimentConfig {
            input,
            model,
            train_size,
            ref_size,
            degree,
            alphas,
            alpha_direction,
            schemes,
            sparse,
            seed_train,
            seed_ref,
            quantile_levels,
            stability_threshold,
            output_dir,
            basis_cap,
        };
        config.validate()?;
        Ok(config)
    }

    fn dispatch_config(&mut self) -> Result<DispatchConfig> {
        let horizon = match self.take("dispatch.horizon") {
            Some(v) => parse_num(&v)?,
            None => 24,
        };
        let levels = self
            .require("dispatch.levels")?
            .split(',')
            .map(|entry| {
                let (f, p) = entry.trim().split_once(':').ok_or_else(|| {
                    Error::Config(format!(
                        "dispatch.levels entries are `fraction:penalty`, got {entry:?}"
                    ))
                })?;
                Ok(PriorityLevel { fraction: parse_num(f)?, penalty: parse_num(p)? })
            })
            .collect::<Result<Vec<PriorityLevel>>>()?;
        let generation = broadcast(parse_list(&self.require("dispatch.generation")?)?, horizon)?;
        let base_load = broadcast(parse_list(&self.require("dispatch.base_load")?)?, horizon)?;
        let storage_fields = parse_list(&self.require("dispatch.storage")?)?;
        let [energy_capacity, power_limit, initial_level, efficiency] = storage_fields[..] else {
            return Err(Error::Config(
                "dispatch.storage takes 4 values: energy, power, initial, efficiency".into(),
            ));
        };
        Ok(DispatchConfig {
            horizon,
            levels,
            generation,
            storage: Storage { energy_capacity, power_limit, initial_level, efficiency },
            base_load,
        })
    }
}

fn broadcast(values: Vec<f64>, horizon: usize) -> Result<Vec<f64>> {
    if values.len() == 1 {
        return Ok(vec![values[0]; horizon]);
    }
    if values.len() != horizon {
        return Err(Error::Config(format!(
            "profile needs 1 or {horizon} values, got {}",
            values.len()
        )));
    }
    Ok(values)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("malformed number {s:?}")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_num).collect()
}

fn parse_sparse(s: &str) -> Result<SparseStop> {
    if let Some(k) = s.strip_prefix("target:") {
        return Ok(SparseStop::TargetSparsity(parse_num(k)?));
    }
    if let Some(e) = s.strip_prefix("epsilon:") {
        return Ok(SparseStop::Epsilon(parse_num(e)?));
    }
    Err(Error::Config(format!(
        "sparse must be `none`, `target:<k>` or `epsilon:<x>`, got {s:?}"
    )))
}

/// Parses one distribution descriptor, e.g. `uniform(0.8, 1.2)`.
pub fn parse_dist(s: &str) -> Result<Dist> {
    let s = s.trim();
    let open = s.find('(');
    let (kind, args) = match (open, s.ends_with(')')) {
        (Some(pos), true) => (&s[..pos], &s[pos + 1..s.len() - 1]),
        _ => {
            return Err(Error::Config(format!(
                "malformed distribution {s:?}; expected e.g. uniform(0, 1)"
            )))
        }
    };
    match kind.trim() {
        "uniform" => {
            let v = parse_list(args)?;
            let [lo, hi] = v[..] else {
                return Err(Error::Config(format!("uniform takes 2 parameters, got {args:?}")));
            };
            Ok(Dist::Uniform { lo, hi })
        }
        "normal" => {
            let v = parse_list(args)?;
            let [mean, std] = v[..] else {
                return Err(Error::Config(format!("normal takes 2 parameters, got {args:?}")));
            };
            Ok(Dist::Normal { mean, std })
        }
        "discrete" => {
            if let Some((a, b)) = args.split_once("..") {
                let lo: i64 = parse_num(a)?;
                let hi: i64 = parse_num(b)?;
                if hi < lo {
                    return Err(Error::Config(format!("empty discrete range {args:?}")));
                }
                Ok(Dist::DiscreteUniform { values: (lo..=hi).map(|v| v as f64).collect() })
            } else {
                Ok(Dist::DiscreteUniform { values: parse_list(args)? })
            }
        }
        "empirical" => Dist::empirical_from_file(Path::new(args.trim())),
        other => Err(Error::Config(format!("unknown distribution kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
model = poly_d3
dim.1 = uniform(-1, 1)
dim.2 = uniform(-1, 1)
dim.3 = uniform(-1, 1)
train_size = 100
ref_size = 1000
degree = 2
alphas = 0, 1.0
";

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_str_named(MINIMAL, "<test>").unwrap();
        assert_eq!(cfg.input.dim(), 3);
        assert_eq!(cfg.alphas, vec![0.0, 1.0]);
        assert_eq!(cfg.alpha_direction, AlphaDirection::Direct);
        assert_eq!(cfg.quantile_levels, vec![0.05, 0.95]);
        assert_eq!(cfg.seed_train, 1);
        assert_eq!(cfg.seed_ref, 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}typo_key = 3\n");
        match ExperimentConfig::from_str_named(&text, "<test>") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("typo_key")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# heading\n\n{MINIMAL}seed_train = 9 # trailing\n");
        let cfg = ExperimentConfig::from_str_named(&text, "<test>").unwrap();
        assert_eq!(cfg.seed_train, 9);
    }

    #[test]
    fn dimension_count_must_match_model() {
        let text = MINIMAL.replace("dim.3 = uniform(-1, 1)\n", "");
        assert!(ExperimentConfig::from_str_named(&text, "<test>").is_err());
    }

    #[test]
    fn dispatch_block_parses_with_broadcast() {
        let text = "\
model = dispatch
dim.1 = uniform(0.8, 1.2)
dim.2 = discrete(0..23)
dim.3 = discrete(2..8)
train_size = 200
ref_size = 5000
degree = 3
alphas = 0, 0.5, 1.0
alpha_direction = inverse
schemes = ols, cls
dispatch.levels = 0.5:100, 0.3:10, 0.2:1
dispatch.generation = 0.55
dispatch.storage = 0.8, 0.3, 0.8, 0.9
dispatch.base_load = 10
";
        let cfg = ExperimentConfig::from_str_named(text, "<test>").unwrap();
        let ModelSelector::Dispatch(d) = &cfg.model else { panic!("expected dispatch") };
        assert_eq!(d.generation.len(), 24);
        assert!(d.generation.iter().all(|&g| g == 0.55));
        assert_eq!(cfg.alpha_direction, AlphaDirection::Inverse);
        assert_eq!(cfg.schemes, vec![Scheme::Ols, Scheme::Cls]);
    }

    #[test]
    fn discrete_range_syntax() {
        let d = parse_dist("discrete(2..4)").unwrap();
        assert_eq!(d, Dist::DiscreteUniform { values: vec![2.0, 3.0, 4.0] });
        let d = parse_dist("discrete(6, 12, 18)").unwrap();
        assert_eq!(d, Dist::DiscreteUniform { values: vec![6.0, 12.0, 18.0] });
    }

    #[test]
    fn sparse_settings_parse() {
        let text = format!("{MINIMAL}sparse = target:5\n");
        let cfg = ExperimentConfig::from_str_named(&text, "<test>").unwrap();
        assert_eq!(cfg.sparse, Some(SparseStop::TargetSparsity(5)));

        let text = format!("{MINIMAL}sparse = epsilon:1e-6\n");
        let cfg = ExperimentConfig::from_str_named(&text, "<test>").unwrap();
        assert_eq!(cfg.sparse, Some(SparseStop::Epsilon(1e-6)));
    }
}
