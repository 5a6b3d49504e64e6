//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are dotted
//! paths; lists are comma separated. See the README for the schema.

use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use twl_core::Cx;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {msg}")]
pub struct ConfigError {
    /// Dotted field path, or `line N` for syntax errors.
    pub path: String,
    pub msg: String,
}

fn err(path: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        msg: msg.into(),
    }
}

/// `count` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub id: String,
    pub d: usize,
    pub symbol: String,
    pub weights: Option<Vec<i64>>,
    pub k_max: usize,
    pub epsilon: f64,
    pub lambda: LambdaGrid,
    pub isotypes: Vec<i64>,
    #[serde(serialize_with = "ser_point")]
    pub base_point: Option<Vec<Cx<f64>>>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub samples: usize,
    pub tolerance: f64,
    pub szego_k: Option<usize>,
    pub flow_tau: f64,
}

fn ser_point<S: serde::Serializer>(p: &Option<Vec<Cx<f64>>>, s: S) -> Result<S::Ok, S::Error> {
    p.as_ref()
        .map(|v| v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
        .serialize(s)
}

/// Every key understood by [`ExperimentConfig::parse`].
pub const KEYS: &[&str] = &[
    "experiment.id",
    "model.d",
    "symbol",
    "action.weights",
    "k_max",
    "cutoff.epsilon",
    "lambda.grid",
    "isotypes",
    "base_point",
    "seeds",
    "output.dir",
    "check.samples",
    "check.tolerance",
    "szego.k",
    "contact.tau",
];

fn list<'a>(v: &'a str) -> impl Iterator<Item = &'a str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn num<T: std::str::FromStr>(path: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| err(path, format!("cannot parse '{}'", v.trim())))
}

fn complex(path: &str, v: &str) -> Result<Cx<f64>, ConfigError> {
    match v.split_once(':') {
        Some((re, im)) => Ok(Cx::new(num(path, re)?, num(path, im)?)),
        None => Ok(Cx::new(num(path, v)?, 0.0)),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(&format!("line {}", n + 1), "expected 'key = value'"))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(err(k, "unknown key"));
            }
            if map.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(err(k, "given twice"));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let required = |k: &str| get(k).ok_or_else(|| err(k, "missing"));

        let d: usize = num("model.d", required("model.d")?)?;
        if d == 0 {
            return Err(err("model.d", "must be at least 1"));
        }
        let symbol = required("symbol")?.to_string();
        let weights = match get("action.weights") {
            None | Some("none") => None,
            Some(v) => {
                let w = list(v)
                    .map(|x| num("action.weights", x))
                    .collect::<Result<Vec<i64>, _>>()?;
                if w.len() != d + 1 {
                    return Err(err(
                        "action.weights",
                        format!("expected {} weights, got {}", d + 1, w.len()),
                    ));
                }
                Some(w)
            }
        };
        let k_max: usize = num("k_max", required("k_max")?)?;
        if k_max < 1 {
            return Err(err("k_max", "must be at least 1"));
        }
        let epsilon: f64 = get("cutoff.epsilon").map_or(Ok(0.5), |v| num("cutoff.epsilon", v))?;
        if !(epsilon > 0.0) {
            return Err(err("cutoff.epsilon", "must be positive"));
        }
        let lambda = match get("lambda.grid") {
            None => LambdaGrid {
                start: k_max as f64 / 2.0,
                stop: k_max as f64,
                count: 11,
            },
            Some(v) => {
                let parts: Vec<&str> = list(v).collect();
                if parts.len() != 3 {
                    return Err(err("lambda.grid", "expected 'start, stop, count'"));
                }
                let g = LambdaGrid {
                    start: num("lambda.grid", parts[0])?,
                    stop: num("lambda.grid", parts[1])?,
                    count: num("lambda.grid", parts[2])?,
                };
                if g.count == 0 || !(g.start > 0.0) || g.stop < g.start {
                    return Err(err("lambda.grid", "need 0 < start <= stop and count >= 1"));
                }
                g
            }
        };
        let isotypes = match get("isotypes") {
            Some(v) => list(v)
                .map(|x| num("isotypes", x))
                .collect::<Result<Vec<i64>, _>>()?,
            None if weights.is_some() => vec![0],
            None => Vec::new(),
        };
        if weights.is_none() && !isotypes.is_empty() {
            return Err(err("isotypes", "requires action.weights"));
        }
        let base_point = match get("base_point") {
            None => None,
            Some(v) => {
                let p = list(v)
                    .map(|x| complex("base_point", x))
                    .collect::<Result<Vec<_>, _>>()?;
                if p.len() != d + 1 {
                    return Err(err(
                        "base_point",
                        format!("expected {} coordinates, got {}", d + 1, p.len()),
                    ));
                }
                Some(p)
            }
        };
        let seeds = match get("seeds") {
            None => vec![0],
            Some(v) => list(v)
                .map(|x| num("seeds", x))
                .collect::<Result<Vec<u64>, _>>()?,
        };
        let cfg = ExperimentConfig {
            id: get("experiment.id").unwrap_or("experiment").to_string(),
            d,
            symbol,
            weights,
            k_max,
            epsilon,
            lambda,
            isotypes,
            base_point,
            seeds,
            output_dir: PathBuf::from(get("output.dir").unwrap_or("out")),
            samples: get("check.samples").map_or(Ok(50), |v| num("check.samples", v))?,
            tolerance: get("check.tolerance").map_or(Ok(0.05), |v| num("check.tolerance", v))?,
            szego_k: get("szego.k").map(|v| num("szego.k", v)).transpose()?,
            flow_tau: get("contact.tau").map_or(Ok(1.0), |v| num("contact.tau", v))?,
        };
        if cfg.id.is_empty() || cfg.id.contains(['/', '\\']) {
            return Err(err("experiment.id", "must be a nonempty file-name-safe string"));
        }
        Ok(cfg)
    }

    /// Checks the λ grid against the completeness bound `k_max·min f`.
    pub fn check_lambda_bound(&self, symbol_min: f64) -> Result<(), ConfigError> {
        let bound = self.k_max as f64 * symbol_min;
        if self.lambda.stop > bound {
            return Err(err(
                "lambda.grid",
                format!(
                    "stop {} exceeds the completeness bound k_max·min f = {bound}; requires k_max >= {}",
                    self.lambda.stop,
                    (self.lambda.stop / symbol_min).ceil()
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config() {
        let c = ExperimentConfig::parse(
            "# model\nexperiment.id = eq\nmodel.d = 1\nsymbol = 1 + 0.5*w1\naction.weights = -1, 1\n\
             k_max = 40\ncutoff.epsilon = 0.25\nlambda.grid = 10, 30, 5\nisotypes = 0, 1\n\
             base_point = 0.7071067811865476, 0:0.7071067811865476\nseeds = 3, 4\n",
        )
        .unwrap();
        assert_eq!(c.weights, Some(vec![-1, 1]));
        assert_eq!(c.lambda.values(), vec![10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(c.base_point.as_ref().unwrap()[1], Cx::new(0.0, 0.7071067811865476));
        assert_eq!(c.seeds, vec![3, 4]);
        assert_eq!(c.epsilon, 0.25);
    }

    #[test]
    fn errors_name_the_field() {
        let base = "model.d = 1\nsymbol = 1\nk_max = 10\n";
        for (extra, path) in [
            ("k_max2 = 3", "k_max2"),
            ("action.weights = 1, 2, 3", "action.weights"),
            ("cutoff.epsilon = -1", "cutoff.epsilon"),
            ("lambda.grid = 1, 2", "lambda.grid"),
            ("isotypes = 0", "isotypes"),
            ("base_point = 1", "base_point"),
        ] {
            let e = ExperimentConfig::parse(&format!("{base}{extra}\n")).unwrap_err();
            assert_eq!(e.path, path, "{e}");
        }
        assert_eq!(ExperimentConfig::parse("model.d = 1\n").unwrap_err().path, "symbol");
        assert_eq!(
            ExperimentConfig::parse("model.d = 1\nsymbol = 1\nk_max = 0\n").unwrap_err().path,
            "k_max"
        );
        assert_eq!(ExperimentConfig::parse("garbage\n").unwrap_err().path, "line 1");
    }

    #[test]
    fn completeness_bound() {
        let c = ExperimentConfig::parse("model.d = 1\nsymbol = 1\nk_max = 100\nlambda.grid = 50, 150, 3\n")
            .unwrap();
        let e = c.check_lambda_bound(1.0).unwrap_err();
        assert_eq!(e.path, "lambda.grid");
        assert!(e.msg.contains("k_max >= 150"));
    }
}
