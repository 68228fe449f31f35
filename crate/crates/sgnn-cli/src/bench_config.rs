//! Flat key-value config for benchmark grids.
//!
//! One `key = value` pair per line, `#` starts a comment. Grid axes
//! (`fractions`, `methods`, `seeds`) take comma-separated lists; everything
//! else is a scalar. Example:
//!
//! ```text
//! synth_clusters = 2
//! synth_per = 500
//! synth_dim = 8
//! synth_separation = 10
//! synth_seed = 7
//! train_fraction = 0.8
//! graph_n = 10
//! k = 5
//! restarts = 20
//! steps = 0            # 0 = ceil(ln n_train)
//! fractions = 0.5, 1.0
//! methods = exact, sgnn0, sgnn1
//! seeds = 1, 2, 3
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    BadLine { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: cannot parse {value:?} for key {key:?}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("key {key:?} given more than once (line {line})")]
    DuplicateKey { line: usize, key: String },
    #[error("no dataset configured: set `train` or the `synth_*` keys")]
    NoDataset,
    #[error("both `train` and `synth_*` keys are set; pick one")]
    ConflictingDatasets,
    #[error("{0} must not be empty")]
    EmptyAxis(&'static str),
    #[error("fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("config is not valid UTF-8")]
    NotText,
}

/// A benchmark method label: the exact scan or SGNN with a walk length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Sgnn(usize),
}

impl FromStr for Method {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        if s == "exact" {
            return Ok(Method::Exact);
        }
        if let Some(t) = s.strip_prefix("sgnn") {
            if let Ok(walk) = t.parse() {
                return Ok(Method::Sgnn(walk));
            }
        }
        Err(())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Exact => write!(f, "exact"),
            Method::Sgnn(t) => write!(f, "sgnn{t}"),
        }
    }
}

/// Where the benchmark data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// CSV files; when `test` is absent the train file is split by
    /// `train_fraction` under `split_seed`.
    Csv {
        train: String,
        test: Option<String>,
        label_column: String,
    },
    /// Generated Gaussian clusters, split by `train_fraction`.
    Synth {
        clusters: usize,
        per_cluster: usize,
        dim: usize,
        separation: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub data: DataSource,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub graph_n: usize,
    pub k: usize,
    pub restarts: usize,
    /// 0 means ceil(ln n_train), resolved per cell.
    pub steps: usize,
    pub weighted: bool,
    pub fractions: Vec<f64>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
}

impl BenchConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self, ConfigError> {
        let text = std::str::from_utf8(bytes).map_err(|_| ConfigError::NotText)?;
        let mut train: Option<String> = None;
        let mut test: Option<String> = None;
        let mut label_column = "label".to_string();
        let mut synth_clusters: Option<usize> = None;
        let mut synth_per: Option<usize> = None;
        let mut synth_dim: Option<usize> = None;
        let mut synth_separation = 10.0f64;
        let mut synth_seed = 0u64;
        let mut train_fraction = 0.8f64;
        let mut split_seed = 42u64;
        let mut graph_n = 10usize;
        let mut k = 1usize;
        let mut restarts = 20usize;
        let mut steps = 0usize;
        let mut weighted = false;
        let mut fractions = vec![1.0f64];
        let mut methods = vec![Method::Exact, Method::Sgnn(1)];
        let mut seeds = vec![0u64];

        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::BadLine {
                    line,
                    text: raw.to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(key.to_string());
            let bad = || ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
            };
            match key {
                "train" => train = Some(value.to_string()),
                "test" => test = Some(value.to_string()),
                "label_column" => label_column = value.to_string(),
                "synth_clusters" => synth_clusters = Some(value.parse().map_err(|_| bad())?),
                "synth_per" => synth_per = Some(value.parse().map_err(|_| bad())?),
                "synth_dim" => synth_dim = Some(value.parse().map_err(|_| bad())?),
                "synth_separation" => synth_separation = value.parse().map_err(|_| bad())?,
                "synth_seed" => synth_seed = value.parse().map_err(|_| bad())?,
                "train_fraction" => train_fraction = value.parse().map_err(|_| bad())?,
                "split_seed" => split_seed = value.parse().map_err(|_| bad())?,
                "graph_n" => graph_n = value.parse().map_err(|_| bad())?,
                "k" => k = value.parse().map_err(|_| bad())?,
                "restarts" => restarts = value.parse().map_err(|_| bad())?,
                "steps" => steps = value.parse().map_err(|_| bad())?,
                "weighted" => weighted = value.parse().map_err(|_| bad())?,
                "fractions" => {
                    fractions = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                        .collect::<Result<_, _>>()?;
                }
                "methods" => {
                    methods = value
                        .split(',')
                        .map(|v| v.trim().parse::<Method>().map_err(|_| bad()))
                        .collect::<Result<_, _>>()?;
                }
                "seeds" => {
                    seeds = value
                        .split(',')
                        .map(|v| v.trim().parse::<u64>().map_err(|_| bad()))
                        .collect::<Result<_, _>>()?;
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }

        let synth_given = synth_clusters.is_some() || synth_per.is_some() || synth_dim.is_some();
        let data = match (train, synth_given) {
            (Some(_), true) => return Err(ConfigError::ConflictingDatasets),
            (Some(train), false) => DataSource::Csv {
                train,
                test,
                label_column,
            },
            (None, true) => DataSource::Synth {
                clusters: synth_clusters.unwrap_or(2),
                per_cluster: synth_per.unwrap_or(500),
                dim: synth_dim.unwrap_or(8),
                separation: synth_separation,
                seed: synth_seed,
            },
            (None, false) => return Err(ConfigError::NoDataset),
        };
        if fractions.is_empty() {
            return Err(ConfigError::EmptyAxis("fractions"));
        }
        if methods.is_empty() {
            return Err(ConfigError::EmptyAxis("methods"));
        }
        if seeds.is_empty() {
            return Err(ConfigError::EmptyAxis("seeds"));
        }
        for &f in fractions.iter().chain(std::iter::once(&train_fraction)) {
            if !(f > 0.0 && f <= 1.0) {
                return Err(ConfigError::BadFraction(f));
            }
        }
        Ok(Self {
            data,
            train_fraction,
            split_seed,
            graph_n,
            k,
            restarts,
            steps,
            weighted,
            fractions,
            methods,
            seeds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_synth_grid() {
        let text = b"synth_clusters = 2\nsynth_per = 100\nsynth_dim = 4\n\
            fractions = 0.25, 0.5\nmethods = exact, sgnn0, sgnn2\nseeds = 1,2,3\nk = 5\n";
        let cfg = BenchConfig::parse(text).unwrap();
        assert_eq!(cfg.fractions, [0.25, 0.5]);
        assert_eq!(
            cfg.methods,
            [Method::Exact, Method::Sgnn(0), Method::Sgnn(2)]
        );
        assert_eq!(cfg.seeds, [1, 2, 3]);
        assert_eq!(cfg.k, 5);
        assert!(matches!(cfg.data, DataSource::Synth { clusters: 2, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = b"# a comment\n\ntrain = t.csv  # inline\n";
        let cfg = BenchConfig::parse(text).unwrap();
        assert!(matches!(cfg.data, DataSource::Csv { ref train, .. } if train == "t.csv"));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            BenchConfig::parse(b"not a pair\n"),
            Err(ConfigError::BadLine { line: 1, .. })
        ));
        assert!(matches!(
            BenchConfig::parse(b"mystery = 1\n"),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(
            BenchConfig::parse(b"train = a.csv\nk = many\n"),
            Err(ConfigError::BadValue { line: 2, .. })
        ));
        assert!(matches!(
            BenchConfig::parse(b"k = 1\nk = 2\n"),
            Err(ConfigError::DuplicateKey { .. })
        ));
        assert!(matches!(BenchConfig::parse(b""), Err(ConfigError::NoDataset)));
        assert!(matches!(
            BenchConfig::parse(b"train = a\nsynth_dim = 3\n"),
            Err(ConfigError::ConflictingDatasets)
        ));
        assert!(matches!(
            BenchConfig::parse(b"train = a\nmethods = kdtree\n"),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            BenchConfig::parse(b"train = a\nfractions = 0.0\n"),
            Err(ConfigError::BadFraction(_))
        ));
    }

    #[test]
    fn method_labels_round_trip() {
        for m in [Method::Exact, Method::Sgnn(0), Method::Sgnn(2)] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
    }
}
