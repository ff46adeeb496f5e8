//! Run configuration: flat `key = value` text with dotted keys. Unknown keys
//! are hard errors; silent typos in tolerance names are worse than loud ones.

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::problems::RegressionModel;
use crate::solver::SolverConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    BadLine { line: usize, text: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("duplicate key `{key}`")]
    DuplicateKey { key: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: &'static str },
    #[error("key `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    DemyanovMalozemov,
    Quadratic { seed: u64, components: usize, dim: usize },
    Dataset { path: PathBuf, model: RegressionModel },
    /// Test fixture: deliberately wrong gradient, for exercising `check`.
    SabotagedGradient,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverConfig<f64>,
    pub trace_path: Option<PathBuf>,
    pub result_path: Option<PathBuf>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::BadLine { line: idx + 1, text: line.to_string() })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError::DuplicateKey { key });
        }
    }

    let mut take = |k: &str| map.remove(k);

    let problem_name = take("problem").ok_or(ConfigError::MissingKey { key: "problem" })?;
    let problem = match problem_name.as_str() {
        "demyanov_malozemov" => ProblemSpec::DemyanovMalozemov,
        "quadratic_family" => {
            let seed = parse_num::<u64>(&mut take, "problem.seed")?.unwrap_or(0);
            let components = parse_num::<usize>(&mut take, "problem.components")?.unwrap_or(3);
            let dim = parse_num::<usize>(&mut take, "problem.dim")?.unwrap_or(2);
            if components < 1 || dim < 1 {
                return Err(ConfigError::Invalid(
                    "problem.components and problem.dim must be at least 1".into(),
                ));
            }
            ProblemSpec::Quadratic { seed, components, dim }
        }
        "dataset" => {
            let path = take("problem.path")
                .ok_or(ConfigError::MissingKey { key: "problem.path" })?;
            let model = match take("problem.model").as_deref().unwrap_or("linear") {
                "linear" => RegressionModel::Linear,
                "polynomial" => {
                    let degree = parse_num::<usize>(&mut take, "problem.degree")?.unwrap_or(2);
                    if degree < 1 {
                        return Err(ConfigError::BadValue {
                            key: "problem.degree".into(),
                            msg: "degree must be at least 1".into(),
                        });
                    }
                    RegressionModel::Polynomial { degree }
                }
                other => {
                    return Err(ConfigError::BadValue {
                        key: "problem.model".into(),
                        msg: format!("unknown model `{other}`, expected linear or polynomial"),
                    })
                }
            };
            ProblemSpec::Dataset { path: PathBuf::from(path), model }
        }
        "sabotaged_gradient" => ProblemSpec::SabotagedGradient,
        other => {
            return Err(ConfigError::BadValue {
                key: "problem".into(),
                msg: format!(
                    "unknown problem `{other}`, expected demyanov_malozemov, quadratic_family, or dataset"
                ),
            })
        }
    };

    let mut solver = SolverConfig::<f64>::default();
    if let Some(v) = parse_num::<f64>(&mut take, "solver.epsilon")? {
        solver.epsilon = v;
    }
    if let Some(v) = parse_num::<f64>(&mut take, "solver.delta")? {
        solver.delta = v;
    }
    if let Some(v) = parse_num::<f64>(&mut take, "solver.c")? {
        solver.c = v;
    }
    if let Some(v) = parse_num::<f64>(&mut take, "solver.sigma")? {
        solver.sigma = v;
    }
    if let Some(v) = parse_num::<usize>(&mut take, "solver.j_max")? {
        solver.j_max = v;
    }
    if let Some(v) = parse_num::<usize>(&mut take, "solver.k_max")? {
        solver.k_max = v;
    }
    if let Some(v) = parse_num::<f64>(&mut take, "solver.active_tol")? {
        solver.active_tol = Some(v);
    }
    if let Some(raw) = take("solver.x0") {
        let mut x0 = Vec::new();
        for part in raw.split(',') {
            let v: f64 = part.trim().parse().map_err(|_| ConfigError::BadValue {
                key: "solver.x0".into(),
                msg: format!("non-numeric entry `{}`", part.trim()),
            })?;
            x0.push(v);
        }
        solver.x0 = Some(x0);
    }
    solver.validate().map_err(ConfigError::Invalid)?;

    let trace_path = take("trace").map(PathBuf::from);
    let result_path = take("result").map(PathBuf::from);

    if let Some(key) = map.into_keys().next() {
        return Err(ConfigError::UnknownKey { key });
    }

    Ok(RunConfig { problem, solver, trace_path, result_path })
}

fn parse_num<T: std::str::FromStr>(
    take: &mut impl FnMut(&str) -> Option<String>,
    key: &str,
) -> Result<Option<T>, ConfigError> {
    match take(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::BadValue { key: key.into(), msg: format!("cannot parse `{raw}`") }),
    }
}
