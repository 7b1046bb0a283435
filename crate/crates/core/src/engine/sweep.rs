use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ScenarioConfig;
use super::metrics::MetricsReport;
use super::sim::run;
use crate::error::{Error, Result};
use crate::mac::MacAlgorithm;
use crate::sensing::SensingModel;

/// Parameters a sweep may vary.
pub const SWEEP_PARAMETERS: &[&str] = &[
    "num_sus",
    "lambda",
    "mean_arrival_interval",
    "td_range",
    "mac_algorithm",
    "sensing.<field>",
];

/// What to vary and over which values. `algorithms`, when set, is crossed
/// with every value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<toml::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithms: Option<Vec<MacAlgorithm>>,
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: toml::Value,
    pub config: ScenarioConfig,
    pub report: MetricsReport,
}

fn bad_value(parameter: &str, value: &toml::Value, want: &str) -> Error {
    Error::Config(format!("sweep {parameter}: expected {want}, got {value}"))
}

fn as_f64(v: &toml::Value) -> Option<f64> {
    v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
}

/// Returns `base` with `parameter` set to `value`.
pub fn apply_parameter(
    base: &ScenarioConfig,
    parameter: &str,
    value: &toml::Value,
) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    match parameter {
        "num_sus" => {
            let m = value
                .as_integer()
                .filter(|&m| m > 0 && m <= u32::MAX as i64)
                .ok_or_else(|| bad_value(parameter, value, "a positive integer"))?;
            cfg.num_sus = m as u32;
        }
        "lambda" | "mean_arrival_interval" => {
            cfg.traffic.mean_arrival_interval =
                as_f64(value).ok_or_else(|| bad_value(parameter, value, "a number"))?;
        }
        "td_range" => {
            let pair: Option<Vec<u32>> = value.as_array().and_then(|a| {
                a.iter()
                    .map(|x| x.as_integer().and_then(|i| u32::try_from(i).ok()))
                    .collect()
            });
            match pair.as_deref() {
                Some(&[lo, hi]) => {
                    cfg.traffic.packet_size_min = lo;
                    cfg.traffic.packet_size_max = hi;
                }
                _ => return Err(bad_value(parameter, value, "[min, max]")),
            }
        }
        "mac_algorithm" => {
            let alg: MacAlgorithm = value
                .as_str()
                .ok_or_else(|| bad_value(parameter, value, "an algorithm name"))?
                .parse()?;
            cfg = cfg.with_algorithm(alg);
        }
        p if p.starts_with("sensing.") => {
            let field = &p["sensing.".len()..];
            let mut table = toml::Value::try_from(&cfg.sensing)
                .map_err(|e| Error::Config(format!("sensing: {e}")))?;
            let Some(t) = table.as_table_mut() else {
                return Err(Error::Config("sensing is not a table".into()));
            };
            t.insert(field.to_string(), value.clone());
            cfg.sensing = SensingModel::deserialize(table)
                .map_err(|e| Error::Config(format!("sweep {parameter}: {e}")))?;
        }
        other => {
            return Err(Error::Config(format!(
                "cannot sweep `{other}`; expected one of {}",
                SWEEP_PARAMETERS.join(", ")
            )))
        }
    }
    Ok(cfg)
}

fn compare_values(a: &toml::Value, b: &toml::Value) -> Ordering {
    match (as_f64(a), as_f64(b)) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        _ => a.to_string().cmp(&b.to_string()),
    }
}

/// Configurations of every sweep point, sorted by (value, algorithm).
pub fn sweep_points(
    base: &ScenarioConfig,
    spec: &SweepSpec,
) -> Result<Vec<(toml::Value, ScenarioConfig)>> {
    if spec.values.is_empty() {
        return Err(Error::Config("sweep has no values".into()));
    }
    let mut points = Vec::new();
    for value in &spec.values {
        let cfg = apply_parameter(base, &spec.parameter, value)?;
        match &spec.algorithms {
            None => points.push((value.clone(), cfg)),
            Some(algs) => {
                for &a in algs {
                    points.push((value.clone(), cfg.clone().with_algorithm(a)));
                }
            }
        }
    }
    for (_, cfg) in &points {
        cfg.validate()?;
    }
    points.sort_by(|(va, ca), (vb, cb)| {
        compare_values(va, vb).then(ca.mac_algorithm.cmp(&cb.mac_algorithm))
    });
    Ok(points)
}

/// Runs every point of the sweep.
pub fn sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    sweep_points(base, spec)?
        .into_par_iter()
        .map(|(value, config)| {
            let report = run(&config)?;
            Ok(SweepRow {
                value,
                config,
                report,
            })
        })
        .collect()
}

/// First 16 hex digits of the SHA-256 of the config's TOML rendering.
pub fn config_hash(cfg: &ScenarioConfig) -> Result<String> {
    let text = toml::to_string(cfg).map_err(|e| Error::Config(format!("serialize config: {e}")))?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(hex::encode(digest)[..16].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_parameter_is_rejected() {
        let err = apply_parameter(&ScenarioConfig::default(), "warp", &toml::Value::Integer(1))
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn parameters_apply() {
        let base = ScenarioConfig::default();
        let c = apply_parameter(&base, "num_sus", &toml::Value::Integer(7)).unwrap();
        assert_eq!(c.num_sus, 7);
        let c = apply_parameter(&base, "lambda", &toml::Value::Integer(70)).unwrap();
        assert_eq!(c.traffic.mean_arrival_interval, 70.0);
        let v: toml::Value = toml::Value::Array(vec![30.into(), 70.into()]);
        let c = apply_parameter(&base, "td_range", &v).unwrap();
        assert_eq!(
            (c.traffic.packet_size_min, c.traffic.packet_size_max),
            (30, 70)
        );
        let c = apply_parameter(&base, "mac_algorithm", &"csma_p".into()).unwrap();
        assert_eq!(c.su_info, crate::mac::SuInfoMode::Partial);
    }

    #[test]
    fn sensing_field() {
        let base = ScenarioConfig {
            sensing: SensingModel::Bernoulli {
                p_false_alarm: 0.0,
                p_miss: 0.0,
                overrides: vec![],
            },
            ..ScenarioConfig::default()
        };
        let c = apply_parameter(&base, "sensing.p_miss", &toml::Value::Float(0.1)).unwrap();
        assert!(matches!(c.sensing, SensingModel::Bernoulli { p_miss, .. } if p_miss == 0.1));
        assert!(apply_parameter(&base, "sensing.bogus", &toml::Value::Float(0.1)).is_err());
    }

    #[test]
    fn points_are_sorted() {
        let spec = SweepSpec {
            parameter: "num_sus".into(),
            values: vec![10.into(), 2.into()],
            algorithms: Some(vec![MacAlgorithm::Csma, MacAlgorithm::CsmaF]),
        };
        let pts = sweep_points(&ScenarioConfig::default(), &spec).unwrap();
        let keys: Vec<_> = pts
            .iter()
            .map(|(_, c)| (c.num_sus, c.mac_algorithm))
            .collect();
        assert_eq!(
            keys,
            vec![
                (2, MacAlgorithm::CsmaF),
                (2, MacAlgorithm::Csma),
                (10, MacAlgorithm::CsmaF),
                (10, MacAlgorithm::Csma)
            ]
        );
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&ScenarioConfig::default()).unwrap();
        assert_eq!(a.len(), 16);
        assert_eq!(a, config_hash(&ScenarioConfig::default()).unwrap());
        let b = config_hash(&ScenarioConfig {
            seed: 2,
            ..ScenarioConfig::default()
        })
        .unwrap();
        assert_ne!(a, b);
    }
}
