use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::CliError;
use crate::engine::{ScenarioConfig, SweepSpec};
use crate::sensing::EnergyDetector;

const SECTIONS: [&str; 4] = ["scenario", "sweep", "analyze", "sense_curves"];

/// Ranges and tolerances for `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeSection {
    pub m_values: Vec<u32>,
    pub n_values: Vec<u32>,
    /// Grid spacing of the access-probability search.
    pub grid_step: f64,
    /// Finite-difference step for the derivative checks.
    pub fd_step: f64,
    /// Curvature sample density on `l >= 1`.
    pub samples_per_unit: u32,
    pub root_tol: f64,
    pub derivative_tol: f64,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self {
            m_values: (2..=6).collect(),
            n_values: (1..=6).collect(),
            grid_step: 1e-3,
            fd_step: 1e-6,
            samples_per_unit: 20,
            root_tol: 1e-12,
            derivative_tol: 1e-4,
        }
    }
}

/// Detector and sweep for `sense-curves`. An explicit `tnr_db` list takes
/// precedence over the start/stop/step range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SenseCurvesSection {
    pub detector: EnergyDetector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tnr_db: Option<Vec<f64>>,
    pub tnr_start: f64,
    pub tnr_stop: f64,
    pub tnr_step: f64,
    pub depths: Vec<u32>,
    pub trials: u32,
    pub seed: u64,
}

impl Default for SenseCurvesSection {
    fn default() -> Self {
        Self {
            detector: EnergyDetector::default(),
            tnr_db: None,
            tnr_start: -2.0,
            tnr_stop: 41.0,
            tnr_step: 0.5,
            depths: vec![1, 2, 5, 10],
            trials: 10_000,
            seed: 1,
        }
    }
}

impl SenseCurvesSection {
    pub fn tnr_values(&self) -> Result<Vec<f64>, CliError> {
        if let Some(list) = &self.tnr_db {
            if list.is_empty() {
                return Err(CliError::Validation("sense_curves.tnr_db is empty".into()));
            }
            return Ok(list.clone());
        }
        if self.tnr_step.is_nan() || self.tnr_step <= 0.0 || self.tnr_stop < self.tnr_start {
            return Err(CliError::Validation(format!(
                "sense_curves range {}..={} step {} is empty",
                self.tnr_start, self.tnr_stop, self.tnr_step
            )));
        }
        let count = ((self.tnr_stop - self.tnr_start) / self.tnr_step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.tnr_start + i as f64 * self.tnr_step)
            .collect())
    }
}

/// Everything a config file may contain.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub scenario: ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    pub analyze: AnalyzeSection,
    pub sense_curves: SenseCurvesSection,
}

pub const PRESETS: [&str; 6] = ["fig6a", "fig6b", "fig6c", "fig7a", "fig7b", "fig7c"];

/// Presets: N = 20, M swept over 2..=40 for all three policies.
/// `fig6*` use T_d = 50, `fig7*` T_d ~ U(30, 70); a/b/c are λ = 70/50/20.
pub fn preset(name: &str) -> Result<Table, CliError> {
    let (lambda, td) = match name {
        "fig6a" => (70, [50, 50]),
        "fig6b" => (50, [50, 50]),
        "fig6c" => (20, [50, 50]),
        "fig7a" => (70, [30, 70]),
        "fig7b" => (50, [30, 70]),
        "fig7c" => (20, [30, 70]),
        other => {
            return Err(CliError::Validation(format!(
                "unknown preset `{other}`; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    let text = format!(
        r#"
[scenario]
total_channels = 20
num_sus = 20
mac_algorithm = "csma"
su_info = "none"
horizon = 100000
replications = 20
seed = 1

[scenario.traffic]
mean_arrival_interval = {lambda}
packet_size_min = {}
packet_size_max = {}

[sweep]
parameter = "num_sus"
values = [2, 5, 10, 15, 20, 25, 30, 35, 40]
algorithms = ["csma_f", "csma_p", "csma"]
"#,
        td[0], td[1]
    );
    Ok(text.parse().expect("preset text is valid TOML"))
}

/// Recursively overlays `top` onto `base`; tables merge, anything else replaces.
pub fn deep_merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) => deep_merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses a `--override` value as TOML, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies one `KEY=VALUE` override. Keys are dotted paths; keys that do not
/// start with a section name are taken relative to `scenario`.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{spec}` is not KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Validation(format!(
            "override `{spec}` has an empty key"
        )));
    }
    let mut path: Vec<&str> = key.split('.').collect();
    if !SECTIONS.contains(&path[0]) {
        path.insert(0, "scenario");
    }
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cursor = table;
    for p in parents {
        let entry = cursor
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| {
            CliError::Validation(format!("override `{key}`: `{p}` is not a table"))
        })?;
    }
    cursor.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Builds the effective configuration: preset, then file, then overrides.
/// File errors are reported against the file's own lines.
pub fn load(
    preset_name: Option<&str>,
    file: Option<(&str, &str)>,
    overrides: &[String],
) -> Result<FileConfig, CliError> {
    let mut table = match preset_name {
        Some(name) => preset(name)?,
        None => Table::new(),
    };
    if let Some((path, text)) = file {
        let parsed: Table = text
            .parse()
            .map_err(|e| CliError::Validation(format!("{path}: {e}")))?;
        toml::from_str::<FileConfig>(text)
            .map_err(|e| CliError::Validation(format!("{path}: {e}")))?;
        deep_merge(&mut table, parsed);
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    FileConfig::deserialize(Value::Table(table))
        .map_err(|e| CliError::Validation(format!("configuration after overrides: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::MacAlgorithm;

    #[test]
    fn presets_parse() {
        for p in PRESETS {
            let cfg = load(Some(p), None, &[]).unwrap();
            cfg.scenario.validate().unwrap();
            let sweep = cfg.sweep.unwrap();
            assert_eq!(sweep.values.len(), 9);
            assert_eq!(sweep.algorithms.unwrap().len(), 3);
        }
        let c = load(Some("fig7c"), None, &[]).unwrap().scenario;
        assert_eq!(c.traffic.mean_arrival_interval, 20.0);
        assert_eq!(
            (c.traffic.packet_size_min, c.traffic.packet_size_max),
            (30, 70)
        );
        assert!(load(Some("fig9"), None, &[]).is_err());
    }

    #[test]
    fn file_over_preset_and_overrides_last() {
        let text = "[scenario]\nseed = 5\n[scenario.traffic]\npacket_size_max = 60\n";
        let cfg = load(
            Some("fig6b"),
            Some(("x.toml", text)),
            &[
                "seed=7".into(),
                "mac_algorithm=csma_f".into(),
                "su_info=full".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.scenario.seed, 7);
        assert_eq!(cfg.scenario.traffic.packet_size_max, 60);
        assert_eq!(cfg.scenario.traffic.packet_size_min, 50);
        assert_eq!(cfg.scenario.traffic.mean_arrival_interval, 50.0);
        assert_eq!(cfg.scenario.mac_algorithm, MacAlgorithm::CsmaF);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = load(None, Some(("x.toml", "[scenario]\nnum_suss = 3\n")), &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(load(None, None, &["bogus=1".into()]).is_err());
        assert!(load(None, None, &["traffic.nope=1".into()]).is_err());
        assert!(load(None, None, &["seed".into()]).is_err());
    }

    #[test]
    fn override_values() {
        let mut t = Table::new();
        apply_override(&mut t, "traffic.mean_arrival_interval=inf").unwrap();
        apply_override(&mut t, "sweep.parameter=num_sus").unwrap();
        assert_eq!(
            t["scenario"]["traffic"]["mean_arrival_interval"].as_float(),
            Some(f64::INFINITY)
        );
        assert_eq!(t["sweep"]["parameter"].as_str(), Some("num_sus"));
    }

    #[test]
    fn tnr_range() {
        let s = SenseCurvesSection::default();
        let v = s.tnr_values().unwrap();
        assert_eq!(v.len(), 87);
        assert_eq!(*v.last().unwrap(), 41.0);
        let empty = SenseCurvesSection {
            tnr_db: Some(vec![]),
            ..SenseCurvesSection::default()
        };
        assert!(empty.tnr_values().is_err());
    }
}
