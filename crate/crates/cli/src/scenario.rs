//! Scenario files: TOML description of a two-gateway link.

use std::path::{Path, PathBuf};

use gwdiv_core::analytic::LinkScenario;
use gwdiv_core::channel_model::{correlation_from_distance, LognormalParams, RainFadeParams};
use gwdiv_core::link_budget::{clear_sky_snr, BudgetEntry, BOLTZMANN_DBW};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Environment variable naming an extra directory searched for scenario names.
pub const SCENARIO_DIR_ENV: &str = "GWDIV_SCENARIO_DIR";

const BUILTIN: &[(&str, &str)] = &[
    ("default", include_str!("../scenarios/default.toml")),
    (
        "paper_tables",
        include_str!("../scenarios/paper_tables.toml"),
    ),
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub link: LinkSection,
    pub geometry: GeometrySection,
    pub uplink_fade: UplinkFadeSection,
    pub downlink_fade: DownlinkFadeSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub budget: BudgetSection,
    /// Free-form propagation notes, carried along but not interpreted.
    #[serde(default)]
    pub propagation: Option<toml::Table>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    /// Falls back to `[budget.uplink]` when absent.
    pub cs_snr_ul_db: Option<f64>,
    /// Falls back to `[budget.downlink]` when absent.
    pub cs_snr_dl_db: Option<f64>,
    pub outage_thresh_db: f64,
    /// Defaults to the outage threshold.
    pub switch_thresh_db: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub separation_km: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UplinkFadeSection {
    pub m1: f64,
    pub s1: f64,
    pub m2: f64,
    pub s2: f64,
    /// Overrides the distance-derived correlation.
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DownlinkFadeSection {
    pub m: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub slots: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub burn_in: Option<u64>,
    pub slot_seconds: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub uplink: Option<BudgetBlock>,
    pub downlink: Option<BudgetBlock>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetBlock {
    pub eirp_dbw: f64,
    pub free_space_loss_db: f64,
    pub g_over_t_dbk: f64,
    pub bandwidth_hz: f64,
    pub boltzmann_dbw: Option<f64>,
}

impl BudgetBlock {
    pub fn entry(&self) -> BudgetEntry {
        let mut e = BudgetEntry::new(
            self.eirp_dbw,
            self.free_space_loss_db,
            self.g_over_t_dbk,
            self.bandwidth_hz,
        );
        e.boltzmann_dbw = self.boltzmann_dbw.unwrap_or(BOLTZMANN_DBW);
        e
    }
}

/// Command-line replacements for scenario values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub cs_snr_ul_db: Option<f64>,
    pub cs_snr_dl_db: Option<f64>,
    pub outage_thresh_db: Option<f64>,
    pub switch_thresh_db: Option<f64>,
    pub separation_km: Option<f64>,
    pub rho: Option<f64>,
}

/// A parsed scenario together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub label: String,
    pub sha256: String,
    pub file: ScenarioFile,
}

impl LoadedScenario {
    pub fn parse(label: impl Into<String>, text: &str) -> Result<Self, CliError> {
        let label = label.into();
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| CliError::Config(format!("scenario {label}: {e}")))?;
        Ok(Self {
            label,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
            file,
        })
    }

    /// Resolve `spec` as a file path, then as a name in the scenario
    /// directory, then as a built-in name.
    pub fn load(spec: &str) -> Result<Self, CliError> {
        let path = Path::new(spec);
        if path.is_file() {
            return Self::from_path(path);
        }
        if let Some(dir) = std::env::var_os(SCENARIO_DIR_ENV) {
            let dir = PathBuf::from(dir);
            for candidate in [dir.join(spec), dir.join(format!("{spec}.toml"))] {
                if candidate.is_file() {
                    return Self::from_path(&candidate);
                }
            }
        }
        let name = spec.strip_suffix(".toml").unwrap_or(spec);
        match BUILTIN.iter().find(|(n, _)| *n == name) {
            Some((n, text)) => Self::parse(format!("builtin:{n}"), text),
            None => Err(CliError::Config(format!(
                "scenario '{spec}' is neither a readable file nor a known name (built-ins: {})",
                builtin_names().join(", ")
            ))),
        }
    }

    fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(path.display().to_string(), &text)
    }

    pub fn slot_seconds(&self) -> f64 {
        self.file.simulation.slot_seconds.unwrap_or(1.0)
    }

    pub fn clear_sky_one(&self, uplink: bool) -> Result<f64, CliError> {
        let (explicit, block, key, table) = if uplink {
            (
                self.file.link.cs_snr_ul_db,
                self.file.budget.uplink,
                "cs_snr_ul_db",
                "uplink",
            )
        } else {
            (
                self.file.link.cs_snr_dl_db,
                self.file.budget.downlink,
                "cs_snr_dl_db",
                "downlink",
            )
        };
        match (explicit, block) {
            (Some(v), _) => Ok(v),
            (None, Some(b)) => Ok(clear_sky_snr(&b.entry())?),
            (None, None) => Err(CliError::Config(format!(
                "scenario {}: link.{key} missing and no [budget.{table}] block to derive it",
                self.label
            ))),
        }
    }

    pub fn separation_km(&self, overrides: &Overrides) -> f64 {
        overrides
            .separation_km
            .unwrap_or(self.file.geometry.separation_km)
    }

    /// The link described by the file, with command-line values taking
    /// precedence over file values.
    pub fn link_scenario_with(&self, o: &Overrides) -> Result<LinkScenario, CliError> {
        let f = &self.file;
        let cs_ul = match o.cs_snr_ul_db {
            Some(v) => v,
            None => self.clear_sky_one(true)?,
        };
        let cs_dl = match o.cs_snr_dl_db {
            Some(v) => v,
            None => self.clear_sky_one(false)?,
        };
        let rho = match (o.rho, o.separation_km, f.uplink_fade.rho) {
            (Some(r), _, _) => r,
            (None, Some(d), _) => correlation_from_distance(d)?,
            (None, None, Some(r)) => r,
            (None, None, None) => correlation_from_distance(f.geometry.separation_km)?,
        };
        let th = o.outage_thresh_db.unwrap_or(f.link.outage_thresh_db);
        let u = &f.uplink_fade;
        let s = LinkScenario {
            cs_snr_ul_db: cs_ul,
            cs_snr_dl_db: cs_dl,
            outage_thresh_db: th,
            switch_thresh_db: o.switch_thresh_db.or(f.link.switch_thresh_db).unwrap_or(th),
            fade_ul: RainFadeParams::new(u.m1, u.s1, u.m2, u.s2, rho)?,
            fade_dl: LognormalParams::new(f.downlink_fade.m, f.downlink_fade.s)?,
        };
        s.validate()?;
        Ok(s)
    }
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_resolve() {
        for name in builtin_names() {
            let s = LoadedScenario::load(name).unwrap();
            let link = s.link_scenario_with(&Overrides::default()).unwrap();
            assert!(link.cs_snr_ul_db > link.outage_thresh_db);
            assert_eq!(s.sha256.len(), 64);
        }
    }

    #[test]
    fn default_matches_illustrative_point() {
        let s = LoadedScenario::load("default")
            .unwrap()
            .link_scenario_with(&Overrides::default())
            .unwrap();
        assert_eq!(s, LinkScenario::illustrative(20.0).unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = include_str!("../scenarios/default.toml")
            .replace("[geometry]", "[geometry]\nseperation = 1");
        assert!(matches!(
            LoadedScenario::parse("t", &text),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn overrides_take_precedence() {
        let s = LoadedScenario::load("default").unwrap();
        let o = Overrides {
            outage_thresh_db: Some(12.0),
            separation_km: Some(100.0),
            ..Default::default()
        };
        let link = s.link_scenario_with(&o).unwrap();
        assert_eq!(link.outage_thresh_db, 12.0);
        // The file pins the switching threshold explicitly.
        assert_eq!(link.switch_thresh_db, 10.0);
        assert!((link.fade_ul.rho - correlation_from_distance(100.0).unwrap()).abs() < 1e-15);
        let o = Overrides {
            rho: Some(0.3),
            separation_km: Some(100.0),
            ..Default::default()
        };
        assert_eq!(s.link_scenario_with(&o).unwrap().fade_ul.rho, 0.3);
    }

    #[test]
    fn budget_fills_missing_clear_sky() {
        let text = r#"
            [link]
            outage_thresh_db = 10.0
            [geometry]
            separation_km = 20.0
            [uplink_fade]
            m1 = -0.2
            s1 = 1.1
            m2 = -0.2
            s2 = 1.1
            [downlink_fade]
            m = -1.2
            s = 0.9
            [budget.uplink]
            eirp_dbw = 80.0
            free_space_loss_db = 220.0
            g_over_t_dbk = 30.0
            bandwidth_hz = 1e9
            [budget.downlink]
            eirp_dbw = 60.0
            free_space_loss_db = 210.0
            g_over_t_dbk = 35.0
            bandwidth_hz = 1e9
        "#;
        let s = LoadedScenario::parse("t", text).unwrap();
        let (ul, dl) = (
            s.clear_sky_one(true).unwrap(),
            s.clear_sky_one(false).unwrap(),
        );
        assert!((ul - 28.6).abs() < 1e-9);
        assert!((dl - 23.6).abs() < 1e-9);
    }

    #[test]
    fn missing_clear_sky_without_budget_is_config_error() {
        let text = include_str!("../scenarios/default.toml").replace("cs_snr_dl_db = 21.3", "");
        let s = LoadedScenario::parse("t", &text).unwrap();
        assert!(matches!(
            s.link_scenario_with(&Overrides::default()),
            Err(CliError::Config(_))
        ));
    }
}
