//! Synthetic SHERPA-style propulsion system for demonstrations and tests.
//!
//! True component lifetimes are not public, so each component gets a Weibull
//! stand-in. Subsystem and system data are drawn from the lifetime implied by
//! the block diagram over those components.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bsp::LifetimeSample;
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::oracle::{simulate_lifetimes, LifetimeModel, RngSeed};
use crate::rbd::{parse_system, RbdNode, SystemSpec};

pub const SHERPA_RBD: &str = "\
# SHERPA propulsion system
sherpa@series(
    propeller,
    driveshaft,
    gearing,
    powerplant@parallel(
        electric@series(motor, batteries, controller, belt),
        gas@series(engine, gas_delivery)
    )
)
";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentModel {
    Weibull { shape: f64, scale: f64 },
}

impl ComponentModel {
    fn to_model(self) -> Result<LifetimeModel> {
        match self {
            ComponentModel::Weibull { shape, scale } => LifetimeModel::weibull(shape, scale),
        }
    }
}

/// What `simulate` draws: a diagram, a model per component, and sampling settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoConfig {
    /// Block diagram source, DSL or JSON.
    pub rbd: String,
    pub components: BTreeMap<String, ComponentModel>,
    #[serde(default = "default_n")]
    pub n_per_node: usize,
    #[serde(default = "default_censoring")]
    pub censor_fraction: f64,
    /// Labels that receive data; every label when absent.
    #[serde(default)]
    pub observe: Option<Vec<String>>,
}

fn default_n() -> usize {
    30
}

fn default_censoring() -> f64 {
    0.15
}

impl DemoConfig {
    pub fn sherpa() -> Self {
        let weibull = |shape, scale| ComponentModel::Weibull { shape, scale };
        let components = [
            ("propeller", weibull(2.0, 900.0)),
            ("driveshaft", weibull(2.5, 1200.0)),
            ("gearing", weibull(1.8, 1000.0)),
            ("motor", weibull(1.5, 600.0)),
            ("batteries", weibull(2.2, 450.0)),
            ("controller", weibull(1.3, 800.0)),
            ("belt", weibull(2.0, 700.0)),
            ("engine", weibull(1.6, 500.0)),
            ("gas_delivery", weibull(1.4, 650.0)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            rbd: SHERPA_RBD.to_string(),
            components,
            n_per_node: default_n(),
            censor_fraction: default_censoring(),
            observe: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("demo config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parses the diagram and checks every component has a model.
    pub fn system(&self) -> Result<DemoSystem> {
        let spec = parse_system(&self.rbd)?;
        let mut parts = BTreeMap::new();
        for id in spec.root.component_ids() {
            let model = self
                .components
                .get(id)
                .ok_or_else(|| Error::Config(format!("no lifetime model for component `{id}`")))?;
            parts.insert(id.to_string(), model.to_model()?);
        }
        let labels: Vec<String> = match &self.observe {
            Some(list) => {
                for l in list {
                    if spec.root.find(l).is_none() {
                        return Err(Error::Config(format!(
                            "observed label `{l}` is not in the diagram"
                        )));
                    }
                }
                list.clone()
            }
            None => spec.root.labels().into_iter().map(String::from).collect(),
        };
        Ok(DemoSystem {
            spec,
            parts,
            observed: labels,
            n_per_node: self.n_per_node,
            censor_fraction: self.censor_fraction,
        })
    }
}

/// A validated demo configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoSystem {
    pub spec: SystemSpec,
    parts: BTreeMap<String, LifetimeModel>,
    observed: Vec<String>,
    n_per_node: usize,
    censor_fraction: f64,
}

/// One simulated replicate, with datasets bound to node labels by name.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoBundle {
    pub spec: SystemSpec,
    pub datasets: Vec<Dataset>,
}

impl DemoBundle {
    pub fn data_map(&self) -> BTreeMap<String, Vec<LifetimeSample>> {
        self.datasets
            .iter()
            .map(|d| (d.node.clone(), d.samples.clone()))
            .collect()
    }
}

impl DemoSystem {
    /// True lifetime model of the node labeled `label`.
    pub fn model(&self, label: &str) -> Result<LifetimeModel> {
        let node = self
            .spec
            .root
            .find(label)
            .ok_or_else(|| Error::Config(format!("no node labeled `{label}`")))?;
        Ok(self.model_of(node))
    }

    fn model_of(&self, node: &RbdNode) -> LifetimeModel {
        match node {
            RbdNode::Component { id } => self.parts[id].clone(),
            _ => LifetimeModel::Structure {
                node: node.clone(),
                parts: self.parts.clone(),
            },
        }
    }

    pub fn truth(&self) -> LifetimeModel {
        self.model_of(&self.spec.root)
    }

    /// True system CDF at each of `times`.
    pub fn truth_curve(&self, times: &[f64]) -> Vec<(f64, f64)> {
        let truth = self.truth();
        times.iter().map(|&t| (t, truth.cdf(t))).collect()
    }

    /// Draws one dataset per observed label; label `k` uses stream `k` of `seed`.
    pub fn simulate(&self, seed: RngSeed) -> Result<DemoBundle> {
        let models = self
            .observed
            .iter()
            .map(|l| Ok((l.clone(), self.model(l)?)))
            .collect::<Result<Vec<_>>>()?;
        let datasets = simulate_lifetimes(&models, self.n_per_node, self.censor_fraction, seed)?;
        let mut spec = self.spec.clone();
        spec.bind_by_name(datasets.iter().map(|d| d.node.as_str()), []);
        Ok(DemoBundle { spec, datasets })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sherpa_has_thirteen_datasets() {
        let sys = DemoConfig::sherpa().system().unwrap();
        assert_eq!(sys.spec.root.component_ids().len(), 9);
        let bundle = sys.simulate(RngSeed(1)).unwrap();
        assert_eq!(bundle.datasets.len(), 13);
        assert!(bundle.datasets.iter().all(|d| d.samples.len() == 30));
        assert_eq!(bundle.spec.data.len(), 13);
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = DemoConfig::sherpa();
        assert_eq!(DemoConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let minimal = r#"{"rbd": "series(a, b)", "components": {
            "a": {"weibull": {"shape": 1.0, "scale": 10.0}},
            "b": {"weibull": {"shape": 2.0, "scale": 5.0}}}}"#;
        let cfg = DemoConfig::from_json(minimal).unwrap();
        assert_eq!(cfg.n_per_node, 30);
        assert_eq!(
            cfg.system()
                .unwrap()
                .simulate(RngSeed(0))
                .unwrap()
                .datasets
                .len(),
            2
        );
    }

    #[test]
    fn missing_component_model() {
        let cfg = DemoConfig::from_json(r#"{"rbd": "series(a, b)", "components": {}}"#).unwrap();
        assert!(matches!(cfg.system(), Err(Error::Config(_))));
    }

    #[test]
    fn truth_is_series_of_common_parts_and_powerplant() {
        let sys = DemoConfig::sherpa().system().unwrap();
        let t = 300.0;
        let r = |l: &str| 1.0 - sys.model(l).unwrap().cdf(t);
        let expect = 1.0 - r("propeller") * r("driveshaft") * r("gearing") * r("powerplant");
        assert!((sys.truth().cdf(t) - expect).abs() < 1e-14);
    }
}
