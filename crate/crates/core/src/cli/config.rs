//! Run configuration: a flat key set that can come from a TOML/JSON file or
//! from command-line flags, resolved into a validated [`RunConfig`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::simenv::{Arm, BanditEnv, SuccessModel};
use crate::sharing::{Coupling, SharingParams};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    StoneVsEts,
    Bandit,
    Sharing,
    Minimality,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::StoneVsEts => "stone-vs-ets",
            Experiment::Bandit => "bandit",
            Experiment::Sharing => "sharing",
            Experiment::Minimality => "minimality",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingArg {
    Independent,
    Coupled,
}

impl From<CouplingArg> for Coupling {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Independent => Coupling::Independent,
            CouplingArg::Coupled => Coupling::Coupled,
        }
    }
}

impl From<Coupling> for CouplingArg {
    fn from(c: Coupling) -> Self {
        match c {
            Coupling::Independent => CouplingArg::Independent,
            Coupling::Coupled => CouplingArg::Coupled,
        }
    }
}

/// One layer of configuration. Files, flags and the config echo all use
/// this shape; absent keys fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub docs: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facts: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub questions_per_doc: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_budget: Option<bool>,

    /// `[success_prob, reward]` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arms: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<i64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub agents: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub questions: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_boost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rules: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub share_failures: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pooled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub cases: Option<i64>,
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($field:ident),+ $(,)?) => {
        ConfigLayer { $($field: $top.$field.or($base.$field)),+ }
    };
}

impl ConfigLayer {
    /// `self` wins wherever both layers set a key.
    pub fn over(self, base: ConfigLayer) -> ConfigLayer {
        overlay!(self, base;
            experiment, seed, format,
            docs, facts, questions_per_doc, budget, strict_budget,
            arms, epsilon, horizon, trials,
            agents, questions, p_base, p_boost, rules, replications, share_failures, pooled, coupling, threshold,
            cases,
        )
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn from_file(path: &Path) -> Result<ConfigLayer, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|msg| ConfigError::File { path: path.display().to_string(), msg })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaConfig {
    pub docs: usize,
    pub facts: usize,
    pub questions_per_doc: usize,
    pub budget: u32,
    pub strict_budget: bool,
}

impl Default for QaConfig {
    fn default() -> Self {
        Self { docs: 50, facts: 10, questions_per_doc: 10, budget: 100, strict_budget: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    pub env: BanditEnv,
    pub epsilon: f64,
    pub horizon: usize,
    pub trials: usize,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self { env: BanditEnv::default_three_arm(), epsilon: 0.1, horizon: 1000, trials: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingConfig {
    pub params: SharingParams,
    pub replications: usize,
    pub pooled: bool,
    pub coupling: Coupling,
    /// Success rate for the questions-to-threshold summary; defaults to the
    /// shared curve's final value.
    pub threshold: Option<f64>,
}

impl Default for SharingConfig {
    fn default() -> Self {
        Self {
            params: SharingParams::default(),
            replications: 8,
            pooled: false,
            coupling: Coupling::Independent,
            threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityConfig {
    pub cases: usize,
}

impl Default for MinimalityConfig {
    fn default() -> Self {
        Self { cases: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExperimentConfig {
    StoneVsEts(QaConfig),
    Bandit(BanditConfig),
    Sharing(SharingConfig),
    Minimality(MinimalityConfig),
}

impl ExperimentConfig {
    pub fn experiment(&self) -> Experiment {
        match self {
            ExperimentConfig::StoneVsEts(_) => Experiment::StoneVsEts,
            ExperimentConfig::Bandit(_) => Experiment::Bandit,
            ExperimentConfig::Sharing(_) => Experiment::Sharing,
            ExperimentConfig::Minimality(_) => Experiment::Minimality,
        }
    }
}

/// A fully resolved, validated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub experiment: ExperimentConfig,
}

fn usage(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Usage { key: key.to_owned(), msg: msg.into() }
}

fn count(key: &str, v: Option<i64>, default: usize, min: i64) -> Result<usize, ConfigError> {
    match v {
        None => Ok(default),
        Some(n) if n < min => Err(usage(key, format!("must be >= {min}, got {n}"))),
        Some(n) => usize::try_from(n).map_err(|_| usage(key, "value too large")),
    }
}

fn probability(key: &str, v: Option<f64>, default: f64) -> Result<f64, ConfigError> {
    let p = v.unwrap_or(default);
    if !(0.0..=1.0).contains(&p) {
        return Err(usage(key, format!("must be in [0, 1], got {p}")));
    }
    Ok(p)
}

impl RunConfig {
    /// Resolves a merged layer against the documented defaults.
    pub fn resolve(layer: &ConfigLayer, env_seed: Option<&str>) -> Result<RunConfig, ConfigError> {
        let experiment = layer.experiment.ok_or(ConfigError::MissingExperiment)?;
        let seed = match (layer.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| usage("MNEMOS_SEED", format!("not a 64-bit unsigned integer: {s:?}")))?,
            (None, None) => DEFAULT_SEED,
        };
        let default_format = if experiment == Experiment::Minimality { Format::Json } else { Format::Csv };
        let format = layer.format.unwrap_or(default_format);

        let experiment = match experiment {
            Experiment::StoneVsEts => {
                let d = QaConfig::default();
                let facts = count("facts", layer.facts, d.facts, 1)?;
                let questions_per_doc = count("questions_per_doc", layer.questions_per_doc, d.questions_per_doc.min(facts), 1)?;
                if questions_per_doc > facts {
                    return Err(usage(
                        "questions_per_doc",
                        format!("must not exceed facts ({facts}), got {questions_per_doc}"),
                    ));
                }
                let budget = count("budget", layer.budget, d.budget as usize, 0)?;
                ExperimentConfig::StoneVsEts(QaConfig {
                    docs: count("docs", layer.docs, d.docs, 1)?,
                    facts,
                    questions_per_doc,
                    budget: u32::try_from(budget).map_err(|_| usage("budget", "value too large"))?,
                    strict_budget: layer.strict_budget.unwrap_or(d.strict_budget),
                })
            }
            Experiment::Bandit => {
                let d = BanditConfig::default();
                let env = match &layer.arms {
                    None => d.env,
                    Some(arms) => BanditEnv::new(
                        arms.iter().map(|&(success_prob, reward)| Arm { success_prob, reward }).collect(),
                    )
                    .map_err(|e| usage("arms", e.to_string()))?,
                };
                ExperimentConfig::Bandit(BanditConfig {
                    env,
                    epsilon: probability("epsilon", layer.epsilon, d.epsilon)?,
                    horizon: count("horizon", layer.horizon, d.horizon, 1)?,
                    trials: count("trials", layer.trials, d.trials, 1)?,
                })
            }
            Experiment::Sharing => {
                let d = SharingConfig::default();
                let p_base = probability("p_base", layer.p_base, d.params.model.p_base)?;
                let p_boost = probability("p_boost", layer.p_boost, d.params.model.p_boost)?;
                let model = SuccessModel::new(p_base, p_boost).map_err(|e| usage("p_boost", e.to_string()))?;
                let rules = count("rules", layer.rules, d.params.rules as usize, 1)?;
                let threshold = match layer.threshold {
                    None => None,
                    Some(t) => Some(probability("threshold", Some(t), 0.0)?),
                };
                ExperimentConfig::Sharing(SharingConfig {
                    params: SharingParams {
                        agents: count("agents", layer.agents, d.params.agents, 1)?,
                        questions: count("questions", layer.questions, d.params.questions, 1)?,
                        rules: u32::try_from(rules).map_err(|_| usage("rules", "value too large"))?,
                        model,
                        share_failures: layer.share_failures.unwrap_or(d.params.share_failures),
                    },
                    replications: count("replications", layer.replications, d.replications, 1)?,
                    pooled: layer.pooled.unwrap_or(d.pooled),
                    coupling: layer.coupling.map(Coupling::from).unwrap_or(d.coupling),
                    threshold,
                })
            }
            Experiment::Minimality => ExperimentConfig::Minimality(MinimalityConfig {
                cases: count("cases", layer.cases, MinimalityConfig::default().cases, 1)?,
            }),
        };
        Ok(RunConfig { seed, format, experiment })
    }

    /// The flat form of this config: every key the experiment reads, set.
    /// Feeding it back through [`RunConfig::resolve`] yields `self`.
    pub fn echo(&self) -> ConfigLayer {
        let mut l = ConfigLayer {
            experiment: Some(self.experiment.experiment()),
            seed: Some(self.seed),
            format: Some(self.format),
            ..ConfigLayer::default()
        };
        match &self.experiment {
            ExperimentConfig::StoneVsEts(c) => {
                l.docs = Some(c.docs as i64);
                l.facts = Some(c.facts as i64);
                l.questions_per_doc = Some(c.questions_per_doc as i64);
                l.budget = Some(i64::from(c.budget));
                l.strict_budget = Some(c.strict_budget);
            }
            ExperimentConfig::Bandit(c) => {
                l.arms = Some(c.env.arms().iter().map(|a| (a.success_prob, a.reward)).collect());
                l.epsilon = Some(c.epsilon);
                l.horizon = Some(c.horizon as i64);
                l.trials = Some(c.trials as i64);
            }
            ExperimentConfig::Sharing(c) => {
                l.agents = Some(c.params.agents as i64);
                l.questions = Some(c.params.questions as i64);
                l.p_base = Some(c.params.model.p_base);
                l.p_boost = Some(c.params.model.p_boost);
                l.rules = Some(i64::from(c.params.rules));
                l.replications = Some(c.replications as i64);
                l.share_failures = Some(c.params.share_failures);
                l.pooled = Some(c.pooled);
                l.coupling = Some(c.coupling.into());
                l.threshold = c.threshold;
            }
            ExperimentConfig::Minimality(c) => {
                l.cases = Some(c.cases as i64);
            }
        }
        l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(experiment: Experiment) -> ConfigLayer {
        ConfigLayer { experiment: Some(experiment), ..ConfigLayer::default() }
    }

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::resolve(&layer(Experiment::StoneVsEts), None).unwrap();
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.experiment, ExperimentConfig::StoneVsEts(QaConfig::default()));
        let m = RunConfig::resolve(&layer(Experiment::Minimality), None).unwrap();
        assert_eq!(m.format, Format::Json);
    }

    #[test]
    fn missing_experiment() {
        assert_eq!(RunConfig::resolve(&ConfigLayer::default(), None), Err(ConfigError::MissingExperiment));
    }

    #[test]
    fn env_seed_is_a_fallback() {
        let mut l = layer(Experiment::Bandit);
        assert_eq!(RunConfig::resolve(&l, Some("7")).unwrap().seed, 7);
        l.seed = Some(9);
        assert_eq!(RunConfig::resolve(&l, Some("7")).unwrap().seed, 9);
        let bad = RunConfig::resolve(&layer(Experiment::Bandit), Some("x"));
        assert!(matches!(bad, Err(ConfigError::Usage { ref key, .. }) if key == "MNEMOS_SEED"));
    }

    #[test]
    fn overlay_prefers_top() {
        let file = ConfigLayer { epsilon: Some(0.2), horizon: Some(50), ..layer(Experiment::Bandit) };
        let flags = ConfigLayer { epsilon: Some(0.1), ..ConfigLayer::default() };
        let merged = flags.over(file);
        assert_eq!(merged.epsilon, Some(0.1));
        assert_eq!(merged.horizon, Some(50));
        assert_eq!(merged.experiment, Some(Experiment::Bandit));
    }

    #[test]
    fn range_errors_name_the_key() {
        let cases: Vec<(ConfigLayer, &str)> = vec![
            (ConfigLayer { budget: Some(-5), ..layer(Experiment::StoneVsEts) }, "budget"),
            (ConfigLayer { docs: Some(0), ..layer(Experiment::StoneVsEts) }, "docs"),
            (ConfigLayer { facts: Some(2), questions_per_doc: Some(3), ..layer(Experiment::StoneVsEts) }, "questions_per_doc"),
            (ConfigLayer { epsilon: Some(1.5), ..layer(Experiment::Bandit) }, "epsilon"),
            (ConfigLayer { arms: Some(vec![(0.5, 1.0)]), ..layer(Experiment::Bandit) }, "arms"),
            (ConfigLayer { p_base: Some(0.9), p_boost: Some(0.3), ..layer(Experiment::Sharing) }, "p_boost"),
            (ConfigLayer { replications: Some(0), ..layer(Experiment::Sharing) }, "replications"),
            (ConfigLayer { cases: Some(0), ..layer(Experiment::Minimality) }, "cases"),
        ];
        for (l, want) in cases {
            match RunConfig::resolve(&l, None) {
                Err(ConfigError::Usage { key, .. }) => assert_eq!(key, want),
                other => panic!("{want}: expected usage error, got {other:?}"),
            }
        }
    }

    #[test]
    fn echo_round_trips_through_json() {
        let layers = [
            ConfigLayer { docs: Some(7), budget: Some(3), strict_budget: Some(true), ..layer(Experiment::StoneVsEts) },
            ConfigLayer { arms: Some(vec![(0.5, 2.0), (0.2, 3.0)]), epsilon: Some(0.3), ..layer(Experiment::Bandit) },
            ConfigLayer { threshold: Some(0.4), coupling: Some(CouplingArg::Coupled), ..layer(Experiment::Sharing) },
            ConfigLayer { cases: Some(12), ..layer(Experiment::Minimality) },
        ];
        for l in layers {
            let c = RunConfig::resolve(&l, None).unwrap();
            let json = serde_json::to_string(&c.echo()).unwrap();
            let back: ConfigLayer = serde_json::from_str(&json).unwrap();
            assert_eq!(RunConfig::resolve(&back, None).unwrap(), c);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<ConfigLayer>("epsilon = 0.1\nbogus = 3\n").is_err());
        assert!(serde_json::from_str::<ConfigLayer>(r#"{"budgett": 3}"#).is_err());
        let ok: ConfigLayer = toml::from_str("experiment = \"bandit\"\narms = [[0.5, 2.0], [0.1, 1.0]]\n").unwrap();
        assert_eq!(ok.arms, Some(vec![(0.5, 2.0), (0.1, 1.0)]));
    }
}
