//! Optional TOML run configuration. Command-line flags override its values.

use std::path::Path;

use mq_anneal::anneal::AnnealParams;
use mq_anneal::iterfix::IterParams;
use mq_anneal::quadratize::Weighting;
use serde::Deserialize;

use crate::CliError;

/// Settings shared by the subcommands.
///
/// ```toml
/// threads = 4
/// json = true
///
/// [embed]
/// method = "truncated"
/// k = 4
/// weighting = "delta"
///
/// [anneal]
/// reads = 200
/// sweeps = 500
/// seed = 7
///
/// [iterate]
/// consensus = 10
/// max_iterations = 10
/// ```
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub threads: Option<usize>,
    pub json: bool,
    pub embed: EmbedConfig,
    pub anneal: AnnealParams,
    pub iterate: IterateConfig,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedConfig {
    pub method: String,
    pub k: usize,
    pub weighting: Weighting,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            method: "truncated".into(),
            k: 4,
            weighting: Weighting::Delta,
        }
    }
}

/// Iteration settings apart from the per-round annealing, which comes from
/// the `[anneal]` table.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterateConfig {
    pub consensus: usize,
    pub max_iterations: usize,
    pub min_fix_per_round: usize,
    pub patience: usize,
}

impl Default for IterateConfig {
    fn default() -> Self {
        let d = IterParams::default();
        IterateConfig {
            consensus: d.consensus,
            max_iterations: d.max_iterations,
            min_fix_per_round: d.min_fix_per_round,
            patience: d.patience,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        self.embed.method.parse::<mq_anneal::embed::Method>()?;
        self.iter_params().validate()?;
        Ok(())
    }

    pub fn iter_params(&self) -> IterParams {
        IterParams {
            consensus: self.iterate.consensus,
            max_iterations: self.iterate.max_iterations,
            anneal: self.anneal.clone(),
            min_fix_per_round: self.iterate.min_fix_per_round,
            patience: self.iterate.patience,
        }
    }
}
