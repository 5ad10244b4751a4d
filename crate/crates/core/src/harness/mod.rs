//! Scenario configuration, training and evaluation runs, method comparison,
//! metrics streams and figure-data export.
//!
//! A run directory holds:
//!
//! | file             | content                                             |
//! |------------------|-----------------------------------------------------|
//! | `config.toml`    | the resolved scenario                               |
//! | `manifest.json`  | seed, config hash, progress and artifact names      |
//! | `metrics.jsonl`  | schema header, then one record per line             |
//! | `checkpoint.txt` | policies, critics and their targets (trained only)  |
//! | `trainer.bin`    | full trainer state for resuming (trained only)      |
//! | `trace.jsonl`    | one greedy episode, step by step                    |
//! | `figures/*.tsv`  | exported figure tables                              |
//!
//! One epoch is one full episode.

mod checkpoint;
mod export;
mod run;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::UavPowerParams;
use crate::marl::{Method, TrainConfig};
use crate::radio::RadioConfig;
use crate::world::WorldConfig;
use crate::{Error, Result};

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointBundle, CHECKPOINT_SCHEMA};
pub use export::{export_figure_data, FigureKey, FIGURE_SCHEMA};
pub use run::{
    compare_methods, run_inference, run_training, summarize_eval, CellResult, Comparison,
    EvalSummary, InferenceReport, Manifest, MethodRow, MetricsRecord, RecordKind, RunOptions,
    RunStatus, RunSummary, StreamHeader, MANIFEST_SCHEMA, METRICS_SCHEMA, SUMMARY_SCHEMA, TRACE_SCHEMA,
};

pub const CONFIG_SCHEMA: &str = "# uavbs-config/1";
pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const STATE_FILE: &str = "trainer.bin";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const FIGURES_DIR: &str = "figures";
pub const SUMMARY_FILE: &str = "summary.tsv";

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "UAVBS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Agents sense only within the observation radius.
    #[default]
    Pomdp,
    /// Every entity is visible.
    Fomdp,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pomdp" => Ok(Mode::Pomdp),
            "fomdp" => Ok(Mode::Fomdp),
            _ => Err(Error::Config(format!("unknown mode {s:?} (expected pomdp or fomdp)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Two agents, one non-agent, eight UEs, 3,000 epochs, with smaller
    /// networks and a shorter horizon.
    Desk,
    /// Full-size scenario: four agents, three non-agents, 25 UEs, 50,000 epochs.
    Paper,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        }
    }

    pub fn config(self) -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.preset = Some(self);
        if self == Preset::Desk {
            c.world.n_ues = 8;
            c.world.m_agents = 2;
            c.world.k_nonagents = 1;
            c.train.epochs = 3_000;
            c.train.train_every = 4;
            c.train.reward_scale = 10.0;
            c.train.gamma = 0.9;
            c.train.hidden = 32;
            c.train.hidden_layers = 2;
            c.train.comm_layers = 2;
            c.train.actor_lr = Some(2e-4);
            c.train.entropy_coef = 0.01;
        }
        c
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            _ => Err(Error::Config(format!("unknown preset {s:?} (expected desk or paper)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    #[default]
    Config,
    Env,
    Cli,
}

/// A complete experiment description. Every section is optional in a file;
/// missing values come from the preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Option<Preset>,
    pub method: Method,
    pub mode: Mode,
    /// Master seed; overrides `world.seed` and `train.seed` when set.
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    /// Also write one record per environment step to the metrics stream.
    pub record_steps: bool,
    pub world: WorldConfig,
    pub radio: RadioConfig,
    pub energy: UavPowerParams,
    pub train: TrainConfig,
    /// Directory that relative paths in the file resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
    #[serde(skip)]
    pub seed_source: SeedSource,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            preset: None,
            method: Method::Proposed,
            mode: Mode::Pomdp,
            seed: None,
            output_dir: PathBuf::from("runs/default"),
            record_steps: false,
            world: WorldConfig::default(),
            radio: RadioConfig::default(),
            energy: UavPowerParams::default(),
            train: TrainConfig::default(),
            base_dir: None,
            seed_source: SeedSource::Config,
        }
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl ScenarioConfig {
    /// Parses a scenario on top of `preset` (or the preset named in the
    /// text, or the paper preset).
    pub fn from_toml_str(text: &str, preset: Option<Preset>) -> Result<Self> {
        let over: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        let named = match over.get("preset") {
            Some(toml::Value::String(s)) => Some(s.parse::<Preset>()?),
            Some(_) => return Err(Error::Config("preset must be a string".into())),
            None => None,
        };
        let preset = preset.or(named).unwrap_or(Preset::Paper);
        let mut base = toml::Value::try_from(preset.config())
            .map_err(|e| Error::Config(format!("preset {preset}: {e}")))?;
        let mut over = toml::Value::Table(over);
        if let toml::Value::Table(t) = &mut over {
            t.insert("preset".into(), toml::Value::String(preset.name().into()));
        }
        merge(&mut base, over);
        let cfg: ScenarioConfig = base
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("scenario: {e}")))?;
        cfg.resolved()
    }

    pub fn load(path: &Path, preset: Option<Preset>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, preset).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Applies the master seed and mode to the sub-configs and validates.
    pub fn resolved(mut self) -> Result<Self> {
        if let Some(s) = self.seed {
            self.world.seed = s;
            self.train.seed = s;
        }
        self.world.fomdp = self.mode == Mode::Fomdp;
        self.validate()?;
        Ok(self)
    }

    /// Overrides the seed from the command line or, failing that, the
    /// environment value of [`SEED_ENV`].
    pub fn with_seed_override(mut self, cli: Option<u64>, env: Option<&str>) -> Result<Self> {
        let (seed, source) = match (cli, env.map(str::trim).filter(|s| !s.is_empty())) {
            (Some(s), _) => (s, SeedSource::Cli),
            (None, Some(v)) => {
                let s = v
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not a u64")))?;
                (s, SeedSource::Env)
            }
            (None, None) => return Ok(self),
        };
        self.seed = Some(seed);
        self.seed_source = source;
        self.resolved()
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.energy.validate()?;
        self.train.validate()?;
        self.radio.build(self.base_dir.as_deref())?;
        if self.method == Method::Proposed && self.world.m_agents < 2 {
            return Err(Error::Config(
                "the proposed method needs at least two agents".into(),
            ));
        }
        Ok(())
    }

    /// Effective master seed.
    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(self.train.seed)
    }

    pub fn to_toml(&self) -> Result<String> {
        let body = toml::to_string(self).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        Ok(format!("{CONFIG_SCHEMA}\n{body}"))
    }

    /// Stable hash of everything that affects results (the output
    /// directory excluded).
    pub fn content_hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let text = c.to_toml()?;
        let h = text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        });
        Ok(format!("{h:016x}"))
    }

    pub fn build_world(&self) -> Result<crate::world::World> {
        let radio = self.radio.build(self.base_dir.as_deref())?;
        crate::world::World::new(self.world.clone(), radio, self.energy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_preset_values() {
        let c = Preset::Desk.config().resolved().unwrap();
        assert_eq!((c.world.m_agents, c.world.k_nonagents, c.world.n_ues), (2, 1, 8));
        assert_eq!(c.train.epochs, 3_000);
        assert_eq!((c.train.gamma, c.train.hidden, c.train.actor_lr), (0.9, 32, Some(2e-4)));
        let p = Preset::Paper.config();
        assert_eq!((p.world.m_agents, p.world.k_nonagents, p.world.n_ues), (4, 3, 25));
        assert_eq!(p.train.epochs, 50_000);
    }

    #[test]
    fn file_overrides_preset() {
        let c = ScenarioConfig::from_toml_str(
            "method = \"comp1\"\nseed = 9\n[world]\nn_ues = 5\n[train]\nepochs = 7\n",
            Some(Preset::Desk),
        )
        .unwrap();
        assert_eq!(c.method, Method::Comp1);
        assert_eq!(c.world.n_ues, 5);
        assert_eq!(c.world.m_agents, 2);
        assert_eq!(c.train.epochs, 7);
        assert_eq!((c.world.seed, c.train.seed), (9, 9));
        assert_eq!(c.preset, Some(Preset::Desk));
    }

    #[test]
    fn preset_named_in_file() {
        let c = ScenarioConfig::from_toml_str("preset = \"desk\"\n", None).unwrap();
        assert_eq!(c.world.m_agents, 2);
        let cli = ScenarioConfig::from_toml_str("preset = \"desk\"\n", Some(Preset::Paper)).unwrap();
        assert_eq!(cli.world.m_agents, 4);
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            "bogus = 1\n",
            "[world]\nm_agents = 0\n",
            "method = \"maddpg\"\n",
            "mode = \"both\"\n",
            "[train]\ngamma = 1.5\n",
            "[world]\nn_ues = \"many\"\n",
            "[world]\nm_agents = 1\n",
            "preset = \"lab\"\n",
        ] {
            assert!(
                matches!(ScenarioConfig::from_toml_str(text, None), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn mode_sets_observability() {
        let c = ScenarioConfig::from_toml_str("mode = \"fomdp\"\n", None).unwrap();
        assert!(c.world.fomdp);
        let c = ScenarioConfig::from_toml_str("[world]\nfomdp = true\n", None).unwrap();
        assert!(!c.world.fomdp);
    }

    #[test]
    fn seed_precedence() {
        let c = ScenarioConfig::from_toml_str("seed = 1\n", None).unwrap();
        let env = c.clone().with_seed_override(None, Some("5")).unwrap();
        assert_eq!((env.master_seed(), env.seed_source), (5, SeedSource::Env));
        let cli = c.clone().with_seed_override(Some(7), Some("5")).unwrap();
        assert_eq!((cli.master_seed(), cli.seed_source), (7, SeedSource::Cli));
        assert_eq!(cli.world.seed, 7);
        let none = c.clone().with_seed_override(None, Some(" ")).unwrap();
        assert_eq!((none.master_seed(), none.seed_source), (1, SeedSource::Config));
        assert!(c.with_seed_override(None, Some("x")).is_err());
    }

    #[test]
    fn toml_round_trip_and_hash() {
        let c = Preset::Desk.config().resolved().unwrap();
        let text = c.to_toml().unwrap();
        assert!(text.starts_with(CONFIG_SCHEMA));
        let back = ScenarioConfig::from_toml_str(&text, None).unwrap();
        assert_eq!(back, c);
        let mut moved = c.clone();
        moved.output_dir = PathBuf::from("elsewhere");
        assert_eq!(moved.content_hash().unwrap(), c.content_hash().unwrap());
        let mut other = c.clone();
        other.train.lr = 2e-3;
        assert_ne!(other.content_hash().unwrap(), c.content_hash().unwrap());
    }
}
