//! Training, inference and comparison runs.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    checkpoint, Mode, ScenarioConfig, SeedSource, CHECKPOINT_FILE, CONFIG_FILE, MANIFEST_FILE,
    METRICS_FILE, STATE_FILE, SUMMARY_FILE, TRACE_FILE,
};
use crate::marl::{method_flops, rollout, Actor, EpisodeStats, Method, Policies, Trainer};
use crate::rng::{stream, stream_rng};
use crate::world::{StepMetrics, UavSnapshot, World};
use crate::{Error, Result};

pub const MANIFEST_SCHEMA: &str = "uavbs-manifest/1";
pub const METRICS_SCHEMA: &str = "uavbs-metrics/1";
pub const TRACE_SCHEMA: &str = "uavbs-trace/1";
pub const SUMMARY_SCHEMA: &str = "# uavbs-summary/1";

/// Evaluation episodes are numbered from here so they never share world
/// seeds with training episodes.
const EVAL_EPISODE_BASE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Episode,
    Step,
}

/// One line of a metrics stream or trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub kind: RecordKind,
    pub epoch: u64,
    pub episode: u64,
    /// Cumulative environment steps when the record was written.
    pub step: u64,
    /// Step within the episode (step records only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    pub epsilon: f64,
    pub total_reward: f64,
    pub agent_rewards: Vec<f64>,
    pub tau: f64,
    pub omega: f64,
    pub total_qos: f64,
    /// Episode means; equal to the instantaneous values on step records.
    pub mean_tau: f64,
    pub mean_omega: f64,
    pub mean_qos: f64,
    pub served: Vec<usize>,
    pub served_total: usize,
    pub served_agents: usize,
    pub served_nonagents: usize,
    pub energy_j: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    pub positions: Vec<UavSnapshot>,
}

impl MetricsRecord {
    fn from_step(episode: u64, step: u64, epsilon: f64, m: &StepMetrics) -> Self {
        let agent_rewards: Vec<f64> = m.agents.iter().map(|a| a.r_total).collect();
        MetricsRecord {
            kind: RecordKind::Step,
            epoch: episode,
            episode,
            step,
            t: Some(m.step),
            epsilon,
            total_reward: agent_rewards.iter().sum(),
            agent_rewards,
            tau: m.tau,
            omega: m.omega,
            total_qos: m.total_qos,
            mean_tau: m.tau,
            mean_omega: m.omega,
            mean_qos: m.total_qos,
            served: m.agents.iter().map(|a| a.served).collect(),
            served_total: m.served_total,
            served_agents: m.served_agents,
            served_nonagents: m.served_nonagents,
            energy_j: m.agents.iter().map(|a| a.energy_j).collect(),
            loss: None,
            positions: m.uavs.clone(),
        }
    }

    fn from_episode(s: &EpisodeStats, step: u64) -> Self {
        let last = s.steps.last();
        let (total, agents, nonagents) = last.map_or((s.served.iter().sum(), s.served.iter().sum(), 0), |m| {
            (m.served_total, m.served_agents, m.served_nonagents)
        });
        MetricsRecord {
            kind: RecordKind::Episode,
            epoch: s.episode,
            episode: s.episode,
            step,
            t: None,
            epsilon: s.epsilon,
            total_reward: s.total_reward,
            agent_rewards: s.agent_rewards.clone(),
            tau: s.final_tau,
            omega: s.final_omega,
            total_qos: s.final_qos,
            mean_tau: s.mean_tau,
            mean_omega: s.mean_omega,
            mean_qos: s.mean_qos,
            served: s.served.clone(),
            served_total: total,
            served_agents: agents,
            served_nonagents: nonagents,
            energy_j: s.energy_j.clone(),
            loss: s.mean_loss,
            positions: s.uavs.clone(),
        }
    }
}

/// Greedy evaluation aggregated over several episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    /// Training epochs completed when evaluated.
    pub epoch: u64,
    pub episodes: u64,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub agent_rewards: Vec<f64>,
    /// Mean over episodes of the episode-average support rate.
    pub support_rate: f64,
    pub final_tau: f64,
    pub mean_omega: f64,
    pub total_qos: f64,
    /// Residual energy per agent at episode end, averaged over episodes.
    pub energy_j: Vec<f64>,
}

impl EvalSummary {
    pub fn residual_energy_j(&self) -> f64 {
        mean(&self.energy_j)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Sample standard deviation; zero for fewer than two values.
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn column_means(rows: impl Iterator<Item = Vec<f64>>) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = rows.collect();
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|j| mean(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect()
}

pub fn summarize_eval(epoch: u64, stats: &[EpisodeStats]) -> EvalSummary {
    let rewards: Vec<f64> = stats.iter().map(|s| s.total_reward).collect();
    let pick = |f: fn(&EpisodeStats) -> f64| mean(&stats.iter().map(f).collect::<Vec<_>>());
    EvalSummary {
        epoch,
        episodes: stats.len() as u64,
        mean_reward: mean(&rewards),
        std_reward: std_dev(&rewards),
        agent_rewards: column_means(stats.iter().map(|s| s.agent_rewards.clone())),
        support_rate: pick(|s| s.mean_tau),
        final_tau: pick(|s| s.final_tau),
        mean_omega: pick(|s| s.mean_omega),
        total_qos: pick(|s| s.mean_qos),
        energy_j: column_means(stats.iter().map(|s| s.energy_j.clone())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub method: Method,
    pub mode: Mode,
    pub preset: Option<String>,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub config_hash: String,
    pub epochs: u64,
    pub epochs_done: u64,
    pub env_steps: u64,
    pub updates: u64,
    pub status: RunStatus,
    pub m_agents: usize,
    pub obs_dim: usize,
    pub policy_flops: u64,
    pub config: String,
    pub metrics: String,
    pub checkpoint: Option<String>,
    pub state: Option<String>,
    pub trace: Option<String>,
    pub final_eval: Option<EvalSummary>,
}

impl Manifest {
    pub fn load(run_dir: &Path) -> Result<Manifest> {
        let p = run_dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let m: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::parse(&p, e.to_string()))?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(Error::parse(&p, format!("unsupported schema {:?}", m.schema)));
        }
        Ok(m)
    }

    fn save(&self, run_dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::State(format!("manifest: {e}")))?;
        write_atomic(&run_dir.join(MANIFEST_FILE), format!("{text}\n").as_bytes())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Continue an interrupted run in the same directory.
    pub resume: bool,
    /// Checkpoint and stop once this many epochs are done, leaving the run
    /// resumable.
    pub stop_after: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub manifest: Manifest,
    pub final_eval: Option<EvalSummary>,
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn json_line<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::State(format!("metrics: {e}")))
}

/// First line of every JSON-lines stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamHeader {
    pub schema: String,
    pub method: Method,
    pub mode: Mode,
    pub m_agents: usize,
    pub k_nonagents: usize,
    pub n_ues: usize,
    pub seed: u64,
}

fn header(schema: &str, cfg: &ScenarioConfig) -> StreamHeader {
    StreamHeader {
        schema: schema.into(),
        method: cfg.method,
        mode: cfg.mode,
        m_agents: cfg.world.m_agents,
        k_nonagents: cfg.world.k_nonagents,
        n_ues: cfg.world.n_ues,
        seed: cfg.master_seed(),
    }
}

struct Stream {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Stream {
    fn create(path: PathBuf, header: &StreamHeader) -> Result<Self> {
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut s = Stream {
            path,
            out: BufWriter::new(f),
        };
        s.line(header)?;
        Ok(s)
    }

    fn append(path: PathBuf) -> Result<Self> {
        let f = OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Stream {
            path,
            out: BufWriter::new(f),
        })
    }

    fn line<T: Serialize>(&mut self, v: &T) -> Result<()> {
        let text = json_line(v)?;
        writeln!(self.out, "{text}").map_err(|e| Error::io(&self.path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Drops records past `epochs_done` left behind by an interrupted run.
fn truncate_metrics(path: &Path, epochs_done: u64) -> Result<()> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut keep = String::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i > 0 {
            let v: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| Error::parse(path, e.to_string()))?;
            if v["episode"].as_u64().is_none_or(|e| e >= epochs_done) {
                break;
            }
        }
        keep.push_str(&line);
        keep.push('\n');
    }
    write_atomic(path, keep.as_bytes())
}

fn evaluate(policies: &Policies, world: &mut World, cfg: &ScenarioConfig, epoch: u64) -> Result<EvalSummary> {
    let stats = (0..cfg.train.eval_episodes)
        .map(|e| {
            let ep = EVAL_EPISODE_BASE + e;
            let mut rng = stream_rng(cfg.train.seed, stream::EVAL, ep);
            rollout(policies, world, ep, 0.0, &mut rng, false)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_eval(epoch, &stats))
}

fn collect_trace(
    cfg: &ScenarioConfig,
    policies: &Policies,
    world: &mut World,
    episodes: u64,
) -> Result<(Vec<EpisodeStats>, Vec<MetricsRecord>)> {
    let mut stats = Vec::new();
    let mut records = Vec::new();
    let mut steps = 0;
    for e in 0..episodes {
        let ep = EVAL_EPISODE_BASE + e;
        let mut rng = stream_rng(cfg.train.seed, stream::EVAL, ep);
        let s = rollout(policies, world, ep, 0.0, &mut rng, true)?;
        for m in &s.steps {
            steps += 1;
            records.push(MetricsRecord::from_step(ep, steps, 0.0, m));
        }
        stats.push(s);
    }
    Ok((stats, records))
}

fn write_trace(path: &Path, cfg: &ScenarioConfig, records: &[MetricsRecord]) -> Result<()> {
    let mut out = Stream::create(path.to_path_buf(), &header(TRACE_SCHEMA, cfg))?;
    for r in records {
        out.line(r)?;
    }
    out.flush()
}

/// Per-policy costs of the networks the method actually runs.
fn policy_flops(policies: &Policies) -> u64 {
    let first = |want_comm: bool| {
        policies
            .actors
            .iter()
            .find(|a| matches!(a, Actor::CommNet(_)) == want_comm)
            .map_or(0, |a| a.flops() as u64)
    };
    method_flops(policies.method, first(false), first(true), policies.m_agents as u64)
}

fn save_artifacts(dir: &Path, trainer: &Trainer) -> Result<()> {
    checkpoint::save_checkpoint(
        &dir.join(CHECKPOINT_FILE),
        &trainer.policies,
        &trainer.target_policies,
        &trainer.critics.nets,
        &trainer.target_critics.nets,
    )?;
    let state = bincode::serialize(trainer).map_err(|e| Error::State(format!("trainer state: {e}")))?;
    write_atomic(&dir.join(STATE_FILE), &state)
}

fn load_state(dir: &Path) -> Result<Trainer> {
    let p = dir.join(STATE_FILE);
    let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
    bincode::deserialize(&bytes).map_err(|e| Error::parse(&p, e.to_string()))
}

/// Trains `cfg.method` for `cfg.train.epochs` episodes in `cfg.output_dir`.
///
/// Writes one metrics record per episode (plus step records when
/// `record_steps` is set), evaluates and checkpoints every
/// `checkpoint_every` epochs and at the end, and finishes with a greedy
/// trace. With `resume`, a matching unfinished run continues from its last
/// checkpoint.
pub fn run_training(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunSummary> {
    let cfg = cfg.clone().resolved()?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let hash = cfg.content_hash()?;
    let trains = cfg.method.trains();
    let mut world = cfg.build_world()?;

    let resumed = if opts.resume && trains && dir.join(MANIFEST_FILE).exists() {
        let m = Manifest::load(&dir)?;
        if m.config_hash != hash {
            return Err(Error::Config(format!(
                "{}: holds a run of a different configuration",
                dir.display()
            )));
        }
        let t = if m.epochs_done == 0 {
            None
        } else {
            let t = load_state(&dir)?;
            if t.episodes_done() != m.epochs_done {
                return Err(Error::State(format!(
                    "{}: trainer state is at epoch {}, manifest at {}",
                    dir.display(),
                    t.episodes_done(),
                    m.epochs_done
                )));
            }
            Some(t)
        };
        t.map(|t| (t, m))
    } else {
        None
    };

    let (mut trainer, mut metrics, mut last_eval) = match resumed {
        Some((t, m)) => {
            let p = dir.join(METRICS_FILE);
            truncate_metrics(&p, m.epochs_done)?;
            (t, Stream::append(p)?, m.final_eval)
        }
        None => {
            write_atomic(&dir.join(CONFIG_FILE), cfg.to_toml()?.as_bytes())?;
            let _ = fs::remove_file(dir.join(TRACE_FILE));
            let t = Trainer::for_world(cfg.method, &world, cfg.train.clone())?;
            let s = Stream::create(dir.join(METRICS_FILE), &header(METRICS_SCHEMA, &cfg))?;
            (t, s, None)
        }
    };

    let mut manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        method: cfg.method,
        mode: cfg.mode,
        preset: cfg.preset.map(|p| p.name().to_string()),
        seed: cfg.master_seed(),
        seed_source: cfg.seed_source,
        config_hash: hash,
        epochs: cfg.train.epochs,
        epochs_done: trainer.episodes_done(),
        env_steps: trainer.env_steps(),
        updates: trainer.updates(),
        status: RunStatus::Running,
        m_agents: cfg.world.m_agents,
        obs_dim: world.layout().width(),
        policy_flops: policy_flops(&trainer.policies),
        config: CONFIG_FILE.into(),
        metrics: METRICS_FILE.into(),
        checkpoint: None,
        state: None,
        trace: None,
        final_eval: last_eval.clone(),
    };
    if trains && dir.join(CHECKPOINT_FILE).exists() && manifest.epochs_done > 0 {
        manifest.checkpoint = Some(CHECKPOINT_FILE.into());
        manifest.state = Some(STATE_FILE.into());
    }
    manifest.save(&dir)?;

    let epochs = cfg.train.epochs;
    let every = cfg.train.checkpoint_every;
    for ep in trainer.episodes_done()..epochs {
        let before = trainer.env_steps();
        let stats = trainer.train_episode(&mut world, ep, true)?;
        if cfg.record_steps {
            for (i, m) in stats.steps.iter().enumerate() {
                metrics.line(&MetricsRecord::from_step(ep, before + i as u64 + 1, stats.epsilon, m))?;
            }
        }
        metrics.line(&MetricsRecord::from_episode(&stats, trainer.env_steps()))?;
        let done = ep + 1;
        let periodic = every > 0 && done % every == 0;
        let stop = opts.stop_after.is_some_and(|n| done >= n) && done < epochs;
        if periodic || stop || done == epochs {
            metrics.flush()?;
            let eval = evaluate(&trainer.policies, &mut world, &cfg, done)?;
            last_eval = Some(eval);
            if trains {
                save_artifacts(&dir, &trainer)?;
                manifest.checkpoint = Some(CHECKPOINT_FILE.into());
                manifest.state = Some(STATE_FILE.into());
            }
            manifest.epochs_done = done;
            manifest.env_steps = trainer.env_steps();
            manifest.updates = trainer.updates();
            manifest.final_eval = last_eval.clone();
            manifest.save(&dir)?;
        }
        if stop {
            return Ok(RunSummary {
                run_dir: dir,
                final_eval: last_eval,
                manifest,
            });
        }
    }
    metrics.flush()?;

    if trains && manifest.checkpoint.is_none() {
        save_artifacts(&dir, &trainer)?;
        manifest.checkpoint = Some(CHECKPOINT_FILE.into());
        manifest.state = Some(STATE_FILE.into());
    }
    if epochs > 0 {
        let (_, records) = collect_trace(&cfg, &trainer.policies, &mut world, 1)?;
        write_trace(&dir.join(TRACE_FILE), &cfg, &records)?;
        manifest.trace = Some(TRACE_FILE.into());
    }
    manifest.epochs_done = trainer.episodes_done();
    manifest.env_steps = trainer.env_steps();
    manifest.updates = trainer.updates();
    manifest.status = RunStatus::Complete;
    manifest.save(&dir)?;
    Ok(RunSummary {
        run_dir: dir,
        final_eval: manifest.final_eval.clone(),
        manifest,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceReport {
    pub summary: EvalSummary,
    /// Per-step records of every episode.
    pub trace: Vec<MetricsRecord>,
}

/// Greedy episodes with the policies stored at `checkpoint` (a bundle file
/// or a run directory). `Random` needs no checkpoint. The trace is written
/// to `out` when given.
pub fn run_inference(
    cfg: &ScenarioConfig,
    checkpoint: Option<&Path>,
    out: Option<&Path>,
) -> Result<InferenceReport> {
    let cfg = cfg.clone().resolved()?;
    let mut world = cfg.build_world()?;
    let policies = match checkpoint {
        Some(p) => checkpoint::load_checkpoint(p, &cfg)?.policies,
        None if cfg.method.trains() => {
            return Err(Error::Config(format!(
                "evaluating {} requires a checkpoint",
                cfg.method
            )))
        }
        None => {
            let mut rng = stream_rng(cfg.train.seed, stream::POLICY_INIT, 0);
            Policies::new(cfg.method, cfg.world.m_agents, world.layout().width(), &cfg.train, &mut rng)?
        }
    };
    let (stats, trace) = collect_trace(&cfg, &policies, &mut world, cfg.train.eval_episodes)?;
    if let Some(p) = out {
        write_trace(p, &cfg, &trace)?;
    }
    Ok(InferenceReport {
        summary: summarize_eval(0, &stats),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub method: Method,
    pub seed: u64,
    pub result: std::result::Result<EvalSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: Method,
    pub ok: usize,
    pub failed: usize,
    pub support_rate: (f64, f64),
    pub total_qos: (f64, f64),
    pub residual_energy_j: (f64, f64),
    pub reward: (f64, f64),
    pub flops: u64,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub cells: Vec<CellResult>,
    pub rows: Vec<MethodRow>,
    pub summary_path: PathBuf,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    (mean(v), std_dev(v))
}

/// Trains and evaluates every (method, seed) pair under `out_dir`, then
/// writes a per-method table of mean and standard deviation. A failing
/// cell is recorded and the rest still run.
pub fn compare_methods(
    base: &ScenarioConfig,
    methods: &[Method],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<Comparison> {
    if methods.is_empty() || seeds.is_empty() {
        return Err(Error::Config("compare needs at least one method and one seed".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut cells = Vec::new();
    for &method in methods {
        for &seed in seeds {
            let mut cfg = base.clone();
            cfg.method = method;
            cfg.seed = Some(seed);
            cfg.output_dir = out_dir.join(format!("{method}-seed{seed}"));
            let result = run_training(&cfg, &RunOptions::default())
                .and_then(|s| {
                    s.final_eval.map_or_else(
                        || {
                            let c = cfg.clone().resolved()?;
                            let mut w = c.build_world()?;
                            let mut rng = stream_rng(c.train.seed, stream::POLICY_INIT, 0);
                            let p = Policies::new(method, c.world.m_agents, w.layout().width(), &c.train, &mut rng)?;
                            evaluate(&p, &mut w, &c, 0)
                        },
                        Ok,
                    )
                })
                .map_err(|e| e.to_string());
            cells.push(CellResult { method, seed, result });
        }
    }

    let mut rows = Vec::new();
    for &method in methods {
        let mine: Vec<&CellResult> = cells.iter().filter(|c| c.method == method).collect();
        let ok: Vec<&EvalSummary> = mine.iter().filter_map(|c| c.result.as_ref().ok()).collect();
        let col = |f: fn(&EvalSummary) -> f64| mean_std(&ok.iter().map(|s| f(s)).collect::<Vec<_>>());
        let flops = (|| -> Result<u64> {
            let c = base.clone().resolved()?;
            let mut rng = stream_rng(0, stream::POLICY_INIT, 0);
            let width = crate::world::observation_width(&c.world);
            Ok(policy_flops(&Policies::new(method, c.world.m_agents, width, &c.train, &mut rng)?))
        })()
        .unwrap_or(0);
        rows.push(MethodRow {
            method,
            ok: ok.len(),
            failed: mine.len() - ok.len(),
            support_rate: col(|s| s.support_rate),
            total_qos: col(|s| s.total_qos),
            residual_energy_j: col(EvalSummary::residual_energy_j),
            reward: col(|s| s.mean_reward),
            flops,
            errors: mine
                .iter()
                .filter_map(|c| c.result.as_ref().err().map(|e| format!("seed {}: {e}", c.seed)))
                .collect(),
        });
    }

    let mut text = String::new();
    text.push_str(SUMMARY_SCHEMA);
    text.push('\n');
    text.push_str(
        "method\tseeds\tfailed\tsupport_rate_mean\tsupport_rate_std\ttotal_qos_mean\ttotal_qos_std\t\
         residual_energy_j_mean\tresidual_energy_j_std\treward_mean\treward_std\tflops\terrors\n",
    );
    for r in &rows {
        text.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.3}\t{:.3}\t{:.6}\t{:.6}\t{}\t{}\n",
            r.method,
            r.ok + r.failed,
            r.failed,
            r.support_rate.0,
            r.support_rate.1,
            r.total_qos.0,
            r.total_qos.1,
            r.residual_energy_j.0,
            r.residual_energy_j.1,
            r.reward.0,
            r.reward.1,
            r.flops,
            r.errors.join("; ").replace(['\t', '\n'], " "),
        ));
    }
    let summary_path = out_dir.join(SUMMARY_FILE);
    write_atomic(&summary_path, text.as_bytes())?;
    Ok(Comparison {
        cells,
        rows,
        summary_path,
    })
}
