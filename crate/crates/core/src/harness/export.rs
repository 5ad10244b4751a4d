//! Tab-separated figure tables derived from a run's metrics and trace.
//!
//! | key            | columns                                              |
//! |----------------|------------------------------------------------------|
//! | `reward_curve` | epoch, total_reward, r_b1 .. r_bM                    |
//! | `support_rate` | epoch, tau, mean_tau                                 |
//! | `qos`          | epoch, total_qos, mean_qos                           |
//! | `overlap`      | epoch, omega, mean_omega                             |
//! | `energy`       | epoch, e_b1 .. e_bM (residual joules)                |
//! | `trajectory`   | step, uav_id, x, y, z, alive (first trace episode)   |
//!
//! `tau`, `total_qos` and `omega` are end-of-episode values; the `mean_`
//! columns average over the episode's steps.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::run::{write_atomic, MetricsRecord, RecordKind};
use super::{FIGURES_DIR, METRICS_FILE, TRACE_FILE};
use crate::{Error, Result};

pub const FIGURE_SCHEMA: &str = "# uavbs-figure/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKey {
    RewardCurve,
    SupportRate,
    Qos,
    Overlap,
    Energy,
    Trajectory,
}

impl FigureKey {
    pub const ALL: [FigureKey; 6] = [
        FigureKey::RewardCurve,
        FigureKey::SupportRate,
        FigureKey::Qos,
        FigureKey::Overlap,
        FigureKey::Energy,
        FigureKey::Trajectory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureKey::RewardCurve => "reward_curve",
            FigureKey::SupportRate => "support_rate",
            FigureKey::Qos => "qos",
            FigureKey::Overlap => "overlap",
            FigureKey::Energy => "energy",
            FigureKey::Trajectory => "trajectory",
        }
    }
}

impl fmt::Display for FigureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureKey::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = FigureKey::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!("unknown figure {s:?} (expected one of {})", names.join(", ")))
            })
    }
}

fn read_records(path: &Path, kind: RecordKind) -> Result<(serde_json::Value, Vec<MetricsRecord>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| Error::parse(path, "empty stream"))?;
    let schema: serde_json::Value =
        serde_json::from_str(head).map_err(|e| Error::parse(path, format!("header: {e}")))?;
    if !schema["schema"].as_str().is_some_and(|s| s.starts_with("uavbs-")) {
        return Err(Error::parse(path, "missing schema header"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: MetricsRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, format!("line {}: {e}", i + 2)))?;
        if r.kind == kind {
            out.push(r);
        }
    }
    Ok((schema, out))
}

fn row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join("\t"));
    out.push('\n');
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes `<run_dir>/figures/<key>.tsv` and returns its path. Output depends
/// only on the run's files, so repeated exports are byte-identical.
pub fn export_figure_data(run_dir: &Path, key: FigureKey) -> Result<PathBuf> {
    let mut text = format!("{FIGURE_SCHEMA} {key}\n");
    if key == FigureKey::Trajectory {
        let (_, steps) = read_records(&run_dir.join(TRACE_FILE), RecordKind::Step)?;
        let first = steps.first().map(|r| r.episode);
        row(&mut text, &["step", "uav_id", "x", "y", "z", "alive"].map(String::from));
        for r in steps.iter().filter(|r| Some(r.episode) == first) {
            for u in &r.positions {
                row(
                    &mut text,
                    &[
                        r.t.unwrap_or(0).to_string(),
                        u.id.to_string(),
                        num(u.x),
                        num(u.y),
                        num(u.z),
                        u8::from(u.alive).to_string(),
                    ],
                );
            }
        }
    } else {
        let (header, eps) = read_records(&run_dir.join(METRICS_FILE), RecordKind::Episode)?;
        let m = header["m_agents"].as_u64().unwrap_or(0);
        let per_agent = |p: &'static str| (1..=m).map(move |i| format!("{p}{i}"));
        let mut head = vec!["epoch".to_string()];
        match key {
            FigureKey::RewardCurve => {
                head.push("total_reward".into());
                head.extend(per_agent("r_b"));
            }
            FigureKey::SupportRate => head.extend(["tau".into(), "mean_tau".into()]),
            FigureKey::Qos => head.extend(["total_qos".into(), "mean_qos".into()]),
            FigureKey::Overlap => head.extend(["omega".into(), "mean_omega".into()]),
            FigureKey::Energy => head.extend(per_agent("e_b")),
            FigureKey::Trajectory => unreachable!(),
        }
        row(&mut text, &head);
        for r in &eps {
            let mut cells = vec![r.epoch.to_string()];
            match key {
                FigureKey::RewardCurve => {
                    cells.push(num(r.total_reward));
                    cells.extend(r.agent_rewards.iter().copied().map(num));
                }
                FigureKey::SupportRate => cells.extend([num(r.tau), num(r.mean_tau)]),
                FigureKey::Qos => cells.extend([num(r.total_qos), num(r.mean_qos)]),
                FigureKey::Overlap => cells.extend([num(r.omega), num(r.mean_omega)]),
                FigureKey::Energy => cells.extend(r.energy_j.iter().copied().map(num)),
                FigureKey::Trajectory => unreachable!(),
            }
            row(&mut text, &cells);
        }
    }
    let dir = run_dir.join(FIGURES_DIR);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join(format!("{key}.tsv"));
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}
