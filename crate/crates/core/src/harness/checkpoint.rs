//! Text checkpoint bundle: online and target networks of a trained run.
//!
//! ```text
//! # uavbs-checkpoint/1
//! method <name>
//! agents <M> obs <D>
//! section <policies|target-policies>
//! actor_of <k_0> .. <k_{M-1}>
//! actor dnn            followed by an mlp block
//! actor commnet <n_inputs> <exclude-self|exclude-leader> <leader_input|-> <comm_layers>
//!                      followed by 2 + comm_layers one-layer mlp blocks
//! section <critics|target-critics>
//! critic               followed by an mlp block
//! end
//! ```

use std::path::Path;

use super::ScenarioConfig;
use crate::marl::{Actor, CommMean, CommNetParams, CriticSet, Method, Policies};
use crate::nn::{read_mlp, write_mlp, MlpParams};
use crate::rng::{stream, stream_rng};
use crate::{Error, Result};

pub const CHECKPOINT_SCHEMA: &str = "# uavbs-checkpoint/1";

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointBundle {
    pub policies: Policies,
    pub target_policies: Policies,
    pub critics: Vec<MlpParams>,
    pub target_critics: Vec<MlpParams>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn comm_mean_name(m: CommMean) -> &'static str {
    match m {
        CommMean::ExcludeSelf => "exclude-self",
        CommMean::ExcludeLeader => "exclude-leader",
    }
}

fn write_policies(p: &Policies, out: &mut String) {
    let ids: Vec<String> = p.actor_of.iter().map(|k| k.to_string()).collect();
    out.push_str(&format!("actor_of {}\n", ids.join(" ")));
    for a in &p.actors {
        match a {
            Actor::Dnn(mlp) => {
                out.push_str("actor dnn\n");
                write_mlp(mlp, out);
            }
            Actor::CommNet(c) => {
                let leader = c.leader_input.map_or("-".to_string(), |l| l.to_string());
                out.push_str(&format!(
                    "actor commnet {} {} {} {}\n",
                    c.n_inputs,
                    comm_mean_name(c.mean),
                    leader,
                    c.comm.len()
                ));
                for d in std::iter::once(&c.encoder).chain(&c.comm).chain([&c.head]) {
                    write_mlp(&MlpParams { layers: vec![d.clone()] }, out);
                }
            }
        }
    }
}

fn write_critics(nets: &[MlpParams], out: &mut String) {
    for n in nets {
        out.push_str("critic\n");
        write_mlp(n, out);
    }
}

pub fn save_checkpoint(
    path: &Path,
    policies: &Policies,
    target_policies: &Policies,
    critics: &[MlpParams],
    target_critics: &[MlpParams],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(CHECKPOINT_SCHEMA);
    out.push('\n');
    out.push_str(&format!("method {}\n", policies.method));
    out.push_str(&format!("agents {} obs {}\n", policies.m_agents, policies.obs_dim));
    out.push_str("section policies\n");
    write_policies(policies, &mut out);
    out.push_str("section target-policies\n");
    write_policies(target_policies, &mut out);
    out.push_str("section critics\n");
    write_critics(critics, &mut out);
    out.push_str("section target-critics\n");
    write_critics(target_critics, &mut out);
    out.push_str("end\n");
    super::run::write_atomic(path, out.as_bytes())
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.lines.next().ok_or_else(|| bad("unexpected end of checkpoint"))
    }

    fn expect_words(&mut self, head: &str) -> Result<Vec<&'a str>> {
        let line = self.next()?;
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.first() != Some(&head) {
            return Err(bad(format!("expected {head:?}, found {line:?}")));
        }
        Ok(words[1..].to_vec())
    }

    fn peek_is(&mut self, head: &str) -> bool {
        self.lines
            .peek()
            .is_some_and(|l| l.split_whitespace().next() == Some(head))
    }

    fn mlp(&mut self) -> Result<MlpParams> {
        read_mlp(&mut self.lines)
    }
}

fn num(s: &str) -> Result<usize> {
    s.parse().map_err(|_| bad(format!("bad integer {s:?}")))
}

fn read_policies(r: &mut Reader, method: Method, m_agents: usize, obs_dim: usize) -> Result<Policies> {
    let actor_of = r
        .expect_words("actor_of")?
        .into_iter()
        .map(num)
        .collect::<Result<Vec<_>>>()?;
    let mut actors = Vec::new();
    while r.peek_is("actor") {
        let w = r.expect_words("actor")?;
        match w.as_slice() {
            ["dnn"] => actors.push(Actor::Dnn(r.mlp()?)),
            ["commnet", n, mean, leader, layers] => {
                let mean = match *mean {
                    "exclude-self" => CommMean::ExcludeSelf,
                    "exclude-leader" => CommMean::ExcludeLeader,
                    other => return Err(bad(format!("unknown averaging {other:?}"))),
                };
                let leader_input = match *leader {
                    "-" => None,
                    l => Some(num(l)?),
                };
                let mut one = || -> Result<_> {
                    let mut p = r.mlp()?;
                    if p.layers.len() != 1 {
                        return Err(bad("CommNet blocks hold one layer each"));
                    }
                    Ok(p.layers.remove(0))
                };
                let encoder = one()?;
                let comm = (0..num(layers)?).map(|_| one()).collect::<Result<Vec<_>>>()?;
                let head = one()?;
                actors.push(Actor::CommNet(CommNetParams {
                    encoder,
                    comm,
                    head,
                    n_inputs: num(n)?,
                    mean,
                    leader_input,
                }));
            }
            other => return Err(bad(format!("unknown actor header {other:?}"))),
        }
    }
    if actor_of.len() != m_agents || actor_of.iter().any(|&k| k >= actors.len()) {
        if !(method == Method::Random && actor_of.is_empty()) {
            return Err(bad("actor assignment does not cover every agent"));
        }
    }
    Ok(Policies {
        method,
        m_agents,
        obs_dim,
        actors,
        actor_of,
    })
}

fn read_critics(r: &mut Reader) -> Result<Vec<MlpParams>> {
    let mut nets = Vec::new();
    while r.peek_is("critic") {
        r.expect_words("critic")?;
        nets.push(r.mlp()?);
    }
    Ok(nets)
}

/// Reads a bundle without checking it against any scenario.
pub fn parse_checkpoint(text: &str) -> Result<CheckpointBundle> {
    let mut r = Reader {
        lines: text.lines().peekable(),
    };
    if r.next()? != CHECKPOINT_SCHEMA {
        return Err(bad(format!("missing {CHECKPOINT_SCHEMA:?} header")));
    }
    let w = r.expect_words("method")?;
    let method: Method = w
        .first()
        .ok_or_else(|| bad("missing method"))?
        .parse()
        .map_err(|e: Error| bad(e.to_string()))?;
    let (m_agents, obs_dim) = match r.expect_words("agents")?.as_slice() {
        [m, "obs", d] => (num(m)?, num(d)?),
        other => return Err(bad(format!("bad agents line {other:?}"))),
    };
    let section = |r: &mut Reader, name: &str| -> Result<()> {
        match r.expect_words("section")?.as_slice() {
            [s] if *s == name => Ok(()),
            other => Err(bad(format!("expected section {name}, found {other:?}"))),
        }
    };
    section(&mut r, "policies")?;
    let policies = read_policies(&mut r, method, m_agents, obs_dim)?;
    section(&mut r, "target-policies")?;
    let target_policies = read_policies(&mut r, method, m_agents, obs_dim)?;
    section(&mut r, "critics")?;
    let critics = read_critics(&mut r)?;
    section(&mut r, "target-critics")?;
    let target_critics = read_critics(&mut r)?;
    r.expect_words("end")?;
    Ok(CheckpointBundle {
        policies,
        target_policies,
        critics,
        target_critics,
    })
}

fn actor_shape(a: &Actor) -> Vec<(usize, usize, &'static str)> {
    let layers: Vec<&crate::nn::Dense> = match a {
        Actor::Dnn(m) => m.layers.iter().collect(),
        Actor::CommNet(c) => std::iter::once(&c.encoder)
            .chain(&c.comm)
            .chain([&c.head])
            .collect(),
    };
    layers
        .iter()
        .map(|d| (d.fan_in(), d.fan_out(), d.activation.name()))
        .collect()
}

fn mlp_shape(m: &MlpParams) -> Vec<(usize, usize, &'static str)> {
    m.layers
        .iter()
        .map(|d| (d.fan_in(), d.fan_out(), d.activation.name()))
        .collect()
}

fn same_topology(a: &Policies, b: &Policies) -> bool {
    a.method == b.method
        && a.m_agents == b.m_agents
        && a.obs_dim == b.obs_dim
        && a.actor_of == b.actor_of
        && a.actors.len() == b.actors.len()
        && a.actors.iter().zip(&b.actors).all(|(x, y)| {
            actor_shape(x) == actor_shape(y)
                && match (x, y) {
                    (Actor::CommNet(p), Actor::CommNet(q)) => {
                        p.n_inputs == q.n_inputs
                            && p.mean == q.mean
                            && p.leader_input == q.leader_input
                    }
                    _ => true,
                }
        })
}

/// Loads `path` (a bundle file or a run directory) and checks that its
/// networks have exactly the topology `cfg` would build.
pub fn load_checkpoint(path: &Path, cfg: &ScenarioConfig) -> Result<CheckpointBundle> {
    let file = if path.is_dir() {
        path.join(super::CHECKPOINT_FILE)
    } else {
        path.to_path_buf()
    };
    let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
    let bundle = parse_checkpoint(&text).map_err(|e| match e {
        Error::Checkpoint(m) => Error::Checkpoint(format!("{}: {m}", file.display())),
        other => other,
    })?;

    let obs_dim = crate::world::observation_width(&cfg.world);
    let mut rng = stream_rng(0, stream::POLICY_INIT, 0);
    let expected = Policies::new(cfg.method, cfg.world.m_agents, obs_dim, &cfg.train, &mut rng)?;
    let mismatch = |what: &str| {
        Err(Error::Checkpoint(format!(
            "{}: {what} do not match the scenario ({} with {} agents, observation width {})",
            file.display(),
            cfg.method,
            cfg.world.m_agents,
            obs_dim
        )))
    };
    if !same_topology(&bundle.policies, &expected) || !same_topology(&bundle.target_policies, &expected) {
        return mismatch("policies");
    }
    let kind = CriticSet::kind_for(cfg.method, cfg.train.critic_mode);
    let want: Vec<_> = if cfg.method.trains() {
        CriticSet::new(kind, cfg.world.m_agents, obs_dim, &cfg.train, &mut rng)?
            .nets
            .iter()
            .map(mlp_shape)
            .collect()
    } else {
        Vec::new()
    };
    for nets in [&bundle.critics, &bundle.target_critics] {
        if nets.iter().map(mlp_shape).collect::<Vec<_>>() != want {
            return mismatch("critics");
        }
    }
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Preset;
    use crate::marl::Trainer;

    fn trainer(method: Method) -> (ScenarioConfig, Trainer) {
        let mut c = Preset::Desk.config();
        c.method = method;
        let c = c.resolved().unwrap();
        let w = c.build_world().unwrap();
        let t = Trainer::for_world(method, &w, c.train.clone()).unwrap();
        (c, t)
    }

    #[test]
    fn round_trip_every_method() {
        let dir = tempfile::tempdir().unwrap();
        for method in Method::ALL {
            let (c, t) = trainer(method);
            let p = dir.path().join(format!("{method}.txt"));
            save_checkpoint(&p, &t.policies, &t.target_policies, &t.critics.nets, &t.target_critics.nets)
                .unwrap();
            let b = load_checkpoint(&p, &c).unwrap();
            assert_eq!(b.policies, t.policies);
            assert_eq!(b.target_policies, t.target_policies);
            assert_eq!(b.critics, t.critics.nets);
            assert_eq!(b.target_critics, t.target_critics.nets);
        }
    }

    #[test]
    fn topology_mismatch_is_a_checkpoint_error() {
        let dir = tempfile::tempdir().unwrap();
        let (_, t) = trainer(Method::Proposed);
        let p = dir.path().join("ck.txt");
        save_checkpoint(&p, &t.policies, &t.target_policies, &t.critics.nets, &t.target_critics.nets)
            .unwrap();
        let (comp2, _) = trainer(Method::Comp2);
        assert!(matches!(load_checkpoint(&p, &comp2), Err(Error::Checkpoint(_))));
        let mut wide = Preset::Desk.config();
        wide.world.n_ues = 9;
        let wide = wide.resolved().unwrap();
        assert!(matches!(load_checkpoint(&p, &wide), Err(Error::Checkpoint(_))));
        let mut deep = Preset::Desk.config();
        deep.train.hidden = 48;
        assert!(matches!(load_checkpoint(&p, &deep), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn corrupt_bundles_rejected() {
        let (_, t) = trainer(Method::Comp1);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ck.txt");
        save_checkpoint(&p, &t.policies, &t.target_policies, &t.critics.nets, &t.target_critics.nets)
            .unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        for broken in [
            text.replacen(CHECKPOINT_SCHEMA, "# other/1", 1),
            text.replacen("end\n", "", 1),
            text[..text.len() / 2].to_string(),
            text.replacen("method comp1", "method maddpg", 1),
        ] {
            assert!(matches!(parse_checkpoint(&broken), Err(Error::Checkpoint(_))));
        }
    }
}
