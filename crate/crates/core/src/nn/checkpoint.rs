//! Plain-text network serialization.
//!
//! ```text
//! mlp <n_layers>
//! dense <fan_in> <fan_out> <relu|identity|softmax>
//! <fan_out lines of fan_in weights>
//! <one line of fan_out biases>
//! ```
//!
//! Values use the shortest representation that parses back to the same
//! bits, so a write/read cycle is exact. Standalone files start with the
//! `MLP_SCHEMA` line.

use std::fmt::Write as _;

use super::{Activation, Dense, Matrix, MlpParams};
use crate::{Error, Result};

pub const MLP_SCHEMA: &str = "# uavbs-mlp/1";

pub fn write_mlp(p: &MlpParams, out: &mut String) {
    let _ = writeln!(out, "mlp {}", p.layers.len());
    for l in &p.layers {
        let _ = writeln!(
            out,
            "dense {} {} {}",
            l.fan_in(),
            l.fan_out(),
            l.activation.name()
        );
        for r in 0..l.fan_out() {
            write_row(out, l.weight.row(r));
        }
        write_row(out, &l.bias);
    }
}

fn write_row(out: &mut String, vals: &[f64]) {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn next_line<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<&'a str> {
    lines.next().ok_or_else(|| bad("unexpected end of network block"))
}

fn parse_row(line: &str, n: usize) -> Result<Vec<f64>> {
    let vals = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| bad(format!("bad value {t:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != n {
        return Err(bad(format!("expected {n} values, found {}", vals.len())));
    }
    Ok(vals)
}

/// Reads one `mlp` block, consuming exactly its lines.
pub fn read_mlp<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<MlpParams> {
    let head = next_line(lines)?;
    let n: usize = head
        .strip_prefix("mlp ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad(format!("expected `mlp <n>`, found {head:?}")))?;
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        let line = next_line(lines)?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (fan_in, fan_out, act) = match parts.as_slice() {
            ["dense", i, o, a] => (
                i.parse::<usize>().map_err(|_| bad("bad fan_in"))?,
                o.parse::<usize>().map_err(|_| bad("bad fan_out"))?,
                Activation::from_name(a).ok_or_else(|| bad(format!("unknown activation {a}")))?,
            ),
            _ => return Err(bad(format!("expected dense header, found {line:?}"))),
        };
        let mut w = Vec::with_capacity(fan_in * fan_out);
        for _ in 0..fan_out {
            w.extend(parse_row(next_line(lines)?, fan_in)?);
        }
        let bias = parse_row(next_line(lines)?, fan_out)?;
        layers.push(Dense {
            weight: Matrix::from_vec(fan_out, fan_in, w)
                .map_err(|e| bad(e.to_string()))?,
            bias,
            activation: act,
        });
    }
    MlpParams::new(layers).map_err(|e| bad(e.to_string()))
}

impl MlpParams {
    pub fn to_text(&self) -> String {
        let mut s = format!("{MLP_SCHEMA}\n");
        write_mlp(self, &mut s);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l.trim() == MLP_SCHEMA => {}
            other => return Err(bad(format!("missing {MLP_SCHEMA} header, found {other:?}"))),
        }
        read_mlp(&mut lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Params;
    use crate::rng::stream_rng;

    #[test]
    fn round_trip_is_bitwise() {
        let mut r = stream_rng(9, "ckpt", 0);
        let p = MlpParams::xavier(&[7, 16, 16, 3], Activation::ReLU, Activation::Softmax, &mut r)
            .unwrap();
        let back = MlpParams::from_text(&p.to_text()).unwrap();
        let bits = |p: &MlpParams| p.flatten().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&p), bits(&back));
        assert_eq!(p, back);
    }

    #[test]
    fn extreme_values_round_trip() {
        let mut p = MlpParams::new(vec![Dense::zeros(2, 2, Activation::Identity)]).unwrap();
        p.assign_flat(&[f64::MIN_POSITIVE, -1e300, 5e-324, 0.1 + 0.2, -0.0, 1.0 / 3.0])
            .unwrap();
        let back = MlpParams::from_text(&p.to_text()).unwrap();
        for (a, b) in p.flatten().iter().zip(back.flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(MlpParams::from_text("mlp 1\n").is_err());
        assert!(MlpParams::from_text(&format!("{MLP_SCHEMA}\nmlp 1\ndense 2 1 relu\n1 2\n")).is_err());
        assert!(MlpParams::from_text(&format!("{MLP_SCHEMA}\nmlp 1\ndense 2 1 tanh\n1 2\n0\n")).is_err());
        assert!(MlpParams::from_text(&format!("{MLP_SCHEMA}\nmlp 1\ndense 2 1 relu\n1 x\n0\n")).is_err());
        assert!(MlpParams::from_text(&format!("{MLP_SCHEMA}\nmlp 1\ndense 2 1 relu\n1 inf\n0\n")).is_err());
    }
}
