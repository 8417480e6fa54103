//! Model checkpoints: a `key=value` text header followed by the raw
//! little-endian `f64` parameter blob (trainable values, then running
//! means, then running variances).

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use super::{ArchKind, Architecture, Model, Parameters};
use crate::error::{Error, Result};
use crate::losses::{LossConfig, LossKind};

pub const CHECKPOINT_MAGIC: &[u8] = b"HSCK1\n";

/// Everything needed to rebuild and interpret a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub loss: LossConfig,
    pub seed: u64,
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let arch = self.model.architecture();
        let p = &self.model.params;
        out.write_all(CHECKPOINT_MAGIC)?;
        writeln!(out, "kind={}", arch.kind)?;
        writeln!(out, "input_dim={}", arch.input_dim)?;
        writeln!(out, "units={}", arch.units)?;
        writeln!(out, "output_dim={}", arch.output_dim)?;
        writeln!(out, "batch_norm={}", arch.batch_norm)?;
        writeln!(out, "loss={}", self.loss.kind)?;
        writeln!(out, "epsilon={}", self.loss.epsilon)?;
        writeln!(out, "c={}", self.loss.c)?;
        writeln!(out, "classes={}", self.loss.classes)?;
        writeln!(out, "seed={}", self.seed)?;
        writeln!(out)?;
        for v in p.values.iter().chain(&p.running_mean).chain(&p.running_var) {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 6];
        input.read_exact(&mut magic)?;
        if magic != CHECKPOINT_MAGIC {
            return Err(Error::Format("not a model checkpoint (bad magic)".into()));
        }
        let header = read_header(&mut input)?;
        let get = |k: &str| header.get(k).ok_or_else(|| Error::Format(format!("checkpoint missing `{k}`")));
        let num = |k: &str| -> Result<usize> {
            get(k)?.parse().map_err(|_| Error::Format(format!("bad `{k}` in checkpoint")))
        };
        let float = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Format(format!("bad `{k}` in checkpoint")))
        };
        let kind: ArchKind = get("kind")?.parse().map_err(|e: Error| Error::Format(e.to_string()))?;
        let mut arch = Architecture::new(kind, num("input_dim")?, num("units")?, num("output_dim")?)
            .map_err(|e| Error::Format(e.to_string()))?;
        arch.batch_norm = get("batch_norm")? == "true";
        let loss = LossConfig {
            kind: get("loss")?.parse::<LossKind>().map_err(|e| Error::Format(e.to_string()))?,
            epsilon: float("epsilon")?,
            c: float("c")?,
            classes: num("classes")?,
        };
        let seed = get("seed")?
            .parse()
            .map_err(|_| Error::Format("bad `seed` in checkpoint".into()))?;

        let layout = arch.layout();
        let mut blob = Vec::new();
        input.read_to_end(&mut blob)?;
        let expected = (layout.trainable + 2 * layout.stats) * 8;
        if blob.len() != expected {
            return Err(Error::Format(format!(
                "checkpoint blob has {} bytes, expected {expected}",
                blob.len()
            )));
        }
        let mut floats = blob
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        let values: Vec<f64> = floats.by_ref().take(layout.trainable).collect();
        let running_mean: Vec<f64> = floats.by_ref().take(layout.stats).collect();
        let running_var: Vec<f64> = floats.collect();
        let model = Model::from_parameters(
            arch,
            Parameters {
                values,
                running_mean,
                running_var,
            },
        )?;
        Ok(Checkpoint { model, loss, seed })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::read_from(bytes.as_slice())
    }
}

/// Reads `key=value` lines up to the first empty line.
pub(crate) fn read_header<R: BufRead>(input: &mut R) -> Result<BTreeMap<String, String>> {
    let mut header = BTreeMap::new();
    loop {
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::Format("header not terminated by an empty line".into()));
        }
        let line = line.trim_end_matches('\n');
        if line.is_empty() {
            return Ok(header);
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("malformed header line `{line}`")))?;
        header.insert(k.trim().to_string(), v.trim().to_string());
    }
}
