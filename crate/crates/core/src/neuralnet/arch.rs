use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArchKind {
    /// One hidden ReLU layer of variable width.
    FixedDepth,
    /// Variable number of width-(d+3) layers with residual blocks.
    FixedWidth,
}

impl ArchKind {
    pub fn name(self) -> &'static str {
        match self {
            ArchKind::FixedDepth => "fixed_depth",
            ArchKind::FixedWidth => "fixed_width",
        }
    }

    /// Search cap on neurons (fixed depth) or layers (fixed width).
    pub fn default_size_cap(self) -> usize {
        match self {
            ArchKind::FixedDepth => 1 << 16,
            ArchKind::FixedWidth => 64,
        }
    }
}

impl fmt::Display for ArchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "fixed_depth" | "depth" => Ok(ArchKind::FixedDepth),
            "fixed_width" | "width" => Ok(ArchKind::FixedWidth),
            other => Err(Error::InvalidArgument(format!("unknown architecture `{other}`"))),
        }
    }
}

/// Network shape. `units` is the hidden width for fixed-depth networks and
/// the number of hidden layers for fixed-width ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Architecture {
    pub kind: ArchKind,
    pub input_dim: usize,
    pub units: usize,
    pub output_dim: usize,
    pub batch_norm: bool,
}

impl Architecture {
    pub fn fixed_depth(input_dim: usize, width: usize, output_dim: usize) -> Result<Self> {
        Self::new(ArchKind::FixedDepth, input_dim, width, output_dim)
    }

    pub fn fixed_width(input_dim: usize, layers: usize, output_dim: usize) -> Result<Self> {
        Self::new(ArchKind::FixedWidth, input_dim, layers, output_dim)
    }

    pub fn new(kind: ArchKind, input_dim: usize, units: usize, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || units == 0 || output_dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "architecture dims must be >= 1 (d={input_dim}, units={units}, out={output_dim})"
            )));
        }
        Ok(Architecture {
            kind,
            input_dim,
            units,
            output_dim,
            batch_norm: kind == ArchKind::FixedWidth,
        })
    }

    /// Same shape with a different unit count.
    pub fn with_units(&self, units: usize) -> Result<Self> {
        let mut arch = Self::new(self.kind, self.input_dim, units, self.output_dim)?;
        arch.batch_norm = self.batch_norm;
        Ok(arch)
    }

    pub fn hidden_width(&self) -> usize {
        match self.kind {
            ArchKind::FixedDepth => self.units,
            ArchKind::FixedWidth => self.input_dim + 3,
        }
    }

    pub fn hidden_layers(&self) -> usize {
        match self.kind {
            ArchKind::FixedDepth => 1,
            ArchKind::FixedWidth => self.units,
        }
    }

    /// Layers before the first residual block: one for odd depth, two for even.
    pub fn plain_layers(&self) -> usize {
        match self.kind {
            ArchKind::FixedDepth => 1,
            ArchKind::FixedWidth => {
                if self.units % 2 == 1 {
                    1
                } else {
                    2
                }
            }
        }
    }

    pub fn residual_blocks(&self) -> usize {
        (self.hidden_layers() - self.plain_layers()) / 2
    }

    /// Weights and biases of the linear layers; batch-norm parameters are
    /// not counted.
    pub fn param_count(&self) -> usize {
        let w = self.hidden_width();
        let first = self.input_dim * w + w;
        let rest = (self.hidden_layers() - 1) * (w * w + w);
        let out = w * self.output_dim + self.output_dim;
        first + rest + out
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self)
    }
}

/// Offsets of one batch-norm layer's parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormSlot {
    pub gamma: usize,
    pub beta: usize,
    /// Offset into the running mean/variance vectors.
    pub stats: usize,
}

/// Offsets of one linear layer inside the flat parameter vector. Weights are
/// stored row-major as `out_dim × in_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearSlot {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: usize,
    pub bias: usize,
    pub norm: Option<NormSlot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// linear → [norm] → ReLU
    Plain(usize),
    /// ReLU(norm(linear(ReLU(norm(linear(u))))) + u)
    Residual(usize, usize),
}

/// Parameter layout and evaluation order of an [`Architecture`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub hidden: Vec<LinearSlot>,
    pub stages: Vec<Stage>,
    pub output: LinearSlot,
    /// Length of the trainable parameter vector.
    pub trainable: usize,
    /// Length of the running-statistics vectors.
    pub stats: usize,
}

impl Layout {
    fn new(arch: &Architecture) -> Self {
        let width = arch.hidden_width();
        let mut offset = 0;
        let mut stats = 0;
        let mut slot = |in_dim: usize, out_dim: usize, norm: bool| {
            let weight = offset;
            let bias = weight + in_dim * out_dim;
            offset = bias + out_dim;
            let norm = norm.then(|| {
                let s = NormSlot {
                    gamma: offset,
                    beta: offset + out_dim,
                    stats,
                };
                offset += 2 * out_dim;
                stats += out_dim;
                s
            });
            LinearSlot {
                in_dim,
                out_dim,
                weight,
                bias,
                norm,
            }
        };

        let mut hidden = Vec::with_capacity(arch.hidden_layers());
        for layer in 0..arch.hidden_layers() {
            let in_dim = if layer == 0 { arch.input_dim } else { width };
            hidden.push(slot(in_dim, width, arch.batch_norm));
        }
        let output = slot(width, arch.output_dim, false);

        let plain = arch.plain_layers();
        let mut stages: Vec<Stage> = (0..plain).map(Stage::Plain).collect();
        stages.extend((0..arch.residual_blocks()).map(|b| Stage::Residual(plain + 2 * b, plain + 2 * b + 1)));

        Layout {
            hidden,
            stages,
            output,
            trainable: offset,
            stats,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output.out_dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts linear parameters by walking explicit layer shapes.
    fn shape_walk(arch: &Architecture) -> usize {
        let mut shapes = Vec::new();
        let w = arch.hidden_width();
        let mut prev = arch.input_dim;
        for _ in 0..arch.hidden_layers() {
            shapes.push((prev, w));
            prev = w;
        }
        shapes.push((prev, arch.output_dim));
        shapes.iter().map(|(i, o)| i * o + o).sum()
    }

    #[test]
    fn fixed_depth_counts() {
        let a = Architecture::fixed_depth(4, 10, 1).unwrap();
        assert_eq!(a.param_count(), 61);
        for d in 1..6 {
            for m in 1..20 {
                let a = Architecture::fixed_depth(d, m, 1).unwrap();
                assert_eq!(a.param_count(), m * (d + 2) + 1);
                let b = a.with_units(m + 1).unwrap();
                assert_eq!(b.param_count() - a.param_count(), d + 2);
            }
        }
    }

    #[test]
    fn fixed_width_counts() {
        let a = Architecture::fixed_width(9, 2, 1).unwrap();
        assert_eq!(a.param_count(), 289);
        for d in 1..6 {
            for h in 1..10 {
                for out in [1, 3] {
                    let a = Architecture::fixed_width(d, h, out).unwrap();
                    assert_eq!(a.param_count(), shape_walk(&a));
                    let layout = a.layout();
                    let bn: usize = layout.hidden.iter().map(|s| 2 * s.out_dim).sum();
                    assert_eq!(layout.trainable, a.param_count() + bn);
                }
            }
        }
    }

    #[test]
    fn residual_structure() {
        let one = Architecture::fixed_width(4, 1, 1).unwrap().layout();
        assert_eq!(one.stages, vec![Stage::Plain(0)]);
        let three = Architecture::fixed_width(4, 3, 1).unwrap().layout();
        assert_eq!(three.stages, vec![Stage::Plain(0), Stage::Residual(1, 2)]);
        let four = Architecture::fixed_width(4, 4, 1).unwrap().layout();
        assert_eq!(four.stages, vec![Stage::Plain(0), Stage::Plain(1), Stage::Residual(2, 3)]);
        assert!(three.hidden.iter().all(|s| s.out_dim == 7 && s.norm.is_some()));
    }

    #[test]
    fn rejects_empty_shapes() {
        assert!(Architecture::fixed_depth(4, 0, 1).is_err());
        assert!(Architecture::fixed_width(0, 1, 1).is_err());
        assert!(Architecture::fixed_depth(4, 1, 0).is_err());
    }
}
