//! Labelled `(φ(s), h*(s))` samples.
//!
//! Sample `i` of a dataset draws from its own counter-based random stream
//! keyed by the dataset seed, so the content depends only on
//! `(domain, n, count, seed)` and not on how generation is scheduled.

mod format;
mod generate;

pub use format::{load, save, save_split, write_csv, DATASET_MAGIC, GENERATOR_VERSION};
pub use generate::{gen_bw_dataset, gen_dataset, gen_pancake_dataset, gen_tsp_dataset, GenOptions};

use ndarray::{Array2, ArrayView1};

use crate::domains::{DomainKind, DomainSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub domain: DomainKind,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub generator_version: u32,
    pub epsilon: f64,
    pub dim: usize,
}

impl DatasetMeta {
    pub fn new(spec: DomainSpec, count: usize, seed: u64) -> Self {
        DatasetMeta {
            domain: spec.kind,
            n: spec.n,
            count,
            seed,
            generator_version: GENERATOR_VERSION,
            epsilon: spec.epsilon(),
            dim: spec.feature_dim(),
        }
    }

    pub fn spec(&self) -> DomainSpec {
        DomainSpec {
            kind: self.domain,
            n: self.n,
        }
    }
}

/// One labelled state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<'a> {
    pub features: &'a [f32],
    pub label: f64,
}

/// Columnar storage: `count × dim` features and one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    features: Vec<f32>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(meta: DatasetMeta, features: Vec<f32>, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != meta.count || features.len() != meta.count * meta.dim {
            return Err(Error::shape(
                format!("{} samples of dim {}", meta.count, meta.dim),
                format!("{} labels, {} features", labels.len(), features.len()),
            ));
        }
        if meta.dim != meta.spec().feature_dim() {
            return Err(Error::Format(format!(
                "encoder dimension {} does not match {} n={} (expected {})",
                meta.dim,
                meta.domain,
                meta.n,
                meta.spec().feature_dim()
            )));
        }
        Ok(Dataset { meta, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.meta.dim
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn sample(&self, i: usize) -> Sample<'_> {
        let d = self.meta.dim;
        Sample {
            features: &self.features[i * d..(i + 1) * d],
            label: self.labels[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Sample<'_>> {
        (0..self.len()).map(|i| self.sample(i))
    }

    /// Features widened to `f64`, one row per sample.
    pub fn feature_matrix(&self) -> Array2<f64> {
        Array2::from_shape_vec(
            (self.len(), self.meta.dim),
            self.features.iter().map(|&v| f64::from(v)).collect(),
        )
        .expect("consistent shape")
    }

    pub fn label_view(&self) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.labels)
    }

    pub fn max_label(&self) -> f64 {
        self.labels.iter().copied().fold(0.0, f64::max)
    }

    /// Drops samples with a zero label, returning how many were removed.
    pub fn without_zero_labels(&self) -> (Dataset, usize) {
        let d = self.meta.dim;
        let mut features = Vec::with_capacity(self.features.len());
        let mut labels = Vec::with_capacity(self.labels.len());
        for s in self.iter().filter(|s| s.label != 0.0) {
            features.extend_from_slice(s.features);
            labels.push(s.label);
        }
        let removed = self.len() - labels.len();
        let mut meta = self.meta.clone();
        meta.count = labels.len();
        debug_assert_eq!(features.len(), labels.len() * d);
        (Dataset { meta, features, labels }, removed)
    }

    /// Whether every label is a non-negative multiple of ε.
    pub fn labels_on_grid(&self) -> bool {
        let scale = self.meta.domain.cost_scale() as f64;
        self.labels.iter().all(|&y| {
            let units = y * scale;
            y >= 0.0 && (units - units.round()).abs() < 1e-9
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_shapes() {
        let spec = DomainSpec::new(DomainKind::Pancake, 2).unwrap();
        let meta = DatasetMeta::new(spec, 1, 0);
        assert!(Dataset::new(meta.clone(), vec![0.0; 3], vec![0.0]).is_err());
        let mut bad = meta.clone();
        bad.dim = 3;
        assert!(matches!(
            Dataset::new(bad, vec![0.0; 3], vec![0.0]),
            Err(Error::Format(_))
        ));
        let ds = Dataset::new(meta, vec![1.0, 0.0, 0.0, 1.0], vec![0.0]).unwrap();
        assert_eq!(ds.sample(0).features, &[1.0, 0.0, 0.0, 1.0]);
        let (filtered, removed) = ds.without_zero_labels();
        assert_eq!(removed, 1);
        assert!(filtered.is_empty());
    }
}
