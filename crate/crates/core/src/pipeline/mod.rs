//! Experiment plumbing over in-memory feature sets: stratified splitting,
//! hyperparameter grid search and recognition-rate metrics.

pub mod eval;
pub mod grid;
pub mod split;

use alloc::string::String;
use alloc::vec::Vec;

use crate::label::Label;
use crate::phog::{PhogOptions, PhogParams};

/// Preprocessing applied to every image before feature extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Preproc {
    pub resample_w: usize,
    pub resample_h: usize,
    pub sigma: f64,
}

impl Default for Preproc {
    fn default() -> Self {
        Preproc {
            resample_w: 300,
            resample_h: 300,
            sigma: 1.0,
        }
    }
}

/// Parallel lists of sample ids, descriptor vectors and labels, with the
/// parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub params: PhogParams,
    pub preproc: Preproc,
    pub options: PhogOptions,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Samples per class as `(positive, negative)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| **l == Label::Positive).count();
        (pos, self.labels.len() - pos)
    }

    /// Copy of the rows named by `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> FeatureSet {
        FeatureSet {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            params: self.params.clone(),
            preproc: self.preproc.clone(),
            options: self.options.clone(),
        }
    }
}
