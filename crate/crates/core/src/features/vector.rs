//! Final per-clip feature vectors and z-normalization.

use serde::{Deserialize, Serialize};

use super::lld::LldMatrix;
use super::CuratedFeatures;
use crate::dsp::dct_2;
use crate::error::{Error, Result};
use crate::real::Real;

/// DCT-decorrelated descriptor functionals followed by the curated scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FeatureVector<T> {
    pub names: Vec<String>,
    pub values: Vec<T>,
}

impl<T: Real> FeatureVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Default DCT truncation, capped by the functional-vector length.
pub const DEFAULT_KEEP: usize = 3000;

pub fn assemble_feature_vector<T: Real>(
    curated: &CuratedFeatures<T>,
    lld: &LldMatrix<T>,
    keep: usize,
) -> Result<FeatureVector<T>> {
    let functionals = lld.functionals();
    let mut values = dct_2(&functionals, keep)?;
    let mut names: Vec<String> = (0..keep).map(|k| format!("lld_dct_{k}")).collect();
    values.extend(curated.to_vec());
    names.extend(CuratedFeatures::<T>::NAMES.iter().map(|s| s.to_string()));
    Ok(FeatureVector { names, values })
}

/// Per-dimension mean and standard deviation fitted on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ZNorm<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Real> ZNorm<T> {
    /// Columns with zero spread keep unit scale so they map to 0.
    pub fn fit(rows: &[Vec<T>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::InvalidTrainingData("no rows".into()))?;
        let d = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
        }
        let n = T::from_count(rows.len());
        let mut mean = vec![T::zero(); d];
        for r in rows {
            for (m, &v) in mean.iter_mut().zip(r) {
                *m = *m + v;
            }
        }
        mean.iter_mut().for_each(|m| *m = *m / n);
        let mut var = vec![T::zero(); d];
        for r in rows {
            for ((s, &v), &m) in var.iter_mut().zip(r).zip(&mean) {
                *s = *s + (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > T::epsilon() {
                    sd
                } else {
                    T::one()
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(x.iter().zip(&self.mean).zip(&self.std).map(|((&v, &m), &s)| (v - m) / s).collect())
    }

    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![T::zero(); dim], std: vec![T::one(); dim] }
    }
}
