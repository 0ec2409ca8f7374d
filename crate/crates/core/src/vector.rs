use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use crate::error::CoreError;
use crate::math;

/// A flat dense parameter vector with a fixed coordinate count.
///
/// Construction through [`ParamVector::new`] rejects empty and non-finite
/// inputs; the optimizer run loop re-checks finiteness after every step and
/// aborts instead of propagating NaN/Inf.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self, CoreError> {
        if values.is_empty() {
            return Err(CoreError::config("parameter vector must have length >= 1"));
        }
        if !math::all_finite(&values) {
            return Err(CoreError::config("parameter vector contains NaN or Inf"));
        }
        Ok(ParamVector(values))
    }

    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "parameter vector must have length >= 1");
        ParamVector(vec![0.0; p])
    }

    /// Skips the finiteness check; used on hot paths where the caller
    /// validates the result itself.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn l2_norm(&self) -> f64 {
        math::l2_norm(&self.0)
    }

    /// Fraction of coordinates that are exactly 0.0.
    pub fn sparsity(&self) -> f64 {
        let zeros = self.0.iter().filter(|v| **v == 0.0).count();
        zeros as f64 / self.0.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        math::all_finite(&self.0)
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl AsRef<[f64]> for ParamVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
