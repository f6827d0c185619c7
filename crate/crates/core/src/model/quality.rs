use crate::error::{Error, Result};
use crate::money::Money;

use super::{argmax_lowest, quality_vectors, BidderId, Instance, QualityVector};

/// Dense lookup of values and optimal bidders by quality vector.
///
/// Only available when values depend on the quality vector alone.
#[derive(Clone, Debug)]
pub struct QualityIndex {
    n: usize,
    radices: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<Money>,
    opt: Vec<BidderId>,
}

const MAX_CELLS: usize = 1 << 22;

impl QualityIndex {
    pub fn build(inst: &Instance) -> Result<Self> {
        if !inst.is_quality_determined() {
            return Err(Error::InvalidInput(
                "values are not a function of the quality vector".into(),
            ));
        }
        let bounds = inst.quality_bounds();
        let radices: Vec<usize> = bounds.iter().map(|&b| b as usize + 1).collect();
        let cells = radices
            .iter()
            .try_fold(1usize, |a, &r| a.checked_mul(r))
            .filter(|&c| c.saturating_mul(inst.n()) <= MAX_CELLS)
            .ok_or_else(|| Error::ResourceLimit("quality space too large".into()))?;
        let mut strides = vec![1usize; radices.len()];
        for g in (0..radices.len().saturating_sub(1)).rev() {
            strides[g] = strides[g + 1] * radices[g + 1];
        }
        let n = inst.n();
        let mut values = Vec::with_capacity(cells * n);
        let mut opt = Vec::with_capacity(cells);
        // quality_vectors is sorted lexicographically, which is index order here.
        for q in quality_vectors(&bounds) {
            let start = values.len();
            for b in 0..n {
                let v = inst.value_at_quality(b, &q).ok_or_else(|| {
                    Error::InvalidInput(format!("bidder {b} has no value at quality {q}"))
                })?;
                values.push(v.clone());
            }
            opt.push(argmax_lowest(&values[start..]).unwrap_or(0));
        }
        Ok(Self {
            n,
            radices,
            strides,
            values,
            opt,
        })
    }

    pub fn index_of(&self, q: &QualityVector) -> usize {
        q.0.iter().zip(&self.strides).map(|(&v, &s)| v as usize * s).sum()
    }

    pub fn stride(&self, group: usize) -> usize {
        self.strides[group]
    }

    pub fn bound(&self, group: usize) -> u32 {
        self.radices[group] as u32 - 1
    }

    pub fn opt(&self, idx: usize) -> BidderId {
        self.opt[idx]
    }

    pub fn value(&self, bidder: BidderId, idx: usize) -> &Money {
        &self.values[idx * self.n + bidder]
    }
}
