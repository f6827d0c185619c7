//! Reified randomness. Every mechanism is a deterministic function of
//! `(instance, reports, CoinRealization)`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::BidderId;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoinRealization {
    /// Sampling order: among active bidders the one appearing first here is
    /// sampled next.
    pub order: Vec<BidderId>,
    /// Residue `m` in `0..k-1`.
    pub residue: u32,
    /// Chosen expertise group, 0-based.
    pub group: usize,
    /// Price grid index in `0..K`.
    pub grid: u64,
}

impl CoinRealization {
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
            residue: 0,
            group: 0,
            grid: 0,
        }
    }
}

impl fmt::Display for CoinRealization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order: Vec<String> = self.order.iter().map(|b| b.to_string()).collect();
        write!(
            f,
            "order={} m={} g={} u={}",
            order.join(","),
            self.residue,
            self.group,
            self.grid
        )
    }
}

impl FromStr for CoinRealization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad coin realization {s:?}"));
        let mut coin = CoinRealization::identity(0);
        for part in s.split_whitespace() {
            let (key, val) = part.split_once('=').ok_or_else(bad)?;
            match key {
                "order" if val.is_empty() => coin.order.clear(),
                "order" => {
                    coin.order = val
                        .split(',')
                        .map(|b| b.parse().map_err(|_| bad()))
                        .collect::<Result<_>>()?
                }
                "m" => coin.residue = val.parse().map_err(|_| bad())?,
                "g" => coin.group = val.parse().map_err(|_| bad())?,
                "u" => coin.grid = val.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        Ok(coin)
    }
}

/// The shape of a mechanism's coin space. Axes a mechanism ignores have
/// size 1 so every enumerated realization is distinct.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoinAxes {
    /// Number of bidders to permute; 0 when the order is unused.
    pub permute: usize,
    pub identity_len: usize,
    pub residues: u32,
    pub groups: usize,
    pub grid: u64,
}

impl CoinAxes {
    /// Total number of realizations, `None` on overflow.
    pub fn size(&self) -> Option<u64> {
        let perms = (1..=self.permute as u64).try_fold(1u64, |a, b| a.checked_mul(b))?;
        perms
            .checked_mul(self.residues as u64)?
            .checked_mul(self.groups as u64)?
            .checked_mul(self.grid)
    }

    /// Every realization, each with probability `1 / size()`.
    pub fn enumerate(&self) -> Vec<CoinRealization> {
        let orders: Vec<Vec<BidderId>> = if self.permute == 0 {
            vec![(0..self.identity_len).collect()]
        } else {
            (0..self.permute).permutations(self.permute).collect()
        };
        let mut out = Vec::new();
        for order in &orders {
            for residue in 0..self.residues {
                for group in 0..self.groups {
                    for grid in 0..self.grid {
                        out.push(CoinRealization {
                            order: order.clone(),
                            residue,
                            group,
                            grid,
                        });
                    }
                }
            }
        }
        out
    }

    /// Deterministic expansion of a seed: ChaCha8 seeded with `seed`, then a
    /// Fisher-Yates shuffle of `0..n`, then residue, group and grid index,
    /// each drawn uniformly in that order.
    pub fn from_seed(&self, seed: u64) -> CoinRealization {
        self.sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// One uniform draw from the space, consuming `rng` as [`from_seed`](Self::from_seed) does.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CoinRealization {
        let n = self.permute.max(self.identity_len);
        let mut order: Vec<BidderId> = (0..n).collect();
        if self.permute > 0 {
            order.shuffle(rng);
        }
        CoinRealization {
            order,
            residue: rng.gen_range(0..self.residues),
            group: rng.gen_range(0..self.groups),
            grid: rng.gen_range(0..self.grid),
        }
    }

    pub fn contains(&self, coin: &CoinRealization) -> bool {
        let n = self.permute.max(self.identity_len);
        let mut sorted = coin.order.clone();
        sorted.sort_unstable();
        sorted == (0..n).collect::<Vec<_>>()
            && (self.permute > 0 || coin.order == sorted)
            && coin.residue < self.residues
            && coin.group < self.groups
            && coin.grid < self.grid
    }
}
