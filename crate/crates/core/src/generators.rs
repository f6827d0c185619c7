//! Instance families with known lower-bound structure, and random suites.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{histograms, quality_vectors, BidderId, Histogram, Instance, QualityVector, SignalProfile, ValuationModel};
use crate::money::{int, Money};

/// A generated instance with its designated `(profile, bidder)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    pub instance: Instance,
    pub designated: Vec<(SignalProfile, BidderId)>,
    pub s_star: SignalProfile,
    /// Ratio between consecutive value levels.
    pub scale: Money,
}

fn check_params(l: usize, k: u32, scale: &Money) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidInput("need at least one group".into()));
    }
    if k < 2 {
        return Err(Error::InvalidInput("k must be ≥ 2".into()));
    }
    if scale <= &Money::one() {
        return Err(Error::InvalidInput("scale must exceed 1".into()));
    }
    Ok(())
}

/// Chain family: experts `(i, j, g)` with `1 ≤ i < k`, `0 ≤ j < i`, one
/// batch per group `g`, plus a top bidder. Expert `(i, j, g)` holds `i` at
/// `s*` and is designated at `s*` with her signal lowered to `j`, where she
/// is worth `M^j`; the top bidder is worth `M^k` at `s*` and above.
///
/// Experts are numbered by `i`, then `j`, then `g`, and the top bidder last
/// (in group 0, signal 0 at `s*`). Values depend on histograms only, so an
/// expert is worth `M^j` wherever the histogram dominates her designated one.
pub fn gen_chain_family(l: usize, k: u32, m: Money) -> Result<FamilyInstance> {
    check_params(l, k, &m)?;
    let mut experts: Vec<(u32, u32, usize)> = Vec::new();
    for i in 1..k {
        for j in 0..i {
            for g in 0..l {
                experts.push((i, j, g));
            }
        }
    }
    let n = experts.len() + 1;
    let top = n - 1;
    let mut groups = vec![Vec::new(); l];
    for (b, &(_, _, g)) in experts.iter().enumerate() {
        groups[g].push(b);
    }
    groups[0].push(top);
    let mut star: Vec<u32> = experts.iter().map(|&(i, _, _)| i).collect();
    star.push(0);
    let s_star = SignalProfile::new(star);
    let mut designated: Vec<(SignalProfile, BidderId)> = experts
        .iter()
        .enumerate()
        .map(|(b, &(_, j, _))| (s_star.with(b, j), b))
        .collect();
    designated.push((s_star.clone(), top));

    let shell = Instance::unchecked(n, k, groups.clone(), ValuationModel::GeneralSymmetric { tables: vec![] });
    let lower: Vec<Histogram> = designated.iter().map(|(s, _)| shell.histogram_of(s)).collect();
    let worth: Vec<Money> = experts
        .iter()
        .map(|&(_, j, _)| m.pow(j as i32))
        .chain([m.pow(k as i32)])
        .collect();
    let domain = histograms(&shell.group_sizes(), k);
    let tables: Vec<BTreeMap<Histogram, Money>> = (0..n)
        .map(|b| {
            domain
                .iter()
                .map(|h| {
                    let v = if h.dominates(&lower[b]) { worth[b].clone() } else { Money::zero() };
                    (h.clone(), v)
                })
                .collect()
        })
        .collect();
    let instance = Instance::new(n, k, groups, ValuationModel::GeneralSymmetric { tables })?
        .with_name(format!("chain-l{l}-k{k}"));
    Ok(FamilyInstance {
        instance,
        designated,
        s_star,
        scale: m,
    })
}

/// Weighted-threshold family: group `g` has weight `k^g` and experts
/// `(g, d)` for `1 ≤ d < k`, all at `k − 1` in `s*`; a top bidder sits in
/// group 0 at signal 0. With `t = Σ_g k^g·q_g` and `S = t(s*)`, expert
/// `(g, d)` is worth `Δ` once `t ≥ S − d·k^g` and the top bidder once
/// `t ≥ S`. `Δ = H^r` where `r` ranks the bidder's threshold ascending.
pub fn gen_weighted_family(l: usize, k: u32, h: Money) -> Result<FamilyInstance> {
    check_params(l, k, &h)?;
    let experts: Vec<(usize, u32)> = (0..l).flat_map(|g| (1..k).map(move |d| (g, d))).collect();
    let n = experts.len() + 1;
    let top = n - 1;
    let mut groups = vec![Vec::new(); l];
    for (b, &(g, _)) in experts.iter().enumerate() {
        groups[g].push(b);
    }
    groups[0].push(top);
    let weight = |g: usize| (k as u64).pow(g as u32);
    let mut star = vec![k - 1; experts.len()];
    star.push(0);
    let s_star = SignalProfile::new(star);
    let big_s: u64 = (0..l).map(|g| weight(g) * ((k - 1) * (k - 1)) as u64).sum();
    let thresholds: Vec<u64> = experts
        .iter()
        .map(|&(g, d)| big_s - d as u64 * weight(g))
        .chain([big_s])
        .collect();
    let mut by_threshold: Vec<usize> = (0..n).collect();
    by_threshold.sort_by_key(|&b| thresholds[b]);
    let mut worth = vec![Money::zero(); n];
    for (r, &b) in by_threshold.iter().enumerate() {
        worth[b] = h.pow(r as i32);
    }
    let mut designated: Vec<(SignalProfile, BidderId)> = experts
        .iter()
        .enumerate()
        .map(|(b, &(_, d))| (s_star.with(b, k - 1 - d), b))
        .collect();
    designated.push((s_star.clone(), top));

    let bounds: Vec<u32> = groups.iter().map(|g| g.len() as u32 * (k - 1)).collect();
    let domain = quality_vectors(&bounds);
    let tables: Vec<BTreeMap<QualityVector, Money>> = (0..n)
        .map(|b| {
            domain
                .iter()
                .map(|q| {
                    let t: u64 = q.0.iter().enumerate().map(|(g, &x)| weight(g) * x as u64).sum();
                    let v = if t >= thresholds[b] { worth[b].clone() } else { Money::zero() };
                    (q.clone(), v)
                })
                .collect()
        })
        .collect();
    let instance = Instance::new(n, k, groups, ValuationModel::SharedQualityGrouped { tables })?
        .with_name(format!("weighted-l{l}-k{k}"));
    Ok(FamilyInstance {
        instance,
        designated,
        s_star,
        scale: h,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RandomFamily {
    /// `k = 2`, values by number of high signals (per group when `ℓ > 1`).
    Binary,
    /// Values by quality (per group when `ℓ > 1`).
    Shared,
    /// Values by per-group histograms.
    General,
}

impl fmt::Display for RandomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RandomFamily::Binary => "binary",
            RandomFamily::Shared => "shared",
            RandomFamily::General => "general",
        })
    }
}

impl FromStr for RandomFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(RandomFamily::Binary),
            "shared" => Ok(RandomFamily::Shared),
            "general" => Ok(RandomFamily::General),
            _ => Err(Error::InvalidInput(format!("unknown random family {s:?}"))),
        }
    }
}

/// Splits `0..n` into `l` contiguous groups whose sizes differ by at most one.
fn contiguous_groups(n: usize, l: usize) -> Vec<Vec<BidderId>> {
    let mut out = Vec::with_capacity(l);
    let mut next = 0;
    for g in 0..l {
        let size = n / l + usize::from(g < n % l);
        out.push((next..next + size).collect());
        next += size;
    }
    out
}

/// A random monotone value: the largest predecessor value plus an
/// increment that is zero half the time.
fn step(rng: &mut ChaCha8Rng, below: Option<&Money>) -> Money {
    match below {
        None => int(rng.gen_range(0..=3)),
        Some(v) if rng.gen_bool(0.5) => v.clone(),
        Some(v) => v + int(rng.gen_range(1..=10)),
    }
}

fn max_of<'a>(vals: impl Iterator<Item = &'a Money>) -> Option<&'a Money> {
    vals.max()
}

/// Random instance whose tables increase along the signal order.
/// Deterministic in `seed`.
pub fn gen_random(n: usize, k: u32, l: usize, family: RandomFamily, seed: u64) -> Result<Instance> {
    if n == 0 || l == 0 || l > n {
        return Err(Error::InvalidInput(format!("need 1 ≤ ℓ ≤ n, got n = {n}, ℓ = {l}")));
    }
    if k < 2 {
        return Err(Error::InvalidInput("k must be ≥ 2".into()));
    }
    if family == RandomFamily::Binary && k != 2 {
        return Err(Error::InvalidInput("binary family needs k = 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = contiguous_groups(n, l);
    let valuation = match family {
        RandomFamily::Binary | RandomFamily::Shared if l == 1 => {
            let top = n * (k as usize - 1);
            let tables = (0..n)
                .map(|_| {
                    let mut t: Vec<Money> = Vec::with_capacity(top + 1);
                    for q in 0..=top {
                        let v = step(&mut rng, q.checked_sub(1).map(|p| &t[p]));
                        t.push(v);
                    }
                    t
                })
                .collect();
            if family == RandomFamily::Binary {
                ValuationModel::BinarySymmetric { tables }
            } else {
                ValuationModel::SharedQuality { tables }
            }
        }
        RandomFamily::Binary | RandomFamily::Shared => {
            let bounds: Vec<u32> = groups.iter().map(|g| g.len() as u32 * (k - 1)).collect();
            let domain = quality_vectors(&bounds);
            let tables = (0..n)
                .map(|_| {
                    let mut t: BTreeMap<QualityVector, Money> = BTreeMap::new();
                    for q in &domain {
                        let below = max_of((0..q.0.len()).filter(|&g| q.0[g] > 0).map(|g| {
                            let mut p = q.clone();
                            p.0[g] -= 1;
                            &t[&p]
                        }))
                        .cloned();
                        let v = step(&mut rng, below.as_ref());
                        t.insert(q.clone(), v);
                    }
                    t
                })
                .collect();
            ValuationModel::SharedQualityGrouped { tables }
        }
        RandomFamily::General => {
            let sizes: Vec<u32> = groups.iter().map(|g| g.len() as u32).collect();
            let mut domain = histograms(&sizes, k);
            let weight = |h: &Histogram| -> u32 {
                h.0.iter()
                    .flat_map(|g| g.iter().enumerate().map(|(c, &x)| c as u32 * x))
                    .sum()
            };
            domain.sort_by_key(|h| (weight(h), h.clone()));
            let tables = (0..n)
                .map(|_| {
                    let mut t: BTreeMap<Histogram, Money> = BTreeMap::new();
                    for h in &domain {
                        let mut preds = Vec::new();
                        for g in 0..h.0.len() {
                            for c in 1..k as usize {
                                if h.0[g][c] > 0 {
                                    let mut p = h.clone();
                                    p.0[g][c] -= 1;
                                    p.0[g][c - 1] += 1;
                                    preds.push(p);
                                }
                            }
                        }
                        let below = max_of(preds.iter().map(|p| &t[p])).cloned();
                        let v = step(&mut rng, below.as_ref());
                        t.insert(h.clone(), v);
                    }
                    t
                })
                .collect();
            ValuationModel::GeneralSymmetric { tables }
        }
    };
    Ok(Instance::new(n, k, groups, valuation)?.with_name(format!("random-{family}-n{n}-k{k}-l{l}-s{seed}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{optimal_bidder, validate_instance};
    use crate::money::ratio;

    #[test]
    fn chain_sizes() {
        for (l, k, n) in [(1, 2, 2), (1, 3, 4), (2, 2, 3), (2, 3, 7)] {
            let f = gen_chain_family(l, k, int(10)).unwrap();
            assert_eq!(f.instance.n(), n);
            assert_eq!(f.designated.len(), n);
        }
    }

    #[test]
    fn chain_l1_k3_layout() {
        let f = gen_chain_family(1, 3, int(10)).unwrap();
        assert_eq!(f.s_star.to_string(), "1,2,2,0");
        let shown: Vec<String> = f.designated.iter().map(|(s, b)| format!("{s};{b}")).collect();
        assert_eq!(shown, ["0,2,2,0;0", "1,0,2,0;1", "1,2,1,0;2", "1,2,2,0;3"]);
        for (s, b) in &f.designated {
            assert_eq!(optimal_bidder(s, &f.instance).unwrap(), *b);
        }
    }

    #[test]
    fn weighted_sizes_and_thresholds() {
        for (l, k, n) in [(1, 2, 2), (2, 2, 3), (1, 3, 3)] {
            let f = gen_weighted_family(l, k, int(100)).unwrap();
            assert_eq!(f.instance.n(), n);
            for (s, b) in &f.designated {
                assert_eq!(optimal_bidder(s, &f.instance).unwrap(), *b, "{s}");
            }
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(gen_chain_family(0, 2, int(10)).is_err());
        assert!(gen_chain_family(1, 1, int(10)).is_err());
        assert!(gen_weighted_family(1, 2, ratio(1, 2)).is_err());
        assert!(gen_random(2, 3, 1, RandomFamily::Binary, 0).is_err());
        assert!(gen_random(2, 2, 3, RandomFamily::Shared, 0).is_err());
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        for family in [RandomFamily::Binary, RandomFamily::Shared, RandomFamily::General] {
            for l in 1..=2 {
                let k = if family == RandomFamily::Binary { 2 } else { 3 };
                let a = gen_random(4, k, l, family, 7).unwrap();
                assert_eq!(a, gen_random(4, k, l, family, 7).unwrap());
                assert!(validate_instance(&a).is_empty());
            }
        }
        assert_ne!(
            gen_random(4, 2, 1, RandomFamily::Binary, 1).unwrap(),
            gen_random(4, 2, 1, RandomFamily::Binary, 2).unwrap()
        );
    }

    #[test]
    fn contiguous_split() {
        assert_eq!(contiguous_groups(5, 2), vec![vec![0, 1, 2], vec![3, 4]]);
    }
}
