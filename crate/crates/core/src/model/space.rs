//! Enumeration of profiles, quality vectors and histograms.

use super::{Histogram, QualityVector, SignalProfile};

/// `k^n`, or `None` on overflow.
pub fn profile_count(n: usize, k: u32) -> Option<u64> {
    (k as u64).checked_pow(n as u32)
}

/// All profiles in lexicographic order (bidder 0 most significant).
pub fn profiles(n: usize, k: u32) -> impl Iterator<Item = SignalProfile> {
    let total = profile_count(n, k).unwrap_or(u64::MAX);
    (0..total).map(move |mut idx| {
        let mut s = vec![0u32; n];
        for slot in s.iter_mut().rev() {
            *slot = (idx % k as u64) as u32;
            idx /= k as u64;
        }
        SignalProfile(s)
    })
}

/// Position of `profile` in [`profiles`] order.
pub fn profile_index(profile: &SignalProfile, k: u32) -> usize {
    profile
        .0
        .iter()
        .fold(0usize, |acc, &s| acc * k as usize + s as usize)
}

/// All vectors `q` with `0 ≤ q[g] ≤ bounds[g]`, sorted.
pub fn quality_vectors(bounds: &[u32]) -> Vec<QualityVector> {
    let mut out = vec![Vec::new()];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=b).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(QualityVector).collect()
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All per-group histograms for the given group sizes, sorted.
pub fn histograms(sizes: &[u32], k: u32) -> Vec<Histogram> {
    let mut out: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for &size in sizes {
        let comps = compositions(size, k as usize);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                comps.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect();
    }
    let mut out: Vec<Histogram> = out.into_iter().map(Histogram).collect();
    out.sort();
    out
}
