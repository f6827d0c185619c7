#![allow(dead_code)]

use ivauction::generators::{gen_random, RandomFamily};
use ivauction::money::int;
use ivauction::{Auction, Instance, MechanismKind, Pricing, ValuationModel};

/// Two bidders, `k = 2`: bidder 0 is worth 10 only when both signals are
/// high, bidder 1 is worth 1 everywhere.
pub fn e1() -> Instance {
    Instance::new(
        2,
        2,
        vec![vec![0, 1]],
        ValuationModel::BinarySymmetric {
            tables: vec![vec![int(0), int(0), int(10)], vec![int(1), int(1), int(1)]],
        },
    )
    .unwrap()
    .with_name("e1")
}

/// Two bidders, `k = 3`, values by total quality.
pub fn e3() -> Instance {
    Instance::new(
        2,
        3,
        vec![vec![0, 1]],
        ValuationModel::SharedQuality {
            tables: vec![
                vec![int(0), int(0), int(0), int(0), int(9)],
                vec![int(1), int(2), int(2), int(2), int(2)],
            ],
        },
    )
    .unwrap()
    .with_name("e3")
}

pub fn auction(inst: &Instance, kind: MechanismKind, pricing: Pricing) -> Auction {
    Auction::new(inst.clone(), kind, pricing)
        .unwrap_or_else(|e| panic!("{} on {}: {e}", kind, inst.label()))
}

fn random(ns: impl Iterator<Item = usize>, k: u32, l: usize, family: RandomFamily, seeds: u64) -> Vec<Instance> {
    ns.flat_map(|n| (0..seeds).map(move |s| gen_random(n, k, l, family, s).unwrap()))
        .collect()
}

/// `ℓ = 1`, `k = 2`, `n ≤ max_n`.
pub fn binary_suite(max_n: usize) -> Vec<Instance> {
    let mut v = vec![e1()];
    v.extend(random(1..=max_n, 2, 1, RandomFamily::Binary, 3));
    v
}

/// `k = 2` with `ℓ ∈ {2, 3}` groups.
pub fn grouped_binary_suite(max_n: usize) -> Vec<Instance> {
    [2, 3]
        .into_iter()
        .flat_map(|l| random(l..=max_n, 2, l, RandomFamily::Binary, 2))
        .collect()
}

pub fn kary_suite(k: u32, max_n: usize) -> Vec<Instance> {
    let mut v = if k == 3 { vec![e3()] } else { Vec::new() };
    v.extend(random(1..=max_n, k, 1, RandomFamily::Shared, 2));
    v
}

/// Shared-quality instances with two groups.
pub fn grouped_kary_suite(k: u32, max_n: usize) -> Vec<Instance> {
    random(2..=max_n, k, 2, RandomFamily::Shared, 2)
}

/// Histogram-valued instances for the general mechanism.
pub fn general_suite(max_n: usize, max_k: u32) -> Vec<Instance> {
    let mut v = Vec::new();
    for k in 2..=max_k {
        for l in 1..=2 {
            v.extend(random(l.max(1)..=max_n, k, l, RandomFamily::General, 2));
        }
    }
    v
}
