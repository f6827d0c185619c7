//! Instances, signal profiles, quality vectors and valuation models.
//!
//! Signals are ranks in `0..k`. A bidder's value is a table lookup keyed by
//! whatever statistic the valuation model depends on: the total number of
//! high signals, the total quality, the per-group quality vector, or the
//! per-group signal histogram. Tables keyed by those statistics are symmetric
//! within each expertise group by construction.

mod format;
mod quality;
mod space;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::money::Money;

pub use format::{histogram_key, parse_instance, quality_key, serialize_instance};
pub use quality::QualityIndex;
pub use space::{histograms, profile_count, profile_index, profiles, quality_vectors};

pub type BidderId = usize;

/// One reported (or true) signal per bidder, each in `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignalProfile(pub Vec<u32>);

impl SignalProfile {
    pub fn new(signals: Vec<u32>) -> Self {
        Self(signals)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, bidder: BidderId) -> u32 {
        self.0[bidder]
    }

    pub fn signals(&self) -> &[u32] {
        &self.0
    }

    /// The profile with `bidder`'s signal replaced.
    pub fn with(&self, bidder: BidderId, signal: u32) -> Self {
        let mut s = self.0.clone();
        s[bidder] = signal;
        Self(s)
    }
}

impl fmt::Display for SignalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for SignalProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() {
            return Ok(Self(Vec::new()));
        }
        t.split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidInput(format!("bad signal {p:?} in profile {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Per-group signal sums.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QualityVector(pub Vec<u32>);

impl fmt::Display for QualityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&quality_key(self))
    }
}

/// Per group, the number of members holding each signal value `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Histogram(pub Vec<Vec<u32>>);

impl Histogram {
    /// True when every group's multiset of signals in `self` can be reached
    /// from the one in `lower` by raising signals.
    pub fn dominates(&self, lower: &Histogram) -> bool {
        self.0.iter().zip(&lower.0).all(|(hi, lo)| {
            let (mut ch, mut cl) = (0u32, 0u32);
            hi.iter().zip(lo).all(|(a, b)| {
                ch += a;
                cl += b;
                ch <= cl
            })
        })
    }
}

impl fmt::Display for Histogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&histogram_key(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValuationModel {
    /// `k = 2`, one group; per bidder a table indexed by the number of high signals.
    BinarySymmetric { tables: Vec<Vec<Money>> },
    /// One group; per bidder a table indexed by the total quality `0..=n(k-1)`.
    SharedQuality { tables: Vec<Vec<Money>> },
    /// Per bidder a map from quality vectors to values.
    SharedQualityGrouped {
        tables: Vec<BTreeMap<QualityVector, Money>>,
    },
    /// Per bidder a map from per-group signal histograms to values.
    GeneralSymmetric {
        tables: Vec<BTreeMap<Histogram, Money>>,
    },
}

impl ValuationModel {
    pub fn type_name(&self) -> &'static str {
        match self {
            Self::BinarySymmetric { .. } => "binary_symmetric",
            Self::SharedQuality { .. } => "shared_quality",
            Self::SharedQualityGrouped { .. } => "shared_quality_grouped",
            Self::GeneralSymmetric { .. } => "general_symmetric",
        }
    }

    fn table_count(&self) -> usize {
        match self {
            Self::BinarySymmetric { tables } | Self::SharedQuality { tables } => tables.len(),
            Self::SharedQualityGrouped { tables } => tables.len(),
            Self::GeneralSymmetric { tables } => tables.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    name: Option<String>,
    n: usize,
    k: u32,
    groups: Vec<Vec<BidderId>>,
    valuation: ValuationModel,
    group_of: Vec<usize>,
}

impl Instance {
    /// Builds and validates an instance.
    pub fn new(
        n: usize,
        k: u32,
        groups: Vec<Vec<BidderId>>,
        valuation: ValuationModel,
    ) -> Result<Self> {
        let inst = Self::unchecked(n, k, groups, valuation);
        let violations = validate_instance(&inst);
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }

    /// Builds an instance without validating it. Mechanisms assume a valid
    /// instance; use [`validate_instance`] before running anything on this.
    pub fn unchecked(
        n: usize,
        k: u32,
        groups: Vec<Vec<BidderId>>,
        valuation: ValuationModel,
    ) -> Self {
        let mut group_of = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            for &b in members {
                if b < n && group_of[b] == usize::MAX {
                    group_of[b] = g;
                }
            }
        }
        Self {
            name: None,
            n,
            k,
            groups,
            valuation,
            group_of,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "instance".to_string())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<BidderId>] {
        &self.groups
    }

    pub fn group_of(&self, bidder: BidderId) -> usize {
        self.group_of[bidder]
    }

    pub fn group_sizes(&self) -> Vec<u32> {
        self.groups.iter().map(|g| g.len() as u32).collect()
    }

    /// Largest attainable quality per group.
    pub fn quality_bounds(&self) -> Vec<u32> {
        self.groups
            .iter()
            .map(|g| g.len() as u32 * (self.k - 1))
            .collect()
    }

    pub fn valuation(&self) -> &ValuationModel {
        &self.valuation
    }

    /// Whether every value is a function of the quality vector alone. True
    /// for all quality-keyed models, and for histogram-keyed ones when `k = 2`.
    pub fn is_quality_determined(&self) -> bool {
        !matches!(self.valuation, ValuationModel::GeneralSymmetric { .. }) || self.k == 2
    }

    pub fn check_profile(&self, profile: &SignalProfile) -> Result<()> {
        if profile.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "profile has {} signals, instance has {} bidders",
                profile.len(),
                self.n
            )));
        }
        if let Some(s) = profile.0.iter().find(|&&s| s >= self.k) {
            return Err(Error::InvalidInput(format!(
                "signal {s} outside 0..{} in profile {profile}",
                self.k
            )));
        }
        Ok(())
    }

    pub fn histogram_of(&self, profile: &SignalProfile) -> Histogram {
        let mut h = vec![vec![0u32; self.k as usize]; self.groups.len()];
        for (b, &s) in profile.0.iter().enumerate() {
            h[self.group_of[b]][s as usize] += 1;
        }
        Histogram(h)
    }

    /// Histogram of a quality vector; only meaningful for `k = 2`.
    fn histogram_of_quality(&self, q: &QualityVector) -> Histogram {
        Histogram(
            self.groups
                .iter()
                .zip(&q.0)
                .map(|(g, &hi)| vec![g.len() as u32 - hi, hi])
                .collect(),
        )
    }

    /// Value of `bidder` at a quality vector, for quality-determined models.
    pub fn value_at_quality(&self, bidder: BidderId, q: &QualityVector) -> Option<&Money> {
        match &self.valuation {
            ValuationModel::BinarySymmetric { tables } | ValuationModel::SharedQuality { tables } => {
                tables.get(bidder)?.get(*q.0.first()? as usize)
            }
            ValuationModel::SharedQualityGrouped { tables } => tables.get(bidder)?.get(q),
            ValuationModel::GeneralSymmetric { tables } if self.k == 2 => {
                tables.get(bidder)?.get(&self.histogram_of_quality(q))
            }
            ValuationModel::GeneralSymmetric { .. } => None,
        }
    }

    /// Values of all bidders at a profile.
    pub fn values(&self, profile: &SignalProfile) -> Result<Vec<Money>> {
        (0..self.n).map(|b| value(b, profile, self)).collect()
    }
}

/// Per-group sums of signals.
pub fn quality_of(profile: &SignalProfile, inst: &Instance) -> Result<QualityVector> {
    inst.check_profile(profile)?;
    let mut q = vec![0u32; inst.num_groups()];
    for (b, &s) in profile.0.iter().enumerate() {
        q[inst.group_of(b)] += s;
    }
    Ok(QualityVector(q))
}

/// `bidder`'s value at `profile`.
pub fn value(bidder: BidderId, profile: &SignalProfile, inst: &Instance) -> Result<Money> {
    if bidder >= inst.n() {
        return Err(Error::InvalidInput(format!("no bidder {bidder}")));
    }
    let missing = || {
        Error::InvalidInstance(vec![Violation::new(
            Some(bidder),
            Rule::Totality,
            format!("no table entry for profile {profile}"),
        )])
    };
    match inst.valuation() {
        ValuationModel::GeneralSymmetric { tables } => {
            inst.check_profile(profile)?;
            tables[bidder]
                .get(&inst.histogram_of(profile))
                .cloned()
                .ok_or_else(missing)
        }
        _ => {
            let q = quality_of(profile, inst)?;
            inst.value_at_quality(bidder, &q).cloned().ok_or_else(missing)
        }
    }
}

/// Index of the first maximum; the tie-break used everywhere in the crate.
pub fn argmax_lowest<'a>(values: impl IntoIterator<Item = &'a Money>) -> Option<BidderId> {
    let mut best: Option<(BidderId, &Money)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// The highest-value bidder at `profile`, lowest id among ties.
pub fn optimal_bidder(profile: &SignalProfile, inst: &Instance) -> Result<BidderId> {
    let vals = inst.values(profile)?;
    argmax_lowest(&vals).ok_or_else(|| Error::InvalidInput("instance has no bidders".into()))
}

/// The optimal welfare `max_i v_i(s)`.
pub fn optimal_welfare(profile: &SignalProfile, inst: &Instance) -> Result<Money> {
    let vals = inst.values(profile)?;
    Ok(vals.into_iter().max().unwrap_or_else(Money::zero))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Domain,
    Partition,
    Shape,
    Totality,
    Negative,
    Monotonicity,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Domain => "domain",
            Rule::Partition => "partition",
            Rule::Shape => "shape",
            Rule::Totality => "totality",
            Rule::Negative => "negativity",
            Rule::Monotonicity => "monotonicity",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub bidder: Option<BidderId>,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    pub fn new(bidder: Option<BidderId>, rule: Rule, detail: impl Into<String>) -> Self {
        Self {
            bidder,
            rule,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bidder {
            Some(b) => write!(f, "{} (bidder {b}): {}", self.rule, self.detail),
            None => write!(f, "{}: {}", self.rule, self.detail),
        }
    }
}

/// Lists everything wrong with an instance; empty means valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let (n, k) = (inst.n(), inst.k());
    if n == 0 {
        out.push(Violation::new(None, Rule::Domain, "n must be ≥ 1"));
    }
    if k < 2 {
        out.push(Violation::new(None, Rule::Domain, "k must be ≥ 2"));
    }
    check_partition(inst, &mut out);
    if inst.valuation().table_count() != n {
        out.push(Violation::new(
            None,
            Rule::Totality,
            format!("{} tables for {n} bidders", inst.valuation().table_count()),
        ));
    }
    if !out.is_empty() {
        // Table checks below index by group and bidder.
        return out;
    }
    let l = inst.num_groups();
    match inst.valuation() {
        ValuationModel::BinarySymmetric { tables } => {
            if k != 2 || l != 1 {
                out.push(Violation::new(
                    None,
                    Rule::Shape,
                    "binary_symmetric requires k = 2 and a single group",
                ));
            }
            check_dense(tables, n * (k as usize - 1) + 1, &mut out);
        }
        ValuationModel::SharedQuality { tables } => {
            if l != 1 {
                out.push(Violation::new(
                    None,
                    Rule::Shape,
                    "shared_quality requires a single group",
                ));
            }
            check_dense(tables, n * (k as usize - 1) + 1, &mut out);
        }
        ValuationModel::SharedQualityGrouped { tables } => {
            let domain = quality_vectors(&inst.quality_bounds());
            for (b, t) in tables.iter().enumerate() {
                check_keys(b, t, &domain, &mut out);
                for q in &domain {
                    for g in 0..l {
                        if q.0[g] < inst.quality_bounds()[g] {
                            let mut up = q.clone();
                            up.0[g] += 1;
                            check_step(b, t.get(q), t.get(&up), q, &up, &mut out);
                        }
                    }
                }
            }
        }
        ValuationModel::GeneralSymmetric { tables } => {
            let domain = histograms(&inst.group_sizes(), k);
            for (b, t) in tables.iter().enumerate() {
                check_keys(b, t, &domain, &mut out);
                for h in &domain {
                    for (g, counts) in h.0.iter().enumerate() {
                        for a in 0..(k as usize - 1) {
                            if counts[a] > 0 {
                                let mut up = h.clone();
                                up.0[g][a] -= 1;
                                up.0[g][a + 1] += 1;
                                check_step(b, t.get(h), t.get(&up), h, &up, &mut out);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn check_partition(inst: &Instance, out: &mut Vec<Violation>) {
    let n = inst.n();
    if inst.groups().is_empty() {
        out.push(Violation::new(None, Rule::Partition, "no groups"));
        return;
    }
    let mut seen = vec![0usize; n];
    for (g, members) in inst.groups().iter().enumerate() {
        if members.is_empty() {
            out.push(Violation::new(None, Rule::Partition, format!("group {g} is empty")));
        }
        for &b in members {
            if b >= n {
                out.push(Violation::new(
                    None,
                    Rule::Partition,
                    format!("group {g} names bidder {b} but n = {n}"),
                ));
            } else {
                seen[b] += 1;
            }
        }
    }
    for (b, &c) in seen.iter().enumerate() {
        if c == 0 {
            out.push(Violation::new(Some(b), Rule::Partition, "bidder in no group"));
        } else if c > 1 {
            out.push(Violation::new(Some(b), Rule::Partition, "bidder in several groups"));
        }
    }
}

fn check_dense(tables: &[Vec<Money>], len: usize, out: &mut Vec<Violation>) {
    for (b, t) in tables.iter().enumerate() {
        if t.len() != len {
            out.push(Violation::new(
                Some(b),
                Rule::Totality,
                format!("table has {} entries, expected {len}", t.len()),
            ));
            continue;
        }
        for (q, v) in t.iter().enumerate() {
            if v.is_negative() {
                out.push(Violation::new(Some(b), Rule::Negative, format!("q={q}")));
            }
        }
        for q in 1..t.len() {
            if t[q - 1] > t[q] {
                out.push(Violation::new(
                    Some(b),
                    Rule::Monotonicity,
                    format!("q={}→{}", q - 1, q),
                ));
            }
        }
    }
}

fn check_keys<K: Ord + fmt::Display>(
    bidder: BidderId,
    table: &BTreeMap<K, Money>,
    domain: &[K],
    out: &mut Vec<Violation>,
) {
    for key in domain {
        match table.get(key) {
            None => out.push(Violation::new(
                Some(bidder),
                Rule::Totality,
                format!("missing key {key}"),
            )),
            Some(v) if v.is_negative() => out.push(Violation::new(
                Some(bidder),
                Rule::Negative,
                format!("key {key}"),
            )),
            Some(_) => {}
        }
    }
    if table.len() > domain.len() || table.keys().any(|k| domain.binary_search(k).is_err()) {
        for key in table.keys().filter(|k| domain.binary_search(k).is_err()) {
            out.push(Violation::new(
                Some(bidder),
                Rule::Totality,
                format!("unexpected key {key}"),
            ));
        }
    }
}

fn check_step<K: fmt::Display>(
    bidder: BidderId,
    lo: Option<&Money>,
    hi: Option<&Money>,
    from: &K,
    to: &K,
    out: &mut Vec<Violation>,
) {
    if let (Some(lo), Some(hi)) = (lo, hi) {
        if lo > hi {
            out.push(Violation::new(
                Some(bidder),
                Rule::Monotonicity,
                format!("{from}→{to}"),
            ));
        }
    }
}
