//! Signal discovery engine shared by the binary and k-ary auctions.
//!
//! The engine tracks an interval `[q_min, q_max]` on one quality coordinate
//! and the residue class `S = {q : q mod (k-1) = m}`. With `k = 2` the
//! residue class is every integer and the engine is the binary auction.

use std::collections::BTreeSet;

use crate::coins::CoinRealization;
use crate::error::{Error, Result};
use crate::model::{BidderId, Instance, QualityIndex, SignalProfile};
use crate::money::{lcm_upto, Money};
use crate::outcome::{EndReason, EventKind, Outcome, Pricing, Transcript};

/// Where the engine gets signals from and how it makes the final offer.
pub(crate) trait SignalSource {
    fn discover(&mut self, bidder: BidderId) -> Result<u32>;
    fn offer(&mut self, offer: &Offer<'_>) -> Result<bool>;
}

/// Final take-it-or-leave-it offer to the survivor.
pub(crate) struct Offer<'a> {
    pub bidder: BidderId,
    pub price: &'a Money,
    /// Smallest own signal whose value covers the price.
    pub tau: u32,
    /// Survivor's value at each of her own signals, others as discovered.
    pub levels: &'a [Money],
}

/// Reads signals straight from a report profile.
pub(crate) struct DirectSource<'a> {
    pub reports: &'a SignalProfile,
}

impl SignalSource for DirectSource<'_> {
    fn discover(&mut self, bidder: BidderId) -> Result<u32> {
        Ok(self.reports.get(bidder))
    }

    fn offer(&mut self, offer: &Offer<'_>) -> Result<bool> {
        Ok(&offer.levels[self.reports.get(offer.bidder) as usize] >= offer.price)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscoveryState {
    pub active: BTreeSet<BidderId>,
    pub rstar: BTreeSet<BidderId>,
    pub q_min: u32,
    pub q_max: u32,
    /// Discovered signal per bidder.
    pub learned: Vec<Option<u32>>,
}

impl DiscoveryState {
    pub fn new(n: usize, active: impl IntoIterator<Item = BidderId>, q_max: u32) -> Self {
        Self {
            active: active.into_iter().collect(),
            rstar: BTreeSet::new(),
            q_min: 0,
            q_max,
            learned: vec![None; n],
        }
    }

    fn bounds(&self) -> (u32, u32) {
        (self.q_min, self.q_max)
    }
}

/// Every integer in `[q_min, q_max]`.
pub fn candidate_highcounts(state: &DiscoveryState) -> Vec<u32> {
    (state.q_min..=state.q_max).collect()
}

/// `{q ∈ [lo, hi] : q mod (k-1) = m}`, ascending.
pub fn residue_set(m: u32, k: u32, lo: u32, hi: u32) -> Result<Vec<u32>> {
    if k < 2 {
        return Err(Error::InvalidInput("k must be ≥ 2".into()));
    }
    if m > k - 2 {
        return Err(Error::InvalidInput(format!("residue {m} outside 0..{}", k - 1)));
    }
    Ok(residues_in(m, k - 1, lo, hi).collect())
}

fn residues_in(m: u32, step: u32, lo: u32, hi: u32) -> impl Iterator<Item = u32> {
    let first = lo + (m + step - lo % step) % step;
    (first..=hi).step_by(step as usize)
}

struct Engine<'a> {
    index: &'a QualityIndex,
    step: u32,
    residue: u32,
    base: usize,
    stride: usize,
}

impl Engine<'_> {
    fn at(&self, q: u32) -> usize {
        self.base + q as usize * self.stride
    }

    fn optimal_somewhere(&self, j: BidderId, lo: u32, hi: u32) -> bool {
        residues_in(self.residue, self.step, lo, hi).any(|q| self.index.opt(self.at(q)) == j)
    }
}

/// Runs the discovery auction.
///
/// With `grouped` set, `coins.group` picks the group; every other bidder's
/// signal is read first and fixed, and the auction runs inside the group.
/// Without it the instance must have a single group.
pub(crate) fn run_discovery<S: SignalSource>(
    inst: &Instance,
    index: &QualityIndex,
    coins: &CoinRealization,
    pricing: Pricing,
    grouped: bool,
    src: &mut S,
) -> Result<(Outcome, Transcript)> {
    let n = inst.n();
    let k = inst.k();
    let step = k - 1;
    let g = if grouped { coins.group } else { 0 };
    if !grouped && inst.num_groups() != 1 {
        return Err(Error::InvalidInput("instance has more than one group".into()));
    }
    if g >= inst.num_groups() {
        return Err(Error::InvalidInput(format!("group {g} out of range")));
    }
    if coins.residue >= step {
        return Err(Error::InvalidInput(format!("residue {} outside 0..{step}", coins.residue)));
    }
    if coins.order.len() != n {
        return Err(Error::InvalidInput("priority order must list every bidder".into()));
    }
    let grid_size = lcm_upto(k);
    if pricing == Pricing::Revenue && coins.grid >= grid_size {
        return Err(Error::InvalidInput(format!("grid index outside 0..{grid_size}")));
    }
    let read = |src: &mut S, b: BidderId| -> Result<u32> {
        let s = src.discover(b)?;
        if s >= k {
            return Err(Error::InvalidInput(format!("signal {s} of bidder {b} outside 0..{k}")));
        }
        Ok(s)
    };

    let members = &inst.groups()[g];
    let bound = members.len() as u32 * step;
    let mut state = DiscoveryState::new(n, members.iter().copied(), bound);
    let mut t = Transcript::default();
    let mut eng = Engine {
        index,
        step,
        residue: coins.residue,
        base: 0,
        stride: index.stride(g),
    };
    for b in (0..n).filter(|b| inst.group_of(*b) != g) {
        let s = read(src, b)?;
        state.learned[b] = Some(s);
        eng.base += s as usize * index.stride(inst.group_of(b));
        t.push(EventKind::Learned, Some(b), Some(s), state.bounds());
    }

    while state.active.len() > 1 {
        let i = *coins
            .order
            .iter()
            .find(|b| state.active.contains(b))
            .expect("active bidders appear in the order");
        state.active.remove(&i);
        state.rstar.insert(i);
        let s = read(src, i)?;
        state.learned[i] = Some(s);
        state.q_max -= step - s;
        state.q_min += s;
        t.push(EventKind::Costly, Some(i), Some(s), state.bounds());

        while let Some(j) = state
            .active
            .iter()
            .copied()
            .find(|&j| !eng.optimal_somewhere(j, state.q_min, state.q_max))
        {
            state.active.remove(&j);
            let s = read(src, j)?;
            state.learned[j] = Some(s);
            state.q_max = state.q_max + s - step;
            state.q_min += s;
            t.push(EventKind::Free, Some(j), Some(s), state.bounds());
        }

        let stale: Vec<BidderId> = state
            .rstar
            .iter()
            .copied()
            .filter(|&j| !eng.optimal_somewhere(j, state.q_min, state.q_max))
            .collect();
        for j in stale {
            state.rstar.remove(&j);
            t.push(EventKind::Cleanup, Some(j), state.learned[j], state.bounds());
        }
    }

    let end = |t: &mut Transcript, reason, w: Option<BidderId>, st: &DiscoveryState| {
        t.push(EventKind::End(reason), w, None, st.bounds());
    };
    let Some(&w) = state.active.iter().next() else {
        end(&mut t, EndReason::AEmpty, None, &state);
        return Ok((Outcome::none(pricing), t));
    };
    let cands: Vec<u32> = residues_in(eng.residue, step, state.q_min, state.q_max)
        .filter(|&q| index.opt(eng.at(q)) == w)
        .collect();
    if cands.is_empty() {
        end(&mut t, EndReason::NoCandidate, Some(w), &state);
        return Ok((Outcome::none(pricing), t));
    }
    if cands.len() > 2 {
        return Err(Error::Invariant(format!(
            "survivor {w} optimal at {} candidate qualities",
            cands.len()
        )));
    }
    let q = match pricing {
        Pricing::Welfare => cands[0],
        Pricing::Revenue => cands[(coins.grid * cands.len() as u64 / grid_size) as usize],
    };
    let price = index.value(w, eng.at(q)).clone();
    // Only the survivor is undiscovered here, so q_max = q_min + k - 1.
    let levels: Vec<Money> = (0..k)
        .map(|s| index.value(w, eng.at(state.q_min + s)).clone())
        .collect();
    let tau = levels.iter().position(|v| v >= &price).expect("price is attained") as u32;
    let accepted = src.offer(&Offer {
        bidder: w,
        price: &price,
        tau,
        levels: &levels,
    })?;
    if accepted {
        end(&mut t, EndReason::Awarded, Some(w), &state);
        Ok((Outcome::award(w, price, pricing), t))
    } else {
        end(&mut t, EndReason::Declined, Some(w), &state);
        Ok((Outcome::none(pricing), t))
    }
}
