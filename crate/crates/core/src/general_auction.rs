//! The general monotone allocation rule with probabilities in `{0, 1/ρ}`,
//! threshold pricing, and a randomized take-it-or-leave-it variant.
//!
//! Winner selection uses slots: every bidder with positive probability at a
//! profile holds one of `ρ` slots, the slot depends only on the bidder and
//! the other bidders' signals, and the coin picks a slot uniformly. Each
//! deterministic realization is then monotone in every bidder's own signal.

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;

use crate::coins::CoinRealization;
use crate::error::{Error, Result};
use crate::model::{
    optimal_bidder, profile_count, profile_index, profiles, value, BidderId, Instance,
    SignalProfile,
};
use crate::money::{lcm_upto, Money};
use crate::outcome::{Outcome, Pricing};

pub const DEFAULT_MAX_PROFILES: u64 = 1 << 20;
const COLORING_STEPS: u64 = 5_000_000;
const NO_SLOT: u32 = u32::MAX;

/// `min{n, ℓ·k(k−1)/2 + 1}`.
pub fn rho(inst: &Instance) -> usize {
    let k = inst.k() as usize;
    inst.n().min(inst.num_groups() * k * (k - 1) / 2 + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationTable {
    rho: usize,
    n: usize,
    k: u32,
    /// `x[profile * n + bidder]`
    x: Vec<Money>,
    slots: Vec<u32>,
}

impl AllocationTable {
    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn x(&self, bidder: BidderId, profile: &SignalProfile) -> &Money {
        &self.x[profile_index(profile, self.k) * self.n + bidder]
    }

    pub fn is_positive(&self, bidder: BidderId, profile: &SignalProfile) -> bool {
        !self.x(bidder, profile).is_zero()
    }

    pub fn slot(&self, bidder: BidderId, profile: &SignalProfile) -> Option<u32> {
        let s = self.slots[profile_index(profile, self.k) * self.n + bidder];
        (s != NO_SLOT).then_some(s)
    }

    /// Overwrites one entry. Only meant for exercising the table checks.
    pub fn set_entry(&mut self, bidder: BidderId, profile: &SignalProfile, x: Money) {
        let i = profile_index(profile, self.k) * self.n + bidder;
        self.x[i] = x;
    }

    /// One line per positive entry: `bidder profile x`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in profiles(self.n, self.k) {
            for b in 0..self.n {
                let x = self.x(b, &s);
                if !x.is_zero() {
                    let x = if x.is_integer() {
                        x.numer().to_string()
                    } else {
                        format!("{}/{}", x.numer(), x.denom())
                    };
                    out.push_str(&format!("{b} {s} {x}\n"));
                }
            }
        }
        out
    }
}

fn check_budget(inst: &Instance, max_profiles: u64) -> Result<u64> {
    match profile_count(inst.n(), inst.k()) {
        Some(c) if c <= max_profiles => Ok(c),
        _ => Err(Error::ResourceLimit(format!(
            "k^n = {}^{} profiles exceeds the budget of {max_profiles}",
            inst.k(),
            inst.n()
        ))),
    }
}

pub fn build_allocation_table(inst: &Instance) -> Result<AllocationTable> {
    build_allocation_table_with_budget(inst, DEFAULT_MAX_PROFILES)
}

/// Fills the table profile by profile in lexicographic order: the optimal
/// bidder at `s`, if not yet served there, is served at `s` and at every
/// profile reached by raising her signal alone.
pub fn build_allocation_table_with_budget(
    inst: &Instance,
    max_profiles: u64,
) -> Result<AllocationTable> {
    let count = check_budget(inst, max_profiles)? as usize;
    let (n, k) = (inst.n(), inst.k());
    let rho = rho(inst);
    let share = Money::new(1.into(), (rho as i64).into());
    let mut x = vec![Money::zero(); count * n];
    for s in profiles(n, k) {
        let i = optimal_bidder(&s, inst)?;
        if x[profile_index(&s, k) * n + i].is_zero() {
            for t in s.get(i)..k {
                x[profile_index(&s.with(i, t), k) * n + i] = share.clone();
            }
        }
    }
    let mut table = AllocationTable {
        rho,
        n,
        k,
        x,
        slots: vec![NO_SLOT; count * n],
    };
    assign_slots(&mut table)?;
    Ok(table)
}

/// Closed form: `1/ρ` iff the bidder is optimal at some `(t, s_−i)` with
/// `t ≤ s_i`. Needs no table.
pub fn closed_form_allocation(
    inst: &Instance,
    bidder: BidderId,
    profile: &SignalProfile,
) -> Result<Money> {
    for t in 0..=profile.get(bidder) {
        if optimal_bidder(&profile.with(bidder, t), inst)? == bidder {
            return Ok(Money::new(1.into(), (rho(inst) as i64).into()));
        }
    }
    Ok(Money::zero())
}

/// Colors nodes `(bidder, s_−bidder)` so that bidders positive at a common
/// profile get different slots.
fn assign_slots(table: &mut AllocationTable) -> Result<()> {
    let (n, k, rho) = (table.n, table.k, table.rho);
    let mut node_of: HashMap<(BidderId, usize), usize> = HashMap::new();
    let mut nodes: Vec<(BidderId, usize)> = Vec::new();
    let mut at_profile: Vec<Vec<usize>> = Vec::new();
    for s in profiles(n, k) {
        let mut here = Vec::new();
        for b in 0..n {
            if table.is_positive(b, &s) {
                let key = (b, profile_index(&s.with(b, 0), k));
                let id = *node_of.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    nodes.len() - 1
                });
                here.push(id);
            }
        }
        if here.len() > rho {
            return Err(Error::Invariant(format!(
                "{} bidders positive at {s}, more than ρ = {rho}",
                here.len()
            )));
        }
        at_profile.push(here);
    }
    let colors: Vec<u32> = if rho == n {
        nodes.iter().map(|&(b, _)| b as u32).collect()
    } else {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
        for here in &at_profile {
            for &a in here {
                for &b in here {
                    if a != b {
                        adj[a].insert(b);
                    }
                }
            }
        }
        let adj: Vec<Vec<usize>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
        color_graph(&adj, rho as u32, COLORING_STEPS).ok_or_else(|| {
            Error::Invariant(format!("no slot assignment with ρ = {rho} slots found"))
        })?
    };
    for (pidx, here) in at_profile.iter().enumerate() {
        for &id in here {
            table.slots[pidx * n + nodes[id].0] = colors[id];
        }
    }
    Ok(())
}

/// Backtracking DSatur. Returns `None` if no coloring was found within
/// `budget` steps.
fn color_graph(adj: &[Vec<usize>], colors: u32, budget: u64) -> Option<Vec<u32>> {
    let v_count = adj.len();
    let mut color = vec![NO_SLOT; v_count];
    let mut colored = 0usize;
    let mut stack: Vec<(usize, u32)> = Vec::new();
    let mut steps = 0u64;
    'pick: loop {
        if colored == v_count {
            return Some(color);
        }
        let v = (0..v_count)
            .filter(|&v| color[v] == NO_SLOT)
            .max_by_key(|&v| {
                let sat: BTreeSet<u32> =
                    adj[v].iter().map(|&u| color[u]).filter(|&c| c != NO_SLOT).collect();
                (sat.len(), adj[v].len(), std::cmp::Reverse(v))
            })
            .expect("an uncolored vertex remains");
        stack.push((v, 0));
        loop {
            steps += 1;
            if steps > budget {
                return None;
            }
            let (v, next) = stack.last_mut()?;
            let v = *v;
            if color[v] != NO_SLOT {
                color[v] = NO_SLOT;
                colored -= 1;
            }
            match (*next..colors).find(|&c| adj[v].iter().all(|&u| color[u] != c)) {
                Some(c) => {
                    color[v] = c;
                    colored += 1;
                    *next = c + 1;
                    continue 'pick;
                }
                None => {
                    stack.pop();
                }
            }
        }
    }
}

/// Smallest own signal at which `bidder` is served, others as in `others`.
pub fn threshold_signal(
    bidder: BidderId,
    others: &SignalProfile,
    table: &AllocationTable,
) -> Result<u32> {
    (0..table.k)
        .find(|&t| table.is_positive(bidder, &others.with(bidder, t)))
        .ok_or(Error::NoThreshold { bidder })
}

/// Size of the grid coin: `ρ` slots, times `lcm(1..k)` price points in
/// revenue mode.
pub fn grid_size(inst: &Instance, pricing: Pricing) -> u64 {
    let slots = rho(inst) as u64;
    match pricing {
        Pricing::Welfare => slots,
        Pricing::Revenue => slots * lcm_upto(inst.k()),
    }
}

pub fn run_general(
    inst: &Instance,
    reports: &SignalProfile,
    coins: &CoinRealization,
    pricing: Pricing,
) -> Result<Outcome> {
    let table = build_allocation_table(inst)?;
    run_general_with(&table, inst, reports, coins, pricing)
}

/// Runs against a prebuilt table. Only `coins.grid` is used.
pub fn run_general_with(
    table: &AllocationTable,
    inst: &Instance,
    reports: &SignalProfile,
    coins: &CoinRealization,
    pricing: Pricing,
) -> Result<Outcome> {
    inst.check_profile(reports)?;
    if coins.grid >= grid_size(inst, pricing) {
        return Err(Error::InvalidInput(format!(
            "grid index outside 0..{}",
            grid_size(inst, pricing)
        )));
    }
    let l = lcm_upto(inst.k());
    let (slot, r) = match pricing {
        Pricing::Welfare => (coins.grid, 0),
        Pricing::Revenue => (coins.grid / l, coins.grid % l),
    };
    let Some(w) = (0..inst.n()).find(|&b| table.slot(b, reports) == Some(slot as u32)) else {
        return Ok(Outcome::none(pricing));
    };
    let t = threshold_signal(w, reports, table)?;
    match pricing {
        Pricing::Welfare => {
            let price = value(w, &reports.with(w, t), inst)?;
            Ok(Outcome::award(w, price, pricing))
        }
        Pricing::Revenue => {
            let k = inst.k() as u64;
            let t_hat = t as u64 + r * (k - t as u64) / l;
            let offer = value(w, &reports.with(w, t_hat as u32), inst)?;
            if value(w, reports, inst)? >= offer {
                Ok(Outcome::award(w, offer, pricing))
            } else {
                Ok(Outcome::none(pricing))
            }
        }
    }
}
