//! Transcript bookkeeping, allocation-table properties and clock/direct
//! equivalence.

use num_traits::Zero;
use rayon::prelude::*;

use super::{Budgets, Check, Report, Witness};
use crate::clock::{consistent_strategy, ClockResponse, ClockTranscript, ConsistentStrategy, Strategy};
use crate::coins::CoinRealization;
use crate::error::{Error, Result};
use crate::general_auction::{closed_form_allocation, rho, AllocationTable};
use crate::mechanism::Mechanism;
use crate::model::{Instance, SignalProfile};
use crate::money::{format_money, Money};
use crate::outcome::{check_transcript, Transcript};

/// A transcript together with what is needed to check it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptCase {
    pub transcript: Transcript,
    /// `k − 1`.
    pub step: u32,
    /// Size of the group the auction ran in.
    pub initial_active: usize,
    /// True quality on the group's coordinate.
    pub truth: Option<u32>,
}

impl TranscriptCase {
    fn check(&self) -> std::result::Result<usize, String> {
        check_transcript(&self.transcript, self.step, self.initial_active, self.truth)
            .map(|s| s.max_rstar)
    }
}

/// Checks standalone transcripts, e.g. ones read from disk.
pub fn check_transcript_cases(cases: &[TranscriptCase]) -> Report {
    let mut max_rstar = 0;
    let mut witness = None;
    for (i, c) in cases.iter().enumerate() {
        match c.check() {
            Ok(m) => max_rstar = max_rstar.max(m),
            Err(detail) => {
                witness = Some(Witness {
                    profile: SignalProfile::new(Vec::new()),
                    bidder: None,
                    deviation: None,
                    coin: None,
                    detail: format!("transcript {i}: {detail}"),
                });
                break;
            }
        }
    }
    Report {
        check: Check::Rstar,
        instance: "-".into(),
        mechanism: "-".into(),
        pricing: None,
        passed: witness.is_none(),
        quantity: format!("max_rstar={max_rstar}"),
        witness,
    }
}

fn rstar_unit(
    mech: &dyn Mechanism,
    s: &SignalProfile,
    coin: &CoinRealization,
) -> Result<(usize, Option<Witness>)> {
    let inst = mech.instance();
    let (_, t) = mech.run_traced(s, coin)?;
    let transcript = t.ok_or_else(|| {
        Error::InvalidInput(format!("{} keeps no discovery transcript", mech.label()))
    })?;
    let g = if mech.grouped() { coin.group } else { 0 };
    let members = &inst.groups()[g];
    let case = TranscriptCase {
        transcript,
        step: inst.k() - 1,
        initial_active: members.len(),
        truth: Some(members.iter().map(|&b| s.get(b)).sum()),
    };
    Ok(match case.check() {
        Ok(m) => (m, None),
        Err(detail) => (
            0,
            Some(Witness {
                profile: s.clone(),
                bidder: None,
                deviation: None,
                coin: Some(coin.clone()),
                detail,
            }),
        ),
    })
}

/// Runs every coin at every truthful profile and checks each transcript.
pub fn check_transcript_invariants(mech: &dyn Mechanism, budgets: &Budgets) -> Result<Report> {
    let profiles = budgets.profiles(mech.instance())?;
    let space = budgets.coin_space(mech, profiles.len() as u64)?;
    let per_coin: Vec<(usize, Option<Witness>)> = space
        .coins
        .par_iter()
        .map(|coin| -> Result<(usize, Option<Witness>)> {
            let mut max = 0;
            for s in &profiles {
                let (m, w) = rstar_unit(mech, s, coin)?;
                if w.is_some() {
                    return Ok((max, w));
                }
                max = max.max(m);
            }
            Ok((max, None))
        })
        .collect::<Result<_>>()?;
    let max = per_coin.iter().map(|(m, _)| *m).max().unwrap_or(0);
    let found = per_coin.into_iter().find_map(|(_, w)| w);
    Ok(Report::new(Check::Rstar, mech, format!("max_rstar={max}"), found))
}

pub(super) fn replay_rstar(mech: &dyn Mechanism, w: &Witness) -> Result<Option<Witness>> {
    let coin = w
        .coin
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("witness has no coin".into()))?;
    rstar_unit(mech, &w.profile, coin).map(|(_, w)| w)
}

fn table_unit(table: &AllocationTable, inst: &Instance, s: &SignalProfile) -> Result<(Money, Option<Witness>)> {
    let share = Money::new(1.into(), (table.rho() as i64).into());
    let k = inst.k();
    let cap = inst.num_groups() * (k * (k - 1) / 2) as usize + 1;
    let fail = |bidder: Option<usize>, detail: String| Witness {
        profile: s.clone(),
        bidder,
        deviation: None,
        coin: None,
        detail,
    };
    let mut sum = Money::zero();
    let mut positive = 0;
    for i in 0..inst.n() {
        let x = table.x(i, s);
        if !x.is_zero() && x != &share {
            return Ok((sum, Some(fail(Some(i), format!("entry {} is neither 0 nor 1/ρ", format_money(x))))));
        }
        if s.get(i) + 1 < k && x > table.x(i, &s.with(i, s.get(i) + 1)) {
            return Ok((sum, Some(fail(Some(i), format!("entry drops when signal rises to {}", s.get(i) + 1)))));
        }
        let closed = closed_form_allocation(inst, i, s)?;
        if x != &closed {
            return Ok((
                sum,
                Some(fail(
                    Some(i),
                    format!("entry {} but closed form gives {}", format_money(x), format_money(&closed)),
                )),
            ));
        }
        positive += !x.is_zero() as usize;
        sum += x;
    }
    if sum > Money::from_integer(1.into()) {
        return Ok((sum.clone(), Some(fail(None, format!("allocation sums to {}", format_money(&sum))))));
    }
    if positive > cap {
        return Ok((sum, Some(fail(None, format!("{positive} bidders served, more than {cap}")))));
    }
    Ok((sum, None))
}

/// Feasibility, monotonicity, two values, closed form and the count bound,
/// at every profile. The quantity is the largest profile sum.
pub fn check_allocation_table(table: &AllocationTable, inst: &Instance) -> Result<Report> {
    if table.n() != inst.n() || table.k() != inst.k() || table.rho() != rho(inst) {
        return Err(Error::InvalidInput("table was built for another instance".into()));
    }
    let mut max = Money::zero();
    let mut found = None;
    for s in crate::model::profiles(inst.n(), inst.k()) {
        let (sum, w) = table_unit(table, inst, &s)?;
        if w.is_some() {
            found = w;
            break;
        }
        max = max.max(sum);
    }
    Ok(Report {
        check: Check::Feasibility,
        instance: inst.label(),
        mechanism: "general".into(),
        pricing: None,
        passed: found.is_none(),
        quantity: format!("max_sum={}", format_money(&max)),
        witness: found,
    })
}

pub(super) fn replay_table(table: &AllocationTable, inst: &Instance, w: &Witness) -> Result<Option<Witness>> {
    table_unit(table, inst, &w.profile).map(|(_, w)| w)
}

/// Levels never fall for a bidder and nobody is asked after exiting.
fn clock_violation(t: &ClockTranscript, n: usize) -> Option<String> {
    let mut last = vec![0u32; n];
    let mut exited = vec![false; n];
    for (i, e) in t.events.iter().enumerate() {
        if exited[e.bidder] {
            return Some(format!("event {} ({e}) after exit", i + 1));
        }
        if e.level < last[e.bidder] {
            return Some(format!("event {} ({e}) lowers the clock", i + 1));
        }
        last[e.bidder] = e.level;
        exited[e.bidder] = e.response == ClockResponse::Exit;
    }
    None
}

fn equivalence_unit(mech: &dyn Mechanism, s: &SignalProfile, coin: &CoinRealization) -> Result<Option<Witness>> {
    let strategies: Vec<ConsistentStrategy> = s.signals().iter().map(|&v| consistent_strategy(v)).collect();
    let refs: Vec<&dyn Strategy> = strategies.iter().map(|x| x as &dyn Strategy).collect();
    let (clock, t) = mech.run_clock(&refs, coin)?;
    let direct = mech.run(s, coin)?;
    let detail = if clock != direct {
        format!("clock gives {clock}, direct gives {direct}")
    } else if let Some(v) = clock_violation(&t, s.len()) {
        v
    } else {
        return Ok(None);
    };
    Ok(Some(Witness {
        profile: s.clone(),
        bidder: None,
        deviation: None,
        coin: Some(coin.clone()),
        detail,
    }))
}

/// Consistent bidding in the clock auction reproduces the direct outcome
/// for every coin and truthful profile. The quantity counts the pairs.
pub fn check_clock_equivalence(mech: &dyn Mechanism, budgets: &Budgets) -> Result<Report> {
    if !mech.has_clock() {
        return Err(Error::InvalidInput(format!("{} has no clock implementation", mech.label())));
    }
    let profiles = budgets.profiles(mech.instance())?;
    let space = budgets.coin_space(mech, 2 * profiles.len() as u64)?;
    let found = space
        .coins
        .par_iter()
        .map(|coin| -> Result<Option<Witness>> {
            for s in &profiles {
                if let Some(w) = equivalence_unit(mech, s, coin)? {
                    return Ok(Some(w));
                }
            }
            Ok(None)
        })
        .find_map_first(|r| r.transpose())
        .transpose()?;
    let pairs = space.coins.len() * profiles.len();
    Ok(Report::new(Check::Equivalence, mech, format!("pairs={pairs}"), found))
}

pub(super) fn replay_equivalence(mech: &dyn Mechanism, w: &Witness) -> Result<Option<Witness>> {
    let coin = w
        .coin
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("witness has no coin".into()))?;
    equivalence_unit(mech, &w.profile, coin)
}
