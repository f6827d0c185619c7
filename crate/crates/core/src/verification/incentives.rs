//! Incentive checks over unilateral misreports: per coin realization
//! (universal) and in expectation over coins.

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::{utility, value_grid, Budgets, Check, Report, Witness};
use crate::coins::CoinRealization;
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{profile_index, value, SignalProfile};
use crate::money::{format_money, Money};
use crate::outcome::Outcome;

/// For every coin, truthful profile, bidder and misreport: truthful utility
/// is non-negative and at least the misreport's.
pub fn check_universal_icir(mech: &dyn Mechanism, budgets: &Budgets) -> Result<Report> {
    let inst = mech.instance();
    let profiles = budgets.profiles(inst)?;
    let space = budgets.coin_space(mech, profiles.len() as u64)?;
    let vals = value_grid(inst, &profiles)?;
    let k = inst.k();
    let found = space
        .coins
        .par_iter()
        .map(|coin| -> Result<Option<Witness>> {
            let outcomes: Vec<Outcome> =
                profiles.iter().map(|s| mech.run(s, coin)).collect::<Result<_>>()?;
            for (pi, s) in profiles.iter().enumerate() {
                for i in 0..inst.n() {
                    let mut lookup = |r: &SignalProfile| Ok(outcomes[profile_index(r, k)].clone());
                    if let Some(w) = universal_unit(s, i, coin, &vals[pi][i], k, &mut lookup)? {
                        return Ok(Some(w));
                    }
                }
            }
            Ok(None)
        })
        .find_map_first(|r| r.transpose())
        .transpose()?;
    let units = space.coins.len() * profiles.len() * inst.n();
    Ok(Report::new(Check::UniversalIcir, mech, format!("units={units}"), found))
}

fn universal_unit(
    s: &SignalProfile,
    i: usize,
    coin: &CoinRealization,
    v: &Money,
    k: u32,
    outcome_of: &mut dyn FnMut(&SignalProfile) -> Result<Outcome>,
) -> Result<Option<Witness>> {
    let witness = |deviation: Option<String>, detail: String| Witness {
        profile: s.clone(),
        bidder: Some(i),
        deviation,
        coin: Some(coin.clone()),
        detail,
    };
    let truthful = utility(&outcome_of(s)?, i, v);
    if truthful.is_negative() {
        return Ok(Some(witness(
            None,
            format!("truthful utility {} < 0", format_money(&truthful)),
        )));
    }
    for d in (0..k).filter(|&d| d != s.get(i)) {
        let dev = utility(&outcome_of(&s.with(i, d))?, i, v);
        if dev > truthful {
            return Ok(Some(witness(
                Some(format!("report {d}")),
                format!(
                    "misreport utility {} > truthful {}",
                    format_money(&dev),
                    format_money(&truthful)
                ),
            )));
        }
    }
    Ok(None)
}

pub(super) fn replay_universal(mech: &dyn Mechanism, w: &Witness) -> Result<Option<Witness>> {
    let (i, coin) = unit_of(w)?;
    let coin = coin.ok_or_else(|| Error::InvalidInput("witness has no coin".into()))?;
    let inst = mech.instance();
    let v = value(i, &w.profile, inst)?;
    universal_unit(&w.profile, i, coin, &v, inst.k(), &mut |r| mech.run(r, coin))
}

fn unit_of(w: &Witness) -> Result<(usize, Option<&CoinRealization>)> {
    let i = w
        .bidder
        .ok_or_else(|| Error::InvalidInput("witness has no bidder".into()))?;
    Ok((i, w.coin.as_ref()))
}

/// Per-bidder totals over the coin space at one report profile.
#[derive(Clone, Debug)]
struct Tally {
    wins: Vec<u64>,
    pay: Vec<Money>,
    /// First coin at which the bidder wins above her value at these reports.
    overcharged: Vec<Option<usize>>,
}

fn tally(mech: &dyn Mechanism, s: &SignalProfile, coins: &[CoinRealization]) -> Result<Tally> {
    let n = mech.instance().n();
    let vals = mech.instance().values(s)?;
    let mut t = Tally {
        wins: vec![0; n],
        pay: vec![Money::zero(); n],
        overcharged: vec![None; n],
    };
    for (ci, coin) in coins.iter().enumerate() {
        let o = mech.run(s, coin)?;
        if let Some(w) = o.winner {
            t.wins[w] += 1;
            if o.price > vals[w] && t.overcharged[w].is_none() {
                t.overcharged[w] = Some(ci);
            }
            t.pay[w] += o.price;
        }
    }
    Ok(t)
}

/// Ex-post IC and IR with utilities in expectation over coins, plus
/// non-negative realized utility for a truthful winner.
pub fn check_expost_ic(mech: &dyn Mechanism, budgets: &Budgets) -> Result<Report> {
    let inst = mech.instance();
    let profiles = budgets.profiles(inst)?;
    let space = budgets.coin_space(mech, profiles.len() as u64)?;
    let vals = value_grid(inst, &profiles)?;
    let tallies: Vec<Tally> = profiles
        .par_iter()
        .map(|s| tally(mech, s, &space.coins))
        .collect::<Result<_>>()?;
    let k = inst.k();
    let mut found = None;
    'outer: for (pi, s) in profiles.iter().enumerate() {
        for i in 0..inst.n() {
            let lookup = |r: &SignalProfile| Ok(&tallies[profile_index(r, k)]);
            if let Some(w) = expectation_unit(s, i, &vals[pi][i], k, &space.coins, &lookup)? {
                found = Some(w);
                break 'outer;
            }
        }
    }
    let units = profiles.len() * inst.n();
    Ok(Report::new(Check::ExpostIc, mech, format!("units={units}"), found))
}

fn expectation_unit<'a>(
    s: &SignalProfile,
    i: usize,
    v: &Money,
    k: u32,
    coins: &[CoinRealization],
    tally_of: &dyn Fn(&SignalProfile) -> Result<&'a Tally>,
) -> Result<Option<Witness>> {
    let count = Money::from_integer((coins.len() as i64).into());
    // Expected utility times the number of coins.
    let scaled = |t: &Tally| Money::from_integer((t.wins[i] as i64).into()) * v - &t.pay[i];
    let witness = |deviation: Option<String>, coin: Option<usize>, detail: String| Witness {
        profile: s.clone(),
        bidder: Some(i),
        deviation,
        coin: coin.map(|c| coins[c].clone()),
        detail,
    };
    let own = tally_of(s)?;
    if let Some(c) = own.overcharged[i] {
        return Ok(Some(witness(None, Some(c), "truthful winner pays above her value".into())));
    }
    let truthful = scaled(own);
    if truthful.is_negative() {
        return Ok(Some(witness(
            None,
            None,
            format!("expected truthful utility {} < 0", format_money(&(truthful / count))),
        )));
    }
    for d in (0..k).filter(|&d| d != s.get(i)) {
        let dev = scaled(tally_of(&s.with(i, d))?);
        if dev > truthful {
            return Ok(Some(witness(
                Some(format!("report {d}")),
                None,
                format!(
                    "expected misreport utility {} > truthful {}",
                    format_money(&(dev / &count)),
                    format_money(&(truthful / &count))
                ),
            )));
        }
    }
    Ok(None)
}

pub(super) fn replay_expectation(
    mech: &dyn Mechanism,
    w: &Witness,
    budgets: &Budgets,
) -> Result<Option<Witness>> {
    let (i, _) = unit_of(w)?;
    let inst = mech.instance();
    let space = budgets.coin_space(mech, inst.k() as u64)?;
    let k = inst.k();
    let tallies: Vec<Tally> = (0..k)
        .map(|d| tally(mech, &w.profile.with(i, d), &space.coins))
        .collect::<Result<_>>()?;
    let v = value(i, &w.profile, inst)?;
    let lookup = |r: &SignalProfile| Ok(&tallies[r.get(i) as usize]);
    expectation_unit(&w.profile, i, &v, k, &space.coins, &lookup)
}
