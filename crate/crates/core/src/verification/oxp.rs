//! Obvious ex-post equilibrium of consistent bidding in the clock auctions.
//!
//! Coins are fixed per game tree. A decision point is "bidder `i` is asked
//! at level `c` after history `h`"; the opponent profiles consistent with it
//! are those whose truthful play passes through it.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{utility, Budgets, Check, Report, Witness};
use crate::clock::{consistent_strategy, ClockEvent, ConsistentStrategy, ScriptedStrategy, Strategy};
use crate::coins::CoinRealization;
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{profiles, value, SignalProfile};
use crate::money::{format_money, Money};

type DecisionPoint = (Vec<ClockEvent>, u32);

fn play(
    mech: &dyn Mechanism,
    truth: &SignalProfile,
    bidder: usize,
    own: &dyn Strategy,
    coin: &CoinRealization,
) -> Result<(Money, Vec<ClockEvent>)> {
    let others: Vec<ConsistentStrategy> = truth.signals().iter().map(|&v| consistent_strategy(v)).collect();
    let refs: Vec<&dyn Strategy> = others
        .iter()
        .enumerate()
        .map(|(b, s)| if b == bidder { own } else { s as &dyn Strategy })
        .collect();
    let (o, t) = mech.run_clock(&refs, coin)?;
    let v = value(bidder, truth, mech.instance())?;
    Ok((utility(&o, bidder, &v), t.events))
}

fn describe(from: usize, exit_at: Option<u32>) -> String {
    match exit_at {
        Some(c) => format!("after {from} events exit at level {c}"),
        None => format!("after {from} events never exit"),
    }
}

/// Checks every decision point of `bidder` with own signal `signal`.
/// Returns the number of points checked and the first violation.
fn unit(
    mech: &dyn Mechanism,
    coin: &CoinRealization,
    bidder: usize,
    signal: u32,
) -> Result<(usize, Option<Witness>)> {
    let inst = mech.instance();
    let (n, k) = (inst.n(), inst.k());
    let truthful = consistent_strategy(signal);
    let mut points: BTreeMap<DecisionPoint, Vec<(SignalProfile, Money)>> = BTreeMap::new();
    for rest in profiles(n - 1, k) {
        let mut s = rest.0;
        s.insert(bidder, signal);
        let truth = SignalProfile::new(s);
        let (u, events) = play(mech, &truth, bidder, &truthful, coin)?;
        for (e, ev) in events.iter().enumerate().filter(|(_, ev)| ev.bidder == bidder) {
            points
                .entry((events[..e].to_vec(), ev.level))
                .or_default()
                .push((truth.clone(), u.clone()));
        }
    }
    let checked = points.len();
    for ((history, level), consistent) in points {
        let worst = consistent.iter().map(|(_, u)| u).min().expect("non-empty");
        let from = history.len();
        let deviations: Vec<Option<u32>> = if level <= signal {
            vec![Some(level)]
        } else {
            (level + 1..k).map(Some).chain([None]).collect()
        };
        for exit_at in deviations {
            let dev = ScriptedStrategy {
                signal,
                from,
                exit_at,
            };
            for (truth, _) in &consistent {
                let (u, _) = play(mech, truth, bidder, &dev, coin)?;
                if &u > worst {
                    return Ok((
                        checked,
                        Some(Witness {
                            profile: truth.clone(),
                            bidder: Some(bidder),
                            deviation: Some(describe(from, exit_at)),
                            coin: Some(coin.clone()),
                            detail: format!(
                                "at level {level}: deviation utility {} > worst truthful {}",
                                format_money(&u),
                                format_money(worst)
                            ),
                        }),
                    ));
                }
            }
        }
    }
    Ok((checked, None))
}

pub fn check_oxp(mech: &dyn Mechanism, budgets: &Budgets) -> Result<Report> {
    if !mech.has_clock() {
        return Err(Error::InvalidInput(format!("{} has no clock implementation", mech.label())));
    }
    let inst = mech.instance();
    budgets.check_oxp_size(inst)?;
    let space = budgets.coin_space(mech, 1)?;
    let units: Vec<(usize, usize, u32)> = (0..space.coins.len())
        .flat_map(|c| (0..inst.n()).flat_map(move |b| (0..inst.k()).map(move |v| (c, b, v))))
        .collect();
    let results: Vec<(usize, Option<Witness>)> = units
        .par_iter()
        .map(|&(c, b, v)| unit(mech, &space.coins[c], b, v))
        .collect::<Result<_>>()?;
    let points: usize = results.iter().map(|(p, _)| p).sum();
    let found = results.into_iter().find_map(|(_, w)| w);
    Ok(Report::new(Check::Oxp, mech, format!("decision_points={points}"), found))
}

pub(super) fn replay(mech: &dyn Mechanism, w: &Witness, budgets: &Budgets) -> Result<Option<Witness>> {
    budgets.check_oxp_size(mech.instance())?;
    let (Some(bidder), Some(coin)) = (w.bidder, w.coin.as_ref()) else {
        return Err(Error::InvalidInput("witness needs a bidder and a coin".into()));
    };
    unit(mech, coin, bidder, w.profile.get(bidder)).map(|(_, w)| w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{Auction, MechanismKind};
    use crate::model::{Instance, ValuationModel};
    use crate::money::int;
    use crate::outcome::Pricing;
    use num_traits::Zero;

    fn e1() -> Instance {
        Instance::new(
            2,
            2,
            vec![vec![0, 1]],
            ValuationModel::BinarySymmetric {
                tables: vec![vec![int(0), int(0), int(10)], vec![int(1), int(1), int(1)]],
            },
        )
        .unwrap()
    }

    fn e3() -> Instance {
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
    }

    #[test]
    fn e1_and_e3_pass() {
        let b = Budgets::default();
        for pricing in [Pricing::Welfare, Pricing::Revenue] {
            let a = Auction::new(e1(), MechanismKind::Binary, pricing).unwrap();
            assert!(check_oxp(&a, &b).unwrap().passed);
            let a = Auction::new(e3(), MechanismKind::Kary, pricing).unwrap();
            assert!(check_oxp(&a, &b).unwrap().passed);
        }
    }

    #[test]
    fn immediate_exit_with_signal_zero_earns_nothing() {
        let a = Auction::new(e3(), MechanismKind::Kary, Pricing::Welfare).unwrap();
        let quit = ScriptedStrategy {
            signal: 0,
            from: 0,
            exit_at: Some(1),
        };
        for coin in a.coin_axes().enumerate() {
            for other in 0..3 {
                let truth = SignalProfile::new(vec![0, other]);
                let (u, _) = play(&a, &truth, 0, &quit, &coin).unwrap();
                assert!(u.is_zero());
            }
        }
    }

    #[test]
    fn fixtures_have_no_clock() {
        let a = Auction::new(e1(), MechanismKind::FixtureOvercharge, Pricing::Welfare).unwrap();
        assert!(check_oxp(&a, &Budgets::default()).is_err());
    }

    #[test]
    fn out_of_budget_is_a_limit() {
        let inst = Instance::new(
            4,
            2,
            vec![vec![0, 1, 2, 3]],
            ValuationModel::BinarySymmetric {
                tables: vec![vec![int(0); 5]; 4],
            },
        )
        .unwrap();
        let a = Auction::new(inst, MechanismKind::Binary, Pricing::Welfare).unwrap();
        assert!(matches!(check_oxp(&a, &Budgets::default()), Err(Error::ResourceLimit(_))));
    }
}
