//! Signal discovery auction for binary signals, and its group wrapper.

use crate::coins::CoinRealization;
use crate::discovery::{run_discovery, DirectSource};
use crate::error::{Error, Result};
use crate::model::{Instance, QualityIndex, SignalProfile};
use crate::outcome::{Outcome, Pricing, Transcript};

pub fn check_binary(inst: &Instance, grouped: bool) -> Result<()> {
    if inst.k() != 2 {
        return Err(Error::InvalidInput(format!(
            "binary auction needs k = 2, instance has k = {}",
            inst.k()
        )));
    }
    if !grouped && inst.num_groups() != 1 {
        return Err(Error::InvalidInput(
            "binary auction needs a single group; use binary-grouped".into(),
        ));
    }
    Ok(())
}

pub fn run_binary(
    inst: &Instance,
    reports: &SignalProfile,
    coins: &CoinRealization,
    pricing: Pricing,
) -> Result<(Outcome, Transcript)> {
    check_binary(inst, false)?;
    inst.check_profile(reports)?;
    let index = QualityIndex::build(inst)?;
    run_discovery(inst, &index, coins, pricing, false, &mut DirectSource { reports })
}

/// Picks `coins.group`, reads every other group's signals, then runs the
/// binary auction inside the picked group.
pub fn run_binary_grouped(
    inst: &Instance,
    reports: &SignalProfile,
    coins: &CoinRealization,
    pricing: Pricing,
) -> Result<(Outcome, Transcript)> {
    check_binary(inst, true)?;
    inst.check_profile(reports)?;
    let index = QualityIndex::build(inst)?;
    run_discovery(inst, &index, coins, pricing, true, &mut DirectSource { reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{quality_vectors, ValuationModel};
    use crate::money::int;
    use crate::outcome::{EndReason, EventKind};
    use std::collections::BTreeMap;

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

    fn coin(order: Vec<usize>) -> CoinRealization {
        CoinRealization {
            order,
            residue: 0,
            group: 0,
            grid: 0,
        }
    }

    fn p(s: &str) -> SignalProfile {
        s.parse().unwrap()
    }

    #[test]
    fn e1_first_bidder_sampled_first() {
        let (o, t) = run_binary(&e1(), &p("1,1"), &coin(vec![0, 1]), Pricing::Welfare).unwrap();
        assert_eq!(o.winner, Some(1));
        assert_eq!(o.price, int(1));
        assert_eq!(t.events[0].kind, EventKind::Costly);
        assert_eq!(t.events.last().unwrap().kind, EventKind::End(EndReason::Awarded));
    }

    #[test]
    fn e1_second_bidder_sampled_first() {
        let (o, _) = run_binary(&e1(), &p("1,1"), &coin(vec![1, 0]), Pricing::Welfare).unwrap();
        assert_eq!(o.winner, Some(0));
        assert_eq!(o.price, int(10));
    }

    #[test]
    fn single_bidder_wins_at_signal_zero_value() {
        let inst = Instance::new(
            1,
            2,
            vec![vec![0]],
            ValuationModel::BinarySymmetric {
                tables: vec![vec![int(3), int(7)]],
            },
        )
        .unwrap();
        let (o, t) = run_binary(&inst, &p("1"), &coin(vec![0]), Pricing::Welfare).unwrap();
        assert_eq!(o.winner, Some(0));
        assert_eq!(o.price, int(3));
        assert_eq!(t.events.len(), 1);
    }

    #[test]
    fn rejects_wrong_shape() {
        let inst = Instance::new(
            1,
            3,
            vec![vec![0]],
            ValuationModel::SharedQuality {
                tables: vec![vec![int(0), int(1), int(2)]],
            },
        )
        .unwrap();
        assert!(matches!(
            run_binary(&inst, &p("0"), &coin(vec![0]), Pricing::Welfare),
            Err(Error::InvalidInput(_))
        ));
    }

    fn two_singletons() -> Instance {
        // bidder 0 values the good only when bidder 1 is high; bidder 1 values 1 throughout
        let t0: BTreeMap<_, _> = quality_vectors(&[1, 1])
            .into_iter()
            .map(|q| {
                let v = int(if q.0[1] == 1 { 10 } else { 0 });
                (q, v)
            })
            .collect();
        let t1: BTreeMap<_, _> = quality_vectors(&[1, 1]).into_iter().map(|q| (q, int(1))).collect();
        Instance::new(
            2,
            2,
            vec![vec![0], vec![1]],
            ValuationModel::SharedQualityGrouped { tables: vec![t0, t1] },
        )
        .unwrap()
    }

    #[test]
    fn grouped_pick_of_optimal_group_wins() {
        let inst = two_singletons();
        let mut c = coin(vec![0, 1]);
        c.group = 0;
        let (o, t) = run_binary_grouped(&inst, &p("0,1"), &c, Pricing::Welfare).unwrap();
        assert_eq!(o.winner, Some(0));
        assert_eq!(o.price, int(10));
        assert_eq!(t.events[0].kind, EventKind::Learned);
    }

    #[test]
    fn grouped_pick_elsewhere_rejects_optimal() {
        let inst = two_singletons();
        let mut c = coin(vec![0, 1]);
        c.group = 1;
        let (o, _) = run_binary_grouped(&inst, &p("0,1"), &c, Pricing::Welfare).unwrap();
        assert_ne!(o.winner, Some(0));
    }

    #[test]
    fn grouped_with_one_group_matches_plain() {
        let inst = e1();
        for order in [vec![0, 1], vec![1, 0]] {
            for pricing in [Pricing::Welfare, Pricing::Revenue] {
                for grid in 0..2 {
                    let mut c = coin(order.clone());
                    c.grid = grid;
                    for s in crate::model::profiles(2, 2) {
                        assert_eq!(
                            run_binary(&inst, &s, &c, pricing).unwrap(),
                            run_binary_grouped(&inst, &s, &c, pricing).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn revenue_grid_picks_candidate() {
        // bidder 0 optimal at both remaining counts once bidder 1 is sampled
        let inst = Instance::new(
            2,
            2,
            vec![vec![0, 1]],
            ValuationModel::BinarySymmetric {
                tables: vec![vec![int(5), int(6), int(8)], vec![int(0), int(0), int(0)]],
            },
        )
        .unwrap();
        let mut c = coin(vec![1, 0]);
        let (lo, _) = run_binary(&inst, &p("1,0"), &c, Pricing::Revenue).unwrap();
        c.grid = 1;
        let (hi, _) = run_binary(&inst, &p("1,0"), &c, Pricing::Revenue).unwrap();
        assert_eq!(lo.price, int(5));
        assert_eq!(hi.price, int(6));
        assert_eq!(hi.winner, Some(0));
        // reporting low leaves her value at 5, below the higher price
        let (declined, _) = run_binary(&inst, &p("0,0"), &c, Pricing::Revenue).unwrap();
        assert_eq!(declined.winner, None);
        assert_eq!(lo.winner, Some(0));
    }
}
