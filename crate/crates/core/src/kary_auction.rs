//! Signal discovery auction for `k` signal values over a shared quality,
//! and its group wrapper.

use crate::coins::CoinRealization;
use crate::discovery::{run_discovery, DirectSource};
use crate::error::{Error, Result};
use crate::model::{Instance, QualityIndex, SignalProfile};
use crate::outcome::{Outcome, Pricing, Transcript};

pub use crate::discovery::residue_set;

pub fn check_kary(inst: &Instance, grouped: bool) -> Result<()> {
    if !inst.is_quality_determined() {
        return Err(Error::InvalidInput(
            "k-ary auction needs values that depend on quality only".into(),
        ));
    }
    if !grouped && inst.num_groups() != 1 {
        return Err(Error::InvalidInput(
            "k-ary auction needs a single group; use kary-grouped".into(),
        ));
    }
    Ok(())
}

pub fn run_kary(
    inst: &Instance,
    reports: &SignalProfile,
    coins: &CoinRealization,
    pricing: Pricing,
) -> Result<(Outcome, Transcript)> {
    check_kary(inst, false)?;
    inst.check_profile(reports)?;
    let index = QualityIndex::build(inst)?;
    run_discovery(inst, &index, coins, pricing, false, &mut DirectSource { reports })
}

/// The residue and interval act on the picked group's coordinate only; the
/// other coordinates are fixed at the signals read up front.
pub fn run_kary_grouped(
    inst: &Instance,
    reports: &SignalProfile,
    coins: &CoinRealization,
    pricing: Pricing,
) -> Result<(Outcome, Transcript)> {
    check_kary(inst, true)?;
    inst.check_profile(reports)?;
    let index = QualityIndex::build(inst)?;
    run_discovery(inst, &index, coins, pricing, true, &mut DirectSource { reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary_auction::run_binary;
    use crate::model::{profiles, ValuationModel};
    use crate::money::{int, ratio, Money};
    use crate::outcome::{EndReason, EventKind};
    use num_traits::Zero;

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

    fn coin(order: Vec<usize>, residue: u32) -> CoinRealization {
        CoinRealization {
            order,
            residue,
            group: 0,
            grid: 0,
        }
    }

    fn p(s: &str) -> SignalProfile {
        s.parse().unwrap()
    }

    #[test]
    fn e3_residue_zero() {
        let (o, t) = run_kary(&e3(), &p("2,2"), &coin(vec![0, 1], 0), Pricing::Welfare).unwrap();
        assert_eq!(o.winner, Some(1));
        assert_eq!(o.price, int(2));
        assert_eq!((t.events[0].q_min, t.events[0].q_max), (2, 4));

        let (o, _) = run_kary(&e3(), &p("2,2"), &coin(vec![1, 0], 0), Pricing::Welfare).unwrap();
        assert_eq!(o.winner, Some(0));
        assert_eq!(o.price, int(9));
    }

    #[test]
    fn e3_residue_one_empties_a() {
        let (o, t) = run_kary(&e3(), &p("2,2"), &coin(vec![1, 0], 1), Pricing::Welfare).unwrap();
        assert_eq!(o.winner, None);
        let last = t.events.last().unwrap();
        assert_eq!(last.kind, EventKind::End(EndReason::AEmpty));
        assert_eq!((last.q_min, last.q_max), (4, 4));
    }

    #[test]
    fn e3_expected_welfare_by_hand() {
        let inst = e3();
        let truth = p("2,2");
        let mut total = Money::zero();
        for order in [vec![0, 1], vec![1, 0]] {
            for m in 0..2 {
                let (o, _) = run_kary(&inst, &truth, &coin(order.clone(), m), Pricing::Welfare).unwrap();
                if let Some(w) = o.winner {
                    total += crate::model::value(w, &truth, &inst).unwrap();
                }
            }
        }
        assert_eq!(total / int(4), ratio(13, 4));
    }

    #[test]
    fn k2_matches_binary() {
        let inst = Instance::new(
            3,
            2,
            vec![vec![0, 1, 2]],
            ValuationModel::BinarySymmetric {
                tables: vec![
                    vec![int(0), int(1), int(3), int(9)],
                    vec![int(1), int(2), int(2), int(4)],
                    vec![int(2), int(2), int(2), int(2)],
                ],
            },
        )
        .unwrap();
        for order in [vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]] {
            for s in profiles(3, 2) {
                for pricing in [Pricing::Welfare, Pricing::Revenue] {
                    let c = coin(order.clone(), 0);
                    assert_eq!(
                        run_kary(&inst, &s, &c, pricing).unwrap(),
                        run_binary(&inst, &s, &c, pricing).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn grouped_single_group_matches_plain() {
        let inst = e3();
        for order in [vec![0, 1], vec![1, 0]] {
            for m in 0..2 {
                for s in profiles(2, 3) {
                    let c = coin(order.clone(), m);
                    assert_eq!(
                        run_kary(&inst, &s, &c, Pricing::Welfare).unwrap(),
                        run_kary_grouped(&inst, &s, &c, Pricing::Welfare).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn bad_residue_rejected() {
        assert!(run_kary(&e3(), &p("0,0"), &coin(vec![0, 1], 2), Pricing::Welfare).is_err());
    }
}
