//! A uniform interface over every mechanism, used by the verification
//! harness and the CLI.

use std::fmt;
use std::str::FromStr;

use crate::binary_auction::check_binary;
use crate::clock::{run_clock_indexed, ClockTranscript, Strategy};
use crate::coins::{CoinAxes, CoinRealization};
use crate::discovery::{run_discovery, DirectSource};
use crate::error::{Error, Result};
use crate::general_auction::{
    build_allocation_table_with_budget, grid_size, run_general_with, AllocationTable,
    DEFAULT_MAX_PROFILES,
};
use crate::kary_auction::check_kary;
use crate::model::{value, Instance, QualityIndex, SignalProfile};
use crate::money::{lcm_upto, one};
use crate::outcome::{Outcome, Pricing, Transcript};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismKind {
    Binary,
    BinaryGrouped,
    Kary,
    KaryGrouped,
    General,
    /// Charges the winner her value at the reports plus one.
    FixtureOvercharge,
    /// Charges the winner her value at the reports.
    FixtureFirstPrice,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 7] = [
        MechanismKind::Binary,
        MechanismKind::BinaryGrouped,
        MechanismKind::Kary,
        MechanismKind::KaryGrouped,
        MechanismKind::General,
        MechanismKind::FixtureOvercharge,
        MechanismKind::FixtureFirstPrice,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MechanismKind::Binary => "binary",
            MechanismKind::BinaryGrouped => "binary-grouped",
            MechanismKind::Kary => "kary",
            MechanismKind::KaryGrouped => "kary-grouped",
            MechanismKind::General => "general",
            MechanismKind::FixtureOvercharge => "fixture-overcharge",
            MechanismKind::FixtureFirstPrice => "fixture-first-price",
        }
    }

    /// Runs on the discovery engine and has a clock implementation.
    pub fn has_clock(&self) -> bool {
        matches!(
            self,
            MechanismKind::Binary
                | MechanismKind::BinaryGrouped
                | MechanismKind::Kary
                | MechanismKind::KaryGrouped
        )
    }

    fn grouped(&self) -> bool {
        !matches!(
            self,
            MechanismKind::Binary | MechanismKind::Kary | MechanismKind::General
        )
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown mechanism {s:?}")))
    }
}

/// A mechanism fixed to one instance and pricing mode: a deterministic map
/// from reports and coins to an outcome.
pub trait Mechanism: Sync {
    fn instance(&self) -> &Instance;
    fn label(&self) -> String;
    fn pricing(&self) -> Pricing;
    fn coin_axes(&self) -> CoinAxes;
    fn run(&self, reports: &SignalProfile, coins: &CoinRealization) -> Result<Outcome>;

    /// Like [`run`](Mechanism::run), plus the discovery transcript when the
    /// mechanism keeps one.
    fn run_traced(
        &self,
        reports: &SignalProfile,
        coins: &CoinRealization,
    ) -> Result<(Outcome, Option<Transcript>)> {
        self.run(reports, coins).map(|o| (o, None))
    }

    fn run_clock(
        &self,
        _strategies: &[&dyn Strategy],
        _coins: &CoinRealization,
    ) -> Result<(Outcome, ClockTranscript)> {
        Err(Error::InvalidInput(format!("{} has no clock implementation", self.label())))
    }

    fn has_clock(&self) -> bool {
        false
    }

    /// Whether `coins.group` selects a group to run in.
    fn grouped(&self) -> bool {
        false
    }

    fn allocation_table(&self) -> Option<&AllocationTable> {
        None
    }
}

#[derive(Debug)]
enum Prepared {
    Index(QualityIndex),
    Table(AllocationTable),
}

#[derive(Debug)]
pub struct Auction {
    kind: MechanismKind,
    pricing: Pricing,
    inst: Instance,
    prepared: Prepared,
}

impl Auction {
    pub fn new(inst: Instance, kind: MechanismKind, pricing: Pricing) -> Result<Self> {
        Self::with_budget(inst, kind, pricing, DEFAULT_MAX_PROFILES)
    }

    /// `max_profiles` bounds the general mechanism's table.
    pub fn with_budget(
        inst: Instance,
        kind: MechanismKind,
        pricing: Pricing,
        max_profiles: u64,
    ) -> Result<Self> {
        let prepared = match kind {
            MechanismKind::Binary | MechanismKind::BinaryGrouped => {
                check_binary(&inst, kind.grouped())?;
                Prepared::Index(QualityIndex::build(&inst)?)
            }
            MechanismKind::General => {
                Prepared::Table(build_allocation_table_with_budget(&inst, max_profiles)?)
            }
            _ => {
                check_kary(&inst, kind.grouped())?;
                Prepared::Index(QualityIndex::build(&inst)?)
            }
        };
        Ok(Self {
            kind,
            pricing,
            inst,
            prepared,
        })
    }

    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    pub fn table(&self) -> Option<&AllocationTable> {
        match &self.prepared {
            Prepared::Table(t) => Some(t),
            Prepared::Index(_) => None,
        }
    }
}

impl Mechanism for Auction {
    fn instance(&self) -> &Instance {
        &self.inst
    }

    fn label(&self) -> String {
        self.kind.name().to_string()
    }

    fn pricing(&self) -> Pricing {
        self.pricing
    }

    fn coin_axes(&self) -> CoinAxes {
        let n = self.inst.n();
        let k = self.inst.k();
        if self.kind == MechanismKind::General {
            return CoinAxes {
                permute: 0,
                identity_len: n,
                residues: 1,
                groups: 1,
                grid: grid_size(&self.inst, self.pricing),
            };
        }
        CoinAxes {
            permute: n,
            identity_len: n,
            residues: k - 1,
            groups: if self.kind.grouped() {
                self.inst.num_groups()
            } else {
                1
            },
            grid: match self.pricing {
                Pricing::Welfare => 1,
                Pricing::Revenue => lcm_upto(k),
            },
        }
    }

    fn run(&self, reports: &SignalProfile, coins: &CoinRealization) -> Result<Outcome> {
        self.run_traced(reports, coins).map(|(o, _)| o)
    }

    fn run_traced(
        &self,
        reports: &SignalProfile,
        coins: &CoinRealization,
    ) -> Result<(Outcome, Option<Transcript>)> {
        self.inst.check_profile(reports)?;
        match &self.prepared {
            Prepared::Table(t) => {
                run_general_with(t, &self.inst, reports, coins, self.pricing).map(|o| (o, None))
            }
            Prepared::Index(index) => {
                let (mut o, t) = run_discovery(
                    &self.inst,
                    index,
                    coins,
                    self.pricing,
                    self.kind.grouped(),
                    &mut DirectSource { reports },
                )?;
                if let Some(w) = o.winner {
                    match self.kind {
                        MechanismKind::FixtureOvercharge => {
                            o.price = value(w, reports, &self.inst)? + one()
                        }
                        MechanismKind::FixtureFirstPrice => o.price = value(w, reports, &self.inst)?,
                        _ => {}
                    }
                }
                Ok((o, Some(t)))
            }
        }
    }

    fn run_clock(
        &self,
        strategies: &[&dyn Strategy],
        coins: &CoinRealization,
    ) -> Result<(Outcome, ClockTranscript)> {
        match &self.prepared {
            Prepared::Index(index) if self.kind.has_clock() => {
                run_clock_indexed(&self.inst, index, self.kind, strategies, coins, self.pricing)
            }
            _ => Err(Error::InvalidInput(format!(
                "{} has no clock implementation",
                self.kind
            ))),
        }
    }

    fn has_clock(&self) -> bool {
        self.kind.has_clock()
    }

    fn grouped(&self) -> bool {
        self.kind.grouped()
    }

    fn allocation_table(&self) -> Option<&AllocationTable> {
        self.table()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ValuationModel;
    use crate::money::int;

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

    #[test]
    fn names_round_trip() {
        for k in MechanismKind::ALL {
            assert_eq!(k.name().parse::<MechanismKind>().unwrap(), k);
        }
        assert!("vcg".parse::<MechanismKind>().is_err());
    }

    #[test]
    fn coin_axes_collapse() {
        let a = Auction::new(e1(), MechanismKind::Binary, Pricing::Welfare).unwrap();
        assert_eq!(a.coin_axes().size(), Some(2));
        let a = Auction::new(e1(), MechanismKind::Binary, Pricing::Revenue).unwrap();
        assert_eq!(a.coin_axes().size(), Some(4));
        let a = Auction::new(e1(), MechanismKind::General, Pricing::Welfare).unwrap();
        assert_eq!(a.coin_axes().size(), Some(2));
        let a = Auction::new(e1(), MechanismKind::General, Pricing::Revenue).unwrap();
        assert_eq!(a.coin_axes().size(), Some(4));
    }

    #[test]
    fn binary_rejects_k3() {
        let inst = Instance::new(
            1,
            3,
            vec![vec![0]],
            ValuationModel::SharedQuality {
                tables: vec![vec![int(0), int(1), int(2)]],
            },
        )
        .unwrap();
        assert!(Auction::new(inst.clone(), MechanismKind::Binary, Pricing::Welfare).is_err());
        assert!(Auction::new(inst, MechanismKind::Kary, Pricing::Welfare).is_ok());
        assert!(Auction::new(e1(), MechanismKind::Kary, Pricing::Welfare).is_ok());
    }

    #[test]
    fn overcharge_fixture_breaks_ir() {
        let a = Auction::new(e1(), MechanismKind::FixtureOvercharge, Pricing::Welfare).unwrap();
        let s: SignalProfile = "1,1".parse().unwrap();
        let o = a.run(&s, &CoinRealization::identity(2)).unwrap();
        let w = o.winner.unwrap();
        assert!(o.price > value(w, &s, a.instance()).unwrap());
    }
}
