//! Ascending signal clocks driving the discovery auctions.
//!
//! A discovered bidder sees her clock raised one level at a time from 1;
//! exiting at level `c` reveals signal `c − 1`, accepting through `k − 1`
//! reveals `k − 1`. The survivor's price is offered by raising her clock up
//! to the smallest level whose value covers it; any exit means no sale.

use std::fmt;

use crate::binary_auction::check_binary;
use crate::coins::CoinRealization;
use crate::discovery::{run_discovery, Offer, SignalSource};
use crate::error::{Error, Result};
use crate::kary_auction::check_kary;
use crate::mechanism::MechanismKind;
use crate::model::{BidderId, Instance, QualityIndex};
use crate::money::format_money;
use crate::outcome::{Outcome, Pricing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClockResponse {
    Accept,
    Exit,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClockEvent {
    pub bidder: BidderId,
    pub level: u32,
    pub response: ClockResponse,
}

impl fmt::Display for ClockEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.response {
            ClockResponse::Accept => "accept",
            ClockResponse::Exit => "exit",
        };
        write!(f, "CLOCK {} {} {r}", self.bidder, self.level)
    }
}

/// What a bidder sees when her clock is raised.
#[derive(Clone, Copy, Debug)]
pub struct ClockView<'a> {
    pub bidder: BidderId,
    pub level: u32,
    /// Every earlier clock event, in order.
    pub history: &'a [ClockEvent],
}

pub trait Strategy: Sync {
    fn respond(&self, view: &ClockView<'_>) -> std::result::Result<ClockResponse, String>;
}

/// Accepts level `c` iff `c ≤ signal`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConsistentStrategy {
    pub signal: u32,
}

pub fn consistent_strategy(signal: u32) -> ConsistentStrategy {
    ConsistentStrategy { signal }
}

impl Strategy for ConsistentStrategy {
    fn respond(&self, view: &ClockView<'_>) -> std::result::Result<ClockResponse, String> {
        Ok(if view.level <= self.signal {
            ClockResponse::Accept
        } else {
            ClockResponse::Exit
        })
    }
}

/// Bids consistently with `signal` until the history reaches `from` events,
/// then accepts every level below `exit_at` and exits there (`None`: never).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScriptedStrategy {
    pub signal: u32,
    pub from: usize,
    pub exit_at: Option<u32>,
}

impl Strategy for ScriptedStrategy {
    fn respond(&self, view: &ClockView<'_>) -> std::result::Result<ClockResponse, String> {
        if view.history.len() < self.from {
            return consistent_strategy(self.signal).respond(view);
        }
        Ok(match self.exit_at {
            Some(e) if view.level >= e => ClockResponse::Exit,
            _ => ClockResponse::Accept,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockTranscript {
    pub events: Vec<ClockEvent>,
    pub outcome: Outcome,
}

impl ClockTranscript {
    pub fn to_text(&self) -> String {
        let mut out: String = self.events.iter().map(|e| format!("{e}\n")).collect();
        match self.outcome.winner {
            Some(w) => out.push_str(&format!("RESULT {w} {}\n", format_money(&self.outcome.price))),
            None => out.push_str("RESULT - 0\n"),
        }
        out
    }
}

struct ClockSource<'a> {
    k: u32,
    strategies: &'a [&'a dyn Strategy],
    events: Vec<ClockEvent>,
}

impl ClockSource<'_> {
    fn ask(&mut self, bidder: BidderId, level: u32) -> Result<ClockResponse> {
        let view = ClockView {
            bidder,
            level,
            history: &self.events,
        };
        let response = self.strategies[bidder]
            .respond(&view)
            .map_err(|message| Error::Strategy { bidder, message })?;
        self.events.push(ClockEvent {
            bidder,
            level,
            response,
        });
        Ok(response)
    }
}

impl SignalSource for ClockSource<'_> {
    fn discover(&mut self, bidder: BidderId) -> Result<u32> {
        for level in 1..self.k {
            if self.ask(bidder, level)? == ClockResponse::Exit {
                return Ok(level - 1);
            }
        }
        Ok(self.k - 1)
    }

    fn offer(&mut self, offer: &Offer<'_>) -> Result<bool> {
        for level in 1..=offer.tau {
            if self.ask(offer.bidder, level)? == ClockResponse::Exit {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn grouped_flag(inst: &Instance, kind: MechanismKind) -> Result<bool> {
    match kind {
        MechanismKind::Binary => check_binary(inst, false).map(|_| false),
        MechanismKind::BinaryGrouped => check_binary(inst, true).map(|_| true),
        MechanismKind::Kary => check_kary(inst, false).map(|_| false),
        MechanismKind::KaryGrouped => check_kary(inst, true).map(|_| true),
        other => Err(Error::InvalidInput(format!("{other} has no clock implementation"))),
    }
}

pub fn run_clock(
    inst: &Instance,
    kind: MechanismKind,
    strategies: &[&dyn Strategy],
    coins: &CoinRealization,
    pricing: Pricing,
) -> Result<(Outcome, ClockTranscript)> {
    grouped_flag(inst, kind)?;
    let index = QualityIndex::build(inst)?;
    run_clock_indexed(inst, &index, kind, strategies, coins, pricing)
}

pub(crate) fn run_clock_indexed(
    inst: &Instance,
    index: &QualityIndex,
    kind: MechanismKind,
    strategies: &[&dyn Strategy],
    coins: &CoinRealization,
    pricing: Pricing,
) -> Result<(Outcome, ClockTranscript)> {
    let grouped = grouped_flag(inst, kind)?;
    if strategies.len() != inst.n() {
        return Err(Error::InvalidInput(format!(
            "{} strategies for {} bidders",
            strategies.len(),
            inst.n()
        )));
    }
    let mut src = ClockSource {
        k: inst.k(),
        strategies,
        events: Vec::new(),
    };
    let (outcome, _) = run_discovery(inst, index, coins, pricing, grouped, &mut src)?;
    let transcript = ClockTranscript {
        events: src.events,
        outcome: outcome.clone(),
    };
    Ok((outcome, transcript))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary_auction::run_binary;
    use crate::model::{SignalProfile, ValuationModel};
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

    fn view(level: u32) -> ClockView<'static> {
        ClockView {
            bidder: 0,
            level,
            history: &[],
        }
    }

    #[test]
    fn consistent_responses() {
        assert_eq!(consistent_strategy(0).respond(&view(1)), Ok(ClockResponse::Exit));
        assert_eq!(consistent_strategy(2).respond(&view(2)), Ok(ClockResponse::Accept));
        assert_eq!(consistent_strategy(1).respond(&view(1)), Ok(ClockResponse::Accept));
        assert_eq!(consistent_strategy(1).respond(&view(2)), Ok(ClockResponse::Exit));
    }

    #[test]
    fn e1_clock_matches_direct() {
        let inst = e1();
        let coins = CoinRealization {
            order: vec![1, 0],
            residue: 0,
            group: 0,
            grid: 0,
        };
        let (a, b) = (consistent_strategy(1), consistent_strategy(1));
        let strategies: Vec<&dyn Strategy> = vec![&a, &b];
        let (o, t) = run_clock(&inst, MechanismKind::Binary, &strategies, &coins, Pricing::Welfare).unwrap();
        assert_eq!(o.winner, Some(0));
        assert_eq!(o.price, int(10));
        let truth: SignalProfile = "1,1".parse().unwrap();
        assert_eq!(o, run_binary(&inst, &truth, &coins, Pricing::Welfare).unwrap().0);
        assert_eq!(t.to_text(), "CLOCK 1 1 accept\nCLOCK 0 1 accept\nRESULT 0 10\n");
    }

    #[test]
    fn early_exit_never_wins() {
        let inst = e1();
        let quitter = ScriptedStrategy {
            signal: 1,
            from: 0,
            exit_at: Some(1),
        };
        let other = consistent_strategy(1);
        for order in [vec![0, 1], vec![1, 0]] {
            let coins = CoinRealization {
                order,
                residue: 0,
                group: 0,
                grid: 0,
            };
            let strategies: Vec<&dyn Strategy> = vec![&quitter, &other];
            let (o, _) =
                run_clock(&inst, MechanismKind::Binary, &strategies, &coins, Pricing::Welfare).unwrap();
            assert_ne!(o.winner, Some(0));
        }
    }

    struct Broken;
    impl Strategy for Broken {
        fn respond(&self, _: &ClockView<'_>) -> std::result::Result<ClockResponse, String> {
            Err("no answer".into())
        }
    }

    #[test]
    fn strategy_failure_aborts() {
        let inst = e1();
        let ok = consistent_strategy(0);
        let strategies: Vec<&dyn Strategy> = vec![&Broken, &ok];
        let err = run_clock(
            &inst,
            MechanismKind::Binary,
            &strategies,
            &CoinRealization::identity(2),
            Pricing::Welfare,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Strategy { bidder: 0, .. }));
    }
}
