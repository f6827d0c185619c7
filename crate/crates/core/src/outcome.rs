use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::BidderId;
use crate::money::{format_money, Money};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pricing {
    Welfare,
    Revenue,
}

impl fmt::Display for Pricing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pricing::Welfare => "welfare",
            Pricing::Revenue => "revenue",
        })
    }
}

impl FromStr for Pricing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "welfare" => Ok(Pricing::Welfare),
            "revenue" => Ok(Pricing::Revenue),
            _ => Err(Error::InvalidInput(format!("unknown pricing mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub winner: Option<BidderId>,
    pub price: Money,
    pub pricing: Pricing,
}

impl Outcome {
    pub fn none(pricing: Pricing) -> Self {
        Self {
            winner: None,
            price: Money::zero(),
            pricing,
        }
    }

    pub fn award(winner: BidderId, price: Money, pricing: Pricing) -> Self {
        Self {
            winner: Some(winner),
            price,
            pricing,
        }
    }

    /// Price paid by `bidder` (zero unless she won).
    pub fn payment(&self, bidder: BidderId) -> Money {
        if self.winner == Some(bidder) {
            self.price.clone()
        } else {
            Money::zero()
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.winner {
            Some(w) => write!(f, "winner={w} price={}", format_money(&self.price)),
            None => write!(f, "winner=- price=0"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EndReason {
    Awarded,
    /// The survivor's report fell below the price.
    Declined,
    /// The survivor is optimal at no remaining candidate quality.
    NoCandidate,
    AEmpty,
}

impl EndReason {
    fn as_str(&self) -> &'static str {
        match self {
            EndReason::Awarded => "awarded",
            EndReason::Declined => "declined",
            EndReason::NoCandidate => "no-candidate",
            EndReason::AEmpty => "a-empty",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Out-of-group signal read before the group auction starts.
    Learned,
    Costly,
    Free,
    /// Removal from R*.
    Cleanup,
    End(EndReason),
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::Learned => f.write_str("learned"),
            EventKind::Costly => f.write_str("costly"),
            EventKind::Free => f.write_str("free"),
            EventKind::Cleanup => f.write_str("cleanup"),
            EventKind::End(r) => write!(f, "end:{}", r.as_str()),
        }
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "learned" => EventKind::Learned,
            "costly" => EventKind::Costly,
            "free" => EventKind::Free,
            "cleanup" => EventKind::Cleanup,
            "end:awarded" => EventKind::End(EndReason::Awarded),
            "end:declined" => EventKind::End(EndReason::Declined),
            "end:no-candidate" => EventKind::End(EndReason::NoCandidate),
            "end:a-empty" => EventKind::End(EndReason::AEmpty),
            _ => return Err(Error::InvalidInput(format!("unknown event kind {s:?}"))),
        })
    }
}

/// One transcript line. Bounds are those after the event, on the chosen
/// group's quality coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub kind: EventKind,
    pub bidder: Option<BidderId>,
    pub signal: Option<u32>,
    pub q_min: u32,
    pub q_max: u32,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        write!(
            f,
            "EVENT {} {} {} {} {}",
            self.kind,
            opt(self.bidder.map(|b| b.to_string())),
            opt(self.signal.map(|s| s.to_string())),
            self.q_min,
            self.q_max
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn push(&mut self, kind: EventKind, bidder: Option<BidderId>, signal: Option<u32>, bounds: (u32, u32)) {
        self.events.push(Event {
            kind,
            bidder,
            signal,
            q_min: bounds.0,
            q_max: bounds.1,
        });
    }

    pub fn to_text(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Syntax {
                line: i + 1,
                column: 1,
                message: msg.to_string(),
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 || f[0] != "EVENT" {
                return Err(bad("expected `EVENT kind bidder signal q_min q_max`"));
            }
            let opt = |s: &str| -> Result<Option<u64>> {
                if s == "-" {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad("bad integer field"))
                }
            };
            events.push(Event {
                kind: f[1].parse()?,
                bidder: opt(f[2])?.map(|b| b as usize),
                signal: opt(f[3])?.map(|s| s as u32),
                q_min: f[4].parse().map_err(|_| bad("bad q_min"))?,
                q_max: f[5].parse().map_err(|_| bad("bad q_max"))?,
            });
        }
        Ok(Self { events })
    }
}

/// Quantities replayed from a transcript.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TranscriptStats {
    pub max_rstar: usize,
    pub events: usize,
}

/// Replays `|A|` and `|R*|` through a transcript and checks the bookkeeping:
/// `|R*| ≤ 2` after every event, `q_max − q_min = step·|A|` after every event
/// of the group auction, and `truth ∈ [q_min, q_max]` when given.
pub fn check_transcript(
    t: &Transcript,
    step: u32,
    initial_active: usize,
    truth: Option<u32>,
) -> std::result::Result<TranscriptStats, String> {
    let mut active = initial_active as i64;
    let mut rstar: Vec<BidderId> = Vec::new();
    let mut stats = TranscriptStats::default();
    for (i, e) in t.events.iter().enumerate() {
        let at = |msg: String| format!("event {} ({e}): {msg}", i + 1);
        match e.kind {
            EventKind::Learned => {}
            EventKind::Costly => {
                active -= 1;
                rstar.push(e.bidder.ok_or_else(|| at("costly event without bidder".into()))?);
            }
            EventKind::Free => active -= 1,
            EventKind::Cleanup => {
                let b = e.bidder.ok_or_else(|| at("cleanup without bidder".into()))?;
                let pos = rstar
                    .iter()
                    .position(|&r| r == b)
                    .ok_or_else(|| at(format!("bidder {b} is not in R*")))?;
                rstar.remove(pos);
            }
            EventKind::End(_) => {}
        }
        if active < 0 {
            return Err(at("more removals than bidders".into()));
        }
        stats.max_rstar = stats.max_rstar.max(rstar.len());
        if rstar.len() > 2 {
            return Err(at(format!("|R*| = {}", rstar.len())));
        }
        if e.q_min > e.q_max {
            return Err(at("empty interval".into()));
        }
        if e.kind != EventKind::Learned && e.q_max - e.q_min != step * active as u32 {
            return Err(at(format!(
                "q_max − q_min = {} but (k−1)·|A| = {}",
                e.q_max - e.q_min,
                step as i64 * active
            )));
        }
        if let Some(q) = truth {
            if q < e.q_min || q > e.q_max {
                return Err(at(format!("true quality {q} outside bounds")));
            }
        }
    }
    stats.events = t.events.len();
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Transcript {
        let mut t = Transcript::default();
        t.push(EventKind::Costly, Some(0), Some(1), (1, 2));
        t.push(EventKind::End(EndReason::Awarded), Some(1), None, (1, 2));
        t
    }

    #[test]
    fn text_round_trip() {
        let t = sample();
        let text = t.to_text();
        assert_eq!(text, "EVENT costly 0 1 1 2\nEVENT end:awarded 1 - 1 2\n");
        assert_eq!(Transcript::parse(&text).unwrap(), t);
        assert!(Transcript::parse("EVENT costly 0 1 1").is_err());
    }

    #[test]
    fn checker_accepts_valid_and_rejects_rstar_three() {
        assert_eq!(check_transcript(&sample(), 1, 2, Some(2)).unwrap().max_rstar, 1);
        let mut t = Transcript::default();
        t.push(EventKind::Costly, Some(0), Some(0), (0, 3));
        t.push(EventKind::Costly, Some(1), Some(0), (0, 2));
        t.push(EventKind::Costly, Some(2), Some(0), (0, 1));
        let err = check_transcript(&t, 1, 4, None).unwrap_err();
        assert!(err.contains("|R*| = 3"), "{err}");
    }

    #[test]
    fn checker_rejects_broken_interval_law() {
        let mut t = Transcript::default();
        t.push(EventKind::Costly, Some(0), Some(1), (1, 3));
        assert!(check_transcript(&t, 1, 2, None).is_err());
    }

    #[test]
    fn checker_rejects_truth_outside() {
        assert!(check_transcript(&sample(), 1, 2, Some(0)).is_err());
    }
}
