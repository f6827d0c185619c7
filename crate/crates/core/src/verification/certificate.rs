//! Lower-bound certificates from monotonicity chains.
//!
//! If each designated bidder is optimal at her designated profile and that
//! profile reaches a common `s*` by raising her own signal only, then any
//! monotone allocation serving each of them with probability `p` serves all
//! of them at `s*` with probability `p`, so feasibility forces
//! `p ≤ 1/|designated|`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{optimal_bidder, BidderId, Instance, SignalProfile};
use crate::money::Money;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// Upper bound on `p`.
    pub bound: Money,
    pub s_star: SignalProfile,
    /// Per designated pair, the profiles from hers up to `s*`.
    pub chains: Vec<Vec<SignalProfile>>,
}

pub fn verify_lb_certificate(
    inst: &Instance,
    designated: &[(SignalProfile, BidderId)],
) -> Result<Certificate> {
    let invalid = |m: String| Err(Error::CertificateInvalid(m));
    if designated.is_empty() {
        return invalid("no designated pairs".into());
    }
    let mut seen = BTreeSet::new();
    for (s, b) in designated {
        inst.check_profile(s)?;
        if *b >= inst.n() {
            return invalid(format!("no bidder {b}"));
        }
        if !seen.insert(*b) {
            return invalid(format!("bidder {b} designated twice"));
        }
    }
    let s_star = SignalProfile::new(
        (0..inst.n())
            .map(|j| designated.iter().map(|(s, _)| s.get(j)).max().expect("non-empty"))
            .collect(),
    );
    let mut chains = Vec::with_capacity(designated.len());
    for (s, b) in designated {
        if let Some(j) = (0..inst.n()).find(|&j| j != *b && s.get(j) != s_star.get(j)) {
            return invalid(format!(
                "profile {s} of bidder {b} differs from s* = {s_star} in coordinate {j}"
            ));
        }
        let top = optimal_bidder(s, inst)?;
        if top != *b {
            return invalid(format!("bidder {b} is not optimal at {s}; bidder {top} is"));
        }
        chains.push((s.get(*b)..=s_star.get(*b)).map(|t| s.with(*b, t)).collect());
    }
    Ok(Certificate {
        bound: Money::new(1.into(), (designated.len() as i64).into()),
        s_star,
        chains,
    })
}

/// Reads `profile;bidder` lines; blank lines are skipped.
pub fn parse_designated(text: &str) -> Result<Vec<(SignalProfile, BidderId)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let syntax = |message: String| Error::Syntax {
                line: i + 1,
                column: 1,
                message,
            };
            let (p, b) = line
                .trim()
                .split_once(';')
                .ok_or_else(|| syntax("expected profile;bidder".into()))?;
            let profile = p.parse().map_err(|e: Error| syntax(e.to_string()))?;
            let bidder = b.parse().map_err(|_| syntax(format!("bad bidder {b:?}")))?;
            Ok((profile, bidder))
        })
        .collect()
}

pub fn write_designated(pairs: &[(SignalProfile, BidderId)]) -> String {
    pairs.iter().map(|(s, b)| format!("{s};{b}\n")).collect()
}
