//! Exact checks over full coin spaces and profile spaces.
//!
//! Every check returns a [`Report`]. A failing report carries a [`Witness`]
//! naming the smallest failing unit in enumeration order, and
//! [`replay`] recomputes that unit from the witness alone.

mod certificate;
mod expectation;
mod incentives;
mod invariants;
mod oxp;

use std::fmt;

use crate::coins::CoinRealization;
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{profile_count, profiles, BidderId, Instance, SignalProfile};
use crate::money::{format_money, Money};
use crate::outcome::{Outcome, Pricing};

pub use certificate::{parse_designated, verify_lb_certificate, write_designated, Certificate};
pub use expectation::{
    approximation_report, check_approximation, expectation_table, expected_outcome, ratio_over,
    worst_case_ratio, Bound, Estimate, EvalMode, Evaluation, Expectation, Objective, RatioReport,
};
pub use incentives::{check_expost_ic, check_universal_icir};
pub use invariants::{
    check_allocation_table, check_clock_equivalence, check_transcript_cases,
    check_transcript_invariants, TranscriptCase,
};
pub use oxp::check_oxp;

/// Size limits for exact enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub max_binary_n: usize,
    pub max_kary_n: usize,
    pub max_kary_k: u32,
    /// Limit on `k^n` for anything enumerating profiles.
    pub max_profiles: u64,
    /// Limit on mechanism runs (coins × profiles) for one check.
    pub max_runs: u64,
    pub oxp_max_n: usize,
    pub oxp_max_k: u32,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_binary_n: 6,
            max_kary_n: 5,
            max_kary_k: 4,
            max_profiles: 1 << 20,
            max_runs: 200_000_000,
            oxp_max_n: 3,
            oxp_max_k: 3,
        }
    }
}

impl Budgets {
    /// Enumerates the coin space after checking it fits, together with
    /// `runs_per_coin` mechanism calls for each realization.
    pub fn coin_space(&self, mech: &dyn Mechanism, runs_per_coin: u64) -> Result<CoinSpace> {
        let inst = mech.instance();
        let axes = mech.coin_axes();
        if axes.permute > 0 {
            let (n, k) = (inst.n(), inst.k());
            if k == 2 && n > self.max_binary_n {
                return Err(limit(format!("n = {n} exceeds the binary cap {}", self.max_binary_n)));
            }
            if k > 2 && (n > self.max_kary_n || k > self.max_kary_k) {
                return Err(limit(format!(
                    "n = {n}, k = {k} exceed the k-ary caps n ≤ {}, k ≤ {}",
                    self.max_kary_n, self.max_kary_k
                )));
            }
        }
        let size = axes
            .size()
            .filter(|s| s.checked_mul(runs_per_coin).is_some_and(|r| r <= self.max_runs))
            .ok_or_else(|| limit(format!("coin space too large for {runs_per_coin} runs per coin")))?;
        Ok(CoinSpace {
            coins: axes.enumerate(),
            probability: Money::new(1.into(), (size as i64).into()),
        })
    }

    /// Every profile of `inst`, if `k^n` fits.
    pub fn profiles(&self, inst: &Instance) -> Result<Vec<SignalProfile>> {
        match profile_count(inst.n(), inst.k()) {
            Some(c) if c <= self.max_profiles => Ok(profiles(inst.n(), inst.k()).collect()),
            _ => Err(limit(format!("k^n = {}^{} profiles", inst.k(), inst.n()))),
        }
    }

    pub fn check_oxp_size(&self, inst: &Instance) -> Result<()> {
        if inst.n() > self.oxp_max_n || inst.k() > self.oxp_max_k {
            return Err(limit(format!(
                "OXP needs n ≤ {} and k ≤ {}, got n = {}, k = {}",
                self.oxp_max_n,
                self.oxp_max_k,
                inst.n(),
                inst.k()
            )));
        }
        Ok(())
    }
}

fn limit(msg: String) -> Error {
    Error::ResourceLimit(msg)
}

/// A full coin space; each realization has the same probability.
#[derive(Clone, Debug)]
pub struct CoinSpace {
    pub coins: Vec<CoinRealization>,
    pub probability: Money,
}

impl CoinSpace {
    pub fn total_probability(&self) -> Money {
        &self.probability * Money::from_integer((self.coins.len() as i64).into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcMode {
    Universal,
    Expectation,
}

impl std::str::FromStr for IcMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "universal" => Ok(IcMode::Universal),
            "expectation" => Ok(IcMode::Expectation),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    UniversalIcir,
    ExpostIc,
    Oxp,
    Rstar,
    Equivalence,
    Feasibility,
    Approximation { bound: Bound, factor: Money },
    Certificate,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::UniversalIcir => f.write_str("icir-universal"),
            Check::ExpostIc => f.write_str("icir-expectation"),
            Check::Oxp => f.write_str("oxp"),
            Check::Rstar => f.write_str("rstar"),
            Check::Equivalence => f.write_str("equivalence"),
            Check::Feasibility => f.write_str("feasibility"),
            Check::Approximation { bound, factor } => {
                write!(f, "approx-{bound}/{}", format_money(factor))
            }
            Check::Certificate => f.write_str("certificate"),
        }
    }
}

/// The failing unit of a check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// True signal profile.
    pub profile: SignalProfile,
    pub bidder: Option<BidderId>,
    /// The deviation that gained, when the failure is one.
    pub deviation: Option<String>,
    pub coin: Option<CoinRealization>,
    pub detail: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "profile={}", self.profile)?;
        if let Some(b) = self.bidder {
            write!(f, " bidder={b}")?;
        }
        if let Some(d) = &self.deviation {
            write!(f, " deviation={d}")?;
        }
        if let Some(c) = &self.coin {
            write!(f, " coin=[{c}]")?;
        }
        write!(f, " {}", self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub check: Check,
    pub instance: String,
    pub mechanism: String,
    pub pricing: Option<Pricing>,
    pub passed: bool,
    /// The check's headline number, e.g. the worst ratio or max |R*|.
    pub quantity: String,
    pub witness: Option<Witness>,
}

impl Report {
    fn new(check: Check, mech: &dyn Mechanism, quantity: String, witness: Option<Witness>) -> Self {
        Self {
            check,
            instance: mech.instance().label(),
            mechanism: mech.label(),
            pricing: Some(mech.pricing()),
            passed: witness.is_none(),
            quantity,
            witness,
        }
    }

    pub const CSV_HEADER: [&'static str; 7] =
        ["check", "instance", "mechanism", "pricing", "result", "quantity", "witness"];

    pub fn csv_record(&self) -> [String; 7] {
        [
            self.check.to_string(),
            self.instance.clone(),
            self.mechanism.clone(),
            self.pricing.map_or("-".into(), |p| p.to_string()),
            if self.passed { "pass" } else { "fail" }.into(),
            self.quantity.clone(),
            self.witness.as_ref().map_or(String::new(), |w| w.to_string()),
        ]
    }
}

/// Renders reports as CSV, sorted by their record fields.
pub fn reports_to_csv(reports: &[Report]) -> String {
    let mut rows: Vec<[String; 7]> = reports.iter().map(Report::csv_record).collect();
    rows.sort();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(Report::CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Recomputes the unit named by a failing report's witness. Returns the
/// witness that unit produces now, `None` if it passes.
pub fn replay(mech: &dyn Mechanism, report: &Report, budgets: &Budgets) -> Result<Option<Witness>> {
    let w = report
        .witness
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("report has no witness".into()))?;
    match &report.check {
        Check::UniversalIcir => incentives::replay_universal(mech, w),
        Check::ExpostIc => incentives::replay_expectation(mech, w, budgets),
        Check::Oxp => oxp::replay(mech, w, budgets),
        Check::Rstar => invariants::replay_rstar(mech, w),
        Check::Equivalence => invariants::replay_equivalence(mech, w),
        Check::Feasibility => {
            let table = mech
                .allocation_table()
                .ok_or_else(|| Error::InvalidInput("mechanism has no allocation table".into()))?;
            invariants::replay_table(table, mech.instance(), w)
        }
        Check::Approximation { bound, factor } => {
            expectation::replay_approximation(mech, *bound, factor, w, budgets)
        }
        Check::Certificate => Err(Error::InvalidInput(
            "certificates are checked whole; rerun verify_lb_certificate".into(),
        )),
    }
}

/// `bidder`'s utility under `outcome` when her true value is `value`.
pub fn utility(outcome: &Outcome, bidder: BidderId, value: &Money) -> Money {
    match outcome.winner {
        Some(w) if w == bidder => value - &outcome.price,
        _ => Money::from_integer(0.into()),
    }
}

/// Values of every bidder at every profile, indexed like [`profiles`].
pub(crate) fn value_grid(inst: &Instance, profiles: &[SignalProfile]) -> Result<Vec<Vec<Money>>> {
    profiles.iter().map(|s| inst.values(s)).collect()
}
