//! Expected welfare, revenue and probability of serving the optimal bidder.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Budgets, Check, Report, Witness};
use crate::coins::CoinRealization;
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{argmax_lowest, SignalProfile};
use crate::money::{format_money, to_f64, Money};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Welfare,
    Revenue,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Welfare => "welfare",
            Objective::Revenue => "revenue",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "welfare" => Ok(Objective::Welfare),
            "revenue" => Ok(Objective::Revenue),
            _ => Err(Error::InvalidInput(format!("unknown objective {s:?}"))),
        }
    }
}

/// What an approximation check bounds from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// `P[winner = optimal bidder] ≥ 1/factor`.
    POptimal,
    /// `E[objective] ≥ OPT/factor`.
    Objective(Objective),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::POptimal => f.write_str("popt"),
            Bound::Objective(o) => write!(f, "{o}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Exact expectations at one truthful profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub optimum: Money,
    pub welfare: Money,
    pub revenue: Money,
    pub p_optimal: Money,
}

impl Expectation {
    pub fn objective(&self, o: Objective) -> &Money {
        match o {
            Objective::Welfare => &self.welfare,
            Objective::Revenue => &self.revenue,
        }
    }
}

/// Sample means and their standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub samples: u64,
    pub welfare: f64,
    pub welfare_se: f64,
    pub revenue: f64,
    pub revenue_se: f64,
    pub p_optimal: f64,
    pub p_optimal_se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evaluation {
    Exact(Expectation),
    Sampled { optimum: Money, estimate: Estimate },
}

pub(super) fn exact_at(
    mech: &dyn Mechanism,
    s: &SignalProfile,
    coins: &[CoinRealization],
) -> Result<Expectation> {
    let vals = mech.instance().values(s)?;
    let best = argmax_lowest(&vals).ok_or_else(|| Error::InvalidInput("no bidders".into()))?;
    let (mut welfare, mut revenue, mut hits) = (Money::zero(), Money::zero(), 0i64);
    for coin in coins {
        let o = mech.run(s, coin)?;
        if let Some(w) = o.winner {
            welfare += &vals[w];
            revenue += o.price;
            hits += (w == best) as i64;
        }
    }
    let count = Money::from_integer((coins.len() as i64).into());
    Ok(Expectation {
        optimum: vals[best].clone(),
        welfare: welfare / &count,
        revenue: revenue / &count,
        p_optimal: Money::from_integer(hits.into()) / count,
    })
}

fn exact_coins(mech: &dyn Mechanism, budgets: &Budgets, runs: u64) -> Result<Vec<CoinRealization>> {
    budgets
        .coin_space(mech, runs)
        .map(|s| s.coins)
        .map_err(|e| match e {
            Error::ResourceLimit(m) => {
                Error::ResourceLimit(format!("{m}; use --samples for a Monte Carlo estimate"))
            }
            e => e,
        })
}

pub fn expected_outcome(
    mech: &dyn Mechanism,
    profile: &SignalProfile,
    mode: EvalMode,
    budgets: &Budgets,
) -> Result<Evaluation> {
    mech.instance().check_profile(profile)?;
    match mode {
        EvalMode::Exact => {
            let coins = exact_coins(mech, budgets, 1)?;
            Ok(Evaluation::Exact(exact_at(mech, profile, &coins)?))
        }
        EvalMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidInput("need at least one sample".into()));
            }
            let vals = mech.instance().values(profile)?;
            let best = argmax_lowest(&vals).expect("checked profile has bidders");
            let axes = mech.coin_axes();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sums = [[0f64; 2]; 3];
            for _ in 0..samples {
                let o = mech.run(profile, &axes.sample(&mut rng))?;
                let draw = match o.winner {
                    Some(w) => [to_f64(&vals[w]), to_f64(&o.price), (w == best) as u8 as f64],
                    None => [0.0; 3],
                };
                for (acc, x) in sums.iter_mut().zip(draw) {
                    acc[0] += x;
                    acc[1] += x * x;
                }
            }
            let n = samples as f64;
            let stat = |[s, sq]: [f64; 2]| {
                let mean = s / n;
                let var = if samples > 1 { (sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
                (mean, (var / n).sqrt())
            };
            let (welfare, welfare_se) = stat(sums[0]);
            let (revenue, revenue_se) = stat(sums[1]);
            let (p_optimal, p_optimal_se) = stat(sums[2]);
            Ok(Evaluation::Sampled {
                optimum: vals[best].clone(),
                estimate: Estimate {
                    samples,
                    welfare,
                    welfare_se,
                    revenue,
                    revenue_se,
                    p_optimal,
                    p_optimal_se,
                },
            })
        }
    }
}

/// Exact expectations at every truthful profile, in lexicographic order.
pub fn expectation_table(
    mech: &dyn Mechanism,
    budgets: &Budgets,
) -> Result<Vec<(SignalProfile, Expectation)>> {
    let profiles = budgets.profiles(mech.instance())?;
    let coins = exact_coins(mech, budgets, profiles.len() as u64)?;
    profiles
        .into_par_iter()
        .map(|s| exact_at(mech, &s, &coins).map(|e| (s, e)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioReport {
    /// `max OPT / E[objective]`; `None` when some profile has positive OPT
    /// and zero expectation.
    pub ratio: Option<Money>,
    /// First profile attaining the ratio.
    pub profile: SignalProfile,
}

impl RatioReport {
    pub fn ratio_text(&self) -> String {
        self.ratio.as_ref().map_or("inf".into(), format_money)
    }
}

/// `OPT/E`, `None` for an infinite ratio; `OPT` must be positive.
fn ratio_of(opt: &Money, e: &Money) -> Option<Money> {
    (!e.is_zero()).then(|| opt / e)
}

fn worse(a: &Option<Money>, b: &Option<Money>) -> bool {
    match (a, b) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(x), Some(y)) => y > x,
    }
}

pub fn worst_case_ratio(
    mech: &dyn Mechanism,
    objective: Objective,
    budgets: &Budgets,
) -> Result<RatioReport> {
    ratio_over(&expectation_table(mech, budgets)?, objective)
}

/// Worst ratio over a precomputed [`expectation_table`].
pub fn ratio_over(
    table: &[(SignalProfile, Expectation)],
    objective: Objective,
) -> Result<RatioReport> {
    let mut best: Option<RatioReport> = None;
    for (s, e) in table.iter().filter(|(_, e)| !e.optimum.is_zero()) {
        let r = ratio_of(&e.optimum, e.objective(objective));
        if best.as_ref().is_none_or(|b| worse(&b.ratio, &r)) {
            best = Some(RatioReport {
                ratio: r,
                profile: s.clone(),
            });
        }
    }
    best.ok_or_else(|| Error::UndefinedRatio("every profile has optimal welfare 0".into()))
}

fn approximation_unit(s: &SignalProfile, e: &Expectation, bound: Bound, factor: &Money) -> Option<Witness> {
    let detail = match bound {
        Bound::POptimal if &e.p_optimal * factor < Money::from_integer(1.into()) => format!(
            "P[optimal wins] = {} < 1/{}",
            format_money(&e.p_optimal),
            format_money(factor)
        ),
        Bound::Objective(o) if e.objective(o) * factor < e.optimum => format!(
            "E[{o}] = {} < OPT/{} with OPT = {}",
            format_money(e.objective(o)),
            format_money(factor),
            format_money(&e.optimum)
        ),
        _ => return None,
    };
    Some(Witness {
        profile: s.clone(),
        bidder: None,
        deviation: None,
        coin: None,
        detail,
    })
}

/// Checks the bound at every truthful profile. The quantity is the smallest
/// `P[optimal wins]` or the worst ratio.
pub fn check_approximation(
    mech: &dyn Mechanism,
    bound: Bound,
    factor: Money,
    budgets: &Budgets,
) -> Result<Report> {
    let table = expectation_table(mech, budgets)?;
    approximation_report(mech, &table, bound, factor)
}

/// [`check_approximation`] over a precomputed [`expectation_table`].
pub fn approximation_report(
    mech: &dyn Mechanism,
    table: &[(SignalProfile, Expectation)],
    bound: Bound,
    factor: Money,
) -> Result<Report> {
    let found = table
        .iter()
        .find_map(|(s, e)| approximation_unit(s, e, bound, &factor));
    let quantity = match bound {
        Bound::POptimal => table
            .iter()
            .map(|(_, e)| &e.p_optimal)
            .min()
            .map_or("-".into(), format_money),
        Bound::Objective(o) => ratio_over(table, o).map_or("undefined".into(), |r| r.ratio_text()),
    };
    Ok(Report::new(Check::Approximation { bound, factor }, mech, quantity, found))
}

pub(super) fn replay_approximation(
    mech: &dyn Mechanism,
    bound: Bound,
    factor: &Money,
    w: &Witness,
    budgets: &Budgets,
) -> Result<Option<Witness>> {
    let coins = exact_coins(mech, budgets, 1)?;
    let e = exact_at(mech, &w.profile, &coins)?;
    Ok(approximation_unit(&w.profile, &e, bound, factor))
}
