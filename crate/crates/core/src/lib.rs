//! Prior-free auctions for bidders with interdependent values.
//!
//! Mechanisms are deterministic functions of an instance, a report profile
//! and a [`CoinRealization`]; the [`verification`] module enumerates coin
//! spaces exactly to check incentive and approximation properties.

pub mod binary_auction;
pub mod clock;
pub mod coins;
mod discovery;
pub mod error;
pub mod general_auction;
pub mod generators;
pub mod kary_auction;
pub mod mechanism;
pub mod model;
pub mod money;
pub mod outcome;
pub mod verification;

pub use coins::{CoinAxes, CoinRealization};
pub use discovery::{candidate_highcounts, DiscoveryState};
pub use error::{Error, Result};
pub use mechanism::{Auction, Mechanism, MechanismKind};
pub use model::{BidderId, Instance, QualityVector, SignalProfile, ValuationModel};
pub use money::Money;
pub use outcome::{Outcome, Pricing, Transcript};
