//! Platoon formation and payoff allocation for mixed-energy truck fleets.
//!
//! A fleet of electric trucks (ETs) and fuel-powered trucks (FPTs) leaves a
//! hub in platoons of bounded size. Followers save a per-type cost rate,
//! leaders save nothing. This crate provides:
//!
//! - [`model`]: fleet, coalition and structure types, the characteristic
//!   function and structural validation.
//! - [`formation`]: the feasibility test for a size limit, closed-form optimal
//!   platoon and leader counts, and a deterministic optimal structure builder.
//! - [`allocation`]: the type-based least-core allocation, excess and
//!   CS-core checks for arbitrary payoff vectors, baseline sharing schemes and
//!   the stability index.
//! - [`oracle`]: exhaustive enumeration used as ground truth for everything
//!   above.
//!
//! All money values are exact rationals ([`Money`]). Conversion to floating
//! point happens only when results are displayed.
//!
//! ```
//! use platoon_core::{formation, money::parse_money, FleetSpec};
//!
//! let fleet = FleetSpec::new(3, 6, parse_money("0.048")?, parse_money("0.07")?, 4)?;
//! let structure = formation::build_optimal_structure(&fleet)?;
//! assert_eq!(structure.to_string(), "{{1,4,5,6},{2,7,8},{3,9}}");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod allocation;
pub mod error;
pub mod formation;
pub mod model;
pub mod money;
pub mod oracle;

pub use error::{Error, Result};
pub use model::{
    CoalitionSignature, CoalitionStructure, FleetSpec, PayoffVector, Platoon, TruckId, TruckType,
    Violation,
};
pub use money::Money;
