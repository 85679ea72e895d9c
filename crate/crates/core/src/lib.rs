//! Numerical verification of the loss integrals of a Harman-sieve
//! decomposition for primes `p` with a large square divisor of `p − a`.
//!
//! The pipeline is: [`params`] fixes (σ, ϖ, ε); [`buchstab`] solves ω and its
//! envelopes; [`regions`] encodes the asymptotic regions and the ten
//! integration domains; [`quadrature`] integrates over them with randomized
//! QMC; [`losses`] combines the integrals into the A, B and C losses and the
//! verdict. [`witness`] searches for explicit primes with large square
//! divisors of `p − a`.

pub mod buchstab;
pub mod cli;
pub mod error;
pub mod losses;
pub mod params;
pub mod quadrature;
pub mod regions;
pub mod sobol;
pub mod witness;

pub use buchstab::BuchstabTable;
pub use error::{Error, Result};
pub use losses::{verify, LossReport, RunSettings};
pub use params::{default_params, SieveParams};
pub use quadrature::{integrate, IntegralEstimate, IntegrationOptions, Mode};
pub use regions::{
    can_partition, classify_pair, domain, DomainName, PairClass, RegionSpec, Target,
};
