//! Lifetimes of series and parallel systems built from dependent
//! extended-Weibull components, and numerical verifiers for the stochastic
//! orders between them.

pub mod archimedean;
pub mod error;
pub mod ew;
pub mod extremes;
pub mod lifetime;
pub mod majorization;
pub mod orders;
pub mod quadrature;
pub mod scenarios;
pub mod theorems;
pub mod verdict;

pub use archimedean::{ArchimedeanGenerator, CheckGrid, Family, Generator};
pub use error::{Error, Result};
pub use ew::EwParams;
pub use extremes::{CoupledSystem, Coupling, CountDistribution, Extreme, Mixture, Statistic};
pub use lifetime::{Lifetime, Prob};
pub use orders::{GridSpec, Order, OrderVerdict, Spacing};
pub use verdict::{ConditionVerdict, Status};
