//! Exact newform coefficients, prime-power sign statistics and growth of
//! symmetric-power coefficient sums.
//!
//! The pipeline: [`forms::expand`] builds exact `a_f(n)`, [`hecke`] turns them
//! into angles and prime-power values, [`sympower`] assembles multiplicative
//! coefficient streams, and [`stats`] / [`asymptotics`] measure them.
//! A guide with worked examples lives in `book/`.

pub mod asymptotics;
pub mod error;
pub mod forms;
pub mod hecke;
pub mod numeric;
pub mod primes;
pub mod report;
pub mod series;
pub mod stats;
pub mod sympower;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    mod coefficients {}
    #[doc = include_str!("../../../book/src/hecke.md")]
    mod hecke {}
    #[doc = include_str!("../../../book/src/sympower.md")]
    mod sympower {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
