//! Measuring distribution shift on synthetic gas data.
//!
//! `shiftgauge` samples `(temperature, volume, moles) -> pressure` datasets
//! from the van der Waals equation of state, trains a small ELU network on
//! one of them, and asks how well three signals predict the network's error
//! on another:
//!
//! * histogram KL divergence and Jensen–Shannon distance between datasets
//!   ([`similarity`]),
//! * Mahalanobis distance of each input from the training inputs ([`ood`]),
//! * the spread of Monte Carlo Dropout predictions ([`mlp`]).
//!
//! [`exphouse`] wires these into two experiments: one model evaluated on ten
//! gases whose constants bend the pressure law, and one gas whose sampler
//! moves away from the training region.
//!
//! ```
//! use shiftgauge::datagen::{builtin_gas_table, exp1_params, generate};
//! use shiftgauge::similarity::{divergence_report, BinningConfig};
//!
//! let table = builtin_gas_table();
//! let ideal = generate(table.lookup("Ideal Gas")?, &exp1_params(), 2000, 7)?;
//! let xenon = generate(table.lookup("Xe")?, &exp1_params(), 2000, 7)?;
//! let r = divergence_report(&ideal.pressures(), &xenon.pressures(), &BinningConfig::default())?;
//! assert!(r.kl > 0.0 && r.js_distance > 0.0 && r.js_distance <= 1.0);
//! # Ok::<(), shiftgauge::Error>(())
//! ```
//!
//! All randomness flows from a single master seed; see [`seed`].

pub mod cli;
pub mod datagen;
pub mod error;
pub mod exphouse;
pub mod io;
pub mod mlp;
pub mod ood;
pub mod seed;
pub mod similarity;

pub use error::{Error, Result};

// The book's code blocks run as doctests so the chapters cannot rot.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/gas-data.md")]
    mod gas_data {}
    #[doc = include_str!("../../../book/src/divergences.md")]
    mod divergences {}
    #[doc = include_str!("../../../book/src/mahalanobis.md")]
    mod mahalanobis {}
    #[doc = include_str!("../../../book/src/mc-dropout.md")]
    mod mc_dropout {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/seeds.md")]
    mod seeds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
