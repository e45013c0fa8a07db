pub mod cascade_stats;
pub mod error;
pub mod field_model;
pub mod ho_engine;
pub mod link_metrics;
pub mod quad;
pub mod rng;
pub mod scenario_sim;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/link-metrics.md")]
    mod link_metrics {}
    #[doc = include_str!("../../../book/src/focusing.md")]
    mod focusing {}
    #[doc = include_str!("../../../book/src/handover.md")]
    mod handover {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
