//! Conditional randomization tests for network formation.
//!
//! Given one observed undirected network, the tests in this crate compare a
//! statistic of that network with its distribution over every simple graph
//! that has the same degree sequence. That reference distribution is
//! estimated with a sequential importance sampler ([`sampler`]) and can be
//! computed exactly for small networks ([`enumerate`]).

pub mod beta;
pub mod enumerate;
pub mod game;
pub mod graph;
pub mod graphicality;
pub mod inference;
pub mod sampler;
pub mod stats;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/graphicality.md")]
    mod graphicality {}
    #[doc = include_str!("../../../book/src/sampler.md")]
    mod sampler {}
    #[doc = include_str!("../../../book/src/enumeration.md")]
    mod enumeration {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/beta-model.md")]
    mod beta_model {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
