//! Double categories of spans and polynomials over finite sets.
//!
//! The crate provides the ambient category of finite sets ([`finset`]), a
//! generic pseudo double category interface with rectangular pasting
//! ([`doublecat`]), the concrete double categories of spans ([`span`]) and
//! polynomials ([`poly`]), the generic endomorphism and monad constructions
//! over any instance ([`mnd`]), and a brute-force law checker ([`lawcheck`]).
//!
//! ```
//! use dblcat::mnd::{free_monad_adjunction, Endo};
//! use dblcat::span::{parse_graph, span_instance, DEFAULT_MAX_LEN};
//!
//! let g = parse_graph("graph\nnodes: a b\nedge f a b\n")?;
//! let c = span_instance();
//! let base = Endo { obj: g.nodes.clone(), arrow: g.edges.clone() };
//! let bundle = free_monad_adjunction(&c, &base, DEFAULT_MAX_LEN)?;
//! // two identities and `f`
//! assert_eq!(bundle.monad().endo.arrow.apex().len(), 3);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod error;
pub mod doublecat;
pub mod finset;
pub mod lawcheck;
pub mod mnd;
pub mod poly;
pub mod span;

pub use error::{Error, Result};
