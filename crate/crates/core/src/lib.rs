//! Finite combinatorics of free amalgamation classes.
//!
//! This crate works with finite structures over a finite relational
//! signature and provides the machinery to analyse classes defined by
//! forbidden weak substructures:
//!
//! - [`structure`]: signatures, structures, point sets, induced substructures;
//! - [`canon`]: exact canonical forms via colour refinement plus backtracking;
//! - [`enumerate`]: bounded enumeration of structures up to isomorphism;
//! - [`embed`]: backtracking search for weak and induced embeddings;
//! - [`amalgam`]: free amalgamation, the `fa`-independence predicate and an
//!   exhaustive axiom-conformance harness;
//! - [`forbidden`]: freeness checks, minimal forbidden families and
//!   k-irreducibility;
//! - [`classify`]: class-level verdicts (closure under free amalgamation,
//!   simplicity);
//! - [`generic`]: finite approximations of the generic structure by
//!   extension-axiom saturation, with genericity audits;
//! - [`witness`]: explicit finite witness configurations (independent
//!   sequences, dividing witnesses, non-simplicity witnesses, order-property
//!   cycles) with re-verifiable certificates.
//!
//! Everything is pure and allocation-only: the crate is `no_std` (with
//! `alloc`) and all types are immutable once built, so values can be shared
//! freely across threads.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod amalgam;
pub mod canon;
pub mod classify;
pub mod embed;
pub mod enumerate;
pub mod forbidden;
pub mod generic;
pub mod witness;

pub mod structure;

pub use canon::{are_isomorphic, canonical_form, CanonicalCode};
pub use embed::{count_embeddings, find_embedding, Embedding, EmbeddingMode};
pub use enumerate::{enumerate_structures, DEFAULT_ENUMERATION_CAP};
pub use forbidden::{is_free, is_k_irreducible, ForbiddenFamily, FreeVerdict, Irreducibility};
pub use structure::{Point, PointSet, RelStructure, Signature, MAX_POINTS};
