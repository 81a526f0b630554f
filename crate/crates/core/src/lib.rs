//! Exact computational group theory for twisted and bitwisted conjugacy.
//!
//! Two endomorphisms `phi`, `psi` of a group `G` define the bitwisted
//! conjugacy relation `x ~ psi(g) * x * phi(g)^-1`. The number of
//! equivalence classes is the Reidemeister coincidence number `R(phi, psi)`.
//! This crate computes that number, and the classes themselves, on several
//! concrete group families using exact arithmetic throughout:
//!
//! - [`fingroup`]: finite groups as multiplication tables, with brute-force
//!   class enumeration. Everything else is cross-checked against this module.
//! - [`abelian`]: finitely generated abelian groups; `R(phi, psi)` as a
//!   lattice index via Smith normal form, and the dual-side coincidence
//!   count it must agree with.
//! - [`chartab`]: character tables of finite groups and the induced action
//!   of automorphisms on irreducible characters.
//! - [`baumslag`]: the groups `B(1,n) = <a, b | a^-1 b a = b^n>` in the
//!   semidirect model `Z[1/n] x| Z`, with certificates that injective
//!   endomorphism pairs have infinitely many classes.
//! - [`polycyclic`]: groups `Z^d x|_A Z`, their finite congruence quotients,
//!   and an interleaved decision procedure for bitwisted conjugacy of
//!   concrete element pairs.
//! - [`cli`]: parsers for group specs and group words, plus the `bitwist`
//!   command-line interface.
//!
//! All core types are immutable after construction and safe to share across
//! threads. Randomized checks use the seeded generator in [`rng`] so every
//! run is reproducible.

// index-based loops are the clearer idiom for the table and matrix code here
#![allow(clippy::needless_range_loop)]

pub mod abelian;
pub mod baumslag;
pub mod chartab;
pub mod cli;
pub mod fingroup;
pub mod matrix;
pub mod polycyclic;
pub mod rng;
pub mod snf;

pub use fingroup::{FiniteGroup, GroupMap, TwistedPartition};
pub use matrix::IntMat;
pub use snf::{smith_normal_form, SmithForm};
