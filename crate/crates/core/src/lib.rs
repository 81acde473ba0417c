//! A desk-scale laboratory for the Hardy–Littlewood circle method on prime
//! points of affine hypersurfaces.
//!
//! The crate evaluates the computable objects of the method — weighted prime
//! exponential sums, complete character sums, singular series and oscillatory
//! singular integrals, dyadic decompositions of the von Mangoldt function,
//! Weyl-differencing chains and lattice counters — and cross-validates them
//! against exact brute-force oracles.
//!
//! Module map:
//! * [`forms`] — exact sparse multivariate integer polynomials and the
//!   structural transformations applied to a form (restriction, cross terms,
//!   bihomogenization, multilinear tensors, forward differencing).
//! * [`arithmetic`] — sieving, arithmetic functions and Dirichlet characters
//!   with exact root-of-unity arithmetic.
//! * [`weights`] — the compactly supported smooth weight class, the scaled
//!   weight family, and the dyadic smooth partition of unity.
//! * [`expsums`] — `S(α)`, `S*(α)`, complete sums `A(q,a;…)`, dyadic block
//!   sums, Weyl-differenced sums and lattice counters.
//! * [`majorarcs`] — major arcs, singular series, local densities,
//!   oscillatory integrals and the main-term prediction.
//! * [`lfunctions`] — explicit-formula evaluation against ingested zero data.
//! * [`oracle`] — ground-truth brute-force counts, the discrete-orthogonality
//!   keystone check, and finite-field singular-locus probes.
//! * [`params`] — the dichotomy constants and sliding-scale parameter
//!   derivation.

pub mod arithmetic;
pub mod error;
pub mod expsums;
pub mod forms;
pub mod lfunctions;
pub mod majorarcs;
pub mod numeric;
pub mod oracle;
pub mod params;
pub mod weights;

pub use error::{Error, Result};
