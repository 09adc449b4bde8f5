//! Sphere packings, spherical codes, and the machinery connecting them.
//!
//! The crate is organised around three pipelines:
//!
//! * **Packings**: lattices and periodic point sets with exact coordinate
//!   entries in a real quadratic field, exact shortest-vector enumeration,
//!   and exact center densities where the field permits ([`packings`],
//!   [`exact`], [`catalog`]).
//! * **Codes**: finite point sets on the unit sphere with angular metric,
//!   cap-area densities, parameter-grid bookkeeping, and bound curves
//!   ([`geom`], [`params`], [`assign`], [`serial`]).
//! * **Constructions and experiments**: wrapping planar packings onto
//!   spheres, jamming certificates by linear programming, an
//!   enumeration-order classifier with pluggable complexity oracles, and
//!   the membership experiments tying everything together ([`wrap`],
//!   [`jamming`], [`oracle`], [`enumeration`], [`experiment`]).
//!
//! All floating point output is deterministic: no randomness without an
//! explicit seed, no time- or thread-dependent results.

pub mod assign;
pub mod catalog;
pub mod enumeration;
pub mod exact;
pub mod experiment;
pub mod geom;
pub mod jamming;
pub mod oracle;
pub mod packings;
pub mod params;
pub mod serial;
pub mod simplex;
pub mod wrap;
