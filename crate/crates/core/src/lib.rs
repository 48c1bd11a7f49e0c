//! Pulse design and simulation for two-level systems driven along
//! rigid-body trajectories.
//!
//! A free asymmetric top with inertia triple `(1, ∞, 1/k²)` and the Bloch
//! vector of a driven spin obey the same linear equation `Ẋ = Ω(t) × X`.
//! Closed-form top trajectories therefore double as control fields: the
//! separatrix gives the Allen–Eberly pulse, orbits close to it give
//! tennis-racket (TRE) pulses, and closed orbits carry a Montgomery phase
//! that can be split into dynamical and geometric parts.
//!
//! Modules, bottom up:
//! - [`elliptic`]: `K`, `E`, and `sn/cn/dn`, parameter convention `m = k²`.
//! - [`topdyn`]: the top's vector field, invariants, and closed-form orbits.
//! - [`pulsegen`]: sampled control fields.
//! - [`propagate`]: Bloch, SO(3), and SU(2) propagation under field errors.
//! - [`gates`]: NOT tuning, phase budgets, phase gates, composites, synthesis.
//! - [`robustness`]: figures of merit and error sweeps.
//! - [`io`]: CSV formats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elliptic;
pub mod error;
pub mod gates;
pub mod io;
pub mod propagate;
pub mod pulsegen;
pub mod robustness;
pub mod roots;
pub mod topdyn;

pub use error::{Error, Result};
