//! Gate constructions on top of the pulse families.

pub mod composite;
pub mod montgomery;
pub mod not;
pub mod phase;
pub mod synth;

pub use composite::{composite_bir_not, composite_bir_not_with, palindrome, width_around_zero, CompositeNot, CompositeSearch};
pub use montgomery::{loop_budget, montgomery_phase, orbit_budget, polygon_solid_angle, PhaseBudget};
pub use not::{flip_target, tune_not_gate, tune_not_gate_with, NotKnob, NotReport, NotSearch, TunedNot};
pub use phase::{aligned_basis, design_phase_gate, evaluate_loop_pair, phase_gate_target, LoopPairSpec, PhaseGateDesign, PhaseGateReport, PhaseSearch, ReversedLoop};
pub use synth::{hadamard, realize, synthesize_one_qubit, GateOp, Primitives, Program};
