//! Differentiable evaluation: parameter storage, smooth forward semantics,
//! and exact reverse-mode gradients.

pub mod backward;
pub mod forward;
pub mod params;

pub use backward::{backward, backward_into, Gradients};
pub use forward::{forward, soft_aggregate, EvalMode, EvalTrace};
pub use params::{LayoutEntry, ParamLayout, ParamStore, SlotKey, EPS_W, INIT_WEIGHT};
