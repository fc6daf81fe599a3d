//! Truncated Taylor jets over the joint (x, y) variable block.

mod eval;
mod fd;
mod jet;
mod space;

pub use eval::{eval_expr_jet, eval_jet};
pub use fd::finite_diff_oracle;
pub use jet::Jet;
pub use space::{Space, FIELD_VARS};
