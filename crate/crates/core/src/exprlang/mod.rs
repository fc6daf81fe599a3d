//! The field expression language and metric-definition files.

mod ast;
mod metric;
mod parser;

pub use ast::{BinOp, Expr, UnaryOp};
pub use metric::{parse_metric_def, MetricDef};
pub use parser::{parse_expr, parse_phi_expr};
