use super::jet::Jet;
use super::space::Space;
use crate::error::{Error, Result};
use crate::exprlang::{BinOp, Expr, UnaryOp};

/// Evaluate `expr` on jets, with variable `i` bound to `vars[i - 1]`.
///
/// Domain failures report the offending subexpression.
pub fn eval_expr_jet(expr: &Expr, vars: &[Jet]) -> Result<Jet> {
    let label = |e: Error, node: &Expr| match e {
        Error::Domain {
            primitive,
            subexpr,
            value,
        } if subexpr.is_empty() => Error::Domain {
            primitive,
            subexpr: node.to_string(),
            value,
        },
        other => other,
    };
    let proto = &vars[0];
    Ok(match expr {
        Expr::Const(c) => Jet::constant(proto.space(), proto.order(), *c),
        Expr::Var(i) => vars[*i - 1].clone(),
        Expr::Unary(op, e) => {
            let v = eval_expr_jet(e, vars)?;
            match op {
                UnaryOp::Neg => -v,
                UnaryOp::Sqrt => v.sqrt().map_err(|err| label(err, expr))?,
                UnaryOp::Exp => v.exp(),
                UnaryOp::Log => v.ln().map_err(|err| label(err, expr))?,
                UnaryOp::Sin => v.sin(),
                UnaryOp::Cos => v.cos(),
            }
        }
        Expr::Binary(op, a, b) => {
            let (p, q) = (eval_expr_jet(a, vars)?, eval_expr_jet(b, vars)?);
            match op {
                BinOp::Add => p + q,
                BinOp::Sub => p - q,
                BinOp::Mul => p * q,
                BinOp::Div => p.try_div(&q).map_err(|err| label(err, expr))?,
            }
        }
        Expr::Pow(e, n) => eval_expr_jet(e, vars)?
            .powi(*n)
            .map_err(|err| label(err, expr))?,
    })
}

/// Jet of a chart field at `x`, over the joint (x, y) variable block, to total order `order`.
pub fn eval_jet(expr: &Expr, x: &[f64], order: usize) -> Result<Jet> {
    let space = Space::field();
    let vars: Vec<Jet> = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| Jet::variable(space, order, i, xi))
        .collect();
    eval_expr_jet(expr, &vars)
}
