//! Expression trees for user-defined chart evaluators.
//!
//! Manifest files describe maps `R^n -> R^m` as lists of expressions in
//! variables `x0..x{n-1}` with arithmetic, `exp`, and `log`. No general
//! code execution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One scalar expression.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expr {
    Const { r#const: f64 },
    Var { var: usize },
    Node { op: Op, args: Vec<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Log,
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const { r#const } => *r#const,
            Expr::Var { var } => vars[*var],
            Expr::Node { op, args } => match op {
                Op::Add => args.iter().map(|a| a.eval(vars)).sum(),
                Op::Sub => args[0].eval(vars) - args[1].eval(vars),
                Op::Mul => args.iter().map(|a| a.eval(vars)).product(),
                Op::Div => args[0].eval(vars) / args[1].eval(vars),
                Op::Neg => -args[0].eval(vars),
                Op::Exp => args[0].eval(vars).exp(),
                Op::Log => args[0].eval(vars).ln(),
            },
        }
    }

    /// Check arity declarations: every variable index must be < `arity`,
    /// and node argument counts must match their operator.
    pub fn validate(&self, arity: usize) -> Result<()> {
        match self {
            Expr::Const { .. } => Ok(()),
            Expr::Var { var } => {
                if *var < arity {
                    Ok(())
                } else {
                    Err(Error::Parse(format!(
                        "expression references variable {var}, arity is {arity}"
                    )))
                }
            }
            Expr::Node { op, args } => {
                let expect = match op {
                    Op::Add | Op::Mul => {
                        if args.len() < 2 {
                            return Err(Error::Parse(format!("{op:?} needs at least 2 arguments")));
                        }
                        args.len()
                    }
                    Op::Sub | Op::Div => 2,
                    Op::Neg | Op::Exp | Op::Log => 1,
                };
                if args.len() != expect {
                    return Err(Error::Parse(format!(
                        "{op:?} expects {expect} arguments, got {}",
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| a.validate(arity))
            }
        }
    }
}

/// A vector-valued map given by one expression per output component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExprMap {
    pub arity: usize,
    pub outputs: Vec<Expr>,
}

impl ExprMap {
    pub fn validate(&self) -> Result<()> {
        self.outputs.iter().try_for_each(|e| e.validate(self.arity))
    }

    pub fn eval(&self, vars: &[f64]) -> Vec<f64> {
        debug_assert_eq!(vars.len(), self.arity);
        self.outputs.iter().map(|e| e.eval(vars)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Expr {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn eval_arithmetic() {
        let e = parse(r#"{"op":"add","args":[{"var":0},{"op":"mul","args":[{"const":2.0},{"var":1}]}]}"#);
        assert_eq!(e.eval(&[1.0, 3.0]), 7.0);
    }

    #[test]
    fn eval_exp_log() {
        let e = parse(r#"{"op":"log","args":[{"op":"exp","args":[{"var":0}]}]}"#);
        assert!((e.eval(&[1.5]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn arity_violation_is_parse_error() {
        let e = parse(r#"{"var":3}"#);
        assert!(e.validate(2).is_err());
        assert!(e.validate(4).is_ok());
    }

    #[test]
    fn wrong_argument_count_is_parse_error() {
        let e = parse(r#"{"op":"neg","args":[{"var":0},{"var":0}]}"#);
        assert!(e.validate(1).is_err());
    }
}
