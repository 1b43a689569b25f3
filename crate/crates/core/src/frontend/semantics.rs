//! The fixed 32-bit semantics shared by the interpreter, the constant folder
//! and the symbolic engine.
//!
//! Arithmetic wraps, `/` truncates toward zero, `>>` is arithmetic, shift
//! counts are masked to 0..=31, comparisons and logical operators yield 0/1.
//! `INT_MIN / -1` wraps to `INT_MIN` and `INT_MIN % -1` is 0.

use super::ast::{BinaryOp, UnaryOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisionByZero;

pub fn eval_unary(op: UnaryOp, v: i32) -> i32 {
    match op {
        UnaryOp::Neg => v.wrapping_neg(),
        UnaryOp::LogNot => i32::from(v == 0),
        UnaryOp::BitNot => !v,
    }
}

/// Evaluates a binary operator on two already-computed operands.
///
/// `&&` and `||` are evaluated strictly here; short-circuiting is the
/// caller's job.
pub fn eval_binary(op: BinaryOp, a: i32, b: i32) -> Result<i32, DivisionByZero> {
    Ok(match op {
        BinaryOp::Add => a.wrapping_add(b),
        BinaryOp::Sub => a.wrapping_sub(b),
        BinaryOp::Mul => a.wrapping_mul(b),
        BinaryOp::Div => {
            if b == 0 {
                return Err(DivisionByZero);
            }
            a.wrapping_div(b)
        }
        BinaryOp::Rem => {
            if b == 0 {
                return Err(DivisionByZero);
            }
            a.wrapping_rem(b)
        }
        BinaryOp::Shl => a.wrapping_shl(b as u32),
        BinaryOp::Shr => a.wrapping_shr(b as u32),
        BinaryOp::BitAnd => a & b,
        BinaryOp::BitOr => a | b,
        BinaryOp::BitXor => a ^ b,
        BinaryOp::LogAnd => i32::from(a != 0 && b != 0),
        BinaryOp::LogOr => i32::from(a != 0 || b != 0),
        BinaryOp::Eq => i32::from(a == b),
        BinaryOp::Ne => i32::from(a != b),
        BinaryOp::Lt => i32::from(a < b),
        BinaryOp::Gt => i32::from(a > b),
        BinaryOp::Le => i32::from(a <= b),
        BinaryOp::Ge => i32::from(a >= b),
    })
}

/// Total variant used for symbolic terms: division by zero follows SMT-LIB
/// `bvsdiv`/`bvsrem` (`x / 0` is -1 for x >= 0 and 1 otherwise, `x % 0` is x).
pub fn eval_binary_total(op: BinaryOp, a: i32, b: i32) -> i32 {
    match eval_binary(op, a, b) {
        Ok(v) => v,
        Err(DivisionByZero) => match op {
            BinaryOp::Div => {
                if a >= 0 {
                    -1
                } else {
                    1
                }
            }
            _ => a,
        },
    }
}
