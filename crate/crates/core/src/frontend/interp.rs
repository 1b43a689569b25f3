//! Concrete interpreter.
//!
//! Programs are lowered once to a slot-indexed form so that brute-force
//! oracles can run millions of input vectors cheaply.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use super::semantics::{eval_binary, eval_unary, DivisionByZero};

/// Calls nested deeper than this trap like a stack overflow would.
pub const MAX_CALL_DEPTH: usize = 128;

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeError {
    DivisionByZero,
    CallDepthExceeded,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeError::DivisionByZero => f.write_str("division by zero"),
            RuntimeError::CallDepthExceeded => f.write_str("call depth exceeded"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// `None` for a void function.
    Returned(Option<i32>),
    RuntimeError(RuntimeError),
    FuelExhausted,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Returned(Some(v)) => write!(f, "returned {v}"),
            Outcome::Returned(None) => f.write_str("returned void"),
            Outcome::RuntimeError(e) => write!(f, "runtime error: {e}"),
            Outcome::FuelExhausted => f.write_str("fuel exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no function named `{0}`")]
    UnknownEntry(String),
    #[error("`{name}` takes {expected} argument(s), {given} given")]
    ArityMismatch {
        name: String,
        expected: usize,
        given: usize,
    },
    #[error("program is not well-typed: {0}")]
    IllTyped(String),
}

pub fn evaluate_concrete(
    unit: &SourceUnit,
    entry: &str,
    args: &[i32],
    fuel: u64,
) -> Result<Outcome, EvalError> {
    let program = Program::compile(unit)?;
    let entry = program.entry(entry, args.len())?;
    Ok(program.run(entry, args, fuel, None))
}

#[derive(Debug, Clone)]
enum CExpr {
    Lit(i32),
    Load(u32),
    Unary(UnaryOp, Box<CExpr>),
    Binary(BinaryOp, Box<CExpr>, Box<CExpr>),
    And(Box<CExpr>, Box<CExpr>),
    Or(Box<CExpr>, Box<CExpr>),
    Store(u32, Box<CExpr>),
    Ternary(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    Call(usize, Vec<CExpr>),
}

#[derive(Debug, Clone)]
enum CStmt {
    Block(Vec<CStmt>),
    If(CExpr, Box<CStmt>, Option<Box<CStmt>>),
    While(CExpr, Box<CStmt>),
    For(Option<Box<CStmt>>, Option<CExpr>, Option<CExpr>, Box<CStmt>),
    /// Arms flattened into one list; labels map to start offsets.
    Switch {
        scrutinee: CExpr,
        labels: Vec<(i32, usize)>,
        default: Option<usize>,
        body: Vec<CStmt>,
    },
    Return(Option<CExpr>),
    Expr(CExpr),
    Store(u32, Option<CExpr>),
    Break,
    Continue,
}

#[derive(Debug, Clone)]
struct CFunc {
    name: String,
    arity: usize,
    slots: usize,
    body: Vec<CStmt>,
}

/// A lowered program, reusable across many runs.
#[derive(Debug, Clone)]
pub struct Program {
    funcs: Vec<CFunc>,
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Option<i32>),
}

enum Stop {
    Trap(RuntimeError),
    OutOfFuel,
}

impl From<DivisionByZero> for Stop {
    fn from(_: DivisionByZero) -> Self {
        Stop::Trap(RuntimeError::DivisionByZero)
    }
}

struct Lowering<'a> {
    fn_index: &'a HashMap<&'a str, usize>,
    scopes: Vec<Vec<(String, u32)>>,
    slots: u32,
}

impl Lowering<'_> {
    fn lookup(&self, name: &str) -> Result<u32, EvalError> {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.iter().rev().find(|(n, _)| n == name).map(|(_, slot)| *slot))
            .ok_or_else(|| EvalError::IllTyped(format!("unresolved variable `{name}`")))
    }

    fn declare(&mut self, name: &str) -> u32 {
        let slot = self.slots;
        self.slots += 1;
        self.scopes
            .last_mut()
            .expect("scope stack is never empty")
            .push((name.to_string(), slot));
        slot
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scopes.push(Vec::new());
        let out = f(self);
        self.scopes.pop();
        out
    }

    fn list(&mut self, stmts: &[Stmt]) -> Result<Vec<CStmt>, EvalError> {
        stmts.iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, s: &Stmt) -> Result<CStmt, EvalError> {
        Ok(match s {
            Stmt::Block(stmts) => CStmt::Block(self.scoped(|l| l.list(stmts))?),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => CStmt::If(
                self.expr(cond)?,
                Box::new(self.stmt(then_branch)?),
                else_branch
                    .as_deref()
                    .map(|e| self.stmt(e).map(Box::new))
                    .transpose()?,
            ),
            Stmt::While { cond, body } => {
                CStmt::While(self.expr(cond)?, Box::new(self.stmt(body)?))
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => self.scoped(|l| -> Result<CStmt, EvalError> {
                let init = init
                    .as_deref()
                    .map(|s| l.stmt(s).map(Box::new))
                    .transpose()?;
                let cond = cond.as_ref().map(|c| l.expr(c)).transpose()?;
                let step = step.as_ref().map(|c| l.expr(c)).transpose()?;
                Ok(CStmt::For(init, cond, step, Box::new(l.stmt(body)?)))
            })?,
            Stmt::Switch {
                scrutinee,
                cases,
                default,
            } => {
                let scrutinee = self.expr(scrutinee)?;
                self.scoped(|l| -> Result<CStmt, EvalError> {
                    let mut body = Vec::new();
                    let mut labels = Vec::new();
                    for case in cases {
                        labels.push((case.label, body.len()));
                        body.extend(l.list(&case.body)?);
                    }
                    let default_start = match default {
                        Some(d) => {
                            let start = body.len();
                            body.extend(l.list(d)?);
                            Some(start)
                        }
                        None => None,
                    };
                    Ok(CStmt::Switch {
                        scrutinee,
                        labels,
                        default: default_start,
                        body,
                    })
                })?
            }
            Stmt::Return(e) => CStmt::Return(e.as_ref().map(|e| self.expr(e)).transpose()?),
            Stmt::Expr(e) => CStmt::Expr(self.expr(e)?),
            Stmt::Decl { name, init } => {
                // The initializer sees the outer binding of a shadowed name.
                let init = init.as_ref().map(|e| self.expr(e)).transpose()?;
                CStmt::Store(self.declare(name), init)
            }
            Stmt::Break => CStmt::Break,
            Stmt::Continue => CStmt::Continue,
        })
    }

    fn expr(&mut self, e: &Expr) -> Result<CExpr, EvalError> {
        Ok(match e {
            Expr::IntLit(v) => CExpr::Lit(*v),
            Expr::Var(name) => CExpr::Load(self.lookup(name)?),
            Expr::Unary(op, a) => CExpr::Unary(*op, Box::new(self.expr(a)?)),
            Expr::Binary(BinaryOp::LogAnd, a, b) => {
                CExpr::And(Box::new(self.expr(a)?), Box::new(self.expr(b)?))
            }
            Expr::Binary(BinaryOp::LogOr, a, b) => {
                CExpr::Or(Box::new(self.expr(a)?), Box::new(self.expr(b)?))
            }
            Expr::Binary(op, a, b) => {
                CExpr::Binary(*op, Box::new(self.expr(a)?), Box::new(self.expr(b)?))
            }
            Expr::Assign(name, value) => {
                let value = self.expr(value)?;
                CExpr::Store(self.lookup(name)?, Box::new(value))
            }
            Expr::Ternary(c, t, f) => CExpr::Ternary(
                Box::new(self.expr(c)?),
                Box::new(self.expr(t)?),
                Box::new(self.expr(f)?),
            ),
            Expr::Call(name, args) => {
                let idx = *self
                    .fn_index
                    .get(name.as_str())
                    .ok_or_else(|| EvalError::IllTyped(format!("unknown function `{name}`")))?;
                CExpr::Call(
                    idx,
                    args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?,
                )
            }
        })
    }
}

struct Machine<'p, 't> {
    program: &'p Program,
    fuel: u64,
    depth: usize,
    trace: Option<&'t mut Vec<u32>>,
}

impl Program {
    pub fn compile(unit: &SourceUnit) -> Result<Program, EvalError> {
        let fn_index: HashMap<&str, usize> = unit
            .functions
            .iter()
            .enumerate()
            .map(|(i, f)| (f.name.as_str(), i))
            .collect();
        let funcs = unit
            .functions
            .iter()
            .map(|f| {
                let mut l = Lowering {
                    fn_index: &fn_index,
                    scopes: vec![Vec::new()],
                    slots: 0,
                };
                for p in &f.params {
                    l.declare(p);
                }
                let body = l.list(&f.body)?;
                Ok(CFunc {
                    name: f.name.clone(),
                    arity: f.params.len(),
                    slots: l.slots as usize,
                    body,
                })
            })
            .collect::<Result<_, EvalError>>()?;
        Ok(Program { funcs })
    }

    /// Resolves an entry point and checks its arity.
    pub fn entry(&self, name: &str, arity: usize) -> Result<usize, EvalError> {
        let idx = self
            .funcs
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| EvalError::UnknownEntry(name.to_string()))?;
        let expected = self.funcs[idx].arity;
        if expected != arity {
            return Err(EvalError::ArityMismatch {
                name: name.to_string(),
                expected,
                given: arity,
            });
        }
        Ok(idx)
    }

    /// Runs function `entry`. When `trace` is given, every branch decision is
    /// appended to it: 0/1 for two-way decisions, the chosen arm for switches.
    pub fn run(
        &self,
        entry: usize,
        args: &[i32],
        fuel: u64,
        trace: Option<&mut Vec<u32>>,
    ) -> Outcome {
        let mut m = Machine {
            program: self,
            fuel,
            depth: 0,
            trace,
        };
        match m.call(entry, args.to_vec()) {
            Ok(v) => Outcome::Returned(v),
            Err(Stop::Trap(e)) => Outcome::RuntimeError(e),
            Err(Stop::OutOfFuel) => Outcome::FuelExhausted,
        }
    }
}

impl Machine<'_, '_> {
    fn tick(&mut self) -> Result<(), Stop> {
        if self.fuel == 0 {
            return Err(Stop::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn record(&mut self, decision: u32) {
        if let Some(t) = self.trace.as_deref_mut() {
            t.push(decision);
        }
    }

    fn call(&mut self, idx: usize, args: Vec<i32>) -> Result<Option<i32>, Stop> {
        self.tick()?;
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Stop::Trap(RuntimeError::CallDepthExceeded));
        }
        let func = &self.program.funcs[idx];
        let mut frame = args;
        frame.resize(func.slots, 0);
        self.depth += 1;
        let flow = self.list(&func.body, &mut frame);
        self.depth -= 1;
        Ok(match flow? {
            Flow::Return(v) => v,
            _ => None,
        })
    }

    fn list(&mut self, stmts: &[CStmt], frame: &mut [i32]) -> Result<Flow, Stop> {
        for s in stmts {
            match self.stmt(s, frame)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn cond(&mut self, e: &CExpr, frame: &mut [i32]) -> Result<bool, Stop> {
        let taken = self.expr(e, frame)? != 0;
        self.record(u32::from(taken));
        Ok(taken)
    }

    fn stmt(&mut self, s: &CStmt, frame: &mut [i32]) -> Result<Flow, Stop> {
        self.tick()?;
        match s {
            CStmt::Block(stmts) => self.list(stmts, frame),
            CStmt::If(c, t, e) => {
                if self.cond(c, frame)? {
                    self.stmt(t, frame)
                } else if let Some(e) = e {
                    self.stmt(e, frame)
                } else {
                    Ok(Flow::Normal)
                }
            }
            CStmt::While(c, body) => {
                while self.cond(c, frame)? {
                    match self.stmt(body, frame)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    self.tick()?;
                }
                Ok(Flow::Normal)
            }
            CStmt::For(init, c, step, body) => {
                if let Some(init) = init {
                    self.stmt(init, frame)?;
                }
                loop {
                    if let Some(c) = c {
                        if !self.cond(c, frame)? {
                            break;
                        }
                    }
                    match self.stmt(body, frame)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    if let Some(step) = step {
                        self.expr(step, frame)?;
                    }
                    self.tick()?;
                }
                Ok(Flow::Normal)
            }
            CStmt::Switch {
                scrutinee,
                labels,
                default,
                body,
            } => {
                let v = self.expr(scrutinee, frame)?;
                let arm = labels.iter().position(|(label, _)| *label == v);
                self.record(arm.map_or(labels.len() as u32, |a| a as u32));
                let start = match arm {
                    Some(a) => labels[a].1,
                    None => match default {
                        Some(d) => *d,
                        None => return Ok(Flow::Normal),
                    },
                };
                match self.list(&body[start..], frame)? {
                    Flow::Break | Flow::Normal => Ok(Flow::Normal),
                    other => Ok(other),
                }
            }
            CStmt::Return(e) => {
                let v = e.as_ref().map(|e| self.expr(e, frame)).transpose()?;
                Ok(Flow::Return(v))
            }
            CStmt::Expr(e) => {
                self.expr(e, frame)?;
                Ok(Flow::Normal)
            }
            CStmt::Store(slot, init) => {
                let v = match init {
                    Some(e) => self.expr(e, frame)?,
                    None => 0,
                };
                frame[*slot as usize] = v;
                Ok(Flow::Normal)
            }
            CStmt::Break => Ok(Flow::Break),
            CStmt::Continue => Ok(Flow::Continue),
        }
    }

    fn expr(&mut self, e: &CExpr, frame: &mut [i32]) -> Result<i32, Stop> {
        Ok(match e {
            CExpr::Lit(v) => *v,
            CExpr::Load(slot) => frame[*slot as usize],
            CExpr::Unary(op, a) => eval_unary(*op, self.expr(a, frame)?),
            CExpr::Binary(op, a, b) => {
                let a = self.expr(a, frame)?;
                let b = self.expr(b, frame)?;
                eval_binary(*op, a, b)?
            }
            CExpr::And(a, b) => i32::from(self.cond(a, frame)? && self.cond(b, frame)?),
            CExpr::Or(a, b) => i32::from(self.cond(a, frame)? || self.cond(b, frame)?),
            CExpr::Store(slot, value) => {
                let v = self.expr(value, frame)?;
                frame[*slot as usize] = v;
                v
            }
            CExpr::Ternary(c, t, f) => {
                if self.cond(c, frame)? {
                    self.expr(t, frame)?
                } else {
                    self.expr(f, frame)?
                }
            }
            CExpr::Call(idx, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.expr(a, frame)?);
                }
                self.call(*idx, values)?.unwrap_or(0)
            }
        })
    }
}
