use std::collections::HashMap;
use std::sync::Arc;

use super::expr::{falsy, fold_arc, mk_binary, mk_unary, truthy, SymExpr};
use super::solver::{solve_model, Failure};
use super::{test_case, ExecStats, Exploration, ExplorationLimits, PathRecord, PathStatus};
use crate::frontend::interp::MAX_CALL_DEPTH;
use crate::frontend::{BinaryOp, Expr, FunctionDef, RuntimeError, SourceUnit, Stmt};

type Val = Arc<SymExpr>;

/// A path still to explore: the decisions that lead to it, its
/// constraints, and a model satisfying them.
struct WorkItem {
    decisions: Vec<u8>,
    constraints: Vec<Val>,
    model: Vec<i32>,
}

enum Stop {
    Trap(RuntimeError),
    Budget,
    Infeasible,
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Option<Val>),
}

/// Identity of a branch site: an AST node address plus an arm index.
type Site = (usize, usize);

fn site_of<T>(node: &T, arm: usize) -> Site {
    (node as *const T as usize, arm)
}

struct Shared<'a> {
    functions: HashMap<&'a str, &'a FunctionDef>,
    limits: &'a ExplorationLimits,
    arity: usize,
    stats: ExecStats,
}

struct Run<'s, 'a> {
    shared: &'s mut Shared<'a>,
    prefix: &'s [u8],
    decisions: Vec<u8>,
    constraints: Vec<Val>,
    model: Option<Vec<i32>>,
    site_counts: HashMap<Site, usize>,
    steps: u64,
    depth: usize,
    /// Local variables of all frames; `frames` and `scopes` mark boundaries.
    vars: Vec<(&'a str, Val)>,
    scopes: Vec<usize>,
    frames: Vec<usize>,
    pending: Vec<WorkItem>,
    pruned: Vec<PathRecord>,
}

pub(super) fn explore(unit: &SourceUnit, entry: &FunctionDef, limits: &ExplorationLimits) -> Exploration {
    let mut shared = Shared {
        functions: unit.functions.iter().map(|f| (f.name.as_str(), f)).collect(),
        limits,
        arity: entry.params.len(),
        stats: ExecStats::default(),
    };
    let params = entry.params.clone();
    let mut records = Vec::new();
    let mut worklist = vec![WorkItem {
        decisions: Vec::new(),
        constraints: Vec::new(),
        model: Vec::new(),
    }];
    let mut first = true;
    while let Some(item) = worklist.pop() {
        if shared.stats.paths_explored >= limits.max_paths as u64 {
            records.push(PathRecord {
                constraints: item.constraints.iter().map(|c| (**c).clone()).collect(),
                status: PathStatus::BudgetExhausted,
                witness: None,
                return_value: None,
                error: None,
            });
            continue;
        }
        let mut run = Run {
            shared: &mut shared,
            prefix: &item.decisions,
            decisions: Vec::new(),
            constraints: Vec::new(),
            model: (!first).then(|| item.model.clone()),
            site_counts: HashMap::new(),
            steps: 0,
            depth: 0,
            vars: Vec::new(),
            scopes: Vec::new(),
            frames: Vec::new(),
            pending: Vec::new(),
            pruned: Vec::new(),
        };
        first = false;
        let args: Vec<Val> = (0..params.len()).map(|i| Arc::new(SymExpr::Var(i))).collect();
        let result = run.call(entry, args);
        let record = run.finish(result, &params);
        let Run {
            decisions,
            pending,
            pruned,
            ..
        } = run;
        records.extend(pruned);
        if let Some(record) = record {
            let stats = &mut shared.stats;
            stats.paths_explored += 1;
            stats.tests_generated += u64::from(record.witness.is_some());
            stats.max_depth_reached = stats.max_depth_reached.max(decisions.len() as u64);
            records.push(record);
        }
        worklist.extend(pending);
    }
    Exploration {
        params,
        records,
        stats: shared.stats,
    }
}

impl<'s, 'a> Run<'s, 'a> {
    fn finish(&mut self, result: Result<Option<Val>, Stop>, params: &[String]) -> Option<PathRecord> {
        let constraints: Vec<SymExpr> = self.constraints.iter().map(|c| (**c).clone()).collect();
        let result = match result {
            Ok(Some(v)) if self.oversized(&v) => Err(Stop::Budget),
            other => other,
        };
        let (status, value, error) = match result {
            Ok(v) => (PathStatus::Completed, v, None),
            Err(Stop::Trap(e)) => (PathStatus::Error, None, Some(e)),
            Err(Stop::Budget) => {
                return Some(PathRecord {
                    constraints,
                    status: PathStatus::BudgetExhausted,
                    witness: None,
                    return_value: None,
                    error: None,
                })
            }
            Err(Stop::Infeasible) => return None,
        };
        let model = match self.model.take() {
            Some(m) => m,
            None => self.solve(&self.constraints.clone())?,
        };
        Some(PathRecord {
            constraints,
            status,
            witness: Some(test_case(params, &model)),
            return_value: value.map(|v| v.eval(&model)),
            error,
        })
    }

    fn solve(&mut self, constraints: &[Val]) -> Option<Vec<i32>> {
        let stats = &mut self.shared.stats;
        stats.solver_calls += 1;
        match solve_model(constraints, self.shared.arity, self.shared.limits) {
            Ok(m) => Some(m),
            Err(Failure::Unsat) => None,
            Err(Failure::BudgetExceeded) => {
                stats.timeouts += 1;
                None
            }
        }
    }

    fn oversized(&self, e: &SymExpr) -> bool {
        let cap = self.shared.limits.max_term_nodes;
        e.tree_size(cap) > cap
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.shared.limits.max_steps {
            return Err(Stop::Budget);
        }
        Ok(())
    }

    fn replaying(&self) -> bool {
        self.decisions.len() < self.prefix.len()
    }

    /// Decides a branch on `guard`, forking when it is symbolic.
    fn branch(&mut self, guard: &Val, site: Site) -> Result<bool, Stop> {
        let folded = fold_arc(guard);
        if self.oversized(&folded) {
            return Err(Stop::Budget);
        }
        if let Some(c) = folded.as_const() {
            if guard.as_const().is_none() && !self.replaying() {
                let dead = if c != 0 { falsy(guard) } else { truthy(guard) };
                let mut constraints: Vec<SymExpr> =
                    self.constraints.iter().map(|c| (**c).clone()).collect();
                constraints.push((*dead).clone());
                self.pruned.push(PathRecord {
                    constraints,
                    status: PathStatus::PrunedInfeasible,
                    witness: None,
                    return_value: None,
                    error: None,
                });
            }
            return Ok(c != 0);
        }
        let count = self.site_counts.entry(site).or_insert(0);
        *count += 1;
        if *count > self.shared.limits.max_loop_unroll {
            return Err(Stop::Budget);
        }
        let on_true = truthy(&folded);
        let on_false = falsy(&folded);
        if self.replaying() {
            let taken = self.prefix[self.decisions.len()] == 1;
            self.decisions.push(u8::from(taken));
            self.constraints.push(if taken { on_true } else { on_false });
            return Ok(taken);
        }
        let mut with_false = self.constraints.clone();
        with_false.push(on_false);
        let mut with_true = self.constraints.clone();
        with_true.push(on_true);
        let model_false = self.solve(&with_false);
        let model_true = self.solve(&with_true);
        let taken = match (model_false, model_true) {
            (Some(mf), Some(mt)) => {
                let mut decisions = self.decisions.clone();
                decisions.push(1);
                self.pending.push(WorkItem {
                    decisions,
                    constraints: with_true,
                    model: mt,
                });
                self.model = Some(mf);
                self.constraints = with_false;
                false
            }
            (Some(mf), None) => {
                self.model = Some(mf);
                self.constraints = with_false;
                false
            }
            (None, Some(mt)) => {
                self.model = Some(mt);
                self.constraints = with_true;
                true
            }
            (None, None) => return Err(Stop::Infeasible),
        };
        self.decisions.push(u8::from(taken));
        Ok(taken)
    }

    fn lookup(&self, name: &str) -> Val {
        let base = *self.frames.last().expect("inside a call");
        self.vars[base..]
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v.clone())
            .expect("typechecked variable")
    }

    fn assign(&mut self, name: &str, value: Val) {
        let base = *self.frames.last().expect("inside a call");
        let slot = self.vars[base..]
            .iter_mut()
            .rev()
            .find(|(n, _)| *n == name)
            .expect("typechecked variable");
        slot.1 = value;
    }

    fn declare(&mut self, name: &'a str, value: Val) {
        self.vars.push((name, value));
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scopes.push(self.vars.len());
        let r = f(self);
        let mark = self.scopes.pop().expect("balanced scopes");
        self.vars.truncate(mark);
        r
    }

    fn call(&mut self, func: &'a FunctionDef, args: Vec<Val>) -> Result<Option<Val>, Stop> {
        self.tick()?;
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Stop::Trap(RuntimeError::CallDepthExceeded));
        }
        self.depth += 1;
        let base = self.vars.len();
        self.frames.push(base);
        for (p, a) in func.params.iter().zip(args) {
            self.declare(p, a);
        }
        let flow = self.list(&func.body);
        self.vars.truncate(base);
        self.frames.pop();
        self.depth -= 1;
        Ok(match flow? {
            Flow::Return(v) => v,
            _ => None,
        })
    }

    fn list(&mut self, stmts: &'a [Stmt]) -> Result<Flow, Stop> {
        for s in stmts {
            match self.stmt(s)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &'a Stmt) -> Result<Flow, Stop> {
        self.tick()?;
        match s {
            Stmt::Block(stmts) => self.scoped(|r| r.list(stmts)),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let g = self.expr(cond)?;
                if self.branch(&g, site_of(s, 0))? {
                    self.stmt(then_branch)
                } else if let Some(e) = else_branch {
                    self.stmt(e)
                } else {
                    Ok(Flow::Normal)
                }
            }
            Stmt::While { cond, body } => {
                loop {
                    let g = self.expr(cond)?;
                    if !self.branch(&g, site_of(s, 0))? {
                        break;
                    }
                    match self.stmt(body)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    self.tick()?;
                }
                Ok(Flow::Normal)
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => self.scoped(|r| {
                if let Some(init) = init {
                    r.stmt(init)?;
                }
                loop {
                    if let Some(c) = cond {
                        let g = r.expr(c)?;
                        if !r.branch(&g, site_of(s, 0))? {
                            break;
                        }
                    }
                    match r.stmt(body)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    if let Some(step) = step {
                        r.expr(step)?;
                    }
                    r.tick()?;
                }
                Ok(Flow::Normal)
            }),
            Stmt::Switch {
                scrutinee,
                cases,
                default,
            } => {
                let v = fold_arc(&self.expr(scrutinee)?);
                let arm = match v.as_const() {
                    Some(c) => cases.iter().position(|case| case.label == c),
                    None => {
                        let mut chosen = None;
                        for (i, case) in cases.iter().enumerate() {
                            let test = mk_binary(BinaryOp::Eq, v.clone(), Arc::new(SymExpr::Const(case.label)));
                            if self.branch(&test, site_of(s, i))? {
                                chosen = Some(i);
                                break;
                            }
                        }
                        chosen
                    }
                };
                let start = match (arm, default) {
                    (Some(a), _) => a,
                    (None, Some(_)) => cases.len(),
                    (None, None) => return Ok(Flow::Normal),
                };
                let flow = self.scoped(|r| {
                    let arms = cases[start.min(cases.len())..]
                        .iter()
                        .map(|c| c.body.as_slice())
                        .chain(default.as_deref());
                    for body in arms {
                        match r.list(body)? {
                            Flow::Normal => {}
                            other => return Ok(other),
                        }
                    }
                    Ok(Flow::Normal)
                })?;
                match flow {
                    Flow::Break | Flow::Normal => Ok(Flow::Normal),
                    other => Ok(other),
                }
            }
            Stmt::Return(e) => {
                let v = e.as_ref().map(|e| self.expr(e)).transpose()?;
                Ok(Flow::Return(v))
            }
            Stmt::Expr(e) => {
                self.expr(e)?;
                Ok(Flow::Normal)
            }
            Stmt::Decl { name, init } => {
                let v = match init {
                    Some(e) => self.expr(e)?,
                    None => Arc::new(SymExpr::Const(0)),
                };
                self.declare(name, v);
                Ok(Flow::Normal)
            }
            Stmt::Break => Ok(Flow::Break),
            Stmt::Continue => Ok(Flow::Continue),
        }
    }

    fn expr(&mut self, e: &'a Expr) -> Result<Val, Stop> {
        Ok(match e {
            Expr::IntLit(v) => Arc::new(SymExpr::Const(*v)),
            Expr::Var(name) => self.lookup(name),
            Expr::Unary(op, a) => {
                let a = self.expr(a)?;
                mk_unary(*op, a)
            }
            Expr::Binary(BinaryOp::LogAnd, a, b) => {
                let va = self.expr(a)?;
                if !self.branch(&va, site_of(&**a, 0))? {
                    return Ok(Arc::new(SymExpr::Const(0)));
                }
                let vb = self.expr(b)?;
                Arc::new(SymExpr::Const(i32::from(self.branch(&vb, site_of(&**b, 0))?)))
            }
            Expr::Binary(BinaryOp::LogOr, a, b) => {
                let va = self.expr(a)?;
                if self.branch(&va, site_of(&**a, 0))? {
                    return Ok(Arc::new(SymExpr::Const(1)));
                }
                let vb = self.expr(b)?;
                Arc::new(SymExpr::Const(i32::from(self.branch(&vb, site_of(&**b, 0))?)))
            }
            Expr::Binary(op @ (BinaryOp::Div | BinaryOp::Rem), a, b) => {
                let va = self.expr(a)?;
                let vb = self.expr(b)?;
                let divisor = fold_arc(&vb);
                let traps = match divisor.as_const() {
                    Some(d) => d == 0,
                    None => {
                        let zero = mk_binary(BinaryOp::Eq, divisor, Arc::new(SymExpr::Const(0)));
                        self.branch(&zero, site_of(e, 1))?
                    }
                };
                if traps {
                    return Err(Stop::Trap(RuntimeError::DivisionByZero));
                }
                mk_binary(*op, va, vb)
            }
            Expr::Binary(op, a, b) => {
                let va = self.expr(a)?;
                let vb = self.expr(b)?;
                mk_binary(*op, va, vb)
            }
            Expr::Assign(name, value) => {
                let v = self.expr(value)?;
                self.assign(name, v.clone());
                v
            }
            Expr::Ternary(c, t, f) => {
                let g = self.expr(c)?;
                if self.branch(&g, site_of(&**c, 0))? {
                    self.expr(t)?
                } else {
                    self.expr(f)?
                }
            }
            Expr::Call(name, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.expr(a)?);
                }
                let func = self.shared.functions[name.as_str()];
                self.call(func, values)?.unwrap_or_else(|| Arc::new(SymExpr::Const(0)))
            }
        })
    }
}
