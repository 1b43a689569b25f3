//! Control-flow flattening.
//!
//! Each function containing an `if` is lowered to basic blocks, locals are
//! hoisted to the top of the function, and the blocks become the cases of a
//! `switch` on a state variable inside `while (1)`. State 0 is the entry
//! block; the others are numbered in depth-first pre-order of the successor
//! graph, then-branch first.

use std::collections::{HashMap, HashSet};

use super::names::FreshNames;
use super::{RewriteEntry, Rewritten};
use crate::frontend::typecheck::const_value;
use crate::frontend::{BinaryOp, Expr, FunctionDef, ReturnKind, SourceUnit, Stmt, SwitchCase};

pub(super) fn flatten(unit: &SourceUnit) -> Rewritten {
    let mut out = unit.clone();
    let mut log = Vec::new();
    for (fi, func) in out.functions.iter_mut().enumerate() {
        if !func.contains_if() {
            continue;
        }
        let states = flatten_function(unit, &unit.functions[fi], func);
        log.push(RewriteEntry::new(
            format!("function {}", func.name),
            format!("flattened into {states} states"),
        ));
    }
    Rewritten {
        unit: out,
        annotations: Vec::new(),
        log,
    }
}

/// Gives every local a function-unique name so declarations can be hoisted.
struct Hoister {
    names: FreshNames,
    taken: HashSet<String>,
    scopes: Vec<HashMap<String, String>>,
    hoisted: Vec<String>,
}

impl Hoister {
    fn lookup(&self, name: &str) -> String {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name))
            .cloned()
            .unwrap_or_else(|| name.to_string())
    }

    fn expr(&self, e: Expr) -> Expr {
        match e {
            Expr::IntLit(_) => e,
            Expr::Var(name) => Expr::Var(self.lookup(&name)),
            Expr::Unary(op, a) => Expr::unary(op, self.expr(*a)),
            Expr::Binary(op, a, b) => Expr::binary(op, self.expr(*a), self.expr(*b)),
            Expr::Assign(name, v) => Expr::Assign(self.lookup(&name), Box::new(self.expr(*v))),
            Expr::Ternary(c, t, f) => Expr::ternary(self.expr(*c), self.expr(*t), self.expr(*f)),
            Expr::Call(name, args) => Expr::Call(name, args.into_iter().map(|a| self.expr(a)).collect()),
        }
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scopes.push(HashMap::new());
        let r = f(self);
        self.scopes.pop();
        r
    }

    fn list(&mut self, stmts: Vec<Stmt>) -> Vec<Stmt> {
        stmts.into_iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, s: Stmt) -> Stmt {
        match s {
            Stmt::Block(stmts) => Stmt::Block(self.scoped(|h| h.list(stmts))),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => Stmt::If {
                cond: self.expr(cond),
                then_branch: Box::new(self.stmt(*then_branch)),
                else_branch: else_branch.map(|e| Box::new(self.stmt(*e))),
            },
            Stmt::While { cond, body } => Stmt::While {
                cond: self.expr(cond),
                body: Box::new(self.stmt(*body)),
            },
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => self.scoped(|h| Stmt::For {
                init: init.map(|i| Box::new(h.stmt(*i))),
                cond: cond.map(|c| h.expr(c)),
                step: step.map(|s| h.expr(s)),
                body: Box::new(h.stmt(*body)),
            }),
            Stmt::Switch {
                scrutinee,
                cases,
                default,
            } => {
                let scrutinee = self.expr(scrutinee);
                self.scoped(|h| Stmt::Switch {
                    scrutinee,
                    cases: cases
                        .into_iter()
                        .map(|c| SwitchCase {
                            label: c.label,
                            body: h.list(c.body),
                        })
                        .collect(),
                    default: default.map(|d| h.list(d)),
                })
            }
            Stmt::Return(e) => Stmt::Return(e.map(|e| self.expr(e))),
            Stmt::Expr(e) => Stmt::Expr(self.expr(e)),
            Stmt::Decl { name, init } => {
                let init = init.map(|e| self.expr(e));
                let unique = if self.taken.contains(&name) {
                    self.names.fresh(&name)
                } else {
                    name.clone()
                };
                self.taken.insert(unique.clone());
                self.scopes
                    .last_mut()
                    .expect("scope stack is never empty")
                    .insert(name, unique.clone());
                self.hoisted.push(unique.clone());
                Stmt::Decl { name: unique, init }
            }
            Stmt::Break | Stmt::Continue => s,
        }
    }
}

#[derive(Debug, Clone)]
enum Term {
    Open,
    Goto(usize),
    Branch(Expr, usize, usize),
    Switch(Expr, Vec<(i32, usize)>, usize),
    Return(Option<Expr>),
}

#[derive(Debug)]
struct Block {
    stmts: Vec<Stmt>,
    term: Term,
}

struct Cfg {
    blocks: Vec<Block>,
    current: usize,
    breaks: Vec<usize>,
    continues: Vec<usize>,
}

fn is_const_true(e: &Expr) -> bool {
    const_value(e).is_some_and(|v| v != 0)
}

impl Cfg {
    fn new_block(&mut self) -> usize {
        self.blocks.push(Block {
            stmts: Vec::new(),
            term: Term::Open,
        });
        self.blocks.len() - 1
    }

    fn seal(&mut self, term: Term) {
        let block = &mut self.blocks[self.current];
        if matches!(block.term, Term::Open) {
            block.term = term;
        }
    }

    /// Ends the current block with `term` and continues in a fresh,
    /// unreachable block.
    fn jump(&mut self, term: Term) {
        self.seal(term);
        self.current = self.new_block();
    }

    fn list(&mut self, stmts: Vec<Stmt>) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: Stmt) {
        match s {
            Stmt::Block(stmts) => self.list(stmts),
            Stmt::Expr(e) => self.blocks[self.current].stmts.push(Stmt::Expr(e)),
            Stmt::Decl { name, init } => {
                let value = init.unwrap_or(Expr::IntLit(0));
                self.blocks[self.current]
                    .stmts
                    .push(Stmt::Expr(Expr::Assign(name, Box::new(value))));
            }
            Stmt::Return(e) => self.jump(Term::Return(e)),
            Stmt::Break => {
                let target = *self.breaks.last().expect("typechecked break");
                self.jump(Term::Goto(target));
            }
            Stmt::Continue => {
                let target = *self.continues.last().expect("typechecked continue");
                self.jump(Term::Goto(target));
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let then_block = self.new_block();
                let else_block = else_branch.as_ref().map(|_| self.new_block());
                let join = self.new_block();
                self.seal(Term::Branch(cond, then_block, else_block.unwrap_or(join)));
                self.current = then_block;
                self.stmt(*then_branch);
                self.seal(Term::Goto(join));
                if let (Some(block), Some(body)) = (else_block, else_branch) {
                    self.current = block;
                    self.stmt(*body);
                    self.seal(Term::Goto(join));
                }
                self.current = join;
            }
            Stmt::While { cond, body } => self.lower_loop(None, Some(cond), None, *body),
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => self.lower_loop(init.map(|i| *i), cond, step, *body),
            Stmt::Switch {
                scrutinee,
                cases,
                default,
            } => {
                let exit = self.new_block();
                let arm_blocks: Vec<usize> = cases.iter().map(|_| self.new_block()).collect();
                let default_block = default.as_ref().map(|_| self.new_block());
                let arms = cases
                    .iter()
                    .zip(&arm_blocks)
                    .map(|(c, &b)| (c.label, b))
                    .collect();
                self.seal(Term::Switch(scrutinee, arms, default_block.unwrap_or(exit)));
                let mut bodies: Vec<Vec<Stmt>> = cases.into_iter().map(|c| c.body).collect();
                let mut blocks = arm_blocks;
                if let (Some(d), Some(b)) = (default, default_block) {
                    bodies.push(d);
                    blocks.push(b);
                }
                self.breaks.push(exit);
                for (i, body) in bodies.into_iter().enumerate() {
                    self.current = blocks[i];
                    self.list(body);
                    let next = blocks.get(i + 1).copied().unwrap_or(exit);
                    self.seal(Term::Goto(next));
                }
                self.breaks.pop();
                self.current = exit;
            }
        }
    }

    fn lower_loop(&mut self, init: Option<Stmt>, cond: Option<Expr>, step: Option<Expr>, body: Stmt) {
        if let Some(init) = init {
            self.stmt(init);
        }
        let head = self.new_block();
        let body_block = self.new_block();
        let step_block = step.as_ref().map(|_| self.new_block());
        let exit = self.new_block();
        self.seal(Term::Goto(head));
        self.current = head;
        match cond {
            Some(c) if !is_const_true(&c) => self.seal(Term::Branch(c, body_block, exit)),
            _ => self.seal(Term::Goto(body_block)),
        }
        let latch = step_block.unwrap_or(head);
        self.breaks.push(exit);
        self.continues.push(latch);
        self.current = body_block;
        self.stmt(body);
        self.seal(Term::Goto(latch));
        self.breaks.pop();
        self.continues.pop();
        if let (Some(block), Some(step)) = (step_block, step) {
            self.current = block;
            self.blocks[block].stmts.push(Stmt::Expr(step));
            self.seal(Term::Goto(head));
        }
        self.current = exit;
    }

    /// Follows chains of empty `goto` blocks.
    fn resolve(&self, mut target: usize) -> usize {
        let mut seen = HashSet::new();
        while let Block {
            stmts,
            term: Term::Goto(next),
        } = &self.blocks[target]
        {
            if !stmts.is_empty() || !seen.insert(target) {
                break;
            }
            target = *next;
        }
        target
    }

    fn successors(&self, block: usize) -> Vec<usize> {
        let targets = match &self.blocks[block].term {
            Term::Open | Term::Return(_) => Vec::new(),
            Term::Goto(t) => vec![*t],
            Term::Branch(_, t, f) => vec![*t, *f],
            Term::Switch(_, arms, d) => arms.iter().map(|(_, b)| *b).chain([*d]).collect(),
        };
        targets.into_iter().map(|t| self.resolve(t)).collect()
    }

    /// State numbers by depth-first pre-order from the entry block.
    fn number_states(&self) -> (HashMap<usize, i32>, Vec<usize>) {
        let mut numbers = HashMap::new();
        let mut order = Vec::new();
        let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        numbers.insert(0, 0);
        order.push(0);
        stack.push((0, self.successors(0), 0));
        while let Some((_, succs, next)) = stack.last_mut() {
            if *next == succs.len() {
                stack.pop();
                continue;
            }
            let s = succs[*next];
            *next += 1;
            if numbers.contains_key(&s) {
                continue;
            }
            numbers.insert(s, order.len() as i32);
            order.push(s);
            let succs = self.successors(s);
            stack.push((s, succs, 0));
        }
        (numbers, order)
    }
}

fn flatten_function(unit: &SourceUnit, original: &FunctionDef, func: &mut FunctionDef) -> usize {
    let mut names = FreshNames::for_function(unit, original);
    let mut taken: HashSet<String> = unit.functions.iter().map(|f| f.name.clone()).collect();
    taken.extend(func.params.iter().cloned());
    let params: HashMap<String, String> = func.params.iter().map(|p| (p.clone(), p.clone())).collect();
    for name in taken.iter() {
        names.reserve(name);
    }
    let mut hoister = Hoister {
        names,
        taken,
        scopes: vec![params],
        hoisted: Vec::new(),
    };
    let body = hoister.list(std::mem::take(&mut func.body));
    let state = hoister.names.fresh("state");

    let mut cfg = Cfg {
        blocks: Vec::new(),
        current: 0,
        breaks: Vec::new(),
        continues: Vec::new(),
    };
    cfg.new_block();
    cfg.list(body);
    cfg.seal(Term::Return(match func.return_kind {
        ReturnKind::Int => Some(Expr::IntLit(0)),
        ReturnKind::Void => None,
    }));

    let (numbers, order) = cfg.number_states();
    let goto = |target: usize| Expr::IntLit(numbers[&cfg.resolve(target)]);
    let set_state = |value: Expr| Stmt::Expr(Expr::Assign(state.clone(), Box::new(value)));
    let mut extra_locals = Vec::new();
    let mut cases = Vec::with_capacity(order.len());
    for (n, &b) in order.iter().enumerate() {
        let block = &cfg.blocks[b];
        let mut stmts = block.stmts.clone();
        match &block.term {
            Term::Open => unreachable!("every block is sealed"),
            Term::Return(e) => stmts.push(Stmt::Return(e.clone())),
            Term::Goto(t) => {
                stmts.push(set_state(goto(*t)));
                stmts.push(Stmt::Break);
            }
            Term::Branch(c, t, f) => {
                stmts.push(set_state(Expr::ternary(c.clone(), goto(*t), goto(*f))));
                stmts.push(Stmt::Break);
            }
            Term::Switch(scrutinee, arms, d) => {
                let key = match scrutinee {
                    Expr::Var(_) | Expr::IntLit(_) => scrutinee.clone(),
                    other => {
                        let temp = hoister.names.fresh("cond");
                        stmts.push(Stmt::Expr(Expr::Assign(temp.clone(), Box::new(other.clone()))));
                        extra_locals.push(temp.clone());
                        Expr::Var(temp)
                    }
                };
                let mut chain = goto(*d);
                for (label, target) in arms.iter().rev() {
                    let test = Expr::binary(BinaryOp::Eq, key.clone(), Expr::IntLit(*label));
                    chain = Expr::ternary(test, goto(*target), chain);
                }
                stmts.push(set_state(chain));
                stmts.push(Stmt::Break);
            }
        }
        cases.push(SwitchCase {
            label: n as i32,
            body: stmts,
        });
    }

    let mut new_body: Vec<Stmt> = hoister
        .hoisted
        .iter()
        .chain(&extra_locals)
        .map(|name| Stmt::decl(name, None))
        .collect();
    new_body.push(Stmt::decl(&state, Some(Expr::IntLit(0))));
    new_body.push(Stmt::While {
        cond: Expr::IntLit(1),
        body: Box::new(Stmt::Block(vec![Stmt::Switch {
            scrutinee: Expr::Var(state.clone()),
            cases,
            default: None,
        }])),
    });
    func.body = new_body;
    order.len()
}
