//! Bounded-domain constraint search.
//!
//! Constraints are split into groups that share no variables and each group
//! is searched on its own. A group whose domain product fits in the budget
//! is scanned exhaustively in ascending order, first variable slowest.
//! Larger groups try boundary values and constants taken from the
//! constraints, then stratified random samples.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expr::SymExpr;
use super::ExplorationLimits;

const SAMPLE_SEED: u64 = 0x5eed_d0b5;
/// Random samples are drawn in batches with one value per stratum.
const STRATA: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Unsat,
    BudgetExceeded,
}

pub fn solve_model(
    constraints: &[Arc<SymExpr>],
    arity: usize,
    limits: &ExplorationLimits,
) -> Result<Vec<i32>, Failure> {
    let mut model = vec![0; arity];
    let var_sets: Vec<Vec<usize>> = constraints.iter().map(|c| c.vars()).collect();
    for (c, vars) in constraints.iter().zip(&var_sets) {
        if vars.is_empty() && c.eval(&model) == 0 {
            return Err(Failure::Unsat);
        }
    }
    for group in groups(&var_sets, arity) {
        let members: Vec<&SymExpr> = constraints
            .iter()
            .zip(&var_sets)
            .filter(|(_, vs)| vs.first().is_some_and(|v| group.contains(v)))
            .map(|(c, _)| &**c)
            .collect();
        search_group(&group, &members, &mut model, limits)?;
    }
    Ok(model)
}

/// Connected components of variables linked by shared constraints, each
/// sorted, ordered by smallest variable.
fn groups(var_sets: &[Vec<usize>], arity: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..arity).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut x = x;
        while parent[x] != root {
            let next = parent[x];
            parent[x] = root;
            x = next;
        }
        root
    }
    let mut used = vec![false; arity];
    for vars in var_sets {
        for &v in vars {
            used[v] = true;
        }
        for w in vars.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut root_index = vec![usize::MAX; arity];
    for v in (0..arity).filter(|&v| used[v]) {
        let r = find(&mut parent, v);
        if root_index[r] == usize::MAX {
            root_index[r] = out.len();
            out.push(Vec::new());
        }
        out[root_index[r]].push(v);
    }
    out
}

fn satisfied(members: &[&SymExpr], model: &[i32]) -> bool {
    members.iter().all(|c| c.eval(model) != 0)
}

/// Steps an odometer over `axes`, last variable fastest. False when wrapped.
fn advance(group: &[usize], axes: &[Vec<i32>], digits: &mut [usize], model: &mut [i32]) -> bool {
    for k in (0..group.len()).rev() {
        digits[k] += 1;
        if digits[k] < axes[k].len() {
            model[group[k]] = axes[k][digits[k]];
            return true;
        }
        digits[k] = 0;
        model[group[k]] = axes[k][0];
    }
    false
}

fn enumerate(
    group: &[usize],
    axes: &[Vec<i32>],
    members: &[&SymExpr],
    model: &mut [i32],
    budget: &mut u64,
) -> bool {
    let mut digits = vec![0; group.len()];
    for (k, &v) in group.iter().enumerate() {
        model[v] = axes[k][0];
    }
    loop {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if satisfied(members, model) {
            return true;
        }
        if !advance(group, axes, &mut digits, model) {
            return false;
        }
    }
}

fn search_group(
    group: &[usize],
    members: &[&SymExpr],
    model: &mut [i32],
    limits: &ExplorationLimits,
) -> Result<(), Failure> {
    let (lo, hi) = limits.domain;
    let width = (i64::from(hi) - i64::from(lo) + 1) as u64;
    let size = (0..group.len()).try_fold(1u64, |acc, _| acc.checked_mul(width));
    if size.is_some_and(|s| s <= limits.solver_budget) {
        let axis: Vec<i32> = (lo..=hi).collect();
        let axes = vec![axis; group.len()];
        let mut budget = u64::MAX;
        return if enumerate(group, &axes, members, model, &mut budget) {
            Ok(())
        } else {
            Err(Failure::Unsat)
        };
    }

    let mut budget = limits.solver_budget;
    let mut interesting = vec![lo, -1, 0, 1, hi];
    for c in members {
        let mut consts = Vec::new();
        c.constants(&mut consts);
        for k in consts {
            interesting.extend([k.wrapping_sub(1), k, k.wrapping_add(1)]);
        }
    }
    interesting.retain(|v| (lo..=hi).contains(v));
    interesting.sort_unstable();
    interesting.dedup();
    let axes = vec![interesting; group.len()];
    let mut boundary_budget = budget / 2;
    let spent_before = boundary_budget;
    if enumerate(group, &axes, members, model, &mut boundary_budget) {
        return Ok(());
    }
    budget -= spent_before - boundary_budget;

    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ group.len() as u64);
    let stratum = (width / STRATA as u64).max(1);
    let mut orders: Vec<Vec<usize>> = vec![(0..STRATA).collect(); group.len()];
    while budget > 0 {
        for order in orders.iter_mut() {
            order.shuffle(&mut rng);
        }
        for s in 0..STRATA {
            if budget == 0 {
                break;
            }
            budget -= 1;
            for (order, &v) in orders.iter().zip(group) {
                let base = i64::from(lo) + (order[s] as u64 * stratum) as i64;
                let offset = rng.random_range(0..stratum) as i64;
                model[v] = (base + offset).min(i64::from(hi)) as i32;
            }
            if satisfied(members, model) {
                return Ok(());
            }
        }
    }
    Err(Failure::BudgetExceeded)
}
