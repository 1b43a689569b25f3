use std::collections::HashSet;

use crate::frontend::{Expr, FunctionDef, SourceUnit, Stmt};

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Hands out identifiers that collide with nothing already in scope.
pub struct FreshNames {
    used: HashSet<String>,
}

impl FreshNames {
    /// Reserves every function name of the unit and every identifier of `func`.
    pub fn for_function(unit: &SourceUnit, func: &FunctionDef) -> Self {
        let mut used: HashSet<String> = unit.functions.iter().map(|f| f.name.clone()).collect();
        used.extend(func.params.iter().cloned());
        func.walk_stmts(&mut |s| {
            if let Stmt::Decl { name, .. } = s {
                used.insert(name.clone());
            }
        });
        func.walk_exprs(&mut |e| match e {
            Expr::Var(name) | Expr::Assign(name, _) => {
                used.insert(name.clone());
            }
            _ => {}
        });
        FreshNames { used }
    }

    /// `base`, or `base1`, `base2`, ... on collision.
    pub fn fresh(&mut self, base: &str) -> String {
        let mut candidate = base.to_string();
        let mut n = 1;
        while self.used.contains(&candidate) {
            candidate = format!("{base}{n}");
            n += 1;
        }
        self.used.insert(candidate.clone());
        candidate
    }

    pub fn reserve(&mut self, name: &str) -> bool {
        self.used.insert(name.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    #[test]
    fn fresh_names_skip_existing_identifiers() {
        let unit = parse("t.c", "int state(int cond) { int state1 = cond; return state1; }").unwrap();
        let mut names = FreshNames::for_function(&unit, &unit.functions[0]);
        assert_eq!(names.fresh("state"), "state2");
        assert_eq!(names.fresh("cond"), "cond1");
        assert_eq!(names.fresh("cond"), "cond2");
        assert_eq!(names.fresh("total"), "total");
    }
}
