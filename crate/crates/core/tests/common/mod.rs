//! Shared test helpers, most importantly an exhaustive satisfiability oracle
//! kept independent of the CDCL implementation.

use satcast::cnf::CnfFormula;

/// Exhaustive enumeration over assignments with falsified-clause pruning.
/// No unit propagation, no learning, no heuristics — branch on variables in
/// index order and prune only when a clause is fully falsified.
pub fn brute_force_sat(formula: &CnfFormula) -> bool {
    if formula.has_empty_clause() {
        return false;
    }
    let mut assignment: Vec<Option<bool>> = vec![None; formula.num_vars()];
    enumerate(formula, &mut assignment, 0)
}

fn enumerate(formula: &CnfFormula, assignment: &mut Vec<Option<bool>>, var: usize) -> bool {
    let mut all_satisfied = true;
    for clause in formula.clauses() {
        let mut satisfied = false;
        let mut open = false;
        for &lit in clause {
            match assignment[lit.unsigned_abs() as usize - 1] {
                None => open = true,
                Some(value) => {
                    if value == (lit > 0) {
                        satisfied = true;
                        break;
                    }
                }
            }
        }
        if !satisfied {
            if !open {
                return false; // clause falsified under this partial assignment
            }
            all_satisfied = false;
        }
    }
    if all_satisfied {
        return true;
    }
    if var == formula.num_vars() {
        return false;
    }
    for value in [false, true] {
        assignment[var] = Some(value);
        if enumerate(formula, assignment, var + 1) {
            assignment[var] = None;
            return true;
        }
    }
    assignment[var] = None;
    false
}

#[allow(dead_code)]
pub fn ratio_for(index: u64, lo: f64, hi: f64, steps: u64) -> f64 {
    lo + (hi - lo) * (index % steps) as f64 / (steps - 1) as f64
}
