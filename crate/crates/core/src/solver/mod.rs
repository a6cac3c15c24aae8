//! CDCL SAT solver: unit propagation with two watched literals per clause,
//! first-UIP conflict analysis with clause learning, non-chronological
//! backjumping, VSIDS branching with phase saving, geometric restarts and
//! activity-based learnt-clause deletion.
//!
//! Every analyzed conflict produces one [`ConflictEvent`] delivered to all
//! registered observers in order; restart boundaries are announced before
//! each restart segment begins. A conflict at decision level zero ends the
//! search (UNSAT) and is counted in `total_conflicts` but emits no event,
//! since no clause is learnt from it.

mod heap;

use crate::cnf::CnfFormula;
use heap::{HeapKeys, VarHeap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Solver parameters. Defaults mirror MiniSat: restart base 100, geometric
/// factor 1.5, variable decay 0.95, clause decay 0.999.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub restarts_enabled: bool,
    /// Conflict limit of the first restart segment.
    pub restart_base: u64,
    /// Geometric growth factor of successive restart limits.
    pub restart_factor: f64,
    /// Give up (verdict `BudgetExhausted`) after this many conflicts.
    pub conflict_budget: u64,
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Seed for branching tie-breaks.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts_enabled: true,
            restart_base: 100,
            restart_factor: 1.5,
            conflict_budget: u64::MAX,
            var_decay: 0.95,
            clause_decay: 0.999,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.restart_base < 1 {
            return Err("restart_base must be >= 1".into());
        }
        if self.restart_factor <= 1.0 {
            return Err("restart_factor must be > 1".into());
        }
        if self.conflict_budget < 1 {
            return Err("conflict_budget must be >= 1".into());
        }
        if self.var_decay <= 0.0 || self.var_decay >= 1.0 {
            return Err("var_decay must lie in (0,1)".into());
        }
        if self.clause_decay <= 0.0 || self.clause_decay >= 1.0 {
            return Err("clause_decay must lie in (0,1)".into());
        }
        Ok(())
    }
}

/// Conflict limit of the `k`-th restart segment (1-based):
/// `floor(restart_base * restart_factor^(k-1))`.
///
/// The tiny relative nudge before flooring compensates for decimal factors
/// such as 1.2 not being exactly representable in binary floating point
/// (without it, 100 * 1.2^2 evaluates to 143.999... and floors to 143).
pub fn restart_schedule(config: &SolverConfig, k: u32) -> u64 {
    assert!(k >= 1, "restart index is 1-based");
    let raw = config.restart_base as f64 * config.restart_factor.powi(k as i32 - 1);
    (raw * (1.0 + 1e-12)).floor() as u64
}

/// One record per analyzed conflict.
///
/// Live-clause counters cover original plus surviving learnt clauses, taken
/// right after the freshly learnt clause is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConflictEvent {
    /// Running count of analyzed conflicts, from 1, gapless.
    pub conflict_index: u64,
    /// 1-based restart segment this conflict occurred in.
    pub restart_index: u32,
    pub decision_level_at_conflict: u32,
    /// Assigned-variable count (decisions + propagations) at the conflict.
    pub trail_size_at_conflict: usize,
    pub backjump_target_level: u32,
    /// Assigned-variable count right after the backjump, before the learnt
    /// clause's asserting literal is enqueued.
    pub trail_size_after_backjump: usize,
    pub learnt_clause_size: usize,
    /// Size of the falsified clause that triggered the conflict.
    pub conflict_clause_size: usize,
    /// Original + live learnt clauses.
    pub current_num_clauses: usize,
    pub live_binary_clauses: usize,
    pub live_ternary_clauses: usize,
    /// Total literal count over all live clauses.
    pub live_clause_literals: usize,
}

impl ConflictEvent {
    /// Search depth read from the assignment stack.
    pub fn trail_depth(&self) -> usize {
        self.trail_size_at_conflict
    }

    /// Search depth in the corresponding binary tree: the decision level.
    pub fn decision_level_depth(&self) -> u32 {
        self.decision_level_at_conflict
    }

    /// Decision levels undone by the backjump.
    pub fn backjump_size(&self) -> u32 {
        self.decision_level_at_conflict - self.backjump_target_level
    }
}

/// Receives the solver's event stream. Callbacks run synchronously on the
/// solver's thread, in registration order.
pub trait SearchObserver {
    /// Announced when restart segment `restart_index` (1-based) begins,
    /// including the first. `conflict_limit` is `u64::MAX` when restarts
    /// are disabled.
    fn on_restart(&mut self, _restart_index: u32, _conflict_limit: u64) {}
    fn on_conflict(&mut self, _event: &ConflictEvent) {}
}

impl SearchObserver for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Sat,
    Unsat,
    BudgetExhausted,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Sat => write!(f, "sat"),
            Verdict::Unsat => write!(f, "unsat"),
            Verdict::BudgetExhausted => write!(f, "unknown"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub verdict: Verdict,
    /// Satisfying assignment indexed by variable - 1 (SAT only), verified
    /// against every original clause before being returned.
    pub model: Option<Vec<bool>>,
    /// Every conflict detected, including a final level-zero conflict.
    pub total_conflicts: u64,
    /// Restart boundaries crossed (0 when the first segment finished the job).
    pub restarts_used: u32,
}

// ---------------------------------------------------------------------------
// internal representation

/// Literal encoded as `var << 1 | positive`, variables 0-based internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, positive: bool) -> Lit {
        Lit(((var as u32) << 1) | positive as u32)
    }

    fn from_dimacs(lit: i32) -> Lit {
        Lit::new(lit.unsigned_abs() as usize - 1, lit > 0)
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn positive(self) -> bool {
        self.0 & 1 == 1
    }

    fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

struct Clause {
    lits: Vec<Lit>,
    activity: f64,
    learnt: bool,
}

type CRef = u32;

/// Clause arena with a free list and live-DB counters.
struct ClauseDb {
    slots: Vec<Option<Clause>>,
    free: Vec<CRef>,
    live_clauses: usize,
    live_learnts: usize,
    live_binary: usize,
    live_ternary: usize,
    live_literals: usize,
}

impl ClauseDb {
    fn new() -> Self {
        ClauseDb {
            slots: Vec::new(),
            free: Vec::new(),
            live_clauses: 0,
            live_learnts: 0,
            live_binary: 0,
            live_ternary: 0,
            live_literals: 0,
        }
    }

    fn alloc(&mut self, lits: Vec<Lit>, learnt: bool) -> CRef {
        debug_assert!(lits.len() >= 2);
        self.live_clauses += 1;
        self.live_learnts += learnt as usize;
        self.live_binary += (lits.len() == 2) as usize;
        self.live_ternary += (lits.len() == 3) as usize;
        self.live_literals += lits.len();
        let clause = Clause {
            lits,
            activity: 0.0,
            learnt,
        };
        if let Some(cref) = self.free.pop() {
            self.slots[cref as usize] = Some(clause);
            cref
        } else {
            self.slots.push(Some(clause));
            (self.slots.len() - 1) as CRef
        }
    }

    fn release(&mut self, cref: CRef) {
        let clause = self.slots[cref as usize].take().expect("live clause");
        self.live_clauses -= 1;
        self.live_learnts -= clause.learnt as usize;
        self.live_binary -= (clause.lits.len() == 2) as usize;
        self.live_ternary -= (clause.lits.len() == 3) as usize;
        self.live_literals -= clause.lits.len();
        self.free.push(cref);
    }

    fn get(&self, cref: CRef) -> &Clause {
        self.slots[cref as usize].as_ref().expect("live clause")
    }

    fn get_mut(&mut self, cref: CRef) -> &mut Clause {
        self.slots[cref as usize].as_mut().expect("live clause")
    }
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

enum SearchStatus {
    Sat,
    Unsat,
    Restart,
    Budget,
}

struct Searcher<'a> {
    config: &'a SolverConfig,
    num_vars: usize,
    db: ClauseDb,
    watches: Vec<Vec<Watcher>>,
    assign: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    tie_break: Vec<u64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    tmp_analyze: Vec<Lit>,
    total_conflicts: u64,
    analyzed_conflicts: u64,
    restart_index: u32,
    max_learnts: f64,
    learntsize_adjust_confl: f64,
    learntsize_adjust_cnt: i64,
}

const VAR_RESCALE_LIMIT: f64 = 1e100;
const CLA_RESCALE_LIMIT: f64 = 1e20;

impl<'a> Searcher<'a> {
    fn new(num_vars: usize, config: &'a SolverConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let tie_break: Vec<u64> = (0..num_vars).map(|_| rng.gen()).collect();
        let activity = vec![0.0; num_vars];
        let heap = VarHeap::new(
            num_vars,
            &HeapKeys {
                activity: &activity,
                tie_break: &tie_break,
            },
        );
        Searcher {
            config,
            num_vars,
            db: ClauseDb::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assign: vec![None; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            tie_break,
            var_inc: 1.0,
            cla_inc: 1.0,
            heap,
            polarity: vec![false; num_vars],
            seen: vec![false; num_vars],
            tmp_analyze: Vec::new(),
            total_conflicts: 0,
            analyzed_conflicts: 0,
            restart_index: 1,
            max_learnts: 0.0,
            learntsize_adjust_confl: 100.0,
            learntsize_adjust_cnt: 100,
        }
    }

    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.assign[lit.var()].map(|assigned| assigned == lit.positive())
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn unchecked_enqueue(&mut self, lit: Lit, reason: Option<CRef>) {
        debug_assert!(self.lit_value(lit).is_none());
        let var = lit.var();
        self.assign[var] = Some(lit.positive());
        self.level[var] = self.decision_level();
        self.reason[var] = reason;
        self.trail.push(lit);
    }

    /// Adds an original clause; returns false when the database is already
    /// inconsistent at level zero.
    fn add_original_clause(&mut self, lits: &[i32]) -> bool {
        debug_assert_eq!(self.decision_level(), 0);
        let lits: Vec<Lit> = lits.iter().map(|&l| Lit::from_dimacs(l)).collect();
        if lits.len() == 1 {
            return match self.lit_value(lits[0]) {
                Some(true) => true,
                Some(false) => false,
                None => {
                    self.unchecked_enqueue(lits[0], None);
                    true
                }
            };
        }
        let cref = self.db.alloc(lits, false);
        self.attach(cref);
        true
    }

    fn attach(&mut self, cref: CRef) {
        let (l0, l1) = {
            let lits = &self.db.get(cref).lits;
            (lits[0], lits[1])
        };
        self.watches[l0.negate().code()].push(Watcher { cref, blocker: l1 });
        self.watches[l1.negate().code()].push(Watcher { cref, blocker: l0 });
    }

    fn detach(&mut self, cref: CRef) {
        let (l0, l1) = {
            let lits = &self.db.get(cref).lits;
            (lits[0], lits[1])
        };
        for lit in [l0, l1] {
            let ws = &mut self.watches[lit.negate().code()];
            let pos = ws
                .iter()
                .position(|w| w.cref == cref)
                .expect("attached clause is watched");
            ws.swap_remove(pos);
        }
    }

    fn remove_clause(&mut self, cref: CRef) {
        self.detach(cref);
        // a locked clause is never removed, so no reason fixup is needed
        self.db.release(cref);
    }

    fn locked(&self, cref: CRef) -> bool {
        let first = self.db.get(cref).lits[0];
        self.reason[first.var()] == Some(cref) && self.lit_value(first) == Some(true)
    }

    fn var_bump_activity(&mut self, var: usize) {
        self.activity[var] += self.var_inc;
        if self.activity[var] > VAR_RESCALE_LIMIT {
            for a in &mut self.activity {
                *a *= 1.0 / VAR_RESCALE_LIMIT;
            }
            self.var_inc *= 1.0 / VAR_RESCALE_LIMIT;
        }
        let keys = HeapKeys {
            activity: &self.activity,
            tie_break: &self.tie_break,
        };
        self.heap.decrease(var, &keys);
    }

    fn var_decay_activity(&mut self) {
        self.var_inc *= 1.0 / self.config.var_decay;
    }

    fn cla_bump_activity(&mut self, cref: CRef) {
        let activity = {
            let clause = self.db.get_mut(cref);
            clause.activity += self.cla_inc;
            clause.activity
        };
        if activity > CLA_RESCALE_LIMIT {
            for slot in self.db.slots.iter_mut().flatten() {
                if slot.learnt {
                    slot.activity *= 1.0 / CLA_RESCALE_LIMIT;
                }
            }
            self.cla_inc *= 1.0 / CLA_RESCALE_LIMIT;
        }
    }

    fn cla_decay_activity(&mut self) {
        self.cla_inc *= 1.0 / self.config.clause_decay;
    }

    fn propagate(&mut self) -> Option<CRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let pcode = p.code();
            let false_lit = p.negate();
            let mut i = 0;
            let mut j = 0;
            let n = self.watches[pcode].len();
            while i < n {
                let w = self.watches[pcode][i];
                i += 1;
                if self.lit_value(w.blocker) == Some(true) {
                    self.watches[pcode][j] = w;
                    j += 1;
                    continue;
                }
                enum Outcome {
                    Keep(Lit),
                    Relocated(Lit),
                    Unit(Lit),
                    Conflict,
                }
                let outcome = {
                    let assign = &self.assign;
                    let value = |l: Lit| assign[l.var()].map(|a| a == l.positive());
                    let clause = self.db.get_mut(w.cref);
                    if clause.lits[0] == false_lit {
                        clause.lits.swap(0, 1);
                    }
                    debug_assert_eq!(clause.lits[1], false_lit);
                    let first = clause.lits[0];
                    if value(first) == Some(true) {
                        Outcome::Keep(first)
                    } else {
                        let replacement = (2..clause.lits.len())
                            .find(|&k| value(clause.lits[k]) != Some(false));
                        match replacement {
                            Some(k) => {
                                clause.lits.swap(1, k);
                                Outcome::Relocated(clause.lits[1])
                            }
                            None if value(first) == Some(false) => Outcome::Conflict,
                            None => Outcome::Unit(first),
                        }
                    }
                };
                match outcome {
                    Outcome::Keep(first) => {
                        self.watches[pcode][j] = Watcher {
                            cref: w.cref,
                            blocker: first,
                        };
                        j += 1;
                    }
                    Outcome::Relocated(new_watch) => {
                        let first = self.db.get(w.cref).lits[0];
                        self.watches[new_watch.negate().code()].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                    }
                    Outcome::Unit(first) => {
                        self.watches[pcode][j] = Watcher {
                            cref: w.cref,
                            blocker: first,
                        };
                        j += 1;
                        self.unchecked_enqueue(first, Some(w.cref));
                    }
                    Outcome::Conflict => {
                        self.watches[pcode][j] = Watcher {
                            cref: w.cref,
                            blocker: self.db.get(w.cref).lits[0],
                        };
                        j += 1;
                        while i < n {
                            self.watches[pcode][j] = self.watches[pcode][i];
                            j += 1;
                            i += 1;
                        }
                        self.watches[pcode].truncate(j);
                        self.qhead = self.trail.len();
                        return Some(w.cref);
                    }
                }
            }
            self.watches[pcode].truncate(j);
        }
        None
    }

    /// First-UIP conflict analysis with basic recursive-free minimization.
    /// Returns the learnt clause (asserting literal first, a literal of the
    /// backjump level second) and the backjump level.
    fn analyze(&mut self, confl: CRef) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit(0)]; // slot 0 holds the asserting literal
        let mut path_count: u32 = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let mut confl = confl;

        loop {
            if self.db.get(confl).learnt {
                self.cla_bump_activity(confl);
            }
            self.tmp_analyze.clear();
            let skip = usize::from(p.is_some());
            {
                let lits = &self.db.get(confl).lits;
                self.tmp_analyze.extend_from_slice(&lits[skip..]);
            }
            for k in 0..self.tmp_analyze.len() {
                let q = self.tmp_analyze[k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.var_bump_activity(v);
                    self.seen[v] = true;
                    if self.level[v] >= self.decision_level() {
                        path_count += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // walk back to the next marked literal on the trail
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let pl = self.trail[index];
            self.seen[pl.var()] = false;
            path_count -= 1;
            p = Some(pl);
            if path_count == 0 {
                break;
            }
            confl = self.reason[pl.var()].expect("conflict-path literal has a reason");
        }
        learnt[0] = p.expect("first UIP found").negate();

        // basic minimization: drop literals implied by the rest of the clause
        let mut minimized = Vec::with_capacity(learnt.len());
        minimized.push(learnt[0]);
        for &lit in &learnt[1..] {
            if !self.implied_by_seen(lit) {
                minimized.push(lit);
            }
        }
        // clear marks
        for &lit in &learnt[1..] {
            self.seen[lit.var()] = false;
        }

        let backjump_level = if minimized.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..minimized.len() {
                if self.level[minimized[i].var()] > self.level[minimized[max_i].var()] {
                    max_i = i;
                }
            }
            minimized.swap(1, max_i);
            self.level[minimized[1].var()]
        };
        (minimized, backjump_level)
    }

    /// True when `lit`'s reason clause consists only of marked or level-zero
    /// literals, making `lit` redundant in the learnt clause.
    fn implied_by_seen(&self, lit: Lit) -> bool {
        match self.reason[lit.var()] {
            None => false,
            Some(r) => self.db.get(r).lits[1..]
                .iter()
                .all(|&q| self.seen[q.var()] || self.level[q.var()] == 0),
        }
    }

    fn cancel_until(&mut self, target_level: u32) {
        if self.decision_level() <= target_level {
            return;
        }
        let bound = self.trail_lim[target_level as usize];
        for idx in (bound..self.trail.len()).rev() {
            let lit = self.trail[idx];
            let var = lit.var();
            self.assign[var] = None;
            self.polarity[var] = lit.positive();
            self.reason[var] = None;
            if !self.heap.in_heap(var) {
                let keys = HeapKeys {
                    activity: &self.activity,
                    tie_break: &self.tie_break,
                };
                self.heap.insert(var, &keys);
            }
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(target_level as usize);
        self.qhead = self.trail.len();
    }

    fn pick_branch_lit(&mut self) -> Option<Lit> {
        loop {
            let keys = HeapKeys {
                activity: &self.activity,
                tie_break: &self.tie_break,
            };
            let var = self.heap.pop_max(&keys)?;
            if self.assign[var].is_none() {
                return Some(Lit::new(var, self.polarity[var]));
            }
        }
    }

    /// Removes roughly half of the learnt clauses, lowest activity first.
    /// Binary and locked clauses survive.
    fn reduce_db(&mut self) {
        let mut learnts: Vec<CRef> = (0..self.db.slots.len() as CRef)
            .filter(|&cref| {
                self.db.slots[cref as usize]
                    .as_ref()
                    .is_some_and(|c| c.learnt)
            })
            .collect();
        learnts.sort_by(|&a, &b| {
            let (aa, ab) = (self.db.get(a).activity, self.db.get(b).activity);
            aa.partial_cmp(&ab).expect("activities are finite").then(a.cmp(&b))
        });
        let extra_lim = self.cla_inc / learnts.len().max(1) as f64;
        let half = learnts.len() / 2;
        for (i, &cref) in learnts.iter().enumerate() {
            let clause = self.db.get(cref);
            if clause.lits.len() > 2
                && !self.locked(cref)
                && (i < half || clause.activity < extra_lim)
            {
                self.remove_clause(cref);
            }
        }
    }

    fn emit_event(
        &self,
        observers: &mut [&mut dyn SearchObserver],
        level_at: u32,
        trail_at: usize,
        backjump_level: u32,
        trail_after: usize,
        learnt_size: usize,
        conflict_size: usize,
    ) {
        let event = ConflictEvent {
            conflict_index: self.analyzed_conflicts,
            restart_index: self.restart_index,
            decision_level_at_conflict: level_at,
            trail_size_at_conflict: trail_at,
            backjump_target_level: backjump_level,
            trail_size_after_backjump: trail_after,
            learnt_clause_size: learnt_size,
            conflict_clause_size: conflict_size,
            current_num_clauses: self.db.live_clauses,
            live_binary_clauses: self.db.live_binary,
            live_ternary_clauses: self.db.live_ternary,
            live_clause_literals: self.db.live_literals,
        };
        for observer in observers.iter_mut() {
            observer.on_conflict(&event);
        }
    }

    fn search(
        &mut self,
        restart_limit: Option<u64>,
        observers: &mut [&mut dyn SearchObserver],
    ) -> SearchStatus {
        let mut conflicts_this_restart: u64 = 0;
        loop {
            if let Some(confl) = self.propagate() {
                self.total_conflicts += 1;
                conflicts_this_restart += 1;
                if self.decision_level() == 0 {
                    return SearchStatus::Unsat;
                }
                let conflict_size = self.db.get(confl).lits.len();
                let level_at = self.decision_level();
                let trail_at = self.trail.len();
                let (learnt, backjump_level) = self.analyze(confl);
                self.cancel_until(backjump_level);
                let trail_after = self.trail.len();
                let learnt_size = learnt.len();
                if learnt.len() == 1 {
                    self.unchecked_enqueue(learnt[0], None);
                } else {
                    let cref = self.db.alloc(learnt, true);
                    self.cla_bump_activity(cref);
                    self.attach(cref);
                    let asserting = self.db.get(cref).lits[0];
                    self.unchecked_enqueue(asserting, Some(cref));
                }
                self.analyzed_conflicts += 1;
                self.emit_event(
                    observers,
                    level_at,
                    trail_at,
                    backjump_level,
                    trail_after,
                    learnt_size,
                    conflict_size,
                );
                self.var_decay_activity();
                self.cla_decay_activity();

                self.learntsize_adjust_cnt -= 1;
                if self.learntsize_adjust_cnt == 0 {
                    self.learntsize_adjust_confl *= 1.5;
                    self.learntsize_adjust_cnt = self.learntsize_adjust_confl as i64;
                    self.max_learnts *= 1.1;
                }

                if self.total_conflicts >= self.config.conflict_budget {
                    self.cancel_until(0);
                    return SearchStatus::Budget;
                }
                if let Some(limit) = restart_limit {
                    if conflicts_this_restart >= limit {
                        self.cancel_until(0);
                        return SearchStatus::Restart;
                    }
                }
            } else {
                if self.db.live_learnts as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                match self.pick_branch_lit() {
                    None => return SearchStatus::Sat,
                    Some(lit) => {
                        self.trail_lim.push(self.trail.len());
                        self.unchecked_enqueue(lit, None);
                    }
                }
            }
        }
    }
}

/// Solves `formula` under `config`, streaming conflict events and restart
/// boundaries to `observers`. The SAT verdict is certified by checking the
/// model against every original clause.
pub fn solve(
    formula: &CnfFormula,
    config: &SolverConfig,
    observers: &mut [&mut dyn SearchObserver],
) -> SolveResult {
    config.validate().expect("valid solver config");

    if formula.has_empty_clause() {
        return SolveResult {
            verdict: Verdict::Unsat,
            model: None,
            total_conflicts: 0,
            restarts_used: 0,
        };
    }

    let mut searcher = Searcher::new(formula.num_vars(), config);
    for clause in formula.clauses() {
        if !searcher.add_original_clause(clause) {
            return SolveResult {
                verdict: Verdict::Unsat,
                model: None,
                total_conflicts: 0,
                restarts_used: 0,
            };
        }
    }
    searcher.max_learnts = (searcher.db.live_clauses as f64) / 3.0;

    let unsat = |searcher: &Searcher| SolveResult {
        verdict: Verdict::Unsat,
        model: None,
        total_conflicts: searcher.total_conflicts,
        restarts_used: searcher.restart_index - 1,
    };

    // top-level propagation of input units
    if searcher.propagate().is_some() {
        searcher.total_conflicts += 1;
        return unsat(&searcher);
    }

    loop {
        let k = searcher.restart_index;
        let limit = if config.restarts_enabled {
            Some(restart_schedule(config, k))
        } else {
            None
        };
        for observer in observers.iter_mut() {
            observer.on_restart(k, limit.unwrap_or(u64::MAX));
        }
        match searcher.search(limit, observers) {
            SearchStatus::Sat => {
                let model: Vec<bool> = (0..searcher.num_vars)
                    .map(|v| searcher.assign[v].unwrap_or(false))
                    .collect();
                assert!(
                    formula.satisfied_by(&model),
                    "internal error: SAT model fails verification"
                );
                return SolveResult {
                    verdict: Verdict::Sat,
                    model: Some(model),
                    total_conflicts: searcher.total_conflicts,
                    restarts_used: searcher.restart_index - 1,
                };
            }
            SearchStatus::Unsat => return unsat(&searcher),
            SearchStatus::Budget => {
                return SolveResult {
                    verdict: Verdict::BudgetExhausted,
                    model: None,
                    total_conflicts: searcher.total_conflicts,
                    restarts_used: searcher.restart_index - 1,
                };
            }
            SearchStatus::Restart => {
                searcher.restart_index += 1;
            }
        }
    }
}

/// Collects the full event stream; used by tests and the trace dump.
#[derive(Default)]
pub struct EventLog {
    pub events: Vec<ConflictEvent>,
    pub restarts: Vec<(u32, u64)>,
}

impl SearchObserver for EventLog {
    fn on_restart(&mut self, restart_index: u32, conflict_limit: u64) {
        self.restarts.push((restart_index, conflict_limit));
    }

    fn on_conflict(&mut self, event: &ConflictEvent) {
        self.events.push(*event);
    }
}

/// Event-trace CSV column order; one row per conflict event.
pub const TRACE_COLUMNS: &str = "conflict_index,restart_index,decision_level,trail_size,\
backjump_level,trail_size_after,learnt_size,conflict_size,live_clauses,live_binary,\
live_ternary,live_literals";

/// Streams conflict events as CSV rows (columns per [`TRACE_COLUMNS`]).
pub struct TraceWriter<W: std::io::Write> {
    out: W,
    pub error: Option<std::io::Error>,
}

impl<W: std::io::Write> TraceWriter<W> {
    pub fn new(mut out: W) -> Self {
        let error = writeln!(out, "{TRACE_COLUMNS}").err();
        TraceWriter { out, error }
    }
}

impl<W: std::io::Write> SearchObserver for TraceWriter<W> {
    fn on_conflict(&mut self, e: &ConflictEvent) {
        if self.error.is_some() {
            return;
        }
        let row = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            e.conflict_index,
            e.restart_index,
            e.decision_level_at_conflict,
            e.trail_size_at_conflict,
            e.backjump_target_level,
            e.trail_size_after_backjump,
            e.learnt_clause_size,
            e.conflict_clause_size,
            e.current_num_clauses,
            e.live_binary_clauses,
            e.live_ternary_clauses,
            e.live_clause_literals,
        );
        self.error = writeln!(self.out, "{row}").err();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{generate_random_3sat, CnfFormula, GeneratorSpec};

    fn formula(num_vars: usize, clauses: &[&[i32]]) -> CnfFormula {
        CnfFormula::new(num_vars, clauses.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn contradictory_units_are_unsat() {
        let f = formula(1, &[&[1], &[-1]]);
        let result = solve(&f, &SolverConfig::default(), &mut []);
        assert_eq!(result.verdict, Verdict::Unsat);
        assert!(result.total_conflicts <= 1);
    }

    #[test]
    fn single_clause_is_sat() {
        let f = formula(2, &[&[1, 2]]);
        let result = solve(&f, &SolverConfig::default(), &mut []);
        assert_eq!(result.verdict, Verdict::Sat);
        let model = result.model.unwrap();
        assert!(f.satisfied_by(&model));
    }

    #[test]
    fn empty_clause_is_unsat() {
        let f = CnfFormula::new(2, vec![vec![1], vec![]]).unwrap();
        let result = solve(&f, &SolverConfig::default(), &mut []);
        assert_eq!(result.verdict, Verdict::Unsat);
        assert_eq!(result.total_conflicts, 0);
    }

    #[test]
    fn restart_schedule_factor_15() {
        let config = SolverConfig::default();
        let limits: Vec<u64> = (1..=8).map(|k| restart_schedule(&config, k)).collect();
        assert_eq!(limits, vec![100, 150, 225, 337, 506, 759, 1139, 1708]);
    }

    #[test]
    fn restart_schedule_factor_12() {
        let config = SolverConfig {
            restart_factor: 1.2,
            ..SolverConfig::default()
        };
        let limits: Vec<u64> = (1..=4).map(|k| restart_schedule(&config, k)).collect();
        assert_eq!(limits, vec![100, 120, 144, 172]);
    }

    #[test]
    fn restart_schedule_k1_is_base() {
        for factor in [1.1, 1.2, 1.5, 2.0, 3.0] {
            let config = SolverConfig {
                restart_factor: factor,
                restart_base: 37,
                ..SolverConfig::default()
            };
            assert_eq!(restart_schedule(&config, 1), 37);
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        // hard enough to not solve within 5 conflicts
        let spec = GeneratorSpec {
            num_vars: 60,
            ratio: 4.3,
            seed: 3,
        };
        let f = generate_random_3sat(&spec).unwrap();
        let config = SolverConfig {
            conflict_budget: 5,
            ..SolverConfig::default()
        };
        let result = solve(&f, &config, &mut []);
        assert_eq!(result.verdict, Verdict::BudgetExhausted);
        assert_eq!(result.total_conflicts, 5);
    }

    #[test]
    fn event_stream_is_consistent() {
        let spec = GeneratorSpec {
            num_vars: 50,
            ratio: 4.4,
            seed: 11,
        };
        let f = generate_random_3sat(&spec).unwrap();
        let mut log = EventLog::default();
        let result = solve(&f, &SolverConfig::default(), &mut [&mut log]);
        assert!(!log.events.is_empty());
        for (i, event) in log.events.iter().enumerate() {
            assert_eq!(event.conflict_index, i as u64 + 1, "gapless indices");
            assert!(event.backjump_target_level < event.decision_level_at_conflict);
            assert!(event.trail_size_after_backjump <= event.trail_size_at_conflict);
            assert!(event.learnt_clause_size >= 1);
            assert!(event.conflict_clause_size >= 1);
            assert!(event.decision_level_depth() as usize <= event.trail_depth());
            if i > 0 {
                assert!(event.restart_index >= log.events[i - 1].restart_index);
            }
        }
        // analyzed conflicts never exceed the total
        assert!(log.events.len() as u64 <= result.total_conflicts);
    }

    #[test]
    fn deterministic_event_stream() {
        let spec = GeneratorSpec {
            num_vars: 60,
            ratio: 4.2,
            seed: 21,
        };
        let f = generate_random_3sat(&spec).unwrap();
        let config = SolverConfig {
            seed: 5,
            ..SolverConfig::default()
        };
        let mut log_a = EventLog::default();
        let mut log_b = EventLog::default();
        let ra = solve(&f, &config, &mut [&mut log_a]);
        let rb = solve(&f, &config, &mut [&mut log_b]);
        assert_eq!(ra.verdict, rb.verdict);
        assert_eq!(ra.total_conflicts, rb.total_conflicts);
        assert_eq!(log_a.events, log_b.events);
        assert_eq!(log_a.restarts, log_b.restarts);
    }

    #[test]
    fn restart_boundaries_are_announced() {
        let spec = GeneratorSpec {
            num_vars: 70,
            ratio: 4.4,
            seed: 2,
        };
        let f = generate_random_3sat(&spec).unwrap();
        let mut log = EventLog::default();
        let result = solve(&f, &SolverConfig::default(), &mut [&mut log]);
        assert_eq!(log.restarts.len() as u32, result.restarts_used + 1);
        for (i, &(k, limit)) in log.restarts.iter().enumerate() {
            assert_eq!(k, i as u32 + 1);
            assert_eq!(limit, restart_schedule(&SolverConfig::default(), k));
        }
        // each segment respects its conflict limit
        let mut per_restart = std::collections::BTreeMap::new();
        for event in &log.events {
            *per_restart.entry(event.restart_index).or_insert(0u64) += 1;
        }
        for (&k, &count) in &per_restart {
            assert!(count <= restart_schedule(&SolverConfig::default(), k));
        }
    }

    #[test]
    fn sat_models_verify_on_small_ensemble() {
        for seed in 0..30 {
            let spec = GeneratorSpec {
                num_vars: 25,
                ratio: 3.5,
                seed,
            };
            let f = generate_random_3sat(&spec).unwrap();
            let result = solve(&f, &SolverConfig::default(), &mut []);
            if result.verdict == Verdict::Sat {
                assert!(f.satisfied_by(&result.model.unwrap()));
            }
        }
    }

    #[test]
    fn decision_depth_definitional_example() {
        // an event with 5 decisions and 12 propagations on the trail
        let event = ConflictEvent {
            conflict_index: 1,
            restart_index: 1,
            decision_level_at_conflict: 5,
            trail_size_at_conflict: 17,
            backjump_target_level: 2,
            trail_size_after_backjump: 6,
            learnt_clause_size: 3,
            conflict_clause_size: 4,
            current_num_clauses: 10,
            live_binary_clauses: 1,
            live_ternary_clauses: 9,
            live_clause_literals: 29,
            };
        assert_eq!(event.trail_depth(), 17);
        assert_eq!(event.decision_level_depth(), 5);
        assert_eq!(event.backjump_size(), 3);
    }
}
