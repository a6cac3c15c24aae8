//! Observes the solver's conflict-event stream, manages observation-window
//! lifecycle (with and without restarts) and maintains the incremental
//! Weighted Backtrack Estimator.
//!
//! A probe is bound to one solver run. In no-restart mode it opens one
//! window per configured span, counted from the start of search; in restart
//! mode a window is scheduled inside every restart segment large enough to
//! hold it, and the WBE resets at each restart boundary because each restart
//! grows a fresh search tree.

mod stats;
mod wbe;

pub use stats::RunningStats;
pub use wbe::{WbeError, WbeState, WBE_VARIANT};

use crate::cnf::CnfFormula;
use crate::solver::{restart_schedule, ConflictEvent, SearchObserver, SolverConfig};
use serde::{Deserialize, Serialize};

pub const DEFAULT_FIXED_WAIT: u64 = 500;
pub const DEFAULT_FIXED_SIZE: u64 = 1000;
pub const DEFAULT_WAIT_FLOOR: u64 = 500;
pub const DEFAULT_WAIT_FRAC: f64 = 0.02;
pub const DEFAULT_SIZE_FLOOR: u64 = 1000;
pub const DEFAULT_SIZE_FRAC: f64 = 0.01;

/// A window counted in conflicts: skip `wait` events, then collect `size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpan {
    pub wait: u64,
    pub size: u64,
}

/// Observation-window policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WindowPolicy {
    /// One window at a fixed offset from the start of search.
    NoRestarts { fixed_wait: u64, fixed_size: u64 },
    /// A window inside every restart segment that can hold one, sized
    /// relative to the segment's conflict limit.
    WithRestarts {
        wait_floor: u64,
        wait_frac: f64,
        size_floor: u64,
        size_frac: f64,
    },
}

impl WindowPolicy {
    pub fn no_restarts_default() -> Self {
        WindowPolicy::NoRestarts {
            fixed_wait: DEFAULT_FIXED_WAIT,
            fixed_size: DEFAULT_FIXED_SIZE,
        }
    }

    pub fn with_restarts_default() -> Self {
        WindowPolicy::WithRestarts {
            wait_floor: DEFAULT_WAIT_FLOOR,
            wait_frac: DEFAULT_WAIT_FRAC,
            size_floor: DEFAULT_SIZE_FLOOR,
            size_frac: DEFAULT_SIZE_FRAC,
        }
    }

    /// Canonical one-line description, part of the probe fingerprint.
    pub fn describe(&self) -> String {
        match self {
            WindowPolicy::NoRestarts {
                fixed_wait,
                fixed_size,
            } => format!("no_restarts wait={fixed_wait} size={fixed_size}"),
            WindowPolicy::WithRestarts {
                wait_floor,
                wait_frac,
                size_floor,
                size_frac,
            } => format!(
                "with_restarts wait=max({wait_floor},{wait_frac}*s) size=max({size_floor},{size_frac}*s)"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSchedule {
    Window(WindowSpan),
    /// The restart segment is too small to hold wait + size conflicts.
    NotThisRestart,
}

/// Window placement for a restart segment with conflict limit `s`.
///
/// Restart mode: wait = max(wait_floor, ceil(wait_frac*s)) and
/// size = max(size_floor, ceil(size_frac*s)); the window must fit within the
/// segment. No-restart mode returns the fixed span unconditionally.
pub fn window_schedule(policy: &WindowPolicy, restart_limit: u64) -> WindowSchedule {
    match *policy {
        WindowPolicy::NoRestarts {
            fixed_wait,
            fixed_size,
        } => WindowSchedule::Window(WindowSpan {
            wait: fixed_wait,
            size: fixed_size,
        }),
        WindowPolicy::WithRestarts {
            wait_floor,
            wait_frac,
            size_floor,
            size_frac,
        } => {
            assert!(restart_limit >= 1, "restart limit is at least one conflict");
            let s = restart_limit as f64;
            let wait = wait_floor.max((wait_frac * s).ceil() as u64);
            let size = size_floor.max((size_frac * s).ceil() as u64);
            if wait + size > restart_limit {
                WindowSchedule::NotThisRestart
            } else {
                WindowSchedule::Window(WindowSpan { wait, size })
            }
        }
    }
}

/// First restart index whose segment admits a window under `policy`, if any
/// within a practical horizon.
pub fn first_admitting_restart(config: &SolverConfig, policy: &WindowPolicy) -> Option<u32> {
    for k in 1..=200 {
        let limit = restart_schedule(config, k);
        if let WindowSchedule::Window(_) = window_schedule(policy, limit) {
            return Some(k);
        }
        if limit > (1 << 60) {
            break;
        }
    }
    None
}

/// Statistics of the original formula, captured once per probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulaStats {
    pub num_vars: usize,
    pub num_clauses: usize,
    pub binary_clauses: usize,
    pub ternary_clauses: usize,
    pub total_literals: usize,
}

impl FormulaStats {
    pub fn of(formula: &CnfFormula) -> Self {
        let mut stats = FormulaStats {
            num_vars: formula.num_vars(),
            num_clauses: formula.num_clauses(),
            binary_clauses: 0,
            ternary_clauses: 0,
            total_literals: 0,
        };
        for clause in formula.clauses() {
            stats.binary_clauses += (clause.len() == 2) as usize;
            stats.ternary_clauses += (clause.len() == 3) as usize;
            stats.total_literals += clause.len();
        }
        stats
    }
}

/// Per-series running statistics over the events inside one window.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowSeries {
    pub cls_per_var: RunningStats,
    pub var_per_cls: RunningStats,
    pub frac_binary: RunningStats,
    pub frac_ternary: RunningStats,
    pub avg_clause_size: RunningStats,
    pub trail_depth: RunningStats,
    pub decision_depth: RunningStats,
    pub backjump_size: RunningStats,
    pub learnt_size: RunningStats,
    pub conflict_size: RunningStats,
    pub abb: RunningStats,
    pub aab: RunningStats,
    /// Running mean of aab divided by running mean of abb, one sample per event.
    pub ratio_aab_abb: RunningStats,
    pub ratio_abb_aab: RunningStats,
    pub log_wbe: RunningStats,
}

/// Finalized statistics of one closed observation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSnapshot {
    /// 1-based ordinal among this probe's closed windows. In restart mode
    /// this numbers only the restarts that actually held a window.
    pub window_index: u32,
    /// Restart segment the window lay in (1-based solver restart index).
    pub solver_restart_index: u32,
    pub span: WindowSpan,
    /// Global analyzed-conflict index of the first event in the window.
    pub opened_at_conflict: u64,
    /// Global analyzed-conflict index of the last event in the window.
    pub closed_at_conflict: u64,
    pub event_count: u64,
    pub formula: FormulaStats,
    pub series: WindowSeries,
    /// Set when any tracked ratio had a zero denominator (the sample is
    /// recorded as 0); a data-quality signal, not an error.
    pub div_by_zero: bool,
}

struct WindowAccum {
    span: WindowSpan,
    solver_restart_index: u32,
    opened_at_conflict: u64,
    last_conflict: u64,
    event_count: u64,
    series: WindowSeries,
    div_by_zero: bool,
}

impl WindowAccum {
    fn new(span: WindowSpan, restart: u32) -> Self {
        WindowAccum {
            span,
            solver_restart_index: restart,
            opened_at_conflict: 0,
            last_conflict: 0,
            event_count: 0,
            series: WindowSeries::default(),
            div_by_zero: false,
        }
    }

    fn ratio(&mut self, num: f64, den: f64) -> f64 {
        if den == 0.0 {
            self.div_by_zero = true;
            0.0
        } else {
            num / den
        }
    }

    fn update(&mut self, event: &ConflictEvent, formula: &FormulaStats, wbe: &WbeState) {
        if self.event_count == 0 {
            self.opened_at_conflict = event.conflict_index;
        }
        self.event_count += 1;
        self.last_conflict = event.conflict_index;

        let num_vars = formula.num_vars as f64;
        let live = event.current_num_clauses as f64;
        let cls_per_var = self.ratio(live, num_vars);
        let var_per_cls = self.ratio(num_vars, live);
        let frac_binary = self.ratio(event.live_binary_clauses as f64, live);
        let frac_ternary = self.ratio(event.live_ternary_clauses as f64, live);
        let avg_clause_size = self.ratio(event.live_clause_literals as f64, live);
        let abb = self.ratio(event.trail_size_at_conflict as f64, num_vars);
        let aab = self.ratio(event.trail_size_after_backjump as f64, num_vars);

        let s = &mut self.series;
        s.cls_per_var.push(cls_per_var);
        s.var_per_cls.push(var_per_cls);
        s.frac_binary.push(frac_binary);
        s.frac_ternary.push(frac_ternary);
        s.avg_clause_size.push(avg_clause_size);
        s.trail_depth.push(event.trail_size_at_conflict as f64);
        s.decision_depth.push(event.decision_level_at_conflict as f64);
        s.backjump_size.push(event.backjump_size() as f64);
        s.learnt_size.push(event.learnt_clause_size as f64);
        s.conflict_size.push(event.conflict_clause_size as f64);
        s.abb.push(abb);
        s.aab.push(aab);
        let aab_mean = s.aab.mean();
        let abb_mean = s.abb.mean();
        let r1 = self.ratio(aab_mean, abb_mean);
        let r2 = self.ratio(abb_mean, aab_mean);
        self.series.ratio_aab_abb.push(r1);
        self.series.ratio_abb_aab.push(r2);
        self.series
            .log_wbe
            .push(wbe.log_estimate().expect("a branch was just recorded"));
    }

    fn finalize(self, formula: FormulaStats, window_index: u32) -> WindowSnapshot {
        debug_assert_eq!(self.event_count, self.span.size);
        WindowSnapshot {
            window_index,
            solver_restart_index: self.solver_restart_index,
            span: self.span,
            opened_at_conflict: self.opened_at_conflict,
            closed_at_conflict: self.last_conflict,
            event_count: self.event_count,
            formula,
            series: self.series,
            div_by_zero: self.div_by_zero,
        }
    }
}

struct Pending {
    span: WindowSpan,
    accum: Option<WindowAccum>,
}

enum ProbeMode {
    /// Spans counted from the start of search, sorted by close point.
    NoRestarts(Vec<Pending>),
    WithRestarts {
        policy: WindowPolicy,
        current: Option<Pending>,
    },
}

/// Event-stream observer that produces [`WindowSnapshot`]s.
pub struct SearchProbe {
    formula: FormulaStats,
    mode: ProbeMode,
    wbe: WbeState,
    conflicts_seen: u64,
    restart_conflicts: u64,
    current_restart: u32,
    snapshots: Vec<WindowSnapshot>,
    unexpected_restart: bool,
}

impl SearchProbe {
    /// Probe for a restarts-disabled solver; one window per span.
    pub fn no_restarts(formula: FormulaStats, spans: &[WindowSpan]) -> Self {
        let mut spans = spans.to_vec();
        spans.sort_by_key(|s| (s.wait + s.size, s.wait));
        SearchProbe {
            formula,
            mode: ProbeMode::NoRestarts(
                spans
                    .into_iter()
                    .map(|span| Pending { span, accum: None })
                    .collect(),
            ),
            wbe: WbeState::new(),
            conflicts_seen: 0,
            restart_conflicts: 0,
            current_restart: 1,
            snapshots: Vec::new(),
            unexpected_restart: false,
        }
    }

    /// Probe for a restarts-enabled solver under the given window policy.
    pub fn with_restarts(formula: FormulaStats, policy: WindowPolicy) -> Self {
        debug_assert!(matches!(policy, WindowPolicy::WithRestarts { .. }));
        SearchProbe {
            formula,
            mode: ProbeMode::WithRestarts {
                policy,
                current: None,
            },
            wbe: WbeState::new(),
            conflicts_seen: 0,
            restart_conflicts: 0,
            current_restart: 1,
            snapshots: Vec::new(),
            unexpected_restart: false,
        }
    }

    pub fn snapshots(&self) -> &[WindowSnapshot] {
        &self.snapshots
    }

    pub fn into_snapshots(self) -> Vec<WindowSnapshot> {
        self.snapshots
    }

    pub fn formula_stats(&self) -> &FormulaStats {
        &self.formula
    }

    /// Windows that opened but never reached their full size (the run ended
    /// first). Their partial data is discarded.
    pub fn unfinished_windows(&self) -> usize {
        match &self.mode {
            ProbeMode::NoRestarts(pending) => {
                pending.iter().filter(|p| p.accum.is_some()).count()
            }
            ProbeMode::WithRestarts { current, .. } => {
                usize::from(current.as_ref().is_some_and(|p| p.accum.is_some()))
            }
        }
    }

    /// True when a no-restart probe saw a restart boundary; the pairing of
    /// probe mode and solver config was wrong and snapshots are suspect.
    pub fn saw_unexpected_restart(&self) -> bool {
        self.unexpected_restart
    }
}

impl SearchObserver for SearchProbe {
    fn on_restart(&mut self, restart_index: u32, conflict_limit: u64) {
        self.current_restart = restart_index;
        self.restart_conflicts = 0;
        match &mut self.mode {
            ProbeMode::NoRestarts(_) => {
                if restart_index > 1 {
                    self.unexpected_restart = true;
                }
            }
            ProbeMode::WithRestarts { policy, current } => {
                // each restart grows a fresh tree
                self.wbe = WbeState::new();
                debug_assert!(
                    current.as_ref().map_or(true, |p| p.accum.is_none()),
                    "window spanned a restart boundary"
                );
                *current = match window_schedule(policy, conflict_limit) {
                    WindowSchedule::Window(span) => Some(Pending { span, accum: None }),
                    WindowSchedule::NotThisRestart => None,
                };
            }
        }
    }

    fn on_conflict(&mut self, event: &ConflictEvent) {
        self.conflicts_seen += 1;
        self.restart_conflicts += 1;
        debug_assert_eq!(self.conflicts_seen, event.conflict_index);
        self.wbe.record_branch(event.decision_level_at_conflict as u64);

        let ordinal = match &self.mode {
            ProbeMode::NoRestarts(_) => self.conflicts_seen,
            ProbeMode::WithRestarts { .. } => self.restart_conflicts,
        };
        let formula = self.formula;
        let restart = self.current_restart;
        let wbe = &self.wbe;
        let snapshots = &mut self.snapshots;
        let mut touch = |pending: &mut Pending| {
            if ordinal <= pending.span.wait {
                return false;
            }
            let accum = pending
                .accum
                .get_or_insert_with(|| WindowAccum::new(pending.span, restart));
            accum.update(event, &formula, wbe);
            if ordinal == pending.span.wait + pending.span.size {
                let accum = pending.accum.take().expect("window just updated");
                let index = snapshots.len() as u32 + 1;
                snapshots.push(accum.finalize(formula, index));
                true
            } else {
                false
            }
        };
        match &mut self.mode {
            ProbeMode::NoRestarts(pending) => {
                let mut done = Vec::new();
                for (i, p) in pending.iter_mut().enumerate() {
                    if ordinal > p.span.wait + p.span.size {
                        continue; // already closed
                    }
                    if touch(p) {
                        done.push(i);
                    }
                }
                for i in done.into_iter().rev() {
                    pending.remove(i);
                }
            }
            ProbeMode::WithRestarts { current, .. } => {
                if let Some(p) = current {
                    if touch(p) {
                        *current = None;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{generate_random_3sat, GeneratorSpec};
    use crate::solver::solve;

    #[test]
    fn schedule_examples() {
        let policy = WindowPolicy::with_restarts_default();
        assert_eq!(
            window_schedule(&policy, 200_000),
            WindowSchedule::Window(WindowSpan {
                wait: 4000,
                size: 2000
            })
        );
        assert_eq!(
            window_schedule(&policy, 1000),
            WindowSchedule::NotThisRestart
        );
    }

    #[test]
    fn first_admitting_restart_is_eight() {
        let config = SolverConfig::default();
        let policy = WindowPolicy::with_restarts_default();
        assert_eq!(first_admitting_restart(&config, &policy), Some(8));
        assert_eq!(restart_schedule(&config, 8), 1708);
    }

    #[test]
    fn no_restart_schedule_returns_fixed_span() {
        let policy = WindowPolicy::no_restarts_default();
        assert_eq!(
            window_schedule(&policy, 123),
            WindowSchedule::Window(WindowSpan {
                wait: 500,
                size: 1000
            })
        );
    }

    // ~4500 conflicts without restarts; enough room for several windows
    fn hard_unsat_formula() -> crate::cnf::CnfFormula {
        let spec = GeneratorSpec {
            num_vars: 150,
            ratio: 4.5,
            seed: 0,
        };
        generate_random_3sat(&spec).unwrap()
    }

    #[test]
    fn no_restart_probe_closes_windows() {
        let formula = hard_unsat_formula();
        let stats = FormulaStats::of(&formula);
        let spans = [
            WindowSpan { wait: 10, size: 50 },
            WindowSpan { wait: 0, size: 20 },
        ];
        let mut probe = SearchProbe::no_restarts(stats, &spans);
        let config = SolverConfig {
            restarts_enabled: false,
            ..SolverConfig::default()
        };
        let result = solve(&formula, &config, &mut [&mut probe]);
        assert!(result.total_conflicts > 60, "instance too easy for the test");
        let snaps = probe.snapshots();
        assert_eq!(snaps.len(), 2);
        // sorted by close point: (0,20) closes at 20, (10,50) closes at 60
        assert_eq!(snaps[0].window_index, 1);
        assert_eq!(snaps[0].opened_at_conflict, 1);
        assert_eq!(snaps[0].closed_at_conflict, 20);
        assert_eq!(snaps[0].event_count, 20);
        assert_eq!(snaps[1].opened_at_conflict, 11);
        assert_eq!(snaps[1].closed_at_conflict, 60);
        assert!(!probe.saw_unexpected_restart());
        assert_eq!(probe.unfinished_windows(), 0);
    }

    #[test]
    fn snapshot_series_are_plausible() {
        let formula = hard_unsat_formula();
        let stats = FormulaStats::of(&formula);
        let mut probe =
            SearchProbe::no_restarts(stats, &[WindowSpan { wait: 20, size: 100 }]);
        let config = SolverConfig {
            restarts_enabled: false,
            ..SolverConfig::default()
        };
        solve(&formula, &config, &mut [&mut probe]);
        let snap = &probe.snapshots()[0];
        let s = &snap.series;
        for stats in [
            &s.cls_per_var,
            &s.var_per_cls,
            &s.frac_binary,
            &s.frac_ternary,
            &s.avg_clause_size,
            &s.trail_depth,
            &s.decision_depth,
            &s.backjump_size,
            &s.learnt_size,
            &s.conflict_size,
            &s.abb,
            &s.aab,
            &s.ratio_aab_abb,
            &s.ratio_abb_aab,
            &s.log_wbe,
        ] {
            assert_eq!(stats.count(), 100);
            assert!(stats.min() <= stats.mean() + 1e-12);
            assert!(stats.mean() <= stats.max() + 1e-12);
            assert!(stats.sd() >= 0.0);
        }
        assert!(s.abb.min() >= 0.0 && s.abb.max() <= 1.0);
        assert!(s.aab.min() >= 0.0 && s.aab.max() <= 1.0);
        assert!(s.frac_binary.max() + s.frac_ternary.min() <= 1.0 + 1e-12);
    }

    #[test]
    fn restart_probe_windows_stay_inside_segments() {
        // small base so windows appear early: limits 200, 300, 450, ...
        let config = SolverConfig {
            restart_base: 200,
            restart_factor: 1.5,
            ..SolverConfig::default()
        };
        let policy = WindowPolicy::WithRestarts {
            wait_floor: 20,
            wait_frac: 0.02,
            size_floor: 100,
            size_frac: 0.01,
        };
        let formula = hard_unsat_formula();
        let stats = FormulaStats::of(&formula);
        let mut probe = SearchProbe::with_restarts(stats, policy.clone());
        let result = solve(&formula, &config, &mut [&mut probe]);
        assert!(result.restarts_used >= 2, "expected several restarts");
        let snaps = probe.snapshots();
        assert!(!snaps.is_empty());
        for (i, snap) in snaps.iter().enumerate() {
            assert_eq!(snap.window_index as usize, i + 1);
            let limit = restart_schedule(&config, snap.solver_restart_index);
            match window_schedule(&policy, limit) {
                WindowSchedule::Window(span) => {
                    assert_eq!(snap.span, span);
                    assert!(span.wait + span.size <= limit, "window fits the segment");
                }
                WindowSchedule::NotThisRestart => panic!("window in a non-admitting restart"),
            }
            if i > 0 {
                assert!(snap.solver_restart_index > snaps[i - 1].solver_restart_index);
            }
        }
    }

    #[test]
    fn windowed_restarts_are_contiguous_once_admitted() {
        let config = SolverConfig {
            restart_base: 150,
            restart_factor: 1.5,
            ..SolverConfig::default()
        };
        let policy = WindowPolicy::WithRestarts {
            wait_floor: 50,
            wait_frac: 0.02,
            size_floor: 120,
            size_frac: 0.01,
        };
        let formula = hard_unsat_formula();
        let stats = FormulaStats::of(&formula);
        let mut probe = SearchProbe::with_restarts(stats, policy);
        solve(&formula, &config, &mut [&mut probe]);
        let snaps = probe.snapshots();
        assert!(snaps.len() >= 2, "expected at least two windows");
        for pair in snaps.windows(2) {
            assert_eq!(
                pair[1].solver_restart_index,
                pair[0].solver_restart_index + 1,
                "every admitting restart gets a window"
            );
        }
    }
}
