//! CNF problem instances: DIMACS parsing and serialization, plus a seeded
//! uniform random 3-SAT generator for building ensembles.
//!
//! Literals use the DIMACS convention throughout this module: a nonzero
//! `i32` whose absolute value is a 1-based variable index and whose sign is
//! the polarity.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// An immutable CNF instance.
///
/// Clauses are canonical: duplicate literals removed, no tautologies, no
/// empty clauses. An empty clause seen at parse time is recorded in
/// [`CnfFormula::has_empty_clause`] instead of being stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
    has_empty_clause: bool,
}

impl CnfFormula {
    /// Builds a formula from raw clauses, canonicalizing each one.
    ///
    /// Duplicate literals are dropped silently; tautological clauses are
    /// dropped entirely; an empty clause sets the empty-clause flag.
    pub fn new(num_vars: usize, raw_clauses: Vec<Vec<i32>>) -> Result<Self, CnfError> {
        let mut formula = CnfFormula {
            num_vars,
            clauses: Vec::with_capacity(raw_clauses.len()),
            has_empty_clause: false,
        };
        for clause in raw_clauses {
            formula.push_clause(clause)?;
        }
        Ok(formula)
    }

    fn push_clause(&mut self, mut clause: Vec<i32>) -> Result<Option<CanonicalizeNote>, CnfError> {
        for &lit in &clause {
            if lit == 0 || lit.unsigned_abs() as usize > self.num_vars {
                return Err(CnfError::LiteralOutOfRange {
                    literal: lit,
                    num_vars: self.num_vars,
                });
            }
        }
        clause.sort_unstable_by_key(|l| (l.abs(), *l));
        let before = clause.len();
        clause.dedup();
        let deduped = clause.len() != before;
        if clause.windows(2).any(|w| w[0] == -w[1]) {
            return Ok(Some(CanonicalizeNote::Tautology));
        }
        if clause.is_empty() {
            self.has_empty_clause = true;
            return Ok(Some(CanonicalizeNote::Empty));
        }
        self.clauses.push(clause);
        Ok(if deduped {
            Some(CanonicalizeNote::DuplicateLiterals)
        } else {
            None
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// True when the source contained an empty clause, making the formula
    /// trivially unsatisfiable.
    pub fn has_empty_clause(&self) -> bool {
        self.has_empty_clause
    }

    /// True when `assignment[v-1]` (polarity of variable `v`) satisfies every
    /// stored clause.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.num_vars
            && !self.has_empty_clause
            && self.clauses.iter().all(|clause| {
                clause
                    .iter()
                    .any(|&lit| assignment[lit.unsigned_abs() as usize - 1] == (lit > 0))
            })
    }

    /// Renders the formula in DIMACS CNF, prefixed by the given comment lines.
    pub fn to_dimacs(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for comment in comments {
            out.push_str("c ");
            out.push_str(comment);
            out.push('\n');
        }
        out.push_str(&format!("p cnf {} {}\n", self.num_vars, self.clauses.len()));
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

enum CanonicalizeNote {
    Tautology,
    Empty,
    DuplicateLiterals,
}

#[derive(Debug, Error)]
pub enum CnfError {
    #[error("malformed DIMACS header: {0}")]
    MalformedHeader(String),
    #[error("literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange { literal: i32, num_vars: usize },
    #[error("final clause not terminated by 0")]
    UnterminatedClause,
    #[error("unexpected token {0:?}")]
    BadToken(String),
    #[error("missing DIMACS header")]
    MissingHeader,
    #[error("duplicate DIMACS header")]
    DuplicateHeader,
}

/// Non-fatal irregularities found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// Header declared `declared` clauses but `found` were stored.
    ClauseCountMismatch { declared: usize, found: usize },
    /// A clause contained a literal and its negation and was dropped.
    TautologyDropped { clause_index: usize },
    /// An empty clause makes the formula trivially unsatisfiable.
    EmptyClause { clause_index: usize },
}

impl std::fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseWarning::ClauseCountMismatch { declared, found } => {
                write!(f, "header declared {declared} clauses, found {found}")
            }
            ParseWarning::TautologyDropped { clause_index } => {
                write!(f, "clause {clause_index} is a tautology, dropped")
            }
            ParseWarning::EmptyClause { clause_index } => {
                write!(f, "clause {clause_index} is empty (formula trivially unsat)")
            }
        }
    }
}

/// A parsed formula together with any warnings raised on the way.
#[derive(Debug)]
pub struct ParsedCnf {
    pub formula: CnfFormula,
    pub warnings: Vec<ParseWarning>,
}

/// Parses DIMACS CNF text: `c` comment lines, a `p cnf V C` header, then
/// zero-terminated clauses (which may span lines).
///
/// A clause count differing from the header is tolerated with a warning.
/// Duplicate literals within a clause are removed; tautological clauses are
/// dropped with a warning.
pub fn parse_dimacs(text: &str) -> Result<ParsedCnf, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut warnings = Vec::new();
    let mut formula: Option<CnfFormula> = None;
    let mut current: Vec<i32> = Vec::new();
    let mut clause_index = 0usize;

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(CnfError::DuplicateHeader);
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "cnf" {
                return Err(CnfError::MalformedHeader(line.to_string()));
            }
            let num_vars: usize = fields[1]
                .parse()
                .map_err(|_| CnfError::MalformedHeader(line.to_string()))?;
            let num_clauses: usize = fields[2]
                .parse()
                .map_err(|_| CnfError::MalformedHeader(line.to_string()))?;
            header = Some((num_vars, num_clauses));
            formula = Some(CnfFormula {
                num_vars,
                clauses: Vec::with_capacity(num_clauses),
                has_empty_clause: false,
            });
            continue;
        }
        let formula = formula.as_mut().ok_or(CnfError::MissingHeader)?;
        for token in line.split_whitespace() {
            let lit: i32 = token
                .parse()
                .map_err(|_| CnfError::BadToken(token.to_string()))?;
            if lit == 0 {
                match formula.push_clause(std::mem::take(&mut current))? {
                    Some(CanonicalizeNote::Tautology) => {
                        warnings.push(ParseWarning::TautologyDropped { clause_index });
                    }
                    Some(CanonicalizeNote::Empty) => {
                        warnings.push(ParseWarning::EmptyClause { clause_index });
                    }
                    _ => {}
                }
                clause_index += 1;
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(CnfError::UnterminatedClause);
    }
    let formula = formula.ok_or(CnfError::MissingHeader)?;
    let (_, declared) = header.expect("header present when formula is");
    if declared != clause_index {
        warnings.push(ParseWarning::ClauseCountMismatch {
            declared,
            found: clause_index,
        });
    }
    Ok(ParsedCnf { formula, warnings })
}

/// Parameters for the uniform random fixed-clause-length generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub num_vars: usize,
    /// Clauses per variable; the clause count is `round(ratio * num_vars)`.
    pub ratio: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub const CLAUSE_WIDTH: usize = 3;

    pub fn num_clauses(&self) -> usize {
        // round-half-up; ratios are given, not counts
        (self.ratio * self.num_vars as f64).round() as usize
    }

    /// Comment lines stamped into generated DIMACS files so that ensembles
    /// are reproducible from the header alone.
    pub fn comment_stamp(&self) -> Vec<String> {
        vec![
            "generator: satcast uniform random 3-SAT".to_string(),
            format!(
                "vars={} ratio={} clauses={} seed={}",
                self.num_vars,
                self.ratio,
                self.num_clauses(),
                self.seed
            ),
            "rng: ChaCha8 (rand_chacha 0.3, seed_from_u64)".to_string(),
        ]
    }
}

/// Generates a uniform random 3-SAT instance: each clause picks 3 distinct
/// variables uniformly without replacement, each negated with probability
/// one half. Deterministic given the spec.
///
/// Duplicate clauses are permitted, matching the standard fixed-clause-length
/// random model.
pub fn generate_random_3sat(spec: &GeneratorSpec) -> Result<CnfFormula, CnfError> {
    if spec.num_vars < GeneratorSpec::CLAUSE_WIDTH {
        return Err(CnfError::MalformedHeader(format!(
            "generator needs at least {} variables, got {}",
            GeneratorSpec::CLAUSE_WIDTH,
            spec.num_vars
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let num_clauses = spec.num_clauses();
    let mut clauses = Vec::with_capacity(num_clauses);
    let mut vars = [0usize; GeneratorSpec::CLAUSE_WIDTH];
    for _ in 0..num_clauses {
        for slot in 0..GeneratorSpec::CLAUSE_WIDTH {
            loop {
                let v = rng.gen_range(1..=spec.num_vars);
                if !vars[..slot].contains(&v) {
                    vars[slot] = v;
                    break;
                }
            }
        }
        let clause: Vec<i32> = vars
            .iter()
            .map(|&v| if rng.gen::<bool>() { v as i32 } else { -(v as i32) })
            .collect();
        clauses.push(clause);
    }
    CnfFormula::new(spec.num_vars, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_plain_formula() {
        let parsed = parse_dimacs("p cnf 2 2\n1 -2 0\n2 0\n").unwrap();
        assert_eq!(parsed.formula.num_vars(), 2);
        assert_eq!(parsed.formula.clauses(), &[vec![1, -2], vec![2]]);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn drops_tautology_with_warning() {
        let parsed = parse_dimacs("p cnf 1 1\n1 -1 0\n").unwrap();
        assert_eq!(parsed.formula.num_clauses(), 0);
        assert_eq!(
            parsed.warnings,
            vec![ParseWarning::TautologyDropped { clause_index: 0 }]
        );
    }

    #[test]
    fn removes_duplicate_literals() {
        let parsed = parse_dimacs("p cnf 3 1\n1 1 -3 0\n").unwrap();
        assert_eq!(parsed.formula.clauses(), &[vec![1, -3]]);
    }

    #[test]
    fn flags_empty_clause() {
        let parsed = parse_dimacs("p cnf 2 2\n1 0\n0\n").unwrap();
        assert!(parsed.formula.has_empty_clause());
        assert_eq!(parsed.formula.num_clauses(), 1);
    }

    #[test]
    fn tolerates_clause_count_mismatch() {
        let parsed = parse_dimacs("p cnf 2 5\n1 0\n2 0\n").unwrap();
        assert_eq!(
            parsed.warnings,
            vec![ParseWarning::ClauseCountMismatch {
                declared: 5,
                found: 2
            }]
        );
    }

    #[test]
    fn clauses_may_span_lines() {
        let parsed = parse_dimacs("p cnf 3 1\n1 2\n3 0\n").unwrap();
        assert_eq!(parsed.formula.clauses(), &[vec![1, 2, 3]]);
    }

    #[test]
    fn rejects_malformed_header() {
        assert!(matches!(
            parse_dimacs("p cnf x 1\n"),
            Err(CnfError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_dimacs("1 2 0\n"),
            Err(CnfError::MissingHeader)
        ));
    }

    #[test]
    fn rejects_out_of_range_literal() {
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n3 0\n"),
            Err(CnfError::LiteralOutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_unterminated_final_clause() {
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2\n"),
            Err(CnfError::UnterminatedClause)
        ));
    }

    #[test]
    fn generator_matches_spec_shape() {
        let spec = GeneratorSpec {
            num_vars: 200,
            ratio: 4.5,
            seed: 7,
        };
        let formula = generate_random_3sat(&spec).unwrap();
        assert_eq!(formula.num_clauses(), 900);
        assert!(formula.clauses().iter().all(|c| c.len() == 3));
    }

    #[test]
    fn generator_minimal_case() {
        let spec = GeneratorSpec {
            num_vars: 3,
            ratio: 1.0,
            seed: 1,
        };
        let formula = generate_random_3sat(&spec).unwrap();
        assert_eq!(formula.num_clauses(), 3);
        for clause in formula.clauses() {
            let mut vars: Vec<i32> = clause.iter().map(|l| l.abs()).collect();
            vars.sort_unstable();
            vars.dedup();
            assert_eq!(vars.len(), 3);
            assert!(vars.iter().all(|&v| (1..=3).contains(&v)));
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = GeneratorSpec {
            num_vars: 50,
            ratio: 4.2,
            seed: 99,
        };
        let a = generate_random_3sat(&spec).unwrap();
        let b = generate_random_3sat(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_dimacs(&[]), b.to_dimacs(&[]));
    }

    #[test]
    fn generator_rejects_too_few_vars() {
        let spec = GeneratorSpec {
            num_vars: 2,
            ratio: 1.0,
            seed: 0,
        };
        assert!(generate_random_3sat(&spec).is_err());
    }

    #[test]
    fn round_trip_on_seeded_instances() {
        for seed in 0..100 {
            let spec = GeneratorSpec {
                num_vars: 20 + (seed as usize % 30),
                ratio: 3.0 + (seed as f64) * 0.03,
                seed,
            };
            let formula = generate_random_3sat(&spec).unwrap();
            let text = formula.to_dimacs(&spec.comment_stamp());
            let reparsed = parse_dimacs(&text).unwrap();
            assert_eq!(reparsed.formula, formula, "seed {seed}");
            assert!(reparsed.warnings.is_empty());
        }
    }

    proptest! {
        #[test]
        fn generated_clauses_have_three_distinct_vars(seed in 0u64..500, num_vars in 3usize..40, ratio in 0.5f64..6.0) {
            let spec = GeneratorSpec { num_vars, ratio, seed };
            let formula = generate_random_3sat(&spec).unwrap();
            prop_assert_eq!(formula.num_clauses(), (ratio * num_vars as f64).round() as usize);
            for clause in formula.clauses() {
                prop_assert_eq!(clause.len(), 3);
                let mut vars: Vec<i32> = clause.iter().map(|l| l.abs()).collect();
                vars.sort_unstable();
                vars.dedup();
                prop_assert_eq!(vars.len(), 3);
            }
        }

        #[test]
        fn serialize_parse_round_trip(seed in 0u64..200) {
            let spec = GeneratorSpec { num_vars: 10, ratio: 3.5, seed };
            let formula = generate_random_3sat(&spec).unwrap();
            let reparsed = parse_dimacs(&formula.to_dimacs(&[])).unwrap();
            prop_assert_eq!(reparsed.formula, formula);
        }
    }
}
