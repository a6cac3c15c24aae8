//! Cross-checks CDCL verdicts against the exhaustive enumeration oracle on
//! seeded random instances, in several solver configurations.

mod common;

use common::{brute_force_sat, ratio_for};
use satcast::cnf::{generate_random_3sat, GeneratorSpec};
use satcast::solver::{solve, SolverConfig, Verdict};

fn check_config(config: &SolverConfig, seeds: std::ops::Range<u64>) {
    for seed in seeds {
        let spec = GeneratorSpec {
            num_vars: 15 + (seed as usize * 7) % 21,
            ratio: ratio_for(seed, 3.0, 6.0, 13),
            seed,
        };
        let formula = generate_random_3sat(&spec).unwrap();
        let expected = brute_force_sat(&formula);
        let result = solve(&formula, config, &mut []);
        match result.verdict {
            Verdict::Sat => {
                assert!(expected, "seed {seed}: solver SAT but oracle UNSAT");
                assert!(formula.satisfied_by(&result.model.unwrap()));
            }
            Verdict::Unsat => assert!(!expected, "seed {seed}: solver UNSAT but oracle SAT"),
            Verdict::BudgetExhausted => panic!("seed {seed}: budget should not be hit"),
        }
    }
}

#[test]
fn verdicts_match_oracle_with_restarts() {
    check_config(&SolverConfig::default(), 0..150);
}

#[test]
fn verdicts_match_oracle_without_restarts() {
    let config = SolverConfig {
        restarts_enabled: false,
        ..SolverConfig::default()
    };
    check_config(&config, 150..250);
}

#[test]
fn verdicts_match_oracle_fast_restarts() {
    // base 1 stresses restart handling
    let config = SolverConfig {
        restart_base: 1,
        restart_factor: 1.1,
        seed: 42,
        ..SolverConfig::default()
    };
    check_config(&config, 250..320);
}
