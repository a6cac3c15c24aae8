//! Reproducibility fingerprints: stable hashes of the semantically relevant
//! settings, embedded in every artifact file so stage chaining can detect
//! mismatched configurations.

use crate::probe::{WindowPolicy, WBE_VARIANT};
use crate::solver::SolverConfig;
use sha2::{Digest, Sha256};

/// Hex digest (first 16 hex chars of SHA-256) over the given parts, each
/// terminated so part boundaries cannot alias.
pub fn hex_digest(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Canonical one-line description of a solver configuration.
pub fn describe_solver(config: &SolverConfig) -> String {
    format!(
        "restarts={} base={} factor={} budget={} var_decay={} clause_decay={} seed={}",
        config.restarts_enabled,
        config.restart_base,
        config.restart_factor,
        config.conflict_budget,
        config.var_decay,
        config.clause_decay,
        config.seed
    )
}

/// Fingerprint of a probe configuration: solver settings, window policy and
/// estimator variant. Datasets, models and reports all carry it; stages
/// refuse to chain across differing fingerprints.
pub fn probe_fingerprint(solver: &SolverConfig, policy: &WindowPolicy) -> String {
    hex_digest(&[&describe_solver(solver), &policy.describe(), WBE_VARIANT])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = hex_digest(&["x", "y"]);
        let b = hex_digest(&["x", "y"]);
        let c = hex_digest(&["xy"]);
        let d = hex_digest(&["x", "z"]);
        assert_eq!(a, b);
        assert_ne!(a, c, "part boundaries must matter");
        assert_ne!(a, d);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn fingerprint_changes_with_any_semantic_setting() {
        let solver = SolverConfig::default();
        let policy = WindowPolicy::no_restarts_default();
        let base = probe_fingerprint(&solver, &policy);

        let mut other = solver.clone();
        other.restart_factor = 1.2;
        assert_ne!(base, probe_fingerprint(&other, &policy));

        let other_policy = WindowPolicy::NoRestarts {
            fixed_wait: 501,
            fixed_size: 1000,
        };
        assert_ne!(base, probe_fingerprint(&solver, &other_policy));

        let mut seeded = solver.clone();
        seeded.seed = 1;
        assert_ne!(base, probe_fingerprint(&seeded, &policy));
    }
}
