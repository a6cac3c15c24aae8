//! Ridge linear regression on standardized features, with collinearity
//! pruning and AIC-driven backward elimination; model persistence and
//! prediction.
//!
//! Training pipeline: drop zero-variance columns, standardize, drop
//! collinear columns, backward-eliminate by AIC, final ridge fit. The
//! intercept is never penalized. Prediction standardizes the query with the
//! stored training parameters, never with test-set statistics.

use crate::features::{feature_names, FeatureVector, LabeledExample, BASE_FEATURE_NAMES};
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("too few training examples: {got} (need at least {need})")]
    TooFewExamples { got: usize, need: usize },
    #[error("inconsistent chained-feature lengths in training data")]
    InconsistentDimensions,
    #[error("normal equations are numerically singular (use lambda > 0)")]
    Singular,
    #[error("bad design: {0}")]
    BadDesign(String),
    #[error("model does not know feature {0:?}")]
    UnknownFeature(String),
    #[error("query has {query} chained entries, model was trained with {model}")]
    ChainedLengthMismatch { model: usize, query: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model schema version {0}")]
    SchemaVersion(u32),
}

/// Ridge solution: unpenalized intercept plus one weight per design column.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeWeights {
    pub intercept: f64,
    pub coefs: Vec<f64>,
}

/// Minimizes ‖y − (intercept + X·w)‖² + lambda·‖w‖² over the column-major
/// design `columns`, by a Cholesky factorization of the normal equations of
/// the intercept-augmented system.
pub fn ridge_fit(columns: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<RidgeWeights, ModelError> {
    let n = y.len();
    let k = columns.len();
    if n < 2 {
        return Err(ModelError::BadDesign(format!("need n >= 2 rows, got {n}")));
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(ModelError::BadDesign("column length != y length".into()));
    }
    if lambda < 0.0 {
        return Err(ModelError::BadDesign("lambda must be >= 0".into()));
    }
    // A = [1 | X]; M = AᵀA + lambda*diag(0,1,...,1); b = Aᵀy
    let a = DMatrix::from_fn(n, k + 1, |row, col| {
        if col == 0 {
            1.0
        } else {
            columns[col - 1][row]
        }
    });
    let mut m = a.transpose() * &a;
    for j in 1..=k {
        m[(j, j)] += lambda;
    }
    let b = a.transpose() * DVector::from_column_slice(y);
    let chol = Cholesky::new(m).ok_or(ModelError::Singular)?;
    let w = chol.solve(&b);
    Ok(RidgeWeights {
        intercept: w[0],
        coefs: w.as_slice()[1..].to_vec(),
    })
}

/// Residual sum of squares of a ridge solution on its design.
pub fn residual_sum_of_squares(columns: &[Vec<f64>], y: &[f64], w: &RidgeWeights) -> f64 {
    let mut rss = 0.0;
    for row in 0..y.len() {
        let mut pred = w.intercept;
        for (j, col) in columns.iter().enumerate() {
            pred += w.coefs[j] * col[row];
        }
        rss += (y[row] - pred) * (y[row] - pred);
    }
    rss
}

/// Gaussian-likelihood AIC with k non-intercept parameters:
/// n·ln(RSS/n) + 2(k+1).
pub fn aic_value(n: usize, rss: f64, k: usize) -> f64 {
    n as f64 * (rss / n as f64).ln() + 2.0 * (k as f64 + 1.0)
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a) * (x - mean_a);
        var_b += (y - mean_b) * (y - mean_b);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return 0.0;
    }
    cov / (var_a * var_b).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DropReason {
    ZeroVariance,
    Collinear { with: String, r: f64 },
    Aic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub name: String,
    pub reason: DropReason,
}

/// Greedy collinearity pruning over column pairs in the given (canonical)
/// order: when |Pearson r| reaches the threshold the later column is
/// dropped. Zero-variance columns are dropped first. Returns the surviving
/// column indices and the drop ledger.
pub fn drop_collinear(
    columns: &[Vec<f64>],
    names: &[String],
    threshold: f64,
) -> (Vec<usize>, Vec<DropRecord>) {
    let mut drops = Vec::new();
    let mut alive: Vec<bool> = columns
        .iter()
        .enumerate()
        .map(|(i, col)| {
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if var <= 1e-24 {
                drops.push(DropRecord {
                    name: names[i].clone(),
                    reason: DropReason::ZeroVariance,
                });
                false
            } else {
                true
            }
        })
        .collect();
    for i in 0..columns.len() {
        if !alive[i] {
            continue;
        }
        for j in (i + 1)..columns.len() {
            if !alive[j] {
                continue;
            }
            let r = pearson(&columns[i], &columns[j]);
            if r.abs() >= threshold {
                alive[j] = false;
                drops.push(DropRecord {
                    name: names[j].clone(),
                    reason: DropReason::Collinear {
                        with: names[i].clone(),
                        r,
                    },
                });
            }
        }
    }
    let kept = (0..columns.len()).filter(|&i| alive[i]).collect();
    (kept, drops)
}

/// Outcome of AIC backward elimination.
pub struct AicSelection {
    /// Indices (into the input columns) that survived, in input order.
    pub kept: Vec<usize>,
    pub weights: RidgeWeights,
    pub aic: f64,
    pub dropped: Vec<usize>,
    pub warning: Option<String>,
}

/// Backward elimination: repeatedly refit ridge and tentatively remove the
/// feature with the smallest |standardized coefficient| (ties broken by
/// feature name). A removal is kept while the AIC stays at or below the full
/// model's AIC; the first removal that pushes the AIC above that reference
/// is rolled back and stops the loop.
///
/// Comparing against the full-model reference (rather than the immediately
/// preceding step) lets the walk pass through small local AIC bumps, so a
/// single chance-correlated noise feature cannot block the elimination of
/// the rest.
pub fn aic_backward_eliminate(
    columns: &[Vec<f64>],
    names: &[String],
    y: &[f64],
    lambda: f64,
) -> Result<AicSelection, ModelError> {
    let n = y.len();
    let mut kept: Vec<usize> = (0..columns.len()).collect();
    let mut dropped = Vec::new();

    let fit = |kept: &[usize]| -> Result<(RidgeWeights, f64), ModelError> {
        let cols: Vec<Vec<f64>> = kept.iter().map(|&i| columns[i].clone()).collect();
        let w = ridge_fit(&cols, y, lambda)?;
        let rss = residual_sum_of_squares(&cols, y, &w);
        let aic = aic_value(n, rss, kept.len());
        Ok((w, aic))
    };

    let (mut weights, mut aic) = fit(&kept)?;
    let reference_aic = aic;
    while !kept.is_empty() {
        // smallest |coefficient|, ties by name
        let mut candidate = 0;
        for pos in 1..kept.len() {
            let (c, best) = (weights.coefs[pos].abs(), weights.coefs[candidate].abs());
            if c < best || (c == best && names[kept[pos]] < names[kept[candidate]]) {
                candidate = pos;
            }
        }
        let mut trial = kept.clone();
        let removed = trial.remove(candidate);
        let (trial_weights, trial_aic) = fit(&trial)?;
        if trial_aic <= reference_aic {
            kept = trial;
            weights = trial_weights;
            aic = trial_aic;
            dropped.push(removed);
        } else {
            break;
        }
    }
    let warning = if kept.is_empty() {
        Some("all features eliminated; intercept-only model".to_string())
    } else {
        None
    };
    Ok(AicSelection {
        kept,
        weights,
        aic,
        dropped,
        warning,
    })
}

/// Geometric-mean combination of a sat-model and an unsat-model prediction:
/// the arithmetic mean in log space.
pub fn combine_two_models(pred_sat_log: f64, pred_unsat_log: f64) -> f64 {
    0.5 * (pred_sat_log + pred_unsat_log)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassFilter {
    All,
    Sat,
    Unsat,
}

impl ClassFilter {
    pub fn accepts(&self, satisfiable: bool) -> bool {
        match self {
            ClassFilter::All => true,
            ClassFilter::Sat => satisfiable,
            ClassFilter::Unsat => !satisfiable,
        }
    }
}

impl std::fmt::Display for ClassFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassFilter::All => write!(f, "all"),
            ClassFilter::Sat => write!(f, "sat"),
            ClassFilter::Unsat => write!(f, "unsat"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub lambda: f64,
    pub collinear_threshold: f64,
    pub class: ClassFilter,
    /// Keep only rows from this window ordinal (None = all rows).
    pub window_index: Option<u32>,
    pub min_examples: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            lambda: 1.0,
            collinear_threshold: 0.98,
            class: ClassFilter::All,
            window_index: None,
            min_examples: 10,
        }
    }
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// A trained predictor: surviving features, their standardization
/// parameters, ridge weights and the training provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    /// Probe fingerprint of the dataset this model was trained on.
    pub fingerprint: String,
    pub class: ClassFilter,
    pub window_index: Option<u32>,
    pub lambda: f64,
    pub n_train: usize,
    pub chained_len: usize,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub intercept: f64,
    pub coefs: Vec<f64>,
    pub dropped: Vec<DropRecord>,
    pub warnings: Vec<String>,
}

impl TrainedModel {
    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> Result<TrainedModel, ModelError> {
        let model: TrainedModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(ModelError::SchemaVersion(model.schema_version));
        }
        Ok(model)
    }
}

fn canonical_index(name: &str, chained_len: usize) -> Option<usize> {
    if let Some(pos) = BASE_FEATURE_NAMES.iter().position(|&n| n == name) {
        return Some(pos);
    }
    let i: usize = name.strip_prefix("chain_pred_")?.parse().ok()?;
    (i >= 1 && i <= chained_len).then(|| BASE_FEATURE_NAMES.len() + i - 1)
}

/// Full training pipeline over labeled examples.
pub fn train(
    examples: &[LabeledExample],
    fingerprint: &str,
    options: &TrainOptions,
) -> Result<TrainedModel, ModelError> {
    let rows: Vec<&LabeledExample> = examples
        .iter()
        .filter(|e| options.class.accepts(e.satisfiable))
        .filter(|e| options.window_index.is_none_or(|w| e.window_index == w))
        .collect();
    if rows.len() < options.min_examples {
        return Err(ModelError::TooFewExamples {
            got: rows.len(),
            need: options.min_examples,
        });
    }
    let chained_len = rows[0].features.chained().len();
    if rows
        .iter()
        .any(|e| e.features.chained().len() != chained_len)
    {
        return Err(ModelError::InconsistentDimensions);
    }
    let n = rows.len();
    let names = feature_names(chained_len);
    let y: Vec<f64> = rows.iter().map(|e| e.label).collect();
    let raw_columns: Vec<Vec<f64>> = (0..names.len())
        .map(|j| rows.iter().map(|e| e.features.values().nth(j).unwrap()).collect())
        .collect();

    // standardization parameters (population SD)
    let mut means = Vec::with_capacity(raw_columns.len());
    let mut sds = Vec::with_capacity(raw_columns.len());
    for col in &raw_columns {
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        means.push(mean);
        sds.push(var.sqrt());
    }
    let mut dropped = Vec::new();
    let mut alive: Vec<usize> = Vec::new();
    for (j, name) in names.iter().enumerate() {
        if sds[j] <= 1e-12 * means[j].abs().max(1.0) {
            dropped.push(DropRecord {
                name: name.clone(),
                reason: DropReason::ZeroVariance,
            });
        } else {
            alive.push(j);
        }
    }
    let standardized: Vec<Vec<f64>> = alive
        .iter()
        .map(|&j| {
            raw_columns[j]
                .iter()
                .map(|v| (v - means[j]) / sds[j])
                .collect()
        })
        .collect();
    let alive_names: Vec<String> = alive.iter().map(|&j| names[j].clone()).collect();

    let (kept_local, collinear_drops) =
        drop_collinear(&standardized, &alive_names, options.collinear_threshold);
    dropped.extend(collinear_drops);
    let post_collinear: Vec<Vec<f64>> = kept_local
        .iter()
        .map(|&i| standardized[i].clone())
        .collect();
    let post_names: Vec<String> = kept_local.iter().map(|&i| alive_names[i].clone()).collect();

    let selection = aic_backward_eliminate(&post_collinear, &post_names, &y, options.lambda)?;
    for &i in &selection.dropped {
        dropped.push(DropRecord {
            name: post_names[i].clone(),
            reason: DropReason::Aic,
        });
    }
    let final_cols: Vec<Vec<f64>> = selection
        .kept
        .iter()
        .map(|&i| post_collinear[i].clone())
        .collect();
    let weights = ridge_fit(&final_cols, &y, options.lambda)?;

    let mut warnings = Vec::new();
    if let Some(w) = selection.warning {
        warnings.push(w);
    }

    // map survivors back to canonical indices for standardization storage
    let selected_canonical: Vec<usize> = selection
        .kept
        .iter()
        .map(|&i| alive[kept_local[i]])
        .collect();
    Ok(TrainedModel {
        schema_version: MODEL_SCHEMA_VERSION,
        fingerprint: fingerprint.to_string(),
        class: options.class,
        window_index: options.window_index,
        lambda: options.lambda,
        n_train: n,
        chained_len,
        feature_names: selected_canonical
            .iter()
            .map(|&j| names[j].clone())
            .collect(),
        means: selected_canonical.iter().map(|&j| means[j]).collect(),
        sds: selected_canonical.iter().map(|&j| sds[j]).collect(),
        intercept: weights.intercept,
        coefs: weights.coefs,
        dropped,
        warnings,
    })
}

/// Predicts the log cost for one feature vector; a pure function of
/// (model, features).
pub fn predict(model: &TrainedModel, features: &FeatureVector) -> Result<f64, ModelError> {
    if features.chained().len() != model.chained_len {
        return Err(ModelError::ChainedLengthMismatch {
            model: model.chained_len,
            query: features.chained().len(),
        });
    }
    let values: Vec<f64> = features.values().collect();
    let mut prediction = model.intercept;
    for (j, name) in model.feature_names.iter().enumerate() {
        let idx = canonical_index(name, model.chained_len)
            .ok_or_else(|| ModelError::UnknownFeature(name.clone()))?;
        let z = (values[idx] - model.means[j]) / model.sds[j];
        prediction += model.coefs[j] * z;
    }
    Ok(prediction)
}
