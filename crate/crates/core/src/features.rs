//! Assembles the feature vector from the initial formula and a closed
//! observation window, and serializes labeled datasets.
//!
//! The 64 base features combine static properties of the original instance
//! (`init_*`) with windowed statistics of the search (`win_*`). Dynamic
//! clause counts (cls/var, clause-size fractions) are over live clauses,
//! original plus surviving learnt. Chained entries carry log-cost
//! predictions from earlier observation windows and are appended after the
//! base block.

use crate::probe::{FormulaStats, WindowSnapshot};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

pub const BASE_FEATURE_COUNT: usize = 64;

/// Canonical feature order; dataset columns and design matrices follow it.
pub const BASE_FEATURE_NAMES: [&str; BASE_FEATURE_COUNT] = [
    "init_var",
    "init_cls",
    "init_cls_per_var",
    "init_var_per_cls",
    "init_frac_binary",
    "init_frac_ternary",
    "init_avg_clause_size",
    "win_cls_per_var_min",
    "win_cls_per_var_max",
    "win_cls_per_var_mean",
    "win_cls_per_var_sd",
    "win_cls_per_var_last",
    "win_var_per_cls_min",
    "win_var_per_cls_max",
    "win_var_per_cls_mean",
    "win_var_per_cls_sd",
    "win_var_per_cls_last",
    "win_frac_binary_mean",
    "win_frac_binary_sd",
    "win_frac_binary_last",
    "win_frac_ternary_mean",
    "win_frac_ternary_sd",
    "win_frac_ternary_last",
    "win_avg_clause_size_mean",
    "win_avg_clause_size_sd",
    "win_avg_clause_size_last",
    "win_trail_depth_max",
    "win_trail_depth_mean",
    "win_trail_depth_sd",
    "win_decision_depth_max",
    "win_decision_depth_mean",
    "win_decision_depth_sd",
    "win_backjump_size_max",
    "win_backjump_size_mean",
    "win_backjump_size_sd",
    "win_learnt_size_min",
    "win_learnt_size_max",
    "win_learnt_size_mean",
    "win_learnt_size_sd",
    "win_conflict_size_min",
    "win_conflict_size_max",
    "win_conflict_size_mean",
    "win_conflict_size_sd",
    "win_abb_min",
    "win_abb_max",
    "win_abb_mean",
    "win_abb_sd",
    "win_aab_min",
    "win_aab_max",
    "win_aab_mean",
    "win_aab_sd",
    "win_aab_mean_over_abb_mean_min",
    "win_aab_mean_over_abb_mean_max",
    "win_aab_mean_over_abb_mean_mean",
    "win_aab_mean_over_abb_mean_sd",
    "win_abb_mean_over_aab_mean_min",
    "win_abb_mean_over_aab_mean_max",
    "win_abb_mean_over_aab_mean_mean",
    "win_abb_mean_over_aab_mean_sd",
    "win_log_wbe_min",
    "win_log_wbe_max",
    "win_log_wbe_mean",
    "win_log_wbe_sd",
    "win_log_wbe_last",
];

pub fn chained_feature_name(index: usize) -> String {
    format!("chain_pred_{}", index + 1)
}

/// Full column-name list for vectors with `chained_len` chained entries.
pub fn feature_names(chained_len: usize) -> Vec<String> {
    BASE_FEATURE_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain((0..chained_len).map(chained_feature_name))
        .collect()
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature {name} is not finite ({value}); probe produced bad data")]
    NonFinite { name: String, value: f64 },
    #[error("window snapshot is not closed (has {got} of {want} events)")]
    WindowNotClosed { got: u64, want: u64 },
}

/// One instance's features: the 64 base entries plus any chained predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    base: Vec<f64>,
    chained: Vec<f64>,
    /// Data-quality flag: some tracked ratio had a zero denominator and was
    /// recorded as 0.
    pub flagged: bool,
}

impl FeatureVector {
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn chained(&self) -> &[f64] {
        &self.chained
    }

    pub fn len(&self) -> usize {
        self.base.len() + self.chained.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All entries in canonical order: base block, then chained block.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.base.iter().chain(self.chained.iter()).copied()
    }

    pub fn from_parts(base: Vec<f64>, chained: Vec<f64>, flagged: bool) -> Self {
        assert_eq!(base.len(), BASE_FEATURE_COUNT);
        FeatureVector {
            base,
            chained,
            flagged,
        }
    }
}

/// Builds the feature vector for one closed window.
///
/// `formula` must describe the original instance; dynamic clause statistics
/// come from the snapshot. Ratios with zero denominators yield 0 and set the
/// data-quality flag rather than poisoning the vector.
pub fn build_features(
    formula: &FormulaStats,
    snapshot: &WindowSnapshot,
    chained: &[f64],
) -> Result<FeatureVector, FeatureError> {
    if snapshot.event_count != snapshot.span.size {
        return Err(FeatureError::WindowNotClosed {
            got: snapshot.event_count,
            want: snapshot.span.size,
        });
    }
    let mut flagged = snapshot.div_by_zero;
    let mut guard = |num: f64, den: f64| {
        if den == 0.0 {
            flagged = true;
            0.0
        } else {
            num / den
        }
    };

    let vars = formula.num_vars as f64;
    let cls = formula.num_clauses as f64;
    let init_cls_per_var = guard(cls, vars);
    let init_var_per_cls = guard(vars, cls);
    let init_frac_binary = guard(formula.binary_clauses as f64, cls);
    let init_frac_ternary = guard(formula.ternary_clauses as f64, cls);
    let init_avg_clause_size = guard(formula.total_literals as f64, cls);

    let s = &snapshot.series;
    let values = vec![
        vars,
        cls,
        init_cls_per_var,
        init_var_per_cls,
        init_frac_binary,
        init_frac_ternary,
        init_avg_clause_size,
        s.cls_per_var.min(),
        s.cls_per_var.max(),
        s.cls_per_var.mean(),
        s.cls_per_var.sd(),
        s.cls_per_var.last(),
        s.var_per_cls.min(),
        s.var_per_cls.max(),
        s.var_per_cls.mean(),
        s.var_per_cls.sd(),
        s.var_per_cls.last(),
        s.frac_binary.mean(),
        s.frac_binary.sd(),
        s.frac_binary.last(),
        s.frac_ternary.mean(),
        s.frac_ternary.sd(),
        s.frac_ternary.last(),
        s.avg_clause_size.mean(),
        s.avg_clause_size.sd(),
        s.avg_clause_size.last(),
        s.trail_depth.max(),
        s.trail_depth.mean(),
        s.trail_depth.sd(),
        s.decision_depth.max(),
        s.decision_depth.mean(),
        s.decision_depth.sd(),
        s.backjump_size.max(),
        s.backjump_size.mean(),
        s.backjump_size.sd(),
        s.learnt_size.min(),
        s.learnt_size.max(),
        s.learnt_size.mean(),
        s.learnt_size.sd(),
        s.conflict_size.min(),
        s.conflict_size.max(),
        s.conflict_size.mean(),
        s.conflict_size.sd(),
        s.abb.min(),
        s.abb.max(),
        s.abb.mean(),
        s.abb.sd(),
        s.aab.min(),
        s.aab.max(),
        s.aab.mean(),
        s.aab.sd(),
        s.ratio_aab_abb.min(),
        s.ratio_aab_abb.max(),
        s.ratio_aab_abb.mean(),
        s.ratio_aab_abb.sd(),
        s.ratio_abb_aab.min(),
        s.ratio_abb_aab.max(),
        s.ratio_abb_aab.mean(),
        s.ratio_abb_aab.sd(),
        s.log_wbe.min(),
        s.log_wbe.max(),
        s.log_wbe.mean(),
        s.log_wbe.sd(),
        s.log_wbe.last(),
    ];
    debug_assert_eq!(values.len(), BASE_FEATURE_COUNT);
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(FeatureError::NonFinite {
                name: BASE_FEATURE_NAMES[i].to_string(),
                value: v,
            });
        }
    }
    for (i, &v) in chained.iter().enumerate() {
        if !v.is_finite() {
            return Err(FeatureError::NonFinite {
                name: chained_feature_name(i),
                value: v,
            });
        }
    }
    Ok(FeatureVector {
        base: values,
        chained: chained.to_vec(),
        flagged,
    })
}

/// One training/evaluation row: an instance's features from one window, with
/// its full-run cost label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub id: String,
    pub satisfiable: bool,
    /// 1-based ordinal among the run's closed windows (1 in no-restart mode).
    pub window_index: u32,
    pub solver_restart_index: u32,
    pub features: FeatureVector,
    /// Natural log of the run's total conflict count, all restarts included.
    pub label: f64,
}

// ---------------------------------------------------------------------------
// dataset files

pub const DATASET_VERSION: &str = "satcast dataset v1";

/// Provenance carried in a dataset header.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub fingerprint: String,
    pub solver: String,
    pub window: String,
    pub wbe: String,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub chained_len: usize,
    pub examples: Vec<LabeledExample>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown dataset version {0:?}")]
    UnknownVersion(String),
    #[error("dataset header is missing field {0:?}")]
    HeaderMissing(&'static str),
    #[error("chained length mismatch: example {id} has {got}, dataset has {want}")]
    DimensionMismatch { id: String, got: usize, want: usize },
    #[error("column mismatch at position {index}: expected {expected:?}, found {found:?}")]
    ColumnMismatch {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("cannot merge datasets: fingerprint {ours} vs {theirs}")]
    MergeFingerprint { ours: String, theirs: String },
    #[error("dataset parse error: {0}")]
    Parse(String),
    #[error("non-finite value in example {0}")]
    NonFinite(String),
}

impl Dataset {
    pub fn new(meta: DatasetMeta, chained_len: usize) -> Self {
        Dataset {
            meta,
            chained_len,
            examples: Vec::new(),
        }
    }

    pub fn push(&mut self, example: LabeledExample) -> Result<(), DatasetError> {
        if example.features.chained().len() != self.chained_len {
            return Err(DatasetError::DimensionMismatch {
                id: example.id.clone(),
                got: example.features.chained().len(),
                want: self.chained_len,
            });
        }
        self.examples.push(example);
        Ok(())
    }

    /// Appends another dataset's rows; refuses when provenance differs, so
    /// e.g. features built under a different estimator variant or window
    /// policy can never be mixed.
    pub fn merge(&mut self, other: Dataset) -> Result<(), DatasetError> {
        if self.meta != other.meta {
            return Err(DatasetError::MergeFingerprint {
                ours: self.meta.fingerprint.clone(),
                theirs: other.meta.fingerprint.clone(),
            });
        }
        for example in other.examples {
            self.push(example)?;
        }
        Ok(())
    }

    pub fn write_to_string(&self) -> Result<String, DatasetError> {
        let mut out = String::new();
        let _ = writeln!(out, "# {DATASET_VERSION}");
        let _ = writeln!(out, "# fingerprint: {}", self.meta.fingerprint);
        let _ = writeln!(out, "# solver: {}", self.meta.solver);
        let _ = writeln!(out, "# window: {}", self.meta.window);
        let _ = writeln!(out, "# wbe: {}", self.meta.wbe);
        let _ = writeln!(out, "# chained: {}", self.chained_len);
        let names = feature_names(self.chained_len);
        let _ = writeln!(
            out,
            "id,sat,window_index,solver_restart,flagged,{},log_conflicts",
            names.join(",")
        );
        for example in &self.examples {
            if example.features.chained().len() != self.chained_len {
                return Err(DatasetError::DimensionMismatch {
                    id: example.id.clone(),
                    got: example.features.chained().len(),
                    want: self.chained_len,
                });
            }
            if !example.label.is_finite() {
                return Err(DatasetError::NonFinite(example.id.clone()));
            }
            let _ = write!(
                out,
                "{},{},{},{},{}",
                example.id,
                example.satisfiable as u8,
                example.window_index,
                example.solver_restart_index,
                example.features.flagged as u8
            );
            for value in example.features.values() {
                let _ = write!(out, ",{value}");
            }
            let _ = writeln!(out, ",{}", example.label);
        }
        Ok(out)
    }

    pub fn write_to_file(&self, path: &Path) -> Result<(), DatasetError> {
        let text = self.write_to_string()?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_from_str(text: &str) -> Result<Dataset, DatasetError> {
        let mut lines = text.lines();
        let version = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or(DatasetError::HeaderMissing("version"))?;
        if version != DATASET_VERSION {
            return Err(DatasetError::UnknownVersion(version.to_string()));
        }
        let mut fingerprint = None;
        let mut solver = None;
        let mut window = None;
        let mut wbe = None;
        let mut chained_len = None;
        let mut header_line = None;
        for line in lines.by_ref() {
            if let Some(rest) = line.strip_prefix("# ") {
                if let Some((key, value)) = rest.split_once(": ") {
                    match key {
                        "fingerprint" => fingerprint = Some(value.to_string()),
                        "solver" => solver = Some(value.to_string()),
                        "window" => window = Some(value.to_string()),
                        "wbe" => wbe = Some(value.to_string()),
                        "chained" => {
                            chained_len = Some(value.parse::<usize>().map_err(|_| {
                                DatasetError::Parse(format!("bad chained count {value:?}"))
                            })?)
                        }
                        _ => {}
                    }
                }
            } else {
                header_line = Some(line);
                break;
            }
        }
        let meta = DatasetMeta {
            fingerprint: fingerprint.ok_or(DatasetError::HeaderMissing("fingerprint"))?,
            solver: solver.ok_or(DatasetError::HeaderMissing("solver"))?,
            window: window.ok_or(DatasetError::HeaderMissing("window"))?,
            wbe: wbe.ok_or(DatasetError::HeaderMissing("wbe"))?,
        };
        let chained_len = chained_len.ok_or(DatasetError::HeaderMissing("chained"))?;
        let header_line = header_line.ok_or(DatasetError::HeaderMissing("column header"))?;

        let expected: Vec<String> = ["id", "sat", "window_index", "solver_restart", "flagged"]
            .into_iter()
            .map(str::to_string)
            .chain(feature_names(chained_len))
            .chain(std::iter::once("log_conflicts".to_string()))
            .collect();
        for (index, (found, want)) in header_line.split(',').zip(expected.iter()).enumerate() {
            if found != want {
                return Err(DatasetError::ColumnMismatch {
                    index,
                    expected: want.clone(),
                    found: found.to_string(),
                });
            }
        }
        let found_cols = header_line.split(',').count();
        if found_cols != expected.len() {
            return Err(DatasetError::Parse(format!(
                "expected {} columns, found {}",
                expected.len(),
                found_cols
            )));
        }

        let mut dataset = Dataset::new(meta, chained_len);
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != expected.len() {
                return Err(DatasetError::Parse(format!(
                    "row has {} fields, expected {}",
                    fields.len(),
                    expected.len()
                )));
            }
            let parse_f64 = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| DatasetError::Parse(format!("bad float {s:?}")))
            };
            let id = fields[0].to_string();
            let satisfiable = fields[1] == "1";
            let window_index: u32 = fields[2]
                .parse()
                .map_err(|_| DatasetError::Parse(format!("bad window index {:?}", fields[2])))?;
            let solver_restart_index: u32 = fields[3]
                .parse()
                .map_err(|_| DatasetError::Parse(format!("bad restart index {:?}", fields[3])))?;
            let flagged = fields[4] == "1";
            let mut base = Vec::with_capacity(BASE_FEATURE_COUNT);
            for s in &fields[5..5 + BASE_FEATURE_COUNT] {
                base.push(parse_f64(s)?);
            }
            let mut chained = Vec::with_capacity(chained_len);
            for s in &fields[5 + BASE_FEATURE_COUNT..5 + BASE_FEATURE_COUNT + chained_len] {
                chained.push(parse_f64(s)?);
            }
            let label = parse_f64(fields[fields.len() - 1])?;
            dataset.examples.push(LabeledExample {
                id,
                satisfiable,
                window_index,
                solver_restart_index,
                features: FeatureVector::from_parts(base, chained, flagged),
                label,
            });
        }
        Ok(dataset)
    }

    pub fn read_from_file(path: &Path) -> Result<Dataset, DatasetError> {
        let text = std::fs::read_to_string(path)?;
        Dataset::read_from_str(&text)
    }
}
