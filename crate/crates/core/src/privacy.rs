//! Permutation distance and (d, v)-permuted privacy.
//!
//! For an original record `x` and a target table (the anonymized `Y`, or the
//! reverse-mapped `Z`), each attribute contributes the rank of the target
//! value closest to `x^j`. The permutation distance is the smallest `d` for
//! which some target record has every attribute rank within `d` of those
//! closest ranks. A table provides (d, v)-permuted privacy for `x` when that
//! distance is at least `d` and, for every attribute, the values whose rank
//! lies within `d` of the closest rank have population variance strictly
//! greater than `v_j`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{values_by_rank, MicrodataTable, RankProfile, RankVector, Role};

/// The target value nearest to one attribute of a record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosestValue {
    pub value: f64,
    pub rank: usize,
}

/// A target record at minimal permutation distance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMatch {
    pub index: usize,
    /// `|rank_j(match) - rank_j(closest)|` for each attribute.
    pub deviations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDistanceResult {
    /// Index of the record in the original table, absent for external records.
    pub record_index: Option<usize>,
    pub closest: Vec<ClosestValue>,
    /// All target records attaining the minimum, in index order. Never empty.
    pub matches: Vec<RecordMatch>,
    pub distance: usize,
}

impl RecordDistanceResult {
    pub fn matched_indices(&self) -> Vec<usize> {
        self.matches.iter().map(|m| m.index).collect()
    }

    pub fn closest_ranks(&self) -> Vec<usize> {
        self.closest.iter().map(|c| c.rank).collect()
    }
}

/// A target table with its ranks and rank-ordered values, ready for repeated
/// distance queries.
#[derive(Debug, Clone)]
pub struct RankedTarget {
    profile: RankProfile,
    sorted: Vec<Vec<f64>>,
    role: Role,
}

impl RankedTarget {
    pub fn new(table: &MicrodataTable, tie_seed: u64) -> Self {
        let profile = RankProfile::compute(table, tie_seed);
        Self::with_profile(table, profile).expect("profile computed from the same table")
    }

    pub fn with_profile(table: &MicrodataTable, profile: RankProfile) -> Result<Self> {
        if profile.ranks.len() != table.n_attributes() || profile.ranks.iter().any(|r| r.len() != table.n_records()) {
            return Err(Error::ShapeMismatch("rank profile does not fit the table".into()));
        }
        let sorted = profile
            .ranks
            .iter()
            .enumerate()
            .map(|(j, r)| values_by_rank(table.column(j), r))
            .collect();
        Ok(Self {
            profile,
            sorted,
            role: table.role(),
        })
    }

    pub fn n_records(&self) -> usize {
        self.sorted[0].len()
    }

    pub fn n_attributes(&self) -> usize {
        self.sorted.len()
    }

    pub fn profile(&self) -> &RankProfile {
        &self.profile
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Values of attribute `j` in rank order.
    pub fn sorted_column(&self, j: usize) -> &[f64] {
        &self.sorted[j]
    }

    /// Nearest value to `x` in attribute `j`; equal distances resolve to the smaller rank.
    pub fn closest(&self, j: usize, x: f64) -> ClosestValue {
        let sorted = &self.sorted[j];
        let p = sorted.partition_point(|&v| v < x);
        let pick = if p == sorted.len() {
            first_of_run(sorted, p - 1)
        } else if p == 0 || sorted[p] == x {
            p
        } else {
            let left = first_of_run(sorted, p - 1);
            if x - sorted[left] <= sorted[p] - x {
                left
            } else {
                p
            }
        };
        ClosestValue {
            value: sorted[pick],
            rank: pick + 1,
        }
    }

    /// Permutation distance of a record against this target.
    pub fn distance(&self, x: &[f64]) -> Result<RecordDistanceResult> {
        if x.len() != self.n_attributes() {
            return Err(Error::ShapeMismatch(format!(
                "record has {} values, target has {} attributes",
                x.len(),
                self.n_attributes()
            )));
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite value in attribute {j}")));
        }
        let closest: Vec<ClosestValue> = x.iter().enumerate().map(|(j, &v)| self.closest(j, v)).collect();

        let n = self.n_records();
        let mut best = usize::MAX;
        let mut matches = Vec::new();
        for i in 0..n {
            let dev = self.max_deviation(i, &closest);
            if dev < best {
                best = dev;
                matches.clear();
            }
            if dev == best {
                matches.push(i);
            }
        }
        let matches = matches
            .into_iter()
            .map(|i| RecordMatch {
                index: i,
                deviations: self.deviations(i, &closest),
            })
            .collect();
        Ok(RecordDistanceResult {
            record_index: None,
            closest,
            matches,
            distance: best,
        })
    }

    fn deviations(&self, i: usize, closest: &[ClosestValue]) -> Vec<usize> {
        self.profile
            .ranks
            .iter()
            .zip(closest)
            .map(|(r, c)| r.get(i).abs_diff(c.rank))
            .collect()
    }

    fn max_deviation(&self, i: usize, closest: &[ClosestValue]) -> usize {
        self.profile
            .ranks
            .iter()
            .zip(closest)
            .map(|(r, c)| r.get(i).abs_diff(c.rank))
            .max()
            .unwrap_or(0)
    }

    /// Population variance of attribute `j` over ranks `center ± d`, clipped to `[1, n]`.
    pub fn window_variance(&self, j: usize, center_rank: usize, d: usize) -> f64 {
        sorted_window_variance(&self.sorted[j], center_rank, d)
    }

    /// Window variances for every attribute around a record's closest ranks.
    pub fn window_variances(&self, closest: &[ClosestValue], d: usize) -> Vec<f64> {
        closest
            .iter()
            .enumerate()
            .map(|(j, c)| self.window_variance(j, c.rank, d))
            .collect()
    }
}

fn first_of_run(sorted: &[f64], mut i: usize) -> usize {
    while i > 0 && sorted[i - 1] == sorted[i] {
        i -= 1;
    }
    i
}

fn sorted_window_variance(sorted: &[f64], center_rank: usize, d: usize) -> f64 {
    let lo = center_rank.saturating_sub(d).max(1);
    let hi = center_rank.saturating_add(d).min(sorted.len());
    let window = &sorted[lo - 1..hi];
    let len = window.len() as f64;
    let mean = window.iter().sum::<f64>() / len;
    window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len
}

/// Permutation distance of `x` against `anonymized`, whose ranks are `ranks`.
pub fn permutation_distance(
    x: &[f64],
    anonymized: &MicrodataTable,
    ranks: &RankProfile,
) -> Result<RecordDistanceResult> {
    RankedTarget::with_profile(anonymized, ranks.clone())?.distance(x)
}

/// Population variance of the values whose rank is within `d` of `center_rank`.
pub fn window_variance(column: &[f64], ranks: &RankVector, center_rank: usize, d: usize) -> Result<f64> {
    if column.len() != ranks.len() {
        return Err(Error::ShapeMismatch(format!(
            "column of {} values with {} ranks",
            column.len(),
            ranks.len()
        )));
    }
    if center_rank == 0 || center_rank > ranks.len() {
        return Err(Error::RankOutOfRange {
            rank: center_rank,
            n: ranks.len(),
        });
    }
    Ok(sorted_window_variance(&values_by_rank(column, ranks), center_rank, d))
}

/// Outcome of checking one record against (d, v) targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordVerdict {
    pub passed: bool,
    pub distance_ok: bool,
    pub variance_ok: Vec<bool>,
    pub d_target: usize,
    pub v_target: Vec<f64>,
    pub result: RecordDistanceResult,
    /// Window variances at `d_target`.
    pub variances: Vec<f64>,
    /// Which table the record was checked against (anonymized or reverse-mapped).
    pub checked_against: Role,
}

/// Needs only the record and the released table, so a data subject can run it.
pub fn verify_record(x: &[f64], target: &RankedTarget, d_target: usize, v_target: &[f64]) -> Result<RecordVerdict> {
    if v_target.len() != target.n_attributes() {
        return Err(Error::ShapeMismatch(format!(
            "{} variance thresholds for {} attributes",
            v_target.len(),
            target.n_attributes()
        )));
    }
    let result = target.distance(x)?;
    let variances = target.window_variances(&result.closest, d_target);
    let distance_ok = result.distance >= d_target;
    let variance_ok: Vec<bool> = variances.iter().zip(v_target).map(|(v, t)| v > t).collect();
    Ok(RecordVerdict {
        passed: distance_ok && variance_ok.iter().all(|&ok| ok),
        distance_ok,
        variance_ok,
        d_target,
        v_target: v_target.to_vec(),
        result,
        variances,
        checked_against: target.role(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordCertificate {
    pub result: RecordDistanceResult,
    /// Window variances at the dataset-level distance.
    pub variances_at_dataset_distance: Vec<f64>,
    /// Window variances at this record's own distance.
    pub variances_at_record_distance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyCertificate {
    pub per_record: Vec<RecordCertificate>,
    pub dataset_distance: usize,
    pub dataset_variances: Vec<f64>,
    pub attribute_names: Vec<String>,
    pub checked_against: Role,
    pub tie_seed: u64,
    /// Method and parameters of the anonymization, never its seed.
    pub disclosure: Option<String>,
}

impl PrivacyCertificate {
    pub fn distances(&self) -> Vec<usize> {
        self.per_record.iter().map(|r| r.result.distance).collect()
    }

    /// Whether the dataset satisfies (d, v)-permuted privacy for the given targets.
    pub fn satisfies(&self, target: &RankedTarget, d_target: usize, v_target: &[f64]) -> bool {
        self.per_record.iter().all(|r| {
            r.result.distance >= d_target
                && target
                    .window_variances(&r.result.closest, d_target)
                    .iter()
                    .zip(v_target)
                    .all(|(v, t)| v > t)
        })
    }
}

/// Protector-side certificate over every original record.
pub fn certify_dataset(
    original: &MicrodataTable,
    anonymized: &MicrodataTable,
    tie_seed: u64,
    disclosure: Option<String>,
) -> Result<PrivacyCertificate> {
    original.check_same_shape(anonymized)?;
    let target = RankedTarget::new(anonymized, tie_seed);
    certify_against(original, &target, tie_seed, disclosure)
}

pub(crate) fn certify_against(
    original: &MicrodataTable,
    target: &RankedTarget,
    tie_seed: u64,
    disclosure: Option<String>,
) -> Result<PrivacyCertificate> {
    let results = (0..original.n_records())
        .into_par_iter()
        .map(|i| {
            let mut r = target.distance(&original.record(i))?;
            r.record_index = Some(i);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let dataset_distance = results.iter().map(|r| r.distance).min().expect("n >= 1");

    let per_record: Vec<RecordCertificate> = results
        .into_iter()
        .map(|result| RecordCertificate {
            variances_at_dataset_distance: target.window_variances(&result.closest, dataset_distance),
            variances_at_record_distance: target.window_variances(&result.closest, result.distance),
            result,
        })
        .collect();
    let dataset_variances = (0..target.n_attributes())
        .map(|j| {
            per_record
                .iter()
                .map(|r| r.variances_at_dataset_distance[j])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    Ok(PrivacyCertificate {
        per_record,
        dataset_distance,
        dataset_variances,
        attribute_names: original.attribute_names().to_vec(),
        checked_against: target.role(),
        tie_seed,
        disclosure,
    })
}
