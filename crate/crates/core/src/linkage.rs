//! Record linkage by a maximum-knowledge intruder.
//!
//! The intruder knows the full original table and can reverse-map the release,
//! so all that remains hidden is the permutation. Each original record is linked
//! to every reverse-mapped record at minimal permutation distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::RankedTarget;
use crate::reverse::is_attribute_permutation;
use crate::table::MicrodataTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordLink {
    pub original_index: usize,
    /// Indices into the permuted table, ascending. Never empty.
    pub matches: Vec<usize>,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkageResult {
    pub links: Vec<RecordLink>,
    /// Permuted records no original record links to.
    pub unmatched: Vec<usize>,
    /// Permuted records linked from more than one original record.
    pub multiply_matched: Vec<usize>,
    /// False when the permuted table is not an attribute-wise permutation of the original.
    pub permutation_verified: bool,
    pub tie_seed: u64,
}

impl LinkageResult {
    pub fn distances(&self) -> Vec<usize> {
        self.links.iter().map(|l| l.distance).collect()
    }

    /// Original records with more than one candidate.
    pub fn ambiguous(&self) -> Vec<usize> {
        self.links
            .iter()
            .filter(|l| l.matches.len() > 1)
            .map(|l| l.original_index)
            .collect()
    }
}

pub fn link_records(original: &MicrodataTable, permuted: &MicrodataTable, tie_seed: u64) -> Result<LinkageResult> {
    original.check_same_shape(permuted)?;
    let permutation_verified = is_attribute_permutation(original, permuted);
    let target = RankedTarget::new(permuted, tie_seed);
    let links = (0..original.n_records())
        .into_par_iter()
        .map(|i| {
            let r = target.distance(&original.record(i))?;
            Ok(RecordLink {
                original_index: i,
                matches: r.matched_indices(),
                distance: r.distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut hits = vec![0usize; permuted.n_records()];
    for l in &links {
        for &z in &l.matches {
            hits[z] += 1;
        }
    }
    let unmatched = (0..hits.len()).filter(|&z| hits[z] == 0).collect();
    let multiply_matched = (0..hits.len()).filter(|&z| hits[z] > 1).collect();

    Ok(LinkageResult {
        links,
        unmatched,
        multiply_matched,
        permutation_verified,
        tie_seed,
    })
}

/// The true original-to-permuted correspondence. Known only to the data protector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthMapping(Vec<usize>);

impl TruthMapping {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for (i, &t) in mapping.iter().enumerate() {
            if t >= n {
                return Err(Error::InvalidTruthMapping(format!(
                    "record {i} maps to {t}, outside 0..{n}"
                )));
            }
            if seen[t] {
                return Err(Error::InvalidTruthMapping(format!("target {t} used twice")));
            }
            seen[t] = true;
        }
        Ok(Self(mapping))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn target(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkClass {
    Correct,
    Multiple,
    Misidentified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageScore {
    pub classes: Vec<LinkClass>,
    pub correct: usize,
    pub multiple: usize,
    pub misidentified: usize,
    /// `correct / n`: the protector's measure of how much the linkage succeeded.
    pub correct_proportion: f64,
}

/// Protector-only scoring: requires the true mapping, which the intruder lacks.
pub fn score_linkage(result: &LinkageResult, truth: &TruthMapping) -> Result<LinkageScore> {
    if truth.len() != result.links.len() {
        return Err(Error::InvalidTruthMapping(format!(
            "mapping covers {} records, linkage has {}",
            truth.len(),
            result.links.len()
        )));
    }
    let classes: Vec<LinkClass> = result
        .links
        .iter()
        .map(|l| match l.matches.as_slice() {
            [only] if *only == truth.target(l.original_index) => LinkClass::Correct,
            [_] => LinkClass::Misidentified,
            _ => LinkClass::Multiple,
        })
        .collect();
    let count = |c: LinkClass| classes.iter().filter(|&&k| k == c).count();
    let correct = count(LinkClass::Correct);
    Ok(LinkageScore {
        correct,
        multiple: count(LinkClass::Multiple),
        misidentified: count(LinkClass::Misidentified),
        correct_proportion: correct as f64 / classes.len() as f64,
        classes,
    })
}
