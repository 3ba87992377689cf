//! Microdata tables and seeded ranking.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded_rng};

/// What a table stands for in an analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Original,
    Anonymized,
    ReverseMapped,
    Baseline,
}

/// A rectangular table of `n` records by `m` numeric attributes, stored by column.
///
/// Construction guarantees `n >= 1`, `m >= 1`, distinct attribute names and
/// finite cells; every other module relies on that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct MicrodataTable {
    attribute_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    role: Role,
}

#[derive(Deserialize)]
struct RawTable {
    attribute_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    role: Role,
}

impl TryFrom<RawTable> for MicrodataTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        MicrodataTable::new(raw.attribute_names, raw.columns, raw.role)
    }
}

impl MicrodataTable {
    pub fn new(attribute_names: Vec<String>, columns: Vec<Vec<f64>>, role: Role) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput("table has no attributes".into()));
        }
        if attribute_names.len() != columns.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} attribute names for {} columns",
                attribute_names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &attribute_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidValue(format!("duplicate attribute name {name:?}")));
            }
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::EmptyInput("table has no records".into()));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "column {} has {} values, expected {n}",
                    attribute_names[j],
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidValue(format!(
                    "non-finite value in record {i}, attribute {}",
                    attribute_names[j]
                )));
            }
        }
        Ok(Self {
            attribute_names,
            columns,
            role,
        })
    }

    /// Table with generated names `{prefix}1..{prefix}m`.
    pub fn from_columns(prefix: &str, columns: Vec<Vec<f64>>, role: Role) -> Result<Self> {
        let names = (1..=columns.len()).map(|j| format!("{prefix}{j}")).collect();
        Self::new(names, columns, role)
    }

    /// Build from row-major records.
    pub fn from_records(attribute_names: Vec<String>, records: &[Vec<f64>], role: Role) -> Result<Self> {
        let m = attribute_names.len();
        let mut columns = vec![Vec::with_capacity(records.len()); m];
        for (i, rec) in records.iter().enumerate() {
            if rec.len() != m {
                return Err(Error::ShapeMismatch(format!(
                    "record {i} has {} values, expected {m}",
                    rec.len()
                )));
            }
            for (col, &v) in columns.iter_mut().zip(rec) {
                col.push(v);
            }
        }
        Self::new(attribute_names, columns, role)
    }

    pub fn n_records(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    pub fn record(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn records(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.n_records()).map(|i| self.record(i))
    }

    /// Same `n` and `m`.
    pub fn same_shape(&self, other: &MicrodataTable) -> bool {
        self.n_records() == other.n_records() && self.n_attributes() == other.n_attributes()
    }

    pub(crate) fn check_same_shape(&self, other: &MicrodataTable) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{}x{} table vs {}x{} table",
                self.n_records(),
                self.n_attributes(),
                other.n_records(),
                other.n_attributes()
            )))
        }
    }
}

/// 1-based ranks of a column: `ranks[i]` is the rank of record `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankVector(Vec<usize>);

impl RankVector {
    /// Wraps an existing vector after checking it is a permutation of `1..=n`.
    pub fn from_vec(ranks: Vec<usize>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r == 0 || r > n || seen[r - 1] {
                return Err(Error::InvalidValue(format!(
                    "{ranks:?} is not a permutation of 1..={n}"
                )));
            }
            seen[r - 1] = true;
        }
        Ok(Self(ranks))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Record indices ordered by rank: element `r - 1` holds the record of rank `r`.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.0.len()];
        for (i, &r) in self.0.iter().enumerate() {
            order[r - 1] = i;
        }
        order
    }
}

fn check_finite(column: &[f64]) -> Result<()> {
    if column.is_empty() {
        return Err(Error::EmptyInput("column has no values".into()));
    }
    if let Some(i) = column.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidValue(format!("non-finite value at position {i}")));
    }
    Ok(())
}

/// Ranks `1..=n` with rank 1 for the smallest value.
///
/// Groups of exactly equal values get consecutive ranks in an order drawn
/// by a seeded shuffle; everything else follows numeric order.
pub fn compute_ranks(column: &[f64], tie_seed: u64) -> Result<RankVector> {
    check_finite(column)?;
    let mut order: Vec<usize> = (0..column.len()).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));

    let mut rng = None;
    let mut start = 0;
    while start < order.len() {
        let v = column[order[start]];
        let mut end = start + 1;
        while end < order.len() && column[order[end]] == v {
            end += 1;
        }
        if end - start > 1 {
            let rng = rng.get_or_insert_with(|| seeded_rng(tie_seed));
            order[start..end].shuffle(rng);
        }
        start = end;
    }

    let mut ranks = vec![0; column.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    Ok(RankVector(ranks))
}

/// The value holding rank `rank` under `ranks`.
pub fn value_at_rank(column: &[f64], ranks: &RankVector, rank: usize) -> Result<f64> {
    if column.len() != ranks.len() {
        return Err(Error::ShapeMismatch(format!(
            "column of {} values with {} ranks",
            column.len(),
            ranks.len()
        )));
    }
    if rank == 0 || rank > ranks.len() {
        return Err(Error::RankOutOfRange { rank, n: ranks.len() });
    }
    let i = ranks
        .as_slice()
        .iter()
        .position(|&r| r == rank)
        .expect("rank vector is a permutation");
    Ok(column[i])
}

/// Column values rearranged in rank order (ascending).
pub fn values_by_rank(column: &[f64], ranks: &RankVector) -> Vec<f64> {
    ranks.order().into_iter().map(|i| column[i]).collect()
}

/// Per-attribute ranks of a table together with the seed that broke ties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    pub ranks: Vec<RankVector>,
    pub tie_seed: u64,
}

impl RankProfile {
    /// Attribute `j` is ranked with the child seed `derive_seed(tie_seed, j)`.
    pub fn compute(table: &MicrodataTable, tie_seed: u64) -> Self {
        let ranks = table
            .columns()
            .iter()
            .enumerate()
            .map(|(j, col)| {
                compute_ranks(col, attribute_seed(tie_seed, j)).expect("table cells are finite and nonempty")
            })
            .collect();
        Self { ranks, tie_seed }
    }

    pub fn attribute(&self, j: usize) -> &RankVector {
        &self.ranks[j]
    }
}

/// Tie-break seed used for attribute `j` of a table ranked under `tie_seed`.
pub fn attribute_seed(tie_seed: u64, j: usize) -> u64 {
    derive_seed(tie_seed, j as u64)
}
