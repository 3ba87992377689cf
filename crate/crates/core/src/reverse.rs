//! Reverse mapping: replace each anonymized value by the original value of
//! the same rank, so every output attribute is a permutation of the original.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{attribute_seed, compute_ranks, MicrodataTable, Role};

/// Where a reverse-mapped table came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub original: String,
    pub anonymized: String,
    pub tie_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseMapped {
    pub table: MicrodataTable,
    pub provenance: Provenance,
}

/// `z_i = x_(rank(y_i))`.
pub fn reverse_map_column(original: &[f64], anonymized: &[f64], tie_seed: u64) -> Result<Vec<f64>> {
    if original.len() != anonymized.len() {
        return Err(Error::ShapeMismatch(format!(
            "original has {} values, anonymized has {}",
            original.len(),
            anonymized.len()
        )));
    }
    let y_ranks = compute_ranks(anonymized, tie_seed)?;
    if let Some(i) = original.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidValue(format!(
            "non-finite original value at position {i}"
        )));
    }
    let mut sorted = original.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(y_ranks.as_slice().iter().map(|&r| sorted[r - 1]).collect())
}

/// Attribute-wise reverse mapping. Attribute `j` breaks ties in `Y^j` with
/// `attribute_seed(tie_seed, j)`; attributes are processed in parallel.
pub fn reverse_map_table(
    original: &MicrodataTable,
    anonymized: &MicrodataTable,
    tie_seed: u64,
) -> Result<MicrodataTable> {
    original.check_same_shape(anonymized)?;
    let columns = (0..original.n_attributes())
        .into_par_iter()
        .map(|j| reverse_map_column(original.column(j), anonymized.column(j), attribute_seed(tie_seed, j)))
        .collect::<Result<Vec<_>>>()?;
    MicrodataTable::new(original.attribute_names().to_vec(), columns, Role::ReverseMapped)
}

/// [`reverse_map_table`] with lineage attached.
pub fn reverse_map_with_provenance(
    original: &MicrodataTable,
    original_id: &str,
    anonymized: &MicrodataTable,
    anonymized_id: &str,
    tie_seed: u64,
) -> Result<ReverseMapped> {
    Ok(ReverseMapped {
        table: reverse_map_table(original, anonymized, tie_seed)?,
        provenance: Provenance {
            original: original_id.to_string(),
            anonymized: anonymized_id.to_string(),
            tie_seed,
        },
    })
}

/// True when every attribute of `candidate` is a rearrangement of the same attribute in `original`.
pub fn is_attribute_permutation(original: &MicrodataTable, candidate: &MicrodataTable) -> bool {
    if !original.same_shape(candidate) {
        return false;
    }
    (0..original.n_attributes()).all(|j| {
        let mut a = original.column(j).to_vec();
        let mut b = candidate.column(j).to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        a == b
    })
}
