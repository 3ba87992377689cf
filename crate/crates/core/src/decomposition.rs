//! Anonymization viewed as a permutation `X -> Z` followed by rank-neutral
//! residual noise `Z -> Y`, plus rank-correlation risk metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reverse::reverse_map_table;
use crate::table::{compute_ranks, MicrodataTable};

/// `Y = Z + E'` and `Y = X + E`, stored by attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDecomposition {
    pub z: MicrodataTable,
    /// `e'_ij = y_ij - z_ij`
    pub residual_noise: Vec<Vec<f64>>,
    /// `e_ij = y_ij - x_ij`
    pub direct_noise: Vec<Vec<f64>>,
}

fn difference(a: &MicrodataTable, b: &MicrodataTable) -> Vec<Vec<f64>> {
    a.columns()
        .iter()
        .zip(b.columns())
        .map(|(ca, cb)| ca.iter().zip(cb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn decompose(
    original: &MicrodataTable,
    anonymized: &MicrodataTable,
    tie_seed: u64,
) -> Result<ResidualDecomposition> {
    let z = reverse_map_table(original, anonymized, tie_seed)?;
    let residual_noise = difference(anonymized, &z);
    let direct_noise = difference(anonymized, original);
    Ok(ResidualDecomposition {
        z,
        residual_noise,
        direct_noise,
    })
}

impl ResidualDecomposition {
    /// `Z + E'`, which reproduces `Y` up to rounding of the subtraction.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        self.z
            .columns()
            .iter()
            .zip(&self.residual_noise)
            .map(|(zc, ec)| zc.iter().zip(ec).map(|(z, e)| z + e).collect())
            .collect()
    }
}

/// Spearman's rho, `1 - 6 Σd² / (n(n² - 1))`, over strict (tie-broken) ranks.
pub fn spearman_rho(a: &[f64], b: &[f64], tie_seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} values", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "rank correlation needs at least 2 values, got {}",
            a.len()
        )));
    }
    let ra = compute_ranks(a, tie_seed)?;
    let rb = compute_ranks(b, tie_seed)?;
    let sum_sq: u128 = ra
        .as_slice()
        .iter()
        .zip(rb.as_slice())
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u128;
            d * d
        })
        .sum();
    let n = a.len() as f64;
    Ok(1.0 - 6.0 * sum_sq as f64 / (n * (n * n - 1.0)))
}

/// Spearman's rho between each original attribute and its reverse-mapped counterpart.
pub fn rank_correlation_risk(original: &MicrodataTable, z: &MicrodataTable, tie_seed: u64) -> Result<Vec<f64>> {
    original.check_same_shape(z)?;
    (0..original.n_attributes())
        .map(|j| spearman_rho(original.column(j), z.column(j), tie_seed))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub attribute: String,
    pub mean_abs_residual: f64,
    pub mean_abs_direct: f64,
    pub max_abs_residual: f64,
    pub max_abs_direct: f64,
    /// Record index of the largest |E'| (first one on ties).
    pub argmax_residual: usize,
    pub argmax_direct: usize,
}

fn abs_stats(values: &[f64]) -> (f64, f64, usize) {
    let mut sum = 0.0;
    let mut max = 0.0;
    let mut arg = 0;
    for (i, v) in values.iter().map(|v| v.abs()).enumerate() {
        sum += v;
        if v > max {
            max = v;
            arg = i;
        }
    }
    (sum / values.len() as f64, max, arg)
}

/// Per-attribute magnitudes of residual vs direct noise. Descriptive only:
/// residual noise is usually, not always, the smaller of the two.
pub fn noise_magnitude_summary(dec: &ResidualDecomposition) -> Vec<NoiseSummary> {
    dec.residual_noise
        .iter()
        .zip(&dec.direct_noise)
        .zip(dec.z.attribute_names())
        .map(|((res, dir), name)| {
            let (mean_r, max_r, arg_r) = abs_stats(res);
            let (mean_d, max_d, arg_d) = abs_stats(dir);
            NoiseSummary {
                attribute: name.clone(),
                mean_abs_residual: mean_r,
                mean_abs_direct: mean_d,
                max_abs_residual: max_r,
                max_abs_direct: max_d,
                argmax_residual: arg_r,
                argmax_direct: arg_d,
            }
        })
        .collect()
}
