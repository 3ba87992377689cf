//! Baseline verification of linkages with random records.
//!
//! A baseline set `A` is built by drawing each attribute independently from
//! the source values, so its records carry no real correspondence. The
//! distribution of their permutation distances against `Z` shows how often a
//! match at a given distance appears by chance. When original records match
//! at distances the baseline rarely reaches, the linkages are credible.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::RankedTarget;
use crate::reverse::reverse_map_table;
use crate::rng::stream_rng;
use crate::table::{MicrodataTable, Role};

pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1_000_000;
pub const DEFAULT_SAMPLE_SIZE: usize = 10_000;
pub const DEFAULT_PLAUSIBILITY_THRESHOLD: f64 = 0.05;

/// Records per independently seeded chunk in sampled mode.
const SAMPLE_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// Every combination of per-attribute values: `n^m` records.
    Exhaustive,
    /// `sample_size` records drawn uniformly with replacement, attribute by attribute.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub mode: BaselineMode,
    pub sample_size: usize,
    pub seed: u64,
    pub exhaustive_cap: u64,
}

impl BaselineSpec {
    pub fn exhaustive() -> Self {
        Self {
            mode: BaselineMode::Exhaustive,
            sample_size: DEFAULT_SAMPLE_SIZE,
            seed: 0,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    pub fn sampled(sample_size: usize, seed: u64) -> Self {
        Self {
            mode: BaselineMode::Sampled,
            sample_size,
            seed,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    /// Exhaustive when `n^m` fits under the default cap, otherwise the default sample.
    pub fn auto(n: usize, m: usize, seed: u64) -> Self {
        if combinations(n, m) <= DEFAULT_EXHAUSTIVE_CAP as u128 {
            Self {
                seed,
                ..Self::exhaustive()
            }
        } else {
            Self::sampled(DEFAULT_SAMPLE_SIZE, seed)
        }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        match self.mode {
            BaselineMode::Sampled if self.sample_size == 0 => {
                Err(Error::InvalidSpec("sampled baseline needs sample_size >= 1".into()))
            }
            BaselineMode::Exhaustive => {
                let required = combinations(n, m);
                if required > self.exhaustive_cap as u128 {
                    Err(Error::CapExceeded {
                        required,
                        cap: self.exhaustive_cap,
                    })
                } else {
                    Ok(())
                }
            }
            BaselineMode::Sampled => Ok(()),
        }
    }
}

fn combinations(n: usize, m: usize) -> u128 {
    (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX)
}

/// Random-record set `A` drawn from the columns of `source`.
///
/// Exhaustive order is lexicographic with the first attribute varying slowest.
/// Sampled draws for attribute `j`, chunk `c` come from ChaCha stream
/// `(j << 32) | c`, so the table does not depend on how chunks are scheduled.
pub fn generate_baseline(source: &MicrodataTable, spec: &BaselineSpec) -> Result<MicrodataTable> {
    let n = source.n_records();
    let m = source.n_attributes();
    spec.validate(n, m)?;
    let columns: Vec<Vec<f64>> = match spec.mode {
        BaselineMode::Exhaustive => {
            let total = combinations(n, m) as usize;
            (0..m)
                .into_par_iter()
                .map(|j| {
                    let stride = n.pow((m - 1 - j) as u32);
                    let col = source.column(j);
                    (0..total).map(|k| col[(k / stride) % n]).collect()
                })
                .collect()
        }
        BaselineMode::Sampled => {
            let chunks = spec.sample_size.div_ceil(SAMPLE_CHUNK);
            (0..m)
                .map(|j| {
                    let col = source.column(j);
                    let parts: Vec<Vec<f64>> = (0..chunks)
                        .into_par_iter()
                        .map(|c| {
                            let len = SAMPLE_CHUNK.min(spec.sample_size - c * SAMPLE_CHUNK);
                            let mut rng = stream_rng(spec.seed, ((j as u64) << 32) | c as u64);
                            (0..len).map(|_| col[rng.random_range(0..n)]).collect()
                        })
                        .collect();
                    parts.concat()
                })
                .collect()
        }
    };
    MicrodataTable::new(source.attribute_names().to_vec(), columns, Role::Baseline)
}

/// Frequencies as `[{distance, frequency}]` rows; integer map keys do not
/// survive JSON inside flattened report bodies.
mod frequency_rows {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row {
        distance: usize,
        frequency: f64,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Row> = map
            .iter()
            .map(|(&distance, &frequency)| Row { distance, frequency })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, f64>, D::Error> {
        Ok(Vec::<Row>::deserialize(d)?
            .into_iter()
            .map(|r| (r.distance, r.frequency))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSource {
    Original,
    Baseline,
}

/// Relative frequency of each permutation distance over a set of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceDistribution {
    #[serde(with = "frequency_rows")]
    pub frequencies: BTreeMap<usize, f64>,
    pub sample_size: usize,
    pub source: DistributionSource,
}

impl DistanceDistribution {
    pub fn from_distances(distances: &[usize], source: DistributionSource) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::EmptyInput("no distances to tabulate".into()));
        }
        let mut counts = BTreeMap::new();
        for &d in distances {
            *counts.entry(d).or_insert(0usize) += 1;
        }
        let total = distances.len() as f64;
        Ok(Self {
            frequencies: counts.into_iter().map(|(d, c)| (d, c as f64 / total)).collect(),
            sample_size: distances.len(),
            source,
        })
    }

    /// From published or precomputed frequencies; they must sum to 1 within 1e-9.
    pub fn from_frequencies(
        frequencies: BTreeMap<usize, f64>,
        sample_size: usize,
        source: DistributionSource,
    ) -> Result<Self> {
        if frequencies.values().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidValue(
                "frequencies must be finite and non-negative".into(),
            ));
        }
        let total: f64 = frequencies.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidValue(format!("frequencies sum to {total}, not 1")));
        }
        Ok(Self {
            frequencies,
            sample_size,
            source,
        })
    }

    pub fn frequency(&self, d: usize) -> f64 {
        self.frequencies.get(&d).copied().unwrap_or(0.0)
    }

    /// Largest distance with nonzero mass.
    pub fn max_distance(&self) -> usize {
        self.frequencies
            .iter()
            .rev()
            .find(|(_, &f)| f > 0.0)
            .map(|(&d, _)| d)
            .unwrap_or(0)
    }

    pub fn cumulative(&self, d: usize) -> f64 {
        plausibility(d, self)
    }
}

/// Permutation distance of every record of `records` against `target`.
pub fn distances_against(records: &MicrodataTable, target: &RankedTarget) -> Result<Vec<usize>> {
    if records.n_attributes() != target.n_attributes() {
        return Err(Error::ShapeMismatch(format!(
            "records have {} attributes, target has {}",
            records.n_attributes(),
            target.n_attributes()
        )));
    }
    (0..records.n_records())
        .into_par_iter()
        .map(|i| target.distance(&records.record(i)).map(|r| r.distance))
        .collect()
}

pub fn distance_distribution(
    records: &MicrodataTable,
    target: &MicrodataTable,
    tie_seed: u64,
    source: DistributionSource,
) -> Result<DistanceDistribution> {
    let target = RankedTarget::new(target, tie_seed);
    DistanceDistribution::from_distances(&distances_against(records, &target)?, source)
}

/// `P(D <= distance)` under the baseline: how plausibly a match this close arises by chance.
pub fn plausibility(distance: usize, baseline: &DistanceDistribution) -> f64 {
    if distance >= baseline.max_distance() {
        return 1.0;
    }
    baseline
        .frequencies
        .range(..=distance)
        .map(|(_, f)| f)
        .sum::<f64>()
        .min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub total_variation: f64,
    pub hellinger: f64,
}

/// Total variation and Hellinger distance over the union of supports.
pub fn divergence(a: &DistanceDistribution, b: &DistanceDistribution) -> Divergence {
    let mut support: Vec<usize> = a.frequencies.keys().chain(b.frequencies.keys()).copied().collect();
    support.sort_unstable();
    support.dedup();
    let mut tv = 0.0;
    let mut h = 0.0;
    for d in support {
        let (p, q) = (a.frequency(d), b.frequency(d));
        tv += (p - q).abs();
        h += (p.sqrt() - q.sqrt()).powi(2);
    }
    Divergence {
        total_variation: 0.5 * tv,
        hellinger: (h / 2.0).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyCheck {
    pub distance: usize,
    pub matches: Vec<usize>,
    pub plausibility: f64,
    pub threshold: f64,
    /// A match this close is plausible as a random one.
    pub safe: bool,
    pub baseline: DistanceDistribution,
}

/// Subject-side check for pure-permutation releases: the released table stands
/// in for the original when building the baseline, since both hold the same values.
pub fn subject_safety_check(
    x: &[f64],
    permuted: &MicrodataTable,
    spec: &BaselineSpec,
    threshold: f64,
    tie_seed: u64,
) -> Result<SafetyCheck> {
    let target = RankedTarget::new(permuted, tie_seed);
    let own = target.distance(x)?;
    let a = generate_baseline(permuted, spec)?;
    let baseline =
        DistanceDistribution::from_distances(&distances_against(&a, &target)?, DistributionSource::Baseline)?;
    let p = plausibility(own.distance, &baseline);
    Ok(SafetyCheck {
        distance: own.distance,
        matches: own.matched_indices(),
        plausibility: p,
        threshold,
        safe: p >= threshold,
        baseline,
    })
}

/// Full known-plaintext assessment of a release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub original: DistanceDistribution,
    pub baseline: DistanceDistribution,
    pub divergence: Divergence,
    /// Lower median of the original-record distances.
    pub median_distance: usize,
    pub plausibility_at_median: f64,
    pub threshold: f64,
    pub withstands_known_plaintext: bool,
    pub baseline_spec: BaselineSpec,
    pub tie_seed: u64,
}

/// Reverse-maps `anonymized`, then compares original-record distances against
/// `Z` with those of a baseline drawn from `original`.
pub fn assess(
    original: &MicrodataTable,
    anonymized: &MicrodataTable,
    spec: &BaselineSpec,
    tie_seed: u64,
    threshold: f64,
) -> Result<Assessment> {
    let z = reverse_map_table(original, anonymized, tie_seed)?;
    let target = RankedTarget::new(&z, tie_seed);
    let mut own = distances_against(original, &target)?;
    let a = generate_baseline(original, spec)?;
    let base = distances_against(&a, &target)?;

    let original_dist = DistanceDistribution::from_distances(&own, DistributionSource::Original)?;
    let baseline = DistanceDistribution::from_distances(&base, DistributionSource::Baseline)?;
    own.sort_unstable();
    let median_distance = own[(own.len() - 1) / 2];
    let p = plausibility(median_distance, &baseline);
    Ok(Assessment {
        divergence: divergence(&original_dist, &baseline),
        original: original_dist,
        baseline,
        median_distance,
        plausibility_at_median: p,
        threshold,
        withstands_known_plaintext: p >= threshold,
        baseline_spec: spec.clone(),
        tie_seed,
    })
}
