//! The 20-record, 3-attribute running example shipped with the crate.
//!
//! `X` was drawn from N(100, 10²), N(1000, 50²) and N(5000, 200²); `Y` adds
//! N(0, 5²), N(0, 25²) and N(0, 100²) noise. The values are embedded verbatim
//! rather than regenerated so that golden outputs stay exact.

use crate::io::parse_csv;
use crate::table::{MicrodataTable, Role};

pub const ORIGINAL_CSV: &str = include_str!("../fixtures/running_example_original.csv");
pub const ANONYMIZED_CSV: &str = include_str!("../fixtures/running_example_anonymized.csv");

/// Human-readable description of how the anonymized fixture was produced.
pub const DISCLOSURE: &str = "additive Gaussian noise, independent per attribute, standard deviations (5, 25, 100)";

/// Frozen expected outputs, one per regenerated table.
pub mod golden {
    pub const REVERSE_MAPPED: &str = include_str!("../fixtures/golden/table1_reverse_mapped.csv");
    pub const DECOMPOSITION: &str = include_str!("../fixtures/golden/table2_decomposition.csv");
    pub const RECORD3_DISTANCE: &str = include_str!("../fixtures/golden/table3_record3_distance.csv");
    pub const CERTIFICATE: &str = include_str!("../fixtures/golden/table4_certificate.csv");
    pub const LINKAGE: &str = include_str!("../fixtures/golden/table5_linkage.csv");
    pub const DISTRIBUTIONS: &str = include_str!("../fixtures/golden/table6_distributions.csv");
}

#[derive(Debug, Clone)]
pub struct RunningExample {
    pub original: MicrodataTable,
    pub anonymized: MicrodataTable,
}

impl RunningExample {
    pub fn load() -> Self {
        let original = parse_csv(ORIGINAL_CSV.as_bytes(), Role::Original).expect("embedded original fixture");
        let anonymized = parse_csv(ANONYMIZED_CSV.as_bytes(), Role::Anonymized).expect("embedded anonymized fixture");
        Self { original, anonymized }
    }
}
