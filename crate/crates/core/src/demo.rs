//! Regenerates every running-example table from the embedded fixture and
//! compares each against its frozen golden copy.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::baseline::{distances_against, generate_baseline, BaselineSpec, DistanceDistribution, DistributionSource};
use crate::decomposition::decompose;
use crate::error::{Error, Result};
use crate::fixture::{golden, RunningExample, DISCLOSURE};
use crate::io::{emit_histogram, write_report, write_text, Report, ReportBody};
use crate::linkage::{link_records, score_linkage, LinkageScore, TruthMapping};
use crate::privacy::{certify_against, RankedTarget};
use crate::reverse::reverse_map_table;

/// Record whose distance computation is tabulated in full.
const TRACED_RECORD: usize = 2;

#[derive(Debug, Clone)]
pub struct TableCheck {
    pub name: &'static str,
    pub file: &'static str,
    pub generated: String,
    pub mismatches: Vec<String>,
}

impl TableCheck {
    fn new(name: &'static str, file: &'static str, generated: String, golden: &str) -> Self {
        let mismatches = diff_lines(&generated, golden);
        Self {
            name,
            file,
            generated,
            mismatches,
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub tables: Vec<TableCheck>,
    pub linkage_score: LinkageScore,
}

impl DemoOutcome {
    pub fn passed(&self) -> bool {
        self.tables.iter().all(TableCheck::passed)
    }

    pub fn failed_tables(&self) -> Vec<&'static str> {
        self.tables.iter().filter(|t| !t.passed()).map(|t| t.name).collect()
    }
}

fn diff_lines(generated: &str, golden: &str) -> Vec<String> {
    let got: Vec<&str> = generated.lines().collect();
    let want: Vec<&str> = golden.lines().collect();
    let mut out = Vec::new();
    for k in 0..got.len().max(want.len()) {
        let (g, w) = (got.get(k).copied().unwrap_or(""), want.get(k).copied().unwrap_or(""));
        if g != w {
            out.push(format!("line {}: expected {w:?}, got {g:?}", k + 1));
        }
    }
    out
}

fn f2(v: f64) -> String {
    format!("{v:.2}")
}

fn record_numbers(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Runs the whole pipeline on `example` without touching the filesystem.
pub fn run_demo(example: &RunningExample) -> Result<DemoOutcome> {
    const SEED: u64 = 0;
    let x = &example.original;
    let y = &example.anonymized;
    if x.n_attributes() != 3 {
        return Err(Error::ShapeMismatch(
            "the demo tables are laid out for 3 attributes".into(),
        ));
    }
    let n = x.n_records();
    let dec = decompose(x, y, SEED)?;
    let z = &dec.z;
    let mut tables = Vec::new();

    let t1 = csv("Z1,Z2,Z3", (0..n).map(|i| z.record(i).into_iter().map(f2).collect()));
    tables.push(TableCheck::new(
        "reverse-mapped table",
        "table1_reverse_mapped.csv",
        t1,
        golden::REVERSE_MAPPED,
    ));

    let t2 = csv(
        "X1,X2,X3,Z1,Z2,Z3,Ep1,Ep2,Ep3,Y1,Y2,Y3,E1,E2,E3",
        (0..n).map(|i| {
            let mut row: Vec<f64> = x.record(i);
            row.extend(z.record(i));
            row.extend((0..3).map(|j| dec.residual_noise[j][i]));
            row.extend(y.record(i));
            row.extend((0..3).map(|j| dec.direct_noise[j][i]));
            row.into_iter().map(f2).collect()
        }),
    );
    tables.push(TableCheck::new(
        "decomposition table",
        "table2_decomposition.csv",
        t2,
        golden::DECOMPOSITION,
    ));

    let y_target = RankedTarget::new(y, SEED);
    let traced = y_target.distance(&x.record(TRACED_RECORD))?;
    let t3 = csv(
        "Y1,Y2,Y3,R1,R2,R3,D1,D2,D3,MaxD",
        (0..n).map(|i| {
            let ranks: Vec<usize> = (0..3).map(|j| y_target.profile().attribute(j).get(i)).collect();
            let devs: Vec<usize> = ranks
                .iter()
                .zip(&traced.closest)
                .map(|(r, c)| r.abs_diff(c.rank))
                .collect();
            let max = *devs.iter().max().expect("3 attributes");
            let mut row: Vec<String> = y.record(i).into_iter().map(f2).collect();
            row.extend(ranks.iter().map(usize::to_string));
            row.extend(devs.iter().map(usize::to_string));
            row.push(max.to_string());
            row
        }),
    );
    tables.push(TableCheck::new(
        "record-level distance table",
        "table3_record3_distance.csv",
        t3,
        golden::RECORD3_DISTANCE,
    ));

    let cert = certify_against(x, &y_target, SEED, Some(DISCLOSURE.to_string()))?;
    let mut rows4: Vec<Vec<String>> = cert
        .per_record
        .iter()
        .enumerate()
        .map(|(i, rc)| {
            let mut row = vec![(i + 1).to_string()];
            row.extend(x.record(i).into_iter().map(f2));
            row.extend(y.record(i).into_iter().map(f2));
            row.push(record_numbers(&rc.result.matched_indices()));
            row.push(rc.result.distance.to_string());
            for j in 0..3 {
                row.push(f2(rc.variances_at_dataset_distance[j]));
                row.push(f2(rc.variances_at_record_distance[j]));
            }
            row
        })
        .collect();
    let mut summary = vec!["dataset".to_string()];
    summary.extend(std::iter::repeat_n(String::new(), 7));
    summary.push(cert.dataset_distance.to_string());
    for v in &cert.dataset_variances {
        summary.push(f2(*v));
        summary.push(String::new());
    }
    rows4.push(summary);
    let t4 = csv(
        "record,X1,X2,X3,Y1,Y2,Y3,matches,distance,V1_d,V1_di,V2_d,V2_di,V3_d,V3_di",
        rows4,
    );
    tables.push(TableCheck::new(
        "certificate table",
        "table4_certificate.csv",
        t4,
        golden::CERTIFICATE,
    ));

    let linkage = link_records(x, z, SEED)?;
    let t5 = csv(
        "x,z_matches,distance",
        linkage.links.iter().map(|l| {
            vec![
                (l.original_index + 1).to_string(),
                record_numbers(&l.matches),
                l.distance.to_string(),
            ]
        }),
    );
    tables.push(TableCheck::new(
        "linkage table",
        "table5_linkage.csv",
        t5,
        golden::LINKAGE,
    ));
    let linkage_score = score_linkage(&linkage, &TruthMapping::identity(n))?;

    let z_target = RankedTarget::new(z, SEED);
    let original_dist = DistanceDistribution::from_distances(&linkage.distances(), DistributionSource::Original)?;
    let a = generate_baseline(x, &BaselineSpec::exhaustive())?;
    let baseline_dist =
        DistanceDistribution::from_distances(&distances_against(&a, &z_target)?, DistributionSource::Baseline)?;
    let t6 = csv(
        "distance,freq_original,freq_baseline",
        (0..=10).map(|d| {
            vec![
                d.to_string(),
                format!("{:.4}", original_dist.frequency(d)),
                format!("{:.4}", baseline_dist.frequency(d)),
            ]
        }),
    );
    tables.push(TableCheck::new(
        "distance distribution table",
        "table6_distributions.csv",
        t6,
        golden::DISTRIBUTIONS,
    ));

    Ok(DemoOutcome { tables, linkage_score })
}

/// Runs the demo and writes every regenerated table plus JSON reports and the
/// histogram into `out_dir`, creating it if needed.
pub fn write_demo(example: &RunningExample, out_dir: &Path) -> Result<DemoOutcome> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let outcome = run_demo(example)?;
    for t in &outcome.tables {
        write_text(out_dir.join(t.file), &t.generated)?;
    }

    let seeds: BTreeMap<String, u64> = [("tie_break".to_string(), 0)].into_iter().collect();
    let disclosure = Some(DISCLOSURE.to_string());
    let cert = crate::privacy::certify_dataset(&example.original, &example.anonymized, 0, disclosure.clone())?;
    write_report(
        &Report::new(ReportBody::Certificate(cert), seeds.clone(), disclosure.clone()),
        out_dir.join("certificate.json"),
    )?;

    let z = reverse_map_table(&example.original, &example.anonymized, 0)?;
    let linkage = link_records(&example.original, &z, 0)?;
    write_report(
        &Report::new(
            ReportBody::Linkage {
                linkage,
                score: Some(outcome.linkage_score.clone()),
            },
            seeds.clone(),
            disclosure.clone(),
        ),
        out_dir.join("linkage.json"),
    )?;

    let assessment = crate::baseline::assess(
        &example.original,
        &example.anonymized,
        &BaselineSpec::exhaustive(),
        0,
        crate::baseline::DEFAULT_PLAUSIBILITY_THRESHOLD,
    )?;
    emit_histogram(
        &assessment.original,
        &assessment.baseline,
        Some(10),
        out_dir.join("histogram.csv"),
    )?;
    write_report(
        &Report::new(ReportBody::Assessment(assessment), seeds, disclosure),
        out_dir.join("assessment.json"),
    )?;
    Ok(outcome)
}
