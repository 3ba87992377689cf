//! End-to-end acceptance checks against the reference running example.
//! Each test prints one `[PASS]` or `[FAIL]` line, written straight to stdout
//! so it shows even when the harness captures output.

mod paper;

use std::io::Write;
use std::path::Path;
use std::process::Command;

use permuted_privacy::baseline::{
    assess, distances_against, generate_baseline, plausibility, BaselineSpec, DistanceDistribution, DistributionSource,
};
use permuted_privacy::decomposition::{decompose, rank_correlation_risk};
use permuted_privacy::fixture::RunningExample;
use permuted_privacy::io::{table_to_csv, write_csv};
use permuted_privacy::linkage::link_records;
use permuted_privacy::masking::{gaussian_mask, synth_original, NoiseSpec, SynthSpec};
use permuted_privacy::privacy::{certify_dataset, RankedTarget};
use permuted_privacy::reverse::reverse_map_table;
use permuted_privacy::{compute_ranks, MicrodataTable, RankProfile, Role};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

const SEED: u64 = 0;

fn verdict(criterion: &str, ok: bool, detail: impl AsRef<str>) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "[{tag}] criterion {criterion}: {}", detail.as_ref()).unwrap();
    out.flush().unwrap();
    assert!(ok, "criterion {criterion}: {}", detail.as_ref());
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol + 1e-9
}

/// Brute-force distance: linear scans for ranks and closest values, every record tried.
fn oracle_distance(x: &[f64], y: &MicrodataTable) -> (usize, Vec<usize>, Vec<usize>) {
    let n = y.n_records();
    let rank_of = |j: usize, i: usize| {
        let col = y.column(j);
        1 + (0..n)
            .filter(|&k| col[k] < col[i] || (col[k] == col[i] && k < i))
            .count()
    };
    let closest: Vec<usize> = (0..y.n_attributes())
        .map(|j| {
            let mut best = (f64::INFINITY, usize::MAX);
            for i in 0..n {
                let key = ((x[j] - y.column(j)[i]).abs(), rank_of(j, i));
                if key.0 < best.0 || (key.0 == best.0 && key.1 < best.1) {
                    best = key;
                }
            }
            best.1
        })
        .collect();
    let per_record: Vec<usize> = (0..n)
        .map(|i| {
            (0..y.n_attributes())
                .map(|j| rank_of(j, i).abs_diff(closest[j]))
                .max()
                .unwrap()
        })
        .collect();
    let d = *per_record.iter().min().unwrap();
    let matches = (0..n).filter(|&i| per_record[i] == d).collect();
    (d, matches, closest)
}

fn oracle_variance(column: &[f64], center: usize, d: usize) -> f64 {
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let window: Vec<f64> = sorted
        .iter()
        .enumerate()
        .filter(|(k, _)| (k + 1).abs_diff(center) <= d)
        .map(|(_, v)| *v)
        .collect();
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / window.len() as f64
}

#[test]
fn criterion_1_reverse_mapping() {
    let ex = RunningExample::load();
    let z = reverse_map_table(&ex.original, &ex.anonymized, SEED).unwrap();
    let mut bad = Vec::new();
    for (i, row) in paper::Z.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            let got = format!("{:.2}", z.cell(i, j));
            if &got != want {
                bad.push(format!("Z{} record {}: {got} vs {want}", j + 1, i + 1));
            }
        }
    }
    verdict(
        "1",
        bad.is_empty(),
        format!("{}/60 reverse-mapped cells exact {bad:?}", 60 - bad.len()),
    );
}

#[test]
fn criterion_2_rank_correlation() {
    let ex = RunningExample::load();
    let z = reverse_map_table(&ex.original, &ex.anonymized, SEED).unwrap();
    let rho = rank_correlation_risk(&ex.original, &z, SEED).unwrap();
    let ok = rho.iter().zip(paper::SPEARMAN).all(|(a, b)| close(*a, b, 0.0005));
    verdict(
        "2",
        ok,
        format!("Spearman rho {rho:.4?} vs {:?} (tol 0.0005)", paper::SPEARMAN),
    );
}

#[test]
fn criterion_3_decomposition() {
    let ex = RunningExample::load();
    let dec = decompose(&ex.original, &ex.anonymized, SEED).unwrap();
    let mut bad = Vec::new();
    for (i, (ep, e)) in paper::NOISE.iter().enumerate() {
        for j in 0..3 {
            if !close(dec.residual_noise[j][i], ep[j], 0.01) {
                bad.push(format!("E'{} record {}", j + 1, i + 1));
            }
            if !close(dec.direct_noise[j][i], e[j], 0.01) {
                bad.push(format!("E{} record {}", j + 1, i + 1));
            }
        }
    }
    let rebuilt = dec.reconstruct();
    let exact = (0..3).all(|j| {
        rebuilt[j]
            .iter()
            .zip(ex.anonymized.column(j))
            .all(|(a, b)| format!("{a:.2}") == format!("{b:.2}") && (a - b).abs() <= 1e-9)
    });
    let profile = RankProfile::compute(&ex.anonymized, SEED);
    let ranks_shared = (0..3).all(|j| &compute_ranks(dec.z.column(j), SEED).unwrap() == profile.attribute(j));
    verdict(
        "3",
        bad.is_empty() && exact && ranks_shared,
        format!("noise cells off by > 0.01: {bad:?}; Z+E'=Y: {exact}; rank(Z)=rank(Y): {ranks_shared}"),
    );
}

#[test]
fn criterion_4_record_level_privacy() {
    let ex = RunningExample::load();
    let target = RankedTarget::new(&ex.anonymized, SEED);
    let x3 = ex.original.record(2);
    let r = target.distance(&x3).unwrap();
    let vars = target.window_variances(&r.closest, r.distance);
    let (od, om, oc) = oracle_distance(&x3, &ex.anonymized);
    let ok = r.distance == paper::RECORD3_DISTANCE
        && r.matched_indices() == [paper::RECORD3_MATCH - 1]
        && r.closest_ranks() == paper::RECORD3_CLOSEST_RANKS
        && vars
            .iter()
            .zip(paper::RECORD3_VARIANCES)
            .all(|(a, b)| close(*a, b, 0.01))
        && (od, om, oc) == (r.distance, r.matched_indices(), r.closest_ranks());
    verdict(
        "4",
        ok,
        format!(
            "record 3: distance {}, match {:?}, closest ranks {:?}, variances {vars:.2?}",
            r.distance,
            r.matched_indices().iter().map(|i| i + 1).collect::<Vec<_>>(),
            r.closest_ranks()
        ),
    );
}

#[test]
fn criterion_5a_dataset_distance_and_variances() {
    let ex = RunningExample::load();
    let cert = certify_dataset(&ex.original, &ex.anonymized, SEED, None).unwrap();
    let oracle: Vec<usize> = ex
        .original
        .records()
        .map(|x| oracle_distance(&x, &ex.anonymized).0)
        .collect();
    let ok = cert.dataset_distance == paper::DATASET_D
        && cert.distances() == paper::RECORD_DISTANCES
        && oracle == paper::RECORD_DISTANCES
        && cert
            .dataset_variances
            .iter()
            .zip(paper::DATASET_V)
            .all(|(a, b)| close(*a, b, 0.01));
    verdict(
        "5a",
        ok,
        format!(
            "d = {}, v = {:.2?}, per-record distances {:?}",
            cert.dataset_distance,
            cert.dataset_variances,
            cert.distances()
        ),
    );
}

#[test]
#[allow(clippy::needless_range_loop)]
fn criterion_5b_per_record_variances() {
    let ex = RunningExample::load();
    let cert = certify_dataset(&ex.original, &ex.anonymized, SEED, None).unwrap();
    let y = &ex.anonymized;
    let mut bad = Vec::new();
    let mut oracle_ok = true;
    for (i, rc) in cert.per_record.iter().enumerate() {
        let (_, _, closest) = oracle_distance(&ex.original.record(i), y);
        for j in 0..3 {
            let (at_d, at_di) = paper::RECORD_VARIANCES[i][j];
            let (got_d, got_di) = (rc.variances_at_dataset_distance[j], rc.variances_at_record_distance[j]);
            oracle_ok &= close(
                got_d,
                oracle_variance(y.column(j), closest[j], cert.dataset_distance),
                1e-9,
            ) && close(
                got_di,
                oracle_variance(y.column(j), closest[j], rc.result.distance),
                1e-9,
            );
            if !close(got_d, at_d, 0.01) {
                bad.push(format!(
                    "record {} Var{} at d: {got_d:.2} vs printed {at_d:.2}",
                    i + 1,
                    j + 1
                ));
            }
            if !close(got_di, at_di, 0.01) {
                bad.push(format!(
                    "record {} Var{} at d_i: {got_di:.2} vs printed {at_di:.2}",
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    verdict(
        "5b",
        bad.is_empty() && oracle_ok,
        format!(
            "{}/120 per-record variances within 0.01 of the printed table; independent recomputation agrees: {oracle_ok}; mismatches {bad:?}",
            120 - bad.len()
        ),
    );
}

#[test]
fn criterion_6_intruder_linkage() {
    let ex = RunningExample::load();
    let z = reverse_map_table(&ex.original, &ex.anonymized, SEED).unwrap();
    let linkage = link_records(&ex.original, &z, SEED).unwrap();
    let mut bad = Vec::new();
    for (l, (want, d)) in linkage.links.iter().zip(paper::LINKAGE) {
        let got: Vec<usize> = l.matches.iter().map(|k| k + 1).collect();
        if got != want || l.distance != d {
            bad.push(format!(
                "record {}: {got:?} at {} vs {want:?} at {d}",
                l.original_index + 1,
                l.distance
            ));
        }
    }
    let unmatched: Vec<usize> = linkage.unmatched.iter().map(|k| k + 1).collect();
    let ok = bad.is_empty() && unmatched == paper::UNMATCHED;
    verdict(
        "6",
        ok,
        format!("20 linkages, mismatches {bad:?}; unmatched {unmatched:?}"),
    );
}

#[test]
fn criterion_7_baseline_distributions() {
    let ex = RunningExample::load();
    let z = reverse_map_table(&ex.original, &ex.anonymized, SEED).unwrap();
    let target = RankedTarget::new(&z, SEED);
    let a = generate_baseline(&ex.original, &BaselineSpec::exhaustive()).unwrap();
    let orig = DistanceDistribution::from_distances(
        &distances_against(&ex.original, &target).unwrap(),
        DistributionSource::Original,
    )
    .unwrap();
    let base =
        DistanceDistribution::from_distances(&distances_against(&a, &target).unwrap(), DistributionSource::Baseline)
            .unwrap();
    let mut bad = Vec::new();
    for (d, fx, fa) in paper::DISTRIBUTIONS {
        if !close(orig.frequency(d), fx, 0.00005) || !close(base.frequency(d), fa, 0.00005) {
            bad.push(format!(
                "d={d}: {:.6}/{:.6} vs {fx}/{fa}",
                orig.frequency(d),
                base.frequency(d)
            ));
        }
    }
    verdict(
        "7",
        a.n_records() == 8000 && bad.is_empty(),
        format!("{} baseline records; bins off at 4 decimals: {bad:?}", a.n_records()),
    );
}

#[test]
fn criterion_8_statistical_reproduction() {
    let mut lines = Vec::new();
    let mut ok = true;
    for seed in [1u64, 2, 3] {
        let x = synth_original(&SynthSpec::running_example_like(1000, seed)).unwrap();
        let spec = BaselineSpec::sampled(10_000, seed);
        let small = gaussian_mask(
            &x,
            &NoiseSpec {
                std: vec![0.05, 0.25, 1.0],
                seed,
            },
        )
        .unwrap();
        let a = assess(&x, &small, &spec, SEED, 0.05).unwrap();
        let (co, cb) = (a.original.cumulative(5), a.baseline.cumulative(5));
        let large = gaussian_mask(
            &x,
            &NoiseSpec {
                std: vec![5.0, 25.0, 100.0],
                seed,
            },
        )
        .unwrap();
        let tv = assess(&x, &large, &spec, SEED, 0.05)
            .unwrap()
            .divergence
            .total_variation;
        ok &= co >= 0.85 && cb <= 0.005 && tv <= 0.15;
        lines.push(format!(
            "seed {seed}: P_X(D<=5)={co:.4} P_A(D<=5)={cb:.4} TV_large={tv:.4}"
        ));
    }
    verdict("8", ok, lines.join("; "));
}

fn tables(max_n: usize, max_m: usize, grid: i32) -> impl Strategy<Value = (MicrodataTable, MicrodataTable)> {
    (2..=max_n, 1..=max_m).prop_flat_map(move |(n, m)| {
        let col = prop::collection::vec((0..grid).prop_map(f64::from), n);
        (prop::collection::vec(col.clone(), m), prop::collection::vec(col, m)).prop_map(|(x, y)| {
            (
                MicrodataTable::from_columns("A", x, Role::Original).unwrap(),
                MicrodataTable::from_columns("A", y, Role::Anonymized).unwrap(),
            )
        })
    })
}

fn property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<String, String> {
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    match runner.run(&strategy, test) {
        Ok(()) => Ok(format!("{name} ok")),
        Err(e) => Err(format!("{name} failed: {e}")),
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

#[test]
fn criterion_9_property_suites() {
    let results = [
        property(
            "multiset preservation",
            (tables(30, 3, 8), any::<u64>()),
            |((x, y), seed)| {
                let z = reverse_map_table(&x, &y, seed).unwrap();
                for j in 0..x.n_attributes() {
                    prop_assert_eq!(sorted(z.column(j)), sorted(x.column(j)));
                }
                Ok(())
            },
        ),
        property(
            "residual rank preservation",
            (tables(30, 3, 1000), any::<u64>()),
            |((x, y), seed)| {
                let dec = decompose(&x, &y, seed).unwrap();
                let profile = RankProfile::compute(&y, seed);
                for j in 0..x.n_attributes() {
                    let zr = profile.attribute(j);
                    let zc = dec.z.column(j);
                    // Z holds the sorted original values in Y's tie-broken rank order.
                    let s = sorted(x.column(j));
                    for i in 0..zc.len() {
                        prop_assert_eq!(zc[i], s[zr.get(i) - 1]);
                        prop_assert_eq!(zc[i] + dec.residual_noise[j][i], y.column(j)[i]);
                    }
                }
                Ok(())
            },
        ),
        property(
            "distance bound d <= n-1",
            (tables(30, 4, 8), any::<u64>()),
            |((x, y), seed)| {
                let target = RankedTarget::new(&y, seed);
                for rec in x.records() {
                    prop_assert!(target.distance(&rec).unwrap().distance < y.n_records());
                }
                Ok(())
            },
        ),
        property(
            "plausibility monotone, saturating",
            (tables(10, 3, 8), any::<u64>()),
            |((x, y), seed)| {
                let z = reverse_map_table(&x, &y, seed).unwrap();
                let target = RankedTarget::new(&z, seed);
                let a = generate_baseline(&x, &BaselineSpec::exhaustive()).unwrap();
                let dist = DistanceDistribution::from_distances(
                    &distances_against(&a, &target).unwrap(),
                    DistributionSource::Baseline,
                )
                .unwrap();
                let n = x.n_records();
                for d in 1..n {
                    prop_assert!(plausibility(d, &dist) >= plausibility(d - 1, &dist));
                }
                prop_assert_eq!(plausibility(n - 1, &dist), 1.0);
                Ok(())
            },
        ),
        property(
            "joint monotone invariance",
            (tables(25, 3, 50), any::<u64>(), 1i32..6, -100i32..100),
            |((x, y), seed, a, b)| {
                let f = |v: f64| f64::from(a) * v * v * v + f64::from(b);
                let map = |t: &MicrodataTable, role| {
                    let cols = t.columns().iter().map(|c| c.iter().map(|&v| f(v)).collect()).collect();
                    MicrodataTable::from_columns("A", cols, role).unwrap()
                };
                let (t, ft) = (
                    RankedTarget::new(&y, seed),
                    RankedTarget::new(&map(&y, Role::Anonymized), seed),
                );
                // Probes are cells of the target, where any strictly increasing map keeps the closest value exact.
                for i in 0..x.n_records().min(y.n_records()) {
                    let probe: Vec<f64> = (0..y.n_attributes())
                        .map(|j| y.cell((i * (j + 1)) % y.n_records(), j))
                        .collect();
                    let fp: Vec<f64> = probe.iter().map(|&v| f(v)).collect();
                    let (r, fr) = (t.distance(&probe).unwrap(), ft.distance(&fp).unwrap());
                    prop_assert_eq!(r.distance, fr.distance);
                    prop_assert_eq!(r.matched_indices(), fr.matched_indices());
                }
                Ok(())
            },
        ),
        property(
            "exhaustive baseline seed independence",
            (tables(8, 3, 8), any::<u64>(), any::<u64>()),
            |((x, _), s1, s2)| {
                let (mut a, mut b) = (BaselineSpec::exhaustive(), BaselineSpec::exhaustive());
                a.seed = s1;
                b.seed = s2;
                prop_assert_eq!(generate_baseline(&x, &a).unwrap(), generate_baseline(&x, &b).unwrap());
                Ok(())
            },
        ),
        property(
            "linkage equals privacy distance",
            (tables(25, 3, 8), any::<u64>()),
            |((x, y), seed)| {
                let z = reverse_map_table(&x, &y, seed).unwrap();
                let linkage = link_records(&x, &z, seed).unwrap();
                let target = RankedTarget::new(&z, seed);
                for l in &linkage.links {
                    let r = target.distance(&x.record(l.original_index)).unwrap();
                    prop_assert_eq!(l.distance, r.distance);
                    prop_assert_eq!(&l.matches, &r.matched_indices());
                }
                Ok(())
            },
        ),
    ];
    let ok = results.iter().all(Result::is_ok);
    let lines: Vec<String> = results.into_iter().map(|r| r.unwrap_or_else(|e| e)).collect();
    verdict("9", ok, format!("7 suites x 100 cases: {}", lines.join("; ")));
}

fn run_demo_binary(out: &Path, original: Option<&Path>, anonymized: Option<&Path>) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_permpriv"));
    cmd.arg("demo").arg("--out").arg(out);
    if let Some(p) = original {
        cmd.arg("--original").arg(p);
    }
    if let Some(p) = anonymized {
        cmd.arg("--anonymized").arg(p);
    }
    let output = cmd.output().unwrap();
    let text = String::from_utf8_lossy(&output.stdout).to_string() + &String::from_utf8_lossy(&output.stderr);
    (output.status.code().unwrap_or(-1), text)
}

fn perturb(t: &MicrodataTable, i: usize, j: usize, delta: f64) -> MicrodataTable {
    let mut cols = t.columns().to_vec();
    cols[j][i] += delta;
    MicrodataTable::new(t.attribute_names().to_vec(), cols, t.role()).unwrap()
}

#[test]
fn criterion_10_demo_gate() {
    let dir = tempfile::tempdir().unwrap();
    let (clean, _) = run_demo_binary(&dir.path().join("clean"), None, None);
    let ex = RunningExample::load();
    let mut missed = Vec::new();
    for (which, table) in [("original", &ex.original), ("anonymized", &ex.anonymized)] {
        for i in 0..20 {
            for j in 0..3 {
                let mut faulty = ex.clone();
                let bumped = perturb(table, i, j, 0.01);
                if which == "original" {
                    faulty.original = bumped;
                } else {
                    faulty.anonymized = bumped;
                }
                if permuted_privacy::demo::run_demo(&faulty).unwrap().passed() {
                    missed.push(format!("{which} ({}, {})", i + 1, j + 1));
                }
            }
        }
    }
    let mut spawned = Vec::new();
    for (which, i, j) in [
        ("original", 0, 0),
        ("original", 9, 1),
        ("anonymized", 6, 1),
        ("anonymized", 19, 2),
    ] {
        let table = if which == "original" {
            &ex.original
        } else {
            &ex.anonymized
        };
        let path = dir.path().join(format!("{which}_{i}_{j}.csv"));
        write_csv(&perturb(table, i, j, 0.01), &path).unwrap();
        assert_ne!(table_to_csv(table), std::fs::read_to_string(&path).unwrap());
        let (code, text) = if which == "original" {
            run_demo_binary(&dir.path().join("faulty"), Some(&path), None)
        } else {
            run_demo_binary(&dir.path().join("faulty"), None, Some(&path))
        };
        spawned.push((code, text.contains("MISMATCH") && text.contains("table")));
    }
    let ok = clean == 0 && missed.is_empty() && spawned.iter().all(|&(c, named)| c != 0 && named);
    verdict(
        "10",
        ok,
        format!(
            "clean exit {clean}; 120 single-cell faults, undetected {missed:?}; binary exits on faults {:?}",
            spawned.iter().map(|s| s.0).collect::<Vec<_>>()
        ),
    );
}
