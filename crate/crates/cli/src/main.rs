use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permuted_privacy::baseline::{assess, subject_safety_check, BaselineMode};
use permuted_privacy::demo::write_demo;
use permuted_privacy::fixture::RunningExample;
use permuted_privacy::io::{
    emit_histogram, load_csv, write_csv, write_report, Report, ReportBody, RunConfig, SubjectReport,
};
use permuted_privacy::linkage::{link_records, score_linkage, TruthMapping};
use permuted_privacy::masking::{gaussian_mask, synth_original, NoiseSpec, NormalParams, SynthSpec};
use permuted_privacy::privacy::{certify_dataset, verify_record, RankedTarget};
use permuted_privacy::reverse::reverse_map_with_provenance;
use permuted_privacy::{Error, MicrodataTable, Role};

const EXIT_IO: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_VERIFICATION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "permpriv",
    version,
    about = "Permutation-based disclosure analysis of anonymized microdata"
)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created on demand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Original table (CSV with header).
    original: Option<PathBuf>,
    /// Anonymized or permuted table (CSV with header).
    anonymized: Option<PathBuf>,
    #[arg(long)]
    tie_seed: Option<u64>,
}

#[derive(Args)]
struct Targets {
    /// Required permutation distance.
    #[arg(long)]
    d: Option<usize>,
    /// Variance thresholds, one per attribute.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    v: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long = "baseline-mode", value_enum)]
    mode: Option<ModeArg>,
    #[arg(long = "baseline-size")]
    size: Option<usize>,
    /// Seed for sampled baselines.
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum plausibility for a match to count as chance.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Reverse-map an anonymized table onto the original values.
    ReverseMap {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Certify (d, v)-permuted privacy for every original record.
    Certify {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        targets: Targets,
        /// Anonymization method and parameters to disclose.
        #[arg(long)]
        disclosure: Option<String>,
    },
    /// Check one's own record(s) against a released table.
    Subject {
        /// CSV with the subject's record(s), same header as the release.
        record: PathBuf,
        /// Released table.
        released: Option<PathBuf>,
        #[arg(long)]
        tie_seed: Option<u64>,
        #[command(flatten)]
        targets: Targets,
        /// Also assess plausibility against a baseline (pure-permutation releases).
        #[arg(long)]
        baseline: bool,
        #[command(flatten)]
        baseline_args: BaselineArgs,
    },
    /// Link original records to a permuted table as a maximum-knowledge intruder.
    Link {
        #[command(flatten)]
        inputs: Inputs,
        /// `identity`, or a CSV with one column of 1-based permuted record numbers.
        #[arg(long)]
        truth: Option<String>,
    },
    /// Compare original-record and random-record distance distributions.
    Assess {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        baseline_args: BaselineArgs,
        #[arg(long)]
        disclosure: Option<String>,
    },
    /// Add seeded Gaussian noise to a table.
    Mask {
        original: Option<PathBuf>,
        /// Noise standard deviation per attribute.
        #[arg(long, value_delimiter = ',')]
        std: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a synthetic original table of independent normal attributes.
    Synth {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        means: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        stds: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Regenerate the running-example tables and diff them against golden copies.
    Demo {
        /// Replace the embedded original fixture.
        #[arg(long)]
        original: Option<PathBuf>,
        /// Replace the embedded anonymized fixture.
        #[arg(long)]
        anonymized: Option<PathBuf>,
    },
}

enum Failure {
    Io(String),
    Validation(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

struct Context {
    cfg: RunConfig,
    out: PathBuf,
}

impl Context {
    fn new(cli: &Cli) -> CliResult<Self> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("permpriv-out"));
        Ok(Self { cfg, out })
    }

    fn out_dir(&self) -> CliResult<&Path> {
        fs::create_dir_all(&self.out).map_err(|e| Failure::Io(format!("{}: {e}", self.out.display())))?;
        Ok(&self.out)
    }

    fn out_file(&self, name: &str) -> CliResult<PathBuf> {
        Ok(self.out_dir()?.join(name))
    }

    fn path(&self, flag: Option<&PathBuf>, configured: Option<&PathBuf>, what: &str) -> CliResult<PathBuf> {
        flag.or(configured)
            .cloned()
            .ok_or_else(|| Failure::Validation(format!("no {what} table given (argument or config)")))
    }

    fn pair(&mut self, inputs: &Inputs) -> CliResult<(MicrodataTable, MicrodataTable, PathBuf, PathBuf)> {
        let xp = self.path(inputs.original.as_ref(), self.cfg.original.as_ref(), "original")?;
        let yp = self.path(inputs.anonymized.as_ref(), self.cfg.anonymized.as_ref(), "anonymized")?;
        if let Some(s) = inputs.tie_seed {
            self.cfg.seeds.tie_break = s;
        }
        let x = load_csv(&xp, Role::Original)?;
        let y = load_csv(&yp, Role::Anonymized)?;
        Ok((x, y, xp, yp))
    }

    fn apply_targets(&mut self, t: &Targets) {
        if t.d.is_some() {
            self.cfg.privacy.d = t.d;
        }
        if t.v.is_some() {
            self.cfg.privacy.v = t.v.clone();
        }
    }

    fn apply_baseline(&mut self, b: &BaselineArgs) {
        if let Some(m) = b.mode {
            self.cfg.baseline.mode = Some(match m {
                ModeArg::Exhaustive => BaselineMode::Exhaustive,
                ModeArg::Sampled => BaselineMode::Sampled,
            });
        }
        if let Some(s) = b.size {
            self.cfg.baseline.sample_size = s;
        }
        if let Some(s) = b.seed {
            self.cfg.seeds.baseline = s;
        }
        if let Some(t) = b.threshold {
            self.cfg.plausibility_threshold = t;
        }
    }

    fn targets(&self, m: usize) -> CliResult<Option<(usize, Vec<f64>)>> {
        let p = &self.cfg.privacy;
        match (p.d, &p.v) {
            (None, None) => Ok(None),
            (d, v) => {
                let v = v.clone().unwrap_or_else(|| vec![f64::MIN; m]);
                if v.len() != m {
                    return Err(Failure::Validation(format!("--v needs {m} values, got {}", v.len())));
                }
                Ok(Some((d.unwrap_or(0), v)))
            }
        }
    }

    fn report(&self, body: ReportBody, seeds: &[&str], disclosure: Option<String>) -> Report {
        Report::new(
            body,
            self.cfg.disclosed_seeds(seeds),
            disclosure.or_else(|| self.cfg.disclosure.clone()),
        )
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ")
}

fn one_based(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> CliResult<()> {
    let mut ctx = Context::new(&cli)?;
    ctx.cfg.validate()?;
    ctx.cfg.check_inputs()?;
    match &cli.command {
        Command::ReverseMap { inputs } => {
            let (x, y, xp, yp) = ctx.pair(inputs)?;
            let seed = ctx.cfg.seeds.tie_break;
            let rm = reverse_map_with_provenance(&x, &xp.display().to_string(), &y, &yp.display().to_string(), seed)?;
            let path = ctx.out_file("reverse_mapped.csv")?;
            write_csv(&rm.table, &path)?;
            let prov = json(&rm.provenance)?;
            write_text(&ctx.out_file("reverse_mapped.provenance.json")?, &prov)?;
            println!(
                "wrote {} ({} records, tie seed {seed})",
                path.display(),
                rm.table.n_records()
            );
        }
        Command::Certify {
            inputs,
            targets,
            disclosure,
        } => {
            ctx.apply_targets(targets);
            let (x, y, _, _) = ctx.pair(inputs)?;
            let seed = ctx.cfg.seeds.tie_break;
            let disclosure = disclosure.clone().or_else(|| ctx.cfg.disclosure.clone());
            let cert = certify_dataset(&x, &y, seed, disclosure.clone())?;
            println!("dataset permutation distance d = {}", cert.dataset_distance);
            println!("dataset variances v = ({})", fmt_vec(&cert.dataset_variances));
            for r in &cert.per_record {
                let i = r.result.record_index.unwrap_or(0);
                println!(
                    "record {:>4}: d_i = {:>3}, matches [{}], var@d ({}), var@d_i ({})",
                    i + 1,
                    r.result.distance,
                    one_based(&r.result.matched_indices()),
                    fmt_vec(&r.variances_at_dataset_distance),
                    fmt_vec(&r.variances_at_record_distance)
                );
            }
            let verdict = match ctx.targets(x.n_attributes())? {
                Some((d, v)) => {
                    let target = RankedTarget::new(&y, seed);
                    let ok = cert.satisfies(&target, d, &v);
                    println!(
                        "({d}, [{}])-permuted privacy: {}",
                        fmt_vec(&v),
                        if ok { "satisfied" } else { "NOT satisfied" }
                    );
                    Some(ok)
                }
                None => None,
            };
            let path = ctx.out_file("certificate.json")?;
            write_report(
                &ctx.report(ReportBody::Certificate(cert), &["tie_break"], disclosure),
                &path,
            )?;
            println!("wrote {}", path.display());
            if verdict == Some(false) {
                return Err(Failure::Verification("privacy targets not met".into()));
            }
        }
        Command::Subject {
            record,
            released,
            tie_seed,
            targets,
            baseline,
            baseline_args,
        } => {
            ctx.apply_targets(targets);
            ctx.apply_baseline(baseline_args);
            ctx.cfg.validate()?;
            if let Some(s) = tie_seed {
                ctx.cfg.seeds.tie_break = *s;
            }
            let yp = ctx.path(released.as_ref(), ctx.cfg.anonymized.as_ref(), "released")?;
            let recs = load_csv(record, Role::Original)?;
            let y = load_csv(&yp, Role::Anonymized)?;
            let seed = ctx.cfg.seeds.tie_break;
            let target = RankedTarget::new(&y, seed);
            let (d, v) = ctx
                .targets(y.n_attributes())?
                .unwrap_or((0, vec![f64::MIN; y.n_attributes()]));
            let mut report = SubjectReport {
                verdicts: Vec::new(),
                safety: Vec::new(),
            };
            let mut all_ok = true;
            for (k, x) in recs.records().enumerate() {
                let verdict = verify_record(&x, &target, d, &v)?;
                let at_own = target.window_variances(&verdict.result.closest, verdict.result.distance);
                println!(
                    "record {}: distance {}, closest ranks ({}), matches [{}], variances at distance ({}), passed: {}",
                    k + 1,
                    verdict.result.distance,
                    verdict
                        .result
                        .closest_ranks()
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(", "),
                    one_based(&verdict.result.matched_indices()),
                    fmt_vec(&at_own),
                    verdict.passed
                );
                all_ok &= verdict.passed;
                report.verdicts.push(verdict);
                if *baseline {
                    let spec = ctx.cfg.baseline_spec(y.n_records(), y.n_attributes());
                    let check = subject_safety_check(&x, &y, &spec, ctx.cfg.plausibility_threshold, seed)?;
                    println!(
                        "record {}: plausibility P(D <= {}) = {:.6}, safe: {}",
                        k + 1,
                        check.distance,
                        check.plausibility,
                        if check.safe { "yes" } else { "no" }
                    );
                    all_ok &= check.safe;
                    report.safety.push(check);
                }
            }
            let path = ctx.out_file("subject.json")?;
            let seeds: &[&str] = if *baseline {
                &["tie_break", "baseline"]
            } else {
                &["tie_break"]
            };
            write_report(&ctx.report(ReportBody::Subject(report), seeds, None), &path)?;
            if !all_ok {
                return Err(Failure::Verification("record check failed".into()));
            }
        }
        Command::Link { inputs, truth } => {
            let (x, z, _, _) = ctx.pair(inputs)?;
            let linkage = link_records(&x, &z, ctx.cfg.seeds.tie_break)?;
            if !linkage.permutation_verified {
                eprintln!("warning: permuted table is not an attribute-wise permutation of the original");
            }
            for l in &linkage.links {
                println!(
                    "{} -> [{}] at distance {}",
                    l.original_index + 1,
                    one_based(&l.matches),
                    l.distance
                );
            }
            println!("unmatched permuted records: [{}]", one_based(&linkage.unmatched));
            println!(
                "multiply matched permuted records: [{}]",
                one_based(&linkage.multiply_matched)
            );
            let score = match truth {
                None => None,
                Some(t) => {
                    let mapping = load_truth(t, x.n_records())?;
                    let s = score_linkage(&linkage, &mapping)?;
                    println!(
                        "protector view: {} correct, {} multiple, {} misidentified (correct proportion {:.4})",
                        s.correct, s.multiple, s.misidentified, s.correct_proportion
                    );
                    Some(s)
                }
            };
            let path = ctx.out_file("linkage.json")?;
            write_report(
                &ctx.report(ReportBody::Linkage { linkage, score }, &["tie_break"], None),
                &path,
            )?;
        }
        Command::Assess {
            inputs,
            baseline_args,
            disclosure,
        } => {
            ctx.apply_baseline(baseline_args);
            ctx.cfg.validate()?;
            let (x, y, _, _) = ctx.pair(inputs)?;
            let spec = ctx.cfg.baseline_spec(x.n_records(), x.n_attributes());
            let a = assess(&x, &y, &spec, ctx.cfg.seeds.tie_break, ctx.cfg.plausibility_threshold)?;
            println!("distance,frequency_original,frequency_baseline");
            let last = a.original.max_distance().max(a.baseline.max_distance());
            for d in 0..=last {
                println!("{d},{:.4},{:.4}", a.original.frequency(d), a.baseline.frequency(d));
            }
            println!(
                "total variation {:.4}, Hellinger {:.4}",
                a.divergence.total_variation, a.divergence.hellinger
            );
            println!(
                "withstands known-plaintext attack: {} (P(D <= {}) = {:.4} under the baseline, threshold {})",
                if a.withstands_known_plaintext { "yes" } else { "no" },
                a.median_distance,
                a.plausibility_at_median,
                a.threshold
            );
            emit_histogram(&a.original, &a.baseline, None, ctx.out_file("histogram.csv")?)?;
            let path = ctx.out_file("assessment.json")?;
            write_report(
                &ctx.report(
                    ReportBody::Assessment(a),
                    &["tie_break", "baseline"],
                    disclosure.clone(),
                ),
                &path,
            )?;
        }
        Command::Mask { original, std, seed } => {
            let xp = ctx.path(original.as_ref(), ctx.cfg.original.as_ref(), "original")?;
            let x = load_csv(&xp, Role::Original)?;
            let std = std
                .clone()
                .or_else(|| ctx.cfg.noise.as_ref().map(|n| n.stds.clone()))
                .ok_or_else(|| Failure::Validation("noise deviations needed (--std or [noise] in config)".into()))?;
            let spec = NoiseSpec {
                std,
                seed: seed.unwrap_or(ctx.cfg.seeds.mask),
            };
            let y = gaussian_mask(&x, &spec)?;
            let path = ctx.out_file("masked.csv")?;
            write_csv(&y, &path)?;
            write_text(
                &ctx.out_file("masked.disclosure.txt")?,
                &format!("{}\n", spec.describe()),
            )?;
            println!("wrote {}; method: {}", path.display(), spec.describe());
        }
        Command::Synth { n, means, stds, seed } => {
            let base = ctx.cfg.synth.clone();
            let n = n.or(base.as_ref().map(|b| b.n)).unwrap_or(1000);
            let means = means
                .clone()
                .or(base.as_ref().map(|b| b.means.clone()))
                .unwrap_or(vec![100.0, 1000.0, 5000.0]);
            let stds = stds
                .clone()
                .or(base.as_ref().map(|b| b.stds.clone()))
                .unwrap_or(vec![10.0, 50.0, 200.0]);
            if means.len() != stds.len() {
                return Err(Failure::Validation("--means and --stds need the same length".into()));
            }
            let spec = SynthSpec {
                n,
                attributes: means
                    .iter()
                    .zip(&stds)
                    .map(|(&mean, &std)| NormalParams { mean, std })
                    .collect(),
                seed: seed.unwrap_or(ctx.cfg.seeds.synth),
                attribute_names: base.and_then(|b| b.attribute_names),
            };
            let x = synth_original(&spec)?;
            let path = ctx.out_file("original.csv")?;
            write_csv(&x, &path)?;
            println!("wrote {} ({n} records)", path.display());
        }
        Command::Demo { original, anonymized } => {
            let mut ex = RunningExample::load();
            if let Some(p) = original {
                ex.original = load_csv(p, Role::Original)?;
            }
            if let Some(p) = anonymized {
                ex.anonymized = load_csv(p, Role::Anonymized)?;
            }
            let out = ctx.out_dir()?.to_path_buf();
            let outcome = write_demo(&ex, &out)?;
            for t in &outcome.tables {
                if t.passed() {
                    println!("{:<30} ok", t.name);
                } else {
                    println!("{:<30} MISMATCH ({} lines)", t.name, t.mismatches.len());
                    for m in &t.mismatches {
                        eprintln!("  {}: {m}", t.name);
                    }
                }
            }
            let s = &outcome.linkage_score;
            println!(
                "linkage tallies: {} correct, {} multiple, {} misidentified",
                s.correct, s.multiple, s.misidentified
            );
            println!("outputs in {}", out.display());
            if !outcome.passed() {
                return Err(Failure::Verification(format!(
                    "demo tables differ from golden copies: {}",
                    outcome.failed_tables().join(", ")
                )));
            }
        }
    }
    Ok(())
}

fn load_truth(spec: &str, n: usize) -> CliResult<TruthMapping> {
    if spec == "identity" {
        return Ok(TruthMapping::identity(n));
    }
    let t = load_csv(spec, Role::Original)?;
    let mut mapping = Vec::with_capacity(t.n_records());
    for &v in t.column(0) {
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Failure::Validation(format!("truth entry {v} is not a record number")));
        }
        mapping.push(v as usize - 1);
    }
    Ok(TruthMapping::new(mapping)?)
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Validation(e.to_string()))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
                Failure::Io(m) | Failure::Validation(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
