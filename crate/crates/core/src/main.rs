use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use langsim::evaluation::{
    build_pairs, correlation_study, english_vs_best, source_averages, DiagonalMode,
    ReferenceComparison, ScoreMatrix, StudyReport,
};
use langsim::fixtures::{fixtures_dir, load_matrix_dir, load_score_dir};
use langsim::metrics::{
    lang2vec_matrix, load_category_distances, wals_distance_matrix, Lang2vecPolicy, WalsMode,
};
use langsim::selection::rank_sources;
use langsim::svg::{scatter_svg, ScatterSpec};
use langsim::typology::{FeatureCatalog, FeatureValueTable, LanguageCatalog};
use langsim::{write_atomic, DistanceMatrix, Error};

/// Language similarity toolkit: typological distances, transfer-source
/// ranking, and correlation of similarity with cross-lingual transfer scores.
#[derive(Debug, Parser)]
#[command(name = "langsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the quantified WALS distance matrix from typological tables.
    WalsMatrix(WalsMatrixArgs),
    /// Average six lang2vec category distances into a distance matrix.
    Lang2vecAvg(Lang2vecArgs),
    /// Rank candidate source languages for a transfer target.
    Rank(RankArgs),
    /// Correlate transfer scores with similarity matrices.
    Correlate(CorrelateArgs),
    /// z-test of a reference source against the best source per target.
    Ztest(ZtestArgs),
    /// Correlation study in both diagonal modes plus the z-test, as one JSON document.
    Report(ReportArgs),
    /// Mean score per source language for each score matrix.
    Averages(AveragesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    MeanAbs,
    Rms,
}

impl From<ModeArg> for WalsMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::MeanAbs => WalsMode::MeanAbs,
            ModeArg::Rms => WalsMode::Rms,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Strict,
    AllowPartial,
}

impl From<PolicyArg> for Lang2vecPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Strict => Lang2vecPolicy::Strict,
            PolicyArg::AllowPartial => Lang2vecPolicy::AllowPartial,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DiagonalArg {
    Include,
    Exclude,
}

impl From<DiagonalArg> for DiagonalMode {
    fn from(d: DiagonalArg) -> Self {
        match d {
            DiagonalArg::Include => DiagonalMode::Include,
            DiagonalArg::Exclude => DiagonalMode::Exclude,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RankFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, clap::Args)]
struct WalsMatrixArgs {
    /// Language catalog (code,name,family,genus[,iso_codes]).
    #[arg(long)]
    languages: PathBuf,
    /// Feature catalog (feature_id,name,num_categories).
    #[arg(long)]
    features: PathBuf,
    /// Long-format values (language_code,feature_id,value_code).
    #[arg(long)]
    values: PathBuf,
    /// Comma-separated language codes to include [default: every cataloged language].
    #[arg(long, value_delimiter = ',')]
    langs: Vec<String>,
    /// Per-feature aggregation.
    #[arg(long, value_enum, default_value = "mean-abs")]
    mode: ModeArg,
    /// Snapshot identifier recorded in the output header.
    #[arg(long, default_value = "unpinned")]
    snapshot: String,
    /// Output matrix CSV; shared-feature counts go to <stem>.shared.csv beside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct Lang2vecArgs {
    /// Category distances (source,target,genetic,geographic,syntactic,inventory,phonological,featural).
    #[arg(long)]
    categories: PathBuf,
    #[arg(long, value_enum, default_value = "strict")]
    lang2vec_policy: PolicyArg,
    /// Output matrix CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct RankArgs {
    /// Distance or similarity matrix CSV.
    #[arg(long)]
    matrix: PathBuf,
    /// Target language code.
    #[arg(long)]
    target: String,
    /// Comma-separated candidate sources [default: every other language in the matrix].
    #[arg(long, value_delimiter = ',')]
    candidates: Vec<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: RankFormat,
    /// Output file [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct CorrelateArgs {
    /// Directory of score matrix CSVs [default: <fixtures>/scores].
    #[arg(long)]
    scores_dir: Option<PathBuf>,
    /// Directory of similarity matrix CSVs [default: <fixtures>/sims].
    #[arg(long)]
    sims_dir: Option<PathBuf>,
    /// Whether source == target cells enter the correlation.
    #[arg(long, value_enum, default_value = "include")]
    diagonal: DiagonalArg,
    /// csv or json report; svg writes the CSV report plus one scatter plot per
    /// study cell into <stem>-plots/ beside it.
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormat,
    /// Output report file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct ZtestArgs {
    /// Directory of score matrix CSVs [default: <fixtures>/scores].
    #[arg(long)]
    scores_dir: Option<PathBuf>,
    /// Reference source language.
    #[arg(long, default_value = "eng")]
    reference: String,
    /// Output JSON result; the per-cell differences go to <stem>.diffs.csv beside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct ReportArgs {
    /// Directory of score matrix CSVs [default: <fixtures>/scores].
    #[arg(long)]
    scores_dir: Option<PathBuf>,
    /// Directory of similarity matrix CSVs [default: <fixtures>/sims].
    #[arg(long)]
    sims_dir: Option<PathBuf>,
    /// Reference source language for the z-test.
    #[arg(long, default_value = "eng")]
    reference: String,
    /// Output JSON document.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct AveragesArgs {
    /// Directory of score matrix CSVs [default: <fixtures>/scores].
    #[arg(long)]
    scores_dir: Option<PathBuf>,
    /// Output CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::WalsMatrix(a) => cmd_wals_matrix(a),
        Command::Lang2vecAvg(a) => cmd_lang2vec(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::Ztest(a) => cmd_ztest(a),
        Command::Report(a) => cmd_report(a),
        Command::Averages(a) => cmd_averages(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}{suffix}"))
}

fn scores_dir(arg: Option<PathBuf>) -> PathBuf {
    arg.unwrap_or_else(|| fixtures_dir().join("scores"))
}

fn sims_dir(arg: Option<PathBuf>) -> PathBuf {
    arg.unwrap_or_else(|| fixtures_dir().join("sims"))
}

fn load_scores(dir: &Path) -> anyhow::Result<Vec<ScoreMatrix>> {
    let scores = load_score_dir(dir)?;
    if scores.is_empty() {
        bail!("no score matrices in {}", dir.display());
    }
    Ok(scores)
}

fn load_sims(dir: &Path) -> anyhow::Result<Vec<DistanceMatrix>> {
    let sims = load_matrix_dir(dir)?;
    if sims.is_empty() {
        bail!("no similarity matrices in {}", dir.display());
    }
    Ok(sims)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_wals_matrix(a: WalsMatrixArgs) -> anyhow::Result<()> {
    let languages = LanguageCatalog::load(&a.languages)?;
    let features = FeatureCatalog::load(&a.features)?;
    let values = FeatureValueTable::load(&a.values, &languages, &features)?;
    if values.skipped > 0 {
        eprintln!("note: skipped {} rows with blank values", values.skipped);
    }
    let codes: Vec<&str> = if a.langs.is_empty() {
        languages.codes().collect()
    } else {
        a.langs.iter().map(String::as_str).collect()
    };
    let mut m = wals_distance_matrix(&values.table, &features, &codes, a.mode.into())?;
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
    m.distances
        .set_meta("snapshot", &a.snapshot)
        .context("snapshot identifier must be a single token")?;
    m.distances.write(&a.out)?;
    m.shared_counts().write(&sibling(&a.out, ".shared.csv"))?;
    Ok(())
}

fn cmd_lang2vec(a: Lang2vecArgs) -> anyhow::Result<()> {
    let rows = load_category_distances(&a.categories)?;
    lang2vec_matrix(&rows, a.lang2vec_policy.into())?.write(&a.out)?;
    Ok(())
}

fn cmd_rank(a: RankArgs) -> anyhow::Result<()> {
    let m = DistanceMatrix::load(&a.matrix, None, false)?;
    if !m.contains(&a.target) {
        bail!(
            "unknown target `{}`; valid codes: {}",
            a.target,
            m.languages().join(", ")
        );
    }
    let candidates: Vec<&str> = if a.candidates.is_empty() {
        m.languages().iter().map(String::as_str).collect()
    } else {
        a.candidates.iter().map(String::as_str).collect()
    };
    let ranked = rank_sources(&m, &a.target, &candidates)?;
    let text = match a.format {
        RankFormat::Csv => ranked.to_csv_string(),
        RankFormat::Json => ranked.to_json_string(),
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_correlate(a: CorrelateArgs) -> anyhow::Result<()> {
    let scores = load_scores(&scores_dir(a.scores_dir))?;
    let sims = load_sims(&sims_dir(a.sims_dir))?;
    let mode: DiagonalMode = a.diagonal.into();
    let report = correlation_study(&scores, &sims, mode)?;
    match a.format {
        ReportFormat::Csv => write_atomic(&a.out, report.to_csv_string().as_bytes())?,
        ReportFormat::Json => write_atomic(&a.out, report.to_json_string().as_bytes())?,
        ReportFormat::Svg => {
            let plots = sibling(&a.out, "-plots");
            std::fs::create_dir_all(&plots).map_err(|e| Error::Io {
                path: plots.clone(),
                source: e,
            })?;
            for s in &scores {
                for m in &sims {
                    let sample = build_pairs(s, m, mode.includes_diagonal())?;
                    let title = format!("{} / {} vs {} ({mode})", s.task, s.model, m.provenance());
                    let x_label = format!("{} ({})", m.provenance(), m.kind());
                    let y_label = s.metric.to_string();
                    let svg = scatter_svg(
                        &sample,
                        &ScatterSpec {
                            title: &title,
                            x_label: &x_label,
                            y_label: &y_label,
                        },
                    );
                    let name = format!("{}_{}_{}_{}.svg", s.task, s.model, m.provenance(), mode);
                    write_atomic(&plots.join(name), svg.as_bytes())?;
                }
            }
            write_atomic(&a.out, report.to_csv_string().as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_ztest(a: ZtestArgs) -> anyhow::Result<()> {
    let scores = load_scores(&scores_dir(a.scores_dir))?;
    let cmp = reference_comparison(&scores, &a.reference)?;
    write_atomic(
        &sibling(&a.out, ".diffs.csv"),
        cmp.differences_csv().as_bytes(),
    )?;
    write_atomic(&a.out, cmp.result_json().as_bytes())?;
    Ok(())
}

fn reference_comparison(
    scores: &[ScoreMatrix],
    reference: &str,
) -> anyhow::Result<ReferenceComparison> {
    english_vs_best(scores, reference)
        .with_context(|| format!("z-test with reference `{reference}`"))
}

#[derive(Serialize)]
struct StudyDocument<'a> {
    full: &'a StudyReport,
    zero_shot: &'a StudyReport,
    ztest: &'a ReferenceComparison,
}

fn cmd_report(a: ReportArgs) -> anyhow::Result<()> {
    let scores = load_scores(&scores_dir(a.scores_dir))?;
    let sims = load_sims(&sims_dir(a.sims_dir))?;
    let full = correlation_study(&scores, &sims, DiagonalMode::Include)?;
    let zero_shot = correlation_study(&scores, &sims, DiagonalMode::Exclude)?;
    let ztest = reference_comparison(&scores, &a.reference)?;
    let doc = StudyDocument {
        full: &full,
        zero_shot: &zero_shot,
        ztest: &ztest,
    };
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    write_atomic(&a.out, text.as_bytes())?;
    Ok(())
}

fn cmd_averages(a: AveragesArgs) -> anyhow::Result<()> {
    let scores = load_scores(&scores_dir(a.scores_dir))?;
    let mut text = String::from("source");
    for s in &scores {
        text.push_str(&format!(",{}/{}", s.task, s.model));
    }
    text.push('\n');
    for (source, means) in source_averages(&scores)? {
        text.push_str(&source);
        for m in means {
            text.push_str(&format!(",{m:.3}"));
        }
        text.push('\n');
    }
    emit(a.out.as_deref(), &text)
}
