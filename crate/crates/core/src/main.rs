use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use i3kit::aggregation::{AliasMap, Counting, UnitKind};
use i3kit::inference::{CompareVariable, ExpectMode};
use i3kit::quantiles::{write_scored, CountingRule, ScoreField, TieRule};
use i3kit::records::write_canonical;
use i3kit::reporting::pipeline::{self, Config, PipelineError, Settings, Source};
use i3kit::reporting::{Gazetteer, GeoFormat, OverlayMode};

#[derive(Parser)]
#[command(name = "i3kit", version, about = "Percentile-based citation impact indicators")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// How ties are counted when placing a paper in its stratum.
    #[arg(long, global = true, value_enum, default_value_t = RuleArg::Strict)]
    rule: RuleArg,
    /// Add 0.9 to strict-less quantiles.
    #[arg(long, global = true)]
    mutz: bool,
    /// Full credit to every unit on a paper, or one point split across them.
    #[arg(long, global = true, value_enum, default_value_t = CountingArg::Integer)]
    counting: CountingArg,
    /// Unit of analysis.
    #[arg(long, global = true, value_enum, default_value_t = UnitArg::Journal)]
    unit: UnitArg,
    /// Family-wise significance level for pairwise comparisons.
    #[arg(long, global = true, default_value_t = 0.05)]
    alpha: f64,
    /// Minimum unit size for the relative rate test and the comparisons.
    #[arg(long, global = true, default_value_t = 5)]
    min_n: usize,
    /// Test I3 points against paper counts, or I3 share against paper share.
    #[arg(long, global = true, value_enum, default_value_t = ExpectArg::I3points)]
    expect: ExpectArg,
    /// Statistic shown on the map.
    #[arg(long, global = true, value_enum, default_value_t = OverlayArg::Ztest)]
    overlay: OverlayArg,
    /// Score used for percentiles: raw times cited or the (possibly
    /// fractionally weighted) citation score.
    #[arg(long, global = true, value_enum, default_value_t = FieldArg::Score)]
    field: FieldArg,
    /// Variable compared between units.
    #[arg(long, global = true, value_enum, default_value_t = CompareArg::Quantile)]
    compare: CompareArg,
    /// CSV with from_key,to_key merging unit names.
    #[arg(long, global = true)]
    aliases: Option<PathBuf>,
    /// Rows kept in the rank table (0 keeps all).
    #[arg(long, global = true, default_value_t = 0)]
    top_k: usize,
    /// Keep every document type instead of citable items only.
    #[arg(long, global = true)]
    all_types: bool,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a tab-delimited export into canonical records.
    Ingest {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Replace citation scores with fractionally weighted counts.
    Fractional {
        records: PathBuf,
        /// CSV with cited_id,citing_nrefs.
        #[arg(long)]
        links: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compute stratum quantiles and percentile classes.
    Score {
        records: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Aggregate into units and write the ranked and test tables.
    Rank {
        records: PathBuf,
        scored: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Pairwise comparisons and the homogeneity network.
    Compare {
        records: PathBuf,
        scored: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// City overlay for map tools.
    Map {
        records: PathBuf,
        scored: PathBuf,
        #[arg(long)]
        gazetteer: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Geojson)]
        format: FormatArg,
    },
    /// All stages in one go.
    Run {
        /// Tab-delimited export (omit with --from-scored).
        input: Option<PathBuf>,
        /// Directory holding records.csv and scored.csv from an earlier run.
        #[arg(long, conflicts_with = "input")]
        from_scored: Option<PathBuf>,
        /// CSV with cited_id,citing_nrefs for fractional citation weights.
        #[arg(long)]
        links: Option<PathBuf>,
        /// CSV with city,country,lat,lon; without it no map is written.
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Geojson)]
        format: FormatArg,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Strict,
    Leq,
    Tieavg,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountingArg {
    Integer,
    Fractional,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Journal,
    Country,
    City,
    Institute,
    Author,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpectArg {
    I3points,
    Shares,
}

#[derive(Clone, Copy, ValueEnum)]
enum OverlayArg {
    Ztest,
    Ri3r,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Tc,
    Score,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareArg {
    Quantile,
    Tc,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Geojson,
    Kml,
}

impl From<FormatArg> for GeoFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Geojson => GeoFormat::GeoJson,
            FormatArg::Kml => GeoFormat::Kml,
        }
    }
}

fn settings(g: &Global) -> Result<Settings, PipelineError> {
    let variant = match g.rule {
        RuleArg::Strict => TieRule::StrictLess,
        RuleArg::Leq => TieRule::LessOrEqual,
        RuleArg::Tieavg => TieRule::TieAveraged,
    };
    let rule = CountingRule::new(variant, g.mutz)
        .map_err(|_| PipelineError::config("--mutz only applies to --rule strict"))?;
    let aliases = match &g.aliases {
        Some(p) => Some(AliasMap::load(p).map_err(|e| PipelineError::config(e.to_string()))?),
        None => None,
    };
    let s = Settings {
        rule,
        field: match g.field {
            FieldArg::Tc => ScoreField::TimesCited,
            FieldArg::Score => ScoreField::CitationScore,
        },
        counting: match g.counting {
            CountingArg::Integer => Counting::Integer,
            CountingArg::Fractional => Counting::Fractional,
        },
        unit: match g.unit {
            UnitArg::Journal => UnitKind::Journal,
            UnitArg::Country => UnitKind::Country,
            UnitArg::City => UnitKind::City,
            UnitArg::Institute => UnitKind::Institute,
            UnitArg::Author => UnitKind::Author,
        },
        aliases,
        alpha: g.alpha,
        min_n: g.min_n,
        expect: match g.expect {
            ExpectArg::I3points => ExpectMode::I3Points,
            ExpectArg::Shares => ExpectMode::Shares,
        },
        compare: match g.compare {
            CompareArg::Quantile => CompareVariable::Quantile,
            CompareArg::Tc => CompareVariable::TimesCited,
        },
        overlay: match g.overlay {
            OverlayArg::Ztest => OverlayMode::ZTest,
            OverlayArg::Ri3r => OverlayMode::Ri3r,
        },
        geo_format: GeoFormat::GeoJson,
        top_k: g.top_k,
        citable_only: !g.all_types,
    };
    s.validate()?;
    Ok(s)
}

fn emit_error(e: impl std::fmt::Display) -> PipelineError {
    PipelineError {
        stage: pipeline::Stage::Emit,
        source: e.to_string().into(),
    }
}

fn out_dir(dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::config(format!("{}: {e}", dir.display())))
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    let mut s = settings(&cli.global)?;
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| PipelineError::config(e.to_string()))?;
    }
    match cli.command {
        Command::Ingest { input, out } => {
            pipeline::require_file(&input)?;
            let set = pipeline::ingest(&input, s.citable_only)?;
            write_canonical(&set, &out).map_err(emit_error)?;
        }
        Command::Fractional { records, links, out } => {
            pipeline::require_file(&records)?;
            pipeline::require_file(&links)?;
            let set = pipeline::fractional(pipeline::load_records(&records)?, &links)?;
            write_canonical(&set, &out).map_err(emit_error)?;
        }
        Command::Score { records, out } => {
            pipeline::require_file(&records)?;
            let scored = pipeline::score(&pipeline::load_records(&records)?, &s)?;
            write_scored(&scored, &out).map_err(emit_error)?;
        }
        Command::Rank {
            records,
            scored,
            out_dir: dir,
        } => {
            pipeline::require_file(&records)?;
            pipeline::require_file(&scored)?;
            out_dir(&dir)?;
            let set = pipeline::load_records(&records)?;
            let scored = pipeline::load_scored(&scored, &s)?;
            let ranking = pipeline::rank(&set, &scored, s.unit, &s)?;
            pipeline::emit_ranking(&ranking, &s, &dir)?;
        }
        Command::Compare {
            records,
            scored,
            out_dir: dir,
        } => {
            pipeline::require_file(&records)?;
            pipeline::require_file(&scored)?;
            out_dir(&dir)?;
            let set = pipeline::load_records(&records)?;
            let scored = pipeline::load_scored(&scored, &s)?;
            let graph = pipeline::compare(&set, &scored, &s)?;
            println!("max core {}: {}", graph.max_core(), graph.main_core().join("; "));
            pipeline::emit_graph(&graph, &dir)?;
        }
        Command::Map {
            records,
            scored,
            gazetteer,
            out,
            format,
        } => {
            pipeline::require_file(&records)?;
            pipeline::require_file(&scored)?;
            let gazetteer = Gazetteer::load(&gazetteer).map_err(|e| PipelineError::config(e.to_string()))?;
            s.geo_format = format.into();
            let set = pipeline::load_records(&records)?;
            let scored = pipeline::load_scored(&scored, &s)?;
            let skips = pipeline::map(&set, &scored, &gazetteer, &s, &out)?;
            pipeline::write_overlay_skips(&skips, &out.with_extension("skipped.csv"))?;
        }
        Command::Run {
            input,
            from_scored,
            links,
            gazetteer,
            format,
            out_dir,
        } => {
            let source = match (input, from_scored) {
                (Some(p), None) => Source::Export(p),
                (None, Some(dir)) => Source::Scored {
                    records: dir.join("records.csv"),
                    scored: dir.join("scored.csv"),
                },
                _ => return Err(PipelineError::config("give an export file or --from-scored DIR")),
            };
            s.geo_format = format.into();
            let config = Config {
                source,
                links,
                gazetteer,
                out_dir,
                settings: s,
            };
            for path in pipeline::run_pipeline(&config)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
