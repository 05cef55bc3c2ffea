//! Stage functions behind the command line and the all-in-one `run_pipeline`.

use std::collections::BTreeMap;
use std::error::Error as StdError;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use thiserror::Error;

use super::{
    emit_geo_overlay, emit_pajek, emit_rank_table, write_edge_list, write_file, write_indicator_report, write_ri3r,
    write_strata, write_ztest, CityResult, Gazetteer, GeoFormat, GeocodeLookup, OverlayMode, OverlaySkip,
};
use crate::aggregation::{assign_units, unit_subsets, write_skip_report, AliasMap, Assignments, Counting, UnitKind};
use crate::indicators::{indicator_report, units_from_subsets, IndicatorReport, DEFAULT_MIN_N};
use crate::inference::{
    flag_results, homogeneity_graph, CompareVariable, ComparisonGraph, ExpectMode, FlaggedResult, InferenceError,
    SignificanceFlag,
};
use crate::quantiles::{read_scored, score_set, write_scored, CountingRule, ScoreField, ScoredSet};
use crate::records::{
    apply_fractional_weights, filter_citable, parse_export, read_canonical, read_links, write_canonical, DocType,
    ExportFormat, RecordSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Score,
    Aggregate,
    Indicate,
    Infer,
    Emit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Score => "score",
            Stage::Aggregate => "aggregate",
            Stage::Indicate => "indicate",
            Stage::Infer => "infer",
            Stage::Emit => "emit",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Box<dyn StdError + Send + Sync>,
}

impl PipelineError {
    pub fn config(message: impl Into<String>) -> Self {
        PipelineError {
            stage: Stage::Config,
            source: message.into().into(),
        }
    }

    /// 2 for configuration problems, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self.stage {
            Stage::Config => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T, E: StdError + Send + Sync + 'static> AtStage<T> for std::result::Result<T, E> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|e| PipelineError {
            stage,
            source: Box::new(e),
        })
    }
}

/// Analysis settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Settings {
    pub rule: CountingRule,
    pub field: ScoreField,
    pub counting: Counting,
    pub unit: UnitKind,
    pub aliases: Option<AliasMap>,
    pub alpha: f64,
    pub min_n: usize,
    pub expect: ExpectMode,
    pub compare: CompareVariable,
    pub overlay: OverlayMode,
    pub geo_format: GeoFormat,
    pub top_k: usize,
    /// Keep only articles, reviews, proceedings papers and letters.
    pub citable_only: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rule: CountingRule::default(),
            field: ScoreField::CitationScore,
            counting: Counting::Integer,
            unit: UnitKind::Journal,
            aliases: None,
            alpha: 0.05,
            min_n: DEFAULT_MIN_N,
            expect: ExpectMode::I3Points,
            compare: CompareVariable::Quantile,
            overlay: OverlayMode::ZTest,
            geo_format: GeoFormat::GeoJson,
            top_k: 0,
            citable_only: true,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(PipelineError::config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.min_n == 0 {
            return Err(PipelineError::config("min-n must be at least 1"));
        }
        Ok(())
    }
}

/// Where `run_pipeline` starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// Tab-delimited database export.
    Export(PathBuf),
    /// Canonical records CSV plus a previously written scored CSV; skips
    /// parsing and scoring.
    Scored { records: PathBuf, scored: PathBuf },
}

#[derive(Debug, Clone)]
pub struct Config {
    pub source: Source,
    /// Citing-paper reference counts for fractional citation weights.
    pub links: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub settings: Settings,
}

pub fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(PipelineError::config(format!(
            "input file not found: {}",
            path.display()
        )))
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        match &self.source {
            Source::Export(p) => require_file(p)?,
            Source::Scored { records, scored } => {
                require_file(records)?;
                require_file(scored)?;
            }
        }
        if let Some(p) = &self.links {
            require_file(p)?;
        }
        if let Some(p) = &self.gazetteer {
            require_file(p)?;
        }
        Ok(())
    }
}

pub fn ingest(export: &Path, citable_only: bool) -> Result<RecordSet> {
    let set = parse_export(export, ExportFormat::TabDelimitedWithHeader).at(Stage::Ingest)?;
    let set = if citable_only {
        filter_citable(set, &DocType::citable())
    } else {
        set
    };
    info!("ingested {} records from {}", set.len(), export.display());
    Ok(set)
}

pub fn load_records(path: &Path) -> Result<RecordSet> {
    read_canonical(path).at(Stage::Ingest)
}

pub fn fractional(set: RecordSet, links: &Path) -> Result<RecordSet> {
    let links = read_links(links).at(Stage::Ingest)?;
    apply_fractional_weights(set, &links).at(Stage::Ingest)
}

pub fn score(set: &RecordSet, settings: &Settings) -> Result<ScoredSet> {
    let scored = score_set(set, settings.rule, settings.field).at(Stage::Score)?;
    for s in scored.small_strata() {
        warn!("stratum {} has only {} records", s.key, s.size);
    }
    Ok(scored)
}

pub fn load_scored(path: &Path, settings: &Settings) -> Result<ScoredSet> {
    read_scored(path, settings.rule).at(Stage::Score)
}

fn assign(set: &RecordSet, kind: UnitKind, settings: &Settings) -> Assignments {
    let assignments = assign_units(set, kind, settings.counting, settings.aliases.as_ref());
    if !assignments.skipped.is_empty() {
        debug!(
            "{} records carry no {} and were skipped",
            assignments.skipped.len(),
            kind
        );
    }
    assignments
}

#[derive(Debug, Clone)]
pub struct Ranking {
    pub assignments: Assignments,
    pub report: IndicatorReport,
    pub flagged: Vec<FlaggedResult>,
}

/// Aggregates records into units of `kind` and computes flagged indicators.
pub fn rank(set: &RecordSet, scored: &ScoredSet, kind: UnitKind, settings: &Settings) -> Result<Ranking> {
    let assignments = assign(set, kind, settings);
    if !assignments.skipped.is_empty() {
        warn!(
            "{} records carry no {} and were skipped",
            assignments.skipped.len(),
            kind
        );
    }
    let subsets = unit_subsets(&assignments);
    let units = units_from_subsets(&subsets, scored).at(Stage::Indicate)?;
    let report = indicator_report(&units, &scored.records, settings.min_n).at(Stage::Indicate)?;
    let flagged = flag_results(&report, settings.expect).at(Stage::Infer)?;
    Ok(Ranking {
        assignments,
        report,
        flagged,
    })
}

/// Pairwise comparison of the units holding at least `min_n` papers.
pub fn compare(set: &RecordSet, scored: &ScoredSet, settings: &Settings) -> Result<ComparisonGraph> {
    let assignments = assign(set, settings.unit, settings);
    let mut samples: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for a in &assignments.assignments {
        let record = scored.get(&a.record_id).ok_or_else(|| PipelineError {
            stage: Stage::Infer,
            source: format!("record {} has no score", a.record_id).into(),
        })?;
        samples
            .entry(a.unit_key.clone())
            .or_default()
            .push(settings.compare.value(record));
    }
    samples.retain(|_, v| v.len() >= settings.min_n);
    homogeneity_graph(&samples, settings.alpha).at(Stage::Infer)
}

/// City results for the overlay; the test statistic follows `settings.overlay`.
pub fn city_results(set: &RecordSet, scored: &ScoredSet, settings: &Settings) -> Result<(Vec<CityResult>, Ranking)> {
    let ranking = rank(set, scored, UnitKind::City, settings)?;
    let cities = ranking
        .flagged
        .iter()
        .filter_map(|f| {
            let (city, country) = f.result.unit_id.rsplit_once(", ")?;
            let (z, flag) = match settings.overlay {
                OverlayMode::ZTest => (Some(f.i3_test.z), f.i3_flag),
                OverlayMode::Ri3r => (f.result.ri3r_z, f.ri3r_flag.unwrap_or(SignificanceFlag::NotSignificant)),
            };
            Some(CityResult {
                city: city.to_string(),
                country: country.to_string(),
                n_papers: f.result.n_papers,
                z,
                flag,
            })
        })
        .collect();
    Ok((cities, ranking))
}

pub fn map(
    set: &RecordSet,
    scored: &ScoredSet,
    lookup: &dyn GeocodeLookup,
    settings: &Settings,
    path: &Path,
) -> Result<Vec<OverlaySkip>> {
    let (cities, _) = city_results(set, scored, settings)?;
    emit_geo_overlay(
        &cities,
        lookup,
        settings.overlay,
        settings.min_n,
        settings.geo_format,
        path,
    )
    .at(Stage::Emit)
}

pub fn write_overlay_skips(skips: &[OverlaySkip], path: &Path) -> Result<()> {
    write_file(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["city", "country", "reason"])?;
        for s in skips {
            w.write_record([&s.city, &s.country, &s.reason])?;
        }
        w.flush()?;
        Ok(())
    })
    .at(Stage::Emit)
}

/// Writes rank_table.csv, indicators.csv, ztest.csv, ri3r.csv and the skip report.
pub fn emit_ranking(ranking: &Ranking, settings: &Settings, out_dir: &Path) -> Result<()> {
    let n_ref = ranking.report.reference.n_papers;
    emit_rank_table(&ranking.flagged, settings.top_k, &out_dir.join("rank_table.csv")).at(Stage::Emit)?;
    write_file(&out_dir.join("indicators.csv"), |out| {
        write_indicator_report(&ranking.flagged, out)
    })
    .at(Stage::Emit)?;
    write_file(&out_dir.join("ztest.csv"), |out| {
        write_ztest(&ranking.flagged, settings.expect, n_ref, out)
    })
    .at(Stage::Emit)?;
    write_file(&out_dir.join("ri3r.csv"), |out| write_ri3r(&ranking.flagged, out)).at(Stage::Emit)?;
    let skip_path = out_dir.join(format!("skipped_{}.csv", ranking.assignments.kind.name()));
    let file = fs::File::create(&skip_path).at(Stage::Emit)?;
    write_skip_report(&ranking.assignments.skipped, file).at(Stage::Emit)
}

pub fn emit_graph(graph: &ComparisonGraph, out_dir: &Path) -> Result<()> {
    emit_pajek(graph, &out_dir.join("homogeneity.net")).at(Stage::Emit)?;
    write_file(&out_dir.join("homogeneity_edges.csv"), |out| {
        write_edge_list(graph, out)
    })
    .at(Stage::Emit)
}

/// Runs every stage and writes all artifacts into `config.out_dir`.
/// Returns the list of files written.
pub fn run_pipeline(config: &Config) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let settings = &config.settings;
    let gazetteer = config
        .gazetteer
        .as_deref()
        .map(Gazetteer::load)
        .transpose()
        .at(Stage::Config)?;
    let out = config.out_dir.as_path();
    fs::create_dir_all(out).at(Stage::Config)?;

    let (set, scored) = match &config.source {
        Source::Export(path) => {
            let mut set = ingest(path, settings.citable_only)?;
            if let Some(links) = &config.links {
                set = fractional(set, links)?;
            }
            let scored = score(&set, settings)?;
            (set, scored)
        }
        Source::Scored { records, scored } => {
            let set = load_records(records)?;
            let scored = load_scored(scored, settings)?;
            (set, scored)
        }
    };

    let mut written = Vec::new();
    let mut track = |name: &str| {
        let p = out.join(name);
        written.push(p.clone());
        p
    };
    write_canonical(&set, &track("records.csv")).at(Stage::Emit)?;
    write_scored(&scored, &track("scored.csv")).at(Stage::Emit)?;
    write_file(&track("strata.csv"), |w| write_strata(&scored, w)).at(Stage::Emit)?;

    let ranking = rank(&set, &scored, settings.unit, settings)?;
    emit_ranking(&ranking, settings, out)?;
    for name in ["rank_table.csv", "indicators.csv", "ztest.csv", "ri3r.csv"] {
        track(name);
    }
    track(&format!("skipped_{}.csv", settings.unit.name()));

    match compare(&set, &scored, settings) {
        Ok(graph) => {
            emit_graph(&graph, out)?;
            track("homogeneity.net");
            track("homogeneity_edges.csv");
        }
        Err(PipelineError { source, .. })
            if matches!(
                source.downcast_ref::<InferenceError>(),
                Some(InferenceError::TooFewUnits(_))
            ) =>
        {
            warn!("homogeneity graph skipped: {source}");
        }
        Err(e) => return Err(e),
    }

    if let Some(gazetteer) = &gazetteer {
        let name = match settings.geo_format {
            GeoFormat::GeoJson => "overlay.geojson",
            GeoFormat::Kml => "overlay.kml",
        };
        let skips = map(&set, &scored, gazetteer, settings, &track(name))?;
        write_overlay_skips(&skips, &track("overlay_skipped.csv"))?;
    }
    info!("wrote {} files to {}", written.len(), out.display());
    Ok(written)
}
