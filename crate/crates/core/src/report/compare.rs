use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::csv_out::{to_csv, to_csv_with_header};
use super::{ReportError, RunConfig, ScoreRecord};
use crate::corpus::{corpus_stats, AnnotationKind, Corpus, CorpusStats, PromptCondition};
use crate::metrics::StoryScore;
use crate::stats::{
    format_mean_sd, gap_change, paired_t, perplexity_report, summarize, GapChangeResult,
    PairedSample, PerplexityCell, PerplexityRecord, PerplexityTable, StatsError, Summary,
    TTestResult,
};

/// Cell text for an undefined value.
const UNDEFINED: &str = "\u{2014}";
/// Cell text for the reference row's test columns.
const NOT_APPLICABLE: &str = "-";

type Extract = fn(&StoryScore) -> Option<f64>;
type SequenceMeans = BTreeMap<String, f64>;

struct ScoreSpec {
    label: &'static str,
    t_label: &'static str,
    norm: Extract,
    raw: Option<Extract>,
}

struct TableSpec {
    name: &'static str,
    components: Vec<(&'static str, Extract)>,
    scores: Vec<ScoreSpec>,
}

fn score(
    label: &'static str,
    t_label: &'static str,
    norm: Extract,
    raw: Option<Extract>,
) -> ScoreSpec {
    ScoreSpec {
        label,
        t_label,
        norm,
        raw,
    }
}

fn table_specs() -> Vec<TableSpec> {
    vec![
        TableSpec {
            name: "coreference",
            components: vec![
                ("C", |s| Some(s.metrics.coref.chain_count as f64)),
                ("S", |s| Some(s.metrics.coref.mean_chain_size)),
            ],
            scores: vec![score(
                "R",
                "t",
                |s| Some(s.metrics.coref.norm),
                Some(|s| Some(s.metrics.coref.raw)),
            )],
        },
        TableSpec {
            name: "discourse",
            components: vec![
                ("U", |s| Some(s.metrics.discourse.unique_types as f64)),
                ("T", |s| Some(s.metrics.discourse.total_relations as f64)),
            ],
            scores: vec![score(
                "D",
                "t",
                |s| Some(s.metrics.discourse.norm),
                Some(|s| Some(s.metrics.discourse.raw)),
            )],
        },
        TableSpec {
            name: "topic",
            components: vec![("N", |s| Some(s.segments as f64))],
            scores: vec![score(
                "T",
                "t",
                |s| Some(s.metrics.topic.norm),
                Some(|s| Some(s.metrics.topic.averaged)),
            )],
        },
        TableSpec {
            name: "character",
            components: vec![
                ("ChC", |s| Some(s.metrics.character.continuity)),
                ("ChS", |s| Some(s.metrics.character.spread)),
            ],
            scores: vec![score(
                "ChP",
                "t",
                |s| Some(s.metrics.character.norm),
                Some(|s| Some(s.metrics.character.raw)),
            )],
        },
        TableSpec {
            name: "grounding",
            components: vec![
                ("GV", |s| s.metrics.grounding.gv),
                ("MCC", |s| Some(s.metrics.grounding.mcc)),
            ],
            scores: vec![score(
                "MCG",
                "t",
                |s| Some(s.metrics.grounding.norm),
                Some(|s| Some(s.metrics.grounding.raw)),
            )],
        },
        TableSpec {
            name: "ncs",
            components: vec![],
            scores: vec![
                score("NCS_arith", "t_arith", |s| Some(s.ncs.arith), None),
                score("NCS_geom", "t_geom", |s| Some(s.ncs.geom), None),
            ],
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedSummary {
    pub label: String,
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreCell {
    pub label: String,
    /// Over stories, normalized values.
    pub norm: Option<Summary>,
    pub raw: Option<Summary>,
    /// Reference vs this system on per-sequence means of the normalized
    /// score; `None` for the reference row or an undefined test.
    pub test: Option<TTestResult>,
    pub test_undefined: Option<String>,
    pub paired_sequences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub system: String,
    pub is_reference: bool,
    pub n_stories: usize,
    pub components: Vec<NamedSummary>,
    pub scores: Vec<ScoreCell>,
    /// Rendered cells, aligned with the table's columns.
    pub cells: Vec<String>,
    pub story_ids: Vec<String>,
    /// Annotation kinds that came from a baseline for any story in the row.
    pub baseline_annotations: Vec<AnnotationKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricTable {
    pub table: String,
    pub condition: PromptCondition,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub system: String,
    pub is_reference: bool,
    /// Per-sequence means over the shared sequences.
    pub short: Option<Summary>,
    pub long: Option<Summary>,
    pub gap: Option<GapChangeResult>,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTable {
    pub table: String,
    pub score: String,
    pub columns: Vec<String>,
    /// Sequences present for every system in both conditions.
    pub sequences: Vec<String>,
    pub rows: Vec<GapRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveRow {
    pub condition: PromptCondition,
    pub system: String,
    pub stats: CorpusStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub reference: String,
    pub epsilon: f64,
    pub excluded_degenerate: Vec<String>,
    pub descriptive: Vec<DescriptiveRow>,
    pub tables: Vec<MetricTable>,
    pub gap_tables: Vec<GapTable>,
    pub perplexity: Option<PerplexityTable>,
    pub warnings: Vec<String>,
}

const CONDITIONS: [PromptCondition; 2] = [PromptCondition::Short, PromptCondition::Long];

fn values(scores: &[&ScoreRecord], get: Extract) -> Vec<f64> {
    scores.iter().filter_map(|s| get(&s.score)).collect()
}

/// Mean value per sequence.
fn sequence_means(scores: &[&ScoreRecord], get: Extract) -> BTreeMap<String, f64> {
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in scores {
        if let Some(v) = get(&s.score) {
            groups.entry(&s.score.sequence_id).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.iter().sum::<f64>() / v.len() as f64))
        .collect()
}

/// Component columns show the mean only.
fn mean_cell(s: &Option<Summary>) -> String {
    match s {
        Some(s) => format!("{:.2}", s.mean),
        None => UNDEFINED.to_string(),
    }
}

fn summary_cell(s: &Option<Summary>) -> String {
    match s {
        Some(s) => format_mean_sd(s.mean, s.sd),
        None => UNDEFINED.to_string(),
    }
}

/// Undefined tests (too few pairs, constant differences) are reported, not
/// fatal.
fn test_or_undefined(
    sample: &PairedSample,
) -> Result<(Option<TTestResult>, Option<String>), StatsError> {
    match paired_t(sample) {
        Ok(t) => Ok((Some(t), None)),
        Err(e @ (StatsError::ZeroVariance | StatsError::TooFewPairs { .. })) => {
            Ok((None, Some(e.to_string())))
        }
        Err(e) => Err(e),
    }
}

fn stats_error(context: String) -> impl FnOnce(StatsError) -> ReportError {
    move |source| ReportError::Stats { context, source }
}

fn build_table(
    spec: &TableSpec,
    condition: PromptCondition,
    by_system: &[(String, Vec<&ScoreRecord>)],
    reference: &str,
) -> Result<MetricTable, ReportError> {
    let mut columns = vec!["System".to_string()];
    columns.extend(spec.components.iter().map(|(l, _)| l.to_string()));
    for s in &spec.scores {
        columns.push(s.label.to_string());
        columns.push(s.t_label.to_string());
    }
    let reference_scores = by_system
        .iter()
        .find(|(name, _)| name == reference)
        .map(|(_, s)| s.as_slice());

    let mut rows = Vec::new();
    for (system, scores) in by_system {
        let is_reference = system == reference;
        let mut cells = vec![system.clone()];
        let components: Vec<NamedSummary> = spec
            .components
            .iter()
            .map(|(label, get)| NamedSummary {
                label: label.to_string(),
                summary: summarize(&values(scores, *get)),
            })
            .collect();
        cells.extend(components.iter().map(|c| mean_cell(&c.summary)));

        let mut cells_out = Vec::new();
        for s in &spec.scores {
            let norm = summarize(&values(scores, s.norm));
            let raw = s.raw.and_then(|get| summarize(&values(scores, get)));
            let (test, test_undefined, paired_sequences, t_cell) =
                match (is_reference, reference_scores) {
                    (true, _) => (None, None, Vec::new(), NOT_APPLICABLE.to_string()),
                    (false, None) => (
                        None,
                        Some(format!("reference system {reference:?} is absent")),
                        Vec::new(),
                        UNDEFINED.to_string(),
                    ),
                    (false, Some(reference_scores)) => {
                        let sample = PairedSample::align(
                            &sequence_means(reference_scores, s.norm),
                            &sequence_means(scores, s.norm),
                        );
                        let (test, undefined) = test_or_undefined(&sample).map_err(stats_error(
                            format!("{} {} {system}", spec.name, condition),
                        ))?;
                        let cell = test
                            .as_ref()
                            .map_or_else(|| UNDEFINED.to_string(), TTestResult::display);
                        (test, undefined, sample.keys, cell)
                    }
                };
            cells.push(summary_cell(&norm));
            cells.push(t_cell);
            cells_out.push(ScoreCell {
                label: s.label.to_string(),
                norm,
                raw,
                test,
                test_undefined,
                paired_sequences,
            });
        }
        let baseline: BTreeSet<AnnotationKind> = scores
            .iter()
            .flat_map(|s| s.baseline.iter().copied())
            .collect();
        rows.push(TableRow {
            system: system.clone(),
            is_reference,
            n_stories: scores.len(),
            components,
            scores: cells_out,
            cells,
            story_ids: scores.iter().map(|s| s.score.story_id.clone()).collect(),
            baseline_annotations: baseline.into_iter().collect(),
        });
    }
    Ok(MetricTable {
        table: spec.name.to_string(),
        condition,
        columns,
        rows,
    })
}

fn restrict(m: &BTreeMap<String, f64>, keys: &BTreeSet<String>) -> BTreeMap<String, f64> {
    m.iter()
        .filter(|(k, _)| keys.contains(*k))
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

fn summarize_map(m: &BTreeMap<String, f64>) -> Option<Summary> {
    summarize(&m.values().copied().collect::<Vec<_>>())
}

fn fmt_delta(d: f64) -> String {
    if d.is_finite() {
        // no "-0.000"
        let s = format!("{d:.3}");
        if s == "-0.000" {
            s[1..].to_string()
        } else {
            s
        }
    } else {
        UNDEFINED.to_string()
    }
}

fn build_gap_table(
    label: &str,
    get: Extract,
    short: &[(String, Vec<&ScoreRecord>)],
    long: &[(String, Vec<&ScoreRecord>)],
    systems: &[String],
    reference: &str,
) -> Result<GapTable, ReportError> {
    let means = |groups: &[(String, Vec<&ScoreRecord>)], system: &str| {
        groups
            .iter()
            .find(|(name, _)| name == system)
            .map(|(_, s)| sequence_means(s, get))
            .unwrap_or_default()
    };
    // (system, short means, long means)
    let series: Vec<(&String, SequenceMeans, SequenceMeans)> = systems
        .iter()
        .map(|s| (s, means(short, s), means(long, s)))
        .collect();
    // Sequences covered by every system in both conditions.
    let mut shared: Option<BTreeSet<String>> = None;
    for (_, s, l) in &series {
        let keys: BTreeSet<String> = s.keys().filter(|k| l.contains_key(*k)).cloned().collect();
        shared = Some(match shared {
            None => keys,
            Some(prev) => prev.intersection(&keys).cloned().collect(),
        });
    }
    let shared = shared.unwrap_or_default();
    let (ref_short, ref_long) = series
        .iter()
        .find(|(s, _, _)| *s == reference)
        .map(|(_, s, l)| (restrict(s, &shared), restrict(l, &shared)))
        .unwrap_or_default();
    let has_reference = systems.iter().any(|s| s == reference);

    let mut rows = Vec::new();
    for (system, s, l) in &series {
        let (s, l) = (restrict(s, &shared), restrict(l, &shared));
        let is_reference = *system == reference;
        let (short, long) = (summarize_map(&s), summarize_map(&l));
        let mut cells = vec![(*system).clone(), summary_cell(&short), summary_cell(&long)];
        let gap = if is_reference {
            cells.extend([NOT_APPLICABLE; 3].map(String::from));
            None
        } else if !has_reference {
            cells.extend([UNDEFINED; 3].map(String::from));
            None
        } else {
            let g = gap_change(&ref_short, &s, &ref_long, &l)
                .map_err(stats_error(format!("gap {label} {system}")))?;
            cells.push(fmt_delta(g.delta_short));
            cells.push(fmt_delta(g.delta_long));
            cells.push(
                g.test
                    .as_ref()
                    .map_or_else(|| UNDEFINED.to_string(), TTestResult::display),
            );
            Some(g)
        };
        rows.push(GapRow {
            system: (*system).clone(),
            is_reference,
            short,
            long,
            gap,
            cells,
        });
    }
    Ok(GapTable {
        table: format!("gap_{}", label.to_lowercase()),
        score: label.to_string(),
        columns: ["System", "Short", "Long", "Delta_short", "Delta_long", "t"]
            .map(String::from)
            .to_vec(),
        sequences: shared.into_iter().collect(),
        rows,
    })
}

fn perplexity_records(corpus: &Corpus) -> Vec<PerplexityRecord> {
    let mut records = Vec::new();
    for e in &corpus.entries {
        let Some(p) = e.annotations.as_ref().and_then(|b| b.perplexities.as_ref()) else {
            continue;
        };
        for (evaluator, &value) in p {
            records.push(PerplexityRecord {
                evaluator: evaluator.clone(),
                column: e.story.prompt_condition.as_str().to_string(),
                system: e.story.system.clone(),
                value,
            });
        }
    }
    records
}

/// In lenient mode evaluators with an empty cell are dropped with a warning.
fn build_perplexity(
    corpus: &Corpus,
    columns: &[String],
    config: &RunConfig,
    warnings: &mut Vec<String>,
) -> Result<Option<PerplexityTable>, ReportError> {
    let records = perplexity_records(corpus);
    if records.is_empty() {
        return Ok(None);
    }
    let context = || "perplexity".to_string();
    if config.strict {
        return perplexity_report(&records, columns, &config.reference)
            .map(Some)
            .map_err(stats_error(context()));
    }
    let evaluators: BTreeSet<&str> = records.iter().map(|r| r.evaluator.as_str()).collect();
    let mut rows = Vec::new();
    for evaluator in evaluators {
        let subset: Vec<PerplexityRecord> = records
            .iter()
            .filter(|r| r.evaluator == evaluator)
            .cloned()
            .collect();
        match perplexity_report(&subset, columns, &config.reference) {
            Ok(t) => rows.extend(t.rows),
            Err(e @ StatsError::EmptyCell { .. }) => {
                warnings.push(format!("perplexity evaluator {evaluator:?} dropped: {e}"))
            }
            Err(e) => return Err(stats_error(context())(e)),
        }
    }
    Ok(Some(PerplexityTable {
        columns: columns.to_vec(),
        rows,
    }))
}

/// Builds every comparison table from per-story scores.
pub fn compare(
    corpus: &Corpus,
    scores: &[ScoreRecord],
    config: &RunConfig,
) -> Result<CompareReport, ReportError> {
    let mut excluded_degenerate = Vec::new();
    let kept: Vec<&ScoreRecord> = scores
        .iter()
        .filter(|s| {
            let drop = config.exclude_degenerate && s.score.metrics.degenerate;
            if drop {
                excluded_degenerate.push(s.score.story_id.clone());
            }
            !drop
        })
        .collect();
    let kept_ids: BTreeSet<&str> = kept.iter().map(|s| s.score.story_id.as_str()).collect();

    let specs = table_specs();
    let mut warnings = Vec::new();
    let mut descriptive = Vec::new();
    let mut tables = Vec::new();
    let mut grouped = Vec::new();
    for condition in CONDITIONS {
        let in_condition: Vec<&ScoreRecord> = kept
            .iter()
            .copied()
            .filter(|s| s.score.prompt_condition == condition)
            .collect();
        if in_condition.is_empty() {
            continue;
        }
        let systems = config.ordered_systems(in_condition.iter().map(|s| s.score.system.as_str()));
        let by_system: Vec<(String, Vec<&ScoreRecord>)> = systems
            .iter()
            .map(|system| {
                let rows = in_condition
                    .iter()
                    .copied()
                    .filter(|s| &s.score.system == system)
                    .collect();
                (system.clone(), rows)
            })
            .filter(|(_, rows): &(String, Vec<&ScoreRecord>)| !rows.is_empty())
            .collect();
        if !by_system.iter().any(|(s, _)| *s == config.reference) {
            warnings.push(format!(
                "{condition}: reference system {:?} has no stories; tests are undefined",
                config.reference
            ));
        }
        for (system, _) in &by_system {
            let stories = corpus.stories().filter(|st| {
                st.prompt_condition == condition
                    && &st.system == system
                    && kept_ids.contains(st.story_id.as_str())
            });
            if let Ok(stats) = corpus_stats(stories) {
                descriptive.push(DescriptiveRow {
                    condition,
                    system: system.clone(),
                    stats,
                });
            }
        }
        for spec in &specs {
            tables.push(build_table(spec, condition, &by_system, &config.reference)?);
        }
        grouped.push((condition, by_system));
    }

    let mut gap_tables = Vec::new();
    if let [(_, short), (_, long)] = grouped.as_slice() {
        let present: BTreeSet<&str> = short
            .iter()
            .chain(long.iter())
            .map(|(s, _)| s.as_str())
            .collect();
        let systems = config.ordered_systems(present);
        let ncs = specs
            .iter()
            .find(|s| s.name == "ncs")
            .expect("ncs table spec");
        for s in &ncs.scores {
            gap_tables.push(build_gap_table(
                s.label,
                s.norm,
                short,
                long,
                &systems,
                &config.reference,
            )?);
        }
    }

    let columns: Vec<String> = grouped
        .iter()
        .map(|(c, _)| c.as_str().to_string())
        .collect();
    let perplexity = build_perplexity(corpus, &columns, config, &mut warnings)?;

    Ok(CompareReport {
        reference: config.reference.clone(),
        epsilon: config.epsilon,
        excluded_degenerate,
        descriptive,
        tables,
        gap_tables,
        perplexity,
        warnings,
    })
}

#[derive(Serialize)]
struct LongRow<'a> {
    table: &'a str,
    condition: &'a str,
    system: &'a str,
    column: &'a str,
    n: Option<usize>,
    mean: Option<f64>,
    sd: Option<f64>,
    statistic: Option<f64>,
    p_value: Option<f64>,
    display: String,
}

impl<'a> LongRow<'a> {
    fn new(table: &'a str, condition: &'a str, system: &'a str, column: &'a str) -> Self {
        LongRow {
            table,
            condition,
            system,
            column,
            n: None,
            mean: None,
            sd: None,
            statistic: None,
            p_value: None,
            display: String::new(),
        }
    }

    fn summary(mut self, s: &Option<Summary>) -> Self {
        if let Some(s) = s {
            (self.n, self.mean, self.sd) = (Some(s.n), Some(s.mean), Some(s.sd));
        }
        self.display = summary_cell(s);
        self
    }

    fn test(mut self, t: &Option<TTestResult>, display: &str) -> Self {
        if let Some(t) = t {
            (self.n, self.statistic, self.p_value) = (Some(t.n), Some(t.t_stat), Some(t.p_value));
        }
        self.display = display.to_string();
        self
    }
}

#[derive(Serialize)]
struct PerplexityCsvRow<'a> {
    evaluator: &'a str,
    column: &'a str,
    role: &'a str,
    n: Option<usize>,
    mean: Option<f64>,
    sd: Option<f64>,
    min: Option<f64>,
    max: Option<f64>,
    display: &'a str,
}

const PERPLEXITY_HEADER: [&str; 9] = [
    "evaluator",
    "column",
    "role",
    "n",
    "mean",
    "sd",
    "min",
    "max",
    "display",
];

impl CompareReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Long format: one line per rendered cell.
    pub fn to_csv(&self) -> String {
        let mut rows = Vec::new();
        for d in &self.descriptive {
            let st = &d.stats;
            let fields: [(&str, f64); 7] = [
                ("Seqs", st.sequences as f64),
                ("Seg/Seq", st.seg_per_seq),
                ("Sent/Seg", st.sent_per_seg),
                ("Sent/Seq", st.sent_per_seq),
                ("Words/Seq", st.words_per_seq),
                ("Words/Sent", st.words_per_sent),
                ("Words/Seg", st.words_per_seg),
            ];
            for (column, value) in fields {
                let mut r = LongRow::new("descriptive", d.condition.as_str(), &d.system, column);
                r.mean = Some(value);
                r.display = format!("{value:.2}");
                rows.push(r);
            }
        }
        for t in &self.tables {
            for row in &t.rows {
                let new =
                    |column| LongRow::new(&t.table, t.condition.as_str(), &row.system, column);
                for c in &row.components {
                    let mut r = new(&c.label).summary(&c.summary);
                    r.display = mean_cell(&c.summary);
                    rows.push(r);
                }
                let t_labels = t.columns[1 + row.components.len()..]
                    .iter()
                    .skip(1)
                    .step_by(2);
                for ((cell, t_label), t_display) in row.scores.iter().zip(t_labels).zip(
                    row.cells[1 + row.components.len()..]
                        .iter()
                        .skip(1)
                        .step_by(2),
                ) {
                    rows.push(new(&cell.label).summary(&cell.norm));
                    rows.push(new(t_label).test(&cell.test, t_display));
                }
            }
        }
        for g in &self.gap_tables {
            for row in &g.rows {
                let new = |column| LongRow::new(&g.table, "both", &row.system, column);
                rows.push(new("Short").summary(&row.short));
                rows.push(new("Long").summary(&row.long));
                let mut ds = new("Delta_short");
                let mut dl = new("Delta_long");
                ds.display = row.cells[3].clone();
                dl.display = row.cells[4].clone();
                if let Some(gap) = &row.gap {
                    ds.n = Some(gap.n);
                    dl.n = Some(gap.n);
                    ds.mean = Some(gap.delta_short).filter(|d| d.is_finite());
                    dl.mean = Some(gap.delta_long).filter(|d| d.is_finite());
                }
                rows.push(ds);
                rows.push(dl);
                let test = row.gap.as_ref().and_then(|g| g.test.clone());
                rows.push(new("t").test(&test, &row.cells[5]));
            }
        }
        to_csv(&rows)
    }

    pub fn perplexity_csv(&self) -> String {
        let mut rows = Vec::new();
        if let Some(p) = &self.perplexity {
            for row in &p.rows {
                for (i, cell) in row.cells.iter().enumerate() {
                    let column = &p.columns[i / 2];
                    rows.push(match cell {
                        PerplexityCell::Human {
                            n,
                            mean,
                            sd,
                            display,
                        } => PerplexityCsvRow {
                            evaluator: &row.evaluator,
                            column,
                            role: "human",
                            n: Some(*n),
                            mean: Some(*mean),
                            sd: Some(*sd),
                            min: None,
                            max: None,
                            display,
                        },
                        PerplexityCell::Models {
                            min,
                            max,
                            source_means,
                            display,
                        } => PerplexityCsvRow {
                            evaluator: &row.evaluator,
                            column,
                            role: "models",
                            n: Some(source_means.len()),
                            mean: None,
                            sd: None,
                            min: Some(*min),
                            max: Some(*max),
                            display,
                        },
                    });
                }
            }
        }
        to_csv_with_header(&PERPLEXITY_HEADER, &rows)
    }

    /// Plain-text tables for the terminal.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut by_condition: BTreeMap<PromptCondition, Vec<&DescriptiveRow>> = BTreeMap::new();
        for d in &self.descriptive {
            by_condition.entry(d.condition).or_default().push(d);
        }
        for (condition, rows) in by_condition {
            let header = [
                "System",
                "Seqs",
                "Seg/Seq",
                "Sent/Seg",
                "Sent/Seq",
                "Words/Seq",
                "Words/Sent",
                "Words/Seg",
            ]
            .map(String::from)
            .to_vec();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|d| {
                    let s = &d.stats;
                    vec![
                        d.system.clone(),
                        s.sequences.to_string(),
                        format!("{:.2}", s.seg_per_seq),
                        format!("{:.2}", s.sent_per_seg),
                        format!("{:.2}", s.sent_per_seq),
                        format!("{:.2}", s.words_per_seq),
                        format!("{:.2}", s.words_per_sent),
                        format!("{:.2}", s.words_per_seg),
                    ]
                })
                .collect();
            render_block(
                &mut out,
                &format!("descriptive ({condition})"),
                &header,
                &body,
            );
        }
        for t in &self.tables {
            let body: Vec<Vec<String>> = t.rows.iter().map(|r| r.cells.clone()).collect();
            render_block(
                &mut out,
                &format!("{} ({})", t.table, t.condition),
                &t.columns,
                &body,
            );
        }
        for g in &self.gap_tables {
            let body: Vec<Vec<String>> = g.rows.iter().map(|r| r.cells.clone()).collect();
            let title = format!("{} (n = {} sequences)", g.table, g.sequences.len());
            render_block(&mut out, &title, &g.columns, &body);
        }
        if let Some(p) = &self.perplexity {
            let mut header = vec!["Evaluator".to_string()];
            for c in &p.columns {
                header.push(format!("{c}/human"));
                header.push(format!("{c}/models"));
            }
            let body: Vec<Vec<String>> = p
                .rows
                .iter()
                .map(|r| {
                    let mut cells = vec![r.evaluator.clone()];
                    cells.extend(r.cells.iter().map(|c| match c {
                        PerplexityCell::Human { display, .. }
                        | PerplexityCell::Models { display, .. } => display.clone(),
                    }));
                    cells
                })
                .collect();
            render_block(&mut out, "perplexity", &header, &body);
        }
        for w in &self.warnings {
            out.push_str("warning: ");
            out.push_str(w);
            out.push('\n');
        }
        out
    }
}

fn render_block(out: &mut String, title: &str, header: &[String], rows: &[Vec<String>]) {
    let width = |i: usize| {
        std::iter::once(&header[i])
            .chain(rows.iter().filter_map(|r| r.get(i)))
            .map(|c| c.chars().count())
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..header.len()).map(width).collect();
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    out.push_str(&format!("== {title} ==\n"));
    out.push_str(&line(header));
    for r in rows {
        out.push_str(&line(r));
    }
    out.push('\n');
}
