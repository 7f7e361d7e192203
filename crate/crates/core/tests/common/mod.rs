#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use ncskit_core::corpus::Segment;
use ncskit_core::metrics::RELATION_LABELS;
use ncskit_core::report::RunConfig;
use ncskit_core::{
    AnnotationBundle, AnnotationKind, Annotator, AnnotatorKind, Chain, CharacterAlignment, Corpus,
    CorpusEntry, Mention, PromptCondition, Story,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const EPS: f64 = 1e-9;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden(name: &str) -> PathBuf {
    fixture("golden").join(name)
}

/// Config used for every golden file.
pub fn mini3_config(out: PathBuf) -> RunConfig {
    RunConfig {
        inputs: vec![fixture("mini3.jsonl")],
        out_dir: out,
        strict: true,
        jobs: Some(2),
        ..RunConfig::default()
    }
}

pub fn panel_config(out: PathBuf) -> RunConfig {
    RunConfig {
        inputs: vec![fixture("panel.jsonl")],
        out_dir: out,
        lexicon: Some(fixture("panel_lexicon.jsonl")),
        granularities: vec![20, 10, 5],
        jobs: Some(3),
        ..RunConfig::default()
    }
}

// ---------------------------------------------------------------- generators

const VOCAB: &[&str] = &[
    "the", "boat", "old", "river", "café", "ran", "slowly", "bright", "storm", "naïve", "garden",
    "lamp", "quiet", "über", "dog", "sang",
];

pub struct Limits {
    pub max_segments: usize,
    pub max_chains: usize,
    pub max_characters: usize,
    pub max_granularities: usize,
}

pub const SMALL: Limits = Limits {
    max_segments: 6,
    max_chains: 4,
    max_characters: 3,
    max_granularities: 4,
};

fn sentence<R: Rng>(rng: &mut R) -> String {
    let k = rng.gen_range(1..=6);
    let mut words: Vec<String> = (0..k)
        .map(|_| VOCAB.choose(rng).unwrap().to_string())
        .collect();
    let mut first = words[0].chars();
    let head = first.next().unwrap().to_uppercase().collect::<String>();
    words[0] = head + first.as_str();
    let end = *[".", "!", "?"].choose(rng).unwrap();
    words.join(" ") + end
}

pub fn random_story<R: Rng>(rng: &mut R, id: usize, max_segments: usize) -> Story {
    let n = rng.gen_range(1..=max_segments);
    let segments = (0..n)
        .map(|i| {
            let sentences = (0..rng.gen_range(1..=3)).map(|_| sentence(rng)).collect();
            Segment::new(i, sentences)
        })
        .collect();
    Story {
        story_id: format!("story-{id:04}"),
        sequence_id: format!("seq-{:02}", rng.gen_range(0..8)),
        system: ["human", "model-a", "model-b"]
            .choose(rng)
            .unwrap()
            .to_string(),
        prompt_condition: if rng.gen_bool(0.5) {
            PromptCondition::Short
        } else {
            PromptCondition::Long
        },
        segments,
    }
}

/// Whole-word spans (start, end) of a segment text.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

fn random_set<R: Rng>(rng: &mut R, n: usize, p: f64) -> BTreeSet<usize> {
    (0..n).filter(|_| rng.gen_bool(p)).collect()
}

fn annotator(kind: AnnotatorKind) -> Annotator {
    Annotator {
        name: "fixture".into(),
        version: "1".into(),
        kind,
        manifest_hash: None,
    }
}

/// A bundle that passes validation, with every metric input present.
pub fn random_bundle<R: Rng>(rng: &mut R, story: &Story, limits: &Limits) -> AnnotationBundle {
    let n = story.segment_count();
    let texts: Vec<String> = story.segments.iter().map(|s| s.text()).collect();
    let chains = (0..rng.gen_range(0..=limits.max_chains))
        .map(|_| {
            let mentions = (0..rng.gen_range(1..=4))
                .map(|_| {
                    let seg = rng.gen_range(0..n);
                    let spans = word_spans(&texts[seg]);
                    let (start, end) = *spans.choose(rng).unwrap();
                    Mention {
                        segment_index: seg,
                        char_start: start,
                        char_end: end,
                        surface_text: texts[seg][start..end].to_string(),
                    }
                })
                .collect();
            Chain(mentions)
        })
        .collect();
    let relations = (1..n)
        .map(|_| RELATION_LABELS.choose(rng).unwrap().to_string())
        .collect();
    let mut topics = BTreeMap::new();
    for _ in 0..rng.gen_range(1..=limits.max_granularities) {
        let g = rng.gen_range(1..=80u32);
        let labels = (0..n)
            .map(|_| rng.gen_range(-1..(g as i64).min(5)))
            .collect();
        topics.insert(g, labels);
    }
    let characters = (0..rng.gen_range(0..=limits.max_characters))
        .map(|i| CharacterAlignment {
            name: format!("char-{i}"),
            text_segments: random_set(rng, n, 0.5),
            visual_segments: random_set(rng, n, 0.5),
        })
        .collect();
    let grounding_score = rng.gen_bool(0.85).then(|| rng.gen_range(0.0..=1.0));
    let mut provenance = BTreeMap::new();
    provenance.insert(AnnotationKind::Coref, annotator(AnnotatorKind::Neural));
    provenance.insert(AnnotationKind::Topics, annotator(AnnotatorKind::Baseline));
    AnnotationBundle {
        story_id: story.story_id.clone(),
        coref_chains: Some(chains),
        relations: Some(relations),
        topics,
        characters: Some(characters),
        grounding_score,
        perplexities: rng.gen_bool(0.5).then(|| {
            [("eval-a".to_string(), rng.gen_range(1.0..100.0))]
                .into_iter()
                .collect()
        }),
        provenance,
    }
}

pub fn random_corpus<R: Rng>(rng: &mut R, stories: usize) -> Corpus {
    let entries = (0..stories)
        .map(|i| {
            let story = random_story(rng, i, SMALL.max_segments);
            let annotations = rng
                .gen_bool(0.8)
                .then(|| random_bundle(rng, &story, &SMALL));
            CorpusEntry { story, annotations }
        })
        .collect();
    Corpus { entries }
}

// ---------------------------------------------------------------- oracle

/// Straight-line recomputation of every metric from the definitions.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub chain_count: f64,
    pub mean_chain_size: f64,
    pub r: f64,
    pub unique: f64,
    pub total: f64,
    pub d: f64,
    pub per_granularity: Vec<(u32, f64)>,
    pub t: f64,
    pub chc: f64,
    pub chs: f64,
    pub chp: f64,
    pub mcc: f64,
    pub mcg: f64,
    pub components: [f64; 5],
    pub arith: f64,
    pub geom: f64,
}

pub fn oracle(story: &Story, bundle: &AnnotationBundle, eps: f64) -> Oracle {
    let n = story.segments.len();

    let chains = bundle.coref_chains.clone().unwrap();
    let c = chains.len() as f64;
    let mut mentions = 0.0;
    for ch in &chains {
        mentions += ch.0.len() as f64;
    }
    let (s, r) = if chains.is_empty() {
        (0.0, 0.0)
    } else {
        (mentions / c, mentions / c / c)
    };

    let relations = bundle.relations.clone().unwrap();
    let mut labels = relations.clone();
    labels.sort();
    labels.dedup();
    let d = if relations.is_empty() {
        0.0
    } else {
        labels.len() as f64 / relations.len() as f64
    };

    let mut per_granularity = Vec::new();
    for (g, l) in &bundle.topics {
        let mut changes = 0.0;
        for i in 1..l.len() {
            if l[i] != l[i - 1] {
                changes += 1.0;
            }
        }
        let rate = if n < 2 { 0.0 } else { changes / (n - 1) as f64 };
        per_granularity.push((*g, rate));
    }
    let t = per_granularity.iter().map(|p| p.1).sum::<f64>() / per_granularity.len() as f64;

    let characters = bundle.characters.clone().unwrap();
    let (mut chc, mut chs, mut chp, mut matched) = (0.0, 0.0, 0.0, 0.0);
    for ch in &characters {
        let segs: Vec<usize> = ch.text_segments.iter().copied().collect();
        if segs.is_empty() {
            continue;
        }
        matched += 1.0;
        let (cc, cs) = if n < 2 {
            (0.0, 0.0)
        } else {
            let mut both = 0.0;
            for i in 0..n - 1 {
                if segs.contains(&i) && segs.contains(&(i + 1)) {
                    both += 1.0;
                }
            }
            let first = *segs.iter().min().unwrap();
            let last = *segs.iter().max().unwrap();
            (
                both / (n - 1) as f64,
                (last - first) as f64 / (n - 1) as f64,
            )
        };
        chc += cc;
        chs += cs;
        chp += cc / (cs + eps);
    }
    if matched > 0.0 {
        chc /= matched;
        chs /= matched;
        chp /= matched;
    }

    let mut overlaps = Vec::new();
    for ch in &characters {
        let inter = ch
            .text_segments
            .iter()
            .filter(|s| ch.visual_segments.contains(s))
            .count();
        let union = ch.text_segments.len() + ch.visual_segments.len() - inter;
        if union > 0 {
            overlaps.push(inter as f64 / union as f64);
        }
    }
    let mcc = if overlaps.is_empty() {
        0.0
    } else {
        overlaps.iter().sum::<f64>() / overlaps.len() as f64
    };
    let mcg = match bundle.grounding_score {
        Some(gv) if !characters.is_empty() => mcc / (gv + eps),
        _ => 0.0,
    };

    let components = [r.tanh(), d.tanh(), t.tanh(), chp.tanh(), mcg.tanh()];
    let arith = components.iter().sum::<f64>() / 5.0;
    let geom = (components.iter().map(|x| (x + eps).ln()).sum::<f64>() / 5.0).exp();
    Oracle {
        chain_count: c,
        mean_chain_size: s,
        r,
        unique: labels.len() as f64,
        total: relations.len() as f64,
        d,
        per_granularity,
        t,
        chc,
        chs,
        chp,
        mcc,
        mcg,
        components,
        arith,
        geom,
    }
}

/// Largest absolute difference between a score and the oracle.
pub fn max_deviation(score: &ncskit_core::StoryScore, o: &Oracle) -> f64 {
    let m = &score.metrics;
    let mut pairs = vec![
        (m.coref.chain_count as f64, o.chain_count),
        (m.coref.mean_chain_size, o.mean_chain_size),
        (m.coref.raw, o.r),
        (m.discourse.unique_types as f64, o.unique),
        (m.discourse.total_relations as f64, o.total),
        (m.discourse.raw, o.d),
        (m.topic.averaged, o.t),
        (m.character.continuity, o.chc),
        (m.character.spread, o.chs),
        (m.character.raw, o.chp),
        (m.grounding.mcc, o.mcc),
        (m.grounding.raw, o.mcg),
        (score.ncs.arith, o.arith),
        (score.ncs.geom, o.geom),
    ];
    for (i, c) in m.components().iter().enumerate() {
        pairs.push((*c, o.components[i]));
        pairs.push((score.ncs.components[i], o.components[i]));
    }
    if m.topic.per_granularity.len() != o.per_granularity.len() {
        return f64::INFINITY;
    }
    for ((g, v), (og, ov)) in m.topic.per_granularity.iter().zip(&o.per_granularity) {
        if g != og {
            return f64::INFINITY;
        }
        pairs.push((*v, *ov));
    }
    pairs
        .iter()
        .map(|(a, b)| {
            if a.is_finite() && b.is_finite() {
                (a - b).abs()
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Ratio values can be large; compare relative to magnitude above 1.
pub fn scaled_deviation(score: &ncskit_core::StoryScore, o: &Oracle) -> f64 {
    let scale = 1.0f64.max(o.chp.abs()).max(o.mcg.abs());
    max_deviation(score, o) / scale
}

// ---------------------------------------------------------------- goldens

/// Runs every command behind the golden files; returns (golden name, bytes).
pub fn produce_goldens() -> Vec<(String, String)> {
    use ncskit_core::report;
    let dir = tempfile::tempdir().unwrap();
    let read = |p: &std::path::Path| std::fs::read_to_string(p).unwrap();
    let mut out = Vec::new();

    let mini = mini3_config(dir.path().join("mini3"));
    report::cmd_score(&mini).unwrap();
    out.push((
        "mini3.scores.jsonl".into(),
        read(&mini.out_dir.join("scores.jsonl")),
    ));

    let panel = panel_config(dir.path().join("panel"));
    report::cmd_score(&panel).unwrap();
    let text = report::cmd_compare(&panel).unwrap();
    report::cmd_sweep(&panel).unwrap();
    report::cmd_composition(&panel).unwrap();
    for name in [
        "scores.jsonl",
        "compare.json",
        "compare.csv",
        "perplexity.csv",
        "sweep.csv",
        "composition.csv",
    ] {
        out.push((format!("panel.{name}"), read(&panel.out_dir.join(name))));
    }
    out.push(("panel.compare.txt".into(), text));
    out
}
