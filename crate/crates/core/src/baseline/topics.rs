//! Lexical topic labels by agglomerative clustering of segment word bags.
//!
//! Segments with identical content-word bags start in the same cluster.
//! Clusters are merged greedily by the cosine similarity of their summed
//! bags (ties go to the lowest index pair) until the requested number of
//! clusters remains. Granularities are visited from finest to coarsest and
//! each coarser labeling continues merging the finer one, so a coarse label
//! is always a function of the fine label.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::names::word_spans;
use super::BaselineError;
use crate::corpus::{Story, TopicLabel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords(BTreeSet<String>);

impl Default for StopWords {
    fn default() -> Self {
        StopWords::from_list(include_str!("../../resources/stopwords.txt"))
    }
}

impl StopWords {
    /// One word per line; `#` starts a comment line.
    pub fn from_list(list: &str) -> Self {
        StopWords(
            list.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

type Bag = Vec<(u32, f64)>;

fn dot(a: &Bag, b: &Bag) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn add(a: &Bag, b: &Bag) -> Bag {
    let mut out = BTreeMap::new();
    for &(t, w) in a.iter().chain(b) {
        *out.entry(t).or_insert(0.0) += w;
    }
    out.into_iter().collect()
}

struct Cluster {
    bag: Bag,
    norm: f64,
    members: Vec<usize>,
}

impl Cluster {
    fn cosine(&self, other: &Cluster) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            0.0
        } else {
            dot(&self.bag, &other.bag) / (self.norm * other.norm)
        }
    }
}

fn make_cluster(bag: Bag, members: Vec<usize>) -> Cluster {
    let norm = dot(&bag, &bag).sqrt();
    Cluster { bag, norm, members }
}

/// `(similarity, neighbour)` ordering: higher similarity wins, then the
/// lower neighbour index.
fn better(cand: (f64, usize), best: Option<(f64, usize)>) -> bool {
    match best {
        None => true,
        Some((s, j)) => cand.0 > s || (cand.0 == s && cand.1 < j),
    }
}

struct Agglomerator {
    clusters: Vec<Option<Cluster>>,
    best: Vec<Option<(f64, usize)>>,
    active: usize,
}

impl Agglomerator {
    fn new(clusters: Vec<Cluster>) -> Self {
        let active = clusters.len();
        let mut ag = Agglomerator {
            clusters: clusters.into_iter().map(Some).collect(),
            best: vec![None; active],
            active,
        };
        for k in 0..active {
            ag.refresh_best(k);
        }
        ag
    }

    fn refresh_best(&mut self, k: usize) {
        let Some(ck) = &self.clusters[k] else {
            self.best[k] = None;
            return;
        };
        let mut best = None;
        for (j, cj) in self.clusters.iter().enumerate() {
            if let (true, Some(cj)) = (j != k, cj) {
                let cand = (ck.cosine(cj), j);
                if better(cand, best) {
                    best = Some(cand);
                }
            }
        }
        self.best[k] = best;
    }

    fn merge_step(&mut self) {
        let mut pick: Option<(f64, usize, usize)> = None;
        for (k, best) in self.best.iter().enumerate() {
            if let Some((s, j)) = *best {
                let (a, b) = (k.min(j), k.max(j));
                let take = match pick {
                    None => true,
                    Some((ps, pa, pb)) => s > ps || (s == ps && (a, b) < (pa, pb)),
                };
                if take {
                    pick = Some((s, a, b));
                }
            }
        }
        let Some((_, keep, gone)) = pick else { return };
        let removed = self.clusters[gone].take().expect("active cluster");
        let kept = self.clusters[keep].take().expect("active cluster");
        let mut members = kept.members;
        members.extend(removed.members);
        self.clusters[keep] = Some(make_cluster(add(&kept.bag, &removed.bag), members));
        self.active -= 1;
        self.best[gone] = None;

        self.refresh_best(keep);
        for k in 0..self.clusters.len() {
            if k == keep || self.clusters[k].is_none() {
                continue;
            }
            match self.best[k] {
                Some((_, j)) if j == keep || j == gone => self.refresh_best(k),
                current => {
                    let sim = self.clusters[k]
                        .as_ref()
                        .zip(self.clusters[keep].as_ref())
                        .map(|(a, b)| a.cosine(b))
                        .unwrap_or(0.0);
                    if better((sim, keep), current) {
                        self.best[k] = Some((sim, keep));
                    }
                }
            }
        }
    }

    /// Segment -> label, numbered by first appearance in segment order.
    fn labels(&self, segment_count: usize) -> Vec<TopicLabel> {
        let mut owner = vec![0usize; segment_count];
        for (c, cluster) in self.clusters.iter().enumerate() {
            if let Some(cluster) = cluster {
                for &m in &cluster.members {
                    owner[m] = c;
                }
            }
        }
        let mut renumber: HashMap<usize, TopicLabel> = HashMap::new();
        owner
            .into_iter()
            .map(|c| {
                let next = renumber.len() as TopicLabel;
                *renumber.entry(c).or_insert(next)
            })
            .collect()
    }
}

/// Topic labels for every segment of every story at each granularity.
/// The clustering runs once over all segments of `stories`.
pub fn lexical_topics(
    stories: &[&Story],
    granularities: &[u32],
    stopwords: &StopWords,
) -> Result<Vec<BTreeMap<u32, Vec<TopicLabel>>>, BaselineError> {
    if granularities.is_empty() {
        return Err(BaselineError::NoGranularities);
    }
    if granularities.contains(&0) {
        return Err(BaselineError::InvalidGranularity);
    }
    let mut targets: Vec<u32> = granularities.to_vec();
    targets.sort_unstable_by(|a, b| b.cmp(a));
    targets.dedup();

    let mut vocab: HashMap<String, u32> = HashMap::new();
    let mut bags: Vec<Bag> = Vec::new();
    for story in stories {
        for segment in &story.segments {
            let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
            for (_, _, word) in word_spans(&segment.text()) {
                if stopwords.contains(&word) {
                    continue;
                }
                let next = vocab.len() as u32;
                let id = *vocab.entry(word).or_insert(next);
                *counts.entry(id).or_insert(0.0) += 1.0;
            }
            bags.push(counts.into_iter().collect());
        }
    }
    let segment_count = bags.len();

    let mut initial: Vec<(Bag, Vec<usize>)> = Vec::new();
    let mut by_bag: HashMap<Vec<(u32, u64)>, usize> = HashMap::new();
    for (seg, bag) in bags.into_iter().enumerate() {
        let key: Vec<(u32, u64)> = bag.iter().map(|&(t, w)| (t, w.to_bits())).collect();
        match by_bag.get(&key) {
            Some(&c) => {
                let (sum, members) = &mut initial[c];
                *sum = add(sum, &bag);
                members.push(seg);
            }
            None => {
                by_bag.insert(key, initial.len());
                initial.push((bag, vec![seg]));
            }
        }
    }
    let mut ag = Agglomerator::new(
        initial
            .into_iter()
            .map(|(bag, members)| make_cluster(bag, members))
            .collect(),
    );

    let mut per_granularity: Vec<(u32, Vec<TopicLabel>)> = Vec::new();
    for &g in &targets {
        while ag.active > g as usize {
            ag.merge_step();
        }
        per_granularity.push((g, ag.labels(segment_count)));
    }

    let mut out = Vec::with_capacity(stories.len());
    let mut offset = 0;
    for story in stories {
        let n = story.segment_count();
        let map = per_granularity
            .iter()
            .map(|(g, labels)| (*g, labels[offset..offset + n].to_vec()))
            .collect();
        out.push(map);
        offset += n;
    }
    Ok(out)
}
