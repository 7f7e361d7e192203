use std::collections::BTreeMap;

use serde::Serialize;

use super::StatsError;

/// Mean and sample standard deviation (n - 1 denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// Set when n = 1; `sd` is then reported as 0.
    pub single: bool,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (m, (ss / (values.len() - 1) as f64).sqrt())
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let (mean, sd) = mean_sd(values);
    Some(Summary {
        n: values.len(),
        mean,
        sd,
        single: values.len() == 1,
    })
}

/// Row ordering for per-system tables: the reference system (usually the
/// human writers) first or last, other systems in name order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemOrder {
    ReferenceFirst(String),
    ReferenceLast(String),
}

impl SystemOrder {
    pub fn reference(&self) -> &str {
        match self {
            SystemOrder::ReferenceFirst(r) | SystemOrder::ReferenceLast(r) => r,
        }
    }

    /// Sorts system names into table order.
    pub fn arrange<S: AsRef<str>>(&self, systems: &mut [S]) {
        let reference = self.reference();
        let first = matches!(self, SystemOrder::ReferenceFirst(_));
        systems.sort_by(|a, b| {
            let (a, b) = (a.as_ref(), b.as_ref());
            let rank = |s: &str| match (s == reference, first) {
                (true, true) => 0,
                (true, false) => 2,
                (false, _) => 1,
            };
            rank(a).cmp(&rank(b)).then_with(|| a.cmp(b))
        });
    }
}

/// Groups `(system, value)` rows and summarizes each group, in table order.
pub fn aggregate<'a, I>(rows: I, order: &SystemOrder) -> Result<Vec<(String, Summary)>, StatsError>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (system, value) in rows {
        groups.entry(system).or_default().push(value);
    }
    let mut systems: Vec<&str> = groups.keys().copied().collect();
    order.arrange(&mut systems);
    systems
        .into_iter()
        .map(|system| {
            summarize(&groups[system])
                .map(|s| (system.to_string(), s))
                .ok_or_else(|| StatsError::EmptyGroup {
                    group: system.to_string(),
                })
        })
        .collect()
}

/// Table cell "0.50 (0.14)".
pub fn format_mean_sd(mean: f64, sd: f64) -> String {
    format!("{mean:.2} ({sd:.2})")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sample_sd() {
        let s = summarize(&[0.2, 0.4]).unwrap();
        assert!((s.mean - 0.3).abs() < 1e-15);
        assert!((s.sd - 0.141_421_356_237_309_5).abs() < 1e-15);
        let s = summarize(&[0.7]).unwrap();
        assert_eq!((s.sd, s.single), (0.0, true));
        let s = summarize(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!((s.sd, s.single), (0.0, false));
        assert!(summarize(&[]).is_none());
    }

    #[test]
    fn table_order() {
        let rows = [
            ("human", 1.0),
            ("gpt", 2.0),
            ("claude", 3.0),
            ("human", 3.0),
        ];
        let last = aggregate(rows, &SystemOrder::ReferenceLast("human".into())).unwrap();
        let names: Vec<&str> = last.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(names, ["claude", "gpt", "human"]);
        assert_eq!(last[2].1.mean, 2.0);
        let first = aggregate(rows, &SystemOrder::ReferenceFirst("human".into())).unwrap();
        assert_eq!(first[0].0, "human");
    }

    #[test]
    fn formatting() {
        assert_eq!(format_mean_sd(15.0, 7.0710678), "15.00 (7.07)");
        assert_eq!(format_mean_sd(0.5, 0.14), "0.50 (0.14)");
    }
}
