use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::describe::mean_sd;
use super::special::student_t_two_tailed;
use super::StatsError;

/// Two value series aligned by sequence id.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pub keys: Vec<String>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PairedSample {
    pub fn new(keys: Vec<String>, a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        if a.len() != b.len() || keys.len() != a.len() {
            return Err(StatsError::LengthMismatch {
                a: a.len(),
                b: b.len(),
            });
        }
        Ok(PairedSample { keys, a, b })
    }

    /// Pairs the sequences present in both maps; the rest are dropped.
    pub fn align(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Self {
        let mut sample = PairedSample {
            keys: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
        };
        for (key, &va) in a {
            if let Some(&vb) = b.get(key) {
                sample.keys.push(key.clone());
                sample.a.push(va);
                sample.b.push(vb);
            }
        }
        sample
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Significance {
    #[serde(rename = "ns")]
    NotSignificant,
    #[serde(rename = "p<.05")]
    P05,
    #[serde(rename = "p<.01")]
    P01,
}

impl Significance {
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            Significance::P01
        } else if p < 0.05 {
            Significance::P05
        } else {
            Significance::NotSignificant
        }
    }

    pub fn stars(self) -> &'static str {
        match self {
            Significance::NotSignificant => "",
            Significance::P05 => "*",
            Significance::P01 => "**",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub n: usize,
    /// Mean of a - b.
    pub mean_diff: f64,
    pub t_stat: f64,
    pub df: usize,
    /// Two-tailed.
    pub p_value: f64,
    pub significance: Significance,
}

impl TTestResult {
    /// Table cell "4.60**".
    pub fn display(&self) -> String {
        format!("{:.2}{}", self.t_stat, self.significance.stars())
    }
}

/// Two-tailed paired t-test on d = a - b with n - 1 degrees of freedom.
pub fn paired_t(sample: &PairedSample) -> Result<TTestResult, StatsError> {
    if sample.a.len() != sample.b.len() {
        return Err(StatsError::LengthMismatch {
            a: sample.a.len(),
            b: sample.b.len(),
        });
    }
    let n = sample.len();
    if n < 2 {
        return Err(StatsError::TooFewPairs { n });
    }
    let diffs: Vec<f64> = sample.a.iter().zip(&sample.b).map(|(a, b)| a - b).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if diffs.iter().all(|&d| d == diffs[0]) {
        return Err(StatsError::ZeroVariance);
    }
    let (mean_diff, sd) = mean_sd(&diffs);
    let t_stat = mean_diff / (sd / (n as f64).sqrt());
    let df = n - 1;
    let p_value = student_t_two_tailed(t_stat, df as f64);
    Ok(TTestResult {
        n,
        mean_diff,
        t_stat,
        df,
        p_value,
        significance: Significance::from_p(p_value),
    })
}

/// Change in the reference-minus-system gap between short and long prompts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapChangeResult {
    pub n: usize,
    pub delta_short: f64,
    pub delta_long: f64,
    /// `None` when the test is undefined; see `undefined`.
    pub test: Option<TTestResult>,
    pub undefined: Option<String>,
}

/// Paired test of per-sequence gaps `ref_short - sys_short` against
/// `ref_long - sys_long`. All four series must cover the same sequences.
pub fn gap_change(
    reference_short: &BTreeMap<String, f64>,
    system_short: &BTreeMap<String, f64>,
    reference_long: &BTreeMap<String, f64>,
    system_long: &BTreeMap<String, f64>,
) -> Result<GapChangeResult, StatsError> {
    let same_keys = |m: &BTreeMap<String, f64>| m.keys().eq(reference_short.keys());
    if !(same_keys(system_short) && same_keys(reference_long) && same_keys(system_long)) {
        return Err(StatsError::MisalignedConditions);
    }
    let keys: Vec<String> = reference_short.keys().cloned().collect();
    let gaps = |r: &BTreeMap<String, f64>, s: &BTreeMap<String, f64>| -> Vec<f64> {
        keys.iter().map(|k| r[k] - s[k]).collect()
    };
    let short = gaps(reference_short, system_short);
    let long = gaps(reference_long, system_long);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (delta_short, delta_long) = if keys.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (mean(&short), mean(&long))
    };
    let sample = PairedSample::new(keys, short, long)?;
    let (test, undefined) = match paired_t(&sample) {
        Ok(t) => (Some(t), None),
        Err(e @ (StatsError::ZeroVariance | StatsError::TooFewPairs { .. })) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    Ok(GapChangeResult {
        n: sample.len(),
        delta_short,
        delta_long,
        test,
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(a: &[f64], b: &[f64]) -> PairedSample {
        let keys = (0..a.len()).map(|i| format!("q{i}")).collect();
        PairedSample::new(keys, a.to_vec(), b.to_vec()).unwrap()
    }

    fn series(values: &[(&str, f64)]) -> BTreeMap<String, f64> {
        values.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn hand_case() {
        let r = paired_t(&sample(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(r.df, 2);
        assert!((r.t_stat - 3.464_101_615_137_754_4).abs() < 1e-12);
        assert!((r.p_value - 0.074_179_900_227_448_55).abs() < 1e-12);
        assert_eq!(r.significance, Significance::NotSignificant);
    }

    #[test]
    fn zero_variance_and_symmetric() {
        assert_eq!(
            paired_t(&sample(&[0.3, 0.5], &[0.3, 0.5])),
            Err(StatsError::ZeroVariance)
        );
        let r = paired_t(&sample(&[1.0, -1.0, 1.0, -1.0], &[0.0; 4])).unwrap();
        assert_eq!((r.t_stat, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            PairedSample::new(vec!["a".into()], vec![1.0], vec![]),
            Err(StatsError::LengthMismatch { .. })
        ));
        assert_eq!(
            paired_t(&sample(&[1.0], &[2.0])),
            Err(StatsError::TooFewPairs { n: 1 })
        );
        assert_eq!(
            paired_t(&sample(&[1.0, f64::NAN], &[2.0, 0.0])),
            Err(StatsError::NonFinite)
        );
    }

    #[test]
    fn alignment_by_key() {
        let a = series(&[("q1", 1.0), ("q2", 2.0), ("q3", 4.0)]);
        let b = series(&[("q3", 1.0), ("q1", 0.5), ("q9", 0.0)]);
        let s = PairedSample::align(&a, &b);
        assert_eq!(s.keys, ["q1", "q3"]);
        assert_eq!((s.a, s.b), (vec![1.0, 4.0], vec![0.5, 1.0]));
    }

    #[test]
    fn significance_thresholds() {
        assert_eq!(Significance::from_p(0.0099), Significance::P01);
        assert_eq!(Significance::from_p(0.01), Significance::P05);
        assert_eq!(Significance::from_p(0.049), Significance::P05);
        assert_eq!(Significance::from_p(0.05), Significance::NotSignificant);
    }

    #[test]
    fn gap_change_hand_case() {
        // short gaps [0.2, 0.4], long gaps [0.1, 0.1]
        let hs = series(&[("a", 0.7), ("b", 0.9)]);
        let ms = series(&[("a", 0.5), ("b", 0.5)]);
        let hl = series(&[("a", 0.6), ("b", 0.6)]);
        let ml = series(&[("a", 0.5), ("b", 0.5)]);
        let g = gap_change(&hs, &ms, &hl, &ml).unwrap();
        assert!((g.delta_short - 0.3).abs() < 1e-12);
        assert!((g.delta_long - 0.1).abs() < 1e-12);
        let t = g.test.unwrap();
        assert!((t.t_stat - 2.0).abs() < 1e-9, "{}", t.t_stat);
        assert_eq!(t.df, 1);
    }

    #[test]
    fn gap_change_identical_gaps_is_undefined() {
        let h = series(&[("a", 0.5), ("b", 0.75)]);
        let m = series(&[("a", 0.25), ("b", 0.5)]);
        let g = gap_change(&h, &m, &h, &m).unwrap();
        assert!(g.test.is_none());
        assert!(g.undefined.is_some());
        assert_eq!(g.delta_short, g.delta_long);
    }

    #[test]
    fn gap_change_requires_alignment() {
        let h = series(&[("a", 0.5), ("b", 0.75)]);
        let m = series(&[("a", 0.25)]);
        assert_eq!(
            gap_change(&h, &m, &h, &h),
            Err(StatsError::MisalignedConditions)
        );
    }
}
