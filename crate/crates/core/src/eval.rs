//! Confusion counts, precision/recall/F1, macro averages and ROC/AUC.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Class, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / self.total() as f64
        }
    }
}

/// 2×2 tally against the declared positive class.
pub fn confusion(preds: &[Class], labels: &[Class], positive: Class) -> Result<ConfusionCounts> {
    if preds.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::InvalidParameter("no predictions to evaluate".into()));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &l) in preds.iter().zip(labels) {
        match (p == positive, l == positive) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Which ratios had a zero denominator and were reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UndefinedFlags {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl UndefinedFlags {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub undefined: UndefinedFlags,
}

fn ratio(num: f64, den: f64) -> (f64, bool) {
    if den > 0.0 {
        (num / den, false)
    } else {
        (0.0, true)
    }
}

/// F1 as the harmonic mean of precision and recall.
pub fn f1_score(precision: f64, recall: f64) -> (f64, bool) {
    ratio(2.0 * precision * recall, precision + recall)
}

/// Precision `tp/(tp+fp)`, recall `tp/(tp+fn)` and their F1. Zero
/// denominators give 0 with the matching flag set.
pub fn prf(counts: &ConfusionCounts) -> ClassMetrics {
    let tp = counts.tp as f64;
    let (precision, p_undef) = ratio(tp, tp + counts.fp as f64);
    let (recall, r_undef) = ratio(tp, tp + counts.fn_ as f64);
    let (f1, f_undef) = f1_score(precision, recall);
    ClassMetrics {
        precision,
        recall,
        f1,
        support: counts.tp + counts.fn_,
        undefined: UndefinedFlags {
            precision: p_undef,
            recall: r_undef,
            f1: f_undef,
        },
    }
}

/// Unweighted mean over classes. F1 is the mean of the per-class F1 values,
/// not recomputed from the averaged precision and recall.
pub fn macro_average(per_class: &[ClassMetrics]) -> Result<ClassMetrics> {
    if per_class.is_empty() {
        return Err(Error::InvalidParameter("macro average of no classes".into()));
    }
    let n = per_class.len() as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / n;
    Ok(ClassMetrics {
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
        support: per_class.iter().map(|m| m.support).sum(),
        undefined: UndefinedFlags {
            precision: per_class.iter().any(|m| m.undefined.precision),
            recall: per_class.iter().any(|m| m.undefined.recall),
            f1: per_class.iter().any(|m| m.undefined.f1),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive; the anchor point uses +inf.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC over the distinct scores in descending order (tied scores form one
/// step) with the trapezoidal AUC. `scores` are positive-class probabilities.
pub fn roc_curve(scores: &[f64], labels: &[Class], positive: Class) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::InvalidParameter(format!("score {s} is not a number")));
    }
    let pos = labels.iter().filter(|&&l| l == positive).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidParameter(
            "ROC needs both classes among the labels".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == positive {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().unwrap();
        let point = RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold,
        };
        auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);
    }
    Ok(RocCurve { points, auc })
}

impl RocCurve {
    /// `threshold,fpr,tpr` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr);
        }
        out
    }
}

/// Per-class rows (each class taken as positive in turn), their macro
/// average, the focal-positive counts and AUC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub focal: ClassMetrics,
    pub normal: ClassMetrics,
    pub average: ClassMetrics,
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub auc: f64,
    pub undefined: bool,
}

impl MetricsReport {
    /// `scores` are focal-class probabilities; predictions are their argmax
    /// (`>= 0.5` is focal).
    pub fn from_scores(scores: &[f64], labels: &[Class]) -> Result<MetricsReport> {
        let preds: Vec<Class> = scores
            .iter()
            .map(|&s| if s >= 0.5 { Class::Focal } else { Class::Normal })
            .collect();
        let roc = roc_curve(scores, labels, Class::Focal)?;
        let mut report = MetricsReport::from_predictions(&preds, labels)?;
        report.auc = roc.auc;
        Ok(report)
    }

    /// Report without scores; `auc` is left at 0.
    pub fn from_predictions(preds: &[Class], labels: &[Class]) -> Result<MetricsReport> {
        let counts = confusion(preds, labels, Class::Focal)?;
        let focal = prf(&counts);
        let normal = prf(&confusion(preds, labels, Class::Normal)?);
        let average = macro_average(&[focal, normal])?;
        Ok(MetricsReport {
            focal,
            normal,
            average,
            counts,
            accuracy: counts.accuracy(),
            auc: 0.0,
            undefined: average.undefined.any(),
        })
    }

    /// Table-layout CSV: `signal,precision,recall,f1_score,auc`; AUC on the
    /// focal row only.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("signal,precision,recall,f1_score,auc\n");
        let rows = [
            ("Focal", &self.focal, format!("{}", self.auc)),
            ("Normal", &self.normal, String::new()),
            ("Average", &self.average, String::new()),
        ];
        for (name, m, auc) in rows {
            let _ = writeln!(out, "{name},{},{},{},{auc}", m.precision, m.recall, m.f1);
        }
        out
    }

    /// Same table with four decimals, for printing.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<8} {:>9} {:>9} {:>9} {:>6}\n", "Signal", "Precision", "Recall", "F1-score", "AUC");
        for (name, m) in [("Focal", &self.focal), ("Normal", &self.normal), ("Average", &self.average)] {
            let auc = if name == "Focal" { format!("{:.4}", self.auc) } else { String::new() };
            let _ = writeln!(out, "{name:<8} {:>9.4} {:>9.4} {:>9.4} {auc:>6}", m.precision, m.recall, m.f1);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Class::{Focal as F, Normal as N};

    /// Tie-corrected Mann–Whitney statistic by explicit pair counting.
    fn pair_count_auc(scores: &[f64], labels: &[Class]) -> f64 {
        let (mut num, mut pairs) = (0.0, 0.0);
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if labels[i] == F && labels[j] == N {
                    pairs += 1.0;
                    if si > sj {
                        num += 1.0;
                    } else if si == sj {
                        num += 0.5;
                    }
                }
            }
        }
        num / pairs
    }

    #[test]
    fn confusion_tallies() {
        let c = confusion(&[F, F, N, N], &[F, N, N, F], F).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (1, 1, 1, 1));
        let c = confusion(&[F, N, N], &[F, N, N], F).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let c = confusion(&[F; 4], &[F, F, N, N], F).unwrap();
        assert_eq!((c.tn, c.fp), (0, 2));
        assert!(confusion(&[F], &[F, N], F).is_err());
        assert!(confusion(&[], &[], F).is_err());
    }

    #[test]
    fn prf_cases() {
        let m = prf(&ConfusionCounts { tp: 8, fp: 2, tn: 0, fn_: 2 });
        assert!((m.precision - 0.8).abs() < 1e-15 && (m.recall - 0.8).abs() < 1e-15 && (m.f1 - 0.8).abs() < 1e-15);
        let empty = prf(&ConfusionCounts { tp: 0, fp: 0, tn: 5, fn_: 3 });
        assert_eq!(empty.precision, 0.0);
        assert!(empty.undefined.precision && !empty.undefined.recall);
        // 372/465 = 0.80 precision, 372/400 = 0.93 recall.
        let table = prf(&ConfusionCounts { tp: 372, fp: 93, tn: 0, fn_: 28 });
        assert!((table.precision - 0.80).abs() < 1e-12 && (table.recall - 0.93).abs() < 1e-12);
        assert!((table.f1 - 0.86).abs() < 0.005);
    }

    fn metrics(p: f64, r: f64, f1: f64) -> ClassMetrics {
        ClassMetrics {
            precision: p,
            recall: r,
            f1,
            ..Default::default()
        }
    }

    #[test]
    fn macro_average_rows() {
        let avg = macro_average(&[metrics(0.80, 0.93, 0.86), metrics(0.97, 0.91, 0.94)]).unwrap();
        assert!((avg.precision - 0.885).abs() < 1e-12);
        assert!((avg.recall - 0.92).abs() < 1e-12);
        assert!((avg.f1 - 0.90).abs() < 1e-12);
        let alex = macro_average(&[metrics(0.7314, 0.772, 0.7511), metrics(0.7586, 0.715, 0.7361)]).unwrap();
        assert!((alex.precision - 0.745).abs() < 1e-3);
        let same = metrics(0.3, 0.6, 0.4);
        assert_eq!(macro_average(&[same, same]).unwrap().f1, 0.4);
        assert!(macro_average(&[]).is_err());
    }

    #[test]
    fn roc_examples() {
        let s = [0.9, 0.8, 0.3, 0.1];
        assert_eq!(roc_curve(&s, &[F, F, N, N], F).unwrap().auc, 1.0);
        assert!((roc_curve(&s, &[F, N, F, N], F).unwrap().auc - 0.75).abs() < 1e-15);
        let tied = roc_curve(&[0.4; 6], &[F, N, F, N, N, F], F).unwrap();
        assert_eq!(tied.auc, 0.5);
        assert_eq!(tied.points.len(), 2);
        assert!(roc_curve(&s, &[F; 4], F).is_err());
        assert!(roc_curve(&s[..2], &[F, N, N], F).is_err());
    }

    #[test]
    fn report_layout() {
        let r = MetricsReport::from_scores(&[0.9, 0.2, 0.6, 0.4], &[F, N, N, F]).unwrap();
        assert_eq!(r.counts, ConfusionCounts { tp: 1, fp: 1, tn: 1, fn_: 1 });
        assert_eq!(r.auc, 0.75);
        let csv = r.to_csv();
        assert!(csv.starts_with("signal,precision,recall,f1_score,auc\nFocal,0.5,0.5,0.5,0.75\n"));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"fn\":1"));
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<Class>)> {
        (2usize..60).prop_flat_map(|n| {
            (
                prop::collection::vec((0u8..20).prop_map(|v| v as f64 / 19.0), n),
                prop::collection::vec(any::<bool>(), n),
            )
                .prop_filter_map("needs both classes", |(s, b)| {
                    let labels: Vec<Class> = b.into_iter().map(|f| if f { F } else { N }).collect();
                    (labels.contains(&F) && labels.contains(&N)).then_some((s, labels))
                })
        })
    }

    proptest! {
        #[test]
        fn trapezoid_equals_pair_count((scores, labels) in scored_labels()) {
            let roc = roc_curve(&scores, &labels, F).unwrap();
            prop_assert!((roc.auc - pair_count_auc(&scores, &labels)).abs() < 1e-12);
            let first = roc.points[0];
            let last = *roc.points.last().unwrap();
            prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
            prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
            for w in roc.points.windows(2) {
                prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            }
        }

        #[test]
        fn auc_invariant_under_monotone_maps((scores, labels) in scored_labels()) {
            let base = roc_curve(&scores, &labels, F).unwrap().auc;
            let cubed: Vec<f64> = scores.iter().map(|s| (s - 0.3).powi(3)).collect();
            let exped: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
            prop_assert_eq!(roc_curve(&cubed, &labels, F).unwrap().auc, base);
            prop_assert_eq!(roc_curve(&exped, &labels, F).unwrap().auc, base);
        }

        #[test]
        fn prf_bounds(tp in 0u64..50, fp in 0u64..50, tn in 0u64..50, fn_ in 0u64..50) {
            let m = prf(&ConfusionCounts { tp, fp, tn, fn_ });
            for v in [m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if m.precision + m.recall > 0.0 {
                let h = 2.0 * m.precision * m.recall / (m.precision + m.recall);
                prop_assert!((m.f1 - h).abs() < 1e-15);
                prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-15);
            }
            let a = prf(&ConfusionCounts { tp: tn, fp: fn_, tn: tp, fn_: fp });
            let ab = macro_average(&[m, a]).unwrap();
            let ba = macro_average(&[a, m]).unwrap();
            prop_assert_eq!((ab.precision, ab.recall, ab.f1), (ba.precision, ba.recall, ba.f1));
        }
    }
}
