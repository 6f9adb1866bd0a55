//! Micro- and Macro-F1.
//!
//! F1 values are computed from counts as `2TP / (2TP + FP + FN)`, which is
//! the harmonic mean of precision and recall without the intermediate
//! rounding; for single-label data the pooled (micro) value is therefore
//! bit-identical to accuracy. Any ratio with a zero denominator is 0.

use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ClassStats<T> {
    pub class: T,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl<T> ClassStats<T> {
    pub fn support(&self) -> u64 {
        self.tp + self.fn_
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport<T> {
    /// Every class seen in either labels or predictions, in sorted order.
    pub classes: Vec<ClassStats<T>>,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub samples: usize,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_from_counts(tp: u64, fp: u64, fn_: u64) -> f64 {
    ratio(2 * tp, 2 * tp + fp + fn_)
}

pub fn evaluate<T: Ord + Clone>(predictions: &[T], labels: &[T]) -> Result<EvalReport<T>> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch { predictions: predictions.len(), labels: labels.len() });
    }
    let n = labels.len() as u64;
    // class -> (tp, fp, fn)
    let mut table: BTreeMap<&T, (u64, u64, u64)> = BTreeMap::new();
    for (p, l) in predictions.iter().zip(labels) {
        if p == l {
            table.entry(l).or_default().0 += 1;
        } else {
            table.entry(p).or_default().1 += 1;
            table.entry(l).or_default().2 += 1;
        }
    }
    let classes: Vec<ClassStats<T>> = table
        .into_iter()
        .map(|(c, (tp, fp, fn_))| ClassStats {
            class: c.clone(),
            tp,
            fp,
            fn_,
            tn: n - tp - fp - fn_,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f1: f1_from_counts(tp, fp, fn_),
        })
        .collect();
    let (tp, fp, fn_) = classes
        .iter()
        .fold((0, 0, 0), |acc, c| (acc.0 + c.tp, acc.1 + c.fp, acc.2 + c.fn_));
    let macro_f1 = if classes.is_empty() {
        0.0
    } else {
        classes.iter().map(|c| c.f1).sum::<f64>() / classes.len() as f64
    };
    Ok(EvalReport {
        micro_precision: ratio(tp, tp + fp),
        micro_recall: ratio(tp, tp + fn_),
        micro_f1: f1_from_counts(tp, fp, fn_),
        macro_f1,
        accuracy: ratio(tp, n),
        samples: labels.len(),
        classes,
    })
}

pub fn micro_f1<T: Ord + Clone>(predictions: &[T], labels: &[T]) -> Result<f64> {
    Ok(evaluate(predictions, labels)?.micro_f1)
}

pub fn macro_f1<T: Ord + Clone>(predictions: &[T], labels: &[T]) -> Result<f64> {
    Ok(evaluate(predictions, labels)?.macro_f1)
}

impl<T: Display> EvalReport<T> {
    /// Per-class rows followed by a summary row; `header` lines are emitted
    /// as `#` comments first.
    pub fn to_tsv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for h in header {
            let _ = writeln!(out, "# {h}");
        }
        out.push_str("class\ttp\tfp\tfn\ttn\tprecision\trecall\tf1\tsupport\n");
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.class,
                c.tp,
                c.fp,
                c.fn_,
                c.tn,
                c.precision,
                c.recall,
                c.f1,
                c.support()
            );
        }
        let _ = writeln!(
            out,
            "#summary\tmicro_f1={}\tmacro_f1={}\taccuracy={}\tsamples={}",
            self.micro_f1, self.macro_f1, self.accuracy, self.samples
        );
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<20} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{:<20} {:>9.4} {:>9.4} {:>9.4} {:>8}",
                c.class.to_string(),
                c.precision,
                c.recall,
                c.f1,
                c.support()
            );
        }
        let _ = writeln!(out, "micro-F1 {:.4}  macro-F1 {:.4}  ({} samples)", self.micro_f1, self.macro_f1, self.samples);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        let labels = [1, 1, 0, 0];
        let preds = [1, 0, 0, 0];
        assert_eq!(micro_f1(&preds, &labels).unwrap(), 0.75);
        let m = macro_f1(&preds, &labels).unwrap();
        assert!((m - (2.0 / 3.0 + 4.0 / 5.0) / 2.0).abs() < 1e-12);
        let r = evaluate(&preds, &labels).unwrap();
        let c1 = &r.classes[1];
        assert_eq!((c1.tp, c1.fp, c1.fn_, c1.tn), (1, 0, 1, 2));
        assert_eq!((c1.precision, c1.recall), (1.0, 0.5));
    }

    #[test]
    fn perfect_and_degenerate() {
        let labels = ["a", "b", "a", "b"];
        assert_eq!(micro_f1(&labels, &labels).unwrap(), 1.0);
        assert_eq!(macro_f1(&labels, &labels).unwrap(), 1.0);
        let all_a = ["a"; 4];
        assert!((macro_f1(&all_a, &labels).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(micro_f1(&[1, 2], &[1]), Err(Error::LengthMismatch { predictions: 2, labels: 1 })));
    }

    #[test]
    fn tsv_has_summary() {
        let r = evaluate(&["x", "y"], &["x", "x"]).unwrap();
        let tsv = r.to_tsv(&["run=1".into()]);
        assert!(tsv.starts_with("# run=1\nclass\t"));
        assert!(tsv.contains("#summary\tmicro_f1=0.5"));
        assert!(r.to_text().contains("micro-F1 0.5000"));
    }
}
