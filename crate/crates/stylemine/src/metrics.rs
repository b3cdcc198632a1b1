//! Evaluation metrics for transferred text: average n-gram BLEU, i-PINC,
//! and the geometric mean of accuracy and BLEU.
//!
//! BLEU here is the "average n-gram" reading: BLEU-n is computed separately
//! for n = 1..4 (clipped precision with max-reference clipping, brevity
//! penalty from the closest reference length, no smoothing) and the headline
//! number is their arithmetic mean. The standard geometric composite is also
//! available for comparison. Style accuracy is never computed internally; it
//! arrives as a per-record label.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::tokenize;
use crate::{Error, Result};

pub const MAX_NGRAM: usize = 4;

/// One evaluation unit: source, candidate, one or more references, and an
/// optional externally produced style-classification verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub source_tokens: Vec<String>,
    pub candidate_tokens: Vec<String>,
    pub reference_token_lists: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_style_correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub bleu_n: [f64; MAX_NGRAM],
    pub bleu_avg: f64,
}

/// Running clipped-match counts; totals are aggregated across records
/// before any ratio is taken.
#[derive(Debug, Default, Clone)]
pub struct BleuAccumulator {
    matched: [u64; MAX_NGRAM],
    total: [u64; MAX_NGRAM],
    candidate_len: u64,
    reference_len: u64,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts: HashMap<&[String], u64> = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

impl BleuAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_record(&mut self, candidate: &[String], references: &[Vec<String>]) -> Result<()> {
        if candidate.is_empty() {
            return Err(Error::InvalidInput("empty candidate".into()));
        }
        if references.is_empty() {
            return Err(Error::InvalidInput("record has no references".into()));
        }
        self.candidate_len += candidate.len() as u64;
        // Closest reference length; ties prefer the shorter reference.
        let c = candidate.len() as i64;
        let closest = references
            .iter()
            .map(|r| r.len() as i64)
            .min_by_key(|&r| ((r - c).abs(), r))
            .unwrap();
        self.reference_len += closest as u64;

        for n in 1..=MAX_NGRAM {
            let cand_counts = ngram_counts(candidate, n);
            let mut max_ref: HashMap<&[String], u64> = HashMap::new();
            for r in references {
                for (gram, count) in ngram_counts(r, n) {
                    let slot = max_ref.entry(gram).or_insert(0);
                    *slot = (*slot).max(count);
                }
            }
            for (gram, count) in &cand_counts {
                let clip = max_ref.get(gram).copied().unwrap_or(0);
                self.matched[n - 1] += (*count).min(clip);
            }
            self.total[n - 1] += candidate.len().saturating_sub(n - 1) as u64;
        }
        Ok(())
    }

    pub fn brevity_penalty(&self) -> f64 {
        let c = self.candidate_len as f64;
        let r = self.reference_len as f64;
        if self.candidate_len == 0 || c >= r {
            1.0
        } else {
            (1.0 - r / c).exp()
        }
    }

    /// BLEU-n for n = 1..4 and their arithmetic mean. Zero matched n-grams
    /// make BLEU-n exactly 0 (no smoothing). Levels where the corpus has no
    /// candidate n-grams at all are undefined rather than zero, and are
    /// excluded from the mean; this keeps a short candidate identical to its
    /// reference at BLEU 1.0.
    pub fn finalize(&self) -> BleuScore {
        let bp = self.brevity_penalty();
        let mut bleu_n = [0.0; MAX_NGRAM];
        let mut valid = 0usize;
        let mut sum = 0.0;
        for (n, slot) in bleu_n.iter_mut().enumerate() {
            if self.total[n] > 0 {
                if self.matched[n] > 0 {
                    *slot = bp * self.matched[n] as f64 / self.total[n] as f64;
                }
                valid += 1;
                sum += *slot;
            }
        }
        BleuScore {
            bleu_n,
            bleu_avg: if valid == 0 { 0.0 } else { sum / valid as f64 },
        }
    }

    /// The standard BLEU-4 geometric composite, for comparison. Zero if any
    /// precision is zero.
    pub fn composite(&self) -> f64 {
        let bp = self.brevity_penalty();
        let mut log_sum = 0.0;
        for n in 0..MAX_NGRAM {
            if self.matched[n] == 0 || self.total[n] == 0 {
                return 0.0;
            }
            log_sum += (self.matched[n] as f64 / self.total[n] as f64).ln();
        }
        bp * (log_sum / MAX_NGRAM as f64).exp()
    }
}

/// Average n-gram BLEU of one candidate against its references.
pub fn bleu_avg(candidate: &[String], references: &[Vec<String>]) -> Result<BleuScore> {
    let mut acc = BleuAccumulator::new();
    acc.add_record(candidate, references)?;
    Ok(acc.finalize())
}

/// i-PINC: reference n-gram coverage after removing every token shared with
/// the source, so verbatim copies of the source score exactly 0.
///
/// Tokens are compared lowercased. For each n with at least one surviving
/// reference n-gram, the score is the best reference's covered fraction of
/// distinct n-grams; the result averages over the valid n. No surviving
/// candidate tokens or no valid n means 0.
pub fn i_pinc(source: &[String], candidate: &[String], references: &[Vec<String>]) -> f64 {
    let lower = |tokens: &[String]| -> Vec<String> {
        tokens.iter().map(|t| t.to_lowercase()).collect()
    };
    let source_set: std::collections::HashSet<String> = lower(source).into_iter().collect();
    let strip = |tokens: &[String]| -> Vec<String> {
        lower(tokens)
            .into_iter()
            .filter(|t| !source_set.contains(t))
            .collect()
    };
    let candidate = strip(candidate);
    if candidate.is_empty() {
        return 0.0;
    }
    let references: Vec<Vec<String>> = references.iter().map(|r| strip(r)).collect();

    let mut sum = 0.0;
    let mut valid = 0usize;
    for n in 1..=MAX_NGRAM {
        let cand_grams: std::collections::HashSet<&[String]> = if candidate.len() >= n {
            candidate.windows(n).collect()
        } else {
            Default::default()
        };
        let mut best: Option<f64> = None;
        for r in &references {
            if r.len() < n {
                continue;
            }
            let ref_grams: std::collections::HashSet<&[String]> = r.windows(n).collect();
            if ref_grams.is_empty() {
                continue;
            }
            let hit = ref_grams.intersection(&cand_grams).count();
            let ratio = hit as f64 / ref_grams.len() as f64;
            best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
        }
        if let Some(b) = best {
            sum += b;
            valid += 1;
        }
    }
    if valid == 0 {
        0.0
    } else {
        sum / valid as f64
    }
}

/// Geometric mean of transfer accuracy and BLEU, both in `[0, 1]`.
pub fn gm(acc: f64, bleu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&acc) || !(0.0..=1.0).contains(&bleu) {
        return Err(Error::InvalidParam(format!(
            "gm inputs must be in [0, 1], got acc={acc}, bleu={bleu}"
        )));
    }
    Ok((acc * bleu).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu_n: [f64; MAX_NGRAM],
    pub bleu_avg: f64,
    pub i_pinc: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu_composite: Option<f64>,
    pub count: usize,
}

/// Corpus-level evaluation: aggregated BLEU counts, mean i-PINC, and, when
/// every record carries a style label, accuracy and GM. Mixed label presence
/// is an error.
pub fn evaluate(records: &[EvalRecord]) -> Result<MetricReport> {
    evaluate_with(records, false)
}

pub fn evaluate_with(records: &[EvalRecord], with_composite: bool) -> Result<MetricReport> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to evaluate".into()));
    }
    let labeled = records
        .iter()
        .filter(|r| r.predicted_style_correct.is_some())
        .count();
    if labeled != 0 && labeled != records.len() {
        return Err(Error::InvalidInput(format!(
            "style labels on {labeled} of {} records; need all or none",
            records.len()
        )));
    }

    let mut acc_bleu = BleuAccumulator::new();
    let mut pinc_sum = 0.0;
    for r in records {
        acc_bleu.add_record(&r.candidate_tokens, &r.reference_token_lists)?;
        pinc_sum += i_pinc(
            &r.source_tokens,
            &r.candidate_tokens,
            &r.reference_token_lists,
        );
    }
    let bleu = acc_bleu.finalize();
    let acc = if labeled == records.len() {
        Some(
            records
                .iter()
                .filter(|r| r.predicted_style_correct == Some(true))
                .count() as f64
                / records.len() as f64,
        )
    } else {
        None
    };
    let gm_value = match acc {
        Some(a) => Some(gm(a, bleu.bleu_avg)?),
        None => None,
    };
    Ok(MetricReport {
        bleu_n: bleu.bleu_n,
        bleu_avg: bleu.bleu_avg,
        i_pinc: pinc_sum / records.len() as f64,
        acc,
        gm: gm_value,
        bleu_composite: with_composite.then(|| acc_bleu.composite()),
        count: records.len(),
    })
}

/// A field that may arrive as raw text (tokenized on load) or as a
/// pre-tokenized list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum TextOrTokens {
    Text(String),
    Tokens(Vec<String>),
}

impl TextOrTokens {
    fn into_tokens(self) -> Vec<String> {
        match self {
            TextOrTokens::Text(t) => tokenize(&t),
            TextOrTokens::Tokens(v) => v,
        }
    }
}

#[derive(Deserialize)]
struct EvalLine {
    source: TextOrTokens,
    candidate: TextOrTokens,
    references: Vec<TextOrTokens>,
    #[serde(default)]
    style_correct: Option<bool>,
}

/// Load eval input json-lines: `{source, candidate, references: [...],
/// style_correct?}`. String fields are tokenized; arrays pass through.
pub fn load_eval_records(path: &Path) -> Result<Vec<EvalRecord>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: EvalLine = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            path: path.display().to_string(),
            line: lineno + 1,
            detail: e.to_string(),
        })?;
        if parsed.references.is_empty() {
            return Err(Error::MalformedLine {
                path: path.display().to_string(),
                line: lineno + 1,
                detail: "record has no references".into(),
            });
        }
        records.push(EvalRecord {
            source_tokens: parsed.source.into_tokens(),
            candidate_tokens: parsed.candidate.into_tokens(),
            reference_token_lists: parsed
                .references
                .into_iter()
                .map(TextOrTokens::into_tokens)
                .collect(),
            predicted_style_correct: parsed.style_correct,
        });
    }
    Ok(records)
}

/// Aligned-column rendering with the conventional column names, values
/// scaled by 100.
pub fn render_report_table(report: &MetricReport) -> String {
    let fmt = |v: Option<f64>| match v {
        Some(x) => format!("{:.1}", x * 100.0),
        None => "-".to_string(),
    };
    let header = ["ACC", "BLEU", "GM", "i-PINC"];
    let values = [
        fmt(report.acc),
        fmt(Some(report.bleu_avg)),
        fmt(report.gm),
        fmt(Some(report.i_pinc)),
    ];
    let widths: Vec<usize> = header
        .iter()
        .zip(&values)
        .map(|(h, v)| h.len().max(v.len()))
        .collect();
    let mut out = String::new();
    for (h, w) in header.iter().zip(&widths) {
        out.push_str(&format!("{h:>w$}  ", w = w));
    }
    out.push('\n');
    for (v, w) in values.iter().zip(&widths) {
        out.push_str(&format!("{v:>w$}  ", w = w));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn bleu_perfect_match() {
        let c = toks(&["the", "cat", "sat", "down", "now"]);
        let score = bleu_avg(&c, std::slice::from_ref(&c)).unwrap();
        assert_eq!(score.bleu_n, [1.0; 4]);
        assert_eq!(score.bleu_avg, 1.0);
    }

    #[test]
    fn bleu_clipping_hand_example() {
        // "the the the the" vs "the cat": clipped unigram 1/4, no higher n-grams.
        let c = toks(&["the", "the", "the", "the"]);
        let r = toks(&["the", "cat"]);
        let score = bleu_avg(&c, &[r]).unwrap();
        assert!((score.bleu_n[0] - 0.25).abs() < 1e-12);
        assert_eq!(&score.bleu_n[1..], &[0.0, 0.0, 0.0]);
        assert!((score.bleu_avg - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn bleu_no_overlap_is_zero() {
        let c = toks(&["alpha", "beta"]);
        let r = toks(&["gamma", "delta"]);
        let score = bleu_avg(&c, &[r]).unwrap();
        assert_eq!(score.bleu_avg, 0.0);
    }

    #[test]
    fn bleu_empty_candidate_errors() {
        assert!(bleu_avg(&[], &[toks(&["x"])]).is_err());
    }

    #[test]
    fn bleu_brevity_penalty_applies() {
        // candidate shorter than the only reference: BP = exp(1 - r/c).
        let c = toks(&["the", "cat"]);
        let r = toks(&["the", "cat", "sat", "down"]);
        let score = bleu_avg(&c, &[r]).unwrap();
        let bp = (1.0f64 - 4.0 / 2.0).exp();
        assert!((score.bleu_n[0] - bp).abs() < 1e-12);
        assert!((score.bleu_n[1] - bp).abs() < 1e-12);
    }

    #[test]
    fn i_pinc_input_copy_is_zero() {
        let s = toks(&["the", "food", "was", "good"]);
        let refs = vec![toks(&["the", "food", "was", "bad"])];
        assert_eq!(i_pinc(&s, &s, &refs), 0.0);
    }

    #[test]
    fn i_pinc_full_transfer_scores_one() {
        let s = toks(&["alpha", "beta"]);
        let c = toks(&["gamma", "delta"]);
        let refs = vec![c.clone()];
        assert!((i_pinc(&s, &c, &refs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn i_pinc_hand_trace() {
        let s = toks(&["good", "food"]);
        let r = vec![toks(&["bad", "food"])];
        let c = toks(&["bad", "meal"]);
        assert!((i_pinc(&s, &c, &r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gm_paper_values() {
        assert!((gm(0.970, 0.341).unwrap() - 0.575).abs() < 0.0005);
        assert!((gm(0.856, 0.212).unwrap() - 0.426).abs() < 0.0005);
        assert_eq!(gm(0.0, 0.9).unwrap(), 0.0);
        assert!(gm(1.2, 0.5).is_err());
        assert!(gm(0.5, -0.1).is_err());
    }

    #[test]
    fn gm_symmetry() {
        assert_eq!(gm(0.3, 0.7).unwrap(), gm(0.7, 0.3).unwrap());
        assert!((gm(0.42, 0.42).unwrap() - 0.42).abs() < 1e-12);
    }

    #[test]
    fn evaluate_single_perfect_record() {
        let c = toks(&["fine", "words"]);
        let records = vec![EvalRecord {
            source_tokens: toks(&["rough", "words"]),
            candidate_tokens: c.clone(),
            reference_token_lists: vec![c],
            predicted_style_correct: None,
        }];
        let report = evaluate(&records).unwrap();
        assert_eq!(report.bleu_avg, 1.0);
        assert!(report.acc.is_none());
        assert!(report.gm.is_none());
        assert_eq!(report.count, 1);
    }

    #[test]
    fn evaluate_accuracy_fraction() {
        let records: Vec<EvalRecord> = (0..10)
            .map(|i| EvalRecord {
                source_tokens: toks(&["src"]),
                candidate_tokens: toks(&["cand"]),
                reference_token_lists: vec![toks(&["cand"])],
                predicted_style_correct: Some(i < 7),
            })
            .collect();
        let report = evaluate(&records).unwrap();
        assert!((report.acc.unwrap() - 0.7).abs() < 1e-12);
        assert!(report.gm.is_some());
    }

    #[test]
    fn evaluate_mixed_labels_error() {
        let mut records = vec![
            EvalRecord {
                source_tokens: toks(&["a"]),
                candidate_tokens: toks(&["b"]),
                reference_token_lists: vec![toks(&["b"])],
                predicted_style_correct: Some(true),
            };
            2
        ];
        records[1].predicted_style_correct = None;
        assert!(evaluate(&records).is_err());
    }

    proptest! {
        #[test]
        fn bleu_reference_order_invariant(
            cand in proptest::collection::vec("[a-d]", 1..8),
            mut refs in proptest::collection::vec(proptest::collection::vec("[a-d]", 1..8), 1..4),
        ) {
            let a = bleu_avg(&cand, &refs).unwrap();
            refs.reverse();
            let b = bleu_avg(&cand, &refs).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn i_pinc_copy_property(
            src in proptest::collection::vec("[a-e]{1,3}", 1..10),
            refs in proptest::collection::vec(proptest::collection::vec("[a-e]{1,3}", 1..10), 1..4),
        ) {
            prop_assert_eq!(i_pinc(&src, &src, &refs), 0.0);
        }

        // Clip-max monotonicity: adding a reference of an already-present
        // length (so the brevity penalty is untouched) never lowers BLEU-n.
        #[test]
        fn bleu_extra_reference_monotone(
            cand in proptest::collection::vec("[a-c]", 2..7),
            base in proptest::collection::vec("[a-c]", 2..7),
            extra in proptest::collection::vec("[a-c]", 2..7),
        ) {
            let refs = vec![base.clone()];
            let before = bleu_avg(&cand, &refs).unwrap();
            let mut padded = extra.clone();
            padded.truncate(base.len());
            while padded.len() < base.len() {
                padded.push("z".to_string());
            }
            let refs2 = vec![base, padded];
            let after = bleu_avg(&cand, &refs2).unwrap();
            for n in 0..MAX_NGRAM {
                prop_assert!(after.bleu_n[n] + 1e-12 >= before.bleu_n[n]);
            }
        }
    }
}
