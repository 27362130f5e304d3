//! Repeated experiments per warning kind and setup, confusion metrics, and
//! report rendering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::LabeledCorpus;
use crate::nn::{self, ModelConfig, Mode, TrainConfig};
use crate::sampler::{compose, DatasetSplit, SamplerConfig, Setup};
use crate::scalar::Scalar;
use crate::vocab::Vocabulary;

/// Confusion counts and the derived ratios. Undefined ratios (zero
/// denominators) report as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Confusion counts over parallel prediction/label vectors.
pub fn metrics(predictions: &[u8], labels: &[u8]) -> Result<Metrics> {
    if predictions.is_empty() || predictions.len() != labels.len() {
        return Err(Error::BadMetricsInput {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &y) in predictions.iter().zip(labels.iter()) {
        debug_assert!(p <= 1 && y <= 1);
        match (p, y) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 0) => tn += 1,
            _ => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        tp,
        fp,
        tn,
        fn_,
        precision,
        recall,
        f1,
    })
}

/// Arithmetic means of the per-repetition ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub setup: Setup,
    pub repetitions: usize,
    pub buggy_count: usize,
    pub non_buggy_count: usize,
    pub per_rep: Vec<Metrics>,
    pub mean: MeanMetrics,
}

/// Everything one experiment needs besides the corpus and the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub window: usize,
    pub sampler: SamplerConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub reps: usize,
    pub base_seed: u64,
}

/// Runs `reps` repetitions of (compose, train, classify validation, score)
/// with seeds `base_seed + rep`, and averages the metrics per repetition.
pub fn run_experiment<S: Scalar>(
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    setup: Setup,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    assert!(cfg.reps >= 1, "need at least one repetition");
    assert_eq!(
        cfg.model.vocab_dim,
        vocab.dim(),
        "model vocab_dim must match the vocabulary"
    );
    let mut per_rep = Vec::with_capacity(cfg.reps);
    for rep in 0..cfg.reps {
        let seed = cfg.base_seed + rep as u64;
        let split: DatasetSplit =
            compose::<S>(setup, corpus, vocab, cfg.window, &cfg.sampler, seed)
                .map_err(|e| e.in_rep(rep))?;
        let (params, _log) = nn::train::<S>(&cfg.model, &cfg.train, &split.train, seed)
            .map_err(|e| e.in_rep(rep))?;
        let probs = nn::forward(&cfg.model, &params, &split.validation, Mode::Infer, 0);
        let threshold = S::real(cfg.model.threshold);
        let predictions: Vec<u8> = probs.iter().map(|&p| u8::from(p >= threshold)).collect();
        let labels: Vec<u8> = split.validation.iter().map(|s| s.label).collect();
        per_rep.push(metrics(&predictions, &labels).map_err(|e| e.in_rep(rep))?);
    }
    let mean = MeanMetrics {
        precision: per_rep.iter().map(|m| m.precision).sum::<f64>() / per_rep.len() as f64,
        recall: per_rep.iter().map(|m| m.recall).sum::<f64>() / per_rep.len() as f64,
        f1: per_rep.iter().map(|m| m.f1).sum::<f64>() / per_rep.len() as f64,
    };
    Ok(ExperimentReport {
        kind: corpus.kind.clone(),
        setup,
        repetitions: cfg.reps,
        buggy_count: corpus.buggy.len(),
        non_buggy_count: corpus.non_buggy.len(),
        per_rep,
        mean,
    })
}

/// Pr/Re/F1 triple as percentages.
pub type Cell = (f64, f64, f64);

/// One summary row: a kind with its per-setup mean metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub kind: String,
    pub buggy_count: usize,
    pub non_buggy_count: usize,
    pub cells: Vec<Option<Cell>>,
}

/// Per-kind rows (setup columns in fixed order) plus a per-column median row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub setups: Vec<Setup>,
    pub rows: Vec<SummaryRow>,
    pub median: Vec<Option<Cell>>,
}

/// Builds the summary table: rows are kinds ordered by descending buggy
/// count (kind name breaking ties), columns the setups present in canonical
/// order, and values the mean metrics as percentages.
pub fn summarize(reports: &[ExperimentReport]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::BadMetricsInput {
            predictions: 0,
            labels: 0,
        });
    }
    let setups: Vec<Setup> = Setup::ALL
        .into_iter()
        .filter(|s| reports.iter().any(|r| r.setup == *s))
        .collect();

    let mut kinds: Vec<(String, usize, usize)> = Vec::new();
    for r in reports {
        if !kinds.iter().any(|(k, _, _)| k == &r.kind) {
            kinds.push((r.kind.clone(), r.buggy_count, r.non_buggy_count));
        }
    }
    kinds.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let rows: Vec<SummaryRow> = kinds
        .into_iter()
        .map(|(kind, buggy_count, non_buggy_count)| {
            let cells = setups
                .iter()
                .map(|&setup| {
                    reports
                        .iter()
                        .find(|r| r.kind == kind && r.setup == setup)
                        .map(|r| {
                            (
                                100.0 * r.mean.precision,
                                100.0 * r.mean.recall,
                                100.0 * r.mean.f1,
                            )
                        })
                })
                .collect();
            SummaryRow {
                kind,
                buggy_count,
                non_buggy_count,
                cells,
            }
        })
        .collect();

    let median = (0..setups.len())
        .map(|col| {
            let mut pr = Vec::new();
            let mut re = Vec::new();
            let mut f1 = Vec::new();
            for row in &rows {
                if let Some((p, r, f)) = row.cells[col] {
                    pr.push(p);
                    re.push(r);
                    f1.push(f);
                }
            }
            if pr.is_empty() {
                None
            } else {
                Some((lower_median(&mut pr), lower_median(&mut re), lower_median(&mut f1)))
            }
        })
        .collect();

    Ok(Summary {
        setups,
        rows,
        median,
    })
}

/// Median taking the lower of the two middle values for even counts.
fn lower_median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite metric"));
    values[(values.len() - 1) / 2]
}

impl Summary {
    /// CSV rendering: one row per kind, percentages with two decimals, and a
    /// final Median row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,buggy,non_buggy");
        for s in &self.setups {
            out.push_str(&format!(",{s}_precision,{s}_recall,{s}_f1"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}",
                row.kind, row.buggy_count, row.non_buggy_count
            ));
            for cell in &row.cells {
                match cell {
                    Some((p, r, f)) => out.push_str(&format!(",{p:.2},{r:.2},{f:.2}")),
                    None => out.push_str(",,,"),
                }
            }
            out.push('\n');
        }
        out.push_str("Median,,");
        for cell in &self.median {
            match cell {
                Some((p, r, f)) => out.push_str(&format!(",{p:.2},{r:.2},{f:.2}")),
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
        out
    }

    /// Aligned plain-text table with `Pr / Re / F1` cells.
    pub fn to_text(&self) -> String {
        let cell_text = |c: &Option<Cell>| match c {
            Some((p, r, f)) => format!("{p:.2} / {r:.2} / {f:.2}"),
            None => "-".to_string(),
        };
        let mut rows_text: Vec<Vec<String>> = Vec::new();
        let mut header = vec![
            "Kind".to_string(),
            "Buggy".to_string(),
            "NonBuggy".to_string(),
        ];
        header.extend(self.setups.iter().map(|s| format!("{s} (Pr / Re / F1)")));
        rows_text.push(header);
        for row in &self.rows {
            let mut cols = vec![
                row.kind.clone(),
                row.buggy_count.to_string(),
                row.non_buggy_count.to_string(),
            ];
            cols.extend(row.cells.iter().map(cell_text));
            rows_text.push(cols);
        }
        let mut median = vec!["Median".to_string(), String::new(), String::new()];
        median.extend(self.median.iter().map(cell_text));
        rows_text.push(median);

        let cols = rows_text[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows_text.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows_text {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, text)| format!("{:<width$}", text, width = widths[c]))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// Per-kind scatter data (buggy count against mean precision/recall), one row
/// per (kind, setup), as CSV for external plotting.
pub fn scatter_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("kind,setup,buggy,precision,recall\n");
    let mut sorted: Vec<&ExperimentReport> = reports.iter().collect();
    sorted.sort_by(|a, b| {
        b.buggy_count
            .cmp(&a.buggy_count)
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| a.setup.to_string().cmp(&b.setup.to_string()))
    });
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{:.2},{:.2}\n",
            r.kind,
            r.setup,
            r.buggy_count,
            100.0 * r.mean.precision,
            100.0 * r.mean.recall
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(kind: &str, setup: Setup, buggy: usize, p: f64, r: f64, f: f64) -> ExperimentReport {
        ExperimentReport {
            kind: kind.into(),
            setup,
            repetitions: 1,
            buggy_count: buggy,
            non_buggy_count: buggy * 10,
            per_rep: vec![],
            mean: MeanMetrics {
                precision: p,
                recall: r,
                f1: f,
            },
        }
    }

    #[test]
    fn perfect_predictions() {
        let m = metrics(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        assert_eq!((m.tp, m.fp, m.tn, m.fn_), (2, 0, 2, 0));
    }

    #[test]
    fn all_negative_predictions_report_zeros() {
        let m = metrics(&[0, 0, 0], &[1, 0, 1]).unwrap();
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn counts_cover_the_input() {
        let m = metrics(&[1, 1, 0, 0, 1], &[0, 1, 0, 1, 1]).unwrap();
        assert_eq!(m.tp + m.fp + m.tn + m.fn_, 5);
    }

    #[test]
    fn empty_or_mismatched_inputs_error() {
        assert!(metrics(&[], &[]).is_err());
        assert!(metrics(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn pair_order_is_irrelevant() {
        let preds = [1, 0, 1, 1, 0, 0, 1];
        let labels = [0, 0, 1, 1, 1, 0, 0];
        let base = metrics(&preds, &labels).unwrap();
        let perm = [3usize, 0, 6, 2, 5, 1, 4];
        let p2: Vec<u8> = perm.iter().map(|&i| preds[i]).collect();
        let l2: Vec<u8> = perm.iter().map(|&i| labels[i]).collect();
        assert_eq!(metrics(&p2, &l2).unwrap(), base);
    }

    #[test]
    fn median_is_lower_middle_for_even_counts() {
        let reports = vec![
            report("A", Setup::SS, 40, 0.10, 0.2, 0.10),
            report("B", Setup::SS, 30, 0.20, 0.4, 0.20),
            report("C", Setup::SS, 20, 0.90, 0.6, 0.90),
        ];
        let s = summarize(&reports).unwrap();
        assert_eq!(s.median[0].unwrap().2, 20.0); // odd count: true middle

        let reports4 = vec![
            report("A", Setup::SS, 40, 0.1, 0.1, 0.1),
            report("B", Setup::SS, 30, 0.2, 0.2, 0.2),
            report("C", Setup::SS, 20, 0.3, 0.3, 0.3),
            report("D", Setup::SS, 10, 0.4, 0.4, 0.4),
        ];
        let s = summarize(&reports4).unwrap();
        assert_eq!(s.median[0].unwrap().0, 20.0); // lower of 20/30
    }

    #[test]
    fn single_report_is_its_own_median() {
        let s = summarize(&[report("A", Setup::BB, 5, 0.5, 0.6, 0.7)]).unwrap();
        assert_eq!(s.median[0].unwrap(), (50.0, 60.0, 70.0));
    }

    #[test]
    fn table_renders_percentages_with_two_decimals() {
        let s = summarize(&[report(
            "BoxedPrimitiveConstructor",
            Setup::SS,
            3769,
            0.9362,
            0.9202,
            0.9267,
        )])
        .unwrap();
        let text = s.to_text();
        assert!(text.contains("93.62 / 92.02 / 92.67"), "table was:\n{text}");
        let csv = s.to_csv();
        assert!(csv.contains("BoxedPrimitiveConstructor,3769,37690,93.62,92.02,92.67"));
    }

    #[test]
    fn rows_order_by_descending_buggy_count() {
        let reports = vec![
            report("Small", Setup::SS, 10, 0.1, 0.1, 0.1),
            report("Big", Setup::SS, 100, 0.2, 0.2, 0.2),
        ];
        let s = summarize(&reports).unwrap();
        assert_eq!(s.rows[0].kind, "Big");
        assert_eq!(s.rows[1].kind, "Small");
    }

    #[test]
    fn setup_columns_use_canonical_order() {
        let reports = vec![
            report("A", Setup::BB, 10, 0.1, 0.1, 0.1),
            report("A", Setup::BS, 10, 0.2, 0.2, 0.2),
        ];
        let s = summarize(&reports).unwrap();
        assert_eq!(s.setups, vec![Setup::BS, Setup::BB]);
    }
}
