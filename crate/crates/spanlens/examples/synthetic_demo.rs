//! End-to-end walkthrough on synthetic data.
//!
//! Generates a corpus from contrasting telegraphic/narrative profiles,
//! simulates an extractor whose misses grow with stopword density, and
//! prints stratified recall under both match criteria.
//!
//! Run: cargo run --example synthetic_demo

use std::collections::BTreeMap;

use spanlens::inference::BootstrapConfig;
use spanlens::matching::{evaluate_matches, MatchCriterion};
use spanlens::stratify::{quantile_bins, stratified_recall};
use spanlens::synth::{default_profiles, generate_corpus, simulate_predictions, ExtractorSim};
use spanlens::text::{compute_index_vector, LexiconBundle};
use spanlens::Corpus;

fn main() {
    let corpus = generate_corpus(&default_profiles(), 150, (5, 12), 42).expect("generate");
    let sim = ExtractorSim {
        base_miss: 0.1,
        miss_slope_stopwords: 0.8,
        jitter_tokens: 1,
        confusion_prob: 0.02,
    };
    let lexicons = LexiconBundle::builtin();
    let predictions = simulate_predictions(&corpus, &sim, &lexicons, 43);
    println!(
        "{} documents, {} gold spans, {} predictions",
        corpus.documents.len(),
        corpus.gold.len(),
        predictions.len()
    );
    let corpus = Corpus {
        predicted: predictions,
        ..corpus
    };

    let vectors: BTreeMap<String, spanlens::IndexVector> = corpus
        .gold
        .iter()
        .map(|g| (g.span_id.clone(), compute_index_vector(&g.text, &lexicons)))
        .collect();

    let config = BootstrapConfig::new(500, 7);
    for criterion in [MatchCriterion::Exact, MatchCriterion::iou_default()] {
        let outcomes = evaluate_matches(&corpus, criterion).expect("evaluate");
        let overall = outcomes.iter().map(|o| f64::from(o.is_matched)).sum::<f64>()
            / outcomes.len() as f64;
        println!("\n=== {} (overall recall {:.3}) ===", criterion.name(), overall);

        // stopword-proportion quantile bins over defined spans
        let defined: Vec<(&str, f64)> = outcomes
            .iter()
            .filter_map(|o| {
                vectors
                    .get(&o.span_id)
                    .filter(|v| v.is_defined())
                    .map(|v| (o.span_id.as_str(), v.prop_stopwords))
            })
            .collect();
        let values: Vec<f64> = defined.iter().map(|(_, v)| *v).collect();
        let (spec, assignment) = quantile_bins("stopwords", &values, 5).expect("bins");
        let strata: BTreeMap<String, String> = defined
            .iter()
            .zip(&assignment)
            .map(|((id, _), bin)| (id.to_string(), bin.to_string()))
            .collect();

        let reports = stratified_recall(&outcomes, &strata, &corpus, &config).expect("recall");
        for (report, bin) in reports.iter().zip(&spec.bins) {
            println!(
                "stopwords in [{:.3}, {:.3}]  n={:<4} recall {:.3} [{:.3}, {:.3}]",
                bin.min, bin.max, report.n, report.recall, report.ci_low, report.ci_high
            );
        }
    }
}
