//! Scratch probe for tuning the synthetic-corpus acceptance experiments.

use std::time::Instant;

use warnlearn::eval::{run_experiment, ExperimentConfig};
use warnlearn::ingest::label;
use warnlearn::nn::{ModelConfig, TrainConfig};
use warnlearn::sampler::{SamplerConfig, Setup};
use warnlearn::synth::{generate, ConfounderStyle, SynthSpec};
use warnlearn::vocab::build_vocabulary;
use warnlearn::Real;

fn main() {
    let t0 = Instant::now();

    // Corpus A: scattered confounders (learnable), criterion-5 shape.
    let spec_a = SynthSpec {
        methods: 2000,
        bug_rate: 0.1,
        confounder_rate: 0.3,
        style: ConfounderStyle::Scattered,
        ..SynthSpec::default()
    };
    let corpus_a = generate(&spec_a, 1001).unwrap();
    let vocab_a = build_vocabulary(&corpus_a.methods, 1000).unwrap();
    println!(
        "corpus A: vocab {} coverage {:.3}",
        vocab_a.size_base(),
        vocab_a.coverage()
    );
    let labeled_a = label(&corpus_a.methods, &corpus_a.warnings, "DefaultCharset", 50).corpus;
    println!(
        "labeled A: {} buggy / {} non-buggy",
        labeled_a.buggy.len(),
        labeled_a.non_buggy.len()
    );

    let cfg = |vocab_dim: usize, epochs: usize, reps: usize| ExperimentConfig {
        window: 50,
        sampler: SamplerConfig::default(),
        model: ModelConfig::new(vocab_dim, 50),
        train: TrainConfig { epochs },
        reps,
        base_seed: 42,
    };

    let t = Instant::now();
    let ss_a = run_experiment::<Real>(&labeled_a, &vocab_a, Setup::SS, &cfg(vocab_a.dim(), 20, 5))
        .unwrap();
    println!(
        "A/SS 20 epochs x5: mean P {:.3} R {:.3} F1 {:.3}  per-rep F1 {:?}  [{:.1}s]",
        ss_a.mean.precision,
        ss_a.mean.recall,
        ss_a.mean.f1,
        ss_a.per_rep.iter().map(|m| (m.f1 * 100.0).round() / 100.0).collect::<Vec<_>>(),
        t.elapsed().as_secs_f64()
    );

    // Corpus B: guarded confounders (pitfall shape), criteria 6 and 7.
    let spec_b = SynthSpec {
        methods: 2000,
        bug_rate: 0.1,
        confounder_rate: 0.3,
        style: ConfounderStyle::Guarded,
        ..SynthSpec::default()
    };
    let corpus_b = generate(&spec_b, 2001).unwrap();
    let vocab_b = build_vocabulary(&corpus_b.methods, 1000).unwrap();
    let labeled_b = label(&corpus_b.methods, &corpus_b.warnings, "DefaultCharset", 50).corpus;

    for (setup, epochs) in [
        (Setup::BS, 10),
        (Setup::BB, 10),
        (Setup::SS, 10),
        (Setup::BAnnS, 10),
    ] {
        let t = Instant::now();
        let r = run_experiment::<Real>(&labeled_b, &vocab_b, setup, &cfg(vocab_b.dim(), epochs, 5))
            .unwrap();
        println!(
            "B/{setup} {epochs} epochs x5: mean P {:.3} R {:.3} F1 {:.3}  per-rep P {:?}  [{:.1}s]",
            r.mean.precision,
            r.mean.recall,
            r.mean.f1,
            r.per_rep.iter().map(|m| (m.precision * 100.0).round() / 100.0).collect::<Vec<_>>(),
            t.elapsed().as_secs_f64()
        );
    }

    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
