//! Acceptance harness: one PASS/FAIL line per criterion.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::gradcheck::{affine_suite, lstm_suite, pairpath_suite, softmax_suite, supervised_suite, tanh_suite};
use common::oracle::{metric_oracle, path_oracle};
use common::synthetic::{mean, probe_accuracy, test_f1_by_seed, train_world, withheld_hit_rate, HIT_K};
use common::{separable_fixture, TOLERANCE};
use pairpath::classifiers::{train_setting, train_supervised, SupervisedInputs, SupervisedTrainConfig};
use pairpath::corpus::{parse_conllu, Vocabulary, NounTags, UNK};
use pairpath::eval::{
    run_experiment, weighted_f1, Coverage, ExperimentConfig, Instance, PipelineOutput, PipelineSettings,
    VectorKind,
};
use pairpath::neural::seeded;
use pairpath::paths::{extract_triples, PathLexicon, TripleStore};
use pairpath::synthetic::SyntheticConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn report(id: usize, name: &str, limit: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = run();
    let took = start.elapsed();
    let in_time = limit.is_none_or(|l| took <= l);
    let pass = o.pass && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" / limit {}s", l.as_secs()));
    println!(
        "criterion {id:>2} {}: {name}: {} [{:.1}s{budget}]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64()
    );
    pass
}

fn gradients() -> Outcome {
    let suites: [(&str, fn(usize, u64) -> f64); 6] = [
        ("affine", affine_suite),
        ("tanh", tanh_suite),
        ("softmax-xent", softmax_suite),
        ("lstm", lstm_suite),
        ("pair-path loss", pairpath_suite),
        ("supervised loss", supervised_suite),
    ];
    let errs: Vec<(&str, f64)> = suites.iter().map(|(n, f)| (*n, f(100, 11))).collect();
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let detail = errs
        .iter()
        .map(|(n, e)| format!("{n} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(worst <= TOLERANCE, format!("100 trials each, worst rel err {worst:.2e} <= {TOLERANCE:e} ({detail})"))
}

fn paths_oracle() -> Outcome {
    let r = path_oracle(1000, 12, 3);
    outcome(
        r.ok(),
        format!(
            "{} ordered pairs over 1000 trees, {} mismatches, {} mirror failures, {} asymmetric triples",
            r.pairs, r.mismatches, r.mirror_failures, r.symmetry_failures
        ),
    )
}

fn worked_example() -> Outcome {
    let text = "1\tA\ta\tDET\t_\t_\t2\tdet\t_\t_\n\
                2\tdog\tdog\tNOUN\t_\t_\t3\tnsubj\t_\t_\n\
                3\tis\tbe\tVERB\t_\t_\t0\tROOT\t_\t_\n\
                4\ta\ta\tDET\t_\t_\t5\tdet\t_\t_\n\
                5\tmammal\tmammal\tNOUN\t_\t_\t3\tattr\t_\t_\n\
                6\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_\n\n";
    let sentences: Vec<_> = parse_conllu(text.as_bytes()).collect::<Result<_, _>>().unwrap();
    let vocab = Vocabulary::from_tokens(UNK, ["dog", "mammal"]);
    let store = extract_triples(&sentences, &vocab, 5, NounTags::default());
    let want = "X/NOUN/nsubj/> be/VERB/ROOT/- Y/NOUN/attr/<";
    let got: Vec<&str> = store
        .paths("dog", "mammal")
        .map(|m| m.keys().map(String::as_str).collect())
        .unwrap_or_default();
    outcome(got == [want], format!("(dog, mammal) paths {got:?}"))
}

fn synthetic_criteria(results: &mut Vec<bool>) {
    let mut world = None;
    results.push(report(4, "unsupervised sanity on synthetic corpus", Some(Duration::from_secs(600)), || {
        let trained = world.insert(train_world(0));
        let log = &trained.objective_log;
        let increasing = log.len() == 6 && log.windows(2).all(|w| w[1] > w[0]);
        let (hits, total) = withheld_hit_rate(trained, HIT_K);
        let rate = hits as f64 / total.max(1) as f64;
        outcome(
            increasing && trained.world.corpus.len() >= 5000 && rate >= 0.9,
            format!(
                "{} sentences, objective {:.3} -> {:.3} ({} every epoch), top-{} hit rate {hits}/{total} = {:.3} >= 0.9",
                trained.world.corpus.len(),
                log[0],
                log[log.len() - 1],
                if increasing { "rising" } else { "not rising" },
                2 * HIT_K,
                rate
            ),
        )
    }));
    let trained = world.expect("criterion 4 builds the world");
    results.push(report(5, "NPB+Aug over NPB with half the paths withheld", Some(Duration::from_secs(1200)), || {
        let npb = test_f1_by_seed(&trained, "npb");
        let aug = test_f1_by_seed(&trained, "npb+aug");
        let gap = mean(&aug) - mean(&npb);
        outcome(
            gap >= 0.15,
            format!(
                "test F1 NPB {npb:.3?} mean {:.3}, NPB+Aug {aug:.3?} mean {:.3}, gap {gap:.3} >= 0.15",
                mean(&npb),
                mean(&aug)
            ),
        )
    }));
    results.push(report(6, "LexNET+Rep vs LexNET and linear probe", None, || {
        let lexnet = test_f1_by_seed(&trained, "lexnet");
        let rep = test_f1_by_seed(&trained, "lexnet+rep");
        let diff = mean(&rep) - mean(&lexnet);
        let pseudo = probe_accuracy(&trained, VectorKind::PseudoPath);
        let concat = probe_accuracy(&trained, VectorKind::WordConcat);
        outcome(
            diff >= -0.01 && pseudo - concat >= 0.2,
            format!(
                "test F1 LexNET mean {:.3}, LexNET+Rep mean {:.3} (diff {diff:.3} >= -0.01); probe accuracy pseudo-path {pseudo:.3} vs word concat {concat:.3} (gap {:.3} >= 0.2)",
                mean(&lexnet),
                mean(&rep),
                pseudo - concat
            ),
        )
    }));
}

fn metric() -> Outcome {
    let worst = metric_oracle(1000, 5);
    let labels = ["a".to_string(), "b".to_string(), "c".to_string()];
    // class 0 is perfect (support 3), class 1 is always wrong (support 1)
    let hand = weighted_f1(&[0, 0, 0, 1], &[0, 0, 0, 2], &labels).unwrap();
    let f1: Vec<f64> = hand.classes.iter().map(|c| c.f1).collect();
    outcome(
        worst <= 1e-12 && hand.weighted_f1 == 0.75 && f1[..2] == [1.0, 0.0],
        format!("worst deviation {worst:.1e} <= 1e-12 over 1000 cases; hand case {}", hand.weighted_f1),
    )
}

fn protocol() -> Outcome {
    let mut rng = seeded(17);
    let (store, mut dataset, words) = separable_fixture(9, &mut rng);
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    let embeddings = common::random_embeddings(&refs, 50, &mut rng);
    let lexicon = PathLexicon::from_counts(store.path_totals());
    let pairpath = pairpath::pairpath::PairPathModel::new(embeddings.clone(), lexicon, 100, 5, &mut rng).unwrap();
    let inputs = SupervisedInputs {
        store: &store,
        embeddings: &embeddings,
        pairpath: Some(&pairpath),
    };
    let short = SupervisedTrainConfig {
        max_epochs: 2,
        ..SupervisedTrainConfig::default()
    };
    let (_, npb) = train_supervised("npb".parse().unwrap(), &inputs, &dataset, &short).unwrap();
    let (_, aug) = train_supervised("npb+aug".parse().unwrap(), &inputs, &dataset, &short).unwrap();
    let npb_settings: Vec<&str> = npb.rows.iter().map(|r| r.setting.as_str()).collect();
    let aug_settings: Vec<&str> = aug.rows.iter().map(|r| r.setting.as_str()).collect();
    let grid_ok = npb_settings == ["dr=0.0", "dr=0.2", "dr=0.4"]
        && aug_settings
            == [
                "dr=0.0,k=1", "dr=0.0,k=3", "dr=0.0,k=5", "dr=0.2,k=1", "dr=0.2,k=3", "dr=0.2,k=5",
                "dr=0.4,k=1", "dr=0.4,k=3", "dr=0.4,k=5",
            ];

    // unseen pairs have only the empty path, so validation predictions are
    // constant per epoch and the score plateaus
    dataset.val = (0..5)
        .map(|i| Instance {
            w1: format!("zz{i}"),
            w2: format!("yy{i}"),
            label: 2,
        })
        .collect();
    let cfg = SupervisedTrainConfig {
        max_epochs: 60,
        ..SupervisedTrainConfig::default()
    };
    let no_model = SupervisedInputs {
        store: &store,
        embeddings: &embeddings,
        pairpath: None,
    };
    let setup = no_model.setup("npb".parse().unwrap(), &dataset, 0.0, None).unwrap();
    let row = train_setting(&setup, &store, &dataset, &cfg).unwrap().row;
    let stop_ok = row.epochs_run == row.best_epoch + 7 && row.epochs_run < cfg.max_epochs;
    outcome(
        grid_ok && stop_ok,
        format!(
            "plateau: best epoch {}, stopped after {}; grids {npb_settings:?} and {} k-settings",
            row.best_epoch,
            row.epochs_run,
            aug_settings.len()
        ),
    )
}

fn small_experiment(out_dir: &Path) -> ExperimentConfig {
    let mut pipeline = PipelineSettings {
        architectures: ["npb", "npb+aug", "lexnet+rep", "lexnet_h"].map(String::from).to_vec(),
        ..PipelineSettings::default()
    };
    pipeline.extraction.min_count = 1;
    pipeline.supervised.max_epochs = 3;
    pipeline.supervised.dropout_grid = vec![0.0, 0.2];
    pipeline.supervised.aug_k_grid = vec![1];
    pipeline.pairpath.epochs = 2;
    ExperimentConfig {
        name: "synthetic".into(),
        seed: 4,
        out_dir: out_dir.to_path_buf(),
        labels: "khn".into(),
        conllu_dir: None,
        embeddings: None,
        dataset_dir: None,
        synthetic: Some(SyntheticConfig {
            domains: 4,
            categories: 3,
            parts: 5,
            members: 10,
            train_pairs: 60,
            val_pairs: 20,
            test_pairs: 40,
            background_related: 150,
            background_random: 100,
            seed: 4,
            ..SyntheticConfig::default()
        }),
        pipeline,
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_experiment(&small_experiment(&a)).unwrap();
    run_experiment(&small_experiment(&b)).unwrap();
    let (fa, fb) = (files(&a), files(&b));
    let names: Vec<&str> = fa.iter().map(|f| f.0.as_str()).collect();
    let differing: Vec<&str> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let required = ["triples.tsv", "pairpath.model", "npb+aug.model", "results.tsv"];
    outcome(
        fa.len() == fb.len() && differing.is_empty() && required.iter().all(|r| names.contains(r)),
        format!("{} files compared, differing: {differing:?}", fa.len()),
    )
}

fn coverage() -> Outcome {
    let c = Coverage {
        instances: 57509,
        with_paths: 8866,
    };
    let table = PipelineOutput {
        store: TripleStore::new(),
        lexicon: PathLexicon::from_counts(Vec::<(String, u64)>::new()),
        pairpath: None,
        objective_log: Vec::new(),
        results: Vec::new(),
        coverage: c,
    }
    .results_table("K&H+N");
    let line = c.to_string();
    outcome(
        line == "57509 / 8866 / 15.4%" && table.contains("K&H+N\t57509 / 8866 / 15.4%"),
        format!("coverage line {line:?}"),
    )
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    results.push(report(1, "gradient suite", Some(Duration::from_secs(120)), gradients));
    results.push(report(2, "path extraction oracle", Some(Duration::from_secs(60)), paths_oracle));
    results.push(report(3, "worked example", None, worked_example));
    synthetic_criteria(&mut results);
    results.push(report(7, "metric oracle", None, metric));
    results.push(report(8, "protocol conformance", None, protocol));
    results.push(report(9, "determinism", None, determinism));
    results.push(report(10, "coverage reporting", None, coverage));
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
