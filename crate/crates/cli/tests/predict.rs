use std::io::Cursor;

use scriptswitch::corpus::resample_splits;
use scriptswitch::fixtures;
use scriptswitch::model::{fit_feature_model, train_classifier};
use scriptswitch::{AdaptationCorpus, ClassifierModel, LanguageCondition, TrainConfig};
use scriptswitch_cli::predict::{load_model, predict_lines, PredictionRecord};

fn trained_model() -> ClassifierModel {
    let data = fixtures::labelled_dataset(LanguageCondition::Mal, 400, 0.3, 5);
    let split = resample_splits(&data, [0.8, 0.1, 0.1], 5).unwrap();
    let fm = fit_feature_model(&AdaptationCorpus::from_labelled(&split.train, 5), 5000).unwrap();
    let config = TrainConfig {
        eval_every: 5,
        ..Default::default()
    };
    train_classifier(&split, &fm, &config).unwrap()
}

fn records(model: &ClassifierModel, input: &str) -> Vec<PredictionRecord> {
    let mut out = Vec::new();
    predict_lines(model, Cursor::new(input), &mut out).unwrap();
    String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn empty_input_gives_empty_output() {
    let model = trained_model();
    let mut out = Vec::new();
    assert_eq!(predict_lines(&model, Cursor::new(""), &mut out).unwrap(), 0);
    assert!(out.is_empty());
}

#[test]
fn unseen_text_falls_back_to_the_bias() {
    let model = trained_model();
    let r = records(&model, "☃☃☃ ☃☃\n");
    assert_eq!(r.len(), 1);
    assert!(r[0].oov);
    let bias_only = model.predict("");
    assert_eq!(r[0].label, bias_only.label);
    for (label, p) in &bias_only.probabilities {
        assert_eq!(r[0].probabilities[label], *p);
    }
}

#[test]
fn saved_model_predicts_like_the_in_memory_one() {
    let model = trained_model();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let loaded = load_model(&path).unwrap();

    let lines = fixtures::labelled_dataset(LanguageCondition::Mal, 100, 0.5, 99);
    let input: String = lines.iter().map(|e| format!("{}\n", e.text)).collect();
    let from_disk = records(&loaded, &input);
    assert_eq!(from_disk.len(), 100);
    for (record, example) in from_disk.iter().zip(&lines) {
        let p = model.predict(&example.text);
        assert_eq!(record.label, p.label);
        assert_eq!(record.oov, p.oov);
        for (label, prob) in &p.probabilities {
            assert_eq!(record.probabilities[label].to_bits(), prob.to_bits());
        }
    }
    assert_eq!(from_disk, records(&model, &input));
}
