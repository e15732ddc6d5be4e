//! Randomized checks of the cross-module invariants.

use std::collections::HashMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::sample::select;

use scriptswitch::corpus::{resample_splits, DatasetSplit};
use scriptswitch::eval::{select_best, CellKey, Scope, SelectionGrid};
use scriptswitch::fixtures;
use scriptswitch::langid::{build_profile, mine_organic, Detector, LanguageProfile, MiningParams};
use scriptswitch::model::classifier::LinearParams;
use scriptswitch::model::{
    adamw_step, featurize, fit_feature_model, train_classifier, AdamWParams, AdamWState, FeatureModel,
};
use scriptswitch::script::ScriptMixSummary;
use scriptswitch::{AdaptationCorpus, Label, LanguageCondition, Provenance};

fn language() -> impl Strategy<Value = LanguageCondition> {
    select(LanguageCondition::ALL.to_vec())
}

fn profiles() -> &'static Vec<LanguageProfile> {
    static PROFILES: OnceLock<Vec<LanguageProfile>> = OnceLock::new();
    PROFILES.get_or_init(|| {
        LanguageCondition::ALL
            .iter()
            .map(|&lang| {
                let texts = fixtures::abstracts(lang, 300, 3);
                build_profile(texts.iter().map(String::as_str), lang, 300).unwrap()
            })
            .collect()
    })
}

fn sentence() -> impl Strategy<Value = (LanguageCondition, String)> {
    (language(), any::<u64>()).prop_map(|(lang, seed)| {
        let s = fixtures::sentences(lang, 1, 30, "properties", seed).pop().unwrap();
        (lang, s)
    })
}

fn feature_model(cap: usize) -> FeatureModel {
    let mut corpus = AdaptationCorpus::new(Provenance::Baseline);
    for lang in [LanguageCondition::Eng, LanguageCondition::Tam, LanguageCondition::Hin] {
        for s in fixtures::abstracts(lang, 40, 8) {
            corpus.push(s, format!("abstract/{lang}"));
        }
    }
    corpus.mark_random_partition(8);
    fit_feature_model(&corpus, cap).unwrap()
}

fn small_split(lang: LanguageCondition, seed: u64) -> DatasetSplit {
    let data = fixtures::labelled_dataset(lang, 120, 0.3, seed);
    resample_splits(&data, [0.7, 0.2, 0.1], seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_ranking_is_well_formed((_, text) in sentence()) {
        let detector = Detector::new(profiles().clone()).unwrap();
        let result = detector.detect(&text).unwrap();
        prop_assert_eq!(result.candidates.len(), LanguageCondition::ALL.len());
        prop_assert!(result.margin >= 0.0);
        for pair in result.candidates.windows(2) {
            prop_assert!(pair[0].1 >= 0.0 && pair[0].1 <= pair[1].1);
        }
        let doubled = format!("{text} {text}");
        prop_assert_eq!(detector.detect(&doubled).unwrap(), result);
    }

    #[test]
    fn distance_is_zero_exactly_for_the_texts_own_ranks(lang in language(), seed in any::<u64>()) {
        let text = fixtures::sentences(lang, 4, 30, "properties", seed).join(" ");
        let own = build_profile([text.as_str()], lang, 300).unwrap();
        let other = profiles().iter().find(|p| p.language != lang).unwrap().clone();
        let detector = Detector::new(vec![own.clone(), other.clone()]).unwrap();
        let result = detector.detect(&text).unwrap();
        for (candidate, distance) in result.candidates {
            let profile = if candidate == lang { &own } else { &other };
            let doc_ranks = &own.ngram_ranks;
            prop_assert_eq!(distance == 0.0, &profile.ngram_ranks == doc_ranks, "{}", candidate);
        }
    }

    #[test]
    fn mining_keeps_a_thresholded_subset(
        seed in any::<u64>(),
        target in select(vec![LanguageCondition::Guj, LanguageCondition::Hin, LanguageCondition::Tcy]),
        min_margin in 0.0f64..400.0,
        min_length in 20usize..80,
    ) {
        let stream = fixtures::organic_stream(150, seed);
        let detector = Detector::new(profiles().clone()).unwrap();
        let params = MiningParams { min_margin, min_length, max_docs: usize::MAX };
        let mined = mine_organic(stream.clone(), target, &detector, params);
        let stats = &mined.stats;
        let retained: usize = stats.retained.values().sum();
        prop_assert_eq!(retained, mined.corpus.len());
        prop_assert_eq!(
            stats.examined,
            retained + stats.rejected_short + stats.rejected_language + stats.rejected_margin + stats.rejected_cap
        );
        let mut cursor = stream.iter();
        for doc in &mined.corpus.documents {
            // a subsequence of the stream, in stream order
            prop_assert!(cursor.any(|s| s == &doc.text));
            prop_assert!(scriptswitch::langid::normalize(&doc.text).chars().count() >= min_length);
            let result = detector.detect(&doc.text).unwrap();
            prop_assert_eq!(result.top(), target);
            prop_assert!(result.margin >= min_margin);
        }
    }

    #[test]
    fn feature_vectors_are_unit_or_empty(cap in 1usize..3000, text in "\\PC{0,60}", (_, s) in sentence()) {
        let fm = feature_model(cap);
        prop_assert!(fm.dim() <= cap);
        prop_assert!(fm.idf.iter().all(|&w| w >= 1.0));
        for t in [text.as_str(), s.as_str()] {
            let x = featurize(t, &fm);
            let mut seen = std::collections::BTreeSet::new();
            for &(j, _) in &x.entries {
                prop_assert!((j as usize) < fm.dim());
                prop_assert!(seen.insert(j));
            }
            prop_assert!(x.is_empty() || (x.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn adamw_state_stays_well_formed(
        grads in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 4), 1..20),
        weight_decay in 0.0f64..0.5,
    ) {
        let hp = AdamWParams { weight_decay, ..Default::default() };
        let mut params = vec![0.5, -0.5, 2.0, 0.0];
        let mut state = AdamWState::new(4);
        for (t, g) in grads.iter().enumerate() {
            adamw_step(&mut params, g, &mut state, &hp).unwrap();
            prop_assert_eq!(state.t, t as u64 + 1);
            prop_assert!(state.v.iter().all(|&v| v >= 0.0));
            prop_assert!(params.iter().all(|p| p.is_finite()));
        }
    }

    #[test]
    fn box_statistics_are_ordered(props in prop::collection::vec(0.0f64..=1.0, 1..40), lang in language()) {
        let s = ScriptMixSummary::from_proportions(lang, &props).unwrap();
        prop_assert!(s.lower_whisker <= s.lower_quartile);
        prop_assert!(s.lower_quartile <= s.median);
        prop_assert!(s.median <= s.upper_quartile);
        prop_assert!(s.upper_quartile <= s.upper_whisker);
        prop_assert!((0.0..=1.0).contains(&s.any_latin_fraction));
        prop_assert_eq!(s.n, props.len());
    }

    #[test]
    fn selection_ignores_insertion_order(
        langs in prop::sample::subsequence(LanguageCondition::ALL.to_vec(), 1..=10),
        values in prop::collection::vec(select(vec![0.25, 0.5, 0.75, 0.875]), 60),
        shuffle_seed in any::<u64>(),
    ) {
        let mut cells = Vec::new();
        let mut values = values.into_iter();
        for &language in &langs {
            for variant in Provenance::ALL {
                for scope in Scope::ALL {
                    cells.push((CellKey::new(variant, scope, language), values.next().unwrap()));
                }
            }
        }
        let build = |cells: &[(CellKey, f64)]| {
            let mut grid = SelectionGrid::new();
            for &(key, v) in cells {
                grid.insert_score(key, v);
            }
            grid
        };
        let forward = select_best(&build(&cells)).unwrap();
        let mut shuffled = cells.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut scriptswitch::seed::rng(shuffle_seed));
        prop_assert_eq!(&select_best(&build(&shuffled)).unwrap(), &forward);

        for &language in &langs {
            let best = cells.iter().filter(|(k, _)| k.language == language).map(|c| c.1).fold(f64::MIN, f64::max);
            for &(key, v) in cells.iter().filter(|(k, _)| k.language == language) {
                prop_assert_eq!(forward.is_winner(&key), v == best);
            }
        }
        prop_assert_eq!(forward.ranking.len(), 6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn idf_scale_does_not_change_predictions(
        factor in 0.01f64..100.0,
        lang in select(vec![LanguageCondition::Mal, LanguageCondition::Kan, LanguageCondition::Tcy]),
        seed in 0u64..1000,
    ) {
        let split = small_split(lang, seed);
        let fm = fit_feature_model(&AdaptationCorpus::from_labelled(&split.train, seed), 3000).unwrap();
        let model = train_classifier(&split, &fm, &Default::default()).unwrap();
        let mut scaled = model.clone();
        scaled.feature_model = fm.scaled(factor);
        for e in split.test.iter().chain(&split.validation) {
            prop_assert_eq!(model.predict(&e.text).label, scaled.predict(&e.text).label);
        }
    }

    #[test]
    fn returned_parameters_have_the_minimum_recorded_loss(
        lang in select(vec![LanguageCondition::Esp, LanguageCondition::Tam, LanguageCondition::Tcy]),
        seed in 0u64..1000,
        eval_every in 1usize..6,
        learning_rate in 0.01f64..1.0,
    ) {
        let split = small_split(lang, seed);
        let fm = fit_feature_model(&AdaptationCorpus::from_labelled(&split.train, seed), 2000).unwrap();
        let config = scriptswitch::TrainConfig { eval_every, learning_rate, seed, ..Default::default() };
        let model = train_classifier(&split, &fm, &config).unwrap();
        let min = model.training_log.iter().map(|r| r.eval_loss).fold(f64::INFINITY, f64::min);
        let first_min = model.training_log.iter().find(|r| r.eval_loss == min).unwrap();
        prop_assert_eq!(model.best_step, first_min.step);

        let params = LinearParams {
            n_labels: model.labels.len(),
            dim: fm.dim(),
            values: model.weights.iter().chain(&model.bias).copied().collect(),
        };
        let xs: Vec<_> = split.validation.iter().map(|e| featurize(&e.text, &fm)).collect();
        let refs: Vec<_> = xs.iter().collect();
        let label_index: HashMap<Label, usize> = model.labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let ys: Vec<usize> = split.validation.iter().map(|e| label_index[&e.label]).collect();
        let loss = params.loss(&refs, &ys, None);
        prop_assert!((loss - min).abs() <= 1e-12, "recomputed {} vs recorded {}", loss, min);
    }
}
