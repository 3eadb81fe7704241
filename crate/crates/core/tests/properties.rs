use proptest::prelude::*;

use argstruct::classifiers::{fit, ModelFamily, ModelSpec};
use argstruct::domain::{
    parse_dataset, validate_message, write_dataset, ArgComponent, CheckworthinessLabel, ComponentHatefulness, Dataset,
    Message, MessageLabel,
};
use argstruct::encoding::{cw_block, encode, encoding_length, hs_block, EncodingFamily, EncodingSpec, FeatureVector};
use argstruct::evaluation::{aggregate, confusion, macro_metrics, stratified_kfold, MetricSet, StdKind};
use argstruct::synthgen::{generate, GeneratorConfig, GeneratorMode};

fn cw() -> impl Strategy<Value = CheckworthinessLabel> {
    prop_oneof![
        Just(CheckworthinessLabel::Nfs),
        Just(CheckworthinessLabel::Ufs),
        Just(CheckworthinessLabel::Cfs)
    ]
}

fn hate() -> impl Strategy<Value = ComponentHatefulness> {
    prop_oneof![
        Just(ComponentHatefulness::Hateful),
        Just(ComponentHatefulness::NonHateful),
        Just(ComponentHatefulness::Unannotated)
    ]
}

prop_compose! {
    fn message()(
        premises in prop::collection::vec((cw(), hate(), prop::option::of("[a-z ]{0,12}")), 1..6),
        concl in (cw(), hate()),
        hateful in any::<bool>(),
        id in "[a-z0-9]{1,8}",
    ) -> Message {
        let mut components: Vec<ArgComponent> = premises
            .into_iter()
            .enumerate()
            .map(|(i, (c, h, text))| ArgComponent { text, ..ArgComponent::premise(i, c, h) })
            .collect();
        components.push(ArgComponent::conclusion(components.len(), concl.0, concl.1));
        Message { id, components, label: MessageLabel::from_hateful(hateful) }
    }
}

fn family() -> impl Strategy<Value = EncodingFamily> {
    prop::sample::select(EncodingFamily::ALL.to_vec())
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(messages in prop::collection::vec(message(), 1..20)) {
        let d = Dataset::new(messages).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        let back = parse_dataset(buf.as_slice(), true).unwrap().dataset;
        prop_assert_eq!(back, d);
    }

    #[test]
    fn encoding_length_and_layout(m in message(), fam in family(), extra in 0usize..3, score in 0.0f64..=1.0) {
        prop_assert!(validate_message(&m).is_ok());
        let spec = EncodingSpec::new(fam, m.premise_count() + extra);
        let s = fam.is_two_stage().then_some(score);
        let v = encode(&m, spec, s).unwrap();
        prop_assert_eq!(v.len(), encoding_length(spec));
        prop_assert_eq!(&v, &encode(&m, spec, s).unwrap());
        prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn conclusion_slot_is_constant(m in message(), extra in 0usize..3) {
        let l = m.premise_count() + extra;
        let full = encode(&m, EncodingSpec::new(EncodingFamily::ArgStr, l), None).unwrap();
        let premises = encode(&m, EncodingSpec::new(EncodingFamily::ArgStrP, l), None).unwrap();
        let mut expected = premises.into_inner();
        expected.push(1.0);
        prop_assert_eq!(full.into_inner(), expected);
    }

    #[test]
    fn cw_slots_are_one_hot_or_empty(m in message(), extra in 0usize..3) {
        let l = m.premise_count() + extra;
        let block = cw_block(&m, l, true).unwrap();
        for (slot, triple) in block.chunks(3).enumerate() {
            let occupied = slot < m.premise_count() || slot == l;
            prop_assert_eq!(triple.iter().sum::<f64>(), if occupied { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn unannotated_non_hateful_hs_is_zero(mut m in message(), extra in 0usize..3) {
        m.label = MessageLabel::NonHateful;
        for c in &mut m.components {
            c.hate = ComponentHatefulness::Unannotated;
        }
        let block = hs_block(&m, m.premise_count() + extra).unwrap();
        prop_assert!(block.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn folds_partition_and_stratify(n_pos in 2usize..60, n_neg in 2usize..60, k in 2usize..6, seed in any::<u64>()) {
        prop_assume!(n_pos >= k && n_neg >= k);
        let mut labels: Vec<bool> = (0..n_pos + n_neg).map(|i| i < n_pos).collect();
        let shift = (seed % labels.len() as u64) as usize;
        labels.rotate_left(shift);
        let positives = n_pos;
        let fa = stratified_kfold(&labels, k, seed).unwrap();
        let mut sizes = Vec::new();
        for f in 0..k {
            let idx = fa.test_indices(f);
            let pos = idx.iter().filter(|&&i| labels[i]).count();
            prop_assert!(pos == positives / k || pos == positives.div_ceil(k));
            let neg = idx.len() - pos;
            let negatives = labels.len() - positives;
            prop_assert!(neg == negatives / k || neg == negatives.div_ceil(k));
            sizes.push(idx.len());
        }
        prop_assert_eq!(sizes.iter().sum::<usize>(), labels.len());
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn metrics_are_bounded_and_permutation_invariant(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..80),
        rotate in 0usize..80,
    ) {
        let (pred, gold): (Vec<bool>, Vec<bool>) = pairs.iter().copied().unzip();
        let m = macro_metrics(&confusion(&pred, &gold).unwrap()).unwrap();
        for v in [m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let mut shuffled = pairs.clone();
        shuffled.rotate_left(rotate % pairs.len());
        shuffled.reverse();
        let (p2, g2): (Vec<bool>, Vec<bool>) = shuffled.into_iter().unzip();
        prop_assert_eq!(macro_metrics(&confusion(&p2, &g2).unwrap()).unwrap(), m);
    }

    #[test]
    fn aggregate_of_identical_folds(v in 0.0f64..=1.0, n in 2usize..8) {
        let fold = MetricSet { precision: v, recall: v, f1: v };
        let a = aggregate(&vec![fold; n], StdKind::Population).unwrap();
        prop_assert_eq!(a.f1.mean, v);
        prop_assert_eq!(a.f1.std, 0.0);
    }

    #[test]
    fn aggregate_std_is_non_negative(vals in prop::collection::vec(0.0f64..=1.0, 2..10)) {
        let folds: Vec<MetricSet> = vals.iter().map(|&v| MetricSet { precision: v, recall: v, f1: v }).collect();
        for kind in [StdKind::Population, StdKind::Sample] {
            prop_assert!(aggregate(&folds, kind).unwrap().f1.std >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_messages_validate(seed in any::<u64>(), separable in any::<bool>(), guarantee in any::<bool>()) {
        let mode = if separable { GeneratorMode::Separable } else { GeneratorMode::Table1 };
        let mut cfg = GeneratorConfig::new(mode, 30, 20, seed);
        cfg.guarantee_hateful_component = guarantee;
        let d = generate(&cfg).unwrap();
        for m in d.messages() {
            prop_assert!(validate_message(m).is_ok());
        }
    }

    #[test]
    fn trees_ignore_an_appended_constant_column(
        rows in prop::collection::vec((prop::collection::vec(0u8..3, 4), any::<bool>()), 12..40),
        constant in -2.0f64..2.0,
        seed in 0u64..1000,
    ) {
        let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
        prop_assume!(labels.iter().any(|&y| y) && labels.iter().any(|&y| !y));
        let x: Vec<FeatureVector> = rows.iter().map(|r| FeatureVector(r.0.iter().map(|&v| v as f64).collect())).collect();
        let x_aug: Vec<FeatureVector> = x.iter().map(|r| FeatureVector([r.0.clone(), vec![constant]].concat())).collect();
        for family in [ModelFamily::Rforest, ModelFamily::Gbt] {
            let mut spec = ModelSpec::new(family).with_seed(seed);
            spec.tree_count = 20;
            let a = fit(&spec, &x, &labels).unwrap();
            let b = fit(&spec, &x_aug, &labels).unwrap();
            for (r, ra) in x.iter().zip(&x_aug) {
                prop_assert_eq!(a.predict_score(r).unwrap(), b.predict_score(ra).unwrap());
            }
        }
    }

    #[test]
    fn lgr_separable_training_accuracy(
        points in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 6..30),
        w in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        prop_assume!(w.0.abs() + w.1.abs() > 0.2);
        let margin = |p: &(f64, f64)| w.0 * p.0 + w.1 * p.1;
        prop_assume!(points.iter().all(|p| margin(p).abs() > 0.5));
        let labels: Vec<bool> = points.iter().map(|p| margin(p) > 0.0).collect();
        prop_assume!(labels.iter().any(|&y| y) && labels.iter().any(|&y| !y));
        let x: Vec<FeatureVector> = points.iter().map(|p| FeatureVector(vec![p.0, p.1])).collect();
        let mut spec = ModelSpec::new(ModelFamily::Lgr);
        spec.max_iter = 20_000;
        let m = fit(&spec, &x, &labels).unwrap();
        for (r, &y) in x.iter().zip(&labels) {
            prop_assert_eq!(m.predict(r).unwrap(), y);
        }
    }
}
