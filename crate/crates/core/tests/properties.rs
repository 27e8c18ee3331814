use std::path::Path;

use langsim::evaluation::{
    build_pairs, correlation_study, english_vs_best, DiagonalMode, ScoreMatrix,
};
use langsim::fixtures::{fixtures_dir, load_matrix_dir, load_score_dir};
use langsim::metrics::{
    lang2vec_average, quantified_wals_distance, CategoryDistances, Lang2vecPolicy, WalsMode,
};
use langsim::selection::rank_sources;
use langsim::typology::{
    shared_features, FeatureCatalog, FeatureSpec, FeatureValueTable, LanguageCatalog,
    LanguageRecord,
};
use langsim::{DistanceMatrix, MatrixKind};
use proptest::prelude::*;

const CODES: [&str; 5] = ["aaa", "bbb", "ccc", "ddd", "eee"];
const FEATURES: usize = 16;

fn catalogs(ks: &[u32]) -> (LanguageCatalog, FeatureCatalog) {
    let langs = LanguageCatalog::from_records(
        CODES
            .iter()
            .map(|c| LanguageRecord {
                code: c.to_string(),
                name: c.to_uppercase(),
                family: "F".into(),
                genus: "G".into(),
                iso_codes: vec![],
            })
            .collect(),
    )
    .unwrap();
    let feats = FeatureCatalog::from_specs(
        ks.iter()
            .enumerate()
            .map(|(i, &k)| FeatureSpec {
                feature_id: format!("{}A", i + 1),
                name: format!("f{i}"),
                num_categories: k,
            })
            .collect(),
    )
    .unwrap();
    (langs, feats)
}

/// Per feature a category count, and per (language, feature) an optional
/// value drawn as a fraction of that count.
fn typology_strategy() -> impl Strategy<Value = (Vec<u32>, Vec<Vec<Option<f64>>>)> {
    (
        prop::collection::vec(2u32..8, FEATURES),
        prop::collection::vec(
            prop::collection::vec(prop::option::weighted(0.6, 0.0f64..1.0), FEATURES),
            CODES.len(),
        ),
    )
}

fn build(
    ks: &[u32],
    cells: &[Vec<Option<f64>>],
) -> (FeatureCatalog, LanguageCatalog, FeatureValueTable) {
    let (langs, feats) = catalogs(ks);
    let mut table = FeatureValueTable::new(&langs);
    for (li, row) in cells.iter().enumerate() {
        for (fi, v) in row.iter().enumerate() {
            if let Some(frac) = v {
                let value = 1 + (frac * ks[fi] as f64) as i64;
                let value = value.min(ks[fi] as i64);
                table
                    .insert(&langs, &feats, CODES[li], &format!("{}A", fi + 1), value)
                    .unwrap();
            }
        }
    }
    (feats, langs, table)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shared_features_symmetric_and_bounded((ks, cells) in typology_strategy(), a in 0..5usize, b in 0..5usize) {
        let (_, _, t) = build(&ks, &cells);
        let ab = shared_features(&t, CODES[a], CODES[b]).unwrap();
        let ba = shared_features(&t, CODES[b], CODES[a]).unwrap();
        prop_assert_eq!(&ab, &ba);
        prop_assert!(ab.windows(2).all(|w| w[0] < w[1]));
        let da = t.defined(CODES[a]).unwrap().len();
        let db = t.defined(CODES[b]).unwrap().len();
        prop_assert!(ab.len() <= da.min(db));
    }

    #[test]
    fn values_round_trip((ks, cells) in typology_strategy()) {
        let (feats, langs, t) = build(&ks, &cells);
        let text = t.to_csv_string();
        let back = FeatureValueTable::parse(Path::new("values.csv"), &text, &langs, &feats).unwrap();
        prop_assert_eq!(back.table, t);
    }

    #[test]
    fn wals_distance_properties((ks, cells) in typology_strategy(), a in 0..5usize, b in 0..5usize) {
        let (feats, _, t) = build(&ks, &cells);
        let Ok(m) = quantified_wals_distance(&t, &feats, CODES[a], CODES[b], WalsMode::MeanAbs) else {
            prop_assert!(shared_features(&t, CODES[a], CODES[b]).unwrap().is_empty());
            return Ok(());
        };
        let r = quantified_wals_distance(&t, &feats, CODES[a], CODES[b], WalsMode::Rms).unwrap();
        let swapped = quantified_wals_distance(&t, &feats, CODES[b], CODES[a], WalsMode::MeanAbs).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.value));
        prop_assert_eq!(m.value, swapped.value);
        prop_assert!(m.value <= r.value + 1e-15);
        prop_assert!(r.value <= m.value.sqrt() + 1e-15);
        let agree = shared_features(&t, CODES[a], CODES[b])
            .unwrap()
            .iter()
            .all(|f| t.get(CODES[a], f) == t.get(CODES[b], f));
        prop_assert_eq!(m.value == 0.0, agree);
    }

    #[test]
    fn unrelated_feature_leaves_distance_unchanged((ks, cells) in typology_strategy(), extra in 0..5usize) {
        let (feats, _, t) = build(&ks, &cells);
        // The same data with one more feature defined only for a third language.
        let mut ks2 = ks.clone();
        ks2.push(4);
        let (langs2, feats2) = catalogs(&ks2);
        let mut t2 = FeatureValueTable::parse(Path::new("v"), &t.to_csv_string(), &langs2, &feats2).unwrap().table;
        let (a, b) = (CODES[0], CODES[1]);
        let third = CODES[2 + extra % 3];
        t2.insert(&langs2, &feats2, third, &format!("{}A", FEATURES + 1), 3).unwrap();
        let before = quantified_wals_distance(&t, &feats, a, b, WalsMode::MeanAbs).ok().map(|d| d.value);
        let after = quantified_wals_distance(&t2, &feats2, a, b, WalsMode::MeanAbs).ok().map(|d| d.value);
        prop_assert_eq!(before, after);
    }

    #[test]
    fn lang2vec_permutation_invariant(values in prop::array::uniform6(0.0f64..=1.0), seed in any::<u64>()) {
        let mut perm = values;
        // Fisher-Yates driven by the seed.
        let mut s = seed;
        for i in (1..6).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = lang2vec_average(&CategoryDistances::from_values(values).unwrap(), Lang2vecPolicy::Strict).unwrap();
        let b = lang2vec_average(&CategoryDistances::from_values(perm).unwrap(), Lang2vecPolicy::Strict).unwrap();
        prop_assert_eq!(a.value, b.value);
        prop_assert!((0.0..=1.0).contains(&a.value));
    }

    #[test]
    fn matrix_round_trip(
        cells in prop::collection::vec(prop::option::weighted(0.8, 0.0f64..1e6), 16),
        decimals in prop::option::of(0usize..6),
    ) {
        let codes: Vec<String> = CODES[..4].iter().map(|s| s.to_string()).collect();
        let mut m = DistanceMatrix::new(codes, MatrixKind::Similarity, false, "random").unwrap();
        for (i, v) in cells.iter().enumerate() {
            let v = match decimals {
                Some(d) => v.map(|x| format!("{x:.d$}").parse::<f64>().unwrap()),
                None => *v,
            };
            m.set(i / 4, i % 4, v);
        }
        m.set_precision(decimals);
        let text = m.to_csv_string();
        let back = DistanceMatrix::parse(Path::new("m.csv"), &text, None, false).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn ranking_ignores_candidate_order_and_monotone_maps(
        cells in prop::collection::vec(0.0f64..10.0, 25),
        target in 0..5usize,
        shuffle in any::<u64>(),
    ) {
        let codes: Vec<String> = CODES.iter().map(|s| s.to_string()).collect();
        let mut m = DistanceMatrix::new(codes, MatrixKind::Distance, false, "random").unwrap();
        for (i, v) in cells.iter().enumerate() {
            m.set(i / 5, i % 5, Some((v * 4.0).round() / 4.0));
        }
        let mut candidates: Vec<&str> = CODES.to_vec();
        candidates.rotate_left((shuffle % 5) as usize);
        if shuffle & 8 != 0 {
            candidates.reverse();
        }
        let a = rank_sources(&m, CODES[target], &CODES).unwrap();
        let b = rank_sources(&m, CODES[target], &candidates).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.entries.len() + a.excluded.len() + 1, CODES.len());
        prop_assert!(a.entries.iter().all(|e| e.source != CODES[target]));
        prop_assert!(a.entries.iter().enumerate().all(|(i, e)| e.rank == i + 1));

        let mapped = m.map_values(|v| (v + 1.0).ln() * 3.0 + v.powi(3));
        let c = rank_sources(&mapped, CODES[target], &CODES).unwrap();
        let order = |r: &langsim::selection::RankedList| r.entries.iter().map(|e| e.source.clone()).collect::<Vec<_>>();
        prop_assert_eq!(order(&a), order(&c));
    }
}

fn fixture_scores() -> Vec<ScoreMatrix> {
    load_score_dir(&fixtures_dir().join("scores")).unwrap()
}

fn fixture_sims() -> Vec<DistanceMatrix> {
    load_matrix_dir(&fixtures_dir().join("sims")).unwrap()
}

#[test]
fn zero_shot_pairs_never_on_diagonal() {
    let scores = fixture_scores();
    for s in &scores {
        for m in fixture_sims() {
            let sample = build_pairs(s, &m, false).unwrap();
            assert!(sample.labels().iter().all(|l| l.source != l.target));
            let full = build_pairs(s, &m, true).unwrap();
            let missing = m.missing_count();
            assert_eq!(full.len(), 64 - missing);
            assert_eq!(sample.len(), 56 - missing);
        }
    }
}

#[test]
fn study_invariant_under_positive_scaling_of_distances() {
    let scores = fixture_scores();
    let sims: Vec<DistanceMatrix> = fixture_sims()
        .into_iter()
        .filter(|m| m.kind() == MatrixKind::Distance)
        .collect();
    for factor in [0.001, 0.37, 3.0, 1234.5] {
        let scaled: Vec<DistanceMatrix> =
            sims.iter().map(|m| m.map_values(|v| v * factor)).collect();
        for mode in [DiagonalMode::Include, DiagonalMode::Exclude] {
            let a = correlation_study(&scores, &sims, mode).unwrap();
            let b = correlation_study(&scores, &scaled, mode).unwrap();
            assert_eq!(a.rows.len(), scores.len() * sims.len());
            for (x, y) in a.rows.iter().zip(&b.rows) {
                assert_eq!(x.spearman.rho, y.spearman.rho);
                assert!((x.pearson.rho - y.pearson.rho).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn empty_similarity_list_gives_empty_report() {
    let r = correlation_study(&fixture_scores(), &[], DiagonalMode::Include).unwrap();
    assert!(r.rows.is_empty());
}

#[test]
fn reference_differences_match_exhaustive_scan() {
    let scores = fixture_scores();
    let cmp = english_vs_best(&scores, "eng").unwrap();
    let expected: usize = scores.iter().map(|s| s.languages().len() - 1).sum();
    assert_eq!(cmp.differences.len(), expected);
    for d in &cmp.differences {
        let s = scores
            .iter()
            .find(|s| s.task == d.task && s.model == d.model)
            .unwrap();
        let best = s
            .languages()
            .iter()
            .filter(|src| **src != d.target)
            .map(|src| s.score(src, &d.target).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(d.best_score, best);
        assert_eq!(d.diff, s.score("eng", &d.target).unwrap() - best);
        assert!(d.diff <= 0.0);
        assert_ne!(d.target, "eng");
    }
}

#[test]
fn reference_difference_hand_enumeration() {
    let text = "# provenance=hand kind=similarity symmetric=false task=dep model=mbert\n\
                code,a,b,c\n\
                a,0.9,0.5,0.2\n\
                b,0.6,0.8,0.4\n\
                c,0.3,0.7,0.7\n";
    let m = DistanceMatrix::parse(Path::new("hand.csv"), text, None, false).unwrap();
    let s = ScoreMatrix::from_matrix(m, "hand.csv").unwrap();
    let cmp = english_vs_best(&[s], "a").unwrap();
    // target b: a 0.5, c 0.7 -> -0.2; target c: a 0.2, b 0.4 -> -0.2
    let d: Vec<(String, String, f64)> = cmp
        .differences
        .iter()
        .map(|d| (d.target.clone(), d.best_source.clone(), d.diff))
        .collect();
    assert_eq!(d.len(), 2);
    assert_eq!((d[0].0.as_str(), d[0].1.as_str()), ("b", "c"));
    assert!((d[0].2 + 0.2).abs() < 1e-12);
    assert_eq!((d[1].0.as_str(), d[1].1.as_str()), ("c", "b"));
    assert!((d[1].2 + 0.2).abs() < 1e-12);
}
