//! Cross-module properties over small random datasets.

use proptest::prelude::*;
use truthdisc::harness::{reformat::relation, reformat_for_mle};
use truthdisc::{
    compute_metrics, select_true_values, Algorithm, AlgorithmId, Claim, GroundTruth,
    IndexedDataset, MetricScope, SelectionMode, TrustState,
};

/// Sources × items grid; each cell is either silent or one value out of four.
fn arb_claims() -> impl Strategy<Value = Vec<Claim>> {
    (1usize..6, 1usize..6)
        .prop_flat_map(|(ns, nd)| {
            prop::collection::vec(prop::option::weighted(0.7, 0u8..4), ns * nd)
                .prop_map(move |cells| (nd, cells))
        })
        .prop_map(|(nd, cells)| {
            let mut claims: Vec<Claim> = cells
                .iter()
                .enumerate()
                .filter_map(|(i, v)| {
                    v.map(|v| {
                        Claim::new(
                            format!("c{i}"),
                            format!("s{}", i / nd),
                            format!("d{}", i % nd),
                            format!("x{v}"),
                        )
                    })
                })
                .collect();
            if claims.is_empty() {
                claims.push(Claim::new("c0", "s0", "d0", "x0"));
            }
            claims
        })
}

fn truth_for(ds: &IndexedDataset) -> GroundTruth {
    (0..ds.n_items())
        .map(|d| {
            (
                ds.item_name(d).to_string(),
                ds.value_str(ds.item_values(d).start).to_string(),
            )
        })
        .collect()
}

fn run(id: AlgorithmId, ds: &IndexedDataset) -> truthdisc::Outcome {
    let mut alg = id.default_algorithm();
    if let Algorithm::Ltm(p) = &mut alg {
        p.k = 60;
        p.burnin = 10;
        p.thin = 5;
    }
    alg.run(ds).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reindexing_is_identity(claims in arb_claims()) {
        let ds = IndexedDataset::new(claims).unwrap();
        let again = IndexedDataset::new(ds.claims().to_vec()).unwrap();
        prop_assert_eq!(ds, again);
    }

    #[test]
    fn support_sums_to_item_sources(claims in arb_claims()) {
        let ds = IndexedDataset::new(claims).unwrap();
        prop_assert!(ds.is_single_claim_per_source());
        for d in 0..ds.n_items() {
            let total: usize = ds.item_values(d).map(|v| ds.supporters(v).len()).sum();
            prop_assert_eq!(total, ds.item_sources(d).len());
        }
    }

    #[test]
    fn metric_counts_cover_every_label(claims in arb_claims()) {
        let ds = IndexedDataset::new(claims).unwrap();
        let truth = truth_for(&ds);
        let out = run(AlgorithmId::Cosine, &ds);
        let m = compute_metrics(&out.selection, &truth, &ds, MetricScope::GoldStandard).unwrap();
        prop_assert_eq!(m.tp + m.fp + m.fn_ + m.tn, ds.n_values() as u64);
    }

    #[test]
    fn argmax_ignores_monotone_transforms(claims in arb_claims(), scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let ds = IndexedDataset::new(claims).unwrap();
        let out = run(AlgorithmId::TruthFinder, &ds);
        let conf = &out.state.value_confidence;
        let moved = TrustState::new(
            out.state.source_trust.clone(),
            conf.iter().map(|c| (scale * c + shift).exp()).collect(),
            0,
        );
        let a = select_true_values(&out.state, &ds, SelectionMode::Argmax);
        let b = select_true_values(&moved, &ds, SelectionMode::Argmax);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn score_ranges_and_termination(claims in arb_claims()) {
        let ds = IndexedDataset::new(claims).unwrap();
        for id in AlgorithmId::ALL {
            let out = run(id, &ds);
            prop_assert!(out.iterations <= 500, "{id}");
            prop_assert!(out.state.is_finite(), "{id}");
            let (t, c) = (&out.state.source_trust, &out.state.value_confidence);
            let within = |xs: &[f64], lo: f64, hi: f64| xs.iter().all(|x| (lo..=hi).contains(x));
            match id {
                AlgorithmId::TruthFinder => {
                    prop_assert!(c.iter().all(|&x| x > 0.0 && x < 1.0));
                    prop_assert!(within(t, 0.0, 1.0));
                }
                AlgorithmId::Cosine => {
                    prop_assert!(within(t, -1.0 - 1e-12, 1.0 + 1e-12));
                    prop_assert!(within(c, -1.0 - 1e-12, 1.0 + 1e-12));
                }
                AlgorithmId::Depen | AlgorithmId::Accu | AlgorithmId::AccuSim | AlgorithmId::AccuNoDep => {
                    prop_assert!(t.iter().all(|&x| x > 0.0 && x <= 1.0), "{id} {t:?}");
                }
                AlgorithmId::SimpleLca | AlgorithmId::GuessLca => {
                    prop_assert!(within(t, 0.0, 1.0));
                    for d in 0..ds.n_items() {
                        let sum: f64 = ds.item_values(d).map(|v| c[v]).sum();
                        prop_assert!((sum - 1.0).abs() < 1e-9);
                    }
                }
                _ => {
                    prop_assert!(within(t, 0.0, 1.0), "{id} {t:?}");
                    prop_assert!(within(c, 0.0, 1.0), "{id} {c:?}");
                }
            }
            if !matches!(id, AlgorithmId::Ltm | AlgorithmId::Mle) {
                for d in 0..ds.n_items() {
                    prop_assert_eq!(out.selection.values(d).len(), 1);
                }
            }
        }
    }

    #[test]
    fn mle_rewrite_keeps_relation(claims in arb_claims()) {
        let rewritten = reformat_for_mle(&claims);
        let back: Vec<Claim> = rewritten
            .iter()
            .map(|c| {
                let (item, value) = c.data_item_id.rsplit_once(':').unwrap();
                Claim::new(&c.claim_id, &c.source_id, item, value)
            })
            .collect();
        prop_assert_eq!(relation(&back), relation(&claims));
        prop_assert_eq!(reformat_for_mle(&rewritten), rewritten);
    }
}
