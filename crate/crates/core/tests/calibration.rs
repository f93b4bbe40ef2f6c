//! The 2-/3-Estimates polarity constants are fixed by calibration on the
//! optimistic scenario, where every method should find nearly all truths.

use truthdisc::agreement::{EstimatesParams, Polarity};
use truthdisc::generator::{
    generate_scenario, Conflict, Coverage, ScenarioConfig, TruthDistribution,
};
use truthdisc::{compute_metrics, Algorithm, AlgorithmId, IndexedDataset, MetricScope};

fn flipped(p: Polarity) -> Polarity {
    match p {
        Polarity::Argmax => Polarity::Argmin,
        Polarity::Argmin => Polarity::Argmax,
    }
}

#[test]
fn calibrated_polarity_wins_on_optimistic_data() {
    let cfg = ScenarioConfig {
        n_sources: 50,
        n_items: 300,
        cov: Coverage::E,
        conf: Conflict::E,
        gt: TruthDistribution::U75,
        max_distinct: 20,
        seed: 4,
    };
    let sc = generate_scenario(&cfg).unwrap();
    let ds = IndexedDataset::new(sc.claims).unwrap();
    let precision = |alg: &Algorithm| {
        let out = alg.run(&ds).unwrap();
        compute_metrics(
            &out.selection,
            &sc.ground_truth,
            &ds,
            MetricScope::GoldStandard,
        )
        .unwrap()
        .precision
        .unwrap()
    };
    for id in [AlgorithmId::TwoEstimates, AlgorithmId::ThreeEstimates] {
        let alg = id.default_algorithm();
        let (Algorithm::TwoEstimates(p) | Algorithm::ThreeEstimates(p)) = &alg else {
            unreachable!()
        };
        let other = EstimatesParams {
            polarity: flipped(p.polarity),
            ..p.clone()
        };
        let other = match id {
            AlgorithmId::TwoEstimates => Algorithm::TwoEstimates(other),
            _ => Algorithm::ThreeEstimates(other),
        };
        let (good, bad) = (precision(&alg), precision(&other));
        assert!(good >= 0.95, "{id}: {good}");
        assert!(bad <= 0.2, "{id} flipped: {bad}");
    }
    assert_eq!(EstimatesParams::two().polarity, Polarity::Argmin);
    assert_eq!(EstimatesParams::three().polarity, Polarity::Argmax);
}
