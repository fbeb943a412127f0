use num_rational::Ratio;

use netrand::enumerate::{enumerate_graphs, exact_pvalue, DEFAULT_NODE_CAP};
use netrand::graph::{parse_edge_list, DegreeSequence, Graph};
use netrand::inference::{
    estimate_cardinality, evaluate_draws, reference_distribution, report_from_reference, weighted_critical_value,
    weighted_histogram, weighted_pvalue, Comparison, ImportanceWeights,
};
use netrand::sampler::sample_batch;
use netrand::stats::StatisticId;

fn ds(v: &[usize]) -> DegreeSequence {
    DegreeSequence::new(v.to_vec())
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

// Classes with several members and uneven sampling probabilities.
const CLASSES: &[&[usize]] = &[
    &[3, 3, 2, 2, 2],
    &[3, 2, 2, 2, 1],
    &[4, 3, 3, 2, 2, 2],
    &[2, 2, 2, 2, 2, 2],
    &[3, 3, 3, 3, 2, 2, 2],
    &[4, 4, 3, 3, 2, 2, 1, 1],
];

#[test]
fn cardinality_matches_enumeration() {
    for (k, &d) in CLASSES.iter().enumerate() {
        let d = ds(d);
        let exact = enumerate_graphs(&d, DEFAULT_NODE_CAP).unwrap().len() as f64;
        let draws = sample_batch(&d, 8000, 100 + k as u64).unwrap();
        let est = estimate_cardinality(&draws).unwrap();
        assert!(
            // The allowance covers classes where every draw has the same
            // weight and the standard error is exactly zero.
            (est.value() - exact).abs() <= 4.0 * est.std_error() + 1e-9 * exact,
            "{d}: {} vs {exact} (se {})",
            est.value(),
            est.std_error()
        );
    }
}

#[test]
fn pvalues_match_enumeration() {
    let stats = [
        StatisticId::TriangleCount,
        StatisticId::TwoStarCount,
        StatisticId::TransitivityIndex,
        StatisticId::Diameter,
        StatisticId::MeanDistance,
    ];
    for (k, &d) in CLASSES.iter().enumerate() {
        let d = ds(d);
        let class = enumerate_graphs(&d, DEFAULT_NODE_CAP).unwrap();
        let draws = sample_batch(&d, 8000, 200 + k as u64).unwrap();
        let weights = ImportanceWeights::from_draws(&draws);
        for stat in stats {
            let f = |g: &Graph| stat.evaluate(g, None).unwrap().value;
            let (values, _) = evaluate_draws(&draws, stat, None).unwrap();
            // Observed value taken from a class member, as it would be in practice.
            let observed = f(&class[class.len() / 2]);
            for cmp in [Comparison::AtLeast, Comparison::Greater] {
                let exact = ratio_f64(exact_pvalue(&d, f, observed, cmp).unwrap());
                let est = weighted_pvalue(&values, &weights, observed, cmp);
                assert!(
                    (est.estimate - exact).abs() <= 4.0 * est.std_error + 1e-12,
                    "{d} {stat} {cmp:?}: {} vs {exact}",
                    est.estimate
                );
            }
        }
    }
}

#[test]
fn rescaled_weights_give_the_same_answers() {
    let d = ds(&[4, 4, 3, 3, 3, 3, 2, 2, 2, 2, 1, 1]);
    let draws = sample_batch(&d, 3000, 5).unwrap();
    let (values, _) = evaluate_draws(&draws, StatisticId::TransitivityIndex, None).unwrap();
    let logs: Vec<f64> = draws.iter().map(|x| x.log_weight()).collect();
    let base = ImportanceWeights::from_log(logs.clone());
    for shift in [690.0, -690.0, 1e4] {
        let moved = ImportanceWeights::from_log(logs.iter().map(|l| l + shift).collect());
        for &obs in &[values[0], values[17], 0.3] {
            for cmp in [Comparison::AtLeast, Comparison::Greater] {
                let a = weighted_pvalue(&values, &base, obs, cmp).estimate;
                let b = weighted_pvalue(&values, &moved, obs, cmp).estimate;
                assert!((a - b).abs() < 1e-12, "shift {shift}: {a} vs {b}");
            }
        }
        let a = weighted_critical_value(&values, &base, 0.05).unwrap();
        let b = weighted_critical_value(&values, &moved, 0.05).unwrap();
        assert_eq!(a.c_alpha, b.c_alpha);
        assert!((a.g_alpha - b.g_alpha).abs() < 1e-9);
        let ha = weighted_histogram(&values, &base);
        let hb = weighted_histogram(&values, &moved);
        assert_eq!(ha.edges, hb.edges);
        for (x, y) in ha.masses.iter().zip(&hb.masses) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let d = ds(&[5, 4, 4, 3, 3, 3, 2, 2, 2, 1, 1]);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_batch(&d, 200, 77).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn report_from_parsed_network() {
    let text = "# a small village\nh1 h2\nh2 h3\nh3 h1\nh3 h4\nh4 h5\nh5 h6\nh6 h4\nh6 h7\nh7 h1\nh2 h1\n";
    let parsed = parse_edge_list(text).unwrap();
    assert_eq!(parsed.duplicate_edges, 1);
    let g = parsed.graph;
    let reference = reference_distribution(&g, StatisticId::TriangleCount, 1500, 3).unwrap();
    let report = report_from_reference(&reference, StatisticId::TriangleCount, 0.05, 3);
    assert_eq!(report.observed, 2.0);
    assert_eq!(report.draws, 1500);
    assert!(report.p_value_gt <= report.p_value_geq);
    assert!((report.histogram.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let exact = enumerate_graphs(&g.degree_sequence(), DEFAULT_NODE_CAP).unwrap().len() as f64;
    assert!((report.log_cardinality.exp() - exact).abs() / exact < 0.1);
    for draw in &reference.draws {
        assert_eq!(draw.graph.degree_sequence(), g.degree_sequence());
    }
}

#[test]
fn edge_list_round_trip_keeps_isolated_nodes() {
    let g = Graph::from_edges(7, [(0, 3), (3, 5), (5, 0), (1, 5)]).unwrap();
    let back = parse_edge_list(&g.to_edge_list()).unwrap().graph;
    assert_eq!(back, g);
    assert_eq!(back.degree_sequence().to_vec(), vec![2, 1, 0, 2, 0, 3, 0]);
}
