//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The empirical-network criterion needs an edge list that is not shipped
//! with the crate. Point `NETRAND_NYAKATOKE` at it (or place it at
//! `data/nyakatoke.edges` in the workspace root) to run it; otherwise it is
//! reported as SKIPPED.

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netrand::beta::{fit_mle, link_prob, HeterogeneityVector};
use netrand::enumerate::{enumerate_graphs, exact_critical_value, exact_distribution, exact_pvalue, DEFAULT_NODE_CAP};
use netrand::game::{
    draw_instance, find_pairwise_stable, is_pairwise_stable, FixedPointMode, GameConfig, ShockMatrix, SweepConfig,
};
use netrand::graph::{parse_edge_list, DegreeSequence, Graph};
use netrand::graphicality::is_graphical;
use netrand::inference::{
    estimate_cardinality, evaluate_draws, run_test, weighted_pvalue, Comparison, ImportanceWeights,
};
use netrand::sampler::sample_batch;
use netrand::stats::{
    density, optimal_stat, optimal_transitivity_by_triads, transitivity_index, ExternalityKind, StatisticId,
};

const SEED: u64 = 20_240_601;

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn small_classes() -> Vec<(DegreeSequence, u64)> {
    vec![
        (DegreeSequence::new(vec![1, 1]), 1),
        (DegreeSequence::new(vec![2, 2, 2]), 1),
        (DegreeSequence::new(vec![2, 2, 1, 1]), 2),
        (DegreeSequence::new(vec![3, 3, 3, 3, 3, 3]), 70),
    ]
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn oracle_cardinality() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for (d, expected) in small_classes() {
        let oracle = enumerate_graphs(&d, DEFAULT_NODE_CAP).unwrap().len() as u64;
        let draws = sample_batch(&d, 20_000, SEED).unwrap();
        let est = estimate_cardinality(&draws).unwrap();
        let (value, se) = (est.value(), est.std_error());
        // Rounding allowance for classes where every weight is equal and se = 0.
        let within = (value - oracle as f64).abs() <= 3.0 * se + 1e-9 * oracle as f64;
        ok &= oracle == expected && within;
        notes.push(format!("{d}: oracle {oracle}, estimate {value:.4} (se {se:.4})"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    notes.push(format!("{:.1}s", elapsed.as_secs_f64()));
    verdict(ok, notes.join("; "))
}

fn oracle_pvalues() -> Outcome {
    let stats = [
        StatisticId::TriangleCount,
        StatisticId::TwoStarCount,
        StatisticId::TransitivityIndex,
    ];
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (d, _) in small_classes() {
        let draws = sample_batch(&d, 20_000, SEED + 1).unwrap();
        let weights = ImportanceWeights::from_draws(&draws);
        for stat in stats {
            let (values, _) = evaluate_draws(&draws, stat, None).unwrap();
            let f = |g: &Graph| stat.evaluate(g, None).unwrap().value;
            let support: Vec<f64> = exact_distribution(&d, f).unwrap().into_iter().map(|(v, _)| v).collect();
            for &observed in &support {
                for cmp in [Comparison::AtLeast, Comparison::Greater] {
                    let exact = ratio_f64(exact_pvalue(&d, f, observed, cmp).unwrap());
                    let est = weighted_pvalue(&values, &weights, observed, cmp);
                    let gap = (est.estimate - exact).abs();
                    checked += 1;
                    if gap > 0.0 {
                        worst = worst.max(gap / est.std_error);
                    }
                    if gap > 3.0 * est.std_error {
                        failures.push(format!("{d} {stat} {cmp:?} {observed}: {:.5} vs {exact:.5}", est.estimate));
                    }
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!("{checked} comparisons, worst |gap|/se {worst:.2} {}", failures.join("; ")),
    )
}

fn sampler_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut sequences: Vec<DegreeSequence> = small_classes().into_iter().map(|(d, _)| d).collect();
    sequences.push(random_graph(&mut rng, 60, 0.1).degree_sequence());
    let per = 10_000 / sequences.len();
    let mut total = 0;
    let mut bad = 0;
    let mut errors = 0;
    for (k, d) in sequences.iter().enumerate() {
        match sample_batch(d, per, SEED + k as u64) {
            Ok(draws) => {
                for draw in &draws {
                    total += 1;
                    if &draw.graph.degree_sequence() != d || draw.graph.edge_count() * 2 != d.total() {
                        bad += 1;
                    }
                }
            }
            Err(_) => errors += 1,
        }
    }
    verdict(
        total == 10_000 && bad == 0 && errors == 0,
        format!("{total} draws over {} sequences, {bad} wrong sequences, {errors} dead ends", sequences.len()),
    )
}

fn realizable_sequences(n: usize) -> HashSet<Vec<usize>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let mut out = HashSet::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut d = vec![0; n];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                d[i] += 1;
                d[j] += 1;
            }
        }
        out.insert(d);
    }
    out
}

fn graphicality() -> Outcome {
    let mut checked = 0u64;
    let mut disagreements = Vec::new();
    for n in 0..=6usize {
        let realizable = realizable_sequences(n);
        let mut d = vec![0usize; n];
        loop {
            checked += 1;
            if is_graphical(&d) != realizable.contains(&d) {
                disagreements.push(format!("{d:?}"));
            }
            let Some(pos) = (0..n).find(|&k| d[k] < 5) else { break };
            for slot in d.iter_mut().take(pos) {
                *slot = 0;
            }
            d[pos] += 1;
        }
    }
    let known_cases = !is_graphical(&[3, 2, 1]) && !is_graphical(&[2, 2, 0, 0]) && is_graphical(&[2, 2, 1, 1]);
    verdict(
        disagreements.is_empty() && known_cases,
        format!(
            "{checked} vectors, {} disagreements; (3,2,1) and (2,2,0,0) rejected: {known_cases}",
            disagreements.len()
        ),
    )
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    Graph::from_edges(n, edges).unwrap()
}

fn beta_graph(rng: &mut ChaCha8Rng, a: &[f64]) -> Graph {
    let n = a.len();
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| rng.gen_bool(link_prob(a[i], a[j])))
        .collect();
    Graph::from_edges(n, edges).unwrap()
}

fn mle_moments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut failures = 0;
    let mut fitted = 0;
    while fitted < 50 {
        let n = rng.gen_range(20..=200);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..0.0)).collect();
        let g = beta_graph(&mut rng, &a);
        let d = g.degree_sequence();
        if d.iter().any(|&x| x == 0 || x + 1 >= n) {
            continue;
        }
        fitted += 1;
        match fit_mle(&d, 1e-10, 200_000) {
            Ok(fit) => {
                for (e, &di) in fit.a.expected_degrees().iter().zip(d.iter()) {
                    worst = worst.max((e - di as f64).abs());
                }
            }
            Err(_) => failures += 1,
        }
    }
    let mut regular_err = 0.0f64;
    for (n, k) in [(10usize, 3usize), (40, 7), (101, 50), (200, 150)] {
        let fit = fit_mle(&DegreeSequence::new(vec![k; n]), 1e-10, 10_000).unwrap();
        let q = k as f64 / (n - 1) as f64;
        let exact = 0.5 * (q / (1.0 - q)).ln();
        for &ai in fit.a.as_slice() {
            regular_err = regular_err.max((ai - exact).abs());
        }
    }
    verdict(
        failures == 0 && worst < 1e-8 && regular_err <= 1e-12,
        format!("50 graphs, {failures} fit failures, max degree error {worst:.2e}; regular max |a - exact| {regular_err:.2e}"),
    )
}

fn optimal_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(3..=60);
        let p_edge = rng.gen_range(0.02..0.6);
        let g = random_graph(&mut rng, n, p_edge);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.5..1.0)).collect();
        let p = HeterogeneityVector::new(a).link_probabilities();
        let pairwise = optimal_stat(&g, &p, ExternalityKind::Transitivity).unwrap();
        let triads = optimal_transitivity_by_triads(&g, &p).unwrap();
        worst = worst.max((pairwise - triads).abs());
    }
    verdict(worst <= 1e-9, format!("1000 graphs, max |difference| {worst:.2e}"))
}

fn two_point_beta() -> Outcome {
    let (pi, rho, n, reps) = (0.3f64, 0.6f64, 400, 20);
    let active = 0.5 * (rho / (1.0 - rho)).ln();
    let mut densities = Vec::new();
    let mut tis = Vec::new();
    for r in 0..reps {
        let mut rng = netrand::sampler::RngStream::new(SEED, r as u64).rng();
        let a: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(pi) { active } else { f64::NEG_INFINITY })
            .collect();
        let shocks = ShockMatrix::logistic(n, &mut rng);
        let cfg = GameConfig::new(
            HeterogeneityVector::new(a),
            0.0,
            ExternalityKind::Transitivity,
            shocks,
            FixedPointMode::Least,
        )
        .unwrap();
        let g = find_pairwise_stable(&cfg).unwrap();
        densities.push(density(&g).unwrap());
        tis.push(transitivity_index(&g).value);
    }
    let mean_se = |x: &[f64]| {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64;
        (m, (var / x.len() as f64).sqrt())
    };
    let (dm, dse) = mean_se(&densities);
    let (tm, tse) = mean_se(&tis);
    let target_density = pi * pi * rho;
    verdict(
        (dm - target_density).abs() <= 3.0 * dse && (tm - rho).abs() <= 3.0 * tse,
        format!("density {dm:.5} (se {dse:.5}, target {target_density:.3}); TI {tm:.5} (se {tse:.5}, target {rho})"),
    )
}

fn game_monotonicity() -> Outcome {
    let grid = [0.0, 0.25, 0.5, 1.0];
    let mut violations = Vec::new();
    for instance in 0..1000usize {
        let kind = if instance % 2 == 0 {
            ExternalityKind::Transitivity
        } else {
            ExternalityKind::Popularity
        };
        let sweep = SweepConfig {
            n: 20,
            gamma_grid: grid.to_vec(),
            kind,
            replications: 1,
            seed: SEED,
            a_mean: -1.5,
            a_sd: 0.5,
        };
        let (a, shocks) = draw_instance(&sweep, instance).unwrap();
        let mut previous: Option<Graph> = None;
        for gamma in grid {
            let least_cfg = GameConfig::new(a.clone(), gamma, kind, shocks.clone(), FixedPointMode::Least).unwrap();
            let least = find_pairwise_stable(&least_cfg).unwrap();
            let greatest = find_pairwise_stable(&least_cfg.with_mode(FixedPointMode::Greatest)).unwrap();
            if !least.is_subgraph_of(&greatest) {
                violations.push(format!("{instance} γ={gamma}: least ⊄ greatest"));
            }
            if !is_pairwise_stable(&least_cfg, &least) || !is_pairwise_stable(&least_cfg, &greatest) {
                violations.push(format!("{instance} γ={gamma}: unstable output"));
            }
            if let Some(prev) = &previous {
                if !prev.is_subgraph_of(&least) {
                    violations.push(format!("{instance} γ={gamma}: least shrank"));
                }
            }
            previous = Some(least);
        }
    }
    verdict(
        violations.is_empty(),
        format!("1000 instances x 4 gammas, {} violations {}", violations.len(), violations.join("; ")),
    )
}

fn similarity() -> Outcome {
    let alpha = Ratio::new(1u64, 20);
    let stats = [
        StatisticId::TriangleCount,
        StatisticId::TwoStarCount,
        StatisticId::TransitivityIndex,
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for d in [DegreeSequence::new(vec![2, 2, 1, 1]), DegreeSequence::new(vec![3; 6])] {
        let class = enumerate_graphs(&d, DEFAULT_NODE_CAP).unwrap();
        let size = class.len() as u64;
        for stat in stats {
            let f = |g: &Graph| stat.evaluate(g, None).unwrap().value;
            let dist = exact_distribution(&d, f).unwrap();
            let (c, g) = exact_critical_value(&dist, alpha);
            let mut reject = Ratio::from_integer(0u64);
            for member in &class {
                let t = f(member);
                if t > c {
                    reject += Ratio::new(1, size);
                } else if t == c {
                    reject += g * Ratio::new(1, size);
                }
            }
            ok &= reject == alpha;
            notes.push(format!("{d} {stat}: {reject}"));
        }
    }
    verdict(ok, notes.join("; "))
}

fn nyakatoke_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("NETRAND_NYAKATOKE") {
        return Some(PathBuf::from(p));
    }
    let local = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/nyakatoke.edges");
    local.exists().then_some(local)
}

fn nyakatoke() -> Outcome {
    let Some(path) = nyakatoke_path() else {
        return Outcome::Skipped("edge list not supplied (set NETRAND_NYAKATOKE)".into());
    };
    let start = Instant::now();
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return Outcome::Fail(format!("{}: {e}", path.display())),
    };
    let g = match parse_edge_list(&text) {
        Ok(parsed) => parsed.graph,
        Err(e) => return Outcome::Fail(format!("{}: {e}", path.display())),
    };
    let dens = density(&g).unwrap();
    let ti = transitivity_index(&g).value;
    let report = run_test(&g, StatisticId::TransitivityIndex, 5000, 0.05, SEED).unwrap();
    let draws = sample_batch(&g.degree_sequence(), 5000, SEED).unwrap();
    let (values, _) = evaluate_draws(&draws, StatisticId::TransitivityIndex, None).unwrap();
    let min_ti = values.iter().copied().fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    let ok = (dens - 0.0698).abs() <= 2e-4
        && (ti - 0.1884).abs() <= 2e-4
        && report.p_value_geq < 1e-3
        && min_ti > 0.0698
        && elapsed < Duration::from_secs(600);
    verdict(
        ok,
        format!(
            "n {}, density {dens:.4}, TI {ti:.4}, p {:.2e}, min reference TI {min_ti:.4}, {:.1}s",
            g.node_count(),
            report.p_value_geq,
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle cardinality", oracle_cardinality),
        ("oracle p-values", oracle_pvalues),
        ("sampler exactness", sampler_exactness),
        ("graphicality", graphicality),
        ("beta-model moment condition", mle_moments),
        ("optimal-statistic identity", optimal_identity),
        ("two-point beta-model", two_point_beta),
        ("game monotonicity", game_monotonicity),
        ("exact similarity", similarity),
        ("empirical network reproduction", nyakatoke),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Outcome::Pass(detail) => println!("PASS  {name}: {detail}"),
            Outcome::Fail(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
            Outcome::Skipped(detail) => println!("SKIP  {name}: {detail}"),
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
