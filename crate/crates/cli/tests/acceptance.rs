//! Acceptance suite. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use pseudoref::centrality::PseudoReferenceSelection;
use pseudoref::embedding_io::TokenFilter;
use pseudoref::meta_eval::{
    correlate, kendall_tau_b, pearson, spearman, KendallVariant, Protocol, RatingsTable,
};
use pseudoref::redundancy::redundancy_score;
use pseudoref::relevance::{
    beta_square, combine_weights, f_measure, score_pair, weighted_match, CentralityWeights, FMode,
    HybridRep, RelevanceConfig,
};
use pseudoref::{final_score, ScoreConfig, Scorer};

use common::*;

// Oracles. Written from the definitions, sharing no code with the library.

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn naive_match(r: &[Vec<f64>], a: &[f64], x: &[Vec<f64>]) -> (f64, f64) {
    let mut recall = 0.0;
    for i in 0..r.len() {
        let mut best = f64::NEG_INFINITY;
        for xj in x {
            best = best.max(cos(&r[i], xj));
        }
        recall += a[i] * best;
    }
    recall /= a.iter().sum::<f64>();
    let mut precision = 0.0;
    for xj in x {
        let mut best = f64::NEG_INFINITY;
        for ri in r {
            best = best.max(cos(ri, xj));
        }
        precision += best;
    }
    (recall, precision / x.len() as f64)
}

fn oracle_beta_sq(r: usize, x: usize, gamma: u32) -> f64 {
    if r <= x {
        1.0
    } else if r >= x * 2usize.pow(gamma) {
        2.0
    } else {
        (r as f64 / x as f64).powf(1.0 / gamma as f64)
    }
}

fn masked_best(x: &[Vec<f64>], i: usize) -> f64 {
    (0..x.len())
        .filter(|&j| j != i)
        .map(|j| cos(&x[j], &x[i]))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Precision-, recall- and F1-form of the self-masked matching.
fn redundancy_forms(x: &[Vec<f64>]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let precision = (0..x.len()).map(|j| masked_best(x, j)).sum::<f64>() / n;
    let recall = (0..x.len())
        .map(|i| {
            (0..x.len())
                .filter(|&j| j != i)
                .map(|j| cos(&x[i], &x[j]))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / n;
    let f1 = 2.0 * precision * recall / (precision + recall);
    (precision, recall, f1)
}

fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn brute_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&a| {
            let below = x.iter().filter(|&&b| b < a).count() as f64;
            let equal = x.iter().filter(|&&b| b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn brute_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let (mut concordant, mut discordant, mut ties_x, mut ties_y) = (0i64, 0i64, 0i64, 0i64);
    let n = x.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                ties_x += 1;
            }
            if dy == 0.0 {
                ties_y += 1;
            }
            if dx * dy > 0.0 {
                concordant += 1;
            } else if dx * dy < 0.0 {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    (concordant - discordant) as f64 / (((n0 - ties_x) * (n0 - ties_y)) as f64).sqrt()
}

fn permutations(n: usize) -> Vec<Vec<f64>> {
    fn go(prefix: &mut Vec<f64>, rest: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..rest.len() {
            let v = rest.remove(k);
            prefix.push(v);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(k, v);
        }
    }
    let mut out = Vec::new();
    go(
        &mut Vec::new(),
        &mut (1..=n).map(|v| v as f64).collect(),
        &mut out,
    );
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn random_elements(rng: &mut impl Rng, dim: usize, max: usize) -> Vec<Vec<f64>> {
    let n = rng.random_range(1..=max);
    (0..n).map(|_| random_vector(rng, dim)).collect()
}

// Criteria.

fn weighted_match_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let dim = rng.random_range(1..=8);
        let r = random_elements(&mut rng, dim, 20);
        let x = random_elements(&mut rng, dim, 20);
        let a: Vec<f64> = (0..r.len()).map(|_| rng.random_range(0.01..1.0)).collect();
        let lib = weighted_match(
            &HybridRep::from_elements(r.clone()).unwrap(),
            &a,
            &HybridRep::from_elements(x.clone()).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        let oracle = naive_match(&r, &a, &x);
        worst = worst
            .max((lib.0 - oracle.0).abs())
            .max((lib.1 - oracle.1).abs());
    }
    let elapsed = start.elapsed();
    if worst > 1e-9 {
        return Err(format!("max deviation {worst:e} > 1e-9"));
    }
    if elapsed >= Duration::from_secs(5) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "200 instances, max deviation {worst:e}, {elapsed:?}"
    ))
}

fn beta_square_grid() -> Result<String, String> {
    let start = Instant::now();
    let mut boundaries = 0;
    for gamma in 1..=3u32 {
        for r in 1..=100usize {
            for x in 1..=100usize {
                let got = beta_square(r, x, gamma);
                let want = oracle_beta_sq(r, x, gamma);
                if !(1.0..=2.0).contains(&got) || !close(got, want, 1e-12) {
                    return Err(format!("({r}, {x}, {gamma}): got {got}, oracle {want}"));
                }
                let exact_one = r == x;
                let exact_two = r == x * 2usize.pow(gamma);
                if exact_one || exact_two {
                    boundaries += 1;
                    let expected = if exact_one { 1.0 } else { 2.0 };
                    if got != expected {
                        return Err(format!("boundary ({r}, {x}, {gamma}) gave {got}"));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "30000 cells, {boundaries} exact boundaries, {elapsed:?}"
    ))
}

fn f_measure_identities() -> Result<String, String> {
    let mut rng = rng(23);
    for _ in 0..1000 {
        let p: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(1.0..=2.0);
        let f = f_measure(p, p, b);
        if !close(f, p, 1e-12) {
            return Err(format!("f_measure({p}, {p}, {b}) = {f}"));
        }
    }
    let f1 = RelevanceConfig::default();
    let fbeta = RelevanceConfig {
        f_mode: FMode::FBeta,
        ..f1
    };
    for _ in 0..200 {
        let dim = rng.random_range(1..=8);
        let x = random_elements(&mut rng, dim, 20);
        let n = rng.random_range(1..=x.len());
        let r: Vec<Vec<f64>> = (0..n).map(|_| random_vector(&mut rng, dim)).collect();
        let reference = HybridRep::from_elements(r).unwrap();
        let summary = HybridRep::from_elements(x).unwrap();
        let weights = CentralityWeights::uniform(reference.len());
        let a = score_pair(&reference, &weights, &summary, &f1).unwrap().f;
        let b = score_pair(&reference, &weights, &summary, &fbeta)
            .unwrap()
            .f;
        if !close(a, b, 1e-12) {
            return Err(format!("|R| <= |X| but F1 {a} != Fbeta {b}"));
        }
    }
    for _ in 0..1000 {
        let rel: f64 = rng.random_range(-1.0..1.0);
        let red: f64 = rng.random_range(-1.0..1.0);
        let lambda: f64 = rng.random_range(0.01..=1.0);
        let d: f64 = rng.random_range(1e-6..0.5);
        let base = final_score(rel, red, lambda).unwrap();
        if final_score(rel + d, red, lambda).unwrap() <= base {
            return Err(format!("not increasing in rel at ({rel}, {red}, {lambda})"));
        }
        if final_score(rel, red + d, lambda).unwrap() >= base {
            return Err(format!("not decreasing in red at ({rel}, {red}, {lambda})"));
        }
    }
    Ok("1000 identity draws, 200 F1/Fbeta pairs, 1000 monotonicity triples".into())
}

fn redundancy_suite() -> Result<String, String> {
    let pair = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let masked = redundancy_score(&HybridRep::from_elements(pair.clone()).unwrap());
    let unmasked: f64 = (0..2)
        .map(|i| {
            (0..2)
                .map(|j| cos(&pair[i], &pair[j]))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / 2.0;
    if masked != 0.0 || unmasked != 1.0 {
        return Err(format!(
            "orthogonal pair: masked {masked}, unmasked {unmasked}"
        ));
    }

    let mut rng = rng(37);
    for _ in 0..100 {
        let dim = rng.random_range(1..=8);
        let n = rng.random_range(2..=20);
        let x: Vec<Vec<f64>> = (0..n).map(|_| random_vector(&mut rng, dim)).collect();
        let (p, r, f) = redundancy_forms(&x);
        let lib = redundancy_score(&HybridRep::from_elements(x).unwrap());
        if !close(p, r, 1e-12) || !close(p, f, 1e-12) || !close(p, lib, 1e-12) {
            return Err(format!("forms disagree: p={p} r={r} f1={f} lib={lib}"));
        }
    }
    for _ in 0..100 {
        let dim = rng.random_range(1..=8);
        let mut x = random_elements(&mut rng, dim, 20);
        let before = redundancy_score(&HybridRep::from_elements(x.clone()).unwrap());
        let k = rng.random_range(0..x.len());
        x.push(x[k].clone());
        let after = redundancy_score(&HybridRep::from_elements(x).unwrap());
        if after < before {
            return Err(format!("duplicate lowered redundancy {before} -> {after}"));
        }
    }
    Ok("mask check, 100 three-form instances, 100 duplication instances".into())
}

fn weight_normalization() -> Result<String, String> {
    let selection = PseudoReferenceSelection {
        selected_indices: vec![0, 1],
        normalized_centrality: vec![1.0, 0.5],
    };
    let v = vec![1.0, 0.0];
    let reference = HybridRep::from_parts(
        vec![v.clone(), v.clone(), v.clone()],
        vec![0, 0, 1],
        vec![v.clone(), v],
    )
    .unwrap();
    let w = combine_weights(&selection, &reference, true).map_err(|e| e.to_string())?;
    let expected = [0.25, 0.25, 0.125, 0.25, 0.125];
    let sum: f64 = w.combined.iter().sum();
    if !close(sum, 1.0, 1e-9) {
        return Err(format!("weights sum to {sum}"));
    }
    if w.combined.len() != 5
        || w.combined
            .iter()
            .zip(expected)
            .any(|(a, b)| !close(*a, b, 1e-12))
    {
        return Err(format!("combined {:?}", w.combined));
    }

    let mut rng = rng(41);
    for _ in 0..100 {
        let m = rng.random_range(1..=12);
        let mut scores: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        scores[0] = 1.0;
        let counts: Vec<usize> = (0..m).map(|_| rng.random_range(0..5)).collect();
        let index: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| vec![s; c])
            .collect();
        let reference =
            HybridRep::from_parts(vec![vec![1.0]; index.len()], index, vec![vec![1.0]; m]).unwrap();
        let selection = PseudoReferenceSelection {
            selected_indices: (0..m).collect(),
            normalized_centrality: scores,
        };
        let sum: f64 = combine_weights(&selection, &reference, true)
            .map_err(|e| e.to_string())?
            .combined
            .iter()
            .sum();
        if !close(sum, 1.0, 1e-9) {
            return Err(format!("random weights sum to {sum}"));
        }
    }
    Ok("fixture [0.25, 0.25, 0.125, 0.25, 0.125] and 100 random sums".into())
}

fn scale_invariance() -> Result<String, String> {
    let bundle = random_bundle(53, 12, 6);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for (config, filter) in [
        (ScoreConfig::default(), TokenFilter::default()),
        (
            ScoreConfig {
                relevance: RelevanceConfig {
                    f_mode: FMode::FBeta,
                    ..Default::default()
                },
                top_m: 3,
                ..Default::default()
            },
            TokenFilter::default(),
        ),
    ] {
        let scorer = Scorer::new(config, filter).unwrap();
        let base = scorer.evaluate_bundle(&bundle);
        for c in [1e-3, 0.37, 7.5, 1e3] {
            let scaled = scorer.evaluate_bundle(&scale_bundle(&bundle, c));
            if scaled.reports.len() != base.reports.len() || scaled.invalid != base.invalid {
                return Err(format!("scale {c} changed which summaries were scored"));
            }
            for (a, b) in base.reports.iter().zip(&scaled.reports) {
                worst = worst
                    .max((a.final_score - b.final_score).abs())
                    .max((a.relevance - b.relevance).abs())
                    .max((a.redundancy - b.redundancy).abs());
                compared += 1;
            }
        }
    }
    if worst > 1e-12 {
        return Err(format!("max deviation {worst:e}"));
    }
    Ok(format!(
        "{compared} scaled reports, max deviation {worst:e}"
    ))
}

fn correlation_oracle() -> Result<String, String> {
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    let mut check = |x: &[f64], y: &[f64]| -> Result<(), String> {
        let want = [
            brute_pearson(x, y),
            brute_pearson(&brute_ranks(x), &brute_ranks(y)),
            brute_tau_b(x, y),
        ];
        let got = [
            pearson(x, y).map_err(|e| format!("{x:?} {y:?}: {e}"))?,
            spearman(x, y).map_err(|e| format!("{x:?} {y:?}: {e}"))?,
            kendall_tau_b(x, y).map_err(|e| format!("{x:?} {y:?}: {e}"))?,
        ];
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
            if !close(*g, w, 1e-12) {
                return Err(format!("{x:?} vs {y:?}: got {got:?}, oracle {want:?}"));
            }
        }
        checked += 1;
        Ok(())
    };
    for n in 2..=6 {
        let perms = permutations(n);
        for x in &perms {
            for y in &perms {
                check(x, y)?;
            }
        }
    }
    let mut rng = rng(67);
    let mut tied = 0;
    while tied < 100 {
        let n = rng.random_range(3..=12);
        let levels = rng.random_range(2..=4);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let mut y: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        y.shuffle(&mut rng);
        let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
        if constant(&x) || constant(&y) {
            continue;
        }
        check(&x, &y)?;
        tied += 1;
    }
    let fixture = kendall_tau_b(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
    let expected = 5.0 / 30f64.sqrt();
    if !close(fixture, expected, 1e-12) {
        return Err(format!("tied fixture {fixture} != 5/sqrt(30)"));
    }
    Ok(format!(
        "{checked} input pairs, max deviation {worst:e}, 5/sqrt(30) fixture"
    ))
}

fn protocol_fixture() -> Result<String, String> {
    let scorer = Scorer::new(ScoreConfig::default(), TokenFilter::default()).unwrap();
    let scores = scorer.evaluate_bundle(&protocol_bundle());
    if scores.reports.len() != 12 {
        return Err(format!("{} summaries scored", scores.reports.len()));
    }
    let ratings =
        RatingsTable::from_csv(protocol_ratings_csv().as_bytes()).map_err(|e| e.to_string())?;

    // Per topic (scores are cosines 1, .8, .6, 0 up to an increasing affine map):
    // t1 r = 4*sqrt(70)/35, rho = 1, tau = 1
    // t2 r = 2*sqrt(70)/35, rho = 3/5, tau = 1/3
    // t3 r = -sqrt(102)/17, rho = -1/2, tau = -2/5
    let topic = [
        2.0 * 70f64.sqrt() / 35.0 - 102f64.sqrt() / 51.0,
        11.0 / 30.0,
        14.0 / 45.0,
    ];
    // All twelve pairs together.
    let pooled = [28.0 * 18658f64.sqrt() / 9329.0, 275.0 / 534.0, 22.0 / 53.0];

    let mut lines = Vec::new();
    for (protocol, expected) in [
        (Protocol::PerTopicAverage, topic),
        (Protocol::Pooled, pooled),
    ] {
        let report = correlate(
            &scores.reports,
            &ratings,
            protocol,
            "overall",
            KendallVariant::TauB,
        )
        .map_err(|e| e.to_string())?;
        let got = [report.pearson_r, report.spearman_rho, report.kendall_tau];
        for (g, w) in got.iter().zip(expected) {
            match g {
                Some(g) if close(*g, w, 1e-12) => {}
                _ => {
                    return Err(format!(
                        "{}: got {got:?}, expected {expected:?}",
                        protocol.label()
                    ))
                }
            }
        }
        lines.push(format!(
            "{} r={:.6} rho={:.6} tau={:.6}",
            protocol.label(),
            expected[0],
            expected[1],
            expected[2]
        ));
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bundle = dir.path().join("protocol.json");
    let ratings_path = dir.path().join("ratings.csv");
    write_json_bundle(&protocol_bundle(), &bundle);
    std::fs::write(&ratings_path, protocol_ratings_csv()).map_err(|e| e.to_string())?;
    let (code, out, err) = run_cli(&[
        "benchmark",
        "--bundle",
        bundle.to_str().unwrap(),
        "--ratings",
        ratings_path.to_str().unwrap(),
        "--protocol",
        "pooled",
    ]);
    if code != 0 {
        return Err(format!("benchmark exited {code}: {err}"));
    }
    let row = out
        .lines()
        .find(|l| l.starts_with("pooled,overall,"))
        .ok_or_else(|| format!("no pooled row in {out}"))?;
    let expected_row = format!(
        "pooled,overall,{:.6},{:.6},{:.6},tau-b,3,12,",
        pooled[0], pooled[1], pooled[2]
    );
    if row != expected_row {
        return Err(format!("CLI row {row:?}, expected {expected_row:?}"));
    }
    Ok(lines.join("; "))
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bundle = dir.path().join("bundle.json");
    write_json_bundle(&random_bundle(71, 40, 8), &bundle);
    let mut checked = Vec::new();
    for format in ["csv", "json"] {
        let mut outputs = Vec::new();
        for jobs in ["1", "8"] {
            let out = dir.path().join(format!("scores-{jobs}.{format}"));
            let (code, _, err) = run_cli(&[
                "score",
                "--bundle",
                bundle.to_str().unwrap(),
                "--format",
                format,
                "--jobs",
                jobs,
                "--out",
                out.to_str().unwrap(),
            ]);
            if code != 0 {
                return Err(format!("score --jobs {jobs} exited {code}: {err}"));
            }
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] {
            return Err(format!(
                "{format} reports differ between --jobs 1 and --jobs 8"
            ));
        }
        checked.push(format!("{format} {} bytes", outputs[0].len()));
    }
    Ok(checked.join(", "))
}

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("weighted_match oracle equivalence", weighted_match_oracle),
        ("beta_square clamp grid", beta_square_grid),
        (
            "F-measure identities and final_score monotonicity",
            f_measure_identities,
        ),
        ("redundancy suite", redundancy_suite),
        ("centrality weight normalization", weight_normalization),
        ("end-to-end scale invariance", scale_invariance),
        ("correlation brute-force oracle", correlation_oracle),
        ("protocol fixture", protocol_fixture),
        ("determinism across --jobs", determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
