//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_op, rel_err};
use quantum_torsion::bounds::{audit, equality_witnesses, BoundsReport, Status};
use quantum_torsion::random::{battery, random_graph, RandomGraphParams};
use quantum_torsion::shape_opt::{self, hadamard_density};
use quantum_torsion::spectral::{integrated_heat_content, landscape_check, lowest_eigenpairs, SpectralOptions};
use quantum_torsion::surgery::{apply, family_generator, family_zoo, predicted_direction, Direction, Family, SurgeryOp};
use quantum_torsion::torsion::{dirichlet_energy, rigidity_from_discrete, solve_discrete_torsion};
use quantum_torsion::{torsion_function, MetricGraph};

const EXACT_TOL: f64 = 1e-10;
const AC1_BUDGET: Duration = Duration::from_secs(1);
const AC2_BUDGET: Duration = Duration::from_secs(30);
const AC5_BUDGET: Duration = Duration::from_secs(20);
const SURGERY_TOL: f64 = 1e-9;
const RATIO_RANGE: (f64, f64) = (3.5, 4.5);
const WITNESS_TOL: f64 = 1e-6;
const BATTERY_SEED: u64 = 20_240_917;
const BATCH_SEGMENT_CAP: usize = 20_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn family(spec: &str, lengths: &[f64]) -> MetricGraph {
    family_generator(&spec.parse::<Family>().unwrap(), lengths).unwrap()
}

fn t(g: &MetricGraph) -> f64 {
    torsion_function(g).unwrap().rigidity
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Closed form for a natural centre with Dirichlet leaves and petal loops.
fn stower_oracle(leaves: &[f64], petals: &[f64]) -> f64 {
    let cubes: f64 = leaves.iter().chain(petals).map(|l| l * l * l).sum();
    let x: f64 = leaves.iter().sum::<f64>() + 2.0 * petals.iter().sum::<f64>();
    let inv: f64 = leaves.iter().map(|l| 1.0 / l).sum();
    cubes / 12.0 + x * x / (4.0 * inv)
}

fn ac1_closed_forms() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut note = |err: f64| worst = worst.max(err);
    for a in [0.25, 1.0, 2.7, 13.0] {
        note(rel_err(t(&family("path_DN", &[a])), a.powi(3) / 3.0));
        note(rel_err(t(&family("path_DD", &[a])), a.powi(3) / 12.0));
    }
    for k in [1usize, 2, 3, 5, 8] {
        for total in [1.0, 4.5] {
            let star = family(&format!("star:{k}"), &[total / k as f64]);
            note(rel_err(t(&star), total.powi(3) / (3.0 * (k * k) as f64)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (l1, l2) = (log_uniform(&mut rng, 0.1, 10.0), log_uniform(&mut rng, 0.1, 10.0));
        let oracle = (l1.powi(3) + l2.powi(3)) / 12.0 + (l1 + 2.0 * l2).powi(2) * l1 / 4.0;
        note(rel_err(t(&family("lasso", &[l1, l2])), oracle));
    }
    let mut variant_mismatches = 0;
    for _ in 0..20 {
        let (nl, np) = (rng.gen_range(1..=4usize), rng.gen_range(0..=3usize));
        let lengths: Vec<f64> = (0..nl + np).map(|_| log_uniform(&mut rng, 0.1, 10.0)).collect();
        let g = family(&format!("stower:{nl},{np}"), &lengths);
        note(rel_err(t(&g), stower_oracle(&lengths[..nl], &lengths[nl..])));

        let total = log_uniform(&mut rng, 0.5, 20.0);
        let equi = family(&format!("stower:{nl},{np}"), &[total / (nl + np) as f64]);
        let (e, l, p) = ((nl + np) as f64, nl as f64, np as f64);
        // the variant with (|E_l| + |E_p|)^2 disagrees with the general closed
        // form whenever there are petals
        let equilateral = total.powi(3) / (4.0 * e.powi(3)) * (e / 3.0 + (l + 2.0 * p).powi(2) / l);
        let variant = total.powi(3) / (4.0 * e.powi(3)) * (e / 3.0 + (l + p).powi(2) / l);
        note(rel_err(t(&equi), equilateral));
        if rel_err(t(&equi), variant) > EXACT_TOL {
            variant_mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= EXACT_TOL && elapsed < AC1_BUDGET,
        format!(
            "max rel err {worst:.2e} in {elapsed:.2?}; equilateral stower with (|E_l|+2|E_p|)^2, (|E_l|+|E_p|)^2 variant off in {variant_mismatches}/20"
        ),
        format!("max rel err {worst:.2e} (tol {EXACT_TOL:e}) in {elapsed:.2?}"),
    )
}

fn ac2_rigidity_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for g in battery(BATTERY_SEED, 500, &RandomGraphParams::default()) {
        let formula = rigidity_from_discrete(&g, &solve_discrete_torsion(&g).unwrap());
        let sol = torsion_function(&g).unwrap();
        let integral = sol.l1_norm();
        let energy = dirichlet_energy(&sol);
        worst = worst.max(rel_err(integral, formula)).max(rel_err(energy, formula));
    }
    let elapsed = start.elapsed();
    check(
        worst <= EXACT_TOL && elapsed < AC2_BUDGET,
        format!("500 graphs, max rel disagreement {worst:.2e} in {elapsed:.2?}"),
        format!("max rel disagreement {worst:.2e} in {elapsed:.2?}"),
    )
}

fn ac3_surgery_battery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(BATTERY_SEED ^ 3);
    let params = RandomGraphParams::default();
    let mut failures = Vec::new();
    let mut claims = 0;
    for i in 0..500 {
        let g = random_graph(&mut rng, &params);
        let op = random_op(&mut rng, &g);
        let direction = predicted_direction(&g, &op).unwrap();
        let (before, after) = (t(&g), t(&apply(&g, &op).unwrap()));
        if direction != Direction::Indeterminate {
            claims += 1;
        }
        if !direction.admits(before, after, SURGERY_TOL) {
            failures.push(format!("#{i} {}: {before} -> {after} ({direction:?})", op.description()));
        }
    }
    let mut scale_worst: f64 = 0.0;
    for g in battery(BATTERY_SEED ^ 33, 50, &params) {
        let c = log_uniform(&mut rng, 0.1, 10.0);
        let after = t(&apply(&g, &SurgeryOp::Scale { factor: c }).unwrap());
        scale_worst = scale_worst.max(rel_err(after, c.powi(3) * t(&g)));
    }
    check(
        failures.is_empty() && scale_worst <= SURGERY_TOL,
        format!("500 pairs consistent ({claims} with a directional claim); Scale max rel err {scale_worst:.2e}"),
        format!("{} inconsistent: {}; Scale max rel err {scale_worst:.2e}", failures.len(), failures.join("; ")),
    )
}

fn ac4_spectral_convergence() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, g, exact) in [
        ("J0", family("path_DN", &[1.0]), PI * PI / 4.0),
        ("J1", family("path_DD", &[1.0]), PI * PI),
    ] {
        let errs: Vec<f64> = [16.0, 32.0, 64.0]
            .iter()
            .map(|n| {
                let r = lowest_eigenpairs(&g, 1, &SpectralOptions::with_h(1.0 / n)).unwrap();
                rel_err(r.lambda1(), exact)
            })
            .collect();
        let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
        ok &= ratios.iter().all(|r| (RATIO_RANGE.0..=RATIO_RANGE.1).contains(r));
        details.push(format!("{name} ratios {:.3}, {:.3}", ratios[0], ratios[1]));
    }
    let star = lowest_eigenpairs(&family("star:3", &[1.0]), 1, &SpectralOptions::with_h(1.0 / 64.0)).unwrap();
    let err = rel_err(star.lambda1(), PI * PI / 4.0);
    ok &= err <= 1e-3;
    details.push(format!("3-star rel err {err:.2e}"));
    check(ok, details.join("; "), details.join("; "))
}

fn ac5_star_product_law() -> Outcome {
    let start = Instant::now();
    let h: f64 = 1.0 / 64.0;
    let tol = 2.0 * 10.0 * h * h;
    let mut worst: f64 = 0.0;
    for k in [1usize, 2, 3, 5] {
        let g = family(&format!("star:{k}"), &[1.0]);
        let lambda = lowest_eigenpairs(&g, 1, &SpectralOptions::with_h(h)).unwrap().lambda1();
        worst = worst.max(rel_err(lambda * t(&g), PI * PI * g.total_length() / 12.0));
    }
    let elapsed = start.elapsed();
    check(
        worst <= tol && elapsed < AC5_BUDGET,
        format!("max rel err {worst:.2e} (tol {tol:.2e}) in {elapsed:.2?}"),
        format!("max rel err {worst:.2e} (tol {tol:.2e}) in {elapsed:.2?}"),
    )
}

fn ac6_bounds_audit() -> Outcome {
    let opts = SpectralOptions { segment_cap: Some(BATCH_SEGMENT_CAP), ..SpectralOptions::default() };
    let mut violated = Vec::new();
    let mut errors = Vec::new();
    let mut strict_tight = Vec::new();
    let mut makai_violations = 0;
    for (i, g) in battery(BATTERY_SEED ^ 6, 500, &RandomGraphParams::default()).iter().enumerate() {
        let report: BoundsReport = audit(g, &opts);
        violated.extend(report.violations().map(|r| format!("#{i} {}", r.name)));
        errors.extend(report.errors().map(|r| format!("#{i} {}: {}", r.name, r.status)));
        for r in &report.records {
            let strict = matches!(r.relation, quantum_torsion::bounds::Relation::Lt);
            if strict && r.status != Status::NotApplicable && (r.relative_slack.is_nan() || r.relative_slack <= 1e-8) {
                strict_tight.push(format!("#{i} {}", r.name));
            }
        }
        makai_violations += report.experimental.iter().filter(|r| r.status == Status::Violated).count();
    }
    let mut witness_failures = Vec::new();
    for (name, g, record) in equality_witnesses() {
        let report = audit(&g, &SpectralOptions::with_h(g.min_length() / 64.0));
        let r = report.record(record).unwrap();
        let tol = if r.tolerance > quantum_torsion::bounds::EXACT_TOLERANCE {
            let h = report.h.unwrap();
            10.0 * h * h
        } else {
            WITNESS_TOL
        };
        if r.status != Status::EqualityCase || r.relative_slack.is_nan() || r.relative_slack.abs() > tol {
            witness_failures.push(format!("{name} {record}: {} slack {:.2e}", r.status, r.relative_slack));
        }
    }
    let all_fine = violated.is_empty() && errors.is_empty() && strict_tight.is_empty() && witness_failures.is_empty();
    check(
        all_fine,
        format!(
            "500 graphs, 0 violated, strict records slack > 1e-8; {} equality witnesses flagged; experimental Makai probe violated on {makai_violations}",
            equality_witnesses().len()
        ),
        format!(
            "violated: {violated:?}; errors: {errors:?}; strict records without slack: {strict_tight:?}; witnesses: {witness_failures:?}"
        ),
    )
}

fn ac7_hadamard() -> Outcome {
    let mut worst_ratio_dev: f64 = 0.0;
    let mut worst_point: f64 = 0.0;
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut edges = 0;
    for (name, g) in family_zoo() {
        let sol = torsion_function(&g).unwrap();
        for (e, edge) in g.edges().iter().enumerate() {
            edges += 1;
            let ratio = shape_opt::grad_check_order(&g, e, 1e-2 * edge.length).unwrap();
            worst_ratio_dev = worst_ratio_dev.max((ratio - 4.0).abs());
            if !(RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio) {
                failures.push(format!("{name} {}: ratio {ratio}", edge.id));
            }
            let d = shape_opt::dt_dlength_from(&sol, e).unwrap();
            for _ in 0..5 {
                let x = rng.gen_range(0.0..=edge.length);
                worst_point = worst_point.max(rel_err(hadamard_density(&sol, e, x), d));
            }
        }
    }
    check(
        failures.is_empty() && worst_point <= EXACT_TOL,
        format!("{edges} edges, FD halving ratio within 4 ± {worst_ratio_dev:.3}; point dependence {worst_point:.2e}"),
        format!("{failures:?}; point dependence {worst_point:.2e}"),
    )
}

fn ac8_heat_content() -> Outcome {
    let h: f64 = 1.0 / 64.0;
    let j1 = family("path_DD", &[1.0]);
    let heat = integrated_heat_content(&j1, 9, &SpectralOptions::with_h(h)).unwrap();
    let fraction = heat.partial_sums[8] * 12.0;
    let mut ok = fraction >= 0.999;
    let mut bad = Vec::new();
    let params = RandomGraphParams { max_vertices: 8, max_edges: 12, ..RandomGraphParams::default() };
    for (i, g) in battery(BATTERY_SEED ^ 8, 20, &params).iter().enumerate() {
        let opts = SpectralOptions { segment_cap: Some(BATCH_SEGMENT_CAP), ..SpectralOptions::default() };
        let heat = integrated_heat_content(g, 6, &opts).unwrap();
        let rigidity = t(g);
        let monotone = heat.partial_sums.windows(2).all(|w| w[1] >= w[0]);
        let below = heat.partial_sums.last().unwrap() <= &(rigidity * (1.0 + 10.0 * heat.h * heat.h));
        if !(monotone && below) {
            bad.push(i);
        }
    }
    ok &= bad.is_empty();
    check(
        ok,
        format!("J1 with 9 modes reaches {:.5} of 1/12; 20 random graphs monotone and below T", fraction),
        format!("J1 fraction {fraction:.5}; bad random graphs {bad:?}"),
    )
}

fn ac9_landscape() -> Outcome {
    let h: f64 = 1.0 / 64.0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, g) in family_zoo() {
        let sol = torsion_function(&g).unwrap();
        let result = lowest_eigenpairs(&g, 3, &SpectralOptions::with_h(h)).unwrap();
        for k in 1..=3 {
            let c = landscape_check(&g, &result, &sol, k, 4);
            worst = worst.max(c.max_ratio);
            if c.max_ratio > 1.0 + 5.0 * h {
                failures.push(format!("{name} mode {k}: {} at {} + {}", c.max_ratio, c.edge, c.offset));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("max ratio {worst:.5} (bound {:.5})", 1.0 + 5.0 * h),
        format!("{failures:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("AC1 closed-form rigidity", ac1_closed_forms),
        ("AC2 rigidity identity", ac2_rigidity_identity),
        ("AC3 surgery battery", ac3_surgery_battery),
        ("AC4 spectral convergence", ac4_spectral_convergence),
        ("AC5 star product law", ac5_star_product_law),
        ("AC6 bounds audit", ac6_bounds_audit),
        ("AC7 Hadamard derivative", ac7_hadamard),
        ("AC8 integrated heat content", ac8_heat_content),
        ("AC9 landscape suite", ac9_landscape),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                println!("[FAIL] {name}: {detail} [{elapsed:.2?}]");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
