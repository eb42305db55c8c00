//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::time::{Duration, Instant};

use groverlab::catalog::{catalog, catalog_plans, fixture_targets};
use groverlab::decompose::{
    c3y_correction, c3y_relative_phase, c4z_with_ancilla, ccy, ccz_linear, cccz_with_ancilla, controlled_matrix,
    mcz_matrix, phase_aligned_deviation, verify_equivalence, y_zx,
};
use groverlab::experiment::{run_plan, sweep, TrialProtocol};
use groverlab::metrics::{j_exp, j_max, write_csv};
use groverlab::noise::{exact_density_distribution, run_shots, NoiseModel};
use groverlab::optimize::CostModel;
use groverlab::search::{build_stage_circuit, closed_form_success, grover_circuit, plan_success_probability};
use groverlab::transpile::{builtin_backends, is_basis_gate, lower, lower_with, Backend, LowerOptions};
use groverlab::{BitString, SearchPlan, StateVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{}; {:.2?}", out.detail, took);
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.detail = format!("{}; over the {:?} budget", out.detail, limit);
        }
    }
    out
}

fn criterion1() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for t in [BitString::zeros(n), BitString::from_index((1 << n) - 1, n), BitString::from_index(0b101 % (1 << n), n)] {
            for j in 0..=j_max(n) {
                let mut sv = StateVector::zero(n).unwrap();
                sv.apply_circuit(&grover_circuit(n, &t, j).unwrap()).unwrap();
                let p = sv.amplitude(&t).norm_sqr();
                worst = worst.max((p - closed_form_success(n, j)).abs());
            }
        }
    }
    Outcome { pass: worst < 1e-10, detail: format!("max |closed form - simulation| = {worst:.2e}") }
}

const GOLDEN_3Q: [f64; 6] = [0.781, 0.5, 0.5, 0.945, 0.875, 0.750];
const GOLDEN_4Q: [f64; 14] =
    [0.473, 0.390, 0.250, 0.391, 0.250, 0.908, 0.821, 0.660, 0.561, 0.537, 0.488, 0.578, 0.531, 0.438];
const GOLDEN_5Q: [f64; 5] = [0.258, 0.195, 0.125, 0.268, 0.289];

fn criterion2() -> Outcome {
    let mut misses = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, golden) in [(3, &GOLDEN_3Q[..]), (4, &GOLDEN_4Q[..]), (5, &GOLDEN_5Q[..])] {
        for (name, &want) in catalog(n).unwrap().iter().zip(golden) {
            let got = plan_success_probability(&SearchPlan::parse(name, n).unwrap()).unwrap();
            let err = (got - want).abs();
            worst = worst.max(err);
            // Inclusive bound; the epsilon only absorbs f64 representation error.
            if err > 0.0005 + 1e-12 {
                misses.push(format!("{name}: {got:.6} vs {want}"));
            }
        }
    }
    let detail = if misses.is_empty() {
        format!("25 values, max error {worst:.2e}")
    } else {
        format!("{} of 25 outside +-0.0005: {}", misses.len(), misses.join(", "))
    };
    Outcome { pass: misses.is_empty(), detail }
}

fn criterion3() -> Outcome {
    let linear = ccz_linear(0, 1, 2).unwrap();
    let checks = [
        ("ccz_linear", verify_equivalence(&linear, &mcz_matrix(3), None).unwrap().deviation),
        (
            "ccy",
            verify_equivalence(&ccy(0, 1, 2, true).unwrap(), &controlled_matrix(3, &[0, 1], 2, &y_zx()), None)
                .unwrap()
                .deviation,
        ),
        ("cccz_with_ancilla", {
            let e = verify_equivalence(&cccz_with_ancilla(0, 1, 2, 3, 4).unwrap(), &mcz_matrix(4), Some(4)).unwrap();
            e.deviation.max(e.leakage)
        }),
        ("c3y_relative_phase", {
            let u = c3y_correction() * c3y_relative_phase(0, 1, 2, 3).unwrap().unitary();
            phase_aligned_deviation(&u, &controlled_matrix(4, &[0, 1, 2], 3, &y_zx()))
        }),
        ("c4z_with_ancilla", {
            let e =
                verify_equivalence(&c4z_with_ancilla(0, 1, 2, 3, 4, 5).unwrap(), &mcz_matrix(5), Some(5)).unwrap();
            e.deviation.max(e.leakage)
        }),
    ];
    let worst = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    let cx = linear.cx_count();
    let parts: Vec<String> = checks.iter().map(|(n, d)| format!("{n} {d:.1e}")).collect();
    Outcome { pass: worst < 1e-10 && cx == 8, detail: format!("{}; ccz_linear CNOTs = {cx}", parts.join(", ")) }
}

fn criterion4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut problems = Vec::new();
    for backend in builtin_backends() {
        for n in 3..=5 {
            let t = &fixture_targets(n).unwrap()[0];
            for plan in catalog_plans(n).unwrap() {
                for k in 0..plan.stages().len() {
                    let det = plan.stage_layout(k).determined.len();
                    let c = build_stage_circuit(&plan, k, t, &t.slice(0..det)).unwrap();
                    if c.num_qubits() > backend.num_qubits {
                        continue;
                    }
                    let tc = lower(&c, &backend, None, 0).unwrap();
                    for g in &tc.ops {
                        let legal = is_basis_gate(g)
                            && (g.qubits.len() == 1 || backend.are_adjacent(g.qubits[0], g.qubits[1]));
                        if !legal {
                            problems.push(format!("{plan} on {}: {:?}", backend.name, g));
                        }
                    }
                    worst = worst.max(tc.unitary_deviation(&c).unwrap());
                    checked += 1;
                }
            }
        }
    }
    let pass = problems.is_empty() && worst < 1e-9 && checked > 0;
    let mut detail = format!("{checked} lowered stage circuits, max unitary deviation {worst:.2e}");
    if !problems.is_empty() {
        detail.push_str(&format!("; illegal ops: {}", problems.len()));
    }
    Outcome { pass, detail }
}

fn mean_depth(model: &CostModel, name: &str, n: usize) -> f64 {
    let e = model.evaluate(&SearchPlan::parse(name, n).unwrap()).unwrap();
    e.stage_depths.iter().sum()
}

fn criterion5() -> Outcome {
    let vigo = Backend::builtin("vigo").unwrap();
    let model4 = CostModel::new(&vigo, 4, 0);
    let (g2, d4) = (mean_depth(&model4, "G2D2M2", 4), mean_depth(&model4, "D4M4", 4));
    let mut pass = g2 < 0.5 * d4;
    let mut parts = vec![format!("vigo G2D2M2 {g2:.2} vs D4M4 {d4:.2}")];
    for (n, bname) in [(3, "vigo"), (3, "athens"), (4, "vigo"), (4, "athens"), (5, "guadalupe")] {
        let b = Backend::builtin(bname).unwrap();
        let model = CostModel::new(&b, n, 0);
        let global = mean_depth(&model, &format!("D{n}M{n}"), n);
        let locals: Vec<f64> = (2..n).map(|m| mean_depth(&model, &format!("D{m}M{n}"), n)).collect();
        pass &= locals.iter().all(|&d| d < global);
        let shown: Vec<String> = locals.iter().zip(2..).map(|(d, m)| format!("D{m} {d:.1}")).collect();
        parts.push(format!("n={n} {bname}: D{n} {global:.1}, {}", shown.join(", ")));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, bname, want) in [(3, "vigo", "G1D2M2"), (3, "athens", "G1D2M2"), (4, "vigo", "G2D2M2"), (4, "athens", "G2D2M2")] {
        let b = Backend::builtin(bname).unwrap();
        let model = CostModel::new(&b, n, 0);
        let evals: Vec<_> = catalog_plans(n).unwrap().iter().map(|p| model.evaluate(p).unwrap()).collect();
        let best = evals.iter().min_by(|a, b| a.expected_depth.total_cmp(&b.expected_depth)).unwrap();
        let w = evals.iter().find(|e| e.name == want).unwrap();
        let ok = best.name == want;
        pass &= ok;
        parts.push(format!("n={n} {bname}: argmin {} ({:.2}), {want} {:.2}", best.name, best.expected_depth, w.expected_depth));
        // Depth ratios against the expected winner, printed whether or not the ordering holds.
        let wd: f64 = w.stage_depths.iter().sum();
        let ratios: Vec<String> = evals
            .iter()
            .map(|e| {
                let d: f64 = e.stage_depths.iter().sum();
                format!("{} d={d:.1} d/d_{want}={:.2} p_{want}/p={:.2}", e.name, d / wd, w.p_theo / e.p_theo)
            })
            .collect();
        println!("    depth ratios n={n} {bname}: {}", ratios.join("; "));
        if !ok {
            println!("    ordering broken on {bname}: {} beats {want} under this depth model", best.name);
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion7() -> Outcome {
    let vigo = Backend::builtin("vigo").unwrap();
    let report = sweep(4, &vigo, &TrialProtocol::new(&vigo), &[1.0]).unwrap();
    for r in &report.records {
        println!(
            "    {:12} cx {:5.1}  p_theo {:.3}  p_sim {:.4} +- {:.4}  R {:.3}",
            r.circuit_name, r.cx_count, r.p_theo, r.p_sim, r.p_sim_std, r.degraded_ratio
        );
    }
    let rho = report.spearman.unwrap_or(f64::NAN);
    let r2 = report.fit.as_ref().map_or(f64::NAN, |f| f.r_squared);
    let decreasing = report.fit.as_ref().is_some_and(|f| f.is_decreasing());
    let p = |name: &str| report.records.iter().find(|r| r.circuit_name == name).unwrap().p_sim;
    let (two, one) = (p("D2M2|D2M2"), p("D4D4M4"));
    let (a, b, c) = (rho <= -0.8, r2 >= 0.9, two > one);
    Outcome {
        pass: a && b && c,
        detail: format!(
            "(a) spearman {rho:.3} {}; (b) logistic r2 {r2:.3} decreasing={decreasing} {}; (c) D2M2|D2M2 {two:.4} vs D4D4M4 {one:.4} {}",
            if a { "ok" } else { "FAIL" },
            if b { "ok" } else { "FAIL" },
            if c { "ok" } else { "FAIL" }
        ),
    }
}

/// Same sweep with opt-in T1/T2 relaxation; reported, never scored.
fn criterion7_relaxation_note() {
    let vigo = Backend::builtin("vigo").unwrap();
    let proto = TrialProtocol {
        trials: 10,
        shots: 2048,
        noise: NoiseModel::from_backend(&vigo).with_relaxation(&vigo),
        ..TrialProtocol::new(&vigo)
    };
    let report = sweep(4, &vigo, &proto, &[1.0]).unwrap();
    let p = |name: &str| report.records.iter().find(|r| r.circuit_name == name).unwrap().p_sim;
    println!(
        "    note, relaxation enabled (10 x 2048 shots): spearman {:.3}, logistic r2 {:.3}, D2M2|D2M2 {:.4} vs D4D4M4 {:.4}",
        report.spearman.unwrap_or(f64::NAN),
        report.fit.as_ref().map_or(f64::NAN, |f| f.r_squared),
        p("D2M2|D2M2"),
        p("D4D4M4")
    );
}

fn stage0(name: &str, n: usize, t: &str, b: &Backend) -> (groverlab::transpile::TranspiledCircuit, Vec<usize>, BitString) {
    let plan = SearchPlan::parse(name, n).unwrap();
    let t: BitString = t.parse().unwrap();
    let layout = plan.stage_layout(0);
    let c = build_stage_circuit(&plan, 0, &t, &t.slice(0..layout.determined.len())).unwrap();
    let tc = lower_with(&c, b, None, 0, &LowerOptions::for_execution()).unwrap();
    let want = BitString::new(layout.measured.iter().map(|&q| t.bit(q)).collect());
    (tc, layout.measured, want)
}

fn criterion8() -> Outcome {
    let vigo = Backend::builtin("vigo").unwrap();
    let athens = Backend::builtin("athens").unwrap();
    let spots = [
        ("D3M3", 3, "101", &vigo, NoiseModel::from_backend(&vigo).with_uniform_cx(0.01)),
        ("G2D2M2", 4, "0110", &vigo, NoiseModel::from_backend(&vigo)),
        ("D3M3", 3, "011", &athens, NoiseModel::from_backend(&athens).with_relaxation(&athens)),
    ];
    let shots = 1_000_000u64;
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, n, t, b, model)) in spots.iter().enumerate() {
        let (tc, measured, want) = stage0(name, *n, t, b);
        let exact = exact_density_distribution(&tc, &measured, model).unwrap()[want.to_index()];
        let est = run_shots(&tc, &measured, model, shots, 100 + i as u64).unwrap().probability(&want);
        let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
        let z = (est - exact) / sigma;
        pass &= z.abs() <= 3.0;
        parts.push(format!("{name}@{}{} exact {exact:.5} est {est:.5} z {z:+.2}", b.name, if model.relaxation.is_some() { "+relax" } else { "" }));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion9() -> Outcome {
    let n = 20;
    let best = (1..=2 * j_max(n))
        .map(|j| (j, j as f64 / closed_form_success(n, j)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0;
    let formula = j_exp(n);
    Outcome { pass: best.abs_diff(formula) <= 1, detail: format!("argmin j/P = {best}, floor formula = {formula}") }
}

fn criterion10() -> Outcome {
    let vigo = Backend::builtin("vigo").unwrap();
    let plan = SearchPlan::parse("D2M2|D2M2", 4).unwrap();
    let proto = TrialProtocol { trials: 6, shots: 4096, seed: 17, ..TrialProtocol::new(&vigo) };
    let render = || {
        let r = run_plan(&plan, &vigo, &proto).unwrap();
        let mut a = Vec::new();
        write_csv(std::slice::from_ref(&r.record), &mut a).unwrap();
        write_csv(&r.trials, &mut a).unwrap();
        a
    };
    let (x, y) = (render(), render());
    Outcome { pass: x == y && !x.is_empty(), detail: format!("{} bytes, identical = {}", x.len(), x == y) }
}

type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed-form success matches simulation", Some(5), criterion1),
        ("theoretical success probabilities match the reference table", Some(10), criterion2),
        ("gate identities", Some(5), criterion3),
        ("lowered circuits are legal and unitary-equivalent", Some(60), criterion4),
        ("depth orderings", None, criterion5),
        ("expected-depth minimizers", None, criterion6),
        ("noisy degradation trends", Some(600), criterion7),
        ("trajectory estimator agrees with density propagation", None, criterion8),
        ("expected-oracle iteration count at n = 20", Some(5), criterion9),
        ("seeded runs produce identical CSV", None, criterion10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &id.to_string()) {
            continue;
        }
        let out = timed(limit.map(Duration::from_secs), f);
        println!("{} criterion {id}: {name} ({})", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.pass);
        if id == 7 {
            criterion7_relaxation_note();
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
