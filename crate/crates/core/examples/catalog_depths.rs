use groverlab::catalog::catalog_plans;
use groverlab::search::{build_stage_circuit, plan_success_probability};
use groverlab::transpile::{lower_with, Backend, LowerOptions};
use groverlab::BitString;

fn main() {
    for (n, bname) in [(3, "vigo"), (3, "athens"), (4, "vigo"), (4, "athens"), (5, "guadalupe")] {
        let b = Backend::builtin(bname).unwrap();
        println!("== n={n} {bname}");
        for plan in catalog_plans(n).unwrap() {
            let p = plan_success_probability(&plan).unwrap();
            let mut depths = vec![0.0; plan.stages().len()];
            let mut cx = vec![0.0; plan.stages().len()];
            let t0 = std::time::Instant::now();
            let targets = 1usize << n;
            for ti in 0..targets {
                let t = BitString::from_index(ti, n);
                for k in 0..plan.stages().len() {
                    let l = plan.stage_layout(k);
                    let c = build_stage_circuit(&plan, k, &t, &t.slice(0..l.determined.len())).unwrap();
                    let tc = lower_with(&c, &b, None, 0, &LowerOptions::for_execution()).unwrap();
                    depths[k] += tc.depth() as f64 / targets as f64;
                    cx[k] += tc.cx_count() as f64 / targets as f64;
                }
            }
            let total: f64 = depths.iter().sum();
            println!("{:12} p={:.4} depths={:?} cx={:?} exp={:.2} ({:?})", plan.to_string(), p, depths, cx, total / p, t0.elapsed());
        }
    }
}
