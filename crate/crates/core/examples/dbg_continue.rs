use moatforge::dual::verify_dual_feasible;
use moatforge::growth::{run_growth, GrowthConfig};
use moatforge::instance::{generate_family, metric_closure, Family};
use moatforge::merge::MergeForest;
use moatforge::rat::{format_rat, rat, rat_int, Rat};
use num::traits::One;

fn main() {
    let inst = generate_family(&Family::BipartiteFan { k: 2, q: 10 }).unwrap();
    let m = metric_closure(&inst);
    let f = MergeForest::build(&m);
    let cfg = GrowthConfig { halt_on_capture: false, ..GrowthConfig::with_delta(rat(2, 5)) };
    let tr = run_growth(&m, &f, &cfg).unwrap();
    println!("halted: {}, captures: {:?}", tr.halted, tr.captured);
    let scale = Rat::one() + &tr.delta;
    println!("verdict: {:?}", verify_dual_feasible(&tr.z, &m, &scale));
    println!("value: {} mst/2: check", format_rat(&tr.dual_value().0));
    for (k, v) in &tr.z.entries {
        if k.len() < 6 { println!("  {:?} -> {}", k, format_rat(v)); }
    }
    let _ = rat_int(1);
}
