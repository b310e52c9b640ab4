//! Property tests over randomized instances: metric and merge-structure
//! invariants, growth-trace invariants, and cross-module consistency.

use std::collections::BTreeSet;

use num::traits::{One, Zero};
use proptest::prelude::*;

use moatforge::diagnostics::Constants;
use moatforge::gap::{scale_or_contract, SolveConfig};
use moatforge::growth::{extract_s_tight_path, reach_labels, run_growth, GrowthConfig};
use moatforge::instance::{
    contract_terminals, epsilon_for, generate_family, metric_closure, parse_instance,
    render_native, subdivide, Family, Format,
};
use moatforge::merge::{drop_value, terminal_mst, MergeForest};
use moatforge::oracles::{dreyfus_wagner, lp_value, LpSpec, Method, Relaxation};
use moatforge::rat::{rat, rat_int, Rat};

fn random_family(seed: u64) -> Family {
    let n = 5 + (seed as usize * 11) % 10; // 5..=14
    let k = 2 + (seed as usize) % 5; // 2..=6
    Family::Random {
        n,
        k: k.min(n),
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parse_render_round_trip(seed in 0u64..10_000) {
        let inst = generate_family(&random_family(seed)).unwrap();
        let text = render_native(&inst);
        let back = parse_instance(&text, Format::Native).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(render_native(&back), text);
    }

    #[test]
    fn closure_triangle_inequality_and_idempotence(seed in 0u64..10_000) {
        let inst = generate_family(&random_family(seed)).unwrap();
        let m = metric_closure(&inst);
        let n = inst.vertex_count;
        for u in 0..n {
            prop_assert!(m.dist[u][u].is_zero());
            for v in 0..n {
                if u != v {
                    prop_assert!(m.dist[u][v] > Rat::zero());
                }
                for w in 0..n {
                    prop_assert!(m.dist[u][w] <= &m.dist[u][v] + &m.dist[v][w]);
                }
            }
        }
        let again = metric_closure(&m.to_complete_instance());
        prop_assert_eq!(m.dist, again.dist);
    }

    #[test]
    fn merge_times_ultrametric_and_distance_bound(seed in 0u64..10_000) {
        let inst = generate_family(&random_family(seed)).unwrap();
        let m = metric_closure(&inst);
        let f = MergeForest::build(&m);
        let r = &m.base.terminals;
        for &a in r {
            for &b in r {
                let tab = f.merge_time(a, b).unwrap();
                prop_assert!(m.dist[a][b] >= rat_int(2) * &tab);
                for &c in r {
                    let tac = f.merge_time(a, c).unwrap();
                    let tbc = f.merge_time(b, c).unwrap();
                    prop_assert!(tac <= tab.clone().max(tbc));
                }
            }
        }
    }

    #[test]
    fn contraction_matches_drop(seed in 0u64..10_000) {
        let inst = generate_family(&random_family(seed)).unwrap();
        let m = metric_closure(&inst);
        let f = MergeForest::build(&m);
        let (_, mst) = terminal_mst(&m);
        // Contract a prefix of the terminals.
        let take = 2 + (seed as usize) % (inst.terminals.len() - 1).max(1);
        let x: BTreeSet<usize> = inst.terminals[..take.min(inst.terminals.len())]
            .iter()
            .copied()
            .collect();
        let drop = drop_value(&f, &x).unwrap();
        let (contracted, _) = contract_terminals(&inst, &x).unwrap();
        let mc = metric_closure(&contracted);
        let (_, mst_after) = terminal_mst(&mc);
        prop_assert_eq!(&mst - &mst_after, drop);
    }

    #[test]
    fn subdivision_epsilon_bound(seed in 0u64..10_000) {
        // Eq.-(4)-style check: epsilon <= eps' * deactivation time for every
        // rootless forest set.
        let inst = generate_family(&random_family(seed)).unwrap();
        let m = metric_closure(&inst);
        let f = MergeForest::build(&m);
        let eps_prime = rat(1, 7);
        let eps = epsilon_for(&m, &eps_prime).unwrap();
        if let Ok(sg) = subdivide(&inst, &m, &eps_prime) {
            prop_assert!(sg.segments.iter().all(|s| s.cost <= eps));
        }
        for s in &f.sets {
            if f.has_root(s.id) {
                continue;
            }
            if let Some(d) = &s.deactivation {
                prop_assert!(eps <= &eps_prime * d);
            }
        }
    }

    #[test]
    fn growth_trace_invariants(seed in 0u64..10_000) {
        let inst = generate_family(&random_family(seed)).unwrap();
        let m = metric_closure(&inst);
        let f = MergeForest::build(&m);
        let tr = run_growth(&m, &f, &GrowthConfig::table1()).unwrap();
        let scale = Rat::one() + &tr.delta;
        // Per-edge load never exceeds cost/(1+delta); tight edges are paid
        // exactly.
        for u in 0..m.base.vertex_count {
            for v in 0..m.base.vertex_count {
                if u == v {
                    continue;
                }
                let total: Rat = tr
                    .contributors_until(u, v, &tr.horizon)
                    .values()
                    .cloned()
                    .sum();
                let target = m.dist[u][v].clone() / &scale;
                prop_assert!(total <= target);
                if let Some(tt) = tr.tight_time.get(&(u, v)) {
                    if tt < &tr.horizon {
                        prop_assert_eq!(&total, &target);
                    }
                }
            }
        }
        // value(z) equals the total growth interval length.
        let total: Rat = tr
            .growth
            .values()
            .flat_map(|ivs| ivs.iter().map(|iv| &iv.to - &iv.from))
            .sum();
        prop_assert_eq!(total, tr.dual_value().0);
        // Tight-path prefix property on a few extracted paths.
        for s in &f.sets {
            if f.has_root(s.id) {
                continue;
            }
            let labels = reach_labels(&tr, s.id);
            for v in 0..m.base.vertex_count {
                if labels[v].is_none() {
                    continue;
                }
                let p = extract_s_tight_path(&tr, s.id, v).unwrap();
                for (i, (a, b)) in p.edges().enumerate() {
                    prop_assert!(tr.tight_time[&(a, b)] <= p.reach_times[i + 1]);
                    prop_assert!(p.reach_times[i] <= p.reach_times[i + 1]);
                }
            }
        }
    }

    #[test]
    fn dual_bound_below_lp_value(seed in 0u64..10_000) {
        // Soundness of the reported bound against the exact LP value.
        let n = 5 + (seed as usize) % 8; // 5..=12 for the enumerate cap
        let k = 2 + (seed as usize) % 4;
        let fam = Family::Random { n, k: k.min(n), seed };
        let inst = generate_family(&fam).unwrap();
        let report = scale_or_contract(&inst, &SolveConfig::default()).unwrap();
        prop_assume!(report.dual_bound.is_some());
        let spec = LpSpec { relaxation: Relaxation::Bcr { root: inst.root } };
        let (lp, _) = lp_value(&inst, &spec, Method::Enumerate).unwrap();
        prop_assert!(report.dual_bound.unwrap() <= lp);
        // Sandwich with the optimum.
        let m = metric_closure(&inst);
        let (opt, _) = dreyfus_wagner(&m).unwrap();
        let (_, mst) = terminal_mst(&m);
        prop_assert!(lp <= opt.clone());
        prop_assert!(opt <= mst);
    }
}

#[test]
fn constants_identities_hold() {
    for (name, ok) in Constants::table1().sanity_checks() {
        assert!(ok, "{name}");
    }
}
