use afptas::instance::{Instance, Problem};
use afptas::pricing::{kcc_fptas, kcc_sweep, knapsack_fptas, PricingItem, PricingProblem};
use afptas::rational::{q, Rational};
use afptas::rounding::linear_grouping;
use afptas::solver::{case_of, solve_with, SolverOptions};
use afptas::verify::{brute_knapsack, check, exact, ffd_baseline};
use proptest::prelude::*;

fn grid(lo: i64, hi: i64) -> impl Strategy<Value = Rational> {
    (lo..=hi).prop_map(|v| Rational::new(v, 100))
}

fn epsilon() -> impl Strategy<Value = Rational> {
    (2i64..=4).prop_map(|m| Rational::new(1, m))
}

fn bpcc_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (prop::collection::vec(grid(0, 100), 0..=max_n), 1usize..=8, epsilon())
        .prop_map(|(sizes, k, eps)| Instance::bpcc(sizes, k, eps))
}

fn bpr_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (prop::collection::vec((grid(0, 100), grid(1, 120)), 0..=max_n), 3i64..=4)
        .prop_map(|(items, m)| Instance::bpr(items, Rational::new(1, m)))
}

fn pricing_problem() -> impl Strategy<Value = PricingProblem> {
    let item = (grid(1, 100), 0u32..=100, 1usize..=3);
    (
        prop::collection::vec(item, 0..=4),
        grid(20, 100),
        any::<bool>(),
        prop::option::of(1usize..=5),
        epsilon(),
    )
        .prop_map(|(items, capacity, capacity_strict, cardinality_bound, epsilon)| PricingProblem {
            items: items
                .into_iter()
                .enumerate()
                .map(|(type_index, (size, p, multiplicity))| PricingItem {
                    type_index,
                    profit: f64::from(p) / 100.0,
                    size,
                    multiplicity,
                })
                .collect(),
            capacity,
            capacity_strict,
            cardinality_bound,
            epsilon,
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn solver_output_is_feasible(inst in prop_oneof![bpcc_instance(40), bpr_instance(40)]) {
        let run = solve_with(&inst, &SolverOptions::default()).unwrap();
        prop_assert!(check(&run.report.packing, &run.instance).is_empty());
        prop_assert!(run.report.diagnostics.structural_ok(), "{:?}", run.report.diagnostics);
        prop_assert!(run.report.lp_value <= run.report.packing.cost.to_f64() + 1e-6);
    }

    #[test]
    fn guarantee_holds_against_exact_optimum(inst in prop_oneof![bpcc_instance(8), bpr_instance(7)]) {
        let run = solve_with(&inst, &SolverOptions::default()).unwrap();
        let opt = exact(&run.instance).unwrap();
        prop_assert!(check(&opt.witness, &run.instance).is_empty());
        prop_assert!(run.report.guarantee.holds(&run.report.packing.cost, &opt.opt_cost));
        prop_assert!(run.report.lp_value <= opt.opt_cost.to_f64() + 1e-6);
        prop_assert!(opt.opt_cost <= ffd_baseline(&run.instance).cost);
    }

    #[test]
    fn exact_with_k_n_is_classic_bin_packing(sizes in prop::collection::vec(grid(1, 100), 1..=8)) {
        let n = sizes.len();
        let bounded = exact(&Instance::bpcc(sizes.clone(), n, q(1, 2))).unwrap().opt_cost;
        let loose = exact(&Instance::bpcc(sizes.clone(), n + 5, q(1, 2))).unwrap().opt_cost;
        prop_assert_eq!(&bounded, &loose);
        let total: Rational = sizes.iter().sum();
        prop_assert!(bounded >= Rational::from_integer(total.ceil().try_into().unwrap()));
    }

    #[test]
    fn ffd_is_always_feasible(inst in prop_oneof![bpcc_instance(60), bpr_instance(60)]) {
        prop_assert!(check(&ffd_baseline(&inst), &inst).is_empty());
    }

    #[test]
    fn dispatch_is_a_pure_function(k in 1usize..=40, m in 2i64..=4) {
        let eps = Rational::new(1, m);
        let tag = case_of(Problem::Bpcc, Some(k), &eps);
        prop_assert_eq!(tag, case_of(Problem::Bpcc, Some(k), &eps.clone()));
        prop_assert_eq!(tag == afptas::solver::CaseTag::BpccSmallK, (k as i64) <= m * m);
    }

    #[test]
    fn pricing_respects_its_contract(p in pricing_problem()) {
        let sol = match p.cardinality_bound {
            Some(_) => kcc_fptas(&p),
            None => knapsack_fptas(&p),
        };
        let brute = brute_knapsack(&p).unwrap();
        prop_assert!(sol.value >= (1.0 - p.epsilon.to_f64()) * brute - 1e-9);
        prop_assert!(sol.value <= brute + 1e-9);
        prop_assert!(sol.upper_bound >= brute - 1e-9);
        let copies: u32 = sol.config.counts.iter().map(|&(_, c)| c).sum();
        prop_assert!(p.cardinality_bound.is_none_or(|b| copies as usize <= b));
        prop_assert_eq!(kcc_fptas(&PricingProblem { cardinality_bound: Some(3), ..p.clone() }),
                        kcc_fptas(&PricingProblem { cardinality_bound: Some(3), ..p.clone() }));
    }

    #[test]
    fn sweep_matches_single_calls(p in pricing_problem(), max_c in 0usize..=6) {
        let sweep = kcc_sweep(&p.items, &p.capacity, p.capacity_strict, max_c, &p.epsilon);
        prop_assert_eq!(sweep.len(), max_c + 1);
        prop_assert_eq!(sweep[0].value, 0.0);
        for (c, entry) in sweep.iter().enumerate() {
            let single = kcc_fptas(&PricingProblem { cardinality_bound: Some(c), ..p.clone() });
            prop_assert_eq!(entry, &single);
        }
    }

    #[test]
    fn linear_grouping_rounds_up(sizes in prop::collection::vec(grid(34, 100), 1..=40), classes in 1usize..=8) {
        let items: Vec<_> = sizes
            .into_iter()
            .enumerate()
            .map(|(id, s)| afptas::instance::Item::new(id, s))
            .collect();
        let g = linear_grouping(&items, classes);
        let rounded = g.rounded_items();
        prop_assert_eq!(rounded.len() + g.set_aside().len(), items.len());
        for (rounded_id, target) in g.bijection() {
            let r = rounded.iter().find(|it| it.id == rounded_id).unwrap();
            prop_assert!(r.size >= items[rounded_id].size);
            prop_assert!(r.size <= items[target].size);
        }
    }

    #[test]
    fn rational_text_round_trips(n in -10_000i64..=10_000, d in 1i64..=400) {
        let r = Rational::new(n, d);
        prop_assert_eq!(Rational::parse(&r.to_exact_string()).unwrap(), r);
    }
}
