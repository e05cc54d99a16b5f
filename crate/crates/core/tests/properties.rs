use num::Zero;
use platoon_core::allocation::{baseline_allocate, epsilon_of, solve_type_least_core, stability_index, Scheme};
use platoon_core::formation::{build_optimal_structure, optimal_counts};
use platoon_core::model::{coalition_value, structure_value};
use platoon_core::money::{from_usize, ratio};
use platoon_core::oracle::{brute_force_best, brute_force_epsilon, Guards};
use platoon_core::{CoalitionSignature, FleetSpec, Money, PayoffVector};
use proptest::prelude::*;

/// Fleets with `2 <= N <= max_n`, rates in thousandths, any size limit up to N+1.
fn fleets(max_n: usize) -> impl Strategy<Value = FleetSpec> {
    (0..=max_n, 0..=max_n, 1i64..=100, 0i64..=100, 0usize..=max_n)
        .prop_filter("N >= 2", move |(e, f, ..)| e + f >= 2 && e + f <= max_n)
        .prop_map(|(n_e, n_f, a, b, m)| {
            let max_size = 2 + m % (n_e + n_f);
            FleetSpec::new(n_e, n_f, ratio(a, 1000), ratio(a + b, 1000), max_size).unwrap()
        })
}

fn feasible(max_n: usize) -> impl Strategy<Value = FleetSpec> {
    fleets(max_n).prop_filter("feasible", |f| f.feasibility().feasible)
}

fn with_payoffs(max_n: usize) -> impl Strategy<Value = (FleetSpec, PayoffVector)> {
    fleets(max_n).prop_flat_map(|f| {
        let n = f.n();
        (Just(f), proptest::collection::vec(0i64..=150, n))
            .prop_map(|(f, v)| (f, PayoffVector::new(v.into_iter().map(|k| ratio(k, 1000)).collect()).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_structure_matches_exhaustive_search(f in feasible(10)) {
        let s = build_optimal_structure(&f).unwrap();
        let best = brute_force_best(&f, &Guards::default()).unwrap();
        prop_assert_eq!(structure_value(&s).unwrap(), best.max_benefit);
    }

    #[test]
    fn algorithm_output_is_well_formed(f in feasible(40)) {
        let c = optimal_counts(&f).unwrap();
        let s = build_optimal_structure(&f).unwrap();
        prop_assert!(s.is_valid());
        prop_assert_eq!(s.platoons().len(), c.p_star);
        let et_platoons = (0..s.platoons().len()).filter(|&i| s.signature(i).c_e >= 1).count();
        prop_assert_eq!(et_platoons, c.l_e_star);
        prop_assert_eq!(s, build_optimal_structure(&f).unwrap());
    }

    #[test]
    fn type_excess_equals_subset_excess((f, x) in with_payoffs(9)) {
        let fast = epsilon_of(&x, &f).unwrap().epsilon;
        prop_assert_eq!(fast, brute_force_epsilon(&x, &f, &Guards::default()).unwrap());
    }

    #[test]
    fn raising_every_payoff_never_raises_excess((f, x) in with_payoffs(12), d in 1i64..=50) {
        let delta = ratio(d, 1000);
        let y = PayoffVector::new(x.payoffs().iter().map(|p| p + &delta).collect()).unwrap();
        prop_assert!(epsilon_of(&y, &f).unwrap().epsilon <= epsilon_of(&x, &f).unwrap().epsilon);
    }

    #[test]
    fn least_core_scales_with_rates(f in feasible(12), num in 1i64..=40, den in 1i64..=9) {
        let c = ratio(num, den);
        let v = optimal_counts(&f).unwrap().v_star;
        let g = f.scaled(&c).unwrap();
        let vc = &v * &c;
        let a = solve_type_least_core(&f, &v).unwrap();
        let b = solve_type_least_core(&g, &vc).unwrap();
        prop_assert_eq!(&b.allocation.x_e, &(&a.allocation.x_e * &c));
        prop_assert_eq!(&b.allocation.x_f, &(&a.allocation.x_f * &c));
        prop_assert_eq!(&b.epsilon_star, &(&a.epsilon_star * &c));
        prop_assert_eq!(&b.binding, &a.binding);
        prop_assert_eq!(stability_index(&a.epsilon_star, &v).unwrap(), stability_index(&b.epsilon_star, &vc).unwrap());
    }

    #[test]
    fn midpoint_lies_in_optimal_interval(f in feasible(12)) {
        let v = optimal_counts(&f).unwrap().v_star;
        let sol = solve_type_least_core(&f, &v).unwrap();
        let (lo, hi) = sol.x_e_interval.clone();
        prop_assert!(lo <= sol.allocation.x_e && sol.allocation.x_e <= hi);
        for end in [lo, hi] {
            let x = sol.allocation_at(&f, &v, end).to_payoffs(&f);
            prop_assert!(epsilon_of(&x, &f).unwrap().epsilon <= sol.epsilon_star);
        }
    }

    #[test]
    fn baselines_conserve_value(f in feasible(25), l in 1i64..=10) {
        let s = build_optimal_structure(&f).unwrap();
        let v = structure_value(&s).unwrap();
        let lambda = ratio(l, 10);
        for scheme in Scheme::ALL {
            let x = baseline_allocate(scheme, (scheme == Scheme::LeaderSubsidy).then_some(&lambda), &s).unwrap();
            prop_assert_eq!(x.total(), v.clone());
            if scheme != Scheme::FleetEqualSplit {
                for (i, p) in s.platoons().iter().enumerate() {
                    prop_assert_eq!(x.sum_over(&p.members), s.platoon_value(i).unwrap());
                }
            }
        }
    }

    #[test]
    fn values_are_homogeneous_and_step_by_eps_f(f in fleets(12), num in 1i64..=30, den in 1i64..=7) {
        let c = ratio(num, den);
        let g = f.scaled(&c).unwrap();
        let cap = f.size_cap();
        for c_e in 0..=f.n_e().min(cap) {
            for c_f in 0..=f.n_f().min(cap - c_e) {
                if c_e + c_f < 2 {
                    continue;
                }
                let sig = CoalitionSignature::new(c_e, c_f);
                let v = coalition_value(sig, &f).unwrap();
                prop_assert_eq!(coalition_value(sig, &g).unwrap(), &v * &c);
                if c_e >= 1 && c_f < f.n_f() && c_e + c_f < cap {
                    let next = coalition_value(CoalitionSignature::new(c_e, c_f + 1), &f).unwrap();
                    prop_assert_eq!(next - &v, f.eps_f().clone());
                }
            }
        }
    }

    #[test]
    fn leader_subsidy_shares(f in feasible(25), l in 1i64..=10) {
        let s = build_optimal_structure(&f).unwrap();
        let lambda = ratio(l, 10);
        let ls = baseline_allocate(Scheme::LeaderSubsidy, Some(&lambda), &s).unwrap();
        let tp = baseline_allocate(Scheme::TypeProportional, None, &s).unwrap();
        let rest = Money::from_integer(1.into()) - &lambda;
        for (i, p) in s.platoons().iter().enumerate() {
            prop_assert_eq!(ls.get(p.leader).unwrap(), &(&lambda * s.platoon_value(i).unwrap()));
            for t in p.followers() {
                prop_assert_eq!(ls.get(t).unwrap(), &(tp.get(t).unwrap() * &rest));
            }
        }
    }
}

/// No efficient type allocation on a 1e-4 grid does better than the solver.
#[test]
fn solver_beats_grid_on_worked_fleet() {
    for m in 3..=9 {
        let f = FleetSpec::new(3, 6, ratio(48, 1000), ratio(7, 100), m).unwrap();
        let v = optimal_counts(&f).unwrap().v_star;
        let sol = solve_type_least_core(&f, &v).unwrap();
        let floor = &sol.epsilon_star - ratio(1, 1_000_000_000);
        let top = &v / from_usize(3);
        let mut k = 0i64;
        loop {
            let x_e = ratio(k, 10_000);
            if x_e > top {
                break;
            }
            let x_f = (&v - from_usize(3) * &x_e) / from_usize(6);
            let x = PayoffVector::new([vec![x_e.clone(); 3], vec![x_f; 6]].concat()).unwrap();
            let e = epsilon_of(&x, &f).unwrap().epsilon;
            assert!(e >= floor, "M={m} x_e={x_e}");
            k += 1;
        }
        assert!(!sol.epsilon_star.is_zero() || m == 3 || m == 9);
    }
}
