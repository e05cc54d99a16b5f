//! Feasibility under a platoon size limit, optimal platoon and leader counts,
//! and a deterministic builder for one optimal coalition structure.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{CoalitionStructure, FleetSpec, Platoon, TruckId};
use crate::money::{from_usize, Money};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Smallest admissible platoon count, `ceil(N/M)` (1 when `M >= N`).
    pub p_min: usize,
    /// Largest admissible platoon count, `floor(N/2)` (1 when `M >= N`).
    pub p_max: usize,
    pub reason: Option<String>,
}

/// Whether `n` trucks can be split into platoons of sizes in `[2, m]`.
///
/// For `m >= n` the grand coalition is the only structure considered and
/// `p_min = p_max = 1`.
pub fn feasibility(n: usize, m: usize) -> Result<FeasibilityReport> {
    if n < 2 {
        return Err(Error::domain(format!("fleet needs at least 2 trucks, got N={n}")));
    }
    if m < 2 {
        return Err(Error::domain(format!(
            "platoon size limit must be at least 2, got M={m}"
        )));
    }
    if m >= n {
        return Ok(FeasibilityReport {
            feasible: true,
            p_min: 1,
            p_max: 1,
            reason: None,
        });
    }
    let p_min = n.div_ceil(m);
    let p_max = n / 2;
    let feasible = p_min <= p_max;
    let reason = (!feasible).then(|| {
        if m == 2 {
            "M=2 requires even N".to_string()
        } else {
            format!("no platoon count in [{p_min}, {p_max}] for N={n}, M={m}")
        }
    });
    Ok(FeasibilityReport {
        feasible,
        p_min,
        p_max,
        reason,
    })
}

impl FleetSpec {
    pub fn feasibility(&self) -> FeasibilityReport {
        feasibility(self.n(), self.max_size()).expect("FleetSpec guarantees N >= 2 and M >= 2")
    }
}

/// Optimal number of platoons, leaders by type, followers by type and the
/// resulting total benefit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormationCounts {
    pub p_star: usize,
    pub l_e_star: usize,
    pub l_f_star: usize,
    pub f_e: usize,
    pub f_f: usize,
    pub v_star: Money,
}

/// Fewest feasible platoons, with as many of them as possible led by ETs.
pub fn optimal_counts(fleet: &FleetSpec) -> Result<FormationCounts> {
    let report = fleet.feasibility();
    if !report.feasible {
        return Err(Error::Infeasible(report));
    }
    let p_star = report.p_min;
    let l_e_star = fleet.n_e().min(p_star);
    let l_f_star = p_star - l_e_star;
    // p_star <= N/2 < N, so the FPT pool always covers the remaining leaders.
    debug_assert!(l_f_star <= fleet.n_f());
    let f_e = fleet.n_e() - l_e_star;
    let f_f = fleet.n_f() - l_f_star;
    let v_star = fleet.eps_e() * from_usize(f_e) + fleet.eps_f() * from_usize(f_f);
    Ok(FormationCounts {
        p_star,
        l_e_star,
        l_f_star,
        f_e,
        f_f,
        v_star,
    })
}

/// Builds one optimal structure.
///
/// Leaders are the lowest-ID ETs, then the lowest-ID FPTs. All platoons but
/// the last are filled to `M` with the lowest-ID remaining followers; the
/// last takes whatever is left. If that leaves the last platoon alone with
/// its leader, the highest-index platoon of size above 2 hands over its most
/// recently added follower.
pub fn build_optimal_structure(fleet: &FleetSpec) -> Result<CoalitionStructure> {
    let counts = optimal_counts(fleet)?;
    let m = fleet.max_size();
    let p = counts.p_star;

    let leaders: Vec<TruckId> = fleet
        .electric_ids()
        .take(counts.l_e_star)
        .chain(fleet.fuel_ids().take(counts.l_f_star))
        .collect();
    let mut pool: VecDeque<TruckId> = fleet.trucks().filter(|t| !leaders.contains(t)).collect();

    // (p - 1)(M - 1) <= N - p follows from (p - 1) M < N when p = ceil(N/M).
    assert!(
        (p - 1) * (m - 1) <= pool.len(),
        "follower pool too small for {p} platoons of size {m}"
    );

    let mut platoons: Vec<Platoon> = Vec::with_capacity(p);
    for &leader in &leaders[..p - 1] {
        let mut members = vec![leader];
        while members.len() < m {
            match pool.pop_front() {
                Some(f) => members.push(f),
                None => unreachable!("pool sufficiency checked above"),
            }
        }
        platoons.push(Platoon::new(leader, members));
    }

    let last_leader = leaders[p - 1];
    let mut last = vec![last_leader];
    while last.len() < m {
        match pool.pop_front() {
            Some(f) => last.push(f),
            None => break,
        }
    }
    if last.len() == 1 {
        let donor = platoons
            .iter_mut()
            .rev()
            .find(|pl| pl.len() > 2)
            .expect("a platoon larger than 2 exists whenever the last one is short");
        let moved = donor.members.pop().expect("donor has followers");
        last.push(moved);
    }
    platoons.push(Platoon::new(last_leader, last));
    debug_assert!(pool.is_empty());

    Ok(CoalitionStructure::new(fleet.clone(), platoons))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{structure_value, CoalitionSignature, TruckType};
    use crate::money::ratio;

    fn fleet(n_e: usize, n_f: usize, m: usize) -> FleetSpec {
        FleetSpec::new(n_e, n_f, ratio(48, 1000), ratio(7, 100), m).unwrap()
    }

    /// All multisets of part sizes in [2, m] summing to n, as platoon counts.
    fn achievable_counts(n: usize, m: usize) -> Vec<usize> {
        fn go(rest: usize, max_part: usize, parts: usize, out: &mut Vec<usize>) {
            if rest == 0 {
                out.push(parts);
                return;
            }
            for s in (2..=max_part.min(rest)).rev() {
                go(rest - s, s, parts + 1, out);
            }
        }
        let mut out = Vec::new();
        go(n, m, 0, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    #[test]
    fn feasibility_nine_four_matches_enumeration() {
        let r = feasibility(9, 4).unwrap();
        assert!(r.feasible);
        assert_eq!((r.p_min, r.p_max), (3, 4));
        assert_eq!(achievable_counts(9, 4), vec![3, 4]);
    }

    #[test]
    fn feasibility_bounds_agree_with_enumeration() {
        for n in 2..=14 {
            for m in 2..n {
                let r = feasibility(n, m).unwrap();
                let counts = achievable_counts(n, m);
                assert_eq!(r.feasible, !counts.is_empty(), "n={n} m={m}");
                if r.feasible {
                    assert_eq!(counts, (r.p_min..=r.p_max).collect::<Vec<_>>(), "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn odd_pairs_are_infeasible() {
        let r = feasibility(3, 2).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.reason.as_deref(), Some("M=2 requires even N"));
    }

    #[test]
    fn grand_coalition_extension() {
        let r = feasibility(9, 9).unwrap();
        assert!(r.feasible);
        assert_eq!((r.p_min, r.p_max), (1, 1));
        let r = feasibility(2, 5).unwrap();
        assert_eq!((r.p_min, r.p_max), (1, 1));
    }

    #[test]
    fn feasibility_rejects_bad_arguments() {
        assert!(feasibility(1, 3).is_err());
        assert!(feasibility(5, 1).is_err());
    }

    #[test]
    fn counts_worked_example() {
        let c = optimal_counts(&fleet(3, 6, 4)).unwrap();
        assert_eq!((c.p_star, c.l_e_star, c.l_f_star), (3, 3, 0));
        assert_eq!((c.f_e, c.f_f), (0, 6));
        assert_eq!(c.v_star, ratio(42, 100));

        let c = optimal_counts(&fleet(3, 6, 5)).unwrap();
        assert_eq!((c.p_star, c.l_e_star, c.l_f_star), (2, 2, 0));
        assert_eq!(c.v_star, ratio(468, 1000));

        let c = optimal_counts(&fleet(3, 6, 9)).unwrap();
        assert_eq!(c.p_star, 1);
        assert_eq!(c.v_star, ratio(516, 1000));
    }

    #[test]
    fn counts_all_electric_pairs() {
        let f = fleet(8, 0, 2);
        let c = optimal_counts(&f).unwrap();
        assert_eq!((c.p_star, c.l_e_star, c.l_f_star), (4, 4, 0));
        assert_eq!(c.v_star, f.eps_e() * ratio(4, 1));
    }

    #[test]
    fn counts_infeasible_carries_report() {
        match optimal_counts(&fleet(0, 3, 2)) {
            Err(Error::Infeasible(r)) => assert!(!r.feasible),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn builds_worked_example_exactly() {
        let s = build_optimal_structure(&fleet(3, 6, 4)).unwrap();
        assert_eq!(s.to_string(), "{{1,4,5,6},{2,7,8},{3,9}}");
        let leaders: Vec<_> = s.platoons().iter().map(|p| p.leader).collect();
        assert_eq!(leaders, vec![1, 2, 3]);
        assert_eq!(structure_value(&s).unwrap(), ratio(42, 100));
    }

    #[test]
    fn builds_fuel_pairs() {
        // Leaders are the two lowest-ID FPTs; followers fill in ascending order.
        let s = build_optimal_structure(&fleet(0, 4, 2)).unwrap();
        assert_eq!(s.to_string(), "{{1,3},{2,4}}");
        let leaders: Vec<_> = s.platoons().iter().map(|p| p.leader).collect();
        assert_eq!(leaders, vec![1, 2]);
    }

    #[test]
    fn borrow_step_moves_last_added_follower() {
        let f = fleet(1, 3, 3);
        let s = build_optimal_structure(&f).unwrap();
        assert_eq!(s.to_string(), "{{1,3},{2,4}}");
        assert_eq!(s.platoons()[1].leader, 2);
        assert_eq!(structure_value(&s).unwrap(), f.eps_f() * ratio(2, 1));
        // Brute force over the only shape (2,2): pair truck 1 with each other truck.
        let best = [vec![vec![1, 2], vec![3, 4]], vec![vec![1, 3], vec![2, 4]], vec![vec![1, 4], vec![2, 3]]]
            .into_iter()
            .map(|groups| {
                groups
                    .iter()
                    .map(|g| {
                        let sig = CoalitionSignature::of_members(&f, g).unwrap();
                        crate::model::coalition_value(sig, &f).unwrap()
                    })
                    .sum::<Money>()
            })
            .max()
            .unwrap();
        assert_eq!(best, f.eps_f() * ratio(2, 1));
    }

    #[test]
    fn grand_coalition_is_led_by_an_et() {
        let s = build_optimal_structure(&fleet(3, 6, 9)).unwrap();
        assert_eq!(s.platoons().len(), 1);
        assert_eq!(s.platoons()[0].leader, 1);
        assert_eq!(s.fleet().truck_type(1), Some(TruckType::Electric));
        assert_eq!(structure_value(&s).unwrap(), ratio(516, 1000));
    }

    #[test]
    fn infeasible_build() {
        assert!(matches!(
            build_optimal_structure(&fleet(1, 2, 2)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn determinism() {
        let f = fleet(4, 7, 4);
        assert_eq!(build_optimal_structure(&f).unwrap(), build_optimal_structure(&f).unwrap());
    }
}
