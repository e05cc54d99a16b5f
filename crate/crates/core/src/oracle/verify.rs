//! Equivalence suite comparing the fast paths against the brute-force oracle
//! for one fleet and size limit.

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{benefit_distribution, brute_force_best, brute_force_epsilon, enumerate_signature_partitions, Guards};
use crate::allocation::{baseline_allocate, epsilon_of, solve_type_least_core, Scheme};
use crate::error::Result;
use crate::formation::{build_optimal_structure, optimal_counts};
use crate::model::{structure_value, FleetSpec, PayoffVector};
use crate::money::{format_exact, ratio, Money};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub guards: Guards,
    pub random_vectors: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            guards: Guards::default(),
            random_vectors: 25,
            seed: 0x9e37_79b9,
        }
    }
}

/// Runs every cross-check for `fleet`. Errors only when a guard is exceeded;
/// mismatches are reported as failed checks.
pub fn cross_check(fleet: &FleetSpec, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let guards = &opts.guards;
    let mut checks = Vec::new();
    let report = fleet.feasibility();
    let partitions = enumerate_signature_partitions(fleet, guards)?;

    checks.push(Check::new(
        "feasibility",
        report.feasible == !partitions.is_empty(),
        format!(
            "closed form says {}, enumeration found {} structures",
            if report.feasible { "feasible" } else { "infeasible" },
            partitions.len()
        ),
    ));
    if !report.feasible {
        return Ok(checks);
    }

    // With M >= N the report describes the grand coalition only.
    if !fleet.grand_coalition_allowed() {
        let out_of_range = partitions
            .iter()
            .filter(|p| p.platoon_count() < report.p_min || p.platoon_count() > report.p_max)
            .count();
        checks.push(Check::new(
            "platoon-count-bounds",
            out_of_range == 0,
            format!("{out_of_range} structures outside [{}, {}]", report.p_min, report.p_max),
        ));
    }

    let counts = optimal_counts(fleet)?;
    let structure = build_optimal_structure(fleet)?;
    let violations = structure.validate();
    checks.push(Check::new(
        "structure-valid",
        violations.is_empty(),
        format!("{structure}: {} violations", violations.len()),
    ));
    let built = structure_value(&structure)?;
    let best = brute_force_best(fleet, guards)?;
    let hist = benefit_distribution(fleet, guards)?;
    checks.push(Check::new(
        "optimal-benefit",
        built == best.max_benefit && counts.v_star == built && hist.max_benefit() == Some(&built),
        format!(
            "built {}, closed form {}, brute force {}",
            format_exact(&built),
            format_exact(&counts.v_star),
            format_exact(&best.max_benefit)
        ),
    ));

    let classes_consistent = partitions.iter().all(|p| {
        partitions
            .iter()
            .filter(|q| q.platoon_count() == p.platoon_count() && q.electric_led() == p.electric_led())
            .all(|q| q.benefit(fleet) == p.benefit(fleet))
    });
    checks.push(Check::new(
        "benefit-decomposition",
        classes_consistent,
        "benefit depends only on (platoons, ET-led platoons)",
    ));

    let solution = solve_type_least_core(fleet, &built)?;
    let efficient = solution.allocation.fleet_total(fleet) == built;
    let ends_ok = [&solution.x_e_interval.0, &solution.x_e_interval.1]
        .into_iter()
        .map(|xe| solution.allocation_at(fleet, &built, xe.clone()).to_payoffs(fleet))
        .all(|x| epsilon_of(&x, fleet).map(|e| e.epsilon == solution.epsilon_star).unwrap_or(false));
    checks.push(Check::new(
        "least-core",
        efficient && ends_ok,
        format!(
            "eps* = {}, x_e in [{}, {}]",
            format_exact(&solution.epsilon_star),
            format_exact(&solution.x_e_interval.0),
            format_exact(&solution.x_e_interval.1)
        ),
    ));

    if fleet.n() > guards.subset_n {
        checks.push(Check::new(
            "excess-reduction",
            true,
            format!("skipped: N={} above subset guard {}", fleet.n(), guards.subset_n),
        ));
        return Ok(checks);
    }

    let mut vectors: Vec<(String, PayoffVector)> = vec![("least-core".into(), solution.allocation.to_payoffs(fleet))];
    for scheme in Scheme::ALL {
        if scheme == Scheme::LeaderSubsidy {
            for k in 1..=10 {
                let lambda = ratio(k, 10);
                vectors.push((
                    format!("LS({})", format_exact(&lambda)),
                    baseline_allocate(scheme, Some(&lambda), &structure)?,
                ));
            }
        } else {
            vectors.push((scheme.to_string(), baseline_allocate(scheme, None, &structure)?));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let hi = fleet.eps_f() * ratio(3, 2);
    for i in 0..opts.random_vectors {
        let x = (0..fleet.n())
            .map(|_| &hi * ratio(rng.gen_range(0..=1000), 1000))
            .collect();
        vectors.push((format!("random#{i}"), PayoffVector::new(x)?));
    }
    vectors.push(("zero".into(), PayoffVector::new(vec![Money::zero(); fleet.n()])?));

    let mut mismatches = Vec::new();
    for (name, x) in &vectors {
        let fast = epsilon_of(x, fleet)?.epsilon;
        let slow = brute_force_epsilon(x, fleet, guards)?;
        if fast != slow {
            mismatches.push(format!("{name}: {} vs {}", format_exact(&fast), format_exact(&slow)));
        }
    }
    checks.push(Check::new(
        "excess-reduction",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} payoff vectors agree", vectors.len())
        } else {
            mismatches.join("; ")
        },
    ));
    Ok(checks)
}
