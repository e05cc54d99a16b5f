//! Payoff allocation: the type-based least-core program, excess of arbitrary
//! payoff vectors, CS-core membership, baseline sharing schemes and the
//! stability index.
//!
//! Every deviation constraint depends on a coalition only through its
//! [`CoalitionSignature`], so the exponential family of concrete coalitions
//! collapses to the `O(M^2)` signatures returned by [`deviation_signatures`].

use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{
    value_unchecked, CoalitionSignature, CoalitionStructure, FleetSpec, PayoffVector, TruckType,
};
use crate::money::{from_usize, int, Money};

/// One common payoff per truck type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeAllocation {
    pub x_e: Money,
    pub x_f: Money,
}

impl TypeAllocation {
    pub fn new(x_e: Money, x_f: Money) -> Result<Self> {
        if x_e.is_negative() || x_f.is_negative() {
            return Err(Error::domain("type payoffs must be nonnegative"));
        }
        Ok(TypeAllocation { x_e, x_f })
    }

    pub fn payoff(&self, kind: TruckType) -> &Money {
        match kind {
            TruckType::Electric => &self.x_e,
            TruckType::Fuel => &self.x_f,
        }
    }

    /// Total received by a coalition with signature `sig`.
    pub fn coalition_total(&self, sig: CoalitionSignature) -> Money {
        &self.x_e * from_usize(sig.c_e) + &self.x_f * from_usize(sig.c_f)
    }

    /// Total paid out to the whole fleet.
    pub fn fleet_total(&self, fleet: &FleetSpec) -> Money {
        self.coalition_total(CoalitionSignature::new(fleet.n_e(), fleet.n_f()))
    }

    pub fn to_payoffs(&self, fleet: &FleetSpec) -> PayoffVector {
        let payoffs = fleet
            .trucks()
            .map(|id| match fleet.truck_type(id) {
                Some(kind) => self.payoff(kind).clone(),
                None => unreachable!("fleet ids are in range"),
            })
            .collect();
        PayoffVector::new(payoffs).expect("type payoffs are nonnegative")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeastCoreSolution {
    pub allocation: TypeAllocation,
    pub epsilon_star: Money,
    /// Closed interval of `x_e` values attaining `epsilon_star`;
    /// `allocation.x_e` is its midpoint.
    pub x_e_interval: (Money, Money),
    /// Deviation signatures whose constraint is tight at `allocation`.
    pub binding: Vec<CoalitionSignature>,
}

impl LeastCoreSolution {
    /// The allocation on the efficiency line at a given `x_e`.
    pub fn allocation_at(&self, fleet: &FleetSpec, v_total: &Money, x_e: Money) -> TypeAllocation {
        allocation_on_efficiency_line(fleet, v_total, x_e)
    }
}

/// Coalitions that may deviate: every `(c_e, c_f)` with
/// `2 <= c_e + c_f <= min(M, N)` that the fleet can staff, in lexicographic
/// order.
pub fn deviation_signatures(fleet: &FleetSpec) -> Vec<CoalitionSignature> {
    let cap = fleet.size_cap();
    let mut out = Vec::new();
    for c_e in 0..=fleet.n_e().min(cap) {
        for c_f in 0..=fleet.n_f().min(cap - c_e) {
            if c_e + c_f >= 2 {
                out.push(CoalitionSignature::new(c_e, c_f));
            }
        }
    }
    out
}

/// Largest uncovered value `v*(C) - x(C)` over deviations, clamped at zero.
fn excess(alloc: &TypeAllocation, fleet: &FleetSpec, sigs: &[CoalitionSignature]) -> Money {
    sigs.iter()
        .map(|&s| value_unchecked(s, fleet) - alloc.coalition_total(s))
        .fold(Money::zero(), |acc, e| if e > acc { e } else { acc })
}

fn allocation_on_efficiency_line(fleet: &FleetSpec, v_total: &Money, x_e: Money) -> TypeAllocation {
    let x_f = if fleet.n_f() == 0 {
        Money::zero()
    } else {
        (v_total - &x_e * from_usize(fleet.n_e())) / from_usize(fleet.n_f())
    };
    TypeAllocation { x_e, x_f }
}

/// Affine function `slope * t + intercept`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Line {
    slope: Money,
    intercept: Money,
}

impl Line {
    fn at(&self, t: &Money) -> Money {
        &self.slope * t + &self.intercept
    }
}

/// Minimum of the upper envelope of `lines` over `[lo, hi]`, with the full
/// closed interval of minimizers.
///
/// The envelope is convex and piecewise linear with kinks only at pairwise
/// intersections, so its minimum and the ends of its minimizing interval are
/// among the domain endpoints and the intersections inside the domain.
fn minimize_upper_envelope(lines: &[Line], lo: &Money, hi: &Money) -> (Money, Money, Money) {
    let envelope = |t: &Money| -> Money {
        lines
            .iter()
            .map(|l| l.at(t))
            .max()
            .expect("at least one line")
    };
    let mut candidates = vec![lo.clone(), hi.clone()];
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if a.slope != b.slope {
                let t = (&b.intercept - &a.intercept) / (&a.slope - &b.slope);
                if &t >= lo && &t <= hi {
                    candidates.push(t);
                }
            }
        }
    }
    candidates.sort();
    candidates.dedup();

    let values: Vec<Money> = candidates.iter().map(envelope).collect();
    let best = values.iter().min().expect("nonempty").clone();
    let mut minimizers = candidates
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v == best)
        .map(|(t, _)| t);
    let first = minimizers.next().expect("minimum attained").clone();
    let last = minimizers.next_back().cloned().unwrap_or_else(|| first.clone());
    (best, first, last)
}

/// Solves the type-based least-core program: minimize `eps >= 0` subject to
/// `x_e N_e + x_f N_f = v_total`, `x_e C_e + x_f C_f >= v*(C) - eps` for every
/// deviation signature, and `x_e, x_f >= 0`.
///
/// With `N_f > 0`, `x_f` is eliminated through the efficiency constraint and
/// the problem becomes the minimization of a convex piecewise-linear function
/// of `x_e` over `[0, v_total / N_e]`. For a fleet with a single type the
/// allocation is forced and the absent type's payoff is reported as zero.
pub fn solve_type_least_core(fleet: &FleetSpec, v_total: &Money) -> Result<LeastCoreSolution> {
    if v_total.is_negative() {
        return Err(Error::domain("total benefit v_total must be nonnegative"));
    }
    let sigs = deviation_signatures(fleet);
    let n_e = from_usize(fleet.n_e());
    let n_f = from_usize(fleet.n_f());

    let (epsilon_star, lo, hi) = if fleet.n_f() == 0 {
        let x_e = v_total / &n_e;
        let alloc = allocation_on_efficiency_line(fleet, v_total, x_e.clone());
        (excess(&alloc, fleet, &sigs), x_e.clone(), x_e)
    } else {
        let upper = if fleet.n_e() == 0 {
            Money::zero()
        } else {
            v_total / &n_e
        };
        // eps >= v*(C) - C_e x_e - C_f (v_total - N_e x_e) / N_f, plus eps >= 0.
        let mut lines: Vec<Line> = sigs
            .iter()
            .map(|&s| {
                let c_e = from_usize(s.c_e);
                let c_f = from_usize(s.c_f);
                Line {
                    slope: &c_f * &n_e / &n_f - c_e,
                    intercept: value_unchecked(s, fleet) - c_f * v_total / &n_f,
                }
            })
            .collect();
        lines.push(Line {
            slope: Money::zero(),
            intercept: Money::zero(),
        });
        minimize_upper_envelope(&lines, &Money::zero(), &upper)
    };

    let mid = (&lo + &hi) / int(2);
    let allocation = allocation_on_efficiency_line(fleet, v_total, mid);
    let binding = sigs
        .iter()
        .copied()
        .filter(|&s| value_unchecked(s, fleet) - allocation.coalition_total(s) == epsilon_star)
        .collect();
    Ok(LeastCoreSolution {
        allocation,
        epsilon_star,
        x_e_interval: (lo, hi),
        binding,
    })
}

/// Excess of a payoff vector against every deviating coalition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Excess {
    /// `max(0, max_C v*(C) - x(C))`: the smallest relaxation making `x`
    /// epsilon-feasible.
    pub epsilon: Money,
    /// Largest raw excess, which may be negative.
    pub max_excess: Money,
    /// Every signature attaining `max_excess`, in lexicographic order.
    pub worst: Vec<CoalitionSignature>,
}

/// Minimal relaxation for `x`, computed per signature from the cheapest
/// coalition of that signature (its `c_e` lowest-paid ETs and `c_f`
/// lowest-paid FPTs).
pub fn epsilon_of(x: &PayoffVector, fleet: &FleetSpec) -> Result<Excess> {
    if x.len() != fleet.n() {
        return Err(Error::domain(format!(
            "payoff vector has {} entries, fleet has N={}",
            x.len(),
            fleet.n()
        )));
    }
    let cheapest_e = prefix_sums_sorted(&x.payoffs()[..fleet.n_e()]);
    let cheapest_f = prefix_sums_sorted(&x.payoffs()[fleet.n_e()..]);

    let mut worst = Vec::new();
    let mut max_excess: Option<Money> = None;
    for s in deviation_signatures(fleet) {
        let e = value_unchecked(s, fleet) - &cheapest_e[s.c_e] - &cheapest_f[s.c_f];
        match &max_excess {
            Some(m) if &e < m => {}
            Some(m) if &e == m => worst.push(s),
            _ => {
                worst.clear();
                worst.push(s);
                max_excess = Some(e);
            }
        }
    }
    let max_excess = max_excess.unwrap_or_else(Money::zero);
    let epsilon = if max_excess.is_positive() {
        max_excess.clone()
    } else {
        Money::zero()
    };
    Ok(Excess {
        epsilon,
        max_excess,
        worst,
    })
}

/// `out[k]` = sum of the `k` smallest values.
fn prefix_sums_sorted(values: &[Money]) -> Vec<Money> {
    let mut sorted = values.to_vec();
    sorted.sort();
    let mut out = Vec::with_capacity(sorted.len() + 1);
    let mut acc = Money::zero();
    out.push(acc.clone());
    for v in sorted {
        acc += v;
        out.push(acc.clone());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsCoreMode {
    /// Each platoon's payoffs sum to its own value.
    Strict,
    /// Only the fleet-wide payoff sum must equal the structure's value.
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    PlatoonEfficiency { platoon: usize },
    FleetEfficiency,
    Deviation(CoalitionSignature),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::PlatoonEfficiency { platoon } => write!(f, "efficiency of platoon {platoon}"),
            Constraint::FleetEfficiency => f.write_str("fleet efficiency"),
            Constraint::Deviation(s) => write!(f, "deviation {s}"),
        }
    }
}

/// A failed constraint. For efficiency, `slack = paid - value` (nonzero);
/// for deviations, `slack = x(C) - v*(C)` at the cheapest coalition (negative).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CsViolation {
    pub constraint: Constraint,
    pub slack: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CsCoreReport {
    pub pass: bool,
    pub violations: Vec<CsViolation>,
}

impl CsCoreReport {
    /// Deviation violation with the most negative slack.
    pub fn worst_deviation(&self) -> Option<&CsViolation> {
        self.violations
            .iter()
            .filter(|v| matches!(v.constraint, Constraint::Deviation(_)))
            .min_by(|a, b| a.slack.cmp(&b.slack))
    }
}

/// CS-core membership of `x` under `structure`, at zero tolerance.
pub fn cs_core_check(x: &PayoffVector, structure: &CoalitionStructure, mode: CsCoreMode) -> Result<CsCoreReport> {
    cs_core_check_with_tolerance(x, structure, mode, &Money::zero())
}

/// As [`cs_core_check`], treating constraints missed by at most `tolerance`
/// as satisfied. Useful for published, rounded payoffs.
pub fn cs_core_check_with_tolerance(
    x: &PayoffVector,
    structure: &CoalitionStructure,
    mode: CsCoreMode,
    tolerance: &Money,
) -> Result<CsCoreReport> {
    let fleet = structure.fleet();
    let violations = structure.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidStructure(violations));
    }
    if x.len() != fleet.n() {
        return Err(Error::domain(format!(
            "payoff vector has {} entries, fleet has N={}",
            x.len(),
            fleet.n()
        )));
    }

    let mut out = Vec::new();
    match mode {
        CsCoreMode::Strict => {
            for (i, p) in structure.platoons().iter().enumerate() {
                let slack = x.sum_over(&p.members) - structure.platoon_value_unchecked(i);
                if &slack.abs() > tolerance {
                    out.push(CsViolation {
                        constraint: Constraint::PlatoonEfficiency { platoon: i },
                        slack,
                    });
                }
            }
        }
        CsCoreMode::Aggregate => {
            let total: Money = (0..structure.platoons().len())
                .map(|i| structure.platoon_value_unchecked(i))
                .sum();
            let slack = x.total() - total;
            if &slack.abs() > tolerance {
                out.push(CsViolation {
                    constraint: Constraint::FleetEfficiency,
                    slack,
                });
            }
        }
    }

    let cheapest_e = prefix_sums_sorted(&x.payoffs()[..fleet.n_e()]);
    let cheapest_f = prefix_sums_sorted(&x.payoffs()[fleet.n_e()..]);
    let floor = -tolerance.clone();
    for s in deviation_signatures(fleet) {
        let slack = &cheapest_e[s.c_e] + &cheapest_f[s.c_f] - value_unchecked(s, fleet);
        if slack < floor {
            out.push(CsViolation {
                constraint: Constraint::Deviation(s),
                slack,
            });
        }
    }
    Ok(CsCoreReport {
        pass: out.is_empty(),
        violations: out,
    })
}

/// `(1 - epsilon / v_total) * 100`.
pub fn stability_index(epsilon: &Money, v_total: &Money) -> Result<Money> {
    if !v_total.is_positive() {
        return Err(Error::domain("stability index is undefined for v_total <= 0"));
    }
    if epsilon.is_negative() {
        return Err(Error::domain("relaxation epsilon must be nonnegative"));
    }
    Ok((Money::one() - epsilon / v_total) * int(100))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StabilityReport {
    pub epsilon_of_x: Money,
    pub v_total: Money,
    pub index_percent: Money,
    pub worst_deviations: Vec<CoalitionSignature>,
}

pub fn stability_report(x: &PayoffVector, fleet: &FleetSpec, v_total: &Money) -> Result<StabilityReport> {
    let excess = epsilon_of(x, fleet)?;
    let index_percent = stability_index(&excess.epsilon, v_total)?;
    Ok(StabilityReport {
        epsilon_of_x: excess.epsilon,
        v_total: v_total.clone(),
        index_percent,
        worst_deviations: excess.worst,
    })
}

/// Baseline benefit-sharing rules applied within a fixed structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Fleet-based equal split.
    FleetEqualSplit,
    /// Platoon-based equal split.
    PlatoonEqualSplit,
    /// Followers split equally, leader gets nothing.
    FollowerOnly,
    /// Followers split in proportion to their type rates, leader gets nothing.
    TypeProportional,
    /// Leader receives a fraction `lambda` of the platoon value, followers
    /// split the rest in proportion to their type rates.
    LeaderSubsidy,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::FleetEqualSplit,
        Scheme::PlatoonEqualSplit,
        Scheme::FollowerOnly,
        Scheme::TypeProportional,
        Scheme::LeaderSubsidy,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            Scheme::FleetEqualSplit => "F-ES",
            Scheme::PlatoonEqualSplit => "P-ES",
            Scheme::FollowerOnly => "FO",
            Scheme::TypeProportional => "TP",
            Scheme::LeaderSubsidy => "LS",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::domain(format!("unknown scheme {s:?}; expected one of F-ES, P-ES, FO, TP, LS")))
    }
}

/// Payoffs of a baseline scheme under `structure`.
///
/// `lambda` must be given, in `(0, 1]`, exactly when `scheme` is
/// [`Scheme::LeaderSubsidy`].
pub fn baseline_allocate(scheme: Scheme, lambda: Option<&Money>, structure: &CoalitionStructure) -> Result<PayoffVector> {
    match (scheme, lambda) {
        (Scheme::LeaderSubsidy, None) => {
            return Err(Error::domain("LS requires a subsidy fraction lambda"))
        }
        (Scheme::LeaderSubsidy, Some(l)) if !l.is_positive() || l > &Money::one() => {
            return Err(Error::domain("LS subsidy fraction lambda must lie in (0, 1]"))
        }
        (Scheme::LeaderSubsidy, Some(_)) => {}
        (_, Some(_)) => {
            return Err(Error::domain(format!("scheme {scheme} takes no lambda")))
        }
        (_, None) => {}
    }
    let violations = structure.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidStructure(violations));
    }

    let fleet = structure.fleet();
    let mut x = vec![Money::zero(); fleet.n()];
    let rate_of = |id| fleet.rate(fleet.truck_type(id).expect("validated member"));
    let values: Vec<Money> = (0..structure.platoons().len())
        .map(|i| structure.platoon_value_unchecked(i))
        .collect();

    if scheme == Scheme::FleetEqualSplit {
        let share = values.iter().sum::<Money>() / from_usize(fleet.n());
        return PayoffVector::new(vec![share; fleet.n()]);
    }

    for (p, v) in structure.platoons().iter().zip(&values) {
        match scheme {
            Scheme::FleetEqualSplit => unreachable!(),
            Scheme::PlatoonEqualSplit => {
                let share = v / from_usize(p.len());
                for &m in &p.members {
                    x[m - 1] = share.clone();
                }
            }
            Scheme::FollowerOnly => {
                let share = v / from_usize(p.len() - 1);
                for f in p.followers() {
                    x[f - 1] = share.clone();
                }
            }
            Scheme::TypeProportional | Scheme::LeaderSubsidy => {
                let subsidy = match lambda {
                    Some(l) if scheme == Scheme::LeaderSubsidy => l * v,
                    _ => Money::zero(),
                };
                let pot = v - &subsidy;
                let weight: Money = p.followers().map(rate_of).sum();
                for f in p.followers() {
                    x[f - 1] = &pot * rate_of(f) / &weight;
                }
                x[p.leader - 1] = subsidy;
            }
        }
    }
    PayoffVector::new(x)
}
