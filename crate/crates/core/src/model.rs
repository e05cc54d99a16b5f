//! Fleet, coalition and coalition-structure types and the platooning
//! characteristic function.
//!
//! Trucks are identified by 1-based consecutive IDs with the electric trucks
//! numbered first: a fleet with `n_e = 3, n_f = 6` has ETs `{1, 2, 3}` and
//! FPTs `{4, ..., 9}`.

use std::collections::BTreeSet;
use std::fmt;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::money::{from_usize, Money};

pub type TruckId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruckType {
    Electric,
    Fuel,
}

impl TruckType {
    pub const ALL: [TruckType; 2] = [TruckType::Electric, TruckType::Fuel];
}

impl fmt::Display for TruckType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruckType::Electric => "ET",
            TruckType::Fuel => "FPT",
        })
    }
}

/// Fleet composition, per-type follower benefit rates and the platoon size
/// limit `M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FleetSpec {
    n_e: usize,
    n_f: usize,
    eps_e: Money,
    eps_f: Money,
    max_size: usize,
}

impl FleetSpec {
    pub fn new(n_e: usize, n_f: usize, eps_e: Money, eps_f: Money, max_size: usize) -> Result<Self> {
        if n_e + n_f < 2 {
            return Err(Error::domain(format!(
                "fleet needs at least 2 trucks, got N={}",
                n_e + n_f
            )));
        }
        if !eps_e.is_positive() {
            return Err(Error::domain("ET benefit rate eps_e must be positive"));
        }
        if eps_e > eps_f {
            return Err(Error::domain("ET benefit rate eps_e must not exceed eps_f"));
        }
        if max_size < 2 {
            return Err(Error::domain(format!(
                "platoon size limit must be at least 2, got M={max_size}"
            )));
        }
        Ok(FleetSpec {
            n_e,
            n_f,
            eps_e,
            eps_f,
            max_size,
        })
    }

    /// Same fleet and rates under a different size limit.
    pub fn with_max_size(&self, max_size: usize) -> Result<Self> {
        FleetSpec::new(self.n_e, self.n_f, self.eps_e.clone(), self.eps_f.clone(), max_size)
    }

    /// Same composition with both rates multiplied by `factor > 0`.
    pub fn scaled(&self, factor: &Money) -> Result<Self> {
        FleetSpec::new(
            self.n_e,
            self.n_f,
            &self.eps_e * factor,
            &self.eps_f * factor,
            self.max_size,
        )
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn n_f(&self) -> usize {
        self.n_f
    }

    pub fn n(&self) -> usize {
        self.n_e + self.n_f
    }

    pub fn eps_e(&self) -> &Money {
        &self.eps_e
    }

    pub fn eps_f(&self) -> &Money {
        &self.eps_f
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn rate(&self, kind: TruckType) -> &Money {
        match kind {
            TruckType::Electric => &self.eps_e,
            TruckType::Fuel => &self.eps_f,
        }
    }

    /// `M >= N`: the grand coalition is admissible.
    pub fn grand_coalition_allowed(&self) -> bool {
        self.max_size >= self.n()
    }

    /// Largest admissible coalition size, `min(M, N)`.
    pub fn size_cap(&self) -> usize {
        self.max_size.min(self.n())
    }

    /// `None` for IDs outside `1..=N`.
    pub fn truck_type(&self, id: TruckId) -> Option<TruckType> {
        match id {
            0 => None,
            i if i <= self.n_e => Some(TruckType::Electric),
            i if i <= self.n() => Some(TruckType::Fuel),
            _ => None,
        }
    }

    pub fn trucks(&self) -> std::ops::RangeInclusive<TruckId> {
        1..=self.n()
    }

    pub fn electric_ids(&self) -> std::ops::RangeInclusive<TruckId> {
        1..=self.n_e
    }

    pub fn fuel_ids(&self) -> std::ops::RangeInclusive<TruckId> {
        self.n_e + 1..=self.n()
    }
}

/// Type-aggregated coalition: how many ETs and FPTs it contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CoalitionSignature {
    pub c_e: usize,
    pub c_f: usize,
}

impl CoalitionSignature {
    pub const fn new(c_e: usize, c_f: usize) -> Self {
        CoalitionSignature { c_e, c_f }
    }

    pub fn size(&self) -> usize {
        self.c_e + self.c_f
    }

    pub fn count(&self, kind: TruckType) -> usize {
        match kind {
            TruckType::Electric => self.c_e,
            TruckType::Fuel => self.c_f,
        }
    }

    /// Signature of a set of concrete trucks. Unknown IDs are an error.
    pub fn of_members(fleet: &FleetSpec, members: &[TruckId]) -> Result<Self> {
        let mut sig = CoalitionSignature::default();
        for &id in members {
            match fleet.truck_type(id) {
                Some(TruckType::Electric) => sig.c_e += 1,
                Some(TruckType::Fuel) => sig.c_f += 1,
                None => return Err(Error::domain(format!("truck {id} is not in the fleet"))),
            }
        }
        Ok(sig)
    }
}

impl fmt::Display for CoalitionSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.c_e, self.c_f)
    }
}

/// Benefit of `sig` when a truck of type `leader` leads it: every other
/// member is a follower earning its type's rate. Callers guarantee that the
/// leader type is present.
pub(crate) fn value_with_leader(sig: CoalitionSignature, leader: TruckType, fleet: &FleetSpec) -> Money {
    let (e, f) = match leader {
        TruckType::Electric => (sig.c_e - 1, sig.c_f),
        TruckType::Fuel => (sig.c_e, sig.c_f - 1),
    };
    fleet.eps_e() * from_usize(e) + fleet.eps_f() * from_usize(f)
}

/// Characteristic function `v`: the best benefit a coalition can secure by
/// its choice of leader.
pub fn coalition_value(sig: CoalitionSignature, fleet: &FleetSpec) -> Result<Money> {
    let cap = fleet.size_cap();
    if sig.size() > cap {
        return Err(Error::domain(format!(
            "coalition {sig} has size {} above the admissible maximum {cap} (M={}, N={})",
            sig.size(),
            fleet.max_size(),
            fleet.n()
        )));
    }
    if sig.c_e > fleet.n_e() {
        return Err(Error::domain(format!(
            "coalition {sig} has {} ETs but the fleet has only N_e={}",
            sig.c_e,
            fleet.n_e()
        )));
    }
    if sig.c_f > fleet.n_f() {
        return Err(Error::domain(format!(
            "coalition {sig} has {} FPTs but the fleet has only N_f={}",
            sig.c_f,
            fleet.n_f()
        )));
    }
    Ok(value_unchecked(sig, fleet))
}

/// `v` without bound checks.
pub(crate) fn value_unchecked(sig: CoalitionSignature, fleet: &FleetSpec) -> Money {
    if sig.size() <= 1 {
        return Money::zero();
    }
    let leader = if sig.c_e >= 1 {
        TruckType::Electric
    } else {
        TruckType::Fuel
    };
    value_with_leader(sig, leader, fleet)
}

/// The leader type maximizing the coalition's benefit, given `eps_e <= eps_f`.
pub fn optimal_leader_type(sig: CoalitionSignature) -> Result<TruckType> {
    match sig {
        CoalitionSignature { c_e: 0, c_f: 0 } => {
            Err(Error::domain("an empty coalition has no leader"))
        }
        CoalitionSignature { c_e: 0, .. } => Ok(TruckType::Fuel),
        _ => Ok(TruckType::Electric),
    }
}

/// A platoon of concrete trucks. By convention `members` lists the leader
/// first, followed by the followers in the order they joined.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Platoon {
    pub leader: TruckId,
    pub members: Vec<TruckId>,
}

impl Platoon {
    pub fn new(leader: TruckId, members: Vec<TruckId>) -> Self {
        Platoon { leader, members }
    }

    /// Platoon led by the first listed member.
    pub fn led_by_first(members: Vec<TruckId>) -> Self {
        Platoon {
            leader: members.first().copied().unwrap_or_default(),
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn followers(&self) -> impl Iterator<Item = TruckId> + '_ {
        let leader = self.leader;
        self.members.iter().copied().filter(move |&m| m != leader)
    }
}

impl fmt::Display for Platoon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

/// A proposed partition of the fleet into platoons. Construction does not
/// validate; see [`CoalitionStructure::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoalitionStructure {
    fleet: FleetSpec,
    platoons: Vec<Platoon>,
}

/// A violated structural condition, with the offending platoon index
/// (0-based) where one exists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Violation {
    UnknownTruck { platoon: usize, truck: TruckId },
    LeaderNotMember { platoon: usize, leader: TruckId },
    SizeBelowTwo { platoon: usize, size: usize },
    SizeAboveLimit { platoon: usize, size: usize, limit: usize },
    /// `trucks` already appeared in an earlier platoon (or earlier in the same one).
    NotDisjoint { platoon: usize, trucks: Vec<TruckId> },
    Uncovered { trucks: Vec<TruckId> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownTruck { platoon, truck } => {
                write!(f, "platoon {platoon}: truck {truck} is not in the fleet")
            }
            Violation::LeaderNotMember { platoon, leader } => {
                write!(f, "platoon {platoon}: leader {leader} is not a member")
            }
            Violation::SizeBelowTwo { platoon, size } => {
                write!(f, "platoon {platoon}: size {size} is below 2")
            }
            Violation::SizeAboveLimit {
                platoon,
                size,
                limit,
            } => write!(f, "platoon {platoon}: size {size} exceeds M={limit}"),
            Violation::NotDisjoint { platoon, trucks } => {
                write!(f, "platoon {platoon}: trucks {trucks:?} appear more than once")
            }
            Violation::Uncovered { trucks } => write!(f, "trucks {trucks:?} are in no platoon"),
        }
    }
}

impl CoalitionStructure {
    pub fn new(fleet: FleetSpec, platoons: Vec<Platoon>) -> Self {
        CoalitionStructure { fleet, platoons }
    }

    /// Structure whose platoons are led by their first listed member.
    pub fn from_groups(fleet: FleetSpec, groups: Vec<Vec<TruckId>>) -> Self {
        let platoons = groups.into_iter().map(Platoon::led_by_first).collect();
        CoalitionStructure { fleet, platoons }
    }

    pub fn fleet(&self) -> &FleetSpec {
        &self.fleet
    }

    pub fn platoons(&self) -> &[Platoon] {
        &self.platoons
    }

    /// Every violated condition; empty iff the structure is a valid
    /// size-bounded partition with leaders inside their platoons.
    pub fn validate(&self) -> Vec<Violation> {
        let limit = self.fleet.max_size();
        let mut out = Vec::new();
        for (i, p) in self.platoons.iter().enumerate() {
            for &m in &p.members {
                if self.fleet.truck_type(m).is_none() {
                    out.push(Violation::UnknownTruck { platoon: i, truck: m });
                }
            }
            if !p.members.contains(&p.leader) {
                out.push(Violation::LeaderNotMember {
                    platoon: i,
                    leader: p.leader,
                });
            }
            if p.len() < 2 {
                out.push(Violation::SizeBelowTwo {
                    platoon: i,
                    size: p.len(),
                });
            }
            if p.len() > limit {
                out.push(Violation::SizeAboveLimit {
                    platoon: i,
                    size: p.len(),
                    limit,
                });
            }
        }

        let mut seen = BTreeSet::new();
        for (i, p) in self.platoons.iter().enumerate() {
            let repeated: Vec<TruckId> = p.members.iter().copied().filter(|&m| !seen.insert(m)).collect();
            if !repeated.is_empty() {
                out.push(Violation::NotDisjoint {
                    platoon: i,
                    trucks: repeated,
                });
            }
        }
        let missing: Vec<TruckId> = self.fleet.trucks().filter(|t| !seen.contains(t)).collect();
        if !missing.is_empty() {
            out.push(Violation::Uncovered { trucks: missing });
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidStructure(violations))
        }
    }

    /// Signature of platoon `index`. Panics on an out-of-range index.
    pub fn signature(&self, index: usize) -> CoalitionSignature {
        let mut sig = CoalitionSignature::default();
        for &m in &self.platoons[index].members {
            match self.fleet.truck_type(m) {
                Some(TruckType::Electric) => sig.c_e += 1,
                Some(TruckType::Fuel) => sig.c_f += 1,
                None => {}
            }
        }
        sig
    }

    /// Benefit of platoon `index` under its designated leader.
    pub fn platoon_value(&self, index: usize) -> Result<Money> {
        self.ensure_valid()?;
        Ok(self.platoon_value_unchecked(index))
    }

    pub(crate) fn platoon_value_unchecked(&self, index: usize) -> Money {
        let leader = self.platoons[index].leader;
        let kind = self
            .fleet
            .truck_type(leader)
            .expect("validated leader is a fleet member");
        value_with_leader(self.signature(index), kind, &self.fleet)
    }

    /// Number of platoons led by an ET and by an FPT.
    pub fn leader_counts(&self) -> (usize, usize) {
        let e = self
            .platoons
            .iter()
            .filter(|p| self.fleet.truck_type(p.leader) == Some(TruckType::Electric))
            .count();
        (e, self.platoons.len() - e)
    }
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.platoons.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Total benefit of a structure: each platoon valued under its designated
/// leader.
pub fn structure_value(structure: &CoalitionStructure) -> Result<Money> {
    structure.ensure_valid()?;
    Ok((0..structure.platoons.len())
        .map(|i| structure.platoon_value_unchecked(i))
        .sum())
}

/// Per-truck payoffs, indexed by truck ID (`payoffs()[id - 1]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PayoffVector {
    payoffs: Vec<Money>,
}

impl PayoffVector {
    pub fn new(payoffs: Vec<Money>) -> Result<Self> {
        if let Some(i) = payoffs.iter().position(Signed::is_negative) {
            return Err(Error::domain(format!(
                "payoff of truck {} is negative; individual rationality requires x_i >= 0",
                i + 1
            )));
        }
        Ok(PayoffVector { payoffs })
    }

    pub fn payoffs(&self) -> &[Money] {
        &self.payoffs
    }

    pub fn len(&self) -> usize {
        self.payoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payoffs.is_empty()
    }

    pub fn get(&self, id: TruckId) -> Option<&Money> {
        id.checked_sub(1).and_then(|i| self.payoffs.get(i))
    }

    pub fn total(&self) -> Money {
        self.payoffs.iter().sum()
    }

    pub fn sum_over(&self, members: &[TruckId]) -> Money {
        members.iter().filter_map(|&m| self.get(m)).sum()
    }

    pub fn into_inner(self) -> Vec<Money> {
        self.payoffs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::{int, ratio};

    fn paper_fleet(m: usize) -> FleetSpec {
        FleetSpec::new(3, 6, ratio(48, 1000), ratio(7, 100), m).unwrap()
    }

    /// Value with the leader chosen by trying every present type.
    fn best_over_leaders(sig: CoalitionSignature, fleet: &FleetSpec) -> Money {
        TruckType::ALL
            .iter()
            .filter(|&&t| sig.count(t) >= 1)
            .map(|&t| value_with_leader(sig, t, fleet))
            .max()
            .unwrap_or_else(Money::zero)
    }

    #[test]
    fn fleet_invariants() {
        assert!(FleetSpec::new(1, 0, ratio(1, 10), ratio(1, 10), 2).is_err());
        assert!(FleetSpec::new(1, 1, Money::zero(), ratio(1, 10), 2).is_err());
        assert!(FleetSpec::new(1, 1, ratio(2, 10), ratio(1, 10), 2).is_err());
        assert!(FleetSpec::new(1, 1, ratio(1, 10), ratio(1, 10), 1).is_err());
        assert!(FleetSpec::new(1, 1, ratio(1, 10), ratio(1, 10), 2).is_ok());
    }

    #[test]
    fn ids_number_electric_first() {
        let f = paper_fleet(4);
        assert_eq!(f.truck_type(1), Some(TruckType::Electric));
        assert_eq!(f.truck_type(3), Some(TruckType::Electric));
        assert_eq!(f.truck_type(4), Some(TruckType::Fuel));
        assert_eq!(f.truck_type(9), Some(TruckType::Fuel));
        assert_eq!(f.truck_type(0), None);
        assert_eq!(f.truck_type(10), None);
    }

    #[test]
    fn coalition_value_examples() {
        let f = paper_fleet(4);
        let sig = CoalitionSignature::new(1, 3);
        assert_eq!(coalition_value(sig, &f).unwrap(), ratio(21, 100));
        assert_eq!(best_over_leaders(sig, &f), ratio(21, 100));
        assert_eq!(coalition_value(CoalitionSignature::new(0, 1), &f).unwrap(), Money::zero());
        assert_eq!(coalition_value(CoalitionSignature::new(1, 0), &f).unwrap(), Money::zero());
        assert_eq!(
            coalition_value(CoalitionSignature::new(3, 6), &paper_fleet(9)).unwrap(),
            ratio(516, 1000)
        );
        assert_eq!(
            coalition_value(CoalitionSignature::new(0, 4), &f).unwrap(),
            ratio(21, 100)
        );
    }

    #[test]
    fn coalition_value_bounds() {
        let f = paper_fleet(4);
        let err = coalition_value(CoalitionSignature::new(1, 4), &f).unwrap_err();
        assert!(err.to_string().contains("admissible maximum 4"), "{err}");
        let err = coalition_value(CoalitionSignature::new(3, 6), &paper_fleet(12)).unwrap();
        assert_eq!(err, ratio(516, 1000));
        let small = FleetSpec::new(1, 5, ratio(1, 10), ratio(1, 5), 6).unwrap();
        let err = coalition_value(CoalitionSignature::new(2, 0), &small).unwrap_err();
        assert!(err.to_string().contains("N_e=1"), "{err}");
        let err = coalition_value(CoalitionSignature::new(0, 6), &small).unwrap_err();
        assert!(err.to_string().contains("N_f=5"), "{err}");
    }

    #[test]
    fn leader_type() {
        use TruckType::*;
        assert_eq!(optimal_leader_type(CoalitionSignature::new(1, 3)).unwrap(), Electric);
        assert_eq!(optimal_leader_type(CoalitionSignature::new(0, 4)).unwrap(), Fuel);
        assert_eq!(optimal_leader_type(CoalitionSignature::new(3, 0)).unwrap(), Electric);
        assert!(optimal_leader_type(CoalitionSignature::new(0, 0)).is_err());
    }

    #[test]
    fn structure_values_from_worked_example() {
        let f = paper_fleet(4);
        let best = CoalitionStructure::from_groups(
            f.clone(),
            vec![vec![1, 4, 5, 6], vec![2, 7, 8], vec![3, 9]],
        );
        assert_eq!(structure_value(&best).unwrap(), ratio(42, 100));
        let p1 = CoalitionStructure::from_groups(
            f.clone(),
            vec![vec![1, 2, 3], vec![4, 5], vec![6, 7], vec![8, 9]],
        );
        assert_eq!(structure_value(&p1).unwrap(), ratio(306, 1000));
        let grand = CoalitionStructure::from_groups(paper_fleet(9), vec![(1..=9).collect()]);
        assert_eq!(structure_value(&grand).unwrap(), ratio(516, 1000));
    }

    #[test]
    fn structure_value_respects_designated_leader() {
        let f = paper_fleet(4);
        // FPT 4 leads a platoon that contains ET 1: ET 1 becomes a follower.
        let s = CoalitionStructure::new(
            f.clone(),
            vec![
                Platoon::new(4, vec![4, 1, 5, 6]),
                Platoon::led_by_first(vec![2, 7, 8]),
                Platoon::led_by_first(vec![3, 9]),
            ],
        );
        // 0.048 + 0.14 + 0.14 + 0.07
        assert_eq!(structure_value(&s).unwrap(), ratio(398, 1000));
    }

    #[test]
    fn validation_examples() {
        let f = paper_fleet(4);
        let best = CoalitionStructure::from_groups(
            f.clone(),
            vec![vec![1, 4, 5, 6], vec![2, 7, 8], vec![3, 9]],
        );
        assert!(best.validate().is_empty());

        let bad = CoalitionStructure::from_groups(f.clone(), vec![vec![1], (2..=9).collect()]);
        assert_eq!(
            bad.validate(),
            vec![
                Violation::SizeBelowTwo { platoon: 0, size: 1 },
                Violation::SizeAboveLimit {
                    platoon: 1,
                    size: 8,
                    limit: 4
                },
            ]
        );

        let overlap = CoalitionStructure::from_groups(f.clone(), vec![vec![1, 2], vec![2, 3]]);
        assert_eq!(
            overlap.validate(),
            vec![
                Violation::NotDisjoint {
                    platoon: 1,
                    trucks: vec![2]
                },
                Violation::Uncovered {
                    trucks: vec![4, 5, 6, 7, 8, 9]
                },
            ]
        );
        assert!(matches!(structure_value(&overlap), Err(Error::InvalidStructure(v)) if v.len() == 2));
    }

    #[test]
    fn validation_catches_leader_and_unknown_ids() {
        let f = FleetSpec::new(1, 3, ratio(1, 20), ratio(1, 10), 2).unwrap();
        let s = CoalitionStructure::new(
            f,
            vec![Platoon::new(3, vec![1, 2]), Platoon::new(3, vec![3, 7])],
        );
        assert_eq!(
            s.validate(),
            vec![
                Violation::LeaderNotMember { platoon: 0, leader: 3 },
                Violation::UnknownTruck { platoon: 1, truck: 7 },
                Violation::Uncovered { trucks: vec![4] },
            ]
        );
    }

    #[test]
    fn display_forms() {
        let s = CoalitionStructure::from_groups(paper_fleet(4), vec![vec![1, 4], vec![2, 3]]);
        assert_eq!(s.to_string(), "{{1,4},{2,3}}");
        assert_eq!(CoalitionSignature::new(1, 3).to_string(), "(1,3)");
    }

    #[test]
    fn payoff_vector_rejects_negative() {
        assert!(PayoffVector::new(vec![int(1), ratio(-1, 5)]).is_err());
        let x = PayoffVector::new(vec![int(1), int(2), int(3)]).unwrap();
        assert_eq!(x.get(3), Some(&int(3)));
        assert_eq!(x.get(0), None);
        assert_eq!(x.sum_over(&[1, 3]), int(4));
        assert_eq!(x.total(), int(6));
    }
}
