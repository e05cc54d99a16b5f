//! Brute-force ground truth.
//!
//! Nothing here relies on the closed forms in [`crate::formation`] or on the
//! signature reduction in [`crate::allocation`]: coalition values are
//! maximized over explicit leader choices, structures are enumerated
//! exhaustively and excesses are taken over every concrete subset.

use std::collections::BTreeMap;
use std::fmt;

use num::Zero;

use crate::error::{Error, Result};
use crate::model::{CoalitionSignature, FleetSpec, PayoffVector, TruckId, TruckType};
use crate::money::{from_usize, Money};

pub mod verify;

/// Size caps for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    /// Largest fleet for structure enumeration.
    pub partition_n: usize,
    /// Largest fleet for concrete subset enumeration.
    pub subset_n: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            partition_n: 16,
            subset_n: 12,
        }
    }
}

impl Guards {
    fn check_partitions(&self, fleet: &FleetSpec) -> Result<()> {
        if fleet.n() > self.partition_n {
            return Err(Error::GuardExceeded {
                what: "structure enumeration",
                n: fleet.n(),
                cap: self.partition_n,
            });
        }
        Ok(())
    }

    fn check_subsets(&self, fleet: &FleetSpec) -> Result<()> {
        if fleet.n() > self.subset_n {
            return Err(Error::GuardExceeded {
                what: "subset enumeration",
                n: fleet.n(),
                cap: self.subset_n,
            });
        }
        Ok(())
    }
}

/// Benefit of a coalition maximized over every member as leader.
fn best_leader_value(sig: CoalitionSignature, fleet: &FleetSpec) -> Money {
    let mut best = Money::zero();
    for leader in TruckType::ALL {
        if sig.count(leader) == 0 {
            continue;
        }
        let mut v = Money::zero();
        for follower in TruckType::ALL {
            let n = sig.count(follower) - usize::from(follower == leader);
            v += fleet.rate(follower) * from_usize(n);
        }
        if v > best {
            best = v;
        }
    }
    best
}

/// A coalition structure up to relabeling trucks of the same type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignaturePartition {
    /// Parts sorted in descending order.
    pub parts: Vec<CoalitionSignature>,
}

impl SignaturePartition {
    pub fn benefit(&self, fleet: &FleetSpec) -> Money {
        self.parts.iter().map(|&p| best_leader_value(p, fleet)).sum()
    }

    pub fn platoon_count(&self) -> usize {
        self.parts.len()
    }

    /// Parts that contain at least one ET.
    pub fn electric_led(&self) -> usize {
        self.parts.iter().filter(|p| p.c_e >= 1).count()
    }
}

impl fmt::Display for SignaturePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Every multiset of signatures covering the fleet with part sizes in
/// `[2, min(M, N)]`, each exactly once.
pub fn enumerate_signature_partitions(fleet: &FleetSpec, guards: &Guards) -> Result<Vec<SignaturePartition>> {
    guards.check_partitions(fleet)?;
    let cap = fleet.size_cap();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    let top = CoalitionSignature::new(fleet.n_e(), fleet.n_f());
    extend_partitions(fleet.n_e(), fleet.n_f(), top, cap, &mut stack, &mut out);
    Ok(out)
}

/// Appends every completion of `stack` using parts no larger than `bound`
/// (in signature order), which keeps the parts non-increasing.
fn extend_partitions(
    rest_e: usize,
    rest_f: usize,
    bound: CoalitionSignature,
    cap: usize,
    stack: &mut Vec<CoalitionSignature>,
    out: &mut Vec<SignaturePartition>,
) {
    if rest_e == 0 && rest_f == 0 {
        out.push(SignaturePartition {
            parts: stack.clone(),
        });
        return;
    }
    for c_e in (0..=rest_e.min(bound.c_e)).rev() {
        for c_f in (0..=rest_f).rev() {
            let part = CoalitionSignature::new(c_e, c_f);
            if part > bound || part.size() < 2 || part.size() > cap {
                continue;
            }
            // The remainder must still be coverable by parts of size >= 2.
            let left = rest_e + rest_f - part.size();
            if left == 1 {
                continue;
            }
            stack.push(part);
            extend_partitions(rest_e - c_e, rest_f - c_f, part, cap, stack, out);
            stack.pop();
        }
    }
}

/// Every labeled partition of the fleet into blocks of size `[2, min(M, N)]`.
/// Blocks list trucks in ascending ID order; the callback sees each
/// partition once.
pub fn for_each_concrete_partition(
    fleet: &FleetSpec,
    guards: &Guards,
    mut visit: impl FnMut(&[Vec<TruckId>]),
) -> Result<()> {
    guards.check_partitions(fleet)?;
    fn go(
        next: TruckId,
        n: usize,
        cap: usize,
        blocks: &mut Vec<Vec<TruckId>>,
        visit: &mut dyn FnMut(&[Vec<TruckId>]),
    ) {
        let singletons = blocks.iter().filter(|b| b.len() == 1).count();
        if singletons > n + 1 - next {
            return;
        }
        if next > n {
            if singletons == 0 {
                visit(blocks);
            }
            return;
        }
        for i in 0..blocks.len() {
            if blocks[i].len() < cap {
                blocks[i].push(next);
                go(next + 1, n, cap, blocks, visit);
                blocks[i].pop();
            }
        }
        blocks.push(vec![next]);
        go(next + 1, n, cap, blocks, visit);
        blocks.pop();
    }
    let mut blocks = Vec::new();
    go(1, fleet.n(), fleet.size_cap(), &mut blocks, &mut visit);
    Ok(())
}

/// Collapses a labeled partition to its canonical signature partition.
pub fn signature_of_partition(fleet: &FleetSpec, blocks: &[Vec<TruckId>]) -> Result<SignaturePartition> {
    let mut parts = blocks
        .iter()
        .map(|b| CoalitionSignature::of_members(fleet, b))
        .collect::<Result<Vec<_>>>()?;
    parts.sort_by(|a, b| b.cmp(a));
    Ok(SignaturePartition { parts })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestStructures {
    pub max_benefit: Money,
    pub witnesses: Vec<SignaturePartition>,
}

/// Maximum structure benefit over the full enumeration, with every maximizer.
pub fn brute_force_best(fleet: &FleetSpec, guards: &Guards) -> Result<BestStructures> {
    let all = enumerate_signature_partitions(fleet, guards)?;
    let mut best: Option<Money> = None;
    let mut witnesses = Vec::new();
    for p in all {
        let b = p.benefit(fleet);
        match &best {
            Some(m) if &b < m => {}
            Some(m) if &b == m => witnesses.push(p),
            _ => {
                best = Some(b);
                witnesses = vec![p];
            }
        }
    }
    match best {
        Some(max_benefit) => Ok(BestStructures {
            max_benefit,
            witnesses,
        }),
        None => Err(Error::Infeasible(crate::formation::FeasibilityReport {
            feasible: false,
            p_min: fleet.n().div_ceil(fleet.max_size()),
            p_max: fleet.n() / 2,
            reason: Some(format!(
                "no structure of N={} trucks into platoons of size 2..={} exists",
                fleet.n(),
                fleet.size_cap()
            )),
        })),
    }
}

/// `max(0, max_C v*(C) - x(C))` over every concrete subset with
/// `2 <= |C| <= min(M, N)`.
pub fn brute_force_epsilon(x: &PayoffVector, fleet: &FleetSpec, guards: &Guards) -> Result<Money> {
    guards.check_subsets(fleet)?;
    let n = fleet.n();
    if x.len() != n {
        return Err(Error::domain(format!(
            "payoff vector has {} entries, fleet has N={n}",
            x.len()
        )));
    }
    let cap = fleet.size_cap() as u32;
    // paid[mask] and ets[mask] built from the mask with its lowest bit cleared.
    let full = 1usize << n;
    let mut paid = vec![Money::zero(); full];
    let mut ets = vec![0usize; full];
    let mut worst = Money::zero();
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        paid[mask] = &paid[rest] + &x.payoffs()[low];
        ets[mask] = ets[rest] + usize::from(fleet.truck_type(low + 1) == Some(TruckType::Electric));
        let size = mask.count_ones();
        if size < 2 || size > cap {
            continue;
        }
        let sig = CoalitionSignature::new(ets[mask], size as usize - ets[mask]);
        let e = best_leader_value(sig, fleet) - &paid[mask];
        if e > worst {
            worst = e;
        }
    }
    Ok(worst)
}

/// Number of structure classes attaining each total benefit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenefitHistogram {
    pub entries: BTreeMap<Money, usize>,
    /// Ascending.
    pub distinct_values: Vec<Money>,
}

impl BenefitHistogram {
    pub fn total_count(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn max_benefit(&self) -> Option<&Money> {
        self.distinct_values.last()
    }
}

pub fn benefit_distribution(fleet: &FleetSpec, guards: &Guards) -> Result<BenefitHistogram> {
    let mut entries = BTreeMap::new();
    for p in enumerate_signature_partitions(fleet, guards)? {
        *entries.entry(p.benefit(fleet)).or_insert(0) += 1;
    }
    let distinct_values = entries.keys().cloned().collect();
    Ok(BenefitHistogram {
        entries,
        distinct_values,
    })
}
