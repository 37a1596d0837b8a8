//! Deterministic fail-stop fault localization as a Boolean assignment
//! problem: find health assignments consistent with an observed symptom
//! pattern while maximizing the number of working components, and report
//! which explanations are observationally indistinguishable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{SymptomPattern, Topology};

/// Total health assignment: component id -> working (true) / failed (false).
pub type Assignment = BTreeMap<String, bool>;

/// The failed components of one candidate explanation.
pub type FaultSet = BTreeSet<String>;

/// Exhaustive enumeration bound. Beyond this the search space (2^n
/// assignments) stops being a desk-scale computation.
pub const MAX_EXHAUSTIVE_COMPONENTS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatError {
    /// The pattern lacks a bit for a request type declared by the topology.
    PatternMissingRequestType(String),
    /// The pattern carries a bit for an unknown request type.
    UnknownRequestType(String),
    /// The assignment lacks an entry for a declared component.
    IncompleteAssignment(String),
    UnknownComponent(String),
    TooManyComponents { count: usize, max: usize },
}

impl fmt::Display for SatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatError::PatternMissingRequestType(id) => {
                write!(f, "symptom pattern is missing request type `{id}`")
            }
            SatError::UnknownRequestType(id) => {
                write!(f, "symptom pattern names unknown request type `{id}`")
            }
            SatError::IncompleteAssignment(id) => {
                write!(f, "assignment is missing component `{id}`")
            }
            SatError::UnknownComponent(id) => write!(f, "unknown component `{id}`"),
            SatError::TooManyComponents { count, max } => write!(
                f,
                "{count} components exceed the exhaustive search bound of {max}"
            ),
        }
    }
}

impl core::error::Error for SatError {}

fn check_pattern(t: &Topology, pattern: &SymptomPattern) -> Result<(), SatError> {
    for rt in t.request_types() {
        if pattern.get(&rt.id).is_none() {
            return Err(SatError::PatternMissingRequestType(rt.id.clone()));
        }
    }
    for (id, _) in pattern.iter() {
        if t.request_type(id).is_none() {
            return Err(SatError::UnknownRequestType(id.to_string()));
        }
    }
    Ok(())
}

/// True iff under `assignment` every request type's dependency expression
/// evaluates to exactly the observed bit.
pub fn check_assignment(
    t: &Topology,
    assignment: &Assignment,
    pattern: &SymptomPattern,
) -> Result<bool, SatError> {
    check_pattern(t, pattern)?;
    for c in t.components() {
        if !assignment.contains_key(&c.id) {
            return Err(SatError::IncompleteAssignment(c.id.clone()));
        }
    }
    Ok(t.request_types().iter().all(|rt| {
        let value = rt.expr.evaluate(|id| assignment[id]);
        value == pattern.get(&rt.id).unwrap()
    }))
}

/// Symptom pattern induced by failing exactly `failed`.
pub fn induced_pattern(t: &Topology, failed: &FaultSet) -> Result<SymptomPattern, SatError> {
    for id in failed {
        if t.component(id).is_none() {
            return Err(SatError::UnknownComponent(id.clone()));
        }
    }
    Ok(t.induced_pattern(failed.iter().map(String::as_str)))
}

/// All fault sets of minimum cardinality whose induced pattern equals the
/// observation, sorted lexicographically. Minimizing failed components is
/// the same objective as maximizing working ones. An empty list means no
/// assignment explains the pattern at all (possible with group terms plus
/// contradictory bits, or with a stale topology).
pub fn minimal_fault_sets(
    t: &Topology,
    pattern: &SymptomPattern,
) -> Result<Vec<FaultSet>, SatError> {
    check_pattern(t, pattern)?;
    let n = t.components().len();
    if n > MAX_EXHAUSTIVE_COMPONENTS {
        return Err(SatError::TooManyComponents {
            count: n,
            max: MAX_EXHAUSTIVE_COMPONENTS,
        });
    }
    let ids: Vec<&str> = t.components().iter().map(|c| c.id.as_str()).collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let want: Vec<bool> = t
        .request_types()
        .iter()
        .map(|rt| pattern.get(&rt.id).unwrap())
        .collect();

    let matches = |failed_mask: u32| -> bool {
        t.request_types().iter().zip(&want).all(|(rt, want)| {
            let value = rt
                .expr
                .evaluate(|id| failed_mask & (1 << index[id]) == 0);
            value == *want
        })
    };

    // Search by ascending cardinality; the first size with any solution is
    // optimal and we collect all co-optimal sets at that size.
    for size in 0..=n {
        let mut solutions: Vec<FaultSet> = Vec::new();
        for mask in masks_of_weight(n, size) {
            if matches(mask) {
                let set: FaultSet = ids
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, id)| id.to_string())
                    .collect();
                solutions.push(set);
            }
        }
        if !solutions.is_empty() {
            solutions.sort();
            return Ok(solutions);
        }
    }
    Ok(Vec::new())
}

/// All bitmasks over `n` bits with exactly `weight` bits set, ascending
/// (Gosper's hack).
fn masks_of_weight(n: usize, weight: usize) -> impl Iterator<Item = u32> {
    let limit: u64 = 1u64 << n;
    let mut current: u64 = if weight == 0 {
        0
    } else {
        (1u64 << weight) - 1
    };
    let mut done = false;
    core::iter::from_fn(move || {
        if done || current >= limit {
            return None;
        }
        let out = current as u32;
        if weight == 0 {
            done = true;
        } else {
            let c = current & current.wrapping_neg();
            let r = current + c;
            current = (((r ^ current) >> 2) / c) | r;
        }
        Some(out)
    })
}

/// True iff failing exactly `f1` and failing exactly `f2` produce different
/// symptom patterns over the topology's request types.
pub fn distinguishable(t: &Topology, f1: &FaultSet, f2: &FaultSet) -> Result<bool, SatError> {
    let p1 = induced_pattern(t, f1)?;
    let p2 = induced_pattern(t, f2)?;
    Ok(p1 != p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Component, ComponentKind, DependencyExpr, DependencyTerm, RequestType};

    fn example_system() -> Topology {
        let components = ["A", "B", "C", "N1", "N2"]
            .iter()
            .map(|id| Component::new(*id, ComponentKind::Service).with_prior(0.1, 0.1))
            .collect();
        let request_types = vec![
            RequestType::new("R1", DependencyExpr::all_of(["A", "B", "N1", "N2"])),
            RequestType::new("R2", DependencyExpr::all_of(["A", "C", "N1"])),
            RequestType::new("R3", DependencyExpr::all_of(["A", "C", "N1", "N2"])),
        ];
        Topology::new(components, request_types).unwrap()
    }

    fn replica_system() -> Topology {
        let components = ["A@N1", "A@N2", "B", "C", "N1", "N2"]
            .iter()
            .map(|id| Component::new(*id, ComponentKind::Service).with_prior(0.1, 0.1))
            .collect();
        let request_types = vec![
            RequestType::new("R1", DependencyExpr::all_of(["A@N1", "B", "N1", "N2"])),
            RequestType::new("R2", DependencyExpr::all_of(["A@N1", "C", "N1"])),
            RequestType::new("R3", DependencyExpr::all_of(["A@N2", "C", "N1", "N2"])),
        ];
        Topology::new(components, request_types).unwrap()
    }

    fn pattern(bits: [bool; 3]) -> SymptomPattern {
        SymptomPattern::from_bits([("R1", bits[0]), ("R2", bits[1]), ("R3", bits[2])])
    }

    fn all_working(t: &Topology) -> Assignment {
        t.components()
            .iter()
            .map(|c| (c.id.clone(), true))
            .collect()
    }

    fn fault(set: &[&str]) -> FaultSet {
        set.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn check_assignment_examples() {
        let t = example_system();
        let a = all_working(&t);
        assert!(check_assignment(&t, &a, &pattern([true, true, true])).unwrap());

        let mut b_failed = all_working(&t);
        b_failed.insert("B".into(), false);
        assert!(check_assignment(&t, &b_failed, &pattern([false, true, true])).unwrap());
        assert!(!check_assignment(&t, &b_failed, &pattern([false, false, false])).unwrap());
    }

    #[test]
    fn check_assignment_requires_total_inputs() {
        let t = example_system();
        let a = all_working(&t);
        let partial = SymptomPattern::from_bits([("R1", true), ("R2", true)]);
        assert_eq!(
            check_assignment(&t, &a, &partial),
            Err(SatError::PatternMissingRequestType("R3".into()))
        );
        let mut incomplete = a.clone();
        incomplete.remove("C");
        assert_eq!(
            check_assignment(&t, &incomplete, &pattern([true, true, true])),
            Err(SatError::IncompleteAssignment("C".into()))
        );
    }

    #[test]
    fn localizes_single_faults_exactly() {
        let t = example_system();
        assert_eq!(
            minimal_fault_sets(&t, &pattern([false, true, false])).unwrap(),
            vec![fault(&["N2"])]
        );
        assert_eq!(
            minimal_fault_sets(&t, &pattern([false, true, true])).unwrap(),
            vec![fault(&["B"])]
        );
    }

    #[test]
    fn reports_co_optimal_explanations() {
        let t = example_system();
        // all three failing: A or N1 alone explains it; {B, C} is excluded
        // because it needs two simultaneous faults.
        assert_eq!(
            minimal_fault_sets(&t, &pattern([false, false, false])).unwrap(),
            vec![fault(&["A"]), fault(&["N1"])]
        );
    }

    #[test]
    fn all_working_pattern_needs_no_faults() {
        let t = example_system();
        assert_eq!(
            minimal_fault_sets(&t, &pattern([true, true, true])).unwrap(),
            vec![FaultSet::new()]
        );
    }

    #[test]
    fn replica_modeling_pins_the_host() {
        let t = replica_system();
        let p = SymptomPattern::from_bits([("R1", false), ("R2", false), ("R3", false)]);
        assert_eq!(minimal_fault_sets(&t, &p).unwrap(), vec![fault(&["N1"])]);
    }

    #[test]
    fn contradictory_pattern_yields_no_explanation() {
        // r_or fails only when x and y are both down, but their probes say
        // both are up: no assignment satisfies all three bits.
        let comps = vec![
            Component::new("x", ComponentKind::Service),
            Component::new("y", ComponentKind::Service),
        ];
        let rts = vec![
            RequestType::new(
                "r_or",
                DependencyExpr::new(vec![DependencyTerm::AnyOf(vec!["x".into(), "y".into()])]),
            ),
            RequestType::new("r_x", DependencyExpr::all_of(["x"])),
            RequestType::new("r_y", DependencyExpr::all_of(["y"])),
        ];
        let t = Topology::new(comps, rts).unwrap();
        let p = SymptomPattern::from_bits([("r_or", false), ("r_x", true), ("r_y", true)]);
        assert_eq!(minimal_fault_sets(&t, &p).unwrap(), Vec::<FaultSet>::new());
    }

    #[test]
    fn exhaustive_bound_is_enforced() {
        let comps: Vec<Component> = (0..25)
            .map(|i| Component::new(alloc::format!("c{i:02}"), ComponentKind::Service))
            .collect();
        let ids: Vec<String> = comps.iter().map(|c| c.id.clone()).collect();
        let t = Topology::new(
            comps,
            vec![RequestType::new("r", DependencyExpr::all_of(ids))],
        )
        .unwrap();
        let p = SymptomPattern::from_bits([("r", false)]);
        assert!(matches!(
            minimal_fault_sets(&t, &p),
            Err(SatError::TooManyComponents { count: 25, .. })
        ));
    }

    #[test]
    fn distinguishability_examples() {
        let t = example_system();
        assert!(!distinguishable(&t, &fault(&["A"]), &fault(&["N1"])).unwrap());
        assert!(distinguishable(&t, &fault(&["B"]), &fault(&["C"])).unwrap());
        let probed = t.add_probe("N1").unwrap();
        assert!(distinguishable(&probed, &fault(&["A"]), &fault(&["N1"])).unwrap());
        assert!(matches!(
            distinguishable(&t, &fault(&["zzz"]), &fault(&["A"])),
            Err(SatError::UnknownComponent(_))
        ));
    }

    #[test]
    fn gosper_masks_enumerate_combinations() {
        let all: Vec<u32> = masks_of_weight(4, 2).collect();
        assert_eq!(all, vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(masks_of_weight(4, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(masks_of_weight(3, 3).collect::<Vec<_>>(), vec![0b111]);
    }
}
