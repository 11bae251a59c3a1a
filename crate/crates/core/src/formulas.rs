//! Formula families for k-set agreement over processes `0..=n` with input
//! and decision values drawn from `0..=n`.

use crate::logic::{implies, negate, AtomicProp, Formula};
use crate::simplicial::ProcessId;
use std::collections::BTreeSet;

fn input(a: u32, v: u32) -> Formula {
    Formula::Atom(AtomicProp::input(a, v))
}

fn decide(a: u32, v: u32) -> Formula {
    Formula::Atom(AtomicProp::decide(a, v))
}

/// Nonempty subsets, in mask order (so singletons first by element).
fn nonempty_subsets<T: Copy + Ord>(items: &[T]) -> Vec<BTreeSet<T>> {
    let mut out = Vec::with_capacity((1 << items.len()) - 1);
    for mask in 1u32..(1 << items.len()) {
        out.push(
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, t)| *t)
                .collect(),
        );
    }
    out
}

fn exactly_one(atoms: Vec<AtomicProp>) -> Formula {
    let mut parts = Vec::new();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let both = Formula::and([Formula::Atom(atoms[i]), Formula::Atom(atoms[j])]);
            parts.push(negate(&both).expect("conjunction of atoms is propositional"));
        }
    }
    parts.push(Formula::or(atoms.into_iter().map(Formula::Atom)));
    Formula::and(parts)
}

/// Every process holds exactly one input value.
pub fn inputs_are_functions(n: usize) -> Formula {
    Formula::and((0..=n as u32).map(|a| {
        exactly_one((0..=n as u32).map(|v| AtomicProp::input(a, v)).collect())
    }))
}

/// Every process decides exactly one value.
pub fn outputs_are_functions(n: usize) -> Formula {
    Formula::and((0..=n as u32).map(|a| {
        exactly_one((0..=n as u32).map(|v| AtomicProp::decide(a, v)).collect())
    }))
}

/// Decided values were someone's input.
pub fn decisions_from_inputs(n: usize) -> Formula {
    Formula::and((0..=n as u32).flat_map(|a| {
        (0..=n as u32).map(move |d| {
            let someone = Formula::or((0..=n as u32).map(move |b| input(b, d)));
            implies(&decide(a, d), someone).expect("atoms are propositional")
        })
    }))
}

/// At most `k` distinct values are decided: some value set of size at most
/// `k` covers every decision.
pub fn agreement(n: usize, k: usize) -> Formula {
    let values: Vec<u32> = (0..=n as u32).collect();
    Formula::or(
        nonempty_subsets(&values)
            .into_iter()
            .filter(|vs| vs.len() <= k)
            .map(|vs| {
                Formula::and((0..=n as u32).map(|a| {
                    Formula::or(vs.iter().map(move |d| decide(a, *d)))
                }))
            }),
    )
}

/// Each group distributedly knows the decisions of its own members.
pub fn decisions_are_known(n: usize) -> Formula {
    let procs: Vec<ProcessId> = (0..=n as u32).map(ProcessId).collect();
    Formula::and(nonempty_subsets(&procs).into_iter().flat_map(|group| {
        group
            .iter()
            .flat_map(|a| {
                (0..=n as u32).map(|d| {
                    let knows = Formula::DKnow(
                        group.clone(),
                        Box::new(decide(a.0, d)),
                    );
                    implies(&decide(a.0, d), knows).expect("atom antecedent")
                })
            })
            .collect::<Vec<_>>()
    }))
}

/// The group's members cover the decision values `0..group.len()-1`.
pub fn group_covers_low_values(group: &BTreeSet<ProcessId>) -> Formula {
    Formula::and((0..group.len() as u32).map(|d| {
        Formula::or(group.iter().map(move |a| decide(a.0, d)))
    }))
}

/// The fixpoint obstruction formula for k-set agreement: decisions are
/// functional and valid, and whenever a group covers the low values it
/// distributedly knows agreement, knowledge of decisions, and the fixpoint
/// again.
pub fn agreement_fixpoint(n: usize, k: usize) -> Formula {
    let mut parts = vec![outputs_are_functions(n), decisions_from_inputs(n)];
    let procs: Vec<ProcessId> = (0..=n as u32).map(ProcessId).collect();
    for group in nonempty_subsets(&procs) {
        let body = Formula::and([
            decisions_are_known(n),
            agreement(n, k),
            Formula::Var("Z".into()),
        ]);
        let knows = Formula::DKnow(group.clone(), Box::new(body));
        parts.push(
            implies(&group_covers_low_values(&group), knows).expect("propositional cover"),
        );
    }
    Formula::nu("Z", Formula::and(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;

    #[test]
    fn families_round_trip_through_the_parser() {
        for n in 0..=2 {
            for f in [
                inputs_are_functions(n),
                outputs_are_functions(n),
                decisions_from_inputs(n),
                decisions_are_known(n),
                agreement(n, 1),
                agreement(n, n + 1),
                agreement_fixpoint(n, 1),
            ] {
                let text = f.to_string();
                assert_eq!(parse_formula(&text).unwrap(), f, "through {text}");
            }
        }
    }

    #[test]
    fn functionality_enumerates_value_pairs() {
        let f = inputs_are_functions(1);
        let Formula::And(per_process) = &f else { panic!("expected conjunction") };
        assert_eq!(per_process.len(), 2);
        let Formula::And(parts) = &per_process[0] else { panic!("expected conjunction") };
        // one excluded pair plus the someone-clause for two values
        assert_eq!(parts.len(), 2);
    }

    #[test]
    fn agreement_at_full_width_is_weakest() {
        // k = n+1 admits every value set, k = 1 only singletons
        let n = 2;
        let Formula::Or(wide) = agreement(n, n + 1) else { panic!() };
        assert_eq!(wide.len(), 7);
        let Formula::Or(narrow) = agreement(n, 1) else { panic!() };
        assert_eq!(narrow.len(), 3);
    }

    #[test]
    fn fixpoint_has_one_guard_per_nonempty_group() {
        for n in 0..=2 {
            let Formula::Nu(z, body) = agreement_fixpoint(n, 1) else { panic!() };
            assert_eq!(z, "Z");
            let Formula::And(parts) = *body else { panic!() };
            assert_eq!(parts.len(), 2 + (1 << (n + 1)) - 1);
        }
    }

    #[test]
    fn group_cover_uses_group_sized_value_range() {
        let group = BTreeSet::from([ProcessId(0), ProcessId(2)]);
        let f = group_covers_low_values(&group);
        assert_eq!(f.to_string(), "(decide_0=0 | decide_2=0) & (decide_0=1 | decide_2=1)");
    }

    #[test]
    fn fixpoint_is_well_formed_and_closed() {
        let f = agreement_fixpoint(2, 2);
        assert!(f.check_well_formed(&BTreeSet::new()).is_ok());
        assert!(f.free_vars().is_empty());
    }
}
