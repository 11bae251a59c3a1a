//! Task and protocol models for k-set agreement.
//!
//! The task side: the input complex assigns every process an input from
//! `0..=n`; the output complex restricts to at most `k` distinct
//! decisions; the task model is their product filtered by validity
//! (decided values were someone's input). The protocol side: `m` rounds
//! of iterated immediate snapshot, one state per (input facet, schedule
//! history) pair.

use crate::error::{Error, Result};
use crate::logic::model::{ModelState, SimplicialModel};
use crate::logic::AtomicProp;
use crate::simplicial::{Complex, ProcessId, Simplex, Value, Vertex};
use crate::subdivision::{enumerate_osp, iterated_subdivision, OrderedSetPartition, SubdividedFacet};
use std::collections::BTreeSet;

/// Guard against protocol models too large to enumerate.
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

fn assignments(n: usize) -> impl Iterator<Item = Vec<u32>> {
    let width = n + 1;
    let radix = (n + 1) as u64;
    (0..radix.pow(width as u32)).map(move |mut code| {
        let mut vals = vec![0u32; width];
        for slot in vals.iter_mut() {
            *slot = (code % radix) as u32;
            code /= radix;
        }
        vals
    })
}

/// Every assignment of inputs `0..=n` to processes `0..=n`.
pub fn input_complex(n: usize) -> Complex {
    let facets = assignments(n).map(|vals| Simplex::from_base_values(&vals));
    Complex::new(n, facets).expect("full assignments are system facets")
}

/// Assignments with at most `k` distinct decided values.
pub fn sa_output_complex(n: usize, k: usize) -> Result<Complex> {
    if k == 0 {
        return Err(Error::Precondition("agreement width k must be positive".into()));
    }
    let facets = assignments(n)
        .filter(|vals| vals.iter().collect::<BTreeSet<_>>().len() <= k)
        .map(|vals| Simplex::from_base_values(&vals));
    Complex::new(n, facets)
}

/// Which atoms a task state exposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskLabeling {
    /// Input atoms only: the task as initially known.
    Inputs,
    /// Input and decision atoms: the task after a factual change.
    InputsAndDecisions,
}

/// The k-set agreement task model: product facets `(input, decision)` per
/// process, kept when the decided values all occur among the inputs.
pub fn task_model_sak(n: usize, k: usize, labeling: TaskLabeling) -> Result<SimplicialModel> {
    if k == 0 {
        return Err(Error::Precondition("agreement width k must be positive".into()));
    }
    let mut states = Vec::new();
    for inputs in assignments(n) {
        let input_values: BTreeSet<u32> = inputs.iter().copied().collect();
        for decisions in assignments(n) {
            let decided: BTreeSet<u32> = decisions.iter().copied().collect();
            if decided.len() > k || !decided.is_subset(&input_values) {
                continue;
            }
            let facet = Simplex::new((0..=n as u32).map(|a| {
                Vertex::new(
                    ProcessId(a),
                    Value::pair(
                        Value::Base(inputs[a as usize]),
                        Value::Base(decisions[a as usize]),
                    ),
                )
            }))?;
            let mut atoms: BTreeSet<AtomicProp> = (0..=n as u32)
                .map(|a| AtomicProp::input(a, inputs[a as usize]))
                .collect();
            if labeling == TaskLabeling::InputsAndDecisions {
                atoms.extend((0..=n as u32).map(|a| AtomicProp::decide(a, decisions[a as usize])));
            }
            let name = format!(
                "in{}dec{}",
                inputs.iter().map(u32::to_string).collect::<String>(),
                decisions.iter().map(u32::to_string).collect::<String>()
            );
            states.push(ModelState { name, facet, atoms });
        }
    }
    SimplicialModel::new(n, states)
}

/// A protocol model whose states remember their subdivision pedigree.
#[derive(Clone, Debug)]
pub struct ProtocolModel {
    n: usize,
    rounds: usize,
    facets: Vec<SubdividedFacet>,
    model: SimplicialModel,
}

impl ProtocolModel {
    /// Builds the model over the given facets; states are labeled with
    /// their base input atoms, and state ids align with facet order.
    pub fn from_facets(n: usize, rounds: usize, facets: Vec<SubdividedFacet>) -> Result<ProtocolModel> {
        let mut states = Vec::with_capacity(facets.len());
        for sf in &facets {
            if sf.rounds() != rounds {
                return Err(Error::WrongRoundCount { expected: rounds, got: sf.rounds() });
            }
            let mut atoms = BTreeSet::new();
            for v in sf.base().iter() {
                match v.value {
                    Value::Base(x) => {
                        atoms.insert(AtomicProp::input(v.color.0, x));
                    }
                    _ => {
                        return Err(Error::Precondition(
                            "protocol bases must carry input values".into(),
                        ))
                    }
                }
            }
            states.push(ModelState {
                name: sf.to_string(),
                facet: sf.realized().clone(),
                atoms,
            });
        }
        let model = SimplicialModel::new(n, states)?;
        Ok(ProtocolModel { n, rounds, facets, model })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn model(&self) -> &SimplicialModel {
        &self.model
    }

    pub fn facets(&self) -> &[SubdividedFacet] {
        &self.facets
    }

    pub fn facet(&self, id: usize) -> Result<&SubdividedFacet> {
        self.facets.get(id).ok_or(Error::StateNotInModel)
    }

    pub fn find_facet(&self, sf: &SubdividedFacet) -> Option<usize> {
        self.model.find_state(sf.realized())
    }
}

/// `m` rounds of iterated immediate snapshot over all inputs: one state
/// per base facet and per-round schedule. Refuses to enumerate more than
/// `limit` states.
pub fn protocol_model_iis(n: usize, m: usize, limit: usize) -> Result<ProtocolModel> {
    let schedules = enumerate_osp(n);
    let bases: u128 = (n as u128 + 1).checked_pow(n as u32 + 1).unwrap_or(u128::MAX);
    let per_base: u128 = (schedules.len() as u128)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX);
    let count = bases.checked_mul(per_base).unwrap_or(u128::MAX);
    if count > limit as u128 {
        return Err(Error::StateLimit {
            count: count.min(usize::MAX as u128) as usize,
            limit,
        });
    }

    let mut facets = Vec::with_capacity(count as usize);
    let mut history = vec![0usize; m];
    for base in input_complex(n).facets() {
        loop {
            let rounds: Vec<OrderedSetPartition> =
                history.iter().map(|i| schedules[*i].clone()).collect();
            facets.push(iterated_subdivision(base, &rounds)?);
            // odometer over schedule indices, most significant round first
            let mut carry = m;
            while carry > 0 {
                history[carry - 1] += 1;
                if history[carry - 1] < schedules.len() {
                    break;
                }
                history[carry - 1] = 0;
                carry -= 1;
            }
            if carry == 0 {
                break;
            }
        }
    }
    ProtocolModel::from_facets(n, m, facets)
}

/// The base processes whose inputs reached `a`'s final view, unfolded
/// through nested rounds.
pub fn carrier(sigma: &SubdividedFacet, a: ProcessId) -> Result<BTreeSet<ProcessId>> {
    fn unfold(v: &Vertex, out: &mut BTreeSet<ProcessId>) {
        match &v.value {
            Value::View(members) => {
                for w in members {
                    unfold(w, out);
                }
            }
            _ => {
                out.insert(v.color);
            }
        }
    }
    let value = sigma.realized().view_of(a)?;
    let mut out = BTreeSet::new();
    unfold(&Vertex::new(a, value.clone()), &mut out);
    Ok(out)
}

/// The groups that observe themselves as concurrent: every member's
/// carrier equals the group's union. Singletons always qualify; the empty
/// group is not considered.
pub fn contention_sets(sigma: &SubdividedFacet) -> Result<Vec<BTreeSet<ProcessId>>> {
    let procs: Vec<ProcessId> = sigma.base().chi().into_iter().collect();
    let carriers: Vec<BTreeSet<ProcessId>> = procs
        .iter()
        .map(|a| carrier(sigma, *a))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for mask in 1u32..(1 << procs.len()) {
        let members: Vec<usize> = (0..procs.len()).filter(|i| mask & (1 << i) != 0).collect();
        let mut union = BTreeSet::new();
        for i in &members {
            union.extend(carriers[*i].iter().copied());
        }
        if members.iter().all(|i| carriers[*i] == union) {
            out.push(members.into_iter().map(|i| procs[i]).collect());
        }
    }
    Ok(out)
}

/// The largest group size in contention.
pub fn max_contention(sigma: &SubdividedFacet) -> Result<usize> {
    Ok(contention_sets(sigma)?
        .iter()
        .map(BTreeSet::len)
        .max()
        .unwrap_or(0))
}

/// The k-concurrency restriction of two-round iterated immediate
/// snapshot: only runs where no more than `k` processes ever observe
/// themselves as mutually concurrent.
pub fn k_concurrency_model(n: usize, k: usize, limit: usize) -> Result<ProtocolModel> {
    if k == 0 {
        return Err(Error::Precondition("concurrency bound k must be positive".into()));
    }
    let full = protocol_model_iis(n, 2, limit)?;
    let mut kept = Vec::new();
    for sf in full.facets() {
        if max_contention(sf)? <= k {
            kept.push(sf.clone());
        }
    }
    ProtocolModel::from_facets(n, 2, kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_complex_has_all_assignments() {
        assert_eq!(input_complex(0).facet_count(), 1);
        assert_eq!(input_complex(1).facet_count(), 4);
        assert_eq!(input_complex(2).facet_count(), 27);
        for f in input_complex(2).facets() {
            assert_eq!(f.dim(), 2);
        }
    }

    #[test]
    fn output_complex_counts_value_spreads() {
        assert_eq!(sa_output_complex(2, 1).unwrap().facet_count(), 3);
        assert_eq!(sa_output_complex(2, 2).unwrap().facet_count(), 21);
        assert_eq!(sa_output_complex(2, 3).unwrap().facet_count(), 27);
        assert_eq!(sa_output_complex(1, 1).unwrap().facet_count(), 2);
        assert!(sa_output_complex(2, 0).is_err());
    }

    #[test]
    fn task_model_filters_by_validity() {
        // inputs (0,0) admit only decisions (0,0); mixed inputs admit both
        // constant decision vectors under k = 1
        let m = task_model_sak(1, 1, TaskLabeling::Inputs).unwrap();
        assert_eq!(m.state_count(), 6);
        let fc = task_model_sak(1, 1, TaskLabeling::InputsAndDecisions).unwrap();
        assert_eq!(fc.state_count(), 6);
        // the labeled variant exposes decisions as atoms
        let with_decides = fc
            .states()
            .iter()
            .filter(|st| st.atoms.iter().any(|a| a.kind == crate::logic::AtomKind::Decide))
            .count();
        assert_eq!(with_decides, 6);
        let plain_decides = m
            .states()
            .iter()
            .filter(|st| st.atoms.iter().any(|a| a.kind == crate::logic::AtomKind::Decide))
            .count();
        assert_eq!(plain_decides, 0);
    }

    #[test]
    fn task_model_k2_admits_two_values() {
        let m1 = task_model_sak(2, 1, TaskLabeling::Inputs).unwrap();
        let m2 = task_model_sak(2, 2, TaskLabeling::Inputs).unwrap();
        let m3 = task_model_sak(2, 3, TaskLabeling::Inputs).unwrap();
        assert!(m1.state_count() < m2.state_count());
        assert!(m2.state_count() < m3.state_count());
    }

    #[test]
    fn protocol_state_counts_multiply() {
        assert_eq!(protocol_model_iis(1, 0, 10).unwrap().model().state_count(), 4);
        assert_eq!(protocol_model_iis(1, 1, 100).unwrap().model().state_count(), 12);
        assert_eq!(protocol_model_iis(1, 2, 100).unwrap().model().state_count(), 36);
        assert_eq!(protocol_model_iis(2, 1, 1000).unwrap().model().state_count(), 351);
    }

    #[test]
    fn protocol_respects_the_state_limit() {
        match protocol_model_iis(2, 2, 100) {
            Err(Error::StateLimit { count, limit }) => {
                assert_eq!(count, 4563);
                assert_eq!(limit, 100);
            }
            other => panic!("expected state limit, got {other:?}"),
        }
    }

    #[test]
    fn protocol_atoms_are_the_base_inputs() {
        let p = protocol_model_iis(1, 1, 100).unwrap();
        for (id, sf) in p.facets().iter().enumerate() {
            let st = &p.model().states()[id];
            for v in sf.base().iter() {
                let Value::Base(x) = v.value else { panic!("base input") };
                assert!(st.atoms.contains(&AtomicProp::input(v.color.0, x)));
            }
            assert_eq!(st.atoms.len(), 2);
        }
    }

    #[test]
    fn protocol_relations_are_shared_views() {
        let p = protocol_model_iis(1, 1, 100).unwrap();
        let m = p.model();
        let g0 = BTreeSet::from([ProcessId(0)]);
        // same base (0,1), schedules <0|1> and <0,1>: process 0 sees only
        // itself in the first, everyone in the second
        let seq = p
            .facets()
            .iter()
            .position(|sf| sf.to_string() == "{(0,0),(1,1)}*<0|1>")
            .unwrap();
        let sync = p
            .facets()
            .iter()
            .position(|sf| sf.to_string() == "{(0,0),(1,1)}*<0,1>")
            .unwrap();
        assert!(!m.related(seq, sync, &g0).unwrap());
        // <0|1> for process 0 looks the same whatever process 1 holds
        let other = p
            .facets()
            .iter()
            .position(|sf| sf.to_string() == "{(0,0),(1,0)}*<0|1>")
            .unwrap();
        assert!(m.related(seq, other, &g0).unwrap());
    }

    #[test]
    fn carriers_unfold_to_base_processes() {
        let base = Simplex::from_base_values(&[0, 1, 2]);
        let osp = |s: &str| OrderedSetPartition::parse(s).unwrap();
        let sf = iterated_subdivision(&base, &[osp("<0|1|2>"), osp("<0,1,2>")]).unwrap();
        let ids = |s: BTreeSet<ProcessId>| s.iter().map(|p| p.0).collect::<Vec<_>>();
        // round 2 is fully synchronous, so everyone collects every round-1 view
        for a in 0..3 {
            assert_eq!(ids(carrier(&sf, ProcessId(a)).unwrap()), vec![0, 1, 2]);
        }
        let sf2 = iterated_subdivision(&base, &[osp("<0|1|2>"), osp("<0|1|2>")]).unwrap();
        assert_eq!(ids(carrier(&sf2, ProcessId(0)).unwrap()), vec![0]);
        assert_eq!(ids(carrier(&sf2, ProcessId(1)).unwrap()), vec![0, 1]);
        let sf0 = iterated_subdivision(&base, &[]).unwrap();
        assert_eq!(ids(carrier(&sf0, ProcessId(2)).unwrap()), vec![2]);
    }

    #[test]
    fn contention_contains_singletons_and_synchronous_blocks() {
        let base = Simplex::from_base_values(&[0, 1]);
        let osp = |s: &str| OrderedSetPartition::parse(s).unwrap();
        let sync = iterated_subdivision(&base, &[osp("<0,1>"), osp("<0,1>")]).unwrap();
        let sets = contention_sets(&sync).unwrap();
        assert!(sets.contains(&BTreeSet::from([ProcessId(0), ProcessId(1)])));
        assert_eq!(max_contention(&sync).unwrap(), 2);

        let seq = iterated_subdivision(&base, &[osp("<0|1>"), osp("<0|1>")]).unwrap();
        let sets = contention_sets(&seq).unwrap();
        assert_eq!(sets.len(), 2, "only singletons: carriers differ");
        assert_eq!(max_contention(&seq).unwrap(), 1);
    }

    #[test]
    fn one_concurrency_means_pairwise_distinct_carriers() {
        let p = protocol_model_iis(1, 2, 100).unwrap();
        for sf in p.facets() {
            let c0 = carrier(sf, ProcessId(0)).unwrap();
            let c1 = carrier(sf, ProcessId(1)).unwrap();
            let pairwise_distinct = c0 != c1;
            assert_eq!(max_contention(sf).unwrap() == 1, pairwise_distinct, "{sf}");
        }
    }

    #[test]
    fn concurrency_restrictions_nest_up_to_the_full_model() {
        let r1 = k_concurrency_model(1, 1, 100).unwrap();
        let r2 = k_concurrency_model(1, 2, 100).unwrap();
        let full = protocol_model_iis(1, 2, 100).unwrap();
        assert!(r1.model().state_count() < r2.model().state_count());
        assert_eq!(r2.model().state_count(), full.model().state_count());
        for sf in r1.facets() {
            assert!(full.find_facet(sf).is_some());
        }
    }
}
