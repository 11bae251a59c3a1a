//! The corner-input facet families and the degree argument that runs on
//! them. Facets over the bases I_d with tail-form schedules form a finite
//! arena; an edge relation (bowtie) links facets a group cannot
//! distinguish when both ends decide every value below the group size.
//! Under any admissible decision labeling the origin facet has exactly one
//! partner and every other precondition-satisfying facet has zero or two,
//! so a greedy walk from the origin either leaves the arena (impossible)
//! or hits a facet refuting one of the required formulas.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::formulas;
use crate::logic::model::{ModelState, SimplicialModel, StateId, StateSet};
use crate::logic::AtomicProp;
use crate::simplicial::{ProcessId, Simplex, Value};
use crate::solvability::Morphism;
use crate::subdivision::{
    enumerate_osp_tail, incident_by_osp, iterated_subdivision, OrderedSetPartition,
    SubdividedFacet,
};

/// The corner input facet I_d: processes `0..=d` hold their own id, the
/// rest hold `d`.
pub fn corner_facet(n: usize, d: usize) -> Result<Simplex> {
    if d > n {
        return Err(Error::Precondition(format!(
            "corner index {d} exceeds the top process {n}"
        )));
    }
    let values: Vec<u32> = (0..=n).map(|i| i.min(d) as u32).collect();
    Ok(Simplex::from_base_values(&values))
}

/// The families F_0, ..., F_n of corner-input facets whose every round is
/// a tail-form schedule: family d holds I_d * g_1 * ... * g_m for all
/// tail-form g_i. Family 0 is a singleton, the origin facet.
pub struct CornerFamilies {
    n: usize,
    rounds: usize,
    families: Vec<Vec<SubdividedFacet>>,
    index: BTreeMap<SubdividedFacet, usize>,
}

impl CornerFamilies {
    pub fn new(n: usize, rounds: usize) -> Result<CornerFamilies> {
        if rounds == 0 {
            return Err(Error::Precondition(
                "the families need at least one round".into(),
            ));
        }
        let mut families = Vec::with_capacity(n + 1);
        let mut index = BTreeMap::new();
        for d in 0..=n {
            let base = corner_facet(n, d)?;
            let tails = enumerate_osp_tail(d, n);
            let mut family = Vec::new();
            // histories in odometer order, round 1 most significant
            let count = tails.len().pow(rounds as u32);
            for code in 0..count {
                let mut rest = code;
                let mut history: Vec<OrderedSetPartition> = vec![tails[0].clone(); rounds];
                for slot in (0..rounds).rev() {
                    history[slot] = tails[rest % tails.len()].clone();
                    rest /= tails.len();
                }
                let sf = iterated_subdivision(&base, &history)?;
                index.insert(sf.clone(), d);
                family.push(sf);
            }
            families.push(family);
        }
        Ok(CornerFamilies {
            n,
            rounds,
            families,
            index,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn family(&self, d: usize) -> &[SubdividedFacet] {
        &self.families[d]
    }

    /// The sole member of family 0: I_0 with the fully sequential schedule
    /// in every round.
    pub fn origin(&self) -> &SubdividedFacet {
        &self.families[0][0]
    }

    /// Which family a facet belongs to, if any.
    pub fn family_of(&self, sf: &SubdividedFacet) -> Option<usize> {
        self.index.get(sf).copied()
    }

    /// Facets of families `0..=cap`, family-major, origin first.
    pub fn union_upto(&self, cap: usize) -> impl Iterator<Item = &SubdividedFacet> {
        self.families
            .iter()
            .take(cap.min(self.n) + 1)
            .flat_map(|f| f.iter())
    }
}

fn group_without(l: usize, b: ProcessId) -> BTreeSet<ProcessId> {
    (0..=l as u32).map(ProcessId).filter(|p| *p != b).collect()
}

/// The labeling-independent part of the edge relation on the families with
/// agreement parameter k: for every facet and every group `0..=l` minus
/// one process (l at most min(k, n)), the tail-form facets the group
/// cannot distinguish whose family index differs by at most one and peaks
/// at l. An edge is live under a given labeling when both ends also decide
/// every value below l; see [`degree_by_profile`] and [`witness_path`].
pub struct BowtieGraph {
    n: usize,
    k: usize,
    facets: Vec<SubdividedFacet>,
    family: Vec<usize>,
    index: BTreeMap<SubdividedFacet, usize>,
    groups: Vec<BTreeSet<ProcessId>>,
    candidates: Vec<Vec<(usize, usize)>>,
}

impl BowtieGraph {
    pub fn new(families: &CornerFamilies, k: usize) -> Result<BowtieGraph> {
        if k == 0 {
            return Err(Error::Precondition(
                "the agreement parameter must be at least 1".into(),
            ));
        }
        let n = families.n();
        let cap = k.min(n);
        let mut facets = Vec::new();
        let mut family = Vec::new();
        let mut index = BTreeMap::new();
        for d in 0..=cap {
            for sf in families.family(d) {
                index.insert(sf.clone(), facets.len());
                family.push(d);
                facets.push(sf.clone());
            }
        }
        let mut groups = Vec::new();
        let mut params = Vec::new();
        for l in 1..=cap {
            for b in 0..=l as u32 {
                groups.push(group_without(l, ProcessId(b)));
                params.push((l, ProcessId(b)));
            }
        }
        let mut candidates = vec![Vec::new(); facets.len()];
        for (i, sf) in facets.iter().enumerate() {
            let d = family[i];
            for (g, (l, b)) in params.iter().enumerate() {
                // the families at the edge's ends peak at l and differ by
                // at most one, so d itself must be l-1 or l
                if d != *l && d + 1 != *l {
                    continue;
                }
                for tau in incident_by_osp(sf, &groups[g], *l, *b, true)? {
                    if let Some(&j) = index.get(&tau) {
                        let e = family[j];
                        if d.max(e) == *l && d.abs_diff(e) <= 1 {
                            candidates[i].push((g, j));
                        }
                    }
                }
            }
        }
        Ok(BowtieGraph {
            n,
            k,
            facets,
            family,
            index,
            groups,
            candidates,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// All facets in the graph, family-major; the origin facet is first.
    pub fn facets(&self) -> &[SubdividedFacet] {
        &self.facets
    }

    pub fn family(&self, idx: usize) -> usize {
        self.family[idx]
    }

    pub fn index_of(&self, sf: &SubdividedFacet) -> Option<usize> {
        self.index.get(sf).copied()
    }

    pub fn groups(&self) -> &[BTreeSet<ProcessId>] {
        &self.groups
    }

    /// Candidate partners of a facet as (group index, facet index) pairs.
    pub fn candidates(&self, idx: usize) -> &[(usize, usize)] {
        &self.candidates[idx]
    }
}

/// States for the given facets labeled with their base inputs plus the
/// decisions the map assigns. Verification is not required: a candidate
/// map that is no morphism still induces a labeled model to examine.
pub fn decision_model(
    n: usize,
    facets: &[SubdividedFacet],
    delta: &Morphism,
) -> Result<SimplicialModel> {
    let mut states = Vec::with_capacity(facets.len());
    for sf in facets {
        let mut atoms = crate::solvability::decision_atoms(sf, delta)?;
        for v in sf.base().iter() {
            match v.value {
                Value::Base(x) => {
                    atoms.insert(AtomicProp::input(v.color.0, x));
                }
                _ => {
                    return Err(Error::Precondition(
                        "base facet must carry plain input values".into(),
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
    SimplicialModel::new(n, states)
}

/// The decision-labeled model over exactly the graph's facets.
pub fn family_model(graph: &BowtieGraph, delta: &Morphism) -> Result<SimplicialModel> {
    decision_model(graph.n, &graph.facets, delta)
}

/// Per-facet decision profiles (decision of process a at slot a) read from
/// a per-view decision map.
pub fn decision_profiles(graph: &BowtieGraph, delta: &Morphism) -> Result<Vec<Vec<u32>>> {
    graph
        .facets
        .iter()
        .map(|sf| {
            let mut profile = vec![0; graph.n + 1];
            for v in sf.realized().iter() {
                profile[v.color.0 as usize] = delta.decision(v.color, &v.value)?;
            }
            Ok(profile)
        })
        .collect()
}

/// Whether the group's decisions cover every value below the group size.
pub fn profile_covers(profile: &[u32], group: &BTreeSet<ProcessId>) -> bool {
    (0..group.len() as u32).all(|v| group.iter().any(|a| profile[a.0 as usize] == v))
}

/// Partners of a facet under the given profiles: candidate edges whose two
/// ends both cover the group's low values. Distinct partners only; one
/// facet reachable through two groups counts once.
pub fn neighbors_by_profile(
    graph: &BowtieGraph,
    profiles: &[Vec<u32>],
    idx: usize,
) -> BTreeSet<usize> {
    graph.candidates[idx]
        .iter()
        .filter(|&&(g, j)| {
            profile_covers(&profiles[idx], &graph.groups[g])
                && profile_covers(&profiles[j], &graph.groups[g])
        })
        .map(|&(_, j)| j)
        .collect()
}

pub fn degree_by_profile(graph: &BowtieGraph, profiles: &[Vec<u32>], idx: usize) -> usize {
    neighbors_by_profile(graph, profiles, idx).len()
}

/// The edge relation itself, evaluated against a decision-labeled model:
/// the two facets are distinct members of the families, every group member
/// keeps its vertex across them, the families peak at the group size and
/// differ by at most one, and both states decide every value below the
/// group size.
pub fn bowtie(
    families: &CornerFamilies,
    model: &SimplicialModel,
    sigma: &SubdividedFacet,
    tau: &SubdividedFacet,
    group: &BTreeSet<ProcessId>,
) -> Result<bool> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let d = families
        .family_of(sigma)
        .ok_or_else(|| Error::Precondition(format!("{sigma} is outside the corner families")))?;
    let e = families
        .family_of(tau)
        .ok_or_else(|| Error::Precondition(format!("{tau} is outside the corner families")))?;
    if sigma == tau {
        return Ok(false);
    }
    let l = group.len();
    if group.iter().any(|a| a.0 as usize > l) {
        return Ok(false);
    }
    if d.max(e) != l || d.abs_diff(e) > 1 {
        return Ok(false);
    }
    if sigma.realized().restrict(group) != tau.realized().restrict(group) {
        return Ok(false);
    }
    let dec = formulas::group_covers_low_values(group);
    let xs = model
        .find_state(sigma.realized())
        .ok_or(Error::StateNotInModel)?;
    let xt = model
        .find_state(tau.realized())
        .ok_or(Error::StateNotInModel)?;
    Ok(model.satisfies(xs, &dec)? && model.satisfies(xt, &dec)?)
}

/// Number of distinct partners of `sigma` over all admissible groups, with
/// the contract's preconditions checked rather than assumed: `sigma` lies
/// in family 1..=k, the model satisfies the validity formula everywhere,
/// and `sigma`'s state satisfies the four required formulas. Under these
/// the result is 0 or 2.
pub fn bowtie_degree(
    families: &CornerFamilies,
    model: &SimplicialModel,
    sigma: &SubdividedFacet,
    k: usize,
) -> Result<usize> {
    let n = families.n();
    let d = families
        .family_of(sigma)
        .ok_or_else(|| Error::Precondition(format!("{sigma} is outside the corner families")))?;
    if d == 0 || d > k {
        return Err(Error::Precondition(format!(
            "the degree contract covers families 1..={k}, {sigma} is in family {d}"
        )));
    }
    let sid = model
        .find_state(sigma.realized())
        .ok_or(Error::StateNotInModel)?;
    if !model.valid(&formulas::decisions_from_inputs(n))? {
        return Err(Error::Precondition(
            "some state decides a value nobody input".into(),
        ));
    }
    let required = [
        ("outputs-are-functions", formulas::outputs_are_functions(n)),
        ("decisions-from-inputs", formulas::decisions_from_inputs(n)),
        ("agreement", formulas::agreement(n, k)),
        ("decisions-are-known", formulas::decisions_are_known(n)),
    ];
    for (name, f) in &required {
        if !model.satisfies(sid, f)? {
            return Err(Error::Precondition(format!(
                "{sigma} does not satisfy {name}"
            )));
        }
    }
    let cap = k.min(n);
    let mut partners: BTreeSet<&SubdividedFacet> = BTreeSet::new();
    for l in 1..=cap {
        for b in 0..=l as u32 {
            let group = group_without(l, ProcessId(b));
            for dd in 0..=cap {
                for tau in families.family(dd) {
                    if bowtie(families, model, sigma, tau, &group)? {
                        partners.insert(tau);
                    }
                }
            }
        }
    }
    Ok(partners.len())
}

/// How a greedy walk over live edges ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathOutcome {
    /// Some visited facet refutes a required formula: the concrete reason
    /// the candidate decision map cannot exist.
    FormulaFailure {
        step: usize,
        facet: String,
        formula: String,
    },
    /// The walk stopped at a facet with no unvisited live partner.
    ConsistentEnd,
    /// The pairwise-distinct walk outgrew the whole arena. Unreachable by
    /// counting; reported rather than asserted so a run can witness it.
    LengthContradiction,
    /// `max_len` facets were visited while a next step existed.
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathReport {
    pub facets: Vec<String>,
    pub outcome: PathOutcome,
}

/// Walks the live edges greedily from the origin facet, checking the four
/// required formulas at every visited facet. The origin contributes its
/// single contractual partner; later facets offer at most one unvisited
/// partner since their degree is 0 or 2 with one edge already used. Should
/// several unvisited partners ever appear, the walk takes the least facet,
/// keeping replays deterministic. The model must contain a state for every
/// facet of the graph.
pub fn witness_path(
    graph: &BowtieGraph,
    model: &SimplicialModel,
    max_len: usize,
) -> Result<PathReport> {
    if max_len == 0 {
        return Err(Error::Precondition("max_len must be positive".into()));
    }
    let sid: Vec<StateId> = graph
        .facets
        .iter()
        .map(|sf| {
            model
                .find_state(sf.realized())
                .ok_or(Error::StateNotInModel)
        })
        .collect::<Result<_>>()?;
    let required = [
        (
            "outputs-are-functions",
            formulas::outputs_are_functions(graph.n),
        ),
        (
            "decisions-from-inputs",
            formulas::decisions_from_inputs(graph.n),
        ),
        ("agreement", formulas::agreement(graph.n, graph.k)),
        ("decisions-are-known", formulas::decisions_are_known(graph.n)),
    ];
    let mut req_den: Vec<(&str, StateSet)> = Vec::new();
    for (name, f) in &required {
        req_den.push((name, model.eval(f)?));
    }
    let mut dec_den: Vec<StateSet> = Vec::new();
    for group in &graph.groups {
        dec_den.push(model.eval(&formulas::group_covers_low_values(group))?);
    }
    let mut visited = vec![false; graph.facets.len()];
    let mut names = Vec::new();
    let mut cur = 0usize;
    loop {
        visited[cur] = true;
        names.push(graph.facets[cur].to_string());
        let step = names.len() - 1;
        for (name, den) in &req_den {
            if !den.contains(&sid[cur]) {
                let facet = graph.facets[cur].to_string();
                return Ok(PathReport {
                    facets: names,
                    outcome: PathOutcome::FormulaFailure {
                        step,
                        facet,
                        formula: (*name).into(),
                    },
                });
            }
        }
        if names.len() > graph.facets.len() {
            return Ok(PathReport {
                facets: names,
                outcome: PathOutcome::LengthContradiction,
            });
        }
        let next = graph.candidates[cur]
            .iter()
            .filter(|&&(g, j)| {
                !visited[j] && dec_den[g].contains(&sid[cur]) && dec_den[g].contains(&sid[j])
            })
            .map(|&(_, j)| j)
            .min_by(|a, b| graph.facets[*a].cmp(&graph.facets[*b]));
        match next {
            None => {
                return Ok(PathReport {
                    facets: names,
                    outcome: PathOutcome::ConsistentEnd,
                })
            }
            Some(_) if names.len() >= max_len => {
                return Ok(PathReport {
                    facets: names,
                    outcome: PathOutcome::Truncated,
                })
            }
            Some(j) => cur = j,
        }
    }
}

/// The admissible decision labelings over a set of facets: one choice per
/// (color, view) vertex, ranging over the input values visible in the
/// view. Anything outside the visible values would decide an input no
/// containing facet can vouch for, so those labelings are never counted.
pub struct LabelingSpace {
    keys: Vec<(ProcessId, Value)>,
    domains: Vec<Vec<u32>>,
}

impl LabelingSpace {
    pub fn over<'a>(facets: impl IntoIterator<Item = &'a SubdividedFacet>) -> LabelingSpace {
        let mut doms: BTreeMap<(ProcessId, Value), Vec<u32>> = BTreeMap::new();
        for sf in facets {
            for v in sf.realized().iter() {
                doms.entry((v.color, v.value.clone()))
                    .or_insert_with(|| v.value.base_values().into_iter().collect());
            }
        }
        let (keys, domains) = doms.into_iter().unzip();
        LabelingSpace { keys, domains }
    }

    pub fn vars(&self) -> usize {
        self.keys.len()
    }

    /// Number of admissible labelings.
    pub fn count(&self) -> u128 {
        self.domains.iter().map(|d| d.len() as u128).product()
    }

    /// Mixed-radix decode; `code` below `count()`.
    pub fn labeling(&self, mut code: u128) -> Morphism {
        let mut decisions = BTreeMap::new();
        for (key, dom) in self.keys.iter().zip(&self.domains) {
            let r = dom.len() as u128;
            decisions.insert(key.clone(), dom[(code % r) as usize]);
            code /= r;
        }
        Morphism::new(decisions)
    }

    pub fn sample(&self, rng: &mut impl rand::Rng) -> Morphism {
        let decisions = self
            .keys
            .iter()
            .zip(&self.domains)
            .map(|(key, dom)| (key.clone(), dom[rng.gen_range(0..dom.len())]))
            .collect();
        Morphism::new(decisions)
    }
}
