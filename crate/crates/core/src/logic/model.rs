//! Kripke-style evaluation on simplicial models. States are facets of a
//! chromatic complex together with their atomic labels; two states are
//! indistinguishable to a group exactly when they agree on every group
//! member's vertex.

use crate::error::{Error, Result};
use crate::logic::{AtomicProp, Formula};
use crate::simplicial::{ProcessId, Simplex, Value};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;

pub type StateId = usize;
pub type StateSet = BTreeSet<StateId>;

/// An assignment of state sets to fixpoint variables.
pub type Interpretation = BTreeMap<String, StateSet>;

/// One state: a system facet plus the atoms true at it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelState {
    pub name: String,
    pub facet: Simplex,
    pub atoms: BTreeSet<AtomicProp>,
}

#[derive(Debug)]
struct Partition {
    classes: Vec<StateSet>,
}

/// A simplicial model over processes `0..=n`.
#[derive(Clone, Debug)]
pub struct SimplicialModel {
    n: usize,
    states: Vec<ModelState>,
    by_facet: BTreeMap<Simplex, StateId>,
    partitions: RefCell<BTreeMap<BTreeSet<ProcessId>, Rc<Partition>>>,
}

impl SimplicialModel {
    /// Builds a model from labeled facets. Every facet must carry all of
    /// `0..=n` and facets must be pairwise distinct, so that a facet
    /// identifies its state.
    pub fn new(n: usize, states: Vec<ModelState>) -> Result<SimplicialModel> {
        let processes: BTreeSet<ProcessId> = (0..=n as u32).map(ProcessId).collect();
        let mut by_facet = BTreeMap::new();
        for (id, st) in states.iter().enumerate() {
            if st.facet.chi() != processes {
                return Err(Error::NotSystemFacet(st.name.clone()));
            }
            if by_facet.insert(st.facet.clone(), id).is_some() {
                return Err(Error::InvalidModel(format!(
                    "two states share the facet of {}",
                    st.name
                )));
            }
        }
        Ok(SimplicialModel {
            n,
            states,
            by_facet,
            partitions: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn processes(&self) -> BTreeSet<ProcessId> {
        (0..=self.n as u32).map(ProcessId).collect()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[ModelState] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> Result<&ModelState> {
        self.states.get(id).ok_or(Error::StateNotInModel)
    }

    pub fn find_state(&self, facet: &Simplex) -> Option<StateId> {
        self.by_facet.get(facet).copied()
    }

    pub fn all_states(&self) -> StateSet {
        (0..self.states.len()).collect()
    }

    /// `x ~_group y`: every process in the group carries the same vertex
    /// in both facets.
    pub fn related(&self, x: StateId, y: StateId, group: &BTreeSet<ProcessId>) -> Result<bool> {
        if group.is_empty() {
            return Err(Error::EmptyGroup);
        }
        let fx = &self.state(x)?.facet;
        let fy = &self.state(y)?.facet;
        for a in group {
            if !self.processes().contains(a) {
                return Err(Error::ColorAbsent(*a));
            }
            if fx.value_of(*a) != fy.value_of(*a) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The `~_group` equivalence classes, as state sets.
    pub fn equivalence_classes(&self, group: &BTreeSet<ProcessId>) -> Result<Vec<StateSet>> {
        Ok(self.partition(group)?.classes.clone())
    }

    fn partition(&self, group: &BTreeSet<ProcessId>) -> Result<Rc<Partition>> {
        if group.is_empty() {
            return Err(Error::EmptyGroup);
        }
        for a in group {
            if a.0 as usize > self.n {
                return Err(Error::ColorAbsent(*a));
            }
        }
        if let Some(p) = self.partitions.borrow().get(group) {
            return Ok(Rc::clone(p));
        }
        let mut keyed: BTreeMap<Vec<&Value>, StateSet> = BTreeMap::new();
        for (id, st) in self.states.iter().enumerate() {
            let key: Vec<&Value> = group
                .iter()
                .map(|a| st.facet.value_of(*a).expect("system facet carries every process"))
                .collect();
            keyed.entry(key).or_default().insert(id);
        }
        let part = Rc::new(Partition {
            classes: keyed.into_values().collect(),
        });
        self.partitions
            .borrow_mut()
            .insert(group.clone(), Rc::clone(&part));
        Ok(part)
    }

    /// Evaluates a closed formula to the set of states where it holds.
    pub fn eval(&self, formula: &Formula) -> Result<StateSet> {
        self.eval_with(formula, &Interpretation::new())
    }

    /// Evaluates under an interpretation of free variables.
    pub fn eval_with(&self, formula: &Formula, env: &Interpretation) -> Result<StateSet> {
        formula.check_well_formed(&env.keys().cloned().collect())?;
        let mut closed = HashSet::new();
        collect_closed(formula, &mut closed);
        let mut ev = Evaluator {
            model: self,
            closed,
            cache: HashMap::new(),
        };
        let mut rho = env.clone();
        ev.eval(formula, &mut rho)
    }

    pub fn satisfies(&self, id: StateId, formula: &Formula) -> Result<bool> {
        self.state(id)?;
        Ok(self.eval(formula)?.contains(&id))
    }

    pub fn valid(&self, formula: &Formula) -> Result<bool> {
        Ok(self.eval(formula)?.len() == self.states.len())
    }
}

/// Marks subformulas without free variables; their denotations do not
/// depend on the environment, so one evaluation serves every fixpoint
/// iteration. Returns the free variables of `f`.
fn collect_closed<'a>(f: &'a Formula, out: &mut HashSet<*const Formula>) -> BTreeSet<&'a str> {
    let frees: BTreeSet<&str> = match f {
        Formula::Atom(_) | Formula::NegAtom(_) => BTreeSet::new(),
        Formula::Var(z) => BTreeSet::from([z.as_str()]),
        Formula::And(parts) | Formula::Or(parts) => {
            let mut acc = BTreeSet::new();
            for p in parts {
                acc.extend(collect_closed(p, out));
            }
            acc
        }
        Formula::DKnow(_, body) => collect_closed(body, out),
        Formula::Nu(z, body) => {
            let mut acc = collect_closed(body, out);
            acc.remove(z.as_str());
            acc
        }
    };
    if frees.is_empty() {
        out.insert(f as *const Formula);
    }
    frees
}

struct Evaluator<'m> {
    model: &'m SimplicialModel,
    closed: HashSet<*const Formula>,
    cache: HashMap<*const Formula, StateSet>,
}

impl Evaluator<'_> {
    fn eval(&mut self, f: &Formula, rho: &mut Interpretation) -> Result<StateSet> {
        let key = f as *const Formula;
        if self.closed.contains(&key) {
            if let Some(s) = self.cache.get(&key) {
                return Ok(s.clone());
            }
        }
        let result = self.eval_uncached(f, rho)?;
        if self.closed.contains(&key) {
            self.cache.insert(key, result.clone());
        }
        Ok(result)
    }

    fn eval_uncached(&mut self, f: &Formula, rho: &mut Interpretation) -> Result<StateSet> {
        match f {
            Formula::Atom(a) => Ok(self.atom_set(a, true)),
            Formula::NegAtom(a) => Ok(self.atom_set(a, false)),
            Formula::Var(z) => rho
                .get(z)
                .cloned()
                .ok_or_else(|| Error::UnboundVariable(z.clone())),
            Formula::And(parts) => {
                let mut acc = self.model.all_states();
                for p in parts {
                    if acc.is_empty() {
                        break;
                    }
                    let den = self.eval(p, rho)?;
                    acc.retain(|s| den.contains(s));
                }
                Ok(acc)
            }
            Formula::Or(parts) => {
                let mut acc = StateSet::new();
                for p in parts {
                    acc.extend(self.eval(p, rho)?);
                }
                Ok(acc)
            }
            Formula::DKnow(group, body) => {
                let den = self.eval(body, rho)?;
                let part = self.model.partition(group)?;
                let mut acc = StateSet::new();
                for class in &part.classes {
                    if class.iter().all(|s| den.contains(s)) {
                        acc.extend(class.iter().copied());
                    }
                }
                Ok(acc)
            }
            Formula::Nu(z, body) => {
                // Knaster-Tarski from above; monotonicity makes the chain
                // decreasing, so it stabilizes within |S|+1 passes.
                let cap = self.model.states.len() + 1;
                let mut current = self.model.all_states();
                for _ in 0..cap {
                    rho.insert(z.clone(), current.clone());
                    let next = self.eval(body, rho)?;
                    rho.remove(z);
                    if next == current {
                        return Ok(current);
                    }
                    current = next;
                }
                Err(Error::FixpointCap { cap })
            }
        }
    }

    fn atom_set(&self, atom: &AtomicProp, polarity: bool) -> StateSet {
        self.model
            .states
            .iter()
            .enumerate()
            .filter(|(_, st)| st.atoms.contains(atom) == polarity)
            .map(|(id, _)| id)
            .collect()
    }
}
