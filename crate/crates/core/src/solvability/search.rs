//! Exhaustive search for decision morphisms into k-set agreement.
//!
//! The search space: one variable per (process, final view) pair, ranging
//! over the input values visible in that view. Validity and color
//! preservation hold by construction, so an assignment is a morphism
//! exactly when every run decides at most k distinct values. That is a
//! finite CSP; we solve it by depth-first search with forward checking
//! (once a run saturates k values, its remaining processes are clamped to
//! them) and minimum-remaining-values variable order.

use crate::error::{Error, Result};
use crate::models::ProtocolModel;
use crate::simplicial::{ProcessId, Simplex, Value};
use crate::solvability::Morphism;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Upper bound on assignments tried before giving up.
    pub node_budget: u64,
    /// Refute per-base subproblems before the global search; sound
    /// because a morphism restricts to every base.
    pub presweep: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { node_budget: 10_000_000, presweep: true }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// A verified-shape decision map, when one exists.
    pub morphism: Option<Morphism>,
    /// Assignments tried across the pre-sweep and the global search.
    pub explored: u64,
    /// Base facet whose runs already admit no decision map, when the
    /// pre-sweep refuted one.
    pub refuted_base: Option<String>,
}

struct Csp {
    domains: Vec<Vec<u32>>,
    state_vars: Vec<Vec<usize>>,
    var_states: Vec<Vec<usize>>,
    k: usize,
}

struct Budget {
    explored: u64,
    limit: u64,
}

struct Dfs<'a> {
    csp: &'a Csp,
    domains: Vec<Vec<u32>>,
    assigned: Vec<Option<u32>>,
    trail: Vec<(usize, Vec<u32>)>,
}

impl<'a> Dfs<'a> {
    fn new(csp: &'a Csp) -> Dfs<'a> {
        Dfs {
            csp,
            domains: csp.domains.clone(),
            assigned: vec![None; csp.domains.len()],
            trail: Vec::new(),
        }
    }

    /// Re-clamps the domains around one state after an assignment in it.
    /// Returns false when a domain empties or the state already exceeds k.
    fn propagate(&mut self, state: usize) -> bool {
        let mut decided = BTreeSet::new();
        for &u in &self.csp.state_vars[state] {
            if let Some(v) = self.assigned[u] {
                decided.insert(v);
            }
        }
        if decided.len() > self.csp.k {
            return false;
        }
        if decided.len() < self.csp.k {
            return true;
        }
        for &u in &self.csp.state_vars[state] {
            if self.assigned[u].is_some() {
                continue;
            }
            let narrowed: Vec<u32> = self.domains[u]
                .iter()
                .copied()
                .filter(|v| decided.contains(v))
                .collect();
            if narrowed.len() < self.domains[u].len() {
                if narrowed.is_empty() {
                    return false;
                }
                self.trail.push((u, std::mem::replace(&mut self.domains[u], narrowed)));
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (u, dom) = self.trail.pop().expect("trail length checked");
            self.domains[u] = dom;
        }
    }

    fn pick_var(&self) -> Option<usize> {
        (0..self.domains.len())
            .filter(|u| self.assigned[*u].is_none())
            .min_by_key(|u| self.domains[*u].len())
    }

    fn solve(&mut self, budget: &mut Budget) -> Result<Option<Vec<u32>>> {
        let Some(var) = self.pick_var() else {
            let solution = self.assigned.iter().map(|v| v.expect("all assigned")).collect();
            return Ok(Some(solution));
        };
        for value in self.domains[var].clone() {
            budget.explored += 1;
            if budget.explored > budget.limit {
                return Err(Error::SearchBudget {
                    explored: budget.explored,
                    assigned: self.assigned.iter().filter(|v| v.is_some()).count(),
                    vars: self.domains.len(),
                });
            }
            let mark = self.trail.len();
            self.assigned[var] = Some(value);
            let consistent = self.csp.var_states[var]
                .iter()
                .all(|s| self.propagate(*s));
            if consistent {
                if let Some(solution) = self.solve(budget)? {
                    return Ok(Some(solution));
                }
            }
            self.assigned[var] = None;
            self.undo_to(mark);
        }
        Ok(None)
    }
}

/// The variables of the decision CSP over a set of protocol states.
fn build_csp(
    protocol: &ProtocolModel,
    states: &[usize],
    k: usize,
) -> (Csp, Vec<(ProcessId, Value)>) {
    let mut var_ids: BTreeMap<(ProcessId, Value), usize> = BTreeMap::new();
    let mut keys = Vec::new();
    let mut domains = Vec::new();
    let mut state_vars = Vec::with_capacity(states.len());
    for &s in states {
        let facet = protocol.facets()[s].realized();
        let mut vars = Vec::with_capacity(facet.vertexes().len());
        for v in facet.iter() {
            let key = (v.color, v.value.clone());
            let next = var_ids.len();
            let id = *var_ids.entry(key.clone()).or_insert_with(|| {
                keys.push(key.clone());
                domains.push(v.value.base_values().into_iter().collect::<Vec<u32>>());
                next
            });
            vars.push(id);
        }
        state_vars.push(vars);
    }
    let mut var_states = vec![Vec::new(); domains.len()];
    for (local, vars) in state_vars.iter().enumerate() {
        for &u in vars {
            var_states[u].push(local);
        }
    }
    (Csp { domains, state_vars, var_states, k }, keys)
}

/// Searches for a decision morphism from the protocol into k-set
/// agreement. `Ok` with no morphism is a proof of unsolvability (the
/// search is exhaustive); exceeding the node budget is an error, not a
/// verdict.
pub fn search_morphism(
    protocol: &ProtocolModel,
    k: usize,
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    if k == 0 {
        return Err(Error::Precondition("agreement width k must be positive".into()));
    }
    let mut budget = Budget { explored: 0, limit: config.node_budget };

    if config.presweep {
        let mut by_base: BTreeMap<&Simplex, Vec<usize>> = BTreeMap::new();
        for (s, sf) in protocol.facets().iter().enumerate() {
            by_base.entry(sf.base()).or_default().push(s);
        }
        for (base, states) in by_base {
            let (csp, _) = build_csp(protocol, &states, k);
            if Dfs::new(&csp).solve(&mut budget)?.is_none() {
                return Ok(SearchOutcome {
                    morphism: None,
                    explored: budget.explored,
                    refuted_base: Some(base.to_string()),
                });
            }
        }
    }

    let all: Vec<usize> = (0..protocol.facets().len()).collect();
    let (csp, keys) = build_csp(protocol, &all, k);
    let solution = Dfs::new(&csp).solve(&mut budget)?;
    Ok(SearchOutcome {
        morphism: solution.map(|values| {
            Morphism::new(keys.into_iter().zip(values).collect())
        }),
        explored: budget.explored,
        refuted_base: None,
    })
}
