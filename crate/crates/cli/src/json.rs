//! Canonical interchange format. Top-level keys: `meta` (kind, n, k, m,
//! version), `states` (id, name, base, history, atoms), `relations` (per
//! process, the indistinguishability pairs). States built from subdivided
//! facets serialize symbolically as input values plus schedule strings;
//! anything else carries its vertex values as explicit trees. Imports
//! recompute the relations and reject a file that disagrees.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use epimu::logic::model::ModelState;
use epimu::logic::parse::parse_formula;
use epimu::subdivision::{iterated_subdivision, OrderedSetPartition, SubdividedFacet};
use epimu::{AtomicProp, Formula, ProcessId, Simplex, SimplicialModel, Value, Vertex};
use serde_json::{json, Map, Value as Json};

use crate::fail::Failure;
use crate::model::Built;

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Base(x) => json!(x),
        Value::Pair(a, b) => json!({ "pair": [value_to_json(a), value_to_json(b)] }),
        Value::View(set) => json!({
            "view": set
                .iter()
                .map(|vx| json!([vx.color.0, value_to_json(&vx.value)]))
                .collect::<Vec<_>>()
        }),
    }
}

pub fn value_from_json(v: &Json) -> Result<Value, Failure> {
    if let Some(x) = v.as_u64() {
        let x = u32::try_from(x).map_err(|_| Failure::input("value out of range"))?;
        return Ok(Value::Base(x));
    }
    let obj = v
        .as_object()
        .ok_or_else(|| Failure::input(format!("expected a value tree, got {v}")))?;
    if let Some(pair) = obj.get("pair") {
        let parts = pair
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Failure::input("pair must hold exactly two values"))?;
        return Ok(Value::Pair(
            Box::new(value_from_json(&parts[0])?),
            Box::new(value_from_json(&parts[1])?),
        ));
    }
    if let Some(view) = obj.get("view") {
        let items = view
            .as_array()
            .ok_or_else(|| Failure::input("view must be an array"))?;
        let mut set = BTreeSet::new();
        for item in items {
            let pair = item
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Failure::input("view entries are [color, value] pairs"))?;
            let color = pair[0]
                .as_u64()
                .ok_or_else(|| Failure::input("view colors are integers"))?;
            set.insert(Vertex::new(
                ProcessId(color as u32),
                value_from_json(&pair[1])?,
            ));
        }
        return Ok(Value::View(set));
    }
    Err(Failure::input(format!("unrecognized value tree {v}")))
}

fn base_values(sf: &SubdividedFacet) -> Vec<u32> {
    sf.base()
        .iter()
        .map(|v| match v.value {
            Value::Base(x) => x,
            // protocol bases are validated to be inputs at construction
            _ => unreachable!("protocol base carries a non-input value"),
        })
        .collect()
}

fn state_to_json(id: usize, st: &ModelState, sf: Option<&SubdividedFacet>) -> Json {
    let (base, history) = match sf {
        Some(sf) => (
            json!(base_values(sf)),
            json!(sf.history().iter().map(|g| g.to_string()).collect::<Vec<_>>()),
        ),
        None => (
            json!(st
                .facet
                .iter()
                .map(|v| json!([v.color.0, value_to_json(&v.value)]))
                .collect::<Vec<_>>()),
            json!([]),
        ),
    };
    json!({
        "id": id,
        "name": st.name,
        "base": base,
        "history": history,
        "atoms": st.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
    })
}

pub fn relation_pairs(
    model: &SimplicialModel,
) -> Result<BTreeMap<u32, BTreeSet<(usize, usize)>>, Failure> {
    let mut out = BTreeMap::new();
    for a in model.processes() {
        let mut pairs = BTreeSet::new();
        for class in model.equivalence_classes(&BTreeSet::from([a]))? {
            let ids: Vec<usize> = class.iter().copied().collect();
            for (i, &x) in ids.iter().enumerate() {
                for &y in &ids[i + 1..] {
                    pairs.insert((x, y));
                }
            }
        }
        out.insert(a.0, pairs);
    }
    Ok(out)
}

pub fn export(built: &Built) -> Result<Json, Failure> {
    let states: Vec<Json> = built
        .model
        .states()
        .iter()
        .enumerate()
        .map(|(id, st)| state_to_json(id, st, built.facets.as_ref().map(|f| &f[id])))
        .collect();
    let mut relations = Map::new();
    for (a, pairs) in relation_pairs(&built.model)? {
        relations.insert(
            a.to_string(),
            json!(pairs.iter().map(|(x, y)| json!([x, y])).collect::<Vec<_>>()),
        );
    }
    Ok(json!({
        "meta": built.meta,
        "states": states,
        "relations": relations,
    }))
}

fn parse_atom(text: &str) -> Result<AtomicProp, Failure> {
    match parse_formula(text) {
        Ok(Formula::Atom(a)) => Ok(a),
        _ => Err(Failure::input(format!(
            "atom {text:?} is not a positive input/decide literal"
        ))),
    }
}

pub fn import(path: &Path) -> Result<Built, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let v: Json = serde_json::from_str(&text)?;
    let meta = v
        .get("meta")
        .ok_or_else(|| Failure::input("missing meta object"))?;
    let n = meta
        .get("n")
        .and_then(Json::as_u64)
        .ok_or_else(|| Failure::input("meta.n must be an integer"))? as usize;
    let entries = v
        .get("states")
        .and_then(Json::as_array)
        .ok_or_else(|| Failure::input("missing states array"))?;

    let mut states = Vec::with_capacity(entries.len());
    let mut facets: Vec<SubdividedFacet> = Vec::new();
    let mut symbolic = true;
    for (i, entry) in entries.iter().enumerate() {
        let id = entry
            .get("id")
            .and_then(Json::as_u64)
            .ok_or_else(|| Failure::input("state entries need an integer id"))?;
        if id as usize != i {
            return Err(Failure::input(format!(
                "state ids must be 0..{} in order, found {id} at position {i}",
                entries.len()
            )));
        }
        let name = match entry.get("name").and_then(Json::as_str) {
            Some(s) => s.to_string(),
            None => format!("s{i}"),
        };
        let base = entry
            .get("base")
            .and_then(Json::as_array)
            .ok_or_else(|| Failure::input("state entries need a base array"))?;
        let history: Vec<OrderedSetPartition> = match entry.get("history").and_then(Json::as_array)
        {
            Some(items) => items
                .iter()
                .map(|h| {
                    let s = h
                        .as_str()
                        .ok_or_else(|| Failure::input("history entries are schedule strings"))?;
                    Ok(OrderedSetPartition::parse(s)?)
                })
                .collect::<Result<_, Failure>>()?,
            None => Vec::new(),
        };

        let facet = if base.iter().all(Json::is_u64) {
            let values: Vec<u32> = base.iter().map(|b| b.as_u64().unwrap() as u32).collect();
            let sf = iterated_subdivision(&Simplex::from_base_values(&values), &history)?;
            let facet = sf.realized().clone();
            facets.push(sf);
            facet
        } else {
            if !history.is_empty() {
                return Err(Failure::input(
                    "a state with explicit vertex values cannot also carry a history",
                ));
            }
            symbolic = false;
            let mut vertexes = Vec::new();
            for item in base {
                let pair = item
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Failure::input("base entries are [color, value] pairs"))?;
                let color = pair[0]
                    .as_u64()
                    .ok_or_else(|| Failure::input("base colors are integers"))?;
                vertexes.push(Vertex::new(
                    ProcessId(color as u32),
                    value_from_json(&pair[1])?,
                ));
            }
            Simplex::new(vertexes)?
        };

        let mut atoms = BTreeSet::new();
        if let Some(items) = entry.get("atoms").and_then(Json::as_array) {
            for item in items {
                let s = item
                    .as_str()
                    .ok_or_else(|| Failure::input("atoms are strings"))?;
                atoms.insert(parse_atom(s)?);
            }
        }
        states.push(ModelState { name, facet, atoms });
    }

    let model = SimplicialModel::new(n, states)?;
    if let Some(given) = v.get("relations").and_then(Json::as_object) {
        let computed = relation_pairs(&model)?;
        for (key, pairs) in given {
            let a: u32 = key
                .parse()
                .map_err(|_| Failure::input(format!("relation key {key:?} is not a process")))?;
            let expected = computed
                .get(&a)
                .ok_or_else(|| Failure::input(format!("process {a} is not in the model")))?;
            let mut listed = BTreeSet::new();
            for p in pairs.as_array().into_iter().flatten() {
                let xy = p.as_array().filter(|q| q.len() == 2).ok_or_else(|| {
                    Failure::input("relation entries are [id, id] pairs")
                })?;
                let (x, y) = (xy[0].as_u64(), xy[1].as_u64());
                match (x, y) {
                    (Some(x), Some(y)) => {
                        let (x, y) = (x as usize, y as usize);
                        listed.insert((x.min(y), x.max(y)));
                    }
                    _ => return Err(Failure::input("relation entries are [id, id] pairs")),
                }
            }
            if &listed != expected {
                return Err(Failure::input(format!(
                    "relations for process {a} disagree with the facets: \
                     file lists {} pairs, the model has {}",
                    listed.len(),
                    expected.len()
                )));
            }
        }
    }

    Ok(Built {
        meta: meta.clone(),
        model,
        facets: if symbolic { Some(facets) } else { None },
    })
}
