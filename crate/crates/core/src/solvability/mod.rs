//! Deciding task solvability: decision morphisms from protocol models to
//! task models, the factual-change update they induce, and the knowledge
//! preservation check. Submodules: [`search`] looks for morphisms,
//! [`fd`] runs the path obstruction on the distinguished facet families,
//! [`sperner`] counts rainbow facets under carrier-respecting colorings.

pub mod fd;
pub mod search;
pub mod sperner;

use crate::error::{Error, Result};
use crate::logic::model::{ModelState, SimplicialModel, StateId};
use crate::logic::{AtomKind, AtomicProp, Formula};
use crate::models::ProtocolModel;
use crate::simplicial::{ProcessId, Simplex, Value, Vertex};
use crate::subdivision::SubdividedFacet;
use std::collections::{BTreeMap, BTreeSet};

/// A candidate decision map: what a process decides is a function of its
/// color and final view. Color preservation and input preservation are
/// built into the shape, so verifying a morphism reduces to checking that
/// every image facet is a task state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub decisions: BTreeMap<(ProcessId, Value), u32>,
}

impl Morphism {
    pub fn new(decisions: BTreeMap<(ProcessId, Value), u32>) -> Morphism {
        Morphism { decisions }
    }

    pub fn decision(&self, a: ProcessId, view: &Value) -> Result<u32> {
        self.decisions
            .get(&(a, view.clone()))
            .copied()
            .ok_or(Error::PartialAssignment(a))
    }

    /// The task facet this run maps to: each process keeps its input and
    /// adds its decision.
    pub fn image_facet(&self, sigma: &SubdividedFacet) -> Result<Simplex> {
        let mut vertexes = Vec::new();
        for v in sigma.realized().iter() {
            let d = self.decision(v.color, &v.value)?;
            let input = sigma.base().view_of(v.color)?.clone();
            vertexes.push(Vertex::new(v.color, Value::pair(input, Value::Base(d))));
        }
        Simplex::new(vertexes)
    }
}

/// The own-input decision map: every process decides the input it started
/// with, read off from its view.
pub fn own_input_decision(a: ProcessId, view: &Value) -> Result<u32> {
    match view {
        Value::Base(v) => Ok(*v),
        Value::View(members) => {
            let own = members
                .iter()
                .find(|w| w.color == a)
                .ok_or(Error::ColorAbsent(a))?;
            own_input_decision(a, &own.value)
        }
        Value::Pair(..) => Err(Error::Precondition(
            "product values carry no single input".into(),
        )),
    }
}

/// Builds the own-input morphism over the given facets.
pub fn own_input_morphism<'a>(
    facets: impl IntoIterator<Item = &'a SubdividedFacet>,
) -> Result<Morphism> {
    let mut decisions = BTreeMap::new();
    for sf in facets {
        for v in sf.realized().iter() {
            let d = own_input_decision(v.color, &v.value)?;
            decisions.insert((v.color, v.value.clone()), d);
        }
    }
    Ok(Morphism { decisions })
}

/// Image state of every protocol state, in state order. Errors if some
/// image facet is not a task state.
pub fn morphism_images(
    protocol: &ProtocolModel,
    task: &SimplicialModel,
    delta: &Morphism,
) -> Result<Vec<StateId>> {
    protocol
        .facets()
        .iter()
        .map(|sf| {
            let image = delta.image_facet(sf)?;
            task.find_state(&image).ok_or(Error::StateNotInModel)
        })
        .collect()
}

/// A decision map is a morphism exactly when every run lands on a task
/// state. `Ok(false)` means some run does not; errors are structural
/// (missing decisions).
pub fn verify_morphism(
    protocol: &ProtocolModel,
    task: &SimplicialModel,
    delta: &Morphism,
) -> Result<bool> {
    for sf in protocol.facets() {
        let image = delta.image_facet(sf)?;
        if task.find_state(&image).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Raw vertex-map morphism check between models: total on the source
/// states' vertexes, color preserving, every state facet mapped onto a
/// state facet of the target.
pub fn is_morphism(
    map: &BTreeMap<Vertex, Vertex>,
    from: &SimplicialModel,
    to: &SimplicialModel,
) -> Result<bool> {
    for st in from.states() {
        for v in st.facet.iter() {
            let img = map
                .get(v)
                .ok_or_else(|| Error::PartialVertexMap(Box::new(v.clone())))?;
            if img.color != v.color {
                return Ok(false);
            }
        }
        let image = Simplex::new(st.facet.iter().map(|v| map[v].clone()))
            .expect("color-preserving images are simplexes");
        if to.find_state(&image).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The factual-change update of the protocol model along state images:
/// every state keeps its own input atoms and learns the decision atoms of
/// its image. No verification happens here; prefer
/// [`apply_factual_change`] unless a deliberately broken map is under
/// study.
pub fn pull_back(
    protocol: &ProtocolModel,
    target: &SimplicialModel,
    images: &[StateId],
) -> Result<SimplicialModel> {
    if images.len() != protocol.model().state_count() {
        return Err(Error::Precondition(format!(
            "expected {} image states, got {}",
            protocol.model().state_count(),
            images.len()
        )));
    }
    let mut states = Vec::with_capacity(images.len());
    for (st, image) in protocol.model().states().iter().zip(images) {
        let mut atoms = st.atoms.clone();
        for atom in &target.state(*image)?.atoms {
            if atom.kind == AtomKind::Decide {
                atoms.insert(*atom);
            }
        }
        states.push(ModelState {
            name: st.name.clone(),
            facet: st.facet.clone(),
            atoms,
        });
    }
    SimplicialModel::new(protocol.model().n(), states)
}

/// Verifies the decision map and applies the factual change it induces.
pub fn apply_factual_change(
    protocol: &ProtocolModel,
    task: &SimplicialModel,
    delta: &Morphism,
) -> Result<SimplicialModel> {
    if !verify_morphism(protocol, task, delta)? {
        return Err(Error::UnverifiedMorphism);
    }
    let images = morphism_images(protocol, task, delta)?;
    pull_back(protocol, task, &images)
}

/// States (among `states`) where the image satisfies `phi` in the target
/// but the updated source does not: morphisms gain no knowledge, so for a
/// genuine morphism the result is empty for every positive formula.
pub fn knowledge_gain_on(
    source: &SimplicialModel,
    target: &SimplicialModel,
    images: &[StateId],
    phi: &Formula,
    states: &[StateId],
) -> Result<Vec<StateId>> {
    let target_den = target.eval(phi)?;
    let source_den = source.eval(phi)?;
    let mut gained = Vec::new();
    for x in states {
        let image = *images.get(*x).ok_or(Error::StateNotInModel)?;
        if target_den.contains(&image) && !source_den.contains(x) {
            gained.push(*x);
        }
    }
    Ok(gained)
}

/// Convenience form of [`knowledge_gain_on`] for a decision map.
pub fn knowledge_gain_check(
    protocol: &ProtocolModel,
    task: &SimplicialModel,
    delta: &Morphism,
    phi: &Formula,
    states: &[StateId],
) -> Result<Vec<StateId>> {
    let images = morphism_images(protocol, task, delta)?;
    let source = pull_back(protocol, task, &images)?;
    knowledge_gain_on(&source, task, &images, phi, states)
}

/// Decision atoms present at a facet under a decision map.
pub fn decision_atoms(sigma: &SubdividedFacet, delta: &Morphism) -> Result<BTreeSet<AtomicProp>> {
    sigma
        .realized()
        .iter()
        .map(|v| {
            let d = delta.decision(v.color, &v.value)?;
            Ok(AtomicProp::decide(v.color.0, d))
        })
        .collect()
}
