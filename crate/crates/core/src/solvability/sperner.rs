//! Rainbow facet counting over the iterated subdivision of the rainbow
//! input facet. A legal coloring assigns each vertex one of the colors it
//! transitively derives from; the number of facets wearing all n+1 colors
//! is then odd, whatever the coloring. The count is exposed rather than
//! the parity so a caller can see the actual witness number.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::simplicial::{ProcessId, Simplex, Value, Vertex};
use crate::subdivision::{enumerate_osp, iterated_subdivision, OrderedSetPartition, SubdividedFacet};

/// The base colors a vertex's value ultimately rests on: itself for a
/// plain input, everyone it saw for a view.
pub fn carrier_colors(v: &Vertex) -> BTreeSet<ProcessId> {
    match &v.value {
        Value::View(vs) => vs.iter().flat_map(carrier_colors).collect(),
        _ => BTreeSet::from([v.color]),
    }
}

/// The rainbow facet (process i holds input i) subdivided `rounds` times,
/// with its vertex universe.
pub struct SpernerInstance {
    n: usize,
    facets: Vec<SubdividedFacet>,
    vertexes: Vec<Vertex>,
}

impl SpernerInstance {
    pub fn new(n: usize, rounds: usize) -> Result<SpernerInstance> {
        let values: Vec<u32> = (0..=n as u32).collect();
        let base = Simplex::from_base_values(&values);
        let schedules = enumerate_osp(n);
        let count = schedules.len().pow(rounds as u32);
        let mut facets = Vec::with_capacity(count);
        let mut vertexes = BTreeSet::new();
        for code in 0..count {
            let mut rest = code;
            let mut history: Vec<OrderedSetPartition> = Vec::with_capacity(rounds);
            for _ in 0..rounds {
                history.push(schedules[rest % schedules.len()].clone());
                rest /= schedules.len();
            }
            history.reverse();
            let sf = iterated_subdivision(&base, &history)?;
            vertexes.extend(sf.realized().iter().cloned());
            facets.push(sf);
        }
        Ok(SpernerInstance {
            n,
            facets,
            vertexes: vertexes.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn facets(&self) -> &[SubdividedFacet] {
        &self.facets
    }

    pub fn vertexes(&self) -> &[Vertex] {
        &self.vertexes
    }
}

/// A choice of color per vertex of the instance.
pub type SpernerColoring = BTreeMap<Vertex, ProcessId>;

/// Every vertex must be colored, and only with a color from its carrier.
pub fn check_coloring(inst: &SpernerInstance, coloring: &SpernerColoring) -> Result<()> {
    for v in inst.vertexes() {
        let c = coloring.get(v).ok_or_else(|| {
            Error::Precondition(format!("vertex {v} of the instance is uncolored"))
        })?;
        if !carrier_colors(v).contains(c) {
            return Err(Error::NonSpernerColoring(*c));
        }
    }
    Ok(())
}

/// Number of facets whose vertexes wear all n+1 colors under a legal
/// coloring. Always odd.
pub fn rainbow_count(inst: &SpernerInstance, coloring: &SpernerColoring) -> Result<usize> {
    check_coloring(inst, coloring)?;
    let all: BTreeSet<ProcessId> = (0..=inst.n as u32).map(ProcessId).collect();
    let mut count = 0;
    for sf in &inst.facets {
        let worn: BTreeSet<ProcessId> = sf
            .realized()
            .iter()
            .map(|v| coloring[v])
            .collect();
        if worn == all {
            count += 1;
        }
    }
    Ok(count)
}

/// The least carrier color everywhere: the deterministic legal coloring.
pub fn min_carrier_coloring(inst: &SpernerInstance) -> SpernerColoring {
    inst.vertexes()
        .iter()
        .map(|v| (v.clone(), *carrier_colors(v).iter().next().unwrap()))
        .collect()
}

/// A uniformly random legal coloring.
pub fn random_coloring(inst: &SpernerInstance, rng: &mut impl Rng) -> SpernerColoring {
    inst.vertexes()
        .iter()
        .map(|v| {
            let carrier: Vec<ProcessId> = carrier_colors(v).into_iter().collect();
            (v.clone(), carrier[rng.gen_range(0..carrier.len())])
        })
        .collect()
}

/// All legal colorings, in mixed-radix order over the vertex carriers.
/// Only sensible where the product of carrier sizes stays small.
pub fn enumerate_colorings(inst: &SpernerInstance) -> Vec<SpernerColoring> {
    let carriers: Vec<Vec<ProcessId>> = inst
        .vertexes()
        .iter()
        .map(|v| carrier_colors(v).into_iter().collect())
        .collect();
    let total: usize = carriers.iter().map(|c| c.len()).product();
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut rest = code;
        let mut coloring = SpernerColoring::new();
        for (v, carrier) in inst.vertexes().iter().zip(&carriers) {
            coloring.insert(v.clone(), carrier[rest % carrier.len()]);
            rest /= carrier.len();
        }
        out.push(coloring);
    }
    out
}
