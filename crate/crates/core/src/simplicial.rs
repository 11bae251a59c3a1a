//! Chromatic simplicial complexes.
//!
//! A vertex pairs a process (its color) with a value; a simplex is a set of
//! vertexes with pairwise distinct colors; a complex is given by its maximal
//! simplexes (facets). Complexes here are pure and system-colored: every
//! facet carries every color `0..=n`, which is what makes the induced
//! indistinguishability relations equivalences.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A process name, used as a vertex color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessId(pub u32);

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A vertex value. Base values are plain numbers; products pair two values
/// per color; views are the snapshot contents written by subdivision, i.e.
/// the set of vertexes a process saw.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Base(u32),
    Pair(Box<Value>, Box<Value>),
    View(BTreeSet<Vertex>),
}

impl Value {
    pub fn pair(lhs: Value, rhs: Value) -> Value {
        Value::Pair(Box::new(lhs), Box::new(rhs))
    }

    /// All base numbers reachable through nested pairs and views.
    pub fn base_values(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_base_values(&mut out);
        out
    }

    fn collect_base_values(&self, out: &mut BTreeSet<u32>) {
        match self {
            Value::Base(v) => {
                out.insert(*v);
            }
            Value::Pair(l, r) => {
                l.collect_base_values(out);
                r.collect_base_values(out);
            }
            Value::View(vs) => {
                for v in vs {
                    v.value.collect_base_values(out);
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Base(v) => write!(f, "{v}"),
            Value::Pair(l, r) => write!(f, "({l},{r})"),
            Value::View(vs) => {
                write!(f, "{{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}:{}", v.color, v.value)?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub color: ProcessId,
    pub value: Value,
}

impl Vertex {
    pub fn new(color: ProcessId, value: Value) -> Vertex {
        Vertex { color, value }
    }

    /// Shorthand for a base-valued vertex.
    pub fn base(color: u32, value: u32) -> Vertex {
        Vertex::new(ProcessId(color), Value::Base(value))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.color, self.value)
    }
}

/// A chromatic simplex. Vertexes are kept sorted by color, so equal
/// simplexes have equal representations and hash alike.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex {
    vertexes: Vec<Vertex>,
}

impl Simplex {
    /// Builds a simplex from vertexes. Repeating a vertex is harmless (set
    /// semantics); two different values on the same color are rejected.
    pub fn new(vertexes: impl IntoIterator<Item = Vertex>) -> Result<Simplex> {
        let mut by_color: BTreeMap<ProcessId, Value> = BTreeMap::new();
        for v in vertexes {
            match by_color.get(&v.color) {
                Some(existing) if *existing != v.value => {
                    return Err(Error::DuplicateColor(v.color));
                }
                _ => {
                    by_color.insert(v.color, v.value);
                }
            }
        }
        Ok(Simplex {
            vertexes: by_color
                .into_iter()
                .map(|(color, value)| Vertex { color, value })
                .collect(),
        })
    }

    pub fn empty() -> Simplex {
        Simplex { vertexes: Vec::new() }
    }

    /// Builds the facet with base value `values[i]` for process `i`.
    pub fn from_base_values(values: &[u32]) -> Simplex {
        Simplex {
            vertexes: values
                .iter()
                .enumerate()
                .map(|(i, v)| Vertex::base(i as u32, *v))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertexes.is_empty()
    }

    /// Geometric dimension; the empty simplex has dimension -1.
    pub fn dim(&self) -> isize {
        self.vertexes.len() as isize - 1
    }

    pub fn vertexes(&self) -> &[Vertex] {
        &self.vertexes
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vertex> {
        self.vertexes.iter()
    }

    /// The color set of the simplex.
    pub fn chi(&self) -> BTreeSet<ProcessId> {
        self.vertexes.iter().map(|v| v.color).collect()
    }

    pub fn contains_vertex(&self, v: &Vertex) -> bool {
        self.value_of(v.color) == Some(&v.value)
    }

    pub fn value_of(&self, color: ProcessId) -> Option<&Value> {
        self.vertexes
            .binary_search_by(|v| v.color.cmp(&color))
            .ok()
            .map(|i| &self.vertexes[i].value)
    }

    /// The value carried by `color`, or an error if the color is absent.
    pub fn view_of(&self, color: ProcessId) -> Result<&Value> {
        self.value_of(color).ok_or(Error::ColorAbsent(color))
    }

    /// The subsimplex spanned by the given colors (absent colors are skipped).
    pub fn restrict(&self, colors: &BTreeSet<ProcessId>) -> Simplex {
        Simplex {
            vertexes: self
                .vertexes
                .iter()
                .filter(|v| colors.contains(&v.color))
                .cloned()
                .collect(),
        }
    }

    pub fn intersection(&self, other: &Simplex) -> Simplex {
        Simplex {
            vertexes: self
                .vertexes
                .iter()
                .filter(|v| other.contains_vertex(v))
                .cloned()
                .collect(),
        }
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.vertexes.iter().all(|v| other.contains_vertex(v))
    }

    /// Every face, the empty simplex and the simplex itself included;
    /// 2^(dim+1) faces in total.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.vertexes.len();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1u32 << n) {
            let vs = self
                .vertexes
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| v.clone())
                .collect();
            out.push(Simplex { vertexes: vs });
        }
        out
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vertexes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A pure chromatic complex over processes `0..=n`, stored by its facets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    n: usize,
    facets: BTreeSet<Simplex>,
}

impl Complex {
    /// Builds a complex whose facets must each carry exactly the colors
    /// `0..=n`; purity makes facet maximality automatic.
    pub fn new(n: usize, facets: impl IntoIterator<Item = Simplex>) -> Result<Complex> {
        let full: BTreeSet<ProcessId> = (0..=n as u32).map(ProcessId).collect();
        let facets: BTreeSet<Simplex> = facets.into_iter().collect();
        for f in &facets {
            if f.chi() != full {
                return Err(Error::NotSystemFacet(f.to_string()));
            }
        }
        Ok(Complex { n, facets })
    }

    /// Largest process index; the process set is `0..=n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn processes(&self) -> impl Iterator<Item = ProcessId> {
        (0..=self.n as u32).map(ProcessId)
    }

    pub fn facets(&self) -> impl Iterator<Item = &Simplex> {
        self.facets.iter()
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn contains_facet(&self, s: &Simplex) -> bool {
        self.facets.contains(s)
    }

    /// Face membership: a simplex belongs to the complex iff some facet
    /// contains it.
    pub fn contains_simplex(&self, s: &Simplex) -> bool {
        self.facets.iter().any(|f| s.is_face_of(f))
    }

    pub fn vertexes(&self) -> BTreeSet<Vertex> {
        self.facets
            .iter()
            .flat_map(|f| f.iter().cloned())
            .collect()
    }
}

/// Chromatic cartesian product: facets pair the values of equally colored
/// vertexes, one facet per facet pair.
pub fn cartesian_product(lhs: &Complex, rhs: &Complex) -> Result<Complex> {
    if lhs.n != rhs.n {
        return Err(Error::ColorMismatch {
            lhs: lhs.n + 1,
            rhs: rhs.n + 1,
        });
    }
    let mut facets = BTreeSet::new();
    for x in lhs.facets() {
        for y in rhs.facets() {
            let vs = x.iter().map(|v| {
                let w = y.value_of(v.color).expect("system facet carries all colors");
                Vertex::new(v.color, Value::pair(v.value.clone(), w.clone()))
            });
            facets.insert(Simplex { vertexes: vs.collect() });
        }
    }
    Ok(Complex { n: lhs.n, facets })
}

/// Splits a product simplex back into its two components.
pub fn split_product(s: &Simplex) -> Result<(Simplex, Simplex)> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for v in s.iter() {
        match &v.value {
            Value::Pair(l, r) => {
                left.push(Vertex::new(v.color, (**l).clone()));
                right.push(Vertex::new(v.color, (**r).clone()));
            }
            _ => {
                return Err(Error::Precondition(format!(
                    "vertex {v} is not a product vertex"
                )))
            }
        }
    }
    Ok((Simplex { vertexes: left }, Simplex { vertexes: right }))
}

/// Checks that `f` restricted to the vertexes of `from` is a chromatic
/// simplicial map into `to`: color-preserving, with every facet image a
/// simplex of `to`. The map must cover every vertex of `from`.
pub fn is_simplicial_map(
    f: &BTreeMap<Vertex, Vertex>,
    from: &Complex,
    to: &Complex,
) -> Result<bool> {
    for v in from.vertexes() {
        let img = f
            .get(&v)
            .ok_or_else(|| Error::PartialVertexMap(Box::new(v.clone())))?;
        if img.color != v.color {
            return Ok(false);
        }
    }
    for facet in from.facets() {
        let image = Simplex::new(facet.iter().map(|v| f[v].clone()))
            .expect("color-preserving image of a simplex is a simplex");
        if !to.contains_simplex(&image) {
            return Ok(false);
        }
    }
    Ok(true)
}
