//! Iterated standard chromatic subdivision.
//!
//! A facet of the subdivision of a facet `X` is written `X * gamma` where
//! `gamma` is an ordered set partition of the processes: the blocks are the
//! concurrency classes of one immediate-snapshot round, in schedule order.
//! Process `a` in block `q` sees the values of every process in blocks
//! `1..=q`. Iterating rounds subdivides the subdivision, with round-`i`
//! views as the inputs of round `i+1`.

use crate::error::{Error, Result};
use crate::simplicial::{ProcessId, Simplex, Value, Vertex};
use std::collections::BTreeSet;
use std::fmt;

/// An ordered set partition: disjoint nonempty blocks in schedule order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderedSetPartition {
    blocks: Vec<BTreeSet<ProcessId>>,
}

impl OrderedSetPartition {
    pub fn new(blocks: Vec<BTreeSet<ProcessId>>) -> Result<OrderedSetPartition> {
        let mut seen = BTreeSet::new();
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::MalformedPartition("empty block".into()));
            }
            for p in b {
                if !seen.insert(*p) {
                    return Err(Error::MalformedPartition(format!(
                        "process {p} occurs in two blocks"
                    )));
                }
            }
        }
        Ok(OrderedSetPartition { blocks })
    }

    /// Parses the `<0,1|2|3>` notation.
    pub fn parse(text: &str) -> Result<OrderedSetPartition> {
        let inner = text
            .trim()
            .strip_prefix('<')
            .and_then(|t| t.strip_suffix('>'))
            .ok_or_else(|| Error::MalformedPartition(format!("expected <...>, got {text:?}")))?;
        let mut blocks = Vec::new();
        for part in inner.split('|') {
            let mut block = BTreeSet::new();
            for id in part.split(',') {
                let id = id.trim();
                let v: u32 = id
                    .parse()
                    .map_err(|_| Error::MalformedPartition(format!("bad process id {id:?}")))?;
                block.insert(ProcessId(v));
            }
            blocks.push(block);
        }
        OrderedSetPartition::new(blocks)
    }

    pub fn blocks(&self) -> &[BTreeSet<ProcessId>] {
        &self.blocks
    }

    /// Union of all blocks.
    pub fn ground(&self) -> BTreeSet<ProcessId> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// Index of the block containing `a`.
    pub fn block_of(&self, a: ProcessId) -> Result<usize> {
        self.blocks
            .iter()
            .position(|b| b.contains(&a))
            .ok_or(Error::ColorAbsent(a))
    }

    /// Tail form for dimension `d`: the trailing blocks are the singletons
    /// `{d+1}, ..., {n}` in ascending order and the leading blocks
    /// partition `0..=d`.
    pub fn is_tail_form(&self, d: usize) -> bool {
        let ground = self.ground();
        let n = match ground.iter().next_back() {
            Some(p) => p.0 as usize,
            None => return false,
        };
        if ground.len() != n + 1 || d > n {
            return false;
        }
        let tail_len = n - d;
        if self.blocks.len() < tail_len {
            return false;
        }
        let lead_len = self.blocks.len() - tail_len;
        for (i, b) in self.blocks[lead_len..].iter().enumerate() {
            let expected = ProcessId((d + 1 + i) as u32);
            if b.len() != 1 || !b.contains(&expected) {
                return false;
            }
        }
        self.blocks[..lead_len]
            .iter()
            .flatten()
            .all(|p| (p.0 as usize) <= d)
    }

    /// The leading blocks of a tail-form partition (those covering `0..=d`).
    pub fn leading_blocks(&self, d: usize) -> Result<&[BTreeSet<ProcessId>]> {
        if !self.is_tail_form(d) {
            return Err(Error::MalformedPartition(format!(
                "{self} is not in tail form for dimension {d}"
            )));
        }
        let n = self.ground().len() - 1;
        Ok(&self.blocks[..self.blocks.len() - (n - d)])
    }
}

impl fmt::Display for OrderedSetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            for (j, p) in b.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
            }
        }
        write!(f, ">")
    }
}

/// Nonempty subsets of `elements` of size `size`, in lexicographic order.
fn subsets_of_size(elements: &[ProcessId], size: usize) -> Vec<BTreeSet<ProcessId>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        elements: &[ProcessId],
        start: usize,
        size: usize,
        current: &mut Vec<ProcessId>,
        out: &mut Vec<BTreeSet<ProcessId>>,
    ) {
        if current.len() == size {
            out.push(current.iter().copied().collect());
            return;
        }
        for i in start..elements.len() {
            current.push(elements[i]);
            rec(elements, i + 1, size, current, out);
            current.pop();
        }
    }
    rec(elements, 0, size, &mut current, &mut out);
    out
}

fn enumerate_partitions_of(elements: &[ProcessId]) -> Vec<Vec<BTreeSet<ProcessId>>> {
    if elements.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for size in 1..=elements.len() {
        for first in subsets_of_size(elements, size) {
            let rest: Vec<ProcessId> = elements
                .iter()
                .filter(|p| !first.contains(p))
                .copied()
                .collect();
            for mut tail in enumerate_partitions_of(&rest) {
                let mut blocks = vec![first.clone()];
                blocks.append(&mut tail);
                out.push(blocks);
            }
        }
    }
    out
}

/// All ordered set partitions of `0..=n`, in a fixed order: first block
/// sizes ascending, contents lexicographic, then recursively on the rest.
pub fn enumerate_osp(n: usize) -> Vec<OrderedSetPartition> {
    let elements: Vec<ProcessId> = (0..=n as u32).map(ProcessId).collect();
    enumerate_partitions_of(&elements)
        .into_iter()
        .map(|blocks| OrderedSetPartition { blocks })
        .collect()
}

/// Ordered set partitions of `0..=n` whose trailing blocks are the
/// singletons `{d+1}, ..., {n}` and whose leading blocks partition `0..=d`.
pub fn enumerate_osp_tail(d: usize, n: usize) -> Vec<OrderedSetPartition> {
    assert!(d <= n, "dimension exceeds process range");
    let leaders: Vec<ProcessId> = (0..=d as u32).map(ProcessId).collect();
    enumerate_partitions_of(&leaders)
        .into_iter()
        .map(|mut blocks| {
            for p in (d + 1)..=n {
                blocks.push(BTreeSet::from([ProcessId(p as u32)]));
            }
            OrderedSetPartition { blocks }
        })
        .collect()
}

/// The processes whose round values `a` sees under `gamma`: the union of
/// the blocks up to and including `a`'s own.
pub fn view_in_osp(a: ProcessId, gamma: &OrderedSetPartition) -> Result<BTreeSet<ProcessId>> {
    let q = gamma.block_of(a)?;
    Ok(gamma.blocks[..=q].iter().flatten().copied().collect())
}

/// One subdivision round: the facet whose vertex for `a` carries the view
/// of `a` under `gamma`, i.e. the sub-simplex of `x` that `a` saw.
pub fn subdivide_facet(x: &Simplex, gamma: &OrderedSetPartition) -> Result<Simplex> {
    if x.chi() != gamma.ground() {
        return Err(Error::NotSystemFacet(format!(
            "facet colors {:?} do not match partitioned processes",
            x.chi().iter().map(|p| p.0).collect::<Vec<_>>()
        )));
    }
    let vertexes = x.chi().into_iter().map(|a| {
        let seen = view_in_osp(a, gamma).expect("chi(x) equals the ground set");
        let view: BTreeSet<Vertex> = seen
            .into_iter()
            .map(|b| Vertex::new(b, x.view_of(b).expect("ground process").clone()))
            .collect();
        Vertex::new(a, Value::View(view))
    });
    Simplex::new(vertexes)
}

/// A facet of the iterated subdivision, identified by its base facet and
/// its per-round schedule history. The realized simplex (nested views) is
/// derived data and excluded from equality.
#[derive(Clone, Debug)]
pub struct SubdividedFacet {
    base: Simplex,
    history: Vec<OrderedSetPartition>,
    realized: Simplex,
}

impl PartialEq for SubdividedFacet {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.history == other.history
    }
}

impl Eq for SubdividedFacet {}

impl PartialOrd for SubdividedFacet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SubdividedFacet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.base, &self.history).cmp(&(&other.base, &other.history))
    }
}

impl std::hash::Hash for SubdividedFacet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.base.hash(state);
        self.history.hash(state);
    }
}

impl fmt::Display for SubdividedFacet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        for g in &self.history {
            write!(f, "*{g}")?;
        }
        Ok(())
    }
}

impl SubdividedFacet {
    pub fn base(&self) -> &Simplex {
        &self.base
    }

    pub fn history(&self) -> &[OrderedSetPartition] {
        &self.history
    }

    pub fn rounds(&self) -> usize {
        self.history.len()
    }

    /// The facet of the iterated subdivision itself: vertex values are
    /// views nested `rounds` deep.
    pub fn realized(&self) -> &Simplex {
        &self.realized
    }
}

/// Folds `subdivide_facet` over the history, recording base and schedule.
pub fn iterated_subdivision(
    base: &Simplex,
    history: &[OrderedSetPartition],
) -> Result<SubdividedFacet> {
    let mut current = base.clone();
    for gamma in history {
        current = subdivide_facet(&current, gamma)?;
    }
    Ok(SubdividedFacet {
        base: base.clone(),
        history: history.to_vec(),
        realized: current,
    })
}

/// The partner schedule across the face that drops process `b`, where
/// `group` is the set of processes kept fixed (`0..=d` minus `b`).
///
/// The partner moves `b` one step earlier in the schedule: if `b` shares a
/// block, `b` splits off as a singleton immediately before the rest of its
/// block; if `b` is already alone (and not last among the leaders), it
/// merges into the following block. Either way every process other than
/// `b` keeps its view, so the two facets share the `group`-colored face.
/// When `b` is alone in the last leading block its view is the whole round
/// and no partner exists.
pub fn flip(
    group: &BTreeSet<ProcessId>,
    gamma: &OrderedSetPartition,
) -> Result<OrderedSetPartition> {
    let d = group.len();
    let full: BTreeSet<ProcessId> = (0..=d as u32).map(ProcessId).collect();
    let missing: Vec<ProcessId> = full.difference(group).copied().collect();
    let [b] = missing[..] else {
        return Err(Error::Precondition(format!(
            "group must omit exactly one process of 0..={d}"
        )));
    };
    let leaders = gamma.leading_blocks(d)?.to_vec();
    let r = leaders.len();
    let s = leaders
        .iter()
        .position(|blk| blk.contains(&b))
        .expect("tail form places b among the leaders");
    let mut blocks: Vec<BTreeSet<ProcessId>> = Vec::with_capacity(gamma.blocks.len() + 1);
    blocks.extend_from_slice(&leaders[..s]);
    if leaders[s].len() > 1 {
        let mut rest = leaders[s].clone();
        rest.remove(&b);
        blocks.push(BTreeSet::from([b]));
        blocks.push(rest);
        blocks.extend_from_slice(&leaders[s + 1..]);
    } else if s + 1 < r {
        let mut merged = leaders[s + 1].clone();
        merged.insert(b);
        blocks.push(merged);
        blocks.extend_from_slice(&leaders[s + 2..]);
    } else {
        return Err(Error::UndefinedFlip);
    }
    blocks.extend_from_slice(&gamma.blocks[r..]);
    Ok(OrderedSetPartition { blocks })
}

/// All tail-form facets indistinguishable from `sigma` to every process in
/// `group`, computed combinatorially (no view comparison). `group` must be
/// `0..=d` minus `b` and every round of `sigma` must be in tail form for
/// `d`. The result includes `sigma` itself unless `strict` is set.
///
/// Two shapes arise. If `b` is scheduled last (alone) in every round, the
/// group never sees `b` nor the tail processes, so exactly the base values
/// outside `group` may vary. Otherwise the schedule may differ only in the
/// last round where `b` is not scheduled last, and only by the flip: an
/// earlier divergence is visible because some group member observes `b`'s
/// changed view in that later round. In that shape `b` itself is observed,
/// pinning the base on `0..=d`, while processes past `d` run after the
/// whole leading part in every round and their inputs stay free.
pub fn incident_by_osp(
    sigma: &SubdividedFacet,
    group: &BTreeSet<ProcessId>,
    d: usize,
    b: ProcessId,
    strict: bool,
) -> Result<BTreeSet<SubdividedFacet>> {
    if group.len() != d || group.contains(&b) || b.0 as usize > d {
        return Err(Error::Precondition(
            "group must be 0..=d minus the dropped process".into(),
        ));
    }
    for p in group {
        if p.0 as usize > d {
            return Err(Error::Precondition(
                "group must be 0..=d minus the dropped process".into(),
            ));
        }
    }
    let n = match sigma.base().chi().iter().next_back() {
        Some(p) => p.0 as usize,
        None => return Err(Error::NotSystemFacet("empty base".into())),
    };
    for v in sigma.base().iter() {
        match v.value {
            Value::Base(x) if x as usize <= n => {}
            _ => {
                return Err(Error::Precondition(
                    "base facet must carry input values 0..=n".into(),
                ))
            }
        }
    }
    for gamma in sigma.history() {
        if !gamma.is_tail_form(d) {
            return Err(Error::MalformedPartition(format!(
                "{gamma} is not in tail form for dimension {d}"
            )));
        }
    }
    let singleton_b = BTreeSet::from([b]);
    let last_divergent = sigma.history().iter().rposition(|gamma| {
        let leaders = gamma.leading_blocks(d).expect("validated above");
        leaders.last() != Some(&singleton_b)
    });

    let mut out = BTreeSet::new();
    match last_divergent {
        None => {
            // b runs last everywhere: the group's views never leave the
            // group's own base values, so any base agreeing there works.
            for y in crate::models::input_complex(n).facets() {
                if group
                    .iter()
                    .all(|a| y.value_of(*a) == sigma.base().value_of(*a))
                {
                    out.insert(iterated_subdivision(y, sigma.history())?);
                }
            }
        }
        Some(j) => {
            let mut flipped = sigma.history().to_vec();
            flipped[j] = flip(group, &flipped[j])?;
            for y in crate::models::input_complex(n).facets() {
                let agrees = (0..=d as u32)
                    .all(|p| y.value_of(ProcessId(p)) == sigma.base().value_of(ProcessId(p)));
                if agrees {
                    out.insert(iterated_subdivision(y, sigma.history())?);
                    out.insert(iterated_subdivision(y, &flipped)?);
                }
            }
        }
    }
    if strict {
        out.remove(sigma);
    }
    Ok(out)
}
