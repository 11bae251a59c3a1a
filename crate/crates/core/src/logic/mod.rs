//! Positive epistemic mu-calculus: atoms and their negations, conjunction,
//! disjunction, distributed knowledge, and greatest fixpoints. Negation is
//! confined to atoms, so every operator is monotone and `nu` is well
//! defined; implication and common knowledge are provided as macros that
//! expand into this fragment.

pub mod model;
pub mod parse;

use crate::error::{Error, Result};
use crate::simplicial::ProcessId;
use std::collections::BTreeSet;
use std::fmt;

/// Which family of facts an atom speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    Input,
    Decide,
}

/// `input_a=v` or `decide_a=v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicProp {
    pub kind: AtomKind,
    pub process: ProcessId,
    pub value: u32,
}

impl AtomicProp {
    pub fn input(process: u32, value: u32) -> AtomicProp {
        AtomicProp { kind: AtomKind::Input, process: ProcessId(process), value }
    }

    pub fn decide(process: u32, value: u32) -> AtomicProp {
        AtomicProp { kind: AtomKind::Decide, process: ProcessId(process), value }
    }
}

impl fmt::Display for AtomicProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            AtomKind::Input => "input",
            AtomKind::Decide => "decide",
        };
        write!(f, "{kind}_{}={}", self.process, self.value)
    }
}

/// A formula of the positive fragment. `And([])` is truth, `Or([])` is
/// falsity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(AtomicProp),
    NegAtom(AtomicProp),
    Var(String),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    DKnow(BTreeSet<ProcessId>, Box<Formula>),
    Nu(String, Box<Formula>),
}

impl Formula {
    pub fn truth() -> Formula {
        Formula::And(Vec::new())
    }

    pub fn falsity() -> Formula {
        Formula::Or(Vec::new())
    }

    /// Conjunction, collapsing a single conjunct to itself so built
    /// formulas round-trip through their printed form.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        }
    }

    /// Disjunction; a single disjunct collapses like [`Formula::and`].
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        }
    }

    pub fn dknow(group: impl IntoIterator<Item = u32>, body: Formula) -> Formula {
        Formula::DKnow(group.into_iter().map(ProcessId).collect(), Box::new(body))
    }

    pub fn nu(var: &str, body: Formula) -> Formula {
        Formula::Nu(var.to_string(), Box::new(body))
    }

    /// True when the formula has no variables, knowledge, or fixpoints.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => true,
            Formula::Var(_) | Formula::DKnow(..) | Formula::Nu(..) => false,
            Formula::And(parts) | Formula::Or(parts) => {
                parts.iter().all(|p| p.is_propositional())
            }
        }
    }

    /// Variables occurring free in the formula.
    pub fn free_vars(&self) -> BTreeSet<&str> {
        fn walk<'a>(f: &'a Formula, bound: &mut Vec<&'a str>, out: &mut BTreeSet<&'a str>) {
            match f {
                Formula::Atom(_) | Formula::NegAtom(_) => {}
                Formula::Var(z) => {
                    if !bound.iter().any(|b| b == z) {
                        out.insert(z);
                    }
                }
                Formula::And(parts) | Formula::Or(parts) => {
                    for p in parts {
                        walk(p, bound, out);
                    }
                }
                Formula::DKnow(_, body) => walk(body, bound, out),
                Formula::Nu(z, body) => {
                    bound.push(z);
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every variable mentioned anywhere, free or bound.
    fn all_vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        fn walk<'a>(f: &'a Formula, out: &mut BTreeSet<&'a str>) {
            match f {
                Formula::Atom(_) | Formula::NegAtom(_) => {}
                Formula::Var(z) => {
                    out.insert(z);
                }
                Formula::And(parts) | Formula::Or(parts) => {
                    for p in parts {
                        walk(p, out);
                    }
                }
                Formula::DKnow(_, body) => walk(body, out),
                Formula::Nu(z, body) => {
                    out.insert(z);
                    walk(body, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Rejects empty knowledge groups, rebinding of an in-scope variable,
    /// and free variables not listed in `bound`.
    pub fn check_well_formed(&self, bound: &BTreeSet<String>) -> Result<()> {
        fn walk(f: &Formula, scope: &mut Vec<String>) -> Result<()> {
            match f {
                Formula::Atom(_) | Formula::NegAtom(_) => Ok(()),
                Formula::Var(z) => {
                    if scope.iter().any(|b| b == z) {
                        Ok(())
                    } else {
                        Err(Error::UnboundVariable(z.clone()))
                    }
                }
                Formula::And(parts) | Formula::Or(parts) => {
                    parts.iter().try_for_each(|p| walk(p, scope))
                }
                Formula::DKnow(group, body) => {
                    if group.is_empty() {
                        return Err(Error::EmptyGroup);
                    }
                    walk(body, scope)
                }
                Formula::Nu(z, body) => {
                    if scope.iter().any(|b| b == z) {
                        return Err(Error::ShadowedVariable(z.clone()));
                    }
                    scope.push(z.clone());
                    walk(body, scope)?;
                    scope.pop();
                    Ok(())
                }
            }
        }
        walk(self, &mut bound.iter().cloned().collect())
    }
}

/// De Morgan negation. Defined only on propositional formulas: negating a
/// variable or a modality would leave the positive fragment.
pub fn negate(f: &Formula) -> Result<Formula> {
    match f {
        Formula::Atom(a) => Ok(Formula::NegAtom(*a)),
        Formula::NegAtom(a) => Ok(Formula::Atom(*a)),
        Formula::And(parts) => Ok(Formula::Or(
            parts.iter().map(negate).collect::<Result<Vec<_>>>()?,
        )),
        Formula::Or(parts) => Ok(Formula::And(
            parts.iter().map(negate).collect::<Result<Vec<_>>>()?,
        )),
        Formula::Var(_) | Formula::DKnow(..) | Formula::Nu(..) => Err(Error::NotPropositional),
    }
}

/// `antecedent => consequent`, as `~antecedent | consequent`. The
/// antecedent must be propositional so the negation stays on atoms.
pub fn implies(antecedent: &Formula, consequent: Formula) -> Result<Formula> {
    // splice disjunction-shaped pieces so chained implications stay flat
    let mut parts = match negate(antecedent)? {
        Formula::Or(ps) => ps,
        f => vec![f],
    };
    match consequent {
        Formula::Or(ps) => parts.extend(ps),
        f => parts.push(f),
    }
    Ok(Formula::or(parts))
}

/// Common knowledge of `body` in `group`: the greatest fixpoint of
/// "body holds and each member knows the fixpoint". The bound variable is
/// chosen fresh for `body`.
pub fn common_knowledge(
    group: impl IntoIterator<Item = ProcessId>,
    body: Formula,
) -> Result<Formula> {
    let group: BTreeSet<ProcessId> = group.into_iter().collect();
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let used = body.all_vars();
    let mut var = "CK".to_string();
    let mut i = 0;
    while used.contains(var.as_str()) {
        i += 1;
        var = format!("CK{i}");
    }
    let mut parts = vec![body];
    for a in &group {
        parts.push(Formula::DKnow(
            BTreeSet::from([*a]),
            Box::new(Formula::Var(var.clone())),
        ));
    }
    Ok(Formula::Nu(var, Box::new(Formula::And(parts))))
}

// Precedence levels for printing: | at 0, & at 1, prefixes at 2.
fn fmt_prec(f: &Formula, level: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = |needed: bool, out: &mut fmt::Formatter<'_>, inner: &dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result| {
        if needed {
            write!(out, "(")?;
            inner(out)?;
            write!(out, ")")
        } else {
            inner(out)
        }
    };
    match f {
        Formula::Atom(a) => write!(out, "{a}"),
        Formula::NegAtom(a) => write!(out, "~{a}"),
        Formula::Var(z) => write!(out, "{z}"),
        Formula::And(parts) => match parts.len() {
            0 => write!(out, "true"),
            1 => fmt_prec(&parts[0], level, out),
            _ => paren(level > 1, out, &|out| {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(out, " & ")?;
                    }
                    fmt_prec(p, 2, out)?;
                }
                Ok(())
            }),
        },
        Formula::Or(parts) => match parts.len() {
            0 => write!(out, "false"),
            1 => fmt_prec(&parts[0], level, out),
            _ => paren(level > 0, out, &|out| {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(out, " | ")?;
                    }
                    fmt_prec(p, 1, out)?;
                }
                Ok(())
            }),
        },
        Formula::DKnow(group, body) => {
            write!(out, "D{{")?;
            for (i, a) in group.iter().enumerate() {
                if i > 0 {
                    write!(out, ",")?;
                }
                write!(out, "{a}")?;
            }
            write!(out, "}} ")?;
            fmt_prec(body, 2, out)
        }
        Formula::Nu(z, body) => paren(level > 0, out, &|out| {
            write!(out, "nu {z}. ")?;
            fmt_prec(body, 0, out)
        }),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}
