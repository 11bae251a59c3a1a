use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write;

use epimu::SimplicialModel;

use crate::fail::Failure;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One node per state labeled with its name and atoms; one undirected edge
/// per indistinguishable pair, processes merged into a comma-separated
/// label. Self loops are implicit and not drawn.
pub fn to_dot(model: &SimplicialModel) -> Result<String, Failure> {
    let mut out = String::from("graph model {\n  node [shape=box];\n");
    for (id, st) in model.states().iter().enumerate() {
        let mut label = escape(&st.name);
        for atom in &st.atoms {
            let _ = write!(label, "\\n{}", escape(&atom.to_string()));
        }
        let _ = writeln!(out, "  s{id} [label=\"{label}\"];");
    }
    let mut edges: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
    for a in model.processes() {
        for class in model.equivalence_classes(&BTreeSet::from([a]))? {
            let ids: Vec<usize> = class.iter().copied().collect();
            for (i, &x) in ids.iter().enumerate() {
                for &y in &ids[i + 1..] {
                    edges.entry((x, y)).or_default().push(a.0);
                }
            }
        }
    }
    for ((x, y), labels) in edges {
        let joined = labels
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "  s{x} -- s{y} [label=\"{joined}\"];");
    }
    out.push_str("}\n");
    Ok(out)
}
