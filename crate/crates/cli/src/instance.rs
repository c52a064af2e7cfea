//! Instance files: JSON documents tagged by `"problem"`.
//!
//! Vertices are arbitrary strings in the file and dense ids `0..n` inside the
//! solver. Edge references (`classes[].edges`, `red`) are indices into the file's
//! `edges` array.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use pfaffmatch::{DominatingMatchingInstance, EdgeClassAssignment, FFactorInstance, Graph, PamInstance};

// Deserialized in two steps (tag, then payload) so that error paths survive;
// serde buffers internally tagged content and drops them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum InstanceFile {
    DominatingMatching(MatchingPayload),
    FFactor(FFactorPayload),
    Pam(PamPayload),
    ExactMatching(ExactMatchingPayload),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    pub edges: Vec<usize>,
    pub min: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingPayload {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub classes: Vec<ClassSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FFactorPayload {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub classes: Vec<ClassSpec>,
    pub degrees: BTreeMap<String, usize>,
    #[serde(default)]
    pub blue_edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PamPayload {
    pub degrees: BTreeMap<String, usize>,
    pub partition: Vec<Vec<String>>,
    pub pam: Vec<Vec<usize>>,
    #[serde(default)]
    pub blue_edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMatchingPayload {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub red: Vec<usize>,
    pub m: usize,
}

/// A schema problem located by a path into the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn diag(path: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        path: path.into(),
        message: message.into(),
    }
}

/// An instance mapped onto solver types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    pub names: Vec<String>,
    pub class_names: Vec<String>,
    pub problem: Problem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    DominatingMatching(DominatingMatchingInstance),
    FFactor(FFactorInstance),
    Pam(PamInstance),
    ExactMatching { graph: Graph, red: Vec<usize>, m: usize },
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::DominatingMatching(_) => "dominating-matching",
            Problem::FFactor(_) => "f-factor",
            Problem::Pam(_) => "pam",
            Problem::ExactMatching { .. } => "exact-matching",
        }
    }
}

fn payload<T: serde::de::DeserializeOwned>(doc: serde_json::Value) -> Result<T, Diagnostic> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        diag(
            if path == "." { String::new() } else { path },
            e.into_inner().to_string(),
        )
    })
}

pub fn parse_file(text: &str) -> Result<InstanceFile, Diagnostic> {
    let mut doc: serde_json::Value = serde_json::from_str(text).map_err(|e| diag("", e.to_string()))?;
    let obj = doc.as_object_mut().ok_or_else(|| diag("", "expected a JSON object"))?;
    let problem = match obj.remove("problem") {
        Some(serde_json::Value::String(s)) => s,
        Some(_) => return Err(diag("problem", "expected a string")),
        None => return Err(diag("problem", "missing field")),
    };
    match problem.as_str() {
        "dominating-matching" => payload(doc).map(InstanceFile::DominatingMatching),
        "f-factor" => payload(doc).map(InstanceFile::FFactor),
        "pam" => payload(doc).map(InstanceFile::Pam),
        "exact-matching" => payload(doc).map(InstanceFile::ExactMatching),
        other => Err(diag(
            "problem",
            format!("unknown problem {other:?}; expected dominating-matching, f-factor, pam or exact-matching"),
        )),
    }
}

/// Parses and resolves a document, collecting every diagnostic.
pub fn parse(text: &str) -> Result<Resolved, Vec<Diagnostic>> {
    let file = parse_file(text).map_err(|d| vec![d])?;
    resolve(&file)
}

pub fn resolve(file: &InstanceFile) -> Result<Resolved, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let resolved = match file {
        InstanceFile::DominatingMatching(p) => {
            let names = vertex_table(&p.vertices, &mut diags);
            let graph = edge_list(&names, &p.edges, &mut diags);
            let classes = class_table(&graph, &p.classes, p.edges.len(), &mut diags);
            if !diags.is_empty() {
                return Err(diags);
            }
            let graph = graph.expect("no diagnostics");
            let (classes, thresholds) = classes.expect("no diagnostics");
            Resolved {
                names: p.vertices.clone(),
                class_names: p.classes.iter().map(|c| c.name.clone()).collect(),
                problem: Problem::DominatingMatching(
                    DominatingMatchingInstance::new(graph.graph, classes, thresholds)
                        .map_err(|e| vec![diag("", e.to_string())])?,
                ),
            }
        }
        InstanceFile::FFactor(p) => {
            let names = vertex_table(&p.vertices, &mut diags);
            let graph = edge_list(&names, &p.edges, &mut diags);
            let classes = class_table(&graph, &p.classes, p.edges.len(), &mut diags);
            let degrees = degree_table(&names, &p.vertices, &p.degrees, &mut diags);
            let blue = blue_graph(&names, p.vertices.len(), &p.blue_edges, &mut diags);
            if !diags.is_empty() {
                return Err(diags);
            }
            let (classes, thresholds) = classes.expect("no diagnostics");
            let inst = FFactorInstance::new(graph.expect("no diagnostics").graph, degrees, classes, thresholds, blue)
                .map_err(|e| vec![diag("", e.to_string())])?;
            Resolved {
                names: p.vertices.clone(),
                class_names: p.classes.iter().map(|c| c.name.clone()).collect(),
                problem: Problem::FFactor(inst),
            }
        }
        InstanceFile::Pam(p) => {
            let vertices: Vec<String> = p.partition.iter().flatten().cloned().collect();
            let mut names = HashMap::new();
            let mut partition = Vec::with_capacity(p.partition.len());
            for (i, class) in p.partition.iter().enumerate() {
                if class.is_empty() {
                    diags.push(diag(format!("partition[{i}]"), "empty class"));
                }
                let mut members = Vec::with_capacity(class.len());
                for (j, name) in class.iter().enumerate() {
                    let id = names.len();
                    if names.insert(name.clone(), id).is_some() {
                        diags.push(diag(
                            format!("partition[{i}][{j}]"),
                            format!("vertex {name:?} appears twice"),
                        ));
                    }
                    members.push(id);
                }
                partition.push(members);
            }
            let k = p.partition.len();
            let mut shape_ok = p.pam.len() == k;
            if !shape_ok {
                diags.push(diag("pam", format!("expected {k} rows, found {}", p.pam.len())));
            }
            for (i, row) in p.pam.iter().enumerate() {
                if row.len() != k {
                    shape_ok = false;
                    diags.push(diag(
                        format!("pam[{i}]"),
                        format!("expected {k} entries, found {}", row.len()),
                    ));
                }
            }
            if shape_ok {
                for i in 0..k {
                    for j in i + 1..k {
                        if p.pam[i][j] != p.pam[j][i] {
                            diags.push(diag(format!("pam[{i}][{j}]"), "matrix is not symmetric"));
                        }
                    }
                }
            }
            let degrees = degree_table(&names, &vertices, &p.degrees, &mut diags);
            let blue = blue_graph(&names, vertices.len(), &p.blue_edges, &mut diags);
            if !diags.is_empty() {
                return Err(diags);
            }
            Resolved {
                names: vertices.clone(),
                class_names: Vec::new(),
                problem: Problem::Pam(PamInstance {
                    vertex_count: vertices.len(),
                    degrees,
                    partition,
                    pam: p.pam.clone(),
                    blue,
                }),
            }
        }
        InstanceFile::ExactMatching(p) => {
            let names = vertex_table(&p.vertices, &mut diags);
            let graph = edge_list(&names, &p.edges, &mut diags);
            let mut red = Vec::new();
            if let Some(g) = &graph {
                let mut seen = vec![false; p.edges.len()];
                for (j, &e) in p.red.iter().enumerate() {
                    match g.file_to_canonical.get(e) {
                        None => diags.push(diag(format!("red[{j}]"), format!("edge index {e} out of range"))),
                        Some(&c) if seen[e] => {
                            let _ = c;
                            diags.push(diag(format!("red[{j}]"), format!("edge index {e} listed twice")))
                        }
                        Some(&c) => {
                            seen[e] = true;
                            red.push(c);
                        }
                    }
                }
            }
            let n = p.vertices.len();
            if n % 2 != 0 {
                diags.push(diag(
                    "vertices",
                    format!("exact matching needs an even vertex count, got {n}"),
                ));
            }
            if p.m > n / 2 {
                diags.push(diag("m", format!("m = {} exceeds the matching size {}", p.m, n / 2)));
            }
            if !diags.is_empty() {
                return Err(diags);
            }
            red.sort_unstable();
            Resolved {
                names: p.vertices.clone(),
                class_names: vec!["red".into(), "green".into()],
                problem: Problem::ExactMatching {
                    graph: graph.expect("no diagnostics").graph,
                    red,
                    m: p.m,
                },
            }
        }
    };
    Ok(resolved)
}

fn vertex_table(vertices: &[String], diags: &mut Vec<Diagnostic>) -> HashMap<String, usize> {
    let mut names = HashMap::new();
    for (i, name) in vertices.iter().enumerate() {
        if names.insert(name.clone(), i).is_some() {
            diags.push(diag(format!("vertices[{i}]"), format!("duplicate vertex {name:?}")));
        }
    }
    names
}

struct FileGraph {
    graph: Graph,
    file_to_canonical: Vec<usize>,
}

fn endpoints(
    names: &HashMap<String, usize>,
    pair: &[String; 2],
    path: &str,
    diags: &mut Vec<Diagnostic>,
) -> Option<(usize, usize)> {
    let mut ids = [0; 2];
    for (side, name) in pair.iter().enumerate() {
        match names.get(name) {
            Some(&id) => ids[side] = id,
            None => {
                diags.push(diag(format!("{path}[{side}]"), format!("unknown vertex {name:?}")));
                return None;
            }
        }
    }
    if ids[0] == ids[1] {
        diags.push(diag(path, "loops are not allowed"));
        return None;
    }
    Some((ids[0], ids[1]))
}

fn edge_list(names: &HashMap<String, usize>, edges: &[[String; 2]], diags: &mut Vec<Diagnostic>) -> Option<FileGraph> {
    let before = diags.len();
    let mut pairs = Vec::with_capacity(edges.len());
    let mut seen = HashMap::new();
    for (i, pair) in edges.iter().enumerate() {
        if let Some((u, v)) = endpoints(names, pair, &format!("edges[{i}]"), diags) {
            let key = (u.min(v), u.max(v));
            if let Some(first) = seen.insert(key, i) {
                diags.push(diag(format!("edges[{i}]"), format!("repeats edges[{first}]")));
            }
            pairs.push(key);
        }
    }
    if diags.len() > before {
        return None;
    }
    let graph = Graph::new(names.len(), pairs.iter().copied()).ok()?;
    let file_to_canonical = pairs
        .iter()
        .map(|&(u, v)| graph.edge_index(u, v).expect("edge present"))
        .collect();
    Some(FileGraph {
        graph,
        file_to_canonical,
    })
}

fn class_table(
    graph: &Option<FileGraph>,
    classes: &[ClassSpec],
    edge_count: usize,
    diags: &mut Vec<Diagnostic>,
) -> Option<(EdgeClassAssignment, Vec<usize>)> {
    let mut owner: Vec<Option<usize>> = vec![None; edge_count];
    let before = diags.len();
    for (c, spec) in classes.iter().enumerate() {
        for (j, &e) in spec.edges.iter().enumerate() {
            let path = format!("classes[{c}].edges[{j}]");
            match owner.get_mut(e) {
                None => diags.push(diag(path, format!("edge index {e} out of range"))),
                Some(Some(prev)) => diags.push(diag(path, format!("edge {e} already belongs to classes[{prev}]"))),
                Some(slot) => *slot = Some(c),
            }
        }
    }
    let graph = graph.as_ref()?;
    if diags.len() > before {
        return None;
    }
    let mut class_of = vec![None; graph.graph.edge_count()];
    for (file_index, &c) in owner.iter().enumerate() {
        class_of[graph.file_to_canonical[file_index]] = c;
    }
    let assignment = EdgeClassAssignment::new(class_of, classes.len()).ok()?;
    Some((assignment, classes.iter().map(|c| c.min).collect()))
}

fn degree_table(
    names: &HashMap<String, usize>,
    vertices: &[String],
    degrees: &BTreeMap<String, usize>,
    diags: &mut Vec<Diagnostic>,
) -> Vec<usize> {
    for name in degrees.keys() {
        if !names.contains_key(name) {
            diags.push(diag(format!("degrees.{name}"), "unknown vertex"));
        }
    }
    vertices
        .iter()
        .map(|name| match degrees.get(name) {
            Some(&d) => d,
            None => {
                diags.push(diag(format!("degrees.{name}"), "missing degree"));
                0
            }
        })
        .collect()
}

fn blue_graph(names: &HashMap<String, usize>, n: usize, blue: &[[String; 2]], diags: &mut Vec<Diagnostic>) -> Graph {
    let mut pairs: Vec<(usize, usize)> = blue
        .iter()
        .enumerate()
        .filter_map(|(i, pair)| endpoints(names, pair, &format!("blue_edges[{i}]"), diags))
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    Graph::new(n, pairs).unwrap_or_else(|_| Graph::empty(n))
}

fn name_pairs(names: &[String], g: &Graph) -> Vec<[String; 2]> {
    g.edges()
        .iter()
        .map(|&(u, v)| [names[u].clone(), names[v].clone()])
        .collect()
}

fn class_specs(class_names: &[String], classes: &EdgeClassAssignment, thresholds: &[usize]) -> Vec<ClassSpec> {
    (0..classes.class_count())
        .map(|c| ClassSpec {
            name: class_names.get(c).cloned().unwrap_or_else(|| format!("class{c}")),
            edges: classes.members(c),
            min: thresholds[c],
        })
        .collect()
}

/// Writes a resolved instance back as a document with canonical edge order.
pub fn emit(r: &Resolved) -> InstanceFile {
    let names = &r.names;
    match &r.problem {
        Problem::DominatingMatching(inst) => InstanceFile::DominatingMatching(MatchingPayload {
            vertices: names.clone(),
            edges: name_pairs(names, &inst.graph),
            classes: class_specs(&r.class_names, &inst.classes, &inst.thresholds),
        }),
        Problem::FFactor(inst) => InstanceFile::FFactor(FFactorPayload {
            vertices: names.clone(),
            edges: name_pairs(names, &inst.host),
            classes: class_specs(&r.class_names, &inst.classes, &inst.thresholds),
            degrees: names.iter().cloned().zip(inst.degrees.iter().copied()).collect(),
            blue_edges: name_pairs(names, &inst.blue),
        }),
        Problem::Pam(inst) => InstanceFile::Pam(PamPayload {
            degrees: names.iter().cloned().zip(inst.degrees.iter().copied()).collect(),
            partition: inst
                .partition
                .iter()
                .map(|c| c.iter().map(|&v| names[v].clone()).collect())
                .collect(),
            pam: inst.pam.clone(),
            blue_edges: name_pairs(names, &inst.blue),
        }),
        Problem::ExactMatching { graph, red, m } => InstanceFile::ExactMatching(ExactMatchingPayload {
            vertices: names.clone(),
            edges: name_pairs(names, graph),
            red: red.clone(),
            m: *m,
        }),
    }
}

pub fn to_json(file: &InstanceFile) -> String {
    serde_json::to_string_pretty(file).expect("instance files serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const C4_EXACT: &str = r#"{
        "problem": "exact-matching",
        "vertices": ["1", "2", "3", "4"],
        "edges": [["1","2"], ["2","3"], ["3","4"], ["4","1"]],
        "red": [0, 2],
        "m": 2
    }"#;

    fn paths(text: &str) -> Vec<String> {
        parse(text).unwrap_err().into_iter().map(|d| d.path).collect()
    }

    #[test]
    fn parses_exact_matching() {
        let r = parse(C4_EXACT).unwrap();
        let Problem::ExactMatching { graph, red, m } = &r.problem else {
            panic!("wrong problem");
        };
        assert_eq!(graph.edge_count(), 4);
        assert_eq!(*m, 2);
        // edges 12 and 34 in canonical order: (0,1) index 0, (2,3) index 3.
        assert_eq!(red, &vec![0, 3]);
    }

    #[test]
    fn class_indices_follow_file_order() {
        let text = r#"{
            "problem": "dominating-matching",
            "vertices": ["a", "b", "c", "d"],
            "edges": [["c","d"], ["a","b"], ["b","c"], ["a","d"]],
            "classes": [{"name": "red", "edges": [0, 1], "min": 2}]
        }"#;
        let r = parse(text).unwrap();
        let Problem::DominatingMatching(inst) = &r.problem else {
            panic!("wrong problem");
        };
        let red = inst.classes.members(0);
        let pairs: Vec<_> = red.iter().map(|&e| inst.graph.edge(e)).collect();
        assert_eq!(pairs, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn diagnostics_carry_paths() {
        assert_eq!(paths("{"), vec![String::new()]);
        assert_eq!(paths(r#"{"problem": "nope"}"#), vec!["problem"]);
        assert_eq!(paths(r#"{"vertices": []}"#), vec!["problem"]);
        assert_eq!(
            paths(r#"{"problem": "f-factor", "vertices": ["a"], "edges": [], "degrees": {"a": "x"}}"#),
            vec!["degrees.a"]
        );
        assert_eq!(
            paths(
                r#"{"problem": "dominating-matching", "vertices": ["a","a","b"],
                    "edges": [["a","x"], ["b","b"]], "classes": [{"name":"r","edges":[7],"min":0}]}"#
            ),
            vec!["vertices[1]", "edges[0][1]", "edges[1]", "classes[0].edges[0]"]
        );
        assert_eq!(
            paths(
                r#"{"problem": "pam", "degrees": {"a": 1, "zz": 1},
                    "partition": [["a","b"], []], "pam": [[0, 1], [2, 0]]}"#
            ),
            vec!["partition[1]", "pam[0][1]", "degrees.zz", "degrees.b"]
        );
        assert_eq!(
            paths(
                r#"{"problem": "exact-matching", "vertices": ["a","b","c"],
                    "edges": [["a","b"]], "red": [0, 0, 3], "m": 2}"#
            ),
            vec!["red[1]", "red[2]", "vertices", "m"]
        );
    }

    #[test]
    fn type_errors_point_into_the_document() {
        let text = r#"{"problem": "exact-matching", "vertices": ["a","b"], "edges": [["a","b"]], "red": [], "m": -1}"#;
        let d = parse(text).unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "m");
    }

    #[test]
    fn round_trips() {
        let docs = [
            C4_EXACT.to_string(),
            r#"{"problem": "dominating-matching", "vertices": ["x","y","z","w"],
                "edges": [["z","w"], ["x","y"], ["y","z"]],
                "classes": [{"name":"red","edges":[0],"min":1}, {"name":"blue","edges":[2],"min":0}]}"#
                .to_string(),
            r#"{"problem": "f-factor", "vertices": ["a","b","c"], "edges": [["a","b"],["b","c"],["a","c"]],
                "degrees": {"a": 1, "b": 1, "c": 0}, "blue_edges": [["a","c"]],
                "classes": [{"name":"k","edges":[1],"min":0}]}"#
                .to_string(),
            r#"{"problem": "pam", "degrees": {"a":1,"b":1,"c":1,"d":1},
                "partition": [["a","b"],["c","d"]], "pam": [[0,2],[2,0]], "blue_edges": [["a","c"]]}"#
                .to_string(),
        ];
        for doc in docs {
            let r = parse(&doc).unwrap();
            let again = parse(&to_json(&emit(&r))).unwrap();
            assert_eq!(again, r);
            assert_eq!(emit(&again), emit(&r));
        }
    }
}
