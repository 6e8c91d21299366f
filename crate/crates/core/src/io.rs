//! System files (TOML) and CSV artifacts.
//!
//! Vertices are numbered from 1 in files and CSV; edge ids start at 0.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coding::Rendering;
use crate::expr::Expression;
use crate::graph::{Digraph, Edge};
use crate::operator::{ConvergenceTrace, Particle, ParticleMeasure};
use crate::simulate::Trajectory;
use crate::system::{format_word, parse_word, Backend, MapSpec, MarkovSystem, Point, SystemParts};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub space: SpaceSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default)]
    pub base_points: Vec<BasePointEntry>,
    pub params: ParamsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    /// `"euclid"` or `"word"`.
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working_box: Option<Vec<[f64; 2]>>,
    /// Word truncation depth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// g-function over the last symbols; supplies omitted edge probabilities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Expression>,
    /// Number of vertices when `[[vertices]]` is omitted (word backend).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: usize,
    pub region: Expression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: usize,
    pub source: usize,
    pub target: usize,
    pub map: MapEntry,
    /// Defaults to the g-function (word backend) or to `1 / out-degree`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<Expression>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapEntry {
    Affine { a: Vec<Vec<f64>>, b: Vec<f64> },
    Expr(Vec<Expression>),
    Append,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasePointEntry {
    pub vertex: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsSection {
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_rate: Option<f64>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, f64>,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

/// Parses a system file.
pub fn parse_system<T: Scalar>(text: &str) -> Result<MarkovSystem<T>> {
    let file: SystemFile = toml::from_str(text).map_err(|e| format_err(e.to_string()))?;
    from_file(file)
}

pub fn from_file<T: Scalar>(file: SystemFile) -> Result<MarkovSystem<T>> {
    let word = match file.space.backend.as_str() {
        "euclid" => false,
        "word" => true,
        other => return Err(format_err(format!("unknown backend `{other}`"))),
    };
    let n = if word {
        file.space.vertex_count.unwrap_or(file.vertices.len())
    } else {
        file.vertices.len()
    };
    let mut vertices = file.vertices.clone();
    vertices.sort_by_key(|v| v.id);
    if !vertices.is_empty() && vertices.iter().enumerate().any(|(k, v)| v.id != k + 1) {
        return Err(format_err("vertex ids must be 1..N without gaps"));
    }
    if n == 0 {
        return Err(format_err("the system has no vertices"));
    }
    let mut edges = file.edges.clone();
    edges.sort_by_key(|e| e.id);
    if edges.iter().enumerate().any(|(k, e)| e.id != k) {
        return Err(format_err("edge ids must be 0..|E|-1 without gaps"));
    }
    for e in &edges {
        if e.source < 1 || e.source > n || e.target < 1 || e.target > n {
            return Err(format_err(format!("edge {} has an endpoint outside 1..{n}", e.id)));
        }
    }
    let digraph = Digraph::from_edges(
        n,
        edges
            .iter()
            .map(|e| Edge {
                id: e.id,
                source: e.source - 1,
                target: e.target - 1,
            })
            .collect(),
    );
    let backend = if word {
        Backend::Word {
            depth: file.space.depth.unwrap_or(crate::system::DEFAULT_WORD_DEPTH),
        }
    } else {
        let dim = file.space.dim.ok_or_else(|| format_err("euclid backend needs `dim`"))?;
        let working_box = file
            .space
            .working_box
            .clone()
            .ok_or_else(|| format_err("euclid backend needs `working_box`"))?
            .into_iter()
            .map(|[lo, hi]| [T::lit(lo), T::lit(hi)])
            .collect();
        Backend::Euclid {
            dim,
            working_box,
            regions: vertices.iter().map(|v| v.region.clone()).collect(),
        }
    };
    let maps = edges
        .iter()
        .map(|e| match &e.map {
            MapEntry::Affine { a, b } => MapSpec::Affine {
                a: a.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect(),
                b: b.iter().map(|&v| T::lit(v)).collect(),
            },
            MapEntry::Expr(c) => MapSpec::Expr(c.clone()),
            MapEntry::Append => MapSpec::Append,
        })
        .collect();
    let probs = edges
        .iter()
        .map(|e| match (&e.prob, &file.space.g) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(g)) => Ok(Expression::from_ast(g.ast().shift_symbols(e.id as u32))),
            (None, None) => {
                let deg = edges.iter().filter(|f| f.source == e.source).count();
                Ok(Expression::constant(1.0 / deg as f64))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut base_points = vec![None; n];
    for bp in &file.base_points {
        if bp.vertex < 1 || bp.vertex > n {
            return Err(format_err(format!("base point for missing vertex {}", bp.vertex)));
        }
        let p = match (&bp.point, &bp.word) {
            (Some(c), None) => Point::Euclid(c.iter().map(|&v| T::lit(v)).collect()),
            (None, Some(w)) => Point::Word(parse_word(w)?),
            _ => return Err(format_err(format!("base point of vertex {} needs exactly one of `point`, `word`", bp.vertex))),
        };
        base_points[bp.vertex - 1] = Some(p);
    }
    let base_points = base_points
        .into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or(Error::MissingBasePoint(v + 1)))
        .collect::<Result<Vec<_>>>()?;
    MarkovSystem::new(SystemParts {
        name: file.name.unwrap_or_else(|| "system".into()),
        digraph,
        backend,
        maps,
        probs,
        base_points,
        delta: T::lit(file.params.delta),
        claimed_rate: file.params.claimed_rate.map(T::lit),
        g_function: file.space.g,
        params: file.params.extra,
    })
}

/// Normalized file form of a system (every probability written out).
pub fn to_file<T: Scalar>(sys: &MarkovSystem<T>) -> SystemFile {
    let parts = sys.parts();
    let g = &parts.digraph;
    let f = |v: T| v.as_f64();
    let (space, vertices) = match &parts.backend {
        Backend::Euclid { dim, working_box, regions } => (
            SpaceSection {
                backend: "euclid".into(),
                dim: Some(*dim),
                working_box: Some(working_box.iter().map(|[lo, hi]| [f(*lo), f(*hi)]).collect()),
                depth: None,
                g: parts.g_function.clone(),
                vertex_count: None,
            },
            regions
                .iter()
                .enumerate()
                .map(|(k, r)| VertexEntry { id: k + 1, region: r.clone() })
                .collect(),
        ),
        Backend::Word { depth } => (
            SpaceSection {
                backend: "word".into(),
                dim: None,
                working_box: None,
                depth: Some(*depth),
                g: parts.g_function.clone(),
                vertex_count: Some(g.vertex_count()),
            },
            Vec::new(),
        ),
    };
    let edges = g
        .edges()
        .iter()
        .map(|e| EdgeEntry {
            id: e.id,
            source: e.source + 1,
            target: e.target + 1,
            map: match &parts.maps[e.id] {
                MapSpec::Affine { a, b } => MapEntry::Affine {
                    a: a.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect(),
                    b: b.iter().map(|&v| f(v)).collect(),
                },
                MapSpec::Expr(c) => MapEntry::Expr(c.clone()),
                MapSpec::Append => MapEntry::Append,
            },
            prob: Some(parts.probs[e.id].clone()),
        })
        .collect();
    let base_points = parts
        .base_points
        .iter()
        .enumerate()
        .map(|(v, p)| match p {
            Point::Euclid(c) => BasePointEntry {
                vertex: v + 1,
                point: Some(c.iter().map(|&x| f(x)).collect()),
                word: None,
            },
            Point::Word(w) => BasePointEntry {
                vertex: v + 1,
                point: None,
                word: Some(format_word(w)),
            },
        })
        .collect();
    SystemFile {
        name: Some(parts.name.clone()),
        space,
        vertices,
        edges,
        base_points,
        params: ParamsSection {
            delta: f(parts.delta),
            claimed_rate: parts.claimed_rate.map(f),
            extra: parts.params.clone(),
        },
    }
}

pub fn emit_system<T: Scalar>(sys: &MarkovSystem<T>) -> Result<String> {
    toml::to_string(&to_file(sys)).map_err(|e| format_err(e.to_string()))
}

/// A bare digraph: `vertices = N`, `edges = [[source, target], ...]` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

pub fn parse_graph(text: &str) -> Result<Digraph> {
    let file: GraphFile = toml::from_str(text).map_err(|e| format_err(e.to_string()))?;
    if file.edges.iter().flatten().any(|&v| v < 1 || v > file.vertices) {
        return Err(format_err(format!("edge endpoint outside 1..{}", file.vertices)));
    }
    let pairs: Vec<(usize, usize)> = file.edges.iter().map(|[s, t]| (s - 1, t - 1)).collect();
    Ok(Digraph::new(file.vertices, &pairs))
}

/// Shortest round-trip text of a number.
pub fn fmt_num<T: Debug>(x: T) -> String {
    format!("{x:?}")
}

fn parse_num<T: Scalar>(s: &str, line: usize) -> Result<T> {
    s.trim()
        .parse::<f64>()
        .map(T::lit)
        .map_err(|_| format_err(format!("line {line}: `{s}` is not a number")))
}

/// Comma-separated rows of numbers; blank lines and `#` comments skipped.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(k, l)| l.split(',').map(|c| parse_num::<f64>(c, k + 1)).collect())
        .collect()
}

fn coord_header(dim: usize) -> String {
    (0..dim).map(|k| format!("c{k}")).collect::<Vec<_>>().join(",")
}

fn point_fields<T: Scalar>(p: &Point<T>) -> String {
    match p {
        Point::Euclid(c) => c.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(","),
        Point::Word(w) => format_word(w),
    }
}

fn point_header<T: Scalar>(sys: &MarkovSystem<T>) -> String {
    match sys.dim() {
        Some(d) => coord_header(d),
        None => "word".into(),
    }
}

/// `vertex,weight,c0,...` or `vertex,weight,word`.
pub fn write_measure_csv<T: Scalar, W: Write>(sys: &MarkovSystem<T>, mu: &ParticleMeasure<T>, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "vertex,weight,{}", point_header(sys))?;
    for p in mu.particles() {
        writeln!(out, "{},{},{}", p.vertex + 1, fmt_num(p.weight), point_fields(&p.point))?;
    }
    Ok(())
}

pub fn read_measure_csv<T: Scalar>(sys: &MarkovSystem<T>, text: &str) -> Result<ParticleMeasure<T>> {
    let mut lines = text.lines().enumerate();
    let expect = format!("vertex,weight,{}", point_header(sys));
    match lines.next() {
        Some((_, h)) if h.trim() == expect => {}
        _ => return Err(format_err(format!("measure CSV must start with `{expect}`"))),
    }
    let mut particles = Vec::new();
    for (k, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        let lineno = k + 1;
        let vertex: usize = cols[0]
            .trim()
            .parse()
            .ok()
            .filter(|v| (1..=sys.digraph().vertex_count()).contains(v))
            .ok_or_else(|| format_err(format!("line {lineno}: bad vertex `{}`", cols[0])))?;
        let weight = parse_num::<T>(cols.get(1).copied().unwrap_or(""), lineno)?;
        let point = match sys.dim() {
            Some(d) => {
                if cols.len() != d + 2 {
                    return Err(format_err(format!("line {lineno}: expected {} columns", d + 2)));
                }
                Point::Euclid(cols[2..].iter().map(|c| parse_num::<T>(c, lineno)).collect::<Result<_>>()?)
            }
            None => Point::Word(parse_word(cols.get(2).copied().unwrap_or(""))?),
        };
        if !sys.in_region(vertex - 1, &point)? {
            return Err(format_err(format!("line {lineno}: point {point} is not in vertex {vertex}")));
        }
        particles.push(Particle {
            point,
            vertex: vertex - 1,
            weight,
        });
    }
    ParticleMeasure::from_particles(particles)
}

/// `step,edge,prob,c0,...` (or `word`); step 0 is the start point.
pub fn write_trajectory_csv<T: Scalar, W: Write>(sys: &MarkovSystem<T>, traj: &Trajectory<T>, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "step,edge,prob,{}", point_header(sys))?;
    writeln!(out, "0,,,{}", point_fields(&traj.start))?;
    for k in 0..traj.len() {
        writeln!(
            out,
            "{},{},{},{}",
            k + 1,
            traj.edges[k],
            fmt_num(traj.step_probs[k]),
            point_fields(&traj.states[k + 1])
        )?;
    }
    Ok(())
}

/// `iter,sup_change,moment,<panel names>`.
pub fn write_trace_csv<W: Write>(trace: &ConvergenceTrace, out: &mut W) -> std::io::Result<()> {
    let names: Vec<String> = trace.names.iter().map(|n| csv_field(n)).collect();
    writeln!(out, "iter,sup_change,moment,{}", names.join(","))?;
    for (k, row) in trace.integrals.iter().enumerate() {
        let change = if k == 0 { String::new() } else { fmt_num(trace.sup_change[k - 1]) };
        let vals: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
        writeln!(out, "{k},{change},{},{}", fmt_num(trace.moments[k]), vals.join(","))?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `c0,c1,count` (or `c0,count`).
pub fn write_points_csv<W: Write>(r: &Rendering, dim: usize, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{},count", coord_header(dim))?;
    for (p, n) in &r.points {
        let c: Vec<String> = p.iter().map(|v| fmt_num(*v)).collect();
        writeln!(out, "{},{n}", c.join(","))?;
    }
    Ok(())
}
