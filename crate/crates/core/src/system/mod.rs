//! Markov systems `(K_{i(e)}, w_e, p_e)` over a digraph.
//!
//! Two state-space backends are supported: Euclidean space, partitioned into
//! vertex regions by predicate expressions, and truncated one-sided words over
//! the edge alphabet, where the region of a word is the terminal vertex of its
//! most recent symbol.

pub mod fixtures;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

pub use fixtures::{builtin_fixtures, fixture, fixture_names, fixtures_catalog};
pub use validate::{ContractionReport, PairWitness};

use crate::expr::{Bindings, Expression};
use crate::graph::{Digraph, EdgeId, ValidationReport, VertexId};
use crate::{rng, Error, Result, Scalar};

/// Default truncation depth of the word backend.
pub const DEFAULT_WORD_DEPTH: usize = 32;

/// Rejection-sampling attempts per requested point.
pub const SAMPLE_RETRIES: usize = 10_000;

/// A point of the state space.
#[derive(Debug, Clone, PartialEq)]
pub enum Point<T> {
    Euclid(Vec<T>),
    /// Edge symbols, oldest first; the most recent symbol is last.
    Word(Vec<u32>),
}

impl<T: Scalar> Point<T> {
    pub fn scalar(x: T) -> Self {
        Point::Euclid(vec![x])
    }

    pub fn coords(&self) -> &[T] {
        match self {
            Point::Euclid(c) => c,
            Point::Word(_) => &[],
        }
    }

    pub fn symbols(&self) -> &[u32] {
        match self {
            Point::Euclid(_) => &[],
            Point::Word(w) => w,
        }
    }

    pub fn bindings(&self) -> Bindings<'_, T> {
        Bindings {
            coords: self.coords(),
            symbols: self.symbols(),
        }
    }

    /// First coordinate, or NaN for words.
    pub fn first(&self) -> T {
        self.coords().first().copied().unwrap_or_else(T::nan)
    }
}

impl<T: Scalar> fmt::Display for Point<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Euclid(c) => {
                f.write_str("(")?;
                for (k, v) in c.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Point::Word(w) => f.write_str(&format_word(w)),
        }
    }
}

/// Hyphen-joined edge ids.
pub fn format_word(word: &[u32]) -> String {
    word.iter().map(u32::to_string).collect::<Vec<_>>().join("-")
}

pub fn parse_word(text: &str) -> Result<Vec<u32>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split('-')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::Format(format!("bad edge id `{s}` in word `{text}`")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend<T> {
    /// `R^dim`, partitioned by one predicate per vertex. Sampling draws from
    /// `working_box` (one `[lo, hi]` interval per coordinate).
    Euclid {
        dim: usize,
        working_box: Vec<[T; 2]>,
        regions: Vec<Expression>,
    },
    /// Words over the edge alphabet truncated to `depth` symbols, with the
    /// metric `d(σ, σ') = 2^-k`, `k` the number of agreeing trailing symbols.
    Word { depth: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec<T> {
    /// `x -> A x + b`.
    Affine { a: Vec<Vec<T>>, b: Vec<T> },
    /// One expression per output coordinate.
    Expr(Vec<Expression>),
    /// Appends the edge symbol to a word, dropping the oldest symbol when full.
    Append,
}

/// Everything needed to assemble a [`MarkovSystem`].
#[derive(Debug, Clone)]
pub struct SystemParts<T> {
    pub name: String,
    pub digraph: Digraph,
    pub backend: Backend<T>,
    pub maps: Vec<MapSpec<T>>,
    pub probs: Vec<Expression>,
    pub base_points: Vec<Point<T>>,
    pub delta: T,
    pub claimed_rate: Option<T>,
    /// The `g`-function of a word-backend system, evaluated on `σ·e`.
    pub g_function: Option<Expression>,
    /// Free-form fixture parameters carried into files and reports.
    pub params: BTreeMap<String, f64>,
}

/// A Markov system. Immutable once built; all evaluation is pure.
#[derive(Debug, Clone)]
pub struct MarkovSystem<T> {
    parts: SystemParts<T>,
}

impl<T: Scalar> MarkovSystem<T> {
    /// Checks the schema (dimensions, index ranges, backend/map agreement).
    /// Digraph axioms such as surjectivity of the source map are left to
    /// [`MarkovSystem::validate`] so that they can be reported.
    pub fn new(parts: SystemParts<T>) -> Result<Self> {
        let g = &parts.digraph;
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        for e in g.edges() {
            if e.source >= g.vertex_count() || e.target >= g.vertex_count() {
                return fail(format!("edge {} has an endpoint outside 1..{}", e.id, g.vertex_count()));
            }
        }
        if parts.maps.len() != g.edge_count() || parts.probs.len() != g.edge_count() {
            return fail("need exactly one map and one probability per edge".into());
        }
        if parts.base_points.len() != g.vertex_count() {
            return fail("need exactly one base point per vertex".into());
        }
        if !(parts.delta > T::zero() && parts.delta < T::one()) {
            return fail(format!("delta must lie in (0, 1), got {}", parts.delta));
        }
        if let Some(a) = parts.claimed_rate {
            if !(a > T::zero() && a < T::one()) {
                return fail(format!("claimed rate must lie in (0, 1), got {a}"));
            }
        }
        match &parts.backend {
            Backend::Euclid {
                dim,
                working_box,
                regions,
            } => {
                if *dim == 0 {
                    return fail("dimension must be positive".into());
                }
                if working_box.len() != *dim || working_box.iter().any(|[lo, hi]| !(lo < hi)) {
                    return fail("working box needs one non-degenerate [lo, hi] per coordinate".into());
                }
                if regions.len() != g.vertex_count() {
                    return fail("need one region predicate per vertex".into());
                }
                let too_wide = |e: &Expression| e.ast().max_coord().is_some_and(|i| i >= *dim);
                let has_symbols = |e: &Expression| e.ast().max_symbol().is_some();
                for (k, r) in regions.iter().enumerate() {
                    if too_wide(r) || has_symbols(r) {
                        return fail(format!("region of vertex {} uses undefined variables", k + 1));
                    }
                }
                for (e, m) in parts.maps.iter().enumerate() {
                    match m {
                        MapSpec::Affine { a, b } => {
                            if a.len() != *dim || b.len() != *dim || a.iter().any(|row| row.len() != *dim) {
                                return fail(format!("affine map of edge {e} must be {dim}x{dim}"));
                            }
                        }
                        MapSpec::Expr(coords) => {
                            if coords.len() != *dim || coords.iter().any(|c| too_wide(c) || has_symbols(c)) {
                                return fail(format!("map of edge {e} needs {dim} expressions over x0..x{}", dim - 1));
                            }
                        }
                        MapSpec::Append => return fail(format!("edge {e}: append maps need the word backend")),
                    }
                }
                for (e, p) in parts.probs.iter().enumerate() {
                    if too_wide(p) || has_symbols(p) {
                        return fail(format!("probability of edge {e} uses undefined variables"));
                    }
                }
                for (v, x) in parts.base_points.iter().enumerate() {
                    if !matches!(x, Point::Euclid(c) if c.len() == *dim) {
                        return fail(format!("base point of vertex {} must have {dim} coordinates", v + 1));
                    }
                }
            }
            Backend::Word { depth } => {
                if *depth == 0 {
                    return fail("word depth must be positive".into());
                }
                if parts.maps.iter().any(|m| !matches!(m, MapSpec::Append)) {
                    return fail("the word backend only supports append maps".into());
                }
                let bad = |e: &Expression| {
                    e.ast().max_coord().is_some() || e.ast().max_symbol().is_some_and(|k| k >= *depth)
                };
                if parts.probs.iter().any(bad) {
                    return fail(format!("probabilities may only use s0..s{}", depth - 1));
                }
                if let Some(gf) = &parts.g_function {
                    if bad(gf) {
                        return fail(format!("g may only use s0..s{}", depth - 1));
                    }
                }
                for (v, x) in parts.base_points.iter().enumerate() {
                    match x {
                        Point::Word(w) if !w.is_empty() && w.len() <= *depth => {}
                        _ => return fail(format!("base point of vertex {} must be a word of 1..={depth} symbols", v + 1)),
                    }
                }
            }
        }
        Ok(MarkovSystem { parts })
    }

    pub fn parts(&self) -> &SystemParts<T> {
        &self.parts
    }

    pub fn into_parts(self) -> SystemParts<T> {
        self.parts
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn digraph(&self) -> &Digraph {
        &self.parts.digraph
    }

    pub fn backend(&self) -> &Backend<T> {
        &self.parts.backend
    }

    pub fn delta(&self) -> T {
        self.parts.delta
    }

    pub fn claimed_rate(&self) -> Option<T> {
        self.parts.claimed_rate
    }

    pub fn g_function(&self) -> Option<&Expression> {
        self.parts.g_function.as_ref()
    }

    pub fn base_point(&self, v: VertexId) -> &Point<T> {
        &self.parts.base_points[v]
    }

    pub fn base_points(&self) -> &[Point<T>] {
        &self.parts.base_points
    }

    pub fn prob_expr(&self, e: EdgeId) -> &Expression {
        &self.parts.probs[e]
    }

    pub fn map_spec(&self, e: EdgeId) -> &MapSpec<T> {
        &self.parts.maps[e]
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.parts.backend {
            Backend::Euclid { dim, .. } => Some(*dim),
            Backend::Word { .. } => None,
        }
    }

    pub fn is_word(&self) -> bool {
        matches!(self.parts.backend, Backend::Word { .. })
    }

    /// Whether `x` satisfies the membership predicate of `v`.
    pub fn in_region(&self, v: VertexId, x: &Point<T>) -> Result<bool> {
        match (&self.parts.backend, x) {
            (Backend::Euclid { regions, .. }, Point::Euclid(_)) => regions[v].holds(&x.bindings()),
            (Backend::Word { .. }, Point::Word(w)) => Ok(w
                .last()
                .is_some_and(|&e| (e as usize) < self.digraph().edge_count() && self.digraph().target(e as usize) == v)),
            _ => Err(Error::InvalidParameter("point does not match the system backend".into())),
        }
    }

    /// Every vertex whose region contains `x`.
    pub fn regions_containing(&self, x: &Point<T>) -> Result<Vec<VertexId>> {
        let mut hits = Vec::new();
        for v in 0..self.digraph().vertex_count() {
            if self.in_region(v, x)? {
                hits.push(v);
            }
        }
        Ok(hits)
    }

    /// The unique vertex whose region contains `x`.
    pub fn vertex_of(&self, x: &Point<T>) -> Result<VertexId> {
        if let Point::Word(w) = x {
            return match w.last() {
                Some(&e) if (e as usize) < self.digraph().edge_count() => Ok(self.digraph().target(e as usize)),
                _ => Err(Error::Domain(format!("word `{}` has no terminal vertex", format_word(w)))),
            };
        }
        let hits = self.regions_containing(x)?;
        match hits.as_slice() {
            [v] => Ok(*v),
            [] => Err(Error::Domain(format!("point {x} lies in no region"))),
            _ => Err(Error::Partition {
                point: x.to_string(),
                count: hits.len(),
            }),
        }
    }

    /// `w_e(x)` without checking that `x` lies in `K_{i(e)}`.
    pub fn apply_map(&self, e: EdgeId, x: &Point<T>) -> Result<Point<T>> {
        match (&self.parts.maps[e], x) {
            (MapSpec::Affine { a, b }, Point::Euclid(c)) => Ok(Point::Euclid(
                a.iter()
                    .zip(b)
                    .map(|(row, &off)| row.iter().zip(c).fold(off, |acc, (&m, &xi)| acc + m * xi))
                    .collect(),
            )),
            (MapSpec::Expr(coords), Point::Euclid(_)) => {
                let vars = x.bindings();
                Ok(Point::Euclid(coords.iter().map(|c| c.eval(&vars)).collect::<Result<_>>()?))
            }
            (MapSpec::Append, Point::Word(w)) => {
                let Backend::Word { depth } = self.parts.backend else {
                    unreachable!("append maps only exist on the word backend")
                };
                let skip = (w.len() + 1).saturating_sub(depth);
                let mut out = Vec::with_capacity(depth);
                out.extend_from_slice(&w[skip..]);
                out.push(e as u32);
                Ok(Point::Word(out))
            }
            _ => Err(Error::InvalidParameter("point does not match the system backend".into())),
        }
    }

    /// `w_e(x)`, failing when `x` is outside `K_{i(e)}`.
    pub fn eval_map(&self, e: EdgeId, x: &Point<T>) -> Result<Point<T>> {
        let source = self.digraph().source(e);
        if !self.in_region(source, x)? {
            return Err(Error::OutsideRegion {
                vertex: source + 1,
                point: x.to_string(),
            });
        }
        self.apply_map(e, x)
    }

    /// Raw probabilities of the outgoing edges of `v` at `x`, in edge order.
    pub fn probs_at(&self, v: VertexId, x: &Point<T>) -> Result<Vec<T>> {
        let vars = x.bindings();
        self.digraph()
            .out_edges(v)
            .iter()
            .map(|&e| self.parts.probs[e].eval(&vars))
            .collect()
    }

    /// `p_e(x)`, zero when `x` is tagged with a vertex other than `i(e)`.
    pub fn prob(&self, e: EdgeId, v: VertexId, x: &Point<T>) -> Result<T> {
        if self.digraph().source(e) != v {
            return Ok(T::zero());
        }
        self.parts.probs[e].eval(&x.bindings())
    }

    /// Probabilities of the edges leaving the vertex of `x`, checked for
    /// positivity (`>= delta`) and normalization.
    pub fn eval_probs(&self, x: &Point<T>) -> Result<Vec<(EdgeId, T)>> {
        let v = self.vertex_of(x)?;
        let probs = self.probs_at(v, x)?;
        let edges = self.digraph().out_edges(v);
        for (&e, &p) in edges.iter().zip(&probs) {
            if p < self.parts.delta {
                return Err(Error::Positivity {
                    edge: e,
                    value: p.as_f64(),
                    delta: self.parts.delta.as_f64(),
                });
            }
        }
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > T::normalization_tol() {
            return Err(Error::Normalization {
                vertex: v + 1,
                sum: sum.as_f64(),
            });
        }
        Ok(edges.iter().copied().zip(probs).collect())
    }

    /// Metric of the backend; points of different kinds are infinitely far.
    pub fn distance(&self, x: &Point<T>, y: &Point<T>) -> T {
        match (x, y) {
            (Point::Euclid(a), Point::Euclid(b)) => a
                .iter()
                .zip(b)
                .map(|(&p, &q)| (p - q) * (p - q))
                .sum::<T>()
                .sqrt(),
            (Point::Word(a), Point::Word(b)) => word_distance(a, b),
            _ => T::infinity(),
        }
    }

    /// Composes `w_{word[n-1]} ∘ ... ∘ w_{word[0]}` applied to `x`.
    pub fn compose(&self, word: &[EdgeId], x: &Point<T>) -> Result<Point<T>> {
        let mut p = x.clone();
        for &e in word {
            p = self.apply_map(e, &p)?;
        }
        Ok(p)
    }

    /// Uniform draw from `K_v` (rejection from the working box for Euclid,
    /// random backward walk of full depth for words).
    pub fn sample_in_vertex<R: Rng + ?Sized>(&self, v: VertexId, rng: &mut R) -> Result<Point<T>> {
        match &self.parts.backend {
            Backend::Euclid { working_box, .. } => {
                for _ in 0..SAMPLE_RETRIES {
                    let x = Point::Euclid(working_box.iter().map(|[lo, hi]| rng::uniform_in(rng, *lo, *hi)).collect());
                    if self.in_region(v, &x)? {
                        return Ok(x);
                    }
                }
                Err(Error::Sampling(format!(
                    "no point of vertex {} found in {SAMPLE_RETRIES} draws from the working box; region possibly empty",
                    v + 1
                )))
            }
            Backend::Word { depth } => {
                let w = self.random_word_into(v, *depth, rng);
                if w.is_empty() {
                    return Err(Error::Sampling(format!("vertex {} has no incoming edge", v + 1)));
                }
                Ok(Point::Word(w))
            }
        }
    }

    /// Uniform draw from the working box, ignoring regions.
    pub fn sample_box<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Point<T>> {
        match &self.parts.backend {
            Backend::Euclid { working_box, .. } => Some(Point::Euclid(
                working_box.iter().map(|[lo, hi]| rng::uniform_in(rng, *lo, *hi)).collect(),
            )),
            Backend::Word { .. } => None,
        }
    }

    /// Random admissible word of up to `len` symbols ending at vertex `v`,
    /// built backwards by uniform choice among incoming edges.
    pub fn random_word_into<R: Rng + ?Sized>(&self, v: VertexId, len: usize, rng: &mut R) -> Vec<u32> {
        let g = self.digraph();
        let mut rev = Vec::with_capacity(len);
        let mut at = v;
        for _ in 0..len {
            let inc = g.in_edges(at);
            if inc.is_empty() {
                break;
            }
            let e = inc[rng.gen_range(0..inc.len())];
            rev.push(e as u32);
            at = g.source(e);
        }
        rev.reverse();
        rev
    }

    pub fn validate(&self, n_samples: usize, seed: u64) -> Result<ValidationReport> {
        validate::validate_system(self, n_samples, seed)
    }

    pub fn estimate_contraction_rate(&self, n_pairs: usize, seed: u64) -> Result<ContractionReport> {
        validate::estimate_contraction_rate(self, n_pairs, seed)
    }
}

pub(crate) fn word_distance<T: Scalar>(a: &[u32], b: &[u32]) -> T {
    let agree = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    if agree == a.len() && agree == b.len() {
        return T::zero();
    }
    T::lit(0.5).powi(agree as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sincos_maps_and_probs() {
        let s = fixture::<f64>("sincos").unwrap();
        assert_eq!(s.eval_map(0, &Point::scalar(2.0)).unwrap(), Point::scalar(1.0));
        let probs = s.eval_probs(&Point::scalar(0.0)).unwrap();
        assert_eq!(probs[0].0, 0);
        assert!((probs[0].1 - 17.0 / 24.0).abs() < 1e-15);
        assert!((probs[1].1 - 7.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn example1_maps_and_probs() {
        let s = fixtures::example1::<f64>(0.2, 0.3).unwrap();
        let inv_e = 1.0 / std::f64::consts::E;
        assert_eq!(s.eval_map(1, &Point::scalar(inv_e)).unwrap(), Point::scalar(0.0));
        let at_zero = s.eval_probs(&Point::scalar(0.0)).unwrap();
        assert_eq!(at_zero[0].1, 0.3);
        assert_eq!(at_zero[1].1, 0.7);
        let at_inv_e = s.eval_probs(&Point::scalar(inv_e)).unwrap();
        assert!((at_inv_e[0].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_affine_map() {
        let s = fixtures::finite_chain::<f64>(&[vec![1.0]]).unwrap();
        let parts = SystemParts {
            maps: vec![MapSpec::Affine {
                a: vec![vec![1.0]],
                b: vec![0.0],
            }],
            ..s.into_parts()
        };
        let s = MarkovSystem::new(parts).unwrap();
        for x in [1.0, 1.2, 0.7] {
            assert_eq!(s.eval_map(0, &Point::scalar(x)).unwrap(), Point::scalar(x));
        }
    }

    #[test]
    fn single_edge_vertex_is_certain() {
        let s = fixture::<f64>("halving").unwrap();
        let p = s.eval_probs(&Point::scalar(3.0)).unwrap();
        assert_eq!(p, vec![(0, 1.0)]);
    }

    #[test]
    fn outside_region_is_rejected() {
        let s = fixture::<f64>("fc3").unwrap();
        // vertex 2 owns [1.5, 2.5); edge 0 leaves vertex 1
        assert!(matches!(
            s.eval_map(0, &Point::scalar(2.0)),
            Err(Error::OutsideRegion { vertex: 1, .. })
        ));
    }

    #[test]
    fn broken_probabilities_fail_normalization() {
        let s = fixture::<f64>("broken").unwrap();
        assert!(matches!(
            s.eval_probs(&Point::scalar(0.3)),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn word_metric() {
        assert_eq!(word_distance::<f64>(&[0, 1, 1], &[1, 1, 1]), 0.25);
        assert_eq!(word_distance::<f64>(&[0, 1, 1], &[0, 1, 1]), 0.0);
        assert_eq!(word_distance::<f64>(&[1, 0], &[1, 1]), 1.0);
    }

    #[test]
    fn append_truncates_to_depth() {
        let s = fixture::<f64>("gm-bernoulli").unwrap();
        let Backend::Word { depth } = s.backend() else { panic!() };
        let x = s.base_point(0).clone();
        assert_eq!(x.symbols().len(), *depth);
        let y = s.eval_map(1, &x).unwrap();
        assert_eq!(y.symbols().len(), *depth);
        assert_eq!(*y.symbols().last().unwrap(), 1);
        assert_eq!(&y.symbols()[..depth - 1], &x.symbols()[1..]);
        // the append map halves distances
        let z = s.sample_in_vertex(0, &mut rng::stream(3, &[])).unwrap();
        let before: f64 = s.distance(&x, &z);
        let after: f64 = s.distance(&s.apply_map(0, &x).unwrap(), &s.apply_map(0, &z).unwrap());
        assert!(after <= before / 2.0 + 1e-300);
    }

    #[test]
    fn schema_errors() {
        let s = fixture::<f64>("sincos").unwrap();
        let mut parts = s.into_parts();
        parts.probs.pop();
        assert!(MarkovSystem::new(parts).is_err());
        let mut parts = fixture::<f64>("sincos").unwrap().into_parts();
        parts.probs[0] = Expression::parse("x1").unwrap();
        assert!(MarkovSystem::new(parts).is_err());
        let mut parts = fixture::<f64>("sincos").unwrap().into_parts();
        parts.delta = 0.0;
        assert!(MarkovSystem::new(parts).is_err());
    }
}
