//! Built-in systems.

use std::collections::BTreeMap;

use super::{Backend, MapSpec, MarkovSystem, Point, SystemParts, DEFAULT_WORD_DEPTH};
use crate::expr::{BinOp, Expr, Expression};
use crate::graph::Digraph;
use crate::{thermo, Error, Result, Scalar};

/// `(name, description)` of every built-in fixture.
pub fn fixtures_catalog() -> &'static [(&'static str, &'static str)] {
    &[
        ("fc3", "3-state doubly stochastic chain [[.5,.5,0],[0,.5,.5],[.5,0,.5]] with constant maps"),
        ("sincos", "w0 = x/2, w1 = 2x on R with p0 = sin^2(x)/6 + 17/24, p1 = cos^2(x)/6 + 1/8 (rate 45/48)"),
        ("example1", "w0 = 9x/10, w1 = -x + 1/e on [0, 1/e], p0 = alpha/sqrt(log 1/x) + delta (alpha = 0.2, delta = 0.3)"),
        ("halving", "single map x/2 with probability 1"),
        ("sierpinski", "2-vertex graph-directed Sierpinski system in [0,2)x[0,1]"),
        ("identity3", "3-state identity chain (every step deterministic)"),
        ("broken", "sincos maps with p0 = p1 = 0.6 (fails normalization)"),
        ("gm-bernoulli", "g-measure system on the full 2-shift with g = 1/2"),
        ("gm-golden", "g-measure system on the golden-mean shift with the maximal-entropy Markov g"),
        ("gm-cycle", "g-measure system on a single loop (g = 1)"),
    ]
}

pub fn fixture_names() -> Vec<&'static str> {
    fixtures_catalog().iter().map(|(n, _)| *n).collect()
}

pub fn fixture<T: Scalar>(name: &str) -> Result<MarkovSystem<T>> {
    let sys = match name {
        "fc3" => fc3(),
        "sincos" => example_sincos(),
        "example1" => example1(0.2, 0.3),
        "halving" => halving(),
        "sierpinski" => sierpinski_directed(),
        "identity3" => finite_chain(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
        "broken" => broken(),
        "gm-bernoulli" => gmeasure(Digraph::new(1, &[(0, 0), (0, 0)]), Expression::constant(0.5), DEFAULT_WORD_DEPTH, 0.5),
        "gm-golden" => golden_mean(),
        "gm-cycle" => gmeasure(Digraph::new(1, &[(0, 0)]), Expression::constant(1.0), DEFAULT_WORD_DEPTH, 0.5),
        other => Err(Error::InvalidParameter(format!("unknown fixture `{other}`"))),
    }?;
    let mut parts = sys.into_parts();
    parts.name = name.to_string();
    MarkovSystem::new(parts)
}

pub fn builtin_fixtures<T: Scalar>() -> Vec<(&'static str, MarkovSystem<T>)> {
    fixture_names()
        .into_iter()
        .map(|n| (n, fixture(n).expect("built-in fixtures are well formed")))
        .collect()
}

fn expr(src: &str) -> Expression {
    Expression::parse(src).expect("fixture expression")
}

fn line<T: Scalar>(lo: f64, hi: f64) -> Vec<[T; 2]> {
    vec![[T::lit(lo), T::lit(hi)]]
}

fn scalar_affine<T: Scalar>(a: f64, b: T) -> MapSpec<T> {
    MapSpec::Affine {
        a: vec![vec![T::lit(a)]],
        b: vec![b],
    }
}

pub const FC3_MATRIX: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];

pub fn fc3<T: Scalar>() -> Result<MarkovSystem<T>> {
    let p: Vec<Vec<f64>> = FC3_MATRIX.iter().map(|r| r.to_vec()).collect();
    let mut parts = finite_chain::<T>(&p)?.into_parts();
    parts.name = "fc3".into();
    MarkovSystem::new(parts)
}

/// A finite Markov chain as a system on the line: state `i` (1-based) sits at
/// `x = i` in the region `[i - 1/2, i + 1/2)`, every edge `i -> j` with
/// `P_ij > 0` is the constant map to `j`, with constant probability `P_ij`.
pub fn finite_chain<T: Scalar>(p: &[Vec<f64>]) -> Result<MarkovSystem<T>> {
    let n = p.len();
    if n == 0 || p.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter("transition matrix must be square and non-empty".into()));
    }
    let mut edges = Vec::new();
    let mut maps = Vec::new();
    let mut probs = Vec::new();
    let mut min_p = 1.0f64;
    for (i, row) in p.iter().enumerate() {
        if row.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("row {} is not a probability vector", i + 1)));
        }
        for (j, &pij) in row.iter().enumerate() {
            if pij > 0.0 {
                edges.push((i, j));
                maps.push(scalar_affine(0.0, T::from_count(j + 1)));
                probs.push(Expression::constant(pij));
                min_p = min_p.min(pij);
            }
        }
    }
    let regions = (0..n)
        .map(|i| expr(&format!("x0 >= {} && x0 < {}", i as f64 + 0.5, i as f64 + 1.5)))
        .collect();
    MarkovSystem::new(SystemParts {
        name: "finite-chain".into(),
        digraph: Digraph::new(n, &edges),
        backend: Backend::Euclid {
            dim: 1,
            working_box: line(0.5, n as f64 + 0.5),
            regions,
        },
        maps,
        probs,
        base_points: (0..n).map(|i| Point::scalar(T::from_count(i + 1))).collect(),
        delta: T::lit(min_p.min(0.5)),
        claimed_rate: None,
        g_function: None,
        params: BTreeMap::new(),
    })
}

/// `w0 = x/2`, `w1 = 2x` on the real line with the sin/cos probabilities.
pub fn example_sincos<T: Scalar>() -> Result<MarkovSystem<T>> {
    MarkovSystem::new(SystemParts {
        name: "sincos".into(),
        digraph: Digraph::new(1, &[(0, 0), (0, 0)]),
        backend: Backend::Euclid {
            dim: 1,
            working_box: line(-50.0, 50.0),
            regions: vec![expr("1")],
        },
        maps: vec![scalar_affine(0.5, T::zero()), scalar_affine(2.0, T::zero())],
        probs: vec![expr("1/6*sin(x0)^2 + 17/24"), expr("1/6*cos(x0)^2 + 1/8")],
        base_points: vec![Point::scalar(T::one())],
        delta: T::lit(0.125),
        claimed_rate: Some(T::lit(45.0 / 48.0)),
        g_function: None,
        params: BTreeMap::new(),
    })
}

/// `w0 = 9x/10`, `w1 = -x + 1/e` on `[0, 1/e]` with
/// `p0 = alpha / sqrt(log(1/x)) + delta` (and `delta` at 0), `p1 = 1 - p0`.
///
/// The average contraction sum is `1 - p0(x)/10`, so the rate recorded as
/// `claimed_rate` is the bound `1 - delta/10`. The value `1 - 9 delta/10` is
/// kept in `params` as `unconfirmed_stated_rate` for reports.
pub fn example1<T: Scalar>(alpha: f64, delta: f64) -> Result<MarkovSystem<T>> {
    if !(alpha > 0.0 && delta > 0.0 && alpha + delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "example1 needs alpha, delta > 0 with alpha + delta < 1 (got {alpha}, {delta})"
        )));
    }
    let p0 = format!("if(x0 == 0, {delta}, {alpha}/sqrt(log(1/x0)) + {delta})");
    let inv_e = T::one() / T::E();
    let params = BTreeMap::from([
        ("alpha".to_string(), alpha),
        ("fixture_delta".to_string(), delta),
        ("derived_rate_bound".to_string(), 1.0 - delta / 10.0),
        ("unconfirmed_stated_rate".to_string(), 1.0 - 0.9 * delta),
    ]);
    MarkovSystem::new(SystemParts {
        name: "example1".into(),
        digraph: Digraph::new(1, &[(0, 0), (0, 0)]),
        backend: Backend::Euclid {
            dim: 1,
            working_box: vec![[T::zero(), inv_e]],
            regions: vec![expr("x0 >= 0 && x0 <= 1/euler")],
        },
        maps: vec![scalar_affine(0.9, T::zero()), scalar_affine(-1.0, inv_e)],
        probs: vec![expr(&p0), expr(&format!("1 - {p0}"))],
        base_points: vec![Point::scalar(inv_e)],
        delta: T::lit(delta.min(1.0 - alpha - delta)),
        claimed_rate: Some(T::lit(1.0 - delta / 10.0)),
        g_function: None,
        params,
    })
}

/// `w(x) = x/2` with probability one.
pub fn halving<T: Scalar>() -> Result<MarkovSystem<T>> {
    MarkovSystem::new(SystemParts {
        name: "halving".into(),
        digraph: Digraph::new(1, &[(0, 0)]),
        backend: Backend::Euclid {
            dim: 1,
            working_box: line(-50.0, 50.0),
            regions: vec![expr("1")],
        },
        maps: vec![scalar_affine(0.5, T::zero())],
        probs: vec![expr("1")],
        base_points: vec![Point::scalar(T::one())],
        delta: T::lit(0.5),
        claimed_rate: Some(T::lit(0.5)),
        g_function: None,
        params: BTreeMap::new(),
    })
}

fn broken<T: Scalar>() -> Result<MarkovSystem<T>> {
    let mut parts = example_sincos::<T>()?.into_parts();
    parts.name = "broken".into();
    parts.probs = vec![expr("0.6"), expr("0.6")];
    MarkovSystem::new(parts)
}

/// Offsets of the half-scale maps `p -> p/2 + b` of the directed Sierpinski
/// system, with `(source, target)` vertices.
pub const SIERPINSKI_EDGES: [((usize, usize), [f64; 2]); 6] = [
    ((0, 0), [0.0, 0.0]),
    ((0, 0), [0.25, 0.5]),
    ((0, 1), [1.0, 0.0]),
    ((1, 1), [1.0, 0.0]),
    ((1, 1), [0.75, 0.5]),
    ((1, 0), [0.0, 0.0]),
];

/// Two Sierpinski triangles, one in `[0,1)x[0,1]` and a translate in
/// `[1,2)x[0,1]`, each borrowing one corner copy from the other.
pub fn sierpinski_directed<T: Scalar>() -> Result<MarkovSystem<T>> {
    let half = T::lit(0.5);
    let maps = SIERPINSKI_EDGES
        .iter()
        .map(|(_, b)| MapSpec::Affine {
            a: vec![vec![half, T::zero()], vec![T::zero(), half]],
            b: vec![T::lit(b[0]), T::lit(b[1])],
        })
        .collect();
    let edges: Vec<(usize, usize)> = SIERPINSKI_EDGES.iter().map(|(st, _)| *st).collect();
    MarkovSystem::new(SystemParts {
        name: "sierpinski".into(),
        digraph: Digraph::new(2, &edges),
        backend: Backend::Euclid {
            dim: 2,
            working_box: vec![[T::zero(), T::lit(2.0)], [T::zero(), T::one()]],
            regions: vec![
                expr("x0 >= 0 && x0 < 1 && x1 >= 0 && x1 <= 1"),
                expr("x0 >= 1 && x0 < 2 && x1 >= 0 && x1 <= 1"),
            ],
        },
        maps,
        probs: (0..6).map(|_| expr("1/3")).collect(),
        base_points: vec![
            Point::Euclid(vec![T::zero(), T::zero()]),
            Point::Euclid(vec![T::one(), T::zero()]),
        ],
        delta: T::lit(0.3),
        claimed_rate: Some(half),
        g_function: None,
        params: BTreeMap::new(),
    })
}

/// Word-backend system of a `g`-function: `w_e(σ) = σ·e`, `p_e(σ) = g(σ·e)`.
///
/// Base points are words of `depth` symbols built backwards from each vertex
/// along the lowest-numbered incoming edge.
pub fn gmeasure<T: Scalar>(digraph: Digraph, g: Expression, depth: usize, delta: f64) -> Result<MarkovSystem<T>> {
    if !digraph.is_irreducible() {
        return Err(Error::Graph("g-measure systems need an irreducible digraph".into()));
    }
    let probs = (0..digraph.edge_count())
        .map(|e| Expression::from_ast(g.ast().shift_symbols(e as u32)))
        .collect();
    let base_points = (0..digraph.vertex_count())
        .map(|v| {
            let mut rev = Vec::with_capacity(depth);
            let mut at = v;
            for _ in 0..depth {
                let e = digraph.in_edges(at)[0];
                rev.push(e as u32);
                at = digraph.source(e);
            }
            rev.reverse();
            Point::Word(rev)
        })
        .collect();
    MarkovSystem::new(SystemParts {
        name: "gmeasure".into(),
        maps: vec![MapSpec::Append; digraph.edge_count()],
        digraph,
        backend: Backend::Word { depth },
        probs,
        base_points,
        delta: T::lit(delta),
        claimed_rate: Some(T::lit(0.5)),
        g_function: Some(g),
        params: BTreeMap::new(),
    })
}

/// `g(σ) = q[σ_{-1}][σ_0]` as an expression over the last two symbols.
pub fn markov_g(q: &[Vec<f64>]) -> Expression {
    let term = |e: usize, f: usize, v: f64| {
        let eq = |k: usize, val: usize| {
            Expr::Binary(BinOp::Eq, Box::new(Expr::Symbol(k)), Box::new(Expr::Num(val as f64)))
        };
        Expr::Binary(
            BinOp::Mul,
            Box::new(Expr::Num(v)),
            Box::new(Expr::Binary(BinOp::Mul, Box::new(eq(1, e)), Box::new(eq(0, f)))),
        )
    };
    let ast = q
        .iter()
        .enumerate()
        .flat_map(|(e, row)| row.iter().enumerate().filter(|(_, v)| **v > 0.0).map(move |(f, &v)| term(e, f, v)))
        .reduce(|a, b| Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)))
        .unwrap_or(Expr::Num(0.0));
    Expression::from_ast(ast)
}

/// Word-backend system of a Markov `g` given by an edge-to-edge matrix.
pub fn gmeasure_markov<T: Scalar>(digraph: Digraph, q: &[Vec<f64>], depth: usize) -> Result<MarkovSystem<T>> {
    thermo::check_edge_matrix(&digraph, q)?;
    let delta = q.iter().flatten().copied().filter(|v| *v > 0.0).fold(1.0f64, f64::min);
    let mut sys = gmeasure::<T>(digraph, markov_g(q), depth, delta.min(0.5))?.into_parts();
    sys.name = "gmeasure-markov".into();
    MarkovSystem::new(sys)
}

/// Golden-mean shift: edges `a: 1->1`, `b: 1->2`, `c: 2->1`.
pub fn golden_digraph() -> Digraph {
    Digraph::new(2, &[(0, 0), (0, 1), (1, 0)])
}

fn golden_mean<T: Scalar>() -> Result<MarkovSystem<T>> {
    let g = golden_digraph();
    let q = thermo::max_entropy_q(&g)?;
    let mut parts = gmeasure_markov::<T>(g, &q, DEFAULT_WORD_DEPTH)?.into_parts();
    parts.name = "gm-golden".into();
    MarkovSystem::new(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;

    #[test]
    fn catalog_builds() {
        let all = builtin_fixtures::<f64>();
        assert_eq!(all.len(), fixtures_catalog().len());
        assert!(fixture::<f64>("nope").is_err());
    }

    #[test]
    fn example1_parameters() {
        assert!(example1::<f64>(0.5, 0.5).is_err());
        assert!(example1::<f64>(0.0, 0.5).is_err());
        let s = example1::<f64>(0.2, 0.3).unwrap();
        let x = Point::scalar(1.0 / std::f64::consts::E);
        let p0: f64 = s.prob_expr(0).eval(&x.bindings()).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sincos_probabilities_are_complementary() {
        let s = example_sincos::<f64>().unwrap();
        for k in 0..2000 {
            let x = Point::scalar(-50.0 + k as f64 * 0.05);
            let sum: f64 = s.probs_at(0, &x).unwrap().into_iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        // 17/24 + 1/8 + 1/6 == 1
        assert!((17.0f64 / 24.0 + 1.0 / 8.0 + 1.0 / 6.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_chain_is_deterministic() {
        let s = fixture::<f64>("identity3").unwrap();
        for v in 0..3 {
            let out = s.digraph().out_edges(v);
            assert_eq!(out.len(), 1);
            assert_eq!(s.digraph().target(out[0]), v);
            assert_eq!(s.eval_probs(s.base_point(v)).unwrap()[0].1, 1.0);
        }
    }

    #[test]
    fn markov_g_reads_matrix() {
        let q = vec![vec![0.25, 0.75], vec![0.6, 0.4]];
        let g = markov_g(&q);
        for (e, row) in q.iter().enumerate() {
            for (f, &v) in row.iter().enumerate() {
                let word = [1u32, e as u32, f as u32];
                let got: f64 = g.eval(&Bindings::symbols(&word)).unwrap();
                assert_eq!(got, v);
            }
        }
    }

    #[test]
    fn gmeasure_base_points_are_paths_into_their_vertex() {
        let s = fixture::<f64>("gm-golden").unwrap();
        for v in 0..2 {
            let w: Vec<usize> = s.base_point(v).symbols().iter().map(|&e| e as usize).collect();
            assert!(s.digraph().is_path(&w));
            assert_eq!(s.vertex_of(s.base_point(v)).unwrap(), v);
        }
    }
}
