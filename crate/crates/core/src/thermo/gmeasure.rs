//! g-measures on subshifts of finite type: the closed-form Markov case, the
//! transfer-operator identity, and the comparison of word cylinders with
//! generalized Markov masses.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{sum_w2, tree_masses, Moments, WordTree};
use crate::expr::Expression;
use crate::graph::Digraph;
use crate::operator::{apply_u, ParticleMeasure};
use crate::rng::{self, CHUNK};
use crate::system::{format_word, MarkovSystem, Point};
use crate::{Error, Result, Scalar};

const TAG_RUELLE: u64 = 0x5255;
const POWER_ITERS: usize = 1_000_000;

/// Checks that `q` is an `|E| x |E|` stochastic matrix supported on
/// consecutive edge pairs.
pub fn check_edge_matrix(g: &Digraph, q: &[Vec<f64>]) -> Result<()> {
    let n = g.edge_count();
    if q.len() != n || q.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter(format!("edge matrix must be {n} x {n}")));
    }
    for (e, row) in q.iter().enumerate() {
        for (f, &v) in row.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("q[{e}][{f}] = {v} is not a probability")));
            }
            if v > 0.0 && g.target(e) != g.source(f) {
                return Err(Error::InvalidParameter(format!("q[{e}][{f}] > 0 but edge {f} does not follow edge {e}")));
            }
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("row {e} of the edge matrix sums to {s}")));
        }
    }
    Ok(())
}

/// Perron root of a nonnegative irreducible matrix.
pub fn perron_root(a: &[Vec<f64>]) -> f64 {
    perron(a).0
}

/// Perron root and right eigenvector (power iteration on `A + I`, which has
/// the same eigenvector and is aperiodic).
fn perron(a: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = a.len();
    let mut r = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERS {
        let mut next: Vec<f64> = (0..n).map(|i| r[i] + (0..n).map(|j| a[i][j] * r[j]).sum::<f64>()).collect();
        let norm: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= norm);
        lambda = norm - 1.0;
        let change: f64 = next.iter().zip(&r).map(|(x, y)| (x - y).abs()).sum();
        r = next;
        if change < 1e-15 {
            break;
        }
    }
    (lambda, r)
}

/// The edge-to-edge matrix of the measure of maximal entropy (Parry
/// measure) of an irreducible digraph.
pub fn max_entropy_q(g: &Digraph) -> Result<Vec<Vec<f64>>> {
    if !g.is_irreducible() {
        return Err(Error::Graph("maximal-entropy chain needs an irreducible digraph".into()));
    }
    let n = g.vertex_count();
    let mut a = vec![vec![0.0; n]; n];
    for e in g.edges() {
        a[e.source][e.target] += 1.0;
    }
    let (_, r) = perron(&a);
    let m = g.edge_count();
    let mut q = vec![vec![0.0; m]; m];
    for e in 0..m {
        let out = g.out_edges(g.target(e));
        let total: f64 = out.iter().map(|&f| r[g.target(f)]).sum();
        for &f in out {
            q[e][f] = r[g.target(f)] / total;
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovOracle {
    /// Left fixed vector of `q`.
    pub stationary: Vec<f64>,
    /// Entropy from 2-block minus 1-block Shannon entropies.
    pub entropy: f64,
    /// `Σ π_e q_{ee'} log q_{ee'}`.
    pub integral_log_g: f64,
    /// `|h + ∫ log g dm|`.
    pub equilibrium_residual: f64,
}

pub fn gmeasure_markov_oracle(g: &Digraph, q: &[Vec<f64>]) -> Result<MarkovOracle> {
    check_edge_matrix(g, q)?;
    let m = g.edge_count();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|e| (0..m).filter(move |&f| q[e][f] > 0.0).map(move |f| (e, f)))
        .collect();
    if !Digraph::new(m, &pairs).is_irreducible() {
        return Err(Error::Graph("edge graph of q is reducible".into()));
    }
    // Lazy iteration π <- (π + πq)/2 also converges for periodic q.
    let mut pi = vec![1.0 / m as f64; m];
    for _ in 0..POWER_ITERS {
        let mut next: Vec<f64> = pi.iter().map(|v| 0.5 * v).collect();
        for &(e, f) in &pairs {
            next[f] += 0.5 * pi[e] * q[e][f];
        }
        let norm: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= norm);
        let change: f64 = next.iter().zip(&pi).map(|(x, y)| (x - y).abs()).sum();
        pi = next;
        if change < 1e-15 {
            break;
        }
    }
    let h1: f64 = -pi.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>();
    let h2: f64 = -pairs
        .iter()
        .map(|&(e, f)| {
            let j = pi[e] * q[e][f];
            if j > 0.0 {
                j * j.ln()
            } else {
                0.0
            }
        })
        .sum::<f64>();
    let entropy = h2 - h1;
    let integral_log_g: f64 = pairs.iter().map(|&(e, f)| pi[e] * q[e][f] * q[e][f].ln()).sum();
    Ok(MarkovOracle {
        equilibrium_residual: (entropy + integral_log_g).abs(),
        stationary: pi,
        entropy,
        integral_log_g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuelleReport {
    pub test_function: String,
    pub n_points: usize,
    pub max_deviation: f64,
}

/// Compares the transfer-operator sum `Σ_e g(σe) φ(σe)` with `(Uφ)(σ)` at
/// random word points.
pub fn ruelle_identity_check<T: Scalar>(
    gsys: &MarkovSystem<T>,
    phi: &Expression,
    n_points: usize,
    seed: u64,
) -> Result<RuelleReport> {
    let g_fn = gsys
        .g_function()
        .ok_or_else(|| Error::InvalidParameter("system has no g-function".into()))?;
    let dg = gsys.digraph();
    let chunks = n_points.div_ceil(CHUNK);
    let devs = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, &[TAG_RUELLE, c as u64]);
            let mut worst = 0.0f64;
            for _ in 0..CHUNK.min(n_points - c * CHUNK) {
                let v = r.gen_range(0..dg.vertex_count());
                let sigma = gsys.sample_in_vertex(v, &mut r)?;
                let mut direct = T::zero();
                for &e in dg.out_edges(v) {
                    let mut ext = sigma.symbols().to_vec();
                    ext.push(e as u32);
                    let vars = crate::expr::Bindings::symbols(&ext);
                    direct += g_fn.eval::<T>(&vars)? * phi.eval::<T>(&vars)?;
                }
                let via_u = apply_u(gsys, |y| phi.eval(&y.bindings()), &sigma)?;
                worst = worst.max((direct - via_u).abs().as_f64());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RuelleReport {
        test_function: phi.source().to_string(),
        n_points,
        max_deviation: devs.into_iter().fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuffixComparison {
    pub word: String,
    /// Mass of particle words ending with `word`.
    pub suffix_mass: f64,
    pub cylinder_mass: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaturalExtensionReport {
    pub max_len: usize,
    pub max_deviation: f64,
    /// Largest deviation in units of its standard error.
    pub max_z: f64,
    pub entries: Vec<SuffixComparison>,
}

/// For every admissible word up to `max_len`, compares the `mu`-mass of words
/// ending with it against the generalized Markov mass of its cylinder.
pub fn natural_extension_check<T: Scalar>(
    gsys: &MarkovSystem<T>,
    mu: &ParticleMeasure<T>,
    max_len: usize,
) -> Result<NaturalExtensionReport> {
    if !gsys.is_word() {
        return Err(Error::InvalidParameter("natural extension check needs a word-backend system".into()));
    }
    let tree = WordTree::new(gsys, max_len)?;
    let masses = tree_masses(gsys, mu, &tree)?;
    let w2 = sum_w2(mu);
    let mut entries = Vec::new();
    let mut max_dev = 0.0f64;
    let mut max_z = 0.0f64;
    for (k, w) in tree.words.iter().enumerate().skip(1) {
        let sym: Vec<u32> = w.iter().map(|&e| e as u32).collect();
        let mut sm = Moments::default();
        for p in mu.particles() {
            let hit = matches!(&p.point, Point::Word(s) if s.ends_with(&sym));
            sm.add(p.weight, if hit { T::one() } else { T::zero() });
        }
        let suffix = sm.s1.as_f64();
        let cyl = masses[k].s1.as_f64();
        let se = (sm.std_error(w2).powi(2) + masses[k].std_error(w2).powi(2)).sqrt().as_f64();
        let dev = (suffix - cyl).abs();
        max_dev = max_dev.max(dev);
        let z = if se > 0.0 { dev / se } else if dev > 0.0 { f64::INFINITY } else { 0.0 };
        max_z = max_z.max(z);
        entries.push(SuffixComparison {
            word: format_word(&sym),
            suffix_mass: suffix,
            cylinder_mass: cyl,
            std_error: se,
        });
    }
    Ok(NaturalExtensionReport {
        max_len,
        max_deviation: max_dev,
        max_z,
        entries,
    })
}
