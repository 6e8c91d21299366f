//! Generalized Markov measures on cylinders, entropy, the conditional
//! next-edge identity and the energy function.

mod gmeasure;

pub use gmeasure::{
    check_edge_matrix, gmeasure_markov_oracle, max_entropy_q, natural_extension_check, perron_root,
    ruelle_identity_check, MarkovOracle, NaturalExtensionReport, RuelleReport, SuffixComparison,
};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{code_suffix, sample_words};
use crate::graph::{EdgeId, DEFAULT_WORD_CAP};
use crate::operator::{Particle, ParticleMeasure};
use crate::rng::CHUNK;
use crate::system::{MarkovSystem, Point};
use crate::{Error, Result, Scalar};

/// Estimated mass `M([e_1 ... e_k])` of a cylinder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderEstimate {
    pub word: Vec<EdgeId>,
    pub mass: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Weighted mean and its standard error from `Σω f`, `Σω² f`, `Σω² f²`, `Σω²`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments<T> {
    s1: T,
    q1: T,
    q2: T,
}

impl<T: Scalar> Moments<T> {
    fn add(&mut self, w: T, f: T) {
        self.s1 += w * f;
        self.q1 += w * w * f;
        self.q2 += w * w * f * f;
    }

    fn merge(&mut self, o: &Self) {
        self.s1 += o.s1;
        self.q1 += o.q1;
        self.q2 += o.q2;
    }

    /// `sqrt(Σ ω² (f - m)²)`.
    fn std_error(&self, sum_w2: T) -> T {
        let m = self.s1;
        (self.q2 - T::lit(2.0) * m * self.q1 + m * m * sum_w2).max(T::zero()).sqrt()
    }
}

fn sum_w2<T: Scalar>(mu: &ParticleMeasure<T>) -> T {
    mu.particles().iter().map(|p| p.weight * p.weight).sum()
}

/// `∏_k p_{e_k}(x_k)` along `word` from the particle, zero when the particle
/// is not in `K_{i(e_1)}`; returns the product and the final state.
fn path_weight<T: Scalar>(sys: &MarkovSystem<T>, p: &Particle<T>, word: &[EdgeId]) -> Result<(T, Point<T>)> {
    let g = sys.digraph();
    if let Some(&e) = word.first() {
        if g.source(e) != p.vertex {
            return Ok((T::zero(), p.point.clone()));
        }
    }
    let mut f = T::one();
    let mut x = p.point.clone();
    for &e in word {
        f *= sys.prob(e, g.source(e), &x)?;
        x = sys.apply_map(e, &x)?;
    }
    Ok((f, x))
}

/// `M([word]) = ∫ ∏ p_{e_k}(w_{e_{k-1}} ∘ ... ∘ w_{e_1} x) dμ(x)`.
pub fn cylinder_mass<T: Scalar>(sys: &MarkovSystem<T>, mu: &ParticleMeasure<T>, word: &[EdgeId]) -> Result<CylinderEstimate> {
    sys.digraph().check_path(word)?;
    let parts = mu
        .particles()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut m = Moments::default();
            for p in chunk {
                m.add(p.weight, path_weight(sys, p, word)?.0);
            }
            Ok(m)
        })
        .collect::<Result<Vec<Moments<T>>>>()?;
    let mut total = Moments::default();
    parts.iter().for_each(|m| total.merge(m));
    Ok(CylinderEstimate {
        word: word.to_vec(),
        mass: total.s1.as_f64(),
        std_error: total.std_error(sum_w2(mu)).as_f64(),
        n_samples: mu.len(),
    })
}

/// Every admissible word up to a fixed length, as a prefix tree.
struct WordTree {
    words: Vec<Vec<EdgeId>>,
    children: Vec<Vec<(EdgeId, usize)>>,
    index: HashMap<Vec<EdgeId>, usize>,
}

impl WordTree {
    fn new<T: Scalar>(sys: &MarkovSystem<T>, max_len: usize) -> Result<Self> {
        let g = sys.digraph();
        let mut words = vec![Vec::new()];
        let mut children = vec![Vec::new()];
        let mut k = 0;
        while k < words.len() {
            if words[k].len() < max_len {
                let next: Vec<EdgeId> = match words[k].last() {
                    None => (0..g.edge_count()).collect(),
                    Some(&e) => g.out_edges(g.target(e)).to_vec(),
                };
                for e in next {
                    if words.len() >= DEFAULT_WORD_CAP {
                        return Err(Error::ResourceLimit { cap: DEFAULT_WORD_CAP });
                    }
                    let mut w = words[k].clone();
                    w.push(e);
                    children[k].push((e, words.len()));
                    words.push(w);
                    children.push(Vec::new());
                }
            }
            k += 1;
        }
        let index = words.iter().enumerate().map(|(k, w)| (w.clone(), k)).collect();
        Ok(Self { words, children, index })
    }
}

/// Cylinder masses of every word in the tree, computed on shared samples.
fn tree_masses<T: Scalar>(sys: &MarkovSystem<T>, mu: &ParticleMeasure<T>, tree: &WordTree) -> Result<Vec<Moments<T>>> {
    fn visit<T: Scalar>(
        sys: &MarkovSystem<T>,
        tree: &WordTree,
        node: usize,
        vertex: usize,
        x: &Point<T>,
        w: T,
        f: T,
        acc: &mut [Moments<T>],
    ) -> Result<()> {
        acc[node].add(w, f);
        let kids = &tree.children[node];
        if kids.is_empty() || f == T::zero() {
            return Ok(());
        }
        let g = sys.digraph();
        let out = g.out_edges(vertex);
        let probs = sys.probs_at(vertex, x)?;
        for &(e, child) in kids {
            if let Some(pos) = out.iter().position(|&o| o == e) {
                let y = sys.apply_map(e, x)?;
                visit(sys, tree, child, g.target(e), &y, w, f * probs[pos], acc)?;
            }
        }
        Ok(())
    }
    let parts = mu
        .particles()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![Moments::default(); tree.words.len()];
            for p in chunk {
                visit(sys, tree, 0, p.vertex, &p.point, p.weight, T::one(), &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![Moments::default(); tree.words.len()];
    for part in &parts {
        for (t, m) in total.iter_mut().zip(part) {
            t.merge(m);
        }
    }
    Ok(total)
}

/// Residuals of the two cylinder identities for all words up to `max_len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub max_len: usize,
    pub words_checked: usize,
    /// `max |Σ_e M([w e]) - M([w])|`.
    pub additivity_max_residual: f64,
    /// `max |Σ_e M([e w]) - M([w])|`.
    pub stationarity_max_residual: f64,
    /// Largest stationarity residual in units of its standard error.
    pub stationarity_max_z: f64,
    pub stationarity_worst_word: Option<String>,
}

pub fn cylinder_consistency_check<T: Scalar>(
    sys: &MarkovSystem<T>,
    mu: &ParticleMeasure<T>,
    max_len: usize,
) -> Result<ConsistencyReport> {
    if max_len < 1 {
        return Err(Error::InvalidParameter("max_len must be at least 1".into()));
    }
    let tree = WordTree::new(sys, max_len)?;
    let masses = tree_masses(sys, mu, &tree)?;
    let w2 = sum_w2(mu);
    let g = sys.digraph();
    let mut additivity = 0.0f64;
    let mut stationarity = 0.0f64;
    let mut max_z = 0.0f64;
    let mut worst = None;
    let mut checked = 0;
    for (k, w) in tree.words.iter().enumerate() {
        if w.len() >= max_len {
            continue;
        }
        checked += 1;
        let m = masses[k].s1;
        let right: T = tree.children[k].iter().map(|&(_, c)| masses[c].s1).sum();
        additivity = additivity.max((right - m).abs().as_f64());

        let sources: Vec<EdgeId> = match w.first() {
            None => (0..g.edge_count()).collect(),
            Some(&f) => g.in_edges(g.source(f)).to_vec(),
        };
        let mut left = T::zero();
        let mut var = masses[k].std_error(w2).powi(2);
        for e in sources {
            let mut ew = vec![e];
            ew.extend_from_slice(w);
            let c = tree.index[&ew];
            left += masses[c].s1;
            var += masses[c].std_error(w2).powi(2);
        }
        let res = (left - m).abs().as_f64();
        let se = var.sqrt().as_f64();
        if res > stationarity {
            stationarity = res;
        }
        let z = if se > 0.0 { res / se } else if res > 0.0 { f64::INFINITY } else { 0.0 };
        if z > max_z || worst.is_none() {
            max_z = max_z.max(z);
            worst = Some(crate::system::format_word(&w.iter().map(|&e| e as u32).collect::<Vec<_>>()));
        }
    }
    Ok(ConsistencyReport {
        max_len,
        words_checked: checked,
        additivity_max_residual: additivity,
        stationarity_max_residual: stationarity,
        stationarity_max_z: max_z,
        stationarity_worst_word: worst,
    })
}

/// `h = -Σ_e ∫_{K_{i(e)}} p_e log p_e dμ`.
pub fn entropy<T: Scalar>(sys: &MarkovSystem<T>, mu: &ParticleMeasure<T>) -> Result<T> {
    let h = mu.integrate(|p| {
        let probs = sys.probs_at(p.vertex, &p.point)?;
        Ok(probs.into_iter().filter(|q| *q > T::zero()).map(|q| q * q.ln()).sum::<T>())
    })?;
    Ok(-h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalReport {
    pub word_len: usize,
    pub n_words: usize,
    pub evaluated: usize,
    /// Words with estimated mass below `mass_floor` standard errors.
    pub skipped: usize,
    pub mass_floor: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
}

/// Weighted mean that returns the common value exactly when all values with
/// positive weight coincide.
fn weighted_mean<T: Scalar>(pairs: &[(T, T)]) -> Option<T> {
    let live: Vec<&(T, T)> = pairs.iter().filter(|(w, _)| *w > T::zero()).collect();
    let first = live.first()?.1;
    if live.iter().all(|(_, v)| *v == first) {
        return Some(first);
    }
    let total: T = live.iter().map(|(w, _)| *w).sum();
    Some(live.iter().map(|(w, v)| *w * *v).sum::<T>() / total)
}

/// Compares the empirical next-edge law `M([w e]) / M([w])` with `p_e` at the
/// coded point of `w`, for words `w` drawn from `M`.
pub fn conditional_edge_check<T: Scalar>(
    sys: &MarkovSystem<T>,
    mu: &ParticleMeasure<T>,
    word_len: usize,
    n_words: usize,
    seed: u64,
    mass_floor: f64,
) -> Result<ConditionalReport> {
    if word_len < 1 || n_words < 1 {
        return Err(Error::InvalidParameter("word length and word count must be positive".into()));
    }
    let g = sys.digraph();
    let words = sample_words(sys, mu, word_len, n_words, seed)?;
    let w2 = sum_w2(mu);
    let devs = words
        .par_iter()
        .map(|(_, w, _)| {
            let mut m = Moments::default();
            let mut weighted = Vec::with_capacity(mu.len());
            for p in mu.particles() {
                let (f, y) = path_weight(sys, p, w)?;
                m.add(p.weight, f);
                weighted.push((p.weight * f, y));
            }
            let mass = m.s1;
            if mass <= T::zero() || mass.as_f64() < mass_floor * m.std_error(w2).as_f64() {
                return Ok(None);
            }
            let v = g.target(w[w.len() - 1]);
            let z = code_suffix(sys, w, sys.base_points(), w.len())?;
            let at_z = sys.probs_at(v, &z)?;
            let per_particle = weighted
                .iter()
                .filter(|(wt, _)| *wt > T::zero())
                .map(|(wt, y)| Ok((*wt, sys.probs_at(v, y)?)))
                .collect::<Result<Vec<_>>>()?;
            let mut worst = 0.0f64;
            for (k, pz) in at_z.iter().enumerate() {
                let pairs: Vec<(T, T)> = per_particle.iter().map(|(wt, ps)| (*wt, ps[k])).collect();
                let cond = weighted_mean(&pairs).expect("positive mass");
                worst = worst.max((cond - *pz).abs().as_f64());
            }
            Ok(Some(worst))
        })
        .collect::<Result<Vec<_>>>()?;
    let used: Vec<f64> = devs.iter().flatten().copied().collect();
    Ok(ConditionalReport {
        word_len,
        n_words,
        evaluated: used.len(),
        skipped: n_words - used.len(),
        mass_floor,
        max_deviation: used.iter().copied().fold(0.0, f64::max),
        mean_deviation: if used.is_empty() { f64::NAN } else { used.iter().sum::<f64>() / used.len() as f64 },
    })
}

/// `u = log p_{next}(F(past))` for `word = past · next`, `-∞` off the
/// admissible words. An empty past codes to the base point of `i(next)`.
pub fn energy_eval<T: Scalar>(sys: &MarkovSystem<T>, word: &[EdgeId]) -> Result<T> {
    let g = sys.digraph();
    let Some((&next, past)) = word.split_last() else {
        return Ok(T::neg_infinity());
    };
    if !g.is_path(word) {
        return Ok(T::neg_infinity());
    }
    let z = if past.is_empty() {
        sys.base_point(g.source(next)).clone()
    } else {
        code_suffix(sys, past, sys.base_points(), past.len())?
    };
    Ok(sys.prob(next, g.source(next), &z)?.ln())
}
