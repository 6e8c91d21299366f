//! The Markov operator `U f = Σ p_e · f∘w_e`, its adjoint on particle
//! measures, and invariant-measure estimation.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::expr::Expression;
use crate::graph::VertexId;
use crate::rng::{self, CHUNK};
use crate::system::{Backend, MarkovSystem, Point};
use crate::{Error, Result, Scalar};

const TAG_SPLIT: u64 = 0x5350;
const TAG_RESAMPLE: u64 = 0x5253;

/// Absolute tolerance on the total mass of a particle measure.
pub fn mass_tol<T: Scalar>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(1024.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle<T> {
    pub point: Point<T>,
    pub vertex: VertexId,
    pub weight: T,
}

/// Weighted, vertex-tagged point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleMeasure<T> {
    particles: Vec<Particle<T>>,
    pub generation: usize,
}

impl<T: Scalar> ParticleMeasure<T> {
    /// Checks that weights are finite, nonnegative and sum to one.
    pub fn from_particles(particles: Vec<Particle<T>>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidParameter("a particle measure needs at least one particle".into()));
        }
        if let Some(p) = particles.iter().find(|p| !(p.weight >= T::zero() && p.weight.is_finite())) {
            return Err(Error::InvalidParameter(format!("particle weight {} is not a nonnegative number", p.weight)));
        }
        let m = Self { particles, generation: 0 };
        let total = m.total_mass();
        if (total - T::one()).abs() > mass_tol::<T>() {
            return Err(Error::InvalidParameter(format!("particle weights sum to {total}")));
        }
        Ok(m)
    }

    /// Equal weights on `points`, tagged by region membership.
    pub fn equal_weight(sys: &MarkovSystem<T>, points: Vec<Point<T>>) -> Result<Self> {
        let w = T::one() / T::from_count(points.len().max(1));
        let particles = points
            .into_iter()
            .map(|point| {
                Ok(Particle {
                    vertex: sys.vertex_of(&point)?,
                    point,
                    weight: w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_particles(particles)
    }

    pub fn point_mass(sys: &MarkovSystem<T>, x: Point<T>) -> Result<Self> {
        Self::equal_weight(sys, vec![x])
    }

    /// Equal mass at the base points `x_i`.
    pub fn at_base_points(sys: &MarkovSystem<T>) -> Result<Self> {
        Self::equal_weight(sys, sys.base_points().to_vec())
    }

    pub fn particles(&self) -> &[Particle<T>] {
        &self.particles
    }

    pub fn into_particles(self) -> Vec<Particle<T>> {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// Mass carried by each vertex.
    pub fn vertex_masses(&self, n_vertices: usize) -> Vec<T> {
        let mut m = vec![T::zero(); n_vertices];
        for p in &self.particles {
            m[p.vertex] += p.weight;
        }
        m
    }

    /// `∫ f dν`, evaluated in parallel with a fixed summation order.
    pub fn integrate<F>(&self, f: F) -> Result<T>
    where
        F: Fn(&Particle<T>) -> Result<T> + Sync,
    {
        let partial = self
            .particles
            .par_chunks(CHUNK)
            .map(|chunk| chunk.iter().map(|p| Ok(p.weight * f(p)?)).sum::<Result<T>>())
            .collect::<Result<Vec<T>>>()?;
        Ok(partial.into_iter().sum())
    }

    /// Cumulative weights for sampling particles by weight.
    pub fn sampler(&self) -> WeightedSampler<T> {
        WeightedSampler::new(self.particles.iter().map(|p| p.weight))
    }
}

/// Inverse-CDF sampler over a fixed weight vector.
#[derive(Debug, Clone)]
pub struct WeightedSampler<T> {
    cum: Vec<T>,
}

impl<T: Scalar> WeightedSampler<T> {
    pub fn new(weights: impl IntoIterator<Item = T>) -> Self {
        let mut acc = T::zero();
        let cum = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cum }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cum.last().expect("non-empty sampler");
        let u = rng::uniform::<T, R>(rng) * total;
        self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1)
    }
}

/// Test functions used to compare measures.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction<T> {
    /// Coordinate `index`, clipped to `[-clip, clip]`.
    Coord { index: usize, clip: T },
    /// `max(0, 1 - |x_index - center| / half_width)`.
    Tent { index: usize, center: T, half_width: T },
    /// Indicator of the region of a vertex.
    Vertex(VertexId),
    /// Indicator of words ending with the given symbols.
    Suffix(Vec<u32>),
    Expr(Expression),
}

impl<T: Scalar> TestFunction<T> {
    pub fn name(&self) -> String {
        match self {
            TestFunction::Coord { index, .. } => format!("coord{index}"),
            TestFunction::Tent { index, center, .. } => format!("tent{index}@{center}"),
            TestFunction::Vertex(v) => format!("vertex{}", v + 1),
            TestFunction::Suffix(s) => format!("suffix{}", crate::system::format_word(s)),
            TestFunction::Expr(e) => e.source().to_string(),
        }
    }

    pub fn eval(&self, sys: &MarkovSystem<T>, x: &Point<T>) -> Result<T> {
        let indicator = |b: bool| if b { T::one() } else { T::zero() };
        match self {
            TestFunction::Coord { index, clip } => Ok(coord(x, *index)?.max(-*clip).min(*clip)),
            TestFunction::Tent {
                index,
                center,
                half_width,
            } => Ok((T::one() - (coord(x, *index)? - *center).abs() / *half_width).max(T::zero())),
            TestFunction::Vertex(v) => Ok(indicator(sys.in_region(*v, x)?)),
            TestFunction::Suffix(s) => Ok(indicator(x.symbols().ends_with(s))),
            TestFunction::Expr(e) => e.eval(&x.bindings()),
        }
    }
}

fn coord<T: Scalar>(x: &Point<T>, index: usize) -> Result<T> {
    x.coords()
        .get(index)
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("test function reads coordinate {index} of {x}")))
}

/// Clipped coordinates, tents at dyadic centers on three levels, and vertex
/// indicators (Euclid); last-one and last-two symbol indicators plus vertex
/// indicators (words).
pub fn default_panel<T: Scalar>(sys: &MarkovSystem<T>) -> Vec<TestFunction<T>> {
    let mut panel = Vec::new();
    match sys.backend() {
        Backend::Euclid { working_box, .. } => {
            for (index, [lo, hi]) in working_box.iter().enumerate() {
                let clip = lo.abs().max(hi.abs());
                panel.push(TestFunction::Coord { index, clip });
                let width = *hi - *lo;
                for level in 1..=3 {
                    let cells = 1usize << level;
                    let step = width / T::from_count(cells);
                    for k in (1..cells).step_by(2) {
                        panel.push(TestFunction::Tent {
                            index,
                            center: *lo + step * T::from_count(k),
                            half_width: step,
                        });
                    }
                }
            }
        }
        Backend::Word { .. } => {
            let g = sys.digraph();
            for e in 0..g.edge_count() {
                panel.push(TestFunction::Suffix(vec![e as u32]));
            }
            for e in 0..g.edge_count() {
                for &f in g.out_edges(g.target(e)) {
                    panel.push(TestFunction::Suffix(vec![e as u32, f as u32]));
                }
            }
        }
    }
    panel.extend((0..sys.digraph().vertex_count()).map(TestFunction::Vertex));
    panel
}

/// `(U f)(x) = Σ_{i(e) = vertex(x)} p_e(x) f(w_e(x))`.
pub fn apply_u<T, F>(sys: &MarkovSystem<T>, f: F, x: &Point<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(&Point<T>) -> Result<T>,
{
    let v = sys.vertex_of(x)?;
    let probs = sys.probs_at(v, x)?;
    let mut acc = T::zero();
    for (&e, p) in sys.digraph().out_edges(v).iter().zip(probs) {
        acc += p * f(&sys.apply_map(e, x)?)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Every particle splits along all outgoing edges; when the result has
    /// more than `budget` particles, seeded systematic resampling brings it
    /// back to `budget` equal-weight particles.
    Split { seed: u64 },
    /// `budget` independent one-step draws from the measure.
    Resample { seed: u64 },
}

/// `U* ν`: one step of the chain applied to a particle measure.
pub fn apply_u_star<T: Scalar>(
    sys: &MarkovSystem<T>,
    nu: &ParticleMeasure<T>,
    budget: usize,
    policy: Policy,
) -> Result<ParticleMeasure<T>> {
    if budget < 1 {
        return Err(Error::InvalidParameter("particle budget must be at least 1".into()));
    }
    let generation = nu.generation as u64;
    let particles = match policy {
        Policy::Split { seed } => {
            let children = nu
                .particles
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut out = Vec::with_capacity(chunk.len() * 2);
                    for p in chunk {
                        split_into(sys, p, &mut out)?;
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?
                .concat();
            if children.len() > budget {
                let mut r = rng::stream(seed, &[TAG_SPLIT, generation]);
                systematic(children, budget, &mut r)
            } else {
                children
            }
        }
        Policy::Resample { seed } => {
            let sampler = nu.sampler();
            let w = T::one() / T::from_count(budget);
            let n_chunks = budget.div_ceil(CHUNK);
            (0..n_chunks)
                .into_par_iter()
                .map(|c| {
                    let mut r = rng::stream(seed, &[TAG_RESAMPLE, generation, c as u64]);
                    let len = CHUNK.min(budget - c * CHUNK);
                    (0..len)
                        .map(|_| {
                            let p = &nu.particles[sampler.sample(&mut r)];
                            let probs = sys.probs_at(p.vertex, &p.point)?;
                            let e = sys.digraph().out_edges(p.vertex)[rng::weighted_index(&mut r, &probs)];
                            Ok(Particle {
                                point: sys.apply_map(e, &p.point)?,
                                vertex: sys.digraph().target(e),
                                weight: w,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?
                .concat()
        }
    };
    Ok(ParticleMeasure {
        particles,
        generation: nu.generation + 1,
    })
}

fn split_into<T: Scalar>(sys: &MarkovSystem<T>, p: &Particle<T>, out: &mut Vec<Particle<T>>) -> Result<()> {
    let probs = sys.probs_at(p.vertex, &p.point)?;
    for (&e, q) in sys.digraph().out_edges(p.vertex).iter().zip(probs) {
        out.push(Particle {
            point: sys.apply_map(e, &p.point)?,
            vertex: sys.digraph().target(e),
            weight: p.weight * q,
        });
    }
    Ok(())
}

/// Low-variance resampling: `n` equally spaced quantiles with one random
/// offset, taken over a seeded shuffle of the particles. Without the shuffle
/// the stride aliases with the sibling layout of split children and keeps
/// the same edge from every parent.
fn systematic<T: Scalar, R: Rng + ?Sized>(mut particles: Vec<Particle<T>>, n: usize, rng: &mut R) -> Vec<Particle<T>> {
    particles.shuffle(rng);
    let total: T = particles.iter().map(|p| p.weight).sum();
    let stride = total / T::from_count(n);
    let offset = rng::uniform::<T, R>(rng);
    let w = T::one() / T::from_count(n);
    let mut out = Vec::with_capacity(n);
    let mut acc = particles[0].weight;
    let mut k = 0;
    for j in 0..n {
        let u = (offset + T::from_count(j)) * stride;
        while acc <= u && k + 1 < particles.len() {
            k += 1;
            acc += particles[k].weight;
        }
        out.push(Particle {
            weight: w,
            ..particles[k].clone()
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Split,
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InvariantConfig {
    pub n_particles: usize,
    pub n_iters: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl InvariantConfig {
    pub fn new(n_particles: usize, n_iters: usize, seed: u64) -> Self {
        Self {
            n_particles,
            n_iters,
            seed,
            scheme: Scheme::Split,
        }
    }
}

/// Panel integrals recorded along the iteration `ν_{k+1} = U* ν_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub names: Vec<String>,
    /// `integrals[k][j]`: panel function `j` against `ν_k`, `k = 0..=n_iters`.
    pub integrals: Vec<Vec<f64>>,
    /// Sup over the panel of `|∫f dν_k - ∫f dν_{k-1}|`, `k = 1..=n_iters`.
    pub sup_change: Vec<f64>,
    pub moments: Vec<f64>,
    pub final_sup_change: f64,
}

impl ConvergenceTrace {
    pub fn final_integrals(&self) -> &[f64] {
        self.integrals.last().map_or(&[], Vec::as_slice)
    }
}

/// Iterates `U*` from equal mass on the base points.
pub fn estimate_invariant<T: Scalar>(
    sys: &MarkovSystem<T>,
    cfg: &InvariantConfig,
    panel: &[TestFunction<T>],
) -> Result<(ParticleMeasure<T>, ConvergenceTrace)> {
    if cfg.n_particles < 1 || cfg.n_iters < 1 {
        return Err(Error::InvalidParameter("need at least one particle and one iteration".into()));
    }
    let policy = match cfg.scheme {
        Scheme::Split => Policy::Split { seed: cfg.seed },
        Scheme::Resample => Policy::Resample { seed: cfg.seed },
    };
    let mut nu = ParticleMeasure::at_base_points(sys)?;
    let mut integrals = vec![panel_integrals(sys, &nu, panel)?];
    let mut moments = vec![moment_report(sys, &nu).as_f64()];
    let mut sup_change = Vec::with_capacity(cfg.n_iters);
    for _ in 0..cfg.n_iters {
        nu = apply_u_star(sys, &nu, cfg.n_particles, policy)?;
        let row = panel_integrals(sys, &nu, panel)?;
        let prev = integrals.last().expect("initial row");
        sup_change.push(row.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        integrals.push(row);
        moments.push(moment_report(sys, &nu).as_f64());
    }
    let trace = ConvergenceTrace {
        names: panel.iter().map(TestFunction::name).collect(),
        final_sup_change: *sup_change.last().expect("at least one iteration"),
        integrals,
        sup_change,
        moments,
    };
    Ok((nu, trace))
}

/// `∫ f dν` for every panel function.
pub fn panel_integrals<T: Scalar>(
    sys: &MarkovSystem<T>,
    nu: &ParticleMeasure<T>,
    panel: &[TestFunction<T>],
) -> Result<Vec<f64>> {
    let partial = nu
        .particles
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![T::zero(); panel.len()];
            for p in chunk {
                for (a, f) in acc.iter_mut().zip(panel) {
                    *a += p.weight * f.eval(sys, &p.point)?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![T::zero(); panel.len()];
    for row in partial {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
    }
    Ok(total.into_iter().map(Scalar::as_f64).collect())
}

pub enum Distance<'a, T> {
    /// Largest difference of panel integrals.
    Panel(&'a [TestFunction<T>]),
    /// 1-Wasserstein distance on the line.
    W1,
}

pub fn weakstar_distance<T: Scalar>(
    sys: &MarkovSystem<T>,
    a: &ParticleMeasure<T>,
    b: &ParticleMeasure<T>,
    mode: &Distance<'_, T>,
) -> Result<f64> {
    match mode {
        Distance::Panel(panel) => {
            let ia = panel_integrals(sys, a, panel)?;
            let ib = panel_integrals(sys, b, panel)?;
            Ok(ia.iter().zip(&ib).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        }
        Distance::W1 => {
            if sys.dim() != Some(1) {
                return Err(Error::InvalidParameter("W1 distance needs a one-dimensional Euclidean system".into()));
            }
            Ok(wasserstein_1d(
                &a.particles.iter().map(|p| (p.point.first().as_f64(), p.weight.as_f64())).collect::<Vec<_>>(),
                &b.particles.iter().map(|p| (p.point.first().as_f64(), p.weight.as_f64())).collect::<Vec<_>>(),
            ))
        }
    }
}

/// `∫ |F_a - F_b| dx` for two weighted samples on the line.
pub fn wasserstein_1d(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut merged: Vec<(f64, f64)> = a.iter().copied().chain(b.iter().map(|&(x, w)| (x, -w))).collect();
    merged.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut diff = 0.0;
    let mut total = 0.0;
    for k in 0..merged.len() {
        diff += merged[k].1;
        if let Some(next) = merged.get(k + 1) {
            total += diff.abs() * (next.0 - merged[k].0);
        }
    }
    total
}

/// `Σ_i ∫_{K_i} d(x, x_i) dν(x)`.
pub fn moment_report<T: Scalar>(sys: &MarkovSystem<T>, nu: &ParticleMeasure<T>) -> T {
    nu.particles
        .iter()
        .map(|p| p.weight * sys.distance(&p.point, sys.base_point(p.vertex)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{fixture, fixtures};
    use approx::assert_abs_diff_eq;

    fn fc3() -> MarkovSystem<f64> {
        fixture("fc3").unwrap()
    }

    fn state(i: usize) -> Point<f64> {
        Point::scalar(i as f64)
    }

    #[test]
    fn u_of_constant_and_indicators() {
        let s = fc3();
        for i in 1..=3 {
            assert_eq!(apply_u(&s, |_| Ok(1.0), &state(i)).unwrap(), 1.0);
            for j in 1..=3 {
                let f = |y: &Point<f64>| Ok(if y.first() == j as f64 { 1.0 } else { 0.0 });
                let got = apply_u(&s, f, &state(i)).unwrap();
                assert_eq!(got, fixtures::FC3_MATRIX[i - 1][j - 1]);
            }
        }
        let sc = fixture::<f64>("sincos").unwrap();
        assert_eq!(apply_u(&sc, |y| Ok(y.first()), &Point::scalar(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn one_step_split_from_point_mass() {
        let s = fc3();
        for i in 1..=3 {
            let nu = ParticleMeasure::point_mass(&s, state(i)).unwrap();
            let out = apply_u_star(&s, &nu, 3, Policy::Split { seed: 0 }).unwrap();
            let m = out.vertex_masses(3);
            for j in 0..3 {
                assert_eq!(m[j], fixtures::FC3_MATRIX[i - 1][j]);
            }
        }
    }

    #[test]
    fn uniform_is_stationary_for_fc3() {
        let s = fc3();
        let nu = ParticleMeasure::equal_weight(&s, (1..=3).map(state).collect()).unwrap();
        let out = apply_u_star(&s, &nu, 100, Policy::Split { seed: 0 }).unwrap();
        for m in out.vertex_masses(3) {
            assert_abs_diff_eq!(m, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn split_iteration_matches_matrix_powers() {
        let s = fc3();
        let mut nu = ParticleMeasure::point_mass(&s, state(1)).unwrap();
        let mut v = [1.0, 0.0, 0.0];
        for _ in 0..10 {
            nu = apply_u_star(&s, &nu, usize::MAX, Policy::Split { seed: 0 }).unwrap();
            let mut next = [0.0; 3];
            for i in 0..3 {
                for j in 0..3 {
                    next[j] += v[i] * fixtures::FC3_MATRIX[i][j];
                }
            }
            v = next;
            for (a, b) in nu.vertex_masses(3).iter().zip(v) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn duality_and_mass_conservation() {
        for name in ["sincos", "example1", "sierpinski", "gm-golden"] {
            let s = fixture::<f64>(name).unwrap();
            let panel = default_panel(&s);
            let (nu, _) = estimate_invariant(&s, &InvariantConfig::new(300, 3, 7), &panel).unwrap();
            let out = apply_u_star(&s, &nu, usize::MAX, Policy::Split { seed: 1 }).unwrap();
            assert_abs_diff_eq!(out.total_mass(), 1.0, epsilon = 1e-12);
            for p in out.particles() {
                assert!(s.in_region(p.vertex, &p.point).unwrap(), "{name}: tag mismatch");
            }
            for f in &panel {
                let lhs = out.integrate(|p| f.eval(&s, &p.point)).unwrap();
                let rhs = nu.integrate(|p| apply_u(&s, |y| f.eval(&s, y), &p.point)).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9, "{name}/{}: {lhs} vs {rhs}", f.name());
            }
        }
    }

    #[test]
    fn budget_is_respected() {
        let s = fixture::<f64>("sincos").unwrap();
        let nu = ParticleMeasure::at_base_points(&s).unwrap();
        assert!(apply_u_star(&s, &nu, 0, Policy::Split { seed: 0 }).is_err());
        let mut m = nu;
        for _ in 0..12 {
            m = apply_u_star(&s, &m, 100, Policy::Split { seed: 3 }).unwrap();
            assert!(m.len() <= 100);
            assert_abs_diff_eq!(m.total_mass(), 1.0, epsilon = 1e-12);
        }
        let r = apply_u_star(&s, &m, 77, Policy::Resample { seed: 3 }).unwrap();
        assert_eq!(r.len(), 77);
        assert_abs_diff_eq!(r.total_mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fc3_invariant_is_uniform() {
        let s = fc3();
        let panel = default_panel(&s);
        let (nu, trace) = estimate_invariant(&s, &InvariantConfig::new(10_000, 100, 11), &panel).unwrap();
        for m in nu.vertex_masses(3) {
            assert!((m - 1.0 / 3.0).abs() < 1e-2, "{m}");
        }
        assert_eq!(trace.integrals.len(), 101);
    }

    #[test]
    fn identity_chain_stays_put() {
        let s = fixture::<f64>("identity3").unwrap();
        let mut parts = s.into_parts();
        parts.base_points = vec![state(1), state(1), state(1)];
        parts.base_points[1] = state(2);
        parts.base_points[2] = state(3);
        let s = MarkovSystem::new(parts).unwrap();
        let nu = ParticleMeasure::point_mass(&s, state(1)).unwrap();
        let mut m = nu.clone();
        for _ in 0..20 {
            m = apply_u_star(&s, &m, 10, Policy::Split { seed: 0 }).unwrap();
        }
        assert_eq!(m.particles(), nu.particles());
    }

    #[test]
    fn w1_examples() {
        let s = fixture::<f64>("sincos").unwrap();
        let at = |xs: &[f64]| ParticleMeasure::equal_weight(&s, xs.iter().map(|&x| Point::scalar(x)).collect()).unwrap();
        let d = |a: &ParticleMeasure<f64>, b: &ParticleMeasure<f64>| weakstar_distance(&s, a, b, &Distance::W1).unwrap();
        assert_eq!(d(&at(&[0.0, 1.0, 3.0]), &at(&[0.0, 1.0, 3.0])), 0.0);
        assert_eq!(d(&at(&[0.0]), &at(&[1.0])), 1.0);
        assert_eq!(d(&at(&[0.0, 1.0]), &at(&[0.5])), 0.5);
        let sier = fixture::<f64>("sierpinski").unwrap();
        let nu = ParticleMeasure::at_base_points(&sier).unwrap();
        assert!(weakstar_distance(&sier, &nu, &nu, &Distance::W1).is_err());
        assert_eq!(weakstar_distance(&sier, &nu, &nu, &Distance::Panel(&default_panel(&sier))).unwrap(), 0.0);
    }

    #[test]
    fn moments_vanish_at_base_points() {
        for (_, s) in crate::system::builtin_fixtures::<f64>() {
            let nu = ParticleMeasure::at_base_points(&s).unwrap();
            assert_eq!(moment_report(&s, &nu), 0.0);
        }
    }

    #[test]
    fn systematic_keeps_heavy_particles() {
        let s = fc3();
        let particles = vec![
            Particle { point: state(1), vertex: 0, weight: 0.5 },
            Particle { point: state(2), vertex: 1, weight: 0.25 },
            Particle { point: state(3), vertex: 2, weight: 0.25 },
        ];
        let mut r = rng::stream(5, &[]);
        let out = systematic(particles, 4, &mut r);
        let m = ParticleMeasure::from_particles(out).unwrap().vertex_masses(3);
        assert_eq!(m, vec![0.5, 0.25, 0.25]);
        let _ = s;
    }
}
