//! Forward simulation of the chain and path statistics.

use rand::Rng;
use rayon::prelude::*;

use crate::graph::EdgeId;
use crate::operator::{Particle, ParticleMeasure};
use crate::rng;
use crate::system::{MarkovSystem, Point};
use crate::{Error, Result, Scalar};

const TAG_TRAJECTORY: u64 = 0x5452;

/// A realized path `x, w_{σ1}x, w_{σ2}w_{σ1}x, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub start: Point<T>,
    pub edges: Vec<EdgeId>,
    /// `states[0] = start`, `states[k+1] = w_{edges[k]}(states[k])`.
    pub states: Vec<Point<T>>,
    /// `p_{edges[k]}(states[k])`.
    pub step_probs: Vec<T>,
    pub seed: u64,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// One step from `x`: draws an outgoing edge by inverse CDF in edge-id order.
pub fn step<T: Scalar, R: Rng + ?Sized>(sys: &MarkovSystem<T>, x: &Point<T>, rng: &mut R) -> Result<(EdgeId, Point<T>, T)> {
    let probs = sys.eval_probs(x)?;
    let weights: Vec<T> = probs.iter().map(|&(_, p)| p).collect();
    let (e, p) = probs[rng::weighted_index(rng, &weights)];
    Ok((e, sys.apply_map(e, x)?, p))
}

/// `n` steps from `x0`, reproducible from `seed`.
pub fn simulate<T: Scalar>(sys: &MarkovSystem<T>, x0: &Point<T>, n: usize, seed: u64) -> Result<Trajectory<T>> {
    run(sys, x0, n, seed, 0)
}

/// Independent trajectories, one derived stream per trajectory index.
pub fn simulate_many<T: Scalar>(sys: &MarkovSystem<T>, starts: &[Point<T>], n: usize, seed: u64) -> Result<Vec<Trajectory<T>>> {
    starts
        .par_iter()
        .enumerate()
        .map(|(k, x0)| run(sys, x0, n, seed, k as u64))
        .collect()
}

fn run<T: Scalar>(sys: &MarkovSystem<T>, x0: &Point<T>, n: usize, seed: u64, index: u64) -> Result<Trajectory<T>> {
    if n < 1 {
        return Err(Error::InvalidParameter("trajectory length must be at least 1".into()));
    }
    sys.vertex_of(x0)?;
    let mut r = rng::stream(seed, &[TAG_TRAJECTORY, index]);
    let mut states = Vec::with_capacity(n + 1);
    let mut edges = Vec::with_capacity(n);
    let mut step_probs = Vec::with_capacity(n);
    states.push(x0.clone());
    for k in 0..n {
        let (e, next, p) = step(sys, &states[k], &mut r).map_err(|err| Error::AtStep {
            step: k,
            source: Box::new(err),
        })?;
        edges.push(e);
        step_probs.push(p);
        states.push(next);
    }
    Ok(Trajectory {
        start: x0.clone(),
        edges,
        states,
        step_probs,
        seed,
    })
}

/// `(1/n) Σ_{k<n} f_{σ_{k+1}}(states[k])`.
pub fn birkhoff_average<T, F>(traj: &Trajectory<T>, f: F) -> Result<T>
where
    T: Scalar,
    F: Fn(EdgeId, &Point<T>) -> Result<T>,
{
    let mut acc = T::zero();
    for (k, (&e, x)) in traj.edges.iter().zip(&traj.states).enumerate() {
        acc += f(e, x).map_err(|err| Error::AtStep {
            step: k,
            source: Box::new(err),
        })?;
    }
    Ok(acc / T::from_count(traj.len()))
}

/// Equal-weight particles at `states[burn_in..n]`.
pub fn empirical_measure<T: Scalar>(sys: &MarkovSystem<T>, traj: &Trajectory<T>, burn_in: usize) -> Result<ParticleMeasure<T>> {
    let n = traj.len();
    if burn_in >= n {
        return Err(Error::InvalidParameter(format!("burn-in {burn_in} must be below the length {n}")));
    }
    let w = T::one() / T::from_count(n - burn_in);
    let particles = traj.states[burn_in..n]
        .iter()
        .map(|x| {
            Ok(Particle {
                vertex: sys.vertex_of(x)?,
                point: x.clone(),
                weight: w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ParticleMeasure::from_particles(particles)
}

/// `(1/n) log P_x(cylinder of the realized path)`.
pub fn log_cylinder_rate<T: Scalar>(traj: &Trajectory<T>) -> T {
    traj.step_probs.iter().map(|p| p.ln()).sum::<T>() / T::from_count(traj.len().max(1))
}
