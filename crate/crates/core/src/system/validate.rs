use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Backend, MarkovSystem, Point};
use crate::graph::{ValidationReport, VertexId};
use crate::rng::{self, CHUNK};
use crate::{Error, Result, Scalar};

const TAG_BOX: u64 = 0x6f7;
const TAG_VERTEX: u64 = 0x7e4;
const TAG_PAIRS: u64 = 0xc04;

fn chunks(n: usize) -> impl ParallelIterator<Item = (usize, std::ops::Range<usize>)> {
    (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(move |c| (c, c * CHUNK..((c + 1) * CHUNK).min(n)))
}

pub(super) fn validate_system<T: Scalar>(
    sys: &MarkovSystem<T>,
    n_samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let g = sys.digraph();
    let mut report = g.validate();
    let n_vertices = g.vertex_count();

    for v in 0..n_vertices {
        let x = sys.base_point(v);
        if let Point::Word(w) = x {
            if !g.is_path(&w.iter().map(|&e| e as usize).collect::<Vec<_>>()) {
                report.push("base-point", format!("base point of vertex {} is not a path", v + 1), Some(x.to_string()));
                continue;
            }
        }
        let hits = sys.regions_containing(x)?;
        if hits != [v] {
            report.push(
                "base-point",
                format!("base point of vertex {} lies in regions {:?}", v + 1, hits.iter().map(|h| h + 1).collect::<Vec<_>>()),
                Some(x.to_string()),
            );
        }
    }

    if matches!(sys.backend(), Backend::Euclid { .. }) {
        let parts: Vec<Result<ValidationReport>> = chunks(n_samples)
            .map(|(c, range)| {
                let mut rng = rng::stream(seed, &[TAG_BOX, c as u64]);
                let mut rep = ValidationReport::default();
                for _ in range {
                    let x = sys.sample_box(&mut rng).expect("euclid backend");
                    match sys.regions_containing(&x)?.len() {
                        1 => {}
                        0 => rep.tally("coverage", "sampled points outside every region", || x.to_string()),
                        _ => rep.tally("partition", "sampled points in more than one region", || x.to_string()),
                    }
                }
                Ok(rep)
            })
            .collect();
        for p in parts {
            report.merge(p?);
        }
    }

    if n_vertices == 0 {
        return Ok(report);
    }
    let parts: Vec<Result<ValidationReport>> = chunks(n_samples)
        .map(|(c, range)| {
            let mut rng = rng::stream(seed, &[TAG_VERTEX, c as u64]);
            let mut rep = ValidationReport::default();
            for k in range {
                let v = k % n_vertices;
                let x = sys.sample_in_vertex(v, &mut rng)?;
                check_point(sys, v, &x, &mut rep);
            }
            Ok(rep)
        })
        .collect();
    for p in parts {
        report.merge(p?);
    }
    Ok(report)
}

fn check_point<T: Scalar>(sys: &MarkovSystem<T>, v: VertexId, x: &Point<T>, rep: &mut ValidationReport) {
    let g = sys.digraph();
    for &e in g.out_edges(v) {
        match sys.apply_map(e, x) {
            Ok(y) => {
                let t = g.target(e);
                let ok = match sys.regions_containing(&y) {
                    Ok(hits) => hits == [t],
                    Err(_) => false,
                };
                if !ok {
                    rep.tally("map-target", "edge maps send points outside the region of their target", || {
                        format!("edge {e}: {x} -> {y}")
                    });
                }
            }
            Err(err) => rep.tally("map-domain", "map evaluation failed", || format!("edge {e} at {x}: {err}")),
        }
    }
    match sys.probs_at(v, x) {
        Ok(probs) => {
            if let Some((&e, &p)) = g.out_edges(v).iter().zip(&probs).find(|(_, &p)| p < sys.delta()) {
                rep.tally("positivity", "probabilities below delta", || format!("p_{e}({x}) = {p}"));
            }
            let sum: T = probs.iter().copied().sum();
            if (sum - T::one()).abs() > T::normalization_tol() {
                rep.tally("normalization", "outgoing probabilities do not sum to 1", || {
                    format!("vertex {} at {x}: sum = {sum}", v + 1)
                });
            }
        }
        Err(err) => rep.tally("prob-domain", "probability evaluation failed", || format!("{x}: {err}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairWitness {
    /// 1-based vertex.
    pub vertex: usize,
    pub x: String,
    pub y: String,
    pub ratio: f64,
}

/// Sampled lower estimate of the average contraction rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub sup_estimate: f64,
    /// Maximum ratio per vertex (1-based order), `None` if no pair was usable.
    pub per_vertex_max: Vec<Option<f64>>,
    pub worst_pairs: Vec<Option<PairWitness>>,
    pub pairs: usize,
    pub degenerate_pairs: usize,
    pub evaluation_errors: usize,
    /// `sup_estimate >= 1`.
    pub not_contractive: bool,
    pub claimed_rate: Option<f64>,
    pub exceeds_claim: Option<bool>,
}

#[derive(Default)]
struct ChunkMax<T> {
    per_vertex: Vec<Option<(T, Point<T>, Point<T>)>>,
    degenerate: usize,
    errors: usize,
}

fn sample_partner<T: Scalar, R: Rng>(sys: &MarkovSystem<T>, v: VertexId, x: &Point<T>, rng: &mut R) -> Result<Point<T>> {
    let local = rng.gen_bool(0.5);
    match (sys.backend(), x) {
        (Backend::Euclid { working_box, .. }, Point::Euclid(c)) if local => {
            let width = working_box.iter().map(|[lo, hi]| *hi - *lo).fold(T::zero(), T::max);
            let scale = width * T::lit(10f64.powf(-1.0 - 7.0 * rng.gen::<f64>()));
            let y = Point::Euclid(c.iter().map(|&ci| ci + scale * rng::uniform_in(rng, -T::one(), T::one())).collect());
            if sys.in_region(v, &y)? {
                return Ok(y);
            }
            sys.sample_in_vertex(v, rng)
        }
        (Backend::Word { depth }, Point::Word(w)) if local && w.len() > 1 => {
            let keep = rng.gen_range(1..w.len());
            let kept = &w[w.len() - keep..];
            let from = sys.digraph().source(kept[0] as usize);
            let mut y = sys.random_word_into(from, depth - keep, rng);
            y.extend_from_slice(kept);
            Ok(Point::Word(y))
        }
        _ => sys.sample_in_vertex(v, rng),
    }
}

/// `sum_e p_e(x) d(w_e x, w_e y) / d(x, y)` over the edges leaving `v`.
pub(crate) fn contraction_ratio<T: Scalar>(sys: &MarkovSystem<T>, v: VertexId, x: &Point<T>, y: &Point<T>) -> Result<T> {
    let d = sys.distance(x, y);
    let probs = sys.probs_at(v, x)?;
    let mut acc = T::zero();
    for (&e, p) in sys.digraph().out_edges(v).iter().zip(probs) {
        acc += p * sys.distance(&sys.apply_map(e, x)?, &sys.apply_map(e, y)?);
    }
    Ok(acc / d)
}

pub(super) fn estimate_contraction_rate<T: Scalar>(
    sys: &MarkovSystem<T>,
    n_pairs: usize,
    seed: u64,
) -> Result<ContractionReport> {
    let n_vertices = sys.digraph().vertex_count();
    if n_vertices == 0 {
        return Err(Error::InvalidParameter("empty system".into()));
    }
    let parts: Vec<Result<ChunkMax<T>>> = chunks(n_pairs)
        .map(|(c, range)| {
            let mut rng = rng::stream(seed, &[TAG_PAIRS, c as u64]);
            let mut acc = ChunkMax {
                per_vertex: vec![None; n_vertices],
                ..Default::default()
            };
            for k in range {
                let v = k % n_vertices;
                let x = sys.sample_in_vertex(v, &mut rng)?;
                let y = sample_partner(sys, v, &x, &mut rng)?;
                if sys.distance(&x, &y) == T::zero() {
                    acc.degenerate += 1;
                    continue;
                }
                match contraction_ratio(sys, v, &x, &y) {
                    Ok(r) => {
                        let slot = &mut acc.per_vertex[v];
                        if slot.as_ref().is_none_or(|(best, _, _)| r > *best) {
                            *slot = Some((r, x, y));
                        }
                    }
                    Err(_) => acc.errors += 1,
                }
            }
            Ok(acc)
        })
        .collect();

    let mut best: Vec<Option<(T, Point<T>, Point<T>)>> = vec![None; n_vertices];
    let (mut degenerate, mut errors) = (0, 0);
    for part in parts {
        let part = part?;
        degenerate += part.degenerate;
        errors += part.errors;
        for (slot, cand) in best.iter_mut().zip(part.per_vertex) {
            if let Some(c) = cand {
                if slot.as_ref().is_none_or(|(b, _, _)| c.0 > *b) {
                    *slot = Some(c);
                }
            }
        }
    }
    let per_vertex_max: Vec<Option<f64>> = best.iter().map(|b| b.as_ref().map(|(r, _, _)| r.as_f64())).collect();
    let sup = per_vertex_max.iter().flatten().copied().fold(0.0, f64::max);
    let claimed = sys.claimed_rate().map(Scalar::as_f64);
    Ok(ContractionReport {
        sup_estimate: sup,
        worst_pairs: best
            .into_iter()
            .enumerate()
            .map(|(v, b)| {
                b.map(|(r, x, y)| PairWitness {
                    vertex: v + 1,
                    x: x.to_string(),
                    y: y.to_string(),
                    ratio: r.as_f64(),
                })
            })
            .collect(),
        per_vertex_max,
        pairs: n_pairs,
        degenerate_pairs: degenerate,
        evaluation_errors: errors,
        not_contractive: sup >= 1.0,
        claimed_rate: claimed,
        exceeds_claim: claimed.map(|a| sup > a),
    })
}
