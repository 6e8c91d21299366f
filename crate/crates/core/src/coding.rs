//! The coding map: backward compositions `w_{σ0} ∘ ... ∘ w_{σm}(x_{i(σm)})`
//! and their convergence diagnostics.
//!
//! Words are stored oldest symbol first, so `word[n-1]` is `σ0`. Depth `k`
//! codes the last `k` symbols; depth 0 is the base point of `t(σ0)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::EdgeId;
use crate::operator::{weakstar_distance, Distance, ParticleMeasure, TestFunction};
use crate::rng::{self, CHUNK};
use crate::simulate;
use crate::system::{MarkovSystem, Point};
use crate::{Error, Result, Scalar};

const TAG_WORDS: u64 = 0x434f;
const TAG_PUSH: u64 = 0x5055;
const TAG_RENDER: u64 = 0x524e;

#[derive(Debug, Clone, PartialEq)]
pub struct CodingResult<T> {
    pub point: Point<T>,
    pub depth: usize,
    /// `increments[k-1] = d(Y_k, Y_{k-1})` for `k = 1..=depth`.
    pub increments: Vec<T>,
    /// `C / (1 - √a) · a^{depth/2}` when `(a, C)` is supplied.
    pub tail_bound: Option<T>,
}

/// `C / (1 - √a) · a^{n/2}`.
pub fn tail_bound<T: Scalar>(a: T, c: T, n: usize) -> T {
    c / (T::one() - a.sqrt()) * a.powf(T::from_count(n) / T::lit(2.0))
}

/// `Y_k`: the last `k` symbols of `word` composed from the base point of the
/// source of the oldest of them (`k = 0`: base point of `t(σ0)`).
pub fn code_suffix<T: Scalar>(sys: &MarkovSystem<T>, word: &[EdgeId], base: &[Point<T>], k: usize) -> Result<Point<T>> {
    let g = sys.digraph();
    let n = word.len();
    let start = if k == 0 {
        g.target(word[n - 1])
    } else {
        g.source(word[n - k])
    };
    let x = base.get(start).ok_or(Error::MissingBasePoint(start + 1))?;
    sys.compose(&word[n - k..], x)
}

/// Codes `word` from the base points `base`, recording every increment.
pub fn code_point<T: Scalar>(
    sys: &MarkovSystem<T>,
    word: &[EdgeId],
    base: &[Point<T>],
    rate: Option<(T, T)>,
) -> Result<CodingResult<T>> {
    if word.is_empty() {
        return Err(Error::InvalidParameter("cannot code an empty word".into()));
    }
    sys.digraph().check_path(word)?;
    let mut prev = code_suffix(sys, word, base, 0)?;
    let mut increments = Vec::with_capacity(word.len());
    for k in 1..=word.len() {
        let y = code_suffix(sys, word, base, k)?;
        increments.push(sys.distance(&y, &prev));
        prev = y;
    }
    Ok(CodingResult {
        point: prev,
        depth: word.len(),
        increments,
        tail_bound: rate.map(|(a, c)| tail_bound(a, c, word.len())),
    })
}

/// `n_words` forward words of length `len`, each started from a point drawn
/// from `mu`, together with the realized final states.
pub fn sample_words<T: Scalar>(
    sys: &MarkovSystem<T>,
    mu: &ParticleMeasure<T>,
    len: usize,
    n_words: usize,
    seed: u64,
) -> Result<Vec<(Point<T>, Vec<EdgeId>, Point<T>)>> {
    let sampler = mu.sampler();
    let chunks = n_words.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, &[TAG_WORDS, c as u64]);
            (0..CHUNK.min(n_words - c * CHUNK))
                .map(|_| {
                    let x = &mu.particles()[sampler.sample(&mut r)].point;
                    let mut word = Vec::with_capacity(len);
                    let mut y = x.clone();
                    for _ in 0..len {
                        let (e, next, _) = simulate::step(sys, &y, &mut r)?;
                        word.push(e);
                        y = next;
                    }
                    Ok((x.clone(), word, y))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    pub depths: Vec<usize>,
    /// Mean of `d(Y_k, Y_{k-1})` over the sampled words.
    pub mean_increments: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Least-squares slope of `log(mean)` against depth (depths with zero
    /// mean are left out; `None` with fewer than two usable depths).
    pub fitted_slope: Option<f64>,
    pub log_rate: Option<f64>,
    /// `max increment(depth 1) / a` over the sampled words.
    pub c_estimate: Option<f64>,
    pub n_words: usize,
}

/// Mean coding increments at each depth for words distributed like `M`.
pub fn coding_convergence_report<T: Scalar>(
    sys: &MarkovSystem<T>,
    mu: &ParticleMeasure<T>,
    depths: &[usize],
    n_words: usize,
    seed: u64,
    base: &[Point<T>],
) -> Result<DecayTable> {
    if depths.is_empty() || depths.contains(&0) {
        return Err(Error::InvalidParameter("depths must be a non-empty list of positive integers".into()));
    }
    if n_words == 0 {
        return Err(Error::InvalidParameter("need at least one word".into()));
    }
    let max_depth = *depths.iter().max().expect("non-empty");
    let words = sample_words(sys, mu, max_depth, n_words, seed)?;
    let rows = words
        .par_iter()
        .map(|(_, w, _)| {
            let first = sys.distance(&code_suffix(sys, w, base, 1)?, &code_suffix(sys, w, base, 0)?);
            let incs = depths
                .iter()
                .map(|&k| Ok(sys.distance(&code_suffix(sys, w, base, k)?, &code_suffix(sys, w, base, k - 1)?).as_f64()))
                .collect::<Result<Vec<f64>>>()?;
            Ok((first.as_f64(), incs))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = n_words as f64;
    let mut mean_increments = Vec::with_capacity(depths.len());
    let mut std_errors = Vec::with_capacity(depths.len());
    for j in 0..depths.len() {
        let mean = rows.iter().map(|(_, r)| r[j]).sum::<f64>() / n;
        let var = rows.iter().map(|(_, r)| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        mean_increments.push(mean);
        std_errors.push((var / n).sqrt());
    }
    let a = sys.claimed_rate().map(Scalar::as_f64);
    let max_first = rows.iter().map(|(f, _)| *f).fold(0.0, f64::max);
    Ok(DecayTable {
        fitted_slope: log_slope(depths, &mean_increments),
        log_rate: a.map(f64::ln),
        c_estimate: a.map(|a| max_first / a),
        depths: depths.to_vec(),
        mean_increments,
        std_errors,
        n_words,
    })
}

/// Least-squares slope of `log y` against `x` over positive `y`.
pub fn log_slope(xs: &[usize], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(&x, &y)| (x as f64, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushforwardReport {
    pub depth: usize,
    pub n_samples: usize,
    /// Distance between the coded ensemble and `mu` (W1 on the line, panel
    /// distance otherwise).
    pub distance: f64,
    pub distance_kind: &'static str,
    /// Mean `d(z_exact, z_coded)`.
    pub paired_drift: f64,
}

/// Compares forward images of `x ~ mu` with the same words coded from the
/// base points.
pub fn pushforward_check<T: Scalar>(
    sys: &MarkovSystem<T>,
    mu: &ParticleMeasure<T>,
    depth: usize,
    n_samples: usize,
    seed: u64,
    panel: &[TestFunction<T>],
) -> Result<PushforwardReport> {
    if depth == 0 || n_samples == 0 {
        return Err(Error::InvalidParameter("depth and sample count must be positive".into()));
    }
    let words = sample_words(sys, mu, depth, n_samples, rng::derive_key(seed, &[TAG_PUSH]))?;
    let pairs = words
        .par_iter()
        .map(|(_, w, exact)| {
            let coded = code_suffix(sys, w, sys.base_points(), depth)?;
            Ok((sys.distance(exact, &coded).as_f64(), coded))
        })
        .collect::<Result<Vec<_>>>()?;
    let paired_drift = pairs.iter().map(|p| p.0).sum::<f64>() / n_samples as f64;
    let coded = ParticleMeasure::equal_weight(sys, pairs.into_iter().map(|p| p.1).collect())?;
    let (distance, distance_kind) = if sys.dim() == Some(1) {
        (weakstar_distance(sys, &coded, mu, &Distance::W1)?, "w1")
    } else {
        (weakstar_distance(sys, &coded, mu, &Distance::Panel(panel))?, "panel")
    };
    Ok(PushforwardReport {
        depth,
        n_samples,
        distance,
        distance_kind,
        paired_drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSpec {
    pub width: usize,
    pub height: usize,
    /// `[x0, y0, x1, y1]`; `y` is ignored for one-dimensional systems.
    pub viewport: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendering {
    /// Distinct coded points with multiplicities, sorted.
    pub points: Vec<(Vec<f64>, usize)>,
    pub image: Option<Pgm>,
}

/// 8-bit grayscale raster, row-major, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Pgm {
    /// Binary `P5` encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Coded points `w_{σ0}∘...∘w_{σ(depth-1)}(x_{i(...)})` for `n_points` words
/// generated forward from `mu` (or from uniformly chosen base points), and a
/// `log(1 + count)` density image.
pub fn render_attractor<T: Scalar>(
    sys: &MarkovSystem<T>,
    mu: Option<&ParticleMeasure<T>>,
    n_points: usize,
    depth: usize,
    seed: u64,
    image: Option<&ImageSpec>,
) -> Result<Rendering> {
    let dim = match sys.dim() {
        Some(d @ (1 | 2)) => d,
        _ => return Err(Error::InvalidParameter("rendering needs a Euclidean system of dimension 1 or 2".into())),
    };
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be positive".into()));
    }
    if let Some(img) = image {
        let [x0, y0, x1, y1] = img.viewport;
        if img.width == 0 || img.height == 0 || !(x1 > x0) || (dim == 2 && !(y1 > y0)) {
            return Err(Error::InvalidParameter("degenerate viewport or image size".into()));
        }
    }
    let start = match mu {
        Some(m) => m.clone(),
        None => ParticleMeasure::at_base_points(sys)?,
    };
    let coded: Vec<Vec<f64>> = if n_points == 0 {
        Vec::new()
    } else {
        sample_words(sys, &start, depth, n_points, rng::derive_key(seed, &[TAG_RENDER]))?
            .par_iter()
            .map(|(_, w, _)| Ok(code_suffix(sys, w, sys.base_points(), depth)?.coords().iter().map(|c| c.as_f64()).collect()))
            .collect::<Result<_>>()?
    };
    let image = image.map(|img| rasterize(&coded, dim, img));
    let mut counts: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    for p in &coded {
        *counts.entry(p.iter().map(|c| order_key(*c)).collect()).or_default() += 1;
    }
    let points = counts
        .into_iter()
        .map(|(k, n)| (k.into_iter().map(from_order_key).collect(), n))
        .collect();
    Ok(Rendering { points, image })
}

/// Monotone bijection from `f64` to `u64` (total order).
fn order_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn from_order_key(k: u64) -> f64 {
    if k >> 63 == 1 {
        f64::from_bits(k & !(1 << 63))
    } else {
        f64::from_bits(!k)
    }
}

fn rasterize(points: &[Vec<f64>], dim: usize, img: &ImageSpec) -> Pgm {
    let [x0, y0, x1, y1] = img.viewport;
    let mut hist = vec![0u64; img.width * img.height];
    let cell = |v: f64, lo: f64, hi: f64, n: usize| {
        let t = (v - lo) / (hi - lo);
        (0.0..1.0).contains(&t).then(|| ((t * n as f64) as usize).min(n - 1))
    };
    for p in points {
        let Some(col) = cell(p[0], x0, x1, img.width) else { continue };
        if dim == 1 {
            for row in 0..img.height {
                hist[row * img.width + col] += 1;
            }
        } else if let Some(r) = cell(p[1], y0, y1, img.height) {
            hist[(img.height - 1 - r) * img.width + col] += 1;
        }
    }
    let max = hist.iter().copied().max().unwrap_or(0);
    let scale = if max == 0 { 0.0 } else { 255.0 / (1.0 + max as f64).ln() };
    Pgm {
        width: img.width,
        height: img.height,
        pixels: hist.iter().map(|&c| ((1.0 + c as f64).ln() * scale).round() as u8).collect(),
    }
}
