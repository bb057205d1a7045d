//! Nets, the 5r-covering selection, grid covers and Monte Carlo volumes.

use crate::error::{input, KakeyaError, Result};
use crate::geometry::{Bounds, LayerSpec};
use crate::rng::{pairwise_sum, substream, BLOCK};
use crate::settings::Frame;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Default number of Monte Carlo samples.
pub const DEFAULT_SAMPLES: usize = 200_000;

/// Default cap on visited grid cells.
pub const DEFAULT_CELL_CAP: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub points: Vec<Vec<f64>>,
    pub delta: f64,
    /// Every candidate lies within `delta` of a net point.
    pub maximal: bool,
}

impl Net {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// First-fit maximal δ-separated subset, in candidate order.
pub fn greedy_net<F>(candidates: &[Vec<f64>], delta: f64, metric: F) -> Result<Net>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if candidates.is_empty() {
        return input("greedy_net needs at least one candidate");
    }
    if !(delta > 0.0) {
        return input("net spacing must be positive");
    }
    let mut points: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        if points.iter().all(|p| metric(p, c) > delta) {
            points.push(c.clone());
        }
    }
    Ok(Net { points, delta, maximal: true })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Vitali selection: greedy by decreasing radius (ties by index), keeping a
/// ball when it misses every ball kept so far.
pub fn five_r_cover<F>(balls: &[Ball], metric: F) -> Vec<usize>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&i, &j| balls[j].radius.total_cmp(&balls[i].radius).then(i.cmp(&j)));
    let mut chosen: Vec<usize> = Vec::new();
    for i in order {
        let b = &balls[i];
        if chosen.iter().all(|&k| metric(&balls[k].center, &b.center) > balls[k].radius + b.radius) {
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Grid cell sides: δ^j in layer j, δ everywhere without layers.
pub fn cell_sides(delta: f64, n: usize, layers: Option<&LayerSpec>) -> Vec<f64> {
    match layers {
        Some(l) => l.degrees().iter().map(|&j| delta.powi(j as i32)).collect(),
        None => vec![delta; n],
    }
}

fn cell_shape(bounds: &Bounds, sides: &[f64], cap: u64) -> Result<Vec<u64>> {
    let mut total: u64 = 1;
    let mut dims = Vec::with_capacity(sides.len());
    for i in 0..sides.len() {
        let k = (((bounds.hi[i] - bounds.lo[i]) / sides[i]) - 1e-9).ceil().max(1.0);
        if k > cap as f64 {
            return Err(KakeyaError::Resource(format!("{k} cells along axis {i} exceeds cap {cap}")));
        }
        let k = k as u64;
        total = total.saturating_mul(k);
        if total > cap {
            return Err(KakeyaError::Resource(format!("grid cover needs more than {cap} cells")));
        }
        dims.push(k);
    }
    Ok(dims)
}

/// Number of grid cells whose center or one of the 2ⁿ corners satisfies the
/// indicator. Corners are pulled inward by 1e−9 of the side so a set lying
/// exactly on a grid hyperplane is not charged to both neighbours.
pub fn grid_cover_count<F>(indicator: F, bounds: &Bounds, delta: f64, layers: Option<&LayerSpec>, cap: u64) -> Result<u64>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    if !(delta > 0.0) {
        return input("delta must be positive");
    }
    let n = bounds.dim();
    if let Some(l) = layers {
        if l.n() != n {
            return input("layer spec and bounds disagree on dimension");
        }
    }
    let sides = cell_sides(delta, n, layers);
    let dims = cell_shape(bounds, &sides, cap)?;
    let total: u64 = dims.iter().product();
    let blocks = total.div_ceil(BLOCK as u64);
    let count = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut idx = vec![0u64; n];
            let mut lo = vec![0.0; n];
            let mut p = vec![0.0; n];
            let mut hits = 0u64;
            let start = b * BLOCK as u64;
            let end = (start + BLOCK as u64).min(total);
            for c in start..end {
                let mut r = c;
                for i in (0..n).rev() {
                    idx[i] = r % dims[i];
                    r /= dims[i];
                }
                for i in 0..n {
                    lo[i] = bounds.lo[i] + idx[i] as f64 * sides[i];
                    p[i] = lo[i] + 0.5 * sides[i];
                }
                if indicator(&p) {
                    hits += 1;
                    continue;
                }
                for mask in 0..(1u64 << n) {
                    for i in 0..n {
                        let inset = 1e-9 * sides[i];
                        p[i] = if mask >> i & 1 == 1 { lo[i] + sides[i] - inset } else { lo[i] + inset };
                    }
                    if indicator(&p) {
                        hits += 1;
                        break;
                    }
                }
            }
            hits
        })
        .sum();
    Ok(count)
}

/// Number of distinct grid cells (anchored at the origin) met by a point cloud.
pub fn grid_cover_points(points: &[Vec<f64>], delta: f64, layers: Option<&LayerSpec>) -> Result<u64> {
    if !(delta > 0.0) {
        return input("delta must be positive");
    }
    let Some(first) = points.first() else {
        return Ok(0);
    };
    let sides = cell_sides(delta, first.len(), layers);
    let mut cells: HashSet<Vec<i64>> = HashSet::new();
    for p in points {
        if p.len() != sides.len() {
            return input("point cloud has mixed dimensions");
        }
        cells.insert(p.iter().zip(&sides).map(|(x, s)| (x / s).floor() as i64).collect());
    }
    Ok(cells.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Hit fraction of the indicator over uniform samples from a unimodular
/// frame, times the frame volume. Block `i` of 4096 samples draws from
/// stream `stream_base + i`.
pub fn mc_volume_frame<F>(indicator: F, frame: &Frame, samples: usize, seed: u64, stream_base: u64) -> Result<VolumeEstimate>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    if samples < 100 {
        return input("mc_volume needs at least 100 samples");
    }
    let vol = frame.volume();
    if !(vol > 0.0) || !vol.is_finite() {
        return input("sampling region has zero or infinite volume");
    }
    let n = frame.lo.len();
    let blocks = samples.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, stream_base + b as u64);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut c = vec![0.0; n];
            let mut p = vec![0.0; n];
            let mut h = 0u64;
            for _ in 0..count {
                frame.sample(&mut rng, &mut c, &mut p);
                if indicator(&p) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let f = hits as f64 / samples as f64;
    Ok(VolumeEstimate { estimate: vol * f, stderr: vol * (f * (1.0 - f) / samples as f64).sqrt(), hits, samples: samples as u64 })
}

pub fn mc_volume<F>(indicator: F, bounds: &Bounds, samples: usize, seed: u64) -> Result<VolumeEstimate>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    mc_volume_frame(indicator, &Frame::identity(bounds.lo.clone(), bounds.hi.clone()), samples, seed, 0)
}

/// Monte Carlo mean of a real function over a frame, with standard error.
/// Block sums are combined pairwise in block order.
pub fn mc_mean_frame<F>(f: F, frame: &Frame, samples: usize, seed: u64, stream_base: u64) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if samples < 100 {
        return input("Monte Carlo mean needs at least 100 samples");
    }
    let n = frame.lo.len();
    let blocks = samples.div_ceil(BLOCK);
    let parts: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, stream_base + b as u64);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut c = vec![0.0; n];
            let mut p = vec![0.0; n];
            let mut vals = Vec::with_capacity(count);
            for _ in 0..count {
                frame.sample(&mut rng, &mut c, &mut p);
                vals.push(f(&p));
            }
            let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
            (pairwise_sum(&vals), pairwise_sum(&sq))
        })
        .collect();
    let s: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let s2: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let k = samples as f64;
    let mean = pairwise_sum(&s) / k;
    let var = (pairwise_sum(&s2) / k - mean * mean).max(0.0);
    Ok((mean, (var / k).sqrt()))
}

/// Uniform random points in a box, drawn from stream `stream`.
pub fn uniform_points(bounds: &Bounds, count: usize, seed: u64, stream: u64) -> Vec<Vec<f64>> {
    let mut rng = substream(seed, stream);
    (0..count).map(|_| bounds.lo.iter().zip(&bounds.hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{box_ball_volume, dist_e, dist_h};

    #[test]
    fn single_candidate_net() {
        let net = greedy_net(&[vec![1.0, 0.0]], 0.1, dist_e).unwrap();
        assert_eq!(net.points, vec![vec![1.0, 0.0]]);
        assert!(greedy_net(&[], 0.1, dist_e).is_err());
    }

    #[test]
    fn circle_net_of_four() {
        // chord spacing of 4 equispaced points on S¹ is √2; take δ just below it
        let cands: Vec<Vec<f64>> = (0..4000)
            .map(|k| {
                let t = k as f64 / 4000.0 * std::f64::consts::TAU;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let net = greedy_net(&cands, 2f64.sqrt() - 1e-3, dist_e).unwrap();
        assert_eq!(net.len(), 4);
    }

    #[test]
    fn five_r_examples() {
        let b = |x: f64, r: f64| Ball { center: vec![x], radius: r };
        assert_eq!(five_r_cover(&[b(0.0, 1.0)], dist_e), vec![0]);
        assert_eq!(five_r_cover(&[b(0.0, 1.0), b(1.5, 1.0), b(10.0, 1.0)], dist_e), vec![0, 2]);
        assert_eq!(five_r_cover(&[b(0.0, 1.0), b(0.1, 0.5)], dist_e), vec![0]);
    }

    #[test]
    fn grid_examples() {
        let unit = Bounds::cube(2, 0.0, 1.0);
        assert_eq!(grid_cover_count(|_| false, &unit, 0.125, None, DEFAULT_CELL_CAP).unwrap(), 0);
        assert_eq!(grid_cover_count(|_| true, &unit, 0.125, None, DEFAULT_CELL_CAP).unwrap(), 64);
        let l = LayerSpec::new(vec![1, 1]).unwrap();
        let delta: f64 = 1.0 / 16.0;
        let b = Bounds::new(vec![-0.49, 0.0], vec![0.51, 1.0]).unwrap();
        // a slab of width δ/2 around the x₂-axis, inside one column of cells
        let c = grid_cover_count(|p| p[0].abs() <= delta / 4.0, &b, delta, Some(&l), DEFAULT_CELL_CAP).unwrap() as f64;
        assert!(c >= 0.5 * delta.powi(-2) && c <= 2.0 * delta.powi(-2), "{c}");
        assert!(matches!(grid_cover_count(|_| true, &unit, 1e-6, None, 1000), Err(KakeyaError::Resource(_))));
    }

    #[test]
    fn mc_examples() {
        let b = Bounds::new(vec![0.0, 0.0], vec![2.0, 3.0]).unwrap();
        let v = mc_volume(|_| true, &b, 1000, 1).unwrap();
        assert_eq!((v.estimate, v.stderr), (6.0, 0.0));
        let v = mc_volume(|p| p[0] < 1.0, &b, 20_000, 2).unwrap();
        assert!((v.estimate - 3.0).abs() <= 3.0 * v.stderr);
        assert!(mc_volume(|_| true, &Bounds::new(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap(), 1000, 1).is_err());
        assert!(mc_volume(|_| true, &b, 10, 1).is_err());
    }

    #[test]
    fn mc_ball_matches_box_volume() {
        let l = LayerSpec::new(vec![1, 2]).unwrap();
        let r = 0.5;
        let b = Bounds::cube(3, -1.0, 1.0);
        let v = mc_volume(|p| dist_h(p, &[0.0; 3], &l) <= r, &b, 100_000, 5).unwrap();
        assert!((v.estimate - box_ball_volume(r, &l)).abs() <= 3.0 * v.stderr);
    }

    #[test]
    fn mc_is_thread_count_independent() {
        let b = Bounds::cube(3, -1.0, 1.0);
        let f = |p: &[f64]| p.iter().map(|x| x * x).sum::<f64>() <= 1.0;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| mc_volume(f, &b, 50_000, 9).unwrap());
        let c = four.install(|| mc_volume(f, &b, 50_000, 9).unwrap());
        assert_eq!(a, c);
        let fr = Frame::identity(b.lo.clone(), b.hi.clone());
        let m1 = one.install(|| mc_mean_frame(|p| p[0] * p[0], &fr, 30_000, 3, 0).unwrap());
        let m4 = four.install(|| mc_mean_frame(|p| p[0] * p[0], &fr, 30_000, 3, 0).unwrap());
        assert_eq!(m1, m4);
    }

    #[test]
    fn point_cloud_count() {
        let pts = vec![vec![0.01, 0.01], vec![0.02, 0.02], vec![0.6, 0.6]];
        assert_eq!(grid_cover_points(&pts, 0.5, None).unwrap(), 2);
        assert_eq!(grid_cover_points(&[], 0.5, None).unwrap(), 0);
    }
}
