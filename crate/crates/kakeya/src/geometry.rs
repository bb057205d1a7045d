//! Layered points of ℝⁿ = ℝ^{m₁}×…×ℝ^{m_s}, the Euclidean metric and the
//! non-isotropic homogeneous metric
//!
//!   d(p, q) = max_i |x_i − y_i|^{1/j(i)}
//!
//! where j(i) is the layer of coordinate i. Balls of d are coordinate boxes.
//! Points are plain coordinate slices; the [`LayerSpec`] travels alongside.

use crate::error::{input, KakeyaError, Result};
use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LayerSpec {
    m: Vec<usize>,
    offsets: Vec<usize>,
}

impl TryFrom<Vec<usize>> for LayerSpec {
    type Error = KakeyaError;
    fn try_from(m: Vec<usize>) -> Result<Self> {
        LayerSpec::new(m)
    }
}

impl From<LayerSpec> for Vec<usize> {
    fn from(l: LayerSpec) -> Vec<usize> {
        l.m
    }
}

impl LayerSpec {
    pub fn new(m: Vec<usize>) -> Result<Self> {
        if m.is_empty() {
            return input("layer spec must have at least one layer");
        }
        if *m.last().unwrap() == 0 {
            return input("last layer must be nonempty");
        }
        let n: usize = m.iter().sum();
        if n < 2 {
            return input(format!("ambient dimension must be at least 2, got {n}"));
        }
        let mut offsets = Vec::with_capacity(m.len() + 1);
        let mut acc = 0;
        for &mj in &m {
            offsets.push(acc);
            acc += mj;
        }
        offsets.push(acc);
        Ok(LayerSpec { m, offsets })
    }

    /// Single layer: d is the sup norm.
    pub fn euclidean(n: usize) -> Result<Self> {
        LayerSpec::new(vec![n])
    }

    pub fn m(&self) -> &[usize] {
        &self.m
    }

    pub fn s(&self) -> usize {
        self.m.len()
    }

    pub fn n(&self) -> usize {
        self.offsets[self.m.len()]
    }

    pub fn q(&self) -> usize {
        self.m.iter().enumerate().map(|(j, &mj)| (j + 1) * mj).sum()
    }

    /// Coordinate range of layer `j` (1-based).
    pub fn range(&self, j: usize) -> Range<usize> {
        self.offsets[j - 1]..self.offsets[j]
    }

    /// Nonempty layers as (degree j, coordinate range).
    pub fn layers(&self) -> impl Iterator<Item = (usize, Range<usize>)> + '_ {
        (1..=self.s()).filter(|&j| self.m[j - 1] > 0).map(|j| (j, self.range(j)))
    }

    /// Degree of coordinate `i` (0-based).
    pub fn degree_of(&self, i: usize) -> usize {
        (1..=self.s()).find(|&j| self.range(j).contains(&i)).expect("coordinate index in range")
    }

    /// Per-coordinate degrees, handy in hot loops.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.degree_of(i)).collect()
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.n() {
            return input(format!("point has {} coordinates, layer spec expects {}", p.len(), self.n()));
        }
        Ok(())
    }
}

/// Homogeneous distance without dimension checks.
pub fn dist_h(p: &[f64], q: &[f64], layers: &LayerSpec) -> f64 {
    let mut best: f64 = 0.0;
    for (j, r) in layers.layers() {
        let m = r.map(|i| (p[i] - q[i]).abs()).fold(0.0, f64::max);
        let v = match j {
            1 => m,
            2 => m.sqrt(),
            _ => m.powf(1.0 / j as f64),
        };
        best = best.max(v);
    }
    best
}

pub fn dist_homogeneous(p: &[f64], q: &[f64], layers: &LayerSpec) -> Result<f64> {
    layers.check(p)?;
    layers.check(q)?;
    Ok(dist_h(p, q, layers))
}

pub fn dilate(p: &[f64], lambda: f64, layers: &LayerSpec) -> Result<Vec<f64>> {
    layers.check(p)?;
    if !(lambda > 0.0) {
        return input(format!("dilation factor must be positive, got {lambda}"));
    }
    let mut out = p.to_vec();
    for (j, r) in layers.layers() {
        let f = lambda.powi(j as i32);
        for i in r {
            out[i] *= f;
        }
    }
    Ok(out)
}

pub fn dist_e(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

pub fn dist_euclidean(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return input(format!("dimension mismatch: {} vs {}", p.len(), q.len()));
    }
    Ok(dist_e(p, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    Homogeneous(LayerSpec),
}

impl Metric {
    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => dist_e(p, q),
            Metric::Homogeneous(l) => dist_h(p, q, l),
        }
    }
}

/// For the homogeneous metric this is the box test |x_i − c_i| ≤ r^{j(i)}.
pub fn ball_contains(center: &[f64], r: f64, p: &[f64], metric: &Metric) -> Result<bool> {
    if center.len() != p.len() {
        return input("dimension mismatch");
    }
    if let Metric::Homogeneous(l) = metric {
        l.check(p)?;
    }
    if !(r > 0.0) {
        return input("radius must be positive");
    }
    Ok(metric.dist(center, p) <= r)
}

/// Lebesgue measure of B_d(0, r) = Π_j [−r^j, r^j]^{m_j}, i.e. 2ⁿ r^Q.
pub fn box_ball_volume(r: f64, layers: &LayerSpec) -> f64 {
    layers.layers().map(|(j, rg)| (2.0 * r.powi(j as i32)).powi(rg.len() as i32)).product()
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return input("bounds corners must have equal nonzero dimension");
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return input("bounds must be finite with lo ≤ hi");
        }
        Ok(Bounds { lo, hi })
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        Bounds { lo: vec![lo; n], hi: vec![hi; n] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| a <= x && x <= b)
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
