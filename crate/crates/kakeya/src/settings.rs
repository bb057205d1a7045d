//! The geometric configurations: direction space Y with metric d_Z, parameter
//! space 𝒜, the segment family F_u(a) and its tubes.
//!
//! Conventions shared by every variant:
//! - `u` is a direction coordinate vector, `a` a parameter vector.
//! - Segments are parametrized from their starting point, γ(0) = start, over
//!   t ∈ [0, t_max]; the widened segment runs over [0, 2·t_max] from the same
//!   start (for the midpoint-parametrized variants the midpoint is kept
//!   instead, see [`Setting::gamma`]).
//! - Tubes carry a radius δ; widened tubes use 2δ.

use crate::carnot::{compute_constants, CarnotConstants, GroupSpec, SegmentCase};
use crate::error::{input, KakeyaError, Result};
use crate::geometry::{dist_e, dot, norm, LayerSpec};
use crate::linalg::{frame_from, normalize, point_segment};
use crate::rng::{substream, Rng};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSet {
    pub ratio: f64,
    pub depth: u32,
}

impl CantorSet {
    pub fn new(ratio: f64, depth: u32) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 0.5) {
            return input(format!("Cantor ratio must lie in (0, 1/2], got {ratio}"));
        }
        if depth == 0 || depth > 40 {
            return input(format!("Cantor depth must lie in 1..=40, got {depth}"));
        }
        Ok(CantorSet { ratio, depth })
    }

    pub fn dimension(&self) -> f64 {
        2f64.ln() / (1.0 / self.ratio).ln()
    }

    /// Length of a level-`depth` interval.
    pub fn piece(&self) -> f64 {
        self.ratio.powi(self.depth as i32)
    }

    /// Left endpoints of the 2^depth level intervals, increasing.
    pub fn intervals(&self) -> Vec<f64> {
        let mut lefts = vec![0.0];
        let mut len = 1.0;
        for _ in 0..self.depth {
            let shift = len * (1.0 - self.ratio);
            let mut next = Vec::with_capacity(lefts.len() * 2);
            for &l in &lefts {
                next.push(l);
                next.push(l + shift);
            }
            lefts = next;
            len *= self.ratio;
        }
        lefts
    }

    /// Distance from x to the level set.
    pub fn dist(&self, x: f64) -> f64 {
        fn rec(c: &CantorSet, x: f64, left: f64, len: f64, level: u32, best: &mut f64) {
            let hull = if x < left {
                left - x
            } else if x > left + len {
                x - left - len
            } else {
                0.0
            };
            if hull >= *best {
                return;
            }
            if level == c.depth {
                *best = hull;
                return;
            }
            let child = len * c.ratio;
            let lo = left;
            let hi = left + len - child;
            if x <= left + 0.5 * len {
                rec(c, x, lo, child, level + 1, best);
                rec(c, x, hi, child, level + 1, best);
            } else {
                rec(c, x, hi, child, level + 1, best);
                rec(c, x, lo, child, level + 1, best);
            }
        }
        let mut best = f64::INFINITY;
        rec(self, x, 0.0, 1.0, 0, &mut best);
        best
    }

    /// Natural probability measure of [lo, hi]: mass 2^{-depth} spread
    /// uniformly on each level interval.
    pub fn measure(&self, lo: f64, hi: f64) -> f64 {
        fn rec(c: &CantorSet, lo: f64, hi: f64, left: f64, len: f64, level: u32) -> f64 {
            let right = left + len;
            if hi < left || lo > right {
                return 0.0;
            }
            let mass = 0.5f64.powi(level as i32);
            if lo <= left && right <= hi {
                return mass;
            }
            if level == c.depth {
                return mass * (hi.min(right) - lo.max(left)).max(0.0) / len;
            }
            let child = len * c.ratio;
            rec(c, lo, hi, left, child, level + 1) + rec(c, lo, hi, right - child, child, level + 1)
        }
        if hi < lo {
            return 0.0;
        }
        rec(self, lo, hi, 0.0, 1.0, 0)
    }

    /// A point drawn from the natural measure.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let mut left = 0.0;
        let mut len = 1.0;
        for _ in 0..self.depth {
            let child = len * self.ratio;
            if rng.random::<bool>() {
                left += len - child;
            }
            len = child;
        }
        left + rng.random::<f64>() * len
    }
}

/// Exponents verified by the paper for a variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NominalExponents {
    pub q: f64,
    pub s: f64,
    pub t: f64,
    pub theta: f64,
    /// Axiom 5 exponents where the paper establishes them.
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    /// Axiom 2 ball enlargement K.
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Setting {
    EuclideanKakeya {
        n: usize,
    },
    /// Directions e = (w·(k − 1/2), 1)/|·| with every k_i in the Cantor set.
    RestrictedKakeya {
        n: usize,
        directions: CantorSet,
        width: f64,
    },
    /// V = {x_n = 0}; directions are base points p ∈ V, parameters (e, t).
    NikodymHyperplane {
        n: usize,
        sigma: f64,
        c_sigma: f64,
    },
    /// Copies a + (k − 1/2)e of the fiber, k ∈ K.
    FurstenbergK {
        n: usize,
        fiber: CantorSet,
    },
    HomogeneousKakeya {
        layers: LayerSpec,
    },
    CarnotLT {
        spec: GroupSpec,
        constants: CarnotConstants,
    },
    CarnotKakeya {
        spec: GroupSpec,
        constants: CarnotConstants,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub u: Vec<f64>,
    pub a: Vec<f64>,
    pub delta: f64,
    pub widened: bool,
}

impl Tube {
    pub fn new(u: Vec<f64>, a: Vec<f64>, delta: f64) -> Self {
        Tube { u, a, delta, widened: false }
    }

    pub fn widened(mut self) -> Self {
        self.widened = true;
        self
    }

    pub fn radius(&self) -> f64 {
        if self.widened {
            2.0 * self.delta
        } else {
            self.delta
        }
    }
}

/// The straight segment γ(t) = p0 + t·v, t ∈ [0, t_max].
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub p0: Vec<f64>,
    pub v: Vec<f64>,
    pub t_max: f64,
}

impl Line {
    pub fn at(&self, t: f64) -> Vec<f64> {
        self.p0.iter().zip(&self.v).map(|(p, v)| p + t * v).collect()
    }

    pub fn end(&self) -> Vec<f64> {
        self.at(self.t_max)
    }

    pub fn euclidean_length(&self) -> f64 {
        norm(&self.v) * self.t_max
    }
}

/// A unimodular affine chart x = origin + Σ c_i·axes_i with c in the box
/// [lo, hi]; Lebesgue measure of the chart image equals the box volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub origin: Vec<f64>,
    pub axes: Vec<Vec<f64>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Frame {
    pub fn identity(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let n = lo.len();
        let axes = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Frame { origin: vec![0.0; n], axes, lo, hi }
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn map(&self, c: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.origin);
        for (ci, ax) in c.iter().zip(&self.axes) {
            for (o, x) in out.iter_mut().zip(ax) {
                *o += ci * x;
            }
        }
    }

    pub fn sample(&self, rng: &mut Rng, c: &mut [f64], out: &mut [f64]) {
        for i in 0..c.len() {
            c[i] = self.lo[i] + (self.hi[i] - self.lo[i]) * rng.random::<f64>();
        }
        self.map(c, out);
    }
}

/// How a ball of the ambient metric is sampled: a frame covering it plus the
/// exact membership test done by [`Setting::ball_dist`].
pub struct BallChart {
    pub frame: Frame,
}

fn gaussian_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn uniform_ball(rng: &mut Rng, n: usize, r: f64) -> Vec<f64> {
    loop {
        let g = gaussian_vec(rng, n);
        let l = norm(&g);
        if l > 1e-12 {
            let rad = r * rng.random::<f64>().powf(1.0 / n as f64);
            return g.iter().map(|x| x * rad / l).collect();
        }
    }
}

/// Radius of the Euclidean ball in ℝ^k with unit volume, capped at 1.
pub fn unit_volume_radius(k: usize) -> f64 {
    let kf = k as f64;
    let omega = std::f64::consts::PI.powf(kf / 2.0) / gamma_fn(kf / 2.0 + 1.0);
    (1.0 / omega).powf(1.0 / kf).min(1.0)
}

fn gamma_fn(x: f64) -> f64 {
    // half-integer arguments only
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as u64).map(|k| k as f64).product()
    } else {
        let mut v = std::f64::consts::PI.sqrt();
        let mut y = 0.5;
        while y < x - 1e-9 {
            v *= y;
            y += 1.0;
        }
        v
    }
}

/// Projective chord metric on unit vectors: lines, not rays.
pub fn projective_chord(u: &[f64], v: &[f64]) -> f64 {
    let mut dm = 0.0;
    let mut dp = 0.0;
    for i in 0..u.len() {
        dm += (u[i] - v[i]).powi(2);
        dp += (u[i] + v[i]).powi(2);
    }
    dm.min(dp).sqrt()
}

impl Setting {
    pub fn euclidean(n: usize) -> Result<Self> {
        if n < 2 {
            return input("EuclideanKakeya needs n ≥ 2");
        }
        Ok(Setting::EuclideanKakeya { n })
    }

    pub fn restricted(n: usize, directions: CantorSet, width: f64) -> Result<Self> {
        if n < 2 || !(width > 0.0 && width <= 2.0) {
            return input("RestrictedKakeya needs n ≥ 2 and width in (0, 2]");
        }
        Ok(Setting::RestrictedKakeya { n, directions, width })
    }

    pub fn nikodym(n: usize, sigma: f64, c_sigma: f64) -> Result<Self> {
        if n < 2 || !(sigma > 0.0 && sigma < std::f64::consts::FRAC_PI_2) || !(c_sigma > 0.25) {
            return input("NikodymHyperplane needs n ≥ 2, 0 < sigma < π/2 and C_sigma > 1/4");
        }
        Ok(Setting::NikodymHyperplane { n, sigma, c_sigma })
    }

    pub fn furstenberg(n: usize, fiber: CantorSet) -> Result<Self> {
        if n < 2 {
            return input("FurstenbergK needs n ≥ 2");
        }
        Ok(Setting::FurstenbergK { n, fiber })
    }

    pub fn homogeneous(layers: LayerSpec) -> Result<Self> {
        if layers.s() < 2 {
            return input("HomogeneousKakeya needs at least two layers");
        }
        Ok(Setting::HomogeneousKakeya { layers })
    }

    pub fn carnot_lt(spec: GroupSpec, r: f64) -> Result<Self> {
        let constants = compute_constants(&spec, r, SegmentCase::LT)?;
        Ok(Setting::CarnotLT { spec, constants })
    }

    pub fn carnot_kakeya(spec: GroupSpec, r: f64) -> Result<Self> {
        let constants = compute_constants(&spec, r, SegmentCase::Classical)?;
        Ok(Setting::CarnotKakeya { spec, constants })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Setting::EuclideanKakeya { .. } => "EuclideanKakeya",
            Setting::RestrictedKakeya { .. } => "RestrictedKakeya",
            Setting::NikodymHyperplane { .. } => "NikodymHyperplane",
            Setting::FurstenbergK { .. } => "FurstenbergK",
            Setting::HomogeneousKakeya { .. } => "HomogeneousKakeya",
            Setting::CarnotLT { .. } => "CarnotLT",
            Setting::CarnotKakeya { .. } => "CarnotKakeya",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Setting::EuclideanKakeya { n }
            | Setting::RestrictedKakeya { n, .. }
            | Setting::NikodymHyperplane { n, .. }
            | Setting::FurstenbergK { n, .. } => *n,
            Setting::HomogeneousKakeya { layers } => layers.n(),
            Setting::CarnotLT { spec, .. } | Setting::CarnotKakeya { spec, .. } => spec.n(),
        }
    }

    /// Length of a direction coordinate vector.
    pub fn dir_dim(&self) -> usize {
        match self {
            Setting::EuclideanKakeya { n } | Setting::RestrictedKakeya { n, .. } | Setting::FurstenbergK { n, .. } => *n,
            _ => self.n() - 1,
        }
    }

    pub fn is_carnot(&self) -> bool {
        matches!(self, Setting::CarnotLT { .. } | Setting::CarnotKakeya { .. })
    }

    /// Ambient metric d used for balls B_d.
    pub fn ambient_dist(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Setting::HomogeneousKakeya { layers } => crate::geometry::dist_h(p, q, layers),
            Setting::CarnotLT { spec, .. } | Setting::CarnotKakeya { spec, .. } => spec.dist(p, q),
            _ => dist_e(p, q),
        }
    }

    pub fn nominal_exponents(&self) -> NominalExponents {
        let n = self.n() as f64;
        match self {
            Setting::EuclideanKakeya { .. } => {
                NominalExponents { q: n, s: n - 1.0, t: n - 1.0, theta: 0.0, lambda: Some(1.0), alpha: Some(n - 2.0), k: 1.0 }
            }
            Setting::RestrictedKakeya { directions, .. } => {
                let s = (n - 1.0) * directions.dimension();
                NominalExponents { q: n, s, t: n - 1.0, theta: 0.0, lambda: Some(1.0), alpha: Some(s - 1.0), k: 1.0 }
            }
            Setting::NikodymHyperplane { .. } => {
                NominalExponents { q: n, s: n - 1.0, t: n - 1.0, theta: 0.0, lambda: Some(1.0), alpha: Some(n - 2.0), k: 1.0 }
            }
            Setting::FurstenbergK { fiber, .. } => {
                NominalExponents { q: n, s: n - 1.0, t: n - fiber.dimension(), theta: 0.0, lambda: None, alpha: None, k: 1.0 }
            }
            Setting::HomogeneousKakeya { layers } => {
                let q = layers.q() as f64;
                let s = layers.s() as f64;
                let case_a = layers.m()[0] == layers.n() - 1;
                NominalExponents {
                    q,
                    s: q - s,
                    t: q - s,
                    theta: 0.0,
                    lambda: if case_a { Some(1.0) } else { None },
                    alpha: if case_a { Some(n - 2.0) } else { None },
                    k: 2.0,
                }
            }
            Setting::CarnotLT { spec, .. } => {
                NominalExponents { q: spec.q() as f64, s: n - 1.0, t: n - 1.0, theta: 0.0, lambda: None, alpha: None, k: 1.0 }
            }
            Setting::CarnotKakeya { spec, .. } => NominalExponents {
                q: spec.q() as f64,
                s: n - 1.0,
                t: n - 1.0,
                theta: 0.0,
                lambda: if spec.m2() == 1 { Some(1.0) } else { None },
                alpha: if spec.m2() == 1 { Some(n - 2.0) } else { None },
                k: 1.0,
            },
        }
    }

    /// The direction metric d_Z.
    pub fn d_z(&self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            Setting::EuclideanKakeya { .. } | Setting::FurstenbergK { .. } => projective_chord(u, v),
            Setting::HomogeneousKakeya { layers } => {
                let mut best: f64 = 0.0;
                for i in 0..u.len() {
                    let j = layers.degree_of(i);
                    let x = (u[i] - v[i]).abs();
                    best = best.max(if j == 1 { x } else { x.powf(1.0 / j as f64) });
                }
                best
            }
            _ => dist_e(u, v),
        }
    }

    /// Exponent S of ν-balls in (Y, d_Z).
    pub fn s_exponent(&self) -> f64 {
        self.nominal_exponents().s
    }

    /// Radius of the direction ball for the hyperplane-chart variants.
    pub fn y_radius(&self) -> f64 {
        match self {
            Setting::CarnotLT { constants, .. } | Setting::CarnotKakeya { constants, .. } => constants.r_r,
            _ => unit_volume_radius(self.n() - 1),
        }
    }

    pub fn contains_direction(&self, u: &[f64]) -> bool {
        if u.len() != self.dir_dim() {
            return false;
        }
        match self {
            Setting::EuclideanKakeya { .. } | Setting::FurstenbergK { .. } => (norm(u) - 1.0).abs() < 1e-9,
            Setting::RestrictedKakeya { directions, width, .. } => {
                let n = u.len();
                if (norm(u) - 1.0).abs() > 1e-9 || u[n - 1] <= 0.0 {
                    return false;
                }
                let tol = 1e-9 * directions.piece().max(1e-300) + 1e-12;
                (0..n - 1).all(|i| directions.dist(u[i] / u[n - 1] / width + 0.5) <= tol.max(1e-12))
            }
            _ => norm(u) <= self.y_radius() * (1.0 + 1e-12),
        }
    }

    pub fn sample_direction_rng(&self, rng: &mut Rng) -> Vec<f64> {
        match self {
            Setting::EuclideanKakeya { n } | Setting::FurstenbergK { n, .. } => loop {
                let g = gaussian_vec(rng, *n);
                let l = norm(&g);
                if l > 1e-12 {
                    let sgn = if g[*n - 1] < 0.0 { -1.0 } else { 1.0 };
                    break g.iter().map(|x| sgn * x / l).collect();
                }
            },
            Setting::RestrictedKakeya { n, directions, width } => {
                let mut v: Vec<f64> = (0..n - 1).map(|_| width * (directions.sample(rng) - 0.5)).collect();
                v.push(1.0);
                normalize(&v)
            }
            _ => uniform_ball(rng, self.dir_dim(), self.y_radius()),
        }
    }

    pub fn sample_direction(&self, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return input("count must be at least 1");
        }
        let mut rng = substream(seed, 0x5d1);
        Ok((0..count).map(|_| self.sample_direction_rng(&mut rng)).collect())
    }

    /// A parameter drawn from a bounded piece of 𝒜.
    pub fn sample_param(&self, rng: &mut Rng) -> Vec<f64> {
        let n = self.n();
        match self {
            Setting::NikodymHyperplane { sigma, c_sigma, .. } => {
                // e uniform in the cap of angular radius sigma around e_n
                let cos_min = sigma.cos();
                let e = loop {
                    let g = gaussian_vec(rng, n);
                    let l = norm(&g);
                    if l < 1e-12 {
                        continue;
                    }
                    let mut e: Vec<f64> = g.iter().map(|x| x / l).collect();
                    if e[n - 1] < 0.0 {
                        e.iter_mut().for_each(|x| *x = -*x);
                    }
                    if e[n - 1] > cos_min {
                        break e;
                    }
                };
                let t = 0.25 + (c_sigma - 0.25) * (0.02 + 0.96 * rng.random::<f64>());
                let mut a = e;
                a.push(t);
                a
            }
            Setting::CarnotLT { constants, .. } | Setting::CarnotKakeya { constants, .. } => uniform_ball(rng, n, constants.r_big),
            _ => (0..n).map(|_| rng.random::<f64>() - 0.5).collect(),
        }
    }

    pub fn check_tube(&self, tube: &Tube) -> Result<()> {
        if tube.u.len() != self.dir_dim() {
            return input(format!("direction has {} coordinates, expected {}", tube.u.len(), self.dir_dim()));
        }
        let alen = if matches!(self, Setting::NikodymHyperplane { .. }) { self.n() + 1 } else { self.n() };
        if tube.a.len() != alen {
            return input(format!("parameter has {} coordinates, expected {}", tube.a.len(), alen));
        }
        if !(tube.delta > 0.0 && tube.delta < 1.0) {
            return input(format!("delta must lie in (0,1), got {}", tube.delta));
        }
        if let Setting::NikodymHyperplane { sigma, .. } = self {
            if tube.delta >= 1.0 / (16.0 * (1.0 + sigma.tan())) {
                return input("delta above the Nikodym admissible range 1/(16(1+tan σ))");
            }
        }
        Ok(())
    }

    /// t_max of the narrow segment.
    pub fn t_max(&self, u: &[f64]) -> f64 {
        match self {
            Setting::HomogeneousKakeya { .. } | Setting::CarnotLT { .. } | Setting::CarnotKakeya { .. } => 1.0 / (1.0 + dot(u, u)).sqrt(),
            _ => 1.0,
        }
    }

    /// The straight segment carrying F_u(a) (for FurstenbergK, the hull of the
    /// Cantor copy).
    pub fn line(&self, u: &[f64], a: &[f64], widened: bool) -> Line {
        let n = self.n();
        let tm = self.t_max(u);
        let w = if widened { 2.0 } else { 1.0 };
        match self {
            Setting::EuclideanKakeya { .. } | Setting::RestrictedKakeya { .. } => {
                // midpoint a, length 1 (2 when widened)
                let p0 = a.iter().zip(u).map(|(x, e)| x - 0.5 * w * e).collect();
                Line { p0, v: u.to_vec(), t_max: w }
            }
            Setting::FurstenbergK { .. } => {
                let p0 = a.iter().zip(u).map(|(x, e)| x - 0.5 * e).collect();
                Line { p0, v: u.to_vec(), t_max: 1.0 }
            }
            Setting::NikodymHyperplane { .. } => {
                let e = &a[..n];
                let t0 = a[n];
                let mut p0: Vec<f64> = u.to_vec();
                p0.push(0.0);
                for i in 0..n {
                    p0[i] += t0 * e[i];
                }
                Line { p0, v: e.to_vec(), t_max: w }
            }
            Setting::HomogeneousKakeya { .. } | Setting::CarnotKakeya { .. } => {
                let mut v = u.to_vec();
                v.push(1.0);
                Line { p0: a.to_vec(), v, t_max: w * tm }
            }
            Setting::CarnotLT { spec, .. } => {
                let m1 = spec.m1();
                let mut v = u.to_vec();
                v.push(1.0);
                let mut pv = vec![0.0; spec.m2()];
                spec.poly(&a[..m1], &u[..m1], &mut pv);
                for k in 0..spec.m2() {
                    v[m1 + k] += pv[k];
                }
                Line { p0: a.to_vec(), v, t_max: w * tm }
            }
        }
    }

    /// γ(t) of the (narrow or widened) segment, t measured from its start.
    pub fn gamma(&self, u: &[f64], a: &[f64], t: f64, widened: bool) -> Vec<f64> {
        self.line(u, a, widened).at(t)
    }

    pub fn segment_point(&self, u: &[f64], a: &[f64], t: f64) -> Result<Vec<f64>> {
        let tm = self.line(u, a, false).t_max;
        if !(t >= -1e-12 && t <= tm + 1e-12) {
            return input(format!("t = {t} outside [0, {tm}]"));
        }
        Ok(self.gamma(u, a, t, false))
    }

    /// Draws t from the segment measure μ_{u,a} (Cantor measure for FurstenbergK).
    pub fn sample_segment_t(&self, u: &[f64], a: &[f64], rng: &mut Rng) -> f64 {
        match self {
            Setting::FurstenbergK { fiber, .. } => fiber.sample(rng),
            _ => rng.random::<f64>() * self.line(u, a, false).t_max,
        }
    }

    /// Quantity compared against the tube radius: membership is
    /// `axis_dist ≤ radius`.
    pub fn axis_dist(&self, tube: &Tube, p: &[f64]) -> f64 {
        let line = self.line(&tube.u, &tube.a, tube.widened);
        match self {
            Setting::EuclideanKakeya { .. } | Setting::RestrictedKakeya { .. } | Setting::NikodymHyperplane { .. } => {
                let v: Vec<f64> = line.v.iter().map(|x| x * line.t_max).collect();
                point_segment(p, &line.p0, &v).0
            }
            Setting::FurstenbergK { fiber, .. } => {
                let e = &tube.u;
                let mut along = 0.0;
                let mut d2 = 0.0;
                for i in 0..p.len() {
                    along += (p[i] - line.p0[i]) * e[i];
                }
                for i in 0..p.len() {
                    let x = p[i] - line.p0[i] - along * e[i];
                    d2 += x * x;
                }
                let dk = fiber.dist(along);
                (d2 + dk * dk).sqrt()
            }
            Setting::HomogeneousKakeya { layers } => {
                let n = layers.n();
                let h = p[n - 1] - tube.a[n - 1];
                if h < 0.0 || h > line.t_max {
                    return f64::INFINITY;
                }
                let mut best: f64 = 0.0;
                for i in 0..n - 1 {
                    let j = layers.degree_of(i);
                    let x = (p[i] - tube.a[i] - h * tube.u[i]).abs();
                    best = best.max(if j == 1 { x } else { x.powf(1.0 / j as f64) });
                }
                best
            }
            Setting::CarnotLT { spec, constants } | Setting::CarnotKakeya { spec, constants } => {
                carnot_segment_dist(spec, constants, &line, p, tube.radius())
            }
        }
    }

    pub fn tube_contains(&self, tube: &Tube, p: &[f64]) -> bool {
        self.axis_dist(tube, p) <= tube.radius()
    }

    /// A unimodular chart whose box image contains the tube.
    pub fn tube_frame(&self, tube: &Tube) -> Frame {
        let n = self.n();
        let r = tube.radius();
        let line = self.line(&tube.u, &tube.a, tube.widened);
        match self {
            Setting::HomogeneousKakeya { layers } => {
                // shear chart: x' = a' + c_n u + c', x_n = a_n + c_n
                let mut axes = vec![];
                for i in 0..n - 1 {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    axes.push(e);
                }
                let mut last = tube.u.clone();
                last.push(1.0);
                axes.push(last);
                let mut lo = vec![];
                let mut hi = vec![];
                for i in 0..n - 1 {
                    let side = r.powi(layers.degree_of(i) as i32);
                    lo.push(-side);
                    hi.push(side);
                }
                lo.push(0.0);
                hi.push(line.t_max);
                Frame { origin: tube.a.clone(), axes, lo, hi }
            }
            _ => {
                let pad = match self {
                    Setting::CarnotLT { constants, .. } | Setting::CarnotKakeya { constants, .. } => constants.c_outer * r,
                    _ => r,
                };
                let len = line.euclidean_length();
                let axes = frame_from(&line.v);
                let lo = vec![-pad; n];
                let mut hi = vec![pad; n];
                hi[0] = len + pad;
                Frame { origin: line.p0.clone(), axes, lo, hi }
            }
        }
    }

    /// Draws a point of the tube by rejection from its frame.
    pub fn sample_tube_point(&self, tube: &Tube, rng: &mut Rng) -> Option<Vec<f64>> {
        let f = self.tube_frame(tube);
        let n = self.n();
        let mut c = vec![0.0; n];
        let mut p = vec![0.0; n];
        for _ in 0..100_000 {
            f.sample(rng, &mut c, &mut p);
            if self.tube_contains(tube, &p) {
                return Some(p);
            }
        }
        None
    }

    /// `count` points of the tube, each with the axis parameter t of a point
    /// γ(t) within the tube radius of it. Carnot tubes use p = γ(t)·w with w
    /// uniform in the box of B_∞(0, radius), which is not Lebesgue-uniform on
    /// the tube but lands in it with certainty.
    pub fn sample_tube_points(&self, tube: &Tube, count: usize, rng: &mut Rng) -> Vec<(Vec<f64>, f64)> {
        let n = self.n();
        let line = self.line(&tube.u, &tube.a, tube.widened);
        let r = tube.radius();
        let mut out = Vec::with_capacity(count);
        match self {
            Setting::CarnotLT { spec, .. } | Setting::CarnotKakeya { spec, .. } => {
                let m1 = spec.m1();
                let vr = (r / spec.epsilon()).powi(2);
                for _ in 0..count {
                    let t = rng.random::<f64>() * line.t_max;
                    let w: Vec<f64> = (0..n)
                        .map(|i| {
                            let side = if i < m1 { r } else { vr };
                            side * (2.0 * rng.random::<f64>() - 1.0)
                        })
                        .collect();
                    out.push((spec.mul(&line.at(t), &w), t));
                }
            }
            Setting::HomogeneousKakeya { .. } => {
                let f = self.tube_frame(tube);
                let mut c = vec![0.0; n];
                let mut p = vec![0.0; n];
                for _ in 0..count {
                    f.sample(rng, &mut c, &mut p);
                    out.push((p.clone(), c[n - 1]));
                }
            }
            _ => {
                let f = self.tube_frame(tube);
                let speed = norm(&line.v);
                let mut c = vec![0.0; n];
                let mut p = vec![0.0; n];
                let mut tries = 0usize;
                while out.len() < count && tries < 1000 * count.max(1) {
                    tries += 1;
                    f.sample(rng, &mut c, &mut p);
                    if self.tube_contains(tube, &p) {
                        let t = (c[0] / speed).clamp(0.0, line.t_max);
                        out.push((p.clone(), t));
                    }
                }
            }
        }
        out
    }

    /// Frame covering the d-ball B_d(x, r); members satisfy `ambient_dist ≤ r`.
    pub fn ball_frame(&self, x: &[f64], r: f64) -> Frame {
        let n = self.n();
        match self {
            Setting::HomogeneousKakeya { layers } => {
                let lo = (0..n).map(|i| -r.powi(layers.degree_of(i) as i32)).collect();
                let hi = (0..n).map(|i| r.powi(layers.degree_of(i) as i32)).collect();
                let mut f = Frame::identity(lo, hi);
                f.origin = x.to_vec();
                f
            }
            Setting::CarnotLT { spec, .. } | Setting::CarnotKakeya { spec, .. } => {
                // left translation by x is a linear unimodular map on the box
                // of B_∞(0, r): horizontal [−r, r], vertical [−(r/ε)², (r/ε)²]
                let m1 = spec.m1();
                let vr = (r / spec.epsilon()).powi(2);
                let lo: Vec<f64> = (0..n).map(|i| if i < m1 { -r } else { -vr }).collect();
                let hi: Vec<f64> = lo.iter().map(|v| -v).collect();
                let mut axes = vec![];
                for i in 0..n {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    if i < m1 {
                        // d/dy_i of P(x¹, y¹)
                        let mut y = vec![0.0; m1];
                        y[i] = 1.0;
                        let mut pv = vec![0.0; spec.m2()];
                        spec.poly(&x[..m1], &y, &mut pv);
                        for k in 0..spec.m2() {
                            e[m1 + k] += pv[k];
                        }
                    }
                    axes.push(e);
                }
                Frame { origin: x.to_vec(), axes, lo, hi }
            }
            _ => {
                let mut f = Frame::identity(vec![-r; n], vec![r; n]);
                f.origin = x.to_vec();
                f
            }
        }
    }

    /// μ_{u,a}(F_u(a) ∩ B_d(x, r)): Euclidean arc length, or the fiber
    /// measure for FurstenbergK.
    pub fn segment_ball_measure(&self, u: &[f64], a: &[f64], x: &[f64], r: f64) -> f64 {
        let line = self.line(u, a, false);
        match self {
            Setting::FurstenbergK { fiber, .. } => {
                let (lo, hi) = euclid_ball_chord(&line, x, r);
                if hi < lo {
                    0.0
                } else {
                    fiber.measure(lo, hi)
                }
            }
            Setting::EuclideanKakeya { .. } | Setting::RestrictedKakeya { .. } | Setting::NikodymHyperplane { .. } => {
                let (lo, hi) = euclid_ball_chord(&line, x, r);
                let (lo, hi) = (lo.max(0.0), hi.min(line.t_max));
                if hi < lo {
                    0.0
                } else {
                    (hi - lo) * norm(&line.v)
                }
            }
            Setting::HomogeneousKakeya { layers } => {
                let mut lo: f64 = 0.0;
                let mut hi = line.t_max;
                for i in 0..layers.n() {
                    let side = r.powi(layers.degree_of(i) as i32);
                    let (c, v) = (line.p0[i] - x[i], line.v[i]);
                    if v.abs() < 1e-300 {
                        if c.abs() > side {
                            return 0.0;
                        }
                    } else {
                        let t1 = (-side - c) / v;
                        let t2 = (side - c) / v;
                        lo = lo.max(t1.min(t2));
                        hi = hi.min(t1.max(t2));
                    }
                }
                if hi < lo {
                    0.0
                } else {
                    (hi - lo) * norm(&line.v)
                }
            }
            Setting::CarnotLT { spec, .. } | Setting::CarnotKakeya { spec, .. } => {
                let k = 20_000;
                let dt = line.t_max / k as f64;
                let mut hits = 0usize;
                for i in 0..k {
                    let q = line.at((i as f64 + 0.5) * dt);
                    if spec.dist(&q, x) <= r {
                        hits += 1;
                    }
                }
                hits as f64 * dt * norm(&line.v)
            }
        }
    }

    /// Parameter a with γ_{u,a}(t) = x on the narrow (or widened) segment.
    pub fn param_through(&self, u: &[f64], x: &[f64], t: f64, widened: bool) -> Vec<f64> {
        let n = self.n();
        match self {
            Setting::EuclideanKakeya { .. } | Setting::RestrictedKakeya { .. } => {
                let w = if widened { 2.0 } else { 1.0 };
                x.iter().zip(u).map(|(p, e)| p - (t - 0.5 * w) * e).collect()
            }
            Setting::FurstenbergK { .. } => x.iter().zip(u).map(|(p, e)| p - (t - 0.5) * e).collect(),
            Setting::NikodymHyperplane { .. } => {
                let mut base = u.to_vec();
                base.push(0.0);
                let d: Vec<f64> = x.iter().zip(&base).map(|(a, b)| a - b).collect();
                let l = norm(&d);
                let mut a: Vec<f64> = d.iter().map(|v| v / l).collect();
                a.push(l - t);
                a
            }
            Setting::HomogeneousKakeya { .. } | Setting::CarnotKakeya { .. } => {
                let mut v = u.to_vec();
                v.push(1.0);
                x.iter().zip(&v).map(|(p, e)| p - t * e).collect()
            }
            Setting::CarnotLT { spec, .. } => {
                let m1 = spec.m1();
                let mut a = vec![0.0; n];
                for i in 0..m1 {
                    a[i] = x[i] - t * u[i];
                }
                let mut pv = vec![0.0; spec.m2()];
                spec.poly(&a[..m1], &u[..m1], &mut pv);
                for k in 0..spec.m2() {
                    let dir = if k + 1 == spec.m2() { 1.0 } else { u[m1 + k] };
                    a[m1 + k] = x[m1 + k] - t * (dir + pv[k]);
                }
                a
            }
        }
    }

    /// Whether a parameter lies in the admissible region of 𝒜.
    pub fn param_admissible(&self, a: &[f64]) -> bool {
        match self {
            Setting::NikodymHyperplane { n, sigma, c_sigma } => {
                let e = &a[..*n];
                (norm(e) - 1.0).abs() < 1e-9 && e[n - 1] > sigma.cos() && a[*n] > 0.25 && a[*n] < *c_sigma
            }
            _ => true,
        }
    }

    /// Centers p_j = γ(t_j), t_j = (j−1)δ^s along the segment (s = 2 for Carnot).
    pub fn tube_cover_centers(&self, tube: &Tube) -> Result<Vec<Vec<f64>>> {
        let s = match self {
            Setting::HomogeneousKakeya { layers } => layers.s() as i32,
            Setting::CarnotLT { .. } | Setting::CarnotKakeya { .. } => 2,
            _ => return input("tube cover centers need a homogeneous or Carnot setting"),
        };
        let line = self.line(&tube.u, &tube.a, tube.widened);
        let step = tube.delta.powi(s);
        let count = (line.t_max / step).floor() as usize + 1;
        if count > 50_000_000 {
            return Err(KakeyaError::Resource(format!("{count} cover centers")));
        }
        Ok((0..count).map(|j| line.at(j as f64 * step)).collect())
    }
}

/// Parameter interval {t : |p0 + t v − x| ≤ r} (possibly empty, hi < lo).
fn euclid_ball_chord(line: &Line, x: &[f64], r: f64) -> (f64, f64) {
    let w: Vec<f64> = line.p0.iter().zip(x).map(|(p, c)| p - c).collect();
    let a = dot(&line.v, &line.v);
    let b = 2.0 * dot(&line.v, &w);
    let c = dot(&w, &w) - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return (1.0, 0.0);
    }
    let sq = disc.sqrt();
    ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a))
}

/// min_t d∞(p, γ(t)) over the segment, with early exits relative to `radius`:
/// the exact value is returned whenever it is near `radius`.
fn carnot_segment_dist(spec: &GroupSpec, k: &CarnotConstants, line: &Line, p: &[f64], radius: f64) -> f64 {
    // Euclidean prefilter via |p − q| ≤ c_outer·d∞(p, q)
    let v: Vec<f64> = line.v.iter().map(|x| x * line.t_max).collect();
    let (de, s_star) = point_segment(p, &line.p0, &v);
    if radius <= 1.0 && de > k.c_outer * radius * 1.000001 {
        return de / k.c_outer;
    }
    let f = |t: f64| spec.dist(p, &line.at(t));
    let guess = f(s_star * line.t_max);
    if guess <= radius * 0.5 {
        return guess;
    }
    if radius > 1.0 {
        return min_on_interval(&f, 0.0, line.t_max, 64, radius / 10.0);
    }
    // |p − γ(t)| ≥ |t − t*|·|v|, so d∞ ≤ 4r forces t into a short window
    let w = 4.0 * k.c_outer * radius / norm(&line.v);
    let t_star = s_star * line.t_max;
    min_on_interval(&f, (t_star - w).max(0.0), (t_star + w).min(line.t_max), 16, radius / 10.0)
}

/// Coarse grid of `cells` cells, golden-section refinement to 1e−10 around the
/// best node, and a 4× rescan when refinement disagrees with the coarse
/// minimum by more than `tol`.
pub fn min_on_interval(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, cells: usize, tol: f64) -> f64 {
    let scan = |cells: usize| -> (f64, f64) {
        let h = (hi - lo) / cells as f64;
        let mut best = (f64::INFINITY, lo);
        for i in 0..=cells {
            let t = lo + i as f64 * h;
            let v = f(t);
            if v < best.0 {
                best = (v, t);
            }
        }
        let (a, b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
        let refined = golden(f, a, b);
        (best.0, refined.min(best.0))
    };
    let (coarse, refined) = scan(cells);
    if coarse - refined > tol {
        let (_, r2) = scan(cells * 4);
        return refined.min(r2);
    }
    refined
}

fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).min(fc).min(fd)
}
