//! The discretized Kakeya maximal function, bush and hairbrush extraction,
//! box-counting dimension and test-set constructions.

use crate::axiomlab::{intersection_diameter, trace_separation, tubes_meet};
use crate::covers::{five_r_cover, greedy_net, grid_cover_count, grid_cover_points, mc_volume, mc_volume_frame, Ball, DEFAULT_CELL_CAP};
use crate::error::{input, KakeyaError, Result};
use crate::fit::{linear_fit, RegressionResult};
use crate::geometry::{Bounds, LayerSpec};
use crate::rng::{derive, substream};
use crate::settings::{Frame, Setting, Tube};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Dense nonnegative field on a box, one value per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub bounds: Bounds,
    /// Cells per unit length along each axis.
    pub resolution: Vec<f64>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub layers: Option<LayerSpec>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    bounds: Bounds,
    resolution: Vec<f64>,
    shape: Vec<usize>,
    layers: Option<LayerSpec>,
}

impl GridField {
    pub fn zeros(bounds: Bounds, resolution: Vec<f64>) -> Result<Self> {
        if resolution.len() != bounds.dim() {
            return input("resolution needs one entry per axis");
        }
        if resolution.iter().any(|r| !(*r >= 4.0) || !r.is_finite()) {
            return input("resolution must be at least 4 cells per unit");
        }
        let shape: Vec<usize> =
            bounds.lo.iter().zip(&bounds.hi).zip(&resolution).map(|((a, b), r)| (((b - a) * r) - 1e-9).ceil().max(1.0) as usize).collect();
        let total: usize = shape.iter().product();
        if total > 200_000_000 {
            return Err(KakeyaError::Resource(format!("grid field with {total} cells")));
        }
        Ok(GridField { bounds, resolution, shape, values: vec![0.0; total], layers: None })
    }

    /// Samples `f` at cell centers.
    pub fn from_fn<F>(bounds: Bounds, resolution: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let mut g = GridField::zeros(bounds, resolution)?;
        let shape = g.shape.clone();
        let (lo, res) = (g.bounds.lo.clone(), g.resolution.clone());
        g.values.par_iter_mut().enumerate().for_each(|(idx, v)| {
            let mut rest = idx;
            let mut p = vec![0.0; shape.len()];
            for i in (0..shape.len()).rev() {
                let k = rest % shape[i];
                rest /= shape[i];
                p[i] = lo[i] + (k as f64 + 0.5) / res[i];
            }
            *v = f(&p);
        });
        if g.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return input("field values must be finite and nonnegative");
        }
        Ok(g)
    }

    pub fn indicator<F>(bounds: Bounds, resolution: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool + Sync,
    {
        GridField::from_fn(bounds, resolution, |p| if f(p) { 1.0 } else { 0.0 })
    }

    fn cell_of(&self, p: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for i in 0..self.shape.len() {
            let x = (p[i] - self.bounds.lo[i]) * self.resolution[i];
            if !(x >= 0.0) {
                return None;
            }
            let k = x as usize;
            if k >= self.shape[i] {
                return None;
            }
            idx = idx * self.shape[i] + k;
        }
        Some(idx)
    }

    /// Value of the cell containing `p`; zero outside the box.
    pub fn value_at(&self, p: &[f64]) -> f64 {
        self.cell_of(p).map_or(0.0, |i| self.values[i])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.resolution.iter().map(|r| 1.0 / r).product()
    }

    /// ∫ f dμ, exact for the piecewise-constant field.
    pub fn integral(&self) -> f64 {
        crate::rng::pairwise_sum(&self.values) * self.cell_volume()
    }

    /// Writes `<stem>.bin` (little-endian f64, row-major) and `<stem>.json`.
    pub fn save(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        let bin = stem.with_extension("bin");
        let json = stem.with_extension("json");
        let mut bytes = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let io = |e: std::io::Error| KakeyaError::Input(format!("writing grid field: {e}"));
        fs::write(&bin, bytes).map_err(io)?;
        let side = Sidecar {
            bounds: self.bounds.clone(),
            resolution: self.resolution.clone(),
            shape: self.shape.clone(),
            layers: self.layers.clone(),
        };
        let mut f = fs::File::create(&json).map_err(io)?;
        let text = serde_json::to_string_pretty(&side).map_err(|e| KakeyaError::Input(e.to_string()))?;
        f.write_all(text.as_bytes()).map_err(io)?;
        f.write_all(b"\n").map_err(io)?;
        Ok((bin, json))
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let io = |e: std::io::Error| KakeyaError::Input(format!("reading grid field: {e}"));
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(stem.with_extension("json")).map_err(io)?)
            .map_err(|e| KakeyaError::Input(format!("grid field sidecar: {e}")))?;
        let bytes = fs::read(stem.with_extension("bin")).map_err(io)?;
        let total: usize = side.shape.iter().product();
        if bytes.len() != total * 8 {
            return input(format!("grid field has {} bytes, expected {}", bytes.len(), total * 8));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(GridField { bounds: side.bounds, resolution: side.resolution, shape: side.shape, values, layers: side.layers })
    }
}

/// Samples per tube average.
pub const TUBE_SAMPLES: usize = 4096;

/// Average of f over T^δ_u(a) from uniform frame samples (a fixed seed gives
/// common random numbers across parameters).
pub fn tube_average(setting: &Setting, f: &GridField, tube: &Tube, samples: usize, seed: u64) -> Result<f64> {
    let frame = setting.tube_frame(tube);
    let mut rng = substream(seed, 0);
    let n = frame.lo.len();
    let (mut c, mut p) = (vec![0.0; n], vec![0.0; n]);
    let (mut sum, mut hits) = (0.0, 0usize);
    for _ in 0..samples {
        frame.sample(&mut rng, &mut c, &mut p);
        if setting.tube_contains(tube, &p) {
            sum += f.value_at(&p);
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(KakeyaError::Numeric("zero tube volume estimate".into()));
    }
    Ok(sum / hits as f64)
}

/// f^d_δ(u): the largest tube average over `param_samples` random a plus a
/// 16-step coordinate ±δ refinement of the best one.
pub fn maximal_function(setting: &Setting, f: &GridField, delta: f64, u: &[f64], param_samples: usize, seed: u64) -> Result<f64> {
    if param_samples < 32 {
        return input("maximal_function needs at least 32 parameter samples");
    }
    let mut rng = substream(seed, 1);
    let params: Vec<Vec<f64>> = (0..param_samples).map(|_| setting.sample_param(&mut rng)).collect();
    maximal_function_over(setting, f, delta, u, &params, seed)
}

/// As [`maximal_function`] over an explicit parameter list.
pub fn maximal_function_over(setting: &Setting, f: &GridField, delta: f64, u: &[f64], params: &[Vec<f64>], seed: u64) -> Result<f64> {
    if params.is_empty() {
        return input("no tube parameters");
    }
    let avg = |a: &[f64]| tube_average(setting, f, &Tube::new(u.to_vec(), a.to_vec(), delta), TUBE_SAMPLES, derive(seed, 2));
    let mut best = (f64::NEG_INFINITY, params[0].clone());
    for a in params {
        let v = avg(a)?;
        if v > best.0 {
            best = (v, a.clone());
        }
    }
    let dim = best.1.len();
    for step in 0..16 {
        let i = step % dim;
        for sgn in [1.0, -1.0] {
            let mut a = best.1.clone();
            a[i] += sgn * delta;
            if !setting.param_admissible(&a) {
                continue;
            }
            let v = avg(&a)?;
            if v > best.0 {
                best = (v, a);
            }
        }
    }
    Ok(best.0)
}

/// (Σ_j δ^S v_j^p)^{1/p}.
pub fn lp_norm_net(values: &[f64], p: f64, delta: f64, s: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return input("p must be at least 1");
    }
    let w = delta.powf(s);
    Ok(values.iter().map(|v| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p))
}

/// A maximal δ-net of the direction space from sampled candidates.
pub fn direction_net(setting: &Setting, delta: f64, oversample: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let s = setting.s_exponent();
    let count = (oversample * delta.powf(-s)).ceil().max(16.0) as usize;
    let cands = setting.sample_direction(seed, count)?;
    Ok(greedy_net(&cands, delta, |a, b| setting.d_z(a, b))?.points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeRow {
    pub delta: f64,
    pub lambda: f64,
    /// ν{u in the net : f^d_δ(u) > λ} with weight δ^S per net point.
    pub lhs: f64,
    /// λ^{-(S+2)/2} δ^{S/2−T} μ(E).
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeReport {
    pub mu_e: f64,
    pub rows: Vec<WeakTypeRow>,
    /// Fitted C per δ: the largest ratio over λ.
    pub constants: Vec<(f64, f64)>,
    pub net_sizes: Vec<(f64, usize)>,
}

/// Weak-type check of ν{f^d_δ > λ} ≤ C λ^{-(S+2)/2} δ^{S/2−T} μ(E) for E
/// given as a grid indicator. No threshold on C is applied.
pub fn weak_type_check(
    setting: &Setting,
    e: &GridField,
    delta_list: &[f64],
    lambda_grid: &[f64],
    param_samples: usize,
    seed: u64,
) -> Result<WeakTypeReport> {
    if lambda_grid.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
        return input("λ values must lie in (0,1]");
    }
    let nom = setting.nominal_exponents();
    let (s, t) = (nom.s, nom.t);
    let mu_e = e.integral();
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    let mut net_sizes = Vec::new();
    for (di, &delta) in delta_list.iter().enumerate() {
        let net = direction_net(setting, delta, 8.0, derive(seed, di as u64))?;
        net_sizes.push((delta, net.len()));
        let vals: Vec<f64> = if mu_e == 0.0 {
            vec![0.0; net.len()]
        } else {
            net.par_iter()
                .enumerate()
                .map(|(k, u)| maximal_function(setting, e, delta, u, param_samples, derive(seed, ((di as u64) << 32) | k as u64)))
                .collect::<Result<_>>()?
        };
        let mut c: f64 = 0.0;
        for &lambda in lambda_grid {
            let lhs = vals.iter().filter(|v| **v > lambda).count() as f64 * delta.powf(s);
            let rhs = lambda.powf(-(s + 2.0) / 2.0) * delta.powf(s / 2.0 - t) * mu_e;
            let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
            c = c.max(ratio);
            rows.push(WeakTypeRow { delta, lambda, lhs, rhs, ratio });
        }
        constants.push((delta, c));
    }
    Ok(WeakTypeReport { mu_e, rows, constants, net_sizes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BushCertificate {
    pub x0: Vec<f64>,
    /// Largest multiplicity of Σ_j χ_{T_j∩E} over the sample points.
    pub m: usize,
    /// Tubes surviving the μ(E ∩ T) > λμ(T) precondition.
    pub n: usize,
    pub lambda: f64,
    pub delta: f64,
    /// Tubes through x₀.
    pub bush: Vec<usize>,
    /// The L tubes kept by the 5r-cover in direction space.
    pub selected: Vec<usize>,
    pub dropped: Vec<usize>,
    pub mu_e: f64,
    pub c1: f64,
    pub c2: f64,
    pub b_measured: f64,
    /// b with a 25% margin for the sampled diameters.
    pub b: f64,
    pub c: f64,
    /// bδ/(cλ).
    pub direction_radius: f64,
    /// cλ.
    pub ball_radius: f64,
    /// Largest μ(T_j ∩ B(x₀, cλ))/μ(T_j) over the bush; at most λ/2 expected.
    pub cap_ratio: f64,
    /// N M⁻¹ λ δ^T.
    pub lne1_bound: f64,
    /// M λ^{S+1} δ^T.
    pub lne2_bound: f64,
    /// Σ_k μ(E ∩ T′_k \ B(x₀, cλ)).
    pub portion_sum: f64,
    /// Bound/μ(E): the constants needed for μ(E) ≥ bound/K.
    pub lne1_constant: f64,
    pub lne2_constant: f64,
    /// Sample points of one selected portion lying in another.
    pub shared_hits: usize,
    pub warnings: Vec<String>,
}

impl BushCertificate {
    pub fn holds(&self, max_constant: f64) -> bool {
        self.shared_hits == 0 && self.lne1_constant <= max_constant && self.lne2_constant <= max_constant
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BushOptions {
    pub points_per_tube: usize,
    pub volume_samples: usize,
    pub e_samples: usize,
}

impl Default for BushOptions {
    fn default() -> Self {
        BushOptions { points_per_tube: 2000, volume_samples: 20_000, e_samples: 400_000 }
    }
}

/// ⌈δ^{-S}⌉ tubes with random directions whose axes all pass through `x0`
/// at a random parameter along each segment.
pub fn common_point_family(setting: &Setting, delta: f64, x0: &[f64], seed: u64) -> Result<Vec<Tube>> {
    if x0.len() != setting.n() {
        return input("x0 must lie in the ambient space");
    }
    let m = delta.powf(-setting.s_exponent()).ceil() as usize;
    let dirs = setting.sample_direction(seed, m)?;
    let mut rng = substream(derive(seed, 1), 0);
    Ok(dirs
        .into_iter()
        .map(|u| {
            let t: f64 = rand::Rng::random(&mut rng);
            let a = setting.param_through(&u, x0, t, false);
            Tube::new(u, a, delta)
        })
        .collect())
}

/// Builds the bush certificate for a tube family and a set E ⊂ `e_bounds`.
pub fn extract_bush<E>(
    setting: &Setting,
    tubes: &[Tube],
    e: E,
    e_bounds: &Bounds,
    lambda: f64,
    seed: u64,
    opts: &BushOptions,
) -> Result<BushCertificate>
where
    E: Fn(&[f64]) -> bool + Sync,
{
    if tubes.is_empty() {
        return input("no tubes");
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return input("λ must lie in (0,1]");
    }
    let delta = tubes[0].delta;
    if tubes.iter().any(|t| t.delta != delta) {
        return input("bush tubes need a common width");
    }
    let nom = setting.nominal_exponents();
    let (s, t_exp) = (nom.s, nom.t);
    let mut warnings = Vec::new();
    // precondition μ(E ∩ T) > λ μ(T)
    let vols: Vec<(f64, f64)> = tubes
        .par_iter()
        .enumerate()
        .map(|(j, tube)| {
            let f = setting.tube_frame(tube);
            let all = mc_volume_frame(|p| setting.tube_contains(tube, p), &f, opts.volume_samples, derive(seed, j as u64), 0)?;
            let hit = mc_volume_frame(|p| setting.tube_contains(tube, p) && e(p), &f, opts.volume_samples, derive(seed, j as u64), 0)?;
            Ok((all.estimate, hit.estimate))
        })
        .collect::<Result<_>>()?;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (j, (v, h)) in vols.iter().enumerate() {
        if *h > lambda * v {
            kept.push(j);
        } else {
            dropped.push(j);
        }
    }
    if !dropped.is_empty() {
        warnings.push(format!("{} tubes fail μ(E∩T) > λμ(T) and were dropped", dropped.len()));
    }
    if kept.is_empty() {
        return input("no tube satisfies μ(E ∩ T) > λ μ(T)");
    }
    // multiplicity field on sample points of E inside the tubes
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for &j in &kept {
        let mut rng = substream(derive(seed, 0x100 + j as u64), 0);
        for (p, _) in setting.sample_tube_points(&tubes[j], opts.points_per_tube, &mut rng) {
            if e(&p) {
                pts.push(p);
            }
        }
    }
    let mult: Vec<usize> = pts.par_iter().map(|p| kept.iter().filter(|&&j| setting.tube_contains(&tubes[j], p)).count()).collect();
    let (mut best, mut m) = (0, 0);
    for (i, &c) in mult.iter().enumerate() {
        if c > m {
            m = c;
            best = i;
        }
    }
    if m == 0 {
        return Err(KakeyaError::Sampling("no sample point of E inside the tubes".into()));
    }
    let x0 = pts[best].clone();
    let bush: Vec<usize> = kept.iter().copied().filter(|&j| setting.tube_contains(&tubes[j], &x0)).collect();
    // Axiom 1 and 3 constants on the bush
    let dt = delta.powf(t_exp);
    let c1 = bush.iter().map(|&j| vols[j].0 / dt).fold(f64::INFINITY, f64::min);
    let c2 = bush.iter().map(|&j| vols[j].0 / dt).fold(0.0, f64::max);
    let pairs: Vec<(usize, usize)> = (0..bush.len()).flat_map(|a| (a + 1..bush.len()).map(move |b| (a, b))).collect();
    let b_measured = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (ta, tb) = (&tubes[bush[a]], &tubes[bush[b]]);
            let dz = setting.d_z(&ta.u, &tb.u);
            let d = intersection_diameter(setting, ta, tb, 2000, derive(seed, 0x200 + (a * bush.len() + b) as u64));
            d * dz / delta
        })
        .reduce(|| 0.0, f64::max);
    let mut b = 1.25 * b_measured;
    if !(b > 0.0) {
        warnings.push("no pairwise intersections sampled; b set to 1".into());
        b = 1.0;
    }
    let c = (c1 / (4.0 * c2)).min(b);
    let ball_radius = c * lambda;
    let direction_radius = b * delta / (c * lambda);
    let outside = |p: &[f64]| setting.ambient_dist(p, &x0) > ball_radius;
    let cap_ratio = bush
        .iter()
        .map(|&j| {
            let tube = &tubes[j];
            let f = setting.tube_frame(tube);
            let cap = mc_volume_frame(
                |p| setting.tube_contains(tube, p) && !outside(p),
                &f,
                opts.volume_samples,
                derive(seed, 0x300 + j as u64),
                0,
            )?;
            Ok(cap.estimate / vols[j].0)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    // 5r-cover in direction space
    let balls: Vec<Ball> = bush.iter().map(|&j| Ball { center: tubes[j].u.clone(), radius: direction_radius }).collect();
    let selected: Vec<usize> = five_r_cover(&balls, |a, b| setting.d_z(a, b)).into_iter().map(|i| bush[i]).collect();
    // disjointness of E ∩ T′_k \ B(x₀, cλ) at sampling resolution
    let mut shared_hits = 0;
    let mut portion_sum = 0.0;
    for &k in &selected {
        let tube = &tubes[k];
        let mut rng = substream(derive(seed, 0x400 + k as u64), 0);
        for (p, _) in setting.sample_tube_points(tube, opts.points_per_tube, &mut rng) {
            if e(&p) && outside(&p) && selected.iter().any(|&l| l != k && setting.tube_contains(&tubes[l], &p)) {
                shared_hits += 1;
            }
        }
        let f = setting.tube_frame(tube);
        let part = mc_volume_frame(
            |p| setting.tube_contains(tube, p) && e(p) && outside(p),
            &f,
            opts.volume_samples,
            derive(seed, 0x500 + k as u64),
            0,
        )?;
        portion_sum += part.estimate;
    }
    let mu_e = mc_volume(&e, e_bounds, opts.e_samples, derive(seed, 0x600))?.estimate;
    if mu_e <= 0.0 {
        return Err(KakeyaError::Sampling("μ(E) estimate is zero".into()));
    }
    let n = kept.len();
    let lne1_bound = n as f64 / m as f64 * lambda * dt;
    let lne2_bound = m as f64 * lambda.powf(s + 1.0) * dt;
    Ok(BushCertificate {
        x0,
        m,
        n,
        lambda,
        delta,
        bush,
        selected,
        dropped,
        mu_e,
        c1,
        c2,
        b_measured,
        b,
        c,
        direction_radius,
        ball_radius,
        cap_ratio,
        lne1_bound,
        lne2_bound,
        portion_sum,
        lne1_constant: lne1_bound / mu_e,
        lne2_constant: lne2_bound / mu_e,
        shared_hits,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairLabel {
    pub j: usize,
    pub i: usize,
    pub l: i32,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hairbrush {
    pub anchor: usize,
    pub members: Vec<usize>,
    /// k with 2^{-k-1} < d_Z(u_i, u) ≤ 2^{-k}; `None` when d_Z ≤ δ/2.
    pub k: Vec<Option<i32>>,
    /// (l, m) labels of i ∈ I(k, j, l, m) for intersecting pairs in one I(k).
    pub pairs: Vec<PairLabel>,
}

fn dyadic(d: f64) -> i32 {
    (1.0 / d).log2().floor() as i32
}

/// The anchor with the most intersecting, δ-separated members (greedy in
/// index order; ties go to the lowest anchor index), with dyadic labels.
pub fn extract_hairbrush(setting: &Setting, tubes: &[Tube]) -> Result<Hairbrush> {
    if tubes.len() < 2 {
        return input("a hairbrush needs at least 2 tubes");
    }
    let n = tubes.len();
    let meet: Vec<Vec<bool>> =
        (0..n).into_par_iter().map(|i| (0..n).map(|j| i != j && tubes_meet(setting, &tubes[i], &tubes[j])).collect()).collect();
    let brush_of = |a: usize| -> Vec<usize> {
        let delta = tubes[a].delta;
        let mut out: Vec<usize> = Vec::new();
        for j in 0..n {
            if meet[a][j] && out.iter().all(|&m| setting.d_z(&tubes[m].u, &tubes[j].u) > delta) {
                out.push(j);
            }
        }
        out
    };
    let mut anchor = 0;
    let mut members = brush_of(0);
    for a in 1..n {
        let b = brush_of(a);
        if b.len() > members.len() {
            anchor = a;
            members = b;
        }
    }
    let u = &tubes[anchor].u;
    let delta = tubes[anchor].delta;
    let k: Vec<Option<i32>> = members
        .iter()
        .map(|&i| {
            let d = setting.d_z(&tubes[i].u, u);
            (d > delta / 2.0).then(|| dyadic(d))
        })
        .collect();
    let mut pairs = Vec::new();
    for (pj, &j) in members.iter().enumerate() {
        for (pi, &i) in members.iter().enumerate() {
            if i == j || k[pi].is_none() || k[pi] != k[pj] || !meet[i][j] {
                continue;
            }
            let l = dyadic(setting.d_z(&tubes[i].u, &tubes[j].u));
            let Some(sep) = trace_separation(setting, &tubes[j], &tubes[i], &tubes[anchor]) else {
                continue;
            };
            let base = delta * 2f64.powi(l);
            let m = if sep <= base { 0 } else { (sep / base).log2().ceil().max(1.0) as u32 };
            pairs.push(PairLabel { j, i, l, m });
        }
    }
    Ok(Hairbrush { anchor, members, k, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionFit {
    pub regression: RegressionResult,
    pub counts: Vec<(f64, u64)>,
}

impl DimensionFit {
    pub fn dimension(&self) -> f64 {
        self.regression.exponent
    }
}

fn dimension_fit(delta_list: &[f64], counts: Vec<(f64, u64)>) -> Result<DimensionFit> {
    if counts.iter().any(|c| c.1 == 0) {
        return Err(KakeyaError::Numeric("zero cover count".into()));
    }
    let pts: Vec<(f64, f64)> = counts.iter().map(|(d, c)| ((1.0 / d).ln(), (*c as f64).ln())).collect();
    let _ = delta_list;
    Ok(DimensionFit { regression: linear_fit(&pts)?, counts })
}

fn check_dimension_deltas(delta_list: &[f64]) -> Result<()> {
    if delta_list.len() < 3 {
        return input("box_dimension needs at least 3 deltas");
    }
    let lo = delta_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = delta_list.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 4.0 - 1e-12 {
        return input("box_dimension needs deltas over at least two octaves");
    }
    Ok(())
}

/// Slope of log N(δ) against log(1/δ) for an indicator on a box; cells are
/// δ^{deg(i)} wide along axis i when `layers` is given.
pub fn box_dimension<F>(indicator: F, bounds: &Bounds, layers: Option<&LayerSpec>, delta_list: &[f64]) -> Result<DimensionFit>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    check_dimension_deltas(delta_list)?;
    let counts = delta_list
        .iter()
        .map(|&d| Ok((d, grid_cover_count(&indicator, bounds, d, layers, DEFAULT_CELL_CAP)?)))
        .collect::<Result<Vec<_>>>()?;
    dimension_fit(delta_list, counts)
}

/// Point-cloud variant of [`box_dimension`].
pub fn box_dimension_points(points: &[Vec<f64>], layers: Option<&LayerSpec>, delta_list: &[f64]) -> Result<DimensionFit> {
    check_dimension_deltas(delta_list)?;
    if points.is_empty() {
        return Err(KakeyaError::Numeric("empty point cloud".into()));
    }
    let counts = delta_list.iter().map(|&d| Ok((d, grid_cover_points(points, d, layers)?))).collect::<Result<Vec<_>>>()?;
    dimension_fit(delta_list, counts)
}

/// A triangle with base [base_lo, base_hi] on y = 0 and apex (apex_x, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub base_lo: f64,
    pub base_hi: f64,
    pub apex_x: f64,
}

impl Triangle {
    /// Horizontal cross-section at height y ∈ [0, 1].
    pub fn section(&self, y: f64) -> (f64, f64) {
        (self.base_lo + y * (self.apex_x - self.base_lo), self.base_hi + y * (self.apex_x - self.base_hi))
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        if p[1] < -tol || p[1] > 1.0 + tol {
            return false;
        }
        let (a, b) = self.section(p[1].clamp(0.0, 1.0));
        p[0] >= a - tol && p[0] <= b + tol
    }
}

const APEX_X: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronTree {
    pub depth: u32,
    pub alpha: f64,
    /// Elementary triangles in base order; `shifts[i]` moved triangle i.
    pub triangles: Vec<Triangle>,
    pub shifts: Vec<f64>,
}

fn perron_with(depth: u32, alpha: f64) -> PerronTree {
    let count = 1usize << depth;
    let b = 1.0 / count as f64;
    // level-j shift of right halves: 2^{j-1} b (1 + α^{j-1} − 2α^j)
    let level: Vec<f64> = (1..=depth as i32).map(|j| 2f64.powi(j - 1) * b * (1.0 + alpha.powi(j - 1) - 2.0 * alpha.powi(j))).collect();
    let mut triangles = Vec::with_capacity(count);
    let mut shifts = Vec::with_capacity(count);
    for i in 0..count {
        let tau: f64 = (0..depth as usize).filter(|j| i >> j & 1 == 1).map(|j| level[j]).sum();
        let lo = i as f64 * b;
        triangles.push(Triangle { base_lo: lo - tau, base_hi: lo + b - tau, apex_x: APEX_X - tau });
        shifts.push(tau);
    }
    PerronTree { depth, alpha, triangles, shifts }
}

fn union_length(tris: &[Triangle], y: f64, buf: &mut Vec<(f64, f64)>) -> f64 {
    buf.clear();
    buf.extend(tris.iter().map(|t| t.section(y)));
    buf.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let (mut lo, mut hi) = buf[0];
    for &(a, b) in &buf[1..] {
        if a > hi {
            total += hi - lo;
            lo = a;
            hi = b;
        } else {
            hi = hi.max(b);
        }
    }
    total + hi - lo
}

fn union_area(tris: &[Triangle], slices: usize) -> f64 {
    let h = 1.0 / slices as f64;
    let mut buf = Vec::with_capacity(tris.len());
    let mut s = 0.0;
    for i in 0..=slices {
        let w = if i == 0 || i == slices {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * union_length(tris, i as f64 * h, &mut buf);
    }
    s * h / 3.0
}

/// Perron tree: 2^depth triangles splitting the base of the unit triangle,
/// translated by the bisection scheme with α tuned to minimize the union.
pub fn perron_construction(depth: u32) -> Result<PerronTree> {
    if !(1..=12).contains(&depth) {
        return input("Perron depth must lie in [1, 12]");
    }
    if depth == 1 {
        return Ok(perron_with(1, 1.0));
    }
    let slices = 1024;
    let area = |a: f64| union_area(&perron_with(depth, a).triangles, slices);
    let grid: Vec<f64> = (0..=16).map(|i| 0.5 + 0.5 * i as f64 / 16.0 * 0.999).collect();
    let mut k = 0;
    let vals: Vec<f64> = grid.iter().map(|&a| area(a)).collect();
    for i in 0..vals.len() {
        if vals[i] < vals[k] {
            k = i;
        }
    }
    let (mut lo, mut hi) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (area(c), area(d));
    for _ in 0..30 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = area(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = area(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    let alpha = if area(mid) <= vals[k] { mid } else { grid[k] };
    Ok(perron_with(depth, alpha))
}

impl PerronTree {
    /// Union area by horizontal slicing (composite Simpson, 4096 slices).
    pub fn area(&self) -> f64 {
        union_area(&self.triangles, 4096)
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.triangles.iter().any(|t| t.contains(p, tol))
    }

    pub fn bounds(&self) -> Bounds {
        let lo = self.triangles.iter().map(|t| t.base_lo.min(t.apex_x)).fold(f64::INFINITY, f64::min);
        let hi = self.triangles.iter().map(|t| t.base_hi.max(t.apex_x)).fold(f64::NEG_INFINITY, f64::max);
        Bounds { lo: vec![lo, 0.0], hi: vec![hi, 1.0] }
    }

    /// The contained segment from the apex to the base point that started at
    /// x ∈ [0, 1] before translation.
    pub fn segment_from_base(&self, x: f64) -> ([f64; 2], [f64; 2]) {
        let count = self.triangles.len();
        let i = ((x * count as f64) as usize).min(count - 1);
        let tau = self.shifts[i];
        ([APEX_X - tau, 1.0], [x - tau, 0.0])
    }

    /// Fraction of `n_dirs` base directions whose apex-to-base segment passes
    /// a 65-point containment scan.
    pub fn direction_coverage(&self, n_dirs: usize, tol: f64) -> f64 {
        let ok = (0..n_dirs)
            .filter(|d| {
                let x = (*d as f64 + 0.5) / n_dirs as f64;
                let (p, q) = self.segment_from_base(x);
                (0..=64).all(|k| {
                    let s = k as f64 / 64.0;
                    self.contains(&[p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])], tol)
                })
            })
            .count();
        ok as f64 / n_dirs as f64
    }
}

/// Four copies of a Perron tree rotated by multiples of 45°: every line
/// direction of the plane has a contained segment of length ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarKakeya {
    pub tree: PerronTree,
}

impl PlanarKakeya {
    pub fn new(depth: u32) -> Result<Self> {
        Ok(PlanarKakeya { tree: perron_construction(depth)? })
    }

    fn rot(p: [f64; 2], ang: f64) -> [f64; 2] {
        let (s, c) = ang.sin_cos();
        [c * p[0] - s * p[1], s * p[0] + c * p[1]]
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        (0..4).any(|r| {
            let q = Self::rot([p[0], p[1]], -(r as f64) * std::f64::consts::FRAC_PI_4);
            self.tree.contains(&q, tol)
        })
    }

    /// A contained unit-or-longer segment parallel to angle θ.
    pub fn segment(&self, theta: f64) -> ([f64; 2], [f64; 2]) {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
        let mut best = (f64::INFINITY, 0, 0.0);
        for r in 0..4 {
            let phi = (theta - r as f64 * FRAC_PI_4).rem_euclid(PI);
            let off = (phi - FRAC_PI_2).abs();
            if off < best.0 {
                best = (off, r, phi);
            }
        }
        let (_, r, phi) = best;
        let x = (APEX_X - phi.cos() / phi.sin()).clamp(0.0, 1.0);
        let (p, q) = self.tree.segment_from_base(x);
        let ang = r as f64 * FRAC_PI_4;
        (Self::rot(p, ang), Self::rot(q, ang))
    }
}

/// Indicator of K × [−window, window]^{m₂}.
pub fn product_lt_kakeya<'a, K>(planar: K, m1: usize, window: f64) -> impl Fn(&[f64]) -> bool + Sync + 'a
where
    K: Fn(&[f64]) -> bool + Sync + 'a,
{
    move |p: &[f64]| planar(&p[..m1]) && p[m1..].iter().all(|x| x.abs() <= window)
}

/// Fraction of sampled LT directions u whose segment γ_u, started above a
/// contained planar segment parallel to u¹, lies in K × window.
pub fn lt_containment_scan(setting: &Setting, kakeya: &PlanarKakeya, window: f64, n_dirs: usize, tol: f64, seed: u64) -> Result<f64> {
    let Setting::CarnotLT { spec, .. } = setting else {
        return input("the containment scan needs a CarnotLT setting");
    };
    let m1 = spec.m1();
    if m1 != 2 {
        return input("the planar Kakeya set needs m₁ = 2");
    }
    let inside = product_lt_kakeya(|q: &[f64]| kakeya.contains(q, tol), m1, window);
    let dirs = setting.sample_direction(seed, n_dirs)?;
    let n = setting.n();
    let ok = dirs
        .iter()
        .filter(|u| {
            let probe = setting.line(u, &vec![0.0; n], false);
            let (vx, vy) = (probe.v[0], probe.v[1]);
            let speed = vx.hypot(vy);
            let (p, q) = kakeya.segment(vy.atan2(vx));
            // orient the planar segment along u¹
            let (p, q) = if (q[0] - p[0]) * vx + (q[1] - p[1]) * vy >= 0.0 { (p, q) } else { (q, p) };
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            if speed * probe.t_max > len + 1e-12 {
                return false;
            }
            let mut a = vec![0.0; n];
            a[0] = p[0];
            a[1] = p[1];
            let line = setting.line(u, &a, false);
            (0..=64).all(|k| inside(&line.at(k as f64 / 64.0 * line.t_max)))
        })
        .count();
    Ok(ok as f64 / n_dirs as f64)
}

/// Frame over a box, used for planar Monte Carlo areas.
pub fn box_frame(bounds: &Bounds) -> Frame {
    Frame::identity(bounds.lo.clone(), bounds.hi.clone())
}
