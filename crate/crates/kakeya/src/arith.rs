//! Lattice slices of discretized sets, the sums/differences proposition
//! checked by enumeration, and the slice-and-count Minkowski pipeline.

use crate::error::{input, KakeyaError, Result};
use crate::geometry::{Bounds, LayerSpec};
use crate::rng::substream;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

/// Integer tuples on the anisotropic lattice δZ^{m₁} × … × δ^sZ^{m_s}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSet {
    pub points: BTreeSet<Vec<i64>>,
    /// Lattice step per coordinate.
    pub scale: Vec<f64>,
}

impl LatticeSet {
    pub fn new(scale: Vec<f64>) -> Self {
        LatticeSet { points: BTreeSet::new(), scale }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_vec(&self) -> Vec<Vec<i64>> {
        self.points.iter().cloned().collect()
    }
}

/// Steps δ^{deg(k)} for the first n−1 coordinates.
pub fn slice_steps(delta: f64, layers: &LayerSpec) -> Vec<f64> {
    (0..layers.n() - 1).map(|k| delta.powi(layers.degree_of(k) as i32)).collect()
}

/// Lattice points i with (i, t) in the open δ-neighbourhood of the set. The
/// neighbourhood test probes 5 interior offsets per axis of the d-ball.
pub fn slice<F>(indicator: F, bounds: &Bounds, t: f64, delta: f64, layers: &LayerSpec) -> Result<LatticeSet>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    if !(0.0..=1.0).contains(&t) {
        return input("slice level must lie in [0, 1]");
    }
    let n = layers.n();
    if bounds.dim() != n {
        return input("bounds dimension does not match the layers");
    }
    let steps = slice_steps(delta, layers);
    let side: Vec<f64> = (0..n).map(|k| delta.powi(layers.degree_of(k) as i32)).collect();
    let ranges: Vec<(i64, i64)> = (0..n - 1)
        .map(|k| (((bounds.lo[k] - side[k]) / steps[k]).floor() as i64, ((bounds.hi[k] + side[k]) / steps[k]).ceil() as i64))
        .collect();
    let total: f64 = ranges.iter().map(|(a, b)| (b - a + 1) as f64).product();
    if total > 5e7 {
        return Err(KakeyaError::Resource(format!("slice scan of {total} lattice points")));
    }
    let offsets = [-2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0];
    let mut cells: Vec<Vec<i64>> = Vec::new();
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        cells.push(idx.clone());
        for k in 0..n - 1 {
            idx[k] += 1;
            if idx[k] <= ranges[k].1 {
                continue 'outer;
            }
            idx[k] = ranges[k].0;
        }
        break;
    }
    let probes = offsets.len().pow(n as u32);
    let hits: Vec<Vec<i64>> = cells
        .into_par_iter()
        .filter(|i| {
            let mut p = vec![0.0; n];
            (0..probes).any(|mut code| {
                for k in 0..n {
                    let o = offsets[code % offsets.len()];
                    code /= offsets.len();
                    let c = if k + 1 == n { t } else { i[k] as f64 * steps[k] };
                    p[k] = c + o * side[k];
                }
                indicator(&p)
            })
        })
        .collect();
    Ok(LatticeSet { points: hits.into_iter().collect(), scale: steps })
}

/// Slice of the union of δ-tubes around segments a + t(u, 1): lattice points
/// within open d-distance δ of a segment's point at the same height.
pub fn segment_slice(segments: &[(Vec<f64>, Vec<f64>)], t: f64, delta: f64, layers: &LayerSpec) -> LatticeSet {
    let steps = slice_steps(delta, layers);
    let mut out = LatticeSet::new(steps.clone());
    for (u, a) in segments {
        let c: Vec<f64> = a.iter().zip(u).map(|(a, u)| a + t * u).collect();
        let ranges: Vec<(i64, i64)> =
            c.iter().zip(&steps).map(|(c, h)| (((c - h) / h).floor() as i64, ((c + h) / h).ceil() as i64)).collect();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            if idx.iter().zip(&c).zip(&steps).all(|((i, c), h)| (*i as f64 * h - c).abs() < *h) {
                out.points.insert(idx.clone());
            }
            for k in 0..idx.len() {
                idx[k] += 1;
                if idx[k] <= ranges[k].1 {
                    continue 'outer;
                }
                idx[k] = ranges[k].0;
            }
            break;
        }
    }
    out
}

/// Exact #{x + y} and #{x − y} over (x, y) ∈ G, with G indexing `a` × `b`.
/// Sums x + y stand for the doubled midpoints, which keeps them integral.
pub fn sum_diff_stats(a: &[Vec<i64>], b: &[Vec<i64>], g: &[(usize, usize)]) -> Result<(usize, usize)> {
    let mut sums: HashSet<Vec<i64>> = HashSet::new();
    let mut diffs: HashSet<Vec<i64>> = HashSet::new();
    for &(i, j) in g {
        let (Some(x), Some(y)) = (a.get(i), b.get(j)) else {
            return input("G must be a subset of A × B");
        };
        if x.len() != y.len() {
            return input("A and B points differ in dimension");
        }
        sums.insert(x.iter().zip(y).map(|(p, q)| p + q).collect());
        diffs.insert(x.iter().zip(y).map(|(p, q)| p - q).collect());
    }
    Ok((sums.len(), diffs.len()))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Counterexample {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub g: Vec<(i64, i64)>,
    pub sums: usize,
    pub diffs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionParams {
    pub n_max: usize,
    pub universe_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub params: PropositionParams,
    pub checked_count: u64,
    pub exhaustive: bool,
    pub counterexamples: Vec<Counterexample>,
}

/// Draws above this many (A, B, G) triples switch to random sampling.
pub const EXHAUSTIVE_CAP: u64 = 1 << 20;

fn subsets(universe: usize, max_size: usize) -> Vec<Vec<i64>> {
    (1u32..(1 << universe))
        .filter(|m| (m.count_ones() as usize) <= max_size)
        .map(|m| (0..universe as i64).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn check_triple(a: &[i64], b: &[i64], pairs: &[(i64, i64)]) -> Option<Counterexample> {
    let mut sums = HashSet::new();
    let mut diffs = HashSet::new();
    for &(x, y) in pairs {
        sums.insert(x + y);
        diffs.insert(x - y);
    }
    let n = a.len().max(b.len()).max(sums.len()) as f64;
    // hypothesis #sums ≤ N holds by the choice of N
    (diffs.len() as f64 > n.powf(11.0 / 6.0) + 1e-9).then(|| Counterexample {
        a: a.to_vec(),
        b: b.to_vec(),
        g: pairs.to_vec(),
        sums: sums.len(),
        diffs: diffs.len(),
    })
}

/// Checks #{x − y : (x, y) ∈ G} ≤ N^{11/6}, N = max(|A|, |B|, #sums), over
/// all A, B ⊆ {0..U−1} with 1 ≤ |A|, |B| ≤ N_max and all G ⊆ A × B, or over
/// 2²⁰ random triples when that family is larger.
pub fn proposition_exhaustive(n_max: usize, universe_size: usize, seed: u64) -> Result<PropositionReport> {
    if universe_size > 8 || n_max > 4 {
        return Err(KakeyaError::Resource("proposition check is capped at universe 8 and N_max 4".into()));
    }
    if universe_size == 0 || n_max == 0 {
        return input("universe and N_max must be positive");
    }
    let sets = subsets(universe_size, n_max);
    let total: u64 = sets.iter().map(|a| sets.iter().map(|b| 1u64 << (a.len() * b.len())).sum::<u64>()).sum();
    let params = PropositionParams { n_max, universe_size, seed };
    let mut counterexamples: Vec<Counterexample>;
    let checked;
    let exhaustive = total <= EXHAUSTIVE_CAP;
    if exhaustive {
        counterexamples = sets
            .par_iter()
            .flat_map_iter(|a| {
                let mut found = Vec::new();
                for b in &sets {
                    let all: Vec<(i64, i64)> = a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect();
                    for mask in 0u64..(1 << all.len()) {
                        let g: Vec<(i64, i64)> = (0..all.len()).filter(|k| mask >> k & 1 == 1).map(|k| all[k]).collect();
                        if let Some(c) = check_triple(a, b, &g) {
                            found.push(c);
                        }
                    }
                }
                found
            })
            .collect();
        checked = total;
    } else {
        let mut rng = substream(seed, 0);
        counterexamples = Vec::new();
        for _ in 0..EXHAUSTIVE_CAP {
            let a = &sets[rng.random_range(0..sets.len())];
            let b = &sets[rng.random_range(0..sets.len())];
            let g: Vec<(i64, i64)> = a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).filter(|_| rng.random::<bool>()).collect();
            if let Some(c) = check_triple(a, b, &g) {
                counterexamples.push(c);
            }
        }
        checked = EXHAUSTIVE_CAP;
    }
    counterexamples.sort();
    counterexamples.dedup();
    Ok(PropositionReport { params, checked_count: checked, exhaustive, counterexamples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiReport {
    pub delta: f64,
    pub c: f64,
    /// 100 δ^{(1−c)(Q−s)}.
    pub threshold: f64,
    /// (t, #K[t]) over the level grid.
    pub slice_counts: Vec<(f64, usize)>,
    pub hypothesis_met: bool,
    /// t̄, t̄ + d, t̄ + 2d (0, 1/2, 1 when the hypothesis fails).
    pub levels: [f64; 3],
    pub g_size: usize,
    pub sums: usize,
    pub diffs: usize,
    pub k_half: usize,
    pub n_value: usize,
    /// Distinct segment directions in the family.
    pub directions: usize,
    /// #sums / #K[t̄+d]; each doubled midpoint sits within a step of K[t̄+d].
    pub sums_ratio: f64,
    pub proposition_holds: bool,
    /// Hypothesis met and the proposition violated.
    pub contradiction: bool,
    pub note: String,
}

/// The slice-and-count procedure for the union of δ-tubes around segments
/// a + t(u, 1), t ∈ [0, 1], over `levels` + 1 equally spaced heights.
pub fn minkowski_pipeline(
    segments: &[(Vec<f64>, Vec<f64>)],
    delta: f64,
    layers: &LayerSpec,
    c: f64,
    levels: usize,
) -> Result<MinkowskiReport> {
    pipeline(segments, delta, layers, c, levels, |t| Ok(segment_slice(segments, t, delta, layers)))
}

/// As [`minkowski_pipeline`] with slices read off an arbitrary set through
/// [`slice`]; `segments` only supply the pairs G and may be empty.
pub fn minkowski_pipeline_indicator<F>(
    indicator: F,
    bounds: &Bounds,
    segments: &[(Vec<f64>, Vec<f64>)],
    delta: f64,
    layers: &LayerSpec,
    c: f64,
    levels: usize,
) -> Result<MinkowskiReport>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    pipeline(segments, delta, layers, c, levels, |t| slice(&indicator, bounds, t, delta, layers))
}

fn pipeline<S>(
    segments: &[(Vec<f64>, Vec<f64>)],
    delta: f64,
    layers: &LayerSpec,
    c: f64,
    levels: usize,
    slicer: S,
) -> Result<MinkowskiReport>
where
    S: Fn(f64) -> Result<LatticeSet> + Sync,
{
    if !(c < 6.0 / 11.0 && c > 0.0) {
        return input("c must lie in (0, 6/11)");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return input("δ must lie in (0, 1)");
    }
    if levels < 2 || levels % 2 == 1 {
        return input("the level grid needs an even number of steps");
    }
    let n = layers.n();
    if segments.iter().any(|(u, a)| u.len() != n - 1 || a.len() != n - 1) {
        return input("segments need (u, a) in ℝ^{n−1}");
    }
    let q = layers.q() as f64;
    let s = layers.s() as f64;
    let threshold = 100.0 * delta.powf((1.0 - c) * (q - s));
    let ts: Vec<f64> = (0..=levels).map(|k| k as f64 / levels as f64).collect();
    let counts: Vec<usize> = ts.iter().map(|&t| slicer(t).map(|k| k.len())).collect::<Result<_>>()?;
    let cell = delta.powf(q - s);
    let small: Vec<bool> = counts.iter().map(|&k| k as f64 * cell <= threshold).collect();
    // largest spacing first, then the lowest start
    let mut found = None;
    'search: for d in (1..=levels / 2).rev() {
        for t0 in 0..=levels - 2 * d {
            if small[t0] && small[t0 + d] && small[t0 + 2 * d] {
                found = Some((t0, d));
                break 'search;
            }
        }
    }
    let hypothesis_met = found.is_some();
    let (t0, d) = found.unwrap_or((0, levels / 2));
    let lv = [ts[t0], ts[t0 + d], ts[t0 + 2 * d]];
    let k0 = slicer(lv[0])?.to_vec();
    let k2 = slicer(lv[2])?.to_vec();
    let k_half = slicer(lv[1])?.len();
    let pos = |set: &Vec<Vec<i64>>, p: &Vec<i64>| set.binary_search(p).ok();
    let mut g: BTreeSet<(usize, usize)> = BTreeSet::new();
    for seg in segments {
        let one = std::slice::from_ref(seg);
        let ps = segment_slice(one, lv[0], delta, layers);
        let qs = segment_slice(one, lv[2], delta, layers);
        for p in &ps.points {
            for qq in &qs.points {
                if let (Some(i), Some(j)) = (pos(&k0, p), pos(&k2, qq)) {
                    g.insert((i, j));
                }
            }
        }
    }
    let g: Vec<(usize, usize)> = g.into_iter().collect();
    let (sums, diffs) = sum_diff_stats(&k0, &k2, &g)?;
    let n_value = k0.len().max(k2.len()).max(sums);
    let proposition_holds = diffs as f64 <= (n_value as f64).powf(11.0 / 6.0) + 1e-9;
    let directions = segments.iter().map(|(u, _)| u.iter().map(|x| x.to_bits()).collect::<Vec<_>>()).collect::<HashSet<_>>().len();
    let note = if hypothesis_met {
        "small slices found at three equally spaced levels".to_string()
    } else {
        "hypothesis not met: no three equally spaced small slices; counts reported at 0, 1/2, 1".to_string()
    };
    Ok(MinkowskiReport {
        delta,
        c,
        threshold,
        slice_counts: ts.iter().cloned().zip(counts).collect(),
        hypothesis_met,
        levels: lv,
        g_size: g.len(),
        sums,
        diffs,
        k_half,
        n_value,
        directions,
        sums_ratio: sums as f64 / k_half.max(1) as f64,
        proposition_holds,
        contradiction: hypothesis_met && !proposition_holds,
        note,
    })
}

/// Segments a + t(u, 1) with directions on a grid of spacing just above
/// δ^{deg} in [−1/2, 1/2]^{n−1}, so about δ^{s−Q} pairwise δ-separated
/// directions, and seeded offsets a ∈ [0, 1]^{n−1}.
pub fn separated_segments(layers: &LayerSpec, delta: f64, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if !(delta > 0.0 && delta < 1.0) {
        return input("δ must lie in (0, 1)");
    }
    let steps: Vec<f64> = slice_steps(delta, layers).iter().map(|h| h * (1.0 + 1e-3)).collect();
    let per_axis: Vec<usize> = steps.iter().map(|h| (1.0 / h).floor() as usize + 1).collect();
    let total: f64 = per_axis.iter().map(|k| *k as f64).product();
    if total > 1e6 {
        return Err(KakeyaError::Resource(format!("{total} directions")));
    }
    let mut rng = substream(seed, 0);
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; steps.len()];
    'outer: loop {
        let u: Vec<f64> = idx.iter().zip(&steps).zip(&per_axis).map(|((i, h), k)| (*i as f64 - (*k as f64 - 1.0) / 2.0) * h).collect();
        let a: Vec<f64> = (0..steps.len()).map(|_| rng.random::<f64>()).collect();
        out.push((u, a));
        for k in 0..idx.len() {
            idx[k] += 1;
            if idx[k] < per_axis[k] {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_examples() {
        let a = vec![vec![0], vec![1]];
        let g: Vec<(usize, usize)> = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).collect();
        assert_eq!(sum_diff_stats(&a, &a, &g).unwrap(), (3, 3));
        assert_eq!(sum_diff_stats(&a, &a, &[]).unwrap(), (0, 0));
        let ap: Vec<Vec<i64>> = (0..6).map(|i| vec![i]).collect();
        let diag: Vec<(usize, usize)> = (0..6).map(|i| (i, i)).collect();
        assert_eq!(sum_diff_stats(&ap, &ap, &diag).unwrap(), (6, 1));
        assert!(sum_diff_stats(&a, &a, &[(0, 5)]).is_err());
    }

    #[test]
    fn small_proposition_runs() {
        let r = proposition_exhaustive(2, 4, 0).unwrap();
        assert!(r.exhaustive);
        assert!(r.counterexamples.is_empty());
        assert!(proposition_exhaustive(5, 4, 0).is_err());
        assert!(proposition_exhaustive(2, 9, 0).is_err());
        let r = proposition_exhaustive(1, 3, 0).unwrap();
        assert!(r.counterexamples.is_empty());
    }

    #[test]
    fn axis_slice_is_one_point() {
        let l = LayerSpec::new(vec![1, 1]).unwrap();
        let b = Bounds::new(vec![-0.5, 0.0], vec![0.5, 1.0]).unwrap();
        let k = slice(|p: &[f64]| p[0] == 0.0 && (0.0..=1.0).contains(&p[1]), &b, 0.5, 0.1, &l).unwrap();
        assert_eq!(k.to_vec(), vec![vec![0]]);
        let e = slice(|_: &[f64]| false, &b, 0.5, 0.1, &l).unwrap();
        assert!(e.is_empty());
    }

    #[test]
    fn single_segment_pipeline() {
        let l = LayerSpec::new(vec![2, 1]).unwrap();
        let seg = vec![(vec![0.1, -0.2], vec![0.31, 0.17])];
        // at most 2 lattice points per axis at each end
        for delta in [0.01, 0.001] {
            let r = minkowski_pipeline(&seg, delta, &l, 0.5, 8).unwrap();
            assert!(r.sums <= 16 && r.diffs <= 16, "{r:?}");
            assert_eq!(r.directions, 1);
        }
    }

    #[test]
    fn separated_family_differences() {
        for m in [vec![1usize, 1], vec![2, 1], vec![1, 2]] {
            let l = LayerSpec::new(m).unwrap();
            for delta in [0.25, 0.125, 0.0625] {
                let segs = separated_segments(&l, delta, 3).unwrap();
                // small c keeps the full span 0, 1/2, 1
                let r = minkowski_pipeline(&segs, delta, &l, 0.1, 4).unwrap();
                assert_eq!(r.levels, [0.0, 0.5, 1.0]);
                let target = delta.powf(l.s() as f64 - l.q() as f64);
                assert!(r.diffs as f64 >= 0.5 * target, "{:?} δ={delta}: {} vs {target}", l, r.diffs);
                assert!(r.proposition_holds);
            }
        }
    }

    #[test]
    fn full_box_fails_hypothesis() {
        let l = LayerSpec::new(vec![1, 1]).unwrap();
        let b = Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let inside = |p: &[f64]| p.iter().all(|x| (0.0..=1.0).contains(x));
        // threshold 100·δ^{0.9} ≈ 0.2 sits below the unit slice measure
        let r = minkowski_pipeline_indicator(inside, &b, &[], 1e-3, &l, 0.1, 4).unwrap();
        assert!(!r.hypothesis_met);
        assert!(!r.contradiction);
        assert!(r.note.starts_with("hypothesis not met"));
    }
}
