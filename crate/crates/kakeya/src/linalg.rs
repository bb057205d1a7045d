//! Small dense vector helpers.

use crate::geometry::{dot, norm};

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn axpy(a: &[f64], s: f64, v: &[f64]) -> Vec<f64> {
    a.iter().zip(v).map(|(x, y)| x + s * y).collect()
}

pub fn scale(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

pub fn normalize(v: &[f64]) -> Vec<f64> {
    let l = norm(v);
    v.iter().map(|x| x / l).collect()
}

/// Orthonormal basis whose first vector is `e / |e|`.
pub fn frame_from(e: &[f64]) -> Vec<Vec<f64>> {
    let n = e.len();
    let mut basis = vec![normalize(e)];
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        for b in &basis {
            let c = dot(&w, b);
            for i in 0..n {
                w[i] -= c * b[i];
            }
        }
        // second pass for stability
        for b in &basis {
            let c = dot(&w, b);
            for i in 0..n {
                w[i] -= c * b[i];
            }
        }
        let l = norm(&w);
        if l > 1e-6 {
            basis.push(w.iter().map(|x| x / l).collect());
        }
    }
    basis
}

/// Euclidean distance from p to the segment p0 + s·v, s ∈ [0, 1], and the
/// minimizing s.
pub fn point_segment(p: &[f64], p0: &[f64], v: &[f64]) -> (f64, f64) {
    let vv = dot(v, v);
    let mut s = if vv > 0.0 {
        let mut acc = 0.0;
        for i in 0..p.len() {
            acc += (p[i] - p0[i]) * v[i];
        }
        acc / vv
    } else {
        0.0
    };
    s = s.clamp(0.0, 1.0);
    let mut d2 = 0.0;
    for i in 0..p.len() {
        let q = p0[i] + s * v[i];
        d2 += (p[i] - q) * (p[i] - q);
    }
    (d2.sqrt(), s)
}

/// Closest points between segments p + s·u and q + t·v, s, t ∈ [0, 1].
/// Returns (distance, s, t).
pub fn segment_segment(p: &[f64], u: &[f64], q: &[f64], v: &[f64]) -> (f64, f64, f64) {
    let w0 = sub(p, q);
    let a = dot(u, u);
    let b = dot(u, v);
    let c = dot(v, v);
    let d = dot(u, &w0);
    let e = dot(v, &w0);
    let den = a * c - b * b;
    let mut s = if den > 1e-14 * a * c { ((b * e - c * d) / den).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = if c > 0.0 { ((b * s + e) / c).clamp(0.0, 1.0) } else { 0.0 };
    if a > 0.0 {
        s = ((b * t - d) / a).clamp(0.0, 1.0);
    }
    if c > 0.0 {
        t = ((b * s + e) / c).clamp(0.0, 1.0);
    }
    let mut d2 = 0.0;
    for i in 0..p.len() {
        let x = p[i] + s * u[i] - q[i] - t * v[i];
        d2 += x * x;
    }
    (d2.sqrt(), s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_orthonormal() {
        let f = frame_from(&[0.3, -1.0, 2.0]);
        assert_eq!(f.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&f[i], &f[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn segment_distances() {
        let (d, s) = point_segment(&[0.5, 1.0], &[0.0, 0.0], &[1.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-15 && (s - 0.5).abs() < 1e-15);
        let (d, _) = point_segment(&[2.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-15);
        // skew lines in ℝ³ at distance 1
        let (d, s, t) = segment_segment(&[-1.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &[0.0, -1.0, 1.0], &[0.0, 2.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-12 && (s - 0.5).abs() < 1e-12 && (t - 0.5).abs() < 1e-12);
        // parallel segments
        let (d, _, _) = segment_segment(&[0.0, 0.0], &[1.0, 0.0], &[0.5, 1.0], &[1.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-12);
    }
}
