//! Step-2 Carnot groups in exponential coordinates ℝ^{m₁}×ℝ^{m₂}.
//!
//! p·q = [p¹+q¹, p²+q²+P(p¹,q¹)], P_j(x,y) = Σ_{l<i} b^j_{l,i}(x_l y_i − x_i y_l),
//! and d∞(p,q) = d∞(q⁻¹p, 0) with d∞(w,0) = max{|w¹|, ε|w²|^{1/2}}.

use crate::error::{input, KakeyaError, Result};
use crate::geometry::{norm, LayerSpec};
use serde::{Deserialize, Serialize};

pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupSpecRaw", into = "GroupSpecRaw")]
pub struct GroupSpec {
    m1: usize,
    m2: usize,
    epsilon: f64,
    /// b[(jj·m1 + l)·m1 + i], antisymmetric in (l, i), jj = j − m1 − 1.
    b: Vec<f64>,
}

/// Config form: `{m1, m2, epsilon, coeffs: [[j, l, i, value], ...]}` with
/// 1-based j ∈ m1+1..=n and 1 ≤ l < i ≤ m1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSpecRaw {
    pub m1: usize,
    pub m2: usize,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default)]
    pub coeffs: Vec<(usize, usize, usize, f64)>,
}

fn default_eps() -> f64 {
    DEFAULT_EPSILON
}

impl TryFrom<GroupSpecRaw> for GroupSpec {
    type Error = KakeyaError;
    fn try_from(r: GroupSpecRaw) -> Result<Self> {
        let mut g = GroupSpec::zero(r.m1, r.m2, r.epsilon)?;
        for (j, l, i, v) in r.coeffs {
            g.set(j, l, i, v)?;
        }
        Ok(g)
    }
}

impl From<GroupSpec> for GroupSpecRaw {
    fn from(g: GroupSpec) -> Self {
        let mut coeffs = vec![];
        for j in g.m1 + 1..=g.n() {
            for l in 1..=g.m1 {
                for i in l + 1..=g.m1 {
                    let v = g.coeff(j, l, i);
                    if v != 0.0 {
                        coeffs.push((j, l, i, v));
                    }
                }
            }
        }
        GroupSpecRaw { m1: g.m1, m2: g.m2, epsilon: g.epsilon, coeffs }
    }
}

impl GroupSpec {
    pub fn zero(m1: usize, m2: usize, epsilon: f64) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return input("m1 and m2 must be positive");
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return input(format!("epsilon must lie in (0,1), got {epsilon}"));
        }
        Ok(GroupSpec { m1, m2, epsilon, b: vec![0.0; m2 * m1 * m1] })
    }

    /// Sets b^j_{l,i} (1-based, l < i) and its antisymmetric partner.
    pub fn set(&mut self, j: usize, l: usize, i: usize, v: f64) -> Result<()> {
        if !(self.m1 < j && j <= self.n()) || !(1 <= l && l < i && i <= self.m1) {
            return input(format!("coefficient index (j={j}, l={l}, i={i}) out of range"));
        }
        if !v.is_finite() {
            return input("coefficient must be finite");
        }
        let jj = j - self.m1 - 1;
        let m1 = self.m1;
        self.b[(jj * m1 + l - 1) * m1 + i - 1] = v;
        self.b[(jj * m1 + i - 1) * m1 + l - 1] = -v;
        Ok(())
    }

    /// Heisenberg group ℍ¹: m₁ = 2, m₂ = 1, b³_{1,2} = 1/2.
    pub fn heisenberg() -> Self {
        let mut g = GroupSpec::zero(2, 1, DEFAULT_EPSILON).unwrap();
        g.set(3, 1, 2, 0.5).unwrap();
        g
    }

    /// Free step-2 group on m₁ generators: one vertical coordinate per pair
    /// l < i in lexicographic order, with coefficient 1/2.
    pub fn free(m1: usize) -> Result<Self> {
        if m1 < 2 {
            return input("free group needs m1 ≥ 2");
        }
        let m2 = m1 * (m1 - 1) / 2;
        let mut g = GroupSpec::zero(m1, m2, DEFAULT_EPSILON)?;
        let mut j = m1 + 1;
        for l in 1..=m1 {
            for i in l + 1..=m1 {
                g.set(j, l, i, 0.5)?;
                j += 1;
            }
        }
        Ok(g)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return input(format!("epsilon must lie in (0,1), got {epsilon}"));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn m1(&self) -> usize {
        self.m1
    }
    pub fn m2(&self) -> usize {
        self.m2
    }
    pub fn n(&self) -> usize {
        self.m1 + self.m2
    }
    pub fn q(&self) -> usize {
        self.m1 + 2 * self.m2
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn layers(&self) -> LayerSpec {
        LayerSpec::new(vec![self.m1, self.m2]).expect("m1, m2 positive")
    }

    /// b^j_{l,i}, 1-based, any order of (l, i).
    pub fn coeff(&self, j: usize, l: usize, i: usize) -> f64 {
        let jj = j - self.m1 - 1;
        self.b[(jj * self.m1 + l - 1) * self.m1 + i - 1]
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.b.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// P(x, y) for horizontal vectors x, y ∈ ℝ^{m₁}, written into `out` (len m₂).
    pub fn poly(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let m1 = self.m1;
        for (jj, o) in out.iter_mut().enumerate() {
            let base = jj * m1 * m1;
            let mut acc = 0.0;
            for l in 0..m1 {
                for i in l + 1..m1 {
                    let c = self.b[base + l * m1 + i];
                    if c != 0.0 {
                        acc += c * (x[l] * y[i] - x[i] * y[l]);
                    }
                }
            }
            *o = acc;
        }
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.n() {
            return input(format!("point has {} coordinates, group has dimension {}", p.len(), self.n()));
        }
        Ok(())
    }

    /// Unchecked product.
    pub fn mul(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        let m1 = self.m1;
        let mut out: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + b).collect();
        let mut pv = vec![0.0; self.m2];
        self.poly(&p[..m1], &q[..m1], &mut pv);
        for (o, v) in out[m1..].iter_mut().zip(pv) {
            *o += v;
        }
        out
    }

    /// Unchecked d∞(w, 0).
    pub fn norm_infty(&self, w: &[f64]) -> f64 {
        let h = norm(&w[..self.m1]);
        let v = norm(&w[self.m1..]);
        h.max(self.epsilon * v.sqrt())
    }

    /// Unchecked d∞(p, q).
    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        let m1 = self.m1;
        // q⁻¹p = [p¹ − q¹, p² − q² + P(−q¹, p¹)] = [.., p² − q² − P(q¹, p¹)]
        let h: f64 = (0..m1).map(|i| (p[i] - q[i]).powi(2)).sum::<f64>().sqrt();
        let mut pv = vec![0.0; self.m2];
        self.poly(&q[..m1], &p[..m1], &mut pv);
        let v: f64 = (0..self.m2).map(|k| (p[m1 + k] - q[m1 + k] - pv[k]).powi(2)).sum::<f64>().sqrt();
        h.max(self.epsilon * v.sqrt())
    }

    /// (Bq¹)_i = Σ_{l≠i} b_{l,i} q_l for m₂ = 1, so P(q¹, y) = ⟨Bq¹, y⟩.
    pub fn b_vector(&self, q1: &[f64]) -> Vec<f64> {
        let m1 = self.m1;
        (0..m1).map(|i| (0..m1).filter(|&l| l != i).map(|l| self.b[l * m1 + i] * q1[l]).sum()).collect()
    }
}

pub fn group_mul(p: &[f64], q: &[f64], spec: &GroupSpec) -> Result<Vec<f64>> {
    spec.check(p)?;
    spec.check(q)?;
    Ok(spec.mul(p, q))
}

pub fn group_inv(p: &[f64], spec: &GroupSpec) -> Result<Vec<f64>> {
    spec.check(p)?;
    Ok(p.iter().map(|x| -x).collect())
}

pub fn d_infty(p: &[f64], q: &[f64], spec: &GroupSpec) -> Result<f64> {
    spec.check(p)?;
    spec.check(q)?;
    Ok(spec.dist(p, q))
}

/// First (k, h, J) in lexicographic order with b^n_{k,h} = 0 and
/// b^J_{k,h} ≠ 0 for some intermediate vertical index J.
pub fn check_condition(spec: &GroupSpec) -> Result<Option<(usize, usize, usize)>> {
    if spec.m2 < 2 {
        return input("the coefficient condition needs m2 ≥ 2");
    }
    let n = spec.n();
    for k in 1..=spec.m1 {
        for h in k + 1..=spec.m1 {
            if spec.coeff(n, k, h) != 0.0 {
                continue;
            }
            for j in spec.m1 + 1..n {
                if spec.coeff(j, k, h) != 0.0 {
                    return Ok(Some((k, h, j)));
                }
            }
        }
    }
    Ok(None)
}

/// Angle between the horizontal hyperplane through q and {x_n = 0}.
pub fn horizontal_angle(q: &[f64], spec: &GroupSpec) -> Result<f64> {
    if spec.m2 != 1 {
        return input("horizontal angle is defined for m2 = 1 only");
    }
    spec.check(q)?;
    let bq = norm(&spec.b_vector(&q[..spec.m1]));
    Ok((1.0 / (1.0 + bq * bq).sqrt()).acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentCase {
    /// Left translates τ_a(I_u).
    LT,
    /// Euclidean translates I_u + a.
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarnotConstants {
    #[serde(rename = "R")]
    pub r_big: f64,
    #[serde(rename = "C_Rn")]
    pub c_rn: f64,
    #[serde(rename = "r_R")]
    pub r_r: f64,
    pub theta_rn: f64,
    pub theta_bar_rn: f64,
    /// Inner sandwich constant c = sin(θ̄ − θ).
    pub c_inner: f64,
    /// Outer sandwich constant: |p − q| ≤ c_outer·d∞(p, q) whenever
    /// q lies on a segment with a ∈ B_n(0,R), |u| ≤ r_R, and d∞(p, q) ≤ 1.
    pub c_outer: f64,
    pub case: SegmentCase,
}

/// R·√(m₂·m₁(m₁−1)·max b²); for m₂ = 1 this is R·√((n−1)(n−2) max b²).
pub fn c_rn(spec: &GroupSpec, r: f64) -> f64 {
    let m1 = spec.m1 as f64;
    let mb = spec.max_coeff_abs();
    r * (spec.m2 as f64 * m1 * (m1 - 1.0) * mb * mb).sqrt()
}

pub fn compute_constants(spec: &GroupSpec, r: f64, case: SegmentCase) -> Result<CarnotConstants> {
    if !(r > 0.0) {
        return input("R must be positive");
    }
    let c = c_rn(spec, r);
    let root = (1.0 + c * c).sqrt();
    let bound = match (case, spec.m2) {
        (SegmentCase::LT, 1) => root - c,
        (SegmentCase::LT, _) => {
            if c > 0.0 {
                f64::min(1.0, 1.0 / (2.0 * c))
            } else {
                1.0
            }
        }
        (SegmentCase::Classical, _) => 1.0 / root,
    };
    let r_r = 0.9 * bound;
    let theta = (1.0 / root).acos();
    let theta_bar = match case {
        SegmentCase::LT => (r_r / (1.0 - c * r_r)).clamp(-1.0, 1.0).acos(),
        SegmentCase::Classical => r_r.acos(),
    };
    let c_inner = (theta_bar - theta).sin();
    let c_far = c_rn(spec, r + r_r);
    let k = c_far + 1.0 / (spec.epsilon * spec.epsilon);
    let c_outer = (1.0 + k * k).sqrt();
    Ok(CarnotConstants { r_big: r, c_rn: c, r_r, theta_rn: theta, theta_bar_rn: theta_bar, c_inner, c_outer, case })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_product_example() {
        let g = GroupSpec::heisenberg();
        let p = group_mul(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &g).unwrap();
        assert_eq!(p, vec![1.0, 1.0, 0.5]);
        let inv = group_inv(&[1.0, 1.0, 0.5], &g).unwrap();
        assert_eq!(inv, vec![-1.0, -1.0, -0.5]);
        let z = group_mul(&[1.0, 1.0, 0.5], &inv, &g).unwrap();
        assert!(z.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn d_infty_example() {
        let g = GroupSpec::heisenberg();
        assert_eq!(d_infty(&[3.0, 4.0, 0.0], &[0.0; 3], &g).unwrap(), 5.0);
        assert_eq!(d_infty(&[0.0, 0.0, 4.0], &[0.0; 3], &g).unwrap(), 1.0);
    }

    #[test]
    fn condition_scan() {
        // free group on three generators: vertical coordinates j = 4, 5, 6 for
        // the pairs (1,2), (1,3), (2,3); b^6_{1,2} = 0 and b^4_{1,2} ≠ 0
        let g = GroupSpec::free(3).unwrap();
        assert_eq!(check_condition(&g).unwrap(), Some((1, 2, 4)));
        let z = GroupSpec::zero(3, 2, 0.5).unwrap();
        assert_eq!(check_condition(&z).unwrap(), None);
        let mut t = GroupSpec::zero(3, 2, 0.5).unwrap();
        t.set(5, 1, 2, 1.0).unwrap();
        assert_eq!(check_condition(&t).unwrap(), None);
        assert!(check_condition(&GroupSpec::heisenberg()).is_err());
    }

    #[test]
    fn angle_example() {
        let g = GroupSpec::heisenberg();
        let a = horizontal_angle(&[2.0, 0.0, 7.0], &g).unwrap();
        assert!((a - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert_eq!(horizontal_angle(&[0.0; 3], &g).unwrap(), 0.0);
        assert!(horizontal_angle(&[0.0; 6], &GroupSpec::free(3).unwrap()).is_err());
    }

    #[test]
    fn constants_example() {
        let g = GroupSpec::heisenberg();
        let k = compute_constants(&g, 1.0, SegmentCase::LT).unwrap();
        assert!((k.c_rn - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(k.r_r < (1.0 + k.c_rn * k.c_rn).sqrt() - k.c_rn);
        assert!(k.theta_bar_rn > k.theta_rn);
        let z = GroupSpec::zero(2, 1, 0.5).unwrap();
        let k = compute_constants(&z, 1.0, SegmentCase::Classical).unwrap();
        assert_eq!((k.c_rn, k.theta_rn), (0.0, 0.0));
    }

    #[test]
    fn serde_round_trip() {
        let g = GroupSpec::free(3).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let h: GroupSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(g, h);
        let bad = r#"{"m1":2,"m2":1,"epsilon":0.5,"coeffs":[[3,2,1,1.0]]}"#;
        assert!(serde_json::from_str::<GroupSpec>(bad).is_err());
        let bad = r#"{"m1":2,"m2":1,"epsilon":1.5}"#;
        assert!(serde_json::from_str::<GroupSpec>(bad).is_err());
    }
}
