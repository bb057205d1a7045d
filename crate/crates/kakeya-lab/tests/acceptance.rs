//! Acceptance suite: one PASS/FAIL line per criterion, each at its stated
//! tolerance. Criteria 2 and 4 are reported but do not set the exit status;
//! see the README for why they cannot be met as stated.

use kakeya::arith::{proposition_exhaustive, sum_diff_stats};
use kakeya::axiomlab::{
    axiom5_experiment, check_axiom4, estimate_volume_exponent, furstenberg_arith_bound, furstenberg_k_bound, katz_tao_homogeneous,
    predicted_bounds, Axiom4Options, Axiom5Grid, Axiom5Mode, PairMode, Q64,
};
use kakeya::carnot::GroupSpec;
use kakeya::covers::{five_r_cover, greedy_net, mc_volume, Ball};
use kakeya::geometry::{dilate, dist_e, dist_h, Bounds, LayerSpec};
use kakeya::kakeyalab::{box_dimension, box_dimension_points, common_point_family, extract_bush, perron_construction, BushOptions};
use kakeya::linalg::{frame_from, point_segment};
use kakeya::rng::substream;
use kakeya::settings::{CantorSet, Frame, Setting, Tube};
use rand::Rng as _;
use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}

fn c1_volume_exponents() -> Outcome {
    let deltas = dyadic(4, 9);
    let cases = [
        ("EuclideanKakeya n=2", Setting::euclidean(2).unwrap(), 1.0),
        ("EuclideanKakeya n=3", Setting::euclidean(3).unwrap(), 2.0),
        ("HomogeneousKakeya (2,1)", Setting::homogeneous(LayerSpec::new(vec![2, 1]).unwrap()).unwrap(), 2.0),
        ("FurstenbergK n=2 s=1/2", Setting::furstenberg(2, CantorSet::new(0.25, 8).unwrap()).unwrap(), 1.5),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s, target) in cases {
        let t0 = Instant::now();
        let fit = estimate_volume_exponent(&s, &deltas, 32, 7).unwrap();
        let el = t0.elapsed();
        let t = fit.regression.exponent;
        let good = (t - target).abs() <= 0.15 && fit.regression.r_squared >= 0.98 && el <= Duration::from_secs(120);
        ok &= good;
        parts.push(format!("{name}: T̂={t:.3} (target {target}) r²={:.4} {:.1}s", fit.regression.r_squared, el.as_secs_f64()));
    }
    outcome(ok, parts.join("; "))
}

fn c2_ball_volume() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [vec![1usize, 2], vec![2, 1]] {
        let l = LayerSpec::new(m.clone()).unwrap();
        let n = l.n();
        let q = l.q() as i32;
        for r in [0.25f64, 0.5] {
            let z = vec![0.0; n];
            let side = r.max(r * r);
            let v = mc_volume(|p: &[f64]| dist_h(p, &z, &l) <= r, &Bounds::cube(n, -side, side), 200_000, 11).unwrap();
            let target = (2.0 * r).powi(q);
            let exact = 2f64.powi(n as i32) * r.powi(q);
            let good = (v.estimate - target).abs() <= 3.0 * v.stderr;
            ok &= good;
            parts.push(format!("layers {m:?} r={r}: {:.5}±{:.5} vs (2r)^Q={target:.5} [2ⁿr^Q={exact:.5}]", v.estimate, v.stderr));
        }
    }
    outcome(ok, parts.join("; "))
}

fn c3_group_laws() -> Outcome {
    let mut worst: f64 = 0.0;
    for spec in [GroupSpec::heisenberg(), GroupSpec::free(3).unwrap()] {
        let n = spec.n();
        let layers = spec.layers();
        let mut rng = substream(3, n as u64);
        let pt = |rng: &mut kakeya::rng::Rng| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let zero = vec![0.0; n];
        for _ in 0..10_000 {
            let (p, q, r) = (pt(&mut rng), pt(&mut rng), pt(&mut rng));
            let lhs = spec.mul(&spec.mul(&p, &q), &r);
            let rhs = spec.mul(&p, &spec.mul(&q, &r));
            let inv: Vec<f64> = p.iter().map(|x| -x).collect();
            let e1 = spec.mul(&p, &inv);
            let e2 = spec.mul(&inv, &p);
            let id1 = spec.mul(&p, &zero);
            let id2 = spec.mul(&zero, &p);
            let mx = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(mx(&lhs, &rhs)).max(mx(&e1, &zero)).max(mx(&e2, &zero)).max(mx(&id1, &p)).max(mx(&id2, &p));
            let d = spec.dist(&p, &q);
            worst = worst.max((spec.dist(&spec.mul(&r, &p), &spec.mul(&r, &q)) - d).abs());
            let lam: f64 = rng.random_range(0.1..3.0);
            let dp = dilate(&p, lam, &layers).unwrap();
            let dq = dilate(&q, lam, &layers).unwrap();
            worst = worst.max((spec.dist(&dp, &dq) - lam * d).abs());
        }
    }
    outcome(worst <= 1e-9, format!("Heisenberg and free m₁=3, 10⁴ triples each: largest deviation {worst:.2e}"))
}

fn c4_carnot_sandwich() -> Outcome {
    let spec = GroupSpec::heisenberg();
    let mut violations = 0usize;
    let mut checked = 0usize;
    let mut notes = Vec::new();
    for k in 0..20u64 {
        let s =
            if k % 2 == 0 { Setting::carnot_lt(spec.clone(), 1.0).unwrap() } else { Setting::carnot_kakeya(spec.clone(), 1.0).unwrap() };
        let (Setting::CarnotLT { constants, .. } | Setting::CarnotKakeya { constants, .. }) = &s else { unreachable!() };
        let (c_in, c_out) = (constants.c_inner, constants.c_outer);
        let mut rng = substream(41, k);
        let u = s.sample_direction_rng(&mut rng);
        let a = s.sample_param(&mut rng);
        let delta = rng.random_range(0.01..0.1);
        let tube = Tube::new(u.clone(), a.clone(), delta);
        let line = s.line(&u, &a, false);
        let seg = kakeya::linalg::scale(&line.v, line.t_max);
        let axes = frame_from(&line.v);
        // inner: points at distance ≤ cδ on a line orthogonal to the segment
        for _ in 0..10_000 {
            let t = rng.random_range(0.0..=line.t_max);
            let base = line.at(t);
            let mut w: Vec<f64> = vec![0.0; base.len()];
            for ax in &axes[1..] {
                let g: f64 = rng.random_range(-1.0..1.0);
                for (wi, ai) in w.iter_mut().zip(ax) {
                    *wi += g * ai;
                }
            }
            let nw = kakeya::geometry::norm(&w);
            if nw == 0.0 {
                continue;
            }
            let rho = c_in * delta * rng.random::<f64>();
            let q: Vec<f64> = base.iter().zip(&w).map(|(b, x)| b + rho * x / nw).collect();
            checked += 1;
            if !s.tube_contains(&tube, &q) {
                violations += 1;
                notes.push(format!(
                    "tube {k}: inner point with foot at t/t_max={:.5}, ρ={rho:.3e}, d∞ to segment {:.3}·δ",
                    t / line.t_max,
                    s.axis_dist(&tube, &q) / delta
                ));
            }
        }
        // outer: tube points drawn from a box twice the Cδ pad
        let pad = 2.0 * c_out * delta;
        let len = line.euclidean_length();
        let mut hi = vec![pad; axes.len()];
        hi[0] = len + pad;
        let frame = Frame { origin: line.p0.clone(), axes: axes.clone(), lo: vec![-pad; axes.len()], hi };
        let (mut c, mut p) = (vec![0.0; axes.len()], vec![0.0; axes.len()]);
        let mut hits = 0;
        let mut draws = 0;
        while hits < 10_000 && draws < 20_000_000 {
            draws += 1;
            frame.sample(&mut rng, &mut c, &mut p);
            if s.tube_contains(&tube, &p) {
                hits += 1;
                checked += 1;
                let d = point_segment(&p, &line.p0, &seg).0;
                if d > c_out * delta {
                    violations += 1;
                    notes.push(format!("tube {k}: T^δ point at distance {:.3}·Cδ", d / (c_out * delta)));
                }
            }
        }
        if hits < 10_000 {
            violations += 1;
            notes.push(format!("tube {k}: only {hits} tube points in {draws} draws"));
        }
    }
    outcome(
        violations == 0,
        format!(
            "20 tubes, {checked} points, {violations} violations of T^(O,cδ) ⊆ T^δ ⊆ T^(E,Cδ){}",
            notes.iter().map(|n| format!("; {n}")).collect::<String>()
        ),
    )
}

fn c5_axiom4_failure() -> Outcome {
    let s = Setting::carnot_kakeya(GroupSpec::free(3).unwrap(), 1.0).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [6, 8, 10] {
        let d = 2f64.powi(-k);
        let mut v = vec![0.0; s.dir_dim()];
        v[3] = d;
        let mode = PairMode::Fixed { u: vec![0.0; s.dir_dim()], v };
        let r = check_axiom4(&s, d, 20, 3, &mode, &Axiom4Options::default()).unwrap();
        let count = r.estimate("N").unwrap();
        let need = 0.5 * d.powf(-0.5);
        ok &= count >= need;
        parts.push(format!("δ=2^-{k}: N̂={count} (need ≥ {need})"));
    }
    outcome(ok, parts.join("; "))
}

fn c6_axiom5() -> Outcome {
    let s = Setting::euclidean(3).unwrap();
    let r = axiom5_experiment(&s, &Axiom5Grid::euclidean_default(), &Axiom5Mode::Generic, 1).unwrap();
    let (l, a) = (r.estimate("lambda").unwrap(), r.estimate("alpha").unwrap());
    let h = Setting::homogeneous(LayerSpec::new(vec![1, 2]).unwrap()).unwrap();
    let rh = axiom5_experiment(&h, &Axiom5Grid::homogeneous_example_default(), &Axiom5Mode::HomogeneousExample, 1).unwrap();
    let lh = rh.estimate("lambda").unwrap();
    let ok = (0.7..=1.3).contains(&l) && (0.7..=1.3).contains(&a) && lh >= 0.8 * 2.0;
    outcome(ok, format!("Euclidean n=3: λ̂={l:.3}, α̂={a:.3}; homogeneous example (s=2): λ̂={lh:.3} (need ≥ 1.6)"))
}

fn c7_bush() -> Outcome {
    let s = Setting::euclidean(2).unwrap();
    let delta = 2f64.powi(-6);
    let tubes = common_point_family(&s, delta, &[0.0, 0.0], 5).unwrap();
    let (tt, ss) = (tubes.clone(), s.clone());
    let e = move |p: &[f64]| tt.iter().any(|t| ss.tube_contains(t, p));
    let c = extract_bush(&s, &tubes, e, &Bounds::cube(2, -1.5, 1.5), 0.5, 3, &BushOptions::default()).unwrap();
    let ok = tubes.len() == 64 && c.shared_hits == 0 && c.lne1_constant <= 10.0 && c.lne2_constant <= 10.0;
    outcome(
        ok,
        format!(
            "{} tubes, {} selected, shared hits {}, chain constants {:.4} and {:.4}",
            tubes.len(),
            c.selected.len(),
            c.shared_hits,
            c.lne1_constant,
            c.lne2_constant
        ),
    )
}

fn c8_covers() -> Outcome {
    let mut bad = Vec::new();
    let (mut ratio_lo, mut ratio_hi) = (f64::INFINITY, 0.0f64);
    for k in 0..1000u64 {
        let mut rng = substream(808, k);
        let dim = 1 + (k % 3) as usize;
        let sup = k % 2 == 1;
        let metric = move |a: &[f64], b: &[f64]| {
            if sup {
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            } else {
                dist_e(a, b)
            }
        };
        // five r
        let nb = rng.random_range(20..120);
        let r0 = rng.random_range(0.01..0.1);
        let balls: Vec<Ball> = (0..nb)
            .map(|_| Ball { center: (0..dim).map(|_| rng.random::<f64>()).collect(), radius: r0 * rng.random_range(1.0..4.0) })
            .collect();
        let chosen = five_r_cover(&balls, metric);
        for (x, &i) in chosen.iter().enumerate() {
            for &j in &chosen[x + 1..] {
                if metric(&balls[i].center, &balls[j].center) <= balls[i].radius + balls[j].radius {
                    bad.push(format!("family {k}: selected balls {i}, {j} meet"));
                }
            }
        }
        for (i, b) in balls.iter().enumerate() {
            if !chosen.iter().any(|&j| metric(&b.center, &balls[j].center) + b.radius <= 5.0 * balls[j].radius) {
                bad.push(format!("family {k}: ball {i} outside every 5× dilate"));
            }
        }
        // nets on the flat unit torus, so boundary effects do not skew the ratio
        let torus = move |a: &[f64], b: &[f64]| {
            let g = |x: f64, y: f64| {
                let d = (x - y).abs();
                d.min(1.0 - d)
            };
            if sup {
                a.iter().zip(b).map(|(x, y)| g(*x, *y)).fold(0.0, f64::max)
            } else {
                a.iter().zip(b).map(|(x, y)| g(*x, *y).powi(2)).sum::<f64>().sqrt()
            }
        };
        let delta: f64 = match dim {
            1 => rng.random_range(0.02..0.04),
            2 => rng.random_range(0.05..0.1),
            _ => rng.random_range(0.15..0.25),
        };
        let count = (8.0 * (2.0 / delta).powi(dim as i32)) as usize;
        let cands: Vec<Vec<f64>> = (0..count).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
        let mut sizes = Vec::new();
        for d in [delta, delta / 2.0] {
            let net = greedy_net(&cands, d, torus).unwrap();
            for (x, p) in net.points.iter().enumerate() {
                if net.points[x + 1..].iter().any(|q| torus(p, q) <= d) {
                    bad.push(format!("family {k}: net at {d} not separated"));
                    break;
                }
            }
            if cands.iter().any(|c| !net.points.iter().any(|p| torus(p, c) <= d)) {
                bad.push(format!("family {k}: net at {d} not maximal"));
            }
            sizes.push(net.len() as f64);
        }
        let ratio = sizes[1] / sizes[0];
        let s = dim as i32;
        ratio_lo = ratio_lo.min(ratio / 2f64.powi(s));
        ratio_hi = ratio_hi.max(ratio / 2f64.powi(s));
        if !(ratio >= 2f64.powi(s - 1) && ratio <= 2f64.powi(s + 1)) {
            bad.push(format!("family {k}: net ratio {ratio} for S={s}"));
        }
    }
    let detail = format!(
        "1000 families, {} failures; net ratio / 2^S in [{ratio_lo:.3}, {ratio_hi:.3}]{}",
        bad.len(),
        bad.iter().take(10).map(|b| format!("; {b}")).collect::<String>()
    );
    outcome(bad.is_empty(), detail)
}

fn c9_proposition() -> Outcome {
    let t0 = Instant::now();
    let rep = proposition_exhaustive(3, 6, 0).unwrap();
    let el = t0.elapsed();
    let mut mismatches = 0;
    for k in 0..100u64 {
        let mut rng = substream(909, k);
        let pts = |rng: &mut kakeya::rng::Rng| {
            let n = rng.random_range(1..12);
            (0..n)
                .map(|_| vec![rng.random_range(-6i64..6), rng.random_range(-6i64..6)])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect::<Vec<_>>()
        };
        let a = pts(&mut rng);
        let b = pts(&mut rng);
        let g: Vec<(usize, usize)> =
            (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).filter(|_| rng.random::<f64>() < 0.4).collect();
        let got = sum_diff_stats(&a, &b, &g).unwrap();
        let mut sums: Vec<Vec<i64>> = Vec::new();
        let mut diffs: Vec<Vec<i64>> = Vec::new();
        for i in 0..a.len() {
            for j in 0..b.len() {
                if g.contains(&(i, j)) {
                    sums.push(vec![a[i][0] + b[j][0], a[i][1] + b[j][1]]);
                    diffs.push(vec![a[i][0] - b[j][0], a[i][1] - b[j][1]]);
                }
            }
        }
        sums.sort();
        sums.dedup();
        diffs.sort();
        diffs.dedup();
        if got != (sums.len(), diffs.len()) {
            mismatches += 1;
        }
    }
    let ok = rep.exhaustive && rep.counterexamples.is_empty() && el <= Duration::from_secs(300) && mismatches == 0;
    outcome(
        ok,
        format!(
            "universe 6, N_max 3: {} triples, exhaustive={}, {} counterexamples, {:.1}s; oracle mismatches {mismatches}/100",
            rep.checked_count,
            rep.exhaustive,
            rep.counterexamples.len(),
            el.as_secs_f64()
        ),
    )
}

fn c10_dimension() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let sq = box_dimension(|p: &[f64]| p.iter().all(|x| (0.0..=1.0).contains(x)), &Bounds::cube(2, 0.0, 1.0), None, &dyadic(3, 7))
        .unwrap()
        .dimension();
    ok &= (sq - 2.0).abs() <= 0.1;
    parts.push(format!("square {sq:.3}"));
    let l11 = LayerSpec::new(vec![1, 1]).unwrap();
    let seg: Vec<Vec<f64>> = (0..=(1 << 16)).map(|i| vec![0.0, i as f64 / 65536.0]).collect();
    let sd = box_dimension_points(&seg, Some(&l11), &dyadic(3, 6)).unwrap().dimension();
    ok &= (sd - 2.0).abs() <= 0.2;
    parts.push(format!("segment (1,1) {sd:.3}"));
    let c = CantorSet::new(0.25, 8).unwrap();
    let pc = c.piece();
    let cp: Vec<Vec<f64>> = c.intervals().iter().flat_map(|&a| (0..4).map(move |k| vec![a + k as f64 / 3.0 * pc])).collect();
    let cd = box_dimension_points(&cp, None, &dyadic(4, 12)).unwrap().dimension();
    ok &= (cd - 0.5).abs() <= 0.1;
    parts.push(format!("Cantor 1/4 {cd:.3}"));
    for m in [vec![2usize, 1], vec![1, 2]] {
        let l = LayerSpec::new(m.clone()).unwrap();
        let z = vec![0.0; l.n()];
        let bd = box_dimension(|p: &[f64]| dist_h(p, &z, &l) <= 1.0, &Bounds::cube(l.n(), -1.0, 1.0), Some(&l), &dyadic(2, 4))
            .unwrap()
            .dimension();
        ok &= (bd - l.q() as f64).abs() <= 0.15;
        parts.push(format!("ball {m:?} {bd:.3} (Q={})", l.q()));
    }
    let areas: Vec<f64> = (2..=8).map(|d| perron_construction(d).unwrap().area()).collect();
    let dec = areas.windows(2).all(|w| w[1] < w[0]);
    ok &= dec;
    parts.push(format!("Perron areas depths 2..8 {}", areas.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join(", ")));
    outcome(ok, parts.join("; "))
}

fn c11_bounds() -> Outcome {
    let q = |a: i64| Q64::from_integer(a);
    let mut bad = Vec::new();
    let mut check = |name: String, got: Q64, want: Q64| {
        if got != want {
            bad.push(format!("{name}: {got} ≠ {want}"));
        }
    };
    for n in 2..=12i64 {
        let e = predicted_bounds(q(n), q(n - 1), q(n - 1), q(0), q(1), q(n - 2));
        check(format!("Euclidean n={n} Bourgain"), e.bourgain, Q64::new(n + 1, 2));
        check(format!("Euclidean n={n} Wolff"), e.wolff, Q64::new(n + 2, 2));
        // Nikodym settings share (S, T, θ, λ, α) with the Euclidean case
        check(format!("Nikodym n={n}"), e.wolff, Q64::new(n + 2, 2));
        // Carnot m₂ = 1: Q = n + 1
        let c = predicted_bounds(q(n + 1), q(n - 1), q(n - 1), q(0), q(1), q(n - 2));
        check(format!("Carnot n={n} Bourgain"), c.bourgain, Q64::new(n + 3, 2));
        check(format!("Carnot n={n} Wolff"), c.wolff, Q64::new(n + 4, 2));
        for step in 2..=4i64 {
            // layers (n−1, 0, …, 0, 1): Q = n − 1 + s, directions of dimension n − 1
            let h = predicted_bounds(q(n - 1 + step), q(n - 1), q(n - 1), q(0), q(1), q(n - 2));
            check(format!("homogeneous n={n} s={step}"), h.wolff, Q64::new(n + 2 * step, 2));
            let qq = q(n - 1 + step);
            check(format!("Katz–Tao n={n} s={step}"), katz_tao_homogeneous(qq, q(step)), qq * Q64::new(6, 11) + q(step) * Q64::new(5, 11));
        }
        for (num, den) in [(1, 2), (1, 3), (3, 4), (2, 5)] {
            let s = Q64::new(num, den);
            check(format!("Furstenberg K n={n} s={s}"), furstenberg_k_bound(n, s), s * 2 + Q64::new(n - 2, 2));
            check(format!("Furstenberg arith n={n} s={s}"), furstenberg_arith_bound(n, s), s * Q64::new(4 * n + 3, 7));
        }
    }
    for s_dir in 1..=8i64 {
        // restricted directions of dimension S in ℝ^n, n = 9
        let r = predicted_bounds(q(9), q(s_dir), q(8), q(0), q(1), q(s_dir - 1));
        check(format!("restricted S={s_dir}"), r.wolff, Q64::new(s_dir + 3, 2));
    }
    let detail = if bad.is_empty() { "all rational values match".to_string() } else { bad.join("; ") };
    outcome(bad.is_empty(), detail)
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn c12_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_kakeya-lab");
    let tmp = tempfile::tempdir().unwrap();
    let cfgs = [
        (
            "axioms",
            r#"{"settings": [{"kind": "EuclideanKakeya", "n": 2}, {"kind": "HomogeneousKakeya", "layers": [2, 1]}],
                "delta_list": [0.0625, 0.03125, 0.015625, 0.0078125], "seed": 19, "trials": 12,
                "axioms": {"run": [1, 2, 3, 4], "volume_samples": 4000, "axiom2_samples": 4000, "axiom3_pairs": 50,
                           "axiom4": {"n_bar": 4, "cap": 64, "points": 300, "w": 2}}}"#,
        ),
        ("maximal", r#"{"setting": {"kind": "EuclideanKakeya", "n": 2}, "delta_list": [0.25, 0.125], "seed": 4}"#),
        ("dimension", r#"{"delta_list": [0.125, 0.0625, 0.03125, 0.015625], "seed": 2}"#),
        ("bush", r#"{"setting": {"kind": "EuclideanKakeya", "n": 2}, "delta_list": [0.125, 0.0625], "seed": 8}"#),
        ("arith", r#"{"delta_list": [0.25, 0.125, 0.0625], "seed": 5, "arith": {"universe_size": 5, "n_max": 3}}"#),
    ];
    let mut diffs = Vec::new();
    let mut total = 0;
    for (sub, text) in cfgs {
        let cfg = tmp.path().join(format!("{sub}.json"));
        std::fs::write(&cfg, text).unwrap();
        let mut outs = Vec::new();
        for (tag, threads) in [("a", "1"), ("b", "1"), ("c", "4")] {
            let out = tmp.path().join(format!("{sub}_{tag}"));
            let st = Command::new(exe)
                .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .env("RAYON_NUM_THREADS", threads)
                .output()
                .unwrap();
            if st.status.code().is_none_or(|c| c > 1) {
                diffs.push(format!("{sub}: exit {:?} {}", st.status.code(), String::from_utf8_lossy(&st.stderr)));
            }
            outs.push(files_in(&out));
        }
        total += outs[0].len();
        for other in &outs[1..] {
            if other != &outs[0] {
                diffs.push(format!("{sub}: artifacts differ"));
            }
        }
        if outs[0].len() < 3 {
            diffs.push(format!("{sub}: only {} artifacts", outs[0].len()));
        }
    }
    outcome(
        diffs.is_empty(),
        format!(
            "{total} artifacts compared across two 1-worker runs and one 4-worker run; {}",
            if diffs.is_empty() { "identical".into() } else { diffs.join("; ") }
        ),
    )
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        (1, "volume exponents", c1_volume_exponents),
        (2, "exact ball volume (2r)^Q", c2_ball_volume),
        (3, "group laws", c3_group_laws),
        (4, "Carnot tube sandwich", c4_carnot_sandwich),
        (5, "Axiom 4 failure for m₂ > 1", c5_axiom4_failure),
        (6, "Axiom 5 exponents", c6_axiom5),
        (7, "bush certificate", c7_bush),
        (8, "covering properties", c8_covers),
        (9, "arithmetic proposition", c9_proposition),
        (10, "dimension estimator", c10_dimension),
        (11, "bound calculator", c11_bounds),
        (12, "determinism", c12_determinism),
    ];
    // criterion 2 asks for (2r)^Q where the box ball has volume 2ⁿr^Q;
    // criterion 4's inner inclusion fails for feet at a segment end, where the
    // horizontal plane through q meets the line outside [0, t_max]
    let known_unattainable = [2u32, 4];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        if filter.is_some_and(|k| k != id) {
            continue;
        }
        let t0 = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {id:>2} ({name}, {:.1}s): {}", t0.elapsed().as_secs_f64(), o.detail);
        if !o.pass && !known_unattainable.contains(&id) {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
