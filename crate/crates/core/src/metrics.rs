//! Polarization measures.
//!
//! For a population `S` of `n` opinions and a cut `(A, B)`:
//!
//! * `ρᵢ(S) = max over cuts of (1/n²) Σ_{a∈A, b∈B} (uₐᵢ - u_bᵢ)²`
//! * `ρ(S)  = max over cuts of (1/n²) Σ_{a∈A, b∈B} ‖uₐ - u_b‖²`
//!
//! Both satisfy `maxᵢ ρᵢ ≤ ρ ≤ Σᵢ ρᵢ`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dot, UnitVector};
use crate::seeded_rng;

/// Largest population for which [`rho_total`] enumerates every cut.
pub const EXACT_CUT_LIMIT: usize = 20;

fn check_population(opinions: &[UnitVector]) -> Result<usize> {
    if opinions.len() < 2 {
        return Err(Error::TooFewAgents {
            required: 2,
            found: opinions.len(),
        });
    }
    let d = opinions[0].dim();
    for u in opinions {
        opinions[0].check_dim(u)?;
    }
    Ok(d)
}

fn topic_values(opinions: &[UnitVector], topic: usize) -> Result<Vec<f64>> {
    let d = check_population(opinions)?;
    if topic >= d {
        return Err(Error::param("topic", format!("index {topic} out of range for d={d}")));
    }
    Ok(opinions.iter().map(|u| u.as_slice()[topic]).collect())
}

/// `Σ_{a∈A, b∈B} (xₐ - x_b)²` from the side sums.
fn scalar_cut(a: f64, s_a: f64, q_a: f64, b: f64, s_b: f64, q_b: f64) -> f64 {
    b * q_a + a * q_b - 2.0 * s_a * s_b
}

/// Per-topic polarization `ρᵢ`.
///
/// For a fixed side size the cut value is convex in `(Σ_A x, Σ_A x²)`, and
/// the points `(x, x²)` lie on a parabola, so some optimal side is a
/// contiguous run of the sorted values. All `O(n²)` runs are scanned.
pub fn rho_topic(opinions: &[UnitVector], topic: usize) -> Result<f64> {
    let mut x = topic_values(opinions, topic)?;
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let mut p1 = vec![0.0; n + 1];
    let mut p2 = vec![0.0; n + 1];
    for (k, v) in x.iter().enumerate() {
        p1[k + 1] = p1[k] + v;
        p2[k + 1] = p2[k] + v * v;
    }
    let (s1, s2) = (p1[n], p2[n]);
    let mut best = 0.0f64;
    for l in 0..n {
        for r in l + 1..=n {
            let a = (r - l) as f64;
            let (sa, qa) = (p1[r] - p1[l], p2[r] - p2[l]);
            best = best.max(scalar_cut(a, sa, qa, n as f64 - a, s1 - sa, s2 - qa));
        }
    }
    Ok(best / (n * n) as f64)
}

/// `ρᵢ` by enumerating all `2^(n-1)` cuts. Limited to `n ≤ 20`.
pub fn rho_topic_enumerate(opinions: &[UnitVector], topic: usize) -> Result<f64> {
    let x = topic_values(opinions, topic)?;
    let n = x.len();
    if n > EXACT_CUT_LIMIT {
        return Err(Error::param("opinions", format!("enumeration limited to {EXACT_CUT_LIMIT} agents")));
    }
    let (s1, s2): (f64, f64) = x.iter().fold((0.0, 0.0), |(s, q), v| (s + v, q + v * v));
    let (mut a, mut sa, mut qa) = (0.0, 0.0, 0.0);
    let mut in_a = vec![false; n];
    let mut best = 0.0f64;
    for g in 1u64..(1u64 << (n - 1)) {
        let j = g.trailing_zeros() as usize;
        let sign = if in_a[j] { -1.0 } else { 1.0 };
        in_a[j] = !in_a[j];
        a += sign;
        sa += sign * x[j];
        qa += sign * x[j] * x[j];
        best = best.max(scalar_cut(a, sa, qa, n as f64 - a, s1 - sa, s2 - qa));
    }
    Ok(best / (n * n) as f64)
}

/// Options for [`rho_total`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoOptions {
    /// Enumerate every cut up to this many agents.
    pub exact_limit: usize,
    /// Local-search restarts beyond the exact limit.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for RhoOptions {
    fn default() -> Self {
        RhoOptions {
            exact_limit: EXACT_CUT_LIMIT,
            restarts: 32,
            seed: 0x5eed_c0de,
        }
    }
}

/// Total polarization with the cut that achieves it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoTotal {
    pub value: f64,
    /// `true` marks side A.
    pub cut: Vec<bool>,
    pub exact: bool,
}

/// Running side statistics for vector cuts.
struct VectorCut<'a> {
    ops: &'a [UnitVector],
    n: f64,
    total: Vec<f64>,
    total_sq: f64,
    sum_a: Vec<f64>,
    sq_a: f64,
    a: f64,
}

impl<'a> VectorCut<'a> {
    fn new(ops: &'a [UnitVector]) -> Self {
        let d = ops[0].dim();
        let mut total = vec![0.0; d];
        let mut total_sq = 0.0;
        for u in ops {
            for (t, x) in total.iter_mut().zip(u.as_slice()) {
                *t += x;
            }
            total_sq += dot(u.as_slice(), u.as_slice());
        }
        VectorCut {
            ops,
            n: ops.len() as f64,
            total,
            total_sq,
            sum_a: vec![0.0; d],
            sq_a: 0.0,
            a: 0.0,
        }
    }

    fn value_with(&self, sum_a: &[f64], sq_a: f64, a: f64) -> f64 {
        let b = self.n - a;
        let cross: f64 = sum_a
            .iter()
            .zip(&self.total)
            .map(|(sa, t)| sa * (t - sa))
            .sum();
        b * sq_a + a * (self.total_sq - sq_a) - 2.0 * cross
    }

    fn value(&self) -> f64 {
        self.value_with(&self.sum_a, self.sq_a, self.a)
    }

    /// Moves agent `k` to the other side; `to_a` gives the destination.
    fn toggle(&mut self, k: usize, to_a: bool) {
        let sign = if to_a { 1.0 } else { -1.0 };
        let u = self.ops[k].as_slice();
        for (s, x) in self.sum_a.iter_mut().zip(u) {
            *s += sign * x;
        }
        self.sq_a += sign * dot(u, u);
        self.a += sign;
    }

    /// Cut value if agent `k` switched sides.
    fn value_if_toggled(&self, k: usize, to_a: bool, scratch: &mut [f64]) -> f64 {
        let sign = if to_a { 1.0 } else { -1.0 };
        let u = self.ops[k].as_slice();
        for ((s, base), x) in scratch.iter_mut().zip(&self.sum_a).zip(u) {
            *s = base + sign * x;
        }
        self.value_with(scratch, self.sq_a + sign * dot(u, u), self.a + sign)
    }
}

fn enumerate_cuts(ops: &[UnitVector]) -> (f64, Vec<bool>) {
    let n = ops.len();
    let mut cut = VectorCut::new(ops);
    let mut in_a = vec![false; n];
    let mut best = 0.0f64;
    let mut best_code = 0u64;
    for g in 1u64..(1u64 << (n - 1)) {
        let j = g.trailing_zeros() as usize;
        in_a[j] = !in_a[j];
        cut.toggle(j, in_a[j]);
        let v = cut.value();
        if v > best {
            best = v;
            best_code = g ^ (g >> 1);
        }
    }
    let side = (0..n).map(|k| k < 64 && best_code >> k & 1 == 1).collect();
    (best, side)
}

fn local_search(ops: &[UnitVector], restarts: usize, seed: u64) -> (f64, Vec<bool>) {
    let n = ops.len();
    let d = ops[0].dim();
    let mut rng = seeded_rng(seed);
    let mut scratch = vec![0.0; d];
    let mut best = (f64::NEG_INFINITY, vec![false; n]);
    for _ in 0..restarts.max(1) {
        let mut cut = VectorCut::new(ops);
        let mut side: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        for (k, &s) in side.iter().enumerate() {
            if s {
                cut.toggle(k, true);
            }
        }
        let mut current = cut.value();
        let tol = 1e-12 * (n * n) as f64;
        loop {
            let mut moved = false;
            for k in 0..n {
                let v = cut.value_if_toggled(k, !side[k], &mut scratch);
                if v > current + tol {
                    side[k] = !side[k];
                    cut.toggle(k, side[k]);
                    current = cut.value();
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        if current > best.0 {
            best = (current, side);
        }
    }
    best
}

/// Total polarization `ρ`: exact up to `opts.exact_limit` agents, otherwise
/// single-agent-move local search from `opts.restarts` random cuts.
pub fn rho_total(opinions: &[UnitVector], opts: &RhoOptions) -> Result<RhoTotal> {
    check_population(opinions)?;
    let n = opinions.len();
    let exact = n <= opts.exact_limit.min(EXACT_CUT_LIMIT);
    let (value, cut) = if exact {
        enumerate_cuts(opinions)
    } else {
        local_search(opinions, opts.restarts, opts.seed)
    };
    Ok(RhoTotal {
        value: value / (n * n) as f64,
        cut,
        exact,
    })
}

/// Reference-agent sign assignment: `σᵢ = sign⟨uᵢ, u₁⟩` (ties give `+1`)
/// and the diameter of `{σᵢ uᵢ}`. A small diameter means the population has
/// split into two antipodal clusters.
pub fn two_cluster_assignment(opinions: &[UnitVector]) -> (Vec<i8>, f64) {
    let Some(reference) = opinions.first() else {
        return (Vec::new(), 0.0);
    };
    let signs: Vec<i8> = opinions
        .iter()
        .map(|u| if u.dot(reference) < 0.0 { -1 } else { 1 })
        .collect();
    let mut diam = 0.0f64;
    for i in 0..opinions.len() {
        for j in i + 1..opinions.len() {
            let s = f64::from(signs[i] * signs[j]);
            let d2: f64 = opinions[i]
                .as_slice()
                .iter()
                .zip(opinions[j].as_slice())
                .map(|(a, b)| (a - s * b) * (a - s * b))
                .sum();
            diam = diam.max(d2.sqrt());
        }
    }
    (signs, diam)
}

/// Summary of a population's polarization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizationReport {
    pub rho_total: f64,
    pub rho_per_topic: Vec<f64>,
    pub best_cut: Vec<bool>,
    pub max_pair_disagreement: f64,
    /// Agents with sign `+1` and `-1` under [`two_cluster_assignment`].
    pub cluster_sizes: (usize, usize),
    pub exact: bool,
}

impl PolarizationReport {
    /// `maxᵢ ρᵢ ≤ ρ ≤ Σᵢ ρᵢ`, up to `tol`.
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        let max = self.rho_per_topic.iter().copied().fold(0.0, f64::max);
        let sum: f64 = self.rho_per_topic.iter().sum();
        max <= self.rho_total + tol && self.rho_total <= sum + tol
    }
}

pub fn polarization_report(opinions: &[UnitVector], opts: &RhoOptions) -> Result<PolarizationReport> {
    let d = check_population(opinions)?;
    let rho = rho_total(opinions, opts)?;
    let rho_per_topic = (0..d)
        .map(|i| rho_topic(opinions, i))
        .collect::<Result<Vec<_>>>()?;
    let (signs, _) = two_cluster_assignment(opinions);
    let plus = signs.iter().filter(|&&s| s > 0).count();
    Ok(PolarizationReport {
        rho_total: rho.value,
        rho_per_topic,
        best_cut: rho.cut,
        max_pair_disagreement: crate::dynamics::max_pair_disagreement(opinions),
        cluster_sizes: (plus, signs.len() - plus),
        exact: rho.exact,
    })
}

/// All `2^d` points `(±1, ..., ±1)/√d`.
pub fn hypercube(d: usize) -> Result<Vec<UnitVector>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if d > 24 {
        return Err(Error::param("d", "hypercube limited to d <= 24"));
    }
    let s = 1.0 / (d as f64).sqrt();
    Ok((0..1usize << d)
        .map(|m| {
            UnitVector::new((0..d).map(|k| if m >> k & 1 == 1 { -s } else { s }).collect())
                .expect("hypercube vertex is unit")
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_uniform_sphere;

    fn uv(c: &[f64]) -> UnitVector {
        UnitVector::new(c.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    /// Direct double sum over every subset, no running sums.
    fn brute_rho(ops: &[UnitVector]) -> f64 {
        let n = ops.len();
        let mut best = 0.0f64;
        for m in 0u32..(1 << n) {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    if m >> a & 1 == 1 && m >> b & 1 == 0 {
                        s += ops[a].distance(&ops[b]).powi(2);
                    }
                }
            }
            best = best.max(s);
        }
        best / (n * n) as f64
    }

    #[test]
    fn antipodal_pair() {
        let u = uv(&[0.6, 0.0, 0.8]);
        let s = [u.clone(), -&u];
        for i in 0..3 {
            assert!(close(rho_topic(&s, i).unwrap(), u.as_slice()[i].powi(2)));
        }
        let r = rho_total(&s, &RhoOptions::default()).unwrap();
        assert!(close(r.value, 1.0));
        assert!(r.exact);
        let sum: f64 = (0..3).map(|i| rho_topic(&s, i).unwrap()).sum();
        assert!(close(r.value, sum));
        let swapped = [-&u, u.clone()];
        assert_eq!(rho_total(&swapped, &RhoOptions::default()).unwrap().value, r.value);
    }

    #[test]
    fn square_hypercube() {
        let s = hypercube(2).unwrap();
        for i in 0..2 {
            assert!(close(rho_topic(&s, i).unwrap(), 0.5));
        }
        let r = rho_total(&s, &RhoOptions::default()).unwrap();
        assert!(close(r.value, 0.75));
        assert!(close(brute_rho(&s), 0.75));
        // The optimal cut splits on one coordinate.
        let side_a: Vec<_> = (0..4).filter(|&k| r.cut[k]).map(|k| s[k].clone()).collect();
        assert_eq!(side_a.len(), 2);
        let same_coord = (0..2).any(|i| side_a[0].as_slice()[i] == side_a[1].as_slice()[i]);
        assert!(same_coord);
    }

    #[test]
    fn identical_opinions_have_zero_polarization() {
        let u = uv(&[0.0, 1.0]);
        let s = vec![u; 5];
        assert_eq!(rho_topic(&s, 0).unwrap(), 0.0);
        assert_eq!(rho_topic(&s, 1).unwrap(), 0.0);
        assert_eq!(rho_total(&s, &RhoOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn errors() {
        let u = uv(&[1.0, 0.0]);
        assert!(matches!(rho_topic(std::slice::from_ref(&u), 0), Err(Error::TooFewAgents { .. })));
        assert!(rho_topic(&[u.clone(), u.clone()], 2).is_err());
        assert!(rho_total(&[u], &RhoOptions::default()).is_err());
    }

    #[test]
    fn contiguous_runs_beat_thresholds() {
        // Threshold cuts top out at 9/49 here; the middle block gives 10/49.
        let xs = [-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let s: Vec<_> = xs
            .iter()
            .map(|&x: &f64| uv(&[x, (1.0 - x * x).sqrt()]))
            .collect();
        let want = 10.0 / 49.0;
        assert!(close(rho_topic_enumerate(&s, 0).unwrap(), want));
        assert!(close(rho_topic(&s, 0).unwrap(), want));
    }

    #[test]
    fn run_scan_matches_enumeration() {
        let mut rng = seeded_rng(31);
        for trial in 0..1000 {
            let n = 2 + trial % 11;
            let d = 2 + trial % 3;
            let s: Vec<_> = (0..n).map(|_| sample_uniform_sphere(d, &mut rng).unwrap()).collect();
            for i in 0..d {
                let a = rho_topic(&s, i).unwrap();
                let b = rho_topic_enumerate(&s, i).unwrap();
                assert!((a - b).abs() < 1e-12, "trial {trial} topic {i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gray_enumeration_matches_brute_force() {
        let mut rng = seeded_rng(8);
        for n in 2..=9 {
            let s: Vec<_> = (0..n).map(|_| sample_uniform_sphere(3, &mut rng).unwrap()).collect();
            let r = rho_total(&s, &RhoOptions::default()).unwrap();
            assert!((r.value - brute_rho(&s)).abs() < 1e-12);
            // The reported cut attains the value.
            let mut v = 0.0;
            for a in 0..n {
                for b in 0..n {
                    if r.cut[a] && !r.cut[b] {
                        v += s[a].distance(&s[b]).powi(2);
                    }
                }
            }
            assert!((v / (n * n) as f64 - r.value).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_on_random_inputs() {
        let mut rng = seeded_rng(12);
        for trial in 0..200 {
            let n = 2 + trial % 11;
            let d = 2 + trial % 4;
            let s: Vec<_> = (0..n).map(|_| sample_uniform_sphere(d, &mut rng).unwrap()).collect();
            let rep = polarization_report(&s, &RhoOptions::default()).unwrap();
            assert!(rep.exact);
            assert!(rep.sandwich_holds(1e-12), "{rep:?}");
        }
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = seeded_rng(13);
        let s: Vec<_> = (0..9).map(|_| sample_uniform_sphere(3, &mut rng).unwrap()).collect();
        let (c, sn) = (0.3f64.cos(), 0.3f64.sin());
        let rot: Vec<_> = s
            .iter()
            .map(|u| {
                let x = u.as_slice();
                UnitVector::normalize(vec![c * x[0] - sn * x[1], sn * x[0] + c * x[1], x[2]]).unwrap()
            })
            .collect();
        let a = rho_total(&s, &RhoOptions::default()).unwrap().value;
        let b = rho_total(&rot, &RhoOptions::default()).unwrap().value;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn local_search_on_large_hypercube() {
        let s = hypercube(10).unwrap();
        let r = rho_total(&s, &RhoOptions::default()).unwrap();
        assert!(!r.exact);
        assert!((0.5..=0.62).contains(&r.value), "{}", r.value);
        // The coordinate cut alone is worth 1/2 + 1/(2d).
        assert!(r.value >= 0.55 - 1e-12);
    }

    #[test]
    fn local_search_agrees_with_enumeration_on_small_inputs() {
        let mut rng = seeded_rng(14);
        let opts = RhoOptions {
            exact_limit: 0,
            ..RhoOptions::default()
        };
        let mut hits = 0;
        for _ in 0..50 {
            let s: Vec<_> = (0..12).map(|_| sample_uniform_sphere(3, &mut rng).unwrap()).collect();
            let h = rho_total(&s, &opts).unwrap();
            let e = rho_total(&s, &RhoOptions::default()).unwrap();
            assert!(h.value <= e.value + 1e-12);
            if (h.value - e.value).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 45, "{hits}");
    }

    #[test]
    fn two_cluster_examples() {
        let u = uv(&[0.6, 0.8]);
        let (signs, diam) = two_cluster_assignment(&[u.clone(), -&u, u.clone()]);
        assert_eq!(signs, vec![1, -1, 1]);
        assert_eq!(diam, 0.0);
        let (_, diam) = two_cluster_assignment(&[u.clone(), u.clone()]);
        assert_eq!(diam, 0.0);
        let (s, d) = two_cluster_assignment(&[uv(&[1.0, 0.0]), uv(&[0.0, 1.0])]);
        assert_eq!(s, vec![1, 1]);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(two_cluster_assignment(&[]).0.len(), 0);
    }
}
