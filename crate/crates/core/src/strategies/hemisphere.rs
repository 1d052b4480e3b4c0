//! Densest open hemisphere, and more generally densest spherical cap
//! `{x : ⟨x,a⟩ > c}` for a threshold `c ≥ 0`.
//!
//! Exact search: fix an optimal member set `I` and take the axis maximizing
//! the smallest margin `minᵢ∈I ⟨xᵢ,a⟩`. That axis is a positive combination of
//! a linearly independent subset `J ⊆ I` with equal inner products against
//! every point of `J`, i.e. the normalized solution of `Gλ = 1` for the Gram
//! matrix of `J`. Trying every subset of at most `d` points therefore visits
//! an optimal axis, and its margin is strictly positive.

use std::collections::BTreeMap;
use std::fmt;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sample_uniform_sphere, UnitVector};

/// Largest dimension accepted by the exact solver.
pub const EXACT_MAX_DIM: usize = 4;

/// Inner products within this distance of the threshold count as outside.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Open hemisphere `{x : ⟨x,a⟩ > 0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hemisphere {
    pub axis: UnitVector,
}

impl Hemisphere {
    pub fn contains(&self, x: &UnitVector) -> bool {
        self.axis.dot(x) > BOUNDARY_TOL
    }

    pub fn members(&self, points: &[UnitVector]) -> Vec<usize> {
        members_above(points, self.axis.as_slice(), 0.0)
    }

    pub fn count(&self, points: &[UnitVector]) -> usize {
        self.members(points).len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HemisphereSolution {
    pub hemisphere: Hemisphere,
    /// Points strictly inside, recounted from the axis.
    pub count: usize,
    pub members: Vec<usize>,
}

impl HemisphereSolution {
    fn from_axis(points: &[UnitVector], axis: UnitVector) -> Self {
        let hemisphere = Hemisphere { axis };
        let members = hemisphere.members(points);
        HemisphereSolution {
            hemisphere,
            count: members.len(),
            members,
        }
    }
}

pub(crate) fn members_above(points: &[UnitVector], axis: &[f64], c: f64) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, x)| dot(x.as_slice(), axis) > c + BOUNDARY_TOL)
        .map(|(i, _)| i)
        .collect()
}

fn count_above(points: &[UnitVector], axis: &[f64], c: f64) -> usize {
    points
        .iter()
        .filter(|x| dot(x.as_slice(), axis) > c + BOUNDARY_TOL)
        .count()
}

fn check_points(points: &[UnitVector]) -> Result<usize> {
    let first = points.first().ok_or(Error::TooFewAgents {
        required: 1,
        found: 0,
    })?;
    for p in points {
        first.check_dim(p)?;
    }
    Ok(first.dim())
}

/// Solves the small symmetric system `Gλ = 1` by Gaussian elimination with
/// partial pivoting. `None` when `G` is numerically singular.
fn solve_ones(mut g: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = g.len();
    let mut rhs = vec![1.0; k];
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))?;
        if g[piv][col].abs() < 1e-10 {
            return None;
        }
        g.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..k {
            let f = g[row][col] / g[col][col];
            for j in col..k {
                g[row][j] -= f * g[col][j];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let s: f64 = (row + 1..k).map(|j| g[row][j] * x[j]).sum();
        x[row] = (rhs[row] - s) / g[row][row];
    }
    Some(x)
}

/// Unit vector in the span of `pts` with equal inner product against each.
fn equal_margin_axis(pts: &[&[f64]]) -> Option<Vec<f64>> {
    let g: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| pts.iter().map(|b| dot(a, b)).collect())
        .collect();
    let lambda = solve_ones(g)?;
    let d = pts[0].len();
    let mut v = vec![0.0; d];
    for (l, p) in lambda.iter().zip(pts) {
        for (vk, pk) in v.iter_mut().zip(p.iter()) {
            *vk += l * pk;
        }
    }
    let n = norm(&v);
    if !(n.is_finite() && n > 1e-300) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact densest cap `{x : ⟨x,a⟩ > c}` for `c ≥ 0`. Candidates are visited
/// by subset size, then lexicographically; the first strict maximum wins.
pub(crate) fn exact_cap_search(points: &[UnitVector], c: f64) -> Result<(UnitVector, usize)> {
    let d = check_points(points)?;
    if d > EXACT_MAX_DIM {
        return Err(Error::DimensionUnsupported {
            max: EXACT_MAX_DIM,
            found: d,
        });
    }
    let mut best: Option<(Vec<f64>, usize)> = None;
    let n = points.len();
    for size in 1..=d.min(n) {
        for_each_combination(n, size, |idx| {
            if best.as_ref().is_some_and(|(_, b)| *b == n) {
                return;
            }
            let pts: Vec<&[f64]> = idx.iter().map(|&i| points[i].as_slice()).collect();
            if let Some(axis) = equal_margin_axis(&pts) {
                let cnt = count_above(points, &axis, c);
                if best.as_ref().is_none_or(|(_, b)| cnt > *b) {
                    best = Some((axis, cnt));
                }
            }
        });
    }
    let (axis, count) = best.expect("singletons always give a candidate");
    Ok((UnitVector::normalize(axis)?, count))
}

/// Starts explored by [`mean_shift_search`] beyond the random restarts.
const POINT_STARTS: usize = 16;

/// Multi-start local search for a dense cap `{x : ⟨x,a⟩ > c}`.
///
/// Every input point is tried as an axis. The best few of those, plus
/// `restarts` uniformly random axes, are refined in two passes: mean shift
/// (move the axis to the normalized mean of the points it captures), then
/// gradient ascent on a sigmoid-smoothed count whose temperature is lowered
/// geometrically, which drags the boundary across near-miss points. Every
/// visited axis is recounted exactly.
pub(crate) fn mean_shift_search(
    points: &[UnitVector],
    c: f64,
    restarts: usize,
    rng: &mut dyn RngCore,
) -> Result<(UnitVector, usize)> {
    let d = check_points(points)?;
    let mut best: (Vec<f64>, usize) = (points[0].as_slice().to_vec(), 0);
    let consider = |axis: &[f64], best: &mut (Vec<f64>, usize)| -> Vec<usize> {
        let m = members_above(points, axis, c);
        if m.len() > best.1 {
            *best = (axis.to_vec(), m.len());
        }
        m
    };
    let mut by_count: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (consider(p.as_slice(), &mut best).len(), i))
        .collect();
    by_count.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut start_axes: Vec<Vec<f64>> = by_count
        .iter()
        .take(POINT_STARTS)
        .map(|&(_, i)| points[i].as_slice().to_vec())
        .collect();
    for _ in 0..restarts {
        start_axes.push(sample_uniform_sphere(d, rng)?.into_inner());
    }
    for start in start_axes {
        let mut axis = start;
        for _ in 0..100 {
            let inside = consider(&axis, &mut best);
            if inside.is_empty() {
                break;
            }
            let mut mean = vec![0.0; d];
            for &i in &inside {
                for (m, x) in mean.iter_mut().zip(points[i].as_slice()) {
                    *m += x;
                }
            }
            let n = norm(&mean);
            if n < 1e-15 {
                break;
            }
            mean.iter_mut().for_each(|x| *x /= n);
            let moved = mean
                .iter()
                .zip(&axis)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            axis = mean;
            if moved < 1e-14 {
                break;
            }
        }
        soft_ascent(points, c, &mut axis, |a| {
            consider(a, &mut best);
        });
    }
    boundary_refine(points, c, &mut best);
    let axis = UnitVector::normalize(best.0)?;
    let count = count_above(points, axis.as_slice(), c);
    Ok((axis, count))
}

/// Largest number of boundary subsets [`boundary_refine`] examines per round.
const REFINE_BUDGET: usize = 4096;

/// Repeatedly applies the exact candidate construction to the points lying
/// closest to the current boundary, keeping strict improvements.
fn boundary_refine(points: &[UnitVector], c: f64, best: &mut (Vec<f64>, usize)) {
    let n = points.len();
    let d = best.0.len();
    let subsets = |m: usize| (1..=d.min(m)).map(|k| binomial(m, k)).sum::<usize>();
    let mut m = d.min(n);
    while m < n && subsets(m + 1) <= REFINE_BUDGET {
        m += 1;
    }
    for _ in 0..20 {
        let mut near: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| ((dot(p.as_slice(), &best.0) - c).abs(), i))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let near: Vec<usize> = near[..m].iter().map(|&(_, i)| i).collect();
        let before = best.1;
        for size in 1..=d.min(m) {
            for_each_combination(m, size, |idx| {
                let pts: Vec<&[f64]> = idx.iter().map(|&i| points[near[i]].as_slice()).collect();
                if let Some(axis) = equal_margin_axis(&pts) {
                    let cnt = count_above(points, &axis, c);
                    if cnt > best.1 {
                        *best = (axis, cnt);
                    }
                }
            });
        }
        if best.1 == before {
            return;
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Annealed ascent on `Σ σ((⟨x_i,a⟩ - c)/τ)` over the sphere. Calls `visit`
/// on every iterate.
fn soft_ascent(points: &[UnitVector], c: f64, axis: &mut [f64], mut visit: impl FnMut(&[f64])) {
    let d = axis.len();
    let mut tau = 0.5;
    while tau > 1e-3 {
        for _ in 0..8 {
            let mut g = vec![0.0; d];
            for p in points {
                let z = (dot(p.as_slice(), axis) - c) / tau;
                let s = 1.0 / (1.0 + (-z).exp());
                let w = s * (1.0 - s);
                g.iter_mut().zip(p.as_slice()).for_each(|(g, x)| *g += w * x);
            }
            let radial = dot(&g, axis);
            g.iter_mut().zip(axis.iter()).for_each(|(g, a)| *g -= radial * a);
            let gn = norm(&g);
            if gn < 1e-12 {
                break;
            }
            axis.iter_mut().zip(&g).for_each(|(a, g)| *a += tau * g / gn);
            let an = norm(axis);
            axis.iter_mut().for_each(|a| *a /= an);
            visit(axis);
        }
        tau *= 0.8;
    }
}

/// Exact densest hemisphere for `d ≤ 4`.
pub fn densest_hemisphere_exact(points: &[UnitVector]) -> Result<HemisphereSolution> {
    let (axis, _) = exact_cap_search(points, 0.0)?;
    Ok(HemisphereSolution::from_axis(points, axis))
}

/// Heuristic densest hemisphere in any dimension. The count is a recount
/// and is never below the best single-point axis.
pub fn densest_hemisphere_heuristic(
    points: &[UnitVector],
    restarts: usize,
    rng: &mut dyn RngCore,
) -> Result<HemisphereSolution> {
    let (axis, _) = mean_shift_search(points, 0.0, restarts, rng)?;
    Ok(HemisphereSolution::from_axis(points, axis))
}

/// Whether a single open hemisphere holds every point (`d ≤ 4`).
pub fn hemisphere_feasible(points: &[UnitVector]) -> Result<bool> {
    Ok(densest_hemisphere_exact(points)?.count == points.len())
}

/// A densest-hemisphere algorithm selectable by name.
pub trait HemisphereSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, points: &[UnitVector], rng: &mut dyn RngCore) -> Result<HemisphereSolution>;
}

impl fmt::Debug for dyn HemisphereSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HemisphereSolver({})", self.name())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSolver;

impl HemisphereSolver for ExactSolver {
    fn name(&self) -> &'static str {
        "exact"
    }
    fn solve(&self, points: &[UnitVector], _rng: &mut dyn RngCore) -> Result<HemisphereSolution> {
        densest_hemisphere_exact(points)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HeuristicSolver {
    pub restarts: usize,
}

impl Default for HeuristicSolver {
    fn default() -> Self {
        HeuristicSolver { restarts: 64 }
    }
}

impl HemisphereSolver for HeuristicSolver {
    fn name(&self) -> &'static str {
        "heuristic"
    }
    fn solve(&self, points: &[UnitVector], rng: &mut dyn RngCore) -> Result<HemisphereSolution> {
        densest_hemisphere_heuristic(points, self.restarts, rng)
    }
}

/// Name-keyed collection of hemisphere solvers.
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn HemisphereSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry {
            solvers: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ExactSolver));
        r.register(Box::new(HeuristicSolver::default()));
        r
    }

    pub fn register(&mut self, solver: Box<dyn HemisphereSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.solvers.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<&dyn HemisphereSolver> {
        self.solvers
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "hemisphere solver",
                name: name.to_string(),
                available: self.names().collect::<Vec<_>>().join(", "),
            })
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn deg(a: f64) -> UnitVector {
        let r = a.to_radians();
        UnitVector::new(vec![r.cos(), r.sin()]).unwrap()
    }

    /// Planar oracle: every arc boundary sits just past a point, so sweep
    /// axes at each point angle ± 90° nudged both ways.
    fn planar_oracle(points: &[UnitVector]) -> usize {
        let mut best = 0;
        for p in points {
            let a = p.as_slice()[1].atan2(p.as_slice()[0]);
            for off in [std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2] {
                for nudge in [1e-7, -1e-7] {
                    let t = a + off + nudge;
                    let axis = [t.cos(), t.sin()];
                    best = best.max(count_above(points, &axis, 0.0));
                }
            }
        }
        best
    }

    #[test]
    fn identical_points() {
        let u = UnitVector::new(vec![0.0, 0.6, 0.8]).unwrap();
        let s = densest_hemisphere_exact(&vec![u.clone(); 4]).unwrap();
        assert_eq!(s.count, 4);
        assert!((s.hemisphere.axis.dot(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_pair_counts_one() {
        let u = UnitVector::new(vec![0.0, 0.6, 0.8]).unwrap();
        assert_eq!(densest_hemisphere_exact(&[u.clone(), -&u]).unwrap().count, 1);
        assert!(!hemisphere_feasible(&[u.clone(), -&u]).unwrap());
        assert!(hemisphere_feasible(&[u]).unwrap());
    }

    #[test]
    fn planar_examples() {
        let s = [deg(0.0), deg(10.0), deg(180.0)];
        assert_eq!(densest_hemisphere_exact(&s).unwrap().count, 2);
        let tri = [deg(0.0), deg(120.0), deg(240.0)];
        assert!(!hemisphere_feasible(&tri).unwrap());
        assert_eq!(densest_hemisphere_exact(&tri).unwrap().count, 2);
    }

    #[test]
    fn planar_random_against_oracle() {
        let mut rng = seeded_rng(21);
        for n in 1..25 {
            let pts: Vec<_> = (0..n).map(|_| sample_uniform_sphere(2, &mut rng).unwrap()).collect();
            assert_eq!(densest_hemisphere_exact(&pts).unwrap().count, planar_oracle(&pts));
        }
    }

    #[test]
    fn exact_dominates_sampled_axes() {
        let mut rng = seeded_rng(22);
        for d in 3..=4 {
            for _ in 0..20 {
                let pts: Vec<_> = (0..14).map(|_| sample_uniform_sphere(d, &mut rng).unwrap()).collect();
                let exact = densest_hemisphere_exact(&pts).unwrap();
                assert_eq!(exact.count, exact.hemisphere.count(&pts));
                for _ in 0..2000 {
                    let a = sample_uniform_sphere(d, &mut rng).unwrap();
                    assert!(Hemisphere { axis: a }.count(&pts) <= exact.count);
                }
            }
        }
    }

    #[test]
    fn exact_refuses_high_dimension() {
        let p = UnitVector::basis(5, 0).unwrap();
        assert!(matches!(
            densest_hemisphere_exact(&[p]),
            Err(Error::DimensionUnsupported { max: 4, found: 5 })
        ));
        assert!(densest_hemisphere_exact(&[]).is_err());
    }

    #[test]
    fn boundary_points_are_outside() {
        let h = Hemisphere {
            axis: UnitVector::basis(2, 0).unwrap(),
        };
        assert!(!h.contains(&UnitVector::basis(2, 1).unwrap()));
    }

    #[test]
    fn heuristic_captures_a_tight_cap() {
        let mut rng = seeded_rng(23);
        let center = sample_uniform_sphere(6, &mut rng).unwrap();
        let pts: Vec<_> = (0..60)
            .map(|_| {
                let g = sample_uniform_sphere(6, &mut rng).unwrap();
                let c: Vec<f64> = center
                    .as_slice()
                    .iter()
                    .zip(g.as_slice())
                    .map(|(a, b)| a + 0.15 * b)
                    .collect();
                UnitVector::normalize(c).unwrap()
            })
            .collect();
        for p in &pts {
            assert!(p.dot(&center) > 10f64.to_radians().cos());
        }
        let s = densest_hemisphere_heuristic(&pts, 8, &mut rng).unwrap();
        assert_eq!(s.count, pts.len());
    }

    #[test]
    fn heuristic_beats_point_baseline() {
        let mut rng = seeded_rng(24);
        for _ in 0..10 {
            let pts: Vec<_> = (0..200).map(|_| sample_uniform_sphere(10, &mut rng).unwrap()).collect();
            let base = pts
                .iter()
                .map(|p| Hemisphere { axis: p.clone() }.count(&pts))
                .max()
                .unwrap();
            let s = densest_hemisphere_heuristic(&pts, 16, &mut rng).unwrap();
            assert!(s.count >= base);
            assert_eq!(s.count, s.hemisphere.count(&pts));
        }
    }

    #[test]
    fn registry_selects_by_name() {
        let reg = SolverRegistry::with_builtins();
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["exact", "heuristic"]);
        let pts = [deg(0.0), deg(10.0), deg(180.0)];
        let mut rng = seeded_rng(0);
        for name in ["exact", "heuristic"] {
            assert_eq!(reg.get(name).unwrap().solve(&pts, &mut rng).unwrap().count, 2);
        }
        assert!(reg.get("bds").is_err());
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }
}
