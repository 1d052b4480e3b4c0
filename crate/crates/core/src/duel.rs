//! Two dueling influencers `v` and `v′`.
//!
//! Opinions are split into the part `u_V` in the plane `V = span{v, v′}` and
//! the orthogonal rest `u_W`. Interventions never grow `u_W`, and with
//! `⟨v,v′⟩ > 0` the cones generated by `{v, v′}` and `{-v, -v′}` absorb the
//! in-plane parts.

use serde::Serialize;

use crate::dynamics::{max_pair_disagreement, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{contraction_threshold, dot, norm, pull, Eta, UnitVector};

/// Coefficients within this distance of zero classify as boundary.
pub const CONE_TOL: f64 = 1e-12;

/// Grid size used by [`contraction_certificate`].
pub const LIPSCHITZ_GRID: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuelConfig {
    pub v: UnitVector,
    /// Second influencer after the sign flip that makes `⟨v,v′⟩ ≥ 0`.
    pub v_prime: UnitVector,
    pub eta: Eta,
    pub cos_theta: f64,
    pub theta: f64,
    /// Whether `v′` was negated.
    pub flipped: bool,
    #[serde(skip)]
    e2: Vec<f64>,
}

impl DuelConfig {
    pub fn new(v: UnitVector, v_prime: UnitVector, eta: Eta) -> Result<Self> {
        v.check_dim(&v_prime)?;
        let raw = v.dot(&v_prime);
        if raw.abs() >= 1.0 - 1e-12 {
            return Err(Error::param("v_prime", "influencers must not be equal up to sign"));
        }
        let flipped = raw < 0.0;
        let v_prime = if flipped { -v_prime } else { v_prime };
        let cos_theta = v.dot(&v_prime);
        let mut e2: Vec<f64> = v_prime
            .as_slice()
            .iter()
            .zip(v.as_slice())
            .map(|(b, a)| b - cos_theta * a)
            .collect();
        let n = norm(&e2);
        e2.iter_mut().for_each(|x| *x /= n);
        Ok(DuelConfig {
            theta: cos_theta.clamp(-1.0, 1.0).acos(),
            v,
            v_prime,
            eta,
            cos_theta,
            flipped,
            e2,
        })
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    /// Projects `u` onto `V` and its complement.
    pub fn decompose(&self, u: &UnitVector) -> Result<SpanDecomposition> {
        self.v.check_dim(u)?;
        let x = u.dot(&self.v);
        let y = dot(u.as_slice(), &self.e2);
        let u_v: Vec<f64> = self
            .v
            .as_slice()
            .iter()
            .zip(&self.e2)
            .map(|(a, b)| x * a + y * b)
            .collect();
        let u_w: Vec<f64> = u.as_slice().iter().zip(&u_v).map(|(a, b)| a - b).collect();
        Ok(SpanDecomposition {
            u_v,
            u_w,
            frame: (x, y),
            angle_in_v: y.atan2(x),
        })
    }

    /// Coefficients `(α, β)` with `u_V = αv + βv′`.
    pub fn oblique(&self, frame: (f64, f64)) -> (f64, f64) {
        let (x, y) = frame;
        let beta = y / self.theta.sin();
        (x - beta * self.cos_theta, beta)
    }

    pub fn cone_of(&self, dec: &SpanDecomposition) -> Result<Cone> {
        let (x, y) = dec.frame;
        if x.hypot(y) < CONE_TOL {
            return Err(Error::Degenerate("opinion has no component in span{v, v′}".into()));
        }
        let (a, b) = self.oblique(dec.frame);
        Ok(if a.abs() <= CONE_TOL || b.abs() <= CONE_TOL {
            Cone::Boundary
        } else {
            match (a > 0.0, b > 0.0) {
                (true, true) => Cone::PlusPlus,
                (false, false) => Cone::MinusMinus,
                (true, false) => Cone::PlusMinus,
                (false, true) => Cone::MinusPlus,
            }
        })
    }

    /// Euclidean distance from `u` to `cone(v,v′) ∪ cone(-v,-v′)`.
    pub fn distance_to_cones(&self, u: &UnitVector) -> Result<f64> {
        let dec = self.decompose(u)?;
        let (x, y) = dec.frame;
        let in_plane = match self.cone_of(&dec) {
            Ok(Cone::PlusPlus | Cone::MinusMinus | Cone::Boundary) | Err(_) => 0.0,
            Ok(_) => {
                let (c, s) = (self.cos_theta, self.theta.sin());
                [(1.0, 0.0), (-1.0, 0.0), (c, s), (-c, -s)]
                    .iter()
                    .map(|&(rx, ry)| {
                        let along = x * rx + y * ry;
                        if along <= 0.0 {
                            x.hypot(y)
                        } else {
                            (x * x + y * y - along * along).max(0.0).sqrt()
                        }
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        };
        Ok(in_plane.hypot(dec.w_norm()))
    }

    /// True when `w` is one of `±v, ±v′` (as given before any flip).
    pub fn is_influencer(&self, w: &UnitVector) -> bool {
        w.dim() == self.dim() && (w.sign_distance(&self.v) < 1e-12 || w.sign_distance(&self.v_prime) < 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanDecomposition {
    pub u_v: Vec<f64>,
    pub u_w: Vec<f64>,
    /// Coordinates of `u_V` in the orthonormal frame `(v, e₂)`.
    pub frame: (f64, f64),
    pub angle_in_v: f64,
}

impl SpanDecomposition {
    pub fn w_norm(&self) -> f64 {
        norm(&self.u_w)
    }

    pub fn v_norm(&self) -> f64 {
        self.frame.0.hypot(self.frame.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cone {
    /// `cone(v, v′)`
    PlusPlus,
    /// `cone(-v, -v′)`
    MinusMinus,
    /// `cone(v, -v′)`
    PlusMinus,
    /// `cone(-v, v′)`
    MinusPlus,
    Boundary,
}

impl Cone {
    pub fn label(self) -> &'static str {
        match self {
            Cone::PlusPlus => "cone(v,v')",
            Cone::MinusMinus => "cone(-v,-v')",
            Cone::PlusMinus => "cone(v,-v')",
            Cone::MinusPlus => "cone(-v,v')",
            Cone::Boundary => "boundary",
        }
    }
}

/// `min(1/2, (η + η²/2)·c²θ²/16)` where `c = ‖u_V‖`.
pub fn xi_bound(c: f64, config: &DuelConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::param("c", format!("must lie in [0, 1], got {c}")));
    }
    let e = config.eta.value();
    Ok((0.5f64).min((e + e * e / 2.0) * c * c * config.theta * config.theta / 16.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionCertificate {
    pub is_contractive: bool,
    pub empirical_k: f64,
}

/// Whether `cos θ > 1/√(2+η)`, and the largest slope of the pull function
/// between adjacent points of a grid on `[0, θ]`.
pub fn contraction_certificate(config: &DuelConfig) -> ContractionCertificate {
    lipschitz_on(config.theta, config.eta, config.cos_theta > contraction_threshold(config.eta))
}

/// Largest adjacent-grid slope of the pull function on `[0, theta]`.
pub fn pull_lipschitz(theta: f64, eta: Eta) -> f64 {
    lipschitz_on(theta, eta, false).empirical_k
}

fn lipschitz_on(theta: f64, eta: Eta, is_contractive: bool) -> ContractionCertificate {
    let h = theta / LIPSCHITZ_GRID as f64;
    let f: Vec<f64> = (0..=LIPSCHITZ_GRID)
        .map(|i| pull((i as f64 * h).min(std::f64::consts::FRAC_PI_2), eta).expect("grid inside [0, π/2]"))
        .collect();
    let empirical_k = f.windows(2).map(|w| (w[1] - w[0]) / h).fold(0.0, f64::max);
    ContractionCertificate {
        is_contractive,
        empirical_k,
    }
}

/// Per-step view of a duel run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuelStep {
    pub t: usize,
    pub w_norms: Vec<f64>,
    pub cones: Vec<Cone>,
    pub sign_v: Vec<i8>,
    pub sign_v_prime: Vec<i8>,
    pub max_pair_disagreement: f64,
    pub max_cone_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct DuelReport {
    pub steps: Vec<DuelStep>,
    /// Steps where some agent's `‖u_W‖` grew by more than `1e-12`.
    pub w_increase_violations: usize,
    pub max_w_increase: f64,
    /// Times an agent left the absorbing cone it had entered for a different
    /// open cone.
    pub cone_violations: usize,
    /// Agents that entered `cone(v,v′)` or `cone(-v,-v′)`.
    pub absorbed_agents: usize,
    pub sign_changes_v: usize,
    pub sign_changes_v_prime: usize,
    pub final_max_pair_disagreement: f64,
    pub final_max_cone_distance: f64,
    /// First observed time at which every pair agreed up to sign within
    /// the monitor's epsilon.
    pub converged_at: Option<usize>,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Streaming checker for duel runs; feed it every state in order.
pub struct DuelMonitor<'a> {
    config: &'a DuelConfig,
    epsilon: f64,
    keep_series: bool,
    prev_w: Vec<f64>,
    absorbed: Vec<Option<Cone>>,
    initial_signs: Vec<(i8, i8)>,
    report: DuelReport,
}

impl<'a> DuelMonitor<'a> {
    pub fn new(config: &'a DuelConfig, epsilon: f64, keep_series: bool) -> Self {
        DuelMonitor {
            config,
            epsilon,
            keep_series,
            prev_w: Vec::new(),
            absorbed: Vec::new(),
            initial_signs: Vec::new(),
            report: DuelReport::default(),
        }
    }

    pub fn observe(&mut self, t: usize, opinions: &[UnitVector]) -> Result<()> {
        let cfg = self.config;
        let first = self.prev_w.is_empty();
        let n = opinions.len();
        let mut w_norms = Vec::with_capacity(n);
        let mut cones = Vec::with_capacity(n);
        let mut sign_v = Vec::with_capacity(n);
        let mut sign_vp = Vec::with_capacity(n);
        let mut max_dist = 0.0f64;
        let mut w_violation = false;
        for (i, u) in opinions.iter().enumerate() {
            let dec = cfg.decompose(u)?;
            let w = dec.w_norm();
            let cone = cfg.cone_of(&dec).unwrap_or(Cone::Boundary);
            let sv = sign(u.dot(&cfg.v));
            let svp = sign(u.dot(&cfg.v_prime));
            max_dist = max_dist.max(cfg.distance_to_cones(u)?);
            if first {
                self.initial_signs.push((sv, svp));
                self.absorbed.push(None);
            } else {
                let grow = w - self.prev_w[i];
                self.report.max_w_increase = self.report.max_w_increase.max(grow);
                if grow > 1e-12 {
                    w_violation = true;
                }
                let (iv, ivp) = self.initial_signs[i];
                if sv != iv {
                    self.report.sign_changes_v += 1;
                }
                if svp != ivp {
                    self.report.sign_changes_v_prime += 1;
                }
            }
            match self.absorbed[i] {
                Some(home) => {
                    if cone != home && cone != Cone::Boundary {
                        self.report.cone_violations += 1;
                    }
                }
                None => {
                    if cfg.cos_theta > 0.0 && matches!(cone, Cone::PlusPlus | Cone::MinusMinus) {
                        self.absorbed[i] = Some(cone);
                        self.report.absorbed_agents += 1;
                    }
                }
            }
            w_norms.push(w);
            cones.push(cone);
            sign_v.push(sv);
            sign_vp.push(svp);
        }
        if w_violation {
            self.report.w_increase_violations += 1;
        }
        let disagreement = max_pair_disagreement(opinions);
        if self.report.converged_at.is_none() && disagreement < self.epsilon {
            self.report.converged_at = Some(t);
        }
        self.report.final_max_pair_disagreement = disagreement;
        self.report.final_max_cone_distance = max_dist;
        if self.keep_series {
            self.report.steps.push(DuelStep {
                t,
                w_norms: w_norms.clone(),
                cones,
                sign_v,
                sign_v_prime: sign_vp,
                max_pair_disagreement: disagreement,
                max_cone_distance: max_dist,
            });
        }
        self.prev_w = w_norms;
        Ok(())
    }

    pub fn finish(self) -> DuelReport {
        self.report
    }
}

/// Checks a recorded duel run. Every applied intervention must be one of
/// `±v, ±v′`. Snapshots are analysed in order, so monotonicity and
/// absorption are only checked at the recorded stride.
pub fn duel_diagnostics(trajectory: &Trajectory, config: &DuelConfig, epsilon: f64) -> Result<DuelReport> {
    for (k, w) in trajectory.applied.iter().enumerate() {
        if !config.is_influencer(w) {
            return Err(Error::ScheduleMismatch { step: k + 1 });
        }
    }
    let mut m = DuelMonitor::new(config, epsilon, true);
    for s in &trajectory.snapshots {
        m.observe(s.t, &s.opinions)?;
    }
    Ok(m.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run, PopulationState, RandomPair, SnapshotStride};
    use crate::geometry::{critical_angle, sample_uniform_sphere};
    use crate::seeded_rng;
    use std::f64::consts::PI;

    fn uv(c: &[f64]) -> UnitVector {
        UnitVector::new(c.to_vec()).unwrap()
    }

    fn config(cos: f64, eta: f64) -> DuelConfig {
        let s = (1.0 - cos * cos).sqrt();
        DuelConfig::new(uv(&[1.0, 0.0, 0.0]), uv(&[cos, s, 0.0]), Eta::new(eta).unwrap()).unwrap()
    }

    #[test]
    fn canonical_flip() {
        let c = DuelConfig::new(uv(&[1.0, 0.0]), uv(&[-0.6, 0.8]), Eta::ONE).unwrap();
        assert!(c.flipped);
        assert!((c.cos_theta - 0.6).abs() < 1e-15);
        assert!(DuelConfig::new(uv(&[1.0, 0.0]), uv(&[-1.0, 0.0]), Eta::ONE).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let cfg = config(0.8, 1.0);
        let d = cfg.decompose(&cfg.v).unwrap();
        assert_eq!(d.w_norm(), 0.0);
        assert_eq!(d.angle_in_v, 0.0);
        let d = cfg.decompose(&uv(&[0.0, 0.0, 1.0])).unwrap();
        assert!(d.v_norm() < 1e-15);
        let mut rng = seeded_rng(61);
        for _ in 0..200 {
            let u = sample_uniform_sphere(3, &mut rng).unwrap();
            let d = cfg.decompose(&u).unwrap();
            let back: Vec<f64> = d.u_v.iter().zip(&d.u_w).map(|(a, b)| a + b).collect();
            assert!(back.iter().zip(u.as_slice()).all(|(a, b)| (a - b).abs() < 1e-12));
            assert!(dot(&d.u_v, &d.u_w).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_examples() {
        let cfg = config(0.5, 1.0);
        let mix = |a: f64, b: f64| {
            let c: Vec<f64> = cfg
                .v
                .as_slice()
                .iter()
                .zip(cfg.v_prime.as_slice())
                .map(|(x, y)| a * x + b * y)
                .collect();
            UnitVector::normalize(c).unwrap()
        };
        let cone = |u: &UnitVector| cfg.cone_of(&cfg.decompose(u).unwrap()).unwrap();
        assert_eq!(cone(&mix(1.0, 1.0)), Cone::PlusPlus);
        assert_eq!(cone(&mix(-1.0, 0.0)), Cone::Boundary);
        assert_eq!(cone(&mix(-1.0, 1.0)), Cone::MinusPlus);
        assert_eq!(cone(&mix(1.0, -2.0)), Cone::PlusMinus);
        assert_eq!(cone(&mix(-1.0, -0.1)), Cone::MinusMinus);
        let ortho = cfg.decompose(&uv(&[0.0, 0.0, 1.0])).unwrap();
        assert!(cfg.cone_of(&ortho).is_err());
        assert_eq!(cfg.distance_to_cones(&mix(2.0, 1.0)).unwrap(), 0.0);
        assert!((cfg.distance_to_cones(&uv(&[0.0, 0.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn xi_values() {
        let cfg = config(0.0, 1.0);
        assert_eq!(xi_bound(0.0, &cfg).unwrap(), 0.0);
        let want = 1.5 * (PI * PI / 4.0) / 16.0;
        assert!((xi_bound(1.0, &cfg).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.231319).abs() < 1e-6);
        assert!(xi_bound(1.1, &cfg).is_err());
        let mut prev = 0.0;
        for k in 0..=20 {
            let x = xi_bound(k as f64 / 20.0, &cfg).unwrap();
            assert!(x >= prev);
            prev = x;
        }
        let mut prev = 0.0;
        for eta in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let x = xi_bound(0.7, &config(0.3, eta)).unwrap();
            assert!(x >= prev);
            prev = x;
        }
        let mut prev = 0.0;
        for cos in [0.99, 0.8, 0.5, 0.2, 0.0] {
            let x = xi_bound(0.7, &config(cos, 1.0)).unwrap();
            assert!(x >= prev);
            prev = x;
        }
    }

    #[test]
    fn certificate_examples() {
        let c = contraction_certificate(&config(0.8, 1.0));
        assert!(c.is_contractive);
        assert!(c.empirical_k < 1.0);

        let t = contraction_threshold(Eta::ONE);
        let at = DuelConfig::new(uv(&[1.0, 0.0]), uv(&[t, (1.0 - t * t).sqrt()]), Eta::ONE).unwrap();
        assert!(!contraction_certificate(&at).is_contractive);
        assert!((at.theta - critical_angle(Eta::ONE)).abs() < 1e-12);

        let tiny = contraction_certificate(&config(0.999_999, 1.0));
        assert!(tiny.empirical_k < 1.0);
        assert!((tiny.empirical_k - 0.5).abs() < 1e-3);

        let wide = contraction_certificate(&config(0.2, 1.0));
        assert!(!wide.is_contractive);
        assert!(wide.empirical_k > 1.0);
    }

    #[test]
    fn diagnostics_on_a_duel_run() {
        let cfg = config(0.8, 1.0);
        let mut rng = seeded_rng(62);
        let ops: Vec<_> = (0..10).map(|_| sample_uniform_sphere(3, &mut rng).unwrap()).collect();
        let s = PopulationState::new(ops, Eta::ONE).unwrap();
        let mut sched = RandomPair::new(cfg.v.clone(), cfg.v_prime.clone()).unwrap();
        let tr = run(&s, &mut sched, 3000, 7, SnapshotStride::Every(1)).unwrap();
        let rep = duel_diagnostics(&tr, &cfg, 0.05).unwrap();
        assert_eq!(rep.steps.len(), 3001);
        assert_eq!(rep.w_increase_violations, 0);
        assert_eq!(rep.cone_violations, 0);
        assert!(rep.absorbed_agents > 0);
    }

    #[test]
    fn diagnostics_reject_foreign_interventions() {
        let cfg = config(0.8, 1.0);
        let s = PopulationState::new(vec![uv(&[0.0, 0.6, 0.8])], Eta::ONE).unwrap();
        let mut sched = crate::dynamics::Fixed::new(uv(&[0.0, 0.0, 1.0]));
        let tr = run(&s, &mut sched, 3, 0, SnapshotStride::Every(1)).unwrap();
        assert_eq!(duel_diagnostics(&tr, &cfg, 0.05), Err(Error::ScheduleMismatch { step: 1 }));
    }
}
