//! Single-intervention strategies for `η = 1`.
//!
//! Agents start on the equator `u_d = 0`; the influencer wants to raise the
//! last coordinate with one intervention. Helping one agent as much as
//! possible gives it `1/3`, helping two agents with correlation `c` equally
//! costs some of that, and the correlation the two are left with differs
//! between the two approaches. That gap is the polarization cost.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{intervene_unchecked, Eta, UnitVector};

/// Largest last coordinate one intervention can give an equatorial agent.
pub const ONE_AGENT_VALUE: f64 = 1.0 / 3.0;

pub(crate) fn require_unit_eta(eta: Eta) -> Result<()> {
    if eta.value() != 1.0 {
        return Err(Error::param("eta", format!("closed forms hold only for eta = 1, got {}", eta.value())));
    }
    Ok(())
}

fn check_correlation(c: f64) -> Result<()> {
    if !(c > -1.0 && c <= 1.0) {
        return Err(Error::param("c", format!("correlation must lie in (-1, 1], got {c}")));
    }
    Ok(())
}

/// Correlation left after the one-agent benchmark intervention:
/// `c√2/√(c²+1)`.
pub fn c_one(c: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::param("c", format!("correlation must lie in [-1, 1], got {c}")));
    }
    Ok(c * 2f64.sqrt() / (c * c + 1.0).sqrt())
}

/// Correlation left after the best symmetric two-agent intervention:
/// `1 - √2(1-c)/√(3c+5)`.
pub fn c_two(c: f64) -> Result<f64> {
    check_correlation(c)?;
    Ok(1.0 - 2f64.sqrt() * (1.0 - c) / (3.0 * c + 5.0).sqrt())
}

/// `c_two - c_one`, never negative.
pub fn polarization_cost(c: f64) -> Result<f64> {
    Ok(c_two(c)? - c_one(c)?)
}

/// The two equatorial agents `(±sin α, cos α, 0)` with `cos 2α = c`.
pub fn two_agent_setup(c: f64) -> Result<[UnitVector; 2]> {
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::param("c", format!("correlation must lie in [-1, 1], got {c}")));
    }
    let alpha = c.acos() / 2.0;
    let (s, co) = alpha.sin_cos();
    Ok([
        UnitVector::normalize(vec![s, co, 0.0])?,
        UnitVector::normalize(vec![-s, co, 0.0])?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoAgentSolution {
    pub c: f64,
    pub cos2_beta: f64,
    /// Last coordinate both agents reach.
    pub achieved: f64,
    pub c_two: f64,
    pub agents: [UnitVector; 2],
    pub intervention: UnitVector,
}

/// Best intervention raising two agents with correlation `c` equally:
/// `v = (0, cos β, sin β)` in the frame of [`two_agent_setup`], with
/// `cos²β = √2(√(3c+5) - √2) / (3(c+1))`.
pub fn two_agent_intervention(c: f64, eta: Eta) -> Result<TwoAgentSolution> {
    require_unit_eta(eta)?;
    check_correlation(c)?;
    let r = (3.0 * c + 5.0).sqrt();
    let cos2_beta = 2f64.sqrt() * (r - 2f64.sqrt()) / (3.0 * (c + 1.0));
    let achieved = ((3.0 * c + 7.0 - 2.0 * (6.0 * c + 10.0).sqrt()) / (9.0 * (c + 1.0)))
        .max(0.0)
        .sqrt();
    let cb = cos2_beta.sqrt();
    let sb = (1.0 - cos2_beta).max(0.0).sqrt();
    Ok(TwoAgentSolution {
        c,
        cos2_beta,
        achieved,
        c_two: c_two(c)?,
        agents: two_agent_setup(c)?,
        intervention: UnitVector::normalize(vec![0.0, cb, sb])?,
    })
}

/// Benchmark intervention for a single agent: `(√3/3)·u₁ + (√6/3)·e_d`,
/// which lifts the agent's last coordinate to exactly `1/3`.
pub fn one_agent_intervention(u1: &UnitVector, eta: Eta) -> Result<(UnitVector, f64)> {
    require_unit_eta(eta)?;
    let d = u1.dim();
    if u1.as_slice()[d - 1].abs() > 1e-12 {
        return Err(Error::param("u1", "last coordinate must be zero"));
    }
    let a = 3f64.sqrt() / 3.0;
    let mut v: Vec<f64> = u1.as_slice().iter().map(|x| a * x).collect();
    v[d - 1] = 6f64.sqrt() / 3.0;
    let v = UnitVector::normalize(v)?;
    let achieved = intervene_unchecked(u1, &v, eta).as_slice()[d - 1];
    Ok((v, achieved))
}

/// Last coordinate reached by an equatorial agent at correlation `c` with
/// the cap axis when the intervention has `cos β = z`:
/// `c·z·√(1-z²) / √(1+3c²z²)`.
pub fn uplift(c: f64, z: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c) || !(0.0..=1.0).contains(&z) {
        return Err(Error::param("c, z", format!("need c ∈ [-1,1], z ∈ [0,1]; got c={c}, z={z}")));
    }
    Ok(c * z * (1.0 - z * z).sqrt() / (1.0 + 3.0 * c * c * z * z).sqrt())
}

/// Maximizer of [`uplift`] over `z`: `1/√(1+√(1+3c²))`.
pub fn optimal_z(c: f64) -> f64 {
    1.0 / (1.0 + (1.0 + 3.0 * c * c).sqrt()).sqrt()
}

/// Maximum of [`uplift`] over `z`: `(√(1+3c²) - 1)/(3c)`, evaluated as
/// `c/(√(1+3c²) + 1)`.
pub fn uplift_optimum(c: f64) -> f64 {
    c / ((1.0 + 3.0 * c * c).sqrt() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::intervene;

    #[test]
    fn endpoint_values() {
        assert_eq!(c_one(1.0).unwrap(), 1.0);
        assert_eq!(c_two(1.0).unwrap(), 1.0);
        assert_eq!(polarization_cost(1.0).unwrap(), 0.0);
        let want = 1.0 - 2f64.sqrt() / 5f64.sqrt();
        assert!((c_two(0.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.367544).abs() < 1e-6);
        assert!((polarization_cost(0.0).unwrap() - want).abs() < 1e-15);
        assert!(c_two(-1.0).is_err());
        assert!(polarization_cost(-1.0).is_err());
    }

    #[test]
    fn cost_is_nonnegative() {
        for k in -99..=99 {
            let c = k as f64 / 100.0;
            assert!(polarization_cost(c).unwrap() >= -1e-12, "c={c}");
        }
    }

    #[test]
    fn two_agent_collapses_to_benchmark_at_one() {
        let s = two_agent_intervention(1.0, Eta::ONE).unwrap();
        assert!((s.achieved - ONE_AGENT_VALUE).abs() < 1e-15);
        assert!((s.cos2_beta - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.c_two, 1.0);
        let s0 = two_agent_intervention(0.0, Eta::ONE).unwrap();
        assert!((s0.achieved - ((7.0 - 2.0 * 10f64.sqrt()) / 9.0).sqrt()).abs() < 1e-15);
        assert!((s0.achieved - 0.273951).abs() < 1e-6);
        assert!(two_agent_intervention(0.5, Eta::new(2.0).unwrap()).is_err());
    }

    #[test]
    fn two_agent_replay() {
        for k in -99..=99 {
            let c = k as f64 / 100.0;
            let s = two_agent_intervention(c, Eta::ONE).unwrap();
            let [u1, u2] = &s.agents;
            assert!((u1.dot(u2) - c).abs() < 1e-12);
            let w1 = intervene(u1, &s.intervention, Eta::ONE).unwrap();
            let w2 = intervene(u2, &s.intervention, Eta::ONE).unwrap();
            assert!((w1.as_slice()[2] - s.achieved).abs() < 1e-9, "c={c}");
            assert!((w2.as_slice()[2] - s.achieved).abs() < 1e-9, "c={c}");
            assert!((w1.dot(&w2) - s.c_two).abs() < 1e-9, "c={c}");
        }
    }

    #[test]
    fn one_agent_benchmark() {
        let u1 = UnitVector::basis(3, 0).unwrap();
        let (v, val) = one_agent_intervention(&u1, Eta::ONE).unwrap();
        let r3 = 3f64.sqrt() / 3.0;
        let r6 = 6f64.sqrt() / 3.0;
        assert!((v.as_slice()[0] - r3).abs() < 1e-15 && (v.as_slice()[2] - r6).abs() < 1e-15);
        assert!((val - ONE_AGENT_VALUE).abs() < 1e-12);

        let other = UnitVector::normalize(vec![0.3, -0.2, 0.7, 0.0]).unwrap();
        let (_, val) = one_agent_intervention(&other, Eta::ONE).unwrap();
        assert!((val - ONE_AGENT_VALUE).abs() < 1e-12);

        assert!(one_agent_intervention(&UnitVector::basis(3, 2).unwrap(), Eta::ONE).is_err());
        assert!(one_agent_intervention(&u1, Eta::new(0.5).unwrap()).is_err());
    }

    #[test]
    fn one_agent_side_effects() {
        for k in -99..=99 {
            let c = k as f64 / 100.0;
            let [u1, u2] = two_agent_setup(c).unwrap();
            let (v, _) = one_agent_intervention(&u1, Eta::ONE).unwrap();
            let w1 = intervene(&u1, &v, Eta::ONE).unwrap();
            let w2 = intervene(&u2, &v, Eta::ONE).unwrap();
            assert!((w1.dot(&w2) - c_one(c).unwrap()).abs() < 1e-9);
            let lifted = c * 2f64.sqrt() / (3.0 * (1.0 + c * c).sqrt());
            assert!((w2.as_slice()[2] - lifted).abs() < 1e-9);
        }
        let [u1, u2] = two_agent_setup(0.0).unwrap();
        let (v, _) = one_agent_intervention(&u1, Eta::ONE).unwrap();
        assert!(intervene(&u2, &v, Eta::ONE).unwrap().as_slice()[2].abs() < 1e-15);
    }

    #[test]
    fn uplift_examples() {
        for z in [0.0, 0.3, 1.0] {
            assert_eq!(uplift(0.0, z).unwrap(), 0.0);
        }
        let z = 1.0 / 3f64.sqrt();
        assert!((uplift(1.0, z).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((optimal_z(1.0) - z).abs() < 1e-15);
        assert!(uplift(1.5, 0.5).is_err());
    }

    #[test]
    fn uplift_grid_maximum() {
        for c in [0.1, 0.5, 0.9, 1.0] {
            let best = (0..=10_000)
                .map(|k| uplift(c, k as f64 / 10_000.0).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((best - uplift_optimum(c)).abs() < 1e-6, "c={c}");
            assert!((uplift(c, optimal_z(c)).unwrap() - uplift_optimum(c)).abs() < 1e-12);
            let closed = ((1.0 + 3.0 * c * c).sqrt() - 1.0) / (3.0 * c);
            assert!((uplift_optimum(c) - closed).abs() < 1e-12);
        }
        assert!((uplift_optimum(0.5) - (1.75f64.sqrt() - 1.0) / 1.5).abs() < 1e-15);
        assert!((uplift_optimum(0.5) - 0.215250).abs() < 1e-6);
    }
}
