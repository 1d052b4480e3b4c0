//! Consensus-then-nudge plans.
//!
//! Repeating the densest-hemisphere axis `a` concentrates every point of that
//! hemisphere around `a`. The concentrated cluster is then walked to the
//! target `v*` along the great circle from `a`, in steps of at most π/8, so
//! every waypoint keeps positive correlation with the cluster.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::dynamics::Explicit;
use crate::error::{Error, Result};
use crate::geometry::{intervene_unchecked, orthogonal_to, slerp, Eta, UnitVector};
use crate::strategies::hemisphere::{densest_hemisphere_exact, HemisphereSolution};

/// Largest angle between consecutive waypoints.
pub const WAYPOINT_STEP: f64 = std::f64::consts::PI / 8.0;

/// Per-stage cap on repetitions before giving up.
const MAX_REPEATS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanStage {
    pub intervention: UnitVector,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterventionPlan {
    pub hemisphere: HemisphereSolution,
    pub phase1: PlanStage,
    pub phase2: Vec<PlanStage>,
    pub target: UnitVector,
    pub epsilon: f64,
    pub eta: Eta,
}

impl InterventionPlan {
    /// Indices of the points the plan brings within `epsilon` of the target.
    pub fn converging(&self) -> &[usize] {
        &self.hemisphere.members
    }

    /// The full intervention sequence, stage by stage.
    pub fn interventions(&self) -> Vec<UnitVector> {
        std::iter::once(&self.phase1)
            .chain(&self.phase2)
            .flat_map(|s| std::iter::repeat_n(s.intervention.clone(), s.repeats))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.phase1.repeats + self.phase2.iter().map(|s| s.repeats).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The plan as a schedule that keeps applying the target once the
    /// sequence runs out.
    pub fn schedule(&self) -> Explicit {
        let mut seq = self.interventions();
        if self.phase2.is_empty() || seq.is_empty() {
            seq.push(self.target.clone());
        }
        Explicit::holding_last(seq).expect("plan vectors share one dimension")
    }
}

fn apply(cluster: &mut [UnitVector], v: &UnitVector, eta: Eta) {
    for u in cluster.iter_mut() {
        *u = intervene_unchecked(u, v, eta);
    }
}

fn diameter(cluster: &[UnitVector]) -> f64 {
    let mut m = 0.0f64;
    for (i, u) in cluster.iter().enumerate() {
        for w in &cluster[i + 1..] {
            m = m.max(u.distance(w));
        }
    }
    m
}

/// Repeats `v` on `cluster` until `done` holds; returns the repeat count.
fn repeat_until(
    cluster: &mut [UnitVector],
    v: &UnitVector,
    eta: Eta,
    done: impl Fn(&[UnitVector]) -> bool,
) -> Result<usize> {
    let mut k = 0;
    while !done(cluster) {
        if k == MAX_REPEATS {
            return Err(Error::NoConvergence(MAX_REPEATS));
        }
        apply(cluster, v, eta);
        k += 1;
    }
    Ok(k)
}

/// Plan driven by the exact densest hemisphere (`d ≤ 4`).
pub fn plan_convergence(points: &[UnitVector], target: &UnitVector, eta: Eta, epsilon: f64) -> Result<InterventionPlan> {
    let hemisphere = densest_hemisphere_exact(points)?;
    plan_from_hemisphere(points, hemisphere, target, eta, epsilon)
}

/// Plan for a precomputed hemisphere, from any solver.
pub fn plan_from_hemisphere(
    points: &[UnitVector],
    hemisphere: HemisphereSolution,
    target: &UnitVector,
    eta: Eta,
    epsilon: f64,
) -> Result<InterventionPlan> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    if hemisphere.count == 0 {
        return Err(Error::Degenerate("no hemisphere holds any point".into()));
    }
    let a = hemisphere.hemisphere.axis.clone();
    a.check_dim(target)?;
    let mut cluster: Vec<UnitVector> = hemisphere.members.iter().map(|&i| points[i].clone()).collect();

    let near_target = |c: &[UnitVector]| c.iter().all(|u| u.distance(target) < epsilon / 2.0);
    let settled = |w: &UnitVector| {
        let w = w.clone();
        move |c: &[UnitVector]| {
            diameter(c) < epsilon / 4.0 && c.iter().all(|u| u.dot(&w) > FRAC_PI_4.cos())
        }
    };

    let target_is_axis = a.distance(target) < 1e-12;
    let phase1_repeats = if target_is_axis {
        repeat_until(&mut cluster, &a, eta, near_target)?
    } else {
        repeat_until(&mut cluster, &a, eta, settled(&a))?
    };
    let phase1 = PlanStage {
        intervention: a.clone(),
        repeats: phase1_repeats,
    };

    let mut phase2 = Vec::new();
    if !target_is_axis {
        let direct = a.dot(target) > 0.0 && cluster.iter().all(|u| u.dot(target) > 1e-9);
        let waypoints: Vec<UnitVector> = if direct {
            vec![target.clone()]
        } else {
            let angle = a.dot(target).clamp(-1.0, 1.0).acos();
            let m = (angle / WAYPOINT_STEP).ceil().max(1.0) as usize;
            let pivot = orthogonal_to(a.as_slice());
            let mut w: Vec<UnitVector> = (1..m)
                .map(|j| slerp(&a, target, j as f64 / m as f64, Some(&pivot)))
                .collect();
            w.push(target.clone());
            w
        };
        let last = waypoints.len() - 1;
        for (j, w) in waypoints.into_iter().enumerate() {
            let repeats = if j == last {
                repeat_until(&mut cluster, &w, eta, near_target)?
            } else {
                repeat_until(&mut cluster, &w, eta, settled(&w))?
            };
            phase2.push(PlanStage {
                intervention: w,
                repeats,
            });
        }
    }

    Ok(InterventionPlan {
        hemisphere,
        phase1,
        phase2,
        target: target.clone(),
        epsilon,
        eta,
    })
}
