//! Raising many equatorial agents above a threshold with one intervention
//! (`η = 1`).
//!
//! An agent with equatorial part `u*` at correlation `cᵢ = ⟨u*, v*⟩` reaches
//! last coordinate `uplift(cᵢ, z)` under `v = (z·v*, √(1-z²))`. Choosing `z`
//! optimal for `c = 2T/(1-3T²)` gives exactly `T` at correlation `c`, and more
//! above it, so the best `v*` is the axis of the densest cap
//! `{x : ⟨x,v*⟩ > c}` among the equatorial parts.

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Eta, UnitVector};
use crate::strategies::hemisphere::{exact_cap_search, mean_shift_search, members_above, EXACT_MAX_DIM};
use crate::strategies::oneshot::{optimal_z, require_unit_eta};

/// `{x : ⟨x, axis⟩ > threshold}` in the equatorial dimension `d - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalCap {
    pub axis: UnitVector,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapSolution {
    pub target: f64,
    pub cap: SphericalCap,
    pub z: f64,
    pub beta: f64,
    /// Full-dimensional intervention `(z·v*, sin β)`.
    pub intervention: UnitVector,
    pub count: usize,
    pub members: Vec<usize>,
    pub exact: bool,
}

/// Cap threshold `c = 2T/(1-3T²)` for a target `T ∈ [0, 1/3)`.
pub fn cap_threshold(t: f64) -> Result<f64> {
    if !(0.0..1.0 / 3.0).contains(&t) {
        return Err(Error::param("T", format!("target must lie in [0, 1/3), got {t}")));
    }
    Ok(2.0 * t / (1.0 - 3.0 * t * t))
}

/// `(c, β)` for target `T`.
pub fn cap_parameters(t: f64) -> Result<(f64, f64)> {
    let c = cap_threshold(t)?;
    Ok((c, optimal_z(c).acos()))
}

/// Restarts used by the heuristic cap search above the exact limit.
pub const CAP_HEURISTIC_RESTARTS: usize = 64;

/// Finds `v*` and the intervention lifting the most agents strictly above
/// `T`. Exact when the equatorial dimension is at most 4.
pub fn spherical_cap_intervention(
    points: &[UnitVector],
    t: f64,
    eta: Eta,
    rng: &mut dyn RngCore,
) -> Result<CapSolution> {
    require_unit_eta(eta)?;
    let c = cap_threshold(t)?;
    let first = points.first().ok_or(Error::TooFewAgents {
        required: 1,
        found: 0,
    })?;
    let d = first.dim();
    if d < 3 {
        return Err(Error::param("points", "need dimension at least 3"));
    }
    let equatorial = points
        .iter()
        .map(|p| {
            first.check_dim(p)?;
            if p.as_slice()[d - 1].abs() > 1e-12 {
                return Err(Error::param("points", "every agent needs last coordinate zero"));
            }
            UnitVector::new(p.as_slice()[..d - 1].to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    let exact = d - 1 <= EXACT_MAX_DIM;
    let (axis, _) = if exact {
        exact_cap_search(&equatorial, c)?
    } else {
        mean_shift_search(&equatorial, c, CAP_HEURISTIC_RESTARTS, rng)?
    };
    let members = members_above(&equatorial, axis.as_slice(), c);
    let z = optimal_z(c);
    let mut v: Vec<f64> = axis.as_slice().iter().map(|x| z * x).collect();
    v.push((1.0 - z * z).sqrt());
    Ok(CapSolution {
        target: t,
        cap: SphericalCap { axis, threshold: c },
        z,
        beta: z.acos(),
        intervention: UnitVector::normalize(v)?,
        count: members.len(),
        members,
        exact,
    })
}
