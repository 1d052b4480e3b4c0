//! Vector math on the unit sphere.
//!
//! Opinions and interventions are both points on `S^{d-1}`. An intervention
//! `v` moves an opinion `u` to the normalization of `u + η⟨u,v⟩v`: opinions that
//! agree with `v` are pulled toward it, opinions that disagree are pushed
//! toward `-v`, and orthogonal opinions are left alone.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Neg;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum deviation of `‖u‖` from 1 accepted by [`UnitVector::new`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A point on the unit sphere in `d >= 2` dimensions.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps `coords`, rejecting inputs whose norm is off by more than
    /// [`UNIT_TOLERANCE`]. Coordinates are stored as given.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit {
                norm: n,
                tolerance: UNIT_TOLERANCE,
            });
        }
        Ok(UnitVector(coords))
    }

    /// Normalizes an arbitrary nonzero vector onto the sphere.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let n = norm(&coords);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Degenerate(format!(
                "cannot normalize a vector of norm {n}"
            )));
        }
        coords.iter_mut().for_each(|x| *x /= n);
        Ok(UnitVector(coords))
    }

    /// The `k`-th standard basis vector in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if k >= d {
            return Err(Error::param("k", format!("basis index {k} out of range for d={d}")));
        }
        let mut c = vec![0.0; d];
        c[k] = 1.0;
        Ok(UnitVector(c))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.0, &other.0)
    }

    /// Euclidean distance `‖self - other‖`.
    pub fn distance(&self, other: &UnitVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `min(‖u - w‖, ‖u + w‖)`: distance up to antipodal agreement.
    pub fn sign_distance(&self, other: &UnitVector) -> f64 {
        let (mut minus, mut plus) = (0.0, 0.0);
        for (a, b) in self.0.iter().zip(&other.0) {
            minus += (a - b) * (a - b);
            plus += (a + b) * (a + b);
        }
        minus.min(plus).sqrt()
    }

    pub(crate) fn check_dim(&self, other: &UnitVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Neg for &UnitVector {
    type Output = UnitVector;
    fn neg(self) -> UnitVector {
        UnitVector(self.0.iter().map(|x| -x).collect())
    }
}

impl Neg for UnitVector {
    type Output = UnitVector;
    fn neg(self) -> UnitVector {
        -&self
    }
}

impl fmt::Debug for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("UnitVector").field(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Vec<f64> {
        u.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Intervention strength `η > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Eta(f64);

impl Eta {
    pub const ONE: Eta = Eta(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::param("eta", format!("must be positive and finite, got {value}")));
        }
        Ok(Eta(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Eta {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Eta::new(v)
    }
}

impl From<Eta> for f64 {
    fn from(e: Eta) -> f64 {
        e.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// The unnormalized update `w = u + η⟨u,v⟩v`.
///
/// Negating `v` leaves every product `η⟨u,v⟩v_k` bit-identical, and negating
/// `u` negates `w` exactly.
fn raw_update(u: &[f64], v: &[f64], eta: Eta) -> Vec<f64> {
    let s = eta.0 * dot(u, v);
    u.iter().zip(v).map(|(&uk, &vk)| uk + s * vk).collect()
}

/// Applies intervention `v` to opinion `u`.
pub fn intervene(u: &UnitVector, v: &UnitVector, eta: Eta) -> Result<UnitVector> {
    u.check_dim(v)?;
    Ok(intervene_unchecked(u, v, eta))
}

pub(crate) fn intervene_unchecked(u: &UnitVector, v: &UnitVector, eta: Eta) -> UnitVector {
    let mut w = raw_update(&u.0, &v.0, eta);
    // ‖w‖ >= 1, so the division is always safe.
    let n = norm(&w);
    w.iter_mut().for_each(|x| *x /= n);
    UnitVector(w)
}

/// `‖u + η⟨u,v⟩v‖²` computed from the unnormalized update itself.
pub fn update_norm_sq(u: &UnitVector, v: &UnitVector, eta: Eta) -> Result<f64> {
    u.check_dim(v)?;
    let w = raw_update(&u.0, &v.0, eta);
    Ok(dot(&w, &w))
}

/// Closed form of [`update_norm_sq`]: `1 + (2η + η²)⟨u,v⟩²`.
pub fn predicted_norm_sq(inner: f64, eta: Eta) -> f64 {
    let e = eta.0;
    1.0 + (2.0 * e + e * e) * inner * inner
}

/// Angle between two opinions, in `[0, π]`.
pub fn angle(u: &UnitVector, w: &UnitVector) -> Result<f64> {
    u.check_dim(w)?;
    Ok(u.dot(w).clamp(-1.0, 1.0).acos())
}

/// The pull function: the angle to the intervention after one application,
/// for an opinion starting at angle `alpha ∈ [0, π/2]`.
///
/// Equal to `arccos((1+η)cos α / √(1+(2η+η²)cos²α))`; evaluated as
/// `atan2(sin α, (1+η)cos α)`, which keeps full precision near `α = 0`.
pub fn pull(alpha: f64, eta: Eta) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&alpha) {
        return Err(Error::param("alpha", format!("{alpha} outside [0, π/2]")));
    }
    Ok(alpha.sin().atan2((1.0 + eta.0) * alpha.cos()))
}

/// Correlation above which the pull function is a contraction: `1/√(2+η)`.
pub fn contraction_threshold(eta: Eta) -> f64 {
    (1.0 / (2.0 + eta.0)).sqrt()
}

/// `θ* = arccos(1/√(2+η))`, where `α - f(α)` peaks.
pub fn critical_angle(eta: Eta) -> f64 {
    contraction_threshold(eta).acos()
}

/// Sign of the planar cross product `u₁w₂ - u₂w₁`.
pub fn orientation_sign_2d(u: &UnitVector, w: &UnitVector) -> Result<i8> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    u.check_dim(w)?;
    let cross = u.0[0] * w.0[1] - u.0[1] * w.0[0];
    Ok(if cross > 0.0 {
        1
    } else if cross < 0.0 {
        -1
    } else {
        0
    })
}

/// Uniform sample from `S^{d-1}` via a normalized isotropic Gaussian.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitVector> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        if n > 1e-300 {
            return Ok(UnitVector(g.into_iter().map(|x| x / n).collect()));
        }
    }
}

/// Point at fraction `s ∈ [0,1]` along the great circle from `a` to `b`.
///
/// `pivot` fixes the plane of rotation when `a` and `b` are antipodal.
pub(crate) fn slerp(a: &UnitVector, b: &UnitVector, s: f64, pivot: Option<&[f64]>) -> UnitVector {
    let cos = a.dot(b).clamp(-1.0, 1.0);
    let total = cos.acos();
    // Orthonormal direction in the plane of a and b.
    let mut perp: Vec<f64> = b.0.iter().zip(&a.0).map(|(bk, ak)| bk - cos * ak).collect();
    let mut pn = norm(&perp);
    if pn < 1e-12 {
        let p = pivot.expect("pivot required for antipodal slerp");
        let c = dot(p, &a.0);
        perp = p.iter().zip(&a.0).map(|(pk, ak)| pk - c * ak).collect();
        pn = norm(&perp);
    }
    perp.iter_mut().for_each(|x| *x /= pn);
    let t = s * total;
    let (st, ct) = t.sin_cos();
    let c: Vec<f64> = a.0.iter().zip(&perp).map(|(ak, pk)| ct * ak + st * pk).collect();
    let n = norm(&c);
    UnitVector(c.into_iter().map(|x| x / n).collect())
}

/// A unit vector orthogonal to `a`, chosen deterministically.
pub(crate) fn orthogonal_to(a: &[f64]) -> Vec<f64> {
    let d = a.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..d {
        let r: Vec<f64> = (0..d)
            .map(|j| if j == k { 1.0 } else { 0.0 } - a[k] * a[j])
            .collect();
        let n = norm(&r);
        if best.as_ref().is_none_or(|(bn, _)| n > *bn + 1e-12) {
            best = Some((n, r));
        }
    }
    let (n, r) = best.expect("d >= 1");
    r.into_iter().map(|x| x / n).collect()
}
