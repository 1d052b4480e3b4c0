//! Maximum agreement halfspace → densest hemisphere.
//!
//! A labeled point `(x, y)` maps to `(y·x, 1)/√(1+‖x‖²)` on `S^d`, and a
//! halfspace `{x : ⟨x,a⟩ > c}` maps to the hemisphere with axis `(a, -c)`.
//! `y·x` lies in the halfspace exactly when the mapped point lies in the
//! hemisphere.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, UnitVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    pub y: i8,
}

impl LabeledPoint {
    pub fn new(x: Vec<f64>, y: i8) -> Result<Self> {
        if y != 1 && y != -1 {
            return Err(Error::param("y", format!("label must be ±1, got {y}")));
        }
        Ok(LabeledPoint { x, y })
    }

    fn signed(&self) -> impl Iterator<Item = f64> + '_ {
        let y = f64::from(self.y);
        self.x.iter().map(move |v| y * v)
    }
}

/// Open affine halfspace `{x : ⟨x,a⟩ > c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub c: f64,
}

impl Halfspace {
    pub fn contains(&self, x: &[f64]) -> bool {
        dot(x, &self.a) > self.c
    }

    /// Axis `(a, -c)` of the corresponding hemisphere, normalized.
    pub fn to_axis(&self) -> Result<UnitVector> {
        let mut v = self.a.clone();
        v.push(-self.c);
        UnitVector::normalize(v)
    }

    pub fn from_axis(axis: &UnitVector) -> Self {
        let (a, c) = axis.as_slice().split_at(axis.dim() - 1);
        Halfspace {
            a: a.to_vec(),
            c: -c[0],
        }
    }
}

fn check_data(data: &[LabeledPoint]) -> Result<usize> {
    let first = data.first().ok_or(Error::TooFewAgents {
        required: 1,
        found: 0,
    })?;
    let d = first.x.len();
    if d == 0 {
        return Err(Error::param("x", "points need at least one coordinate"));
    }
    match data.iter().find(|p| p.x.len() != d) {
        Some(p) => Err(Error::DimensionMismatch {
            expected: d,
            found: p.x.len(),
        }),
        None => Ok(d),
    }
}

/// Number of points whose signed copy `y·x` lies in `h`.
pub fn agreement_count(data: &[LabeledPoint], h: &Halfspace) -> usize {
    data.iter()
        .filter(|p| {
            let s: f64 = p.signed().zip(&h.a).map(|(x, a)| x * a).sum();
            s > h.c
        })
        .count()
}

/// Agreement `A(D, H)` as a fraction.
pub fn agreement(data: &[LabeledPoint], h: &Halfspace) -> f64 {
    agreement_count(data, h) as f64 / data.len().max(1) as f64
}

/// Maps each labeled point to `(y·x, 1)/√(1+‖x‖²)`.
pub fn reduce_agreement_to_hemisphere(data: &[LabeledPoint]) -> Result<Vec<UnitVector>> {
    check_data(data)?;
    data.iter()
        .map(|p| {
            let mut v: Vec<f64> = p.signed().collect();
            v.push(1.0);
            UnitVector::normalize(v)
        })
        .collect()
}

/// Labeled instance with a planted halfspace through the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapInstance {
    pub data: Vec<LabeledPoint>,
    pub planted: Halfspace,
    /// Agreement of the planted halfspace.
    pub planted_agreement: f64,
}

/// Gaussian points labeled by a random homogeneous halfspace, with each
/// label flipped independently with probability `noise`. With `noise = 0`
/// the planted halfspace agrees with every point; as `noise → 1/2` no
/// halfspace does much better than one half.
pub fn planted_gap_instance(n: usize, d: usize, noise: f64, rng: &mut dyn RngCore) -> Result<GapInstance> {
    if n == 0 || d == 0 {
        return Err(Error::param("n, d", "must be positive"));
    }
    if !(0.0..=0.5).contains(&noise) {
        return Err(Error::param("noise", format!("must lie in [0, 1/2], got {noise}")));
    }
    let a: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let planted = Halfspace { a, c: 0.0 };
    let data: Vec<LabeledPoint> = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let mut y = if planted.contains(&x) { 1 } else { -1 };
            if rng.random_bool(noise) {
                y = -y;
            }
            LabeledPoint { x, y }
        })
        .collect();
    let planted_agreement = agreement(&data, &planted);
    Ok(GapInstance {
        data,
        planted,
        planted_agreement,
    })
}
