//! Intervention schedules and the name-keyed registry used to build them.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_sphere, UnitVector};

/// Produces the intervention applied at each time step.
///
/// `next` is called once per step with the time step about to be left
/// (`t = 1` for the first intervention). Randomized schedules draw from the
/// run's generator.
pub trait Schedule: Send {
    fn name(&self) -> &'static str;

    /// Dimension of the interventions produced.
    fn dimension(&self) -> usize;

    fn next(&mut self, t: usize, rng: &mut dyn RngCore) -> Result<UnitVector>;
}

impl fmt::Debug for dyn Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Schedule({})", self.name())
    }
}

/// The same intervention at every step.
#[derive(Debug, Clone)]
pub struct Fixed {
    v: UnitVector,
}

impl Fixed {
    pub fn new(v: UnitVector) -> Self {
        Fixed { v }
    }
}

impl Schedule for Fixed {
    fn name(&self) -> &'static str {
        "fixed"
    }
    fn dimension(&self) -> usize {
        self.v.dim()
    }
    fn next(&mut self, _t: usize, _rng: &mut dyn RngCore) -> Result<UnitVector> {
        Ok(self.v.clone())
    }
}

/// Independent uniformly random interventions.
#[derive(Debug, Clone)]
pub struct IidUniform {
    d: usize,
}

impl IidUniform {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        Ok(IidUniform { d })
    }
}

impl Schedule for IidUniform {
    fn name(&self) -> &'static str {
        "iid-uniform"
    }
    fn dimension(&self) -> usize {
        self.d
    }
    fn next(&mut self, _t: usize, rng: &mut dyn RngCore) -> Result<UnitVector> {
        sample_uniform_sphere(self.d, rng)
    }
}

fn check_pair(v: &UnitVector, w: &UnitVector) -> Result<()> {
    v.check_dim(w)?;
    if v.dot(w).abs() >= 1.0 - 1e-12 {
        return Err(Error::param("pair", "the two interventions must not be equal up to sign"));
    }
    Ok(())
}

/// `v, v′, v, v′, ...` starting with `v` at `t = 1`.
#[derive(Debug, Clone)]
pub struct AlternatingPair {
    v: UnitVector,
    w: UnitVector,
}

impl AlternatingPair {
    pub fn new(v: UnitVector, w: UnitVector) -> Result<Self> {
        check_pair(&v, &w)?;
        Ok(AlternatingPair { v, w })
    }
}

impl Schedule for AlternatingPair {
    fn name(&self) -> &'static str {
        "alternating-pair"
    }
    fn dimension(&self) -> usize {
        self.v.dim()
    }
    fn next(&mut self, t: usize, _rng: &mut dyn RngCore) -> Result<UnitVector> {
        Ok(if t % 2 == 1 { self.v.clone() } else { self.w.clone() })
    }
}

/// Each step one of the two influencers is chosen by a fair coin.
#[derive(Debug, Clone)]
pub struct RandomPair {
    v: UnitVector,
    w: UnitVector,
}

impl RandomPair {
    pub fn new(v: UnitVector, w: UnitVector) -> Result<Self> {
        check_pair(&v, &w)?;
        Ok(RandomPair { v, w })
    }
}

impl Schedule for RandomPair {
    fn name(&self) -> &'static str {
        "random-pair"
    }
    fn dimension(&self) -> usize {
        self.v.dim()
    }
    fn next(&mut self, _t: usize, rng: &mut dyn RngCore) -> Result<UnitVector> {
        Ok(if rng.random_bool(0.5) { self.v.clone() } else { self.w.clone() })
    }
}

/// A finite list of interventions; running past its end is an error unless
/// `hold_last` is set, in which case the final vector repeats forever.
#[derive(Debug, Clone)]
pub struct Explicit {
    seq: Vec<UnitVector>,
    pos: usize,
    hold_last: bool,
}

impl Explicit {
    pub fn new(seq: Vec<UnitVector>) -> Result<Self> {
        Self::build(seq, false)
    }

    pub fn holding_last(seq: Vec<UnitVector>) -> Result<Self> {
        Self::build(seq, true)
    }

    fn build(seq: Vec<UnitVector>, hold_last: bool) -> Result<Self> {
        let first = seq
            .first()
            .ok_or_else(|| Error::param("vectors", "explicit schedule needs at least one vector"))?;
        for v in &seq {
            first.check_dim(v)?;
        }
        Ok(Explicit {
            seq,
            pos: 0,
            hold_last,
        })
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }
}

impl Schedule for Explicit {
    fn name(&self) -> &'static str {
        if self.hold_last {
            "plan"
        } else {
            "explicit"
        }
    }
    fn dimension(&self) -> usize {
        self.seq[0].dim()
    }
    fn next(&mut self, _t: usize, _rng: &mut dyn RngCore) -> Result<UnitVector> {
        let v = match self.seq.get(self.pos) {
            Some(v) => v.clone(),
            None if self.hold_last => self.seq[self.seq.len() - 1].clone(),
            None => return Err(Error::ScheduleExhausted(self.seq.len())),
        };
        self.pos += 1;
        Ok(v)
    }
}

/// Inputs accepted by the registry constructors.
#[derive(Debug, Clone, Default)]
pub struct ScheduleParams {
    pub dimension: usize,
    pub vectors: Vec<UnitVector>,
}

type Factory = fn(&ScheduleParams) -> Result<Box<dyn Schedule>>;

/// Maps schedule names to constructors.
pub struct ScheduleRegistry {
    factories: BTreeMap<&'static str, Factory>,
}

fn take_vectors<const N: usize>(name: &str, p: &ScheduleParams) -> Result<[UnitVector; N]> {
    let vs: [UnitVector; N] = p.vectors.clone().try_into().map_err(|v: Vec<UnitVector>| {
        Error::param("vectors", format!("`{name}` takes {N} vector(s), got {}", v.len()))
    })?;
    for v in &vs {
        if v.dim() != p.dimension {
            return Err(Error::DimensionMismatch {
                expected: p.dimension,
                found: v.dim(),
            });
        }
    }
    Ok(vs)
}

fn explicit_dims(p: &ScheduleParams) -> Result<()> {
    match p.vectors.iter().find(|v| v.dim() != p.dimension) {
        Some(v) => Err(Error::DimensionMismatch {
            expected: p.dimension,
            found: v.dim(),
        }),
        None => Ok(()),
    }
}

impl ScheduleRegistry {
    pub fn empty() -> Self {
        ScheduleRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// Registry holding every built-in schedule.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("fixed", |p| {
            let [v] = take_vectors("fixed", p)?;
            Ok(Box::new(Fixed::new(v)))
        });
        r.register("iid-uniform", |p| {
            if !p.vectors.is_empty() {
                return Err(Error::param("vectors", "`iid-uniform` takes no vectors"));
            }
            Ok(Box::new(IidUniform::new(p.dimension)?))
        });
        r.register("alternating-pair", |p| {
            let [v, w] = take_vectors("alternating-pair", p)?;
            Ok(Box::new(AlternatingPair::new(v, w)?))
        });
        r.register("random-pair", |p| {
            let [v, w] = take_vectors("random-pair", p)?;
            Ok(Box::new(RandomPair::new(v, w)?))
        });
        r.register("explicit", |p| {
            explicit_dims(p)?;
            Ok(Box::new(Explicit::new(p.vectors.clone())?))
        });
        r.register("plan", |p| {
            explicit_dims(p)?;
            Ok(Box::new(Explicit::holding_last(p.vectors.clone())?))
        });
        r
    }

    /// Adds or replaces a constructor.
    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn build(&self, name: &str, params: &ScheduleParams) -> Result<Box<dyn Schedule>> {
        let f = self.factories.get(name).ok_or_else(|| Error::UnknownName {
            kind: "schedule",
            name: name.to_string(),
            available: self.names().collect::<Vec<_>>().join(", "),
        })?;
        f(params)
    }
}

impl Default for ScheduleRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn e(d: usize, k: usize) -> UnitVector {
        UnitVector::basis(d, k).unwrap()
    }

    #[test]
    fn alternating_starts_with_first() {
        let mut s = AlternatingPair::new(e(2, 0), e(2, 1)).unwrap();
        let mut rng = seeded_rng(0);
        let got: Vec<_> = (1..=4).map(|t| s.next(t, &mut rng).unwrap()).collect();
        assert_eq!(got, vec![e(2, 0), e(2, 1), e(2, 0), e(2, 1)]);
    }

    #[test]
    fn pair_rejects_parallel() {
        assert!(RandomPair::new(e(3, 0), -e(3, 0)).is_err());
        assert!(AlternatingPair::new(e(3, 0), e(3, 0)).is_err());
        assert!(AlternatingPair::new(e(3, 0), e(2, 0)).is_err());
    }

    #[test]
    fn random_pair_is_roughly_fair() {
        let mut s = RandomPair::new(e(2, 0), e(2, 1)).unwrap();
        let mut rng = seeded_rng(11);
        let n = 20_000;
        let hits = (1..=n)
            .filter(|&t| s.next(t, &mut rng).unwrap() == e(2, 0))
            .count();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((hits as f64 - n as f64 / 2.0).abs() < 4.0 * sigma);
    }

    #[test]
    fn explicit_exhausts() {
        let mut s = Explicit::new(vec![e(2, 0), e(2, 1)]).unwrap();
        let mut rng = seeded_rng(0);
        s.next(1, &mut rng).unwrap();
        s.next(2, &mut rng).unwrap();
        assert_eq!(s.next(3, &mut rng), Err(Error::ScheduleExhausted(2)));

        let mut h = Explicit::holding_last(vec![e(2, 0), e(2, 1)]).unwrap();
        for t in 1..10 {
            h.next(t, &mut rng).unwrap();
        }
        assert_eq!(h.next(10, &mut rng).unwrap(), e(2, 1));
    }

    #[test]
    fn registry_builds_by_name() {
        let r = ScheduleRegistry::with_builtins();
        let names: Vec<_> = r.names().collect();
        for n in ["alternating-pair", "explicit", "fixed", "iid-uniform", "plan", "random-pair"] {
            assert!(names.contains(&n), "{n}");
        }
        let p = ScheduleParams {
            dimension: 3,
            vectors: vec![e(3, 2)],
        };
        let s = r.build("fixed", &p).unwrap();
        assert_eq!(s.name(), "fixed");
        assert_eq!(s.dimension(), 3);
        assert!(matches!(
            r.build("nope", &p),
            Err(Error::UnknownName { .. })
        ));
        assert!(r.build("random-pair", &p).is_err());
        let bad = ScheduleParams {
            dimension: 2,
            vectors: vec![e(3, 2)],
        };
        assert!(matches!(
            r.build("fixed", &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
