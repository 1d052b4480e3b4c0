//! Population evolution under a schedule of interventions.

mod schedule;

pub use schedule::{
    AlternatingPair, Explicit, Fixed, IidUniform, RandomPair, Schedule, ScheduleParams,
    ScheduleRegistry,
};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::geometry::{intervene_unchecked, Eta, UnitVector};
use crate::seeded_rng;

/// Opinions of all agents at time step `t` (starting at 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    opinions: Vec<UnitVector>,
    t: usize,
    eta: Eta,
}

impl PopulationState {
    pub fn new(opinions: Vec<UnitVector>, eta: Eta) -> Result<Self> {
        let first = opinions.first().ok_or(Error::TooFewAgents {
            required: 1,
            found: 0,
        })?;
        for u in &opinions {
            first.check_dim(u)?;
        }
        Ok(PopulationState {
            opinions,
            t: 1,
            eta,
        })
    }

    pub fn opinions(&self) -> &[UnitVector] {
        &self.opinions
    }

    pub fn into_opinions(self) -> Vec<UnitVector> {
        self.opinions
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn eta(&self) -> Eta {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.opinions[0].dim()
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    /// Applies `v` to every agent and advances the clock.
    pub fn step(&mut self, v: &UnitVector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        for u in &mut self.opinions {
            *u = intervene_unchecked(u, v, self.eta);
        }
        self.t += 1;
        Ok(())
    }

    /// Functional form of [`PopulationState::step`].
    pub fn stepped(&self, v: &UnitVector) -> Result<Self> {
        let mut next = self.clone();
        next.step(v)?;
        Ok(next)
    }
}

/// Which time steps a run records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotStride {
    /// Every step up to `t = 100`, then every 10th.
    #[default]
    Standard,
    /// `t = 1, 1 + k, 1 + 2k, ...`
    Every(usize),
}

impl SnapshotStride {
    pub fn records(self, t: usize) -> bool {
        match self {
            SnapshotStride::Standard => t <= 100 || t.is_multiple_of(10),
            SnapshotStride::Every(k) => (t - 1).is_multiple_of(k.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: usize,
    pub opinions: Vec<UnitVector>,
}

/// Recorded output of [`run`]. The final state is always the last snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub applied: Vec<UnitVector>,
    pub seed: u64,
    pub eta: Eta,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a trajectory always holds the initial snapshot")
    }

    pub fn final_t(&self) -> usize {
        self.last().t
    }
}

fn check_schedule(state: &PopulationState, schedule: &dyn Schedule) -> Result<()> {
    if schedule.dimension() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: schedule.dimension(),
        });
    }
    Ok(())
}

/// Runs `steps` interventions from a generator seeded with `seed`.
pub fn run(
    initial: &PopulationState,
    schedule: &mut dyn Schedule,
    steps: usize,
    seed: u64,
    stride: SnapshotStride,
) -> Result<Trajectory> {
    let mut rng = seeded_rng(seed);
    let mut traj = run_with(initial, schedule, steps, &mut rng, stride, |_| Ok(()))?;
    traj.seed = seed;
    Ok(traj)
}

/// Like [`run`] with a caller-supplied generator, invoking `observe` on every
/// state (initial included) whether or not it is recorded.
pub fn run_with(
    initial: &PopulationState,
    schedule: &mut dyn Schedule,
    steps: usize,
    rng: &mut dyn RngCore,
    stride: SnapshotStride,
    mut observe: impl FnMut(&PopulationState) -> Result<()>,
) -> Result<Trajectory> {
    check_schedule(initial, schedule)?;
    let mut state = initial.clone();
    let snap = |s: &PopulationState| Snapshot {
        t: s.t,
        opinions: s.opinions.clone(),
    };
    let mut snapshots = vec![snap(&state)];
    let mut applied = Vec::with_capacity(steps);
    observe(&state)?;
    for k in 0..steps {
        let v = schedule.next(state.t, rng)?;
        state.step(&v)?;
        applied.push(v);
        observe(&state)?;
        if stride.records(state.t) || k + 1 == steps {
            snapshots.push(snap(&state));
        }
    }
    Ok(Trajectory {
        snapshots,
        applied,
        seed: 0,
        eta: initial.eta,
    })
}

/// Steps `state` in place without recording anything.
pub fn advance(
    state: &mut PopulationState,
    schedule: &mut dyn Schedule,
    steps: usize,
    rng: &mut dyn RngCore,
) -> Result<()> {
    check_schedule(state, schedule)?;
    for _ in 0..steps {
        let v = schedule.next(state.t, rng)?;
        state.step(&v)?;
    }
    Ok(())
}

/// Settings for [`run_until_converged`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCheck {
    pub epsilon: f64,
    pub every: usize,
}

impl Default for ConvergenceCheck {
    fn default() -> Self {
        ConvergenceCheck {
            epsilon: 0.05,
            every: 50,
        }
    }
}

/// Steps until [`converged_pairs`] holds (checked every `check.every`
/// steps) or `max_steps` have been applied. Returns the number of steps
/// taken when convergence was detected.
pub fn run_until_converged(
    state: &mut PopulationState,
    schedule: &mut dyn Schedule,
    max_steps: usize,
    rng: &mut dyn RngCore,
    check: ConvergenceCheck,
) -> Result<Option<usize>> {
    check_schedule(state, schedule)?;
    let every = check.every.max(1);
    if converged_pairs(&state.opinions, check.epsilon) {
        return Ok(Some(0));
    }
    let mut taken = 0;
    while taken < max_steps {
        let chunk = every.min(max_steps - taken);
        advance(state, schedule, chunk, rng)?;
        taken += chunk;
        if converged_pairs(&state.opinions, check.epsilon) {
            return Ok(Some(taken));
        }
    }
    Ok(None)
}

/// True iff every pair agrees up to sign within `epsilon`:
/// `min(‖uᵢ - uⱼ‖, ‖uᵢ + uⱼ‖) < ε` for all `i < j`.
pub fn converged_pairs(opinions: &[UnitVector], epsilon: f64) -> bool {
    for (i, u) in opinions.iter().enumerate() {
        for w in &opinions[i + 1..] {
            if u.sign_distance(w) >= epsilon {
                return false;
            }
        }
    }
    true
}

/// Largest pairwise `min(‖uᵢ - uⱼ‖, ‖uᵢ + uⱼ‖)`; zero for fewer than two agents.
pub fn max_pair_disagreement(opinions: &[UnitVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, u) in opinions.iter().enumerate() {
        for w in &opinions[i + 1..] {
            worst = worst.max(u.sign_distance(w));
        }
    }
    worst
}
