//! Influencer strategies.

pub mod cap;
pub mod hemisphere;
pub mod oneshot;
pub mod plan;
pub mod reduction;

pub use cap::{cap_parameters, cap_threshold, spherical_cap_intervention, CapSolution, SphericalCap};
pub use hemisphere::{
    densest_hemisphere_exact, densest_hemisphere_heuristic, hemisphere_feasible, ExactSolver, Hemisphere,
    HemisphereSolution, HemisphereSolver, HeuristicSolver, SolverRegistry,
};
pub use oneshot::{
    c_one, c_two, one_agent_intervention, optimal_z, polarization_cost, two_agent_intervention, two_agent_setup,
    uplift, uplift_optimum, TwoAgentSolution,
};
pub use plan::{plan_convergence, plan_from_hemisphere, InterventionPlan, PlanStage};
pub use reduction::{
    agreement, agreement_count, planted_gap_instance, reduce_agreement_to_hemisphere, GapInstance, Halfspace,
    LabeledPoint,
};
