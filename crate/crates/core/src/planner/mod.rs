//! Planning on the agent's map: a grid MDP whose rewards come from frontier
//! edges or an object's visibility region, solved anytime with RTDP.

mod goal;
mod mdp;
mod reward;
mod rtdp;

pub use goal::{select_goal, GoalDecision, DEFAULT_EPSILON, DEFAULT_TAU};
pub use mdp::{build_mdp, MdpModel, StateId, DEFAULT_GAMMA};
pub use reward::{cell_mass_kernel, shape_frontier_reward, shape_visibility_reward, RewardShape};
pub use rtdp::{adapt, greedy_action, q_value, rtdp_improve, RtdpConfig, RtdpReport, ValueTable, DEFAULT_TRIAL_BUDGET};
