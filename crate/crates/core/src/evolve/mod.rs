//! Flow simulators: contraction of convex bodies of revolution by a
//! curvature speed, and the planar equation `u_t = F(D^2 u)`.

mod axisym;
mod flow;
mod pde;

pub use axisym::{
    curvatures, init_axisymmetric, midpoint_step, pinch_ratio, step, FlowState, Grid, NodeCurvature, Shape,
    MIN_GRID,
};
pub use flow::{
    extinction_fit, run_flow, FlowConfig, FlowSample, FlowStatus, FlowTrace, ProfileSnapshot, FIT_WINDOW,
    FLOW_CSV_HEADER, PROFILE_CSV_HEADER,
};
pub use pde::{run_pde, BoundaryMode, PdeConfig, PdeStatus, PdeTrace, BLOWUP_BOUND, PDE_CSV_HEADER};
