//! The pinching inequality: instances `(lambda, epsilon, T)`, the quadratic
//! form `Q` evaluated directly and through its block decomposition, the
//! optimal `Gamma`, the reduced-function check, and a Monte-Carlo verifier.

mod form;
mod instance;
mod phi;
mod tensor;
mod verify;

pub use form::{gamma_term, optimal_gamma, q_blocks, q_direct, FormContext, Gamma, QBreakdown};
pub use instance::{
    check_spectrum, free_count, free_indices, make_instance, random_instance, InstanceRecord, PinchInstance,
    DEFAULT_GAP_MIN, SPECTRUM_RANGE,
};
pub use phi::{check_phi_star, PhiStarReport, ReducedFunction};
pub use tensor::Sym3Tensor;
pub use verify::{verify, BlockMinima, VerifyConfig, VerifyReport, Violation, MAX_RECORDED_VIOLATIONS};
