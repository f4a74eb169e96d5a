//! Independent reference models: dense operators on balls, radial and
//! block-path reductions, integer-line exponentials, Monte Carlo walks and
//! explicit convolution sums.

mod ball;
mod convolution;
mod expm;
mod radial;
mod spectrum;
mod walk;
mod zline;

pub use ball::BallModel;
pub use convolution::{mixed_gradient_sum, riesz_scaled_closed_form, semigroup_sum};
pub use expm::expm_positive;
pub use radial::{
    ball_combinatorial_profile, ball_heat_profile, ball_heat_profile_eigen, ball_sphere_mass,
    ln_sphere_size, radial_adjacency,
};
pub use spectrum::{
    ball_adjacency_spectrum, combinatorial_spectrum, flow_spectrum, spectrum_summary, Eigen,
    SpectrumSummary,
};
pub use walk::{default_targets, mc_heat, WalkConfig, WalkReport, WalkTarget, MIN_REPLICATES, STREAMS};
pub use zline::{z_heat_eigen, z_heat_taylor};
