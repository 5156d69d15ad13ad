//! Reference implementations of the two worked examples: the amplitude-tuned
//! perturbation and the exponentially ramped two-level system.

mod perturbation;
pub mod quadrature;
mod two_level;

pub use perturbation::{perturbative_c_exact, perturbative_c_markov, PerturbationScenario};
pub use quadrature::QuadratureConfig;
pub use two_level::{
    a21_closed_form, a21_quadrature, a21_quadrature_with, phi21_closed_form, phi21_quadrature, phi21_quadrature_with,
    transition_probability_from_a, two_level_drive_spec, two_level_markov_c21, TwoLevelScenario, DEFAULT_FLOOR_RATIO,
    TRUNCATION_RATIO,
};
