//! Shared fixtures for the kernel benchmarks.

use std::f64::consts::PI;
use syl_core::bubble::{find_ground_state, BubbleParams};
use syl_core::torus::{assemble, transplant_bubble, TorusProblem};
use syl_core::{FourierSpinor, RadialProfile, TorusGrid};

/// The `lambda = 1, p = 3` planar ground-state profile.
pub fn ground_profile() -> RadialProfile {
    find_ground_state(&BubbleParams::new(1.0, 3.0))
        .expect("reference bubble")
        .profile
}

/// Problem on the `n x n` grid of the `2 pi` square torus (`a = 1, p = 3`).
pub fn torus_problem(n: usize, eps: f64) -> TorusProblem {
    let table = assemble(TorusGrid::square(n, 2.0 * PI), eps, 1.0).expect("valid grid");
    TorusProblem::new(table, 3.0).expect("valid exponent")
}

/// The transplanted bubble, a realistic field for kernel timings.
pub fn bubble_field(problem: &TorusProblem, profile: &RadialProfile) -> FourierSpinor {
    transplant_bubble(problem, profile, [PI, PI])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let problem = torus_problem(32, 0.4);
        let psi = bubble_field(&problem, &ground_profile());
        assert!(psi.l2_sqr() > 0.0);
    }
}
