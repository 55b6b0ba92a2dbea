//! Fixtures shared by the benchmarks.

use steadysqueeze::models::{build_dicke, build_xyz};
use steadysqueeze::{Backend, BuiltModel, DickeParams, XyzParams};

pub fn xyz_full(n: usize) -> BuiltModel {
    build_xyz(
        &XyzParams::from_mean(n, -0.8, 0.05, 1.0, 1.0),
        Backend::Full,
    )
    .expect("xyz model")
}

pub fn xyz_manifold(n: usize) -> BuiltModel {
    build_xyz(
        &XyzParams::from_mean(n, -0.8, 0.05, 1.0, 1.0),
        Backend::Perturbative,
    )
    .expect("xyz model")
}

pub fn dicke(n: usize, omega: f64) -> BuiltModel {
    build_dicke(&DickeParams {
        emitters: n,
        omega,
        big_gamma: 1.0,
    })
    .expect("dicke model")
}
