use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use proptest::prelude::*;
use steadysqueeze::models::{
    build_dicke, build_tfi, build_xyz, individual_emission_identity_deviation,
    tfi_direct_hamiltonian, xyz_direct_hamiltonian,
};
use steadysqueeze::perturbation::xyz_closed_form;
use steadysqueeze::{
    commutator, perturb_model, squeezing_report, steady_state, Backend, DickeParams, Engine,
    PureState, SolverConfig, TfiParams, XyzParams, C64,
};

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn collective_xyz_matches_site_sum(
        n in 2usize..6,
        jx in -2.0f64..2.0,
        jy in -2.0f64..2.0,
        jz in -2.0f64..2.0,
    ) {
        let p = XyzParams { emitters: n, jx, jy, jz, gamma: 1.0 };
        let m = build_xyz(&p, Backend::Full).unwrap();
        let direct = xyz_direct_hamiltonian(&p).unwrap();
        prop_assert!(m.lindblad.hamiltonian().max_abs_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn collective_tfi_matches_site_sum(n in 2usize..6, jx in -2.0f64..2.0, delta in -6.0f64..6.0) {
        let p = TfiParams { emitters: n, jx, delta, gamma: 1.0 };
        let m = build_tfi(&p, Backend::Full).unwrap();
        let direct = tfi_direct_hamiltonian(&p).unwrap();
        prop_assert!(m.lindblad.hamiltonian().max_abs_diff(&direct).unwrap() < 1e-12);
    }
}

#[test]
fn individual_emission_sum_is_shifted_jz() {
    for n in 2..=6 {
        let p = XyzParams::from_mean(n, -0.8, 0.1, 1.0, 0.7);
        for backend in [Backend::Full, Backend::Perturbative] {
            let m = build_xyz(&p, backend).unwrap();
            assert!(individual_emission_identity_deviation(&m, 0.7).unwrap() < 1e-13);
        }
    }
}

#[test]
fn unperturbed_parts_conserve_excitations() {
    let m = build_xyz(&XyzParams::from_mean(5, 0.3, 0.2, -1.0, 1.0), Backend::Full).unwrap();
    assert!(m.lindblad.u1_symmetric());
    let jz = &m.collective.jz;
    assert!(commutator(m.lindblad.h0(), jz).unwrap().max_abs() < 1e-13);
    assert!(commutator(m.lindblad.h1(), jz).unwrap().max_abs() > 1e-3);
    let d = build_dicke(&DickeParams {
        emitters: 6,
        omega: 0.1,
        big_gamma: 1.0,
    })
    .unwrap();
    assert!(
        commutator(d.lindblad.h0(), &d.collective.jz)
            .unwrap()
            .max_abs()
            < 1e-13
    );
}

#[test]
fn rejects_invalid_parameters() {
    assert!(build_xyz(
        &XyzParams::from_mean(4, f64::NAN, 0.0, 1.0, 1.0),
        Backend::Full
    )
    .is_err());
    assert!(build_xyz(&XyzParams::from_mean(4, 0.0, 0.0, 1.0, -1.0), Backend::Full).is_err());
    assert!(build_xyz(&XyzParams::from_mean(13, 0.0, 0.1, 1.0, 1.0), Backend::Full).is_err());
    assert!(build_dicke(&DickeParams {
        emitters: 0,
        omega: 0.1,
        big_gamma: 1.0
    })
    .is_err());
}

#[test]
fn swapping_jx_and_jy_rotates_the_squeezing_axis() {
    let a = XyzParams::from_mean(6, -0.8, 0.05, 1.0, 1.0);
    let b = XyzParams {
        jx: a.jy,
        jy: a.jx,
        ..a
    };
    let theta = |p: &XyzParams| {
        let m = build_xyz(p, Backend::Full).unwrap();
        let ss = steady_state(&m.lindblad, &SolverConfig::default()).unwrap();
        squeezing_report(&ss.rho, &m.collective).unwrap().theta_min
    };
    let (ta, tb) = (theta(&a), theta(&b));
    assert!(angle_gap(tb, ta + FRAC_PI_2) < 1e-8, "{ta} {tb}");
    let (ca, cb) = (xyz_closed_form(&a).unwrap(), xyz_closed_form(&b).unwrap());
    assert!(angle_gap(cb.theta_squeeze(), ca.theta_squeeze() + FRAC_PI_2) < 1e-12);
}

#[test]
fn rotation_about_z_shifts_the_angle() {
    let m = build_xyz(
        &XyzParams::from_mean(8, -0.8, 0.02, 1.0, 1.0),
        Backend::Perturbative,
    )
    .unwrap();
    let psi = perturb_model(&m.lindblad, Engine::General)
        .unwrap()
        .state()
        .unwrap();
    let base = squeezing_report(&psi, &m.collective).unwrap();
    for phi in [0.1, 0.7, 2.0, -1.3] {
        let amps: DVector<C64> = DVector::from_iterator(
            psi.amplitudes().len(),
            psi.amplitudes().iter().enumerate().map(|(k, a)| {
                let mz = m.collective.jz.element(k, k).re;
                a * C64::from_polar(1.0, -phi * mz)
            }),
        );
        let rotated = PureState::new(psi.basis().clone(), amps).unwrap();
        let r = squeezing_report(&rotated, &m.collective).unwrap();
        assert!((r.xi2 - base.xi2).abs() < 1e-12);
        assert!(
            angle_gap(r.theta_min, base.theta_min + phi) < 1e-9,
            "φ={phi}"
        );
    }
}
