use ecsmetro_core::fock::{
    coherent_vector, cutoff_for_coherent, observable_moments, Cutoff, Mode, OperatorMatrix,
};
use ecsmetro_core::metrology::{
    bat_pure_fisher, crb, default_generator, qfi_pure, qfi_pure_ecs_closed, qfi_pure_numeric,
};
use ecsmetro_core::states::{
    alpha_for_mean_photons, ecs_mean_photons, ecs_normalizer, make_bat, make_ecs, make_noon,
    mean_photon_mode1, ProbeSpec,
};
use ecsmetro_core::{Error, C64};

fn dim16() -> Cutoff {
    Cutoff::default()
}

#[test]
fn noon_four_bound() {
    let s = make_noon(4, dim16()).unwrap();
    let a = qfi_pure(&s, &default_generator(dim16())).unwrap();
    assert!((a.delta_phi - 0.25).abs() / 0.25 < 1e-10);
    let n = qfi_pure_numeric(&s, 1).unwrap();
    assert!((n.delta_phi - 0.25).abs() / 0.25 < 1e-9);
}

#[test]
fn bat_variance_law() {
    for n in [2u32, 4, 6, 8] {
        let s = make_bat(n, dim16()).unwrap();
        let (_, var) = observable_moments(&s, &OperatorMatrix::number(dim16(), Mode::Two)).unwrap();
        assert!((4.0 * var - bat_pure_fisher(n)).abs() < 1e-10, "N={n}");
    }
    let r = qfi_pure(&make_bat(4, dim16()).unwrap(), &default_generator(dim16())).unwrap();
    assert!((r.fisher - 12.0).abs() < 1e-10);
    assert!((r.delta_phi - 0.288_675).abs() < 1e-6);
}

#[test]
fn ecs_closed_and_numeric_agree_on_a_converged_grid() {
    let c = cutoff_for_coherent(4.0, 1e-13);
    let numeric = qfi_pure(&make_ecs(2.0, c).unwrap(), &default_generator(c)).unwrap();
    let closed = qfi_pure_ecs_closed(2.0);
    assert!((numeric.fisher - closed.fisher).abs() / closed.fisher < 1e-8);
    assert!((closed.fisher - 23.851).abs() < 1e-3);
    assert_eq!(format!("{:.3}", closed.delta_phi), "0.205");
}

#[test]
fn ecs_default_grid_error() {
    let s = make_ecs(2.0, dim16()).unwrap();
    assert!(s.tail_mass() < 1e-5);
    let f = qfi_pure(&s, &default_generator(dim16())).unwrap().fisher;
    // truncation shifts the information by roughly the tail budget
    assert!((f - qfi_pure_ecs_closed(2.0).fisher).abs() / f < 1e-4);
}

#[test]
fn ecs_resources() {
    let s = make_ecs(2.0, dim16()).unwrap();
    assert!((mean_photon_mode1(&s) - 1.964).abs() < 5e-4);
    assert!((ecs_mean_photons(2.0) - 1.964).abs() < 5e-4);
    assert!((ecs_normalizer(2.0).powi(2) - 0.491).abs() < 1e-3);
    assert_eq!(mean_photon_mode1(&make_ecs(0.0, dim16()).unwrap()), 0.0);
}

#[test]
fn matched_alpha_round_trip() {
    for n in [0.5, 1.0, 2.0, 3.5, 8.0] {
        let a = alpha_for_mean_photons(n);
        assert!((ecs_mean_photons(a) - n).abs() < 1e-11);
    }
    assert!((alpha_for_mean_photons(2.0) - 2.017_031_909_55).abs() < 1e-9);
}

#[test]
fn coherent_amplitudes() {
    let c = coherent_vector(C64::new(2.0, 0.0), dim16()).unwrap();
    // e^{-2}·2⁴/√24 renormalized by the retained mass
    let direct = (-2.0f64).exp() * 16.0 / 24f64.sqrt() / (1.0 - c.tail_mass()).sqrt();
    assert!((c.amplitude(4).re - direct).abs() < 1e-14);
    assert!((c.amplitude(4).re - 0.442).abs() < 1e-4);
}

#[test]
fn crb_and_errors() {
    assert_eq!(crb(16.0, 4).unwrap(), 0.125);
    assert_eq!(crb(0.0, 1), Err(Error::ZeroInformation));
    assert!(matches!(
        ProbeSpec::bat(3, dim16()).build(),
        Err(Error::OddN(3))
    ));
    assert!(matches!(
        make_ecs(4.0, dim16()),
        Err(Error::TruncationOverflow { .. })
    ));
}
