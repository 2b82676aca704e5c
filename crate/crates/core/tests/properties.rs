use approx::assert_relative_eq;
use cvtele::capacity::{mode_capacity, n_from_loss, Bound};
use cvtele::channel::{
    apply_amplifier, apply_attenuator, apply_loss, apply_teleport, epr_cm, noise_from_resource,
    thermal_n, to_collective, LossModel, TeleportNoise,
};
use cvtele::gaussian::{symplectic_eigenvalues, CovMatrix, GaussianState};
use cvtele::multiplex::{
    db_to_r, effective_mode_number, gain_for_energy, mean_photon, pdc_distribution, squeezing_db,
    EnergyBudget, EnergyFamily,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn single_mode(nu: f64, z: f64, theta: f64) -> GaussianState {
    let (c, s) = (theta.cos(), theta.sin());
    let m = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]) * DMatrix::from_row_slice(2, 2, &[z.exp(), 0.0, 0.0, (-z).exp()]);
    let cm = CovMatrix::new(&m * m.transpose() * nu).unwrap();
    GaussianState::new(DVector::from_vec(vec![0.3, -1.1]), cm).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lossy_resource_gives_thermal_noise(r in 0.0..3.0f64, eta in 0.0..=1.0f64) {
        let res = apply_loss(&epr_cm(r).unwrap(), LossModel::new(eta).unwrap(), &[0, 1]).unwrap();
        let n = thermal_n(&noise_from_resource(&res).unwrap(), 1e-9).unwrap().n_param;
        prop_assert!((n - (eta * (-2.0 * r).exp() + 1.0 - eta)).abs() < 1e-10);
        prop_assert!((n - n_from_loss(r, eta).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn amplifier_after_attenuator_adds_thermal_noise(
        nu in 0.5..4.0f64, z in -1.5..1.5f64, theta in 0.0..6.3f64, eta in 0.05..=1.0f64,
    ) {
        let st = single_mode(nu, z, theta);
        let out = apply_attenuator(&apply_amplifier(&st, 1.0 / eta).unwrap(), eta).unwrap();
        let diff = out.cm().matrix() - st.cm().matrix();
        prop_assert!((diff - DMatrix::identity(2, 2) * (1.0 - eta)).amax() < 1e-12);
        prop_assert!((out.mean() - st.mean()).amax() < 1e-12);
    }

    #[test]
    fn loss_composes_multiplicatively(r in 0.0..2.5f64, a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let st = epr_cm(r).unwrap();
        let two = apply_loss(&apply_loss(&st, LossModel::new(a).unwrap(), &[0, 1]).unwrap(),
                             LossModel::new(b).unwrap(), &[0, 1]).unwrap();
        let one = apply_loss(&st, LossModel::new(a * b).unwrap(), &[0, 1]).unwrap();
        prop_assert!((two.cm().matrix() - one.cm().matrix()).amax() < 1e-10);
    }

    #[test]
    fn collective_change_keeps_spectrum(r in 0.0..2.5f64, eta in 0.1..=1.0f64) {
        let st = apply_loss(&epr_cm(r).unwrap(), LossModel::new(eta).unwrap(), &[1]).unwrap();
        let before = symplectic_eigenvalues(st.cm()).unwrap();
        let (_, collective) = to_collective(&st).unwrap();
        let after = symplectic_eigenvalues(&CovMatrix::new(collective).unwrap()).unwrap();
        for (x, y) in before.values.iter().zip(&after.values) {
            prop_assert!((x - y).abs() < 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn teleport_with_thermal_noise_adds_n(n in 0.0..2.0f64, nu in 0.5..3.0f64, z in -1.0..1.0f64) {
        let st = single_mode(nu, z, 0.4);
        let out = apply_teleport(&st, &TeleportNoise::thermal(n).unwrap()).unwrap();
        let diff = out.cm().matrix() - st.cm().matrix();
        prop_assert!((diff - DMatrix::identity(2, 2) * n).amax() < 1e-12);
    }

    #[test]
    fn bounds_ordered_and_monotone(r in 0.0..6.0f64, dr in 0.0..0.5f64, eta in 0.0..=1.0f64) {
        let q = |r, b| mode_capacity(r, eta, b).unwrap();
        let (qg, qa, qe) = (q(r, Bound::QG), q(r, Bound::QA), q(r, Bound::QE));
        prop_assert!(qg <= qe + 1e-12);
        prop_assert!(qa <= qe + 1e-12);
        if qa > 0.0 {
            prop_assert!(qg <= qa + 1e-12);
        }
        for b in Bound::ALL {
            prop_assert!(q(r + dr, b) >= q(r, b) - 1e-12);
        }
    }

    #[test]
    fn effective_modes_ignore_gain(gain in 0.01..5.0f64, scale in 0.1..10.0f64, mu in 0.0..0.95f64) {
        let a = effective_mode_number(&pdc_distribution(gain, mu, 60).unwrap()).unwrap();
        let b = effective_mode_number(&pdc_distribution(gain * scale, mu, 60).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn db_round_trip(r in 0.0..10.0f64) {
        let back = db_to_r(squeezing_db(r).unwrap()).unwrap();
        prop_assert!((back - r).abs() <= 1e-14 * r.max(1.0));
    }

    #[test]
    fn energy_round_trip(n in 1e-3..200.0f64, mu in 0.0..0.99f64, k in 1usize..50) {
        for fam in [EnergyFamily::Pdc { mu, modes: 40 }, EnergyFamily::Flat { modes: k }] {
            let d = gain_for_energy(fam, EnergyBudget(n)).unwrap();
            let got = mean_photon(&d).value();
            prop_assert!((got - n).abs() <= 1e-9 * n, "{got} vs {n}");
        }
    }
}

#[test]
fn pure_epr_states_have_unit_spectrum_where_representable() {
    for i in 0..=14 {
        let r = 0.25 * i as f64;
        let sp = symplectic_eigenvalues(epr_cm(r).unwrap().cm()).unwrap();
        for nu in sp.values {
            assert_relative_eq!(nu, 0.5, max_relative = 1e-7);
        }
    }
}

#[test]
fn pure_epr_spectrum_degrades_with_large_squeezing() {
    // f64 entries of size cosh(2r)/2 cannot resolve nu = 1/2 at r = 10
    let cm = epr_cm(10.0).unwrap();
    let c = cm.cm().get(0, 0);
    let s = cm.cm().get(0, 2);
    assert_eq!(c * c - s * s, 0.0);
}
