use approx::assert_relative_eq;
use dicke_critic::baths::{closed_form_gc, closed_form_response, spin_model};
use dicke_critic::critical::{ensemble_gc, kappa_scaling, residual, solve_gc, sweep, ChiMethod, Param, Point, SweepPlan};
use dicke_critic::lindblad::{steady_state, two_time_sx_ordered, CorrelatorOrder, SampleGrid};
use dicke_critic::meanfield::{mf_derivative, MeanFieldState};
use dicke_critic::qops::{lindblad_generator, pauli};
use dicke_critic::response::{cavity_det, static_susceptibility};
use dicke_critic::{Axis, BathSpec, CavityParams, DensityMatrix, LindbladChannel, Mode, OperatorMatrix, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn bath() -> impl Strategy<Value = BathSpec> {
    prop_oneof![
        (0.01..2.0f64, -0.5..-0.01f64).prop_map(|(g, sz)| BathSpec::Dephasing { gamma_phi: g, sz }),
        (0.01..2.0f64, 0.0..3.0f64).prop_map(|(g, t)| BathSpec::Thermal { gamma_t: g, temperature: t }),
        (0.01..2.0f64, 0.0..0.95f64).prop_map(|(g, t)| BathSpec::Generalized { gamma_t: g, t }),
    ]
}

fn cavity() -> impl Strategy<Value = CavityParams> {
    (0.2..3.0f64, 0.0..2.0f64).prop_map(|(w, k)| CavityParams::new(w, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generator_preserves_trace(
        hz in -3.0..3.0f64, hx in -3.0..3.0f64, hy in -3.0..3.0f64,
        r1 in 0.0..2.0f64, r2 in 0.0..2.0f64, r3 in 0.0..2.0f64,
    ) {
        let h = OperatorMatrix::from_rows(&[&[c(hz, 0.0), c(hx, -hy)], &[c(hx, hy), c(-hz, 0.0)]]).unwrap();
        let chans = vec![
            LindbladChannel::new(pauli(Axis::Minus), r1).unwrap(),
            LindbladChannel::new(pauli(Axis::Plus), r2).unwrap(),
            LindbladChannel::new(pauli(Axis::Z), r3).unwrap(),
        ];
        let l = lindblad_generator(&h, &chans).unwrap();
        prop_assert!(l.trace_defect() < 1e-12);
        // Hermiticity of the image of a Hermitian operator.
        let x = OperatorMatrix::from_rows(&[&[c(0.3, 0.0), c(0.1, 0.7)], &[c(0.1, -0.7), c(-0.2, 0.0)]]).unwrap();
        prop_assert!(l.apply(&x).hermiticity_defect() < 1e-12);
    }

    #[test]
    fn steady_state_is_physical(b in bath(), wz in 0.2..3.0f64) {
        let model = spin_model(&b, wz).unwrap();
        let ss = steady_state(&model).unwrap();
        let rho = ss.rho();
        prop_assert!((rho.op().trace() - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(rho.op().is_positive(1e-12));
        prop_assert!(model.generator().apply(rho.op()).max_abs() < 1e-10);
    }

    #[test]
    fn orderings_are_conjugate(b in bath(), wz in 0.2..3.0f64) {
        let model = spin_model(&b, wz).unwrap();
        let ss = steady_state(&model).unwrap();
        let grid = SampleGrid { tmax: 4.0, dt: 0.002 };
        let a = two_time_sx_ordered(&model, ss.rho(), grid, CorrelatorOrder::StateFirst).unwrap();
        let o = two_time_sx_ordered(&model, ss.rho(), grid, CorrelatorOrder::OperatorFirst).unwrap();
        for (x, y) in a.values().iter().zip(o.values()) {
            prop_assert!((x - y.conj()).norm() < 1e-12);
        }
        prop_assert!((a.values()[0] - c(0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gc_solves_critical_condition(b in bath(), wz in 0.2..3.0f64, cav in cavity()) {
        let (chi0, r) = dicke_critic::critical::critical_point(&b, wz, &cav, ChiMethod::ClosedForm(Mode::SelfConsistent)).unwrap();
        let g = r.g_c().unwrap();
        let scale = cav.omega0 * cav.omega0 + cav.kappa * cav.kappa;
        prop_assert!(residual(g, chi0, &cav).abs() < 1e-12 * scale);
        let resp = closed_form_response(&b, wz).unwrap();
        let det = cavity_det(0.0, &cav, g, &resp.susceptibility(&[])).unwrap();
        prop_assert!(det.det.norm() < 1e-10 * scale);
    }

    #[test]
    fn kappa_scaling_is_universal(chi0 in -5.0..-0.01f64, w0 in 0.2..3.0f64, k in 0.0..3.0f64) {
        let at0 = solve_gc(chi0, &CavityParams::new(w0, 0.0).unwrap());
        let s = kappa_scaling(&at0, &CavityParams::new(w0, k).unwrap()).unwrap();
        assert_relative_eq!(s, (1.0 + k * k / (w0 * w0)).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn modes_agree_except_generalized(b in bath(), wz in 0.2..3.0f64, cav in cavity()) {
        let p = closed_form_gc(&b, wz, &cav, Mode::PaperLiteral).unwrap().g_c().unwrap();
        let s = closed_form_gc(&b, wz, &cav, Mode::SelfConsistent).unwrap().g_c().unwrap();
        match b {
            BathSpec::Generalized { t, .. } if t > 0.05 => prop_assert!((p - s).abs() > 1e-12 * s),
            BathSpec::Generalized { .. } => {}
            _ => assert_relative_eq!(p, s, max_relative = 1e-12),
        }
    }

    #[test]
    fn identical_members_do_not_shift_gc(b in bath(), wz in 0.2..3.0f64, cav in cavity(), w in 0.05..0.95f64) {
        let m = ChiMethod::ClosedForm(Mode::SelfConsistent);
        let (single, _) = dicke_critic::critical::critical_point(&b, wz, &cav, m).unwrap();
        let (mixed, _) = ensemble_gc(&[(w, b.clone()), (1.0 - w, b)], wz, &cav, m).unwrap();
        assert_relative_eq!(single, mixed, max_relative = 1e-12);
    }

    #[test]
    fn mean_field_is_z2_symmetric(
        b in bath(), wz in 0.2..3.0f64, cav in cavity(), g in 0.0..2.0f64,
        ar in -1.0..1.0f64, ai in -1.0..1.0f64, x in -0.4..0.4f64, y in -0.4..0.4f64, z in -0.5..0.5f64,
    ) {
        prop_assume!(x * x + y * y + z * z <= 0.25);
        let model = spin_model(&b, wz).unwrap();
        let s = MeanFieldState { alpha: c(ar, ai), rho: DensityMatrix::from_bloch(x, y, z).unwrap() };
        let m = MeanFieldState { alpha: -s.alpha, rho: DensityMatrix::from_bloch(-x, -y, z).unwrap() };
        let (da, dr) = mf_derivative(&s, &cav, &model, g);
        let (ma, mr) = mf_derivative(&m, &cav, &model, g);
        prop_assert!((da + ma).norm() < 1e-12);
        let zp = pauli(Axis::Z).scale(c(2.0, 0.0));
        let flipped = &(&zp * &dr) * &zp;
        prop_assert!(flipped.max_abs_diff(&mr) < 1e-12);
    }
}

#[test]
fn numeric_chi_matches_hand_derived_rates() {
    let wz = 1.3;
    let n = |t: f64| 1.0 / ((wz / t).exp() - 1.0);
    let cases = [
        (BathSpec::Dephasing { gamma_phi: 0.4, sz: -0.3 }, -0.3, 0.4, 0.4),
        (BathSpec::Thermal { gamma_t: 0.2, temperature: 0.8 }, -0.5 / (1.0 + 2.0 * n(0.8)), 0.2 * (1.0 + 2.0 * n(0.8)), 0.2 * (1.0 + 2.0 * n(0.8))),
        (BathSpec::Generalized { gamma_t: 0.6, t: 0.5 }, -0.5 * 0.75 / 1.25, 0.6 * 0.25, 0.6 * 2.25),
    ];
    for (b, sz, gx, gy) in cases {
        let chi = static_susceptibility(&spin_model(&b, wz).unwrap()).unwrap().chi0;
        let expect = 4.0 * sz * wz / (wz * wz + gx * gy);
        assert_relative_eq!(chi, expect, max_relative = 1e-9);
    }
}

#[test]
fn sweep_keeps_grid_order() {
    let plan = SweepPlan {
        base: Point {
            bath: BathSpec::Thermal { gamma_t: 0.1, temperature: 0.1 },
            omega_z: 1.0,
            cavity: CavityParams::new(1.0, 0.2).unwrap(),
        },
        axes: vec![(Param::Temperature, vec![0.9, 0.1, 0.5]), (Param::Kappa, vec![0.0, 1.0])],
        method: ChiMethod::ClosedForm(Mode::SelfConsistent),
    };
    let rows = sweep(&plan).unwrap();
    let values: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
    assert_eq!(
        values,
        vec![vec![0.9, 0.0], vec![0.9, 1.0], vec![0.1, 0.0], vec![0.1, 1.0], vec![0.5, 0.0], vec![0.5, 1.0]]
    );
    assert!(rows[2].result.g_c() < rows[4].result.g_c());
}
