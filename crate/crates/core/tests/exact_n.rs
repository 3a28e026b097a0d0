use dicke_critic::baths::{closed_form_gc, spin_model};
use dicke_critic::exactn::{build_full_generator, cutoff_change, full_steady_observables, FullSystemSpec};
use dicke_critic::{BathSpec, CavityParams, Mode};

fn setup() -> (BathSpec, CavityParams, f64) {
    let b = BathSpec::Generalized { gamma_t: 0.2, t: 0.0 };
    let c = CavityParams::new(1.0, 0.5).unwrap();
    let gc = closed_form_gc(&b, 1.0, &c, Mode::SelfConsistent).unwrap().g_c().unwrap();
    (b, c, gc)
}

#[test]
fn uncoupled_pair_is_polarized_and_dark() {
    let (b, c, _) = setup();
    let spec = FullSystemSpec::new(2, 4, 0.0, c, spin_model(&b, 1.0).unwrap()).unwrap();
    let o = full_steady_observables(&spec).unwrap();
    assert!(o.photon_number.abs() < 1e-12);
    assert!((o.sz_mean + 0.5).abs() < 1e-12);
    assert!(o.sx_mean.abs() < 1e-12);
}

#[test]
fn zero_eigenvalue_is_simple_when_coupled() {
    let (b, c, gc) = setup();
    let spec = FullSystemSpec::new(1, 3, gc, c, spin_model(&b, 1.0).unwrap()).unwrap();
    let gen = build_full_generator(&spec).unwrap();
    assert!(gen.trace_defect() < 1e-10);
    let ev = gen.to_super_operator().unwrap().eigenvalues().unwrap();
    let zeros = ev.iter().filter(|z| z.norm() < 1e-9).count();
    assert_eq!(zeros, 1);
}

#[test]
fn cutoff_is_converged_below_one_and_a_half_gc() {
    let (b, c, gc) = setup();
    for f in [0.5, 1.0, 1.5] {
        let spec = FullSystemSpec::new(2, 12, f * gc, c, spin_model(&b, 1.0).unwrap()).unwrap();
        assert!(cutoff_change(&spec, 4).unwrap() < 0.01, "g = {f} g_c");
    }
}

#[test]
fn onset_sharpens_with_atom_number() {
    let (b, c, gc) = setup();
    let model = spin_model(&b, 1.0).unwrap();
    let fs: Vec<f64> = (0..=4).map(|k| 0.7 + 0.2 * k as f64).collect();
    let steepest = |n: usize| {
        let photons: Vec<f64> = fs
            .iter()
            .map(|f| {
                let spec = FullSystemSpec::new(n, 12, f * gc, c, model.clone()).unwrap();
                full_steady_observables(&spec).unwrap().photon_number
            })
            .collect();
        photons.windows(2).map(|w| (w[1] - w[0]) / 0.2).fold(f64::NEG_INFINITY, f64::max)
    };
    let s: Vec<f64> = (1..=3).map(steepest).collect();
    assert!(s[0] < s[1] && s[1] < s[2], "{s:?}");
}
