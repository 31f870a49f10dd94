use proptest::prelude::*;
use qfiport::audit::{compare_paper_vs_sim, GridSpec, ReportOptions, Tolerances};
use qfiport::formulas;
use qfiport::{run_scheme, Placement, Scheme, SchemeConfig};

fn strength() -> impl Strategy<Value = f64> {
    0.0..0.95f64
}

fn angle() -> impl Strategy<Value = f64> {
    0.2..2.9f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scheme_b_simulation_matches_closed_form(
        theta in angle(), phi in -3.0..3.0f64, gamma in strength(), p in strength(), pr in strength(),
    ) {
        let cfg = SchemeConfig::new(Scheme::B, theta, phi).gamma(gamma).p(p).pr(pr);
        let res = run_scheme(&cfg).unwrap();
        let (bloch, qfi) = formulas::scheme_b(theta, phi, gamma, p, pr).unwrap();
        let want = bloch.vector();
        for (a, b) in res.bloch.components().iter().zip(want.components()) {
            prop_assert!((a - b).abs() < 1e-10, "bloch {a} vs {b}");
        }
        prop_assert!((res.qfi_simulated - qfi).abs() < 1e-6, "qfi {} vs {qfi}", res.qfi_simulated);
    }

    #[test]
    fn two_sided_with_idle_alice_equals_scheme_b(
        theta in angle(), phi in -3.0..3.0f64, gamma in strength(), p in strength(), pr in strength(),
    ) {
        let b = SchemeConfig::new(Scheme::B, theta, phi).gamma(gamma).p(p).pr(pr);
        let mut two = b;
        two.scheme = Scheme::TwoSided;
        two.gamma1 = 0.0;
        two.p1 = 0.0;
        two.pr1 = 0.0;
        let rb = run_scheme(&b).unwrap();
        let rt = run_scheme(&two).unwrap();
        prop_assert!((rb.averaged_state.matrix() - rt.averaged_state.matrix()).max_abs() < 1e-12);
        prop_assert!((rb.success_probability - rt.success_probability).abs() < 1e-12);
    }

    #[test]
    fn averaged_state_is_physical(
        scheme in prop::sample::select(vec![Scheme::Ad, Scheme::A, Scheme::B, Scheme::TwoSided]),
        placement in prop::sample::select(vec![
            Placement::OnResource, Placement::PostBellPreCorrection, Placement::PostBellPostCorrection,
        ]),
        theta in 0.0..3.14f64, phi in -3.0..3.0f64, gamma in strength(), p in strength(), pr in strength(),
    ) {
        let mut cfg = SchemeConfig::new(scheme, theta, phi).gamma(gamma).placement(placement);
        if scheme != Scheme::Ad {
            cfg = cfg.p(p).pr(pr);
        }
        let res = run_scheme(&cfg).unwrap();
        let rho = &res.averaged_state;
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.min_eigenvalue().unwrap() > -1e-12);
        prop_assert!(rho.purity() <= 1.0 + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&res.success_probability));
        prop_assert!(res.qfi_simulated >= -1e-9 && res.qfi_simulated <= 1.0 + 1e-6);
    }

    #[test]
    fn damping_never_increases_qfi(theta in angle(), g in 0.0..0.9f64, dg in 0.01..0.1f64) {
        let q = |gamma| run_scheme(&SchemeConfig::new(Scheme::Ad, theta, 0.3).gamma(gamma)).unwrap().qfi_simulated;
        prop_assert!(q(g + dg) <= q(g) + 1e-8);
        prop_assert!(formulas::f_ad(theta, g + dg) <= formulas::f_ad(theta, g));
    }
}

#[test]
fn report_is_deterministic() {
    let grid: GridSpec = "gamma=0:0.9:4,pr=0:0.9:4,theta=pi/4:pi/2:2".parse().unwrap();
    for scheme in [Scheme::A, Scheme::B] {
        let base = SchemeConfig::new(scheme, 0.0, 0.0).p(0.3);
        let run = || compare_paper_vs_sim(&base, &grid, &Tolerances::default(), ReportOptions::default()).unwrap();
        let first = run();
        assert_eq!(first, run());
        assert_eq!(serde_json::to_string(&first).unwrap(), serde_json::to_string(&run()).unwrap());
    }
}
