use ospde::model::{
    check_contraction, contraction_slack, validate_problem, Assumption, Lipschitz, ObstacleSpec, ScalarForm, SigmaSpec,
    SpdeProblem,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn contraction_parameters_are_admissible(c in 0.0f64..5.0, alpha in 0.0f64..0.6, beta in 0.0f64..1.1) {
        let l = Lipschitz::new(c, alpha, beta);
        let r = check_contraction(&l);
        prop_assert_eq!(r.satisfied, 2.0 * alpha + beta * beta < 1.0);
        if r.satisfied {
            let eps = r.epsilon.unwrap();
            prop_assert!(eps > 0.0 && eps <= 1.0);
            prop_assert!(contraction_slack(&l, eps) > 0.0);
            let ratio = r.ratio.unwrap();
            prop_assert!((0.0..1.0).contains(&ratio));
            prop_assert!(r.gamma.unwrap() >= 1.0 / eps);
        }
    }
}

#[test]
fn zero_problem_is_admissible() {
    assert!(validate_problem(&SpdeProblem::zero(16)).is_empty());
}

#[test]
fn barrier_above_initial_value_is_reported() {
    let mut p = SpdeProblem::zero(16);
    p.sigma = SigmaSpec::new(&["d1"], 1.0);
    p.initial = ScalarForm::sin_x(1.0, 1.0);
    p.obstacle = Some(ObstacleSpec::field(ScalarForm::constant(0.5)));
    let v = validate_problem(&p);
    assert!(v.iter().any(|v| v.assumption == Assumption::O && v.code == "s0_le_xi"), "{v:?}");
}

#[test]
fn understated_lipschitz_constant_is_reported() {
    let mut p = SpdeProblem::zero(16);
    p.sigma = SigmaSpec::new(&["d1"], 1.0);
    p.coeffs.g = vec![ScalarForm::affine_y(0.0, 1.0)];
    p.coeffs.lipschitz = Lipschitz::new(0.5, 0.0, 0.0);
    let v = validate_problem(&p);
    assert!(v.iter().any(|v| v.assumption == Assumption::H && v.code == "lipschitz_g"), "{v:?}");
}
