//! End-to-end use of the public API, the way a downstream crate sees it.

use pam_core::clopen::{Ambient, Ball, ClopenSet, LocallyConstantFn};
use pam_core::measures::{convolve, integrate, Measure, MeasureValue, Shape};
use pam_core::operators::{pairing, rank_one, trace_measure, FinVector};
use pam_core::spectral::char_functional;
use pam_core::stochastic::{verify_m_conditions, OrthStochMeasure};
use pam_core::{Cyclotomic, Rational, UltraNorm};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn z3() -> Ambient {
    Ambient::new(3, 0).unwrap()
}

#[test]
fn measures_survive_json() {
    let f = LocallyConstantFn::from_fn(ClopenSet::whole(z3()), 2, |b| MeasureValue::scalar(q(b.index() as i64, 7)))
        .unwrap();
    let mu = Measure::density(5, f).unwrap();
    let text = serde_json::to_string(&mu).unwrap();
    let back: Measure = serde_json::from_str(&text).unwrap();
    for b in z3().balls_up_to(2).unwrap() {
        assert_eq!(back.eval_ball(&b).unwrap(), mu.eval_ball(&b).unwrap());
    }
}

#[test]
fn haar_convolved_with_haar() {
    let h = Measure::unit_haar(z3(), 5).unwrap();
    let hh = convolve(&h, &h).unwrap();
    for b in z3().atoms(2).unwrap() {
        assert_eq!(hh.eval_ball(&b).unwrap(), MeasureValue::scalar(q(1, 9)));
    }
}

#[test]
fn trace_of_diagonal_matrix_measure() {
    let mu = Measure::haar(z3(), 5, MeasureValue::diagonal(vec![q(1, 1), q(2, 1)])).unwrap();
    let t = trace_measure(&mu).unwrap();
    assert_eq!(t.shape(), Shape::Scalar);
    assert_eq!(t.eval(&ClopenSet::whole(z3())).unwrap(), MeasureValue::scalar(q(3, 1)));
    let b = Ball::new(3, 0, 1, &q(2, 1)).unwrap();
    assert_eq!(t.eval_ball(&b).unwrap(), MeasureValue::scalar(q(1, 1)));
}

#[test]
fn rank_one_trace_is_the_pairing() {
    let a = FinVector::dense(7, &[q(1, 1), q(2, 1)]).unwrap();
    let b = FinVector::dense(7, &[q(3, 1), q(4, 1)]).unwrap();
    assert_eq!(pairing(&a, &b).unwrap(), q(11, 1));
    assert_eq!(rank_one(&a, &b).unwrap().trace(), q(11, 1));
}

#[test]
fn stochastic_measure_from_haar() {
    let h = Measure::unit_haar(z3(), 5).unwrap();
    let xi = OrthStochMeasure::build(&h, 2).unwrap();
    assert!(xi.coefficients().iter().all(|c| *c == q(1, 3)));
    assert!(verify_m_conditions(&xi, 2).unwrap().passed());

    // M(ξ(A)²) = μ(A) for A = 3Z_3, and ∫ Ch_{Z_3} dξ = ξ(Z_3) has mean zero.
    let a = ClopenSet::from_ball(Ball::new(3, 0, 1, &q(0, 1)).unwrap());
    let x = xi.xi(&a).unwrap();
    assert_eq!((&x * &x).expectation(), Cyclotomic::rational(3, q(1, 3)));
    let one = LocallyConstantFn::constant(ClopenSet::whole(z3()), 0, q(1, 1)).unwrap();
    assert!(xi.integral(&one).unwrap().expectation().is_zero());
}

#[test]
fn haar_characteristic_functional() {
    let h = Measure::unit_haar(z3(), 5).unwrap();
    assert_eq!(char_functional(&h, &q(4, 1)).unwrap(), Cyclotomic::one(3));
    assert!(char_functional(&h, &q(1, 3)).unwrap().is_zero());
    assert!(char_functional(&h, &q(-2, 3)).unwrap().is_zero());
}

#[test]
fn integral_against_density() {
    let h = Measure::unit_haar(z3(), 2).unwrap();
    let f = LocallyConstantFn::from_fn(ClopenSet::whole(z3()), 1, |b| {
        MeasureValue::scalar(if b.index() == 0 { q(3, 1) } else { q(1, 1) })
    })
    .unwrap();
    assert_eq!(integrate(&f, &h).unwrap(), MeasureValue::scalar(q(5, 3)));
    assert_eq!(h.total_norm().unwrap(), UltraNorm::one(2));
}
