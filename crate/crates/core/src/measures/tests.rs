use super::*;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn s(n: i64, d: i64) -> MeasureValue {
    MeasureValue::scalar(q(n, d))
}

fn z(r: u64) -> Ambient {
    Ambient::new(r, 0).unwrap()
}

fn ball(r: u64, level: i64, c: i64) -> Ball {
    Ball::new(r, 0, level, &Rational::from(c)).unwrap()
}

fn set(b: Ball) -> ClopenSet {
    ClopenSet::from_ball(b)
}

/// `2·Ch_{3Z_3}` against Haar on `Z_3`.
fn two_on_3z3(p: u64) -> Measure {
    let f =
        LocallyConstantFn::from_fn(ClopenSet::whole(z(3)), 1, |b| s(if b.index() == 0 { 2 } else { 0 }, 1)).unwrap();
    Measure::density(p, f).unwrap()
}

fn norm(p: u64, e: i64) -> UltraNorm {
    UltraNorm::from_exp(p, e)
}

/// `sup u(μ(B))` over every union `B` of level-`level` atoms inside `a`.
fn brute_ball_norm(mu: &Measure, a: &ClopenSet, level: i64) -> UltraNorm {
    let atoms = a.refine(level).unwrap();
    assert!(atoms.len() <= 16);
    let masses: Vec<_> = atoms.iter().map(|b| mu.eval_ball(b).unwrap()).collect();
    let mut best = UltraNorm::zero(mu.p());
    for mask in 0u32..(1 << atoms.len()) {
        let mut acc = MeasureValue::zero(mu.shape());
        for (i, m) in masses.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc.add_assign(m);
            }
        }
        best = best.max(acc.norm(mu.p()));
    }
    best
}

fn fixtures(r: u64, p: u64) -> Vec<Measure> {
    let g = z(r);
    let dens = LocallyConstantFn::from_fn(ClopenSet::whole(g), 1, |b| s(p as i64 * b.index() as i64 + 1, 1)).unwrap();
    let atomic = Measure::atomic(
        g,
        p,
        Shape::Scalar,
        [(q(0, 1), s(p as i64, 1)), (q(1, 1), s(1, p as i64)), (q(r as i64, 1), s(3, 1))],
    )
    .unwrap();
    vec![
        Measure::unit_haar(g, p).unwrap(),
        Measure::density(p, dens).unwrap(),
        atomic.clone(),
        Measure::sum(vec![Measure::haar(g, p, s(p as i64, 1)).unwrap(), atomic]).unwrap(),
    ]
}

fn agree_on_balls(a: &Measure, b: &Measure, level: i64) -> bool {
    a.ambient().balls_up_to(level).unwrap().iter().all(|x| a.eval_ball(x).unwrap() == b.eval_ball(x).unwrap())
}

#[test]
fn eval_examples() {
    let h = Measure::unit_haar(z(3), 5).unwrap();
    assert_eq!(h.eval(&ClopenSet::whole(z(3))).unwrap(), s(1, 1));
    for b in z(3).atoms(2).unwrap() {
        assert_eq!(h.eval_ball(&b).unwrap(), s(1, 9));
    }
    assert_eq!(two_on_3z3(2).eval(&ClopenSet::whole(z(3))).unwrap(), s(2, 3));
    let a = Measure::atomic(z(3), 2, Shape::Scalar, [(q(4, 1), s(1, 1)), (q(1, 1), s(2, 1))]).unwrap();
    assert_eq!(a.eval_ball(&ball(3, 1, 1)).unwrap(), s(3, 1));
    assert_eq!(a.eval_ball(&ball(3, 2, 4)).unwrap(), s(1, 1));
}

#[test]
fn haar_needs_coprime_primes() {
    assert!(Measure::unit_haar(z(3), 3).is_err());
    assert!(Measure::unit_haar(z(3), 4).is_err());
    assert!(Measure::atomic(z(3), 3, Shape::Scalar, [(q(0, 1), s(1, 1))]).is_ok());
}

#[test]
fn ball_norm_examples() {
    let whole = ClopenSet::whole(z(3));
    assert_eq!(Measure::unit_haar(z(3), 2).unwrap().ball_norm(&whole).unwrap(), UltraNorm::one(2));
    assert_eq!(two_on_3z3(2).ball_norm(&whole).unwrap(), norm(2, 1));
    let a = Measure::atomic(z(3), 2, Shape::Scalar, [(q(0, 1), s(4, 1))]).unwrap();
    assert_eq!(a.ball_norm(&whole).unwrap(), norm(2, 2));
}

#[test]
fn ball_norm_matches_subset_enumeration() {
    for (r, p) in [(3, 5), (5, 3), (2, 5), (3, 2)] {
        for mu in fixtures(r, p) {
            let deep = mu.ambient().level_of(mu.working_depth().unwrap()) + 1;
            for a in mu.ambient().balls_up_to(1).unwrap() {
                let a = set(a);
                let level = deep.max(a.max_level().unwrap());
                if a.refine(level).unwrap().len() > 16 {
                    continue;
                }
                assert_eq!(mu.ball_norm(&a).unwrap(), brute_ball_norm(&mu, &a, level), "{mu:?} on {a:?}");
            }
        }
    }
}

#[test]
fn n_mu_examples() {
    let h = Measure::unit_haar(z(3), 2).unwrap();
    for x in [0, 1, 5, -7] {
        assert_eq!(h.n_mu(&q(x, 1)).unwrap(), UltraNorm::one(2));
    }
    let a = Measure::atomic(z(3), 5, Shape::Scalar, [(q(2, 1), s(25, 1))]).unwrap();
    assert_eq!(a.n_mu(&q(2, 1)).unwrap(), norm(5, 2));
    assert!(a.n_mu(&q(11, 1)).unwrap().is_zero());
    let d = two_on_3z3(2);
    assert_eq!(d.n_mu(&q(0, 1)).unwrap(), norm(2, 1));
    assert!(d.n_mu(&q(1, 1)).unwrap().is_zero());
    assert!(d.n_mu(&q(1, 2)).is_err());
}

#[test]
fn n_mu_is_the_infimum_along_the_chain() {
    for (r, p) in [(3, 5), (2, 5)] {
        for mu in fixtures(r, p) {
            for x in -4..=9 {
                let x = q(x, 1);
                let n = mu.n_mu(&x).unwrap();
                // the chain is non-increasing and reaches n by depth 6
                let mut prev = None;
                for d in 0..6 {
                    let b = set(mu.ambient().ball_of(&x, d).unwrap());
                    let bn = mu.ball_norm(&b).unwrap();
                    assert!(bn >= n);
                    if let Some(pv) = prev {
                        assert!(bn <= pv);
                    }
                    prev = Some(bn);
                }
                assert_eq!(prev.unwrap(), n);
            }
        }
    }
}

#[test]
fn chain_values_vanish_off_atoms() {
    let a = Measure::atomic(z(3), 5, Shape::Scalar, [(q(0, 1), s(1, 1)), (q(1, 1), s(2, 1))]).unwrap();
    let x = q(10, 1);
    let tail: Vec<_> = (3..6).map(|d| a.eval_ball(&z(3).ball_of(&x, d).unwrap()).unwrap()).collect();
    assert!(tail.iter().all(|v| v.is_zero()));
}

#[test]
fn indicator_norm_equals_ball_norm() {
    for (r, p) in [(3, 5), (5, 3), (2, 5)] {
        for mu in fixtures(r, p) {
            for b in mu.ambient().balls_up_to(3).unwrap() {
                let a = set(b);
                assert_eq!(mu.indicator_norm(&a).unwrap(), mu.ball_norm(&a).unwrap());
            }
        }
    }
}

#[test]
fn additivity_on_disjoint_balls() {
    for mu in fixtures(3, 5) {
        let balls = mu.ambient().balls_up_to(2).unwrap();
        for a in &balls {
            for b in &balls {
                if a.intersects(b) {
                    continue;
                }
                let u = set(*a).union(&set(*b)).unwrap();
                let lhs = mu.eval(&u).unwrap();
                let rhs = mu.eval_ball(a).unwrap().checked_add(&mu.eval_ball(b).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
}

#[test]
fn integrate_examples() {
    let g = z(3);
    let h = Measure::unit_haar(g, 5).unwrap();
    let one = LocallyConstantFn::constant(ClopenSet::whole(g), 0, s(1, 1)).unwrap();
    assert_eq!(integrate(&one, &h).unwrap(), s(1, 1));
    let f = LocallyConstantFn::from_fn(ClopenSet::whole(g), 1, |b| s(if b.index() == 0 { 3 } else { 1 }, 1)).unwrap();
    assert_eq!(integrate(&f, &h).unwrap(), s(5, 3));
    let a = ball(3, 2, 4);
    let ch = LocallyConstantFn::constant(set(a), 2, s(1, 1)).unwrap();
    for mu in fixtures(3, 5) {
        assert_eq!(integrate(&ch, &mu).unwrap(), mu.eval_ball(&a).unwrap());
    }
}

#[test]
fn integrate_matrix_values() {
    let g = z(3);
    let m =
        LocallyConstantFn::constant(ClopenSet::whole(g), 0, MeasureValue::diagonal(vec![q(1, 1), q(2, 1)])).unwrap();
    let mu = Measure::density(5, m).unwrap();
    let f = LocallyConstantFn::from_fn(ClopenSet::whole(g), 1, |b| s(b.index() as i64, 1)).unwrap();
    // (0 + 1 + 2)·(1/3)·diag(1, 2)
    assert_eq!(integrate(&f, &mu).unwrap(), MeasureValue::diagonal(vec![q(1, 1), q(2, 1)]));
    let v = LocallyConstantFn::constant(ClopenSet::whole(g), 0, MeasureValue::Vector(vec![q(1, 1)])).unwrap();
    assert!(matches!(integrate(&v, &mu), Err(Error::ShapeMismatch(_))));
}

#[test]
fn integral_is_bounded_by_l1_norm() {
    for mu in fixtures(3, 5) {
        let f = LocallyConstantFn::from_fn(ClopenSet::whole(z(3)), 2, |b| s(b.index() as i64 * 5 + 2, 5)).unwrap();
        let lhs = integrate(&f, &mu).unwrap().norm(5);
        let l1 = lq_norm(&f, &mu, 1).unwrap();
        let bound = UltraNorm::from_exp(5, l1.exp().map(|e| e.numer().try_into().unwrap()).unwrap_or(i64::MAX));
        assert!(l1.is_zero() || lhs <= bound);
    }
}

#[test]
fn lq_examples() {
    let g = z(3);
    let h = Measure::unit_haar(g, 2).unwrap();
    let c = LocallyConstantFn::constant(ClopenSet::whole(g), 0, s(12, 1)).unwrap();
    for qq in 1..4 {
        assert_eq!(lq_norm(&c, &h, qq).unwrap(), FractionalNorm::new(2, Some(q(2, 1))));
    }
    let zero = LocallyConstantFn::constant(ClopenSet::whole(g), 1, s(0, 1)).unwrap();
    assert!(lq_norm(&zero, &h, 2).unwrap().is_zero());
    // sup |2|² · 1 = 2^-2, then the square root
    let f = LocallyConstantFn::from_fn(ClopenSet::whole(g), 1, |b| s(if b.index() == 0 { 2 } else { 0 }, 1)).unwrap();
    assert_eq!(lq_norm(&f, &h, 2).unwrap(), FractionalNorm::new(2, Some(q(1, 1))));
    assert_eq!(lq_norm(&f, &h, 3).unwrap(), FractionalNorm::new(2, Some(q(1, 1))));
    // N_μ = |2|_2 at the only point mass
    let a = Measure::atomic(g, 2, Shape::Scalar, [(q(0, 1), s(2, 1))]).unwrap();
    let one = LocallyConstantFn::constant(ClopenSet::whole(g), 0, s(1, 1)).unwrap();
    assert_eq!(lq_norm(&one, &a, 3).unwrap(), FractionalNorm::new(2, Some(q(1, 3))));
    assert!(lq_norm(&f, &h, 0).is_err());
}

#[test]
fn total_norm_examples() {
    let g = z(3);
    assert_eq!(Measure::unit_haar(g, 2).unwrap().total_norm().unwrap(), UltraNorm::one(2));
    assert_eq!(Measure::haar(g, 2, s(4, 1)).unwrap().total_norm().unwrap(), norm(2, 2));
    let a = Measure::atomic(g, 2, Shape::Scalar, [(q(0, 1), s(1, 1)), (q(1, 1), s(2, 1))]).unwrap();
    assert_eq!(a.total_norm().unwrap(), UltraNorm::one(2));
    for mu in fixtures(5, 3) {
        mu.total_norm().unwrap();
    }
}

#[test]
fn level_sets_are_finite_unions_of_balls() {
    let g = z(3);
    let a = Measure::atomic(g, 5, Shape::Scalar, [(q(1, 1), s(5, 1))]).unwrap();
    let mu = Measure::sum(vec![
        two_on_3z3(5).weighted_by(&LocallyConstantFn::constant(ClopenSet::whole(g), 0, q(5, 1)).unwrap()).unwrap(),
        a,
    ])
    .unwrap();
    // density 10 on 3Z_3 (norm 1/5), point mass 5 at 1 (norm 1/5)
    let (balls, points) = mu.level_set(1).unwrap();
    assert_eq!(balls, set(ball(3, 1, 0)));
    assert_eq!(points, vec![q(1, 1)]);
    let (balls, points) = mu.level_set(0).unwrap();
    assert!(balls.is_empty() && points.is_empty());
    for x in -5..12 {
        let x = q(x, 1);
        let inside = balls.contains_point(&x).unwrap() || points.contains(&x);
        assert_eq!(inside, mu.n_mu(&x).unwrap() >= UltraNorm::one(5));
    }
}

#[test]
fn integrability_examples() {
    let g = z(3);
    let h = Measure::unit_haar(g, 5).unwrap();
    let f = LocallyConstantFn::from_fn(ClopenSet::whole(g), 1, |b| s(b.index() as i64 + 1, 1)).unwrap();
    let rep = integrability_report(&f, &h, 2).unwrap();
    assert!(rep.integrable);
    assert!(rep.levels.iter().all(|l| l.delta.is_none_or(|d| d == UltraNorm::one(5))));

    let a = Measure::atomic(g, 5, Shape::Scalar, [(q(0, 1), s(25, 1))]).unwrap();
    let one = LocallyConstantFn::constant(ClopenSet::whole(g), 0, s(1, 1)).unwrap();
    let rep = integrability_report(&one, &a, 3).unwrap();
    assert!(rep.integrable);
    let hit = rep.levels.iter().find(|l| l.k == 2).unwrap();
    assert_eq!(hit.points, vec![q(0, 1)]);
    assert!(hit.balls.is_empty());
    assert_eq!(hit.delta, Some(norm(5, 2)));
    assert!(rep.levels.iter().filter(|l| l.k < 2).all(|l| l.points.is_empty()));

    let zero = LocallyConstantFn::constant(ClopenSet::whole(g), 0, s(0, 1)).unwrap();
    let rep = integrability_report(&zero, &h, 2).unwrap();
    assert!(rep.integrable && rep.levels.iter().all(|l| l.balls.is_empty() && l.points.is_empty()));
}

#[test]
fn weighted_measure_is_a_density() {
    let g = z(3);
    let w = LocallyConstantFn::from_fn(ClopenSet::whole(g), 2, |b| q(b.index() as i64, 1)).unwrap();
    for mu in fixtures(3, 5) {
        let nu = mu.weighted_by(&w).unwrap();
        for b in g.balls_up_to(2).unwrap() {
            let ch = LocallyConstantFn::from_fn(set(b), 2, |a| s(a.index() as i64, 1)).unwrap();
            assert_eq!(nu.eval_ball(&b).unwrap(), integrate(&ch, &mu).unwrap());
        }
    }
}

#[test]
fn product_examples() {
    let g = z(3);
    let h = Measure::unit_haar(g, 5).unwrap();
    let hh = ProductMeasure::new(h.clone(), h.clone()).unwrap();
    let b = set(ball(3, 1, 2));
    assert_eq!(hh.eval_rect(&b, &b).unwrap(), s(1, 9));
    assert!(hh.n_identity_holds(&q(4, 1), &q(-1, 1)).unwrap());
    assert_eq!(hh.n_mu(&q(4, 1), &q(-1, 1)).unwrap(), UltraNorm::one(5));
    let dh = ProductMeasure::new(two_on_3z3(2), Measure::unit_haar(g, 2).unwrap()).unwrap();
    for y in 0..9 {
        assert_eq!(dh.n_mu(&q(0, 1), &q(y, 1)).unwrap(), norm(2, 1));
        assert!(dh.n_mu(&q(1, 1), &q(y, 1)).unwrap().is_zero());
    }
    // overlapping rectangles are counted once
    let whole = ClopenSet::whole(g);
    let v = hh.eval_rects(&[(whole.clone(), b.clone()), (b.clone(), whole.clone())]).unwrap();
    assert_eq!(v, s(5, 9));
}

#[test]
fn n_product_identity_exhaustive() {
    for (r, p) in [(3, 5), (2, 5)] {
        let ms = fixtures(r, p);
        for mu in &ms {
            for nu in &ms {
                let prod = ProductMeasure::new(mu.clone(), nu.clone()).unwrap();
                for x in 0..(r * r) as i64 {
                    for y in 0..(r * r) as i64 {
                        assert!(prod.n_identity_holds(&q(x, 1), &q(y, 1)).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn fubini_examples() {
    let g = z(3);
    let h = Measure::unit_haar(g, 5).unwrap();
    let d = fixtures(3, 5).remove(1);
    let a = ball(3, 1, 1);
    let b = ball(3, 1, 2);
    let f = crate::clopen::ProductFn::from_fn(g, 1, g, 1, |x, y| s((*x == a && *y == b) as i64, 1)).unwrap();
    let rep = fubini_check(&f, &d, &h).unwrap();
    assert!(rep.holds);
    assert_eq!(rep.product, d.eval_ball(&a).unwrap().checked_mul(&h.eval_ball(&b).unwrap()).unwrap());
    let zero = crate::clopen::ProductFn::from_fn(g, 1, g, 1, |_, _| s(0, 1)).unwrap();
    let rep = fubini_check(&zero, &d, &h).unwrap();
    assert!(rep.holds && rep.product.is_zero());
}

#[test]
fn convolution_examples() {
    let g = z(3);
    let h = Measure::unit_haar(g, 5).unwrap();
    assert!(agree_on_balls(&convolve(&h, &h).unwrap(), &h, 2));
    let delta0 = Measure::atomic(g, 5, Shape::Scalar, [(q(0, 1), s(1, 1))]).unwrap();
    for mu in fixtures(3, 5) {
        assert!(agree_on_balls(&convolve(&delta0, &mu).unwrap(), &mu, 3));
        assert!(agree_on_balls(&convolve(&mu, &delta0).unwrap(), &mu, 3));
    }
    let da = Measure::atomic(g, 5, Shape::Scalar, [(q(2, 1), s(3, 1))]).unwrap();
    let db = Measure::atomic(g, 5, Shape::Scalar, [(q(-7, 1), s(1, 2))]).unwrap();
    let ab = Measure::atomic(g, 5, Shape::Scalar, [(q(-5, 1), s(3, 2))]).unwrap();
    assert!(agree_on_balls(&convolve(&da, &db).unwrap(), &ab, 4));
}

/// `[μ*ν](A)` straight from the definition, on atoms fine enough that both
/// measures are resolved.
fn convolution_oracle(mu: &Measure, nu: &Measure, a: &Ball, level: i64) -> MeasureValue {
    let g = mu.ambient();
    let atoms = g.atoms(level).unwrap();
    let mut acc = MeasureValue::zero(Shape::product(mu.shape(), nu.shape()).unwrap());
    for x in &atoms {
        for y in &atoms {
            let sum = x.center() + y.center();
            if a.contains(&sum).unwrap() {
                acc.add_assign(&mu.eval_ball(x).unwrap().checked_mul(&nu.eval_ball(y).unwrap()).unwrap());
            }
        }
    }
    acc
}

#[test]
fn convolution_matches_definition() {
    let g = z(3);
    let ms = fixtures(3, 5);
    let mut ms: Vec<_> = ms.into_iter().filter(|m| m.working_depth().unwrap() <= 2).collect();
    ms.push(Measure::atomic(g, 5, Shape::Scalar, [(q(1, 1), s(2, 1)), (q(5, 1), s(1, 5))]).unwrap());
    for mu in &ms {
        for nu in &ms {
            let c = convolve(mu, nu).unwrap();
            for a in g.balls_up_to(2).unwrap() {
                assert_eq!(c.eval_ball(&a).unwrap(), convolution_oracle(mu, nu, &a, 2), "{mu:?} * {nu:?} on {a:?}");
            }
            let whole = ClopenSet::whole(g);
            assert_eq!(
                c.eval(&whole).unwrap(),
                mu.eval(&whole).unwrap().checked_mul(&nu.eval(&whole).unwrap()).unwrap()
            );
        }
    }
}

#[test]
fn pushforward_examples() {
    let g = z(3);
    let h = Measure::unit_haar(g, 5).unwrap();
    assert!(agree_on_balls(&h.pushforward(&ValueMap::identity(Shape::Scalar)).unwrap(), &h, 2));
    let twice = h.pushforward(&ValueMap::scalar(Shape::Scalar, q(2, 1))).unwrap();
    assert_eq!(twice.eval(&ClopenSet::whole(g)).unwrap(), s(2, 1));
    let diag = Measure::haar(g, 5, MeasureValue::diagonal(vec![q(1, 1), q(2, 1)])).unwrap();
    let tr = diag.pushforward(&ValueMap::trace(2)).unwrap();
    assert!(agree_on_balls(&tr, &Measure::haar(g, 5, s(3, 1)).unwrap(), 2));
    let f = LocallyConstantFn::from_fn(ClopenSet::whole(g), 1, |b| s(b.index() as i64 - 1, 1)).unwrap();
    assert!(pushforward_intertwines(&f, &diag, &ValueMap::trace(2)).unwrap().2);
}

#[test]
fn json_round_trip() {
    let mut all = fixtures(3, 5);
    all.push(Measure::haar(z(3), 5, MeasureValue::diagonal(vec![q(1, 1), q(2, 1)])).unwrap());
    for mu in all {
        let text = serde_json::to_string(&mu).unwrap();
        let back: Measure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mu);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
    let text = r#"{"kind":"haar","r":3,"m0":0,"p":5,"shape":"scalar","total":"1"}"#;
    let h: Measure = serde_json::from_str(text).unwrap();
    assert_eq!(h, Measure::unit_haar(z(3), 5).unwrap());
    let bad = r#"{"kind":"haar","r":3,"m0":0,"p":3,"shape":"scalar","total":"1"}"#;
    assert!(serde_json::from_str::<Measure>(bad).is_err());
}

proptest! {
    #[test]
    fn convolution_norm_is_submultiplicative(a in prop::collection::vec(-40i64..40, 9), b in prop::collection::vec(-40i64..40, 3)) {
        let g = z(3);
        let fa = LocallyConstantFn::from_fn(ClopenSet::whole(g), 2, |x| s(a[x.index() as usize], 1)).unwrap();
        let fb = LocallyConstantFn::from_fn(ClopenSet::whole(g), 1, |x| s(b[x.index() as usize], 5)).unwrap();
        let mu = Measure::density(5, fa).unwrap();
        let nu = Measure::density(5, fb).unwrap();
        let c = convolve(&mu, &nu).unwrap();
        prop_assert!(c.total_norm().unwrap() <= mu.total_norm().unwrap() * nu.total_norm().unwrap());
    }

    #[test]
    fn pushforward_is_continuous(e in prop::collection::vec(-30i64..30, 4), c in prop::collection::vec(-30i64..30, 3)) {
        let g = z(3);
        let f = LocallyConstantFn::from_fn(ClopenSet::whole(g), 1, |x| {
            MeasureValue::Vector(vec![q(c[x.index() as usize], 1), q(c[x.index() as usize] + 5, 1)])
        }).unwrap();
        let mu = Measure::density(5, f).unwrap();
        let map = ValueMap::new(Shape::Vector(2), Shape::Vector(2), vec![vec![q(e[0], 1), q(e[1], 5)], vec![q(e[2], 1), q(e[3], 1)]]).unwrap();
        let nu = mu.pushforward(&map).unwrap();
        for b in g.balls_up_to(2).unwrap() {
            prop_assert!(nu.eval_ball(&b).unwrap().norm(5) <= map.norm(5) * mu.eval_ball(&b).unwrap().norm(5));
        }
    }
}
