//! Products `μ × ν` on `G × H`.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{Measure, MeasureValue, Shape};
use crate::clopen::{Ball, ClopenSet, ProductFn};
use crate::error::{invalid, Error, Result};
use crate::padic::{Rational, UltraNorm};

#[derive(Clone, Debug, PartialEq)]
pub struct ProductMeasure {
    left: Measure,
    right: Measure,
    shape: Shape,
}

impl ProductMeasure {
    pub fn new(left: Measure, right: Measure) -> Result<Self> {
        if left.p() != right.p() {
            return invalid("factors use different value primes");
        }
        let shape = Shape::product(left.shape(), right.shape())?;
        Ok(ProductMeasure { left, right, shape })
    }

    pub fn left(&self) -> &Measure {
        &self.left
    }

    pub fn right(&self) -> &Measure {
        &self.right
    }

    pub fn p(&self) -> u64 {
        self.left.p()
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// `(μ×ν)(A×B) = μ(A)·ν(B)`.
    pub fn eval_rect(&self, a: &ClopenSet, b: &ClopenSet) -> Result<MeasureValue> {
        self.left.eval(a)?.checked_mul(&self.right.eval(b)?)
    }

    /// The measure of a finite union of rectangles, which may overlap.
    pub fn eval_rects(&self, rects: &[(ClopenSet, ClopenSet)]) -> Result<MeasureValue> {
        let lvl = |s: &ClopenSet, top: i64| s.max_level().unwrap_or(top);
        let ll = rects.iter().map(|(a, _)| lvl(a, self.left.ambient().top_level())).max();
        let rl = rects.iter().map(|(_, b)| lvl(b, self.right.ambient().top_level())).max();
        let (Some(ll), Some(rl)) = (ll, rl) else { return Ok(MeasureValue::zero(self.shape)) };
        let mut cells: BTreeSet<(Ball, Ball)> = BTreeSet::new();
        for (a, b) in rects {
            self.left.ambient().check_same(&a.ambient())?;
            self.right.ambient().check_same(&b.ambient())?;
            let bs = b.refine(rl)?;
            for x in a.refine(ll)? {
                cells.extend(bs.iter().map(|y| (x, *y)));
            }
        }
        let mut acc = MeasureValue::zero(self.shape);
        for (x, y) in cells {
            acc.add_assign(&self.left.eval_ball(&x)?.checked_mul(&self.right.eval_ball(&y)?)?);
        }
        Ok(acc)
    }

    /// `‖A×B‖_{μ×ν}` for scalar factors, from the values the factors take on
    /// arbitrarily small sub-balls of `A` and `B`: density values and point
    /// masses. Every sub-rectangle small enough sees one of each, and unions
    /// cannot exceed the largest of them.
    pub fn rect_norm(&self, a: &Ball, b: &Ball) -> Result<UltraNorm> {
        self.require_scalar()?;
        let left = pieces(&self.left, a);
        let right = pieces(&self.right, b);
        let mut best = UltraNorm::zero(self.p());
        for x in &left {
            for y in &right {
                best = best.max(x.checked_mul(y)?.norm(self.p()));
            }
        }
        Ok(best)
    }

    /// `N_{μ×ν}(x, y)`: the stationary value of `rect_norm` along the
    /// descending chain of square neighbourhoods of `(x, y)`.
    pub fn n_mu(&self, x: &Rational, y: &Rational) -> Result<UltraNorm> {
        self.require_scalar()?;
        let (ga, ha) = (self.left.ambient(), self.right.ambient());
        if !ga.contains_point(x)? || !ha.contains_point(y)? {
            return Err(Error::Domain("point outside the product space".into()));
        }
        let dl = self.left.working_depth()?;
        let dr = self.right.working_depth()?;
        let last = self.left.stationary_depth(x)?.max(dl).max(self.right.stationary_depth(y)?.max(dr));
        let mut current = UltraNorm::zero(self.p());
        for d in 0..=last {
            let bx = ga.ball_of(x, ga.level_of(d))?;
            let by = ha.ball_of(y, ha.level_of(d))?;
            current = self.rect_norm(&bx, &by)?;
        }
        Ok(current)
    }

    /// `N_{μ×ν}(x,y) = N_μ(x)·N_ν(y)`, both sides computed independently.
    pub fn n_identity_holds(&self, x: &Rational, y: &Rational) -> Result<bool> {
        Ok(self.n_mu(x, y)? == self.left.n_mu(x)? * self.right.n_mu(y)?)
    }

    fn require_scalar(&self) -> Result<()> {
        if self.left.shape() == Shape::Scalar && self.right.shape() == Shape::Scalar {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("product norms are implemented for scalar factors".into()))
        }
    }
}

/// Values `μ` takes, up to a unit, on the small balls inside `ball`.
fn pieces<'a>(mu: &'a Measure, ball: &'a Ball) -> Vec<&'a MeasureValue> {
    let mut out = mu.density_values_on(ball);
    out.extend(mu.point_masses_in(ball).map(|(_, m)| m));
    out
}

/// Both iterated integrals of a step function on `G × H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FubiniReport {
    /// `∫_{G×H} f d(μ×ν)` summed over product cells.
    pub product: MeasureValue,
    /// `∫_H (∫_G f(x,y) μ(dx)) ν(dy)`.
    pub inner_left: MeasureValue,
    /// `∫_G (∫_H f(x,y) ν(dy)) μ(dx)`, only for commuting (scalar) factor values.
    pub inner_right: Option<MeasureValue>,
    pub holds: bool,
}

pub fn fubini_check(f: &ProductFn<MeasureValue>, mu: &Measure, nu: &Measure) -> Result<FubiniReport> {
    mu.ambient().check_same(&f.left())?;
    nu.ambient().check_same(&f.right())?;
    let prod = ProductMeasure::new(mu.clone(), nu.clone())?;
    let (xs, ys) = (f.left_atoms(), f.right_atoms());
    let mx: Vec<MeasureValue> = xs.iter().map(|a| mu.eval_ball(a)).collect::<Result<_>>()?;
    let ny: Vec<MeasureValue> = ys.iter().map(|b| nu.eval_ball(b)).collect::<Result<_>>()?;
    let shape = f.get(0, 0).shape();
    let zero = MeasureValue::zero(Shape::product(shape, prod.shape())?);

    let mut product = zero.clone();
    // Zero cells contribute nothing to any of the three sums.
    for (i, a) in xs.iter().enumerate() {
        for (j, b) in ys.iter().enumerate() {
            if f.get(i, j).is_zero() {
                continue;
            }
            let cell = prod.eval_rect(&ClopenSet::from_ball(*a), &ClopenSet::from_ball(*b))?;
            product = product.checked_add(&f.get(i, j).checked_mul(&cell)?)?;
        }
    }

    let mut inner_left = zero.clone();
    for (j, nyj) in ny.iter().enumerate() {
        let mut g = MeasureValue::zero(Shape::product(shape, mu.shape())?);
        for i in (0..xs.len()).filter(|&i| !f.get(i, j).is_zero()) {
            g = g.checked_add(&f.get(i, j).checked_mul(&mx[i])?)?;
        }
        inner_left = inner_left.checked_add(&g.checked_mul(nyj)?)?;
    }

    let inner_right = if mu.shape() == Shape::Scalar && nu.shape() == Shape::Scalar {
        let mut acc = zero.clone();
        for (i, mxi) in mx.iter().enumerate() {
            let mut g = MeasureValue::zero(shape);
            for j in (0..ys.len()).filter(|&j| !f.get(i, j).is_zero()) {
                g = g.checked_add(&f.get(i, j).checked_mul(&ny[j])?)?;
            }
            acc = acc.checked_add(&g.checked_mul(mxi)?)?;
        }
        Some(acc)
    } else {
        None
    };
    let holds = product == inner_left && inner_right.as_ref().is_none_or(|v| *v == product);
    Ok(FubiniReport { product, inner_left, inner_right, holds })
}
