use super::derivative::{metric_derivative, MetricDerivativeKind};
use super::expr::{Assignment, Expression};
use crate::algebra::GrassmannNumber;
use crate::{Result, C64};

/// Anything that maps an assignment to a Grassmann number.
pub trait Evaluable {
    fn evaluate(&self, a: &Assignment) -> Result<GrassmannNumber>;
}

impl Evaluable for Expression {
    fn evaluate(&self, a: &Assignment) -> Result<GrassmannNumber> {
        self.eval(a)
    }
}

impl<F> Evaluable for F
where
    F: Fn(&Assignment) -> Result<GrassmannNumber>,
{
    fn evaluate(&self, a: &Assignment) -> Result<GrassmannNumber> {
        self(a)
    }
}

/// Central-difference step for a value of the given norm.
pub fn fd_step(value_norm: f64) -> f64 {
    1e-6 * value_norm.max(1.0)
}

/// `∂f/∂G_A`: complex derivative with respect to the coefficient of monomial
/// `mask` in the value of `var`, from central differences along the real
/// and imaginary directions.
pub fn coefficient_partial(
    f: &impl Evaluable,
    var: &str,
    mask: u32,
    a: &Assignment,
) -> Result<GrassmannNumber> {
    let value = a.get(var)?.clone();
    let space = a.space().clone();
    let h = fd_step(value.norm());
    let probe = |dir: C64| -> Result<GrassmannNumber> {
        let shift = GrassmannNumber::monomial(&space, mask, dir * h);
        let mut plus = a.clone();
        plus.set(var, &value + &shift)?;
        let mut minus = a.clone();
        minus.set(var, &value - &shift)?;
        Ok((&f.evaluate(&plus)? - &f.evaluate(&minus)?).scale(C64::new(1.0 / (2.0 * h), 0.0)))
    };
    let d_re = probe(C64::new(1.0, 0.0))?;
    let d_im = probe(C64::new(0.0, 1.0))?;
    // Wirtinger derivative ½(∂_x − i ∂_y)
    Ok((&d_re - &d_im.scale(C64::new(0.0, 1.0))).scale(C64::new(0.5, 0.0)))
}

/// Residuals of the first-order variation identity at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBehaviour {
    /// `‖Σ Δ_A ∂_{G_A} f − (δ⁺∂⁺ + δ⁻∂⁻) f‖`, finite differences against
    /// the symbolic derivatives. Zero up to difference noise.
    pub linear: f64,
    /// `‖f(g+δ) − f(g) − (δ⁺∂⁺ + δ⁻∂⁻) f‖`, of order `‖δ‖²`.
    pub increment: f64,
}

pub fn check_local_behaviour(
    expr: &Expression,
    var: &str,
    a: &Assignment,
    delta: &GrassmannNumber,
) -> Result<LocalBehaviour> {
    let space = a.space();
    let mut lhs = GrassmannNumber::zero(space);
    for &(mask, d) in delta.terms() {
        lhs += &coefficient_partial(expr, var, mask, a)?.scale(d);
    }
    let even = metric_derivative(expr, var, MetricDerivativeKind::LeftEven)?.eval(a)?;
    let odd = metric_derivative(expr, var, MetricDerivativeKind::LeftOdd)?.eval(a)?;
    let rhs = &(&delta.even_part() * &even) + &(&delta.odd_part() * &odd);
    let mut shifted = a.clone();
    shifted.set(var, a.get(var)? + delta)?;
    let increment = &expr.eval(&shifted)? - &expr.eval(a)?;
    Ok(LocalBehaviour {
        linear: lhs.distance(&rhs)?,
        increment: increment.distance(&rhs)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Generator, GeneratorSpace};

    #[test]
    fn identity_has_unit_response() {
        let space = GeneratorSpace::unprimed(2);
        let e1 = GrassmannNumber::generator(&space, Generator::e(1)).unwrap();
        let a = Assignment::new(&space).with("v", e1.clone()).unwrap();
        let d = coefficient_partial(&Expression::odd_var("v"), "v", 0b01, &a).unwrap();
        assert!(d.distance(&e1).unwrap() < 1e-9);
        let c = Expression::constant(e1);
        assert_eq!(coefficient_partial(&c, "v", 0b01, &a).unwrap(), GrassmannNumber::zero(&space));
    }

    #[test]
    fn square_of_unrestricted_variable() {
        // g = x + y·e1, f = g·g = x² + 2xy·e1; ∂f/∂y = 2x·e1, ∂f/∂x = 2x + 2y·e1
        let space = GeneratorSpace::unprimed(2);
        let (x, y) = (C64::new(0.3, -0.2), C64::new(1.1, 0.4));
        let g = GrassmannNumber::from_terms(&space, vec![(0, x), (0b01, y)]);
        let a = Assignment::new(&space).with("v", g).unwrap();
        let f = Expression::var("v") * Expression::var("v");
        let dy = coefficient_partial(&f, "v", 0b01, &a).unwrap();
        let want = GrassmannNumber::monomial(&space, 0b01, x * 2.0);
        assert!(dy.distance(&want).unwrap() < 1e-9);
        let dx = coefficient_partial(&f, "v", 0, &a).unwrap();
        let want = GrassmannNumber::from_terms(&space, vec![(0, x * 2.0), (0b01, y * 2.0)]);
        assert!(dx.distance(&want).unwrap() < 1e-9);
    }

    #[test]
    fn zero_variation_has_zero_residual() {
        let space = GeneratorSpace::unprimed(2);
        let g = GrassmannNumber::from_terms(&space, vec![(0, C64::new(0.5, 0.0)), (0b11, C64::new(0.0, 1.0))]);
        let a = Assignment::new(&space).with("v", g).unwrap();
        let f = Expression::var("v") * Expression::var("v").involute();
        let r = check_local_behaviour(&f, "v", &a, &GrassmannNumber::zero(&space)).unwrap();
        assert_eq!(r, LocalBehaviour { linear: 0.0, increment: 0.0 });
    }
}
