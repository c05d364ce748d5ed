use super::expr::{Expression, Restriction};
use crate::{Error, Result, C64};

/// Which metric derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricDerivativeKind {
    LeftEven,
    LeftOdd,
    RightEven,
    RightOdd,
}

/// Symbolic metric derivative of `expr` with respect to the variable `var`.
///
/// Left derivatives are defined by `δf = δ⁺ ∂⁺f + δ⁻ ∂⁻f` to first order,
/// right ones by `δf = f∂⁺ δ⁺ + f∂⁻ δ⁻`. Since an odd `δ⁻` passes any `x`
/// as `x δ⁻ = δ⁻ x̄`, the odd right derivative is the involution of the
/// odd left one, and the even ones coincide.
pub fn metric_derivative(expr: &Expression, var: &str, kind: MetricDerivativeKind) -> Result<Expression> {
    Ok(match kind {
        MetricDerivativeKind::LeftEven | MetricDerivativeKind::RightEven => left(expr, var, false)?,
        MetricDerivativeKind::LeftOdd => left(expr, var, true)?,
        MetricDerivativeKind::RightOdd => {
            let d = left(expr, var, true)?;
            if d.is_literal_zero() {
                d
            } else {
                d.involute()
            }
        }
    })
}

fn wrap(d: Expression, f: fn(Expression) -> Expression) -> Expression {
    if d.is_literal_zero() {
        d
    } else {
        f(d)
    }
}

fn left(expr: &Expression, var: &str, odd: bool) -> Result<Expression> {
    Ok(match expr {
        Expression::Scalar(_) | Expression::Const(_) => Expression::zero(),
        Expression::Var(name, restriction) => {
            if name != var {
                Expression::zero()
            } else if odd || *restriction == Restriction::Unrestricted {
                Expression::one()
            } else {
                // an odd-only variable has no even variation
                Expression::zero()
            }
        }
        Expression::Sum(terms) => Expression::sum(
            terms
                .iter()
                .map(|(w, t)| Ok((*w, left(t, var, odd)?)))
                .collect::<Result<_>>()?,
        ),
        Expression::Product(factors) => {
            let mut terms = Vec::new();
            for k in 0..factors.len() {
                let dk = left(&factors[k], var, odd)?;
                if dk.is_literal_zero() {
                    continue;
                }
                let mut fs: Vec<Expression> = factors[..k]
                    .iter()
                    .map(|f| if odd { f.clone().involute() } else { f.clone() })
                    .collect();
                fs.push(dk);
                fs.extend(factors[k + 1..].iter().cloned());
                terms.push((C64::new(1.0, 0.0), Expression::product(fs)));
            }
            Expression::sum(terms)
        }
        Expression::Even(e) => {
            let d = left(e, var, odd)?;
            wrap(d, if odd { Expression::odd } else { Expression::even })
        }
        Expression::Odd(e) => {
            let d = left(e, var, odd)?;
            wrap(d, if odd { Expression::even } else { Expression::odd })
        }
        Expression::Involute(e) => {
            let d = wrap(left(e, var, odd)?, Expression::involute);
            if odd {
                d.scale(C64::new(-1.0, 0.0))
            } else {
                d
            }
        }
        Expression::Conjugate(e) => {
            if e.contains_var(var) {
                return Err(Error::NonAlgebraic(
                    var.to_string(),
                    "conjugation of an expression that depends on the variable".into(),
                ));
            }
            Expression::zero()
        }
    })
}
