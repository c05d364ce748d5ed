use std::sync::Arc;

use rand::Rng;

use super::expr::{Expression, Restriction};
use crate::algebra::random::{complex_normal, random_number, Sector};
use crate::algebra::GeneratorSpace;

/// Random algebraic expression (no conjugation nodes) over `vars`.
pub fn random_expression<R: Rng + ?Sized>(
    rng: &mut R,
    vars: &[(&str, Restriction)],
    space: &Arc<GeneratorSpace>,
    depth: usize,
) -> Expression {
    let leaf = depth == 0 || rng.random::<f64>() < 0.25;
    if leaf {
        return match rng.random_range(0..4) {
            0 | 1 => {
                let (name, r) = vars[rng.random_range(0..vars.len())];
                Expression::Var(name.to_string(), r)
            }
            2 => Expression::constant(random_number(space, Sector::Any, 0.4, rng)),
            _ => Expression::Scalar(complex_normal(rng)),
        };
    }
    let sub = |rng: &mut R| random_expression(rng, vars, space, depth - 1);
    match rng.random_range(0..6) {
        0 => {
            let a = sub(rng);
            let b = sub(rng);
            Expression::sum(vec![(complex_normal(rng), a), (complex_normal(rng), b)])
        }
        1 | 2 => {
            let n = rng.random_range(2..=3);
            let factors = (0..n).map(|_| sub(rng)).collect();
            Expression::product(factors)
        }
        3 => sub(rng).even(),
        4 => sub(rng).odd(),
        _ => sub(rng).involute(),
    }
}
