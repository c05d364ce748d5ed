use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{GeneratorSpace, GrassmannNumber};
use crate::{Error, Result, C64};

/// Parity restriction carried by every variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    OddOnly,
    Unrestricted,
}

/// Algebraic function of Grassmann-valued variables.
#[derive(Clone, PartialEq)]
pub enum Expression {
    Scalar(C64),
    Const(GrassmannNumber),
    Var(String, Restriction),
    /// Weighted sum `Σ w_k f_k`.
    Sum(Vec<(C64, Expression)>),
    /// Ordered product.
    Product(Vec<Expression>),
    Even(Box<Expression>),
    Odd(Box<Expression>),
    Involute(Box<Expression>),
    Conjugate(Box<Expression>),
}

impl Expression {
    pub fn zero() -> Self {
        Expression::Scalar(C64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Expression::Scalar(C64::new(1.0, 0.0))
    }

    pub fn odd_var(name: &str) -> Self {
        Expression::Var(name.to_string(), Restriction::OddOnly)
    }

    pub fn var(name: &str) -> Self {
        Expression::Var(name.to_string(), Restriction::Unrestricted)
    }

    pub fn constant(g: GrassmannNumber) -> Self {
        Expression::Const(g)
    }

    pub fn even(self) -> Self {
        Expression::Even(Box::new(self))
    }

    pub fn odd(self) -> Self {
        Expression::Odd(Box::new(self))
    }

    pub fn involute(self) -> Self {
        Expression::Involute(Box::new(self))
    }

    pub fn conjugate(self) -> Self {
        Expression::Conjugate(Box::new(self))
    }

    pub fn scale(self, w: C64) -> Self {
        if self.is_literal_zero() {
            return self;
        }
        Expression::Sum(vec![(w, self)])
    }

    /// Product with zero and unit factors folded away.
    pub fn product(factors: Vec<Expression>) -> Self {
        if factors.iter().any(Expression::is_literal_zero) {
            return Self::zero();
        }
        let mut kept: Vec<Expression> = factors
            .into_iter()
            .filter(|f| *f != Self::one())
            .collect();
        match kept.len() {
            0 => Self::one(),
            1 => kept.pop().unwrap(),
            _ => Expression::Product(kept),
        }
    }

    /// Weighted sum with zero terms dropped.
    pub fn sum(terms: Vec<(C64, Expression)>) -> Self {
        let kept: Vec<_> = terms
            .into_iter()
            .filter(|(w, t)| *w != C64::new(0.0, 0.0) && !t.is_literal_zero())
            .collect();
        if kept.is_empty() {
            Self::zero()
        } else {
            Expression::Sum(kept)
        }
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expression::Scalar(c) if *c == C64::new(0.0, 0.0))
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Expression::Scalar(_) | Expression::Const(_) => false,
            Expression::Var(n, _) => n == name,
            Expression::Sum(t) => t.iter().any(|(_, e)| e.contains_var(name)),
            Expression::Product(f) => f.iter().any(|e| e.contains_var(name)),
            Expression::Even(e)
            | Expression::Odd(e)
            | Expression::Involute(e)
            | Expression::Conjugate(e) => e.contains_var(name),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Expression::Scalar(_) | Expression::Const(_) | Expression::Var(..) => 0,
            Expression::Sum(t) => t.iter().map(|(_, e)| e.size()).sum(),
            Expression::Product(f) => f.iter().map(Expression::size).sum(),
            Expression::Even(e)
            | Expression::Odd(e)
            | Expression::Involute(e)
            | Expression::Conjugate(e) => e.size(),
        }
    }

    pub fn eval(&self, a: &Assignment) -> Result<GrassmannNumber> {
        let space = &a.space;
        Ok(match self {
            Expression::Scalar(c) => GrassmannNumber::scalar(space, *c),
            Expression::Const(g) => {
                if g.space() != space {
                    return Err(Error::SpaceMismatch);
                }
                g.clone()
            }
            Expression::Var(name, r) => {
                let v = a.get(name)?;
                if *r == Restriction::OddOnly && !v.is_zero() && !v.is_odd() {
                    return Err(Error::Parity(format!("odd-only variable `{name}` has a non-odd value")));
                }
                v.clone()
            }
            Expression::Sum(terms) => {
                let mut acc = GrassmannNumber::zero(space);
                for (w, t) in terms {
                    acc += &t.eval(a)?.scale(*w);
                }
                acc
            }
            Expression::Product(factors) => {
                let mut acc = GrassmannNumber::one(space);
                for f in factors {
                    acc = acc.try_mul(&f.eval(a)?)?;
                }
                acc
            }
            Expression::Even(e) => e.eval(a)?.even_part(),
            Expression::Odd(e) => e.eval(a)?.odd_part(),
            Expression::Involute(e) => e.eval(a)?.involute(),
            Expression::Conjugate(e) => e.eval(a)?.conjugate()?,
        })
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Scalar(c) => write!(f, "({},{})", c.re, c.im),
            Expression::Const(g) => write!(f, "[{g}]"),
            Expression::Var(n, _) => write!(f, "{n}"),
            Expression::Sum(t) => {
                write!(f, "(")?;
                for (k, (w, e)) in t.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    if *w == C64::new(1.0, 0.0) {
                        write!(f, "{e}")?;
                    } else {
                        write!(f, "({},{})*{e}", w.re, w.im)?;
                    }
                }
                write!(f, ")")
            }
            Expression::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|e| e.to_string()).collect();
                write!(f, "{}", parts.join("·"))
            }
            Expression::Even(e) => write!(f, "even({e})"),
            Expression::Odd(e) => write!(f, "odd({e})"),
            Expression::Involute(e) => write!(f, "bar({e})"),
            Expression::Conjugate(e) => write!(f, "conj({e})"),
        }
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression[{self}]")
    }
}

impl std::ops::Add for Expression {
    type Output = Expression;
    fn add(self, rhs: Expression) -> Expression {
        let one = C64::new(1.0, 0.0);
        Expression::sum(vec![(one, self), (one, rhs)])
    }
}

impl std::ops::Sub for Expression {
    type Output = Expression;
    fn sub(self, rhs: Expression) -> Expression {
        Expression::sum(vec![(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), rhs)])
    }
}

impl std::ops::Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Expression) -> Expression {
        let mut factors = Vec::new();
        for e in [self, rhs] {
            match e {
                Expression::Product(fs) => factors.extend(fs),
                other => factors.push(other),
            }
        }
        Expression::product(factors)
    }
}

/// Values of the variables; all share one generator space.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    space: Arc<GeneratorSpace>,
    values: BTreeMap<String, GrassmannNumber>,
}

impl Assignment {
    pub fn new(space: &Arc<GeneratorSpace>) -> Self {
        Self {
            space: Arc::clone(space),
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: GrassmannNumber) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn set(&mut self, name: &str, value: GrassmannNumber) -> Result<()> {
        if value.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&GrassmannNumber> {
        self.values
            .get(name)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))
    }

    pub fn space(&self) -> &Arc<GeneratorSpace> {
        &self.space
    }
}
