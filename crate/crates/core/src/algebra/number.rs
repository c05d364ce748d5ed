use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use super::space::{bits, product_sign, Generator, GeneratorSpace};
use crate::{Error, Result, C64};

/// Parity class of a Grassmann number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    /// Parity of a product of two pure-parity factors.
    pub fn compose(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

/// An element of the Grassmann algebra over a [`GeneratorSpace`].
///
/// Coefficients are stored once per canonically ordered monomial, which makes
/// them the completely antisymmetric n-point amplitudes. Terms are kept
/// sorted by mask with exact zeros removed, so structural equality is
/// coefficient equality.
#[derive(Clone, PartialEq)]
pub struct GrassmannNumber {
    space: Arc<GeneratorSpace>,
    terms: Vec<(u32, C64)>,
}

/// Dense scratch is used when the full monomial table is at most this many
/// times larger than the number of products being accumulated.
const DENSE_RATIO: usize = 4;

fn collect(space_len: usize, mut pairs: Vec<(u32, C64)>) -> Vec<(u32, C64)> {
    let table = 1usize << space_len.min(31);
    if space_len <= 20 && table <= DENSE_RATIO * pairs.len().max(1) {
        let mut dense = vec![C64::new(0.0, 0.0); table];
        for (m, c) in pairs {
            dense[m as usize] += c;
        }
        dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != C64::new(0.0, 0.0))
            .map(|(m, c)| (m as u32, c))
            .collect()
    } else {
        pairs.sort_by_key(|&(m, _)| m);
        let mut out: Vec<(u32, C64)> = Vec::with_capacity(pairs.len());
        for (m, c) in pairs {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| *c != C64::new(0.0, 0.0));
        out
    }
}

impl GrassmannNumber {
    pub fn zero(space: &Arc<GeneratorSpace>) -> Self {
        Self {
            space: Arc::clone(space),
            terms: Vec::new(),
        }
    }

    pub fn scalar(space: &Arc<GeneratorSpace>, c: C64) -> Self {
        Self::monomial(space, 0, c)
    }

    pub fn one(space: &Arc<GeneratorSpace>) -> Self {
        Self::scalar(space, C64::new(1.0, 0.0))
    }

    /// A single canonical monomial `c · e_mask`.
    pub fn monomial(space: &Arc<GeneratorSpace>, mask: u32, c: C64) -> Self {
        assert!(
            mask & !space.full_mask() == 0,
            "monomial mask outside the generator space"
        );
        let terms = if c == C64::new(0.0, 0.0) {
            Vec::new()
        } else {
            vec![(mask, c)]
        };
        Self {
            space: Arc::clone(space),
            terms,
        }
    }

    pub fn generator(space: &Arc<GeneratorSpace>, g: Generator) -> Result<Self> {
        let i = space.index_of(g)?;
        Ok(Self::monomial(space, 1 << i, C64::new(1.0, 0.0)))
    }

    /// The product `g_1 g_2 … g_k` of the listed generators, in list order.
    pub fn product_of(space: &Arc<GeneratorSpace>, gens: &[Generator]) -> Result<Self> {
        let mut acc = Self::one(space);
        for &g in gens {
            acc = acc.try_mul(&Self::generator(space, g)?)?;
        }
        Ok(acc)
    }

    /// Build from arbitrary `(mask, coefficient)` pairs; duplicates are summed.
    pub fn from_terms(
        space: &Arc<GeneratorSpace>,
        terms: impl IntoIterator<Item = (u32, C64)>,
    ) -> Self {
        let full = space.full_mask();
        let pairs: Vec<_> = terms
            .into_iter()
            .inspect(|(m, _)| assert!(m & !full == 0, "monomial mask outside the space"))
            .collect();
        Self {
            space: Arc::clone(space),
            terms: collect(space.len(), pairs),
        }
    }

    /// Build from a dense table indexed by mask.
    pub fn from_dense(space: &Arc<GeneratorSpace>, table: &[C64]) -> Self {
        assert_eq!(table.len(), 1usize << space.len());
        let terms = table
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != C64::new(0.0, 0.0))
            .map(|(m, c)| (m as u32, *c))
            .collect();
        Self {
            space: Arc::clone(space),
            terms,
        }
    }

    pub fn space(&self) -> &Arc<GeneratorSpace> {
        &self.space
    }

    /// Nonzero terms sorted by monomial mask.
    pub fn terms(&self) -> &[(u32, C64)] {
        &self.terms
    }

    pub fn coefficient(&self, mask: u32) -> C64 {
        match self.terms.binary_search_by_key(&mask, |&(m, _)| m) {
            Ok(i) => self.terms[i].1,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn scalar_part(&self) -> C64 {
        self.coefficient(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.terms.iter().all(|&(m, _)| m == 0)
    }

    /// Zero counts as even.
    pub fn parity(&self) -> Parity {
        let has_even = self.terms.iter().any(|(m, _)| m.count_ones() % 2 == 0);
        let has_odd = self.terms.iter().any(|(m, _)| m.count_ones() % 2 == 1);
        match (has_even, has_odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.count_ones() % 2 == 1)
    }

    pub fn same_space(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn filtered(&self, keep: impl Fn(u32) -> bool) -> Self {
        Self {
            space: Arc::clone(&self.space),
            terms: self.terms.iter().copied().filter(|&(m, _)| keep(m)).collect(),
        }
    }

    fn mapped(&self, f: impl Fn(u32, C64) -> C64) -> Self {
        Self {
            space: Arc::clone(&self.space),
            terms: self
                .terms
                .iter()
                .map(|&(m, c)| (m, f(m, c)))
                .filter(|(_, c)| *c != C64::new(0.0, 0.0))
                .collect(),
        }
    }

    pub fn even_part(&self) -> Self {
        self.filtered(|m| m.count_ones() % 2 == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filtered(|m| m.count_ones() % 2 == 1)
    }

    /// `ḡ = g⁺ − g⁻`.
    pub fn involute(&self) -> Self {
        self.mapped(|m, c| if m.count_ones() % 2 == 1 { -c } else { c })
    }

    pub fn scale(&self, s: C64) -> Self {
        self.mapped(|_, c| c * s)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                let c = a[i].1 + b[j].1;
                if c != C64::new(0.0, 0.0) {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            terms: out,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    /// Anticommuting product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let mut pairs = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(s, a) in &self.terms {
            for &(t, b) in &other.terms {
                if s & t == 0 {
                    pairs.push((s | t, a * b * product_sign(s, t)));
                }
            }
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            terms: collect(self.space.len(), pairs),
        })
    }

    /// Complex conjugation: maps every generator to its partner, conjugates
    /// coefficients and reverses the order of each product.
    pub fn conjugate(&self) -> Result<Self> {
        let mut pairs = Vec::with_capacity(self.terms.len());
        for &(m, c) in &self.terms {
            // reversed product of partners, then sorted into canonical order
            let mut seq = Vec::with_capacity(m.count_ones() as usize);
            for i in bits(m).collect::<Vec<_>>().into_iter().rev() {
                let j = self.space.conjugate_of(i).ok_or_else(|| {
                    Error::MissingConjugate(self.space.generator(i).to_string())
                })?;
                seq.push(j);
            }
            let sign = super::space::permutation_sign(&seq);
            let mask = seq.iter().fold(0u32, |acc, &j| acc | (1 << j));
            pairs.push((mask, c.conj() * sign));
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            terms: collect(self.space.len(), pairs),
        })
    }

    /// Formal left derivative with respect to the generator at bit `index`.
    pub fn left_derivative_index(&self, index: usize) -> Self {
        let bit = 1u32 << index;
        let below = bit - 1;
        let pairs = self
            .terms
            .iter()
            .filter(|(m, _)| m & bit != 0)
            .map(|&(m, c)| {
                let sign = if (m & below).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                (m & !bit, c * sign)
            })
            .collect();
        Self {
            space: Arc::clone(&self.space),
            terms: pairs,
        }
    }

    /// Formal right derivative with respect to the generator at bit `index`.
    pub fn right_derivative_index(&self, index: usize) -> Self {
        let bit = 1u32 << index;
        let above = if index >= 31 { 0 } else { u32::MAX << (index + 1) };
        let pairs = self
            .terms
            .iter()
            .filter(|(m, _)| m & bit != 0)
            .map(|&(m, c)| {
                let sign = if (m & above).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                (m & !bit, c * sign)
            })
            .collect();
        Self {
            space: Arc::clone(&self.space),
            terms: pairs,
        }
    }

    pub fn left_derivative(&self, g: Generator) -> Result<Self> {
        Ok(self.left_derivative_index(self.space.index_of(g)?))
    }

    pub fn right_derivative(&self, g: Generator) -> Result<Self> {
        Ok(self.right_derivative_index(self.space.index_of(g)?))
    }

    /// Berezin integral `∫dg_1 ∫dg_2 … ∫dg_k a` for the written list
    /// `[g_1, …, g_k]`, with `∫de_j e_j = 1`.
    ///
    /// Evaluated as formal left derivatives applied in list order, `g_1`
    /// first. For a full integration this coincides with stripping
    /// generators from the right starting with the innermost `g_k`.
    pub fn berezin_integrate(&self, gens: &[Generator]) -> Result<Self> {
        let mut seen = 0u32;
        let mut acc = self.clone();
        for &g in gens {
            let i = self.space.index_of(g)?;
            if seen & (1 << i) != 0 {
                return Err(Error::RepeatedGenerator(g.to_string()));
            }
            seen |= 1 << i;
            acc = acc.left_derivative_index(i);
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// Hilbert-Schmidt norm summed over every n-point amplitude.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.norm())
    }
}

impl fmt::Display for GrassmannNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut sorted: Vec<_> = self.terms.clone();
        sorted.sort_by_key(|&(m, _)| (m.count_ones(), m.reverse_bits()));
        let parts: Vec<String> = sorted
            .iter()
            .map(|&(m, c)| {
                format!("({:e},{:e})·{}", c.re, c.im, self.space.render_monomial(m))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for GrassmannNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrassmannNumber[{self}]")
    }
}

impl Neg for &GrassmannNumber {
    type Output = GrassmannNumber;
    fn neg(self) -> GrassmannNumber {
        self.mapped(|_, c| -c)
    }
}

impl Neg for GrassmannNumber {
    type Output = GrassmannNumber;
    fn neg(self) -> GrassmannNumber {
        -&self
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&GrassmannNumber> for &GrassmannNumber {
            type Output = GrassmannNumber;
            /// Panics when the operands live in different generator spaces.
            fn $method(self, rhs: &GrassmannNumber) -> GrassmannNumber {
                self.$checked(rhs).expect("operands share a generator space")
            }
        }
        impl $trait<GrassmannNumber> for GrassmannNumber {
            type Output = GrassmannNumber;
            fn $method(self, rhs: GrassmannNumber) -> GrassmannNumber {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&GrassmannNumber> for GrassmannNumber {
            type Output = GrassmannNumber;
            fn $method(self, rhs: &GrassmannNumber) -> GrassmannNumber {
                (&self).$method(rhs)
            }
        }
        impl $trait<GrassmannNumber> for &GrassmannNumber {
            type Output = GrassmannNumber;
            fn $method(self, rhs: GrassmannNumber) -> GrassmannNumber {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Mul<C64> for &GrassmannNumber {
    type Output = GrassmannNumber;
    fn mul(self, rhs: C64) -> GrassmannNumber {
        self.scale(rhs)
    }
}

impl Mul<C64> for GrassmannNumber {
    type Output = GrassmannNumber;
    fn mul(self, rhs: C64) -> GrassmannNumber {
        self.scale(rhs)
    }
}

impl AddAssign<&GrassmannNumber> for GrassmannNumber {
    fn add_assign(&mut self, rhs: &GrassmannNumber) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&GrassmannNumber> for GrassmannNumber {
    fn sub_assign(&mut self, rhs: &GrassmannNumber) {
        *self = &*self - rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn gen(space: &Arc<GeneratorSpace>, i: usize) -> GrassmannNumber {
        GrassmannNumber::generator(space, Generator::e(i)).unwrap()
    }

    #[test]
    fn anticommuting_generators() {
        let s = GeneratorSpace::unprimed(3);
        let (e1, e2) = (gen(&s, 1), gen(&s, 2));
        let e12 = GrassmannNumber::monomial(&s, 0b011, c(1.0));
        assert_eq!(&e1 * &e2, e12);
        assert_eq!(&e2 * &e1, -&e12);
        assert!((&e1 * &e1).is_zero());
        let one = GrassmannNumber::one(&s);
        let lhs = (&one + &e1) * (&one + &e2);
        assert_eq!(lhs, &(&(&one + &e1) + &e2) + &e12);
    }

    #[test]
    fn parity_projections() {
        let s = GeneratorSpace::unprimed(3);
        let x = GrassmannNumber::from_terms(&s, [(0, c(3.0)), (0b001, c(1.0)), (0b011, c(1.0))]);
        assert_eq!(
            x.even_part(),
            GrassmannNumber::from_terms(&s, [(0, c(3.0)), (0b011, c(1.0))])
        );
        assert_eq!(x.odd_part(), gen(&s, 1));
        assert_eq!(&x.even_part() + &x.odd_part(), x);
        let scalar = GrassmannNumber::scalar(&s, C64::new(2.0, -1.0));
        assert_eq!(scalar.even_part(), scalar);
        assert!(scalar.odd_part().is_zero());
        let e123 = GrassmannNumber::monomial(&s, 0b111, c(1.0));
        assert!(e123.even_part().is_zero());
        assert_eq!(e123.odd_part(), e123);
        assert_eq!(x.parity(), Parity::Mixed);
        assert_eq!(e123.parity(), Parity::Odd);
    }

    #[test]
    fn conjugation_reverses_products() {
        let s = GeneratorSpace::from_families(3, &[super::super::Family::Unprimed, super::super::Family::UnprimedConj]);
        let e = |i| GrassmannNumber::generator(&s, Generator::e(i)).unwrap();
        let es = |i| GrassmannNumber::generator(&s, Generator::e_conj(i)).unwrap();
        let e12 = &e(1) * &e(2);
        assert_eq!(e12.conjugate().unwrap(), &es(2) * &es(1));
        assert_eq!(e12.conjugate().unwrap(), -(&es(1) * &es(2)));
        let e123 = &e12 * &e(3);
        assert_eq!(e123.conjugate().unwrap(), -(&(&es(1) * &es(2)) * &es(3)));
        let z = GrassmannNumber::scalar(&s, C64::new(1.0, 2.0));
        assert_eq!(z.conjugate().unwrap(), GrassmannNumber::scalar(&s, C64::new(1.0, -2.0)));
        assert_eq!(e123.conjugate().unwrap().conjugate().unwrap(), e123);
        // no partner available
        let bare = GeneratorSpace::unprimed(2);
        assert!(gen(&bare, 1).conjugate().is_err());
    }

    #[test]
    fn involution() {
        let s = GeneratorSpace::unprimed(2);
        let one = GrassmannNumber::one(&s);
        assert_eq!((&one + &gen(&s, 1)).involute(), &one - &gen(&s, 1));
        let e12 = &gen(&s, 1) * &gen(&s, 2);
        assert_eq!(e12.involute(), e12);
        assert!(GrassmannNumber::zero(&s).involute().is_zero());
    }

    #[test]
    fn formal_derivatives() {
        let s = GeneratorSpace::unprimed(3);
        let (e1, e2) = (gen(&s, 1), gen(&s, 2));
        let e12 = &e1 * &e2;
        assert_eq!(e12.left_derivative(Generator::e(1)).unwrap(), e2);
        assert_eq!(e12.right_derivative(Generator::e(1)).unwrap(), -&e2);
        assert_eq!((&e2 * &e1).left_derivative(Generator::e(1)).unwrap(), -&e2);
        let free = &GrassmannNumber::scalar(&s, c(4.0)) + &(&e2 * &gen(&s, 3));
        assert!(free.left_derivative(Generator::e(1)).unwrap().is_zero());
    }

    #[test]
    fn berezin_ordering_convention() {
        let s = GeneratorSpace::unprimed(2);
        let (e1, e2) = (gen(&s, 1), gen(&s, 2));
        let one = GrassmannNumber::one(&s);
        assert_eq!(e1.berezin_integrate(&[Generator::e(1)]).unwrap(), one);
        assert!(one.berezin_integrate(&[Generator::e(1)]).unwrap().is_zero());
        let e12 = &e1 * &e2;
        // ∫de2 ∫de1 (e1 e2) = −1, ∫de1 ∫de2 (e1 e2) = +1
        assert_eq!(
            e12.berezin_integrate(&[Generator::e(2), Generator::e(1)]).unwrap(),
            -&one
        );
        assert_eq!(
            e12.berezin_integrate(&[Generator::e(1), Generator::e(2)]).unwrap(),
            one
        );
        assert!(e12
            .berezin_integrate(&[Generator::e(1), Generator::e(1)])
            .is_err());
    }

    #[test]
    fn norms() {
        let s = GeneratorSpace::unprimed(2);
        let x = &GrassmannNumber::one(&s) + &(&gen(&s, 1) * &gen(&s, 2));
        assert!((x.norm_sqr() - 2.0).abs() < 1e-15);
        assert_eq!(GrassmannNumber::zero(&s).norm(), 0.0);
        assert_eq!(x.distance(&x).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let a = GrassmannNumber::one(&GeneratorSpace::unprimed(2));
        let b = GrassmannNumber::one(&GeneratorSpace::unprimed(3));
        assert_eq!(a.try_mul(&b), Err(Error::SpaceMismatch));
    }

    #[test]
    fn display_renders_sorted_monomials() {
        let s = GeneratorSpace::unprimed(3);
        let x = GrassmannNumber::from_terms(&s, [(0b101, c(2.0)), (0, c(1.0))]);
        assert_eq!(x.to_string(), "(1e0,0e0)·1 + (2e0,0e0)·e1e3");
    }
}
