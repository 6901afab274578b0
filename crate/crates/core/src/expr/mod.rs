//! Immutable symbolic expressions in rational normal form.
//!
//! An [`Expr`] is stored as a single fraction `num / (p1^m1 * ... * pk^mk)`
//! where `num` and the `pi` are polynomials over the rationals in the
//! kernel's [`Atom`]s and exponential kernels. Denominator factors are monic
//! and kept pairwise coprime, and no factor divides the numerator. A
//! difference of equal rational functions therefore normalizes to zero,
//! which makes zero-testing exact. Structural equality can still
//! distinguish a denominator written as `(a-b)*(a+b)` from `a^2-b^2`;
//! compare through [`Expr::is_zero`] of the difference when that matters.

pub mod atom;
mod calculus;
pub mod collect;
mod display;
pub mod parse;
pub mod poly;
mod raw;

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

pub use atom::{Arg, Atom, Direction, JetVar, NDep, Symbol, UnknownApp, UnknownFn};
pub use collect::{collect, CollectKey};
pub use parse::{parse, parse_with, ParseContext, ParseError};
pub use poly::{Monomial, Poly, Q};
pub use calculus::q_to_f64;

use raw::{poly_div_exact, poly_gcd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("not polynomial in the collection variables: {0}")]
    NotPolynomialInVars(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Frac {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Frac>);

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Display::fmt(self, f)
    }
}

fn expand(factors: &[(Poly, u32)]) -> Poly {
    let mut p = Poly::one();
    for (f, m) in factors {
        p = p.mul(&f.pow(*m));
    }
    p
}

/// A non-trivial common factor of two distinct monic polynomials.
fn common_factor(p: &Poly, q: &Poly) -> Option<Poly> {
    if p.is_linear() && q.is_linear() {
        return None;
    }
    if p.is_linear() {
        return poly_div_exact(q, p).map(|_| p.clone());
    }
    if q.is_linear() {
        return poly_div_exact(p, q).map(|_| q.clone());
    }
    let g = poly_gcd(p, q);
    if g.as_constant().is_some() {
        None
    } else {
        Some(g)
    }
}

/// Refines two factor lists onto a common pairwise-coprime base.
struct Base {
    items: Vec<(Poly, u32, u32)>,
    /// `original_den_a = scale_a * prod(p^ea)`, likewise for b.
    scale_a: Q,
    scale_b: Q,
}

impl Base {
    fn new(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> Base {
        let mut base = Base { items: Vec::new(), scale_a: Q::one(), scale_b: Q::one() };
        for (p, m) in a {
            base.insert(p.clone(), *m, 0);
        }
        for (p, m) in b {
            base.insert(p.clone(), 0, *m);
        }
        base
    }

    fn insert(&mut self, p: Poly, ea: u32, eb: u32) {
        if ea == 0 && eb == 0 || p.as_constant().is_some() {
            return;
        }
        if let Some(it) = self.items.iter_mut().find(|it| it.0 == p) {
            it.1 += ea;
            it.2 += eb;
            return;
        }
        for i in 0..self.items.len() {
            if let Some(g) = common_factor(&self.items[i].0, &p) {
                let (q, xa, xb) = self.items.remove(i);
                let mut q_rest = poly_div_exact(&q, &g).expect("gcd divides");
                let lq = q_rest.make_monic();
                self.scale_a *= pow_q(&lq, xa);
                self.scale_b *= pow_q(&lq, xb);
                let mut p_rest = poly_div_exact(&p, &g).expect("gcd divides");
                let lp = p_rest.make_monic();
                self.scale_a *= pow_q(&lp, ea);
                self.scale_b *= pow_q(&lp, eb);
                self.insert(g.clone(), xa, xb);
                self.insert(q_rest, xa, xb);
                self.insert(g, ea, eb);
                self.insert(p_rest, ea, eb);
                return;
            }
        }
        self.items.push((p, ea, eb));
    }
}

fn pow_q(q: &Q, k: u32) -> Q {
    num_traits::pow::pow(q.clone(), k as usize)
}

impl Expr {
    fn from_frac(num: Poly, den: Vec<(Poly, u32)>) -> Expr {
        Expr(Arc::new(Frac { num, den }))
    }

    pub fn zero() -> Expr {
        Expr::from_frac(Poly::zero(), Vec::new())
    }

    pub fn one() -> Expr {
        Expr::from_poly(Poly::one())
    }

    pub fn integer(i: i64) -> Expr {
        Expr::rational(Q::from_integer(BigInt::from(i)))
    }

    pub fn rational(q: Q) -> Expr {
        Expr::from_poly(Poly::constant(q))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::rational(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::from_frac(p, Vec::new())
    }

    pub fn atom(a: impl Into<Atom>) -> Expr {
        Expr::from_poly(Poly::atom(a.into()))
    }

    pub fn sym(s: Symbol) -> Expr {
        Expr::atom(Atom::Sym(s))
    }

    pub fn t() -> Expr {
        Expr::sym(Symbol::T)
    }

    pub fn x() -> Expr {
        Expr::sym(Symbol::X)
    }

    pub fn y() -> Expr {
        Expr::sym(Symbol::Y)
    }

    pub fn n() -> Expr {
        Expr::sym(Symbol::N)
    }

    pub fn alt() -> Expr {
        Expr::atom(Atom::Alt)
    }

    pub fn coef(i: u32) -> Expr {
        Expr::atom(Atom::Coef(i))
    }

    pub fn jet(j: JetVar) -> Expr {
        Expr::atom(Atom::Jet(j))
    }

    /// `u_{n+k}`.
    pub fn u(k: i32) -> Expr {
        Expr::jet(JetVar::u(k))
    }

    pub fn unknown(app: UnknownApp) -> Expr {
        Expr::atom(Atom::Unknown(app))
    }

    pub fn exp(arg: &Expr) -> Expr {
        Expr::from_poly(Poly::term(Monomial::exp_of(arg.clone()), Q::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.den.is_empty() && self.0.num == Poly::one()
    }

    pub fn as_rational(&self) -> Option<Q> {
        if self.0.den.is_empty() {
            self.0.num.as_constant()
        } else {
            None
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.0.num
    }

    /// Monic, pairwise coprime denominator factors with multiplicities.
    pub fn denominator_factors(&self) -> &[(Poly, u32)] {
        &self.0.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_empty()
    }

    pub fn denominator(&self) -> Poly {
        expand(&self.0.den)
    }

    /// All atoms occurring anywhere, including inside kernel arguments.
    pub fn atoms(&self) -> std::collections::BTreeSet<Atom> {
        let mut s = std::collections::BTreeSet::new();
        let visit = |p: &Poly, s: &mut std::collections::BTreeSet<Atom>| {
            for (m, _) in p.terms() {
                for (a, _) in m.atoms() {
                    s.insert(a.clone());
                }
                if let Some(e) = m.exp_arg() {
                    s.extend(e.atoms());
                }
            }
        };
        visit(&self.0.num, &mut s);
        for (p, _) in &self.0.den {
            visit(p, &mut s);
        }
        s
    }

    pub fn contains(&self, pred: &dyn Fn(&Atom) -> bool) -> bool {
        self.atoms().iter().any(pred)
    }

    pub fn jets(&self) -> std::collections::BTreeSet<JetVar> {
        self.atoms().into_iter().filter_map(|a| a.as_jet()).collect()
    }

    pub fn has_kernels(&self) -> bool {
        self.0.num.has_exp() || self.0.den.iter().any(|(p, _)| p.has_exp())
    }

    /// Builds a normalized fraction from a numerator and monic denominator
    /// factors, cancelling common factors.
    fn build(num: Poly, den: Vec<(Poly, u32)>) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        let mut num = num;
        let mut den: Vec<(Poly, u32)> = den.into_iter().filter(|(_, m)| *m > 0).collect();
        let mut i = 0;
        'outer: while i < den.len() {
            while den[i].1 > 0 {
                if let Some(q) = poly_div_exact(&num, &den[i].0) {
                    num = q;
                    den[i].1 -= 1;
                    continue;
                }
                if !den[i].0.is_linear() {
                    let g = poly_gcd(&num, &den[i].0);
                    if g.as_constant().is_none() && g != den[i].0 {
                        let (p, m) = den.remove(i);
                        let mut rest = poly_div_exact(&p, &g).expect("gcd divides");
                        let lc = rest.make_monic();
                        num = num.scale(&pow_q(&lc, m).recip());
                        for f in [g, rest] {
                            if f.as_constant().is_some() {
                                continue;
                            }
                            match den.iter_mut().find(|(q, _)| *q == f) {
                                Some(e) => e.1 += m,
                                None => den.push((f, m)),
                            }
                        }
                        i = 0;
                        continue 'outer;
                    }
                }
                break;
            }
            i += 1;
        }
        den.retain(|(_, m)| *m > 0);
        den.sort();
        Expr::from_frac(num, den)
    }

    fn add_impl(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b) = (&*self.0, &*other.0);
        if a.den.is_empty() && b.den.is_empty() {
            return Expr::from_poly(a.num.add(&b.num));
        }
        if a.den == b.den {
            return Expr::build(a.num.add(&b.num), a.den.clone());
        }
        if b.den.is_empty() {
            return Expr::build(a.num.add(&b.num.mul(&expand(&a.den))), a.den.clone());
        }
        if a.den.is_empty() {
            return Expr::build(b.num.add(&a.num.mul(&expand(&b.den))), b.den.clone());
        }
        let base = Base::new(&a.den, &b.den);
        let mut ca = Poly::constant(base.scale_a.recip());
        let mut cb = Poly::constant(base.scale_b.recip());
        let mut den = Vec::new();
        for (p, ea, eb) in &base.items {
            let l = (*ea).max(*eb);
            if l > *ea {
                ca = ca.mul(&p.pow(l - ea));
            }
            if l > *eb {
                cb = cb.mul(&p.pow(l - eb));
            }
            den.push((p.clone(), l));
        }
        let num = a.num.mul(&ca).add(&b.num.mul(&cb));
        Expr::build(num, den)
    }

    fn mul_impl(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        let (a, b) = (&*self.0, &*other.0);
        if a.den.is_empty() && b.den.is_empty() {
            return Expr::from_poly(a.num.mul(&b.num));
        }
        if let Some(c) = other.as_rational() {
            return Expr::from_frac(a.num.scale(&c), a.den.clone());
        }
        if let Some(c) = self.as_rational() {
            return Expr::from_frac(b.num.scale(&c), b.den.clone());
        }
        let base = Base::new(&a.den, &b.den);
        let scale = (base.scale_a * base.scale_b).recip();
        let den = base.items.into_iter().map(|(p, ea, eb)| (p, ea + eb)).collect();
        Expr::build(a.num.mul(&b.num).scale(&scale), den)
    }

    pub fn scale(&self, q: &Q) -> Expr {
        if q.is_zero() {
            return Expr::zero();
        }
        Expr::from_frac(self.0.num.scale(q), self.0.den.clone())
    }

    pub fn inv(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let mut new_num = expand(&self.0.den);
        let mut n = self.0.num.clone();
        let (n0, n1) = n.split_alt();
        if !n1.is_zero() {
            let alt = Poly::atom(Atom::Alt);
            let conj = n0.sub(&n1.mul(&alt));
            n = n0.mul(&n0).sub(&n1.mul(&n1));
            if n.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            new_num = new_num.mul(&conj);
        }
        if n.terms().all(|(m, _)| m.exp_arg().is_some()) {
            let e = n.leading().unwrap().0.exp_arg().unwrap().clone();
            let m = Monomial::exp_of(-&e);
            n = n.mul_monomial(&m, &Q::one());
            new_num = new_num.mul_monomial(&m, &Q::one());
        }
        let mut content: Vec<(Atom, u32)> = Vec::new();
        if let Some((first, _)) = n.terms().next() {
            for (a, _) in first.atoms() {
                let k = n.terms().map(|(m, _)| m.degree_of(a)).min().unwrap_or(0);
                if k > 0 {
                    content.push((a.clone(), k));
                }
            }
        }
        if !content.is_empty() {
            n = n.map_monomials(|m| {
                let mut atoms = m.atoms().to_vec();
                for (a, k) in &content {
                    let i = atoms.iter().position(|(b, _)| b == a).unwrap();
                    atoms[i].1 -= k;
                }
                atoms.retain(|(_, k)| *k > 0);
                let mut out = Monomial::from_atoms(atoms);
                if let Some(e) = m.exp_arg() {
                    out = out.mul(&Monomial::exp_of(e.clone()));
                }
                out
            });
        }
        let lc = n.make_monic();
        new_num = new_num.scale(&lc.recip());
        let mut den: Vec<(Poly, u32)> =
            content.into_iter().map(|(a, k)| (Poly::atom(a), k)).collect();
        if n.as_constant().is_none() {
            den.push((n, 1));
        }
        Ok(Expr::build(new_num, den))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, k: i64) -> Result<Expr, ExprError> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// Numerator with its rational content removed and the leading
    /// coefficient made positive. Two expressions that differ by a non-zero
    /// rational factor (or by a denominator) have equal primitive numerators.
    pub fn primitive_numerator(&self) -> Poly {
        let mut p = self.0.num.clone();
        if p.is_zero() {
            return p;
        }
        p.make_monic();
        p
    }

    /// True when `self = c * other` for some non-zero rational `c`.
    pub fn is_rational_multiple_of(&self, other: &Expr) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        if self.0.den == other.0.den {
            return self.primitive_numerator() == other.primitive_numerator();
        }
        self.checked_div(other).ok().and_then(|q| q.as_rational()).is_some()
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Self {
        Expr::integer(i)
    }
}

impl From<Q> for Expr {
    fn from(q: Q) -> Self {
        Expr::rational(q)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: &'b Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl<'b> $tr<&'b Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &'b Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_impl(b));
binop!(Sub, sub, |a, b| a.add_impl(&-b));
binop!(Mul, mul, |a, b| a.mul_impl(b));

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_frac(self.0.num.neg(), self.0.den.clone())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::one(), |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_to_one() {
        let d = Expr::u(1) - Expr::u(-1);
        let e = &d * &d.inv().unwrap();
        assert!(e.is_one());
    }

    #[test]
    fn exp_additivity() {
        let a = Expr::u(-1) - Expr::u(0);
        assert!((Expr::exp(&a) * Expr::exp(&-&a)).is_one());
        assert_eq!(Expr::exp(&a).inv().unwrap(), Expr::exp(&-&a));
    }

    #[test]
    fn alt_inverse_is_itself() {
        assert_eq!(Expr::alt().inv().unwrap(), Expr::alt());
        let e = Expr::one() + Expr::alt();
        assert_eq!(e.inv(), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn common_denominator_sum() {
        let a = Expr::u(0).inv().unwrap();
        let b = Expr::u(1).inv().unwrap();
        let s = &a + &b;
        let expect = (Expr::u(0) + Expr::u(1)).checked_div(&(Expr::u(0) * Expr::u(1))).unwrap();
        assert_eq!(s, expect);
        assert!((s - expect).is_zero());
    }

    #[test]
    fn nonlinear_denominator_refined() {
        // 1/(x^2-y^2) + 1/(x+y) = (1 + x - y)/(x^2 - y^2)
        let x = Expr::u(0);
        let y = Expr::u(1);
        let d = &x * &x - &y * &y;
        let s = d.inv().unwrap() + (&x + &y).inv().unwrap();
        let expect = (Expr::one() + &x - &y).checked_div(&d).unwrap();
        assert!((&s - &expect).is_zero());
        assert!(s.is_rational_multiple_of(&expect));
        // and the sum minus its parts vanishes
        assert!((s - d.inv().unwrap() - (&x + &y).inv().unwrap()).is_zero());
        // (x^2 - y^2)/(x + y) = x - y
        assert_eq!(d.checked_div(&(&x + &y)).unwrap(), &x - &y);
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(Expr::zero().inv(), Err(ExprError::DivisionByZero));
    }
}
