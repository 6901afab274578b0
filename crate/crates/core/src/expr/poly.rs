//! Sparse multivariate polynomials over the rationals.
//!
//! Monomials are power products of [`Atom`]s times an optional exponential
//! kernel `exp(arg)`. Multiplication applies the two built-in relations of
//! the kernel: `alt^2 = 1` and `exp(a)*exp(b) = exp(a+b)`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::atom::Atom;
use super::Expr;

pub type Q = BigRational;

pub(crate) fn q_int(i: i64) -> Q {
    Q::from_integer(BigInt::from(i))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    pub(crate) atoms: Vec<(Atom, u32)>,
    pub(crate) exp: Option<Expr>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(a: Atom) -> Self {
        Monomial { atoms: vec![(a, 1)], exp: None }
    }

    pub fn from_atoms(mut atoms: Vec<(Atom, u32)>) -> Self {
        atoms.sort();
        let mut merged: Vec<(Atom, u32)> = Vec::with_capacity(atoms.len());
        for (a, k) in atoms {
            match merged.last_mut() {
                Some((b, j)) if *b == a => *j += k,
                _ => merged.push((a, k)),
            }
        }
        let mut m = Monomial { atoms: merged, exp: None };
        m.reduce_alt();
        m
    }

    pub(crate) fn exp_of(arg: Expr) -> Self {
        if arg.is_zero() {
            Monomial::one()
        } else {
            Monomial { atoms: Vec::new(), exp: Some(arg) }
        }
    }

    pub fn is_one(&self) -> bool {
        self.atoms.is_empty() && self.exp.is_none()
    }

    pub fn atoms(&self) -> &[(Atom, u32)] {
        &self.atoms
    }

    pub fn exp_arg(&self) -> Option<&Expr> {
        self.exp.as_ref()
    }

    pub fn degree_of(&self, a: &Atom) -> u32 {
        self.atoms
            .binary_search_by(|(b, _)| b.cmp(a))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.atoms.iter().map(|(_, k)| *k).sum()
    }

    fn reduce_alt(&mut self) {
        if let Some(i) = self.atoms.iter().position(|(a, _)| *a == Atom::Alt) {
            if self.atoms[i].1.is_multiple_of(2) {
                self.atoms.remove(i);
            } else {
                self.atoms[i].1 = 1;
            }
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut atoms = Vec::with_capacity(self.atoms.len() + other.atoms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() && j < other.atoms.len() {
            let (a, ka) = &self.atoms[i];
            let (b, kb) = &other.atoms[j];
            match a.cmp(b) {
                std::cmp::Ordering::Less => {
                    atoms.push((a.clone(), *ka));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    atoms.push((b.clone(), *kb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    atoms.push((a.clone(), ka + kb));
                    i += 1;
                    j += 1;
                }
            }
        }
        atoms.extend_from_slice(&self.atoms[i..]);
        atoms.extend_from_slice(&other.atoms[j..]);
        let exp = match (&self.exp, &other.exp) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => {
                let s = a + b;
                if s.is_zero() {
                    None
                } else {
                    Some(s)
                }
            }
        };
        let mut m = Monomial { atoms, exp };
        m.reduce_alt();
        m
    }

    /// Removes one power of `a`; returns the previous exponent.
    pub(crate) fn without_one(&self, a: &Atom) -> (u32, Monomial) {
        let mut m = self.clone();
        match m.atoms.binary_search_by(|(b, _)| b.cmp(a)) {
            Ok(i) => {
                let k = m.atoms[i].1;
                if k == 1 {
                    m.atoms.remove(i);
                } else {
                    m.atoms[i].1 -= 1;
                }
                (k, m)
            }
            Err(_) => (0, m),
        }
    }

    /// Splits into the part built from atoms satisfying `pred` and the rest.
    pub(crate) fn partition(&self, pred: impl Fn(&Atom) -> bool) -> (Vec<(Atom, u32)>, Monomial) {
        let mut hit = Vec::new();
        let mut rest = Monomial { atoms: Vec::new(), exp: self.exp.clone() };
        for (a, k) in &self.atoms {
            if pred(a) {
                hit.push((a.clone(), *k));
            } else {
                rest.atoms.push((a.clone(), *k));
            }
        }
        (hit, rest)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn atom(a: Atom) -> Self {
        Poly::term(Monomial::atom(a), Q::one())
    }

    pub fn term(m: Monomial, c: Q) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Q)> {
        self.terms.into_iter()
    }

    /// Greatest term in storage order.
    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut r = big.clone();
        r.add_assign(small);
        r
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }

    pub fn scale(&self, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, k: &Q) -> Poly {
        let mut r = Poly::zero();
        for (n, c) in &self.terms {
            r.add_term(n.mul(m), c * k);
        }
        r
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                r.add_term(m.mul(n), c * d);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in &m.atoms {
                s.insert(a.clone());
            }
        }
        s
    }

    pub fn has_exp(&self) -> bool {
        self.terms.keys().any(|m| m.exp.is_some())
    }

    pub fn contains_atom(&self, pred: &dyn Fn(&Atom) -> bool) -> bool {
        self.terms.keys().any(|m| m.atoms.iter().any(|(a, _)| pred(a)))
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.terms.keys().map(|m| m.degree_of(a)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Formal partial derivative with respect to an atom, ignoring any
    /// functional dependence carried by unknowns or kernels.
    pub fn partial(&self, a: &Atom) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let (k, rest) = m.without_one(a);
            if k > 0 {
                r.add_term(rest, c * q_int(k as i64));
            }
        }
        r
    }

    /// Groups terms by their exponential kernel.
    pub fn exp_groups(&self) -> BTreeMap<Option<Expr>, Poly> {
        let mut g: BTreeMap<Option<Expr>, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            g.entry(m.exp.clone()).or_default().add_term(m.clone(), c.clone());
        }
        g
    }

    /// `(part without alt, coefficient of alt)`.
    pub fn split_alt(&self) -> (Poly, Poly) {
        let mut p0 = Poly::zero();
        let mut p1 = Poly::zero();
        for (m, c) in &self.terms {
            let (k, rest) = m.without_one(&Atom::Alt);
            if k > 0 {
                p1.add_term(rest, c.clone());
            } else {
                p0.add_term(m.clone(), c.clone());
            }
        }
        (p0, p1)
    }

    /// Divides by the leading coefficient; returns the coefficient.
    pub fn make_monic(&mut self) -> Q {
        let lc = match self.leading() {
            Some((_, c)) => c.clone(),
            None => return Q::one(),
        };
        if !lc.is_one() {
            let inv = lc.recip();
            for c in self.terms.values_mut() {
                *c *= &inv;
            }
        }
        lc
    }

    /// True when every term has degree at most one and no kernel; such a
    /// non-constant polynomial is irreducible.
    pub fn is_linear(&self) -> bool {
        self.terms.keys().all(|m| m.exp.is_none() && m.total_degree() <= 1)
    }

    /// Rational content made positive: the gcd of numerators over the lcm of
    /// denominators.
    pub fn rational_content(&self) -> Q {
        use num_integer::Integer;
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        if g.is_zero() {
            return Q::one();
        }
        Q::new(g.abs(), l)
    }

    pub(crate) fn map_monomials(&self, f: impl Fn(&Monomial) -> Monomial) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            r.add_term(f(m), c.clone());
        }
        r
    }
}
