//! Dense-exponent polynomials used for exact division and gcd.
//!
//! [`Poly`] values are mapped into a plain commutative polynomial ring in
//! which `alt` and each distinct exponential kernel are ordinary variables,
//! so the textbook algorithms apply (lex order, primitive PRS).

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::atom::Atom;
use super::poly::{Monomial, Poly, Q};
use super::Expr;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum VarKey {
    Atom(Atom),
    Exp(Expr),
}

#[derive(Default)]
pub(crate) struct VarMap {
    keys: Vec<VarKey>,
    index: BTreeMap<VarKey, usize>,
}

impl VarMap {
    fn idx(&mut self, k: VarKey) -> usize {
        if let Some(i) = self.index.get(&k) {
            return *i;
        }
        let i = self.keys.len();
        self.keys.push(k.clone());
        self.index.insert(k, i);
        i
    }

    pub(crate) fn register(&mut self, p: &Poly) {
        for (m, _) in p.terms() {
            for (a, _) in m.atoms() {
                self.idx(VarKey::Atom(a.clone()));
            }
            if let Some(e) = m.exp_arg() {
                self.idx(VarKey::Exp(e.clone()));
            }
        }
    }

    pub(crate) fn to_raw(&self, p: &Poly) -> RawPoly {
        let n = self.keys.len();
        let mut r = RawPoly { terms: BTreeMap::new() };
        for (m, c) in p.terms() {
            let mut e = vec![0u32; n];
            for (a, k) in m.atoms() {
                e[self.index[&VarKey::Atom(a.clone())]] = *k;
            }
            if let Some(x) = m.exp_arg() {
                e[self.index[&VarKey::Exp(x.clone())]] = 1;
            }
            r.terms.insert(e, c.clone());
        }
        r
    }

    pub(crate) fn lift(&self, r: &RawPoly) -> Poly {
        let mut p = Poly::zero();
        for (e, c) in &r.terms {
            let mut atoms = Vec::new();
            let mut m = Monomial::one();
            for (i, k) in e.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                match &self.keys[i] {
                    VarKey::Atom(a) => atoms.push((a.clone(), *k)),
                    VarKey::Exp(x) => {
                        let arg = x * &Expr::integer(*k as i64);
                        m = m.mul(&Monomial::exp_of(arg));
                    }
                }
            }
            p.add_term(Monomial::from_atoms(atoms).mul(&m), c.clone());
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct RawPoly {
    terms: BTreeMap<Vec<u32>, Q>,
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

impl RawPoly {
    fn zero() -> Self {
        RawPoly { terms: BTreeMap::new() }
    }

    fn constant(n: usize, c: Q) -> Self {
        let mut r = RawPoly::zero();
        if !c.is_zero() {
            r.terms.insert(vec![0; n], c);
        }
        r
    }

    fn nvars(&self) -> usize {
        self.terms.keys().next().map(|k| k.len()).unwrap_or(0)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|k| *k == 0)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
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

    fn sub_scaled_shifted(&mut self, d: &RawPoly, shift: &[u32], k: &Q) {
        for (e, c) in &d.terms {
            let ee: Vec<u32> = e.iter().zip(shift).map(|(a, b)| a + b).collect();
            self.add_term(ee, -(c * k));
        }
    }

    fn mul(&self, o: &RawPoly) -> RawPoly {
        let mut r = RawPoly::zero();
        for (a, c) in &self.terms {
            for (b, d) in &o.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                r.add_term(e, c * d);
            }
        }
        r
    }

    fn sub(&self, o: &RawPoly) -> RawPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), -c);
        }
        r
    }

    fn leading(&self) -> (&Vec<u32>, &Q) {
        self.terms.iter().next_back().expect("nonzero polynomial")
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    pub(crate) fn div_exact(&self, d: &RawPoly) -> Option<RawPoly> {
        assert!(!d.is_zero());
        let (ld, lcd) = d.leading();
        let (ld, lcd) = (ld.clone(), lcd.clone());
        let mut r = self.clone();
        let mut q = RawPoly::zero();
        while !r.is_zero() {
            let (lr, lcr) = r.leading();
            if !divides(&ld, lr) {
                return None;
            }
            let shift: Vec<u32> = lr.iter().zip(&ld).map(|(a, b)| a - b).collect();
            let k = lcr / &lcd;
            r.sub_scaled_shifted(d, &shift, &k);
            q.add_term(shift, k);
        }
        Some(q)
    }

    fn degree(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    fn coeffs(&self, v: usize) -> Vec<RawPoly> {
        let d = self.degree(v) as usize;
        let mut out = vec![RawPoly::zero(); d + 1];
        for (e, c) in &self.terms {
            let mut ee = e.clone();
            let k = ee[v] as usize;
            ee[v] = 0;
            out[k].add_term(ee, c.clone());
        }
        out
    }

    /// Coefficients of `self` as a polynomial in the variables `vars`.
    fn coeffs_in(&self, vars: &[usize]) -> Vec<RawPoly> {
        let mut groups: BTreeMap<Vec<u32>, RawPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let key: Vec<u32> = vars.iter().map(|&v| e[v]).collect();
            let mut ee = e.clone();
            for &v in vars {
                ee[v] = 0;
            }
            groups.entry(key).or_insert_with(RawPoly::zero).add_term(ee, c.clone());
        }
        let mut out: Vec<RawPoly> = groups.into_values().collect();
        out.sort_by_key(|p| p.terms.len());
        out
    }

    fn times_var_pow(&self, v: usize, k: u32) -> RawPoly {
        let mut r = RawPoly::zero();
        for (e, c) in &self.terms {
            let mut ee = e.clone();
            ee[v] += k;
            r.terms.insert(ee, c.clone());
        }
        r
    }

    fn monic(mut self) -> RawPoly {
        if self.is_zero() {
            return self;
        }
        let lc = self.leading().1.clone();
        for c in self.terms.values_mut() {
            *c /= &lc;
        }
        self
    }

    fn content(&self, v: usize) -> RawPoly {
        let n = self.nvars();
        let mut g = RawPoly::zero();
        for c in self.coeffs(v) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_constant() {
                return RawPoly::constant(n, Q::one());
            }
        }
        g
    }

    fn prem(&self, b: &RawPoly, v: usize) -> RawPoly {
        let db = b.degree(v);
        let lcb = b.coeffs(v).pop().unwrap();
        let mut r = self.clone();
        while !r.is_zero() && r.degree(v) >= db {
            let dr = r.degree(v);
            let lcr = r.coeffs(v).pop().unwrap();
            r = lcb.mul(&r).sub(&lcr.mul(b).times_var_pow(v, dr - db));
        }
        r
    }
}

/// Monic greatest common divisor.
pub(crate) fn gcd(a: &RawPoly, b: &RawPoly) -> RawPoly {
    if a.is_zero() {
        return b.clone().monic();
    }
    if b.is_zero() {
        return a.clone().monic();
    }
    let n = a.nvars().max(b.nvars());
    if a.is_constant() || b.is_constant() {
        return RawPoly::constant(n, Q::one());
    }
    // A variable present in only one argument, or one along which the images
    // at a generic point are coprime, cannot occur in the gcd.
    let only = |p: &RawPoly, q: &RawPoly| -> Vec<usize> { (0..n).filter(|&v| p.degree(v) > 0 && q.degree(v) == 0).collect() };
    for (p, q) in [(a, b), (b, a)] {
        let extra = only(p, q);
        if !extra.is_empty() {
            // Any common factor is free of `extra`, so it divides every
            // coefficient of `p` in those variables.
            let mut g = q.clone();
            for c in p.coeffs_in(&extra) {
                g = gcd(&g, &c);
                if g.is_constant() {
                    break;
                }
            }
            return g.monic();
        }
    }
    for v in 0..n {
        if a.degree(v) > 0 && coprime_along(a, b, v) {
            return gcd(&a.content(v), &b.content(v));
        }
    }
    let v = (0..n).find(|&v| a.degree(v) > 0 || b.degree(v) > 0).unwrap();
    let (da, db) = (a.degree(v), b.degree(v));
    if da == 0 {
        return gcd(a, &b.content(v));
    }
    if db == 0 {
        return gcd(&a.content(v), b);
    }
    let ca = a.content(v);
    let cb = b.content(v);
    let c = gcd(&ca, &cb);
    let mut p = a.div_exact(&ca).unwrap();
    let mut q = b.div_exact(&cb).unwrap();
    if p.degree(v) < q.degree(v) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = p.prem(&q, v);
        if r.is_zero() {
            break;
        }
        if r.degree(v) == 0 {
            q = RawPoly::constant(n, Q::one());
            break;
        }
        p = q;
        let cr = r.content(v);
        q = r.div_exact(&cr).unwrap();
    }
    let cq = q.content(v);
    let q = q.div_exact(&cq).unwrap();
    q.mul(&c).monic()
}

type Univariate = Vec<Q>;

fn trim(mut p: Univariate) -> Univariate {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn urem(a: &Univariate, b: &Univariate) -> Univariate {
    let mut r = a.clone();
    let lb = b.last().unwrap();
    while r.len() >= b.len() {
        let k = r.last().unwrap() / lb;
        let off = r.len() - b.len();
        for (i, c) in b.iter().enumerate() {
            r[off + i] -= &k * c;
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn ugcd_degree(a: Univariate, b: Univariate) -> usize {
    let (mut p, mut q) = (a, b);
    while !q.is_empty() {
        let r = urem(&p, &q);
        p = q;
        q = r;
    }
    p.len().saturating_sub(1)
}

/// Image of `p` as a polynomial in variable `v`, the others evaluated at `pt`.
fn specialize(p: &RawPoly, v: usize, pt: &[Q]) -> Univariate {
    let mut out = vec![Q::zero(); p.degree(v) as usize + 1];
    for (e, c) in &p.terms {
        let mut term = c.clone();
        for (i, k) in e.iter().enumerate() {
            if i != v && *k > 0 {
                term *= num_traits::pow(pt[i].clone(), *k as usize);
            }
        }
        out[e[v] as usize] += term;
    }
    out
}

/// True when the gcd of `a` and `b` provably has degree zero in `v`: at a
/// point where neither leading coefficient vanishes, the degree of the image
/// gcd bounds the true one.
fn coprime_along(a: &RawPoly, b: &RawPoly, v: usize) -> bool {
    let n = a.nvars();
    for attempt in 0..3i64 {
        let pt: Vec<Q> = (0..n).map(|i| Q::from_integer(num_bigint::BigInt::from((i as i64 * 7 + attempt * 13) % 17 + 2))).collect();
        let (ia, ib) = (specialize(a, v, &pt), specialize(b, v, &pt));
        if ia.last().unwrap().is_zero() || ib.last().unwrap().is_zero() {
            continue;
        }
        return ugcd_degree(ia, ib) == 0;
    }
    false
}

/// Exact division of kernel polynomials.
pub(crate) fn poly_div_exact(a: &Poly, d: &Poly) -> Option<Poly> {
    let mut vm = VarMap::default();
    vm.register(a);
    vm.register(d);
    let ra = vm.to_raw(a);
    let rd = vm.to_raw(d);
    ra.div_exact(&rd).map(|q| vm.lift(&q))
}

/// Greatest common divisor of kernel polynomials, made monic.
pub(crate) fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let mut vm = VarMap::default();
    vm.register(a);
    vm.register(b);
    let g = gcd(&vm.to_raw(a), &vm.to_raw(b));
    let mut p = vm.lift(&g);
    p.make_monic();
    p
}
