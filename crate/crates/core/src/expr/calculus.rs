//! Derivations, substitution and numeric evaluation.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;

use super::atom::{Arg, Atom, Symbol};
use super::poly::{Monomial, Poly, Q};
use super::{Expr, ExprError};

impl Expr {
    /// Applies the derivation determined by its action on atoms (`None`
    /// means the atom is annihilated). Kernels follow the chain rule
    /// `d exp(a) = d(a) exp(a)`.
    pub fn derive(&self, d: &dyn Fn(&Atom) -> Option<Expr>) -> Expr {
        let dn = derive_poly(&self.0.num, d);
        if self.0.den.is_empty() {
            return dn;
        }
        let mut log_deriv = Expr::zero();
        for (p, m) in &self.0.den {
            let dp = derive_poly(p, d);
            if dp.is_zero() {
                continue;
            }
            let inv_p = Expr::from_frac(Poly::one(), vec![(p.clone(), 1)]);
            log_deriv = log_deriv + dp * inv_p * Expr::integer(*m as i64);
        }
        let inv_den = Expr::from_frac(Poly::one(), self.0.den.clone());
        let num = Expr::from_poly(self.0.num.clone());
        (dn - num * log_deriv) * inv_den
    }

    /// Partial derivative with respect to a symbol or jet. Unknown functions
    /// differentiate along their declared arguments only.
    pub fn diff(&self, v: &Atom) -> Expr {
        let arg = match v {
            Atom::Sym(Symbol::T) => Some(Arg::T),
            Atom::Sym(Symbol::X) => Some(Arg::X),
            Atom::Sym(Symbol::Y) => Some(Arg::Y),
            Atom::Jet(j) if j.is_plain() => Some(Arg::U),
            _ => None,
        };
        self.derive(&|a: &Atom| {
            if a == v {
                return Some(Expr::one());
            }
            let app = a.as_unknown()?;
            let arg = arg?;
            if arg == Arg::U && v.as_jet().map(|j| j.shift) != Some(app.site) {
                return None;
            }
            app.derivative(arg).map(Expr::unknown)
        })
    }

    /// Simultaneous substitution of atoms; the result is normalized.
    /// Fails when a denominator becomes zero.
    pub fn substitute(&self, f: &dyn Fn(&Atom) -> Option<Expr>) -> Result<Expr, ExprError> {
        let mut result = subst_poly(&self.0.num, f)?;
        for (p, m) in &self.0.den {
            let img = subst_poly(p, f)?;
            if img.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            result = result * img.pow(-(*m as i64))?;
        }
        Ok(result)
    }

    /// Substitution from an explicit binding map.
    pub fn substitute_map(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr, ExprError> {
        self.substitute(&|a| bindings.get(a).cloned())
    }

    /// Floating-point evaluation.
    pub fn eval(&self, env: &dyn Fn(&Atom) -> f64) -> f64 {
        let mut v = eval_poly(&self.0.num, env);
        for (p, m) in &self.0.den {
            v /= eval_poly(p, env).powi(*m as i32);
        }
        v
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn eval_poly(p: &Poly, env: &dyn Fn(&Atom) -> f64) -> f64 {
    let mut cache: HashMap<&Atom, f64> = HashMap::new();
    let mut total = 0.0;
    for (m, c) in p.terms() {
        let mut v = q_to_f64(c);
        for (a, k) in m.atoms() {
            let x = *cache.entry(a).or_insert_with(|| env(a));
            v *= x.powi(*k as i32);
        }
        if let Some(e) = m.exp_arg() {
            v *= e.eval(env).exp();
        }
        total += v;
    }
    total
}

fn derive_poly(p: &Poly, d: &dyn Fn(&Atom) -> Option<Expr>) -> Expr {
    let mut out = Expr::zero();
    for a in p.atoms() {
        if let Some(img) = d(&a) {
            if img.is_zero() {
                continue;
            }
            out = out + Expr::from_poly(p.partial(&a)) * img;
        }
    }
    if p.has_exp() {
        for (e, group) in p.exp_groups() {
            if let Some(e) = e {
                let de = e.derive(d);
                if !de.is_zero() {
                    out = out + Expr::from_poly(group) * de;
                }
            }
        }
    }
    out
}

fn subst_poly(p: &Poly, f: &dyn Fn(&Atom) -> Option<Expr>) -> Result<Expr, ExprError> {
    let atoms: Vec<Atom> = p.atoms().into_iter().collect();
    let mut poly_img: BTreeMap<Atom, Poly> = BTreeMap::new();
    let mut rat_img: Vec<(Atom, Poly, Poly, Expr, u32)> = Vec::new();
    for a in atoms {
        if let Some(img) = f(&a) {
            if img.is_polynomial() {
                poly_img.insert(a, img.numerator().clone());
            } else {
                let k = p.degree_in(&a);
                let inv_den = Expr::from_frac(Poly::one(), img.denominator_factors().to_vec());
                rat_img.push((a, img.numerator().clone(), img.denominator(), inv_den, k));
            }
        }
    }
    let mut exp_img: BTreeMap<Expr, Expr> = BTreeMap::new();
    if p.has_exp() {
        for (e, _) in p.exp_groups() {
            if let Some(e) = e {
                let ei = e.substitute(f)?;
                if ei != e {
                    exp_img.insert(e, ei);
                }
            }
        }
    }
    if poly_img.is_empty() && rat_img.is_empty() && exp_img.is_empty() {
        return Ok(Expr::from_poly(p.clone()));
    }

    let mut pow_cache: HashMap<(Atom, u32, bool), Poly> = HashMap::new();
    let mut power = |a: &Atom, base: &Poly, k: u32, den: bool| -> Poly {
        if k == 0 {
            return Poly::one();
        }
        pow_cache
            .entry((a.clone(), k, den))
            .or_insert_with(|| base.pow(k))
            .clone()
    };

    let mut num = Poly::zero();
    for (m, c) in p.terms() {
        let mut rest_atoms = Vec::new();
        let mut factor = Poly::constant(c.clone());
        for (a, k) in m.atoms() {
            if let Some(img) = poly_img.get(a) {
                factor = factor.mul(&power(a, img, *k, false));
            } else if rat_img.iter().any(|r| &r.0 == a) {
                // handled below
            } else {
                rest_atoms.push((a.clone(), *k));
            }
        }
        for (a, n_img, d_img, _, kmax) in &rat_img {
            let k = m.degree_of(a);
            factor = factor.mul(&power(a, n_img, k, false));
            factor = factor.mul(&power(a, d_img, kmax - k, true));
        }
        let mut rest = Monomial::from_atoms(rest_atoms);
        if let Some(e) = m.exp_arg() {
            let e = exp_img.get(e).cloned().unwrap_or_else(|| e.clone());
            rest = rest.mul(&Monomial::exp_of(e));
        }
        num.add_assign(&factor.mul_monomial(&rest, &Q::from_integer(1.into())));
    }
    let mut out = Expr::from_poly(num);
    for (_, _, _, inv_den, kmax) in &rat_img {
        for _ in 0..*kmax {
            out = out * inv_den;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::atom::JetVar;

    #[test]
    fn chain_rule_through_exp() {
        let e = Expr::exp(&(Expr::u(-1) - Expr::u(0)));
        let d = e.diff(&Atom::Jet(JetVar::u(0)));
        assert_eq!(d, -e);
    }

    #[test]
    fn power_rule() {
        let t = Expr::t();
        assert_eq!((&t * &t).diff(&Atom::Sym(Symbol::T)), Expr::integer(2) * t);
    }

    #[test]
    fn quotient_rule() {
        let e = Expr::one().checked_div(&Expr::u(1)).unwrap();
        let d = e.diff(&Atom::Jet(JetVar::u(1)));
        assert_eq!(d, -(Expr::u(1).pow(-2).unwrap()));
    }

    #[test]
    fn simultaneous_substitution() {
        let e = Expr::u(0) - Expr::u(1);
        let swapped = e
            .substitute(&|a| match a {
                Atom::Jet(j) if j.shift == 0 => Some(Expr::u(1)),
                Atom::Jet(j) if j.shift == 1 => Some(Expr::u(0)),
                _ => None,
            })
            .unwrap();
        assert_eq!(swapped, -e);
    }

    #[test]
    fn substitution_into_denominator_detects_zero() {
        let e = Expr::one().checked_div(&(Expr::u(1) - Expr::u(-1))).unwrap();
        let r = e.substitute(&|a| (a == &Atom::Jet(JetVar::u(1))).then(|| Expr::u(-1)));
        assert_eq!(r, Err(ExprError::DivisionByZero));
    }

    #[test]
    fn rational_image_substitution() {
        // u0^2 + u1 with u0 -> 1/u2
        let e = Expr::u(0) * Expr::u(0) + Expr::u(1);
        let r = e
            .substitute(&|a| (a == &Atom::Jet(JetVar::u(0))).then(|| Expr::u(2).inv().unwrap()))
            .unwrap();
        let expect = Expr::u(2).pow(-2).unwrap() + Expr::u(1);
        assert_eq!(r, expect);
    }
}
