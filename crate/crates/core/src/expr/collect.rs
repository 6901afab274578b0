//! Coefficient extraction with respect to a set of variables.

use std::collections::{BTreeMap, BTreeSet};

use super::atom::Atom;
use super::poly::{Monomial, Poly};
use super::{Expr, ExprError};

/// A power product of collection variables times an optional kernel
/// `exp(l)` with `l` linear in the variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CollectKey {
    pub atoms: Vec<(Atom, u32)>,
    pub exp: Option<Expr>,
}

impl CollectKey {
    pub fn one() -> Self {
        CollectKey { atoms: Vec::new(), exp: None }
    }

    /// The key as an expression.
    pub fn to_expr(&self) -> Expr {
        let mut m = Monomial::from_atoms(self.atoms.clone());
        if let Some(e) = &self.exp {
            m = m.mul(&Monomial::exp_of(e.clone()));
        }
        Expr::from_poly(Poly::term(m, super::poly::q_int(1)))
    }
}

impl std::fmt::Display for CollectKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.to_expr().fmt(f)
    }
}

fn not_poly(what: &str, e: &dyn std::fmt::Display) -> ExprError {
    ExprError::NotPolynomialInVars(format!("{what}: {e}"))
}

/// Splits an exponential argument into its part linear in `vars` (with
/// constant coefficients) and the remainder.
fn split_exp_arg(arg: &Expr, vars: &BTreeSet<Atom>) -> Result<(Expr, Expr), ExprError> {
    let in_vars = |a: &Atom| vars.contains(a);
    for (p, _) in arg.denominator_factors() {
        if p.contains_atom(&in_vars) {
            return Err(not_poly("variable in kernel denominator", arg));
        }
    }
    let mut lin = Poly::zero();
    let mut rest = Poly::zero();
    for (m, c) in arg.numerator().terms() {
        let (hit, _) = m.partition(in_vars);
        if hit.is_empty() {
            if m.exp_arg().map(|e| e.contains(&in_vars)).unwrap_or(false) {
                return Err(not_poly("nested kernel in variables", arg));
            }
            rest.add_term(m.clone(), c.clone());
        } else if hit.len() == 1 && hit[0].1 == 1 && m.atoms().len() == 1 && m.exp_arg().is_none() {
            lin.add_term(m.clone(), c.clone());
        } else {
            return Err(not_poly("kernel argument not linear", arg));
        }
    }
    if !lin.is_zero() && !arg.denominator_factors().is_empty() {
        return Err(not_poly("kernel argument has non-constant coefficient", arg));
    }
    let inv_den = Expr::from_frac(Poly::one(), arg.denominator_factors().to_vec());
    Ok((Expr::from_poly(lin), Expr::from_poly(rest) * inv_den))
}

/// Writes `e = sum_k coeff_k * k` where each key `k` is a power product of
/// `vars` (times `exp` of a linear form when `kernels` is set) and every
/// coefficient is free of `vars`.
pub fn collect(
    e: &Expr,
    vars: &BTreeSet<Atom>,
    kernels: bool,
) -> Result<BTreeMap<CollectKey, Expr>, ExprError> {
    let in_vars = |a: &Atom| vars.contains(a);
    for (p, _) in e.denominator_factors() {
        if p.contains_atom(&in_vars) || p.terms().any(|(m, _)| m.exp_arg().is_some_and(|x| x.contains(&in_vars))) {
            return Err(not_poly("variable in denominator", e));
        }
    }
    let mut groups: BTreeMap<CollectKey, Poly> = BTreeMap::new();
    for (m, c) in e.numerator().terms() {
        let (hit, rest) = m.partition(in_vars);
        let mut key = CollectKey { atoms: hit, exp: None };
        let mut rest = rest;
        if let Some(x) = rest.exp_arg().cloned() {
            if x.contains(&in_vars) {
                if !kernels {
                    return Err(not_poly("variable inside a kernel", &x));
                }
                let (lin, other) = split_exp_arg(&x, vars)?;
                key.exp = (!lin.is_zero()).then_some(lin);
                rest = Monomial::from_atoms(rest.atoms().to_vec()).mul(&Monomial::exp_of(other));
            }
        }
        groups.entry(key).or_default().add_term(rest, c.clone());
    }
    let inv_den = Expr::from_frac(Poly::one(), e.denominator_factors().to_vec());
    Ok(groups
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(k, p)| (k, Expr::from_poly(p) * &inv_den))
        .collect())
}
