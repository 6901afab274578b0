//! Semidiscrete jet-space operators: lattice shifts, total derivatives and
//! reduction modulo an equation and its differential consequences.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::expr::{Arg, Atom, Direction, Expr, ExprError, JetVar, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("ill-formed equation: {0}")]
    IllFormed(String),
    #[error("reduction needs derivatives of order {order}, beyond the limit {max}")]
    NonTerminating { order: u32, max: u32 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// The three supported equation families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EqClass {
    /// `u_t[0] = f(t, u[k..m])`.
    FirstOrderLattice,
    /// `u_tt[0] = f(t, u_t[0], u[-1], u[0], u[1])`.
    TodaType,
    /// `u_xy[0] = f(x, y, u_x[0], u_y[0], u[-1], u[0], u[1])`.
    TodaFieldType,
}

impl EqClass {
    pub fn lhs(self) -> JetVar {
        match self {
            EqClass::FirstOrderLattice => JetVar::t_deriv(0, 1),
            EqClass::TodaType => JetVar::t_deriv(0, 2),
            EqClass::TodaFieldType => JetVar::xy_deriv(0, 1, 1),
        }
    }

    pub fn is_field(self) -> bool {
        self == EqClass::TodaFieldType
    }

    pub fn directions(self) -> &'static [Direction] {
        if self.is_field() {
            &[Direction::X, Direction::Y]
        } else {
            &[Direction::T]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EqClass::FirstOrderLattice => "first-order",
            EqClass::TodaType => "toda",
            EqClass::TodaFieldType => "toda-field",
        }
    }
}

/// An equation solved for its highest derivative at site `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DDEquation {
    pub class: EqClass,
    pub lhs: JetVar,
    pub rhs: Expr,
    /// Smallest and largest shift of an undifferentiated jet in `rhs`.
    pub window: (i32, i32),
    pub params: Vec<String>,
}

impl DDEquation {
    pub fn new(class: EqClass, rhs: Expr, params: Vec<String>) -> Result<Self, JetError> {
        let lhs = class.lhs();
        let ill = |m: String| Err(JetError::IllFormed(m));
        let mut shifts = BTreeSet::new();
        for a in rhs.atoms() {
            match &a {
                Atom::Jet(j) if *j == lhs => return ill(format!("{lhs} occurs on the right-hand side")),
                Atom::Jet(j) => {
                    let allowed = match class {
                        EqClass::FirstOrderLattice => j.is_plain(),
                        EqClass::TodaType => {
                            j.is_plain() && j.shift.abs() <= 1 || *j == JetVar::t_deriv(0, 1)
                        }
                        EqClass::TodaFieldType => {
                            j.is_plain() && j.shift.abs() <= 1
                                || *j == JetVar::xy_deriv(0, 1, 0)
                                || *j == JetVar::xy_deriv(0, 0, 1)
                        }
                    };
                    if !allowed {
                        return ill(format!("{j} is not allowed in a {} equation", class.name()));
                    }
                    if j.is_plain() {
                        shifts.insert(j.shift);
                    }
                }
                Atom::Sym(Symbol::T) if class.is_field() => return ill("t in a field equation".into()),
                Atom::Sym(Symbol::X | Symbol::Y) if !class.is_field() => {
                    return ill(format!("{a} in a lattice equation"))
                }
                Atom::Sym(Symbol::Param(p)) if !params.iter().any(|q| **q == **p) => {
                    return ill(format!("undeclared parameter {p}"))
                }
                Atom::Unknown(u) => return ill(format!("unknown function {u} in the equation")),
                Atom::Coef(_) => return ill("ansatz coefficient in the equation".into()),
                _ => {}
            }
        }
        for s in &shifts {
            if rhs.diff(&Atom::Jet(JetVar::u(*s))).is_zero() {
                return ill(format!("right-hand side does not depend on u[{s}]"));
            }
        }
        let window = match (shifts.first(), shifts.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => (0, 0),
        };
        Ok(DDEquation { class, lhs, rhs, window, params })
    }

    pub fn order(&self) -> u32 {
        self.lhs.order()
    }

    /// `lhs - rhs`.
    pub fn residual(&self) -> Expr {
        Expr::jet(self.lhs) - &self.rhs
    }
}

/// Lattice shift `S^k`: jets and unknowns move by `k`, `n -> n + k` and
/// `alt -> (-1)^k alt`.
pub fn shift(e: &Expr, k: i32) -> Expr {
    if k == 0 {
        return e.clone();
    }
    let sign = if k % 2 == 0 { Expr::alt() } else { -Expr::alt() };
    e.substitute(&|a| match a {
        Atom::Jet(j) => Some(Expr::jet(j.shifted(k))),
        Atom::Sym(Symbol::N) => Some(Expr::n() + Expr::integer(k as i64)),
        Atom::Alt => Some(sign.clone()),
        Atom::Unknown(u) => Some(Expr::unknown(u.shifted(k))),
        _ => None,
    })
    .expect("a shift is invertible and cannot create a zero denominator")
}

/// Total derivative in `dir`, including the chain rule through unknowns.
pub fn total_derivative(e: &Expr, dir: Direction) -> Expr {
    let var = dir.symbol();
    e.derive(&|a| match a {
        Atom::Jet(j) => Some(Expr::jet(j.raised(dir))),
        Atom::Sym(s) if *s == var => Some(Expr::one()),
        Atom::Unknown(app) => {
            let mut out = Expr::zero();
            if let Some(d) = app.derivative(dir.arg()) {
                out = out + Expr::unknown(d);
            }
            if let Some(d) = app.derivative(Arg::U) {
                out = out + Expr::unknown(d) * Expr::jet(app.u_jet().raised(dir));
            }
            (!out.is_zero()).then_some(out)
        }
        _ => None,
    })
}

/// Reduction modulo an equation; caches the solved higher derivatives.
pub struct Reducer<'a> {
    eq: &'a DDEquation,
    max_order: u32,
    /// Image of the reducible derivative with the given index at site 0,
    /// keyed by `(dt, dx, dy)`.
    base: RefCell<BTreeMap<(u32, u32, u32), Expr>>,
    shifted: RefCell<HashMap<JetVar, Expr>>,
}

impl<'a> Reducer<'a> {
    pub fn new(eq: &'a DDEquation, max_order: Option<u32>) -> Self {
        Reducer {
            eq,
            max_order: max_order.unwrap_or(eq.order() + 1),
            base: RefCell::new(BTreeMap::new()),
            shifted: RefCell::new(HashMap::new()),
        }
    }

    fn reducible(&self, j: &JetVar) -> bool {
        match self.eq.class {
            EqClass::TodaFieldType => j.dx >= 1 && j.dy >= 1,
            _ => j.dt >= self.eq.lhs.dt,
        }
    }

    fn check_order(&self, j: &JetVar) -> Result<(), JetError> {
        if j.order() > self.max_order {
            return Err(JetError::NonTerminating { order: j.order(), max: self.max_order });
        }
        Ok(())
    }

    fn base_image(&self, idx: (u32, u32, u32), stack: &mut Vec<(u32, u32, u32)>) -> Result<Expr, JetError> {
        if let Some(e) = self.base.borrow().get(&idx) {
            return Ok(e.clone());
        }
        if stack.contains(&idx) {
            return Err(JetError::NonTerminating { order: idx.0 + idx.1 + idx.2, max: self.max_order });
        }
        stack.push(idx);
        let lhs = self.eq.lhs;
        let img = if idx == (lhs.dt, lhs.dx, lhs.dy) {
            self.eq.rhs.clone()
        } else {
            let (prev, dir) = match self.eq.class {
                EqClass::TodaFieldType if idx.1 >= 2 => ((0, idx.1 - 1, idx.2), Direction::X),
                EqClass::TodaFieldType => ((0, idx.1, idx.2 - 1), Direction::Y),
                _ => ((idx.0 - 1, 0, 0), Direction::T),
            };
            let p = self.base_image(prev, stack)?;
            self.reduce_inner(&total_derivative(&p, dir), stack)?
        };
        stack.pop();
        self.base.borrow_mut().insert(idx, img.clone());
        Ok(img)
    }

    fn image(&self, j: JetVar, stack: &mut Vec<(u32, u32, u32)>) -> Result<Expr, JetError> {
        if let Some(e) = self.shifted.borrow().get(&j) {
            return Ok(e.clone());
        }
        let b = self.base_image((j.dt, j.dx, j.dy), stack)?;
        let img = shift(&b, j.shift);
        self.shifted.borrow_mut().insert(j, img.clone());
        Ok(img)
    }

    fn reduce_inner(&self, e: &Expr, stack: &mut Vec<(u32, u32, u32)>) -> Result<Expr, JetError> {
        let mut images: BTreeMap<Atom, Expr> = BTreeMap::new();
        for j in e.jets() {
            self.check_order(&j)?;
            if self.reducible(&j) {
                images.insert(Atom::Jet(j), self.image(j, stack)?);
            }
        }
        if images.is_empty() {
            return Ok(e.clone());
        }
        Ok(e.substitute_map(&images)?)
    }

    /// Replaces every jet that the equation determines by its value on
    /// solutions.
    pub fn reduce(&self, e: &Expr) -> Result<Expr, JetError> {
        self.reduce_inner(e, &mut Vec::new())
    }
}

/// One-shot reduction; see [`Reducer`] for repeated use.
pub fn on_solution_reduce(e: &Expr, eq: &DDEquation, max_order: Option<u32>) -> Result<Expr, JetError> {
    Reducer::new(eq, max_order).reduce(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, NDep, UnknownFn};

    fn toda() -> DDEquation {
        DDEquation::new(EqClass::TodaType, parse("exp(u[-1]-u[0]) - exp(u[0]-u[1])").unwrap(), vec![]).unwrap()
    }

    #[test]
    fn shift_relabels() {
        let e = toda().rhs;
        assert_eq!(shift(&e, 1), parse("exp(u[0]-u[1]) - exp(u[1]-u[2])").unwrap());
        assert_eq!(shift(&Expr::alt(), 1), -Expr::alt());
        assert_eq!(shift(&shift(&e, 3), -3), e);
    }

    #[test]
    fn total_derivative_of_unknown() {
        let phi = UnknownFn::new("phi", &[Arg::T, Arg::U], NDep::Free);
        let d = total_derivative(&Expr::unknown(phi.at(0)), Direction::T);
        let c = crate::expr::ParseContext { params: vec![], unknowns: vec![phi] };
        assert_eq!(d, crate::expr::parse_with("phi_t[0] + phi_u[0]*ut[0]", &c).unwrap());
    }

    #[test]
    fn reduces_shifted_second_derivative() {
        let eq = toda();
        let r = on_solution_reduce(&parse("utt[1]").unwrap(), &eq, None).unwrap();
        assert_eq!(r, shift(&eq.rhs, 1));
        assert!(on_solution_reduce(&eq.residual(), &eq, None).unwrap().is_zero());
    }

    #[test]
    fn first_order_consequence() {
        let eq = DDEquation::new(EqClass::FirstOrderLattice, parse("t*u[0]*u[1]").unwrap(), vec![]).unwrap();
        let r = on_solution_reduce(&parse("utt[0]").unwrap(), &eq, None).unwrap();
        let f = eq.rhs.clone();
        let expect = f.diff(&Atom::Sym(Symbol::T))
            + f.diff(&Atom::Jet(JetVar::u(0))) * &f
            + f.diff(&Atom::Jet(JetVar::u(1))) * shift(&f, 1);
        assert_eq!(r, expect);
    }

    #[test]
    fn order_guard() {
        let eq = toda();
        let e = parse("utttt[0]").unwrap();
        assert!(matches!(on_solution_reduce(&e, &eq, None), Err(JetError::NonTerminating { .. })));
        assert!(on_solution_reduce(&e, &eq, Some(4)).is_ok());
    }

    #[test]
    fn field_mixed_derivatives() {
        let eq = DDEquation::new(
            EqClass::TodaFieldType,
            parse("exp(u[-1]-u[0]) - exp(u[0]-u[1])").unwrap(),
            vec![],
        )
        .unwrap();
        let r = on_solution_reduce(&parse("uxxy[0]").unwrap(), &eq, None).unwrap();
        assert_eq!(r, total_derivative(&eq.rhs, Direction::X));
        assert!(r.jets().iter().all(|j| j.dx == 0 || j.dy == 0));
    }

    #[test]
    fn ill_formed_equations() {
        let bad = |c, s: &str| DDEquation::new(c, parse(s).unwrap(), vec![]).is_err();
        assert!(bad(EqClass::FirstOrderLattice, "ut[1]"));
        assert!(bad(EqClass::TodaType, "utt[0]"));
        assert!(bad(EqClass::TodaType, "u[2]"));
        assert!(bad(EqClass::TodaFieldType, "t*u[0]"));
        let ok = DDEquation::new(EqClass::FirstOrderLattice, parse("u[-2]*u[2]").unwrap(), vec![]).unwrap();
        assert_eq!(ok.window, (-2, 2));
    }
}
