//! Point vector fields, their characteristics and prolongations.

use std::fmt;

use thiserror::Error;

use crate::expr::{Arg, Atom, Direction, Expr, JetVar, Symbol};
use crate::jet::{shift, total_derivative};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("cannot combine a lattice field with an (x, y) field")]
    KindMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// `tau(t, u) d_t + phi(t, u) d_u`.
    LatticeOde,
    /// `xi(x, y, u) d_x + eta(x, y, u) d_y + phi(x, y, u) d_u`.
    Field,
}

/// Coefficients are expressions at lattice site `n`; unused ones are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub kind: FieldKind,
    pub tau: Expr,
    pub xi: Expr,
    pub eta: Expr,
    pub phi: Expr,
}

impl VectorField {
    pub fn lattice(tau: Expr, phi: Expr) -> Self {
        VectorField { kind: FieldKind::LatticeOde, tau, xi: Expr::zero(), eta: Expr::zero(), phi }
    }

    pub fn field(xi: Expr, eta: Expr, phi: Expr) -> Self {
        VectorField { kind: FieldKind::Field, tau: Expr::zero(), xi, eta, phi }
    }

    pub fn zero(kind: FieldKind) -> Self {
        match kind {
            FieldKind::LatticeOde => VectorField::lattice(Expr::zero(), Expr::zero()),
            FieldKind::Field => VectorField::field(Expr::zero(), Expr::zero(), Expr::zero()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().iter().all(|c| c.is_zero())
    }

    /// The coefficients in presentation order: `(tau, phi)` or `(xi, eta, phi)`.
    pub fn coefficients(&self) -> Vec<&Expr> {
        match self.kind {
            FieldKind::LatticeOde => vec![&self.tau, &self.phi],
            FieldKind::Field => vec![&self.xi, &self.eta, &self.phi],
        }
    }

    pub fn coefficient_names(&self) -> &'static [&'static str] {
        match self.kind {
            FieldKind::LatticeOde => &["tau", "phi"],
            FieldKind::Field => &["xi", "eta", "phi"],
        }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> VectorField {
        VectorField {
            kind: self.kind,
            tau: f(&self.tau),
            xi: f(&self.xi),
            eta: f(&self.eta),
            phi: f(&self.phi),
        }
    }

    pub fn combine(&self, other: &VectorField, f: impl Fn(&Expr, &Expr) -> Expr) -> Result<VectorField, FieldError> {
        if self.kind != other.kind {
            return Err(FieldError::KindMismatch);
        }
        Ok(VectorField {
            kind: self.kind,
            tau: f(&self.tau, &other.tau),
            xi: f(&self.xi, &other.xi),
            eta: f(&self.eta, &other.eta),
            phi: f(&self.phi, &other.phi),
        })
    }

    fn directions(&self) -> &'static [Direction] {
        match self.kind {
            FieldKind::LatticeOde => &[Direction::T],
            FieldKind::Field => &[Direction::X, Direction::Y],
        }
    }

    /// Coefficient of the independent variable in `dir`.
    fn independent(&self, dir: Direction) -> &Expr {
        match dir {
            Direction::T => &self.tau,
            Direction::X => &self.xi,
            Direction::Y => &self.eta,
        }
    }

    /// `phi - tau*u_t` or `phi - xi*u_x - eta*u_y`, at site `n`.
    pub fn characteristic(&self) -> Expr {
        let mut q = self.phi.clone();
        for d in self.directions() {
            q = q - self.independent(*d) * Expr::jet(JetVar::u(0).raised(*d));
        }
        q
    }

    /// Applies the unprolonged field as a derivation on coefficient
    /// expressions in `(t, u[0])` or `(x, y, u[0])`; `n` is a label.
    pub fn apply_point(&self, g: &Expr) -> Expr {
        let mut out = self.phi.clone() * g.diff(&Atom::Jet(JetVar::u(0)));
        for d in self.directions() {
            let c = self.independent(*d);
            if !c.is_zero() {
                out = out + c * g.diff(&Atom::Sym(d.symbol()));
            }
        }
        out
    }

    /// Prolonged evolutionary field applied to `e`: every jet
    /// `u_{s,J}` is mapped to `D^J S^s Q`.
    pub fn apply_prolonged_evolutionary(&self, e: &Expr) -> Expr {
        let q = self.characteristic();
        let image = |j: &JetVar| -> Expr {
            let mut x = shift(&q, j.shift);
            for (dir, k) in [(Direction::T, j.dt), (Direction::X, j.dx), (Direction::Y, j.dy)] {
                for _ in 0..k {
                    x = total_derivative(&x, dir);
                }
            }
            x
        };
        e.derive(&|a| match a {
            Atom::Jet(j) => Some(image(j)),
            Atom::Unknown(app) => app
                .derivative(Arg::U)
                .map(|d| Expr::unknown(d) * image(&app.u_jet())),
            _ => None,
        })
    }

    /// Prolongation coefficient of the jet `j` in the standard formalism.
    pub fn standard_coefficient(&self, j: &JetVar) -> Expr {
        let s = j.shift;
        let shifted: Vec<(Direction, Expr)> =
            self.directions().iter().map(|d| (*d, shift(self.independent(*d), s))).collect();
        // Raise the derivative index one direction at a time.
        let mut cur = JetVar::u(s);
        let mut coeff = shift(&self.phi, s);
        let steps = (0..j.dt)
            .map(|_| Direction::T)
            .chain((0..j.dx).map(|_| Direction::X))
            .chain((0..j.dy).map(|_| Direction::Y));
        for dir in steps {
            let mut next = total_derivative(&coeff, dir);
            for (d, c) in &shifted {
                next = next - total_derivative(c, dir) * Expr::jet(cur.raised(*d));
            }
            coeff = next;
            cur = cur.raised(dir);
        }
        // Point-dependent correction: the independent variables move with
        // the coefficients at site n, not at site n + s.
        for (d, c) in &shifted {
            let diff = self.independent(*d) - c;
            if !diff.is_zero() {
                coeff = coeff + diff * Expr::jet(j.raised(*d));
            }
        }
        coeff
    }

    /// Prolonged point field applied to `e`.
    pub fn apply_prolonged_standard(&self, e: &Expr) -> Expr {
        let dirs = self.directions();
        e.derive(&|a| match a {
            Atom::Jet(j) => Some(self.standard_coefficient(j)),
            Atom::Sym(s) => dirs.iter().find(|d| d.symbol() == *s).map(|d| self.independent(*d).clone()),
            Atom::Unknown(app) => {
                let mut out = Expr::zero();
                for d in dirs {
                    if let Some(da) = app.derivative(d.arg()) {
                        out = out + Expr::unknown(da) * self.independent(*d);
                    }
                }
                if let Some(du) = app.derivative(Arg::U) {
                    out = out + Expr::unknown(du) * self.standard_coefficient(&app.u_jet());
                }
                (!out.is_zero()).then_some(out)
            }
            _ => None,
        })
    }

    /// Standard minus evolutionary prolongation minus the total-derivative
    /// part; vanishes identically.
    pub fn equivalence_residual(&self, e: &Expr) -> Expr {
        let mut r = self.apply_prolonged_standard(e) - self.apply_prolonged_evolutionary(e);
        for d in self.directions() {
            r = r - self.independent(*d) * total_derivative(e, *d);
        }
        r
    }

    /// Lie bracket `[self, other]`.
    pub fn commutator(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        if self.kind != other.kind {
            return Err(FieldError::KindMismatch);
        }
        Ok(VectorField {
            kind: self.kind,
            tau: self.apply_point(&other.tau) - other.apply_point(&self.tau),
            xi: self.apply_point(&other.xi) - other.apply_point(&self.xi),
            eta: self.apply_point(&other.eta) - other.apply_point(&self.eta),
            phi: self.apply_point(&other.phi) - other.apply_point(&self.phi),
        })
    }

    /// Renders as `tau = ...; phi = ...;`.
    pub fn to_dsl(&self) -> String {
        self.coefficient_names()
            .iter()
            .zip(self.coefficients())
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| format!("{n} = {c};"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for VectorField {
    /// Operator notation, e.g. `(t)*d_t + (2*n)*d_u`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops = match self.kind {
            FieldKind::LatticeOde => ["d_t", "d_u"].as_slice(),
            FieldKind::Field => ["d_x", "d_y", "d_u"].as_slice(),
        };
        let parts: Vec<String> = self
            .coefficients()
            .into_iter()
            .zip(ops)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, op)| if c.is_one() { op.to_string() } else { format!("({c})*{op}") })
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// A vector field with a label, as read from or written to a fields file.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedField {
    pub name: String,
    pub field: VectorField,
}

impl NamedField {
    pub fn to_dsl(&self) -> String {
        format!("{}: {}", self.name, self.field.to_dsl())
    }
}

/// True if `e` uses only the variables a point field of `kind` may depend on.
pub fn is_point_coefficient(e: &Expr, kind: FieldKind) -> bool {
    e.atoms().iter().all(|a| match a {
        Atom::Jet(j) => *j == JetVar::u(0),
        Atom::Sym(Symbol::T) => kind == FieldKind::LatticeOde,
        Atom::Sym(Symbol::X | Symbol::Y) => kind == FieldKind::Field,
        _ => true,
    })
}
