//! Indeterminates of the expression kernel.
//!
//! Every polynomial in the kernel is built from [`Atom`]s. The variant order
//! of [`Atom`] is the canonical node order used to sort products: scalar
//! ansatz coefficients and base symbols first, then the alternating sign,
//! then lattice jets ordered by `(shift, derivative)`, then unknown
//! functions. Exponential kernels live on the monomial itself (see
//! [`super::poly::Monomial`]) so that `exp(a)*exp(b)` can merge into
//! `exp(a+b)`.

use std::fmt;
use std::sync::Arc;

/// Independent variables, the lattice label `n`, and named parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    T,
    X,
    Y,
    N,
    Param(Arc<str>),
}

impl Symbol {
    pub fn param(name: &str) -> Self {
        Symbol::Param(Arc::from(name))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::T => f.write_str("t"),
            Symbol::X => f.write_str("x"),
            Symbol::Y => f.write_str("y"),
            Symbol::N => f.write_str("n"),
            Symbol::Param(p) => f.write_str(p),
        }
    }
}

/// A lattice sample `u_{n+shift}` with a derivative multi-index.
///
/// Lattice-ODE equations only use `dt`; the field class only uses `dx`/`dy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetVar {
    pub shift: i32,
    pub dt: u32,
    pub dx: u32,
    pub dy: u32,
}

impl JetVar {
    pub const fn u(shift: i32) -> Self {
        JetVar { shift, dt: 0, dx: 0, dy: 0 }
    }

    pub const fn t_deriv(shift: i32, order: u32) -> Self {
        JetVar { shift, dt: order, dx: 0, dy: 0 }
    }

    pub const fn xy_deriv(shift: i32, dx: u32, dy: u32) -> Self {
        JetVar { shift, dt: 0, dx, dy }
    }

    pub fn order(&self) -> u32 {
        self.dt + self.dx + self.dy
    }

    pub fn is_plain(&self) -> bool {
        self.order() == 0
    }

    pub fn shifted(self, k: i32) -> Self {
        JetVar { shift: self.shift + k, ..self }
    }

    /// Same derivative multi-index, but with one more order in `dir`.
    pub fn raised(self, dir: Direction) -> Self {
        match dir {
            Direction::T => JetVar { dt: self.dt + 1, ..self },
            Direction::X => JetVar { dx: self.dx + 1, ..self },
            Direction::Y => JetVar { dy: self.dy + 1, ..self },
        }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("u")?;
        for _ in 0..self.dt {
            f.write_str("t")?;
        }
        for _ in 0..self.dx {
            f.write_str("x")?;
        }
        for _ in 0..self.dy {
            f.write_str("y")?;
        }
        write!(f, "[{}]", self.shift)
    }
}

/// Direction of a total derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    T,
    X,
    Y,
}

impl Direction {
    pub fn symbol(self) -> Symbol {
        match self {
            Direction::T => Symbol::T,
            Direction::X => Symbol::X,
            Direction::Y => Symbol::Y,
        }
    }

    pub fn arg(self) -> Arg {
        match self {
            Direction::T => Arg::T,
            Direction::X => Arg::X,
            Direction::Y => Arg::Y,
        }
    }
}

/// How an unknown coefficient function depends on the lattice label `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NDep {
    Free,
    Independent,
    Periodic(u32),
}

/// A declared argument of an unknown function. `U` is the lattice field at
/// the unknown's own site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    T = 0,
    X = 1,
    Y = 2,
    U = 3,
}

impl Arg {
    pub const ALL: [Arg; 4] = [Arg::T, Arg::X, Arg::Y, Arg::U];

    pub fn letter(self) -> char {
        match self {
            Arg::T => 't',
            Arg::X => 'x',
            Arg::Y => 'y',
            Arg::U => 'u',
        }
    }

    pub fn from_letter(c: char) -> Option<Arg> {
        match c {
            't' => Some(Arg::T),
            'x' => Some(Arg::X),
            'y' => Some(Arg::Y),
            'u' => Some(Arg::U),
            _ => None,
        }
    }
}

/// An unknown function such as `tau_n(t, u_n)` or a formal `f(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnknownFn {
    pub name: Arc<str>,
    args: u8,
    pub ndep: NDep,
}

impl UnknownFn {
    pub fn new(name: &str, args: &[Arg], ndep: NDep) -> Self {
        let mut bits = 0u8;
        for a in args {
            bits |= 1 << (*a as u8);
        }
        UnknownFn { name: Arc::from(name), args: bits, ndep }
    }

    pub fn has(&self, arg: Arg) -> bool {
        self.args & (1 << (arg as u8)) != 0
    }

    pub fn args(&self) -> impl Iterator<Item = Arg> + '_ {
        Arg::ALL.into_iter().filter(|a| self.has(*a))
    }

    /// The function evaluated at lattice site `n + site`, underived.
    pub fn at(&self, site: i32) -> UnknownApp {
        UnknownApp::new(self.clone(), site, [0; 4])
    }

    /// True for n-independent functions of a single continuous variable,
    /// which print as `f''(x)`.
    pub fn is_formal(&self) -> bool {
        self.ndep == NDep::Independent && !self.has(Arg::U) && self.args.count_ones() == 1
    }
}

impl fmt::Display for UnknownFn {
    /// `phi_n(t, u)`, `tau(t)`, `tau_n(t)` with period 2 as `tau_n(t) [period 2]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args().map(|a| a.letter().to_string()).collect();
        let sub = if self.ndep == NDep::Independent { "" } else { "_n" };
        write!(f, "{}{sub}({})", self.name, args.join(", "))?;
        if let NDep::Periodic(p) = self.ndep {
            write!(f, " [period {p}]")?;
        }
        Ok(())
    }
}

/// An unknown function applied at a lattice site, with partial derivative
/// orders indexed by [`Arg`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnknownApp {
    pub func: UnknownFn,
    pub site: i32,
    pub orders: [u32; 4],
}

impl UnknownApp {
    pub fn new(func: UnknownFn, site: i32, orders: [u32; 4]) -> Self {
        let site = if func.has(Arg::U) {
            site
        } else {
            match func.ndep {
                NDep::Free => site,
                NDep::Independent => 0,
                NDep::Periodic(p) => site.rem_euclid(p as i32),
            }
        };
        UnknownApp { func, site, orders }
    }

    /// Partial derivative with respect to a declared argument; `None` when
    /// the argument is not declared (the derivative is identically zero).
    pub fn derivative(&self, arg: Arg) -> Option<UnknownApp> {
        if !self.func.has(arg) {
            return None;
        }
        let mut orders = self.orders;
        orders[arg as usize] += 1;
        Some(UnknownApp { orders, ..self.clone() })
    }

    pub fn shifted(&self, k: i32) -> UnknownApp {
        UnknownApp::new(self.func.clone(), self.site + k, self.orders)
    }

    /// The jet this function reads its `u` argument from.
    pub fn u_jet(&self) -> JetVar {
        JetVar::u(self.site)
    }

    pub fn total_order(&self) -> u32 {
        self.orders.iter().sum()
    }
}

impl fmt::Display for UnknownApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let func = &self.func;
        if func.is_formal() {
            let arg = func.args().next().unwrap();
            f.write_str(&func.name)?;
            for _ in 0..self.orders[arg as usize] {
                f.write_str("'")?;
            }
            return write!(f, "({})", arg.letter());
        }
        f.write_str(&func.name)?;
        if self.total_order() > 0 {
            f.write_str("_")?;
            for a in Arg::ALL {
                for _ in 0..self.orders[a as usize] {
                    write!(f, "{}", a.letter())?;
                }
            }
        }
        if func.ndep == NDep::Independent && !func.has(Arg::U) {
            let args: Vec<String> = func.args().map(|a| a.letter().to_string()).collect();
            write!(f, "({})", args.join(","))
        } else {
            write!(f, "[{}]", self.site)
        }
    }
}

/// An indeterminate of the kernel's polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// Scalar coefficient of a finite ansatz.
    Coef(u32),
    Sym(Symbol),
    /// The sequence `(-1)^n`; satisfies `alt^2 = 1`.
    Alt,
    Jet(JetVar),
    Unknown(UnknownApp),
}

impl Atom {
    pub fn as_jet(&self) -> Option<JetVar> {
        match self {
            Atom::Jet(j) => Some(*j),
            _ => None,
        }
    }

    pub fn as_unknown(&self) -> Option<&UnknownApp> {
        match self {
            Atom::Unknown(u) => Some(u),
            _ => None,
        }
    }
}

impl From<Symbol> for Atom {
    fn from(s: Symbol) -> Self {
        Atom::Sym(s)
    }
}

impl From<JetVar> for Atom {
    fn from(j: JetVar) -> Self {
        Atom::Jet(j)
    }
}

impl From<UnknownApp> for Atom {
    fn from(u: UnknownApp) -> Self {
        Atom::Unknown(u)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Coef(i) => write!(f, "c{i}"),
            Atom::Sym(s) => s.fmt(f),
            Atom::Alt => f.write_str("alt"),
            Atom::Jet(j) => j.fmt(f),
            Atom::Unknown(u) => u.fmt(f),
        }
    }
}
