//! Finite-ansatz solution of determining systems and the resulting Lie
//! algebra.

use std::collections::{BTreeMap, HashMap};

use crate::det::DeterminingSystem;
use crate::expr::{Arg, Atom, Expr, Monomial, NDep, Poly, Symbol, UnknownApp, UnknownFn, Q};
use crate::jet::{shift, DDEquation, JetError, Reducer};
use crate::linalg::{self, Echelon, Matrix};
use crate::vfield::{FieldKind, VectorField};

use num_traits::Zero;

/// Explicit dependence of ansatz coefficients on the lattice label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NBasis {
    One,
    N,
    Alt,
}

impl NBasis {
    pub fn expr(self) -> Expr {
        match self {
            NBasis::One => Expr::one(),
            NBasis::N => Expr::n(),
            NBasis::Alt => Expr::alt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NBasis::One => "1",
            NBasis::N => "n",
            NBasis::Alt => "alt",
        }
    }

    pub fn from_name(s: &str) -> Option<NBasis> {
        match s.trim() {
            "1" | "one" => Some(NBasis::One),
            "n" => Some(NBasis::N),
            "alt" | "(-1)^n" => Some(NBasis::Alt),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzConfig {
    /// Degree bound in `u[0]`.
    pub udeg: u32,
    /// Degree bound in `t` (in each of `x`, `y` for the field class).
    pub tdeg: u32,
    pub nbasis: Vec<NBasis>,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig { udeg: 2, tdeg: 2, nbasis: vec![NBasis::One, NBasis::N, NBasis::Alt] }
    }
}

/// One scalar unknown of the ansatz.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub unknown: usize,
    pub udeg: u32,
    /// Degrees in `t`, or in `(x, y)`.
    pub degs: (u32, u32),
    pub basis: NBasis,
    pub monomial: Expr,
}

#[derive(Clone, Debug)]
pub struct Ansatz {
    pub unknowns: Vec<UnknownFn>,
    pub columns: Vec<Column>,
    /// `sum_i c_i * monomial_i` for each unknown.
    pub forms: Vec<Expr>,
}

fn basis_for(ndep: NDep, cfg: &AnsatzConfig) -> Vec<NBasis> {
    let mut b: Vec<NBasis> = match ndep {
        NDep::Free => cfg.nbasis.clone(),
        NDep::Independent => vec![NBasis::One],
        NDep::Periodic(p) => cfg
            .nbasis
            .iter()
            .copied()
            .filter(|b| *b == NBasis::One || *b == NBasis::Alt && p % 2 == 0)
            .collect(),
    };
    if b.is_empty() {
        b.push(NBasis::One);
    }
    b
}

pub fn build_ansatz(unknowns: &[UnknownFn], cfg: &AnsatzConfig) -> Ansatz {
    let mut columns = Vec::new();
    let mut forms = Vec::new();
    let u0 = Expr::u(0);
    for (ui, f) in unknowns.iter().enumerate() {
        let dmax = if f.has(Arg::U) { cfg.udeg } else { 0 };
        let mut degs = Vec::new();
        if f.has(Arg::X) || f.has(Arg::Y) {
            let xm = if f.has(Arg::X) { cfg.tdeg } else { 0 };
            let ym = if f.has(Arg::Y) { cfg.tdeg } else { 0 };
            for total in 0..=xm + ym {
                for a in 0..=xm.min(total) {
                    let b = total - a;
                    if b <= ym {
                        degs.push((a, b));
                    }
                }
            }
        } else {
            let tm = if f.has(Arg::T) { cfg.tdeg } else { 0 };
            degs.extend((0..=tm).map(|e| (e, 0)));
        }
        let basis = basis_for(f.ndep, cfg);
        let field_like = f.has(Arg::X) || f.has(Arg::Y);
        let mut form = Expr::zero();
        for d in 0..=dmax {
            for &(a, b) in &degs {
                for &nb in &basis {
                    let ind = if field_like {
                        Expr::x().pow(a as i64).unwrap() * Expr::y().pow(b as i64).unwrap()
                    } else {
                        Expr::t().pow(a as i64).unwrap()
                    };
                    let monomial = u0.pow(d as i64).unwrap() * ind * nb.expr();
                    form = form + Expr::coef(columns.len() as u32) * &monomial;
                    columns.push(Column { unknown: ui, udeg: d, degs: (a, b), basis: nb, monomial });
                }
            }
        }
        forms.push(form);
    }
    Ansatz { unknowns: unknowns.to_vec(), columns, forms }
}

impl Ansatz {
    /// The ansatz for `app`: the form of its function, differentiated and
    /// moved to its site.
    pub fn image(&self, app: &UnknownApp) -> Option<Expr> {
        let i = self.unknowns.iter().position(|f| *f == app.func)?;
        let mut e = self.forms[i].clone();
        for arg in Arg::ALL {
            let v = match arg {
                Arg::T => Atom::Sym(Symbol::T),
                Arg::X => Atom::Sym(Symbol::X),
                Arg::Y => Atom::Sym(Symbol::Y),
                Arg::U => Atom::Jet(crate::expr::JetVar::u(0)),
            };
            for _ in 0..app.orders[arg as usize] {
                e = e.diff(&v);
            }
        }
        Some(shift(&e, app.site))
    }

    /// Substitutes the ansatz for every unknown in `e`.
    pub fn substitute(&self, e: &Expr, cache: &mut HashMap<UnknownApp, Expr>) -> Expr {
        for a in e.atoms() {
            if let Atom::Unknown(app) = a {
                if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry(app) {
                    if let Some(img) = self.image(slot.key()) {
                        slot.insert(img);
                    }
                }
            }
        }
        e.substitute(&|a| match a {
            Atom::Unknown(app) => cache.get(app).cloned(),
            _ => None,
        })
        .expect("ansatz images are polynomial")
    }

    /// The field encoded by a coefficient vector.
    pub fn field(&self, v: &[Q], kind: FieldKind) -> VectorField {
        let mut coeffs = vec![Expr::zero(); self.unknowns.len()];
        for (c, x) in self.columns.iter().zip(v) {
            if !x.is_zero() {
                coeffs[c.unknown] = &coeffs[c.unknown] + c.monomial.scale(x);
            }
        }
        let by_name = |n: &str| {
            self.unknowns.iter().position(|f| &*f.name == n).map(|i| coeffs[i].clone()).unwrap_or_default()
        };
        match kind {
            FieldKind::LatticeOde => VectorField::lattice(by_name("tau"), by_name("phi")),
            FieldKind::Field => VectorField::field(by_name("xi"), by_name("eta"), by_name("phi")),
        }
    }
}

/// Splits a polynomial that is linear in the ansatz coefficients into one
/// scalar equation per remaining monomial. The constant part, if any, goes
/// into the last slot.
pub fn linear_rows(p: &Poly, ncols: usize) -> Vec<Vec<Q>> {
    let mut groups: BTreeMap<Monomial, Vec<Q>> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (coefs, rest) = m.partition(|a| matches!(a, Atom::Coef(_)));
        let col = match coefs.as_slice() {
            [] => ncols,
            [(Atom::Coef(i), 1)] => *i as usize,
            _ => panic!("expression is not linear in the ansatz coefficients"),
        };
        let row = groups.entry(rest).or_insert_with(|| vec![Q::zero(); ncols + 1]);
        row[col] += c;
    }
    groups.into_values().collect()
}

/// The scalar linear system obtained by substituting the ansatz.
#[derive(Clone, Debug)]
pub struct ScalarSystem {
    pub ncols: usize,
    pub echelon: Echelon,
    pub equations: usize,
}

pub fn expand_ansatz(sys: &DeterminingSystem, ansatz: &Ansatz) -> ScalarSystem {
    expand_rows(sys.rows.iter().map(|r| &r.expr), ansatz)
}

pub fn expand_rows<'a>(rows: impl Iterator<Item = &'a Expr>, ansatz: &Ansatz) -> ScalarSystem {
    let ncols = ansatz.columns.len();
    let mut echelon = Echelon::new(ncols);
    let mut equations = 0;
    let mut cache = HashMap::new();
    for r in rows {
        let e = ansatz.substitute(r, &mut cache);
        for mut row in linear_rows(e.numerator(), ncols) {
            row.pop();
            equations += 1;
            echelon.insert(row);
        }
    }
    ScalarSystem { ncols, echelon, equations }
}

/// Generators of the solution space, as integer-scaled coefficient vectors.
pub fn solve_linear(sys: &ScalarSystem) -> Vec<Vec<Q>> {
    sys.echelon.nullspace().iter().map(|v| linalg::integer_rescale(v)).collect()
}

/// Residual of `pr X_E (lhs - rhs)` on solutions; zero for a symmetry.
pub fn verify_candidate(eq: &DDEquation, x: &VectorField) -> Result<Expr, JetError> {
    verify_with(&Reducer::new(eq, None), eq, x)
}

pub fn verify_with(reducer: &Reducer<'_>, eq: &DDEquation, x: &VectorField) -> Result<Expr, JetError> {
    reducer.reduce(&x.apply_prolonged_evolutionary(&eq.residual()))
}

/// Coordinates of `target` in the span of `basis`, if it lies there.
pub fn coordinates(basis: &[VectorField], target: &VectorField) -> Option<Vec<Q>> {
    let n = basis.len();
    let mut a: Vec<Vec<Q>> = Vec::new();
    let mut b: Vec<Q> = Vec::new();
    let slots = |f: &VectorField| vec![f.tau.clone(), f.xi.clone(), f.eta.clone(), f.phi.clone()];
    let bs: Vec<Vec<Expr>> = basis.iter().map(slots).collect();
    let ts = slots(target);
    for s in 0..4 {
        let mut e = -&ts[s];
        for (k, f) in bs.iter().enumerate() {
            if !f[s].is_zero() {
                e = e + Expr::coef(k as u32) * &f[s];
            }
        }
        for row in linear_rows(e.numerator(), n) {
            let mut row = row;
            let rhs = -row.pop().unwrap();
            a.push(row);
            b.push(rhs);
        }
    }
    linalg::solve(&a, &b, n)
}

/// A finite-dimensional algebra of vector fields with its bracket table.
#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    pub fields: Vec<VectorField>,
    /// `constants[i][j][k]`: coefficient of `X_k` in `[X_i, X_j]`.
    pub constants: Vec<Vec<Vec<Q>>>,
    pub closed: bool,
    /// Brackets that fall outside the span.
    pub defects: Vec<(usize, usize, VectorField)>,
}

pub fn structure_constants(fields: &[VectorField]) -> LieAlgebraBasis {
    let n = fields.len();
    let mut constants = vec![vec![vec![Q::zero(); n]; n]; n];
    let mut defects = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let c = fields[i].commutator(&fields[j]).expect("basis fields share a kind");
            match coordinates(fields, &c) {
                Some(v) => {
                    for k in 0..n {
                        constants[j][i][k] = -v[k].clone();
                        constants[i][j][k] = v[k].clone();
                    }
                }
                None => defects.push((i, j, c)),
            }
        }
    }
    LieAlgebraBasis { fields: fields.to_vec(), constants, closed: defects.is_empty(), defects }
}

impl LieAlgebraBasis {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// Matrix of `ad(X_i)` restricted to `on`: row `r` holds the coordinates
    /// of `[X_i, X_{on[r]}]` in the basis `on`.
    pub fn adjoint_on(&self, i: usize, on: &[usize]) -> Matrix {
        on.iter().map(|&j| on.iter().map(|&k| self.constants[i][j][k].clone()).collect()).collect()
    }

    /// Full matrix of `ad(X_i)`, rows indexed as in [`Self::adjoint_on`].
    pub fn adjoint(&self, i: usize) -> Matrix {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.adjoint_on(i, &all)
    }

    /// Largest Jacobi-identity violation count (zero when the table is a Lie
    /// algebra).
    #[allow(clippy::needless_range_loop)]
    pub fn jacobi_violations(&self) -> usize {
        let n = self.dim();
        let c = &self.constants;
        let mut bad = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut s = Q::zero();
                        for l in 0..n {
                            s += &c[i][j][l] * &c[l][k][m];
                            s += &c[j][k][l] * &c[l][i][m];
                            s += &c[k][i][l] * &c[l][j][m];
                        }
                        if !s.is_zero() {
                            bad += 1;
                        }
                    }
                }
            }
        }
        bad
    }

    /// Basis elements whose adjoint action is nilpotent.
    pub fn ad_nilpotent(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| linalg::is_nilpotent(&self.adjoint(i))).collect()
    }
}

/// Readable basis: components along single-monomial generators are removed
/// from the others, and each vector is scaled to coprime integers with the
/// leading independent-variable coefficient (or, failing that, the leading
/// `phi` coefficient) positive.
pub fn present(mut vectors: Vec<Vec<Q>>, ansatz: &Ansatz) -> Vec<Vec<Q>> {
    let singles: Vec<usize> = vectors
        .iter()
        .filter(|v| v.iter().filter(|x| !x.is_zero()).count() == 1)
        .map(|v| v.iter().position(|x| !x.is_zero()).unwrap())
        .collect();
    for v in vectors.iter_mut() {
        if v.iter().filter(|x| !x.is_zero()).count() > 1 {
            for &c in &singles {
                v[c] = Q::zero();
            }
        }
    }
    let is_phi = |c: &Column| &*ansatz.unknowns[c.unknown].name == "phi";
    let order: Vec<usize> = (0..ansatz.columns.len())
        .filter(|&i| !is_phi(&ansatz.columns[i]))
        .chain((0..ansatz.columns.len()).filter(|&i| is_phi(&ansatz.columns[i])))
        .collect();
    vectors
        .into_iter()
        .map(|v| {
            let mut w = linalg::integer_rescale(&v);
            if order.iter().map(|&i| &w[i]).find(|x| !x.is_zero()).is_some_and(|x| *x < Q::zero()) {
                w.iter_mut().for_each(|x| *x = -x.clone());
            }
            w
        })
        .collect()
}

/// Outcome of the full pipeline on one equation.
#[derive(Clone, Debug)]
pub struct Solution {
    pub ansatz: Ansatz,
    pub vectors: Vec<Vec<Q>>,
    pub generators: Vec<VectorField>,
    pub scalar_equations: usize,
    pub rank: usize,
}

pub fn solve_system(sys: &DeterminingSystem, cfg: &AnsatzConfig, kind: FieldKind) -> Solution {
    let ansatz = build_ansatz(&sys.unknowns, cfg);
    let scalar = expand_ansatz(sys, &ansatz);
    let vectors = present(solve_linear(&scalar), &ansatz);
    let generators = vectors.iter().map(|v| ansatz.field(v, kind)).collect();
    Solution { rank: scalar.echelon.rank(), scalar_equations: scalar.equations, ansatz, vectors, generators }
}
