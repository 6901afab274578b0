//! Determining equations: classification, construction and splitting.

use std::collections::{BTreeMap, BTreeSet};

use crate::expr::{collect, Arg, Atom, CollectKey, Expr, ExprError, JetVar, NDep, UnknownFn};
use crate::jet::{DDEquation, EqClass, JetError, Reducer};
use crate::vfield::VectorField;

/// Structural simplification of the unknown coefficients implied by the
/// shape of the equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// No simplification; `tau(t, u)` or `xi, eta (x, y, u)` stay general.
    None,
    /// `tau` depends on `t` alone.
    TauTimeOnly,
    /// `tau` depends on `t` alone and is `period`-periodic in `n`; further
    /// periods, if any, are imposed as extra rows.
    TauPeriodic { period: u32, extra: Vec<u32> },
    /// `xi` and `eta` depend on `(x, y)` alone.
    XiEtaIndependent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub reduction: Reduction,
    /// Edge jets `u[k]` with `df/du[k] != 0` that justify the reduction.
    pub witnesses: Vec<JetVar>,
    pub summary: String,
}

fn depends_on(f: &Expr, k: i32) -> bool {
    !f.diff(&Atom::Jet(JetVar::u(k))).is_zero()
}

pub fn classify(eq: &DDEquation) -> ClassReport {
    let f = &eq.rhs;
    let neighbours: Vec<JetVar> = [-1, 1].into_iter().filter(|k| depends_on(f, *k)).map(JetVar::u).collect();
    match eq.class {
        EqClass::FirstOrderLattice => {
            let (k, m) = eq.window;
            let mut witnesses = Vec::new();
            let mut periods = Vec::new();
            if m > 0 && depends_on(f, m) {
                witnesses.push(JetVar::u(m));
                periods.push(m as u32);
            }
            if k < 0 && depends_on(f, k) {
                witnesses.push(JetVar::u(k));
                periods.push(k.unsigned_abs());
            }
            if periods.is_empty() {
                return ClassReport {
                    reduction: Reduction::None,
                    witnesses,
                    summary: "no edge dependence; tau(t, u) stays general".into(),
                };
            }
            if periods.contains(&1) {
                return ClassReport {
                    reduction: Reduction::TauTimeOnly,
                    witnesses,
                    summary: "nearest-neighbour dependence: tau = tau(t)".into(),
                };
            }
            let period = periods[0];
            let extra: Vec<u32> = periods[1..].iter().copied().filter(|p| *p != period).collect();
            let summary = format!("window {k}..{m}: tau = tau_n(t) with period {period}")
                + &extra.iter().map(|p| format!(" and {p}")).collect::<String>();
            ClassReport { reduction: Reduction::TauPeriodic { period, extra }, witnesses, summary }
        }
        EqClass::TodaType | EqClass::TodaFieldType if neighbours.is_empty() => ClassReport {
            reduction: Reduction::None,
            witnesses: neighbours,
            summary: "no neighbour dependence; coefficients stay general".into(),
        },
        EqClass::TodaType => ClassReport {
            reduction: Reduction::TauTimeOnly,
            witnesses: neighbours,
            summary: "neighbour dependence: tau = tau(t)".into(),
        },
        EqClass::TodaFieldType => ClassReport {
            reduction: Reduction::XiEtaIndependent,
            witnesses: neighbours,
            summary: "neighbour dependence: xi = xi(x, y), eta = eta(x, y)".into(),
        },
    }
}

/// A report that applies no reduction.
pub fn no_reduction() -> ClassReport {
    ClassReport { reduction: Reduction::None, witnesses: Vec::new(), summary: "reductions disabled".into() }
}

/// Unknown coefficient functions in column order: `phi` first, then
/// `tau` or `xi, eta`.
pub fn unknown_functions(eq: &DDEquation, reduction: &Reduction) -> Vec<UnknownFn> {
    if eq.class.is_field() {
        let phi = UnknownFn::new("phi", &[Arg::X, Arg::Y, Arg::U], NDep::Free);
        let (args, ndep): (&[Arg], NDep) = match reduction {
            Reduction::XiEtaIndependent => (&[Arg::X, Arg::Y], NDep::Independent),
            _ => (&[Arg::X, Arg::Y, Arg::U], NDep::Free),
        };
        vec![phi, UnknownFn::new("xi", args, ndep), UnknownFn::new("eta", args, ndep)]
    } else {
        let phi = UnknownFn::new("phi", &[Arg::T, Arg::U], NDep::Free);
        let tau = match reduction {
            Reduction::TauTimeOnly => UnknownFn::new("tau", &[Arg::T], NDep::Independent),
            Reduction::TauPeriodic { period, .. } => UnknownFn::new("tau", &[Arg::T], NDep::Periodic(*period)),
            _ => UnknownFn::new("tau", &[Arg::T, Arg::U], NDep::Free),
        };
        vec![phi, tau]
    }
}

/// The vector field whose coefficients are the unknown functions at site n.
pub fn symbolic_field(unknowns: &[UnknownFn], field_class: bool) -> VectorField {
    let at = |i: usize| Expr::unknown(unknowns[i].at(0));
    if field_class {
        VectorField::field(at(1), at(2), at(0))
    } else {
        VectorField::lattice(at(1), at(0))
    }
}

/// `pr X_E (lhs - rhs)` reduced on solutions, for symbolic `X`.
pub fn build_determining(eq: &DDEquation, report: &ClassReport) -> Result<Expr, JetError> {
    let unknowns = unknown_functions(eq, &report.reduction);
    let x = symbolic_field(&unknowns, eq.class.is_field());
    let raw = x.apply_prolonged_evolutionary(&eq.residual());
    Reducer::new(eq, None).reduce(&raw)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    /// Monomial in the splitting variables whose coefficient this row is,
    /// or a label for rows imposed directly.
    pub origin: String,
    /// Splitting variables in the monomial (empty for imposed rows).
    pub key: CollectKey,
    pub expr: Expr,
}

/// Linear homogeneous constraints on the unknown functions.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingSystem {
    pub unknowns: Vec<UnknownFn>,
    pub rows: Vec<Row>,
    pub split_vars: Vec<JetVar>,
    pub reduction: Reduction,
    /// Variables for which splitting fell back to differentiation.
    pub differentiated: Vec<JetVar>,
}

impl DeterminingSystem {
    /// True if some row equals `template` up to a non-zero factor that is
    /// free of the unknowns.
    pub fn contains_row(&self, template: &Expr) -> bool {
        let t = row_normal_form(template);
        self.rows.iter().any(|r| r.expr == t)
    }
}

/// A row made canonical up to factors that cannot vanish identically: the
/// numerator with its leading coefficient normalized to one.
pub fn row_normal_form(e: &Expr) -> Expr {
    let mut p = e.numerator().clone();
    if p.is_zero() {
        return Expr::zero();
    }
    p.make_monic();
    let mut atoms_common: Option<BTreeMap<Atom, u32>> = None;
    for (m, _) in p.terms() {
        let here: BTreeMap<Atom, u32> =
            m.atoms().iter().filter(|(a, _)| a.as_unknown().is_none()).cloned().collect();
        atoms_common = Some(match atoms_common {
            None => here,
            Some(c) => c
                .into_iter()
                .filter_map(|(a, k)| here.get(&a).map(|j| (a, k.min(*j))))
                .collect(),
        });
    }
    let mut e = Expr::from_poly(p);
    // Drop monomial factors in the non-unknown atoms; they are non-zero
    // functions and do not change the constraint.
    for (a, k) in atoms_common.unwrap_or_default() {
        if a != Atom::Alt {
            e = e.checked_div(&Expr::atom(a).pow(k as i64).expect("positive power")).expect("non-zero atom");
        }
    }
    let mut p = e.numerator().clone();
    p.make_monic();
    Expr::from_poly(p)
}

fn clears(e: &Expr, vars: &BTreeSet<Atom>) -> Expr {
    let in_vars = |a: &Atom| vars.contains(a);
    let mut mult = Expr::one();
    for (p, m) in e.denominator_factors() {
        let hit = p.contains_atom(&in_vars)
            || p.terms().any(|(mono, _)| mono.exp_arg().is_some_and(|x| x.contains(&in_vars)));
        if hit {
            mult = mult * Expr::from_poly(p.pow(*m));
        }
    }
    e * mult
}

const MAX_FALLBACK_DEPTH: u32 = 4;

fn split_rec(
    e: &Expr,
    vars: &BTreeSet<Atom>,
    depth: u32,
    out: &mut Vec<(CollectKey, Expr)>,
    differentiated: &mut BTreeSet<JetVar>,
) -> Result<(), ExprError> {
    if e.is_zero() {
        return Ok(());
    }
    let cleared = clears(e, vars);
    match collect(&cleared, vars, true) {
        Ok(map) => {
            out.extend(map);
            Ok(())
        }
        Err(ExprError::NotPolynomialInVars(msg)) => {
            if depth >= MAX_FALLBACK_DEPTH {
                return Err(ExprError::NotPolynomialInVars(msg));
            }
            // Differentiate along the outermost offending variable.
            let mut cands: Vec<&Atom> = vars.iter().collect();
            cands.sort_by_key(|a| std::cmp::Reverse(a.as_jet().map(|j| j.shift.abs()).unwrap_or(0)));
            let single = |a: &Atom| BTreeSet::from([a.clone()]);
            let v = cands
                .into_iter()
                .find(|a| collect(&clears(&cleared, &single(a)), &single(a), true).is_err())
                .cloned()
                .ok_or(ExprError::NotPolynomialInVars(msg))?;
            if let Some(j) = v.as_jet() {
                differentiated.insert(j);
            }
            let mut rest = vars.clone();
            rest.remove(&v);
            split_rec(&cleared.diff(&v), vars, depth + 1, out, differentiated)?;
            split_rec(&cleared, &rest, depth + 1, out, differentiated)
        }
        Err(e) => Err(e),
    }
}

/// Splits a determining expression into rows, one per independent monomial
/// in the variables that no unknown function depends on.
pub fn split(det: &Expr, unknowns: &[UnknownFn], reduction: &Reduction) -> Result<DeterminingSystem, ExprError> {
    let mut u_args = BTreeSet::new();
    for a in det.atoms() {
        if let Atom::Unknown(app) = a {
            if app.func.has(Arg::U) {
                u_args.insert(app.u_jet());
            }
        }
    }
    let split_vars: Vec<JetVar> = det.jets().into_iter().filter(|j| !u_args.contains(j)).collect();
    let vars: BTreeSet<Atom> = split_vars.iter().map(|j| Atom::Jet(*j)).collect();
    let mut raw = Vec::new();
    let mut differentiated = BTreeSet::new();
    split_rec(det, &vars, 0, &mut raw, &mut differentiated)?;

    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |origin: String, key: CollectKey, e: &Expr, rows: &mut Vec<Row>| {
        let nf = row_normal_form(e);
        if !nf.is_zero() && seen.insert(nf.clone()) {
            rows.push(Row { origin, key, expr: nf });
        }
    };
    for (key, c) in &raw {
        push(key.to_string(), key.clone(), c, &mut rows);
    }
    if let Reduction::TauPeriodic { period, extra } = reduction {
        if let Some(tau) = unknowns.iter().find(|u| &*u.name == "tau") {
            for q in extra {
                let s = (*q % *period) as i32;
                let e = Expr::unknown(tau.at(s)) - Expr::unknown(tau.at(0));
                push(format!("period {q}"), CollectKey::one(), &e, &mut rows);
            }
        }
    }
    Ok(DeterminingSystem {
        unknowns: unknowns.to_vec(),
        rows,
        split_vars,
        reduction: reduction.clone(),
        differentiated: differentiated.into_iter().collect(),
    })
}

/// Classification, construction and splitting in one call.
pub fn determining_system(eq: &DDEquation, report: &ClassReport) -> Result<DeterminingSystem, JetError> {
    let det = build_determining(eq, report)?;
    let unknowns = unknown_functions(eq, &report.reduction);
    Ok(split(&det, &unknowns, &report.reduction)?)
}
