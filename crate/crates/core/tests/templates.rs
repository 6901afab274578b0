//! Determining equations without structural reductions, compared with the
//! compatibility conditions written out by hand in terms of `f`.

use dds_core::det::{classify, determining_system, no_reduction, unknown_functions, Reduction};
use dds_core::expr::{parse, parse_with, Atom, Direction, Expr, ParseContext};
use dds_core::jet::{on_solution_reduce, shift, total_derivative, DDEquation, EqClass};
use dds_core::solve::{coordinates, solve_system, AnsatzConfig, NBasis};
use dds_core::vfield::{FieldKind, VectorField};

fn equation(class: EqClass, rhs: &str) -> DDEquation {
    DDEquation::new(class, parse(rhs).unwrap(), vec![]).unwrap()
}

fn jet(src: &str) -> Atom {
    Atom::Jet(parse(src).unwrap().jets().into_iter().next().unwrap())
}

/// Parser for the unconstrained unknowns of `eq`.
fn ctx(eq: &DDEquation) -> ParseContext {
    ParseContext { params: vec![], unknowns: unknown_functions(eq, &Reduction::None) }
}

fn partial(f: &Expr, v: &str) -> Expr {
    f.diff(&jet(v))
}

/// `sum_l f_{u[l]} (phi[l] - tau[l] f[l]) + (tau_t + tau_u f) f
///  + tau (f_t + sum_l f_{u[l]} f[l]) - phi_t - phi_u f`
fn first_order_template(eq: &DDEquation) -> Expr {
    let c = ctx(eq);
    let u = |s: &str| parse_with(s, &c).unwrap();
    let f = &eq.rhs;
    let mut out = (u("tau_t[0]") + u("tau_u[0]") * f) * f - u("phi_t[0]") - u("phi_u[0]") * f;
    let mut inner = f.diff(&Atom::Sym(dds_core::expr::Symbol::T));
    for l in -1..=1 {
        let fl = partial(f, &format!("u[{l}]"));
        let sf = shift(f, l);
        out = out + &fl * (u(&format!("phi[{l}]")) - u(&format!("tau[{l}]")) * &sf);
        inner = inner + &fl * &sf;
    }
    out + u("tau[0]") * inner
}

/// The second-order analogue with `v = ut[0]`.
fn toda_template(eq: &DDEquation) -> Expr {
    let c = ctx(eq);
    let u = |s: &str| parse_with(s, &c).unwrap();
    let f = &eq.rhs;
    let v = parse("ut[0]").unwrap();
    let v2 = &v * &v;
    let mut out = partial(f, "ut[0]") * (u("phi_t[0]") + (u("phi_u[0]") - u("tau_t[0]")) * &v - u("tau_u[0]") * &v2);
    for k in -1..=1 {
        let vk = parse(&format!("ut[{k}]")).unwrap();
        out = out + partial(f, &format!("u[{k}]")) * (u(&format!("phi[{k}]")) + (u("tau[0]") - u(&format!("tau[{k}]"))) * vk);
    }
    out = out - u("phi_tt[0]")
        + (u("tau_tt[0]") - u("phi_tu[0]") * Expr::integer(2)) * &v
        + (u("tau_tu[0]") * Expr::integer(2) - u("phi_uu[0]")) * &v2
        + u("tau_uu[0]") * &v2 * &v
        + u("tau[0]") * f.diff(&Atom::Sym(dds_core::expr::Symbol::T))
        + (u("tau_t[0]") * Expr::integer(2) - u("phi_u[0]") + u("tau_u[0]") * Expr::integer(3) * &v) * f;
    out
}

/// `sum_k f_{u[k]} psi[k] + f_ux D_x psi + f_uy D_y psi - D_x D_y psi`,
/// reduced on solutions.
fn field_template(eq: &DDEquation) -> Expr {
    let c = ctx(eq);
    let psi = parse_with("phi[0] - xi[0]*ux[0] - eta[0]*uy[0]", &c).unwrap();
    let f = &eq.rhs;
    let dx = total_derivative(&psi, Direction::X);
    let dy = total_derivative(&psi, Direction::Y);
    let mut out = partial(f, "ux[0]") * &dx + partial(f, "uy[0]") * &dy - total_derivative(&dx, Direction::Y);
    for k in -1..=1 {
        out = out + partial(f, &format!("u[{k}]")) * shift(&psi, k);
    }
    on_solution_reduce(&out, eq, None).unwrap()
}

fn assert_matches(eq: &DDEquation, template: Expr) {
    let det = dds_core::det::build_determining(eq, &no_reduction()).unwrap();
    assert!((&det + &template).is_zero(), "determining expression differs from template:\n{det}\nvs\n{template}");
}

#[test]
fn first_order_compatibility_condition() {
    for rhs in [
        "u[0]*(u[1] - u[-1])",
        "u[-1]*u[0]^2*u[1]/(u[1] - u[-1])",
        "t*u[0] + exp(u[1] - u[-1])",
        "(n + 1)*u[1]^2 - alt*u[-1]",
    ] {
        let eq = equation(EqClass::FirstOrderLattice, rhs);
        assert_matches(&eq, first_order_template(&eq));
    }
}

#[test]
fn toda_compatibility_condition() {
    for rhs in [
        "exp(u[-1] - u[0]) - exp(u[0] - u[1])",
        "t*ut[0] + exp(u[-1] - u[0]) - exp(u[0] - u[1])",
        "ut[0]^2*u[1] - n*u[-1]",
    ] {
        let eq = equation(EqClass::TodaType, rhs);
        assert_matches(&eq, toda_template(&eq));
    }
}

#[test]
fn field_compatibility_condition() {
    for rhs in ["exp(u[-1] - u[0]) - exp(u[0] - u[1])", "x*ux[0] + uy[0]*u[1] - u[-1]^2"] {
        let eq = equation(EqClass::TodaFieldType, rhs);
        assert_matches(&eq, field_template(&eq));
    }
}

fn rows_present(eq: &DDEquation, templates: &[&str]) {
    let sys = determining_system(eq, &no_reduction()).unwrap();
    let c = ParseContext { params: vec![], unknowns: sys.unknowns.clone() };
    for t in templates {
        assert!(sys.contains_row(&parse_with(t, &c).unwrap()), "missing row {t}");
    }
}

#[test]
fn volterra_edge_rows() {
    let eq = equation(EqClass::FirstOrderLattice, "u[0]*(u[1] - u[-1])");
    rows_present(&eq, &["u[1]*u[0]*(tau[0] - tau[1])", "u[-1]*u[0]*(tau[0] - tau[-1])"]);
}

#[test]
fn toda_velocity_rows() {
    let eq = equation(EqClass::TodaType, "exp(u[-1] - u[0]) - exp(u[0] - u[1])");
    rows_present(
        &eq,
        &["-exp(u[0] - u[1])*(tau[0] - tau[1])", "exp(u[-1] - u[0])*(tau[0] - tau[-1])"],
    );
}

#[test]
fn field_gradient_rows() {
    let eq = equation(EqClass::TodaFieldType, "exp(u[-1] - u[0]) - exp(u[0] - u[1])");
    rows_present(
        &eq,
        &[
            "(xi[-1] - xi[0])*exp(u[-1] - u[0])",
            "(eta[-1] - eta[0])*exp(u[-1] - u[0])",
            "-(xi[1] - xi[0])*exp(u[0] - u[1])",
            "-(eta[1] - eta[0])*exp(u[0] - u[1])",
        ],
    );
}

fn same_span(a: &[VectorField], b: &[VectorField]) -> bool {
    a.len() == b.len() && a.iter().all(|x| coordinates(b, x).is_some()) && b.iter().all(|x| coordinates(a, x).is_some())
}

fn algebra_unchanged(eq: &DDEquation, cfg: &AnsatzConfig, kind: FieldKind) -> usize {
    let reduced = solve_system(&determining_system(eq, &classify(eq)).unwrap(), cfg, kind);
    let raw = solve_system(&determining_system(eq, &no_reduction()).unwrap(), cfg, kind);
    assert!(same_span(&reduced.generators, &raw.generators), "algebras differ for {}", eq.rhs);
    reduced.generators.len()
}

#[test]
fn solved_algebras_do_not_depend_on_reductions() {
    let cfg = AnsatzConfig::default();
    let toda = equation(EqClass::TodaType, "exp(u[-1] - u[0]) - exp(u[0] - u[1])");
    assert_eq!(algebra_unchanged(&toda, &cfg, FieldKind::LatticeOde), 4);
    let volterra = equation(EqClass::FirstOrderLattice, "u[0]*(u[1] - u[-1])");
    assert_eq!(algebra_unchanged(&volterra, &cfg, FieldKind::LatticeOde), 2);
    let ydkn = equation(EqClass::FirstOrderLattice, "u[-1]*u[0]^2*u[1]/(u[1] - u[-1])");
    let alt = AnsatzConfig { nbasis: vec![NBasis::One, NBasis::Alt], ..cfg.clone() };
    assert_eq!(algebra_unchanged(&ydkn, &alt, FieldKind::LatticeOde), 5);
    let field = equation(EqClass::TodaFieldType, "exp(u[-1] - u[0]) - exp(u[0] - u[1])");
    assert_eq!(algebra_unchanged(&field, &cfg, FieldKind::Field), 11);
}
