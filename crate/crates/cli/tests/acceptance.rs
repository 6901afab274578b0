//! One pass/fail line per acceptance criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{expr, field_field, lattice_field, Space};
use dds_cli::input::{read_fields, read_problem};
use dds_core::det::{determining_system, no_reduction, DeterminingSystem};
use dds_core::expr::{collect, parse, parse_with, Atom, Direction, JetVar, ParseContext, Q};
use dds_core::jet::{shift, total_derivative, DDEquation, EqClass};
use dds_core::solve::{
    build_ansatz, coordinates, expand_rows, solve_linear, structure_constants, verify_candidate, AnsatzConfig, NBasis,
};
use dds_core::vfield::VectorField;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRunner};

const TODA_LIMIT: Duration = Duration::from_secs(10);
const YDKN_LIMIT: Duration = Duration::from_secs(30);
const NUMCHECK_LIMIT: Duration = Duration::from_secs(60);
const SLOPE_PASS: f64 = 1.8;
const SLOPE_CONTROL: f64 = 1.3;
const EQUIVALENCE_CASES: u32 = 64;
const KERNEL_CASES: u32 = 1000;

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;
type SlopeRow = (String, Option<f64>, bool);

fn input(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../equations").join(name)
}

fn dds(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_dds")).args(args).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Runs `analyze` and reads the generators back; returns them with the runtime.
fn analyze(dde: &str, extra: &[&str], dir: &Path) -> Result<(Vec<VectorField>, Duration), String> {
    let out = dir.join(format!("{dde}.{}.fields", extra.len()));
    let file = input(dde);
    let mut args = vec!["analyze", p(&file), "--fields-out", p(&out)];
    args.extend_from_slice(extra);
    let t = Instant::now();
    let (code, text) = dds(&args);
    let elapsed = t.elapsed();
    check(code == 0, format!("analyze {dde} exited {code}: {text}"))?;
    let problem = read_problem(&input(dde)).map_err(|e| e.to_string())?;
    let set = read_fields(&out, &problem).map_err(|e| e.to_string())?;
    Ok((set.fields.into_iter().map(|f| f.field).collect(), elapsed))
}

fn lat(tau: &str, phi: &str) -> VectorField {
    VectorField::lattice(parse(tau).unwrap(), parse(phi).unwrap())
}

fn same_span(a: &[VectorField], b: &[VectorField]) -> bool {
    a.len() == b.len() && a.iter().all(|x| coordinates(b, x).is_some()) && b.iter().all(|x| coordinates(a, x).is_some())
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

fn toda_algebra(dir: &Path) -> Outcome {
    let (gens, t) = analyze("toda.dde", &[], dir)?;
    check(gens.len() == 4, format!("dimension {}", gens.len()))?;
    let expected = [lat("1", "0"), lat("0", "t"), lat("0", "1"), lat("t", "2*n")];
    check(same_span(&gens, &expected), "basis does not span the expected algebra")?;
    check(t < TODA_LIMIT, format!("runtime {t:?}"))?;
    Ok(format!("dim 4, spans expected basis, {:.2}s", t.as_secs_f64()))
}

fn ydkn_algebra(dir: &Path) -> Outcome {
    let (gens, t) = analyze("ydkn_special.dde", &[], dir)?;
    check(gens.len() == 5, format!("dimension {}", gens.len()))?;
    let basis = [lat("1", "0"), lat("0", "u[0]^2"), lat("0", "alt*u[0]^2"), lat("t", "-1/2*u[0]"), lat("0", "alt*u[0]")];
    check(same_span(&gens, &basis), "basis does not span the expected algebra")?;
    let alg = structure_constants(&basis);
    let z = q(0, 1);
    let ad4 = vec![vec![q(-1, 1), z.clone(), z.clone()], vec![z.clone(), q(-1, 2), z.clone()], vec![z.clone(), z.clone(), q(-1, 2)]];
    let ad5 = vec![vec![z.clone(), z.clone(), z.clone()], vec![z.clone(), z.clone(), q(1, 1)], vec![z.clone(), q(1, 1), z.clone()]];
    check(alg.adjoint_on(3, &[0, 1, 2]) == ad4, "ad(X4) differs")?;
    check(alg.adjoint_on(4, &[0, 1, 2]) == ad5, "ad(X5) differs")?;
    check(alg.constants[3][4].iter().all(|c| *c == z), "[X4, X5] != 0")?;
    check(t < YDKN_LIMIT, format!("runtime {t:?}"))?;
    Ok(format!("dim 5, adjoint matrices match, [X4,X5]=0, {:.2}s", t.as_secs_f64()))
}

fn equation(class: EqClass, rhs: &str) -> DDEquation {
    DDEquation::new(class, parse(rhs).unwrap(), vec![]).unwrap()
}

fn edge_rows() -> Outcome {
    let eq = equation(EqClass::FirstOrderLattice, "u[-1]*u[0]^2*u[1]/(u[1] - u[-1])");
    let sys = determining_system(&eq, &no_reduction()).map_err(|e| e.to_string())?;
    let edges = [Atom::Jet(JetVar::u(2)), Atom::Jet(JetVar::u(-2))];
    let rows: Vec<_> = sys.rows.iter().filter(|r| r.key.atoms.iter().any(|(a, _)| edges.contains(a))).collect();
    check(!rows.is_empty(), "no rows keyed by u[2] or u[-2]")?;
    let cfg = AnsatzConfig { udeg: 4, tdeg: 3, nbasis: vec![NBasis::One, NBasis::N, NBasis::Alt] };
    let ansatz = build_ansatz(&sys.unknowns, &cfg);
    let vectors = solve_linear(&expand_rows(rows.iter().map(|r| &r.expr), &ansatz));
    let tau = sys.unknowns.iter().position(|u| &*u.name == "tau").unwrap();
    for v in &vectors {
        for (c, col) in v.iter().zip(&ansatz.columns) {
            if *c == q(0, 1) {
                continue;
            }
            let ok = if col.unknown == tau {
                col.udeg == 0 && col.degs.0 <= 1 && col.basis == NBasis::One
            } else {
                col.udeg <= 2 && col.basis != NBasis::N
            };
            check(ok, format!("solution uses column {}", col.monomial))?;
        }
    }
    Ok(format!("{} edge rows, {} solutions, tau affine in t, phi quadratic in u over {{1, alt}}", rows.len(), vectors.len()))
}

fn toda2d_families() -> Outcome {
    let (code, text) = dds(&["verify", p(&input("toda2d.dde")), "--fields", p(&input("toda2d.fields"))]);
    check(code == 0, format!("verify exited {code}: {text}"))?;
    let problem = read_problem(&input("toda2d.dde")).map_err(|e| e.to_string())?;
    let set = read_fields(&input("toda2d.fields"), &problem).map_err(|e| e.to_string())?;
    let get = |n: &str| set.fields.iter().find(|f| f.name == n).map(|f| f.field.clone()).ok_or(format!("no {n}"));
    let bracket = get("Xf")?.commutator(&get("Xf2")?).map_err(|e| e.to_string())?;
    let r = verify_candidate(&problem.equation, &bracket).map_err(|e| e.to_string())?;
    check(r.is_zero(), format!("bracket residual {r}"))?;
    Ok(format!("{} families verify 0; [X(f), X(f2)] verifies 0", set.fields.len()))
}

fn emergence(dir: &Path) -> Outcome {
    let cases: [(&str, EqClass, &str, &[&str]); 3] = [
        (
            "volterra-window.dde",
            EqClass::FirstOrderLattice,
            "u[0]*(u[1] - u[-1])",
            &["u[1]*u[0]*(tau[0] - tau[1])", "u[-1]*u[0]*(tau[0] - tau[-1])"],
        ),
        (
            "toda.dde",
            EqClass::TodaType,
            "exp(u[-1] - u[0]) - exp(u[0] - u[1])",
            &["exp(u[0] - u[1])*(tau[0] - tau[1])", "exp(u[-1] - u[0])*(tau[0] - tau[-1])"],
        ),
        (
            "toda2d.dde",
            EqClass::TodaFieldType,
            "exp(u[-1] - u[0]) - exp(u[0] - u[1])",
            &[
                "(xi[-1] - xi[0])*exp(u[-1] - u[0])",
                "(eta[-1] - eta[0])*exp(u[-1] - u[0])",
                "(xi[1] - xi[0])*exp(u[0] - u[1])",
                "(eta[1] - eta[0])*exp(u[0] - u[1])",
            ],
        ),
    ];
    let mut rows = 0;
    for (file, class, rhs, templates) in cases {
        let sys: DeterminingSystem =
            determining_system(&equation(class, rhs), &no_reduction()).map_err(|e| e.to_string())?;
        let ctx = ParseContext { params: vec![], unknowns: sys.unknowns.clone() };
        for t in templates {
            check(sys.contains_row(&parse_with(t, &ctx).unwrap()), format!("{file}: missing row {t}"))?;
            rows += 1;
        }
        let (with, _) = analyze(file, &[], dir)?;
        let (without, _) = analyze(file, &["--no-theorems"], dir)?;
        check(same_span(&with, &without), format!("{file}: algebra changes without reductions"))?;
    }
    Ok(format!("{rows} template rows found; algebras unchanged for 3 classes"))
}

/// Runs `body` on `cases` random values; returns the first failure.
fn sample<S: Strategy>(strategy: S, cases: u32, body: impl Fn(&S::Value) -> Result<(), String>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, ..Config::default() });
    for _ in 0..cases {
        let v = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        body(&v)?;
    }
    Ok(())
}

fn equivalence() -> Outcome {
    let residual_zero = |(x, e): &(VectorField, dds_core::expr::Expr)| {
        let r = x.equivalence_residual(e);
        check(r.is_zero(), format!("residual {r} for {} on {e}", x.to_dsl()))
    };
    sample((lattice_field(), expr(Space::Lattice, 2)), EQUIVALENCE_CASES, residual_zero)?;
    sample((field_field(), expr(Space::Field, 2)), EQUIVALENCE_CASES, residual_zero)?;
    Ok(format!("{} lattice and {} field cases normalize to 0", EQUIVALENCE_CASES, EQUIVALENCE_CASES))
}

fn numcheck_slopes(dir: &Path, file: &str, fields: &str) -> Result<(i32, Vec<SlopeRow>), String> {
    let json = dir.join(format!("{file}.{fields}.json"));
    let (code, text) = dds(&["numcheck", p(&input(file)), "--fields", p(&input(fields)), "--json", p(&json)]);
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&json).map_err(|e| format!("{e}: {text}"))?).map_err(|e| e.to_string())?;
    let rows = v["results"]
        .as_array()
        .ok_or("no results")?
        .iter()
        .map(|r| (r["name"].as_str().unwrap_or("?").to_string(), r["slope"].as_f64(), r["at_floor"].as_bool() == Some(true)))
        .collect();
    Ok((code, rows))
}

fn numerical() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t = Instant::now();
    let mut worst = f64::INFINITY;
    let mut floor = 0;
    for (file, fields) in [("toda.dde", "toda.fields"), ("ydkn_special.dde", "ydkn_special.fields")] {
        let (code, rows) = numcheck_slopes(dir.path(), file, fields)?;
        check(code == 0, format!("numcheck {file} exited {code}"))?;
        for (name, slope, at_floor) in rows {
            if at_floor {
                floor += 1;
                continue;
            }
            let s = slope.ok_or(format!("{file} {name}: no slope"))?;
            check(s >= SLOPE_PASS, format!("{file} {name}: slope {s:.3}"))?;
            worst = worst.min(s);
        }
    }
    let mut control = f64::NEG_INFINITY;
    for file in ["toda.dde", "ydkn_special.dde"] {
        let (_, rows) = numcheck_slopes(dir.path(), file, "scaling.fields")?;
        let s = rows[0].1.ok_or("control has no slope")?;
        check(s <= SLOPE_CONTROL, format!("{file} control slope {s:.3}"))?;
        control = control.max(s);
    }
    let elapsed = t.elapsed();
    check(elapsed < NUMCHECK_LIMIT, format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "min slope {worst:.3} ({floor} at floor), control slope {control:.3}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn kernel_invariants() -> Outcome {
    sample(expr(Space::Lattice, 3), KERNEL_CASES, |e| {
        let again = parse(&e.to_string()).unwrap();
        check((&again - e).is_zero(), format!("reparse changed {e}"))?;
        check(parse(&again.to_string()).unwrap().to_string() == again.to_string(), format!("printing unstable for {e}"))
    })?;
    sample((expr(Space::Lattice, 3), expr(Space::Field, 2), -2i32..=2), KERNEL_CASES, |(e, f, k)| {
        check(shift(&total_derivative(e, Direction::T), *k) == total_derivative(&shift(e, *k), Direction::T), format!("D_t vs shift on {e}"))?;
        for d in [Direction::X, Direction::Y] {
            check(shift(&total_derivative(f, d), *k) == total_derivative(&shift(f, *k), d), format!("D_x/D_y vs shift on {f}"))?;
        }
        check(shift(&shift(e, *k), -*k) == *e, format!("shift inverse on {e}"))
    })?;
    sample(expr(Space::Lattice, 3), KERNEL_CASES, |e| {
        let vars: std::collections::BTreeSet<Atom> = e
            .jets()
            .into_iter()
            .map(Atom::Jet)
            .filter(|a| e.denominator_factors().iter().all(|(p, _)| !dds_core::expr::Expr::from_poly(p.clone()).atoms().contains(a)))
            .collect();
        let parts = collect(e, &vars, true).map_err(|err| err.to_string())?;
        let sum: dds_core::expr::Expr = parts.iter().map(|(k, c)| k.to_expr() * c).sum();
        check((&sum - e).is_zero(), format!("collect does not reconstruct {e}"))
    })?;
    let jacobi = |x: &VectorField, y: &VectorField, z: &VectorField| {
        let b = |a: &VectorField, b: &VectorField| a.commutator(b).unwrap();
        let s = b(&b(x, y), z).combine(&b(&b(y, z), x), |p, q| p + q).unwrap();
        s.combine(&b(&b(z, x), y), |p, q| p + q).unwrap().is_zero()
    };
    sample((lattice_field(), lattice_field(), lattice_field()), KERNEL_CASES, |(x, y, z)| check(jacobi(x, y, z), "lattice Jacobi"))?;
    sample((field_field(), field_field(), field_field()), KERNEL_CASES, |(x, y, z)| check(jacobi(x, y, z), "field Jacobi"))?;
    Ok(format!("4 suites x {KERNEL_CASES} cases, 0 failures"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(&str, Criterion)> = vec![
        ("Toda lattice algebra", Box::new(|| toda_algebra(dir.path()))),
        ("YdKN special-case algebra", Box::new(|| ydkn_algebra(dir.path()))),
        ("edge-row ansatz constraint", Box::new(edge_rows)),
        ("2D Toda families", Box::new(toda2d_families)),
        ("reduction emergence", Box::new(|| emergence(dir.path()))),
        ("prolongation equivalence", Box::new(equivalence)),
        ("numerical flow commutation", Box::new(numerical)),
        ("kernel invariants", Box::new(kernel_invariants)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
