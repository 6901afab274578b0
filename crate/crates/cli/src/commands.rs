//! The four pipelines behind the `dds` subcommands.

use std::collections::BTreeMap;

use dds_core::det::{self, classify, no_reduction, Reduction};
use dds_core::expr::{Expr, Q};
use dds_core::jet::{DDEquation, JetError, Reducer};
use dds_core::numverify::{self, Boundary, SLOPE_PASS};
use dds_core::solve::{self, LieAlgebraBasis};
use dds_core::vfield::{NamedField, VectorField};

use num_traits::{One, Zero};

use crate::input::{FieldSet, Problem};
use crate::report::*;
use crate::{exit, CliError};

#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    pub no_theorems: bool,
    pub udeg: Option<u32>,
    pub tdeg: Option<u32>,
}

#[derive(Clone, Debug, Default)]
pub struct LatticeOverrides {
    pub sites: Option<usize>,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
}

fn jet_err(e: JetError) -> CliError {
    match e {
        JetError::IllFormed(m) => CliError::IllFormed(m),
        other => CliError::IllFormed(other.to_string()),
    }
}

pub fn echo(eq: &DDEquation) -> EquationEcho {
    EquationEcho {
        class: eq.class.name().into(),
        lhs: Expr::jet(eq.lhs).to_string(),
        rhs: eq.rhs.to_string(),
        parameters: eq.params.clone(),
    }
}

pub fn reduction_name(r: &Reduction) -> String {
    match r {
        Reduction::None => "none".into(),
        Reduction::TauTimeOnly => "tau depends on t only".into(),
        Reduction::TauPeriodic { period, extra } if extra.is_empty() => {
            format!("tau depends on t only, {period}-periodic in n")
        }
        Reduction::TauPeriodic { period, extra } => {
            let ex: Vec<String> = extra.iter().map(|p| p.to_string()).collect();
            format!("tau depends on t only, {period}-periodic in n, also periods {}", ex.join(", "))
        }
        Reduction::XiEtaIndependent => "xi, eta depend on (x, y) only".into(),
    }
}

fn coefficient_map(f: &VectorField) -> BTreeMap<String, String> {
    f.coefficient_names()
        .iter()
        .zip(f.coefficients())
        .map(|(n, c)| (n.to_string(), c.to_string()))
        .collect()
}

/// Writes `sum c_k X_k` with the given names.
pub fn combination(coords: &[Q], names: &[String]) -> String {
    let mut s = String::new();
    for (c, n) in coords.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        let neg = *c < Q::zero();
        let mag = if neg { -c.clone() } else { c.clone() };
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if !mag.is_one() {
            s.push_str(&format!("{mag}*"));
        }
        s.push_str(n);
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

pub fn structure_echo(alg: &LieAlgebraBasis, names: &[String]) -> StructureEcho {
    let n = alg.dim();
    let mut brackets = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let defect = alg.defects.iter().find(|(a, b, _)| *a == i && *b == j);
            let (operator, in_basis) = match defect {
                Some((_, _, c)) => (c.to_string(), None),
                None => {
                    let c = &alg.constants[i][j];
                    let op = alg.fields[i].commutator(&alg.fields[j]).map(|f| f.to_string()).unwrap_or_default();
                    (op, Some(combination(c, names)))
                }
            };
            brackets.push(BracketEcho { left: names[i].clone(), right: names[j].clone(), operator, in_basis });
        }
    }
    StructureEcho {
        closed: alg.closed,
        brackets,
        constants: alg
            .constants
            .iter()
            .map(|m| m.iter().map(|r| r.iter().map(|q| q.to_string()).collect()).collect())
            .collect(),
        jacobi_violations: if alg.closed { alg.jacobi_violations() } else { 0 },
        ad_nilpotent: if alg.closed { alg.ad_nilpotent().into_iter().map(|i| names[i].clone()).collect() } else { vec![] },
    }
}

pub fn analyze(problem: &Problem, opts: &AnalyzeOptions) -> Result<AnalysisReport, CliError> {
    let eq = &problem.equation;
    let report = if opts.no_theorems { no_reduction() } else { classify(eq) };
    let detexpr = det::build_determining(eq, &report).map_err(jet_err)?;
    let unknowns = det::unknown_functions(eq, &report.reduction);
    let sys = det::split(&detexpr, &unknowns, &report.reduction).map_err(|e| jet_err(e.into()))?;

    let mut cfg = problem.ansatz.clone();
    if let Some(d) = opts.udeg {
        cfg.udeg = d;
    }
    if let Some(t) = opts.tdeg {
        cfg.tdeg = t;
    }
    let sol = solve::solve_system(&sys, &cfg, problem.kind());
    let names: Vec<String> = (1..=sol.generators.len()).map(|i| format!("X{i}")).collect();
    let reducer = Reducer::new(eq, None);
    let mut generators = Vec::new();
    for (name, g) in names.iter().zip(&sol.generators) {
        let r = solve::verify_with(&reducer, eq, g).map_err(jet_err)?;
        generators.push(GeneratorEcho {
            name: name.clone(),
            coefficients: coefficient_map(g),
            operator: g.to_string(),
            dsl: g.to_dsl(),
            residual: r.to_string(),
        });
    }
    let alg = solve::structure_constants(&sol.generators);
    Ok(AnalysisReport {
        equation: echo(eq),
        classification: ClassificationEcho {
            applied: !opts.no_theorems,
            reduction: reduction_name(&report.reduction),
            witnesses: report.witnesses.iter().map(|j| Expr::jet(*j).to_string()).collect(),
            summary: report.summary.clone(),
        },
        determining: DeterminingEcho {
            unknowns: sys.unknowns.iter().map(|u| u.to_string()).collect(),
            terms_before_split: detexpr.numerator().terms().count(),
            rows_after_split: sys.rows.len(),
            split_variables: sys.split_vars.iter().map(|j| Expr::jet(*j).to_string()).collect(),
            differentiated: sys.differentiated.iter().map(|j| Expr::jet(*j).to_string()).collect(),
            rows: sys.rows.iter().map(|r| RowEcho { origin: r.origin.clone(), expr: r.expr.to_string() }).collect(),
        },
        ansatz: AnsatzEcho {
            udeg: cfg.udeg,
            tdeg: cfg.tdeg,
            nbasis: cfg.nbasis.iter().map(|b| b.name().to_string()).collect(),
            columns: sol.ansatz.columns.len(),
            scalar_equations: sol.scalar_equations,
            rank: sol.rank,
        },
        generators,
        structure: structure_echo(&alg, &names),
        metadata: Metadata::new(),
    })
}

/// Exit status for a finished analysis.
pub fn analysis_exit(r: &AnalysisReport) -> i32 {
    if r.generators.iter().all(|g| g.residual == "0") {
        exit::OK
    } else {
        exit::INTERNAL
    }
}

fn residuals(eq: &DDEquation, fields: &[NamedField]) -> Result<Vec<ResidualEcho>, CliError> {
    let reducer = Reducer::new(eq, None);
    fields
        .iter()
        .map(|f| {
            let r = solve::verify_with(&reducer, eq, &f.field).map_err(jet_err)?;
            Ok(ResidualEcho {
                name: f.name.clone(),
                operator: f.field.to_string(),
                vanishes: r.is_zero(),
                residual: r.to_string(),
            })
        })
        .collect()
}

pub fn verify(problem: &Problem, fields: &FieldSet) -> Result<VerifyReport, CliError> {
    let results = residuals(&problem.equation, &fields.fields)?;
    Ok(VerifyReport { equation: echo(&problem.equation), all_vanish: results.iter().all(|r| r.vanishes), results })
}

pub fn commutators(problem: &Problem, fields: &FieldSet) -> Result<CommutatorReport, CliError> {
    let fs = &fields.fields;
    let mut brackets = Vec::new();
    for i in 0..fs.len() {
        for j in (i + 1)..fs.len() {
            let c = fs[i]
                .field
                .commutator(&fs[j].field)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            brackets.push(NamedField { name: format!("[{}, {}]", fs[i].name, fs[j].name), field: c });
        }
    }
    let basis: Vec<VectorField> = fs.iter().map(|f| f.field.clone()).collect();
    let names: Vec<String> = fs.iter().map(|f| f.name.clone()).collect();
    let alg = solve::structure_constants(&basis);
    Ok(CommutatorReport {
        equation: echo(&problem.equation),
        fields: residuals(&problem.equation, fs)?,
        brackets: residuals(&problem.equation, &brackets)?,
        structure: structure_echo(&alg, &names),
    })
}

pub fn commutators_exit(r: &CommutatorReport) -> i32 {
    if r.brackets.iter().all(|b| b.vanishes) {
        exit::OK
    } else {
        exit::FAILED
    }
}

pub fn numcheck(problem: &Problem, fields: &FieldSet, over: &LatticeOverrides) -> Result<NumcheckReport, CliError> {
    if problem.equation.class.is_field() {
        return Err(CliError::IllFormed("numerical checks apply to lattice equations only".into()));
    }
    if fields.has_formal_functions() {
        return Err(CliError::Parse("numerical checks need concrete fields, not formal functions".into()));
    }
    let mut spec = problem.lattice.clone();
    if let Some(n) = over.sites {
        spec.sites = n;
    }
    if let Some(t) = over.t_end {
        spec.t_end = t;
    }
    if let Some(h) = over.step {
        spec.step = h;
    }
    let cfg = spec.config()?;
    cfg.validate(&problem.equation).map_err(|e| CliError::Parse(e.to_string()))?;
    let results: Vec<FlowEcho> = fields
        .fields
        .iter()
        .map(|f| match numverify::flow_commute_check(&problem.equation, &f.field, &cfg) {
            Ok(r) => FlowEcho {
                name: f.name.clone(),
                operator: f.field.to_string(),
                passed: r.passed(),
                residuals: r.residuals,
                slope: r.slope,
                at_floor: r.at_floor,
                error: None,
            },
            Err(e) => FlowEcho {
                name: f.name.clone(),
                operator: f.field.to_string(),
                residuals: vec![],
                slope: None,
                at_floor: false,
                passed: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(NumcheckReport {
        equation: echo(&problem.equation),
        lattice: LatticeEcho {
            sites: cfg.sites,
            boundary: match cfg.boundary {
                Boundary::Periodic => "periodic".into(),
                Boundary::Fixed => "fixed".into(),
            },
            t_end: cfg.t_end,
            step: cfg.step,
            lambdas: cfg.lambdas.clone(),
            floor: cfg.floor,
            pass_slope: SLOPE_PASS,
        },
        all_passed: results.iter().all(|r| r.passed),
        results,
        note: "slope and floor thresholds are engineering choices, not derived bounds".into(),
    })
}
