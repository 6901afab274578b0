//! Report types. Text output is rendered from the same values that are
//! serialized to JSON.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct EquationEcho {
    pub class: String,
    pub lhs: String,
    pub rhs: String,
    pub parameters: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationEcho {
    pub applied: bool,
    pub reduction: String,
    pub witnesses: Vec<String>,
    pub summary: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowEcho {
    pub origin: String,
    pub expr: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeterminingEcho {
    pub unknowns: Vec<String>,
    pub terms_before_split: usize,
    pub rows_after_split: usize,
    pub split_variables: Vec<String>,
    pub differentiated: Vec<String>,
    pub rows: Vec<RowEcho>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnsatzEcho {
    pub udeg: u32,
    pub tdeg: u32,
    pub nbasis: Vec<String>,
    pub columns: usize,
    pub scalar_equations: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorEcho {
    pub name: String,
    pub coefficients: BTreeMap<String, String>,
    pub operator: String,
    pub dsl: String,
    pub residual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketEcho {
    pub left: String,
    pub right: String,
    pub operator: String,
    /// The bracket as a combination of the basis, when it lies in the span.
    pub in_basis: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureEcho {
    pub closed: bool,
    pub brackets: Vec<BracketEcho>,
    /// `constants[i][j][k]`: coefficient of the k-th element in `[X_i, X_j]`.
    pub constants: Vec<Vec<Vec<String>>>,
    pub jacobi_violations: usize,
    pub ad_nilpotent: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub assumptions: Vec<String>,
}

impl Metadata {
    pub fn new() -> Self {
        Metadata {
            tool: "dds".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            assumptions: vec![
                "exponential kernels and jet monomials in split coefficients are functionally independent".into(),
                "denominators are non-zero at generic points".into(),
                "field-class standard prolongation is built by the point-transformation recursion".into(),
            ],
        }
    }
}

impl Default for Metadata {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub equation: EquationEcho,
    pub classification: ClassificationEcho,
    pub determining: DeterminingEcho,
    pub ansatz: AnsatzEcho,
    pub generators: Vec<GeneratorEcho>,
    pub structure: StructureEcho,
    pub metadata: Metadata,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualEcho {
    pub name: String,
    pub operator: String,
    pub residual: String,
    pub vanishes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub equation: EquationEcho,
    pub results: Vec<ResidualEcho>,
    pub all_vanish: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub equation: EquationEcho,
    pub fields: Vec<ResidualEcho>,
    pub brackets: Vec<ResidualEcho>,
    pub structure: StructureEcho,
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeEcho {
    pub sites: usize,
    pub boundary: String,
    pub t_end: f64,
    pub step: f64,
    pub lambdas: Vec<f64>,
    pub floor: f64,
    pub pass_slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowEcho {
    pub name: String,
    pub operator: String,
    pub residuals: Vec<f64>,
    pub slope: Option<f64>,
    pub at_floor: bool,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NumcheckReport {
    pub equation: EquationEcho,
    pub lattice: LatticeEcho,
    pub results: Vec<FlowEcho>,
    pub all_passed: bool,
    pub note: String,
}

fn header(out: &mut String, eq: &EquationEcho) {
    let _ = writeln!(out, "equation ({}): {} = {}", eq.class, eq.lhs, eq.rhs);
    if !eq.parameters.is_empty() {
        let _ = writeln!(out, "parameters: {}", eq.parameters.join(", "));
    }
}

fn structure_text(out: &mut String, s: &StructureEcho) {
    let _ = writeln!(out, "commutators:");
    for b in &s.brackets {
        let rhs = b.in_basis.clone().unwrap_or_else(|| format!("{} (outside the span)", b.operator));
        let _ = writeln!(out, "  [{}, {}] = {}", b.left, b.right, rhs);
    }
    let _ = writeln!(out, "closed: {}", s.closed);
    let _ = writeln!(out, "jacobi violations: {}", s.jacobi_violations);
    let _ = writeln!(out, "ad-nilpotent elements: {}", list_or_none(&s.ad_nilpotent));
}

fn list_or_none(v: &[String]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.join(", ")
    }
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.equation);
        let c = &self.classification;
        let _ = writeln!(
            out,
            "reduction: {}{}",
            c.reduction,
            if c.applied { "" } else { " (disabled)" }
        );
        let _ = writeln!(out, "  {}", c.summary);
        if !c.witnesses.is_empty() {
            let _ = writeln!(out, "  witnesses: {}", c.witnesses.join(", "));
        }
        let d = &self.determining;
        let _ = writeln!(out, "unknowns: {}", d.unknowns.join(", "));
        let _ = writeln!(
            out,
            "determining system: {} terms before splitting, {} rows after",
            d.terms_before_split, d.rows_after_split
        );
        let _ = writeln!(out, "split variables: {}", list_or_none(&d.split_variables));
        if !d.differentiated.is_empty() {
            let _ = writeln!(out, "differentiated along: {}", d.differentiated.join(", "));
        }
        for r in &d.rows {
            let _ = writeln!(out, "  [{}] {} = 0", r.origin, r.expr);
        }
        let a = &self.ansatz;
        let _ = writeln!(
            out,
            "ansatz: u-degree {}, t-degree {}, n-basis {{{}}}; {} coefficients, {} scalar equations, rank {}",
            a.udeg,
            a.tdeg,
            a.nbasis.join(", "),
            a.columns,
            a.scalar_equations,
            a.rank
        );
        let _ = writeln!(out, "generators ({}):", self.generators.len());
        for g in &self.generators {
            let _ = writeln!(out, "  {} = {}    residual {}", g.name, g.operator, g.residual);
        }
        structure_text(&mut out, &self.structure);
        let _ = writeln!(out, "fields:");
        for g in &self.generators {
            let _ = writeln!(out, "  {}: {}", g.name, g.dsl);
        }
        let _ = writeln!(out, "assumptions:");
        for s in &self.metadata.assumptions {
            let _ = writeln!(out, "  - {s}");
        }
        out
    }

    /// The generators as a fields file.
    pub fn fields_file(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} = {}", self.equation.lhs, self.equation.rhs);
        for g in &self.generators {
            let _ = writeln!(out, "{}: {}", g.name, g.dsl);
        }
        out
    }
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.equation);
        for r in &self.results {
            let _ = writeln!(out, "{}: {}", r.name, r.operator);
            let _ = writeln!(out, "  residual: {}", r.residual);
        }
        let _ = writeln!(out, "all residuals vanish: {}", self.all_vanish);
        out
    }
}

impl CommutatorReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.equation);
        for f in &self.fields {
            let _ = writeln!(out, "{} = {}    residual {}", f.name, f.operator, f.residual);
        }
        let _ = writeln!(out, "brackets:");
        for b in &self.brackets {
            let _ = writeln!(out, "  {} = {}    residual {}", b.name, b.operator, b.residual);
        }
        structure_text(&mut out, &self.structure);
        out
    }
}

impl NumcheckReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.equation);
        let l = &self.lattice;
        let _ = writeln!(
            out,
            "lattice: {} sites ({}), t_end {}, step {}, floor {:e}, pass slope {}",
            l.sites, l.boundary, l.t_end, l.step, l.floor, l.pass_slope
        );
        let lams: Vec<String> = l.lambdas.iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(out, "lambda: {}", lams.join(", "));
        for r in &self.results {
            let verdict = if r.passed { "pass" } else { "FAIL" };
            match &r.error {
                Some(e) => {
                    let _ = writeln!(out, "{}: {}  error: {e}  {verdict}", r.name, r.operator);
                }
                None => {
                    let res: Vec<String> = r.residuals.iter().map(|x| format!("{x:.3e}")).collect();
                    let slope = if r.at_floor {
                        "at floor".to_string()
                    } else {
                        r.slope.map_or("n/a".into(), |s| format!("{s:.3}"))
                    };
                    let _ = writeln!(
                        out,
                        "{}: {}  residuals [{}]  slope {}  {verdict}",
                        r.name,
                        r.operator,
                        res.join(", "),
                        slope
                    );
                }
            }
        }
        let _ = writeln!(out, "{}", self.note);
        out
    }
}
