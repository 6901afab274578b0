//! Equation files (TOML) and vector-field files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use dds_core::expr::{parse_with, Arg, Atom, Expr, NDep, ParseContext, ParseError, Symbol, UnknownFn};
use dds_core::jet::{DDEquation, EqClass, JetError};
use dds_core::numverify::{Boundary, LatticeConfig};
use dds_core::solve::{AnsatzConfig, NBasis};
use dds_core::vfield::{FieldKind, NamedField, VectorField};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    equation: RawEquation,
    #[serde(default)]
    ansatz: Option<RawAnsatz>,
    #[serde(default)]
    lattice: Option<RawLattice>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEquation {
    class: String,
    #[serde(default)]
    lhs: Option<String>,
    rhs: String,
    #[serde(default)]
    parameters: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnsatz {
    udeg: Option<u32>,
    tdeg: Option<u32>,
    nbasis: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Profile {
    Values(Vec<f64>),
    Formula(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    sites: Option<usize>,
    boundary: Option<String>,
    u0: Option<Profile>,
    v0: Option<Profile>,
    t_end: Option<f64>,
    step: Option<f64>,
    lambdas: Option<Vec<f64>>,
    floor: Option<f64>,
    #[serde(default)]
    parameters: BTreeMap<String, f64>,
}

/// Initial data, either listed per site or as a formula in `n`.
#[derive(Clone, Debug)]
pub enum InitialData {
    Values(Vec<f64>),
    Formula(Expr),
}

impl InitialData {
    pub fn sample(&self, sites: usize) -> Result<Vec<f64>, CliError> {
        match self {
            InitialData::Values(v) if v.len() == sites => Ok(v.clone()),
            InitialData::Values(v) => Err(CliError::Parse(format!(
                "initial data lists {} values for {sites} sites",
                v.len()
            ))),
            InitialData::Formula(e) => Ok((0..sites)
                .map(|j| {
                    e.eval(&|a| match a {
                        Atom::Sym(Symbol::N) => j as f64,
                        Atom::Alt => {
                            if j % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                        _ => f64::NAN,
                    })
                })
                .collect()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LatticeSpec {
    pub sites: usize,
    pub boundary: Boundary,
    pub u0: InitialData,
    pub v0: Option<InitialData>,
    pub t_end: f64,
    pub step: f64,
    pub lambdas: Vec<f64>,
    pub floor: f64,
    pub parameters: BTreeMap<String, f64>,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        let d = LatticeConfig::new(16, Vec::new());
        LatticeSpec {
            sites: d.sites,
            boundary: d.boundary,
            u0: InitialData::Formula(dds_core::expr::parse("1/10*exp(-(n-8)^2/4)").expect("valid default")),
            v0: None,
            t_end: d.t_end,
            step: d.step,
            lambdas: d.lambdas,
            floor: d.floor,
            parameters: BTreeMap::new(),
        }
    }
}

impl LatticeSpec {
    pub fn config(&self) -> Result<LatticeConfig, CliError> {
        let mut c = LatticeConfig::new(self.sites, self.u0.sample(self.sites)?);
        c.boundary = self.boundary;
        c.v0 = self.v0.as_ref().map(|v| v.sample(self.sites)).transpose()?;
        c.t_end = self.t_end;
        c.step = self.step;
        c.lambdas = self.lambdas.clone();
        c.floor = self.floor;
        c.params = self.parameters.clone();
        Ok(c)
    }
}

/// A parsed equation file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub equation: DDEquation,
    pub ansatz: AnsatzConfig,
    pub lattice: LatticeSpec,
}

impl Problem {
    pub fn kind(&self) -> FieldKind {
        if self.equation.class.is_field() {
            FieldKind::Field
        } else {
            FieldKind::LatticeOde
        }
    }
}

fn class_from_name(s: &str) -> Option<EqClass> {
    [EqClass::FirstOrderLattice, EqClass::TodaType, EqClass::TodaFieldType]
        .into_iter()
        .find(|c| c.name() == s.trim())
}

fn parse_expr(src: &str, ctx: &ParseContext, what: &str) -> Result<Expr, CliError> {
    parse_with(src, ctx).map_err(|e: ParseError| CliError::Parse(format!("{what}: {e}")))
}

pub fn read_problem(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> Result<Problem, CliError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let eq = raw.equation;
    let class = class_from_name(&eq.class)
        .ok_or_else(|| CliError::Parse(format!("unknown equation class `{}`", eq.class)))?;
    let ctx = ParseContext::with_params(&eq.parameters);
    if let Some(lhs) = &eq.lhs {
        let l = parse_expr(lhs, &ctx, "lhs")?;
        if l != Expr::jet(class.lhs()) {
            return Err(CliError::IllFormed(format!(
                "left-hand side `{lhs}` does not match class `{}`",
                class.name()
            )));
        }
    }
    let rhs = parse_expr(&eq.rhs, &ctx, "rhs")?;
    let equation = DDEquation::new(class, rhs, eq.parameters.clone()).map_err(|e| match e {
        JetError::IllFormed(m) => CliError::IllFormed(m),
        other => CliError::IllFormed(other.to_string()),
    })?;

    let mut ansatz = AnsatzConfig::default();
    if let Some(a) = raw.ansatz {
        if let Some(d) = a.udeg {
            ansatz.udeg = d;
        }
        if let Some(t) = a.tdeg {
            ansatz.tdeg = t;
        }
        if let Some(b) = a.nbasis {
            ansatz.nbasis = b
                .iter()
                .map(|s| NBasis::from_name(s).ok_or_else(|| CliError::Parse(format!("unknown n-basis element `{s}`"))))
                .collect::<Result<_, _>>()?;
            if ansatz.nbasis.is_empty() {
                return Err(CliError::Parse("n-basis must not be empty".into()));
            }
        }
    }

    let mut lattice = LatticeSpec::default();
    if let Some(l) = raw.lattice {
        let nctx = ParseContext::default();
        let profile = |p: Profile| -> Result<InitialData, CliError> {
            Ok(match p {
                Profile::Values(v) => InitialData::Values(v),
                Profile::Formula(s) => InitialData::Formula(parse_expr(&s, &nctx, "initial data")?),
            })
        };
        if let Some(n) = l.sites {
            lattice.sites = n;
        }
        if let Some(b) = l.boundary {
            lattice.boundary = match b.as_str() {
                "periodic" => Boundary::Periodic,
                "fixed" => Boundary::Fixed,
                other => return Err(CliError::Parse(format!("unknown boundary `{other}`"))),
            };
        }
        if let Some(u) = l.u0 {
            lattice.u0 = profile(u)?;
        }
        lattice.v0 = l.v0.map(profile).transpose()?;
        if let Some(t) = l.t_end {
            lattice.t_end = t;
        }
        if let Some(h) = l.step {
            lattice.step = h;
        }
        if let Some(ls) = l.lambdas {
            lattice.lambdas = ls;
        }
        if let Some(f) = l.floor {
            lattice.floor = f;
        }
        lattice.parameters = l.parameters;
    }
    Ok(Problem { equation, ansatz, lattice })
}

/// Vector fields read from a fields file.
#[derive(Clone, Debug, Default)]
pub struct FieldSet {
    pub functions: Vec<UnknownFn>,
    pub fields: Vec<NamedField>,
}

impl FieldSet {
    pub fn has_formal_functions(&self) -> bool {
        !self.functions.is_empty()
    }
}

pub fn read_fields(path: &Path, problem: &Problem) -> Result<FieldSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_fields(&text, problem)
}

fn parse_function_decl(s: &str) -> Result<UnknownFn, CliError> {
    let bad = || CliError::Parse(format!("bad function declaration `{s}`"));
    let (name, rest) = s.split_once('(').ok_or_else(bad)?;
    let args = rest.strip_suffix(')').ok_or_else(bad)?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(bad());
    }
    let mut list = Vec::new();
    for a in args.split(',') {
        list.push(match a.trim() {
            "t" => Arg::T,
            "x" => Arg::X,
            "y" => Arg::Y,
            _ => return Err(bad()),
        });
    }
    Ok(UnknownFn::new(name, &list, NDep::Independent))
}

/// Parses statements of the form `NAME: tau = ...; phi = ...;` and
/// `functions: f(x), g(y);`. `#` starts a comment.
pub fn parse_fields(text: &str, problem: &Problem) -> Result<FieldSet, CliError> {
    let body: String = text
        .lines()
        .map(|l| l.split_once('#').map_or(l, |(a, _)| a))
        .collect::<Vec<_>>()
        .join("\n");
    let kind = problem.kind();
    let mut set = FieldSet::default();
    let mut current: Option<(String, BTreeMap<String, String>)> = None;
    let mut raw_fields = Vec::new();
    for stmt in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let mut stmt = stmt;
        if let Some((head, rest)) = stmt.split_once(':') {
            let head = head.trim();
            if head == "functions" {
                for d in split_top_level(rest) {
                    set.functions.push(parse_function_decl(d.trim())?);
                }
                continue;
            }
            if !head.contains('=') {
                if let Some(done) = current.take() {
                    raw_fields.push(done);
                }
                if head.is_empty() || head.contains(char::is_whitespace) {
                    return Err(CliError::Parse(format!("bad field name `{head}`")));
                }
                current = Some((head.to_string(), BTreeMap::new()));
                stmt = rest.trim();
                if stmt.is_empty() {
                    continue;
                }
            }
        }
        let (key, value) = stmt
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("expected `coefficient = expression`, found `{stmt}`")))?;
        let key = key.trim();
        let allowed: &[&str] = match kind {
            FieldKind::LatticeOde => &["tau", "phi"],
            FieldKind::Field => &["xi", "eta", "phi"],
        };
        if !allowed.contains(&key) {
            return Err(CliError::Parse(format!("unexpected coefficient `{key}`")));
        }
        let Some((_, map)) = current.as_mut() else {
            return Err(CliError::Parse("coefficient outside a named field".into()));
        };
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Parse(format!("coefficient `{key}` given twice")));
        }
    }
    if let Some(done) = current.take() {
        raw_fields.push(done);
    }
    let ctx = ParseContext { params: problem.equation.params.clone(), unknowns: set.functions.clone() };
    for (name, map) in raw_fields {
        let get = |k: &str| -> Result<Expr, CliError> {
            map.get(k).map_or(Ok(Expr::zero()), |s| parse_expr(s, &ctx, &format!("{name}.{k}")))
        };
        let field = match kind {
            FieldKind::LatticeOde => VectorField::lattice(get("tau")?, get("phi")?),
            FieldKind::Field => VectorField::field(get("xi")?, get("eta")?, get("phi")?),
        };
        for c in field.coefficients() {
            if !dds_core::vfield::is_point_coefficient(c, kind) {
                return Err(CliError::IllFormed(format!("{name}: `{c}` is not a point-symmetry coefficient")));
            }
        }
        set.fields.push(NamedField { name, field });
    }
    Ok(set)
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter().filter(|x| !x.trim().is_empty()).collect()
}
