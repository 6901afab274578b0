//! Numerical cross-check of symmetry generators.
//!
//! A truncated lattice is integrated with classic RK4. For a candidate
//! characteristic `Q` we compare "step along `Q`, then evolve" against
//! "evolve, then step along `Q`". The group step is a single explicit
//! step `u + lambda*Q`, so the defect is `O(lambda^2)` exactly when `Q`
//! solves the linearized equation along the trajectory and `O(lambda)`
//! otherwise.
//!
//! Periodic lattices carry a twist: `u[j+N] = u[j] + theta`. Fields such as
//! `2n d_u` move `theta`, and equations that only see differences of `u`
//! are unaffected by it.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{Atom, Expr, Poly, Symbol};
use crate::jet::{total_derivative, DDEquation, EqClass, JetError, Reducer};
use crate::vfield::VectorField;
use crate::expr::Direction;

#[derive(Debug, Error)]
pub enum NumError {
    #[error("denominator vanished at t = {t}, site {site}")]
    SingularityEncountered { t: f64, site: usize },
    #[error("state overflowed at t = {t}")]
    StepOverflow { t: f64 },
    #[error("invalid lattice configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical checks need a lattice equation, not the field class")]
    FieldClass,
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// The two edge sites are frozen and excluded from residuals.
    Fixed,
}

#[derive(Clone, Debug)]
pub struct LatticeConfig {
    pub sites: usize,
    pub boundary: Boundary,
    pub u0: Vec<f64>,
    /// Initial velocities for second-order equations.
    pub v0: Option<Vec<f64>>,
    pub t_end: f64,
    pub step: f64,
    pub lambdas: Vec<f64>,
    /// Residuals at or below this are treated as zero.
    pub floor: f64,
    pub params: BTreeMap<String, f64>,
}

pub const SLOPE_PASS: f64 = 1.8;
pub const SLOPE_CONTROL: f64 = 1.3;
const SINGULAR: f64 = 1e-12;

impl LatticeConfig {
    pub fn new(sites: usize, u0: Vec<f64>) -> Self {
        LatticeConfig {
            sites,
            boundary: Boundary::Periodic,
            u0,
            v0: None,
            t_end: 1.0,
            step: 1e-3,
            lambdas: vec![1e-2, 5e-3, 2.5e-3],
            floor: 1e-9,
            params: BTreeMap::new(),
        }
    }

    pub fn validate(&self, eq: &DDEquation) -> Result<(), NumError> {
        let bad = |m: &str| Err(NumError::InvalidConfig(m.to_string()));
        if self.sites < 4 {
            return bad("at least 4 sites are required");
        }
        if !self.step.is_finite() || self.step <= 0.0 || !self.t_end.is_finite() || self.t_end < 0.0 {
            return bad("step must be positive and the horizon non-negative");
        }
        if self.u0.len() != self.sites {
            return bad("initial state length differs from the site count");
        }
        if eq.class == EqClass::TodaType
            && self.v0.as_ref().is_some_and(|v| v.len() != self.sites)
        {
            return bad("initial velocity length differs from the site count");
        }
        for p in &eq.params {
            if !self.params.contains_key(p) {
                return Err(NumError::InvalidConfig(format!("no value for parameter `{p}`")));
            }
        }
        Ok(())
    }

    fn needs_even(&self, e: &Expr) -> bool {
        self.boundary == Boundary::Periodic && e.atoms().contains(&Atom::Alt)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    /// Velocities; empty for first-order equations.
    pub v: Vec<f64>,
    pub twist_u: f64,
    pub twist_v: f64,
}

impl State {
    fn axpy(&self, a: f64, d: &State) -> State {
        State {
            u: self.u.iter().zip(&d.u).map(|(x, y)| x + a * y).collect(),
            v: self.v.iter().zip(&d.v).map(|(x, y)| x + a * y).collect(),
            twist_u: self.twist_u + a * d.twist_u,
            twist_v: self.twist_v + a * d.twist_v,
        }
    }

    fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite()) && self.twist_u.is_finite() && self.twist_v.is_finite()
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    T,
    N,
    Alt,
    Const(f64),
    U(i32),
    V(i32),
}

type CTerm = (f64, Vec<(Slot, i32)>, Option<Box<Compiled>>);

#[derive(Clone, Debug)]
struct CPoly {
    terms: Vec<CTerm>,
}

/// An expression lowered to flat term lists for fast repeated evaluation.
#[derive(Clone, Debug)]
struct Compiled {
    num: CPoly,
    den: Vec<(CPoly, i32)>,
}

fn lower_atom(a: &Atom, params: &BTreeMap<String, f64>) -> Slot {
    match a {
        Atom::Sym(Symbol::T) => Slot::T,
        Atom::Sym(Symbol::N) => Slot::N,
        Atom::Sym(Symbol::Param(p)) => Slot::Const(params.get(&**p).copied().unwrap_or(f64::NAN)),
        Atom::Alt => Slot::Alt,
        Atom::Jet(j) if j.dx == 0 && j.dy == 0 && j.dt == 0 => Slot::U(j.shift),
        Atom::Jet(j) if j.dx == 0 && j.dy == 0 && j.dt == 1 => Slot::V(j.shift),
        other => panic!("atom {other:?} cannot be evaluated on the lattice state"),
    }
}

fn lower_poly(p: &Poly, params: &BTreeMap<String, f64>) -> CPoly {
    CPoly {
        terms: p
            .terms()
            .map(|(m, c)| {
                let slots = m.atoms().iter().map(|(a, k)| (lower_atom(a, params), *k as i32)).collect();
                let ex = m.exp_arg().map(|e| Box::new(Compiled::new(e, params)));
                (crate::expr::q_to_f64(c), slots, ex)
            })
            .collect(),
    }
}

impl Compiled {
    fn new(e: &Expr, params: &BTreeMap<String, f64>) -> Self {
        Compiled {
            num: lower_poly(e.numerator(), params),
            den: e.denominator_factors().iter().map(|(p, m)| (lower_poly(p, params), *m as i32)).collect(),
        }
    }

    fn eval(&self, env: &Env<'_>, n: i64) -> (f64, f64) {
        let num = self.num.eval(env, n);
        let mut den = 1.0;
        for (p, m) in &self.den {
            den *= p.eval(env, n).powi(*m);
        }
        (num, den)
    }

    fn value(&self, env: &Env<'_>, n: i64) -> f64 {
        let (a, b) = self.eval(env, n);
        a / b
    }
}

impl CPoly {
    fn eval(&self, env: &Env<'_>, n: i64) -> f64 {
        let mut total = 0.0;
        for (c, slots, ex) in &self.terms {
            let mut v = *c;
            for (s, k) in slots {
                v *= env.slot(*s, n).powi(*k);
            }
            if let Some(e) = ex {
                v *= e.value(env, n).exp();
            }
            total += v;
        }
        total
    }
}

struct Env<'a> {
    t: f64,
    s: &'a State,
    boundary: Boundary,
}

impl Env<'_> {
    fn sample(&self, xs: &[f64], twist: f64, j: i64) -> f64 {
        let n = xs.len() as i64;
        match self.boundary {
            Boundary::Periodic => xs[j.rem_euclid(n) as usize] + twist * j.div_euclid(n) as f64,
            Boundary::Fixed => xs[j.clamp(0, n - 1) as usize],
        }
    }

    fn slot(&self, s: Slot, n: i64) -> f64 {
        match s {
            Slot::T => self.t,
            Slot::N => n as f64,
            Slot::Alt => {
                if n.rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Slot::Const(c) => c,
            Slot::U(k) => self.sample(&self.s.u, self.s.twist_u, n + k as i64),
            Slot::V(k) => self.sample(&self.s.v, self.s.twist_v, n + k as i64),
        }
    }
}

/// A truncated lattice for one equation.
pub struct Lattice {
    pub cfg: LatticeConfig,
    second_order: bool,
    rhs: Compiled,
}

/// Sampled solution of the lattice equation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Lattice {
    pub fn new(eq: &DDEquation, cfg: LatticeConfig) -> Result<Self, NumError> {
        if eq.class.is_field() {
            return Err(NumError::FieldClass);
        }
        cfg.validate(eq)?;
        if cfg.needs_even(&eq.rhs) && cfg.sites % 2 == 1 {
            return Err(NumError::InvalidConfig("alternating terms need an even site count".into()));
        }
        let rhs = Compiled::new(&eq.rhs, &cfg.params);
        Ok(Lattice { second_order: eq.class == EqClass::TodaType, rhs, cfg })
    }

    pub fn initial_state(&self) -> State {
        let v = if self.second_order {
            self.cfg.v0.clone().unwrap_or_else(|| vec![0.0; self.cfg.sites])
        } else {
            Vec::new()
        };
        State { u: self.cfg.u0.clone(), v, twist_u: 0.0, twist_v: 0.0 }
    }

    fn env<'a>(&self, t: f64, s: &'a State) -> Env<'a> {
        Env { t, s, boundary: self.cfg.boundary }
    }

    fn active(&self, j: usize) -> bool {
        self.cfg.boundary == Boundary::Periodic || (j > 0 && j + 1 < self.cfg.sites)
    }

    /// Evaluates `c` at every site, plus at the first ghost site `N` for the
    /// twist.
    fn sites_eval(&self, c: &Compiled, t: f64, s: &State) -> Result<(Vec<f64>, f64), NumError> {
        let env = self.env(t, s);
        let n = self.cfg.sites;
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            if self.active(j) {
                let (a, b) = c.eval(&env, j as i64);
                if b.abs() < SINGULAR {
                    return Err(NumError::SingularityEncountered { t, site: j });
                }
                *o = a / b;
            }
        }
        let ghost = if self.cfg.boundary == Boundary::Periodic {
            let (a, b) = c.eval(&env, n as i64);
            if b.abs() < SINGULAR {
                return Err(NumError::SingularityEncountered { t, site: 0 });
            }
            a / b - out[0]
        } else {
            0.0
        };
        Ok((out, ghost))
    }

    fn velocity(&self, t: f64, s: &State) -> Result<State, NumError> {
        let (f, df) = self.sites_eval(&self.rhs, t, s)?;
        Ok(if self.second_order {
            State { u: s.v.clone(), v: f, twist_u: s.twist_v, twist_v: df }
        } else {
            State { u: f, v: Vec::new(), twist_u: df, twist_v: 0.0 }
        })
    }

    fn rk4_step(&self, t: f64, s: &State, h: f64) -> Result<State, NumError> {
        let k1 = self.velocity(t, s)?;
        let k2 = self.velocity(t + h / 2.0, &s.axpy(h / 2.0, &k1))?;
        let k3 = self.velocity(t + h / 2.0, &s.axpy(h / 2.0, &k2))?;
        let k4 = self.velocity(t + h, &s.axpy(h, &k3))?;
        let mut out = s.axpy(h / 6.0, &k1);
        out = out.axpy(h / 3.0, &k2);
        out = out.axpy(h / 3.0, &k3);
        out = out.axpy(h / 6.0, &k4);
        if !out.is_finite() {
            return Err(NumError::StepOverflow { t: t + h });
        }
        Ok(out)
    }

    /// Evolves `s` from `t0` to `t1` with the configured step (the last step
    /// is shortened to land on `t1`).
    pub fn evolve(&self, s: &State, t0: f64, t1: f64) -> Result<State, NumError> {
        Ok(self.run(s, t0, t1, false)?.states.pop().expect("at least the initial state"))
    }

    fn run(&self, s: &State, t0: f64, t1: f64, keep: bool) -> Result<Trajectory, NumError> {
        let h = self.cfg.step;
        let steps = ((t1 - t0) / h).ceil().max(0.0) as usize;
        let mut tr = Trajectory { times: vec![t0], states: vec![s.clone()] };
        let mut cur = s.clone();
        let mut t = t0;
        for i in 0..steps {
            let next_t = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
            cur = self.rk4_step(t, &cur, next_t - t)?;
            t = next_t;
            if keep {
                tr.times.push(t);
                tr.states.push(cur.clone());
            }
        }
        if !keep {
            tr.times = vec![t];
            tr.states = vec![cur];
        }
        Ok(tr)
    }

    pub fn integrate(&self) -> Result<Trajectory, NumError> {
        self.run(&self.initial_state(), 0.0, self.cfg.t_end, true)
    }

    /// Max-norm distance over the active sites.
    pub fn distance(&self, a: &State, b: &State) -> f64 {
        let mut d: f64 = 0.0;
        for j in (0..self.cfg.sites).filter(|j| self.active(*j)) {
            d = d.max((a.u[j] - b.u[j]).abs());
            if self.second_order {
                d = d.max((a.v[j] - b.v[j]).abs());
            }
        }
        if self.cfg.boundary == Boundary::Periodic {
            d = d.max((a.twist_u - b.twist_u).abs()).max((a.twist_v - b.twist_v).abs());
        }
        d
    }
}

/// The characteristic of a field, reduced so it is a function of the state.
struct Flow {
    q: Compiled,
    qt: Option<Compiled>,
}

impl Flow {
    fn new(eq: &DDEquation, x: &VectorField, params: &BTreeMap<String, f64>) -> Result<Self, NumError> {
        let reducer = Reducer::new(eq, None);
        let q = reducer.reduce(&x.characteristic())?;
        let qt = if eq.class == EqClass::TodaType {
            Some(Compiled::new(&reducer.reduce(&total_derivative(&q, Direction::T))?, params))
        } else {
            None
        };
        Ok(Flow { q: Compiled::new(&q, params), qt })
    }

    fn step(&self, lat: &Lattice, t: f64, s: &State, lambda: f64) -> Result<State, NumError> {
        let (q, dq) = lat.sites_eval(&self.q, t, s)?;
        let d = match &self.qt {
            Some(qt) => {
                let (w, dw) = lat.sites_eval(qt, t, s)?;
                State { u: q, v: w, twist_u: dq, twist_v: dw }
            }
            None => State { u: q, v: Vec::new(), twist_u: dq, twist_v: 0.0 },
        };
        Ok(s.axpy(lambda, &d))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowReport {
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log r` against `log lambda`; absent when
    /// fewer than two residuals lie above the floor.
    pub slope: Option<f64>,
    pub at_floor: bool,
}

impl FlowReport {
    /// Consistent with a symmetry: quadratic decay, or no measurable defect.
    pub fn passed(&self) -> bool {
        self.at_floor || self.slope.is_some_and(|s| s >= SLOPE_PASS)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,residual\n");
        for (l, r) in self.lambdas.iter().zip(&self.residuals) {
            s.push_str(&format!("{l:e},{r:e}\n"));
        }
        s
    }
}

pub fn fit_slope(lambdas: &[f64], residuals: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r > floor)
        .map(|(l, r)| (l.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Compares "group step then evolve" with "evolve then group step" for each
/// configured `lambda`.
pub fn flow_commute_check(eq: &DDEquation, x: &VectorField, cfg: &LatticeConfig) -> Result<FlowReport, NumError> {
    let lat = Lattice::new(eq, cfg.clone())?;
    if cfg.needs_even(&x.characteristic()) && cfg.sites % 2 == 1 {
        return Err(NumError::InvalidConfig("alternating terms need an even site count".into()));
    }
    let flow = Flow::new(eq, x, &cfg.params)?;
    let s0 = lat.initial_state();
    let end = lat.evolve(&s0, 0.0, cfg.t_end)?;
    let mut residuals = Vec::new();
    for &l in &cfg.lambdas {
        let d1 = flow.step(&lat, cfg.t_end, &end, l)?;
        let d2 = lat.evolve(&flow.step(&lat, 0.0, &s0, l)?, 0.0, cfg.t_end)?;
        residuals.push(lat.distance(&d1, &d2));
    }
    let slope = fit_slope(&cfg.lambdas, &residuals, cfg.floor);
    let at_floor = residuals.iter().all(|r| *r <= cfg.floor);
    Ok(FlowReport { lambdas: cfg.lambdas.clone(), residuals, slope, at_floor })
}

/// `sum v^2/2 + sum exp(u[n] - u[n+1])` on a periodic lattice; conserved by
/// the exponential Toda chain.
pub fn toda_energy(s: &State) -> f64 {
    let n = s.u.len();
    let mut e = 0.0;
    for j in 0..n {
        let next = if j + 1 == n { s.u[0] + s.twist_u } else { s.u[j + 1] };
        e += 0.5 * s.v[j] * s.v[j] + (s.u[j] - next).exp();
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn toda() -> DDEquation {
        DDEquation::new(EqClass::TodaType, parse("exp(u[-1]-u[0]) - exp(u[0]-u[1])").unwrap(), vec![]).unwrap()
    }

    fn bump(n: usize) -> Vec<f64> {
        (0..n).map(|j| 0.1 * (-((j as f64 - n as f64 / 2.0).powi(2)) / 4.0).exp()).collect()
    }

    #[test]
    fn constant_state_is_stationary() {
        let lat = Lattice::new(&toda(), LatticeConfig::new(8, vec![0.7; 8])).unwrap();
        let tr = lat.integrate().unwrap();
        let last = tr.states.last().unwrap();
        assert!(last.u.iter().all(|x| (x - 0.7).abs() < 1e-14));
    }

    #[test]
    fn energy_is_conserved() {
        let lat = Lattice::new(&toda(), LatticeConfig::new(16, bump(16))).unwrap();
        let tr = lat.integrate().unwrap();
        let e0 = toda_energy(&tr.states[0]);
        let drift = tr.states.iter().map(|s| (toda_energy(s) - e0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-8, "{drift}");
    }

    #[test]
    fn slopes_separate_symmetries() {
        let eq = toda();
        let cfg = LatticeConfig::new(16, bump(16));
        let x4 = VectorField::lattice(parse("t").unwrap(), parse("2*n").unwrap());
        let r = flow_commute_check(&eq, &x4, &cfg).unwrap();
        assert!(r.passed(), "{r:?}");
        let shift = VectorField::lattice(Expr::zero(), Expr::one());
        assert!(flow_commute_check(&eq, &shift, &cfg).unwrap().at_floor);
        let control = VectorField::lattice(Expr::zero(), parse("u[0]").unwrap());
        let r = flow_commute_check(&eq, &control, &cfg).unwrap();
        assert!(r.slope.unwrap() <= SLOPE_CONTROL, "{r:?}");
    }

    #[test]
    fn slope_fit() {
        let l = [1e-2, 5e-3, 2.5e-3];
        let r: Vec<f64> = l.iter().map(|x| 3.0 * x * x).collect();
        assert!((fit_slope(&l, &r, 1e-9).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_slope(&l, &[1e-12; 3], 1e-9), None);
    }
}
