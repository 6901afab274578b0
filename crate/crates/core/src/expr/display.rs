//! DSL rendering. Output parses back to the same expression.

use std::fmt;

use num_traits::{One, Signed};

use super::poly::{Monomial, Poly, Q};
use super::Expr;

fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    let mut parts: Vec<String> = m
        .atoms()
        .iter()
        .map(|(a, k)| if *k == 1 { a.to_string() } else { format!("{a}^{k}") })
        .collect();
    if let Some(e) = m.exp_arg() {
        parts.push(format!("exp({e})"));
    }
    parts.join("*")
}

pub(crate) fn fmt_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        let body = if m.is_one() {
            fmt_q(&mag)
        } else if mag.is_one() {
            fmt_monomial(m)
        } else {
            format!("{}*{}", fmt_q(&mag), fmt_monomial(m))
        };
        match (i, neg) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
        }
    }
    out
}

fn wrap(p: &Poly) -> String {
    if p.len() == 1 {
        let (m, c) = p.terms().next().unwrap();
        if c.is_one() || m.is_one() && !c.is_negative() && c.is_integer() {
            return fmt_poly(p);
        }
    }
    format!("({})", fmt_poly(p))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den = self.denominator_factors();
        if den.is_empty() {
            return f.write_str(&fmt_poly(self.numerator()));
        }
        let ds: Vec<String> = den
            .iter()
            .map(|(p, m)| if *m == 1 { wrap(p) } else { format!("{}^{}", wrap(p), m) })
            .collect();
        if ds.len() == 1 {
            write!(f, "{}/{}", wrap(self.numerator()), ds[0])
        } else {
            write!(f, "{}/({})", wrap(self.numerator()), ds.join("*"))
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_poly(self))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            f.write_str("1")
        } else {
            f.write_str(&fmt_monomial(self))
        }
    }
}
