//! Function descriptors: named presets or a `;`-separated list of terms that are
//! summed.
//!
//! | term            | value                                  |
//! |-----------------|----------------------------------------|
//! | `const(c)`      | `c`                                    |
//! | `poly(c0,c1,..)`| `c0 + c1 x + c2 x² + ...`              |
//! | `sin(a,k)`      | `a sin(kπx)`                           |
//! | `cos(a,k)`      | `a cos(kπx)`                           |
//! | `tent(a)`       | `a min(x − x_min, x_max − x)`          |
//! | `tpoly(c0,..)`  | `c0 + c1 t + c2 t² + ...` (time only)  |

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Const(f64),
    Poly(Vec<f64>),
    Sin { amp: f64, k: f64 },
    Cos { amp: f64, k: f64 },
    Tent(f64),
    TPoly(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    terms: Vec<Term>,
}

/// Names accepted in place of a term list, with their expansions.
pub const PRESETS: &[(&str, &str)] = &[
    ("sine_bump", "sin(0.5,1); const(1)"),
    ("cubic", "poly(1,1.5,-2.5,1)"),
    ("tent_sine", "tent(0.5); sin(0.25,1); const(1)"),
    ("linear_xt", "poly(1,1); tpoly(0,1)"),
    ("one", "const(1)"),
    ("zero", "const(0)"),
];

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl Term {
    fn eval(&self, x: f64, t: f64, domain: (f64, f64)) -> f64 {
        use std::f64::consts::PI;
        match self {
            Term::Const(c) => *c,
            Term::Poly(c) => horner(c, x),
            Term::Sin { amp, k } => amp * (k * PI * x).sin(),
            Term::Cos { amp, k } => amp * (k * PI * x).cos(),
            Term::Tent(a) => a * (x - domain.0).min(domain.1 - x),
            Term::TPoly(c) => horner(c, t),
        }
    }

    fn parse(src: &str) -> Result<Term, String> {
        let src = src.trim();
        let open = src
            .find('(')
            .ok_or_else(|| format!("term `{src}` is missing its argument list"))?;
        if !src.ends_with(')') {
            return Err(format!("term `{src}` is missing a closing parenthesis"));
        }
        let name = src[..open].trim();
        let inner = &src[open + 1..src.len() - 1];
        let args = inner
            .split(',')
            .map(|a| {
                let a = a.trim();
                a.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("`{a}` in `{src}` is not a finite number"))
            })
            .collect::<Result<Vec<f64>, String>>()?;
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!("`{name}` takes {n} argument(s), got {}", args.len()))
            }
        };
        match name {
            "const" => arity(1).map(|_| Term::Const(args[0])),
            "poly" => Ok(Term::Poly(args)),
            "tpoly" => Ok(Term::TPoly(args)),
            "sin" => arity(2).map(|_| Term::Sin { amp: args[0], k: args[1] }),
            "cos" => arity(2).map(|_| Term::Cos { amp: args[0], k: args[1] }),
            "tent" => arity(1).map(|_| Term::Tent(args[0])),
            other => Err(format!(
                "unknown term `{other}` (expected const, poly, sin, cos, tent or tpoly)"
            )),
        }
    }
}

impl Descriptor {
    pub fn parse(src: &str) -> Result<Self, String> {
        let src = src.trim();
        if let Some((_, expansion)) = PRESETS.iter().find(|(name, _)| *name == src) {
            return Self::parse(expansion);
        }
        if src.is_empty() {
            return Err("empty function descriptor".into());
        }
        let terms = src
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(Term::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn depends_on_time(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::TPoly(c) if c.len() > 1))
    }

    pub fn eval(&self, x: f64, t: f64, domain: (f64, f64)) -> f64 {
        self.terms.iter().map(|term| term.eval(x, t, domain)).sum()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |c: &[f64]| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Term::Const(c) => write!(f, "const({c})"),
            Term::Poly(c) => write!(f, "poly({})", list(c)),
            Term::Sin { amp, k } => write!(f, "sin({amp},{k})"),
            Term::Cos { amp, k } => write!(f, "cos({amp},{k})"),
            Term::Tent(a) => write!(f, "tent({a})"),
            Term::TPoly(c) => write!(f, "tpoly({})", list(c)),
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}
