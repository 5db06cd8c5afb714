//! Named initial-data constructors as they appear in config files, e.g.
//! `single_mode(1, 6)`, `shifted_profile(single_mode(1, 1), 50, 0)`,
//! `sum(single_mode(1, 1), single_mode(0.001, 12))`, `taylor_green(15, 1e-4)`,
//! `triple(30, 40, 50)` or `zero`.

use std::fmt;
use std::str::FromStr;

use crate::euler2d::{taylor_green, TaylorGreenSpec};
use crate::kdv::{init_shifted_profile, init_single_mode};
use crate::lorenz::LorenzState;
use crate::spectral::{Field1D, VectorField2D};
use crate::{NudgingError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Zero,
    Triple(f64, f64, f64),
    SingleMode { c: f64, k0: i64 },
    ShiftedProfile { base: Box<InitSpec>, m: usize, k: usize },
    Sum(Vec<InitSpec>),
    TaylorGreen { k: usize, c: f64 },
}

impl InitSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            InitSpec::Zero => "zero",
            InitSpec::Triple(..) => "triple",
            InitSpec::SingleMode { .. } => "single_mode",
            InitSpec::ShiftedProfile { .. } => "shifted_profile",
            InitSpec::Sum(_) => "sum",
            InitSpec::TaylorGreen { .. } => "taylor_green",
        }
    }

    fn unsupported(&self, key: &str, system: &str) -> NudgingError {
        NudgingError::validation(key, format!("`{}` initial data is not available for {system}", self.kind()))
    }

    pub fn lorenz(&self, key: &str) -> Result<LorenzState<f64>> {
        match *self {
            InitSpec::Triple(x, y, z) => Ok(LorenzState::new(x, y, z)),
            InitSpec::Zero => Ok(LorenzState::new(0.0, 0.0, 0.0)),
            _ => Err(self.unsupported(key, "lorenz")),
        }
    }

    pub fn field_1d(&self, key: &str, n: usize, period: f64) -> Result<Field1D<f64>> {
        let keyed = |e: NudgingError| match e {
            NudgingError::Validation { message, .. } => NudgingError::validation(key, message),
            other => other,
        };
        match self {
            InitSpec::Zero => Field1D::zeros(n, period),
            InitSpec::SingleMode { c, k0 } => init_single_mode(n, period, *c, *k0).map_err(keyed),
            InitSpec::ShiftedProfile { base, m, k } => {
                init_shifted_profile(&base.field_1d(key, n, period)?, *m, *k).map_err(keyed)
            }
            InitSpec::Sum(parts) => {
                let mut acc = Field1D::zeros(n, period)?;
                for p in parts {
                    acc = acc.add(&p.field_1d(key, n, period)?);
                }
                Ok(acc)
            }
            _ => Err(self.unsupported(key, "kdv")),
        }
    }

    pub fn field_2d(&self, key: &str, n: usize) -> Result<VectorField2D<f64>> {
        match self {
            InitSpec::Zero => VectorField2D::zeros(n),
            InitSpec::TaylorGreen { k, c } => taylor_green(n, &TaylorGreenSpec::new(*k, *c)).map_err(|e| match e {
                NudgingError::Validation { message, .. } => NudgingError::validation(key, message),
                other => other,
            }),
            InitSpec::Sum(parts) => {
                let mut acc = VectorField2D::zeros(n)?;
                for p in parts {
                    acc = acc.add(&p.field_2d(key, n)?);
                }
                Ok(acc)
            }
            _ => Err(self.unsupported(key, "euler2d")),
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Zero => write!(f, "zero"),
            InitSpec::Triple(x, y, z) => write!(f, "triple({x}, {y}, {z})"),
            InitSpec::SingleMode { c, k0 } => write!(f, "single_mode({c}, {k0})"),
            InitSpec::ShiftedProfile { base, m, k } => write!(f, "shifted_profile({base}, {m}, {k})"),
            InitSpec::Sum(parts) => {
                write!(f, "sum(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            InitSpec::TaylorGreen { k, c } => write!(f, "taylor_green({k}, {c})"),
        }
    }
}

impl FromStr for InitSpec {
    type Err = NudgingError;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let spec = p.spec()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("trailing characters"));
        }
        Ok(spec)
    }
}

enum Arg {
    Num(f64),
    Spec(InitSpec),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> NudgingError {
        NudgingError::Config(format!("init spec `{}`: {what} at offset {}", self.src, self.pos))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn arg(&mut self) -> Result<Arg> {
        self.skip_ws();
        match self.src[self.pos..].chars().next() {
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let text = self.take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+'));
                text.parse::<f64>()
                    .map(Arg::Num)
                    .map_err(|_| NudgingError::Config(format!("init spec: bad number `{text}`")))
            }
            _ => self.spec().map(Arg::Spec),
        }
    }

    fn args(&mut self) -> Result<Vec<Arg>> {
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(self.arg()?);
            if self.eat(')') {
                return Ok(out);
            }
            if !self.eat(',') {
                return Err(self.error("expected `,` or `)`"));
            }
        }
    }

    fn spec(&mut self) -> Result<InitSpec> {
        self.skip_ws();
        let literal_triple = self.eat('(');
        let name = if literal_triple {
            "triple".to_string()
        } else {
            self.take_while(|c| c.is_ascii_alphanumeric() || c == '_').to_string()
        };
        if name.is_empty() {
            return Err(self.error("expected a constructor name"));
        }
        if name == "zero" {
            if self.eat('(') && !self.eat(')') {
                return Err(self.error("`zero` takes no arguments"));
            }
            return Ok(InitSpec::Zero);
        }
        if !literal_triple && !self.eat('(') {
            return Err(self.error("expected `(`"));
        }
        let args = self.args()?;
        let nums = |count: usize| -> Result<Vec<f64>> {
            if args.len() != count {
                return Err(NudgingError::Config(format!("`{name}` takes {count} arguments, got {}", args.len())));
            }
            args.iter()
                .map(|a| match a {
                    Arg::Num(x) => Ok(*x),
                    Arg::Spec(_) => Err(NudgingError::Config(format!("`{name}` expects numeric arguments"))),
                })
                .collect()
        };
        let int = |x: f64, what: &str| -> Result<i64> {
            if x.fract() != 0.0 || !x.is_finite() {
                return Err(NudgingError::Config(format!("`{name}`: {what} must be an integer, got {x}")));
            }
            Ok(x as i64)
        };
        let count = |x: f64, what: &str| -> Result<usize> {
            let v = int(x, what)?;
            usize::try_from(v).map_err(|_| NudgingError::Config(format!("`{name}`: {what} must be nonnegative")))
        };
        match name.as_str() {
            "triple" => {
                let v = nums(3)?;
                Ok(InitSpec::Triple(v[0], v[1], v[2]))
            }
            "single_mode" => {
                let v = nums(2)?;
                Ok(InitSpec::SingleMode { c: v[0], k0: int(v[1], "k0")? })
            }
            "taylor_green" => {
                let v = nums(2)?;
                Ok(InitSpec::TaylorGreen { k: count(v[0], "k")?, c: v[1] })
            }
            "shifted_profile" => {
                let mut it = args.into_iter();
                match (it.next(), it.next(), it.next(), it.next()) {
                    (Some(Arg::Spec(base)), Some(Arg::Num(m)), Some(Arg::Num(k)), None) => Ok(InitSpec::ShiftedProfile {
                        base: Box::new(base),
                        m: count(m, "M")?,
                        k: count(k, "k")?,
                    }),
                    _ => Err(NudgingError::Config("`shifted_profile` takes (base spec, M, k)".into())),
                }
            }
            "sum" => args
                .into_iter()
                .map(|a| match a {
                    Arg::Spec(s) => Ok(s),
                    Arg::Num(_) => Err(NudgingError::Config("`sum` takes init specs".into())),
                })
                .collect::<Result<Vec<_>>>()
                .map(InitSpec::Sum),
            other => Err(NudgingError::Config(format!(
                "unknown init constructor `{other}` (expected zero, triple, single_mode, shifted_profile, sum, taylor_green)"
            ))),
        }
    }
}
