//! Named closed-form functions used as initial and exterior data.
//!
//! All functions depend on `x` only. Centers lie on the first axis.
//!
//! | name | value |
//! |---|---|
//! | `zero` | `0` |
//! | `const(c)` | `c` |
//! | `cos(k)` | `cos(k·x₁)` |
//! | `linear(a₁[,a₂])` | `a·x` |
//! | `quadratic(a)` | `a·|x|²/2` |
//! | `bump(a,c,r)` | `a·(1 - |x - c e₁|²/r²)₊⁴` |
//! | `gaussian(a,c,s)` | `a·exp(-|x - c e₁|²/s²)` |

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{DataFn, Exterior};
use crate::scalar::{lit, Real};

/// Splits `name(args)` into its parts.
pub(crate) fn split_call(s: &str) -> Result<(&str, &str)> {
    let open = s.find('(').ok_or_else(|| Error::Parse(format!("expected `name(args)`, got `{s}`")))?;
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("missing `)` in `{s}`")));
    }
    Ok((s[..open].trim(), &s[open + 1..s.len() - 1]))
}

pub(crate) fn parse_args(args: &str, expected: usize) -> Result<Vec<f64>> {
    let vals = args
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| Error::Parse(format!("`{}` is not a number", a.trim()))))
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != expected || vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("expected {expected} finite argument(s), got `{args}`")));
    }
    Ok(vals)
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldPreset {
    Zero,
    Const(f64),
    Cos(f64),
    Linear([f64; 2]),
    Quadratic(f64),
    Bump { amplitude: f64, center: f64, radius: f64 },
    Gaussian { amplitude: f64, center: f64, width: f64 },
}

impl FieldPreset {
    pub fn eval<T: Real>(&self, x: &[T; 2], dim: usize) -> T {
        let x1 = x[0];
        let x2 = if dim == 2 { x[1] } else { T::zero() };
        match *self {
            FieldPreset::Zero => T::zero(),
            FieldPreset::Const(c) => lit(c),
            FieldPreset::Cos(k) => (lit::<T>(k) * x1).cos(),
            FieldPreset::Linear(a) => lit::<T>(a[0]) * x1 + lit::<T>(a[1]) * x2,
            FieldPreset::Quadratic(a) => lit::<T>(0.5 * a) * (x1 * x1 + x2 * x2),
            FieldPreset::Bump { amplitude, center, radius } => {
                let d = x1 - lit(center);
                let s = T::one() - (d * d + x2 * x2) / lit(radius * radius);
                if s > T::zero() {
                    lit::<T>(amplitude) * s * s * s * s
                } else {
                    T::zero()
                }
            }
            FieldPreset::Gaussian { amplitude, center, width } => {
                let d = x1 - lit(center);
                lit::<T>(amplitude) * (-(d * d + x2 * x2) / lit(width * width)).exp()
            }
        }
    }

    /// `(M, γ)` with `|f(x)| ≤ M (1 + |x|^γ)`.
    pub fn growth(&self) -> (f64, f64) {
        match *self {
            FieldPreset::Zero => (0.0, 0.0),
            FieldPreset::Const(c) => (c.abs(), 0.0),
            FieldPreset::Cos(_) => (1.0, 0.0),
            FieldPreset::Linear(a) => (a[0].hypot(a[1]), 1.0),
            FieldPreset::Quadratic(a) => (0.5 * a.abs(), 2.0),
            FieldPreset::Bump { amplitude, .. } | FieldPreset::Gaussian { amplitude, .. } => (amplitude.abs(), 0.0),
        }
    }

    /// The function as (time-independent) exterior data.
    pub fn exterior<T: Real>(&self, dim: usize) -> Exterior<T> {
        match *self {
            FieldPreset::Zero => Exterior::Zero,
            FieldPreset::Const(c) => Exterior::Constant(lit(c)),
            _ => {
                let this = self.clone();
                let g = DataFn::new(self.to_string(), Arc::new(move |x: &[T; 2], _t: T| this.eval(x, dim)));
                let (m, gamma) = self.growth();
                if gamma == 0.0 {
                    Exterior::Bounded { g, bound: lit(m) }
                } else {
                    Exterior::Growth { g, bound: lit(m), gamma: lit(gamma) }
                }
            }
        }
    }
}

impl fmt::Display for FieldPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FieldPreset::Zero => write!(f, "zero"),
            FieldPreset::Const(c) => write!(f, "const({c})"),
            FieldPreset::Cos(k) => write!(f, "cos({k})"),
            FieldPreset::Linear(a) if a[1] == 0.0 => write!(f, "linear({})", a[0]),
            FieldPreset::Linear(a) => write!(f, "linear({},{})", a[0], a[1]),
            FieldPreset::Quadratic(a) => write!(f, "quadratic({a})"),
            FieldPreset::Bump { amplitude, center, radius } => write!(f, "bump({amplitude},{center},{radius})"),
            FieldPreset::Gaussian { amplitude, center, width } => write!(f, "gaussian({amplitude},{center},{width})"),
        }
    }
}

impl FromStr for FieldPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(FieldPreset::Zero);
        }
        let (name, args) = split_call(s)?;
        Ok(match name {
            "const" => FieldPreset::Const(parse_args(args, 1)?[0]),
            "cos" => FieldPreset::Cos(parse_args(args, 1)?[0]),
            "linear" => {
                let n = args.split(',').count();
                let a = parse_args(args, n.clamp(1, 2))?;
                FieldPreset::Linear([a[0], a.get(1).copied().unwrap_or(0.0)])
            }
            "quadratic" => FieldPreset::Quadratic(parse_args(args, 1)?[0]),
            "bump" => {
                let a = parse_args(args, 3)?;
                if a[2] <= 0.0 {
                    return Err(Error::Parse("bump radius must be positive".into()));
                }
                FieldPreset::Bump { amplitude: a[0], center: a[1], radius: a[2] }
            }
            "gaussian" => {
                let a = parse_args(args, 3)?;
                if a[2] <= 0.0 {
                    return Err(Error::Parse("gaussian width must be positive".into()));
                }
                FieldPreset::Gaussian { amplitude: a[0], center: a[1], width: a[2] }
            }
            _ => return Err(Error::Parse(format!("unknown field preset `{s}`"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_names() {
        for s in ["zero", "const(2)", "cos(1)", "linear(1,-2)", "quadratic(3)", "bump(1,0.25,1.5)", "gaussian(1,0,0.5)"]
        {
            let p: FieldPreset = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("bump(1,2)".parse::<FieldPreset>().is_err());
        assert!("cos(x)".parse::<FieldPreset>().is_err());
    }

    #[test]
    fn bump_values() {
        let p = FieldPreset::Bump { amplitude: 2.0, center: 0.5, radius: 1.0 };
        assert_eq!(p.eval(&[0.5_f64, 0.0], 1), 2.0);
        assert_eq!(p.eval(&[1.5_f64, 0.0], 1), 0.0);
        assert_eq!(p.eval(&[1.0_f64, 0.0], 1), 2.0 * 0.75_f64.powi(4));
    }
}
