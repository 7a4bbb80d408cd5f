//! Problem data: the coefficient fields `a, b, c, d, beta` and the spectral
//! parameter `lambda`.

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{parse_field, EvalContext, FieldExpr};
use crate::tensor::Mat2;

/// C¹ cutoff that is 1 inside `inner`, 0 outside `outer` (distances from
/// `center`), blended by `3t² − 2t³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cutoff {
    pub center: [f64; 2],
    pub inner: f64,
    pub outer: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff { center: [0.0, 0.0], inner: 0.6, outer: 0.8 }
    }
}

impl Cutoff {
    pub fn new(center: [f64; 2], inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::InvalidParameter(format!("cutoff radii must satisfy 0 <= r0 < r1, got ({inner}, {outer})")));
        }
        Ok(Cutoff { center, inner, outer })
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        let r = ((p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2)).sqrt();
        if r <= self.inner {
            1.0
        } else if r >= self.outer {
            0.0
        } else {
            let t = (self.outer - r) / (self.outer - self.inner);
            t * t * (3.0 - 2.0 * t)
        }
    }
}

/// Coefficients of the divergence-form operator and its boundary feedback.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    /// Row-major `[a11, a12, a21, a22]` in the chart basis of the metric.
    pub a: [FieldExpr; 4],
    pub b: [FieldExpr; 2],
    pub b_support: Cutoff,
    pub c: FieldExpr,
    pub d: FieldExpr,
    pub beta: FieldExpr,
    pub lambda: Complex64,
}

impl Default for CoefficientSet {
    fn default() -> Self {
        Self::laplace()
    }
}

fn named(field: &str, text: &str) -> Result<FieldExpr> {
    parse_field(text).map_err(|source| Error::Field { field: field.to_string(), source })
}

impl CoefficientSet {
    /// `a = id`, `b = c = d = 0`, `beta = 1`, `lambda = 1`.
    pub fn laplace() -> Self {
        let zero = FieldExpr::constant(0.0);
        let one = FieldExpr::constant(1.0);
        CoefficientSet {
            a: [one.clone(), zero.clone(), zero.clone(), one.clone()],
            b: [zero.clone(), zero.clone()],
            b_support: Cutoff::default(),
            c: zero.clone(),
            d: zero,
            beta: one,
            lambda: Complex64::new(1.0, 0.0),
        }
    }

    /// Sets `a` from four comma-separated expressions (`a11, a12, a21, a22`)
    /// or from a single expression used as a scalar multiple of the identity.
    pub fn with_a(mut self, text: &str) -> Result<Self> {
        let parts = split_top_level(text);
        self.a = match parts.len() {
            1 => {
                let s = named("a", &parts[0])?;
                [s.clone(), FieldExpr::constant(0.0), FieldExpr::constant(0.0), s]
            }
            4 => [named("a11", &parts[0])?, named("a12", &parts[1])?, named("a21", &parts[2])?, named("a22", &parts[3])?],
            n => return Err(Error::Config(format!("a expects 1 or 4 expressions, got {n}"))),
        };
        Ok(self)
    }

    pub fn with_b(mut self, text: &str, support: Cutoff) -> Result<Self> {
        let parts = split_top_level(text);
        if parts.len() != 2 {
            return Err(Error::Config(format!("b expects 2 expressions, got {}", parts.len())));
        }
        self.b = [named("b1", &parts[0])?, named("b2", &parts[1])?];
        self.b_support = support;
        Ok(self)
    }

    pub fn with_c(mut self, text: &str) -> Result<Self> {
        self.c = named("c", text)?;
        Ok(self)
    }

    pub fn with_d(mut self, text: &str) -> Result<Self> {
        self.d = named("d", text)?;
        Ok(self)
    }

    pub fn with_beta(mut self, text: &str) -> Result<Self> {
        self.beta = named("beta", text)?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: Complex64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Evaluates `a` at a chart point; rejects asymmetric values.
    pub fn a_at(&self, p: [f64; 2]) -> Result<Mat2> {
        let ctx = EvalContext::interior(p[0], p[1]);
        let v = |i: usize, name: &str| self.a[i].eval(&ctx).map_err(|source| Error::Field { field: name.into(), source });
        let m = Mat2([[v(0, "a11")?, v(1, "a12")?], [v(2, "a21")?, v(3, "a22")?]]);
        let (a12, a21) = (m.0[0][1], m.0[1][0]);
        if (a12 - a21).abs() > 1e-12 * (1.0 + a12.abs().max(a21.abs())) {
            return Err(Error::AsymmetricCoefficient { x: p[0], y: p[1], a12, a21 });
        }
        Ok(m)
    }

    /// First-order coefficient with the compact-support cutoff applied.
    pub fn b_at(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let chi = self.b_support.value(p);
        if chi == 0.0 {
            return Ok([0.0, 0.0]);
        }
        let ctx = EvalContext::interior(p[0], p[1]);
        let e = |i: usize, name: &str| self.b[i].eval(&ctx).map_err(|source| Error::Field { field: name.into(), source });
        Ok([chi * e(0, "b1")?, chi * e(1, "b2")?])
    }

    pub fn c_at(&self, p: [f64; 2]) -> Result<f64> {
        self.c.eval(&EvalContext::interior(p[0], p[1])).map_err(|source| Error::Field { field: "c".into(), source })
    }

    pub fn d_at(&self, ctx: &EvalContext) -> Result<f64> {
        self.d.eval(ctx).map_err(|source| Error::Field { field: "d".into(), source })
    }

    pub fn beta_at(&self, ctx: &EvalContext) -> Result<f64> {
        self.beta.eval(ctx).map_err(|source| Error::Field { field: "beta".into(), source })
    }

    pub fn has_first_order(&self) -> bool {
        self.b.iter().any(|e| e.constant_value() != Some(0.0))
    }

    /// `b = c = d = 0`, `beta = 1`.
    pub fn is_pure_principal(&self) -> bool {
        !self.has_first_order()
            && self.c.constant_value() == Some(0.0)
            && self.d.constant_value() == Some(0.0)
            && self.beta.constant_value() == Some(1.0)
    }

    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.describe().as_bytes());
        hex::encode(&hasher.finalize()[..8])
    }

    /// One-line canonical description.
    pub fn describe(&self) -> String {
        format!(
            "a=[{}, {}, {}, {}]; b=[{}, {}] support=({}, {}; {}, {}); c={}; d={}; beta={}; lambda={}",
            self.a[0],
            self.a[1],
            self.a[2],
            self.a[3],
            self.b[0],
            self.b[1],
            self.b_support.center[0],
            self.b_support.center[1],
            self.b_support.inner,
            self.b_support.outer,
            self.c,
            self.d,
            self.beta,
            format_complex(self.lambda)
        )
    }
}

/// Splits on commas that are not nested inside parentheses.
pub fn split_top_level(text: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    parts.push(cur.trim().to_string());
    parts
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` (whitespace ignored).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidParameter(format!("cannot parse complex number `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let imag_part = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    if let Some(body) = s.strip_suffix(['i', 'j']) {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => {
                let re = body[..k].parse::<f64>().map_err(|_| bad())?;
                Ok(Complex64::new(re, imag_part(&body[k..])?))
            }
            None => Ok(Complex64::new(0.0, imag_part(body)?)),
        }
    } else {
        Ok(Complex64::new(s.parse::<f64>().map_err(|_| bad())?, 0.0))
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}
