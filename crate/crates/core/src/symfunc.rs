//! Sums of monomials with rational exponents over the unit box.
//!
//! A [`SymFunc`] represents basis functions, inner functions and their
//! pointwise products exactly. Integration against the weight goes through a
//! [`MomentOracle`], which maps an exponent vector to the exact moment.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use dashu_int::{IBig, UBig};

use crate::error::{Error, Result};
use crate::scalars::{rat_int, rat_to_f64, ratio, Rational};

/// `coefficient · ∏ xᵢ^exponentsᵢ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: Rational,
    pub exponents: Vec<Rational>,
}

impl Monomial {
    /// Every exponent must exceed −1 so the moment on the unit box is finite.
    pub fn new(coefficient: Rational, exponents: Vec<Rational>) -> Result<Self> {
        let minus_one = rat_int(-1);
        if let Some((variable, e)) = exponents.iter().enumerate().find(|(_, e)| **e <= minus_one) {
            return Err(Error::DivergentMoment {
                variable,
                exponent: e.to_string(),
            });
        }
        Ok(Self {
            coefficient,
            exponents,
        })
    }
}

/// Finite linear combination of monomials in `dim` variables, kept in collected form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymFunc {
    dim: usize,
    terms: BTreeMap<Vec<Rational>, Rational>,
}

impl SymFunc {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational, dim: usize) -> Self {
        let mut f = Self::zero(dim);
        f.push(vec![Rational::ZERO; dim], c);
        f
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(rat_int(1), dim)
    }

    /// The coordinate function `x_var`.
    ///
    /// # Panics
    /// Panics if `var >= dim`.
    pub fn variable(var: usize, dim: usize) -> Self {
        assert!(var < dim, "variable index out of range");
        Self::power(var, rat_int(1), dim)
    }

    /// `x_var ^ exponent`.
    pub fn power(var: usize, exponent: Rational, dim: usize) -> Self {
        let mut exps = vec![Rational::ZERO; dim];
        exps[var] = exponent;
        let mut f = Self::zero(dim);
        f.push(exps, rat_int(1));
        f
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut f = Self::zero(m.exponents.len());
        f.push(m.exponents, m.coefficient);
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms.iter().map(|(e, c)| Monomial {
            coefficient: c.clone(),
            exponents: e.clone(),
        })
    }

    fn push(&mut self, exps: Vec<Rational>, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&rat_int(-1)))
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.push(e.clone(), c * factor);
        }
        out
    }

    /// Pointwise product, collected.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.push(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.dim);
        for _ in 0..k {
            out = out.mul(self).expect("same dimension");
        }
        out
    }

    /// Value at a point of the unit box.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "point dimension");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = rat_to_f64(c);
                for (xi, ei) in x.iter().zip(e) {
                    if !ei.is_zero() {
                        v *= xi.powf(rat_to_f64(ei));
                    }
                }
                v
            })
            .sum()
    }

    /// Infimum and supremum over `[0,1]^dim`.
    ///
    /// Exact when every term has a nonnegative exponent vector and all
    /// coefficients share a sign (the function is then monotone in each
    /// variable); otherwise a grid estimate, flagged by `exact = false`.
    pub fn bounds_on_unit_box(&self) -> Bounds {
        let nonneg_exps = self
            .terms
            .keys()
            .all(|e| e.iter().all(|q| *q >= Rational::ZERO));
        let all_pos = self.terms.values().all(|c| *c > Rational::ZERO);
        let all_neg = self.terms.values().all(|c| *c < Rational::ZERO);
        let at_origin = self.eval(&vec![0.0; self.dim]);
        let at_corner = self.eval(&vec![1.0; self.dim]);
        if nonneg_exps && (all_pos || all_neg) {
            return Bounds {
                inf: at_origin.min(at_corner),
                sup: at_origin.max(at_corner),
                exact: true,
            };
        }
        let steps: usize = match self.dim {
            1 => 4096,
            2 => 128,
            3 => 32,
            _ => 8,
        };
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        let mut idx = vec![0usize; self.dim];
        let mut point = vec![0.0; self.dim];
        loop {
            for (p, &i) in point.iter_mut().zip(&idx) {
                *p = i as f64 / steps as f64;
            }
            let v = self.eval(&point);
            inf = inf.min(v);
            sup = sup.max(v);
            let mut k = 0;
            while k < self.dim {
                idx[k] += 1;
                if idx[k] <= steps {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == self.dim {
                break;
            }
        }
        Bounds {
            inf,
            sup,
            exact: false,
        }
    }

    /// Parse a function such as `x^(1/3)`, `x*y` or `(x + y)^2 - 1/2`.
    ///
    /// Variables are `x`, `y`, `z` (up to three dimensions) or `x1`…`xd`.
    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        SourceParser::new(src, dim).parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub inf: f64,
    pub sup: f64,
    pub exact: bool,
}

fn variable_name(i: usize, dim: usize) -> String {
    if dim <= 3 {
        ["x", "y", "z"][i].to_string()
    } else {
        format!("x{}", i + 1)
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_int() {
        r.numerator().to_string()
    } else {
        format!("{}/{}", r.numerator(), r.denominator())
    }
}

impl fmt::Display for SymFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest total degree first reads naturally
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let negative = *c < Rational::ZERO;
            let mag = if negative { -c.clone() } else { c.clone() };
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, q)| !q.is_zero())
                .map(|(i, q)| {
                    let name = variable_name(i, self.dim);
                    if *q == rat_int(1) {
                        name
                    } else if q.is_int() && *q > Rational::ZERO {
                        format!("{name}^{}", fmt_rational(q))
                    } else {
                        format!("{name}^({})", fmt_rational(q))
                    }
                })
                .collect();
            let one = mag == rat_int(1);
            match (factors.is_empty(), one) {
                (true, _) => write!(f, "{}", fmt_rational(&mag))?,
                (false, true) => write!(f, "{}", factors.join("*"))?,
                (false, false) => write!(f, "{}*{}", fmt_rational(&mag), factors.join("*"))?,
            }
        }
        Ok(())
    }
}

/// Exact moments of a weight over the unit box.
pub trait MomentOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// `∫ ∏ xᵢ^qᵢ w(x) dx`.
    fn moment(&self, exponents: &[Rational]) -> Result<Rational>;

    fn integrate(&self, f: &SymFunc) -> Result<Rational> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: f.dim(),
                right: self.dim(),
            });
        }
        let mut acc = Rational::ZERO;
        for (e, c) in &f.terms {
            acc += c * self.moment(e)?;
        }
        Ok(acc)
    }

    /// `⟨a, b⟩ = ∫ a b w`.
    fn inner(&self, a: &SymFunc, b: &SymFunc) -> Result<Rational> {
        self.integrate(&a.mul(b)?)
    }
}

impl fmt::Debug for dyn MomentOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MomentOracle(dim={})", self.dim())
    }
}

/// Lebesgue measure on `[0,1]^dim`, already normalized to total mass 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitBox {
    pub dim: usize,
}

impl UnitBox {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl MomentOracle for UnitBox {
    fn dim(&self) -> usize {
        self.dim
    }

    fn moment(&self, exponents: &[Rational]) -> Result<Rational> {
        let one = rat_int(1);
        let mut m = rat_int(1);
        for (variable, q) in exponents.iter().enumerate() {
            let shifted = q + &one;
            if shifted <= Rational::ZERO {
                return Err(Error::DivergentMoment {
                    variable,
                    exponent: fmt_rational(q),
                });
            }
            m /= shifted;
        }
        Ok(m)
    }
}

/// Named basis families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// `1, x^{1/3}, x, x^{4/3}, x², x^{7/3}, …` on `[0,1]`.
    FractionalPowers13,
    /// Monomials by total degree (lexicographic within a degree).
    Monomials,
    /// `1, s, p, s², p², …` with `s = Σ xᵢ` and `p = ∏ xᵢ`.
    SumProductPowers,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::FractionalPowers13 => "fractional_powers_13",
            BasisKind::Monomials => "monomials",
            BasisKind::SumProductPowers => "sum_product_powers",
        }
    }

    /// First `count` functions of the family.
    pub fn functions(self, count: usize, dim: usize) -> Result<Vec<SymFunc>> {
        if count == 0 {
            return Err(Error::EmptyBasis);
        }
        let unsupported = || Error::UnsupportedDimension {
            family: self.name().to_string(),
            dim,
        };
        match self {
            BasisKind::FractionalPowers13 => {
                if dim != 1 {
                    return Err(unsupported());
                }
                Ok((0..count)
                    .map(|k| {
                        let whole = (k / 2) as i64;
                        let e = if k % 2 == 0 {
                            rat_int(whole)
                        } else {
                            ratio(3 * whole + 1, 3)
                        };
                        SymFunc::power(0, e, 1)
                    })
                    .collect())
            }
            BasisKind::Monomials => {
                if dim == 0 {
                    return Err(unsupported());
                }
                let mut out = Vec::with_capacity(count);
                let mut degree = 0usize;
                while out.len() < count {
                    for exps in exponent_vectors(dim, degree) {
                        if out.len() == count {
                            break;
                        }
                        let mut f = SymFunc::zero(dim);
                        f.push(exps.into_iter().map(|e| rat_int(e as i64)).collect(), rat_int(1));
                        out.push(f);
                    }
                    degree += 1;
                }
                Ok(out)
            }
            BasisKind::SumProductPowers => {
                if dim < 2 {
                    return Err(unsupported());
                }
                let sum = (0..dim)
                    .map(|i| SymFunc::variable(i, dim))
                    .reduce(|a, b| a.add(&b).expect("same dimension"))
                    .expect("dim >= 2");
                let prod = (0..dim)
                    .map(|i| SymFunc::variable(i, dim))
                    .reduce(|a, b| a.mul(&b).expect("same dimension"))
                    .expect("dim >= 2");
                Ok((0..count)
                    .map(|k| {
                        if k == 0 {
                            SymFunc::one(dim)
                        } else {
                            let power = k.div_ceil(2) as u32;
                            if k % 2 == 1 {
                                sum.pow(power)
                            } else {
                                prod.pow(power)
                            }
                        }
                    })
                    .collect())
            }
        }
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fractional_powers_13" => Ok(BasisKind::FractionalPowers13),
            "monomials" => Ok(BasisKind::Monomials),
            "sum_product_powers" => Ok(BasisKind::SumProductPowers),
            other => Err(Error::UnknownBasis(other.to_string())),
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// First `count` functions of the family named `kind`.
pub fn basis_family(kind: &str, count: usize, dim: usize) -> Result<Vec<SymFunc>> {
    kind.parse::<BasisKind>()?.functions(count, dim)
}

/// Exponent vectors of total degree `degree`, lexicographically descending.
fn exponent_vectors(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in exponent_vectors(dim - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct SourceParser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> SourceParser<'a> {
    fn new(src: &'a str, dim: usize) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            dim,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<SymFunc> {
        if self.dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let f = self.sum()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(f)
    }

    fn sum(&mut self) -> Result<SymFunc> {
        let negate = self.eat(b'-');
        let mut acc = self.product()?;
        if negate {
            acc = acc.scale(&rat_int(-1));
        }
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.product()?)?;
            } else if self.eat(b'-') {
                acc = acc.sub(&self.product()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<SymFunc> {
        let mut acc = self.power()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.power()?)?;
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.power()?;
                let c = match d.as_constant() {
                    Some(c) if !c.is_zero() => c,
                    _ => {
                        self.pos = at;
                        return self.err("divisor must be a nonzero constant");
                    }
                };
                acc = acc.scale(&(rat_int(1) / c));
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<SymFunc> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let e = self.exponent()?;
        if e.is_int() && e >= Rational::ZERO {
            let k: u32 = match u32::try_from(e.numerator().clone()) {
                Ok(k) => k,
                Err(_) => return self.err("exponent too large"),
            };
            return Ok(base.pow(k));
        }
        // fractional or negative powers only of bare monomials with unit coefficient
        match base.terms.iter().next() {
            Some((exps, c)) if base.len() == 1 && *c == rat_int(1) => {
                let scaled = exps.iter().map(|q| q * &e).collect();
                let mut out = SymFunc::zero(self.dim);
                out.push(scaled, rat_int(1));
                Ok(out)
            }
            _ => {
                self.pos = at;
                self.err("non-integer powers apply only to a single monomial with coefficient 1")
            }
        }
    }

    fn exponent(&mut self) -> Result<Rational> {
        if self.eat(b'(') {
            let neg = self.eat(b'-');
            let mut r = self.number()?;
            if self.eat(b'/') {
                let d = self.number()?;
                if d.is_zero() {
                    return self.err("zero denominator");
                }
                r /= d;
            }
            if !self.eat(b')') {
                return self.err("expected `)`");
            }
            Ok(if neg { -r } else { r })
        } else {
            let neg = self.eat(b'-');
            let r = self.number()?;
            Ok(if neg { -r } else { r })
        }
    }

    fn number(&mut self) -> Result<Rational> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_end = self.pos;
        let mut frac = "";
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac = &self.src[fs..self.pos];
        }
        let int = &self.src[start..int_end];
        if int.is_empty() && frac.is_empty() {
            self.pos = start;
            return self.err("expected a number");
        }
        let digits = format!("{int}{frac}");
        let num: IBig = digits.parse().expect("ascii digits");
        let den = UBig::from(10u8).pow(frac.len());
        Ok(Rational::from_parts(num, den))
    }

    fn atom(&mut self) -> Result<SymFunc> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let f = self.sum()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(f)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                Ok(SymFunc::constant(self.number()?, self.dim))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                match self.resolve_variable(name) {
                    Some(i) => Ok(SymFunc::variable(i, self.dim)),
                    None => Err(Error::UnknownIdentifier {
                        name: name.to_string(),
                        pos: start,
                    }),
                }
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }

    fn resolve_variable(&self, name: &str) -> Option<usize> {
        let short = ["x", "y", "z"];
        if let Some(i) = short.iter().position(|s| *s == name) {
            return (i < self.dim).then_some(i);
        }
        let idx: usize = name.strip_prefix('x')?.parse().ok()?;
        (1..=self.dim).contains(&idx).then(|| idx - 1)
    }
}

impl SymFunc {
    /// The value if this function is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::ZERO),
            1 => {
                let (e, c) = self.terms.iter().next()?;
                e.iter().all(|q| q.is_zero()).then(|| c.clone())
            }
            _ => None,
        }
    }
}
