//! Symbol expressions: a small arithmetic language over the coordinates of
//! `X ⊂ C^{d+1}`.
//!
//! ```text
//! expr   = term { ("+" | "-") term } ;
//! term   = factor { "*" factor } ;
//! factor = ("+" | "-") factor | number | ident | "(" expr ")" ;
//! ident  = "w" idx                       (* |z_i|²            *)
//!        | "re_" pair | "im_" pair       (* Re, Im (z_i z̄_j)  *)
//!        | "rh_" pair | "ih_" pair       (* Re, Im (z_i z_j)   fiber-dependent *)
//!        | "rz_" idx  | "iz_" idx ;      (* Re, Im z_i          fiber-dependent *)
//! pair   = digit digit | idx "_" idx ;
//! ```
//!
//! Fiber-dependent identifiers are only accepted by [`parse_fiber_expr`].

use crate::error::{Error, Result};
use crate::sampling::{random_point, seeded_rng};
use crate::scalar::{Cx, Real};
use std::collections::BTreeMap;

/// A coordinate function on `C^{d+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    /// `|z_i|²`
    W(usize),
    /// `Re(z_i z̄_j)`
    Re(usize, usize),
    /// `Im(z_i z̄_j)`
    Im(usize, usize),
    /// `Re(z_i z_j)`
    HolRe(usize, usize),
    /// `Im(z_i z_j)`
    HolIm(usize, usize),
    /// `Re z_i`
    LinRe(usize),
    /// `Im z_i`
    LinIm(usize),
}

impl Var {
    fn fiber_invariant(self) -> bool {
        matches!(self, Var::W(_) | Var::Re(..) | Var::Im(..))
    }

    fn eval<T: Real>(self, z: &[Cx<T>]) -> T {
        match self {
            Var::W(i) => z[i].norm_sqr(),
            Var::Re(i, j) => (z[i] * z[j].conj()).re,
            Var::Im(i, j) => (z[i] * z[j].conj()).im,
            Var::HolRe(i, j) => (z[i] * z[j]).re,
            Var::HolIm(i, j) => (z[i] * z[j]).im,
            Var::LinRe(i) => z[i].re,
            Var::LinIm(i) => z[i].im,
        }
    }
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval<T: Real>(&self, z: &[Cx<T>]) -> T {
        match self {
            Expr::Const(c) => T::lit(*c),
            Expr::Var(v) => v.eval(z),
            Expr::Neg(a) => -a.eval(z),
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(a) => a.visit_vars(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Expansion as a polynomial in `(z, z̄)`.
    pub fn polynomial(&self, d: usize) -> Polynomial {
        match self {
            Expr::Const(c) => Polynomial::constant(d, Cx::new(*c, 0.0)),
            Expr::Var(v) => Polynomial::of_var(d, *v),
            Expr::Neg(a) => a.polynomial(d).scaled(Cx::new(-1.0, 0.0)),
            Expr::Add(a, b) => a.polynomial(d).plus(&b.polynomial(d)),
            Expr::Sub(a, b) => a
                .polynomial(d)
                .plus(&b.polynomial(d).scaled(Cx::new(-1.0, 0.0))),
            Expr::Mul(a, b) => a.polynomial(d).times(&b.polynomial(d)),
        }
    }
}

/// Exponent pair `(a, b)` of the monomial `z^a z̄^b`.
pub type Bidegree = (Vec<u32>, Vec<u32>);

/// A polynomial `Σ c_{ab} z^a z̄^b` with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub d: usize,
    pub terms: BTreeMap<Bidegree, Cx<f64>>,
}

impl Polynomial {
    fn unit(d: usize, i: usize) -> Vec<u32> {
        let mut e = vec![0; d + 1];
        e[i] += 1;
        e
    }

    fn sum(a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn constant(d: usize, c: Cx<f64>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((vec![0; d + 1], vec![0; d + 1]), c);
        Self { d, terms }.pruned()
    }

    fn of_var(d: usize, v: Var) -> Self {
        let zero = vec![0u32; d + 1];
        let h = Cx::new(0.5, 0.0);
        let hi = Cx::new(0.0, 0.5);
        let list: Vec<(Bidegree, Cx<f64>)> = match v {
            Var::W(i) => vec![((Self::unit(d, i), Self::unit(d, i)), Cx::new(1.0, 0.0))],
            Var::Re(i, j) => vec![
                ((Self::unit(d, i), Self::unit(d, j)), h),
                ((Self::unit(d, j), Self::unit(d, i)), h),
            ],
            Var::Im(i, j) => vec![
                ((Self::unit(d, i), Self::unit(d, j)), -hi),
                ((Self::unit(d, j), Self::unit(d, i)), hi),
            ],
            Var::HolRe(i, j) => {
                let e = Self::sum(&Self::unit(d, i), &Self::unit(d, j));
                vec![((e.clone(), zero.clone()), h), ((zero, e), h)]
            }
            Var::HolIm(i, j) => {
                let e = Self::sum(&Self::unit(d, i), &Self::unit(d, j));
                vec![((e.clone(), zero.clone()), -hi), ((zero, e), hi)]
            }
            Var::LinRe(i) => vec![
                ((Self::unit(d, i), zero.clone()), h),
                ((zero, Self::unit(d, i)), h),
            ],
            Var::LinIm(i) => vec![
                ((Self::unit(d, i), zero.clone()), -hi),
                ((zero, Self::unit(d, i)), hi),
            ],
        };
        let mut terms = BTreeMap::new();
        for (k, c) in list {
            *terms.entry(k).or_insert(Cx::new(0.0, 0.0)) += c;
        }
        Self { d, terms }.pruned()
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| c.norm() != 0.0);
        self
    }

    fn scaled(mut self, s: Cx<f64>) -> Self {
        for c in self.terms.values_mut() {
            *c *= s;
        }
        self.pruned()
    }

    fn plus(mut self, other: &Self) -> Self {
        for (k, c) in &other.terms {
            *self.terms.entry(k.clone()).or_insert(Cx::new(0.0, 0.0)) += c;
        }
        self.pruned()
    }

    fn times(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                let key = (Self::sum(a1, a2), Self::sum(b1, b2));
                *terms.entry(key).or_insert(Cx::new(0.0, 0.0)) += c1 * c2;
            }
        }
        Self { d: self.d, terms }.pruned()
    }

    /// Every monomial has equal holomorphic and antiholomorphic degree.
    pub fn is_fiber_invariant(&self) -> bool {
        self.terms
            .keys()
            .all(|(a, b)| a.iter().sum::<u32>() == b.iter().sum::<u32>())
    }

    /// Every monomial is a product of `w_j = z_j z̄_j`.
    pub fn is_polynomial_in_w(&self) -> bool {
        self.terms.keys().all(|(a, b)| a == b)
    }

    /// Largest total degree `|a| + |b|`.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(a, b)| a.iter().sum::<u32>() + b.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Largest single-angle frequency `max_j |a_j − b_j|`.
    pub fn max_frequency(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)))
            .max()
            .unwrap_or(0)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    d: usize,
    allow_fiber: bool,
}

impl<'a> Parser<'a> {
    fn err<X>(&self, msg: impl Into<String>) -> Result<X> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                b'-' => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = i;
                Ok(Expr::Const(v))
            }
            _ => self.err(format!("malformed number '{text}'")),
        }
    }

    fn index(&self, text: &str, at: usize) -> Result<usize> {
        let i: usize = text.parse().map_err(|_| Error::Syntax {
            pos: at,
            msg: format!("malformed index '{text}'"),
        })?;
        if i > self.d {
            return Err(Error::Syntax {
                pos: at,
                msg: format!("index {i} exceeds d = {}", self.d),
            });
        }
        Ok(i)
    }

    fn pair(&self, text: &str, at: usize) -> Result<(usize, usize)> {
        if let Some((a, b)) = text.split_once('_') {
            return Ok((self.index(a, at)?, self.index(b, at)?));
        }
        if text.len() == 2 && text.bytes().all(|c| c.is_ascii_digit()) {
            return Ok((self.index(&text[..1], at)?, self.index(&text[1..], at)?));
        }
        Err(Error::Syntax {
            pos: at,
            msg: format!("malformed index pair '{text}' (use ij or i_j)"),
        })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
            i += 1;
        }
        let name = std::str::from_utf8(&s[start..i]).expect("ascii");
        let var = if let Some(rest) = name.strip_prefix('w') {
            Var::W(self.index(rest, start)?)
        } else if let Some((head, rest)) = name.split_once('_') {
            match head {
                "re" => {
                    let (a, b) = self.pair(rest, start)?;
                    Var::Re(a, b)
                }
                "im" => {
                    let (a, b) = self.pair(rest, start)?;
                    Var::Im(a, b)
                }
                "rh" => {
                    let (a, b) = self.pair(rest, start)?;
                    Var::HolRe(a, b)
                }
                "ih" => {
                    let (a, b) = self.pair(rest, start)?;
                    Var::HolIm(a, b)
                }
                "rz" => Var::LinRe(self.index(rest, start)?),
                "iz" => Var::LinIm(self.index(rest, start)?),
                _ => return self.err(format!("unknown identifier '{name}'")),
            }
        } else {
            return self.err(format!("unknown identifier '{name}'"));
        };
        if !self.allow_fiber && !var.fiber_invariant() {
            return Err(Error::NotInvariant(format!(
                "'{name}' at position {start} depends on the fiber angle"
            )));
        }
        self.pos = i;
        Ok(Expr::Var(var))
    }
}

fn parse(text: &str, d: usize, allow_fiber: bool) -> Result<Expr> {
    if d == 0 {
        return Err(Error::Precondition("d must be at least 1".into()));
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        d,
        allow_fiber,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses an expression that may depend on the fiber angle.
pub fn parse_fiber_expr(text: &str, d: usize) -> Result<Expr> {
    parse(text, d, true)
}

/// Number of sample points used for non-affine bounds.
pub const BOUND_SAMPLES: usize = 4096;

/// Lower and upper bounds of an expression on `X`: exact simplex-vertex
/// values when the expansion is affine in the `w_j`, sampled otherwise.
pub fn expression_bounds(expr: &Expr, d: usize) -> (f64, f64, bool) {
    let poly = expr.polynomial(d);
    let affine = poly.is_polynomial_in_w()
        && poly.terms.keys().all(|(a, _)| a.iter().sum::<u32>() <= 1);
    let vertex_values = (0..=d).map(|j| {
        let mut z = vec![Cx::new(0.0, 0.0); d + 1];
        z[j] = Cx::new(1.0, 0.0);
        expr.eval::<f64>(&z)
    });
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vertex_values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !affine {
        let mut rng = seeded_rng(0x5eed);
        for _ in 0..BOUND_SAMPLES {
            let x = random_point::<f64, _>(d, &mut rng);
            let v = expr.eval(x.coords());
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi, affine)
}

/// A positive, structure-circle-invariant reduced symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFunction {
    text: String,
    d: usize,
    expr: Expr,
    poly: Polynomial,
    min: f64,
    max: f64,
    exact_bounds: bool,
}

/// Parses a reduced symbol on `X = S^{2d+1}`.
pub fn parse_symbol(text: &str, d: usize) -> Result<SymbolFunction> {
    let expr = parse(text, d, false)?;
    let poly = expr.polynomial(d);
    debug_assert!(poly.is_fiber_invariant());
    let (min, max, exact_bounds) = expression_bounds(&expr, d);
    if !(min > 0.0) {
        return Err(Error::NonPositiveSymbol { min });
    }
    Ok(SymbolFunction {
        text: text.trim().to_string(),
        d,
        expr,
        poly,
        min,
        max,
        exact_bounds,
    })
}

impl SymbolFunction {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn eval<T: Real>(&self, z: &[Cx<T>]) -> T {
        self.expr.eval(z)
    }

    /// `(min, max)` over `X`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Whether the bounds are exact (affine in the `w_j`) or sampled.
    pub fn exact_bounds(&self) -> bool {
        self.exact_bounds
    }

    /// Whether the symbol depends on the torus phases (contains `re`/`im`).
    pub fn depends_on_phases(&self) -> bool {
        !self.poly.is_polynomial_in_w()
    }

    pub fn is_constant(&self) -> bool {
        self.poly.degree() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_symbol() {
        let f = parse_symbol("1", 1).unwrap();
        assert_eq!(f.bounds(), (1.0, 1.0));
        assert!(f.exact_bounds());
    }

    #[test]
    fn affine_bounds_are_simplex_endpoints() {
        let f = parse_symbol("1 + 0.5*w1", 1).unwrap();
        assert_eq!(f.bounds(), (1.0, 1.5));
        let g = parse_symbol("2 - w0 + 3*w2", 2).unwrap();
        assert_eq!(g.bounds(), (1.0, 5.0));
    }

    #[test]
    fn negative_symbols_are_rejected() {
        assert!(matches!(
            parse_symbol("w1 - 2", 1),
            Err(Error::NonPositiveSymbol { .. })
        ));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_symbol("1 + * w1", 1) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_symbol("w3", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_symbol("(1 + w0", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_symbol("1 w0", 1), Err(Error::Syntax { .. })));
    }

    #[test]
    fn fiber_dependent_identifiers_are_rejected_for_symbols() {
        assert!(matches!(parse_symbol("1 + rh_01", 1), Err(Error::NotInvariant(_))));
        assert!(parse_fiber_expr("1 + 0.25*rh_01", 1).is_ok());
    }

    #[test]
    fn evaluation_and_expansion_agree() {
        let mut rng = seeded_rng(9);
        for text in ["1 + 0.3*re_01 - 0.2*im_1_2 + w2*w0", "2 + rh_01 * iz_2 - (rz_0)"] {
            let e = parse_fiber_expr(text, 2).unwrap();
            let p = e.polynomial(2);
            for _ in 0..10 {
                let x = random_point::<f64, _>(2, &mut rng);
                let z = x.coords();
                let mut s = Cx::new(0.0, 0.0);
                for ((a, b), c) in &p.terms {
                    let mut m = *c;
                    for j in 0..3 {
                        m *= z[j].powu(a[j]) * z[j].conj().powu(b[j]);
                    }
                    s += m;
                }
                assert!((s.re - e.eval(z)).abs() < 1e-14);
                assert!(s.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn scientific_literals() {
        let f = parse_symbol("1.5e0 + 2E-1*w1", 1).unwrap();
        assert!((f.max() - 1.7).abs() < 1e-15);
    }
}
