//! Text input: field elements and cycle literals.
//!
//! Expressions use `+ - * / ^`, implicit multiplication, the field generator
//! (`i` over ℚ(i), `w` otherwise), the parameters `z`, `z1`, `z2`, and `inf`
//! as a whole coordinate. A cycle is a signed sum of `[k*](c₁; …; cₙ)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::cubical::{BoxPoint, Coordinate, CycleError, ExtValue, FactoredRational, FormalCycle, Generator, ParametricPrecycle};
use crate::field::{FieldElement, FieldError, FieldSpec};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, FieldError> {
    let cs: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < cs.len() {
        let (pos, c) = cs[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let mut digits = String::new();
            let mut frac = String::new();
            let mut seen_dot = false;
            while k < cs.len() && (cs[k].1.is_ascii_digit() || (cs[k].1 == '.' && !seen_dot)) {
                if cs[k].1 == '.' {
                    seen_dot = true;
                } else if seen_dot {
                    frac.push(cs[k].1);
                } else {
                    digits.push(cs[k].1);
                }
                k += 1;
            }
            if digits.is_empty() && frac.is_empty() {
                return Err(FieldError::Parse { pos, msg: "malformed number".into() });
            }
            let all: BigInt = format!("{digits}{frac}").parse().unwrap_or_default();
            let den = BigInt::from(10u32).pow(frac.len() as u32);
            out.push((pos, Tok::Num(BigRational::new(all, den))));
        } else if c.is_ascii_alphabetic() {
            let mut id = String::new();
            while k < cs.len() && cs[k].1.is_ascii_alphanumeric() {
                id.push(cs[k].1);
                k += 1;
            }
            out.push((pos, Tok::Ident(id)));
        } else if "+-*/^();,".contains(c) {
            out.push((pos, Tok::Op(c)));
            k += 1;
        } else {
            return Err(FieldError::Parse { pos, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

/// Exponent vector over (z, z1, z2).
type Mono = [u32; 3];
const VAR_NAMES: [&str; 3] = ["z", "z1", "z2"];

/// Polynomial in z, z1, z2 over the field.
#[derive(Clone, Debug, PartialEq)]
struct Poly {
    spec: FieldSpec,
    terms: BTreeMap<Mono, FieldElement>,
}

impl Poly {
    fn constant(spec: FieldSpec, c: FieldElement) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert([0; 3], c);
        }
        Poly { spec, terms }
    }

    fn var(spec: FieldSpec, k: usize) -> Self {
        let mut m = [0; 3];
        m[k] = 1;
        Poly { spec, terms: BTreeMap::from([(m, FieldElement::constant_in(spec, 1))]) }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn as_constant(&self) -> Option<FieldElement> {
        match self.terms.len() {
            0 => Some(FieldElement::constant_in(self.spec, 0)),
            1 => self.terms.get(&[0; 3]).cloned(),
            _ => None,
        }
    }

    fn vars_used(&self) -> [bool; 3] {
        let mut u = [false; 3];
        for m in self.terms.keys() {
            for k in 0..3 {
                u[k] |= m[k] > 0;
            }
        }
        u
    }

    fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            let v = match terms.get(m) {
                Some(x) => x + c,
                None => c.clone(),
            };
            if v.is_zero() {
                terms.remove(m);
            } else {
                terms.insert(*m, v);
            }
        }
        Poly { spec: self.spec, terms }
    }

    fn neg(&self) -> Self {
        Poly { spec: self.spec, terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut acc = Poly::constant(self.spec, FieldElement::constant_in(self.spec, 0));
        for (m1, c1) in &self.terms {
            let mut part = BTreeMap::new();
            for (m2, c2) in &o.terms {
                part.insert([m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]], c1 * c2);
            }
            acc = acc.add(&Poly { spec: self.spec, terms: part });
        }
        acc
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Poly::constant(self.spec, FieldElement::constant_in(self.spec, 1));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

#[derive(Clone, Debug)]
enum Val {
    Inf,
    Rat(Poly, Poly),
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    k: usize,
    spec: FieldSpec,
    end: usize,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, FieldError> {
    Err(FieldError::Parse { pos, msg: msg.into() })
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.k).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.k).map(|t| t.0).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.k += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FieldError> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.pos(), format!("expected '{c}'"))
        }
    }

    fn finite(&self, v: Val, pos: usize) -> Result<(Poly, Poly), FieldError> {
        match v {
            Val::Rat(n, d) => Ok((n, d)),
            Val::Inf => err(pos, "inf only stands alone as a coordinate"),
        }
    }

    fn expr(&mut self) -> Result<Val, FieldError> {
        let pos = self.pos();
        let first = self.term()?;
        if !matches!(self.peek(), Some(Tok::Op('+' | '-'))) {
            return Ok(first);
        }
        let (mut n, mut d) = self.finite(first, pos)?;
        loop {
            let neg = if self.eat('+') {
                false
            } else if self.eat('-') {
                true
            } else {
                break;
            };
            let p = self.pos();
            let t = self.term()?;
            let (n2, d2) = self.finite(t, p)?;
            let n2 = if neg { n2.neg() } else { n2 };
            if d == d2 {
                n = n.add(&n2);
            } else {
                n = n.mul(&d2).add(&n2.mul(&d));
                d = d.mul(&d2);
            }
        }
        Ok(Val::Rat(n, d))
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')))
    }

    fn term(&mut self) -> Result<Val, FieldError> {
        let pos = self.pos();
        let first = self.unary()?;
        if !(matches!(self.peek(), Some(Tok::Op('*' | '/'))) || self.starts_atom()) {
            return Ok(first);
        }
        let (mut n, mut d) = self.finite(first, pos)?;
        loop {
            let div = if self.eat('*') {
                false
            } else if self.eat('/') {
                true
            } else if self.starts_atom() {
                false
            } else {
                break;
            };
            let p = self.pos();
            let f = self.unary()?;
            let (n2, d2) = self.finite(f, p)?;
            if div {
                if n2.is_zero() {
                    return err(p, "division by zero");
                }
                n = n.mul(&d2);
                d = d.mul(&n2);
            } else {
                n = n.mul(&n2);
                d = d.mul(&d2);
            }
        }
        Ok(Val::Rat(n, d))
    }

    fn unary(&mut self) -> Result<Val, FieldError> {
        let pos = self.pos();
        if self.eat('-') {
            let v = self.unary()?;
            let (n, d) = self.finite(v, pos)?;
            return Ok(Val::Rat(n.neg(), d));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn exponent(&mut self) -> Result<i64, FieldError> {
        let pos = self.pos();
        let paren = self.eat('(');
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let e = match self.peek() {
            Some(Tok::Num(r)) if r.is_integer() => r.to_integer().to_i64(),
            _ => None,
        };
        let Some(e) = e.filter(|e| e.abs() <= 64) else {
            return err(pos, "exponent must be a small integer");
        };
        self.k += 1;
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -e } else { e })
    }

    fn power(&mut self) -> Result<Val, FieldError> {
        let pos = self.pos();
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let (n, d) = self.finite(base, pos)?;
        let e = self.exponent()?;
        if e >= 0 {
            Ok(Val::Rat(n.pow(e as u32), d.pow(e as u32)))
        } else {
            if n.is_zero() {
                return err(pos, "division by zero");
            }
            Ok(Val::Rat(d.pow((-e) as u32), n.pow((-e) as u32)))
        }
    }

    fn atom(&mut self) -> Result<Val, FieldError> {
        let pos = self.pos();
        let one = Poly::constant(self.spec, FieldElement::constant_in(self.spec, 1));
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.k += 1;
                let c = FieldElement::in_field(self.spec, r, BigRational::zero());
                Ok(Val::Rat(Poly::constant(self.spec, c), one))
            }
            Some(Tok::Ident(id)) => {
                self.k += 1;
                if id == self.spec.generator_symbol() {
                    let w = FieldElement::in_field(self.spec, BigRational::zero(), BigRational::one());
                    return Ok(Val::Rat(Poly::constant(self.spec, w), one));
                }
                if id == "inf" {
                    return Ok(Val::Inf);
                }
                match VAR_NAMES.iter().position(|v| *v == id) {
                    Some(k) => Ok(Val::Rat(Poly::var(self.spec, k), one)),
                    None => err(pos, format!("unknown symbol {id:?}")),
                }
            }
            Some(Tok::Op('(')) => {
                self.k += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            _ => err(pos, "expected a number, symbol or '('"),
        }
    }
}

/// Parses `a/b + c/d*i` style input (any expression without parameters).
pub fn parse_field_element(s: &str, spec: FieldSpec) -> Result<FieldElement, FieldError> {
    let toks = tokenize(s)?;
    let mut p = Parser { toks: &toks, k: 0, spec, end: s.len() };
    let v = p.expr()?;
    if p.k < toks.len() {
        return err(p.pos(), "trailing input");
    }
    let (n, d) = p.finite(v, 0)?;
    match (n.as_constant(), d.as_constant()) {
        (Some(a), Some(b)) => a.checked_div(&b).map_err(|_| FieldError::Parse { pos: 0, msg: "division by zero".into() }),
        _ => err(0, "a field element cannot contain parameters"),
    }
}

fn perr(e: FieldError) -> CycleError {
    CycleError::Parse(e.to_string())
}

/// Parses a cycle literal such as `4*(z; 1 - i/z; 1 - z) - (z; (z-i)^4/(z-1)^4; 1 - z)`.
pub fn parse_cycle(s: &str, spec: FieldSpec) -> Result<FormalCycle, CycleError> {
    let toks = tokenize(s).map_err(perr)?;
    let mut p = Parser { toks: &toks, k: 0, spec, end: s.len() };
    let mut acc: Option<FormalCycle> = None;
    let mut first = true;
    loop {
        if p.k >= toks.len() {
            if first {
                return Err(perr(FieldError::Parse { pos: p.pos(), msg: "empty cycle".into() }));
            }
            break;
        }
        let sign = if p.eat('+') {
            1
        } else if p.eat('-') {
            -1
        } else if first {
            1
        } else {
            return Err(perr(FieldError::Parse { pos: p.pos(), msg: "expected '+' or '-'".into() }));
        };
        first = false;
        let mut mult = 1i64;
        if let Some(Tok::Num(r)) = p.peek().cloned() {
            let pos = p.pos();
            p.k += 1;
            mult = r
                .is_integer()
                .then(|| r.to_integer().to_i64())
                .flatten()
                .ok_or_else(|| perr(FieldError::Parse { pos, msg: "multiplicity must be an integer".into() }))?;
            p.eat('*');
        }
        let gen = parse_generator(&mut p)?;
        if p.eat('*') {
            let pos = p.pos();
            match p.peek().cloned() {
                Some(Tok::Num(r)) if r.is_integer() => {
                    p.k += 1;
                    mult *= r.to_integer().to_i64().unwrap_or(0);
                }
                _ => return Err(perr(FieldError::Parse { pos, msg: "expected an integer multiplicity".into() })),
            }
        }
        let term = FormalCycle::from_generator(gen, sign * mult);
        acc = Some(match acc {
            None => term,
            Some(a) => a.try_add(&term)?,
        });
    }
    Ok(acc.unwrap())
}

/// Parses a single point `(a; b; …)` of □ⁿ.
pub fn parse_point(s: &str, spec: FieldSpec) -> Result<BoxPoint, CycleError> {
    let z = parse_cycle(s, spec)?;
    let mut terms = z.terms();
    match (terms.next(), terms.next()) {
        (Some((Generator::Point(p), 1)), None) => Ok(p.clone()),
        _ => Err(CycleError::Parse("expected a single point".into())),
    }
}

fn parse_generator(p: &mut Parser<'_>) -> Result<Generator, CycleError> {
    p.expect('(').map_err(perr)?;
    let mut raw = Vec::new();
    loop {
        let pos = p.pos();
        raw.push((pos, p.expr().map_err(perr)?));
        if p.eat(';') || p.eat(',') {
            continue;
        }
        p.expect(')').map_err(perr)?;
        break;
    }
    let mut used = [false; 3];
    for (_, v) in &raw {
        if let Val::Rat(n, d) = v {
            let (a, b) = (n.vars_used(), d.vars_used());
            for k in 0..3 {
                used[k] |= a[k] || b[k];
            }
        }
    }
    if used[0] && (used[1] || used[2]) {
        return Err(CycleError::Parse("mixing z with z1/z2".into()));
    }
    let vars: Vec<usize> = (0..3).filter(|k| used[*k]).collect();
    let arity = vars.len();
    let mut coords = Vec::with_capacity(raw.len());
    for (pos, v) in raw {
        coords.push(to_coordinate(v, &vars, p.spec).map_err(|e| match e {
            CycleError::Parse(m) => CycleError::Parse(format!("coordinate at position {pos}: {m}")),
            e => e,
        })?);
    }
    if arity == 0 {
        let pts = coords
            .into_iter()
            .map(|c| match c {
                Coordinate::Const(v) => v,
                Coordinate::Func(_) => unreachable!(),
            })
            .collect();
        return Ok(Generator::Point(BoxPoint::new(pts)?));
    }
    let g = ParametricPrecycle::new(arity, coords)?;
    Ok(Generator::Param(if arity == 1 { g.canonical() } else { g }))
}

fn to_coordinate(v: Val, vars: &[usize], spec: FieldSpec) -> Result<Coordinate, CycleError> {
    let (n, d) = match v {
        Val::Inf => return Ok(Coordinate::Const(ExtValue::Infinity)),
        Val::Rat(n, d) => (n, d),
    };
    if d.is_zero() {
        return Err(CycleError::Parse("division by zero".into()));
    }
    if n.is_zero() {
        return Ok(Coordinate::Const(ExtValue::Finite(FieldElement::constant_in(spec, 0))));
    }
    if let (Some(a), Some(b)) = (n.as_constant(), d.as_constant()) {
        return Ok(Coordinate::Const(ExtValue::Finite(&a / &b)));
    }
    let (cn, fn_) = factor_linear(&n, vars)?;
    let (cd, fd) = factor_linear(&d, vars)?;
    let mut raw = fn_;
    raw.extend(fd.into_iter().map(|(c, k, m)| (c, k, -m)));
    let f = FactoredRational::from_raw(vars.len(), &cn / &cd, raw);
    if f.is_constant() {
        Ok(Coordinate::Const(ExtValue::Finite(f.constant().clone())))
    } else {
        Ok(Coordinate::Func(f))
    }
}

type RawFactor = (Vec<FieldElement>, FieldElement, i64);

/// Dense univariate polynomial, index = degree.
type UPoly = Vec<FieldElement>;

fn trim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn horner(p: &[FieldElement], x: &FieldElement, spec: FieldSpec) -> FieldElement {
    p.iter().rev().fold(FieldElement::constant_in(spec, 0), |acc, c| &(&acc * x) + c)
}

/// Divides by (z − r); returns the quotient and remainder.
fn deflate(p: &[FieldElement], r: &FieldElement, spec: FieldSpec) -> (UPoly, FieldElement) {
    let n = p.len();
    if n == 0 {
        return (vec![], FieldElement::constant_in(spec, 0));
    }
    let mut q = vec![FieldElement::constant_in(spec, 0); n - 1];
    let mut carry = p[n - 1].clone();
    for k in (0..n - 1).rev() {
        q[k] = carry.clone();
        carry = &p[k] + &(&carry * r);
    }
    (q, carry)
}

fn derivative(p: &[FieldElement], spec: FieldSpec) -> UPoly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| &FieldElement::constant_in(spec, k as i64) * c)
        .collect()
}

fn poly_rem(a: &[FieldElement], b: &[FieldElement]) -> UPoly {
    let mut r = a.to_vec();
    let lb = b.last().unwrap();
    while r.len() >= b.len() && !r.is_empty() {
        let f = r.last().unwrap() / lb;
        let shift = r.len() - b.len();
        for (k, c) in b.iter().enumerate() {
            r[shift + k] = &r[shift + k] - &(&f * c);
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn poly_gcd(a: &[FieldElement], b: &[FieldElement]) -> UPoly {
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let r = poly_rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn poly_div_exact(a: &[FieldElement], b: &[FieldElement], spec: FieldSpec) -> UPoly {
    let mut r = a.to_vec();
    let lb = b.last().unwrap();
    let mut q = vec![FieldElement::constant_in(spec, 0); a.len() + 1 - b.len()];
    while r.len() >= b.len() && !r.is_empty() {
        let f = r.last().unwrap() / lb;
        let shift = r.len() - b.len();
        for (k, c) in b.iter().enumerate() {
            r[shift + k] = &r[shift + k] - &(&f * c);
        }
        q[shift] = f;
        r.pop();
        r = trim(r);
    }
    q
}

/// Best rational approximation with bounded denominator.
fn rationalize(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac.abs() < 1e-12 || ((h1 as f64) / (k1 as f64) - x).abs() < 1e-13 * x.abs().max(1.0) {
            break;
        }
        y = 1.0 / frac;
    }
    (k1 != 0).then(|| BigRational::new(BigInt::from(h1), BigInt::from(k1)))
}

/// Numerical roots of a squarefree polynomial (Durand–Kerner).
fn numeric_roots(p: &[FieldElement]) -> Vec<Complex64> {
    let emb = p[0].spec().embeddings()[0];
    let c: Vec<Complex64> = p.iter().map(|x| x.to_c64(emb)).collect();
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let bound = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |a, c| a * x + c);
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for k in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != k {
                    den *= z[k] - z[j];
                }
            }
            let step = eval(z[k]) / den;
            z[k] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    z
}

/// Roots with multiplicities and the leading coefficient, or an error when
/// some factor has no root in F.
fn split_univariate(p: &[FieldElement], spec: FieldSpec) -> Result<(FieldElement, Vec<(FieldElement, i64)>), CycleError> {
    let p = trim(p.to_vec());
    let lead = p.last().cloned().expect("nonzero polynomial");
    let mut rest = p.clone();
    let mut roots: Vec<(FieldElement, i64)> = Vec::new();
    let zero = FieldElement::constant_in(spec, 0);
    while rest.len() > 1 && rest[0].is_zero() {
        rest.remove(0);
        match roots.last_mut() {
            Some((r, m)) if r.is_zero() => *m += 1,
            _ => roots.push((zero.clone(), 1)),
        }
    }
    if rest.len() <= 1 {
        return Ok((lead, roots));
    }
    let g = poly_gcd(&rest, &derivative(&rest, spec));
    let sqf = if g.len() > 1 { poly_div_exact(&rest, &g, spec) } else { rest.clone() };
    let candidates: Vec<FieldElement> = if sqf.len() == 2 {
        vec![-&(&sqf[0] / &sqf[1])]
    } else {
        let sd = (spec.d as f64).sqrt();
        numeric_roots(&sqf)
            .into_iter()
            .filter_map(|r| {
                let a = rationalize(r.re, 10_000_000)?;
                let b = rationalize(r.im / sd, 10_000_000)?;
                Some(FieldElement::in_field(spec, a, b))
            })
            .collect()
    };
    for r in candidates {
        let mut m = 0;
        loop {
            let (q, rem) = deflate(&rest, &r, spec);
            if !rem.is_zero() || rest.len() <= 1 {
                break;
            }
            rest = q;
            m += 1;
        }
        if m > 0 {
            roots.push((r, m));
        }
    }
    if rest.len() > 1 {
        return Err(CycleError::Parse("polynomial does not split into linear factors over the field".into()));
    }
    Ok((lead, roots))
}

/// Dense bivariate polynomial `c[e1][e2]`.
type BPoly = Vec<UPoly>;

fn upoly_sub(a: &[FieldElement], b: &[FieldElement], spec: FieldSpec) -> UPoly {
    let n = a.len().max(b.len());
    let zero = FieldElement::constant_in(spec, 0);
    trim((0..n).map(|k| &a.get(k).cloned().unwrap_or(zero.clone()) - b.get(k).unwrap_or(&zero)).collect())
}

fn upoly_mul(a: &[FieldElement], b: &[FieldElement], spec: FieldSpec) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![FieldElement::constant_in(spec, 0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] = &r[i + j] + &(x * y);
        }
    }
    trim(r)
}

/// Divides by z1 − (a + b·z2) if that is exact.
fn divide_by_line(p: &BPoly, a: &FieldElement, b: &FieldElement, spec: FieldSpec) -> Option<BPoly> {
    let n = p.len();
    let lin = trim(vec![a.clone(), b.clone()]);
    let mut q: BPoly = vec![vec![]; n - 1];
    let mut carry = p[n - 1].clone();
    for k in (0..n - 1).rev() {
        q[k] = carry.clone();
        carry = upoly_sub(&p[k], &upoly_mul(&carry, &lin, spec).iter().map(|c| -c).collect::<Vec<_>>(), spec);
    }
    carry.is_empty().then_some(q)
}

fn eval_z2(p: &BPoly, t: &FieldElement, spec: FieldSpec) -> UPoly {
    trim(p.iter().map(|c| horner(c, t, spec)).collect())
}

fn factor_bivariate(p: BPoly, spec: FieldSpec) -> Result<(FieldElement, Vec<RawFactor>), CycleError> {
    let zero = FieldElement::constant_in(spec, 0);
    let one = FieldElement::constant_in(spec, 1);
    let mut out = Vec::new();
    let mut p: BPoly = p.into_iter().map(trim).collect();
    while p.last().is_some_and(|c| c.is_empty()) {
        p.pop();
    }
    // factors free of z1 divide the leading coefficient in z1
    let (_, lc_roots) = split_univariate(p.last().unwrap(), spec)?;
    for (r, _) in lc_roots {
        loop {
            let divided: Option<BPoly> = p
                .iter()
                .map(|c| {
                    if c.is_empty() {
                        return Some(vec![]);
                    }
                    let (q, rem) = deflate(c, &r, spec);
                    rem.is_zero().then_some(q)
                })
                .collect();
            match divided {
                Some(q) => {
                    p = q;
                    out.push((vec![zero.clone(), one.clone()], -&r, 1));
                }
                None => break,
            }
        }
    }
    while p.len() > 1 {
        let (_, r0) = split_univariate(&eval_z2(&p, &zero, spec), spec)?;
        let (_, r1) = split_univariate(&eval_z2(&p, &one, spec), spec)?;
        let mut found = None;
        'search: for (a, _) in &r0 {
            for (s, _) in &r1 {
                let b = s - a;
                if let Some(q) = divide_by_line(&p, a, &b, spec) {
                    found = Some((a.clone(), b, q));
                    break 'search;
                }
            }
        }
        let Some((a, b, q)) = found else {
            return Err(CycleError::Parse("polynomial does not split into linear factors over the field".into()));
        };
        out.push((vec![one.clone(), -&b], -&a, 1));
        p = q;
    }
    let rest = &p[0];
    if rest.len() != 1 {
        return Err(CycleError::Parse("polynomial does not split into linear factors over the field".into()));
    }
    Ok((rest[0].clone(), out))
}

/// Factors a polynomial in the used variables into linear forms.
fn factor_linear(p: &Poly, vars: &[usize]) -> Result<(FieldElement, Vec<RawFactor>), CycleError> {
    let spec = p.spec;
    let zero = FieldElement::constant_in(spec, 0);
    let one = FieldElement::constant_in(spec, 1);
    if let Some(c) = p.as_constant() {
        return Ok((c, vec![]));
    }
    match vars.len() {
        1 => {
            let v = vars[0];
            let deg = p.terms.keys().map(|m| m[v]).max().unwrap_or(0) as usize;
            let mut u = vec![zero.clone(); deg + 1];
            for (m, c) in &p.terms {
                u[m[v] as usize] = c.clone();
            }
            let (lead, roots) = split_univariate(&u, spec)?;
            Ok((lead, roots.into_iter().map(|(r, m)| (vec![one.clone()], -&r, m)).collect()))
        }
        2 => {
            let (v1, v2) = (vars[0], vars[1]);
            let d1 = p.terms.keys().map(|m| m[v1]).max().unwrap_or(0) as usize;
            let d2 = p.terms.keys().map(|m| m[v2]).max().unwrap_or(0) as usize;
            let mut b: BPoly = vec![vec![zero.clone(); d2 + 1]; d1 + 1];
            for (m, c) in &p.terms {
                b[m[v1] as usize][m[v2] as usize] = c.clone();
            }
            factor_bivariate(b, spec)
        }
        _ => Err(CycleError::Unsupported("more than two parameters".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::standard;

    fn fe(s: &str) -> FieldElement {
        parse_field_element(s, FieldSpec::GAUSSIAN).unwrap()
    }

    #[test]
    fn field_elements() {
        assert_eq!(fe("1/2 + 3/4*i"), FieldElement::from_fracs(1, 2, 3, 4));
        assert_eq!(fe("2i"), FieldElement::from_ints(0, 2));
        assert_eq!(fe("(1+i)^-1"), FieldElement::from_fracs(1, 2, -1, 2));
        assert_eq!(fe("(1+i)^(-2)"), FieldElement::from_fracs(0, 1, -1, 2));
        assert_eq!(fe("-i - 1"), FieldElement::from_ints(-1, -1));
        assert_eq!(fe("0.25"), FieldElement::from_fracs(1, 4, 0, 1));
        assert!(matches!(parse_field_element("1/0", FieldSpec::GAUSSIAN), Err(FieldError::Parse { .. })));
        assert!(matches!(parse_field_element("1 +", FieldSpec::GAUSSIAN), Err(FieldError::Parse { pos: 3, .. })));
        assert!(parse_field_element("z", FieldSpec::GAUSSIAN).is_err());
        assert!(parse_field_element("i", FieldSpec::new(5)).is_err());
        let w = parse_field_element("1 + 2*w", FieldSpec::new(5)).unwrap();
        assert_eq!((&w * &w).to_string(), "-19 + 4*w");
    }

    #[test]
    fn totaro_literal() {
        let c = parse_cycle("(z; 1 - (2+3i)/z; 1 - z)", FieldSpec::GAUSSIAN).unwrap();
        assert_eq!(c, FormalCycle::param(standard::totaro(&fe("2+3i"))));
    }

    #[test]
    fn reparametrized_literal_is_equal() {
        // w = 1/z gives the same curve
        let a = parse_cycle("(1/z; 1 - i*z; 1 - 1/z)", FieldSpec::GAUSSIAN).unwrap();
        assert_eq!(a, FormalCycle::param(standard::totaro(&fe("i"))));
    }

    #[test]
    fn z_cycle_literal() {
        let c = parse_cycle("4*(z; 1 - i/z; 1 - z) - (z; (z-i)^4/(z-1)^4; 1 - z)", FieldSpec::GAUSSIAN).unwrap();
        assert_eq!(c, standard::z_cycle(&fe("i")));
        let expanded = parse_cycle(
            "4(z; 1 - i/z; 1 - z) - (z; (z^2 - 2i z - 1)^2/(z^2-2z+1)^2; 1 - z)",
            FieldSpec::GAUSSIAN,
        )
        .unwrap();
        assert_eq!(expanded, c);
    }

    #[test]
    fn surfaces() {
        let a = fe("2+3i");
        let s = parse_cycle("(z2; 1 - (2+3i)/z2; z1; 1 - z2/z1; 1 - z1)", FieldSpec::GAUSSIAN).unwrap();
        assert_eq!(s, FormalCycle::param(standard::c_prime(&a)));
        let x = parse_cycle("(z2; 1 - (2+3i)/z2; z1; (z1-2-3i)^4/(z1-1)^4; 1 - z2)", FieldSpec::GAUSSIAN).unwrap();
        assert_eq!(x, FormalCycle::param(standard::xi(&a)));
        let q = parse_cycle("(z1; z1^2 - z2^2; z2; 1 - z1)", FieldSpec::GAUSSIAN).unwrap();
        let Generator::Param(g) = q.terms().next().unwrap().0 else { panic!() };
        let Coordinate::Func(f) = &g.coords()[1] else { panic!() };
        assert_eq!(f.factors().len(), 2);
    }

    #[test]
    fn points_and_errors() {
        let p = parse_point("(2; inf; -i)", FieldSpec::GAUSSIAN).unwrap();
        assert_eq!(p.coords()[1], ExtValue::Infinity);
        assert!(matches!(parse_cycle("(1; 2)", FieldSpec::GAUSSIAN), Err(CycleError::CoordinateOne)));
        assert!(parse_cycle("(z; z^2 + 2)", FieldSpec::GAUSSIAN).is_err());
        assert!(parse_cycle("(z; z^2 + 1)", FieldSpec::GAUSSIAN).is_ok());
        assert!(parse_cycle("(z; z1)", FieldSpec::GAUSSIAN).is_err());
        assert!(parse_cycle("(z; 2) (z; 3)", FieldSpec::GAUSSIAN).is_err());
        assert!(parse_cycle("", FieldSpec::GAUSSIAN).is_err());
    }

    #[test]
    fn display_roundtrip() {
        for s in [
            "4*(z; 1 - i/z; 1 - z) - (z; (z-i)^4/(z-1)^4; 1 - z)",
            "(z2; 1 - (2+3i)/z2; z1; 1 - z2/z1; 1 - z1)",
            "(1/2 - i; inf) + 3*(2; 5)",
            "3*(z; (z - 1/3)^2/(z+i))",
        ] {
            let c = parse_cycle(s, FieldSpec::GAUSSIAN).unwrap();
            let again = parse_cycle(&c.to_string(), FieldSpec::GAUSSIAN).unwrap();
            assert_eq!(again, c, "{c}");
        }
    }
}
