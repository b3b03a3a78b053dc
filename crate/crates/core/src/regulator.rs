//! The regulator 𝒫: cubical cycles over Spec F → Thom–Whitney Deligne
//! classes, by closed forms where a generator is recognized and by adaptive
//! cubature of the restricted Wang forms otherwise.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::cubical::{
    standard, Coordinate, CycleError, ExtValue, FormalCycle, Generator, ParametricPrecycle,
};
use crate::deligne::{class_of, DeligneClass, DeligneError, EpsPoly, TWElement};
use crate::field::{FieldElement, FieldSpec};
use crate::mp::{self, BigComplex, RM};
use crate::polylog::{bloch_wigner, trilog_sv, PolylogError, PrecisionPolicy};
use crate::quadrature::{integrate, QuadParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegulatorError {
    #[error("unsupported generator: {0}")]
    Unsupported(String),
    #[error("quadrature did not reach tolerance {tol:e} (estimate {achieved:e}); the configuration may not be integrable")]
    NonIntegrable { achieved: f64, tol: f64 },
    #[error("divisors of the two coordinates meet at {0}")]
    Collision(String),
    #[error(transparent)]
    Polylog(#[from] PolylogError),
    #[error(transparent)]
    Deligne(#[from] DeligneError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
}

/// A 1-form or dε appearing in a Wang form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Form {
    Deps,
    Dlog(usize),
    DlogBar(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WangTerm {
    pub coef: EpsPoly<BigRational>,
    /// Indices a of the factors log|t_a|².
    pub logs: Vec<usize>,
    pub forms: Vec<Form>,
}

/// A sum of terms c(ε)·∏ log|t_a|²·(wedge of forms), kept in a normal form:
/// forms sorted (with the permutation sign), repeats dropped, like terms merged.
#[derive(Clone, Debug, PartialEq)]
pub struct WangForm {
    pub terms: Vec<WangTerm>,
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn eps_plus(k: i64) -> EpsPoly<BigRational> {
    EpsPoly::new(vec![BigRational::from_integer(k.into()), BigRational::one()])
}

impl WangForm {
    pub fn from_terms(terms: Vec<WangTerm>) -> Self {
        let mut map: BTreeMap<(Vec<usize>, Vec<Form>), EpsPoly<BigRational>> = BTreeMap::new();
        for mut t in terms {
            let mut sign = 1i64;
            let f = &mut t.forms;
            for i in 0..f.len() {
                for j in 0..f.len() - 1 - i {
                    if f[j] > f[j + 1] {
                        f.swap(j, j + 1);
                        sign = -sign;
                    }
                }
            }
            if f.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            t.logs.sort();
            let coef = t.coef.scale(&BigRational::from_integer(sign.into()));
            let e = map.entry((t.logs, t.forms)).or_insert_with(EpsPoly::zero);
            *e = &*e + &coef;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((logs, forms), coef)| WangTerm { coef, logs, forms })
            .collect();
        WangForm { terms }
    }

    /// λ_a = −½[(ε+1)·dlog t_a + (ε−1)·dlog t̄_a + log|t_a|²·dε].
    pub fn lambda(a: usize) -> Self {
        let h = -half();
        WangForm::from_terms(vec![
            WangTerm { coef: eps_plus(1).scale(&h), logs: vec![], forms: vec![Form::Dlog(a)] },
            WangTerm { coef: eps_plus(-1).scale(&h), logs: vec![], forms: vec![Form::DlogBar(a)] },
            WangTerm { coef: EpsPoly::constant(h), logs: vec![a], forms: vec![Form::Deps] },
        ])
    }

    pub fn wedge(&self, o: &Self) -> Self {
        let mut out = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                out.push(WangTerm {
                    coef: &a.coef * &b.coef,
                    logs: a.logs.iter().chain(&b.logs).cloned().collect(),
                    forms: a.forms.iter().chain(&b.forms).cloned().collect(),
                });
            }
        }
        WangForm::from_terms(out)
    }

    /// W_n = λ_0 ∧ … ∧ λ_{n−1}.
    pub fn wang(n: usize) -> Self {
        let mut w = WangForm::lambda(0);
        for a in 1..n {
            w = w.wedge(&WangForm::lambda(a));
        }
        w
    }

    /// Terms containing dε (written with dε in front).
    pub fn deps_part(&self) -> Self {
        WangForm { terms: self.terms.iter().filter(|t| t.forms.first() == Some(&Form::Deps)).cloned().collect() }
    }

    /// Terms free of dε.
    pub fn free_part(&self) -> Self {
        WangForm { terms: self.terms.iter().filter(|t| t.forms.first() != Some(&Form::Deps)).cloned().collect() }
    }

    /// The dε-part of W_n by the product rule:
    /// Σ_j (−1)^j (−½ log|t_j|²) dε ∧ ⋀_{k≠j} (−½)((ε+1) dlog t_k + (ε−1) dlog t̄_k).
    pub fn deps_part_product_rule(n: usize) -> Self {
        let h = -half();
        let mut total = Vec::new();
        for j in 0..n {
            let sign = if j % 2 == 0 { h.clone() } else { -h.clone() };
            let mut acc = WangForm::from_terms(vec![WangTerm {
                coef: EpsPoly::constant(sign),
                logs: vec![j],
                forms: vec![Form::Deps],
            }]);
            for k in (0..n).filter(|k| *k != j) {
                let one_form = WangForm::from_terms(vec![
                    WangTerm { coef: eps_plus(1).scale(&h), logs: vec![], forms: vec![Form::Dlog(k)] },
                    WangTerm { coef: eps_plus(-1).scale(&h), logs: vec![], forms: vec![Form::DlogBar(k)] },
                ]);
                acc = acc.wedge(&one_form);
            }
            total.extend(acc.terms);
        }
        WangForm::from_terms(total)
    }
}

impl fmt::Display for WangForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let c: Vec<String> = t.coef.coeffs().iter().map(|x| x.to_string()).collect();
                let l: Vec<String> = t.logs.iter().map(|a| format!("L{a}")).collect();
                let w: Vec<String> = t
                    .forms
                    .iter()
                    .map(|x| match x {
                        Form::Deps => "de".to_string(),
                        Form::Dlog(a) => format!("dlog{a}"),
                        Form::DlogBar(a) => format!("dlogbar{a}"),
                    })
                    .collect();
                format!("[{}]{}{}", c.join(","), l.join(""), w.join("^"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Where a regulator value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Numeric,
    ExactZero,
}

impl Provenance {
    fn join(self, o: Provenance) -> Provenance {
        use Provenance::*;
        match (self, o) {
            (Numeric, _) | (_, Numeric) => Numeric,
            (ClosedForm, _) | (_, ClosedForm) => ClosedForm,
            _ => ExactZero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegulatorValue {
    pub class: DeligneClass,
    pub provenance: Provenance,
    pub notes: Vec<String>,
}

impl RegulatorValue {
    fn zero(twist: usize, note: impl Into<String>) -> Self {
        RegulatorValue { class: DeligneClass::zero(twist, 2), provenance: Provenance::ExactZero, notes: vec![note.into()] }
    }

    fn add_scaled(&mut self, o: &RegulatorValue, m: i64) -> Result<(), RegulatorError> {
        self.class = self.class.add(&o.class.scale(m as f64))?;
        self.provenance = self.provenance.join(o.provenance);
        self.notes.extend(o.notes.iter().cloned());
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegulatorOptions {
    pub quad: QuadParams,
    pub policy: PrecisionPolicy,
    /// Use closed forms for recognized generators.
    pub closed_forms: bool,
}

impl Default for RegulatorOptions {
    fn default() -> Self {
        RegulatorOptions { quad: QuadParams::default(), policy: PrecisionPolicy::with_bits(128), closed_forms: true }
    }
}

fn log_abs(x: &FieldElement) -> f64 {
    let p = 128;
    let n = mp::from_rational(&x.norm(), p);
    let l = mp::with_consts(|cc| n.ln(p, RM, cc));
    0.5 * mp::to_f64(&l)
}

fn rounding(v: f64, policy: &PrecisionPolicy) -> f64 {
    v.abs() * f64::EPSILON + policy.claimed_error()
}

/// 𝒫 of a 0-cycle in □¹: per embedding −Σ m·log|σ(x)| in ℝ(0).
pub fn regulator_points(z: &FormalCycle) -> Result<RegulatorValue, RegulatorError> {
    if z.dim() != 1 || z.codim() != 1 {
        return Err(RegulatorError::Unsupported("expected a 0-cycle in □¹".into()));
    }
    let mut s = 0.0;
    for (g, m) in z.terms() {
        let Generator::Point(p) = g else { unreachable!("codim equals dim") };
        match &p.coords()[0] {
            ExtValue::Finite(x) if !x.is_zero() => s -= m as f64 * log_abs(x),
            _ => return Err(RegulatorError::Unsupported("point at 0 or ∞".into())),
        }
    }
    let class = DeligneClass::from_first(1, &[(s, s.abs() * 4.0 * f64::EPSILON)]);
    Ok(RegulatorValue { class, provenance: Provenance::ClosedForm, notes: vec![] })
}

/// Closed form for the Totaro curve: scalar −𝓛₂(σα)/(2π) in ℝ(1).
pub fn regulator_totaro(alpha: &FieldElement, policy: &PrecisionPolicy) -> Result<RegulatorValue, RegulatorError> {
    let p = policy.bits + policy.guard_bits;
    let z = &alpha.embed(p)[0];
    let d = mp::to_f64(&bloch_wigner(z, policy));
    let s = -d / (2.0 * PI);
    let class = DeligneClass::from_first(2, &[(s, rounding(s, policy))]);
    Ok(RegulatorValue { class, provenance: Provenance::ClosedForm, notes: vec![format!("totaro({alpha})")] })
}

/// Closed form for k·(C′_a − C″_a): scalar −k·𝓛₃(σa)/(2π²) in ℝ(2).
pub fn regulator_goncharov_weight3(
    a: &FieldElement,
    k: i64,
    policy: &PrecisionPolicy,
) -> Result<RegulatorValue, RegulatorError> {
    let p = policy.bits + policy.guard_bits;
    let z: &BigComplex = &a.embed(p)[0];
    let l3 = mp::to_f64(&trilog_sv(z, policy));
    let s = -(k as f64) * l3 / (2.0 * PI * PI);
    let class = DeligneClass::from_first(3, &[(s, rounding(s, policy))]);
    Ok(RegulatorValue { class, provenance: Provenance::ClosedForm, notes: vec![format!("weight3({a}) x {k}")] })
}

/// Per-chart data of a univariate coordinate c·∏(z − a)^m.
#[derive(Clone, Debug)]
struct ChartCoord {
    log_c: f64,
    deg: f64,
    roots: Vec<(Complex64, f64)>,
}

impl ChartCoord {
    fn new(c: &Coordinate, spec: FieldSpec) -> Result<Self, RegulatorError> {
        let emb = spec.embeddings()[0];
        match c {
            Coordinate::Const(ExtValue::Finite(x)) if !x.is_zero() => {
                Ok(ChartCoord { log_c: 2.0 * log_abs(x), deg: 0.0, roots: vec![] })
            }
            Coordinate::Const(_) => Err(RegulatorError::Unsupported("coordinate identically 0 or ∞".into())),
            Coordinate::Func(f) => Ok(ChartCoord {
                log_c: 2.0 * log_abs(f.constant()),
                deg: f.degree() as f64,
                roots: f.roots().iter().map(|(a, m)| (a.to_c64(emb), *m as f64)).collect(),
            }),
        }
    }

    /// (log|t|², dlog t/du) in the chart u = z (`inv` false) or u = 1/z.
    #[inline]
    fn eval(&self, u: Complex64, inv: bool) -> (f64, Complex64) {
        let mut l = self.log_c;
        let mut g = Complex64::zero();
        if inv {
            l -= self.deg * u.norm_sqr().ln();
            g -= self.deg / u;
            for (a, m) in &self.roots {
                let d = Complex64::new(1.0, 0.0) - a * u;
                l += m * d.norm_sqr().ln();
                g -= m * a / d;
            }
        } else {
            for (a, m) in &self.roots {
                let d = u - a;
                l += m * d.norm_sqr().ln();
                g += m / d;
            }
        }
        (l, g)
    }
}

/// A restricted 2-form term: c(ε)·∏L·G_a·G_b·(dz∧dz̄ factor), as a
/// coefficient of dx∧dy.
#[derive(Clone, Debug)]
struct Compiled {
    eps: Vec<f64>,
    logs: Vec<usize>,
    a: (usize, bool),
    b: (usize, bool),
    unit: Complex64,
}

fn compile(w: &WangForm, skip_deps: bool) -> Vec<Compiled> {
    let mut out = Vec::new();
    for t in &w.terms {
        let forms: &[Form] = if skip_deps { &t.forms[1..] } else { &t.forms };
        if forms.len() != 2 {
            continue;
        }
        let key = |f: &Form| match f {
            Form::Dlog(a) => (*a, false),
            Form::DlogBar(a) => (*a, true),
            Form::Deps => unreachable!(),
        };
        let (a, b) = (key(&forms[0]), key(&forms[1]));
        // dz∧dz̄ = −2i dx∧dy
        let unit = match (a.1, b.1) {
            (false, true) => Complex64::new(0.0, -2.0),
            (true, false) => Complex64::new(0.0, 2.0),
            _ => continue,
        };
        let eps = t.coef.coeffs().iter().map(|c| c.to_f64().unwrap()).collect();
        out.push(Compiled { eps, logs: t.logs.clone(), a, b, unit });
    }
    out
}

const K: usize = 8;

struct Integrand {
    coords: Vec<ChartCoord>,
    terms: Vec<Compiled>,
    /// Also accumulate ḡ_x g_y for coordinates (0, 1).
    residue: bool,
}

impl Integrand {
    #[inline]
    fn at(&self, u: Complex64, inv: bool) -> [f64; K] {
        let mut ls = [0.0f64; 8];
        let mut gs = [Complex64::zero(); 8];
        for (k, c) in self.coords.iter().enumerate() {
            let (l, g) = c.eval(u, inv);
            ls[k] = l;
            gs[k] = g;
        }
        let mut out = [0.0; K];
        for t in &self.terms {
            let ga = if t.a.1 { gs[t.a.0].conj() } else { gs[t.a.0] };
            let gb = if t.b.1 { gs[t.b.0].conj() } else { gs[t.b.0] };
            let mut v = ga * gb * t.unit;
            for l in &t.logs {
                v *= ls[*l];
            }
            for (k, c) in t.eps.iter().enumerate() {
                out[2 * k] += c * v.re;
                out[2 * k + 1] += c * v.im;
            }
        }
        if self.residue {
            let v = gs[0].conj() * gs[1];
            out[6] = v.re;
            out[7] = v.im;
        }
        out
    }

    fn singular_points(&self, inv: bool) -> Vec<Complex64> {
        let mut s = vec![Complex64::zero()];
        for c in &self.coords {
            for (a, _) in &c.roots {
                if inv {
                    if a.norm() >= 1.0 - 1e-12 {
                        s.push(1.0 / a);
                    }
                } else if a.norm() <= 1.0 + 1e-12 {
                    s.push(*a);
                }
            }
        }
        s
    }

    /// ∫_{ℙ¹} of the integrand over dx∧dy, as two unit-disc charts in polar form.
    fn integrate(&self, q: &QuadParams) -> Result<([f64; K], [f64; K]), RegulatorError> {
        let half_tol = QuadParams { tol: q.tol / 2.0, ..*q };
        let run = |inv: bool| {
            let sing = self.singular_points(inv);
            let mut rb = vec![0.0, 1.0];
            let mut tb = vec![-PI, -PI / 2.0, 0.0, PI / 2.0, PI];
            for s in &sing {
                let r = s.norm();
                if r > 0.0 {
                    if r < 1.0 {
                        rb.push(r);
                    }
                    tb.push(s.arg());
                }
            }
            let f = |r: f64, t: f64| {
                let u = Complex64::from_polar(r, t);
                let mut v = self.at(u, inv);
                for x in v.iter_mut() {
                    *x *= r;
                }
                v
            };
            integrate(&f, &rb, &tb, &half_tol)
        };
        let (a, b) = rayon::join(|| run(false), || run(true));
        if !a.converged || !b.converged {
            let achieved =
                a.error.iter().chain(&b.error).cloned().fold(0.0, f64::max);
            return Err(RegulatorError::NonIntegrable { achieved, tol: q.tol });
        }
        let mut v = [0.0; K];
        let mut e = [0.0; K];
        for k in 0..K {
            v[k] = a.value[k] + b.value[k];
            e[k] = a.error[k] + b.error[k];
        }
        Ok((v, e))
    }
}

fn eps_poly(v: &[f64; K], scale: Complex64) -> EpsPoly<Complex64> {
    EpsPoly::new((0..3).map(|k| Complex64::new(v[2 * k], v[2 * k + 1]) * scale).collect())
}

fn univariate_coords(c: &ParametricPrecycle) -> Result<Vec<ChartCoord>, RegulatorError> {
    if c.arity() != 1 {
        return Err(RegulatorError::Unsupported("expected a curve".into()));
    }
    c.coords().iter().map(|x| ChartCoord::new(x, c.spec())).collect()
}

/// 𝒫 of an irreducible curve in □ⁿ by cubature of the dε-part of W_n:
/// h(ε) = (2πi)⁻¹ ∫_C (coefficient of dε), then the class in ℝ(n−2).
pub fn regulator_curve_numeric(c: &ParametricPrecycle, q: &QuadParams) -> Result<RegulatorValue, RegulatorError> {
    let n = c.dim();
    let p = n - 1;
    if c.is_degenerate() {
        return Ok(RegulatorValue::zero(p, format!("degenerate {c}")));
    }
    if !(2..=4).contains(&n) {
        return Err(RegulatorError::Unsupported(format!("curves in □^{n}")));
    }
    let coords = univariate_coords(c)?;
    let terms = compile(&WangForm::wang(n).deps_part(), true);
    let ig = Integrand { coords, terms, residue: false };
    let (v, e) = ig.integrate(q)?;
    let scale = Complex64::new(0.0, -1.0 / (2.0 * PI));
    let h = eps_poly(&v, scale);
    let x = TWElement::new(p, 1, vec![h.clone(), h.conj()]);
    let unit = (2.0 * PI).powi(p as i32 - 1);
    let err: f64 = (0..3).map(|k| (e[2 * k] + e[2 * k + 1]) / (k as f64 + 1.0)).sum::<f64>() / (2.0 * PI) / unit;
    let mut class = class_of(&x, p, &[])?;
    let s = class.values[0];
    class = DeligneClass::from_first(p, &[(s, err + 1e-12 * s.abs())]);
    Ok(RegulatorValue { class, provenance: Provenance::Numeric, notes: vec![format!("numeric {c}")] })
}

/// Outcome of the vanishing check for a curve in □².
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VanishingReport {
    /// max_k |coefficient of ε^k| of the restricted W₂ after (2πi)⁻¹.
    pub total: f64,
    /// |(1/π)∫ ḡ_x g_y dA + Σ_P ord_P(y)·log|x(P)|²|.
    pub residue_defect: f64,
    pub error: f64,
}

/// Checks that W₂ restricted to (x(t), y(t)) integrates to zero, and the
/// residue identity behind it. Divisors of x and y must be disjoint.
pub fn wang_vanishing_check(c: &ParametricPrecycle, q: &QuadParams) -> Result<VanishingReport, RegulatorError> {
    if c.arity() != 1 || c.dim() != 2 {
        return Err(RegulatorError::Unsupported("expected a curve in □²".into()));
    }
    let spec = c.spec();
    let emb = spec.embeddings()[0];
    let [x, y] = [&c.coords()[0], &c.coords()[1]];
    let eval = |co: &Coordinate, t: &ExtValue| match co {
        Coordinate::Const(v) => v.clone(),
        Coordinate::Func(f) => f.eval(t),
    };
    let mut residue_sum = 0.0;
    let divisor = |co: &Coordinate| -> Vec<(ExtValue, i64)> {
        match co {
            Coordinate::Const(_) => vec![],
            Coordinate::Func(f) => {
                let mut d: Vec<(ExtValue, i64)> =
                    f.roots().into_iter().map(|(a, m)| (ExtValue::Finite(a), m)).collect();
                if f.degree() != 0 {
                    d.push((ExtValue::Infinity, -f.degree()));
                }
                d
            }
        }
    };
    for (pt, m) in divisor(y) {
        match eval(x, &pt) {
            ExtValue::Finite(v) if !v.is_zero() => residue_sum += m as f64 * v.to_c64(emb).norm_sqr().ln(),
            _ => return Err(RegulatorError::Collision(pt.to_string())),
        }
    }
    for (pt, _) in divisor(x) {
        if !matches!(eval(y, &pt), ExtValue::Finite(v) if !v.is_zero()) {
            return Err(RegulatorError::Collision(pt.to_string()));
        }
    }
    let coords = univariate_coords(c)?;
    let terms = compile(&WangForm::wang(2).free_part(), false);
    let ig = Integrand { coords, terms, residue: true };
    let (v, e) = ig.integrate(q)?;
    let total = (0..3).map(|k| Complex64::new(v[2 * k], v[2 * k + 1]).norm()).fold(0.0, f64::max) / (2.0 * PI);
    let res = Complex64::new(v[6] / PI + residue_sum, v[7] / PI).norm();
    let error = e.iter().cloned().fold(0.0, f64::max) / PI;
    Ok(VanishingReport { total, residue_defect: res, error })
}

/// Totaro parameter α when `c` is (z, 1 − α/z, 1 − z) up to reparametrization.
pub fn recognize_totaro(c: &ParametricPrecycle) -> Option<FieldElement> {
    if c.arity() != 1 || c.dim() != 3 {
        return None;
    }
    let Coordinate::Func(f) = &c.coords()[1] else { return None };
    let canon = c.clone().canonical();
    f.roots().into_iter().filter(|(a, _)| !a.is_zero()).map(|(a, _)| a).find(|a| {
        let t = standard::totaro(a);
        t == *c || t.canonical() == canon
    })
}

/// (a, sign) when `s` is C′_a (+1) or C″_a (−1).
pub fn recognize_weight3(s: &ParametricPrecycle) -> Option<(FieldElement, i64)> {
    if s.arity() != 2 || s.dim() != 5 {
        return None;
    }
    let Coordinate::Func(f) = &s.coords()[1] else { return None };
    f.factors().iter().filter(|(_, m)| *m == 1).map(|(l, _)| -l.constant()).find_map(|a| {
        if a.is_zero() {
            None
        } else if standard::c_prime(&a) == *s {
            Some((a, 1))
        } else if standard::c_double_prime(&a) == *s {
            Some((a, -1))
        } else {
            None
        }
    })
}

/// Splits a surface whose coordinates each involve one variable into the two
/// curve factors (slot lists are 0-based).
pub fn split_product(s: &ParametricPrecycle) -> Option<[(Vec<usize>, ParametricPrecycle); 2]> {
    if s.arity() != 2 {
        return None;
    }
    let mut parts: [(Vec<usize>, Vec<Coordinate>); 2] = Default::default();
    for (slot, c) in s.coords().iter().enumerate() {
        let Coordinate::Func(f) = c else { return None };
        let k = match (f.involves(0), f.involves(1)) {
            (true, false) => 0,
            (false, true) => 1,
            _ => return None,
        };
        parts[k].0.push(slot);
        parts[k].1.push(Coordinate::Func(f.as_univariate(k)?));
    }
    let [(s0, c0), (s1, c1)] = parts;
    Some([(s0, ParametricPrecycle::curve(c0).ok()?), (s1, ParametricPrecycle::curve(c1).ok()?)])
}

/// 𝒫 of a formal cycle. Points in □¹ and recognized generators use closed
/// forms; other curves are integrated numerically; product surfaces with a
/// □²-curve factor vanish once that factor passes [`wang_vanishing_check`].
pub fn regulator(z: &FormalCycle, opts: &RegulatorOptions) -> Result<RegulatorValue, RegulatorError> {
    let p = z.codim();
    let n = z.dim();
    let mut acc = RegulatorValue { class: DeligneClass::zero(p, 2), provenance: Provenance::ExactZero, notes: vec![] };
    if z.is_zero() {
        acc.notes.push("zero cycle".into());
        return Ok(acc);
    }
    if n == p {
        if n == 1 {
            return regulator_points(z);
        }
        return Ok(RegulatorValue::zero(p, "0-cycle in □^n with n ≥ 2: every form restricts to zero"));
    }
    if n == p + 1 {
        for (g, m) in z.terms() {
            let Generator::Param(c) = g else { unreachable!() };
            let v = match recognize_totaro(c) {
                Some(a) if opts.closed_forms => regulator_totaro(&a, &opts.policy)?,
                _ => regulator_curve_numeric(c, &opts.quad)?,
            };
            acc.add_scaled(&v, m)?;
        }
        return Ok(acc);
    }
    if n == p + 2 {
        let mut weight3: BTreeMap<FieldElement, (i64, i64)> = BTreeMap::new();
        for (g, m) in z.terms() {
            let Generator::Param(s) = g else { unreachable!() };
            if let Some((a, sign)) = recognize_weight3(s) {
                let e = weight3.entry(a).or_default();
                if sign > 0 {
                    e.0 += m;
                } else {
                    e.1 += m;
                }
                continue;
            }
            if let Some(parts) = split_product(s) {
                if let Some((_, curve)) = parts.iter().find(|(slots, _)| slots.len() == 2) {
                    let rep = wang_vanishing_check(curve, &opts.quad)?;
                    if rep.total <= opts.quad.tol.max(1e-6) {
                        acc.notes.push(format!(
                            "{s}: □² factor {curve} has vanishing W₂ (total {:.2e}, residue defect {:.2e})",
                            rep.total, rep.residue_defect
                        ));
                        continue;
                    }
                }
            }
            return Err(RegulatorError::Unsupported(format!("surface {s}")));
        }
        for (a, (kp, kpp)) in weight3 {
            if kp != -kpp {
                return Err(RegulatorError::Unsupported(format!(
                    "C′_{a} and C″_{a} must appear as k(C′ − C″), got {kp}, {kpp}"
                )));
            }
            let v = regulator_goncharov_weight3(&a, kp, &opts.policy)?;
            acc.add_scaled(&v, 1)?;
        }
        return Ok(acc);
    }
    Err(RegulatorError::Unsupported(format!("cycles of dimension {} in □^{n}", n - p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_cycle;

    fn fe(s: &str) -> FieldElement {
        s.parse().unwrap()
    }

    #[test]
    fn product_rule_matches_expansion() {
        for n in 1..=5 {
            assert_eq!(WangForm::wang(n).deps_part(), WangForm::deps_part_product_rule(n), "n={n}");
        }
    }

    #[test]
    fn wang_two_free_part() {
        // ¼(ε²−1)(dlog₀∧dloḡ₁ + dloḡ₀∧dlog₁) plus holomorphic/antiholomorphic pieces
        let w = WangForm::wang(2).free_part();
        assert_eq!(w.terms.len(), 4);
        let mixed = w.terms.iter().find(|t| t.forms == [Form::Dlog(0), Form::DlogBar(1)]).unwrap();
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(mixed.coef.coeffs(), &[q(-1, 4), q(0, 1), q(1, 4)]);
    }

    #[test]
    fn points_regulator() {
        let z = parse_cycle("(2+3*i) - 2(1/2)", FieldSpec::GAUSSIAN).unwrap();
        let r = regulator(&z, &RegulatorOptions::default()).unwrap();
        let exact = -(13f64.sqrt().ln()) - 2.0 * 2f64.ln();
        assert!((r.class.values[0] - exact).abs() < 1e-14);
        assert_eq!(r.class.values[0], r.class.values[1]);
    }

    #[test]
    fn totaro_numeric_matches_closed_form() {
        let q = QuadParams { tol: 1e-7, ..Default::default() };
        let pol = PrecisionPolicy::with_bits(128);
        for a in ["i", "2", "2+3*i", "-1-i", "1/2+1/2*i"] {
            let a = fe(a);
            let num = regulator_curve_numeric(&standard::totaro(&a), &q).unwrap();
            let cf = regulator_totaro(&a, &pol).unwrap();
            let d = num.class.sub(&cf.class).unwrap().norm();
            assert!(d <= 1e-5, "α={a}: numeric {} closed {} diff {d:e}", num.class, cf.class);
            assert!(num.class.is_equivariant(1e-12));
        }
    }

    #[test]
    fn wang_form_vanishes_on_curves() {
        let q = QuadParams { tol: 1e-8, ..Default::default() };
        for (al, be) in [("i", "2"), ("2+3*i", "-1-i"), ("1/2+1/2*i", "3")] {
            let c = standard::multiplicativity_curve(&fe(al), &fe(be));
            let r = wang_vanishing_check(&c, &q).unwrap();
            assert!(r.total <= 1e-6 && r.residue_defect <= 1e-6, "{r:?}");
        }
        let bad = standard::multiplicativity_curve(&fe("0"), &fe("2"));
        assert!(matches!(wang_vanishing_check(&bad, &q), Err(RegulatorError::Collision(_))));
    }

    #[test]
    fn recognizers() {
        let a = fe("2+3*i");
        assert_eq!(recognize_totaro(&standard::totaro(&a)), Some(a.clone()));
        assert_eq!(recognize_weight3(&standard::c_prime(&a)), Some((a.clone(), 1)));
        assert_eq!(recognize_weight3(&standard::c_double_prime(&a)), Some((a.clone(), -1)));
        let [(s0, c0), (s1, _)] = split_product(&standard::xi(&a)).unwrap();
        assert_eq!(s0, vec![2, 3]);
        assert_eq!(s1, vec![0, 1, 4]);
        assert_eq!(c0.dim(), 2);
    }

    #[test]
    fn weight3_cycle_value() {
        let a = fe("i");
        let z = standard::weight3_precycle(&a);
        let r = regulator(&z, &RegulatorOptions::default()).unwrap();
        let pol = PrecisionPolicy::with_bits(128);
        let l3 = crate::polylog::trilog_sv_c64(Complex64::new(0.0, 1.0), &pol);
        assert!((r.class.values[0] + 2.0 * l3 / (PI * PI)).abs() < 1e-14, "{}", r.class);
        assert!(r.notes.iter().any(|n| n.contains("vanishing")));
    }
}
