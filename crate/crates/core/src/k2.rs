//! Λ²(F×⊗ℚ) over the Gaussian field and Steinberg decompositions
//! α∧β = Σ c_γ·γ∧(1−γ) by exact sparse linear algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::field::{FieldElement, FieldError, FieldSpec, GaussianPrime};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum K2Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("element {0} is 0 or 1")]
    Excluded(String),
    #[error("α∧β involves primes outside S: {0}")]
    OutsideS(String),
    #[error("no decomposition over {atoms} atoms: rank {rank}, augmented rank {augmented}; enlarge the prime set or the height bound")]
    RankDeficit { atoms: usize, rank: usize, augmented: usize },
    #[error("certificate failed to re-verify")]
    Certificate,
}

/// x ∈ F×⊗ℚ as exponents over canonical Gaussian primes; units vanish.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MultSupportVector(BTreeMap<GaussianPrime, BigRational>);

impl MultSupportVector {
    pub fn of(x: &FieldElement, bound: u64) -> Result<Self, K2Error> {
        if x.is_zero() {
            return Err(K2Error::Field(FieldError::Zero));
        }
        let f = x.factor_bounded(bound)?;
        Ok(MultSupportVector(f.factors.into_iter().map(|(p, e)| (p, BigRational::from_integer(e.into()))).collect()))
    }

    pub fn entries(&self) -> &BTreeMap<GaussianPrime, BigRational> {
        &self.0
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.0.clone();
        for (p, e) in &o.0 {
            let v = m.entry(*p).or_insert_with(BigRational::zero);
            *v = &*v + e;
        }
        m.retain(|_, v| !v.is_zero());
        MultSupportVector(m)
    }

    pub fn support(&self) -> BTreeSet<GaussianPrime> {
        self.0.keys().cloned().collect()
    }
}

/// Sparse vector over pairs (p, q), p < q, of canonical primes.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WedgeClass(BTreeMap<(GaussianPrime, GaussianPrime), BigRational>);

impl WedgeClass {
    pub fn zero() -> Self {
        WedgeClass::default()
    }

    pub fn from_vectors(a: &MultSupportVector, b: &MultSupportVector) -> Self {
        let mut m: BTreeMap<(GaussianPrime, GaussianPrime), BigRational> = BTreeMap::new();
        for (p, x) in &a.0 {
            for (q, y) in &b.0 {
                if p == q {
                    continue;
                }
                let (key, s) = if p < q { ((*p, *q), x * y) } else { ((*q, *p), -(x * y)) };
                let v = m.entry(key).or_insert_with(BigRational::zero);
                *v = &*v + &s;
            }
        }
        m.retain(|_, v| !v.is_zero());
        WedgeClass(m)
    }

    pub fn entries(&self) -> &BTreeMap<(GaussianPrime, GaussianPrime), BigRational> {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        self.add_scaled(o, &BigRational::one())
    }

    pub fn add_scaled(&self, o: &Self, c: &BigRational) -> Self {
        let mut m = self.0.clone();
        for (k, v) in &o.0 {
            let e = m.entry(*k).or_insert_with(BigRational::zero);
            *e = &*e + &(v * c);
        }
        m.retain(|_, v| !v.is_zero());
        WedgeClass(m)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        WedgeClass::zero().add_scaled(self, c)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn support(&self) -> BTreeSet<GaussianPrime> {
        self.0.keys().flat_map(|(p, q)| [*p, *q]).collect()
    }
}

impl fmt::Display for WedgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|((p, q), c)| format!("{c}*({p})^({q})")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for WedgeClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for ((p, q), c) in &self.0 {
            m.serialize_entry(&format!("({p})^({q})"), &c.to_string())?;
        }
        m.end()
    }
}

/// α∧β in Λ²(F×⊗ℚ).
pub fn wedge(alpha: &FieldElement, beta: &FieldElement, bound: u64) -> Result<WedgeClass, K2Error> {
    Ok(WedgeClass::from_vectors(&MultSupportVector::of(alpha, bound)?, &MultSupportVector::of(beta, bound)?))
}

/// γ∧(1−γ).
pub fn steinberg_atom(gamma: &FieldElement, bound: u64) -> Result<WedgeClass, K2Error> {
    let one = FieldElement::constant_in(gamma.spec(), 1);
    if gamma.is_zero() || gamma.is_one() {
        return Err(K2Error::Excluded(gamma.to_string()));
    }
    wedge(gamma, &(&one - gamma), bound)
}

/// Parses a comma-separated prime list into canonical primes.
pub fn parse_primes(s: &str, spec: FieldSpec) -> Result<Vec<GaussianPrime>, K2Error> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let x = FieldElement::parse_in(spec, part)?;
        let f = x.factor()?;
        match f.factors.as_slice() {
            [(p, 1)] => {
                out.insert(*p);
            }
            _ => return Err(K2Error::Field(FieldError::Parse { pos: 0, msg: format!("{part} is not a prime") })),
        }
    }
    Ok(out.into_iter().collect())
}

/// Nonzero Gaussian integers a + bi with |a|, |b| ≤ h supported in S (units included).
fn s_integers(s: &BTreeSet<GaussianPrime>, h: i64) -> BTreeSet<(i64, i64)> {
    let mut out = BTreeSet::new();
    for a in -h..=h {
        for b in -h..=h {
            if a == 0 && b == 0 {
                continue;
            }
            let x = FieldElement::from_ints(a, b);
            if let Ok(f) = x.factor() {
                if f.factors.iter().all(|(p, _)| s.contains(p)) {
                    out.insert((a, b));
                }
            }
        }
    }
    out
}

/// All γ = x/y ∉ {0, 1} with x, y, y − x supported in S and the coordinates
/// of x and y bounded by `height`; sorted and deduplicated.
pub fn harvest(s: &[GaussianPrime], height: i64) -> Vec<FieldElement> {
    let set: BTreeSet<GaussianPrime> = s.iter().cloned().collect();
    let small = s_integers(&set, height);
    let wide = s_integers(&set, 2 * height);
    let mut out = BTreeSet::new();
    for &(xa, xb) in &small {
        for &(ya, yb) in &small {
            let d = (ya - xa, yb - xb);
            if d == (0, 0) || !wide.contains(&d) {
                continue;
            }
            let g = &FieldElement::from_ints(xa, xb) / &FieldElement::from_ints(ya, yb);
            out.insert(g);
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    #[serde(serialize_with = "ser_display")]
    pub gamma: FieldElement,
    #[serde(serialize_with = "ser_display")]
    pub coefficient: BigRational,
}

fn ser_display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// N·(α∧β) = Σ N·c_γ·γ∧(1−γ), with the certificate wedge recorded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinbergDecomposition {
    #[serde(serialize_with = "ser_display")]
    pub alpha: FieldElement,
    #[serde(serialize_with = "ser_display")]
    pub beta: FieldElement,
    #[serde(serialize_with = "ser_display")]
    pub n: BigInt,
    pub atoms: Vec<Atom>,
    /// N·(α∧β).
    pub certificate: WedgeClass,
    pub candidates: usize,
}

impl SteinbergDecomposition {
    /// Re-factors α, β and every atom and checks the identity exactly.
    pub fn verify(&self, bound: u64) -> Result<bool, K2Error> {
        let n = BigRational::from_integer(self.n.clone());
        let lhs = wedge(&self.alpha, &self.beta, bound)?.scale(&n);
        if lhs != self.certificate {
            return Ok(false);
        }
        let mut rhs = WedgeClass::zero();
        for a in &self.atoms {
            rhs = rhs.add_scaled(&steinberg_atom(&a.gamma, bound)?, &(&a.coefficient * &n));
            if !(&a.coefficient * &n).is_integer() {
                return Ok(false);
            }
        }
        Ok(lhs == rhs)
    }
}

fn lcm_denominators<'a>(it: impl Iterator<Item = &'a BigRational>) -> BigInt {
    it.fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

/// Solves A·x = b exactly (columns of A given as sparse wedge vectors) by
/// fraction-free elimination with the first available row as pivot; free
/// variables are set to zero.
pub fn solve_exact(columns: &[WedgeClass], target: &WedgeClass) -> Result<Vec<BigRational>, (usize, usize)> {
    let mut rows: BTreeSet<(GaussianPrime, GaussianPrime)> = target.0.keys().cloned().collect();
    for c in columns {
        rows.extend(c.0.keys().cloned());
    }
    let rows: Vec<_> = rows.into_iter().collect();
    let ncols = columns.len();
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|key| {
            let mut entries: Vec<BigRational> =
                columns.iter().map(|c| c.0.get(key).cloned().unwrap_or_else(BigRational::zero)).collect();
            entries.push(target.0.get(key).cloned().unwrap_or_else(BigRational::zero));
            let d = lcm_denominators(entries.iter());
            entries.iter().map(|e| (e * BigRational::from_integer(d.clone())).to_integer()).collect()
        })
        .collect();
    let nrows = m.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..=ncols {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                debug_assert!((&v % &prev).is_zero());
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push((r, c));
        r += 1;
    }
    let rank = pivots.len();
    if (rank..nrows).any(|i| !m[i][ncols].is_zero()) {
        return Err((rank, rank + 1));
    }
    let mut x = vec![BigRational::zero(); ncols];
    for &(row, c) in pivots.iter().rev() {
        let mut acc = BigRational::from_integer(m[row][ncols].clone());
        for j in c + 1..ncols {
            if !x[j].is_zero() {
                acc -= BigRational::from_integer(m[row][j].clone()) * &x[j];
            }
        }
        x[c] = acc / BigRational::from_integer(m[row][c].clone());
    }
    Ok(x)
}

/// Decomposes α∧β over atoms harvested from S at the given height.
pub fn decompose(
    alpha: &FieldElement,
    beta: &FieldElement,
    s: &[GaussianPrime],
    height: i64,
    bound: u64,
) -> Result<SteinbergDecomposition, K2Error> {
    for x in [alpha, beta] {
        if x.is_zero() || x.is_one() {
            return Err(K2Error::Excluded(x.to_string()));
        }
    }
    let target = wedge(alpha, beta, bound)?;
    let one = FieldElement::constant_in(alpha.spec(), 1);
    let finish = |atoms: Vec<Atom>, candidates: usize| -> Result<SteinbergDecomposition, K2Error> {
        let n = lcm_denominators(atoms.iter().map(|a| &a.coefficient));
        let d = SteinbergDecomposition {
            alpha: alpha.clone(),
            beta: beta.clone(),
            certificate: target.scale(&BigRational::from_integer(n.clone())),
            n,
            atoms,
            candidates,
        };
        if d.verify(bound)? {
            Ok(d)
        } else {
            Err(K2Error::Certificate)
        }
    };
    if *beta == &one - alpha {
        return finish(vec![Atom { gamma: alpha.clone(), coefficient: BigRational::one() }], 1);
    }
    if target.is_zero() {
        return finish(vec![], 0);
    }
    let allowed: BTreeSet<GaussianPrime> = s.iter().cloned().collect();
    let outside: Vec<String> = target.support().difference(&allowed).map(|p| p.to_string()).collect();
    if !outside.is_empty() {
        return Err(K2Error::OutsideS(outside.join(", ")));
    }
    let mut gammas = Vec::new();
    let mut columns = Vec::new();
    for g in harvest(s, height) {
        let col = steinberg_atom(&g, bound)?;
        if !col.is_zero() {
            gammas.push(g);
            columns.push(col);
        }
    }
    let candidates = gammas.len();
    let x = solve_exact(&columns, &target)
        .map_err(|(rank, augmented)| K2Error::RankDeficit { atoms: candidates, rank, augmented })?;
    let atoms = gammas
        .into_iter()
        .zip(x)
        .filter(|(_, c)| !c.is_zero())
        .map(|(gamma, coefficient)| Atom { gamma, coefficient })
        .collect();
    finish(atoms, candidates)
}

/// Primes of α, β and 1 + i, a default S for decompositions.
pub fn default_primes(alpha: &FieldElement, beta: &FieldElement, bound: u64) -> Result<Vec<GaussianPrime>, K2Error> {
    let mut s: BTreeSet<GaussianPrime> = BTreeSet::new();
    s.insert(GaussianPrime { re: 1, im: 1 });
    for x in [alpha, beta] {
        s.extend(MultSupportVector::of(x, bound)?.support());
    }
    Ok(s.into_iter().collect())
}
