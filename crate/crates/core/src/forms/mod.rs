//! Exact sparse multivariate integer polynomials and the structural
//! transformations applied to a form: restriction, cross terms,
//! bihomogenization, multilinear tensors and forward differencing.
//!
//! Monomials are kept in a canonical graded-lexicographic order (total degree
//! first, then exponent vector, leading term first) so that equality is
//! structural and serialization is deterministic. All coefficient arithmetic
//! is arbitrary precision.

mod tensor;

pub use tensor::{
    bihomogenize, forward_difference_symbolic, forward_difference_value, multilinear_tensor,
    MultilinearTensor,
};

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// A single term `coeff · x₁^e₁ ⋯ xₙ^eₙ`. Stored monomials have `coeff ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: BigInt,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Graded-lexicographic comparison of exponent vectors.
fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Sparse polynomial in `n` variables over the integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPolynomial {
    n: usize,
    monomials: Vec<Monomial>,
}

impl IntegerPolynomial {
    /// Canonicalizes on construction: merges duplicate exponent vectors,
    /// drops zero coefficients, sorts leading term first.
    pub fn new(n: usize, terms: Vec<Monomial>) -> Self {
        let mut terms: Vec<Monomial> = terms
            .into_iter()
            .map(|m| {
                assert_eq!(m.exponents.len(), n, "exponent vector length");
                m
            })
            .collect();
        terms.sort_by(|a, b| grlex(&b.exponents, &a.exponents));
        let mut out: Vec<Monomial> = Vec::with_capacity(terms.len());
        for m in terms {
            match out.last_mut() {
                Some(last) if last.exponents == m.exponents => last.coeff += m.coeff,
                _ => out.push(m),
            }
        }
        out.retain(|m| !m.coeff.is_zero());
        IntegerPolynomial { n, monomials: out }
    }

    pub fn zero(n: usize) -> Self {
        IntegerPolynomial {
            n,
            monomials: Vec::new(),
        }
    }

    pub fn constant(n: usize, c: BigInt) -> Self {
        Self::new(
            n,
            vec![Monomial {
                coeff: c,
                exponents: vec![0; n],
            }],
        )
    }

    /// The variable `x_i` (0-based).
    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::new(
            n,
            vec![Monomial {
                coeff: BigInt::one(),
                exponents: e,
            }],
        )
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Total degree; zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.monomials
            .iter()
            .map(Monomial::total_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.monomials.iter().all(|m| m.total_degree() == d)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut terms = self.monomials.clone();
        terms.extend(other.monomials.iter().cloned());
        Self::new(self.n, terms)
    }

    pub fn neg(&self) -> Self {
        IntegerPolynomial {
            n: self.n,
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial {
                    coeff: -m.coeff.clone(),
                    exponents: m.exponents.clone(),
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut terms = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                terms.push(Monomial {
                    coeff: &a.coeff * &b.coeff,
                    exponents: a
                        .exponents
                        .iter()
                        .zip(&b.exponents)
                        .map(|(x, y)| x + y)
                        .collect(),
                });
            }
        }
        Self::new(self.n, terms)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(
            self.n,
            self.monomials
                .iter()
                .map(|m| Monomial {
                    coeff: &m.coeff * c,
                    exponents: m.exponents.clone(),
                })
                .collect(),
        )
    }

    /// Exact evaluation at an integer point.
    pub fn eval(&self, point: &[BigInt]) -> Result<BigInt> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        let mut acc = BigInt::zero();
        for m in &self.monomials {
            let mut t = m.coeff.clone();
            for (x, &e) in point.iter().zip(&m.exponents) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Checked `i64` evaluation through `i128` accumulation; `None` on overflow.
    pub fn eval_i64(&self, point: &[i64]) -> Option<i64> {
        assert_eq!(point.len(), self.n);
        let mut acc: i128 = 0;
        for m in &self.monomials {
            let mut t: i128 = m.coeff.to_i128()?;
            for (&x, &e) in point.iter().zip(&m.exponents) {
                for _ in 0..e {
                    t = t.checked_mul(x as i128)?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        acc.to_i64()
    }

    /// `∂/∂x_i`.
    pub fn partial_derivative(&self, i: usize) -> Self {
        let terms = self
            .monomials
            .iter()
            .filter(|m| m.exponents[i] > 0)
            .map(|m| {
                let mut e = m.exponents.clone();
                let k = e[i];
                e[i] -= 1;
                Monomial {
                    coeff: &m.coeff * BigInt::from(k),
                    exponents: e,
                }
            })
            .collect();
        Self::new(self.n, terms)
    }

    /// Sum of the monomials of total degree exactly `j`.
    pub fn homogeneous_part(&self, j: u32) -> Self {
        Self::new(
            self.n,
            self.monomials
                .iter()
                .filter(|m| m.total_degree() == j)
                .cloned()
                .collect(),
        )
    }

    /// Substitutes `args[i]` (a polynomial in `m` fresh variables) for `x_i`.
    pub fn compose(&self, args: &[IntegerPolynomial]) -> Self {
        assert_eq!(args.len(), self.n);
        let m = args.first().map(|p| p.n).unwrap_or(0);
        assert!(args.iter().all(|p| p.n == m));
        let mut acc = IntegerPolynomial::zero(m);
        for mono in &self.monomials {
            let mut t = IntegerPolynomial::constant(m, mono.coeff.clone());
            for (arg, &e) in args.iter().zip(&mono.exponents) {
                for _ in 0..e {
                    t = t.mul(arg);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// `p(x + c)` as a polynomial in `x`.
    pub fn shift(&self, offset: &[BigInt]) -> Self {
        assert_eq!(offset.len(), self.n);
        let args: Vec<IntegerPolynomial> = (0..self.n)
            .map(|i| {
                IntegerPolynomial::variable(self.n, i)
                    .add(&IntegerPolynomial::constant(self.n, offset[i].clone()))
            })
            .collect();
        self.compose(&args)
    }

    /// Parses the line format `coeff:e1,e2,…,en`, one monomial per line.
    /// Blank lines and `#` comments are skipped.
    pub fn parse_text(n: usize, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (c, es) = line.split_once(':').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: "expected `coeff:e1,e2,...`".into(),
            })?;
            let coeff: BigInt = c.trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad coefficient: {e}"),
            })?;
            let exps: Vec<u32> = es
                .split(',')
                .map(|t| {
                    t.trim().parse::<u32>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        msg: format!("bad exponent: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            if exps.len() != n {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {n} exponents, got {}", exps.len()),
                });
            }
            terms.push(Monomial {
                coeff,
                exponents: exps,
            });
        }
        Ok(Self::new(n, terms))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for m in &self.monomials {
            s.push_str(&m.coeff.to_string());
            s.push(':');
            let es: Vec<String> = m.exponents.iter().map(|e| e.to_string()).collect();
            s.push_str(&es.join(","));
            s.push('\n');
        }
        s
    }

    /// JSON form `{"n":…, "monomials":[[coeff,[e…]],…]}` with coefficients as
    /// numbers when they fit `i64` and decimal strings otherwise.
    pub fn to_json(&self) -> serde_json::Value {
        let monos: Vec<serde_json::Value> = self
            .monomials
            .iter()
            .map(|m| {
                let c = match m.coeff.to_i64() {
                    Some(v) => serde_json::json!(v),
                    None => serde_json::json!(m.coeff.to_string()),
                };
                serde_json::json!([c, m.exponents])
            })
            .collect();
        serde_json::json!({ "n": self.n, "monomials": monos })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            line: 0,
            msg: msg.to_string(),
        };
        let n = v["n"].as_u64().ok_or_else(|| bad("missing n"))? as usize;
        let arr = v["monomials"]
            .as_array()
            .ok_or_else(|| bad("missing monomials"))?;
        let mut terms = Vec::new();
        for ent in arr {
            let pair = ent.as_array().ok_or_else(|| bad("monomial not a pair"))?;
            if pair.len() != 2 {
                return Err(bad("monomial not a pair"));
            }
            let coeff: BigInt = if let Some(i) = pair[0].as_i64() {
                BigInt::from(i)
            } else if let Some(s) = pair[0].as_str() {
                s.parse().map_err(|e| bad(&format!("bad coefficient: {e}")))?
            } else {
                return Err(bad("coefficient neither number nor string"));
            };
            let exps: Vec<u32> = pair[1]
                .as_array()
                .ok_or_else(|| bad("exponents not an array"))?
                .iter()
                .map(|x| x.as_u64().map(|u| u as u32))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("bad exponent"))?;
            if exps.len() != n {
                return Err(bad("exponent vector length mismatch"));
            }
            terms.push(Monomial {
                coeff,
                exponents: exps,
            });
        }
        Ok(Self::new(n, terms))
    }
}

impl fmt::Display for IntegerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (k, m) in self.monomials.iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if m.coeff.is_negative() { "-" } else { "+" })?;
            } else if m.coeff.is_negative() {
                write!(f, "-")?;
            }
            let a = m.coeff.abs();
            let mut printed = false;
            if !a.is_one() || m.total_degree() == 0 {
                write!(f, "{a}")?;
                printed = true;
            }
            for (i, &e) in m.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if printed {
                    write!(f, "*")?;
                }
                write!(f, "x{}", i + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                printed = true;
            }
        }
        Ok(())
    }
}

/// A homogeneous form of degree `d ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerForm {
    base: IntegerPolynomial,
    d: u32,
}

impl IntegerForm {
    pub fn new(base: IntegerPolynomial, d: u32) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParameter("form degree must be ≥ 1".into()));
        }
        if !base.is_homogeneous(d) {
            return Err(Error::InvalidParameter(format!(
                "polynomial is not homogeneous of degree {d}"
            )));
        }
        Ok(IntegerForm { base, d })
    }

    /// Diagonal form `Σ cᵢ xᵢ^d`.
    pub fn diagonal(coeffs: &[i64], d: u32) -> Self {
        let n = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| {
                let mut e = vec![0; n];
                e[i] = d;
                Monomial {
                    coeff: BigInt::from(c),
                    exponents: e,
                }
            })
            .collect();
        IntegerForm {
            base: IntegerPolynomial::new(n, terms),
            d,
        }
    }

    /// Coefficients when the form is diagonal (`Σ cᵢ xᵢ^d`), else `None`.
    pub fn diagonal_coeffs(&self) -> Option<Vec<BigInt>> {
        let mut coeffs = vec![BigInt::zero(); self.nvars()];
        for m in self.base.monomials() {
            let mut nz = m.exponents.iter().enumerate().filter(|(_, &e)| e > 0);
            let (i, &e) = nz.next()?;
            if nz.next().is_some() || e != self.d {
                return None;
            }
            coeffs[i] = m.coeff.clone();
        }
        Some(coeffs)
    }

    pub fn base(&self) -> &IntegerPolynomial {
        &self.base
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn nvars(&self) -> usize {
        self.base.nvars()
    }

    pub fn eval(&self, point: &[BigInt]) -> Result<BigInt> {
        self.base.eval(point)
    }

    pub fn eval_i64(&self, point: &[i64]) -> Option<i64> {
        self.base.eval_i64(point)
    }

    /// `∇F`, component `i` is `∂F/∂xᵢ`.
    pub fn gradient(&self) -> Vec<IntegerPolynomial> {
        (0..self.nvars())
            .map(|i| self.base.partial_derivative(i))
            .collect()
    }
}

/// Restriction of a form: keeps the variables in `kept` (in that order) and
/// substitutes the integers given in `fixed` for the rest. `kept` and the
/// domain of `fixed` must partition `{0,…,n−1}`.
pub fn restrict(
    form: &IntegerForm,
    kept: &[usize],
    fixed: &[(usize, BigInt)],
) -> Result<IntegerPolynomial> {
    let n = form.nvars();
    let mut seen = vec![false; n];
    for &i in kept {
        if i >= n || seen[i] {
            return Err(Error::BadPartition(format!("bad kept index {i}")));
        }
        seen[i] = true;
    }
    for (i, _) in fixed {
        if *i >= n || seen[*i] {
            return Err(Error::BadPartition(format!("bad fixed index {i}")));
        }
        seen[*i] = true;
    }
    if !seen.iter().all(|&b| b) {
        return Err(Error::BadPartition(
            "kept and fixed must cover all variables".into(),
        ));
    }
    let m = kept.len();
    let mut args = vec![IntegerPolynomial::zero(m); n];
    for (pos, &i) in kept.iter().enumerate() {
        args[i] = IntegerPolynomial::variable(m, pos);
    }
    for (i, c) in fixed {
        args[*i] = IntegerPolynomial::constant(m, c.clone());
    }
    Ok(form.base.compose(&args))
}

/// Cross term `𝔊(s,t) = F(s,t) − F(s,0) − F(0,t)` for a partition of the
/// variables of `form_z` into `s_indices` and `t_indices`. The result lives
/// in the same variable space as `form_z`; it vanishes identically on `t = 0`
/// and on `s = 0`, which is checked structurally.
pub fn cross_term(
    form_z: &IntegerForm,
    s_indices: &[usize],
    t_indices: &[usize],
) -> Result<IntegerPolynomial> {
    let n = form_z.nvars();
    let mut seen = vec![false; n];
    for &i in s_indices.iter().chain(t_indices) {
        if i >= n || seen[i] {
            return Err(Error::BadPartition(format!("index {i} repeated or out of range")));
        }
        seen[i] = true;
    }
    if !seen.iter().all(|&b| b) {
        return Err(Error::BadPartition("s and t must partition the variables".into()));
    }
    let zero_on = |zeroed: &[usize]| -> IntegerPolynomial {
        let mut args: Vec<IntegerPolynomial> = (0..n)
            .map(|i| IntegerPolynomial::variable(n, i))
            .collect();
        for &i in zeroed {
            args[i] = IntegerPolynomial::zero(n);
        }
        form_z.base.compose(&args)
    };
    let f_s0 = zero_on(t_indices);
    let f_0t = zero_on(s_indices);
    let g = form_z.base.sub(&f_s0).sub(&f_0t);
    // every surviving monomial must involve both blocks
    for m in g.monomials() {
        let in_s = s_indices.iter().any(|&i| m.exponents[i] > 0);
        let in_t = t_indices.iter().any(|&i| m.exponents[i] > 0);
        debug_assert!(in_s && in_t, "cross term must vanish on s=0 and t=0");
        if !(in_s && in_t) {
            return Err(Error::BadPartition("cross term failed vanishing check".into()));
        }
    }
    Ok(g)
}
