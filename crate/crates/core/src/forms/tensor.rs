//! Bihomogenization, the associated multilinear tensor, and forward
//! differencing of polynomial phases.

use super::{IntegerForm, IntegerPolynomial, Monomial};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// `𝒢(u;v) = 𝔉(u₁v₁,…,u_hv_h)` over `2h` variables (`u` first, then `v`);
/// bidegree `(d,d)`, total degree `2d`.
pub fn bihomogenize(frak_f: &IntegerForm) -> IntegerForm {
    let h = frak_f.nvars();
    let terms = frak_f
        .base()
        .monomials()
        .iter()
        .map(|m| {
            let mut e = vec![0u32; 2 * h];
            for (i, &a) in m.exponents.iter().enumerate() {
                e[i] = a;
                e[h + i] = a;
            }
            Monomial {
                coeff: m.coeff.clone(),
                exponents: e,
            }
        })
        .collect();
    IntegerForm::new(
        IntegerPolynomial::new(2 * h, terms),
        2 * frak_f.degree(),
    )
    .expect("bihomogenization preserves homogeneity")
}

/// The `2d`-linear form `Γ` with integral coefficients `(d!)²·G_{j,k}`,
/// obtained from a bihomogeneous form shaped like `F(u₁v₁,…,u_hv_h)`.
///
/// Entries are keyed by the sorted index multisets of the `u`-slots and the
/// `v`-slots; an entry is nonzero only when the two multisets coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearTensor {
    h: usize,
    d: u32,
    entries: BTreeMap<(Vec<usize>, Vec<usize>), BigInt>,
}

impl MultilinearTensor {
    pub fn h(&self) -> usize {
        self.h
    }

    /// Slots per side (`d` of the underlying form).
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn entries(&self) -> &BTreeMap<(Vec<usize>, Vec<usize>), BigInt> {
        &self.entries
    }

    /// `Γ(u₁,…,u_d; v₁,…,v_d)`, exact.
    pub fn eval(&self, us: &[&[BigInt]], vs: &[&[BigInt]]) -> Result<BigInt> {
        let d = self.d as usize;
        if us.len() != d || vs.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: us.len().max(vs.len()),
            });
        }
        for slot in us.iter().chain(vs.iter()) {
            if slot.len() != self.h {
                return Err(Error::DimensionMismatch {
                    expected: self.h,
                    got: slot.len(),
                });
            }
        }
        let mut acc = BigInt::zero();
        for ((mj, mk), t) in &self.entries {
            acc += t * symmetric_slot_sum(us, mj) * symmetric_slot_sum(vs, mk);
        }
        Ok(acc)
    }

    /// Checked `i64` evaluation; `None` on overflow.
    pub fn eval_i64(&self, us: &[&[i64]], vs: &[&[i64]]) -> Option<i64> {
        let mut acc: i128 = 0;
        for ((mj, mk), t) in &self.entries {
            let a = symmetric_slot_sum_i128(us, mj)?;
            let b = symmetric_slot_sum_i128(vs, mk)?;
            acc = acc.checked_add(t.to_i128()?.checked_mul(a)?.checked_mul(b)?)?;
        }
        acc.to_i64()
    }
}

/// `Σ u_{1,j₁}⋯u_{d,j_d}` over the distinct ordered tuples realizing the
/// sorted multiset `m`.
fn symmetric_slot_sum(slots: &[&[BigInt]], m: &[usize]) -> BigInt {
    let mut acc = BigInt::zero();
    for perm in distinct_permutations(m) {
        let mut t = BigInt::one();
        for (s, &j) in perm.iter().enumerate() {
            t *= &slots[s][j];
        }
        acc += t;
    }
    acc
}

fn symmetric_slot_sum_i128(slots: &[&[i64]], m: &[usize]) -> Option<i128> {
    let mut acc: i128 = 0;
    for perm in distinct_permutations(m) {
        let mut t: i128 = 1;
        for (s, &j) in perm.iter().enumerate() {
            t = t.checked_mul(slots[s][j] as i128)?;
        }
        acc = acc.checked_add(t)?;
    }
    Some(acc)
}

/// Distinct permutations of a sorted multiset, lexicographic order.
fn distinct_permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    loop {
        // next_permutation
        let n = cur.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

/// Extracts `Γ` from a bihomogeneous form shaped like `F(u₁v₁,…,u_hv_h)`.
/// Stored values are `(d!)²·G_{j,k} = coeff · (∏ᵢ aᵢ!)²` for the monomial
/// with exponent multiset `a`, which keeps everything integral.
pub fn multilinear_tensor(g2d: &IntegerForm) -> Result<MultilinearTensor> {
    let nv = g2d.nvars();
    if nv % 2 != 0 {
        return Err(Error::InvalidParameter(
            "bihomogeneous input needs an even variable count".into(),
        ));
    }
    let h = nv / 2;
    if g2d.degree() % 2 != 0 {
        return Err(Error::InvalidParameter(
            "bihomogeneous input needs even total degree".into(),
        ));
    }
    let d = g2d.degree() / 2;
    let mut entries = BTreeMap::new();
    for m in g2d.base().monomials() {
        let (eu, ev) = m.exponents.split_at(h);
        if eu != ev {
            return Err(Error::InvalidParameter(
                "input is not of the shape F(u₁v₁,…,u_hv_h)".into(),
            ));
        }
        let mut key = Vec::with_capacity(d as usize);
        let mut fact_sq = BigInt::one();
        for (i, &a) in eu.iter().enumerate() {
            for _ in 0..a {
                key.push(i);
            }
            let mut f = BigInt::one();
            for k in 2..=a {
                f *= BigInt::from(k);
            }
            fact_sq *= &f * &f;
        }
        debug_assert_eq!(key.len(), d as usize);
        entries.insert((key.clone(), key), &m.coeff * fact_sq);
    }
    Ok(MultilinearTensor { h, d, entries })
}

/// Value of the `t`-fold forward difference
/// `𝓕_t(u₁,…,u_t) = Σ_{ε∈{0,1}ᵗ} (−1)^{ε₁+⋯+ε_t} 𝓕(ε₁u₁+⋯+ε_tu_t)`.
pub fn forward_difference_value(
    poly: &IntegerPolynomial,
    shifts: &[Vec<BigInt>],
) -> Result<BigInt> {
    let n = poly.nvars();
    for s in shifts {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.len(),
            });
        }
    }
    let t = shifts.len();
    let mut acc = BigInt::zero();
    for mask in 0u32..(1 << t) {
        let mut point = vec![BigInt::zero(); n];
        for (b, s) in shifts.iter().enumerate() {
            if mask >> b & 1 == 1 {
                for (p, x) in point.iter_mut().zip(s) {
                    *p += x;
                }
            }
        }
        let v = poly.eval(&point)?;
        if mask.count_ones() % 2 == 0 {
            acc += v;
        } else {
            acc -= v;
        }
    }
    Ok(acc)
}

/// Symbolic variant: `𝓕_t(u₁,…,u_{t−1}, ·)` as a polynomial in the last
/// shift, with the first `t−1` shifts fixed.
pub fn forward_difference_symbolic(
    poly: &IntegerPolynomial,
    fixed_shifts: &[Vec<BigInt>],
) -> Result<IntegerPolynomial> {
    let n = poly.nvars();
    for s in fixed_shifts {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.len(),
            });
        }
    }
    let t1 = fixed_shifts.len();
    let mut acc = IntegerPolynomial::zero(n);
    for mask in 0u32..(1 << t1) {
        let mut base = vec![BigInt::zero(); n];
        for (b, s) in fixed_shifts.iter().enumerate() {
            if mask >> b & 1 == 1 {
                for (p, x) in base.iter_mut().zip(s) {
                    *p += x;
                }
            }
        }
        let parity_even = mask.count_ones() % 2 == 0;
        // last-bit 0: constant term; last-bit 1: shifted polynomial, opposite sign
        let c = IntegerPolynomial::constant(n, poly.eval(&base)?);
        let s = poly.shift(&base);
        if parity_even {
            acc = acc.add(&c).sub(&s);
        } else {
            acc = acc.sub(&c).add(&s);
        }
    }
    Ok(acc)
}
