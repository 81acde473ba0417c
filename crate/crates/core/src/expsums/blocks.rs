//! Dyadic block sums `S(M,N;α)`, the translated sub-box context of the
//! minor-arc analysis, and the Weyl differencing chain.

use super::ExpSumContext;
use crate::arithmetic::SieveTable;
use crate::error::{Error, Result};
use crate::forms::{
    forward_difference_value, restrict, IntegerForm, IntegerPolynomial,
};
use crate::numeric::{e_alpha_times, e_alpha_times_f64, KahanComplex};
use crate::weights::{DyadicIndexPair, DyadicScheme, RoleWeight, WeightFamily};
use num_bigint::BigInt;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Aggregated weight of one coordinate inside one block:
/// `x ↦ ψᵢ(x) · Σ_{uv=x} K(u)L(v)` over the `Θ`-boxes of the role split.
fn block_coordinate_weights(
    ctx: &ExpSumContext<'_>,
    scheme: &DyadicScheme,
    pair: &DyadicIndexPair,
    coord: usize,
) -> Vec<(u64, f64)> {
    let (u_exp, v_exp, kspec, lspec) = pair.role_split();
    let th = scheme.theta();
    let u_scale = scheme.scale(u_exp);
    let v_scale = scheme.scale(v_exp);
    let (ax, bx) = ctx.family.support(coord);
    let mut agg: BTreeMap<u64, f64> = BTreeMap::new();
    let u_lo = (u_scale / th).floor().max(1.0) as u64;
    // u·v lands in [aX, bX] with v ≥ 1, so u beyond bX contributes nothing
    let u_hi = ((u_scale * th).min(bx)).ceil() as u64;
    for u in u_lo..=u_hi {
        let kw = kspec.eval(scheme, ctx.sieve, u);
        if kw == 0.0 {
            continue;
        }
        let v_lo = ((v_scale / th).max(ax / u as f64)).floor().max(1.0) as u64;
        let v_hi = ((v_scale * th).min(bx / u as f64)).ceil() as u64;
        for v in v_lo..=v_hi {
            let lw = lspec.eval(scheme, ctx.sieve, v);
            if lw == 0.0 {
                continue;
            }
            let x = u * v;
            let psi = ctx.family.psi(coord, x as f64);
            if psi == 0.0 {
                continue;
            }
            *agg.entry(x).or_insert(0.0) += kw * lw;
        }
    }
    agg.into_iter()
        .map(|(x, w)| (x, w * ctx.family.psi(coord, x as f64)))
        .filter(|&(_, w)| w != 0.0)
        .collect()
}

/// `S(M,N;α)`: one dyadic block of the decomposition, summed over the
/// `Θ`-boxes of each coordinate's role split.
pub fn dyadic_block_s(
    ctx: &ExpSumContext<'_>,
    scheme: &DyadicScheme,
    pairs: &[DyadicIndexPair],
    alpha: f64,
) -> Result<Complex64> {
    let n = ctx.form.nvars();
    if pairs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pairs.len(),
        });
    }
    let weights: Vec<Vec<(u64, f64)>> = (0..n)
        .map(|i| block_coordinate_weights(ctx, scheme, &pairs[i], i))
        .collect();
    if weights.iter().any(Vec::is_empty) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let total: u128 = weights.iter().map(|w| w.len() as u128).product();
    ctx.budget.check("dyadic_block_S", total)?;
    let mut acc = KahanComplex::new();
    let mut pos = vec![0usize; n];
    let mut point = vec![0i64; n];
    loop {
        let mut w = 1.0;
        for k in 0..n {
            let (x, wx) = weights[k][pos[k]];
            point[k] = x as i64;
            w *= wx;
        }
        if w != 0.0 {
            let f = ctx.form.eval_i64(&point).expect("desk-scale values");
            acc.add(w * e_alpha_times_f64(alpha, f as f64));
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(acc.value());
            }
            pos[k] += 1;
            if pos[k] < weights[k].len() {
                break;
            }
            pos[k] = 0;
            k += 1;
        }
    }
}

/// The translated sub-box context of one block: `h` active coordinates with
/// the remaining coordinates frozen at fixed values `x̃`, sub-box shifts
/// `w = ⌈W_{i;ℓ}⌉`, and the translated phase polynomial
/// `g(u,v) = G(u+w, v+w′)` of degree `2d` in `2h` variables.
pub struct BlockContext {
    pub h: usize,
    pub d: u32,
    /// original coordinate index of each active slot
    pub active: Vec<usize>,
    /// `U = Θ·U_min` and `V = Θ·V_min`: sub-box sides
    pub cap_u: f64,
    pub cap_v: f64,
    pub w: Vec<i64>,
    pub w_prime: Vec<i64>,
    k_specs: Vec<RoleWeight>,
    l_specs: Vec<RoleWeight>,
    /// indicator windows `[Θ⁻¹Uᵢ, ΘUᵢ]`, `[Θ⁻¹Vᵢ, ΘVᵢ]` in original coords
    k_windows: Vec<(f64, f64)>,
    l_windows: Vec<(f64, f64)>,
    /// exclusive sub-box upper ends `W_{i;ℓ}+U`, `W′_{i;ℓ′}+V`
    k_upper: Vec<f64>,
    l_upper: Vec<f64>,
    pub g: IntegerPolynomial,
    pub g2d: IntegerForm,
}

/// Builds the context for the sub-box `(ℓ, ℓ′)` of a block. `passive_fixed`
/// carries the frozen products `x̃ⱼ` for every non-active coordinate.
#[allow(clippy::too_many_arguments)]
pub fn block_context(
    ctx: &ExpSumContext<'_>,
    scheme: &DyadicScheme,
    pairs: &[DyadicIndexPair],
    active: &[usize],
    passive_fixed: &[(usize, i64)],
    ells: &[u64],
    ell_primes: &[u64],
) -> Result<BlockContext> {
    let n = ctx.form.nvars();
    let h = active.len();
    if pairs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pairs.len(),
        });
    }
    let mut seen = vec![false; n];
    for &i in active {
        if i >= n || seen[i] {
            return Err(Error::BadPartition(format!("bad active index {i}")));
        }
        seen[i] = true;
    }
    for &(j, _) in passive_fixed {
        if j >= n || seen[j] {
            return Err(Error::BadPartition(format!("bad passive index {j}")));
        }
        seen[j] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::BadPartition(
            "active and passive must partition the coordinates".into(),
        ));
    }
    if ells.len() != h || ell_primes.len() != h {
        return Err(Error::DimensionMismatch {
            expected: h,
            got: ells.len().min(ell_primes.len()),
        });
    }
    let th = scheme.theta();
    let mut k_specs = Vec::with_capacity(h);
    let mut l_specs = Vec::with_capacity(h);
    let mut u_sides = Vec::with_capacity(h);
    let mut v_sides = Vec::with_capacity(h);
    for &i in active {
        let (u_exp, v_exp, k, l) = pairs[i].role_split();
        k_specs.push(k);
        l_specs.push(l);
        u_sides.push(scheme.scale(u_exp));
        v_sides.push(scheme.scale(v_exp));
    }
    let u_min = u_sides.iter().cloned().fold(f64::INFINITY, f64::min);
    let v_min = v_sides.iter().cloned().fold(f64::INFINITY, f64::min);
    let cap_u = th * u_min;
    let cap_v = th * v_min;
    let mut w = Vec::with_capacity(h);
    let mut w_prime = Vec::with_capacity(h);
    let mut k_windows = Vec::with_capacity(h);
    let mut l_windows = Vec::with_capacity(h);
    let mut k_upper = Vec::with_capacity(h);
    let mut l_upper = Vec::with_capacity(h);
    for a in 0..h {
        let max_ell = (u_sides[a] / u_min) as u64;
        let max_ellp = (v_sides[a] / v_min) as u64;
        if ells[a] > max_ell || ell_primes[a] > max_ellp {
            return Err(Error::InvalidParameter(format!(
                "sub-box index out of range: ell={} (max {max_ell}), ell'={} (max {max_ellp})",
                ells[a], ell_primes[a]
            )));
        }
        let big_w = u_sides[a] / th + ells[a] as f64 * cap_u;
        let big_wp = v_sides[a] / th + ell_primes[a] as f64 * cap_v;
        w.push(big_w.ceil() as i64);
        w_prime.push(big_wp.ceil() as i64);
        k_windows.push((u_sides[a] / th, u_sides[a] * th));
        l_windows.push((v_sides[a] / th, v_sides[a] * th));
        k_upper.push(big_w + cap_u);
        l_upper.push(big_wp + cap_v);
    }
    // g(u,v) = F with active coordinate a ↦ (u_a + w_a)(v_a + w'_a) and
    // passive coordinates frozen at x̃
    let mut args = vec![IntegerPolynomial::zero(2 * h); n];
    for (a, &i) in active.iter().enumerate() {
        let u_var = IntegerPolynomial::variable(2 * h, a)
            .add(&IntegerPolynomial::constant(2 * h, BigInt::from(w[a])));
        let v_var = IntegerPolynomial::variable(2 * h, h + a)
            .add(&IntegerPolynomial::constant(2 * h, BigInt::from(w_prime[a])));
        args[i] = u_var.mul(&v_var);
    }
    for &(j, x) in passive_fixed {
        args[j] = IntegerPolynomial::constant(2 * h, BigInt::from(x));
    }
    let g = ctx.form.base().compose(&args);
    let d = ctx.form.degree();
    let g2d_poly = g.homogeneous_part(2 * d);
    // the top part is F(u₁v₁,…,u_hv_h, 0,…,0), independent of the shifts
    let g2d = IntegerForm::new(g2d_poly, 2 * d)
        .map_err(|_| Error::InvalidParameter("degree-2d part not homogeneous".into()))?;
    Ok(BlockContext {
        h,
        d,
        active: active.to_vec(),
        cap_u,
        cap_v,
        w,
        w_prime,
        k_specs,
        l_specs,
        k_windows,
        l_windows,
        k_upper,
        l_upper,
        g,
        g2d,
    })
}

impl BlockContext {
    /// `𝐊(u)` in translated coordinates, indicators included.
    pub fn k_weight(&self, scheme: &DyadicScheme, sieve: &SieveTable, u: &[i64]) -> f64 {
        let mut prod = 1.0;
        for a in 0..self.h {
            if u[a] < 0 {
                return 0.0;
            }
            let orig = u[a] + self.w[a];
            let of = orig as f64;
            if of < self.k_windows[a].0 || of > self.k_windows[a].1 || of >= self.k_upper[a] {
                return 0.0;
            }
            prod *= self.k_specs[a].eval(scheme, sieve, orig as u64);
            if prod == 0.0 {
                return 0.0;
            }
        }
        prod
    }

    /// `𝐋(v)` in translated coordinates.
    pub fn l_weight(&self, scheme: &DyadicScheme, sieve: &SieveTable, v: &[i64]) -> f64 {
        let mut prod = 1.0;
        for a in 0..self.h {
            if v[a] < 0 {
                return 0.0;
            }
            let orig = v[a] + self.w_prime[a];
            let of = orig as f64;
            if of < self.l_windows[a].0 || of > self.l_windows[a].1 || of >= self.l_upper[a] {
                return 0.0;
            }
            prod *= self.l_specs[a].eval(scheme, sieve, orig as u64);
            if prod == 0.0 {
                return 0.0;
            }
        }
        prod
    }

    /// `𝛙(u;v) = Π ψᵢ((u_a+w_a)(v_a+w′_a))`.
    pub fn psi_weight(&self, family: &WeightFamily, u: &[i64], v: &[i64]) -> f64 {
        let mut prod = 1.0;
        for a in 0..self.h {
            let x = (u[a] + self.w[a]) * (v[a] + self.w_prime[a]);
            prod *= family.psi(self.active[a], x as f64);
            if prod == 0.0 {
                return 0.0;
            }
        }
        prod
    }

    /// The translated sub-box sum
    /// `𝓔(α) = Σ_{u∈[0,U]^h, v∈[0,V]^h} 𝐊(u)𝐋(v)𝛙(u;v) e(α g(u,v))`.
    pub fn translated_sum(
        &self,
        family: &WeightFamily,
        scheme: &DyadicScheme,
        sieve: &SieveTable,
        alpha: f64,
    ) -> Complex64 {
        let u_top = self.cap_u.floor() as i64;
        let v_top = self.cap_v.floor() as i64;
        let mut acc = KahanComplex::new();
        let mut u = vec![0i64; self.h];
        let mut point = vec![0i64; 2 * self.h];
        'uloop: loop {
            let kw = self.k_weight(scheme, sieve, &u);
            if kw != 0.0 {
                point[..self.h].copy_from_slice(&u);
                let mut v = vec![0i64; self.h];
                'vloop: loop {
                    let lw = self.l_weight(scheme, sieve, &v);
                    if lw != 0.0 {
                        let pw = self.psi_weight(family, &u, &v);
                        if pw != 0.0 {
                            point[self.h..].copy_from_slice(&v);
                            let g = self.g.eval_i64(&point).expect("desk-scale values");
                            acc.add(kw * lw * pw * e_alpha_times_f64(alpha, g as f64));
                        }
                    }
                    let mut a = 0;
                    loop {
                        if a == self.h {
                            break 'vloop;
                        }
                        v[a] += 1;
                        if v[a] <= v_top {
                            break;
                        }
                        v[a] = 0;
                        a += 1;
                    }
                }
            }
            let mut a = 0;
            loop {
                if a == self.h {
                    break 'uloop;
                }
                u[a] += 1;
                if u[a] <= u_top {
                    break;
                }
                u[a] = 0;
                a += 1;
            }
        }
        acc.value()
    }

    /// `T_v(α) = Σ_{u∈𝒰} 𝐊(u)𝛙(u;v) e(α g(u,v))` at a fixed `v`.
    pub fn t_v(
        &self,
        family: &WeightFamily,
        scheme: &DyadicScheme,
        sieve: &SieveTable,
        alpha: f64,
        v: &[i64],
    ) -> Complex64 {
        let u_top = self.cap_u.floor() as i64;
        let mut acc = KahanComplex::new();
        let mut u = vec![0i64; self.h];
        let mut point = vec![0i64; 2 * self.h];
        point[self.h..].copy_from_slice(v);
        loop {
            let kw = self.k_weight(scheme, sieve, &u);
            if kw != 0.0 {
                let pw = self.psi_weight(family, &u, v);
                if pw != 0.0 {
                    point[..self.h].copy_from_slice(&u);
                    let g = self.g.eval_i64(&point).expect("desk-scale values");
                    acc.add(kw * pw * e_alpha_times_f64(alpha, g as f64));
                }
            }
            let mut a = 0;
            loop {
                if a == self.h {
                    return acc.value();
                }
                u[a] += 1;
                if u[a] <= u_top {
                    break;
                }
                u[a] = 0;
                a += 1;
            }
        }
    }

    /// The phase polynomial in `u` at a fixed `v`: `g(·, v)`.
    pub fn phase_in_u(&self, v: &[i64]) -> IntegerPolynomial {
        let kept: Vec<usize> = (0..self.h).collect();
        let fixed: Vec<(usize, BigInt)> = (0..self.h)
            .map(|a| (self.h + a, BigInt::from(v[a])))
            .collect();
        restrict_poly(&self.g, &kept, &fixed)
    }
}

/// `restrict` for a plain polynomial (not necessarily a form).
fn restrict_poly(
    poly: &IntegerPolynomial,
    kept: &[usize],
    fixed: &[(usize, BigInt)],
) -> IntegerPolynomial {
    let n = poly.nvars();
    let m = kept.len();
    let mut args = vec![IntegerPolynomial::zero(m); n];
    for (pos, &i) in kept.iter().enumerate() {
        args[i] = IntegerPolynomial::variable(m, pos);
    }
    for (i, c) in fixed {
        args[*i] = IntegerPolynomial::constant(m, c.clone());
    }
    poly.compose(&args)
}

/// An axis-aligned integer box, one `(lo, hi)` pair per dimension
/// (inclusive). Empty when any `lo > hi`.
#[derive(Debug, Clone)]
struct IntBox {
    dims: Vec<(i64, i64)>,
}

impl IntBox {
    fn count(&self) -> u128 {
        self.dims
            .iter()
            .map(|&(lo, hi)| if hi >= lo { (hi - lo + 1) as u128 } else { 0 })
            .product()
    }

    fn points(&self) -> Vec<Vec<i64>> {
        if self.count() == 0 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.count() as usize);
        let mut cur: Vec<i64> = self.dims.iter().map(|&(lo, _)| lo).collect();
        loop {
            out.push(cur.clone());
            let mut a = 0;
            loop {
                if a == cur.len() {
                    return out;
                }
                cur[a] += 1;
                if cur[a] <= self.dims[a].1 {
                    break;
                }
                cur[a] = self.dims[a].0;
                a += 1;
            }
        }
    }

    /// `𝒳 ∩ (𝒳 − z)` per dimension.
    fn difference_shift(&self, z: &[i64]) -> IntBox {
        IntBox {
            dims: self
                .dims
                .iter()
                .zip(z)
                .map(|(&(lo, hi), &s)| (lo.max(lo - s), hi.min(hi - s)))
                .collect(),
        }
    }
}

/// Both sides of the weighted Weyl inequality at level `t`:
/// `lhs = |T_v(α)|^{2^{t−1}}`, `rhs` the differenced majorant with constant
/// one. The contract is `lhs ≤ rhs` exactly.
pub fn weyl_chain_check(
    block: &BlockContext,
    family: &WeightFamily,
    scheme: &DyadicScheme,
    sieve: &SieveTable,
    alpha: f64,
    t: u32,
    v: &[i64],
) -> Result<(f64, f64)> {
    if t < 1 || t > block.d {
        return Err(Error::InvalidParameter(format!(
            "need 1 ≤ t ≤ d, got t={t}, d={}",
            block.d
        )));
    }
    let h = block.h;
    let u_top = block.cap_u.floor() as i64;
    let base_box = IntBox {
        dims: vec![(0, u_top); h],
    };
    let diff_box = IntBox {
        dims: vec![(-u_top, u_top); h],
    };
    let budget_needed = diff_box.count().pow(t - 1) * base_box.count() * (1 << t) as u128;
    crate::error::Budget::default().check("weyl_chain_check", budget_needed)?;

    let lhs = block
        .t_v(family, scheme, sieve, alpha, v)
        .norm()
        .powi(1 << (t - 1) as i32);

    let phase_poly = block.phase_in_u(v);
    let d_count = diff_box.count() as f64;

    // Σ over u₁..u_{t−1} ∈ 𝒰^D of |inner sum over u_t ∈ 𝒰(u₁..u_{t−1})|
    let mut outer = crate::numeric::Kahan::new();
    let mut stack: Vec<Vec<i64>> = Vec::new();
    sum_over_outer(
        block,
        family,
        scheme,
        sieve,
        alpha,
        t,
        v,
        &phase_poly,
        &base_box,
        &diff_box,
        &mut stack,
        &mut outer,
    );
    let rhs = d_count.powi((1 << (t - 1)) as i32 - t as i32) * outer.value();
    Ok((lhs, rhs))
}

#[allow(clippy::too_many_arguments)]
fn sum_over_outer(
    block: &BlockContext,
    family: &WeightFamily,
    scheme: &DyadicScheme,
    sieve: &SieveTable,
    alpha: f64,
    t: u32,
    v: &[i64],
    phase_poly: &IntegerPolynomial,
    base_box: &IntBox,
    diff_box: &IntBox,
    chosen: &mut Vec<Vec<i64>>,
    acc: &mut crate::numeric::Kahan,
) {
    if chosen.len() + 1 == t as usize {
        // innermost: |Σ_{ u_t ∈ 𝒰(u₁..u_{t−1}) } K_û(u_t) ψ_û(u_t; v) e(F̃_t)|
        let mut inner_box = base_box.clone();
        for z in chosen.iter() {
            inner_box = inner_box.difference_shift(z);
        }
        let mut inner = KahanComplex::new();
        for ut in inner_box.points() {
            let kw = product_over_subsets(block, scheme, sieve, chosen, &ut, true, family, v);
            if kw == 0.0 {
                continue;
            }
            let mut shifts: Vec<Vec<BigInt>> = chosen
                .iter()
                .map(|z| z.iter().map(|&c| BigInt::from(c)).collect())
                .collect();
            shifts.push(ut.iter().map(|&c| BigInt::from(c)).collect());
            let fd = forward_difference_value(phase_poly, &shifts).expect("dims match");
            inner.add(kw * e_alpha_times(alpha, &fd));
        }
        acc.add(inner.value().norm());
    } else {
        for z in diff_box.points() {
            chosen.push(z);
            sum_over_outer(
                block, family, scheme, sieve, alpha, t, v, phase_poly, base_box, diff_box,
                chosen, acc,
            );
            chosen.pop();
        }
    }
}

/// `K_{u₁..u_k}(z)·ψ_{u₁..u_k}(z; v) = Π_{ε∈{0,1}^k} K(ε·u + z)ψ(ε·u + z; v)`.
#[allow(clippy::too_many_arguments)]
fn product_over_subsets(
    block: &BlockContext,
    scheme: &DyadicScheme,
    sieve: &SieveTable,
    shifts: &[Vec<i64>],
    z: &[i64],
    with_psi: bool,
    family: &WeightFamily,
    v: &[i64],
) -> f64 {
    let k = shifts.len();
    let mut prod = 1.0;
    for mask in 0u32..(1 << k) {
        let mut point: Vec<i64> = z.to_vec();
        for (b, s) in shifts.iter().enumerate() {
            if mask >> b & 1 == 1 {
                for (p, &c) in point.iter_mut().zip(s) {
                    *p += c;
                }
            }
        }
        prod *= block.k_weight(scheme, sieve, &point);
        if with_psi {
            prod *= block.psi_weight(family, &point, v);
        }
        if prod == 0.0 {
            return 0.0;
        }
    }
    prod
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Budget;
    use crate::expsums::s_alpha;
    use crate::oracle::LambdaMode;
    use crate::weights::{enumerate_xi, SmoothWeight};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(
        x: f64,
        x0: &[f64],
    ) -> (IntegerForm, WeightFamily, SieveTable, DyadicScheme) {
        let n = x0.len();
        let coeffs: Vec<i64> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let form = IntegerForm::diagonal(&coeffs, 2);
        let w = SmoothWeight::make_bump(0.08, 2).unwrap();
        let family = WeightFamily::new(x, x0.to_vec(), w).unwrap();
        let sieve = SieveTable::build((x * 2.0) as u64 + 100).unwrap();
        let scheme = DyadicScheme::new(2.0).unwrap();
        (form, family, sieve, scheme)
    }

    #[test]
    fn block_misses_support_gives_zero() {
        let (form, family, sieve, scheme) = setup(200.0, &[0.3]);
        let ctx = ExpSumContext::new(&form, &family, &sieve, Budget::default()).unwrap();
        // M·N = 2^20 is far beyond b·X·Θ² ≈ 304
        let pair = DyadicIndexPair {
            m_exp: 10,
            n_exp: 10,
        };
        let v = dyadic_block_s(&ctx, &scheme, &[pair], 0.25).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn univariate_blocks_rebuild_lambda_psi() {
        // n=1 toy at α=0: Σ_blocks S(M,N;0) = Σ_x Λ(x)ψ(x)
        let (form, family, sieve, scheme) = setup(200.0, &[0.3]);
        let ctx = ExpSumContext::new(&form, &family, &sieve, Budget::default()).unwrap();
        let xi = enumerate_xi(&family, &scheme, 0);
        let mut acc = Complex64::new(0.0, 0.0);
        for pair in &xi {
            acc += dyadic_block_s(&ctx, &scheme, &[*pair], 0.0).unwrap();
        }
        let direct = s_alpha(&ctx, 0.0).unwrap();
        assert!(
            (acc - direct).norm() <= 1e-6 * direct.norm().max(1.0),
            "sum {acc} vs {direct}"
        );
    }

    #[test]
    fn block_reconstruction_two_vars() {
        let (form, family, sieve, scheme) = setup(320.0, &[0.3, 0.4]);
        let ctx = ExpSumContext::new(&form, &family, &sieve, Budget::default()).unwrap();
        let xi0 = enumerate_xi(&family, &scheme, 0);
        let xi1 = enumerate_xi(&family, &scheme, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let alpha: f64 = rng.gen_range(0.0..1.0);
            let mut acc = KahanComplex::new();
            for p0 in &xi0 {
                for p1 in &xi1 {
                    acc.add(dyadic_block_s(&ctx, &scheme, &[*p0, *p1], alpha).unwrap());
                }
            }
            let direct = s_alpha(&ctx, alpha).unwrap();
            let err = (acc.value() - direct).norm();
            assert!(
                err <= 1e-6 * direct.norm().max(1.0),
                "alpha={alpha}: {} vs {direct}",
                acc.value()
            );
        }
    }

    fn default_block(
        ctx: &ExpSumContext<'_>,
        scheme: &DyadicScheme,
        pairs: &[DyadicIndexPair],
        ells: &[u64],
        ellps: &[u64],
    ) -> BlockContext {
        let n = ctx.form.nvars();
        let active: Vec<usize> = (0..n.min(2)).collect();
        let passive: Vec<(usize, i64)> = (n.min(2)..n).map(|j| (j, 80)).collect();
        block_context(ctx, scheme, pairs, &active, &passive, ells, ellps).unwrap()
    }

    #[test]
    fn sub_boxes_resum_to_the_block() {
        // Σ_{ℓ,ℓ′} 𝓔_{ℓ,ℓ′}(α) equals the block sum with the same coordinates
        let (form, family, sieve, scheme) = setup(200.0, &[0.3, 0.4]);
        let ctx = ExpSumContext::new(&form, &family, &sieve, Budget::default()).unwrap();
        let pairs = [
            DyadicIndexPair { m_exp: 3, n_exp: 5 },
            DyadicIndexPair { m_exp: 5, n_exp: 4 },
        ];
        let alpha = 0.137;
        // direct block sum over the full Θ-boxes (u,v per coordinate)
        let direct = dyadic_block_s(&ctx, &scheme, &pairs, alpha).unwrap();

        // sum the translated sub-box sums over every (ℓ, ℓ′)
        let th = scheme.theta();
        let (u0, v0, _, _) = pairs[0].role_split();
        let (u1, v1, _, _) = pairs[1].role_split();
        let u_sides = [scheme.scale(u0), scheme.scale(u1)];
        let v_sides = [scheme.scale(v0), scheme.scale(v1)];
        let u_min = u_sides[0].min(u_sides[1]);
        let v_min = v_sides[0].min(v_sides[1]);
        let max_ell = [
            (u_sides[0] / u_min) as u64,
            (u_sides[1] / u_min) as u64,
        ];
        let max_ellp = [
            (v_sides[0] / v_min) as u64,
            (v_sides[1] / v_min) as u64,
        ];
        let _ = th;
        let mut total = KahanComplex::new();
        for l0 in 0..=max_ell[0] {
            for l1 in 0..=max_ell[1] {
                for lp0 in 0..=max_ellp[0] {
                    for lp1 in 0..=max_ellp[1] {
                        let bc = block_context(
                            &ctx,
                            &scheme,
                            &pairs,
                            &[0, 1],
                            &[],
                            &[l0, l1],
                            &[lp0, lp1],
                        )
                        .unwrap();
                        total.add(bc.translated_sum(&family, &scheme, &sieve, alpha));
                    }
                }
            }
        }
        assert!(
            (total.value() - direct).norm() <= 1e-9 * direct.norm().max(1.0),
            "{} vs {direct}",
            total.value()
        );
    }

    #[test]
    fn g2d_is_the_bihomogeneous_restriction() {
        let (form, family, sieve, scheme) = setup(200.0, &[0.3, 0.4]);
        let ctx = ExpSumContext::new(&form, &family, &sieve, Budget::default()).unwrap();
        let pairs = [
            DyadicIndexPair { m_exp: 3, n_exp: 5 },
            DyadicIndexPair { m_exp: 4, n_exp: 4 },
        ];
        let bc = default_block(&ctx, &scheme, &pairs, &[0, 0], &[0, 0]);
        // g^[2d](u;v) = F(u₁v₁, u₂v₂) for the active coordinates
        let expected = {
            let kept = crate::forms::restrict(&form, &[0, 1], &[]).unwrap();
            let f2 = IntegerForm::new(kept, 2).unwrap();
            crate::forms::bihomogenize(&f2)
        };
        assert_eq!(bc.g2d.base(), expected.base());
    }

    #[test]
    fn weyl_chain_t1_is_equality() {
        let (form, family, sieve, scheme) = setup(200.0, &[0.3, 0.4]);
        let ctx = ExpSumContext::new(&form, &family, &sieve, Budget::default()).unwrap();
        let pairs = [
            DyadicIndexPair { m_exp: 2, n_exp: 5 },
            DyadicIndexPair { m_exp: 2, n_exp: 5 },
        ];
        let bc = default_block(&ctx, &scheme, &pairs, &[0, 0], &[0, 0]);
        let v = vec![3i64, 7];
        let (lhs, rhs) = weyl_chain_check(&bc, &family, &scheme, &sieve, 0.3137, 1, &v).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0), "lhs={lhs} rhs={rhs}");
    }

    #[test]
    fn weyl_chain_inequality_random_instances() {
        let (form, family, sieve, scheme) = setup(200.0, &[0.3, 0.4]);
        let ctx = ExpSumContext::new(&form, &family, &sieve, Budget::default()).unwrap();
        let pairs = [
            DyadicIndexPair { m_exp: 2, n_exp: 5 },
            DyadicIndexPair { m_exp: 2, n_exp: 5 },
        ];
        let bc = default_block(&ctx, &scheme, &pairs, &[0, 0], &[0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let alpha: f64 = rng.gen_range(0.0..1.0);
            let v = vec![rng.gen_range(0..40), rng.gen_range(0..40)];
            let (lhs, rhs) =
                weyl_chain_check(&bc, &family, &scheme, &sieve, alpha, 2, &v).unwrap();
            assert!(
                lhs <= rhs + 1e-9 * rhs.abs().max(1.0),
                "alpha={alpha} v={v:?}: lhs={lhs} > rhs={rhs}"
            );
        }
        // α = 0: both sides are weighted counts
        let v = vec![8i64, 8];
        let (lhs, rhs) = weyl_chain_check(&bc, &family, &scheme, &sieve, 0.0, 2, &v).unwrap();
        assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0));
    }
}
