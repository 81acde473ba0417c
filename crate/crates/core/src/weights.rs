//! The smooth weight class `𝒮⁺(δ; M₀; 𝔠)`, the scaled family `ψᵢ`, and the
//! dyadic smooth partition of unity.

use crate::arithmetic::SieveTable;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Grid resolution used for measuring derivative bounds (points per support).
const DERIV_GRID: usize = 10_000;

/// A weight `ω ∈ 𝒮⁺(δ; M₀; 𝔠)`: smooth, nonnegative, `supp ω = [−δ, δ]`.
///
/// The underlying function is the standard mollifier
/// `ω(y) = exp(1/((y/δ)² − 1))` on `|y| < δ`. The membership constant `𝔠`
/// is measured (`c_achieved`), not prescribed: suprema of the derivatives up
/// to order `M₀` are estimated on a uniform grid with 4th-order central
/// differences.
#[derive(Debug, Clone)]
pub struct SmoothWeight {
    delta: f64,
    m0: u32,
    c_achieved: f64,
    /// sampled k-th derivatives on the grid, k = 0..=m0
    deriv_grids: Vec<Vec<f64>>,
    step: f64,
}

impl SmoothWeight {
    pub fn make_bump(delta: f64, m0: u32) -> Result<Self> {
        if delta <= 0.0 {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        let step = 2.0 * delta / DERIV_GRID as f64;
        let base: Vec<f64> = (0..=DERIV_GRID)
            .map(|i| bump(-delta + i as f64 * step, delta))
            .collect();
        let mut deriv_grids = vec![base];
        for _ in 0..m0 {
            let prev = deriv_grids.last().unwrap();
            deriv_grids.push(differentiate_grid(prev, step));
        }
        let c_achieved = deriv_grids
            .iter()
            .flat_map(|g| g.iter().map(|v| v.abs()))
            .fold(0.0, f64::max);
        Ok(SmoothWeight {
            delta,
            m0,
            c_achieved,
            deriv_grids,
            step,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    /// Measured `𝔠` such that `ω ∈ 𝒮⁺(δ; M₀; c_achieved)`.
    pub fn c_achieved(&self) -> f64 {
        self.c_achieved
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        bump(y, self.delta)
    }

    /// Measured `ω^(k)` (grid interpolation); `k = 0` is exact.
    pub fn derivative(&self, k: u32, y: f64) -> f64 {
        assert!(k <= self.m0, "derivative order above M0");
        if k == 0 {
            return self.eval(y);
        }
        if y.abs() >= self.delta {
            return 0.0;
        }
        let grid = &self.deriv_grids[k as usize];
        let pos = (y + self.delta) / self.step;
        let i = (pos.floor() as usize).min(grid.len() - 2);
        let frac = pos - i as f64;
        grid[i] * (1.0 - frac) + grid[i + 1] * frac
    }
}

#[inline]
fn bump(y: f64, delta: f64) -> f64 {
    let u = y / delta;
    let d = u * u - 1.0;
    if d >= 0.0 {
        0.0
    } else {
        (1.0 / d).exp()
    }
}

/// 4th-order central differences; endpoints fall back to one-sided slopes.
fn differentiate_grid(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in 2..n - 2 {
        out[i] = (g[i - 2] - 8.0 * g[i - 1] + 8.0 * g[i + 1] - g[i + 2]) / (12.0 * h);
    }
    out[0] = (g[1] - g[0]) / h;
    out[1] = (g[2] - g[0]) / (2.0 * h);
    out[n - 2] = (g[n - 1] - g[n - 3]) / (2.0 * h);
    out[n - 1] = (g[n - 1] - g[n - 2]) / h;
    out
}

/// The scaled family `ψᵢ(x) = ω(x/X − x₀,ᵢ)` with `ϖ = Π ψᵢ`.
#[derive(Debug, Clone)]
pub struct WeightFamily {
    x_scale: f64,
    x0: Vec<f64>,
    omega: SmoothWeight,
}

impl WeightFamily {
    pub fn new(x_scale: f64, x0: Vec<f64>, omega: SmoothWeight) -> Result<Self> {
        if x_scale <= 1.0 {
            return Err(Error::InvalidParameter("X must exceed 1".into()));
        }
        for (i, &c) in x0.iter().enumerate() {
            if !(c - omega.delta() > 0.0 && c + omega.delta() < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "support of ψ_{} leaves (0,1): x0={c}, delta={}",
                    i + 1,
                    omega.delta()
                )));
            }
        }
        Ok(WeightFamily { x_scale, x0, omega })
    }

    pub fn n(&self) -> usize {
        self.x0.len()
    }

    pub fn x_scale(&self) -> f64 {
        self.x_scale
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn omega(&self) -> &SmoothWeight {
        &self.omega
    }

    /// `δ_min = minᵢ (x₀,ᵢ − δ) > 0`.
    pub fn delta_min(&self) -> f64 {
        self.x0
            .iter()
            .map(|c| c - self.omega.delta())
            .fold(f64::INFINITY, f64::min)
    }

    /// Support endpoints `(aᵢ, bᵢ)` in unit scale.
    pub fn support_unit(&self, i: usize) -> (f64, f64) {
        let d = self.omega.delta();
        (self.x0[i] - d, self.x0[i] + d)
    }

    /// Support `[aᵢX, bᵢX]` of `ψᵢ`.
    pub fn support(&self, i: usize) -> (f64, f64) {
        let (a, b) = self.support_unit(i);
        (a * self.x_scale, b * self.x_scale)
    }

    pub fn psi(&self, i: usize, x: f64) -> f64 {
        assert!(i < self.x0.len(), "coordinate index out of range");
        self.omega.eval(x / self.x_scale - self.x0[i])
    }

    pub fn varpi(&self, xs: &[f64]) -> f64 {
        assert_eq!(xs.len(), self.x0.len());
        let mut p = 1.0;
        for (i, &x) in xs.iter().enumerate() {
            p *= self.psi(i, x);
            if p == 0.0 {
                return 0.0;
            }
        }
        p
    }
}

/// The dyadic scheme: `Θ > 1`, a bump `Ψ` with `Ψ ≡ 1` on `[−1,1]` and
/// support `[−Θ, Θ]`, and the partition `Ψ_T(x) = Ψ(x/T) − Ψ(Θx/T)` indexed
/// by `𝔇 = {Θ^t}`.
#[derive(Debug, Clone)]
pub struct DyadicScheme {
    theta: f64,
}

impl DyadicScheme {
    pub fn new(theta: f64) -> Result<Self> {
        if theta <= 1.0 {
            return Err(Error::InvalidParameter("Theta must exceed 1".into()));
        }
        Ok(DyadicScheme { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The master bump `Ψ`.
    pub fn psi_master(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= 1.0 {
            1.0
        } else if a >= self.theta {
            0.0
        } else {
            smooth_step_down((a - 1.0) / (self.theta - 1.0))
        }
    }

    /// `T = Θ^t`.
    pub fn scale(&self, t: u32) -> f64 {
        self.theta.powi(t as i32)
    }

    /// `Ψ_T` by dyadic exponent.
    pub fn partition_weight_exp(&self, t: u32, x: f64) -> f64 {
        let tt = self.scale(t);
        self.psi_master(x / tt) - self.psi_master(self.theta * x / tt)
    }

    /// `Ψ_T(x)`; errors unless `T ∈ 𝔇` (an integral power of `Θ`).
    pub fn partition_weight(&self, t_value: f64, x: f64) -> Result<f64> {
        let e = t_value.ln() / self.theta.ln();
        if e < -1e-9 || (e - e.round()).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "T={t_value} is not an integral power of Theta={}",
                self.theta
            )));
        }
        Ok(self.partition_weight_exp(e.round() as u32, x))
    }

    /// Largest exponent whose block can touch `x`, i.e. `T ≤ Θ·x`.
    pub fn max_exp_for(&self, x: f64) -> u32 {
        if x <= 0.0 {
            return 0;
        }
        ((x.ln() / self.theta.ln()) + 1.0).floor().max(0.0) as u32
    }
}

/// `C^∞` transition from 1 at `s ≤ 0` to 0 at `s ≥ 1`.
fn smooth_step_down(s: f64) -> f64 {
    let f = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    let a = f(1.0 - s);
    let b = f(s);
    a / (a + b)
}

/// One coordinate's dyadic index pair `(Mᵢ, Nᵢ) ∈ 𝔇²` with the derived
/// `Uᵢ = min`, `Vᵢ = max` and the role split of the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicIndexPair {
    pub m_exp: u32,
    pub n_exp: u32,
}

/// Which arithmetic weight a role carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    /// `μ(m)·Ψ_T(m)`
    MoebiusPsi,
    /// `log(n)·Ψ_T(n)`
    LogPsi,
}

/// A role weight: an arithmetic factor times a dyadic bump at scale `Θ^exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoleWeight {
    pub kind: ArithKind,
    pub scale_exp: u32,
}

impl RoleWeight {
    pub fn eval(&self, scheme: &DyadicScheme, sieve: &SieveTable, m: u64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        let bump = scheme.partition_weight_exp(self.scale_exp, m as f64);
        if bump == 0.0 {
            return 0.0;
        }
        match self.kind {
            ArithKind::MoebiusPsi => sieve.moebius(m) as f64 * bump,
            ArithKind::LogPsi => (m as f64).ln() * bump,
        }
    }
}

impl DyadicIndexPair {
    pub fn m(&self, scheme: &DyadicScheme) -> f64 {
        scheme.scale(self.m_exp)
    }

    pub fn n(&self, scheme: &DyadicScheme) -> f64 {
        scheme.scale(self.n_exp)
    }

    pub fn u_exp(&self) -> u32 {
        self.m_exp.min(self.n_exp)
    }

    pub fn v_exp(&self) -> u32 {
        self.m_exp.max(self.n_exp)
    }

    /// `(Uᵢ, Vᵢ, K-spec, L-spec)`: `K` rides on the short range `U`, `L` on
    /// the long range `V`; a tie `M = N` resolves as `M ≤ N`.
    pub fn role_split(&self) -> (u32, u32, RoleWeight, RoleWeight) {
        if self.m_exp <= self.n_exp {
            (
                self.m_exp,
                self.n_exp,
                RoleWeight {
                    kind: ArithKind::MoebiusPsi,
                    scale_exp: self.m_exp,
                },
                RoleWeight {
                    kind: ArithKind::LogPsi,
                    scale_exp: self.n_exp,
                },
            )
        } else {
            (
                self.n_exp,
                self.m_exp,
                RoleWeight {
                    kind: ArithKind::LogPsi,
                    scale_exp: self.n_exp,
                },
                RoleWeight {
                    kind: ArithKind::MoebiusPsi,
                    scale_exp: self.m_exp,
                },
            )
        }
    }
}

/// `Ξ(aᵢX, bᵢX)`: all `(M,N) ∈ 𝔇²` with `aᵢXΘ⁻² ≤ MN ≤ bᵢXΘ²`. May be
/// empty when the dyadic grid misses the window.
pub fn enumerate_xi(
    family: &WeightFamily,
    scheme: &DyadicScheme,
    i: usize,
) -> Vec<DyadicIndexPair> {
    let (a_x, b_x) = family.support(i);
    let th = scheme.theta();
    let lo = a_x / (th * th);
    let hi = b_x * th * th;
    let mut out = Vec::new();
    let max_sum = (hi.ln() / th.ln()).floor() as i64;
    for s in 0..=max_sum.max(0) {
        for t in 0..=(max_sum - s).max(0) {
            let prod = th.powi((s + t) as i32);
            if prod >= lo && prod <= hi {
                out.push(DyadicIndexPair {
                    m_exp: s as u32,
                    n_exp: t as u32,
                });
            }
        }
    }
    out
}

/// Weight configuration as carried in experiment files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightConfig {
    pub delta: f64,
    pub x0: Vec<f64>,
    #[serde(rename = "X")]
    pub x_scale: f64,
    #[serde(rename = "Theta", default = "default_theta")]
    pub theta: f64,
    #[serde(rename = "M0", default = "default_m0")]
    pub m0: u32,
}

fn default_theta() -> f64 {
    2.0
}

fn default_m0() -> u32 {
    4
}

impl WeightConfig {
    pub fn family(&self) -> Result<WeightFamily> {
        let omega = SmoothWeight::make_bump(self.delta, self.m0)?;
        WeightFamily::new(self.x_scale, self.x0.clone(), omega)
    }

    pub fn scheme(&self) -> Result<DyadicScheme> {
        DyadicScheme::new(self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::SieveTable;
    use crate::numeric::Kahan;

    #[test]
    fn bump_shape() {
        let w = SmoothWeight::make_bump(0.08, 4).unwrap();
        assert!((w.eval(0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(w.eval(0.08), 0.0);
        assert_eq!(w.eval(-0.08), 0.0);
        assert_eq!(w.eval(0.5), 0.0);
        for k in 0..20 {
            let y = 0.004 * k as f64;
            assert_eq!(w.eval(y), w.eval(-y));
        }
        assert!(w.c_achieved() >= 1.0, "derivatives grow above 1");
        assert!(SmoothWeight::make_bump(0.0, 2).is_err());
    }

    #[test]
    fn psi_and_varpi() {
        let w = SmoothWeight::make_bump(0.08, 2).unwrap();
        let fam = WeightFamily::new(1000.0, vec![0.3, 0.4], w).unwrap();
        assert!((fam.psi(0, 300.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(fam.psi(0, 600.0), 0.0);
        assert_eq!(fam.psi(0, 219.0), 0.0);
        // one factor vanishing kills the product
        assert_eq!(fam.varpi(&[300.0, 900.0]), 0.0);
        assert!(fam.varpi(&[300.0, 400.0]) > 0.0);
        let (a, b) = fam.support(0);
        assert!((a - 220.0).abs() < 1e-9 && (b - 380.0).abs() < 1e-9);
    }

    #[test]
    fn family_validates_unit_cube() {
        let w = SmoothWeight::make_bump(0.2, 2).unwrap();
        assert!(WeightFamily::new(100.0, vec![0.1], w.clone()).is_err());
        assert!(WeightFamily::new(100.0, vec![0.9], w).is_err());
    }

    #[test]
    fn partition_of_unity() {
        let scheme = DyadicScheme::new(2.0).unwrap();
        for x in 1..=100_000u64 {
            let xf = x as f64;
            let mut s = Kahan::new();
            for t in 0..=scheme.max_exp_for(xf) + 2 {
                s.add(scheme.partition_weight_exp(t, xf));
            }
            assert!((s.value() - 1.0).abs() <= 1e-9, "x={x} sum={}", s.value());
        }
    }

    #[test]
    fn partition_weight_support_and_errors() {
        let scheme = DyadicScheme::new(2.0).unwrap();
        // Ψ_1 vanishes at and beyond Θ
        assert_eq!(scheme.partition_weight(1.0, 2.0).unwrap(), 0.0);
        assert_eq!(scheme.partition_weight(1.0, 3.5).unwrap(), 0.0);
        // boundedness |Ψ_T| ≤ 2 sup|Ψ|
        for t in 0..6 {
            for k in 1..200 {
                let v = scheme.partition_weight_exp(t, k as f64 * 0.37);
                assert!(v.abs() <= 2.0);
            }
        }
        // T outside the dyadic semigroup is rejected
        assert!(scheme.partition_weight(3.0, 5.0).is_err());
        assert!(scheme.partition_weight(0.5, 5.0).is_err());
        // master bump derivative suprema stay finite up to order 4
        let h = 1e-3;
        let grid: Vec<f64> = (0..4000).map(|i| scheme.psi_master(i as f64 * h)).collect();
        let mut g = grid;
        for _ in 0..4 {
            g = super::differentiate_grid(&g, h);
            assert!(g.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn xi_enumeration_example() {
        // X=10³, Θ=2, a=0.25, b=0.35: 62.5 ≤ 2^{s+t} ≤ 1400 → s+t ∈ {6..10}
        let w = SmoothWeight::make_bump(0.05, 2).unwrap();
        let fam = WeightFamily::new(1000.0, vec![0.3], w).unwrap();
        let scheme = DyadicScheme::new(2.0).unwrap();
        let xi = enumerate_xi(&fam, &scheme, 0);
        assert!(!xi.is_empty());
        let sums: std::collections::BTreeSet<u32> =
            xi.iter().map(|p| p.m_exp + p.n_exp).collect();
        assert_eq!(sums, (6..=10).collect());
        // count ≪ (log X)²: all (s,t) with the right sum appear
        let count: usize = (6..=10).map(|s| s as usize + 1).sum();
        assert_eq!(xi.len(), count);
    }

    #[test]
    fn xi_count_growth_is_log_squared() {
        let scheme = DyadicScheme::new(2.0).unwrap();
        let w = SmoothWeight::make_bump(0.05, 2).unwrap();
        let mut prev_ratio = f64::INFINITY;
        for &x in &[1e3, 2e3, 4e3, 8e3, 16e3] {
            let fam = WeightFamily::new(x, vec![0.3], w.clone()).unwrap();
            let n = enumerate_xi(&fam, &scheme, 0).len() as f64;
            let ratio = n / (x.ln() * x.ln());
            assert!(ratio <= prev_ratio * 1.05, "ratio grew: {ratio} vs {prev_ratio}");
            prev_ratio = ratio;
        }
    }

    #[test]
    fn role_split_cases() {
        let p = DyadicIndexPair { m_exp: 2, n_exp: 6 }; // M=4, N=64
        let (u, v, k, l) = p.role_split();
        assert_eq!((u, v), (2, 6));
        assert_eq!(k.kind, ArithKind::MoebiusPsi);
        assert_eq!(l.kind, ArithKind::LogPsi);

        let p = DyadicIndexPair { m_exp: 6, n_exp: 2 }; // M=64, N=4
        let (u, v, k, l) = p.role_split();
        assert_eq!((u, v), (2, 6));
        assert_eq!(k.kind, ArithKind::LogPsi);
        assert_eq!(k.scale_exp, 2);
        assert_eq!(l.kind, ArithKind::MoebiusPsi);
        assert_eq!(l.scale_exp, 6);

        // tie resolves as M ≤ N
        let p = DyadicIndexPair { m_exp: 3, n_exp: 3 };
        let (_, _, k, _) = p.role_split();
        assert_eq!(k.kind, ArithKind::MoebiusPsi);
    }

    #[test]
    fn role_weights_are_log_bounded() {
        let scheme = DyadicScheme::new(2.0).unwrap();
        let sieve = SieveTable::build(4096).unwrap();
        let k = RoleWeight {
            kind: ArithKind::LogPsi,
            scale_exp: 8,
        };
        for m in 1..=1024 {
            assert!(k.eval(&scheme, &sieve, m).abs() <= 2.0 * 1024f64.ln());
        }
    }

    #[test]
    fn role_split_is_a_renaming() {
        // K(u)L(v) over the role split equals μΨ_M(m)·logΨ_N(n)
        let scheme = DyadicScheme::new(2.0).unwrap();
        let sieve = SieveTable::build(4096).unwrap();
        for pair in [
            DyadicIndexPair { m_exp: 2, n_exp: 5 },
            DyadicIndexPair { m_exp: 5, n_exp: 2 },
        ] {
            let (_, _, kspec, lspec) = pair.role_split();
            for m in 1..=64u64 {
                for n in 1..=64u64 {
                    let direct = sieve.moebius(m) as f64
                        * scheme.partition_weight_exp(pair.m_exp, m as f64)
                        * (n as f64).ln()
                        * scheme.partition_weight_exp(pair.n_exp, n as f64);
                    let (u, v) = if pair.m_exp <= pair.n_exp { (m, n) } else { (n, m) };
                    let split = kspec.eval(&scheme, &sieve, u) * lspec.eval(&scheme, &sieve, v);
                    assert!((direct - split).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dyadic_reconstruction_pointwise() {
        // Σ_{(M,N)∈Ξ} Σ_{mn=x} μΨ_M(m)·logΨ_N(n)·ψ(mn) = Λ(x)ψ(x) on the support
        let sieve = SieveTable::build(20_000).unwrap();
        let scheme = DyadicScheme::new(2.0).unwrap();
        let w = SmoothWeight::make_bump(0.08, 2).unwrap();
        for &x_scale in &[400.0, 10_000.0] {
            let fam = WeightFamily::new(x_scale, vec![0.3], w.clone()).unwrap();
            let xi = enumerate_xi(&fam, &scheme, 0);
            let (ax, bx) = fam.support(0);
            for x in (ax.floor() as u64)..=(bx.ceil() as u64) {
                let psi_x = fam.psi(0, x as f64);
                let mut acc = Kahan::new();
                for pair in &xi {
                    sieve.for_each_divisor(x, |m| {
                        let n = x / m;
                        let w = sieve.moebius(m) as f64
                            * scheme.partition_weight_exp(pair.m_exp, m as f64)
                            * (n as f64).ln()
                            * scheme.partition_weight_exp(pair.n_exp, n as f64);
                        acc.add(w * psi_x);
                    });
                }
                let expect = sieve.von_mangoldt(x) * psi_x;
                let err = (acc.value() - expect).abs();
                let scale = expect.abs().max(1.0);
                assert!(err / scale <= 1e-6, "x={x}: got {} want {expect}", acc.value());
            }
        }
    }
}
