//! Smallest-prime-factor sieve and the arithmetic functions built on it.

use crate::error::{Error, Result};

/// Smallest-prime-factor table up to a limit, with `Λ`, `Λ*`, `μ`, `φ` and
/// divisor enumeration derived from it. Built once, then shared read-only.
#[derive(Debug, Clone)]
pub struct SieveTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SieveTable {
    /// Builds the table; errors out instead of attempting an allocation that
    /// would not fit the memory budget (~4 bytes per integer).
    pub fn build(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidParameter("sieve limit must be ≥ 2".into()));
        }
        const MAX_LIMIT: u64 = 2_000_000_000;
        if limit > MAX_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "sieve limit {limit} exceeds the {MAX_LIMIT} memory budget"
            )));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let ip = i * p as usize;
                if p > spf[i] || ip > n {
                    break;
                }
                spf[ip] = p;
            }
        }
        Ok(SieveTable { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, x: u64) -> bool {
        x >= 2 && self.spf[x as usize] as u64 == x
    }

    /// Smallest prime factor; panics on `x < 2` or beyond the table.
    pub fn smallest_prime_factor(&self, x: u64) -> u64 {
        assert!(x >= 2 && x <= self.limit, "spf({x}) out of range");
        self.spf[x as usize] as u64
    }

    /// Ascending primes `≤ x`.
    pub fn primes(&self, x: u64) -> Vec<u64> {
        let top = x.min(self.limit);
        (2..=top).filter(|&v| self.is_prime(v)).collect()
    }

    /// `(p, k)` factorization.
    pub fn factorize(&self, mut x: u64) -> Vec<(u64, u32)> {
        assert!(x >= 1 && x <= self.limit);
        let mut out = Vec::new();
        while x > 1 {
            let p = self.spf[x as usize] as u64;
            let mut k = 0;
            while x % p == 0 {
                x /= p;
                k += 1;
            }
            out.push((p, k));
        }
        out
    }

    /// `Λ(x)`: `log p` at prime powers `p^k`, else 0.
    pub fn von_mangoldt(&self, x: u64) -> f64 {
        if x < 2 {
            return 0.0;
        }
        let p = self.spf[x as usize] as u64;
        let mut v = x;
        while v % p == 0 {
            v /= p;
        }
        if v == 1 {
            (p as f64).ln()
        } else {
            0.0
        }
    }

    /// `Λ*(x)`: `log x` at primes, else 0.
    pub fn lambda_star(&self, x: u64) -> f64 {
        if self.is_prime(x) {
            (x as f64).ln()
        } else {
            0.0
        }
    }

    pub fn moebius(&self, x: u64) -> i32 {
        assert!(x >= 1 && x <= self.limit);
        let mut v = x;
        let mut sign = 1;
        while v > 1 {
            let p = self.spf[v as usize] as u64;
            v /= p;
            if v % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        sign
    }

    pub fn euler_phi(&self, x: u64) -> u64 {
        assert!(x >= 1 && x <= self.limit);
        let mut v = x;
        let mut phi = 1u64;
        while v > 1 {
            let p = self.spf[v as usize] as u64;
            let mut pk = 1;
            while v % p == 0 {
                v /= p;
                pk *= p;
            }
            phi *= pk - pk / p;
        }
        phi
    }

    /// Calls `visit` on every divisor of `x` (unordered).
    pub fn for_each_divisor(&self, x: u64, mut visit: impl FnMut(u64)) {
        let factors = self.factorize(x);
        let mut stack = vec![(1u64, 0usize)];
        while let Some((d, i)) = stack.pop() {
            if i == factors.len() {
                visit(d);
            } else {
                let (p, k) = factors[i];
                let mut pd = d;
                for _ in 0..=k {
                    stack.push((pd, i + 1));
                    pd *= p;
                }
            }
        }
    }
}

/// Euler's totient without a table (used for moduli beyond the sieve).
pub fn euler_phi_u64(mut q: u64) -> u64 {
    let mut phi = 1u64;
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            let mut pk = 1;
            while q % p == 0 {
                q /= p;
                pk *= p;
            }
            phi *= pk - pk / p;
        }
        p += 1;
    }
    if q > 1 {
        phi *= q - 1;
    }
    phi
}
