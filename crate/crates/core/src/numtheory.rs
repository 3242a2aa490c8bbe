//! Elementary arithmetic functions: gcd, modular inverses, and a linear
//! sieve producing the Möbius function, Euler's totient and smallest prime
//! factors in one pass.

use crate::error::{invalid, Error, Result};

/// Largest sieve the library builds unless told otherwise (~1.4 GB of tables
/// would be needed at 10^8, so this is the practical ceiling).
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

/// Greatest common divisor, insensitive to sign. `gcd(0, 0) == 0`.
pub fn gcd(a: i64, b: i64) -> u64 {
    gcd_u64(a.unsigned_abs(), b.unsigned_abs())
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// The unique `x` in `[1, q]` with `a * x ≡ 1 (mod q)`.
///
/// The range is `[1, q]` rather than `[0, q)`, so `mod_inverse(a, 1) == 1`;
/// Farey neighbour formulas rely on that convention.
pub fn mod_inverse(a: i64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(invalid("modulus must be positive"));
    }
    if q == 1 {
        return Ok(1);
    }
    let m = q as i128;
    let (mut old_r, mut r) = ((a as i128).rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotCoprime { value: a, modulus: q });
    }
    let inv = old_s.rem_euclid(m) as u64;
    Ok(if inv == 0 { q } else { inv })
}

/// Möbius function, totient and smallest prime factor for `1..=limit`.
#[derive(Debug, Clone)]
pub struct SieveTable {
    limit: u32,
    mu: Vec<i8>,
    phi: Vec<u32>,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

/// Builds the table with the default cap.
pub fn sieve(limit: u64) -> Result<SieveTable> {
    sieve_with_cap(limit, DEFAULT_SIEVE_CAP)
}

pub fn sieve_with_cap(limit: u64, cap: u64) -> Result<SieveTable> {
    if limit == 0 {
        return Err(invalid("sieve limit must be at least 1"));
    }
    if limit > cap || limit > u32::MAX as u64 {
        return Err(Error::ResourceLimit {
            what: "sieve",
            requested: limit,
            cap: cap.min(u32::MAX as u64),
        });
    }
    let n = limit as usize;
    let mut mu = vec![0i8; n + 1];
    let mut phi = vec![0u32; n + 1];
    let mut spf = vec![0u32; n + 1];
    let mut primes = Vec::new();
    mu[1] = 1;
    phi[1] = 1;
    spf[1] = 1;
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
            mu[i] = -1;
            phi[i] = i as u32 - 1;
        }
        for &p in &primes {
            let p = p as usize;
            let m = i * p;
            if p > spf[i] as usize || m > n {
                break;
            }
            spf[m] = p as u32;
            if p == spf[i] as usize {
                mu[m] = 0;
                phi[m] = phi[i] * p as u32;
            } else {
                mu[m] = -mu[i];
                phi[m] = phi[i] * (p as u32 - 1);
            }
        }
    }
    Ok(SieveTable {
        limit: limit as u32,
        mu,
        phi,
        spf,
        primes,
    })
}

impl SieveTable {
    pub fn limit(&self) -> u64 {
        self.limit as u64
    }

    /// μ(n) for `1 <= n <= limit`.
    pub fn mu(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.limit as u64, "mu({n}) outside sieve");
        self.mu[n as usize]
    }

    /// φ(n) for `1 <= n <= limit`.
    pub fn phi(&self, n: u64) -> u64 {
        assert!(n >= 1 && n <= self.limit as u64, "phi({n}) outside sieve");
        self.phi[n as usize] as u64
    }

    /// μ(1..=limit) as a slice starting at n = 1.
    pub fn mu_values(&self) -> &[i8] {
        &self.mu[1..]
    }

    /// φ(1..=limit) as a slice starting at n = 1.
    pub fn phi_values(&self) -> &[u32] {
        &self.phi[1..]
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u32 {
        self.spf[n as usize]
    }

    /// Prime factorisation of `n` as `(prime, exponent)` pairs in increasing
    /// prime order.
    pub fn factorize(&self, n: u64) -> Vec<(u32, u32)> {
        assert!(n >= 1 && n <= self.limit as u64);
        let mut out: Vec<(u32, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m];
            m /= p as usize;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}
