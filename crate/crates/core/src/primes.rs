//! Prime sieves, factorization and Chebyshev θ.

use std::sync::OnceLock;

/// Primes below this bound are kept in a shared table.
pub const CACHE_LIMIT: u64 = 20_000_000;

static CACHE: OnceLock<Vec<u32>> = OnceLock::new();

fn cache() -> &'static [u32] {
    CACHE.get_or_init(|| sieve(CACHE_LIMIT).into_iter().map(|p| p as u32).collect())
}

/// Plain sieve of Eratosthenes; all primes `<= n`.
pub fn sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    let mut i = 2;
    while i * i <= n {
        if !comp[i] {
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    for (k, c) in comp.iter().enumerate().skip(2) {
        if !c {
            out.push(k as u64);
        }
    }
    out
}

/// All primes `p` with `lo <= p <= hi`.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    let mut v = Vec::new();
    for_each_prime(lo, hi, |p| v.push(p));
    v
}

/// All primes `<= n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    primes_between(2, n)
}

/// Number of primes `<= n` (cached range only).
pub fn prime_pi_cached(n: u64) -> Option<usize> {
    if n > CACHE_LIMIT {
        return None;
    }
    let c = cache();
    Some(c.partition_point(|&p| (p as u64) <= n))
}

/// Streams primes in `[lo, hi]` in increasing order through a segmented sieve.
pub fn for_each_prime<F: FnMut(u64)>(lo: u64, hi: u64, mut f: F) {
    let lo = lo.max(2);
    if hi < lo {
        return;
    }
    if hi <= CACHE_LIMIT {
        let c = cache();
        let start = c.partition_point(|&p| (p as u64) < lo);
        for &p in &c[start..] {
            if p as u64 > hi {
                break;
            }
            f(p as u64);
        }
        return;
    }
    let root = (hi as f64).sqrt() as u64 + 2;
    let base = primes_up_to(root);
    const SEG: u64 = 1 << 20;
    let mut seg_lo = lo;
    let mut mark = vec![false; SEG as usize];
    while seg_lo <= hi {
        let seg_hi = (seg_lo + SEG - 1).min(hi);
        let len = (seg_hi - seg_lo + 1) as usize;
        mark[..len].iter_mut().for_each(|m| *m = false);
        for &p in &base {
            if p * p > seg_hi {
                break;
            }
            let mut start = seg_lo.div_ceil(p) * p;
            if start < p * p {
                start = p * p;
            }
            let mut j = start;
            while j <= seg_hi {
                mark[(j - seg_lo) as usize] = true;
                j += p;
            }
        }
        for (i, m) in mark[..len].iter().enumerate() {
            if !m {
                let v = seg_lo + i as u64;
                if v >= 2 {
                    f(v);
                }
            }
        }
        seg_lo = seg_hi + 1;
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, smallest prime first.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while *n % p == 0 {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5;
    while p * p <= n {
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Smallest-prime-factor table for `0..=n` (entries 0 and 1 are 0).
pub fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let m = i * p as usize;
            if p > spf[i] || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    spf
}

/// Smallest prime `M` with `θ(M) = Σ_{p ≤ M} log p > target`, by streaming
/// the primes. `None` when the scan would pass `limit`.
pub fn theta_first_exceeding(target: f64, limit: u64) -> Option<(u64, f64)> {
    let mut acc = crate::numeric::KahanSum::new();
    let mut found = None;
    let mut lo = 2u64;
    let mut width = 1u64 << 16;
    while lo <= limit && found.is_none() {
        let hi = (lo + width).min(limit);
        for_each_prime(lo, hi, |p| {
            if found.is_none() {
                acc.add((p as f64).ln());
                if acc.value() > target {
                    found = Some((p, acc.value()));
                }
            }
        });
        lo = hi + 1;
        width = (width * 2).min(1 << 26);
    }
    found
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
