//! Elementary integer arithmetic shared by the field and group modules.

use num_integer::Integer;

/// Greatest common divisor.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Least common multiple.
pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Prime factorisation by trial division, primes ascending.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Distinct prime divisors, ascending.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// Product of the distinct primes dividing `n`.
pub fn radical(n: u64) -> u64 {
    prime_divisors(n).into_iter().product()
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor(n) == vec![(n, 1)]
}

/// Returns `(p, r)` when `q = p^r` with `p` prime and `r >= 1`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    match factor(q).as_slice() {
        [(p, r)] => Some((*p, *r)),
        _ => None,
    }
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .fold(1, |acc, (p, e)| acc * (p - 1) * p.pow(e - 1))
}

/// Möbius function.
pub fn mobius(n: u64) -> i32 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n) {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

/// Reduces `k` into the canonical residue range for modulus `n`.
///
/// Residues modulo 1 are written as `1` so that the trivial unit group is `[1]`.
pub fn residue(k: i64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    k.rem_euclid(n as i64) as u64
}

pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    let mut acc = 1u64;
    b %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, n);
        }
        b = mul_mod(b, b, n);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `n`, if it exists.
pub fn inv_mod(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(1);
    }
    let e = (a as i128).extended_gcd(&(n as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(n as i128) as u64)
}

/// The unit group `(Z/n)^x` as sorted residues (`[1]` for `n = 1`).
pub fn units(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![1];
    }
    (1..n).filter(|&k| gcd(k, n) == 1).collect()
}

/// Multiplicative order of `a` modulo `n`; `None` if `a` is not a unit.
pub fn multiplicative_order(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(1);
    }
    if gcd(a % n, n) != 1 {
        return None;
    }
    let mut x = a % n;
    let mut r = 1;
    while x != 1 {
        x = mul_mod(x, a, n);
        r += 1;
    }
    Some(r)
}

/// Kronecker symbol `(d / n)` for `n >= 1`.
pub fn kronecker(d: i64, n: u64) -> i32 {
    let mut n = n;
    let mut result = 1i32;
    let a = d;
    while n % 2 == 0 {
        n /= 2;
        match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => return 0,
            1 | 7 => {}
            _ => result = -result,
        }
    }
    // Jacobi symbol (a / n) for odd n.
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut m = n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if m % 8 == 3 || m % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

/// Squarefree kernel with sign: the squarefree integer in the class of `d` modulo squares.
pub fn squarefree_part(d: i64) -> i64 {
    let sign = d.signum();
    let mut out = 1i64;
    for (p, e) in factor(d.unsigned_abs()) {
        if e % 2 == 1 {
            out *= p as i64;
        }
    }
    sign * out
}

/// Discriminant of `Q(sqrt(d))` for squarefree `d != 1`.
pub fn quadratic_discriminant(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totient_and_mobius_small_values() {
        let phis: Vec<u64> = (1..=12).map(euler_phi).collect();
        assert_eq!(phis, vec![1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]);
        let mus: Vec<i32> = (1..=10).map(mobius).collect();
        assert_eq!(mus, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn kronecker_matches_euler_criterion_for_odd_primes() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            for d in -30i64..30 {
                let e = pow_mod(d.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
                let expect = if e == 0 {
                    0
                } else if e == 1 {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(d, p), expect, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_at_two() {
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(8, 2), 0);
    }

    #[test]
    fn divisors_are_sorted_and_complete() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(13), Some((13, 1)));
    }
}
