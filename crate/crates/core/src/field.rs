//! Finite fields GF(q) for the small prime powers used to coordinatize PG(2,q).
//!
//! Elements are the integers `0..q`. For q = p^k with k >= 2 an element is the
//! base-p encoding of its coefficient vector over GF(p), least significant
//! coefficient first, so `x` in GF(p^k) is the element `p`.

use thiserror::Error;

/// Field element, an integer in `0..q`.
pub type Elem = u32;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 27;

/// Monic irreducible moduli (Conway polynomials), coefficients low to high.
const MODULI: &[(u32, &[u32])] = &[
    (4, &[1, 1, 1]),
    (8, &[1, 1, 0, 1]),
    (9, &[2, 2, 1]),
    (16, &[1, 1, 0, 0, 1]),
    (25, &[2, 4, 1]),
    (27, &[1, 2, 0, 1]),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("field order {0} is not supported (built-in orders: primes and 4, 8, 9, 16, 25, 27 up to {MAX_ORDER})")]
    UnsupportedOrder(u32),
    #[error("division by zero")]
    DivisionByZero,
}

/// GF(q) with precomputed operation tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    q: u32,
    p: u32,
    k: u32,
    modulus: Vec<u32>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
}

/// Splits `q` into `(p, k)` with `q = p^k`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut rest, mut k) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

impl Field {
    pub fn new(q: u32) -> Result<Self, FieldError> {
        let (p, k) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        if q > MAX_ORDER {
            return Err(FieldError::UnsupportedOrder(q));
        }
        let modulus = if k == 1 {
            Vec::new()
        } else {
            MODULI
                .iter()
                .find(|(order, _)| *order == q)
                .map(|(_, m)| m.to_vec())
                .ok_or(FieldError::UnsupportedOrder(q))?
        };

        let n = q as usize;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for a in 0..q {
            let da = digits(a, p, k);
            for b in 0..q {
                let db = digits(b, p, k);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = undigits(&sum, p);
                mul[(a * q + b) as usize] =
                    if k == 1 { (a * b) % p } else { undigits(&poly_mulmod(&da, &db, &modulus, p), p) };
            }
        }

        let mut neg = vec![0; n];
        let mut inv = vec![0; n];
        for a in 0..q {
            neg[a as usize] = (0..q).find(|&b| add[(a * q + b) as usize] == 0).unwrap_or(0);
            if a != 0 {
                // a missing inverse means the modulus is reducible; the table test catches it
                inv[a as usize] = (1..q).find(|&b| mul[(a * q + b) as usize] == 1).unwrap_or(0);
            }
        }

        Ok(Field { q, p, k, modulus, add, mul, neg, inv })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    /// Coefficients of the defining polynomial, low to high. Empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[(a * self.q + b) as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[(a * self.q + b) as usize]
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.inv[a as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }
}

fn digits(mut a: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Product of two polynomials of degree < k reduced modulo a monic degree-k modulus.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = a.len();
    let mut prod = vec![0u32; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (k..2 * k).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        // x^deg = -(m_0 + ... + m_{k-1} x^{k-1}) x^{deg-k}
        for (i, &m) in modulus[..k].iter().enumerate() {
            let t = deg - k + i;
            prod[t] = (prod[t] + (p - c) * m % p) % p;
        }
        prod[deg] = 0;
    }
    prod.truncate(k);
    prod
}
