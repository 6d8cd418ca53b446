//! Arithmetic in GF(p^e).
//!
//! Elements are integer codes: the base-p digits of a code are the
//! coefficients of a polynomial in the generator of the polynomial basis,
//! constant term least significant. Code 0 is zero and code 1 is one.
//!
//! Multiplication and addition go through log/antilog and Zech tables built
//! once at construction, using direct polynomial arithmetic modulo the
//! defining polynomial to fill them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

const ZECH_NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{e} exceeds 2^16")]
    TooLarge { p: u32, e: u32 },
    #[error("malformed modulus: {0}")]
    MalformedModulus(String),
    #[error("modulus {modulus:?} is reducible over GF({p})")]
    ReducibleModulus { modulus: Vec<u32>, p: u32 },
    #[error("element code {code} out of range for GF({q})")]
    OutOfRange { code: u32, q: u32 },
    #[error("inverse of zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    MixedFields,
}

/// Serializable field description: `{p, e, modulus: [c0, ..., ce]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub e: u32,
    pub modulus: Vec<u32>,
}

/// A validated finite field GF(p^e) together with its lookup tables.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    generator: u32,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Writes q as p^e, if possible.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut rest, mut e) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m` over GF(p).
/// Coefficient vectors are constant term first.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let dm = m.len() - 1;
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let p64 = p as u64;
    if r.len() <= dm {
        return a.to_vec();
    }
    for i in (dm..r.len()).rev() {
        let c = r[i] % p64;
        if c == 0 {
            continue;
        }
        for (j, &mj) in m.iter().enumerate() {
            let idx = i - dm + j;
            r[idx] = (r[idx] + p64 * p64 - c * mj as u64) % p64;
        }
    }
    r.truncate(dm);
    r.into_iter().map(|c| (c % p64) as u32).collect()
}

/// Irreducibility by exhaustive trial division with every monic polynomial of
/// degree 1..=deg/2.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg <= 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut f = digits(code, p, d);
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn digits(mut code: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((code % p as u64) as u32);
        code /= p as u64;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

impl FieldSpec {
    /// Builds GF(p^e). Without an explicit modulus the irreducible monic
    /// polynomial with the smallest encoding of (c0, ..., c_{e-1}) is used.
    pub fn new(p: u32, e: u32, modulus: Option<&[u32]>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q64 = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
        if q64 > MAX_ORDER {
            return Err(FieldError::TooLarge { p, e });
        }
        let modulus = match modulus {
            Some(m) => {
                if m.len() != e as usize + 1 {
                    return Err(FieldError::MalformedModulus(format!(
                        "expected {} coefficients, got {}",
                        e + 1,
                        m.len()
                    )));
                }
                if m[e as usize] != 1 {
                    return Err(FieldError::MalformedModulus("not monic".into()));
                }
                if let Some(&c) = m.iter().find(|&&c| c >= p) {
                    return Err(FieldError::MalformedModulus(format!(
                        "coefficient {c} not reduced mod {p}"
                    )));
                }
                if !is_irreducible(m, p) {
                    return Err(FieldError::ReducibleModulus {
                        modulus: m.to_vec(),
                        p,
                    });
                }
                m.to_vec()
            }
            None => {
                let mut found = None;
                for code in 0..q64 {
                    let mut m = digits(code, p, e as usize);
                    m.push(1);
                    if is_irreducible(&m, p) {
                        found = Some(m);
                        break;
                    }
                }
                // an irreducible polynomial of every degree exists
                found.expect("irreducible polynomial exists")
            }
        };
        Ok(Self::with_tables(p, e, q64 as u32, modulus))
    }

    /// Description form used in data files.
    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Self, FieldError> {
        Self::new(d.p, d.e, Some(&d.modulus))
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.p,
            e: self.e,
            modulus: self.modulus.clone(),
        }
    }

    fn with_tables(p: u32, e: u32, q: u32, modulus: Vec<u32>) -> Self {
        let mut f = FieldSpec {
            p,
            e,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            zech: Vec::new(),
            generator: 1,
        };
        let order = q - 1;
        let factors = prime_factors(order);
        let generator = if q == 2 {
            1
        } else {
            (2..q)
                .find(|&g| {
                    factors
                        .iter()
                        .all(|&l| f.poly_pow(g, (order / l) as u64) != 1)
                })
                .expect("multiplicative group is cyclic")
        };
        f.generator = generator;

        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..order as usize {
            exp[i] = x;
            exp[i + order as usize] = x;
            log[x as usize] = i as u32;
            x = f.poly_mul(x, generator);
        }
        let mut zech = vec![ZECH_NONE; order as usize];
        for (n, z) in zech.iter_mut().enumerate() {
            let v = f.digit_add(1, exp[n]);
            if v != 0 {
                *z = log[v as usize];
            }
        }
        f.exp = exp;
        f.log = log;
        f.zech = zech;
        f
    }

    fn digit_add(&self, a: u32, b: u32) -> u32 {
        let da = digits(a as u64, self.p, self.e as usize);
        let db = digits(b as u64, self.p, self.e as usize);
        let s: Vec<u32> = da
            .iter()
            .zip(&db)
            .map(|(&x, &y)| (x + y) % self.p)
            .collect();
        undigits(&s, self.p)
    }

    /// Multiplication by schoolbook product and reduction. Used to build the
    /// tables; also serves as an independent reference in tests.
    pub fn poly_mul(&self, a: u32, b: u32) -> u32 {
        let e = self.e as usize;
        let da = digits(a as u64, self.p, e);
        let db = digits(b as u64, self.p, e);
        let mut prod = vec![0u32; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % self.p as u64) as u32;
            }
        }
        let r = poly_rem(&prod, &self.modulus, self.p);
        let mut r = r;
        r.resize(e, 0);
        undigits(&r, self.p)
    }

    fn poly_pow(&self, a: u32, mut n: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.poly_mul(acc, base);
            }
            base = self.poly_mul(base, base);
            n >>= 1;
        }
        acc
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// Field order p^e.
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The primitive element used for the log tables.
    pub fn generator(&self) -> u32 {
        self.generator
    }

    pub fn element(&self, code: u32) -> Result<FieldElement<'_>, FieldError> {
        if code >= self.q {
            return Err(FieldError::OutOfRange { code, q: self.q });
        }
        Ok(FieldElement { field: self, code })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let (la, lb) = (self.log[a as usize], self.log[b as usize]);
        let (lo, hi) = if la <= lb { (la, lb) } else { (lb, la) };
        let z = self.zech[(hi - lo) as usize];
        if z == ZECH_NONE {
            0
        } else {
            self.exp[(lo + z) as usize]
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 || a == 0 {
            return a;
        }
        self.exp[(self.log[a as usize] + (self.q - 1) / 2) as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Inverse of a nonzero element. Panics on zero; see [`FieldSpec::try_inv`].
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let order = self.q - 1;
        self.exp[((order - self.log[a as usize]) % order) as usize]
    }

    pub fn try_inv(&self, a: u32) -> Result<u32, FieldError> {
        if a == 0 {
            Err(FieldError::DivisionByZero)
        } else {
            Ok(self.inv(a))
        }
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, FieldError> {
        Ok(self.mul(a, self.try_inv(b)?))
    }

    pub fn pow(&self, a: u32, n: u64) -> u32 {
        if n == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.q - 1) as u64;
        let l = (self.log[a as usize] as u64 * (n % order)) % order;
        self.exp[l as usize]
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u32) -> u32 {
        assert!(a != 0);
        let order = self.q - 1;
        let l = self.log[a as usize];
        order / gcd(order, l)
    }

    /// Base-p coefficient digits of an element, constant term first.
    pub fn coefficients(&self, a: u32) -> Vec<u32> {
        digits(a as u64, self.p, self.e as usize)
    }

    /// Dot product of two vectors under the standard bilinear form.
    #[inline]
    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Binary field operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// An element tied to its field, for checked arithmetic at API boundaries.
#[derive(Clone, Copy)]
pub struct FieldElement<'f> {
    field: &'f FieldSpec,
    code: u32,
}

impl fmt::Debug for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.code, self.field)
    }
}

impl PartialEq for FieldElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code && self.field == other.field
    }
}

impl<'f> FieldElement<'f> {
    pub fn code(&self) -> u32 {
        self.code
    }

    pub fn field(&self) -> &'f FieldSpec {
        self.field
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        Ok(FieldElement {
            field: self.field,
            code: self.field.try_inv(self.code)?,
        })
    }

    pub fn apply(self, op: ArithOp, rhs: Self) -> Result<Self, FieldError> {
        field_arith(self, rhs, op)
    }
}

/// Checked binary arithmetic; fails on mixed fields and division by zero.
impl std::ops::Neg for FieldElement<'_> {
    type Output = Self;

    fn neg(self) -> Self {
        FieldElement {
            field: self.field,
            code: self.field.neg(self.code),
        }
    }
}

pub fn field_arith<'f>(
    a: FieldElement<'f>,
    b: FieldElement<'f>,
    op: ArithOp,
) -> Result<FieldElement<'f>, FieldError> {
    if !std::ptr::eq(a.field, b.field) && a.field != b.field {
        return Err(FieldError::MixedFields);
    }
    let f = a.field;
    let code = match op {
        ArithOp::Add => f.add(a.code, b.code),
        ArithOp::Sub => f.sub(a.code, b.code),
        ArithOp::Mul => f.mul(a.code, b.code),
        ArithOp::Div => f.div(a.code, b.code)?,
    };
    Ok(FieldElement { field: f, code })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_has_linear_modulus() {
        let f = FieldSpec::new(2, 1, None).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.q(), 2);
        let f7 = FieldSpec::new(7, 1, None).unwrap();
        assert_eq!(f7.mul(3, 5), 1);
        assert_eq!(f7.add(4, 5), 2);
        assert_eq!(f7.neg(3), 4);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn gf8_default_modulus() {
        let f = FieldSpec::new(2, 3, None).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 0, 1]);
    }

    #[test]
    fn reducible_modulus_rejected() {
        let err = FieldSpec::new(2, 3, Some(&[1, 0, 0, 1])).unwrap_err();
        assert!(matches!(err, FieldError::ReducibleModulus { .. }));
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(
            FieldSpec::new(4, 1, None).unwrap_err(),
            FieldError::NotPrime(4)
        );
        assert_eq!(
            FieldSpec::new(2, 0, None).unwrap_err(),
            FieldError::ZeroDegree
        );
        assert!(matches!(
            FieldSpec::new(2, 3, Some(&[1, 1, 0, 2])),
            Err(FieldError::MalformedModulus(_))
        ));
        assert!(matches!(
            FieldSpec::new(2, 3, Some(&[1, 1, 1])),
            Err(FieldError::MalformedModulus(_))
        ));
        assert!(matches!(
            FieldSpec::new(2, 17, None),
            Err(FieldError::TooLarge { .. })
        ));
    }

    #[test]
    fn gf8_products() {
        let f = FieldSpec::new(2, 3, None).unwrap();
        assert_eq!(f.mul(2, 2), 4);
        assert_eq!(f.mul(4, 2), 3);
        assert_eq!(f.inv(2), 5);
        for x in 0..8 {
            assert_eq!(f.add(x, 0), x);
        }
    }

    #[test]
    fn checked_elements() {
        let f = FieldSpec::new(2, 3, None).unwrap();
        let g = FieldSpec::new(3, 2, None).unwrap();
        let a = f.element(2).unwrap();
        let b = f.element(4).unwrap();
        assert_eq!(field_arith(a, b, ArithOp::Mul).unwrap().code(), 3);
        assert_eq!(a.inv().unwrap().code(), 5);
        assert_eq!(
            f.element(0).unwrap().inv().unwrap_err(),
            FieldError::DivisionByZero
        );
        assert_eq!(
            field_arith(a, f.element(0).unwrap(), ArithOp::Div).unwrap_err(),
            FieldError::DivisionByZero
        );
        let c = g.element(2).unwrap();
        assert_eq!(
            field_arith(a, c, ArithOp::Add).unwrap_err(),
            FieldError::MixedFields
        );
        assert!(matches!(f.element(8), Err(FieldError::OutOfRange { .. })));
    }

    #[test]
    fn tables_agree_with_polynomial_product() {
        for (p, e) in [(2, 4), (3, 2), (5, 2), (3, 3)] {
            let f = FieldSpec::new(p, e, None).unwrap();
            for a in 0..f.q() {
                for b in 0..f.q() {
                    assert_eq!(f.mul(a, b), f.poly_mul(a, b));
                    assert_eq!(f.add(a, b), f.digit_add(a, b));
                }
            }
        }
    }

    #[test]
    fn large_field_builds() {
        let f = FieldSpec::new(2, 16, None).unwrap();
        assert_eq!(f.order(f.generator()), 65535);
        let x = 12345;
        assert_eq!(f.mul(x, f.inv(x)), 1);
    }
}
