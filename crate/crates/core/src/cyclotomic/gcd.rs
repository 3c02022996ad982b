//! gcd in ℤ[x] by the subresultant pseudo-remainder sequence.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::MaskPolynomial;

fn trim(v: &mut Vec<BigInt>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

fn primitive_part(v: &[BigInt]) -> Vec<BigInt> {
    let c = content(v);
    if c.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &c).collect()
}

/// `lc(b)^{deg a - deg b + 1} · a mod b`.
fn pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lb = b[db].clone();
    let mut r = a.to_vec();
    let mut pending = a.len() - b.len() + 1;
    while !r.is_empty() && r.len() >= b.len() {
        let lr = r[r.len() - 1].clone();
        let shift = r.len() - 1 - db;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &lr * bc;
        }
        r.pop();
        trim(&mut r);
        pending -= 1;
    }
    let f = num_traits::pow(lb, pending);
    r.iter().map(|c| c * &f).collect()
}

/// Greatest common divisor in ℤ[x], normalized to a positive leading coefficient.
pub fn poly_gcd(f: &MaskPolynomial, g: &MaskPolynomial) -> MaskPolynomial {
    let mut a = f.to_dense();
    let mut b = g.to_dense();
    trim(&mut a);
    trim(&mut b);
    if a.is_empty() {
        return normalize(b);
    }
    if b.is_empty() {
        return normalize(a);
    }
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    let d = content(&a).gcd(&content(&b));
    a = primitive_part(&a);
    b = primitive_part(&b);
    let mut g_s = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = (a.len() - b.len()) as u32;
        let r = pseudo_remainder(&a, &b);
        if r.is_empty() {
            break;
        }
        if r.len() == 1 {
            b = vec![BigInt::one()];
            break;
        }
        let denom = &g_s * num_traits::pow(h.clone(), delta as usize);
        a = b;
        b = r.iter().map(|c| c / &denom).collect();
        g_s = a[a.len() - 1].clone();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g_s.clone(), delta as usize) / num_traits::pow(h.clone(), delta as usize - 1)
        };
    }
    let out: Vec<BigInt> = primitive_part(&b).into_iter().map(|c| c * &d).collect();
    normalize(out)
}

fn normalize(mut v: Vec<BigInt>) -> MaskPolynomial {
    trim(&mut v);
    if v.last().is_some_and(|c| c.is_negative()) {
        for c in v.iter_mut() {
            *c = -c.clone();
        }
    }
    MaskPolynomial::from_dense(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> MaskPolynomial {
        MaskPolynomial::from_coeffs(c)
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(poly_gcd(&p(&[1, 0, 1]), &p(&[1, 0, 0, 0, 0, 0, 1])), p(&[1, 0, 1]));
        assert_eq!(poly_gcd(&p(&[1, 1]), &p(&[1, 0, 1])), p(&[1]));
        assert_eq!(poly_gcd(&p(&[2, 2]), &p(&[4, 0, -4])), p(&[2, 2]));
        assert_eq!(poly_gcd(&MaskPolynomial::zero(), &p(&[-1, -1])), p(&[1, 1]));
    }

    #[test]
    fn gcd_of_products() {
        let common = p(&[-1, 1, 1]);
        let a = common.mul(&p(&[1, 1, 1])).mul(&p(&[3, 0, 1]));
        let b = common.mul(&p(&[1, 0, 0, 1])).mul(&p(&[5, 2]));
        assert_eq!(poly_gcd(&a, &b), common);
        // Knuth's example: coprime, large intermediate coefficients
        let k1 = p(&[-5, 2, 8, -3, -3, 0, 1, 0, 1]);
        let k2 = p(&[21, -9, -4, 0, 5, 0, 3]);
        assert_eq!(poly_gcd(&k1, &k2), p(&[1]));
    }
}
