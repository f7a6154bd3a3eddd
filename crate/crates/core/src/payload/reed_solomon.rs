//! Systematic Reed–Solomon over GF(2⁸).
//!
//! Field polynomial x⁸+x⁴+x³+x²+1 (0x11D), primitive element α = 2, generator
//! roots α⁰..α^(t−1). Codewords are stored highest-degree coefficient first, so
//! a systematic codeword is `data ‖ parity` and shortened codes (n < 255) need
//! no padding.

use crate::error::{Error, Result};

const PRIMITIVE: u16 = 0x11D;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn build_tables() -> Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= PRIMITIVE;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Tables { exp, log }
}

static GF: Tables = build_tables();

#[inline]
fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        0
    } else {
        GF.exp[GF.log[a as usize] as usize + GF.log[b as usize] as usize]
    }
}

#[inline]
fn div(a: u8, b: u8) -> u8 {
    debug_assert!(b != 0);
    if a == 0 {
        0
    } else {
        GF.exp[GF.log[a as usize] as usize + 255 - GF.log[b as usize] as usize]
    }
}

#[inline]
fn pow_alpha(e: usize) -> u8 {
    GF.exp[e % 255]
}

#[inline]
fn inv(a: u8) -> u8 {
    div(1, a)
}

/// Evaluates a highest-degree-first polynomial at `x`.
fn eval_be(poly: &[u8], x: u8) -> u8 {
    poly.iter().fold(0, |acc, &c| mul(acc, x) ^ c)
}

/// Evaluates a lowest-degree-first polynomial at `x`.
fn eval_le(poly: &[u8], x: u8) -> u8 {
    poly.iter().rev().fold(0, |acc, &c| mul(acc, x) ^ c)
}

/// Outcome of a successful decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub data: Vec<u8>,
    pub corrections: usize,
}

/// A Reed–Solomon code with a fixed number of parity symbols.
#[derive(Debug, Clone)]
pub struct ReedSolomon {
    parity: usize,
    // Monic generator, highest degree first; generator[0] == 1.
    generator: Vec<u8>,
}

impl ReedSolomon {
    pub fn new(parity: usize) -> Self {
        let mut generator = vec![1u8];
        for i in 0..parity {
            // multiply by (x - α^i)
            let root = pow_alpha(i);
            let mut next = vec![0u8; generator.len() + 1];
            for (j, &g) in generator.iter().enumerate() {
                next[j] ^= g;
                next[j + 1] ^= mul(g, root);
            }
            generator = next;
        }
        ReedSolomon { parity, generator }
    }

    pub fn parity(&self) -> usize {
        self.parity
    }

    /// Returns `data ‖ parity`.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<u8>> {
        if data.len() + self.parity > 255 {
            return Err(Error::PayloadTooLong {
                payload: data.len(),
                parity: self.parity,
            });
        }
        let mut out = Vec::with_capacity(data.len() + self.parity);
        out.extend_from_slice(data);
        if self.parity == 0 {
            return Ok(out);
        }
        // Polynomial long division of data·x^t by the generator.
        let mut rem = vec![0u8; self.parity];
        for &byte in data {
            let coef = byte ^ rem[0];
            rem.rotate_left(1);
            rem[self.parity - 1] = 0;
            if coef != 0 {
                for (r, &g) in rem.iter_mut().zip(&self.generator[1..]) {
                    *r ^= mul(g, coef);
                }
            }
        }
        out.extend_from_slice(&rem);
        Ok(out)
    }

    fn syndromes(&self, codeword: &[u8]) -> Vec<u8> {
        (0..self.parity)
            .map(|j| eval_be(codeword, pow_alpha(j)))
            .collect()
    }

    /// Corrects up to ⌊t/2⌋ symbol errors and strips the parity.
    pub fn decode(&self, codeword: &[u8]) -> Result<Decoded> {
        let n = codeword.len();
        if n > 255 || n <= self.parity {
            return Err(Error::RsDecodeFailure);
        }
        let k = n - self.parity;
        let synd = self.syndromes(codeword);
        if synd.iter().all(|&s| s == 0) {
            return Ok(Decoded {
                data: codeword[..k].to_vec(),
                corrections: 0,
            });
        }

        let locator = berlekamp_massey(&synd);
        let errors = locator.len() - 1;
        if 2 * errors > self.parity {
            return Err(Error::RsDecodeFailure);
        }

        // Chien search restricted to the positions that exist in a shortened code.
        let mut positions = Vec::with_capacity(errors);
        for i in 0..n {
            let x_inv = inv(pow_alpha(n - 1 - i));
            if eval_le(&locator, x_inv) == 0 {
                positions.push(i);
            }
        }
        if positions.len() != errors {
            return Err(Error::RsDecodeFailure);
        }

        // Ω(x) = S(x)Λ(x) mod x^t
        let mut omega = vec![0u8; self.parity];
        for (i, &s) in synd.iter().enumerate() {
            for (j, &l) in locator.iter().enumerate() {
                if i + j < self.parity {
                    omega[i + j] ^= mul(s, l);
                }
            }
        }
        // Formal derivative: odd-power terms survive in characteristic 2.
        let derivative: Vec<u8> = locator
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
            .collect();

        let mut fixed = codeword.to_vec();
        for &pos in &positions {
            let x = pow_alpha(n - 1 - pos);
            let x_inv = inv(x);
            let denom = eval_le(&derivative, x_inv);
            if denom == 0 {
                return Err(Error::RsDecodeFailure);
            }
            let magnitude = mul(x, div(eval_le(&omega, x_inv), denom));
            fixed[pos] ^= magnitude;
        }

        if self.syndromes(&fixed).iter().any(|&s| s != 0) {
            return Err(Error::RsDecodeFailure);
        }
        fixed.truncate(k);
        Ok(Decoded {
            data: fixed,
            corrections: errors,
        })
    }
}

/// Error-locator polynomial Λ(x), lowest degree first, trimmed to its degree.
fn berlekamp_massey(synd: &[u8]) -> Vec<u8> {
    let mut c = vec![1u8];
    let mut b = vec![1u8];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last = 1u8;

    for n in 0..synd.len() {
        let mut d = synd[n];
        for i in 1..=len.min(c.len() - 1) {
            d ^= mul(c[i], synd[n - i]);
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let scale = div(d, last);
        let mut next = c.clone();
        if next.len() < b.len() + shift {
            next.resize(b.len() + shift, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            next[i + shift] ^= mul(scale, bi);
        }
        if 2 * len <= n {
            b = c;
            len = n + 1 - len;
            last = d;
            shift = 1;
        } else {
            shift += 1;
        }
        c = next;
    }
    c.truncate(len + 1);
    c.resize(len + 1, 0);
    c
}
