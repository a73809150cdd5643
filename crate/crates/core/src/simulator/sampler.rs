//! Poisson variates from a seekable ChaCha20 stream.
//!
//! Below `INVERSION_LIMIT` the sample is found by sequential search of the CDF;
//! above it by the transformed-rejection method with squeeze (PTRS). Both consume
//! uniforms in a fixed order, so a `(seed, stream)` pair pins the sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::function::gamma::ln_gamma;

pub const INVERSION_LIMIT: f64 = 30.0;

/// Generator for stream `stream` of `seed`: the key holds the seed's little-endian
/// bytes and the stream selects an independent substream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// One `Poisson(lambda)` draw. `lambda` must be finite and nonnegative.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        0
    } else if lambda < INVERSION_LIMIT {
        inversion(rng, lambda)
    } else {
        ptrs(rng, lambda)
    }
}

fn inversion<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if p == 0.0 && k as f64 > lambda {
            // rounding left the CDF short of u
            break;
        }
    }
    k
}

fn ptrs<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v: f64 = rng.gen();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
            <= -lambda + k * loglam - ln_gamma(k + 1.0)
        {
            return k as u64;
        }
    }
}
