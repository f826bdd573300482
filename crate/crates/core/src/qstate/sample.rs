//! Haar-random pure states and random induced mixed states.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{c, hermitize, CMatrix, CVector, DensityMatrix, PureState, Register};
use crate::error::{Error, Result};

/// Independent deterministic stream `index` derived from a base seed.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Uniform (Haar) pure state: normalized i.i.d. complex Gaussian coordinates.
pub fn sample_haar_pure<R: Rng + ?Sized>(register: &Register, rng: &mut R) -> PureState {
    loop {
        let v = gaussian_vector(register.dim(), rng);
        let norm = v.norm();
        if norm > 1e-150 {
            return PureState::new(register.clone(), v / c(norm, 0.0))
                .expect("normalized Gaussian vector has unit norm");
        }
    }
}

/// Random state on `register` induced by an `s`-dimensional environment.
pub fn sample_induced_on<R: Rng + ?Sized>(
    register: &Register,
    s: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if s == 0 {
        return Err(Error::domain("environment dimension must be at least 1"));
    }
    let n = register.dim();
    let joint = Register::new(vec![n, s])?;
    let psi = sample_haar_pure(&joint, rng);
    let x = CMatrix::from_fn(n, s, |i, e| psi.amplitudes()[i * s + e]);
    let m = hermitize(&x * x.adjoint());
    Ok(DensityMatrix::from_parts_unchecked(register.clone(), m))
}

/// Random state on `C^n` induced by `C^s`.
pub fn sample_induced<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<DensityMatrix> {
    sample_induced_on(&Register::new(vec![n])?, s, rng)
}
