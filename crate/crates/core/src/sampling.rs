//! Seeded random generators for matrices used across the test and
//! certification workflows: unitaries (orthonormalised Gaussian matrices),
//! rescaling matrices with ball-uniform rows, and normal matrices.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::{CMat, CVec};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller.
fn gauss<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn gaussian_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(gauss(rng), gauss(rng))
}

/// Uniform phase on the unit circle.
pub fn random_unit_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..2.0 * std::f64::consts::PI))
}

/// Haar-like random unitary: modified Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMat {
    loop {
        let mut cols: Vec<Vec<C64>> = (0..d)
            .map(|_| (0..d).map(|_| gaussian_complex(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..d {
            for i in 0..j {
                let proj: C64 = (0..d).map(|k| cols[i][k].conj() * cols[j][k]).sum();
                for k in 0..d {
                    let v = cols[i][k] * proj;
                    cols[j][k] -= v;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for z in &mut cols[j] {
                *z /= norm;
            }
        }
        if !ok {
            continue; // near-degenerate draw, resample
        }
        let mut m = CMat::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                m.set(i, j, cols[j][i]);
            }
        }
        return m;
    }
}

/// A row drawn uniformly from the unit ball of `C^d`: Gaussian direction,
/// radius `u^(1/(2d))` with `u` uniform in (0, 1].
pub fn random_ball_row<R: Rng>(d: usize, rng: &mut R) -> CVec {
    loop {
        let raw: Vec<C64> = (0..d).map(|_| gaussian_complex(rng)).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..=1.0);
        let radius = u.powf(1.0 / (2.0 * d as f64));
        return CVec::new(raw.into_iter().map(|z| z * (radius / norm)).collect())
            .expect("finite by construction");
    }
}

/// Random element of `S_d`: each row drawn from the unit ball of `C^d`.
pub fn random_rescaling<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        let row = random_ball_row(d, rng);
        for (j, z) in row.entries().iter().enumerate() {
            m.set(i, j, *z);
        }
    }
    m
}

/// Random normal matrix `U diag(z) U^dag` with complex Gaussian eigenvalues.
pub fn random_normal_matrix<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let u = random_unitary(d, rng);
    let mut diag = CMat::zeros(d, d);
    for i in 0..d {
        diag.set(i, i, gaussian_complex(rng));
    }
    u.mul(&diag).unwrap().mul(&u.adjoint()).unwrap()
}

/// Dense random matrix with complex Gaussian entries.
pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let entries = (0..rows * cols).map(|_| gaussian_complex(rng)).collect();
    CMat::new(rows, cols, entries).expect("finite by construction")
}
