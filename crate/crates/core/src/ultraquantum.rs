//! The 3x6 semi-unitary construction `M(z)`, its projector `Pi(z)`, the
//! complementarity identities, and the certified `Q = 6 xi_L > 1`
//! demonstration with its scaling window.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{g_ascent, quantum_form, OptimizerInfo};
use crate::matrix::{frobenius_norm, singular_values, CMat};

/// `M(z)` together with its defining invariants checked at construction.
#[derive(Debug, Clone)]
pub struct SemiUnitary {
    pub z: C64,
    pub m: CMat,
}

/// Residuals of the complementarity identities between `Pi(z)` and `Pi(-z)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplementarityReport {
    pub sum_is_identity: f64,
    pub product_vanishes: f64,
    pub cross_semi_unitary_vanishes: f64,
    pub left_right_transport: f64,
    pub tol: f64,
    pub all_pass: bool,
}

/// Ultra-quantum window report for `Pi(z)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UltraReport {
    pub z_re: f64,
    pub z_im: f64,
    /// Ascent lower bound on `g[Pi(z)]`; the window below is therefore an
    /// outer estimate.
    pub g_pi_est: f64,
    pub g_est_is_lower_bound: bool,
    pub xi_window_lo: f64,
    pub xi_window_hi: f64,
    pub q_max: f64,
    pub xi_l: Option<f64>,
    pub q_value: Option<f64>,
    pub optimizer: OptimizerInfo,
}

fn check_unit(z: C64) -> Result<()> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("|z| = {} is not 1", z.norm())));
    }
    Ok(())
}

/// Builds the semi-unitary `M(z)` and verifies `M M^dag = 1_3` and that
/// `M^dag M` is a rank-3 projector.
pub fn build_m(z: C64) -> Result<SemiUnitary> {
    check_unit(z)?;
    let o = C64::new(0.0, 0.0);
    let u = C64::new(1.0, 0.0);
    let m = CMat::from_rows(&[
        vec![u, z, o, u, -z, o],
        vec![z, o, u, -z, o, u],
        vec![o, u, z, o, u, -z],
    ])?
    .scale_re(0.5);

    let mmd = m.mul(&m.adjoint())?;
    let res = frobenius_norm(&mmd.sub(&CMat::identity(3))?);
    if res > 1e-12 {
        return Err(Error::Numerical(format!("M M^dag != 1_3: residual {res}")));
    }
    let pi = m.adjoint().mul(&m)?;
    let s = singular_values(&pi)?;
    let eig_ok = s[..3].iter().all(|&x| (x - 1.0).abs() <= 1e-10)
        && s[3..].iter().all(|&x| x.abs() <= 1e-10);
    if !eig_ok {
        return Err(Error::Numerical(format!("Pi(z) spectrum is not 1,1,1,0,0,0: {s:?}")));
    }
    Ok(SemiUnitary { z, m })
}

/// `Pi(z) = M(z)^dag M(z)`, the 6x6 rank-3 projector.
pub fn build_pi(z: C64) -> Result<CMat> {
    let su = build_m(z)?;
    su.m.adjoint().mul(&su.m)
}

/// The explicit entry table of `Pi(z)` (scaled by 1/4), built independently
/// of the `M^dag M` product for cross checks.
pub fn pi_entry_table(z: C64) -> Result<CMat> {
    check_unit(z)?;
    let zc = z.conj();
    let t = C64::new(2.0, 0.0);
    let o = C64::new(0.0, 0.0);
    CMat::from_rows(&[
        vec![t, z, zc, o, -z, zc],
        vec![zc, t, z, zc, o, -z],
        vec![z, zc, t, -z, zc, o],
        vec![o, z, -zc, t, -z, -zc],
        vec![-zc, o, z, -zc, t, -z],
        vec![z, -zc, o, -z, -zc, t],
    ])
    .map(|m| m.scale_re(0.25))
}

/// Checks `Pi(z) + Pi(-z) = 1_6`, `Pi(-z) Pi(z) = 0`, `M(-z) M(z)^dag = 0`,
/// and the transport relation `Pi(z) = W^dag Pi(-z) W` with
/// `W = M(-z)^dag M(z)`. Failures are reported, not thrown.
pub fn verify_complementarity(z: C64, tol: f64) -> Result<ComplementarityReport> {
    let pi = build_pi(z)?;
    let pi_neg = build_pi(-z)?;
    let m = build_m(z)?.m;
    let m_neg = build_m(-z)?.m;

    let sum_is_identity = frobenius_norm(&pi.add(&pi_neg)?.sub(&CMat::identity(6))?);
    let product_vanishes = frobenius_norm(&pi_neg.mul(&pi)?);
    let cross_semi_unitary_vanishes = frobenius_norm(&m_neg.mul(&m.adjoint())?);
    let w = m_neg.adjoint().mul(&m)?;
    let transported = w.adjoint().mul(&pi_neg)?.mul(&w)?;
    let left_right_transport = frobenius_norm(&transported.sub(&pi)?);

    let all_pass = [
        sum_is_identity,
        product_vanishes,
        cross_semi_unitary_vanishes,
        left_right_transport,
    ]
    .iter()
    .all(|&r| r <= tol);

    Ok(ComplementarityReport {
        sum_is_identity,
        product_vanishes,
        cross_semi_unitary_vanishes,
        left_right_transport,
        tol,
        all_pass,
    })
}

/// `Q(xi_L Pi(z))` with `V = W = sqrt(2) Pi(z)`; equals `6 xi_L` exactly.
pub fn ultra_q(xi_l: f64, z: C64) -> Result<f64> {
    if xi_l <= 0.0 {
        return Err(Error::InvalidInput("xi_L must be positive".into()));
    }
    let pi = build_pi(z)?;
    let vw = pi.scale_re(2.0_f64.sqrt());
    let q = quantum_form(&pi.scale_re(xi_l), &vw, &vw)?;
    let expect = 6.0 * xi_l;
    if (q - expect).abs() > 1e-12 * expect.max(1.0) {
        return Err(Error::Numerical(format!(
            "Q = {q} deviates from 6 xi_L = {expect}"
        )));
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy)]
pub struct UltraOpts {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub xi_l: Option<f64>,
}

impl Default for UltraOpts {
    fn default() -> Self {
        Self {
            restarts: 200,
            max_iters: 500,
            seed: 42,
            xi_l: None,
        }
    }
}

/// Estimates `g[Pi(z)]` by multistart ascent and reports the ultra-quantum
/// window `(1/6, 1/g_pi_est]` together with the achievable `Q` range.
pub fn ultra_window(z: C64, opts: &UltraOpts) -> Result<UltraReport> {
    let pi = build_pi(z)?;
    let (g_pi_est, _, converged) = g_ascent(&pi, opts.restarts, opts.max_iters, opts.seed)?;
    let (xi_l, q_value) = match opts.xi_l {
        Some(xi) => (Some(xi), Some(ultra_q(xi, z)?)),
        None => (None, None),
    };
    Ok(UltraReport {
        z_re: z.re,
        z_im: z.im,
        g_pi_est,
        g_est_is_lower_bound: true,
        xi_window_lo: 1.0 / 6.0,
        xi_window_hi: 1.0 / g_pi_est,
        q_max: 6.0 / g_pi_est,
        xi_l,
        q_value,
        optimizer: OptimizerInfo {
            restarts: opts.restarts,
            max_iters: opts.max_iters,
            seed: opts.seed,
            converged_restarts: converged,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matrix_flags;
    use crate::rescaling::capacity;
    use crate::sampling::{random_unit_complex, rng_from_seed};

    fn generic_z() -> C64 {
        C64::from_polar(1.0, std::f64::consts::PI / 7.0)
    }

    #[test]
    fn build_m_cases() {
        let su = build_m(C64::new(1.0, 0.0)).unwrap();
        for e in su.m.entries() {
            let ok = e.norm() < 1e-15 || (e.norm() - 0.5).abs() < 1e-15;
            assert!(ok);
        }
        let su = build_m(C64::new(0.0, 1.0)).unwrap();
        for r in 0..3 {
            let norm: f64 = su.m.row(r).iter().map(|x| x.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
        // projector of rank 3 has trace 3
        let pi = build_pi(generic_z()).unwrap();
        assert!((pi.trace().unwrap() - C64::new(3.0, 0.0)).norm() < 1e-12);

        assert!(build_m(C64::new(0.9, 0.0)).is_err());
    }

    #[test]
    fn build_pi_cases() {
        let z = generic_z();
        let pi = build_pi(z).unwrap();
        for i in 0..6 {
            assert!((pi.get(i, i) - C64::new(0.5, 0.0)).norm() < 1e-14);
        }
        assert!(matrix_flags(&pi, 1e-10).unwrap().projector);
        assert!((capacity(&pi.scale_re(2.0_f64.sqrt())) - 1.0).abs() < 1e-12);

        // matches the explicit entry table
        for z in [C64::new(1.0, 0.0), C64::new(0.0, 1.0), generic_z()] {
            let pi = build_pi(z).unwrap();
            let table = pi_entry_table(z).unwrap();
            assert!(frobenius_norm(&pi.sub(&table).unwrap()) < 1e-12);
            // spot check: entry (0,1) = z/4
            assert!((pi.get(0, 1) - z * 0.25).norm() < 1e-14);
        }
    }

    #[test]
    fn complementarity_cases() {
        for z in [
            generic_z(),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ] {
            let rep = verify_complementarity(z, 1e-12).unwrap();
            assert!(rep.all_pass, "z = {z}: {rep:?}");
        }
        let mut rng = rng_from_seed(53);
        for _ in 0..20 {
            let rep = verify_complementarity(random_unit_complex(&mut rng), 1e-10).unwrap();
            assert!(rep.all_pass);
        }
    }

    #[test]
    fn ultra_q_cases() {
        let z = generic_z();
        assert!((ultra_q(1.0 / 6.0, z).unwrap() - 1.0).abs() < 1e-12);
        assert!((ultra_q(0.17, z).unwrap() - 1.02).abs() < 1e-12);
        assert!(ultra_q(-0.1, z).is_err());
    }

    #[test]
    fn ultra_window_cases() {
        let z = generic_z();
        let opts = UltraOpts {
            restarts: 50,
            ..Default::default()
        };
        let rep = ultra_window(z, &opts).unwrap();
        assert!(rep.g_pi_est <= 6.0 + 1e-9);
        assert!(rep.g_pi_est < 6.0 - 1e-3, "g_pi_est = {}", rep.g_pi_est);
        assert!(rep.q_max > 1.0);

        // determinism across seeds
        let rep2 = ultra_window(
            z,
            &UltraOpts {
                seed: 1234,
                restarts: 50,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((rep.g_pi_est - rep2.g_pi_est).abs() < 1e-9);
    }
}
