//! Square-barrier tunnelling amplitudes, the induced rescaling and projector
//! structures, the 2x2 tunnelling template analysis, and the closed-form
//! damping/amplification factors.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{g_grid, quantum_form_unchecked};
use crate::matrix::{frobenius_norm, matrix_flags, CMat, CVec};
use crate::sampling::{random_ball_row, rng_from_seed};

/// Square-barrier inputs in units where `hbar = 1`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BarrierParams {
    /// Particle mass.
    pub m: f64,
    /// Incoming momentum.
    pub k: f64,
    /// Barrier height.
    pub v0: f64,
    /// Barrier width.
    pub a: f64,
}

impl BarrierParams {
    pub fn new(m: f64, k: f64, v0: f64, a: f64) -> Result<Self> {
        if !(m > 0.0 && k > 0.0 && v0 > 0.0 && a > 0.0) {
            return Err(Error::InvalidInput(
                "barrier parameters must all be positive".into(),
            ));
        }
        let p = Self { m, k, v0, a };
        if p.energy() >= v0 {
            return Err(Error::InvalidInput(format!(
                "energy {} must stay below the barrier height {v0}",
                p.energy()
            )));
        }
        Ok(p)
    }

    pub fn energy(&self) -> f64 {
        self.k * self.k / (2.0 * self.m)
    }
}

/// Reflection and transmission amplitudes of the square barrier.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScatterAmps {
    pub b_re: f64,
    pub b_im: f64,
    pub c_re: f64,
    pub c_im: f64,
    pub kappa_re: f64,
    pub kappa_im: f64,
}

impl ScatterAmps {
    pub fn b(&self) -> C64 {
        C64::new(self.b_re, self.b_im)
    }

    pub fn c(&self) -> C64 {
        C64::new(self.c_re, self.c_im)
    }

    pub fn kappa(&self) -> C64 {
        C64::new(self.kappa_re, self.kappa_im)
    }
}

/// The 2x2 projectors, their 4x4 block embeddings, and the contraction block.
#[derive(Debug, Clone)]
pub struct TunnelBlocks {
    pub xi_l: f64,
    pub xi_r: f64,
    pub varpi_l: CMat,
    pub varpi_r: CMat,
    pub pi_l: CMat,
    pub pi_r: CMat,
    pub wcal: CMat,
}

/// Under-critically damped oscillator parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DampingParams {
    pub omega: f64,
    pub gamma: f64,
}

impl DampingParams {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if omega <= 0.0 || gamma < 0.0 {
            return Err(Error::InvalidInput("omega must be positive, gamma nonnegative".into()));
        }
        if omega <= gamma / 2.0 {
            return Err(Error::InvalidInput(format!(
                "under-critical regime requires omega > gamma/2 ({omega} <= {})",
                gamma / 2.0
            )));
        }
        Ok(Self { omega, gamma })
    }

    pub fn epsilon(&self) -> f64 {
        (self.omega * self.omega - self.gamma * self.gamma / 4.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingBranch {
    Damped,
    Amplified,
}

/// Evaluates the barrier amplitudes
/// `B = (k^2 - kappa^2)(1 - e^{2 i kappa a}) / [(k + kappa)^2 - (k - kappa)^2 e^{2 i kappa a}]`
/// and `C = 4 k kappa e^{i (kappa - k) a} / [same denominator]`, with
/// `kappa = i sqrt(2 m V0 - k^2)`.
pub fn scattering_amplitudes(p: &BarrierParams) -> Result<ScatterAmps> {
    let kappa = C64::new(0.0, (2.0 * p.m * p.v0 - p.k * p.k).sqrt());
    let k = C64::new(p.k, 0.0);
    let phase = (C64::new(0.0, 2.0 * p.a) * kappa).exp();
    let denom = (k + kappa) * (k + kappa) - (k - kappa) * (k - kappa) * phase;
    if denom.norm() < 1e-14 {
        return Err(Error::Numerical("degenerate barrier parameters: vanishing denominator".into()));
    }
    let b = (k * k - kappa * kappa) * (C64::new(1.0, 0.0) - phase) / denom;
    let c = 4.0 * k * kappa * (C64::new(0.0, p.a) * (kappa - k)).exp() / denom;
    let flux = b.norm_sqr() + c.norm_sqr();
    if (flux - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "flux conservation violated: |B|^2 + |C|^2 = {flux}"
        )));
    }
    Ok(ScatterAmps {
        b_re: b.re,
        b_im: b.im,
        c_re: c.re,
        c_im: c.im,
        kappa_re: kappa.re,
        kappa_im: kappa.im,
    })
}

/// The unnormalised momentum-space states `u_L = sqrt(m/k) (1, B)`,
/// `u_R = sqrt(m/k) (C, 0)`, and the contraction `W = diag(C, 0)` with
/// `u_R = W u_L`.
pub fn tunnel_states(p: &BarrierParams) -> Result<(CVec, CVec, CMat)> {
    let amps = scattering_amplitudes(p)?;
    tunnel_states_from_amps(p, &amps)
}

fn tunnel_states_from_amps(p: &BarrierParams, amps: &ScatterAmps) -> Result<(CVec, CVec, CMat)> {
    let scale = (p.m / p.k).sqrt();
    let zero = C64::new(0.0, 0.0);
    let u_l = CVec::new(vec![C64::new(scale, 0.0), amps.b() * scale])?;
    let u_r = CVec::new(vec![amps.c() * scale, zero])?;
    let w = CMat::from_rows(&[vec![amps.c(), zero], vec![zero, zero]])?;
    let residual = w.mul_vec(&u_l)?.sub(&u_r)?.norm();
    if residual > 1e-12 {
        return Err(Error::Numerical(format!("u_R = W u_L residual {residual}")));
    }
    Ok((u_l, u_r, w))
}

/// Builds the projector decomposition `|u_L><u_L| = xi_L varpi_L`,
/// `|u_R><u_R| = xi_R varpi_R`, the 4x4 block embeddings, and the block
/// contraction satisfying `xi_L W Pi_L W^dag = xi_R Pi_R`.
pub fn tunnel_blocks(p: &BarrierParams) -> Result<TunnelBlocks> {
    let amps = scattering_amplitudes(p)?;
    tunnel_blocks_from_amps(p, &amps)
}

pub fn tunnel_blocks_from_amps(p: &BarrierParams, amps: &ScatterAmps) -> Result<TunnelBlocks> {
    let b = amps.b();
    let b2 = b.norm_sqr();
    let c2 = amps.c().norm_sqr();
    let mk = p.m / p.k;
    let xi_l = mk * (1.0 + b2);
    let xi_r = mk * c2;

    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let norm = 1.0 / (1.0 + b2);
    let varpi_l = CMat::from_rows(&[
        vec![one * norm, b.conj() * norm],
        vec![b * norm, C64::new(b2 * norm, 0.0)],
    ])?;
    let varpi_r = CMat::from_rows(&[vec![one, zero], vec![zero, zero]])?;

    let embed = |block: &CMat, offset: usize| {
        let mut m = CMat::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m.set(i + offset, j + offset, block.get(i, j));
            }
        }
        m
    };
    let pi_l = embed(&varpi_l, 0);
    let pi_r = embed(&varpi_r, 2);

    let (_, _, w) = tunnel_states_from_amps(p, amps)?;
    let mut wcal = CMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            wcal.set(i + 2, j, w.get(i, j));
        }
    }

    let blocks = TunnelBlocks {
        xi_l,
        xi_r,
        varpi_l,
        varpi_r,
        pi_l,
        pi_r,
        wcal,
    };
    blocks.verify()?;
    Ok(blocks)
}

impl TunnelBlocks {
    fn verify(&self) -> Result<()> {
        for (m, name) in [(&self.varpi_l, "varpi_L"), (&self.varpi_r, "varpi_R")] {
            if !matrix_flags(m, 1e-10)?.projector {
                return Err(Error::Numerical(format!("{name} is not a projector")));
            }
        }
        if frobenius_norm(&self.pi_l.mul(&self.pi_r)?) > 1e-12 {
            return Err(Error::Numerical("Pi_L Pi_R != 0".into()));
        }
        let lhs = self
            .wcal
            .mul(&self.pi_l)?
            .mul(&self.wcal.adjoint())?
            .scale_re(self.xi_l);
        let rhs = self.pi_r.scale_re(self.xi_r);
        let residual = frobenius_norm(&lhs.sub(&rhs)?);
        if residual > 1e-10 {
            return Err(Error::Numerical(format!(
                "xi_L W Pi_L W^dag = xi_R Pi_R residual {residual}"
            )));
        }
        Ok(())
    }
}

/// Closed-form analysis of the 2x2 tunnelling template
/// `theta = (m/k) [[1, B], [B, B^2]]` with real `B` in (0, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExdcReport {
    pub theta: CMat,
    pub b: f64,
    pub m_over_k: f64,
    pub g: f64,
    pub g_prime: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub window_empty: bool,
}

pub fn exdc_theta(b: f64, m_over_k: f64) -> Result<CMat> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::InvalidInput(format!("B = {b} must lie in (0, 1]")));
    }
    if m_over_k <= 0.0 {
        return Err(Error::InvalidInput("m/k must be positive".into()));
    }
    let c = |x: f64| C64::new(x, 0.0);
    CMat::from_rows(&[
        vec![c(m_over_k), c(m_over_k * b)],
        vec![c(m_over_k * b), c(m_over_k * b * b)],
    ])
}

pub fn exdc_report(b: f64, m_over_k: f64) -> Result<ExdcReport> {
    let theta = exdc_theta(b, m_over_k)?;
    let g = m_over_k * (1.0 + b) * (1.0 + b);
    let gp = 2.0 * m_over_k * (1.0 + b * b);
    // cross-check the closed form against the brute-force oracle
    let g_numeric = g_grid(&theta, 16)?;
    if (g - g_numeric).abs() > 1e-6 {
        return Err(Error::Numerical(format!(
            "exDC closed form {g} disagrees with grid value {g_numeric}"
        )));
    }
    Ok(ExdcReport {
        theta,
        b,
        m_over_k,
        g,
        g_prime: gp,
        window_lo: 1.0 / gp,
        window_hi: 1.0 / g,
        window_empty: b >= 1.0,
    })
}

/// Samples `n` pairs `(V, W)` from `S_2` (ball-uniform rows) and returns the
/// maximum of `|Tr(lambda theta V W^dag)|` over the sample.
pub fn exdc_q_bound_sample(b: f64, lambda: f64, n: usize, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let report = exdc_report(b, 1.0)?;
    if lambda <= report.window_lo - 1e-12 || lambda > report.window_hi + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "lambda = {lambda} is outside the exDC window ({}, {}]",
            report.window_lo, report.window_hi
        )));
    }
    let theta = report.theta.scale_re(lambda);
    let mut rng = rng_from_seed(seed);
    let mut max_q: f64 = 0.0;
    for _ in 0..n {
        let mut draw = || {
            let mut m = CMat::zeros(2, 2);
            for i in 0..2 {
                let row = random_ball_row(2, &mut rng);
                for (j, z) in row.entries().iter().enumerate() {
                    m.set(i, j, *z);
                }
            }
            m
        };
        let v = draw();
        let w = draw();
        max_q = max_q.max(quantum_form_unchecked(&theta, &v, &w)?);
    }
    Ok(max_q)
}

/// Closed-form damping/amplification factor `e^{i eps t} e^{-/+ gamma t / 2}`.
pub fn damping_factor(p: &DampingParams, t: f64, branch: DampingBranch) -> C64 {
    let sign = match branch {
        DampingBranch::Damped => -1.0,
        DampingBranch::Amplified => 1.0,
    };
    C64::from_polar((sign * p.gamma * t / 2.0).exp(), p.epsilon() * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rescaling::{capacity, certify};
    use rand::Rng;

    fn fixture() -> BarrierParams {
        BarrierParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn barrier_params_validation() {
        assert!(BarrierParams::new(1.0, 2.0, 1.0, 1.0).is_err()); // E = 2 >= V0
        assert!(BarrierParams::new(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn amplitudes_fixture() {
        let amps = scattering_amplitudes(&fixture()).unwrap();
        // m = k = V0 = a = 1 gives |B| = tanh(1), |C| = sech(1)
        assert!((amps.b().norm() - 0.761594).abs() < 1e-6);
        assert!((amps.c().norm() - 0.648054).abs() < 1e-6);
        assert!((amps.b().norm_sqr() + amps.c().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitudes_limits() {
        // vanishing barrier width: |C| -> 1
        let p = BarrierParams::new(1.0, 1.0, 1.0, 1e-6).unwrap();
        let amps = scattering_amplitudes(&p).unwrap();
        assert!((amps.c().norm() - 1.0).abs() < 1e-5);

        // opaque barrier: |C| decays
        let p = BarrierParams::new(1.0, 1.0, 1.0, 20.0).unwrap();
        let amps = scattering_amplitudes(&p).unwrap();
        assert!(amps.c().norm() < 1e-6);
    }

    #[test]
    fn flux_conservation_random() {
        let mut rng = rng_from_seed(77);
        for _ in 0..100 {
            let m = rng.gen_range(0.2..3.0);
            let k = rng.gen_range(0.2..2.0);
            let e = k * k / (2.0 * m);
            let v0 = e + rng.gen_range(0.05..3.0);
            let a = rng.gen_range(0.1..5.0);
            let p = BarrierParams::new(m, k, v0, a).unwrap();
            let amps = scattering_amplitudes(&p).unwrap();
            assert!((amps.b().norm_sqr() + amps.c().norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn tunnel_states_cases() {
        let p = fixture();
        let (u_l, u_r, w) = tunnel_states(&p).unwrap();
        let amps = scattering_amplitudes(&p).unwrap();
        let expect = amps.c().norm() / (1.0 + amps.b().norm_sqr()).sqrt();
        assert!((u_r.norm() / u_l.norm() - expect).abs() < 1e-12);
        let cert = certify(&w, 1e-9);
        assert!(cert.in_s);
        assert!((cert.capacity - amps.c().norm()).abs() < 1e-12);
    }

    #[test]
    fn tunnel_blocks_cases() {
        let p = fixture();
        let blocks = tunnel_blocks(&p).unwrap();
        assert!(frobenius_norm(&blocks.pi_l.mul(&blocks.pi_r).unwrap()) < 1e-12);
        let amps = scattering_amplitudes(&p).unwrap();
        let ratio = amps.c().norm_sqr() / (1.0 + amps.b().norm_sqr());
        assert!((blocks.xi_r / blocks.xi_l - ratio).abs() < 1e-12);

        // B = 0 synthetic amplitudes: no reflection, equal coefficients
        let amps0 = ScatterAmps {
            b_re: 0.0,
            b_im: 0.0,
            c_re: 1.0,
            c_im: 0.0,
            kappa_re: 0.0,
            kappa_im: 1.0,
        };
        let blocks = tunnel_blocks_from_amps(&p, &amps0).unwrap();
        assert!((blocks.xi_l - blocks.xi_r).abs() < 1e-12);
        assert!(
            frobenius_norm(&blocks.varpi_l.sub(&blocks.varpi_r).unwrap()) < 1e-12
        );
        // with |C| = 1 the contraction is unitary on its support
        let (_, _, w) = tunnel_states_from_amps(&p, &amps0).unwrap();
        assert!((capacity(&w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wcal_relation_random() {
        let mut rng = rng_from_seed(78);
        for _ in 0..100 {
            let m = rng.gen_range(0.2..3.0);
            let k = rng.gen_range(0.2..2.0);
            let e = k * k / (2.0 * m);
            let v0 = e + rng.gen_range(0.05..3.0);
            let a = rng.gen_range(0.1..5.0);
            let p = BarrierParams::new(m, k, v0, a).unwrap();
            // tunnel_blocks verifies xi_L W Pi_L W^dag = xi_R Pi_R internally
            tunnel_blocks(&p).unwrap();
        }
    }

    #[test]
    fn exdc_cases() {
        let rep = exdc_report(1.0, 1.0).unwrap();
        assert!((rep.g - 4.0).abs() < 1e-12);
        assert!((rep.g_prime - 4.0).abs() < 1e-12);
        assert!(rep.window_empty);

        let rep = exdc_report(0.5, 1.0).unwrap();
        assert!((rep.g - 2.25).abs() < 1e-12);
        assert!((rep.g_prime - 2.5).abs() < 1e-12);
        assert!((rep.window_lo - 0.4).abs() < 1e-12);
        assert!((rep.window_hi - 1.0 / 2.25).abs() < 1e-12);
        assert!(!rep.window_empty);

        // smaller B opens a wider window
        let rep_small = exdc_report(0.1, 1.0).unwrap();
        assert!(
            rep_small.window_hi - rep_small.window_lo > rep.window_hi - rep.window_lo
        );

        assert!(exdc_report(0.0, 1.0).is_err());
        assert!(exdc_report(1.5, 1.0).is_err());
    }

    #[test]
    fn exdc_q_bound_cases() {
        let max_q = exdc_q_bound_sample(0.5, 1.0 / 2.25, 2000, 42).unwrap();
        assert!(max_q <= 1.0 + 1e-9, "max Q = {max_q}");

        // V = W = identity at the window top: lambda (m/k)(1 + B^2) < 1
        let theta = exdc_theta(0.5, 1.0).unwrap().scale_re(1.0 / 2.25);
        let id = CMat::identity(2);
        let q = quantum_form_unchecked(&theta, &id, &id).unwrap();
        assert!((q - 1.25 / 2.25).abs() < 1e-12);
        assert!(q < 1.0);

        assert!(exdc_q_bound_sample(0.5, 0.2, 10, 1).is_err());
    }

    #[test]
    fn damping_cases() {
        let p = DampingParams::new(1.0, 0.0).unwrap();
        assert!((damping_factor(&p, 3.7, DampingBranch::Damped).norm() - 1.0).abs() < 1e-14);

        let p = DampingParams::new(1.0, 1.0).unwrap();
        let z = damping_factor(&p, 2.0, DampingBranch::Damped);
        assert!((z.norm() - (-1.0_f64).exp()).abs() < 1e-12);
        let expect_phase = 2.0 * 0.75_f64.sqrt();
        assert!((z.arg() - (expect_phase - 2.0 * std::f64::consts::PI)).abs() < 1e-12
            || (z.arg() - expect_phase).abs() < 1e-12);

        let z = damping_factor(&p, 2.0, DampingBranch::Amplified);
        assert!((z.norm() - 1.0_f64.exp()).abs() < 1e-12);

        // damped modulus nonincreasing in t
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let t = i as f64 * 0.2;
            let m = damping_factor(&p, t, DampingBranch::Damped).norm();
            assert!(m <= last + 1e-15);
            last = m;
        }

        assert!(DampingParams::new(1.0, 2.5).is_err());
    }
}
