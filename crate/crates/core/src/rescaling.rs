//! Rescaling matrices: the capacity functional `N(V)`, membership in the
//! set `S_d` and its dequantisation subset `T_d`, the star product, and the
//! maps that collapse Hilbert-space objects onto scalars.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{frobenius_norm, ones_objects, CMat, CVec};

/// Default membership tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A matrix paired with its capacity and an `S_d` / `T_d` verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RescalingCert {
    pub matrix: CMat,
    pub capacity: f64,
    pub tol: f64,
    pub in_s: bool,
    pub in_t: bool,
}

/// Unit-disc coefficients defining a dequantisation matrix `A_rs = a_r / sqrt(d)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DequantSpecWire", into = "DequantSpecWire")]
pub struct DequantSpec {
    coeffs: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct DequantSpecWire {
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<DequantSpecWire> for DequantSpec {
    type Error = Error;
    fn try_from(w: DequantSpecWire) -> Result<Self> {
        DequantSpec::new(w.coeffs.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

impl From<DequantSpec> for DequantSpecWire {
    fn from(s: DequantSpec) -> Self {
        DequantSpecWire {
            coeffs: s.coeffs.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl DequantSpec {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("dequantisation needs at least one coefficient".into()));
        }
        for (i, a) in coeffs.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) || a.norm() > 1.0 + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "coefficient a_{i} = {a} is outside the unit disc"
                )));
            }
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }
}

/// Capacity `N(V) = max_i sqrt((V V^dag)_ii)`, the maximum row norm.
pub fn capacity(v: &CMat) -> f64 {
    (0..v.rows())
        .map(|i| v.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Full certificate: capacity, `S_d` membership, and the `T_d` structure test.
///
/// `T_d` requires every row to be constant and each row value times `sqrt(d)`
/// to lie in the unit disc.
pub fn certify(v: &CMat, tol: f64) -> RescalingCert {
    let cap = capacity(v);
    let in_s = cap <= 1.0 + tol;
    let d = v.cols() as f64;
    let mut in_t = v.is_square();
    if in_t {
        for i in 0..v.rows() {
            let row = v.row(i);
            let first = row[0];
            if row.iter().any(|z| (z - first).norm() > tol) {
                in_t = false;
                break;
            }
            if (first * d.sqrt()).norm() > 1.0 + tol {
                in_t = false;
                break;
            }
        }
    }
    RescalingCert {
        matrix: v.clone(),
        capacity: cap,
        tol,
        in_s,
        in_t: in_t && in_s,
    }
}

fn require_in_s(v: &CMat, tol: f64, name: &str) -> Result<()> {
    let cap = capacity(v);
    if cap > 1.0 + tol {
        return Err(Error::InvalidInput(format!(
            "{name} is not a rescaling matrix: capacity {cap} > 1"
        )));
    }
    Ok(())
}

/// Star product `R * V = R V / sqrt(d)`; closed on `S_d`.
pub fn star_product(r: &CMat, v: &CMat) -> Result<RescalingCert> {
    require_in_s(r, DEFAULT_TOL, "R")?;
    require_in_s(v, DEFAULT_TOL, "V")?;
    let d = r.rows() as f64;
    let prod = r.mul(v)?.scale_re(1.0 / d.sqrt());
    Ok(certify(&prod, DEFAULT_TOL))
}

/// Largest scale pulling `V` into `S_d`: `lambda_max = 1 / N(V)`.
///
/// The zero matrix is degenerate (any scale works); it returns an infinite
/// `lambda_max` together with the zero certificate.
pub fn scale_into_s(v: &CMat) -> (f64, RescalingCert) {
    let cap = capacity(v);
    if cap == 0.0 {
        return (f64::INFINITY, certify(v, DEFAULT_TOL));
    }
    let scaled = v.scale_re(1.0 / cap);
    (1.0 / cap, certify(&scaled, DEFAULT_TOL))
}

/// Builds the dequantisation matrix `A_rs = a_r / sqrt(d)`.
pub fn build_dequantisation(spec: &DequantSpec) -> CMat {
    let d = spec.dim();
    let scale = 1.0 / (d as f64).sqrt();
    let mut m = CMat::zeros(d, d);
    for r in 0..d {
        let v = spec.coeffs()[r] * scale;
        for s in 0..d {
            m.set(r, s, v);
        }
    }
    m
}

/// `A^dag |f> = lambda |J>` with `lambda = sum_r a_r^* f_r`.
///
/// Returns `lambda`; the residual against `lambda |J>` is checked to 1e-10.
pub fn dequantise_vector(a: &CMat, f: &CVec) -> Result<C64> {
    let cert = certify(a, DEFAULT_TOL);
    if !cert.in_t {
        return Err(Error::InvalidInput("matrix is not in T_d".into()));
    }
    if (f.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("vector is not normalised: {}", f.norm())));
    }
    let d = a.rows();
    if f.dim() != d {
        return Err(Error::DimensionMismatch(format!("{} vs {d}", f.dim())));
    }
    // row-constancy means a_r = sqrt(d) * A_r0
    let lambda: C64 = (0..d)
        .map(|r| (a.get(r, 0) * (d as f64).sqrt()).conj() * f.entries()[r])
        .sum();
    let (j, _) = ones_objects(d);
    let residual = a.adjoint().mul_vec(f)?.sub(&j.scale(lambda))?.norm();
    if residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "dequantisation residual {residual} exceeds 1e-10"
        )));
    }
    Ok(lambda)
}

/// `A1^dag theta A2 = (lambda / d) J_d` with `lambda = sum a_r theta_rs b_s`
/// for `A1 = A(a^*)`, `A2 = A(b)`; returns `lambda`.
pub fn dequantise_matrix(a1: &CMat, theta: &CMat, a2: &CMat) -> Result<C64> {
    for (m, name) in [(a1, "A1"), (a2, "A2")] {
        if !certify(m, DEFAULT_TOL).in_t {
            return Err(Error::InvalidInput(format!("{name} is not in T_d")));
        }
    }
    if !theta.is_square() || theta.rows() != a1.rows() || theta.rows() != a2.rows() {
        return Err(Error::DimensionMismatch("dequantise_matrix shape mismatch".into()));
    }
    let product = a1.adjoint().mul(theta)?.mul(a2)?;
    let lambda = product.trace()?;
    let d = theta.rows() as f64;
    let (_, jd) = ones_objects(theta.rows());
    let residual = frobenius_norm(&product.sub(&jd.scale(lambda / d))?);
    if residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "dequantisation residual {residual} exceeds 1e-10"
        )));
    }
    Ok(lambda)
}

/// Builds a rescaling matrix whose row `r` is `scales[r] * units[r]`.
pub fn rescaling_from_rows(scales: &[f64], units: &[CVec]) -> Result<RescalingCert> {
    let d = scales.len();
    if d == 0 || units.len() != d {
        return Err(Error::InvalidInput("scales and units must have equal positive length".into()));
    }
    let mut m = CMat::zeros(d, units[0].dim());
    for (r, (&mu, u)) in scales.iter().zip(units).enumerate() {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidInput(format!("scale {mu} outside [0, 1]")));
        }
        if (u.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "row {r} is not normalised: {}",
                u.norm()
            )));
        }
        if u.dim() != units[0].dim() {
            return Err(Error::DimensionMismatch("ragged unit rows".into()));
        }
        for (s, z) in u.entries().iter().enumerate() {
            m.set(r, s, z * mu);
        }
    }
    Ok(certify(&m, DEFAULT_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::fourier_matrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn capacity_cases() {
        assert!((capacity(&fourier_matrix(5)) - 1.0).abs() < 1e-12);
        let diag = CMat::from_rows(&[
            vec![c(0.2, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.9, 0.0)],
        ])
        .unwrap();
        assert!((capacity(&diag) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn certify_cases() {
        let f4 = certify(&fourier_matrix(4), DEFAULT_TOL);
        assert!(f4.in_s && !f4.in_t);

        let a = build_dequantisation(&DequantSpec::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap());
        let cert = certify(&a, DEFAULT_TOL);
        assert!(cert.in_t && cert.in_s);

        let big = CMat::from_rows(&[
            vec![c(1.5, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(!certify(&big, DEFAULT_TOL).in_s);
    }

    #[test]
    fn star_product_cases() {
        let id = CMat::identity(2);
        let cert = star_product(&id, &id).unwrap();
        assert!((cert.capacity - 1.0 / 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(cert.in_s);

        let f = fourier_matrix(2);
        let cert = star_product(&f, &f).unwrap();
        assert!((cert.capacity - 1.0 / 2.0_f64.sqrt()).abs() < 1e-12);
        // F^2 is a permutation matrix, so F^2/sqrt(2) has constant row norms
        let expect = f.mul(&f).unwrap().scale_re(1.0 / 2.0_f64.sqrt());
        assert!(frobenius_norm(&cert.matrix.sub(&expect).unwrap()) < 1e-12);

        let big = CMat::identity(2).scale_re(2.0);
        assert!(star_product(&big, &id).is_err());
    }

    #[test]
    fn scale_into_s_cases() {
        let (lam, cert) = scale_into_s(&CMat::identity(2).scale_re(2.0));
        assert!((lam - 0.5).abs() < 1e-15);
        assert!((cert.capacity - 1.0).abs() < 1e-12);

        let (_, j3) = ones_objects(3);
        let (lam, _) = scale_into_s(&j3);
        assert!((lam - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);

        let (lam, _) = scale_into_s(&fourier_matrix(3));
        assert!((lam - 1.0).abs() < 1e-12);

        let (lam, cert) = scale_into_s(&CMat::zeros(2, 2));
        assert!(lam.is_infinite());
        assert_eq!(cert.capacity, 0.0);
    }

    #[test]
    fn build_dequantisation_cases() {
        let a = build_dequantisation(&DequantSpec::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap());
        let (_, j2) = ones_objects(2);
        assert!(frobenius_norm(&a.sub(&j2.scale_re(1.0 / 2.0_f64.sqrt())).unwrap()) < 1e-14);

        let a = build_dequantisation(
            &DequantSpec::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]).unwrap(),
        );
        let s = 1.0 / 3.0_f64.sqrt();
        for col in 0..3 {
            assert!((a.get(0, col) - c(s, 0.0)).norm() < 1e-14);
            assert!(a.get(1, col).norm() < 1e-14);
            assert!((a.get(2, col) - c(0.0, -s)).norm() < 1e-14);
        }
        assert!(certify(&a, DEFAULT_TOL).in_t);

        assert!(DequantSpec::new(vec![c(1.1, 0.0)]).is_err());
    }

    #[test]
    fn dequantise_vector_cases() {
        let d = 3;
        let a = build_dequantisation(&DequantSpec::new(vec![c(1.0, 0.0); d]).unwrap());
        let (j, _) = ones_objects(d);
        let lam = dequantise_vector(&a, &j).unwrap();
        assert!((lam - c((d as f64).sqrt(), 0.0)).norm() < 1e-12);

        let a = build_dequantisation(&DequantSpec::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap());
        let f = CVec::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(dequantise_vector(&a, &f).unwrap().norm() < 1e-14);

        let a = build_dequantisation(&DequantSpec::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap());
        let s = 1.0 / 2.0_f64.sqrt();
        let f = CVec::new(vec![c(s, 0.0), c(s, 0.0)]).unwrap();
        let lam = dequantise_vector(&a, &f).unwrap();
        assert!((lam - c(s, -s)).norm() < 1e-12);

        // not in T_d
        assert!(dequantise_vector(&fourier_matrix(2), &f).is_err());
    }

    #[test]
    fn dequantise_matrix_cases() {
        let ones = DequantSpec::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let a = build_dequantisation(&ones);
        let lam = dequantise_matrix(&a, &CMat::identity(2), &a).unwrap();
        assert!((lam - c(2.0, 0.0)).norm() < 1e-12);

        let (_, j2) = ones_objects(2);
        let lam = dequantise_matrix(&a, &j2, &a).unwrap();
        assert!((lam - c(4.0, 0.0)).norm() < 1e-12);

        // diagonal theta with a_r b_r cancelling the phases gives sum |z_r|
        let z0 = c(0.3, 0.4);
        let z1 = c(0.0, -0.3);
        let theta = CMat::from_rows(&[vec![z0, c(0.0, 0.0)], vec![c(0.0, 0.0), z1]]).unwrap();
        let phase = |z: C64| (z / z.norm()).conj();
        // split each conjugate phase between a_r and b_r
        let a_spec = DequantSpec::new(vec![phase(z0), c(1.0, 0.0)]).unwrap();
        let b_spec = DequantSpec::new(vec![c(1.0, 0.0), phase(z1)]).unwrap();
        // lambda = sum a_r theta_rr b_r, with A1 = A(a^*)
        let a1 = build_dequantisation(
            &DequantSpec::new(a_spec.coeffs().iter().map(|z| z.conj()).collect()).unwrap(),
        );
        let a2 = build_dequantisation(&b_spec);
        let lam = dequantise_matrix(&a1, &theta, &a2).unwrap();
        assert!((lam.norm() - (z0.norm() + z1.norm())).abs() < 1e-12);
    }

    #[test]
    fn rescaling_from_rows_cases() {
        let basis = vec![
            CVec::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap(),
            CVec::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
        ];
        let cert = rescaling_from_rows(&[1.0, 1.0], &basis).unwrap();
        assert!(frobenius_norm(&cert.matrix.sub(&CMat::identity(2)).unwrap()) < 1e-14);

        let f = fourier_matrix(2);
        let rows: Vec<CVec> = (0..2).map(|i| CVec::new(f.row(i).to_vec()).unwrap()).collect();
        let cert = rescaling_from_rows(&[1.0, 1.0], &rows).unwrap();
        assert!(frobenius_norm(&cert.matrix.sub(&f).unwrap()) < 1e-14);

        let cert = rescaling_from_rows(&[0.5, 1.0], &rows).unwrap();
        assert!((cert.capacity - 1.0).abs() < 1e-12);
        assert!(cert.in_s);

        assert!(rescaling_from_rows(&[1.5, 1.0], &rows).is_err());
        let bad = CVec::new(vec![c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(rescaling_from_rows(&[1.0], &[bad]).is_err());
    }
}
