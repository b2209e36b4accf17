//! Dense complex matrices and vectors, plus the named constructors
//! (Fourier matrix, permutation matrices, matrix of ones) and the spectral
//! quantities the rest of the library consumes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for the structural flag predicates.
pub const FLAG_TOL: f64 = 1e-9;

fn finite(z: &C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec {
    entries: Vec<C64>,
}

impl CVec {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("vector must be non-empty".into()));
        }
        if !entries.iter().all(finite) {
            return Err(Error::InvalidInput("vector has non-finite entries".into()));
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product `<self|other>`, conjugate-linear in `self`.
    pub fn dot(&self, other: &CVec) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "dot: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, c: C64) -> CVec {
        CVec {
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn sub(&self, other: &CVec) -> Result<CVec> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "sub: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(CVec {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// A permutation of `{0, .., d-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PermSpec {
    map: Vec<usize>,
}

impl PermSpec {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let d = map.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty permutation".into()));
        }
        let mut seen = vec![false; d];
        for &p in &map {
            if p >= d || seen[p] {
                return Err(Error::InvalidInput(format!(
                    "map {map:?} is not a bijection on 0..{d}"
                )));
            }
            seen[p] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            map: (0..d).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, j: usize) -> usize {
        self.map[j]
    }
}

impl TryFrom<Vec<usize>> for PermSpec {
    type Error = Error;
    fn try_from(map: Vec<usize>) -> Result<Self> {
        PermSpec::new(map)
    }
}

impl From<PermSpec> for Vec<usize> {
    fn from(p: PermSpec) -> Self {
        p.map
    }
}

/// JSON wire form of a matrix: `{"rows": d, "cols": d, "data": [[re, im], ..]}`.
#[derive(Serialize, Deserialize)]
struct CMatWire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CMatWire", into = "CMatWire")]
pub struct CMat {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl TryFrom<CMatWire> for CMat {
    type Error = Error;
    fn try_from(w: CMatWire) -> Result<Self> {
        let entries: Vec<C64> = w.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        CMat::new(w.rows, w.cols, entries)
    }
}

impl From<CMat> for CMatWire {
    fn from(m: CMat) -> Self {
        CMatWire {
            rows: m.rows,
            cols: m.cols,
            data: m.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// Structural predicates computed by [`matrix_flags`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFlags {
    pub normal: bool,
    pub unitary: bool,
    pub projector: bool,
}

impl CMat {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if !entries.iter().all(finite) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidInput("no rows".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.entries[i * d + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.entries[i * self.cols + j] = z;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> CMat {
        self.scale(C64::new(c, 0.0))
    }

    pub fn add(&self, other: &CMat) -> Result<CMat> {
        self.same_shape(other, "add")?;
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CMat) -> Result<CMat> {
        self.same_shape(other, "sub")?;
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn same_shape(&self, other: &CMat, op: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &CMat) -> Result<CMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &CVec) -> Result<CVec> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "mul_vec: {}x{} times {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let entries = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.entries())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(CVec { entries })
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("trace of non-square matrix".into()));
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.entries.iter().copied())
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> CMat {
        let mut out = CMat::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.set(i, j, m[(i, j)]);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<CMat> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("matrix JSON: {e}")))
    }
}

/// `sqrt(sum |M_rs|^2)`; invariant under unitary conjugation.
pub fn frobenius_norm(m: &CMat) -> f64 {
    m.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Tr(MK)` for square matrices of equal dimension.
pub fn trace_product(m: &CMat, k: &CMat) -> Result<C64> {
    if !m.is_square() || !k.is_square() || m.rows() != k.rows() {
        return Err(Error::DimensionMismatch(format!(
            "trace_product: {}x{} with {}x{}",
            m.rows(),
            m.cols(),
            k.rows(),
            k.cols()
        )));
    }
    // Tr(MK) = sum_{r,s} M_rs K_sr without forming the product.
    let d = m.rows();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..d {
        for s in 0..d {
            acc += m.get(r, s) * k.get(s, r);
        }
    }
    Ok(acc)
}

/// Fourier matrix `F_rs = omega^{rs} / sqrt(d)` with `omega = exp(2 pi i / d)`.
pub fn fourier_matrix(d: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    let scale = 1.0 / (d as f64).sqrt();
    for r in 0..d {
        for s in 0..d {
            // reduce the exponent mod d to keep the angle small
            let e = (r * s) % d;
            let ang = 2.0 * std::f64::consts::PI * (e as f64) / (d as f64);
            m.set(r, s, C64::from_polar(scale, ang));
        }
    }
    m
}

/// Permutation matrix with `[M(pi)]_ij = delta(i, pi(j))`.
pub fn permutation_matrix(p: &PermSpec) -> CMat {
    let d = p.dim();
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        m.set(p.apply(j), j, C64::new(1.0, 0.0));
    }
    m
}

/// `M(pi)^dag theta M(pi)`; entry `(i,j)` equals `theta_{pi(i), pi(j)}`.
pub fn permute_conjugate(theta: &CMat, p: &PermSpec) -> Result<CMat> {
    if !theta.is_square() || theta.rows() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "permute_conjugate: {}x{} with permutation on {}",
            theta.rows(),
            theta.cols(),
            p.dim()
        )));
    }
    let d = p.dim();
    let mut out = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out.set(i, j, theta.get(p.apply(i), p.apply(j)));
        }
    }
    Ok(out)
}

/// The normalised vector of ones `|J>` and the matrix of ones `J_d`.
pub fn ones_objects(d: usize) -> (CVec, CMat) {
    let v = CVec {
        entries: vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d],
    };
    let m = CMat {
        rows: d,
        cols: d,
        entries: vec![C64::new(1.0, 0.0); d * d],
    };
    (v, m)
}

/// Singular values of `M` in descending order.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    let svd = m
        .to_nalgebra()
        .try_svd(false, false, 1e-14, 10_000)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "SVD failed to converge on a {}x{} matrix",
                m.rows(),
                m.cols()
            ))
        })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(s)
}

/// Maximum singular value; for normal matrices this is `e_max`.
pub fn max_singular_value(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?[0])
}

/// Full SVD `M = U diag(s) V^dag`, singular values descending.
pub fn svd(m: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let svd = m
        .to_nalgebra()
        .try_svd(true, true, 1e-14, 10_000)
        .ok_or_else(|| Error::Numerical("SVD failed to converge".into()))?;
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let s: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let mut um = CMat::zeros(u.nrows(), idx.len());
    let mut vm = CMat::zeros(vt.ncols(), idx.len());
    for (col, &i) in idx.iter().enumerate() {
        for r in 0..u.nrows() {
            um.set(r, col, u[(r, i)]);
        }
        for r in 0..vt.ncols() {
            vm.set(r, col, vt[(i, r)].conj());
        }
    }
    Ok((um, s, vm))
}

/// Tests `M` for normality, unitarity, and projector structure at tolerance `tol`.
pub fn matrix_flags(m: &CMat, tol: f64) -> Result<MatrixFlags> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("matrix_flags needs a square matrix".into()));
    }
    let adj = m.adjoint();
    let mmd = m.mul(&adj)?;
    let mdm = adj.mul(m)?;
    let normal = frobenius_norm(&mmd.sub(&mdm)?) <= tol;
    let unitary = frobenius_norm(&mmd.sub(&CMat::identity(m.rows()))?) <= tol;
    let idem = frobenius_norm(&m.mul(m)?.sub(m)?) <= tol;
    let herm = frobenius_norm(&m.sub(&adj)?) <= tol;
    Ok(MatrixFlags {
        normal,
        unitary,
        projector: idem && herm,
    })
}
