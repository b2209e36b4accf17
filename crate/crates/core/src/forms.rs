//! The classical form `C(theta)`, quantum form `Q(theta)`, the suprema
//! `g(theta)` and `g'(theta)`, classification into the ultra-quantum set,
//! and the necessary-condition checker for `Q > 1`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    frobenius_norm, matrix_flags, max_singular_value, permute_conjugate, svd, trace_product, CMat,
    PermSpec,
};
use crate::rescaling::{capacity, certify};
use crate::sampling::rng_from_seed;
use rand::Rng;

/// Published upper bound on the complex Grothendieck constant.
pub const KG_UPPER: f64 = 1.4049;

/// Relative convergence tolerance of the phase ascent.
const ASCENT_REL_TOL: f64 = 1e-12;

/// Unit-modulus coefficient vectors witnessing a value of the classical form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PhaseAssignmentWire", into = "PhaseAssignmentWire")]
pub struct PhaseAssignment {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub value: f64,
}

#[derive(Serialize, Deserialize)]
struct PhaseAssignmentWire {
    a: Vec<[f64; 2]>,
    b: Vec<[f64; 2]>,
    value: f64,
}

impl TryFrom<PhaseAssignmentWire> for PhaseAssignment {
    type Error = Error;
    fn try_from(w: PhaseAssignmentWire) -> Result<Self> {
        let conv = |v: &[[f64; 2]]| v.iter().map(|&[re, im]| C64::new(re, im)).collect::<Vec<_>>();
        let pa = PhaseAssignment {
            a: conv(&w.a),
            b: conv(&w.b),
            value: w.value,
        };
        for z in pa.a.iter().chain(&pa.b) {
            if z.norm() > 1.0 + 1e-12 {
                return Err(Error::InvalidInput("phase assignment outside unit disc".into()));
            }
        }
        Ok(pa)
    }
}

impl From<PhaseAssignment> for PhaseAssignmentWire {
    fn from(p: PhaseAssignment) -> Self {
        let conv = |v: &[C64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
        PhaseAssignmentWire {
            a: conv(&p.a),
            b: conv(&p.b),
            value: p.value,
        }
    }
}

/// How the `g` estimate in a report was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GEstKind {
    /// Closed form or exhaustive grid plus refinement; treated as the exact target.
    GridRefinedExactTarget,
    /// Multistart ascent only; a certified lower bound on `g`.
    AscentLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    InGPrime,
    InGMinusGPrime,
    OutsideG,
    Unknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationAt {
    pub lambda: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerInfo {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub converged_restarts: usize,
}

/// Full analysis of a matrix: `g` estimate, `g'`, singular data,
/// ultra-quantum scaling window, and optimizer provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrothendieckReport {
    pub d: usize,
    pub g_est: f64,
    pub g_est_kind: GEstKind,
    pub g_prime: f64,
    pub s_max: f64,
    pub witness: PhaseAssignment,
    pub window_lo: f64,
    pub window_hi: f64,
    pub classification_at: Option<ClassificationAt>,
    pub optimizer: OptimizerInfo,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOpts {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub lambda: Option<f64>,
    pub tol: f64,
}

impl Default for AnalyzeOpts {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 500,
            seed: 42,
            lambda: None,
            tol: 1e-9,
        }
    }
}

fn check_unit_disc(xs: &[C64], name: &str) -> Result<()> {
    for (i, z) in xs.iter().enumerate() {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "|{name}_{i}| = {} exceeds the unit disc",
                z.norm()
            )));
        }
    }
    Ok(())
}

fn bilinear(theta: &CMat, a: &[C64], b: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..theta.rows() {
        let row = theta.row(r);
        let mut inner = C64::new(0.0, 0.0);
        for (s, t) in row.iter().enumerate() {
            inner += t * b[s];
        }
        acc += a[r] * inner;
    }
    acc
}

/// Classical quadratic form `|sum theta_rs a_r b_s|` with unit-disc coefficients.
pub fn classical_form(theta: &CMat, a: &[C64], b: &[C64]) -> Result<f64> {
    if !theta.is_square() || a.len() != theta.rows() || b.len() != theta.rows() {
        return Err(Error::DimensionMismatch("classical_form shape mismatch".into()));
    }
    check_unit_disc(a, "a")?;
    check_unit_disc(b, "b")?;
    Ok(bilinear(theta, a, b).norm())
}

/// Quantum quadratic form `|Tr(theta V W^dag)|` with `V, W` in `S_d`.
pub fn quantum_form(theta: &CMat, v: &CMat, w: &CMat) -> Result<f64> {
    for (m, name) in [(v, "V"), (w, "W")] {
        let cap = capacity(m);
        if cap > 1.0 + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "{name} is not in S_d: capacity {cap}"
            )));
        }
    }
    quantum_form_unchecked(theta, v, w)
}

/// Diagnostic variant of [`quantum_form`] that skips the `S_d` membership check.
pub fn quantum_form_unchecked(theta: &CMat, v: &CMat, w: &CMat) -> Result<f64> {
    let vw = v.mul(&w.adjoint())?;
    Ok(trace_product(theta, &vw)?.norm())
}

/// `g'(theta) = d * s_max(theta)`.
pub fn g_prime(theta: &CMat) -> Result<f64> {
    if !theta.is_square() {
        return Err(Error::DimensionMismatch("g_prime needs a square matrix".into()));
    }
    Ok(theta.rows() as f64 * max_singular_value(theta)?)
}

fn unit_phases(xs: &[C64], fallback: &[C64]) -> Vec<C64> {
    xs.iter()
        .zip(fallback)
        .map(|(z, old)| {
            let n = z.norm();
            if n > 0.0 {
                (z / n).conj()
            } else {
                *old // undetermined update: keep the previous phase
            }
        })
        .collect()
}

fn theta_times_b(theta: &CMat, b: &[C64]) -> Vec<C64> {
    (0..theta.rows())
        .map(|r| theta.row(r).iter().zip(b).map(|(t, x)| t * x).sum())
        .collect()
}

fn a_times_theta(theta: &CMat, a: &[C64]) -> Vec<C64> {
    let d = theta.rows();
    let mut out = vec![C64::new(0.0, 0.0); d];
    for r in 0..d {
        let ar = a[r];
        for (s, t) in theta.row(r).iter().enumerate() {
            out[s] += ar * t;
        }
    }
    out
}

/// One ascent run from a given start; returns (value, a, b, converged).
fn ascent_from(
    theta: &CMat,
    mut a: Vec<C64>,
    mut b: Vec<C64>,
    max_iters: usize,
) -> (f64, Vec<C64>, Vec<C64>, bool) {
    let mut prev = bilinear(theta, &a, &b).norm();
    let mut converged = false;
    for _ in 0..max_iters {
        let tb = theta_times_b(theta, &b);
        a = unit_phases(&tb, &a);
        #[cfg(debug_assertions)]
        {
            let half: f64 = bilinear(theta, &a, &b).norm();
            debug_assert!(half >= prev - 1e-9 * prev.max(1.0), "half-step decreased");
        }
        let at = a_times_theta(theta, &a);
        b = unit_phases(&at, &b);
        let value = bilinear(theta, &a, &b).norm();
        debug_assert!(value >= prev - 1e-9 * prev.max(1.0), "full step decreased");
        if value - prev < ASCENT_REL_TOL * value.max(1.0) {
            converged = true;
            prev = value.max(prev);
            break;
        }
        prev = value;
    }
    (prev, a, b, converged)
}

/// Multistart alternating phase ascent for `g(theta)`.
///
/// Runs two deterministic starts (all ones; conjugate phases of the row sums)
/// plus `restarts` seeded random starts, and returns the best value together
/// with the witnessing phase assignment. The result is a certified lower
/// bound on `g(theta)`.
pub fn g_ascent(
    theta: &CMat,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<(f64, PhaseAssignment, usize)> {
    if !theta.is_square() {
        return Err(Error::DimensionMismatch("g_ascent needs a square matrix".into()));
    }
    let d = theta.rows();
    let one = C64::new(1.0, 0.0);
    if frobenius_norm(theta) == 0.0 {
        return Ok((
            0.0,
            PhaseAssignment {
                a: vec![one; d],
                b: vec![one; d],
                value: 0.0,
            },
            0,
        ));
    }

    let mut starts: Vec<(Vec<C64>, Vec<C64>)> = Vec::with_capacity(restarts + 2);
    starts.push((vec![one; d], vec![one; d]));
    let row_sums = theta_times_b(theta, &vec![one; d]);
    starts.push((unit_phases(&row_sums, &vec![one; d]), vec![one; d]));
    let mut rng = rng_from_seed(seed);
    for _ in 0..restarts {
        let rand_phases = |rng: &mut rand_chacha::ChaCha8Rng| {
            (0..d)
                .map(|_| C64::from_polar(1.0, rng.gen_range(0.0..2.0 * std::f64::consts::PI)))
                .collect::<Vec<_>>()
        };
        let a = rand_phases(&mut rng);
        let b = rand_phases(&mut rng);
        starts.push((a, b));
    }

    let mut best: Option<(f64, Vec<C64>, Vec<C64>)> = None;
    let mut converged_count = 0;
    for (a0, b0) in starts {
        let (value, a, b, converged) = ascent_from(theta, a0, b0, max_iters);
        if converged {
            converged_count += 1;
        }
        // strictly-greater keeps the earliest start on ties: deterministic
        // regardless of evaluation order by (value, start index)
        if best.as_ref().map_or(true, |(v, _, _)| value > *v) {
            best = Some((value, a, b));
        }
    }
    let (value, a, b) = best.expect("at least two starts");
    Ok((
        value,
        PhaseAssignment { a, b, value },
        converged_count,
    ))
}

/// Brute-force oracle for `g(theta)` at small dimension.
///
/// Enumerates `a` over the `K`-th roots of unity (the optimum lies on the
/// torus since the form is bilinear with modulus constraints); for each `a`
/// the optimal `b` is exact (`sum_s |(a^T theta)_s|`). The best grid point is
/// refined with one ascent run.
pub fn g_grid(theta: &CMat, k: usize) -> Result<f64> {
    Ok(g_grid_with_witness(theta, k)?.0)
}

pub fn g_grid_with_witness(theta: &CMat, k: usize) -> Result<(f64, PhaseAssignment)> {
    if !theta.is_square() {
        return Err(Error::DimensionMismatch("g_grid needs a square matrix".into()));
    }
    let d = theta.rows();
    if d > 3 {
        return Err(Error::InvalidInput(format!(
            "g_grid rejects d = {d} > 3 (combinatorial blowup)"
        )));
    }
    if k < 8 {
        return Err(Error::InvalidInput("g_grid needs K >= 8".into()));
    }
    let phases: Vec<C64> = (0..k)
        .map(|j| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect();

    let one = C64::new(1.0, 0.0);
    let mut best_val = -1.0;
    let mut best_a = vec![one; d];
    let mut idx = vec![0usize; d];
    loop {
        let a: Vec<C64> = idx.iter().map(|&i| phases[i]).collect();
        let at = a_times_theta(theta, &a);
        let val: f64 = at.iter().map(|z| z.norm()).sum();
        if val > best_val {
            best_val = val;
            best_a = a;
        }
        // odometer over the K^d grid
        let mut pos = 0;
        loop {
            if pos == d {
                break;
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == d {
            break;
        }
    }

    let b_opt = unit_phases(&a_times_theta(theta, &best_a), &vec![one; d]);
    let (value, a, b, _) = ascent_from(theta, best_a, b_opt, 10_000);
    let value = value.max(best_val);
    Ok((value, PhaseAssignment { a, b, value }))
}

/// Closed-form `g(theta)` for the templates the formalism solves exactly:
/// diagonal matrices, rank-one matrices, and the 2x2 tunnelling template.
pub fn closed_form_g(theta: &CMat) -> Option<f64> {
    if !theta.is_square() {
        return None;
    }
    let d = theta.rows();

    let diagonal = (0..d).all(|r| {
        (0..d).all(|s| r == s || theta.get(r, s).norm() <= 1e-14)
    });
    if diagonal {
        return Some((0..d).map(|r| theta.get(r, r).norm()).sum());
    }

    // exDC template: (m/k) [[1, B], [B, B^2]] with real B in (0, 1]
    if d == 2 {
        let t = theta.get(0, 0);
        if t.im.abs() <= 1e-12 && t.re > 0.0 {
            let b = theta.get(0, 1) / t.re;
            if b.im.abs() <= 1e-12 && b.re > 0.0 && b.re <= 1.0 {
                let b = b.re;
                let matches = (theta.get(1, 0) - C64::new(t.re * b, 0.0)).norm() <= 1e-12
                    && (theta.get(1, 1) - C64::new(t.re * b * b, 0.0)).norm() <= 1e-12;
                if matches {
                    return Some(t.re * (1.0 + b) * (1.0 + b));
                }
            }
        }
    }

    // rank one: theta = f g^dag detected through the singular value gap
    if let Ok((u, s, v)) = svd(theta) {
        if s[0] > 0.0 && s.iter().skip(1).all(|&x| x < 1e-10) {
            let sum_u: f64 = (0..d).map(|r| u.get(r, 0).norm()).sum();
            let sum_v: f64 = (0..d).map(|r| v.get(r, 0).norm()).sum();
            return Some(s[0] * sum_u * sum_v);
        }
    }

    None
}

/// Default grid resolution per dimension.
fn default_grid_k(d: usize) -> usize {
    if d <= 2 {
        16
    } else {
        8
    }
}

/// Computes the full report: `s_max`, `g'`, the best available `g` estimate,
/// the ultra-quantum window, and an optional classification of `lambda theta`.
pub fn analyze(theta: &CMat, opts: &AnalyzeOpts) -> Result<GrothendieckReport> {
    if !theta.is_square() {
        return Err(Error::DimensionMismatch("analyze needs a square matrix".into()));
    }
    if frobenius_norm(theta) == 0.0 {
        return Err(Error::InvalidInput("analyze rejects the zero matrix".into()));
    }
    let d = theta.rows();
    let s_max = max_singular_value(theta)?;
    let gp = d as f64 * s_max;

    let (ascent_val, ascent_witness, converged) =
        g_ascent(theta, opts.restarts, opts.max_iters, opts.seed)?;

    let (g_est, kind, witness) = if let Some(cf) = closed_form_g(theta) {
        (cf, GEstKind::GridRefinedExactTarget, ascent_witness)
    } else if d <= 3 {
        let (gv, w) = g_grid_with_witness(theta, default_grid_k(d))?;
        let (gv, w) = if ascent_val > gv { (ascent_val, ascent_witness) } else { (gv, w) };
        (gv, GEstKind::GridRefinedExactTarget, w)
    } else {
        (ascent_val, GEstKind::AscentLowerBound, ascent_witness)
    };

    let window_lo = 1.0 / gp;
    let window_hi = 1.0 / g_est;

    let classification_at = opts.lambda.map(|lambda| {
        let verdict = if lambda <= window_lo + opts.tol {
            Verdict::InGPrime
        } else if kind == GEstKind::GridRefinedExactTarget {
            if lambda <= window_hi + opts.tol {
                Verdict::InGMinusGPrime
            } else {
                Verdict::OutsideG
            }
        } else {
            // an ascent value only lower-bounds g, so membership in G_d
            // beyond G' cannot be certified
            Verdict::Unknown
        };
        ClassificationAt { lambda, verdict }
    });

    Ok(GrothendieckReport {
        d,
        g_est,
        g_est_kind: kind,
        g_prime: gp,
        s_max,
        witness,
        window_lo,
        window_hi,
        classification_at,
        optimizer: OptimizerInfo {
            restarts: opts.restarts,
            max_iters: opts.max_iters,
            seed: opts.seed,
            converged_restarts: converged,
        },
    })
}

/// `|Tr((theta/g) (V/N(V)) (W/N(W))^dag)|`; bounded by [`KG_UPPER`] when
/// `g` is a certified `g(theta)`.
pub fn normalized_q(theta: &CMat, v: &CMat, w: &CMat, g_value: f64) -> Result<f64> {
    if g_value <= 0.0 {
        return Err(Error::InvalidInput("g_value must be positive".into()));
    }
    let nv = capacity(v);
    let nw = capacity(w);
    if nv == 0.0 || nw == 0.0 {
        return Err(Error::InvalidInput("zero-capacity matrix".into()));
    }
    quantum_form_unchecked(
        &theta.scale_re(1.0 / g_value),
        &v.scale_re(1.0 / nv),
        &w.scale_re(1.0 / nw),
    )
}

/// Outcome of the necessary-condition check for `Q(lambda theta) > 1`.
///
/// The three requirements are jointly necessary but not sufficient; a report
/// with all of them satisfied does not certify an ultra-quantum value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NecessaryConditionReport {
    pub lambda: f64,
    pub g_est: f64,
    pub g_est_kind: GEstKind,
    pub d_e_max: f64,
    /// Guarantee from the unconditional part: `lambda <= 1/(d e_max)`
    /// forces `Q <= 1` for every pair in `S_d`.
    pub q_le_1_guaranteed: bool,
    /// Strict gap `g < d e_max` and `lambda` inside the scaling window.
    pub req_window: bool,
    /// `lambda theta` has an off-diagonal entry above tolerance.
    pub req_offdiagonal: bool,
    /// At least one of `V`, `W` is a proper rescaling matrix (`S_d \ T_d`).
    pub req_proper_rescaling: bool,
    pub all_requirements_hold: bool,
    /// Always false as a *sufficient* criterion; the condition is only necessary.
    pub sufficient: bool,
}

/// Evaluates the necessary condition for `Q(lambda theta) > 1` on a normal matrix.
pub fn necessary_condition_report(
    theta: &CMat,
    lambda: f64,
    v: &CMat,
    w: &CMat,
    opts: &AnalyzeOpts,
) -> Result<NecessaryConditionReport> {
    if lambda <= 0.0 {
        return Err(Error::InvalidInput("lambda must be positive".into()));
    }
    if !matrix_flags(theta, opts.tol.max(1e-9))?.normal {
        return Err(Error::InvalidInput(
            "necessary_condition_report requires a normal matrix".into(),
        ));
    }
    let d = theta.rows();
    // for normal theta, e_max equals s_max
    let e_max = max_singular_value(theta)?;
    let d_e_max = d as f64 * e_max;

    let (g_est, kind) = if let Some(cf) = closed_form_g(theta) {
        (cf, GEstKind::GridRefinedExactTarget)
    } else if d <= 3 {
        (g_grid(theta, default_grid_k(d))?, GEstKind::GridRefinedExactTarget)
    } else {
        let (gv, _, _) = g_ascent(theta, opts.restarts, opts.max_iters, opts.seed)?;
        (gv, GEstKind::AscentLowerBound)
    };

    let q_le_1_guaranteed = lambda <= 1.0 / d_e_max + 1e-12;
    let strict_gap = g_est + 1e-9 < d_e_max;
    let in_window = lambda > 1.0 / d_e_max && lambda <= 1.0 / g_est + 1e-12;
    let req_window = strict_gap && in_window;

    let req_offdiagonal = (0..d).any(|r| {
        (0..d).any(|s| r != s && lambda * theta.get(r, s).norm() > opts.tol)
    });

    let cert_v = certify(v, opts.tol);
    let cert_w = certify(w, opts.tol);
    let req_proper_rescaling =
        (cert_v.in_s && !cert_v.in_t) || (cert_w.in_s && !cert_w.in_t);

    Ok(NecessaryConditionReport {
        lambda,
        g_est,
        g_est_kind: kind,
        d_e_max,
        q_le_1_guaranteed,
        req_window,
        req_offdiagonal,
        req_proper_rescaling,
        all_requirements_hold: req_window && req_offdiagonal && req_proper_rescaling,
        sufficient: false,
    })
}

/// Verifies that the quantum form, `g'`, and the capacities are invariant
/// under simultaneous conjugation by the permutation matrix of `p`.
pub fn permutation_invariance_check(
    theta: &CMat,
    v: &CMat,
    w: &CMat,
    p: &PermSpec,
) -> Result<bool> {
    let q = quantum_form_unchecked(theta, v, w)?;
    let theta_p = permute_conjugate(theta, p)?;
    let v_p = permute_conjugate(v, p)?;
    let w_p = permute_conjugate(w, p)?;
    let q_p = quantum_form_unchecked(&theta_p, &v_p, &w_p)?;
    if (q - q_p).abs() > 1e-10 {
        return Ok(false);
    }
    if (g_prime(theta)? - g_prime(&theta_p)?).abs() > 1e-9 {
        return Ok(false);
    }
    // permuting rows and columns permutes the row norms; the column
    // reordering only perturbs the sums at rounding level
    if (capacity(v) - capacity(&v_p)).abs() > 1e-12
        || (capacity(w) - capacity(&w_p)).abs() > 1e-12
    {
        return Ok(false);
    }
    Ok(true)
}
