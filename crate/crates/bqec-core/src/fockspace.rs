//! Truncated Fock-space linear algebra.
//!
//! Dense storage throughout: the dimensions in this problem stay at or below a
//! few hundred, so sparsity machinery would buy nothing. Hermitian eigenwork on
//! complex matrices goes through the real symmetric embedding
//! `[[X, -Y], [Y, X]]`, which commutes with matrix functions, so `f(M)` is read
//! off the blocks of `f(embed(M))` without any eigenvector pairing logic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("matrix is not Hermitian: max |M - M^H| = {defect:.3e}")]
    NotHermitian { defect: f64 },
    #[error("significantly negative eigenvalue {value:.3e}; upstream construction bug, not noise")]
    SignificantlyNegativeEigenvalue { value: f64 },
    #[error("dimension mismatch: {rows} rows, expected {expected}")]
    DimensionMismatch { rows: usize, expected: usize },
    #[error("state vector norm {norm} deviates from 1 beyond 1e-9")]
    NotNormalized { norm: f64 },
    #[error("parity flag {parity:?} inconsistent with support (off-parity weight {weight:.3e})")]
    ParityMismatch { parity: Parity, weight: f64 },
}

/// Photon-number parity of a state's support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Parity {
    Even,
    Odd,
    Indefinite,
}

/// A pure state on the truncated Fock space `span{|0>, ..., |N>}`.
#[derive(Debug, Clone)]
pub struct FockVector {
    cutoff: usize,
    amps: DVector<Complex64>,
    parity: Parity,
}

impl FockVector {
    /// Builds a normalized state, verifying norm and parity-flag consistency.
    pub fn new(amps: Vec<Complex64>, parity: Parity) -> Result<Self, FockError> {
        assert!(!amps.is_empty());
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(FockError::NotNormalized { norm });
        }
        let fv = FockVector {
            cutoff: v.len() - 1,
            amps: v,
            parity,
        };
        fv.check_parity()?;
        Ok(fv)
    }

    /// Real amplitudes, as produced by all closed forms of the generated family.
    pub fn from_real(amps: Vec<f64>, parity: Parity) -> Result<Self, FockError> {
        Self::new(
            amps.into_iter().map(|a| Complex64::new(a, 0.0)).collect(),
            parity,
        )
    }

    fn check_parity(&self) -> Result<(), FockError> {
        let off = match self.parity {
            Parity::Indefinite => return Ok(()),
            Parity::Even => 1,
            Parity::Odd => 0,
        };
        let weight = self
            .amps
            .iter()
            .enumerate()
            .filter(|(j, _)| j % 2 == off)
            .map(|(_, a)| a.norm())
            .fold(0.0f64, f64::max);
        if weight > 1e-12 {
            return Err(FockError::ParityMismatch {
                parity: self.parity,
                weight,
            });
        }
        Ok(())
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn amp(&self, j: usize) -> Complex64 {
        self.amps[j]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "cutoff mismatch");
        self.amps.dotc(&other.amps)
    }

    /// `<n>` evaluated directly on the amplitudes.
    pub fn mean_n(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(j, a)| j as f64 * a.norm_sqr())
            .sum()
    }

    /// Amplitudes as reals; the generated family is real in the Fock basis.
    /// Panics if any imaginary part exceeds 1e-10.
    pub fn real_amplitudes(&self) -> Vec<f64> {
        self.amps
            .iter()
            .map(|a| {
                debug_assert!(a.im.abs() < 1e-10, "non-real amplitude {a}");
                a.re
            })
            .collect()
    }

    /// Re-embeds into a larger cutoff, padding with zeros.
    pub fn pad_to(&self, cutoff: usize) -> FockVector {
        assert!(cutoff >= self.cutoff);
        let mut amps = DVector::zeros(cutoff + 1);
        amps.rows_mut(0, self.dim()).copy_from(&self.amps);
        FockVector {
            cutoff,
            amps,
            parity: self.parity,
        }
    }
}

/// Density operator on the truncated space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    cutoff: usize,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-9) and PSD (eigenvalues >= -1e-9).
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self, FockError> {
        assert_eq!(mat.nrows(), mat.ncols());
        let defect = hermiticity_defect(&mat);
        if defect > 1e-10 {
            return Err(FockError::NotHermitian { defect });
        }
        let tr: Complex64 = mat.diagonal().iter().sum();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(FockError::NotNormalized { norm: tr.re });
        }
        let eigs = hermitian_eigenvalues(&mat);
        if let Some(min) = eigs.iter().cloned().reduce(f64::min) {
            if min < -1e-9 {
                return Err(FockError::SignificantlyNegativeEigenvalue { value: min });
            }
        }
        Ok(DensityMatrix {
            cutoff: mat.nrows() - 1,
            mat,
        })
    }

    pub fn pure(state: &FockVector) -> DensityMatrix {
        let v = state.amplitudes();
        let mat = v * v.adjoint();
        DensityMatrix {
            cutoff: state.cutoff(),
            mat,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn mean_n(&self) -> f64 {
        self.mat
            .diagonal()
            .iter()
            .enumerate()
            .map(|(j, c)| j as f64 * c.re)
            .sum()
    }

    /// Unchecked wrapper for intermediate results (e.g. unnormalized Kraus terms).
    pub fn from_raw(mat: DMatrix<Complex64>) -> DensityMatrix {
        DensityMatrix {
            cutoff: mat.nrows() - 1,
            mat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorLabel {
    Annihilation,
    Number,
    Squeeze(f64),
    Generic,
}

/// Labeled dense operator on the truncated space.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    cutoff: usize,
    mat: DMatrix<Complex64>,
    label: OperatorLabel,
}

impl OperatorMatrix {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn label(&self) -> OperatorLabel {
        self.label
    }

    pub fn apply(&self, v: &FockVector) -> DVector<Complex64> {
        &self.mat * v.amplitudes()
    }
}

/// Annihilation operator: `<j-1| a |j> = sqrt(j)`.
pub fn annihilation_matrix(cutoff: usize) -> OperatorMatrix {
    assert!(cutoff >= 1);
    let n = cutoff + 1;
    let mut mat = DMatrix::zeros(n, n);
    for j in 1..n {
        mat[(j - 1, j)] = Complex64::new((j as f64).sqrt(), 0.0);
    }
    OperatorMatrix {
        cutoff,
        mat,
        label: OperatorLabel::Annihilation,
    }
}

/// Number operator: diagonal `j`.
pub fn number_matrix(cutoff: usize) -> OperatorMatrix {
    let n = cutoff + 1;
    let mut mat = DMatrix::zeros(n, n);
    for j in 0..n {
        mat[(j, j)] = Complex64::new(j as f64, 0.0);
    }
    OperatorMatrix {
        cutoff,
        mat,
        label: OperatorLabel::Number,
    }
}

/// Squeezing operator on the truncated space, by scaling-and-squaring matrix
/// exponential of the truncated generator.
///
/// The generator sign is fixed so that `squeeze_matrix(r) * (sum_k A_k |k>)`
/// reproduces the closed-form Fock expansions of the generated family and the
/// parameter tables: positive `r` squeezes the x quadrature
/// (`Var x = e^{-2r}/2` on vacuum). Column-0 squared magnitudes stay normalized
/// within truncation tolerance for `r <= 1.5`, `N >= 60`.
pub fn squeeze_matrix(r: f64, cutoff: usize) -> OperatorMatrix {
    let n = cutoff + 1;
    let mut gen = DMatrix::<f64>::zeros(n, n);
    // (r/2) (a^2 - (a^dag)^2): a^2 has <j-2| a^2 |j> = sqrt(j(j-1))
    for j in 2..n {
        let w = ((j * (j - 1)) as f64).sqrt() * r / 2.0;
        gen[(j - 2, j)] = w;
        gen[(j, j - 2)] = -w;
    }
    let e = expm_real(&gen);
    OperatorMatrix {
        cutoff,
        mat: e.map(|x| Complex64::new(x, 0.0)),
        label: OperatorLabel::Squeeze(r),
    }
}

/// Matrix exponential of a real matrix by scaling and squaring with a
/// fixed-order Taylor kernel. Deterministic; serves both the squeezing
/// operator and the beam-splitter blocks of the two-mode oracle.
pub(crate) fn expm_real(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.iter().map(|x| x.abs()).fold(0.0f64, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        ((norm / 0.5).log2().ceil() as u32).min(48)
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings as i32);
    let ms = m * scale;
    // Taylor to order 18 on the scaled matrix (||ms|| <= 0.5 gives ~1e-17 truncation)
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=18 {
        term = (&term * &ms) / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub(crate) fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut defect = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

/// Real symmetric embedding of a Hermitian matrix: `[[X, -Y], [Y, X]]`.
fn embed_hermitian(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = m[(i, j)];
            e[(i, j)] = c.re;
            e[(i + n, j + n)] = c.re;
            e[(i, j + n)] = -c.im;
            e[(i + n, j)] = c.im;
        }
    }
    e
}

/// Eigenvalues of a Hermitian complex matrix (each appears once).
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    let emb = embed_hermitian(m);
    let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(emb).eigenvalues.iter().cloned().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // doubled spectrum: take every other one
    (0..n).map(|i| eig[2 * i]).collect()
}

/// Applies a spectral function to a Hermitian complex matrix through the real
/// embedding: `f(embed(M)) = embed(f(M))`.
pub(crate) fn hermitian_matrix_function<F: Fn(f64) -> f64>(
    m: &DMatrix<Complex64>,
    f: F,
) -> DMatrix<Complex64> {
    let n = m.nrows();
    let emb = embed_hermitian(m);
    let se = nalgebra::SymmetricEigen::new(emb);
    let vals = se.eigenvalues.map(f);
    let v = &se.eigenvectors;
    let scaled = v * DMatrix::from_diagonal(&vals);
    let fj = scaled * v.transpose();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = Complex64::new(fj[(i, j)], fj[(i + n, j)]);
        }
    }
    out
}

/// Eigendecomposition-based PSD square root with negative-eigenvalue clamping.
///
/// `M` must be Hermitian within 1e-10 and have eigenvalues above -1e-6 scaled
/// by the largest eigenvalue; eigenvalues below that signal an upstream bug.
/// Small negatives (Gram-matrix noise) are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, FockError> {
    let defect = hermiticity_defect(m);
    if defect > 1e-10 {
        return Err(FockError::NotHermitian { defect });
    }
    let eigs = hermitian_eigenvalues(m);
    let max = eigs.iter().cloned().fold(0.0f64, f64::max);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-6 * max.max(1.0) {
        return Err(FockError::SignificantlyNegativeEigenvalue { value: min });
    }
    Ok(hermitian_matrix_function(m, |x| x.max(0.0).sqrt()))
}

/// Partial trace over the logical (codeword) index of a `2K x 2K` matrix with
/// composite row index `[mu l] = mu*K + l`: output `(l,k) = M[l,k] + M[K+l,K+k]`.
pub fn partial_trace_logical(
    m: &DMatrix<Complex64>,
    kraus_count: usize,
) -> Result<DMatrix<Complex64>, FockError> {
    let k = kraus_count;
    if m.nrows() != 2 * k || m.ncols() != 2 * k {
        return Err(FockError::DimensionMismatch {
            rows: m.nrows(),
            expected: 2 * k,
        });
    }
    let mut out = DMatrix::zeros(k, k);
    for l in 0..k {
        for c in 0..k {
            out[(l, c)] = m[(l, c)] + m[(k + l, k + c)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cplx(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn annihilation_entries() {
        let a = annihilation_matrix(1);
        assert_eq!(a.matrix()[(0, 1)], cplx(1.0));
        assert_eq!(a.matrix()[(1, 0)], cplx(0.0));
        let a = annihilation_matrix(4);
        assert!((a.matrix()[(2, 3)] - cplx(3f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn commutator_is_identity_off_the_corner() {
        for n in [3usize, 8, 20] {
            let a = annihilation_matrix(n);
            let ad = a.matrix().adjoint();
            let comm = a.matrix() * &ad - &ad * a.matrix();
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((comm[(i, j)] - cplx(want)).norm() < 1e-13);
                }
            }
            // the (N, N) corner deviates by truncation: equals -N instead of 1
            assert!((comm[(n, n)] - cplx(-(n as f64))).norm() < 1e-10);
        }
    }

    #[test]
    fn squeeze_identity_at_zero() {
        let s = squeeze_matrix(0.0, 10);
        for i in 0..=10 {
            for j in 0..=10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s.matrix()[(i, j)] - cplx(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn squeeze_vacuum_overlap_matches_closed_form() {
        // <0|S(r)|0> = cosh(r)^{-1/2}
        let s = squeeze_matrix(0.5, 50);
        let want = 1.0 / 0.5f64.cosh().sqrt();
        assert!((s.matrix()[(0, 0)].re - want).abs() < 1e-12);
        assert!((want - 0.9418).abs() < 1e-4);
    }

    #[test]
    fn squeeze_column_norms_are_unitary_within_truncation() {
        for &r in &[0.3, 0.9, 1.5] {
            let s = squeeze_matrix(r, 60);
            let col = s.matrix().column(0);
            let norm: f64 = col.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-10, "r={r} norm={norm}");
        }
    }

    #[test]
    fn squeeze_inverse_on_low_block() {
        for &r in &[0.4, 1.5] {
            let n = 60;
            let p = squeeze_matrix(r, n);
            let q = squeeze_matrix(-r, n);
            let prod = p.matrix() * q.matrix();
            for i in 0..=n / 2 {
                for j in 0..=n / 2 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (prod[(i, j)] - cplx(want)).norm() < 1e-8,
                        "r={r} ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn psd_sqrt_identity_and_diagonal() {
        let id = DMatrix::<Complex64>::identity(4, 4);
        let s = psd_sqrt(&id).unwrap();
        assert!((&s - &id).iter().all(|c| c.norm() < 1e-12));
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![cplx(4.0), cplx(9.0)]));
        let s = psd_sqrt(&d).unwrap();
        assert!((s[(0, 0)] - cplx(2.0)).norm() < 1e-12);
        assert!((s[(1, 1)] - cplx(3.0)).norm() < 1e-12);
    }

    #[test]
    fn psd_sqrt_reconstructs_random_hermitian_psd() {
        // deterministic pseudo-random 6x6 PSD, complex
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let b = DMatrix::from_fn(6, 6, |_, _| Complex64::new(next(), next()));
        let m = &b * b.adjoint();
        let s = psd_sqrt(&m).unwrap();
        // result is Hermitian PSD and reconstructs M
        assert!(hermiticity_defect(&s) < 1e-10);
        let err = (&s * &s - &m).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let scale = m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        assert!(err <= 1e-8 * scale, "err={err}");
    }

    #[test]
    fn psd_sqrt_rejects_non_hermitian_and_indefinite() {
        let mut m = DMatrix::<Complex64>::identity(3, 3);
        m[(0, 1)] = cplx(0.5);
        assert!(matches!(psd_sqrt(&m), Err(FockError::NotHermitian { .. })));
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![cplx(1.0), cplx(-0.1)]));
        assert!(matches!(
            psd_sqrt(&d),
            Err(FockError::SignificantlyNegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn partial_trace_cases() {
        // identity 2K -> 2 I_K
        let k = 3;
        let m = DMatrix::<Complex64>::identity(2 * k, 2 * k);
        let t = partial_trace_logical(&m, k).unwrap();
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 2.0 } else { 0.0 };
                assert_eq!(t[(i, j)], cplx(want));
            }
        }
        // K=1 full trace
        let m = DMatrix::from_row_slice(2, 2, &[cplx(1.0), cplx(2.0), cplx(3.0), cplx(4.0)]);
        let t = partial_trace_logical(&m, 1).unwrap();
        assert_eq!(t[(0, 0)], cplx(5.0));
        // K=2 diag(1,2,3,4) -> diag(4,6)
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            cplx(1.0),
            cplx(2.0),
            cplx(3.0),
            cplx(4.0),
        ]));
        let t = partial_trace_logical(&m, 2).unwrap();
        assert_eq!(t[(0, 0)], cplx(4.0));
        assert_eq!(t[(1, 1)], cplx(6.0));
        // dimension mismatch
        assert!(partial_trace_logical(&m, 3).is_err());
    }

    #[test]
    fn fock_vector_validation() {
        let v = FockVector::from_real(vec![1.0, 0.0, 0.0], Parity::Even).unwrap();
        assert_eq!(v.parity(), Parity::Even);
        assert!(FockVector::from_real(vec![0.9, 0.0], Parity::Even).is_err());
        assert!(FockVector::from_real(vec![0.0, 1.0], Parity::Even).is_err());
        assert!(FockVector::from_real(vec![0.0, 1.0], Parity::Odd).is_ok());
    }

    #[test]
    fn parity_preserved_by_number_flipped_by_annihilation() {
        let v = FockVector::from_real(
            vec![0.6, 0.0, 0.8, 0.0, 0.0],
            Parity::Even,
        )
        .unwrap();
        let nv = number_matrix(4).apply(&v);
        // number operator: support stays on even indices
        assert!(nv[1].norm() < 1e-15 && nv[3].norm() < 1e-15);
        let av = annihilation_matrix(4).apply(&v);
        // annihilation: support moves to odd indices
        assert!(av[0].norm() < 1e-15 && av[2].norm() < 1e-15 && av[4].norm() < 1e-15);
        assert!(av[1].norm() > 0.0);
    }

    #[test]
    fn expm_matches_series_on_small_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.3, 1.3, 0.0]);
        let e = expm_real(&m);
        // rotation matrix
        assert!((e[(0, 0)] - 1.3f64.cos()).abs() < 1e-14);
        assert!((e[(0, 1)] + 1.3f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn density_matrix_checks() {
        let v = FockVector::from_real(vec![0.6, 0.8], Parity::Indefinite).unwrap();
        let rho = DensityMatrix::pure(&v);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        let bad = rho.matrix() * cplx(2.0);
        assert!(DensityMatrix::new(bad).is_err());
    }
}
