//! Kraus-operator models of the particle-loss and dephasing channels on the
//! truncated Fock space, channel application and composition, and the
//! Fock-cutoff selection rule.

use crate::fockspace::DensityMatrix;
use crate::genstates::{mean_particle_number, raw_amplitude, StateParams};
use crate::specialfn::ln_factorial;
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("damping parameter gamma = {gamma} outside [0, 1]")]
    GammaOutOfRange { gamma: f64 },
    #[error("dephasing rate gamma_phi = {gamma_phi} must be non-negative")]
    NegativeDephasingRate { gamma_phi: f64 },
    #[error("cutoff mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("no admissible cutoff below {bound}; parameters look unphysical")]
    CutoffUnbounded { bound: usize },
}

/// Which channel a Kraus set models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Loss { gamma: f64 },
    Dephasing { gamma_phi: f64 },
    Composed,
}

/// Ordered list of truncated Kraus matrices with completeness metadata.
#[derive(Debug, Clone)]
pub struct KrausSet {
    cutoff: usize,
    ops: Vec<DMatrix<Complex64>>,
    completeness_defect: f64,
    kind: ChannelKind,
}

impl KrausSet {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Frobenius norm of `sum K^dag K - I`.
    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn from_operators(ops: Vec<DMatrix<Complex64>>, kind: ChannelKind) -> KrausSet {
        assert!(!ops.is_empty());
        let cutoff = ops[0].nrows() - 1;
        let defect = completeness_defect(&ops);
        KrausSet {
            cutoff,
            ops,
            completeness_defect: defect,
            kind,
        }
    }

    /// Identity channel at the given cutoff.
    pub fn identity(cutoff: usize) -> KrausSet {
        KrausSet::from_operators(
            vec![DMatrix::identity(cutoff + 1, cutoff + 1)],
            ChannelKind::Composed,
        )
    }
}

fn completeness_defect(ops: &[DMatrix<Complex64>]) -> f64 {
    let n = ops[0].nrows();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for k in ops {
        acc += k.adjoint() * k;
    }
    for i in 0..n {
        acc[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    acc.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Loss-channel Kraus operators `K_0 .. K_N`:
/// `<j-k| K_k |j> = sqrt(C(j,k) gamma^k (1-gamma)^{j-k})`.
/// Binomial completeness makes `sum K^dag K = I` exact on the truncated space.
pub fn loss_kraus(gamma: f64, cutoff: usize) -> Result<KrausSet, ChannelError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ChannelError::GammaOutOfRange { gamma });
    }
    let n = cutoff + 1;
    let mut ops = Vec::with_capacity(n);
    for k in 0..n {
        let mut mat = DMatrix::<Complex64>::zeros(n, n);
        for j in k..n {
            mat[(j - k, j)] = Complex64::new(loss_amplitude(j, k, gamma), 0.0);
        }
        ops.push(mat);
    }
    let defect = completeness_defect(&ops);
    Ok(KrausSet {
        cutoff,
        ops,
        completeness_defect: defect,
        kind: ChannelKind::Loss { gamma },
    })
}

/// `sqrt(C(j,k) gamma^k (1-gamma)^{j-k})`, stable in log space, exact at the endpoints.
pub(crate) fn loss_amplitude(j: usize, k: usize, gamma: f64) -> f64 {
    debug_assert!(j >= k);
    if gamma == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if gamma == 1.0 {
        return if j == k { 1.0 } else { 0.0 };
    }
    let ln_c = ln_factorial(j as u64) - ln_factorial(k as u64) - ln_factorial((j - k) as u64);
    (0.5 * (ln_c + k as f64 * gamma.ln() + (j - k) as f64 * (1.0 - gamma).ln())).exp()
}

/// Number of dephasing Kraus operators kept: the operator index follows a
/// Poisson distribution with mean `gamma_phi j^2` per column, so truncating at
/// `ceil(lambda + 10 sqrt(lambda) + 20)` for the worst column keeps the tail
/// below 1e-12.
pub fn dephasing_operator_count(gamma_phi: f64, cutoff: usize) -> usize {
    if gamma_phi == 0.0 {
        return 1;
    }
    let lambda = gamma_phi * (cutoff * cutoff) as f64;
    (lambda + 10.0 * lambda.sqrt() + 20.0).ceil() as usize + 1
}

/// Dephasing-channel Kraus operators: diagonal
/// `<j| D_k |j> = sqrt(gamma_phi^k / k!) e^{-gamma_phi j^2 / 2} j^k`.
pub fn dephasing_kraus(gamma_phi: f64, cutoff: usize) -> Result<KrausSet, ChannelError> {
    if gamma_phi < 0.0 {
        return Err(ChannelError::NegativeDephasingRate { gamma_phi });
    }
    let n = cutoff + 1;
    if gamma_phi == 0.0 {
        return Ok(KrausSet {
            cutoff,
            ops: vec![DMatrix::identity(n, n)],
            completeness_defect: 0.0,
            kind: ChannelKind::Dephasing { gamma_phi },
        });
    }
    let count = dephasing_operator_count(gamma_phi, cutoff);
    let mut ops = Vec::with_capacity(count);
    for k in 0..count {
        let mut mat = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            mat[(j, j)] = Complex64::new(dephasing_amplitude(j, k, gamma_phi), 0.0);
        }
        ops.push(mat);
    }
    let defect = completeness_defect(&ops);
    Ok(KrausSet {
        cutoff,
        ops,
        completeness_defect: defect,
        kind: ChannelKind::Dephasing { gamma_phi },
    })
}

pub(crate) fn dephasing_amplitude(j: usize, k: usize, gamma_phi: f64) -> f64 {
    if j == 0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln = 0.5 * (k as f64 * gamma_phi.ln() - ln_factorial(k as u64))
        - gamma_phi * (j * j) as f64 / 2.0
        + k as f64 * (j as f64).ln();
    ln.exp()
}

/// Applies the channel in operator-sum form: `sum_k K rho K^dag`.
pub fn apply_channel(rho: &DensityMatrix, k: &KrausSet) -> Result<DensityMatrix, ChannelError> {
    if rho.cutoff() != k.cutoff() {
        return Err(ChannelError::DimensionMismatch {
            left: rho.cutoff(),
            right: k.cutoff(),
        });
    }
    let n = rho.dim();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for op in &k.ops {
        let t = op * rho.matrix();
        out += &t * op.adjoint();
    }
    Ok(DensityMatrix::from_raw(out))
}

/// Composition `{A B}` over all operator pairs. The loss and dephasing
/// superoperators commute; the composed sets in either order act identically.
pub fn compose(k1: &KrausSet, k2: &KrausSet) -> Result<KrausSet, ChannelError> {
    if k1.cutoff() != k2.cutoff() {
        return Err(ChannelError::DimensionMismatch {
            left: k1.cutoff(),
            right: k2.cutoff(),
        });
    }
    let mut ops = Vec::with_capacity(k1.len() * k2.len());
    for a in &k1.ops {
        for b in &k2.ops {
            ops.push(a * b);
        }
    }
    let defect = completeness_defect(&ops);
    Ok(KrausSet {
        cutoff: k1.cutoff(),
        ops,
        completeness_defect: defect,
        kind: ChannelKind::Composed,
    })
}

/// Smallest cutoff `N` with `|c_{N+1}|^2 < 1e-9` and `N >= 4<n> + 10`,
/// evaluated from the closed-form amplitudes. Bounded at 400.
pub fn cutoff_selection(s: &StateParams) -> Result<usize, ChannelError> {
    const BOUND: usize = 400;
    let nbar = mean_particle_number(s);
    let mut n = (4.0 * nbar + 10.0).ceil() as usize;
    while n <= BOUND {
        let a1 = raw_amplitude(s.m, s.r, s.z, n + 1);
        let a2 = raw_amplitude(s.m, s.r, s.z, n + 2);
        if a1 * a1 < 1e-9 && a2 * a2 < 1e-9 && crate::genstates::fock_amplitudes(s, n).is_ok() {
            return Ok(n);
        }
        n += 1;
    }
    Err(ChannelError::CutoffUnbounded { bound: BOUND })
}
