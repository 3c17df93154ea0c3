//! Constraint solving and optimization over the generated-state family:
//! orthogonal equal-energy codeword pairs, fidelity sweeps over mean particle
//! number, rotated-pair search, relative gain, and experimental feasibility
//! (heralding probabilities and required input squeezing).
//!
//! Everything here is deterministic: fixed seed grids, fixed scan grids, no
//! randomness, no wall-clock dependence. Sweep points are independent work
//! items evaluated in parallel and assembled in axis order.

use crate::channels::cutoff_selection;
use crate::genstates::{
    fock_amplitudes, inner_product, maximize_probability_over_a, mean_particle_number,
    state_to_scheme_all, GenStateError, SchemeParams, StateParams,
};
use crate::qec::{dephasing_fidelity, loss_fidelity, CodePair, Provenance, QecError};
use crate::specialfn::r_to_squeezing_db;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("no orthogonal partner found (best residual {best_residual:.3e})")]
    NoOrthogonalPartner { best_residual: f64 },
    #[error("sweep produced no successful points")]
    EmptySweep,
    #[error(transparent)]
    Gen(#[from] GenStateError),
    #[error(transparent)]
    Qec(#[from] QecError),
    #[error(transparent)]
    Channel(#[from] crate::channels::ChannelError),
}

/// Grid and tolerance configuration for the sweeps.
#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub m: u32,
    /// Mean-particle-number grid of the outer sweep.
    pub mean_n_grid: Vec<f64>,
    /// Bounds for the free squeezing parameter of word 1.
    pub r2_bounds: (f64, f64),
    /// Coarse grid resolution over r2 before golden refinement.
    pub r2_coarse: usize,
    /// Seed grid is seed_grid x seed_grid over (r1, z1).
    pub seed_grid: usize,
    pub tol_orthogonality: f64,
    pub tol_mean_n: f64,
    pub tol_optimizer: f64,
}

impl SearchConfig {
    /// Defaults: mean-n from 1 to 12 in steps of 0.25, r2 in [-1.8, 1.8].
    pub fn new(m: u32) -> Self {
        assert!(m >= 2, "single-count detection never yields orthogonal pairs");
        let mean_n_grid = (0..=44).map(|i| 1.0 + 0.25 * i as f64).collect();
        SearchConfig {
            m,
            mean_n_grid,
            r2_bounds: (-1.8, 1.8),
            r2_coarse: 25,
            seed_grid: 6,
            tol_orthogonality: 1e-8,
            tol_mean_n: 1e-6,
            tol_optimizer: 1e-6,
        }
    }

    pub fn with_mean_n_grid(mut self, grid: Vec<f64>) -> Self {
        self.mean_n_grid = grid;
        self
    }
}

/// A codeword pair in state-parameter form (word 0 then word 1).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairParams {
    pub m: u32,
    pub r1: f64,
    pub z1: f64,
    pub r2: f64,
    pub z2: f64,
}

impl PairParams {
    pub fn word0(&self) -> StateParams {
        StateParams::new(self.m, self.r1, self.z1)
    }

    pub fn word1(&self) -> StateParams {
        StateParams::new(self.m, self.r2, self.z2)
    }

    /// Builds the Fock-space pair at the common cutoff of both words.
    pub fn build(&self, provenance: Provenance) -> Result<CodePair, SearchError> {
        let s0 = self.word0();
        let s1 = self.word1();
        let n = cutoff_selection(&s0)?.max(cutoff_selection(&s1)?);
        let w0 = fock_amplitudes(&s0, n)?;
        let w1 = fock_amplitudes(&s1, n)?;
        Ok(CodePair::new(w0, w1, provenance)?)
    }

    /// Re-validates the constraint residuals from the closed forms.
    pub fn residuals(&self) -> (f64, f64) {
        let orth = inner_product(&self.word0(), &self.word1()).abs();
        let dn = (mean_particle_number(&self.word0()) - mean_particle_number(&self.word1())).abs();
        (orth, dn)
    }
}

/// One evaluated point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub fidelity: Option<f64>,
    pub pair: Option<PairParams>,
    pub error: Option<String>,
}

/// Axis-ordered sweep outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis_label: &'static str,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn best(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.fidelity.is_some())
            .max_by(|a, b| a.fidelity.partial_cmp(&b.fidelity).unwrap())
    }
}

/// Outcome of a full loss-channel optimization at fixed (m, gamma).
#[derive(Debug, Clone, Serialize)]
pub struct LossOptimum {
    pub m: u32,
    pub gamma: f64,
    pub best_mean_n: f64,
    pub best_r2: f64,
    pub f_max: f64,
    pub best_pair: PairParams,
    pub sweep: SweepResult,
}

// ---------------------------------------------------------------------------
// scalar numerics
// ---------------------------------------------------------------------------

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < tol {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// All roots of `f` on a tangent-spaced grid over `[-span, span]` by bisection
/// within sign-change brackets.
fn scan_roots<F: Fn(f64) -> f64>(f: F, span: f64, points: usize) -> Vec<f64> {
    let u_max = span.atan();
    let mut prev_x = -span;
    let mut prev_f = f(prev_x);
    let mut roots = Vec::new();
    for i in 1..points {
        let u = -u_max + 2.0 * u_max * i as f64 / (points - 1) as f64;
        let x = u.tan();
        let fx = f(x);
        if prev_f.is_finite() && fx.is_finite() && prev_f * fx < 0.0 {
            let (mut a, mut b, mut fa) = (prev_x, x, prev_f);
            for _ in 0..90 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = fx;
    }
    roots
}

fn newton2<F: Fn(&[f64; 2]) -> Option<[f64; 2]>>(res: &F, seed: [f64; 2]) -> Option<[f64; 2]> {
    let mut x = seed;
    for _ in 0..60 {
        let r0 = res(&x)?;
        let n0 = (r0[0] * r0[0] + r0[1] * r0[1]).sqrt();
        if r0[0].abs().max(r0[1].abs()) < 1e-11 {
            return Some(x);
        }
        let mut jac = [[0.0f64; 2]; 2];
        for j in 0..2 {
            let h = 1e-7 * x[j].abs().max(1.0);
            let mut xp = x;
            xp[j] += h;
            let rp = res(&xp)?;
            jac[0][j] = (rp[0] - r0[0]) / h;
            jac[1][j] = (rp[1] - r0[1]) / h;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dx = [
            (-r0[0] * jac[1][1] + r0[1] * jac[0][1]) / det,
            (-r0[1] * jac[0][0] + r0[0] * jac[1][0]) / det,
        ];
        let mut lam = 1.0;
        let mut stepped = false;
        for _ in 0..25 {
            let xn = [x[0] + lam * dx[0], x[1] + lam * dx[1]];
            if let Some(rn) = res(&xn) {
                if (rn[0] * rn[0] + rn[1] * rn[1]).sqrt() < n0 {
                    x = xn;
                    stepped = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !stepped {
            return None;
        }
    }
    let r0 = res(&x)?;
    (r0[0].abs().max(r0[1].abs()) < 1e-9).then_some(x)
}

// ---------------------------------------------------------------------------
// constraint solving
// ---------------------------------------------------------------------------

const SOLVER_R_MAX: f64 = 3.0;
const SOLVER_Z_MAX: f64 = 100.0;
const Z_SCAN_SPAN: f64 = 60.0;
const Z_SCAN_POINTS: usize = 481;

/// All `z` with `<n>(m, r, z) = mean_n` at fixed squeezing.
pub fn mean_n_roots_in_z(m: u32, r: f64, mean_n: f64) -> Vec<f64> {
    scan_roots(
        |z| mean_particle_number(&StateParams::new(m, r, z)) - mean_n,
        Z_SCAN_SPAN,
        Z_SCAN_POINTS,
    )
}

/// All codeword pairs at fixed `(m, mean_n, r2)`: word 1 is pinned by a 1-D
/// root find in `z2`, word 0 by the 2-D system {orthogonality, equal mean n}
/// from a deterministic multistart grid. Every returned pair has residuals
/// below the configured tolerances; all solution branches are kept.
pub fn solve_constraints(
    m: u32,
    mean_n: f64,
    r2: f64,
    cfg: &SearchConfig,
) -> Result<Vec<PairParams>, SearchError> {
    assert!(m >= 2);
    let mut out: Vec<PairParams> = Vec::new();
    let mut best_residual = f64::INFINITY;
    for z2 in mean_n_roots_in_z(m, r2, mean_n) {
        let s1 = StateParams::new(m, r2, z2);
        let res = |x: &[f64; 2]| -> Option<[f64; 2]> {
            let (r1, z1) = (x[0], x[1]);
            if r1.abs() > SOLVER_R_MAX || z1.abs() > SOLVER_Z_MAX {
                return None;
            }
            let s0 = StateParams::new(m, r1, z1);
            Some([
                inner_product(&s0, &s1),
                mean_particle_number(&s0) - mean_n,
            ])
        };
        let k = cfg.seed_grid;
        for i in 0..k {
            for j in 0..k {
                let r1s = -1.6 + 3.2 * i as f64 / (k - 1) as f64;
                let z1s = -9.0 + 18.0 * j as f64 / (k - 1) as f64;
                let Some([r1, z1]) = newton2(&res, [r1s, z1s]) else {
                    if let Some(r) = res(&[r1s, z1s]) {
                        best_residual = best_residual.min(r[0].abs().max(r[1].abs()));
                    }
                    continue;
                };
                if (r1 - r2).abs() < 1e-6 && (z1 - z2).abs() < 1e-6 {
                    continue; // same state twice is not a code
                }
                let cand = PairParams { m, r1, z1, r2, z2 };
                let (orth, dn) = cand.residuals();
                if orth > cfg.tol_orthogonality || dn > cfg.tol_mean_n {
                    continue;
                }
                if !out
                    .iter()
                    .any(|p| (p.r1 - r1).abs() < 1e-6 && (p.z1 - z1).abs() < 1e-6 && (p.z2 - z2).abs() < 1e-6)
                {
                    out.push(cand);
                }
            }
        }
    }
    if out.is_empty() {
        return Err(SearchError::NoOrthogonalPartner { best_residual });
    }
    out.sort_by(|a, b| {
        a.r1.partial_cmp(&b.r1)
            .unwrap()
            .then(a.z1.partial_cmp(&b.z1).unwrap())
            .then(a.z2.partial_cmp(&b.z2).unwrap())
    });
    Ok(out)
}

/// All rotated pairs at fixed `(m, mean_n)`: word 0 is word 1 rotated by pi/2
/// in phase space, i.e. `(r1, z1) = (-r2, -z2)`, leaving a 2-D system in
/// `(r2, z2)`. Mean-n equality holds by construction and is re-verified.
pub fn rotated_pair(m: u32, mean_n: f64, cfg: &SearchConfig) -> Result<Vec<PairParams>, SearchError> {
    assert!(m >= 2);
    let res = |x: &[f64; 2]| -> Option<[f64; 2]> {
        let (r, z) = (x[0], x[1]);
        if r.abs() > SOLVER_R_MAX || z.abs() > SOLVER_Z_MAX {
            return None;
        }
        let plus = StateParams::new(m, r, z);
        let minus = StateParams::new(m, -r, -z);
        Some([
            inner_product(&minus, &plus),
            mean_particle_number(&plus) - mean_n,
        ])
    };
    let mut out: Vec<PairParams> = Vec::new();
    let mut best_residual = f64::INFINITY;
    let k = cfg.seed_grid.max(7);
    for i in 0..k {
        for j in 0..k {
            let rs = -1.6 + 3.2 * i as f64 / (k - 1) as f64;
            let zs = -9.0 + 18.0 * j as f64 / (k - 1) as f64;
            let Some([r, z]) = newton2(&res, [rs, zs]) else {
                if let Some(rr) = res(&[rs, zs]) {
                    best_residual = best_residual.min(rr[0].abs().max(rr[1].abs()));
                }
                continue;
            };
            if r.abs() < 1e-9 {
                continue; // degenerate: the two words coincide
            }
            let cand = PairParams {
                m,
                r1: -r,
                z1: -z,
                r2: r,
                z2: z,
            };
            let (orth, dn) = cand.residuals();
            if orth > cfg.tol_orthogonality || dn > cfg.tol_mean_n {
                continue;
            }
            // (r, z) and (-r, -z) describe the same unordered pair
            if !out.iter().any(|p| {
                ((p.r2 - r).abs() < 1e-6 && (p.z2 - z).abs() < 1e-6)
                    || ((p.r2 + r).abs() < 1e-6 && (p.z2 + z).abs() < 1e-6)
            }) {
                out.push(cand);
            }
        }
    }
    if out.is_empty() {
        return Err(SearchError::NoOrthogonalPartner { best_residual });
    }
    out.sort_by(|a, b| a.r2.partial_cmp(&b.r2).unwrap().then(a.z2.partial_cmp(&b.z2).unwrap()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// fidelity evaluation plumbing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Loss { gamma: f64 },
    Dephasing { gamma_phi: f64 },
}

fn pair_fidelity(p: &PairParams, noise: Noise) -> Result<f64, SearchError> {
    let s0 = p.word0();
    let s1 = p.word1();
    let n = cutoff_selection(&s0)?.max(cutoff_selection(&s1)?);
    let w0 = fock_amplitudes(&s0, n)?;
    let w1 = fock_amplitudes(&s1, n)?;
    let f = match noise {
        Noise::Loss { gamma } => loss_fidelity(&w0, &w1, gamma)?,
        Noise::Dephasing { gamma_phi } => dephasing_fidelity(&w0, &w1, gamma_phi)?,
    };
    Ok(f)
}

/// Best fidelity over all constraint-solution branches at `(mean_n, r2)`.
fn best_at(m: u32, mean_n: f64, r2: f64, noise: Noise, cfg: &SearchConfig) -> Option<(f64, PairParams)> {
    let cands = solve_constraints(m, mean_n, r2, cfg).ok()?;
    let mut best: Option<(f64, PairParams)> = None;
    for c in cands {
        if let Ok(f) = pair_fidelity(&c, noise) {
            if best.map_or(true, |(fb, _)| f > fb) {
                best = Some((f, c));
            }
        }
    }
    best
}

/// Inner 1-D maximization of fidelity over `r2` at one mean-n grid point:
/// coarse scan over the bounds, then golden refinement around the best cell.
fn optimize_point(m: u32, mean_n: f64, noise: Noise, cfg: &SearchConfig) -> SweepPoint {
    let (lo, hi) = cfg.r2_bounds;
    let k = cfg.r2_coarse.max(5);
    let mut coarse: Option<(f64, f64, PairParams)> = None;
    for i in 0..k {
        let r2 = lo + (hi - lo) * i as f64 / (k - 1) as f64;
        if let Some((f, p)) = best_at(m, mean_n, r2, noise, cfg) {
            if coarse.as_ref().map_or(true, |(fb, _, _)| f > *fb) {
                coarse = Some((f, r2, p));
            }
        }
    }
    let Some((f_coarse, r2_coarse, p_coarse)) = coarse else {
        return SweepPoint {
            axis_value: mean_n,
            fidelity: None,
            pair: None,
            error: Some("no orthogonal pair on the r2 grid".to_string()),
        };
    };
    let step = (hi - lo) / (k - 1) as f64;
    let mut best_pair = p_coarse;
    let mut best_f = f_coarse;
    let (_, _) = golden_max(
        |r2| match best_at(m, mean_n, r2, noise, cfg) {
            Some((f, p)) => {
                if f > best_f {
                    best_f = f;
                    best_pair = p;
                }
                f
            }
            None => -1.0,
        },
        (r2_coarse - step).max(lo),
        (r2_coarse + step).min(hi),
        cfg.tol_optimizer,
    );
    SweepPoint {
        axis_value: mean_n,
        fidelity: Some(best_f),
        pair: Some(best_pair),
        error: None,
    }
}

/// Full loss-channel optimization: per mean-n grid point the fidelity is
/// maximized over `r2` (and over solution branches), then the grid maximum is
/// refined by a golden pass over mean n.
pub fn optimize_loss(m: u32, gamma: f64, cfg: &SearchConfig) -> Result<LossOptimum, SearchError> {
    optimize_noise(m, Noise::Loss { gamma }, cfg).map(|(best_mean_n, best_pair, f_max, sweep)| {
        LossOptimum {
            m,
            gamma,
            best_mean_n,
            best_r2: best_pair.r2,
            f_max,
            best_pair,
            sweep,
        }
    })
}

fn optimize_noise(
    m: u32,
    noise: Noise,
    cfg: &SearchConfig,
) -> Result<(f64, PairParams, f64, SweepResult), SearchError> {
    let points: Vec<SweepPoint> = cfg
        .mean_n_grid
        .par_iter()
        .map(|&n| optimize_point(m, n, noise, cfg))
        .collect();
    let sweep = SweepResult {
        axis_label: "mean_n",
        points,
    };
    let best = sweep.best().ok_or(SearchError::EmptySweep)?.clone();
    let mut f_max = best.fidelity.unwrap();
    let mut best_pair = best.pair.unwrap();
    let mut best_mean_n = best.axis_value;
    // refine the outer maximum over mean n around the best grid cell
    let grid = &cfg.mean_n_grid;
    let idx = grid
        .iter()
        .position(|&n| (n - best.axis_value).abs() < 1e-12)
        .unwrap();
    let lo = if idx > 0 { grid[idx - 1] } else { grid[idx] };
    let hi = if idx + 1 < grid.len() { grid[idx + 1] } else { grid[idx] };
    if hi > lo {
        golden_max(
            |n| {
                let p = optimize_point(m, n, noise, cfg);
                if let (Some(f), Some(pp)) = (p.fidelity, p.pair) {
                    if f > f_max {
                        f_max = f;
                        best_pair = pp;
                        best_mean_n = n;
                    }
                    f
                } else {
                    -1.0
                }
            },
            lo,
            hi,
            10.0 * cfg.tol_optimizer,
        );
    }
    Ok((best_mean_n, best_pair, f_max, sweep))
}

/// Dephasing sweep: reports fidelity against mean particle number for both the
/// free search and the rotated family, plus their gap per point.
#[derive(Debug, Clone, Serialize)]
pub struct DephasingSweep {
    pub m: u32,
    pub gamma_phi: f64,
    pub free: SweepResult,
    pub rotated: SweepResult,
}

/// Dephasing optimization at fixed `(m, gamma_phi)` with the same machinery as
/// the loss search; the rotated family is evaluated alongside for comparison.
pub fn optimize_dephasing(
    m: u32,
    gamma_phi: f64,
    cfg: &SearchConfig,
) -> Result<DephasingSweep, SearchError> {
    let noise = Noise::Dephasing { gamma_phi };
    let free_points: Vec<SweepPoint> = cfg
        .mean_n_grid
        .par_iter()
        .map(|&n| optimize_point(m, n, noise, cfg))
        .collect();
    let rot_points: Vec<SweepPoint> = cfg
        .mean_n_grid
        .par_iter()
        .map(|&n| rotated_point(m, n, noise, cfg))
        .collect();
    Ok(DephasingSweep {
        m,
        gamma_phi,
        free: SweepResult {
            axis_label: "mean_n",
            points: free_points,
        },
        rotated: SweepResult {
            axis_label: "mean_n",
            points: rot_points,
        },
    })
}

fn rotated_point(m: u32, mean_n: f64, noise: Noise, cfg: &SearchConfig) -> SweepPoint {
    match rotated_pair(m, mean_n, cfg) {
        Ok(cands) => {
            let mut best: Option<(f64, PairParams)> = None;
            for c in cands {
                if let Ok(f) = pair_fidelity(&c, noise) {
                    if best.map_or(true, |(fb, _)| f > fb) {
                        best = Some((f, c));
                    }
                }
            }
            match best {
                Some((f, p)) => SweepPoint {
                    axis_value: mean_n,
                    fidelity: Some(f),
                    pair: Some(p),
                    error: None,
                },
                None => SweepPoint {
                    axis_value: mean_n,
                    fidelity: None,
                    pair: None,
                    error: Some("rotated candidates failed fidelity evaluation".into()),
                },
            }
        }
        Err(e) => SweepPoint {
            axis_value: mean_n,
            fidelity: None,
            pair: None,
            error: Some(e.to_string()),
        },
    }
}

/// Rotated-family loss optimization (single free parameter: mean n).
pub fn optimize_loss_rotated(m: u32, gamma: f64, cfg: &SearchConfig) -> Result<LossOptimum, SearchError> {
    let noise = Noise::Loss { gamma };
    let points: Vec<SweepPoint> = cfg
        .mean_n_grid
        .par_iter()
        .map(|&n| rotated_point(m, n, noise, cfg))
        .collect();
    let sweep = SweepResult {
        axis_label: "mean_n",
        points,
    };
    let best = sweep.best().ok_or(SearchError::EmptySweep)?.clone();
    let mut f_max = best.fidelity.unwrap();
    let mut best_pair = best.pair.unwrap();
    let mut best_mean_n = best.axis_value;
    let grid = &cfg.mean_n_grid;
    let idx = grid
        .iter()
        .position(|&n| (n - best.axis_value).abs() < 1e-12)
        .unwrap();
    let lo = if idx > 0 { grid[idx - 1] } else { grid[idx] };
    let hi = if idx + 1 < grid.len() { grid[idx + 1] } else { grid[idx] };
    if hi > lo {
        golden_max(
            |n| {
                let p = rotated_point(m, n, noise, cfg);
                if let (Some(f), Some(pp)) = (p.fidelity, p.pair) {
                    if f > f_max {
                        f_max = f;
                        best_pair = pp;
                        best_mean_n = n;
                    }
                    f
                } else {
                    -1.0
                }
            },
            lo,
            hi,
            10.0 * cfg.tol_optimizer,
        );
    }
    Ok(LossOptimum {
        m,
        gamma,
        best_mean_n,
        best_r2: best_pair.r2,
        f_max,
        best_pair,
        sweep,
    })
}

/// Relative gain of the optimal codewords over the rotated ones, in percent.
pub fn relative_gain(m: u32, gamma: f64, cfg: &SearchConfig) -> Result<f64, SearchError> {
    let opt = optimize_loss(m, gamma, cfg)?;
    let rot = optimize_loss_rotated(m, gamma, cfg)?;
    Ok((opt.f_max / rot.f_max - 1.0) * 100.0)
}

// ---------------------------------------------------------------------------
// feasibility
// ---------------------------------------------------------------------------

/// Scheme realization of one codeword at its probability-maximizing `a`.
#[derive(Debug, Clone, Serialize)]
pub struct WordFeasibility {
    /// Orientation actually generated: the word itself or its pi/2 rotation.
    pub rotated_orientation: bool,
    pub a_star: f64,
    pub probability: f64,
    pub scheme: SchemeParams,
    pub oscillator_db: (f64, f64),
}

/// Experimental feasibility of a codeword pair.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    /// Joint generation probability, percent.
    pub p_cw_percent: f64,
    /// Largest input squeezing magnitude across all oscillators, dB.
    pub max_squeezing_db: f64,
    pub per_oscillator_db: Vec<f64>,
    pub words: Vec<WordFeasibility>,
}

fn word_feasibility(m: u32, r: f64, z: f64) -> Result<WordFeasibility, SearchError> {
    // the pi/2-rotated orientation (-r, -z) generates the same codeword up to a
    // passive phase shift; pick the orientation with the higher heralding
    // probability, falling back to the other if inversion fails.
    let mut options: Vec<(bool, f64, f64)> = Vec::new();
    for (flip, zz) in [(false, z), (true, -z)] {
        if let Ok((a_star, p)) = maximize_probability_over_a(m, zz) {
            options.push((flip, a_star, p));
        }
    }
    options.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
    let mut best_err = f64::INFINITY;
    for (flip, a_star, p) in options {
        let (ro, zo) = if flip { (-r, -z) } else { (r, z) };
        let schemes = state_to_scheme_all(ro, zo, a_star);
        let chosen = schemes.into_iter().min_by(|x, y| {
            let mx = x.r1.abs().max(x.r2.abs());
            let my = y.r1.abs().max(y.r2.abs());
            mx.partial_cmp(&my).unwrap().then(x.r1.partial_cmp(&y.r1).unwrap())
        });
        if let Some(s) = chosen {
            return Ok(WordFeasibility {
                rotated_orientation: flip,
                a_star,
                probability: p,
                scheme: s,
                oscillator_db: (r_to_squeezing_db(s.r1), r_to_squeezing_db(s.r2)),
            });
        }
        best_err = best_err.min(1.0);
    }
    Err(SearchError::Gen(GenStateError::NoSolutionFound {
        best_residual: best_err,
    }))
}

/// Feasibility of an optimal pair: each word is generated by its own scheme;
/// the joint probability multiplies the two maxima and the squeezing report
/// covers all four oscillators.
pub fn feasibility_optimal(p: &PairParams) -> Result<FeasibilityReport, SearchError> {
    let w0 = word_feasibility(p.m, p.r1, p.z1)?;
    let w1 = word_feasibility(p.m, p.r2, p.z2)?;
    let dbs = vec![
        w0.oscillator_db.0,
        w0.oscillator_db.1,
        w1.oscillator_db.0,
        w1.oscillator_db.1,
    ];
    let max_db = dbs.iter().map(|d| d.abs()).fold(0.0f64, f64::max);
    Ok(FeasibilityReport {
        p_cw_percent: w0.probability * w1.probability * 100.0,
        max_squeezing_db: max_db,
        per_oscillator_db: dbs,
        words: vec![w0, w1],
    })
}

/// Feasibility of a rotated pair: both words come from one scheme (the second
/// adds only a passive phase shifter), so the joint probability is the square
/// of a single heralding probability and two oscillators are reported.
pub fn feasibility_rotated(p: &PairParams) -> Result<FeasibilityReport, SearchError> {
    let w = word_feasibility(p.m, p.r2, p.z2)?;
    let dbs = vec![w.oscillator_db.0, w.oscillator_db.1];
    let max_db = dbs.iter().map(|d| d.abs()).fold(0.0f64, f64::max);
    Ok(FeasibilityReport {
        p_cw_percent: w.probability * w.probability * 100.0,
        max_squeezing_db: max_db,
        per_oscillator_db: dbs,
        words: vec![w],
    })
}

/// Coefficient-distribution variance of both optimal codewords at `gamma`,
/// annotated with the optimal mean particle number, for m = 2..=6.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceRow {
    pub m: u32,
    pub sigma_word0: f64,
    pub sigma_word1: f64,
    pub optimal_mean_n: f64,
}

pub fn coeff_variance_report(
    optima: &[LossOptimum],
    threshold: f64,
) -> Result<Vec<VarianceRow>, SearchError> {
    let mut rows = Vec::with_capacity(optima.len());
    for opt in optima {
        let pair = opt.best_pair.build(Provenance::Optimal)?;
        let s0 = crate::genstates::coeff_distribution_variance(&pair.word0, threshold)?;
        let s1 = crate::genstates::coeff_distribution_variance(&pair.word1, threshold)?;
        rows.push(VarianceRow {
            m: opt.m,
            sigma_word0: s0,
            sigma_word1: s1,
            optimal_mean_n: opt.best_mean_n,
        });
    }
    Ok(rows)
}
