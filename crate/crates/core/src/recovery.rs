//! Row-sparse recovery of `Z` from `X = C Z + N`.
//!
//! The solver is a greedy simultaneous pursuit in the SOMP family: a stand-in
//! for `min ‖Z‖_{2,1}` subject to the data constraint. By default atoms are
//! chosen with the rank-aware orthogonal rule (see [`Selection`]).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gabor_transform::{stable_ceil, CoefficientGrid, LatticeExtent};

/// Pivots below this fraction of the largest column norm mark a rank-deficient support.
const RANK_TOL: f64 = 1e-10;
/// Residual directions below this fraction of the leading singular value are dropped.
const SIGNAL_SUBSPACE_TOL: f64 = 1e-8;

/// Atom selection rule of the greedy pursuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// `‖c_jᴴ R‖₂ / ‖c_j‖₂`: classic SOMP.
    Correlation,
    /// `‖c_jᴴ R‖₂ / ‖P⊥ c_j‖₂`, with `P⊥` projecting off the active columns.
    Orthogonal,
    /// `‖c_jᴴ U‖₂ / ‖P⊥ c_j‖₂`, with `U` an orthonormal basis of the residual's
    /// column space. Uses the rank of the residual, which makes it far more
    /// reliable than plain correlation when the rows of `Z` are clustered.
    #[default]
    RankAware,
}

/// Sorted row indices (0-based, row `k + K0` holds shift `k`) and the sparsity budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    pub indices: Vec<usize>,
    pub budget: usize,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, budget: usize) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices, budget }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, row: usize) -> bool {
        self.indices.binary_search(&row).is_ok()
    }

    /// Time shifts `k` of the selected rows.
    pub fn signed(&self, extent: &LatticeExtent) -> Vec<i64> {
        self.indices.iter().map(|&r| extent.shift_k(r)).collect()
    }

    /// Whether every index of `other` is selected here.
    pub fn covers(&self, other: &SupportSet) -> bool {
        other.indices.iter().all(|&r| self.contains(r))
    }
}

/// `⌈2/μ⌉ · N`: rows a multipulse signal with `N` pulses can occupy.
pub fn sparsity_budget(mu: f64, pulses: usize) -> usize {
    stable_ceil(2.0 / mu) as usize * pulses
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub support: SupportSet,
    /// `K × L`, zero off the support.
    pub z_hat: DMatrix<Complex64>,
    /// `‖C Z̃ - X‖_F`.
    pub residual: f64,
    pub iterations: usize,
    pub rip_estimate: Option<f64>,
}

impl RecoveryResult {
    pub fn to_grid(&self, extent: LatticeExtent) -> Result<CoefficientGrid> {
        CoefficientGrid::new(self.z_hat.clone(), extent)
    }
}

/// Row ℓ2 norms.
pub fn row_norms(z: &DMatrix<Complex64>) -> Vec<f64> {
    (0..z.nrows())
        .map(|r| z.row(r).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// `‖Z‖_{2,1} = Σ_rows ‖Z_row‖_2`.
pub fn l21_norm(z: &DMatrix<Complex64>) -> f64 {
    row_norms(z).iter().sum()
}

fn check_shapes(x: &DMatrix<Complex64>, c: &DMatrix<f64>) -> Result<()> {
    if x.nrows() != c.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "X has {} rows but C has {}",
            x.nrows(),
            c.nrows()
        )));
    }
    Ok(())
}

/// Least squares `Z^S = C_S^† X` via Householder QR, embedded in a `K × L` matrix.
pub fn ls_on_support(x: &DMatrix<Complex64>, c: &DMatrix<f64>, support: &SupportSet) -> Result<DMatrix<Complex64>> {
    check_shapes(x, c)?;
    let mut z = DMatrix::<Complex64>::zeros(c.ncols(), x.ncols());
    if support.is_empty() {
        return Ok(z);
    }
    if let Some(&bad) = support.indices.iter().find(|&&r| r >= c.ncols()) {
        return Err(Error::IndexOutOfRange(format!(
            "support row {bad} with K = {}",
            c.ncols()
        )));
    }
    if support.len() > c.nrows() {
        return Err(Error::RankDeficient {
            support: support.indices.clone(),
        });
    }
    let sub = c.select_columns(&support.indices);
    let scale = sub.column_iter().map(|col| col.norm()).fold(0.0, f64::max);
    let qr = sub.qr();
    let r = qr.r();
    if scale == 0.0 || r.diagonal().iter().any(|d| d.abs() <= RANK_TOL * scale) {
        return Err(Error::RankDeficient {
            support: support.indices.clone(),
        });
    }
    let q = qr.q();
    for part in 0..2 {
        let rhs = x.map(|v| if part == 0 { v.re } else { v.im });
        let qtb = q.transpose() * rhs;
        let sol = r.solve_upper_triangular(&qtb).ok_or_else(|| Error::RankDeficient {
            support: support.indices.clone(),
        })?;
        for (i, &row) in support.indices.iter().enumerate() {
            for col in 0..x.ncols() {
                let v = sol[(i, col)];
                if part == 0 {
                    z[(row, col)].re = v;
                } else {
                    z[(row, col)].im = v;
                }
            }
        }
    }
    Ok(z)
}

/// Orthonormal basis of the column space of `r`, ignoring negligible directions.
fn signal_subspace(r: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = r.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > SIGNAL_SUBSPACE_TOL * top)
        .collect();
    u.select_columns(&keep)
}

/// Greedy simultaneous pursuit with the default [`Selection`] rule.
pub fn somp(x: &DMatrix<Complex64>, c: &DMatrix<f64>, s: usize, residual_tol: f64) -> Result<RecoveryResult> {
    pursuit(x, c, s, residual_tol, Selection::default())
}

/// Greedy simultaneous pursuit: adds the column of `C` with the highest
/// `selection` score (lowest index on ties), re-solves least squares on the
/// active set, and stops after `s` atoms or once `‖residual‖_F <= residual_tol`.
pub fn pursuit(
    x: &DMatrix<Complex64>,
    c: &DMatrix<f64>,
    s: usize,
    residual_tol: f64,
    selection: Selection,
) -> Result<RecoveryResult> {
    check_shapes(x, c)?;
    if !(residual_tol >= 0.0) {
        return Err(invalid("residual_tol", "must be non-negative"));
    }
    let k = c.ncols();
    let cc = c.map(|v| Complex64::new(v, 0.0));
    let col_energy: Vec<f64> = c.column_iter().map(|col| col.norm_squared()).collect();
    let mut support = SupportSet::new(Vec::new(), s);
    let mut z = DMatrix::<Complex64>::zeros(k, x.ncols());
    let mut residual = x.clone();
    let mut iterations = 0;
    while support.len() < s.min(k) && residual.norm() > residual_tol {
        let probe = match selection {
            Selection::RankAware => signal_subspace(&residual),
            _ => residual.clone(),
        };
        let corr = cc.adjoint() * probe;
        let captured: Vec<f64> = if selection == Selection::Correlation || support.is_empty() {
            vec![0.0; k]
        } else {
            let q = c.select_columns(&support.indices).qr().q();
            (q.transpose() * c).column_iter().map(|p| p.norm_squared()).collect()
        };
        let mut best: Option<(usize, f64)> = None;
        for j in 0..k {
            let free = col_energy[j] - captured[j];
            if support.contains(j) || free <= 1e-12 * col_energy[j] {
                continue;
            }
            let score = corr.row(j).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / free.sqrt();
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, score)) = best else { break };
        if score == 0.0 {
            break;
        }
        let mut next = support.indices.clone();
        next.push(j);
        support = SupportSet::new(next, s);
        z = ls_on_support(x, c, &support)?;
        residual = x - &cc * &z;
        iterations += 1;
    }
    Ok(RecoveryResult {
        support,
        z_hat: z,
        residual: residual.norm(),
        iterations,
        rip_estimate: None,
    })
}

/// SOMP that stops as soon as the residual reaches the noise level.
pub fn recover_noisy(x: &DMatrix<Complex64>, c: &DMatrix<f64>, s: usize, noise_norm: f64) -> Result<RecoveryResult> {
    if !(noise_norm >= 0.0) {
        return Err(invalid("noise_norm", "must be non-negative"));
    }
    somp(x, c, s, noise_norm)
}

/// Best `S`-row approximation of `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSTerm {
    pub support: SupportSet,
    pub z_s: DMatrix<Complex64>,
    /// `‖Z - Z^S‖_{2,1}`.
    pub defect: f64,
}

/// Keeps the `s` rows of largest ℓ2 norm (lower index first on ties).
pub fn best_s_term(z: &DMatrix<Complex64>, s: usize) -> BestSTerm {
    let norms = row_norms(z);
    let mut order: Vec<usize> = (0..z.nrows()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let support = SupportSet::new(order.into_iter().take(s).collect(), s);
    let mut z_s = DMatrix::zeros(z.nrows(), z.ncols());
    let mut defect = 0.0;
    for r in 0..z.nrows() {
        if support.contains(r) {
            z_s.set_row(r, &z.row(r));
        } else {
            defect += norms[r];
        }
    }
    BestSTerm { support, z_s, defect }
}

/// Monte Carlo lower estimate of the restricted isometry constant `δ_S` of
/// `C/√M`: the largest `max(1 - σ_min², σ_max² - 1)` over `trials` random
/// column subsets of size `s`.
///
/// Each trial shuffles all column indices and keeps a prefix, so with a fixed
/// seed the subsets for `s` and `s + 1` are nested.
pub fn empirical_rip(c: &DMatrix<f64>, s: usize, trials: usize, seed: u64) -> Result<f64> {
    let (m, k) = c.shape();
    if s > m || s > k {
        return Err(invalid("s", format!("subset size {s} exceeds the {m}x{k} matrix")));
    }
    if s == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<usize> = (0..k).collect();
    let scale = 1.0 / (m as f64).sqrt();
    let mut delta: f64 = 0.0;
    for _ in 0..trials {
        cols.shuffle(&mut rng);
        let sub = c.select_columns(&cols[..s]) * scale;
        let sv: DVector<f64> = sub.singular_values();
        let hi = sv.max();
        let lo = sv.min();
        delta = delta.max((1.0 - lo * lo).max(hi * hi - 1.0));
    }
    Ok(delta)
}

/// Constants of the RIP-based error estimate, valid for `δ < √2 - 1`:
/// `C0 = 2(1 - (1-√2)δ)/(1 - (1+√2)δ)`, `C1 = 4√(1+δ)/(1 - (1+√2)δ)`,
/// multiplying `‖Z - Z^S‖_{2,1}` by `Ĉ1 = C0/√S` and `‖N‖` by `Ĉ2 = C1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsConstants {
    pub delta: f64,
    pub c0: f64,
    pub c1: f64,
    pub c1_hat: f64,
    pub c2_hat: f64,
}

pub fn cs_constants(delta: f64, s: usize) -> Option<CsConstants> {
    let r2 = 2f64.sqrt();
    if !(0.0..r2 - 1.0).contains(&delta) || s == 0 {
        return None;
    }
    let denom = 1.0 - (1.0 + r2) * delta;
    let c0 = 2.0 * (1.0 - (1.0 - r2) * delta) / denom;
    let c1 = 4.0 * (1.0 + delta).sqrt() / denom;
    Some(CsConstants {
        delta,
        c0,
        c1,
        c1_hat: c0 / (s as f64).sqrt(),
        c2_hat: c1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::bernoulli_matrix;
    use rand::Rng;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sparse_z(k: usize, l: usize, rows: &[usize], seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = DMatrix::zeros(k, l);
        for &r in rows {
            for col in 0..l {
                z[(r, col)] = c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        z
    }

    fn to_complex(c: &DMatrix<f64>) -> DMatrix<Complex64> {
        c.map(|v| c64(v, 0.0))
    }

    #[test]
    fn budget() {
        assert_eq!(sparsity_budget(0.5, 3), 12);
        assert_eq!(sparsity_budget(0.75, 3), 9);
        assert_eq!(sparsity_budget(0.2, 3), 30);
    }

    #[test]
    fn somp_recovers_sparse_rows() {
        let (m, k, l) = (25, 125, 9);
        let mut hits = 0;
        for seed in 0..20 {
            let c = bernoulli_matrix(m, k, 100 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows: Vec<usize> = (0..k).collect();
            rows.shuffle(&mut rng);
            let rows = &rows[..12];
            let z = sparse_z(k, l, rows, seed);
            let x = to_complex(&c) * &z;
            let out = somp(&x, &c, 12, 1e-9 * x.norm()).unwrap();
            if (&out.z_hat - &z).norm() <= 1e-8 * z.norm() {
                hits += 1;
            }
            assert!(out.support.len() <= 12);
        }
        assert!(hits >= 18, "{hits}");
    }

    #[test]
    fn somp_trivial_cases() {
        let c = bernoulli_matrix(5, 12, 1);
        let out = somp(&DMatrix::zeros(5, 3), &c, 4, 0.0).unwrap();
        assert!(out.support.is_empty());
        assert_eq!(out.iterations, 0);
        assert!(out.z_hat.iter().all(|v| v.norm() == 0.0));

        let id = DMatrix::<f64>::identity(6, 6);
        let mut x = DMatrix::zeros(6, 2);
        for (r, v) in [(0, 0.5), (2, 3.0), (3, 2.0), (5, 2.0)] {
            x[(r, 0)] = c64(v, 0.0);
        }
        let out = somp(&x, &id, 3, 0.0).unwrap();
        assert_eq!(out.support.indices, vec![2, 3, 5]);
        for &r in &out.support.indices {
            assert!((out.z_hat[(r, 0)] - x[(r, 0)]).norm() < 1e-14);
        }
    }

    #[test]
    fn selection_rules_agree_on_orthogonal_dictionary() {
        let id = DMatrix::<f64>::identity(8, 8);
        let x = DMatrix::from_fn(8, 3, |r, c| {
            if r % 3 == 0 {
                c64(r as f64 + 1.0, c as f64)
            } else {
                c64(0.0, 0.0)
            }
        });
        for rule in [Selection::Correlation, Selection::Orthogonal, Selection::RankAware] {
            let out = pursuit(&x, &id, 3, 0.0, rule).unwrap();
            assert_eq!(out.support.indices, vec![0, 3, 6], "{rule:?}");
            assert!(out.residual < 1e-12);
        }
    }

    #[test]
    fn noisy_stopping() {
        let c = bernoulli_matrix(10, 30, 2);
        let z = sparse_z(30, 3, &[4, 17], 5);
        let x = to_complex(&c) * &z;
        let exact = somp(&x, &c, 6, 0.0).unwrap();
        assert_eq!(recover_noisy(&x, &c, 6, 0.0).unwrap(), exact);
        let none = recover_noisy(&x, &c, 6, x.norm()).unwrap();
        assert!(none.support.is_empty());
        assert!(recover_noisy(&x, &c, 6, -1.0).is_err());
    }

    #[test]
    fn least_squares_cases() {
        let c = bernoulli_matrix(15, 40, 3);
        let z = sparse_z(40, 4, &[1, 9, 33], 7);
        let x = to_complex(&c) * &z;
        let support = SupportSet::new(vec![33, 1, 9], 3);
        let got = ls_on_support(&x, &c, &support).unwrap();
        assert!((&got - &z).norm() <= 1e-10 * z.norm());
        let empty = ls_on_support(&x, &c, &SupportSet::new(vec![], 3)).unwrap();
        assert!(empty.iter().all(|v| v.norm() == 0.0));

        // Orthonormal columns: the solution is C_Sᵀ X.
        let q = DMatrix::<f64>::identity(4, 4);
        let x = DMatrix::from_fn(4, 2, |r, col| c64(r as f64 + 1.0, col as f64));
        let s = SupportSet::new(vec![0, 2], 2);
        let got = ls_on_support(&x, &q, &s).unwrap();
        assert!((got[(2, 0)] - x[(2, 0)]).norm() < 1e-14);
        assert_eq!(got[(1, 0)], c64(0.0, 0.0));

        let mut dup = bernoulli_matrix(6, 5, 4);
        let col = dup.column(0).clone_owned();
        dup.set_column(3, &col);
        let err = ls_on_support(&DMatrix::zeros(6, 1), &dup, &SupportSet::new(vec![0, 3], 2));
        assert!(matches!(err, Err(Error::RankDeficient { support }) if support == vec![0, 3]));
    }

    #[test]
    fn best_terms() {
        let z = sparse_z(10, 3, &[2, 5, 7], 1);
        let b = best_s_term(&z, 3);
        assert_eq!(b.z_s, z);
        assert_eq!(b.defect, 0.0);
        let b0 = best_s_term(&z, 0);
        assert!((b0.defect - l21_norm(&z)).abs() < 1e-15);
        let mut tie = DMatrix::zeros(4, 1);
        tie[(1, 0)] = c64(1.0, 0.0);
        tie[(3, 0)] = c64(0.0, 1.0);
        assert_eq!(best_s_term(&tie, 1).support.indices, vec![1]);
    }

    #[test]
    fn rip_estimates() {
        let m = 8;
        let c = DMatrix::<f64>::identity(m, m) * (m as f64).sqrt();
        assert!(empirical_rip(&c, 5, 20, 1).unwrap() < 1e-12);
        let c = bernoulli_matrix(25, 125, 11);
        let mut prev = 0.0;
        for s in 1..=12 {
            let d = empirical_rip(&c, s, 50, 3).unwrap();
            assert!(d >= prev - 1e-12, "s={s}");
            prev = d;
        }
        // Small Bernoulli matrices are far from the √2 - 1 regime.
        assert!(prev > 2f64.sqrt() - 1.0 && prev.is_finite());
        assert!(empirical_rip(&c, 26, 1, 0).is_err());
    }

    #[test]
    fn constants() {
        let c = cs_constants(0.0, 4).unwrap();
        assert!((c.c0 - 2.0).abs() < 1e-15 && (c.c1 - 4.0).abs() < 1e-15);
        assert!((c.c1_hat - 1.0).abs() < 1e-15);
        assert!(cs_constants(0.5, 4).is_none());
        assert!(cs_constants(0.2, 4).unwrap().c0 > 2.0);
    }
}
