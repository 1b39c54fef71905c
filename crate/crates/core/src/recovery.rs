//! Coefficient recovery from samples via the null space of the feature matrix.
//!
//! Points on the zero set of `psi` satisfy `c^T phi(x) = 0`, so `c` spans the
//! null space of `Phi^T`. The recovered vector is the right singular vector of
//! `Phi^T` belonging to its smallest singular value; the number of singular
//! values under the rank tolerance tells whether that null space is a line.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqset::FrequencySet;
use crate::trigpoly::{feature_matrix, TrigPolynomial};
use crate::zerosampler::{grid_values, refined_crossings, SampleSet, DEFAULT_ROOT_TOL};

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Err(Error::invalid("matrix is empty"));
    }
    let mut sv: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Number of singular values strictly above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<Complex64>, rel_tol: f64) -> Result<usize> {
    if !(rel_tol > 0.0) {
        return Err(Error::invalid("rank tolerance must be positive"));
    }
    Ok(rank_from_singular_values(&singular_values(m)?, rel_tol))
}

fn rank_from_singular_values(sv: &[f64], rel_tol: f64) -> usize {
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub coefficients: TrigPolynomial,
    pub null_space_dim: usize,
    /// All `|bandwidth|` singular values of `Phi^T`, descending, zero-padded
    /// when there are fewer samples than frequencies.
    pub singular_values: Vec<f64>,
    pub unique: bool,
}

/// Recovers the polynomial vanishing on `samples` at the given bandwidth.
///
/// On a symmetric bandwidth the null space is closed under `c_k -> conj(c_{-k})`,
/// so the returned representative is projected onto its conjugate-symmetric
/// part and is always real-valued.
pub fn recover_coefficients(
    samples: &SampleSet,
    bandwidth: &FrequencySet,
    rel_tol: f64,
) -> Result<RecoveryResult> {
    if samples.is_empty() {
        return Err(Error::invalid("need at least one sample"));
    }
    if samples.dim() != bandwidth.dim() {
        return Err(Error::invalid(format!(
            "samples have dimension {} but bandwidth has dimension {}",
            samples.dim(),
            bandwidth.dim()
        )));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::invalid("rank tolerance must be positive"));
    }
    let phi = feature_matrix(bandwidth, samples.points())?.into_values();
    let l = bandwidth.len();
    let rows = samples.len().max(l);
    // zero rows leave the right singular structure unchanged and make V square
    let mut system = DMatrix::<Complex64>::zeros(rows, l);
    system
        .view_mut((0, 0), (samples.len(), l))
        .copy_from(&phi.transpose());

    let svd = SVD::new(system, false, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smallest = *order.last().expect("nonempty");
    let null_vector: Vec<Complex64> = v_t.row(smallest).iter().map(|v| v.conj()).collect();

    let rank = rank_from_singular_values(&singular_values, rel_tol);
    let null_space_dim = l - rank;
    let coefficients = normalize(bandwidth, null_vector)?;
    Ok(RecoveryResult {
        coefficients,
        null_space_dim,
        singular_values,
        unique: null_space_dim == 1,
    })
}

fn normalize(bandwidth: &FrequencySet, v: Vec<Complex64>) -> Result<TrigPolynomial> {
    let mut v = match bandwidth.negation_map() {
        Some(neg) => {
            let plus: Vec<Complex64> = v.iter().zip(&neg).map(|(c, &j)| c + v[j].conj()).collect();
            let minus: Vec<Complex64> = v
                .iter()
                .zip(&neg)
                .map(|(c, &j)| Complex64::i() * (c - v[j].conj()))
                .collect();
            if l2(&plus) >= l2(&minus) {
                plus
            } else {
                minus
            }
        }
        None => v,
    };
    let norm = l2(&v);
    let pivot = v.iter().enumerate().fold(
        0,
        |best, (i, c)| if c.norm() > v[best].norm() { i } else { best },
    );
    let symmetric = bandwidth.is_symmetric();
    let phase = if symmetric {
        // only real rescaling keeps conjugate symmetry
        let p = v[pivot];
        if p.re < 0.0 || (p.re == 0.0 && p.im < 0.0) {
            -1.0
        } else {
            1.0
        }
        .into()
    } else {
        v[pivot].conj() / v[pivot].norm()
    };
    let scale: Complex64 = phase / norm;
    v.iter_mut().for_each(|c| *c *= scale);
    if symmetric {
        TrigPolynomial::new_real(bandwidth.clone(), v)
    } else {
        TrigPolynomial::new(bandwidth.clone(), v)
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `|<a, b>| / (|a| |b|)`: 1 when the coefficient vectors agree up to a complex scale.
pub fn coefficient_match(recovered: &TrigPolynomial, truth: &TrigPolynomial) -> Result<f64> {
    if recovered.support() != truth.support() {
        return Err(Error::invalid("coefficient match needs identical supports"));
    }
    let inner: Complex64 = recovered
        .coeffs()
        .iter()
        .zip(truth.coeffs())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((inner.norm() / (recovered.l2_norm() * truth.l2_norm())).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankIdentity {
    pub observed: usize,
    pub predicted: usize,
}

/// Compares the numerical rank of the `gamma` features of on-surface samples
/// with `|gamma| - |gamma : lambda|`.
pub fn rank_identity_check(
    samples: &SampleSet,
    gamma: &FrequencySet,
    lambda: &FrequencySet,
    rel_tol: f64,
) -> Result<RankIdentity> {
    let shifts = gamma.shift_set(lambda)?;
    let phi = feature_matrix(gamma, samples.points())?;
    Ok(RankIdentity {
        observed: numerical_rank(phi.values(), rel_tol)?,
        predicted: gamma.len() - shifts.len(),
    })
}

/// Scale-free disagreement between two zero sets: the mean of `|other(x)|`
/// over the traced (and edge-bisected) zero set of one polynomial, normalized by the RMS of
/// `other` on the grid, averaged over both directions. A direction whose
/// trace is empty is skipped.
pub fn surface_distance_report(
    recovered: &TrigPolynomial,
    truth: &TrigPolynomial,
    grid_resolution: usize,
) -> Result<f64> {
    if recovered.dim() != truth.dim() {
        return Err(Error::invalid("polynomials have different dimensions"));
    }
    let forward = directed_distance(truth, recovered, grid_resolution)?;
    let backward = directed_distance(recovered, truth, grid_resolution)?;
    match (forward, backward) {
        (Some(a), Some(b)) => Ok(0.5 * (a + b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::invalid("neither zero set was hit by the trace grid")),
    }
}

fn directed_distance(
    traced: &TrigPolynomial,
    other: &TrigPolynomial,
    res: usize,
) -> Result<Option<f64>> {
    let trace = refined_crossings(traced, res, DEFAULT_ROOT_TOL * traced.l2_norm())?;
    if trace.is_empty() {
        return Ok(None);
    }
    let grid = grid_values(other, res);
    let rms = (grid.iter().map(|v| v * v).sum::<f64>() / grid.len() as f64).sqrt();
    if rms == 0.0 {
        return Err(Error::invalid("polynomial vanishes on the whole grid"));
    }
    let mean = trace
        .iter()
        .map(|x| other.eval_unchecked(x).norm())
        .sum::<f64>()
        / trace.len() as f64;
    Ok(Some(mean / rms))
}

/// JSON form of a [`RecoveryResult`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryDocument {
    pub coefficients: TrigPolynomial,
    pub singular_values: Vec<f64>,
    pub null_space_dim: usize,
    pub unique: bool,
    #[serde(rename = "match", default, skip_serializing_if = "Option::is_none")]
    pub match_score: Option<f64>,
}

impl RecoveryDocument {
    pub fn new(result: &RecoveryResult, match_score: Option<f64>) -> Self {
        RecoveryDocument {
            coefficients: result.coefficients.clone(),
            singular_values: result.singular_values.clone(),
            null_space_dim: result.null_space_dim,
            unique: result.unique,
            match_score,
        }
    }
}
