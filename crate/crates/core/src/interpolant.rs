//! Local kernel representation of a bandlimited function on a surface.
//!
//! Features `phi_gamma(x)` of points on the zero set of a `lambda`-bandlimited
//! polynomial span a subspace of dimension `P = |gamma| - |gamma : lambda|`.
//! With `P` anchors spanning it, any `gamma`-bandlimited `f` is reproduced on
//! the surface by `f(x) = sum_i p_i k(x_i, x)` where `p^T = f(X) K^+`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqset::FrequencySet;
use crate::recovery::numerical_rank;
use crate::trigpoly::{dirichlet_kernel, feature_matrix, TrigPolynomial};
use crate::zerosampler::{derive_seed, sample_zero_set, SampleSet, SamplerConfig};

pub const DEFAULT_PINV_TOL: f64 = 1e-10;
pub const DEFAULT_ANCHOR_RETRIES: usize = 20;
pub const DEFAULT_POOL_FACTOR: usize = 4;

#[derive(Debug, Clone)]
pub struct Interpolant {
    anchors: SampleSet,
    weights: Vec<Complex64>,
    kernel_bandwidth: FrequencySet,
    kernel_matrix_rank: usize,
    pinv_tol: f64,
}

/// `|gamma| - |gamma : lambda|`.
pub fn anchor_count(gamma: &FrequencySet, lambda: &FrequencySet) -> Result<usize> {
    Ok(gamma.len() - gamma.shift_set(lambda)?.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorOptions {
    /// Candidate pool size as a multiple of the anchor count. A factor of 1
    /// uses every drawn point as an anchor.
    pub pool_factor: usize,
    pub max_retries: usize,
    pub sampler: SamplerConfig,
    pub rank_tol: f64,
}

impl Default for AnchorOptions {
    fn default() -> Self {
        AnchorOptions {
            pool_factor: DEFAULT_POOL_FACTOR,
            max_retries: DEFAULT_ANCHOR_RETRIES,
            sampler: SamplerConfig::default(),
            rank_tol: crate::recovery::DEFAULT_RANK_TOL,
        }
    }
}

/// Draws certified anchors with default options.
pub fn select_anchors(
    surface: &TrigPolynomial,
    gamma: &FrequencySet,
    seed: u64,
    max_retries: usize,
) -> Result<SampleSet> {
    let options = AnchorOptions {
        max_retries,
        ..Default::default()
    };
    select_anchors_with(surface, gamma, seed, &options)
}

/// Draws `pool_factor * P` random points on the surface, keeps the `P` whose
/// `gamma` features are picked first by column-pivoted Gram-Schmidt, and
/// accepts them once those features have numerical rank `P`. A rejected draw
/// is repeated with a fresh seed, up to `max_retries` times.
pub fn select_anchors_with(
    surface: &TrigPolynomial,
    gamma: &FrequencySet,
    seed: u64,
    options: &AnchorOptions,
) -> Result<SampleSet> {
    let required = anchor_count(gamma, surface.support())?;
    if required == 0 {
        return Err(Error::invalid("anchor count is zero"));
    }
    if options.pool_factor == 0 {
        return Err(Error::invalid("pool factor must be at least 1"));
    }
    let mut achieved = 0;
    for retry in 0..=options.max_retries {
        let pool = sample_zero_set(
            surface,
            required * options.pool_factor,
            derive_seed(seed, retry as u64),
            &options.sampler,
        )?;
        let anchors = if options.pool_factor == 1 {
            pool
        } else {
            let phi = feature_matrix(gamma, pool.points())?;
            let mut picked = pivoted_columns(phi.values(), required);
            picked.sort_unstable();
            let mut anchors = SampleSet::new(pool.dim());
            for i in picked {
                anchors.push(pool.points()[i].clone(), None, pool.residuals()[i])?;
            }
            anchors
        };
        let phi = feature_matrix(gamma, anchors.points())?;
        achieved = numerical_rank(phi.values(), options.rank_tol)?;
        if achieved == required {
            return Ok(anchors);
        }
    }
    Err(Error::AnchorSelection {
        retries: options.max_retries,
        achieved,
        required,
    })
}

/// Greedy column selection: repeatedly take the column with the largest
/// residual norm and project it out of the rest.
fn pivoted_columns(m: &DMatrix<Complex64>, count: usize) -> Vec<usize> {
    let mut residual = m.clone();
    let mut taken = vec![false; m.ncols()];
    let mut picked = Vec::with_capacity(count);
    for _ in 0..count.min(m.ncols()) {
        let (best, norm) = (0..residual.ncols())
            .filter(|&j| !taken[j])
            .map(|j| (j, residual.column(j).norm()))
            .fold(
                (usize::MAX, -1.0),
                |acc, c| if c.1 > acc.1 { c } else { acc },
            );
        if norm <= 0.0 {
            break;
        }
        taken[best] = true;
        picked.push(best);
        let q = residual.column(best) / Complex64::new(norm, 0.0);
        for j in 0..residual.ncols() {
            if !taken[j] {
                let coef = q.dotc(&residual.column(j));
                let update = &q * coef;
                let mut col = residual.column_mut(j);
                col -= update;
            }
        }
    }
    picked
}

/// `K_ij = k(x_i, x_j)`.
pub fn kernel_matrix(gamma: &FrequencySet, anchors: &SampleSet) -> Result<DMatrix<Complex64>> {
    let pts = anchors.points();
    let n = pts.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dirichlet_kernel(gamma, &pts[i], &pts[j])?;
            k[(i, j)] = v;
            k[(j, i)] = v.conj();
        }
    }
    Ok(k)
}

pub fn build_interpolant(
    f_values: &[Complex64],
    anchors: &SampleSet,
    gamma: &FrequencySet,
    pinv_tol: f64,
) -> Result<Interpolant> {
    if f_values.len() != anchors.len() {
        return Err(Error::invalid(format!(
            "{} function values for {} anchors",
            f_values.len(),
            anchors.len()
        )));
    }
    if anchors.is_empty() {
        return Err(Error::invalid("need at least one anchor"));
    }
    if anchors.dim() != gamma.dim() {
        return Err(Error::invalid("anchor dimension does not match bandwidth"));
    }
    if !(pinv_tol > 0.0) {
        return Err(Error::invalid("pseudo-inverse tolerance must be positive"));
    }
    let k = kernel_matrix(gamma, anchors)?;
    let (k_pinv, rank) = hermitian_pinv(k, pinv_tol);
    if rank < anchors.len() {
        return Err(Error::IllConditionedKernel {
            rank,
            required: anchors.len(),
            cutoff: pinv_tol,
        });
    }
    let f = DVector::from_column_slice(f_values);
    let weights = k_pinv.transpose() * f;
    Ok(Interpolant {
        anchors: anchors.clone(),
        weights: weights.iter().copied().collect(),
        kernel_bandwidth: gamma.clone(),
        kernel_matrix_rank: rank,
        pinv_tol,
    })
}

/// Moore-Penrose inverse of a Hermitian matrix through its eigendecomposition,
/// dropping eigenvalues at or below `rel_tol * max |lambda|`.
fn hermitian_pinv(k: DMatrix<Complex64>, rel_tol: f64) -> (DMatrix<Complex64>, usize) {
    let eig = SymmetricEigen::new(k);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = rel_tol * top;
    let n = eig.eigenvalues.len();
    let mut pinv = DMatrix::zeros(n, n);
    let mut rank = 0;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cutoff && top > 0.0 {
            rank += 1;
            let v = eig.eigenvectors.column(i);
            pinv += (v * v.adjoint()) * Complex64::new(1.0 / lambda, 0.0);
        }
    }
    (pinv, rank)
}

impl Interpolant {
    /// `sum_i p_i k(x_i, x)`. Defined everywhere; it only agrees with the
    /// original function on the surface.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.kernel_bandwidth.dim() {
            return Err(Error::invalid(format!(
                "point has dimension {} but interpolant has dimension {}",
                x.len(),
                self.kernel_bandwidth.dim()
            )));
        }
        self.anchors
            .points()
            .iter()
            .zip(&self.weights)
            .map(|(a, p)| dirichlet_kernel(&self.kernel_bandwidth, a, x).map(|k| p * k))
            .sum()
    }

    pub fn anchors(&self) -> &SampleSet {
        &self.anchors
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn kernel_bandwidth(&self) -> &FrequencySet {
        &self.kernel_bandwidth
    }

    pub fn kernel_matrix_rank(&self) -> usize {
        self.kernel_matrix_rank
    }

    pub fn pinv_tol(&self) -> f64 {
        self.pinv_tol
    }

    /// Number of stored parameters.
    pub fn parameter_count(&self) -> usize {
        self.weights.len()
    }
}

/// Builds the interpolant of `f` from its values at the anchors.
pub fn interpolate(f: &TrigPolynomial, anchors: &SampleSet, pinv_tol: f64) -> Result<Interpolant> {
    let values = anchors
        .points()
        .iter()
        .map(|x| f.eval(x))
        .collect::<Result<Vec<_>>>()?;
    build_interpolant(&values, anchors, f.support(), pinv_tol)
}

#[derive(Serialize, Deserialize)]
struct InterpolantDocument {
    gamma: FrequencySet,
    anchors: Vec<Vec<f64>>,
    weights: Vec<[f64; 2]>,
    pinv_tol: f64,
}

impl Serialize for Interpolant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InterpolantDocument {
            gamma: self.kernel_bandwidth.clone(),
            anchors: self.anchors.points().to_vec(),
            weights: self.weights.iter().map(|w| [w.re, w.im]).collect(),
            pinv_tol: self.pinv_tol,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interpolant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = InterpolantDocument::deserialize(d)?;
        if doc.anchors.len() != doc.weights.len() {
            return Err(D::Error::custom("anchors and weights differ in length"));
        }
        let anchors =
            SampleSet::from_points(doc.gamma.dim(), doc.anchors).map_err(D::Error::custom)?;
        Ok(Interpolant {
            kernel_matrix_rank: anchors.len(),
            anchors,
            weights: doc
                .weights
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
            kernel_bandwidth: doc.gamma,
            pinv_tol: doc.pinv_tol,
        })
    }
}
