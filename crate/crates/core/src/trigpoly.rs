//! Multidimensional trigonometric polynomials `sum_k c_k exp(j 2 pi k.x)` on the
//! unit hypercube, their exponential feature maps, and the Dirichlet kernel.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqset::FrequencySet;

/// Relative tolerance used when checking conjugate symmetry of coefficients.
pub const CONJUGATE_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    support: FrequencySet,
    coeffs: Vec<Complex64>,
    real_valued: bool,
}

impl TrigPolynomial {
    /// A general complex polynomial.
    pub fn new(support: FrequencySet, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != support.len() {
            return Err(Error::invalid(format!(
                "expected {} coefficients, got {}",
                support.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
            return Err(Error::invalid("coefficients are all zero"));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(TrigPolynomial {
            support,
            coeffs,
            real_valued: false,
        })
    }

    /// A real-valued polynomial: the support must be symmetric and
    /// `c_{-k} = conj(c_k)` up to [`CONJUGATE_SYMMETRY_TOL`]. The stored
    /// coefficients are symmetrized exactly.
    pub fn new_real(support: FrequencySet, coeffs: Vec<Complex64>) -> Result<Self> {
        let mut poly = TrigPolynomial::new(support, coeffs)?;
        let neg = poly
            .support
            .negation_map()
            .ok_or_else(|| Error::invalid("real-valued polynomial needs a symmetric support"))?;
        let scale = poly.l1_norm();
        let worst = poly
            .coeffs
            .iter()
            .zip(&neg)
            .map(|(c, &j)| (c - poly.coeffs[j].conj()).norm())
            .fold(0.0, f64::max);
        if worst > CONJUGATE_SYMMETRY_TOL * scale {
            return Err(Error::invalid(format!(
                "coefficients are not conjugate symmetric (deviation {worst:e})"
            )));
        }
        poly.coeffs = symmetrize(&poly.coeffs, &neg);
        poly.real_valued = true;
        Ok(poly)
    }

    /// The constant polynomial.
    pub fn constant(dim: usize, value: Complex64) -> Result<Self> {
        let support = FrequencySet::zero(dim)?;
        if value.im == 0.0 {
            TrigPolynomial::new_real(support, vec![value])
        } else {
            TrigPolynomial::new(support, vec![value])
        }
    }

    pub fn support(&self) -> &FrequencySet {
        &self.support
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn coefficient_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.coeffs)
    }

    /// `psi(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        check_point(&self.support, x)?;
        Ok(self.eval_unchecked(x))
    }

    /// Real part of `psi(x)`; the imaginary part vanishes for real-valued polynomials.
    pub fn eval_real(&self, x: &[f64]) -> Result<f64> {
        self.eval(x).map(|v| v.re)
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Complex64 {
        let phases = AxisPhases::new(&self.support, x);
        self.support
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| c * phases.term(k))
            .sum()
    }

    /// Product of two polynomials via coefficient convolution.
    pub fn multiply(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        let support = self.support.minkowski_sum(&other.support)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); support.len()];
        for (ka, ca) in self.support.iter().zip(&self.coeffs) {
            for (kb, cb) in other.support.iter().zip(&other.coeffs) {
                let k: Vec<i32> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                let pos = support.position(&k).expect("sum lies in minkowski sum");
                coeffs[pos] += ca * cb;
            }
        }
        if coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
            return Err(Error::invalid("product vanishes identically"));
        }
        if self.real_valued && other.real_valued {
            let neg = support
                .negation_map()
                .expect("sum of symmetric sets is symmetric");
            let coeffs = symmetrize(&coeffs, &neg);
            Ok(TrigPolynomial {
                support,
                coeffs,
                real_valued: true,
            })
        } else {
            TrigPolynomial::new(support, coeffs)
        }
    }

    /// The polynomial `q` with `q(x + t) = p(x)`, i.e. `c_k -> c_k exp(-j 2 pi k.t)`.
    pub fn translate(&self, t: &[f64]) -> Result<TrigPolynomial> {
        check_point(&self.support, t)?;
        let coeffs = self
            .support
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| c * Complex64::cis(-TAU * dot(k, t)))
            .collect();
        let mut out = TrigPolynomial::new(self.support.clone(), coeffs)?;
        if self.real_valued {
            let neg = self.support.negation_map().expect("symmetric");
            out.coeffs = symmetrize(&out.coeffs, &neg);
            out.real_valued = true;
        }
        Ok(out)
    }

    /// Returns the same polynomial multiplied by a complex scalar.
    pub fn scaled(&self, alpha: Complex64) -> Result<TrigPolynomial> {
        let coeffs = self.coeffs.iter().map(|c| c * alpha).collect();
        if self.real_valued && alpha.im == 0.0 {
            TrigPolynomial::new_real(self.support.clone(), coeffs)
        } else {
            TrigPolynomial::new(self.support.clone(), coeffs)
        }
    }

    /// Restriction to the line through `x` along `axis`, as 1-D coefficients
    /// indexed from the support's minimum frequency on that axis.
    pub(crate) fn axis_slice(&self, axis: usize, x: &[f64]) -> AxisSlice {
        let bounds = self.support.axis_bounds();
        let (lo, hi) = bounds[axis];
        let phases = AxisPhases::new(&self.support, x);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for (k, c) in self.support.iter().zip(&self.coeffs) {
            let mut term = *c;
            for (i, &ki) in k.iter().enumerate() {
                if i != axis {
                    term *= phases.get(i, ki);
                }
            }
            coeffs[(k[axis] - lo) as usize] += term;
        }
        AxisSlice {
            min_freq: lo,
            coeffs,
        }
    }
}

/// A 1-D trigonometric polynomial obtained by fixing all but one coordinate.
pub(crate) struct AxisSlice {
    min_freq: i32,
    coeffs: Vec<Complex64>,
}

impl AxisSlice {
    pub(crate) fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::cis(TAU * f64::from(self.min_freq + i as i32) * t))
            .sum()
    }
}

/// Per-axis tables of `exp(j 2 pi m x_i)` covering a support's frequency range.
struct AxisPhases {
    offsets: Vec<i32>,
    tables: Vec<Vec<Complex64>>,
}

impl AxisPhases {
    fn new(support: &FrequencySet, x: &[f64]) -> Self {
        let bounds = support.axis_bounds();
        let offsets = bounds.iter().map(|b| b.0).collect();
        let tables = bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &xi)| {
                (lo..=hi)
                    .map(|m| Complex64::cis(TAU * f64::from(m) * xi))
                    .collect()
            })
            .collect();
        AxisPhases { offsets, tables }
    }

    #[inline]
    fn get(&self, axis: usize, m: i32) -> Complex64 {
        self.tables[axis][(m - self.offsets[axis]) as usize]
    }

    #[inline]
    fn term(&self, k: &[i32]) -> Complex64 {
        k.iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (axis, &m)| {
                acc * self.get(axis, m)
            })
    }
}

/// `phi(x)`: one unit-modulus entry per frequency, in canonical order.
pub fn feature_map(bandwidth: &FrequencySet, x: &[f64]) -> Result<DVector<Complex64>> {
    check_point(bandwidth, x)?;
    let phases = AxisPhases::new(bandwidth, x);
    Ok(DVector::from_iterator(
        bandwidth.len(),
        bandwidth.iter().map(|k| phases.term(k)),
    ))
}

/// Lifted features of a set of points, one column per point.
#[derive(Debug, Clone)]
pub struct FeatureMatrix<'a> {
    bandwidth: &'a FrequencySet,
    values: DMatrix<Complex64>,
}

impl<'a> FeatureMatrix<'a> {
    pub fn bandwidth(&self) -> &FrequencySet {
        self.bandwidth
    }

    /// `|bandwidth| x N`.
    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<Complex64> {
        self.values
    }

    /// `c^T Phi`: one annihilation residual per point.
    pub fn annihilate(&self, coeffs: &[Complex64]) -> Result<DVector<Complex64>> {
        if coeffs.len() != self.values.nrows() {
            return Err(Error::invalid(
                "coefficient length does not match bandwidth",
            ));
        }
        let c = DVector::from_column_slice(coeffs);
        Ok(self.values.transpose() * c)
    }
}

pub fn feature_matrix<'a, P: AsRef<[f64]>>(
    bandwidth: &'a FrequencySet,
    points: &[P],
) -> Result<FeatureMatrix<'a>> {
    if points.is_empty() {
        return Err(Error::invalid("feature matrix needs at least one point"));
    }
    let mut values = DMatrix::zeros(bandwidth.len(), points.len());
    for (j, x) in points.iter().enumerate() {
        values.set_column(j, &feature_map(bandwidth, x.as_ref())?);
    }
    Ok(FeatureMatrix { bandwidth, values })
}

/// `k(x, y) = phi(x)^H phi(y) = sum_k exp(j 2 pi k.(y - x))`.
pub fn dirichlet_kernel(bandwidth: &FrequencySet, x: &[f64], y: &[f64]) -> Result<Complex64> {
    check_point(bandwidth, x)?;
    check_point(bandwidth, y)?;
    let diff: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let phases = AxisPhases::new(bandwidth, &diff);
    Ok(bandwidth.iter().map(|k| phases.term(k)).sum())
}

/// A random real-valued polynomial together with a point of its zero set.
#[derive(Debug, Clone)]
pub struct AnchoredPolynomial {
    pub polynomial: TrigPolynomial,
    /// The point the constant term was adjusted to vanish at.
    pub anchor: Vec<f64>,
}

/// Draws conjugate-symmetric complex Gaussian coefficients over `bandwidth`
/// and shifts the constant term so the polynomial vanishes at a uniformly
/// random point.
pub fn random_real_polynomial(bandwidth: &FrequencySet, seed: u64) -> Result<AnchoredPolynomial> {
    let neg = bandwidth
        .negation_map()
        .ok_or_else(|| Error::invalid("bandwidth must be symmetric"))?;
    let zero = bandwidth
        .position(&vec![0; bandwidth.dim()])
        .ok_or_else(|| Error::invalid("bandwidth must contain the zero frequency"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); bandwidth.len()];
    for (i, &j) in neg.iter().enumerate() {
        if i == j {
            coeffs[i] = Complex64::new(rng.sample(StandardNormal), 0.0);
        } else if i > j {
            // canonical order puts -k before k for the "positive" half
            let c = complex_gaussian(&mut rng);
            coeffs[i] = c;
            coeffs[j] = c.conj();
        }
    }
    let anchor: Vec<f64> = (0..bandwidth.dim()).map(|_| rng.random::<f64>()).collect();
    let draft = TrigPolynomial::new_real(bandwidth.clone(), coeffs)?;
    let offset = draft.eval_unchecked(&anchor).re;
    let mut coeffs = draft.coeffs;
    coeffs[zero].re -= offset;
    let polynomial = TrigPolynomial::new_real(bandwidth.clone(), coeffs)?;
    Ok(AnchoredPolynomial { polynomial, anchor })
}

/// Like [`random_real_polynomial`] but with the constant term set to zero. A
/// nonconstant real polynomial with zero mean changes sign, so the zero set
/// is never empty; it also tends to be a long curve rather than a small oval.
pub fn random_zero_mean_polynomial(bandwidth: &FrequencySet, seed: u64) -> Result<TrigPolynomial> {
    let zero = bandwidth
        .position(&vec![0; bandwidth.dim()])
        .ok_or_else(|| Error::invalid("bandwidth must contain the zero frequency"))?;
    if bandwidth.len() == 1 {
        return Err(Error::invalid(
            "a zero-mean polynomial needs a nonzero frequency",
        ));
    }
    let draft = random_real_polynomial(bandwidth, seed)?.polynomial;
    let mut coeffs = draft.coeffs;
    coeffs[zero] = Complex64::new(0.0, 0.0);
    TrigPolynomial::new_real(bandwidth.clone(), coeffs)
}

/// Independent complex Gaussian coefficients with unit variance per entry.
pub fn random_polynomial(bandwidth: &FrequencySet, seed: u64) -> Result<TrigPolynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..bandwidth.len())
        .map(|_| complex_gaussian(&mut rng))
        .collect();
    TrigPolynomial::new(bandwidth.clone(), coeffs)
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn symmetrize(coeffs: &[Complex64], neg: &[usize]) -> Vec<Complex64> {
    coeffs
        .iter()
        .zip(neg)
        .map(|(c, &j)| (c + coeffs[j].conj()) * 0.5)
        .collect()
}

fn check_point(support: &FrequencySet, x: &[f64]) -> Result<()> {
    if x.len() != support.dim() {
        return Err(Error::invalid(format!(
            "point has dimension {} but polynomial has dimension {}",
            x.len(),
            support.dim()
        )));
    }
    Ok(())
}

fn dot(k: &[i32], x: &[f64]) -> f64 {
    k.iter().zip(x).map(|(a, b)| f64::from(*a) * b).sum()
}

/// On-disk polynomial document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialDocument {
    pub support: FrequencySet,
    pub coeffs: Vec<[f64; 2]>,
    pub real_valued: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PolynomialDocument {
    pub fn from_polynomial(p: &TrigPolynomial, seed: Option<u64>) -> Self {
        PolynomialDocument {
            support: p.support.clone(),
            coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect(),
            real_valued: p.real_valued,
            seed,
        }
    }

    pub fn into_polynomial(self) -> Result<TrigPolynomial> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        if self.real_valued {
            TrigPolynomial::new_real(self.support, coeffs)
        } else {
            TrigPolynomial::new(self.support, coeffs)
        }
    }
}

impl Serialize for TrigPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialDocument::from_polynomial(self, None).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PolynomialDocument::deserialize(d)?
            .into_polynomial()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| rng.random::<f64>()).collect()
    }

    /// Direct double loop: sum over terms, inner loop over coordinates.
    fn summation_oracle(p: &TrigPolynomial, x: &[f64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (k, c) in p.support().iter().zip(p.coeffs()) {
            let mut phase = 0.0;
            for i in 0..x.len() {
                phase += f64::from(k[i]) * x[i];
            }
            total += c * Complex64::new((TAU * phase).cos(), (TAU * phase).sin());
        }
        total
    }

    fn dirichlet_1d(extent: usize, t: f64) -> f64 {
        let s = (std::f64::consts::PI * t).sin();
        if s.abs() < 1e-14 {
            extent as f64
        } else {
            (std::f64::consts::PI * extent as f64 * t).sin() / s
        }
    }

    #[test]
    fn constant_and_cosine() {
        let p = TrigPolynomial::constant(2, Complex64::new(3.0, 0.0)).unwrap();
        assert_eq!(p.eval(&[0.3, 0.7]).unwrap(), Complex64::new(3.0, 0.0));

        let cos = TrigPolynomial::new_real(
            FrequencySet::rect(1, &[3]).unwrap(),
            vec![
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        assert!((cos.eval_real(&[0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(cos.eval_real(&[0.25]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn eval_matches_summation_oracle() {
        let mut r = rng(11);
        for dim in 1..=3 {
            let support = FrequencySet::rect(dim, &vec![5; dim]).unwrap();
            for seed in 0..10 {
                let p = random_polynomial(&support, seed).unwrap();
                let x = random_point(&mut r, dim);
                let fast = p.eval(&x).unwrap();
                let slow = summation_oracle(&p, &x);
                assert!((fast - slow).norm() <= 1e-12 * slow.norm().max(p.l1_norm() * 1e-3));
            }
        }
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let p = random_polynomial(&FrequencySet::rect(2, &[3, 3]).unwrap(), 0).unwrap();
        assert!(matches!(p.eval(&[0.1]), Err(Error::InvalidArgument(_))));
        assert!(feature_map(p.support(), &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn feature_map_properties() {
        let support = FrequencySet::rect(2, &[5, 3]).unwrap();
        let ones = feature_map(&support, &[0.0, 0.0]).unwrap();
        assert!(ones.iter().all(|v| *v == Complex64::new(1.0, 0.0)));

        let mut r = rng(3);
        let neg = support.negation_map().unwrap();
        for _ in 0..20 {
            let x = random_point(&mut r, 2);
            let phi = feature_map(&support, &x).unwrap();
            for (i, &j) in neg.iter().enumerate() {
                assert!((phi[i].norm() - 1.0).abs() < 1e-12);
                assert!((phi[i].conj() - phi[j]).norm() < 1e-12);
            }
            let p = random_polynomial(&support, 5).unwrap();
            let inner = (p.coefficient_vector().transpose() * &phi)[(0, 0)];
            let direct = p.eval(&x).unwrap();
            assert!((inner - direct).norm() <= 1e-12 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn feature_matrix_shape_and_errors() {
        let support = FrequencySet::rect(2, &[3, 3]).unwrap();
        let fm = feature_matrix(&support, &[vec![0.0, 0.0]]).unwrap();
        assert_eq!(fm.values().shape(), (9, 1));
        assert!(fm.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        let empty: Vec<Vec<f64>> = vec![];
        assert!(feature_matrix(&support, &empty).is_err());
    }

    #[test]
    fn off_surface_points_are_not_annihilated() {
        let support = FrequencySet::rect(2, &[3, 3]).unwrap();
        let mut r = rng(99);
        for trial in 0..100 {
            let p = random_real_polynomial(&support, trial).unwrap().polynomial;
            let pts: Vec<Vec<f64>> = (0..10).map(|_| random_point(&mut r, 2)).collect();
            let fm = feature_matrix(&support, &pts).unwrap();
            let res = fm.annihilate(p.coeffs()).unwrap();
            assert!(res.iter().map(|v| v.norm()).fold(0.0, f64::max) > 1e-3);
        }
    }

    #[test]
    fn multiply_by_one_is_identity() {
        let support = FrequencySet::rect(2, &[3, 3]).unwrap();
        let p = random_real_polynomial(&support, 4).unwrap().polynomial;
        let one = TrigPolynomial::constant(2, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(p.multiply(&one).unwrap(), p);
    }

    #[test]
    fn multiply_is_evaluation_homomorphism() {
        let support = FrequencySet::rect(2, &[3, 3]).unwrap();
        let a = random_real_polynomial(&support, 1).unwrap().polynomial;
        let b = random_real_polynomial(&support, 2).unwrap().polynomial;
        let ab = a.multiply(&b).unwrap();
        assert_eq!(ab.support(), &FrequencySet::rect(2, &[5, 5]).unwrap());
        assert!(ab.is_real_valued());
        let c = random_polynomial(&FrequencySet::rect(2, &[5, 3]).unwrap(), 9).unwrap();
        let ac = a.multiply(&c).unwrap();
        assert!(!ac.is_real_valued());
        let mut r = rng(7);
        for _ in 0..100 {
            let x = random_point(&mut r, 2);
            for (prod, f, g) in [(&ab, &a, &b), (&ac, &a, &c)] {
                let expected = f.eval(&x).unwrap() * g.eval(&x).unwrap();
                let got = prod.eval(&x).unwrap();
                assert!((got - expected).norm() <= 1e-10 * expected.norm().max(1.0));
            }
        }
    }

    #[test]
    fn dirichlet_kernel_properties() {
        let support = FrequencySet::rect(2, &[13, 7]).unwrap();
        let mut r = rng(5);
        for _ in 0..50 {
            let x = random_point(&mut r, 2);
            let y = random_point(&mut r, 2);
            let kxx = dirichlet_kernel(&support, &x, &x).unwrap();
            assert!((kxx - Complex64::new(support.len() as f64, 0.0)).norm() < 1e-12);
            let kxy = dirichlet_kernel(&support, &x, &y).unwrap();
            let kyx = dirichlet_kernel(&support, &y, &x).unwrap();
            assert!((kxy.conj() - kyx).norm() < 1e-12);
            let oracle = dirichlet_1d(13, y[0] - x[0]) * dirichlet_1d(7, y[1] - x[1]);
            assert!((kxy - Complex64::new(oracle, 0.0)).norm() <= 1e-10 * oracle.abs().max(1.0));
            let phi_x = feature_map(&support, &x).unwrap();
            let phi_y = feature_map(&support, &y).unwrap();
            assert!((phi_x.dotc(&phi_y) - kxy).norm() < 1e-10);
        }
    }

    #[test]
    fn random_real_polynomial_contract() {
        let support = FrequencySet::rect(2, &[5, 5]).unwrap();
        let a = random_real_polynomial(&support, 42).unwrap();
        let b = random_real_polynomial(&support, 42).unwrap();
        assert_eq!(a.polynomial, b.polynomial);
        assert_eq!(a.anchor, b.anchor);
        assert!(a.polynomial.is_real_valued());
        assert!(a.polynomial.eval(&a.anchor).unwrap().norm() < 1e-12);
        let mut r = rng(1);
        let scale = a.polynomial.l1_norm();
        for _ in 0..100 {
            let x = random_point(&mut r, 2);
            assert!(a.polynomial.eval(&x).unwrap().im.abs() <= 1e-12 * scale);
        }
        let c = random_real_polynomial(&support, 43).unwrap();
        assert_ne!(a.polynomial, c.polynomial);
    }

    #[test]
    fn zero_mean_polynomial_changes_sign() {
        let support = FrequencySet::rect(2, &[3, 3]).unwrap();
        for seed in 0..20 {
            let p = random_zero_mean_polynomial(&support, seed).unwrap();
            assert!(p.is_real_valued());
            assert_eq!(p.coeffs()[4], Complex64::new(0.0, 0.0));
            let grid = crate::zerosampler::grid_values(&p, 32);
            assert!(grid.iter().any(|v| *v > 0.0) && grid.iter().any(|v| *v < 0.0));
        }
        assert!(random_zero_mean_polynomial(&FrequencySet::zero(2).unwrap(), 0).is_err());
    }

    #[test]
    fn random_real_polynomial_needs_symmetric_support() {
        let support = FrequencySet::from_indices(1, [vec![0], vec![1]]).unwrap();
        assert!(matches!(
            random_real_polynomial(&support, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn new_real_rejects_asymmetric_coefficients() {
        let support = FrequencySet::rect(1, &[3]).unwrap();
        let coeffs = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(2.0, 0.0),
        ];
        assert!(TrigPolynomial::new_real(support.clone(), coeffs).is_err());
        assert!(TrigPolynomial::new(support, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn translation_covariance() {
        let support = FrequencySet::rect(2, &[5, 5]).unwrap();
        let p = random_real_polynomial(&support, 8).unwrap().polynomial;
        let t = [0.31, 0.77];
        let q = p.translate(&t).unwrap();
        assert!(q.is_real_valued());
        let mut r = rng(2);
        for _ in 0..50 {
            let x = random_point(&mut r, 2);
            let shifted: Vec<f64> = x.iter().zip(&t).map(|(a, b)| (a + b).fract()).collect();
            let lhs = q.eval(&shifted).unwrap();
            let rhs = p.eval(&x).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * p.l1_norm());
        }
    }

    #[test]
    fn parseval_on_uniform_grid() {
        for dim in 1..=2usize {
            let support = FrequencySet::rect(dim, &vec![7; dim]).unwrap();
            let p = random_real_polynomial(&support, 17).unwrap().polynomial;
            let n = 64usize;
            let total = n.pow(dim as u32);
            let mean: f64 = (0..total)
                .map(|idx| {
                    let x: Vec<f64> = (0..dim)
                        .map(|a| ((idx / n.pow(a as u32)) % n) as f64 / n as f64)
                        .collect();
                    p.eval(&x).unwrap().norm_sqr()
                })
                .sum::<f64>()
                / total as f64;
            let energy = p.l2_norm().powi(2);
            assert!((mean - energy).abs() <= 1e-3 * energy);
        }
    }

    #[test]
    fn axis_slice_agrees_with_eval() {
        let support = FrequencySet::rect(3, &[3, 5, 3]).unwrap();
        let p = random_real_polynomial(&support, 3).unwrap().polynomial;
        let x = [0.2, 0.4, 0.9];
        for axis in 0..3 {
            let slice = p.axis_slice(axis, &x);
            for t in [0.0, 0.13, 0.5, 0.99] {
                let mut y = x.to_vec();
                y[axis] = t;
                assert!((slice.eval(t) - p.eval(&y).unwrap()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let support = FrequencySet::rect(2, &[3, 3]).unwrap();
        let p = random_real_polynomial(&support, 12).unwrap().polynomial;
        let text = serde_json::to_string(&p).unwrap();
        let back: TrigPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
