//! Random points on the zero set of a real trigonometric polynomial, and dense
//! traces of that zero set on a grid.
//!
//! Sampling draws a random axis-parallel line, scans it on a 256-node grid for
//! sign changes, and bisects one of them at random. Each point owns its own
//! ChaCha stream derived from the seed, so results do not depend on the order
//! in which points are produced.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::trigpoly::TrigPolynomial;

pub const SLICE_NODES: usize = 256;
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ATTEMPTS: usize = 1000;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub tol: f64,
    pub max_attempts: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            tol: DEFAULT_ROOT_TOL,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

/// Points in `[0,1)^n` with the residual `|psi(x)|` reached for each and an
/// optional component tag.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    components: Vec<Option<usize>>,
    residuals: Vec<f64>,
}

impl SampleSet {
    pub fn new(dim: usize) -> Self {
        SampleSet {
            dim,
            ..Default::default()
        }
    }

    /// Wraps raw points, with zero residuals and no tags.
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let mut set = SampleSet::new(dim);
        for p in points {
            set.push(p, None, 0.0)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, point: Vec<f64>, component: Option<usize>, residual: f64) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::invalid(format!(
                "point has dimension {} but sample set has dimension {}",
                point.len(),
                self.dim
            )));
        }
        if point.iter().any(|c| !(0.0..1.0).contains(c)) {
            return Err(Error::invalid(format!(
                "point {point:?} is outside [0,1)^n"
            )));
        }
        self.points.push(point);
        self.components.push(component);
        self.residuals.push(residual);
        Ok(())
    }

    pub fn extend(&mut self, other: SampleSet) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::invalid(
                "cannot merge sample sets of different dimension",
            ));
        }
        self.points.extend(other.points);
        self.components.extend(other.components);
        self.residuals.extend(other.residuals);
        Ok(())
    }

    pub fn with_component(mut self, component: usize) -> Self {
        self.components
            .iter_mut()
            .for_each(|c| *c = Some(component));
        self
    }

    /// The first `n` points.
    pub fn truncated(&self, n: usize) -> SampleSet {
        let n = n.min(self.len());
        SampleSet {
            dim: self.dim,
            points: self.points[..n].to_vec(),
            components: self.components[..n].to_vec(),
            residuals: self.residuals[..n].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn components(&self) -> &[Option<usize>] {
        &self.components
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Writes `x1,...,xn,component,residual` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        header.push("component".into());
        header.push("residual".into());
        w.write_record(&header)?;
        for ((p, c), r) in self
            .points
            .iter()
            .zip(&self.components)
            .zip(&self.residuals)
        {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            row.push(c.map(|c| c.to_string()).unwrap_or_default());
            row.push(format!("{r:.16e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<SampleSet> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let n = header.len();
        if n < 3 || &header[n - 2] != "component" || &header[n - 1] != "residual" {
            return Err(Error::format(
                "line 1",
                "header must be x1,...,xn,component,residual",
            ));
        }
        let dim = n - 2;
        for (i, name) in header.iter().take(dim).enumerate() {
            if name != format!("x{}", i + 1) {
                return Err(Error::format(
                    "line 1",
                    format!("expected column x{}, found {name:?}", i + 1),
                ));
            }
        }
        let mut set = SampleSet::new(dim);
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let field = |i: usize| -> Result<f64> {
                record[i].trim().parse::<f64>().map_err(|_| {
                    Error::format(
                        format!("line {line}, field {}", &header[i]),
                        format!("cannot parse {:?} as a number", &record[i]),
                    )
                })
            };
            let point = (0..dim).map(field).collect::<Result<Vec<_>>>()?;
            let tag = record[dim].trim();
            let component = if tag.is_empty() {
                None
            } else {
                Some(tag.parse::<usize>().map_err(|_| {
                    Error::format(
                        format!("line {line}, field component"),
                        format!("cannot parse {tag:?} as a component index"),
                    )
                })?)
            };
            let residual = field(dim + 1)?;
            set.push(point, component, residual)
                .map_err(|e| Error::format(format!("line {line}"), e.to_string()))?;
        }
        Ok(set)
    }
}

fn require_real(p: &TrigPolynomial) -> Result<()> {
    if !p.is_real_valued() {
        return Err(Error::invalid(
            "zero-set sampling needs a real-valued polynomial",
        ));
    }
    Ok(())
}

/// Draws `count` independent points with `|psi(x)| <= tol`.
pub fn sample_zero_set(
    p: &TrigPolynomial,
    count: usize,
    seed: u64,
    config: &SamplerConfig,
) -> Result<SampleSet> {
    require_real(p)?;
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    if !(config.tol > 0.0) {
        return Err(Error::invalid("root tolerance must be positive"));
    }
    let mut set = SampleSet::new(p.dim());
    for index in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let (point, residual) = sample_one(p, &mut rng, config).ok_or(Error::SamplingFailure {
            point: index,
            attempts: config.max_attempts,
        })?;
        set.push(point, None, residual)?;
    }
    Ok(set)
}

/// Samples each component separately with its own count, tagging points with
/// the component index, and pools the result in component order.
pub fn sample_union(
    components: &[TrigPolynomial],
    counts: &[usize],
    seed: u64,
    config: &SamplerConfig,
) -> Result<SampleSet> {
    if components.len() != counts.len() {
        return Err(Error::invalid(format!(
            "{} components but {} sample counts",
            components.len(),
            counts.len()
        )));
    }
    let dim = components
        .first()
        .ok_or_else(|| Error::invalid("need at least one component"))?
        .dim();
    let mut pooled = SampleSet::new(dim);
    for (i, (p, &n)) in components.iter().zip(counts).enumerate() {
        if n == 0 {
            continue;
        }
        let part = sample_zero_set(p, n, derive_seed(seed, i as u64), config)?;
        pooled.extend(part.with_component(i))?;
    }
    Ok(pooled)
}

fn sample_one(
    p: &TrigPolynomial,
    rng: &mut ChaCha8Rng,
    config: &SamplerConfig,
) -> Option<(Vec<f64>, f64)> {
    let dim = p.dim();
    let h = 1.0 / SLICE_NODES as f64;
    for _ in 0..config.max_attempts {
        let axis = rng.random_range(0..dim);
        let mut x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let slice = p.axis_slice(axis, &x);
        let values: Vec<f64> = (0..SLICE_NODES)
            .map(|m| slice.eval(m as f64 * h).re)
            .collect();
        let brackets: Vec<usize> = (0..SLICE_NODES)
            .filter(|&m| {
                let a = values[m];
                let b = values[(m + 1) % SLICE_NODES];
                a == 0.0 || a * b < 0.0
            })
            .collect();
        if brackets.is_empty() {
            continue;
        }
        let m = brackets[rng.random_range(0..brackets.len())];
        let t = bisect(
            |t| slice.eval(t).re,
            m as f64 * h,
            (m + 1) as f64 * h,
            values[m],
            values[(m + 1) % SLICE_NODES],
            config.tol * 0.5,
        );
        x[axis] = if t >= 1.0 { t - 1.0 } else { t };
        let residual = p.eval_unchecked(&x).norm();
        if residual <= config.tol {
            return Some((x, residual));
        }
    }
    None
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, fb: f64, tol: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    let mut best = if fa.abs() <= fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs() <= tol {
            break;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    best.0
}

/// Grid-edge crossings of the zero set: `psi` is evaluated on a periodic grid
/// with `resolution` nodes per axis and every edge with a sign change
/// contributes its linear-interpolation crossing.
pub fn trace_zero_set(p: &TrigPolynomial, resolution: usize) -> Result<SampleSet> {
    let h = 1.0 / resolution as f64;
    let mut out = SampleSet::new(p.dim());
    for_each_crossing(p, resolution, |mut x, axis, va, vb| {
        if va != 0.0 {
            x[axis] += h * va / (va - vb);
            if x[axis] >= 1.0 {
                x[axis] -= 1.0;
            }
        }
        let r = p.eval_unchecked(&x).norm();
        out.push(x, None, r)
    })?;
    Ok(out)
}

/// Like [`trace_zero_set`] but each crossing is bisected along its edge down to
/// `tol`, so the points lie on the zero set up to rounding.
pub(crate) fn refined_crossings(
    p: &TrigPolynomial,
    resolution: usize,
    tol: f64,
) -> Result<Vec<Vec<f64>>> {
    let h = 1.0 / resolution as f64;
    let mut out = Vec::new();
    for_each_crossing(p, resolution, |mut x, axis, va, vb| {
        if va != 0.0 {
            let slice = p.axis_slice(axis, &x);
            let a = x[axis];
            let t = bisect(|t| slice.eval(t).re, a, a + h, va, vb, tol);
            x[axis] = if t >= 1.0 { t - 1.0 } else { t };
        }
        out.push(x);
        Ok(())
    })?;
    Ok(out)
}

/// Calls `emit(node, axis, v_node, v_neighbor)` for every grid edge with a sign
/// change, and `emit(node, 0, 0.0, 0.0)` for nodes where `psi` is exactly zero.
fn for_each_crossing<F>(p: &TrigPolynomial, resolution: usize, mut emit: F) -> Result<()>
where
    F: FnMut(Vec<f64>, usize, f64, f64) -> Result<()>,
{
    require_real(p)?;
    let dim = p.dim();
    if !(2..=3).contains(&dim) {
        return Err(Error::invalid(format!(
            "tracing supports dim 2 or 3, got {dim}"
        )));
    }
    if resolution < 2 {
        return Err(Error::invalid("grid resolution must be at least 2"));
    }
    let values = grid_values(p, resolution);
    let h = 1.0 / resolution as f64;
    for (flat, &va) in values.iter().enumerate() {
        let idx: Vec<usize> = (0..dim)
            .map(|a| (flat / resolution.pow(a as u32)) % resolution)
            .collect();
        let node: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
        if va == 0.0 {
            emit(node, 0, 0.0, 0.0)?;
            continue;
        }
        for axis in 0..dim {
            let stride = resolution.pow(axis as u32);
            let neighbor = if idx[axis] + 1 == resolution {
                flat + stride - resolution * stride
            } else {
                flat + stride
            };
            let vb = values[neighbor];
            if va * vb < 0.0 {
                emit(node.clone(), axis, va, vb)?;
            }
        }
    }
    Ok(())
}

/// Real parts of `psi` on the periodic grid, axis 0 fastest.
pub(crate) fn grid_values(p: &TrigPolynomial, resolution: usize) -> Vec<f64> {
    let dim = p.dim();
    let total = resolution.pow(dim as u32);
    let h = 1.0 / resolution as f64;
    (0..total)
        .map(|flat| {
            let x: Vec<f64> = (0..dim)
                .map(|a| ((flat / resolution.pow(a as u32)) % resolution) as f64 * h)
                .collect();
            p.eval_unchecked(&x).re
        })
        .collect()
}

/// SplitMix64 finalizer over `seed ^ tag`, used to derive independent seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        ^ tag
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
