//! Disturbance models, seeded sampling, and moment tables.
//!
//! Samples are generated in fixed chunks of [`CHUNK`] draws, chunk `c` coming
//! from substream `(seed, DISTURBANCE, c)`. Moment sums are formed per chunk
//! and combined in chunk order, so results do not depend on the thread count.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::region::Region;
use crate::rng::{domain, substream};

pub const CHUNK: usize = 65_536;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Uniform {
        lo: f64,
        hi: f64,
    },
    ScaledBeta {
        alpha: f64,
        beta: f64,
        lo: f64,
        hi: f64,
    },
    TruncatedNormal {
        mu: f64,
        sigma: f64,
        lo: f64,
        hi: f64,
    },
}

impl DistSpec {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistSpec::Uniform { lo, hi }
            | DistSpec::ScaledBeta { lo, hi, .. }
            | DistSpec::TruncatedNormal { lo, hi, .. } => (lo, hi),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::input(format!(
                "support [{lo}, {hi}] must be finite with lo < hi"
            )));
        }
        match *self {
            DistSpec::Uniform { .. } => {}
            DistSpec::ScaledBeta { alpha, beta, .. } => {
                if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return Err(Error::input("beta shape parameters must be positive"));
                }
            }
            DistSpec::TruncatedNormal { mu, sigma, .. } => {
                if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
                    return Err(Error::input(
                        "truncated normal needs finite mu and sigma > 0",
                    ));
                }
            }
        }
        Ok(())
    }

    fn sampler(&self) -> Sampler {
        match *self {
            DistSpec::Uniform { lo, hi } => Sampler::Uniform { lo, hi },
            DistSpec::ScaledBeta {
                alpha,
                beta,
                lo,
                hi,
            } => Sampler::Beta {
                ga: Gamma::new(alpha, 1.0).expect("validated shape"),
                gb: Gamma::new(beta, 1.0).expect("validated shape"),
                lo,
                hi,
            },
            DistSpec::TruncatedNormal { mu, sigma, lo, hi } => Sampler::TruncNormal {
                mu,
                sigma,
                lo,
                hi,
                pa: std_normal_cdf((lo - mu) / sigma),
                pb: std_normal_cdf((hi - mu) / sigma),
            },
        }
    }
}

/// Per-coordinate samplers for drawing one disturbance vector at a time.
pub struct DisturbanceSampler(Vec<Sampler>);

impl DisturbanceSampler {
    pub fn draw_into<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.0) {
            *o = s.draw(rng);
        }
    }
}

enum Sampler {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Beta {
        ga: Gamma<f64>,
        gb: Gamma<f64>,
        lo: f64,
        hi: f64,
    },
    TruncNormal {
        mu: f64,
        sigma: f64,
        lo: f64,
        hi: f64,
        pa: f64,
        pb: f64,
    },
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Sampler::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Sampler::Beta {
                ref ga,
                ref gb,
                lo,
                hi,
            } => {
                let x = ga.sample(rng);
                let y = gb.sample(rng);
                let t = if x + y > 0.0 { x / (x + y) } else { 0.5 };
                (lo + (hi - lo) * t).clamp(lo, hi)
            }
            Sampler::TruncNormal {
                mu,
                sigma,
                lo,
                hi,
                pa,
                pb,
            } => {
                let u: f64 = rng.random();
                let p = pa + (pb - pa) * u;
                (mu + sigma * std_normal_quantile(p)).clamp(lo, hi)
            }
        }
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn std_normal_quantile(p: f64) -> f64 {
    let p = p.clamp(1e-300, 1.0 - 1e-16);
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Independent per-coordinate disturbance distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceModel {
    pub coords: Vec<DistSpec>,
}

impl DisturbanceModel {
    pub fn new(coords: Vec<DistSpec>) -> Result<Self> {
        let m = DisturbanceModel { coords };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.coords.iter().enumerate() {
            c.validate()
                .map_err(|e| Error::input(format!("disturbance coordinate {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn support(&self) -> Region {
        let (lo, hi) = self.coords.iter().map(|c| c.support()).unzip();
        Region::Box { lo, hi }
    }

    pub fn sampler(&self) -> DisturbanceSampler {
        DisturbanceSampler(self.coords.iter().map(|c| c.sampler()).collect())
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint(self)
    }

    /// Draws chunk `c` (at most [`CHUNK`] vectors) into `out`, row-major.
    fn draw_chunk(&self, seed: u64, c: usize, count: usize, out: &mut Vec<f64>) {
        let samplers: Vec<Sampler> = self.coords.iter().map(|s| s.sampler()).collect();
        let mut rng = substream(seed, domain::DISTURBANCE, c as u64);
        out.clear();
        out.reserve(count * samplers.len());
        for _ in 0..count {
            for s in &samplers {
                out.push(s.draw(&mut rng));
            }
        }
    }
}

/// `M` disturbance vectors, reproducible from `(model, M, seed)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub m: usize,
    pub dim: usize,
    pub seed: u64,
    pub model_fingerprint: String,
    data: Vec<f64>,
}

impl SampleSet {
    pub fn sample(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks(self.dim.max(1)).take(self.m)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Builds a set from explicit vectors (tests and audits).
    pub fn from_vectors(dim: usize, samples: &[Vec<f64>]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("a sample set needs at least one sample"));
        }
        let mut data = Vec::with_capacity(samples.len() * dim);
        for s in samples {
            if s.len() != dim {
                return Err(Error::Arity {
                    expected: dim,
                    got: s.len(),
                });
            }
            data.extend_from_slice(s);
        }
        Ok(SampleSet {
            m: samples.len(),
            dim,
            seed: 0,
            model_fingerprint: String::new(),
            data,
        })
    }

    /// Keeps only the first `m` samples.
    pub fn truncated(&self, m: usize) -> SampleSet {
        let m = m.min(self.m);
        SampleSet {
            m,
            dim: self.dim,
            seed: self.seed,
            model_fingerprint: self.model_fingerprint.clone(),
            data: self.data[..m * self.dim].to_vec(),
        }
    }
}

pub fn draw_samples(model: &DisturbanceModel, m: usize, seed: u64) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::input("sample count M must be at least 1"));
    }
    model.validate()?;
    let chunks = m.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(m - c * CHUNK);
            let mut buf = Vec::new();
            model.draw_chunk(seed, c, count, &mut buf);
            buf
        })
        .collect();
    Ok(SampleSet {
        m,
        dim: model.dim(),
        seed,
        model_fingerprint: model.fingerprint(),
        data: parts.concat(),
    })
}

/// Radical-inverse Halton point `i` (1-based) in `[0,1)^dim`.
pub fn halton_point(i: usize, dim: usize) -> Vec<f64> {
    const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    assert!(dim <= PRIMES.len(), "halton dimension {dim} unsupported");
    PRIMES[..dim]
        .iter()
        .map(|&b| {
            let (mut f, mut r, mut k) = (1.0, 0.0, i as u64);
            while k > 0 {
                f /= b as f64;
                r += f * (k % b) as f64;
                k /= b;
            }
            r
        })
        .collect()
}

fn point_in_region<R: Rng>(region: &Region, rng: &mut R) -> Vec<f64> {
    match region {
        Region::Box { lo, hi } => lo
            .iter()
            .zip(hi)
            .map(|(l, h)| l + (h - l) * rng.random::<f64>())
            .collect(),
        Region::Ball { center, radius } => {
            let n = center.len();
            let g: Vec<f64> = (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    std_normal_quantile(u.max(f64::MIN_POSITIVE))
                })
                .collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let u: f64 = rng.random();
            let r = radius * u.powf(1.0 / n as f64);
            g.iter()
                .zip(center)
                .map(|(v, c)| c + r * v / norm)
                .collect()
        }
    }
}

/// Chunk `c` (of at most [`CHUNK`] points) of the uniform state stream.
pub fn sample_chunk(region: &Region, k: usize, seed: u64, dom: u64, c: u64) -> Vec<Vec<f64>> {
    let mut rng = substream(seed, dom, c);
    (0..k).map(|_| point_in_region(region, &mut rng)).collect()
}

/// Uniform states in `region` from the given stream domain.
pub fn sample_states_in(region: &Region, count: usize, seed: u64, dom: u64) -> Vec<Vec<f64>> {
    let chunks = count.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| sample_chunk(region, CHUNK.min(count - c * CHUNK), seed, dom, c as u64))
        .collect()
}

pub fn sample_states(region: &Region, count: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_states_in(region, count, seed, domain::STATES)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    Empirical,
    Exact,
}

/// `E[d^e]` for every exponent of total degree at most `max_degree`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub kind: MomentKind,
    pub dim: usize,
    pub max_degree: u32,
    values: BTreeMap<Vec<u32>, f64>,
}

impl MomentTable {
    pub fn get(&self, exp: &[u32]) -> Option<f64> {
        self.values.get(exp).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> + '_ {
        self.values.iter().map(|(e, &v)| (e, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// All exponent vectors of length `dim` with total degree at most `deg`,
/// in graded lexicographic order.
pub fn exponents_up_to(dim: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == dim {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(dim, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=deg {
        rec(dim, total, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

fn accumulate_chunk(flat: &[f64], dim: usize, exps: &[Vec<u32>], max_degree: u32) -> Vec<f64> {
    let mut sums = vec![0.0; exps.len()];
    let stride = max_degree as usize + 1;
    let mut pw = vec![1.0; dim * stride];
    for d in flat.chunks(dim.max(1)) {
        for (i, &v) in d.iter().enumerate() {
            let row = &mut pw[i * stride..(i + 1) * stride];
            for k in 1..stride {
                row[k] = row[k - 1] * v;
            }
        }
        for (s, e) in sums.iter_mut().zip(exps) {
            let mut t = 1.0;
            for (i, &k) in e.iter().enumerate() {
                t *= pw[i * stride + k as usize];
            }
            *s += t;
        }
    }
    sums
}

fn finish_moments(
    dim: usize,
    max_degree: u32,
    exps: Vec<Vec<u32>>,
    parts: Vec<Vec<f64>>,
    m: usize,
) -> MomentTable {
    let mut total = vec![0.0; exps.len()];
    for p in &parts {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let mut values = BTreeMap::new();
    for (e, s) in exps.into_iter().zip(total) {
        let v = if e.iter().all(|&k| k == 0) {
            1.0
        } else {
            s / m as f64
        };
        values.insert(e, v);
    }
    MomentTable {
        kind: MomentKind::Empirical,
        dim,
        max_degree,
        values,
    }
}

/// Sample moments of a stored sample set, summed chunk by chunk.
pub fn empirical_moments(samples: &SampleSet, max_degree: u32) -> MomentTable {
    let dim = samples.dim;
    let exps = exponents_up_to(dim, max_degree);
    let width = CHUNK * dim.max(1);
    let parts: Vec<Vec<f64>> = samples
        .as_flat()
        .par_chunks(width)
        .map(|c| accumulate_chunk(c, dim, &exps, max_degree))
        .collect();
    finish_moments(dim, max_degree, exps, parts, samples.m)
}

/// Same as drawing `M` samples and calling [`empirical_moments`], but without
/// holding the samples in memory.
pub fn streamed_empirical_moments(
    model: &DisturbanceModel,
    m: usize,
    seed: u64,
    max_degree: u32,
) -> Result<MomentTable> {
    if m == 0 {
        return Err(Error::input("sample count M must be at least 1"));
    }
    model.validate()?;
    let dim = model.dim();
    let exps = exponents_up_to(dim, max_degree);
    let chunks = m.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = Vec::new();
            model.draw_chunk(seed, c, CHUNK.min(m - c * CHUNK), &mut buf);
            accumulate_chunk(&buf, dim, &exps, max_degree)
        })
        .collect();
    Ok(finish_moments(dim, max_degree, exps, parts, m))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // Recompute the derivative at the converged node.
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        if n > 1 {
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss-Legendre on `[a, b]` with bisection until successive
/// estimates agree to `rel_tol` times the integral of `|f|`. Scaling by
/// `|f|` rather than the result keeps odd moments of symmetric densities
/// (which integrate to ~0) from recursing to full depth.
fn adaptive_integral(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(20);
    let rule = |lo: f64, hi: f64| -> f64 {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    };
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mag = nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| w * f(c + h * x).abs())
        .sum::<f64>()
        * h;
    fn rec(
        rule: &dyn Fn(f64, f64) -> f64,
        lo: f64,
        hi: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let mid = 0.5 * (lo + hi);
        let (l, r) = (rule(lo, mid), rule(mid, hi));
        if depth >= 40 || (l + r - whole).abs() <= tol {
            return l + r;
        }
        rec(rule, lo, mid, l, 0.5 * tol, depth + 1) + rec(rule, mid, hi, r, 0.5 * tol, depth + 1)
    }
    let whole = rule(a, b);
    let tol = rel_tol * mag.max(1e-300);
    rec(&rule, a, b, whole, tol, 0)
}

/// `E[d^k]` for `k = 0..=max_degree` of one coordinate.
fn coordinate_moments(spec: &DistSpec, max_degree: u32) -> Vec<f64> {
    let deg = max_degree as usize;
    match *spec {
        DistSpec::Uniform { lo, hi } => {
            let (x, w) = gauss_legendre(deg / 2 + 2);
            let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            (0..=max_degree)
                .map(|k| {
                    x.iter()
                        .zip(&w)
                        .map(|(t, wi)| 0.5 * wi * (c + h * t).powi(k as i32))
                        .sum()
                })
                .collect()
        }
        DistSpec::ScaledBeta {
            alpha,
            beta,
            lo,
            hi,
        } => {
            // The density is a polynomial of degree alpha+beta-2 for integer
            // shapes; the node count integrates it times d^k exactly.
            let surrogate = (alpha + beta - 2.0).max(0.0).ceil() as usize;
            let n = ((deg + surrogate) / 2 + 2).max(64);
            let (x, w) = gauss_legendre(n);
            let ln_b = statrs::function::beta::ln_beta(alpha, beta);
            let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let mut m = vec![0.0; deg + 1];
            for (t, wi) in x.iter().zip(&w) {
                let u = 0.5 * (1.0 + t);
                if u <= 0.0 || u >= 1.0 {
                    continue;
                }
                let ln_pdf = (alpha - 1.0) * u.ln() + (beta - 1.0) * (1.0 - u).ln() - ln_b;
                let weight = 0.5 * wi * ln_pdf.exp();
                let d = c + h * t;
                let mut p = weight;
                for mk in m.iter_mut() {
                    *mk += p;
                    p *= d;
                }
            }
            m
        }
        DistSpec::TruncatedNormal { mu, sigma, lo, hi } => {
            let z = std_normal_cdf((hi - mu) / sigma) - std_normal_cdf((lo - mu) / sigma);
            let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt() * z);
            let pdf = move |d: f64| norm * (-0.5 * ((d - mu) / sigma).powi(2)).exp();
            (0..=max_degree)
                .map(|k| {
                    if k == 0 {
                        1.0
                    } else {
                        adaptive_integral(&|d| pdf(d) * d.powi(k as i32), lo, hi, 1e-12)
                    }
                })
                .collect()
        }
    }
}

/// Population moments of the model, by quadrature and independence.
pub fn exact_moments(model: &DisturbanceModel, max_degree: u32) -> Result<MomentTable> {
    model.validate()?;
    let per: Vec<Vec<f64>> = model
        .coords
        .iter()
        .map(|c| coordinate_moments(c, max_degree))
        .collect();
    let mut values = BTreeMap::new();
    for e in exponents_up_to(model.dim(), max_degree) {
        let v = if e.iter().all(|&k| k == 0) {
            1.0
        } else {
            e.iter()
                .enumerate()
                .map(|(i, &k)| per[i][k as usize])
                .product()
        };
        values.insert(e, v);
    }
    Ok(MomentTable {
        kind: MomentKind::Exact,
        dim: model.dim(),
        max_degree,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(lo: f64, hi: f64) -> DisturbanceModel {
        DisturbanceModel::new(vec![DistSpec::Uniform { lo, hi }]).unwrap()
    }

    #[test]
    fn uniform_sample_mean() {
        let s = draw_samples(&uniform(-1.5, 1.5), 10_000, 11).unwrap();
        let mean: f64 = s.iter().map(|d| d[0]).sum::<f64>() / s.m as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn samples_stay_in_support() {
        let beta = DisturbanceModel::new(vec![DistSpec::ScaledBeta {
            alpha: 20.0,
            beta: 20.0,
            lo: -0.6,
            hi: 0.6,
        }])
        .unwrap();
        let s = draw_samples(&beta, 50_000, 3).unwrap();
        assert!(s.iter().all(|d| (-0.6..=0.6).contains(&d[0])));
        let mean: f64 = s.iter().map(|d| d[0]).sum::<f64>() / s.m as f64;
        assert!(mean.abs() < 0.005);
        let tn = DisturbanceModel::new(vec![DistSpec::TruncatedNormal {
            mu: 0.0,
            sigma: 0.15,
            lo: -1.0,
            hi: 1.0,
        }])
        .unwrap();
        let s = draw_samples(&tn, 50_000, 3).unwrap();
        assert!(s.iter().all(|d| (-1.0..=1.0).contains(&d[0])));
    }

    #[test]
    fn seed_determinism_across_chunk_boundaries() {
        let m = uniform(0.0, 1.0);
        let a = draw_samples(&m, CHUNK + 17, 5).unwrap();
        let b = draw_samples(&m, CHUNK + 17, 5).unwrap();
        assert_eq!(a, b);
        let short = draw_samples(&m, 100, 5).unwrap();
        assert_eq!(short.as_flat(), &a.as_flat()[..100]);
    }

    #[test]
    fn box_and_ball_state_statistics() {
        let bx = Region::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        };
        let pts = sample_states(&bx, 100_000, 1);
        for axis in 0..2 {
            let m: f64 = pts.iter().map(|p| p[axis]).sum::<f64>() / pts.len() as f64;
            assert!((m - 0.5).abs() < 0.01);
        }
        let ball = Region::unit_ball(2);
        let pts = sample_states(&ball, 100_000, 1);
        let r2: f64 = pts.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / pts.len() as f64;
        // E|x|^2 = n / (n + 2) on the unit ball
        assert!((r2 - 0.5).abs() < 0.01);
        let one = sample_states(&ball, 1, 9);
        assert!(one[0][0].hypot(one[0][1]) <= 1.0);
    }

    #[test]
    fn degenerate_and_symmetric_sample_moments() {
        let zero = SampleSet::from_vectors(2, &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let t = empirical_moments(&zero, 3);
        for (e, v) in t.iter() {
            if e.iter().any(|&k| k > 0) {
                assert_eq!(v, 0.0);
            } else {
                assert_eq!(v, 1.0);
            }
        }
        let pm = SampleSet::from_vectors(1, &[vec![-1.0], vec![1.0]]).unwrap();
        let t = empirical_moments(&pm, 2);
        assert_eq!(t.get(&[1]), Some(0.0));
        assert_eq!(t.get(&[2]), Some(1.0));
    }

    #[test]
    fn uniform_second_moment_converges() {
        let t = streamed_empirical_moments(&uniform(-1.0, 1.0), 1_000_000, 2, 2).unwrap();
        assert!((t.get(&[2]).unwrap() - 1.0 / 3.0).abs() < 0.005);
    }

    #[test]
    fn streamed_matches_stored() {
        let m = uniform(-0.5, 0.7);
        let s = draw_samples(&m, 3 * CHUNK / 2, 8).unwrap();
        assert_eq!(
            empirical_moments(&s, 4),
            streamed_empirical_moments(&m, s.m, 8, 4).unwrap()
        );
    }

    #[test]
    fn exact_moments_closed_forms() {
        let t = exact_moments(&uniform(-1.0, 1.0), 4).unwrap();
        assert!((t.get(&[2]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((t.get(&[4]).unwrap() - 0.2).abs() < 1e-12);
        let beta = DisturbanceModel::new(vec![DistSpec::ScaledBeta {
            alpha: 20.0,
            beta: 20.0,
            lo: -0.6,
            hi: 0.6,
        }])
        .unwrap();
        let t = exact_moments(&beta, 4).unwrap();
        assert!(t.get(&[1]).unwrap().abs() < 1e-14);
        // Var of Beta(a,a) is 1/(4(2a+1)); scaled by 1.2^2.
        let var = 1.44 / (4.0 * 41.0);
        assert!((t.get(&[2]).unwrap() - var).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(300);
        let s: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(500)).sum();
        assert!((s - 2.0 / 501.0).abs() < 1e-13);
    }

    #[test]
    fn exponent_enumeration_counts() {
        assert_eq!(exponents_up_to(2, 4).len(), 15);
        assert_eq!(exponents_up_to(3, 2).len(), 10);
        assert_eq!(exponents_up_to(1, 0), vec![vec![0]]);
    }
}
