//! Seeded, splittable random streams and the sampling primitives used by the
//! experiments.
//!
//! [`RngStream`] is a Philox4x32-10 counter-based generator. Its 128-bit
//! counter is laid out as `[block_lo, block_hi, replication, substream]`
//! under a 64-bit key taken from the base seed, so every
//! `(seed, replication, substream)` triple owns a disjoint counter domain.
//! Streams never share state and can be replayed from any point.

use rand::seq::index;
use rand::{Rng, RngCore};
use rand_core::impls;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DenseMatrix};
use crate::param::SparseParam;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Ten-round Philox4x32 block function.
pub fn philox4x32_10(mut ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

/// Substream tags used by the experiment drivers.
pub mod tags {
    pub const PARAMS: u32 = 1;
    pub const COVARIATES: u32 = 2;
    pub const NOISE: u32 = 3;
    pub const POLICY: u32 = 4;
    pub const FIXTURE: u32 = 5;
}

/// Counter-based random stream keyed by `(seed, replication, substream)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: [u32; 2],
    replication: u32,
    substream: u32,
    block: u64,
    buf: [u32; 4],
    used: usize,
}

/// Stream for replication `replication_index` under `base_seed`.
pub fn make_stream(base_seed: u64, replication_index: u32) -> RngStream {
    RngStream::new(base_seed, replication_index, 0)
}

impl RngStream {
    pub fn new(seed: u64, replication: u32, substream: u32) -> Self {
        Self {
            key: [seed as u32, (seed >> 32) as u32],
            replication,
            substream,
            block: 0,
            buf: [0; 4],
            used: 4,
        }
    }

    /// Fresh stream over the same seed and replication with another
    /// substream tag. Consuming it never perturbs `self`.
    pub fn split(&self, substream: u32) -> RngStream {
        let seed = u64::from(self.key[0]) | (u64::from(self.key[1]) << 32);
        RngStream::new(seed, self.replication, substream)
    }

    pub fn stream_id(&self) -> (u32, u32) {
        (self.replication, self.substream)
    }

    fn refill(&mut self) {
        let ctr = [
            self.block as u32,
            (self.block >> 32) as u32,
            self.replication,
            self.substream,
        ];
        self.buf = philox4x32_10(ctr, self.key);
        self.block = self.block.wrapping_add(1);
        self.used = 0;
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        if self.used == 4 {
            self.refill();
        }
        let v = self.buf[self.used];
        self.used += 1;
        v
    }

    fn next_u64(&mut self) -> u64 {
        let lo = u64::from(self.next_u32());
        let hi = u64::from(self.next_u32());
        (hi << 32) | lo
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// `n` i.i.d. standard normal draws.
pub fn sample_standard_normal(s: &mut RngStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| s.standard_normal()).collect()
}

/// Covariate distribution family.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovariateKind {
    #[default]
    GaussianIdentity,
    /// `Sigma_ij = r^|i-j|`.
    GaussianCirculant { r: f64 },
    /// Block-diagonal `Sigma` with equicorrelated blocks.
    GaussianBlock {
        block_size: usize,
        #[serde(default = "default_block_rho")]
        rho: f64,
    },
    /// Standard normal entries clamped into `[-bound, bound]`.
    ClippedGaussian { bound: f64 },
}

fn default_block_rho() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateModel {
    #[serde(flatten)]
    pub kind: CovariateKind,
    pub d: usize,
}

impl CovariateModel {
    pub fn identity(d: usize) -> Self {
        Self {
            kind: CovariateKind::GaussianIdentity,
            d,
        }
    }

    pub fn clipped(d: usize, bound: f64) -> Self {
        Self {
            kind: CovariateKind::ClippedGaussian { bound },
            d,
        }
    }

    pub fn circulant(d: usize, r: f64) -> Self {
        Self {
            kind: CovariateKind::GaussianCirculant { r },
            d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::config("cov.d", "dimension must be at least 2"));
        }
        match self.kind {
            CovariateKind::GaussianIdentity => Ok(()),
            CovariateKind::GaussianCirculant { r } if r > 0.0 && r < 1.0 => Ok(()),
            CovariateKind::GaussianCirculant { .. } => {
                Err(Error::config("cov.r", "circulant r must lie in (0, 1)"))
            }
            CovariateKind::GaussianBlock { block_size, rho }
                if block_size >= 1 && rho > -1.0 / block_size as f64 && rho < 1.0 =>
            {
                Ok(())
            }
            CovariateKind::GaussianBlock { .. } => Err(Error::config(
                "cov.block_size",
                "block size must be >= 1 with a positive-definite equicorrelation",
            )),
            CovariateKind::ClippedGaussian { bound } if bound > 0.0 => Ok(()),
            CovariateKind::ClippedGaussian { .. } => {
                Err(Error::config("cov.bound", "clip bound must be positive"))
            }
        }
    }

    /// Population covariance of the unclipped Gaussian.
    pub fn gaussian_covariance(&self) -> DenseMatrix {
        let d = self.d;
        match self.kind {
            CovariateKind::GaussianIdentity | CovariateKind::ClippedGaussian { .. } => {
                DenseMatrix::identity(d)
            }
            CovariateKind::GaussianCirculant { r } => {
                DenseMatrix::from_fn(d, d, |i, j| r.powi(i.abs_diff(j) as i32))
            }
            CovariateKind::GaussianBlock { block_size, rho } => {
                DenseMatrix::from_fn(d, d, |i, j| {
                    if i == j {
                        1.0
                    } else if i / block_size == j / block_size {
                        rho
                    } else {
                        0.0
                    }
                })
            }
        }
    }
}

/// Covariate sampler with the colouring factor cached per model.
#[derive(Debug, Clone)]
pub struct CovariateSampler {
    model: CovariateModel,
    factor: Factor,
    scratch: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Factor {
    None,
    Dense(Cholesky),
    Block { size: usize, blocks: Vec<Cholesky> },
}

impl CovariateSampler {
    pub fn new(model: &CovariateModel) -> Result<Self> {
        model.validate()?;
        let factor = match model.kind {
            CovariateKind::GaussianIdentity | CovariateKind::ClippedGaussian { .. } => Factor::None,
            CovariateKind::GaussianCirculant { .. } => {
                Factor::Dense(Cholesky::factor(&model.gaussian_covariance())?)
            }
            CovariateKind::GaussianBlock { block_size, rho } => {
                let mut blocks = Vec::new();
                let mut start = 0;
                while start < model.d {
                    let len = block_size.min(model.d - start);
                    let b = DenseMatrix::from_fn(len, len, |i, j| if i == j { 1.0 } else { rho });
                    blocks.push(Cholesky::factor(&b)?);
                    start += len;
                }
                Factor::Block {
                    size: block_size,
                    blocks,
                }
            }
        };
        Ok(Self {
            model: model.clone(),
            factor,
            scratch: vec![0.0; model.d],
        })
    }

    pub fn dim(&self) -> usize {
        self.model.d
    }

    pub fn model(&self) -> &CovariateModel {
        &self.model
    }

    /// Writes one covariate vector into `out`.
    pub fn sample_into(&mut self, s: &mut RngStream, out: &mut [f64]) {
        let d = self.model.d;
        assert_eq!(out.len(), d, "covariate buffer length");
        match (&self.model.kind, &self.factor) {
            (CovariateKind::ClippedGaussian { bound }, _) => {
                for v in out.iter_mut() {
                    *v = s.standard_normal().clamp(-bound, *bound);
                }
            }
            (_, Factor::None) => {
                for v in out.iter_mut() {
                    *v = s.standard_normal();
                }
            }
            (_, Factor::Dense(ch)) => {
                for z in self.scratch.iter_mut() {
                    *z = s.standard_normal();
                }
                ch.mul_lower(&self.scratch, out);
            }
            (_, Factor::Block { size, blocks }) => {
                for z in self.scratch.iter_mut() {
                    *z = s.standard_normal();
                }
                for (b, ch) in blocks.iter().enumerate() {
                    let start = b * size;
                    let end = start + ch.lower().rows();
                    ch.mul_lower(&self.scratch[start..end], &mut out[start..end]);
                }
            }
        }
    }

    pub fn sample(&mut self, s: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.model.d];
        self.sample_into(s, &mut out);
        out
    }
}

/// One covariate draw. Builds the colouring factor on every call; use
/// [`CovariateSampler`] in loops.
pub fn sample_covariate(s: &mut RngStream, model: &CovariateModel) -> Result<Vec<f64>> {
    Ok(CovariateSampler::new(model)?.sample(s))
}

/// Uniformly random `s0`-subset support with i.i.d. `Uniform[lo, hi]` values.
pub fn sample_sparse_uniform_param(
    s: &mut RngStream,
    d: usize,
    s0: usize,
    lo: f64,
    hi: f64,
) -> Result<SparseParam> {
    if s0 == 0 || s0 > d {
        return Err(Error::InvalidArgument(format!(
            "sparsity {s0} must lie in 1..={d}"
        )));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "empty value range [{lo}, {hi}]"
        )));
    }
    let mut support = index::sample(s, d, s0).into_vec();
    support.sort_unstable();
    let entries = support
        .into_iter()
        .map(|j| (j, lo + (hi - lo) * s.uniform()))
        .collect();
    Ok(SparseParam::new(d, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32_10([0; 4], [0; 2]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = make_stream(42, 0);
        let mut b = make_stream(42, 0);
        for _ in 0..1_000_000 {
            assert_eq!(a.next_u32(), b.next_u32());
        }
    }

    #[test]
    fn stream_independent_of_consumption_order() {
        let mut lone = make_stream(42, 7);
        let first: Vec<u64> = (0..100).map(|_| lone.next_u64()).collect();
        let mut other = make_stream(42, 3);
        for _ in 0..12_345 {
            other.next_u32();
        }
        let mut again = make_stream(42, 7);
        let second: Vec<u64> = (0..100).map(|_| again.next_u64()).collect();
        assert_eq!(first, second);
    }

    #[test]
    fn split_streams_differ_from_parent() {
        let base = make_stream(9, 2);
        let mut a = base.split(tags::NOISE);
        let mut b = base.split(tags::COVARIATES);
        let mut c = base.clone();
        let va: Vec<u32> = (0..8).map(|_| a.next_u32()).collect();
        let vb: Vec<u32> = (0..8).map(|_| b.next_u32()).collect();
        let vc: Vec<u32> = (0..8).map(|_| c.next_u32()).collect();
        assert_ne!(va, vb);
        assert_ne!(va, vc);
        assert_eq!(a.stream_id(), (2, tags::NOISE));
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut s = make_stream(1, 0);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn clipped_entries_bounded() {
        let model = CovariateModel::clipped(50, 1.0);
        let mut sampler = CovariateSampler::new(&model).unwrap();
        let mut s = make_stream(5, 0);
        for _ in 0..2_000 {
            assert!(sampler
                .sample(&mut s)
                .iter()
                .all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn model_validation() {
        assert!(CovariateModel::circulant(4, 1.0).validate().is_err());
        assert!(CovariateModel::clipped(4, 0.0).validate().is_err());
        assert!(CovariateModel::identity(1).validate().is_err());
        assert!(CovariateModel::circulant(4, 0.3).validate().is_ok());
    }

    #[test]
    fn sparse_param_exact_support() {
        let mut s = make_stream(3, 0);
        let full = sample_sparse_uniform_param(&mut s, 10, 10, 0.0, 1.0).unwrap();
        assert_eq!(full.support(), &(0..10).collect::<Vec<_>>()[..]);
        assert!(full.values().iter().all(|v| (0.0..=1.0).contains(v)));
        for _ in 0..200 {
            let p = sample_sparse_uniform_param(&mut s, 100, 5, 0.0, 1.0).unwrap();
            assert_eq!(p.l0(), 5);
            assert_eq!(p.support().len(), 5);
        }
        assert!(sample_sparse_uniform_param(&mut s, 4, 5, 0.0, 1.0).is_err());
        assert!(sample_sparse_uniform_param(&mut s, 4, 0, 0.0, 1.0).is_err());
        assert!(sample_sparse_uniform_param(&mut s, 4, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn serde_shape_of_models() {
        let m = CovariateModel::clipped(10, 1.0);
        let js = serde_json::to_string(&m).unwrap();
        assert_eq!(js, r#"{"kind":"clipped_gaussian","bound":1.0,"d":10}"#);
        let back: CovariateModel = serde_json::from_str(&js).unwrap();
        assert_eq!(back, m);
    }
}
