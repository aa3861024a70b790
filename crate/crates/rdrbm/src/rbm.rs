//! Restricted Boltzmann machine: parameters, energies, gradients, block
//! Gibbs sampling, and exact enumeration oracles for small systems.
//!
//! The joint energy of visible bits x and hidden bits h is
//! E(x, h) = -b.x - c.h - x^T W h, and the visible free energy obtained by
//! summing h out analytically is F(x) = -b.x - sum_m softplus(c_m + (W^T x)_m).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Exact enumeration over visible states is refused above this width.
pub const MAX_ENUM_BITS: usize = 20;

const PARAMS_MAGIC: &[u8; 8] = b"RBMPARM1";
const PARAMS_VERSION: u32 = 1;

/// Numerically stable ln(1 + exp(a)).
///
/// For a > 30 the linear term dominates to beyond f64 resolution; for
/// a < -30 the exponential itself is the answer to the same accuracy.
pub fn softplus(a: f64) -> f64 {
    if a > 30.0 {
        a
    } else if a < -30.0 {
        a.exp()
    } else {
        a.exp().ln_1p()
    }
}

/// Logistic function computed without overflow on either tail.
pub fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// ln sum_i exp(v_i) with the max factored out. Empty input yields -inf.
pub fn logsumexp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() && m < 0.0 {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    m + s.ln()
}

/// A configuration of binary units, each bit stored as 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitConfig {
    bits: Vec<u8>,
}

impl BitConfig {
    /// Wraps a raw bit vector, rejecting any entry outside {0, 1}.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::invalid(format!(
                "bit {} has value {}, expected 0 or 1",
                pos, bits[pos]
            )));
        }
        Ok(BitConfig { bits })
    }

    pub fn zeros(n: usize) -> Self {
        BitConfig { bits: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        BitConfig { bits: vec![1; n] }
    }

    /// The i-th of the 2^n configurations, bit k = bit k of the index.
    pub fn from_index(index: usize, n: usize) -> Self {
        let bits = (0..n).map(|k| ((index >> k) & 1) as u8).collect();
        BitConfig { bits }
    }

    /// Inverse of `from_index`; requires len <= MAX_ENUM_BITS to fit usize.
    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .map(|(k, &b)| (b as usize) << k)
            .sum()
    }

    /// Each bit drawn independently as Bernoulli(1/2), in index order.
    pub fn random(n: usize, rng: &mut Stream) -> Self {
        let bits = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        BitConfig { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: u8) {
        debug_assert!(value <= 1);
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
    }

    /// Spin value 2x - 1 of bit i.
    pub fn spin(&self, i: usize) -> f64 {
        2.0 * self.bits[i] as f64 - 1.0
    }

    /// Number of positions at which two equal-length configurations differ.
    pub fn hamming(&self, other: &BitConfig) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::dim(format!(
                "hamming distance between lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }
}

/// Iterates all 2^n configurations of n bits in index order.
pub fn enumerate_bits(n: usize) -> Result<impl Iterator<Item = BitConfig>> {
    if n > MAX_ENUM_BITS {
        return Err(Error::Intractable(format!(
            "enumeration over {} bits exceeds the {}-bit guard",
            n, MAX_ENUM_BITS
        )));
    }
    Ok((0..1usize << n).map(move |i| BitConfig::from_index(i, n)))
}

/// Gradient of the visible free energy with respect to (w, b, c).
#[derive(Clone, Debug)]
pub struct FreeEnergyGrad {
    pub dw: Array2<f64>,
    pub db: Array1<f64>,
    pub dc: Array1<f64>,
}

impl FreeEnergyGrad {
    pub fn zeros(nx: usize, nh: usize) -> Self {
        FreeEnergyGrad {
            dw: Array2::zeros((nx, nh)),
            db: Array1::zeros(nx),
            dc: Array1::zeros(nh),
        }
    }

    pub fn scaled_add(&mut self, scale: f64, other: &FreeEnergyGrad) {
        self.dw.scaled_add(scale, &other.dw);
        self.db.scaled_add(scale, &other.db);
        self.dc.scaled_add(scale, &other.dc);
    }

    pub fn scale(&mut self, factor: f64) {
        self.dw.mapv_inplace(|v| v * factor);
        self.db.mapv_inplace(|v| v * factor);
        self.dc.mapv_inplace(|v| v * factor);
    }

    /// Largest absolute entry across all three blocks.
    pub fn max_abs(&self) -> f64 {
        let m = |it: &mut dyn Iterator<Item = &f64>| {
            it.fold(0.0f64, |acc, v| acc.max(v.abs()))
        };
        m(&mut self.dw.iter())
            .max(m(&mut self.db.iter()))
            .max(m(&mut self.dc.iter()))
    }
}

/// RBM parameters. `w` is visible-major: w[[i, m]] couples visible i to
/// hidden m.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmParams {
    w: Array2<f64>,
    b: Array1<f64>,
    c: Array1<f64>,
}

impl RbmParams {
    pub fn zeros(nx: usize, nh: usize) -> Self {
        RbmParams {
            w: Array2::zeros((nx, nh)),
            b: Array1::zeros(nx),
            c: Array1::zeros(nh),
        }
    }

    /// Standard initialization: weights from N(0, weight_sd^2), biases zero.
    pub fn random_init(nx: usize, nh: usize, weight_sd: f64, rng: &mut Stream) -> Result<Self> {
        let normal = Normal::new(0.0, weight_sd)
            .map_err(|e| Error::invalid(format!("weight init sd {}: {}", weight_sd, e)))?;
        let w = Array2::from_shape_fn((nx, nh), |_| normal.sample(rng));
        Ok(RbmParams {
            w,
            b: Array1::zeros(nx),
            c: Array1::zeros(nh),
        })
    }

    pub fn from_parts(w: Array2<f64>, b: Array1<f64>, c: Array1<f64>) -> Result<Self> {
        if w.nrows() != b.len() || w.ncols() != c.len() {
            return Err(Error::dim(format!(
                "weight matrix {}x{} against biases of lengths {} and {}",
                w.nrows(),
                w.ncols(),
                b.len(),
                c.len()
            )));
        }
        Ok(RbmParams { w, b, c })
    }

    pub fn nx(&self) -> usize {
        self.b.len()
    }

    pub fn nh(&self) -> usize {
        self.c.len()
    }

    pub fn w(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn b(&self) -> &Array1<f64> {
        &self.b
    }

    pub fn c(&self) -> &Array1<f64> {
        &self.c
    }

    /// Applies one Adam-style additive update to every parameter block.
    pub fn apply_update(&mut self, dw: &Array2<f64>, db: &Array1<f64>, dc: &Array1<f64>) {
        self.w += dw;
        self.b += db;
        self.c += dc;
    }

    fn check_visible(&self, x: &BitConfig) -> Result<()> {
        if x.len() != self.nx() {
            return Err(Error::dim(format!(
                "visible configuration of length {} for an RBM with {} visible units",
                x.len(),
                self.nx()
            )));
        }
        Ok(())
    }

    fn check_hidden(&self, h: &BitConfig) -> Result<()> {
        if h.len() != self.nh() {
            return Err(Error::dim(format!(
                "hidden configuration of length {} for an RBM with {} hidden units",
                h.len(),
                self.nh()
            )));
        }
        Ok(())
    }

    /// Hidden pre-activations a_m = c_m + sum_i x_i w_im.
    pub fn hidden_activation(&self, x: &BitConfig) -> Result<Array1<f64>> {
        self.check_visible(x)?;
        let mut a = self.c.clone();
        for i in 0..self.nx() {
            if x.bit(i) == 1 {
                a += &self.w.row(i);
            }
        }
        Ok(a)
    }

    /// Visible pre-activations g_i = b_i + sum_m w_im h_m.
    pub fn visible_activation(&self, h: &BitConfig) -> Result<Array1<f64>> {
        self.check_hidden(h)?;
        let mut g = self.b.clone();
        for m in 0..self.nh() {
            if h.bit(m) == 1 {
                g += &self.w.column(m);
            }
        }
        Ok(g)
    }

    /// Joint energy E(x, h) = -b.x - c.h - x^T W h.
    pub fn joint_energy(&self, x: &BitConfig, h: &BitConfig) -> Result<f64> {
        self.check_visible(x)?;
        self.check_hidden(h)?;
        let mut e = 0.0;
        for i in 0..self.nx() {
            if x.bit(i) == 1 {
                e -= self.b[i];
                for m in 0..self.nh() {
                    if h.bit(m) == 1 {
                        e -= self.w[[i, m]];
                    }
                }
            }
        }
        for m in 0..self.nh() {
            if h.bit(m) == 1 {
                e -= self.c[m];
            }
        }
        Ok(e)
    }

    /// Visible free energy F(x) = -b.x - sum_m softplus(a_m).
    pub fn free_energy(&self, x: &BitConfig) -> Result<f64> {
        let a = self.hidden_activation(x)?;
        let mut f = 0.0;
        for i in 0..self.nx() {
            if x.bit(i) == 1 {
                f -= self.b[i];
            }
        }
        f -= a.iter().map(|&v| softplus(v)).sum::<f64>();
        Ok(f)
    }

    /// Adds scale * dF(x)/d(theta) into `acc`.
    ///
    /// dF/db_i = -x_i, dF/dc_m = -sigmoid(a_m), dF/dw_im = -x_i sigmoid(a_m).
    pub fn free_energy_grad_into(
        &self,
        x: &BitConfig,
        scale: f64,
        acc: &mut FreeEnergyGrad,
    ) -> Result<()> {
        let a = self.hidden_activation(x)?;
        let probs = a.mapv(sigmoid);
        for i in 0..self.nx() {
            if x.bit(i) == 1 {
                acc.db[i] -= scale;
                let mut row = acc.dw.row_mut(i);
                row.scaled_add(-scale, &probs);
            }
        }
        acc.dc.scaled_add(-scale, &probs);
        Ok(())
    }

    /// Gradient of the free energy at a single configuration.
    pub fn free_energy_grad(&self, x: &BitConfig) -> Result<FreeEnergyGrad> {
        let mut acc = FreeEnergyGrad::zeros(self.nx(), self.nh());
        self.free_energy_grad_into(x, 1.0, &mut acc)?;
        Ok(acc)
    }

    /// Free energy and its gradient from a single activation pass.
    pub fn free_energy_and_grad(&self, x: &BitConfig) -> Result<(f64, FreeEnergyGrad)> {
        let a = self.hidden_activation(x)?;
        let mut f = 0.0;
        for i in 0..self.nx() {
            if x.bit(i) == 1 {
                f -= self.b[i];
            }
        }
        f -= a.iter().map(|&v| softplus(v)).sum::<f64>();

        let probs = a.mapv(sigmoid);
        let mut grad = FreeEnergyGrad::zeros(self.nx(), self.nh());
        for i in 0..self.nx() {
            if x.bit(i) == 1 {
                grad.db[i] = -1.0;
                let mut row = grad.dw.row_mut(i);
                row.scaled_add(-1.0, &probs);
            }
        }
        grad.dc.scaled_add(-1.0, &probs);
        Ok((f, grad))
    }

    /// Draws h ~ p(h | x); unit m is drawn in index order with one uniform
    /// variate each, p(h_m = 1) = sigmoid(a_m).
    pub fn sample_hidden(&self, x: &BitConfig, rng: &mut Stream) -> Result<BitConfig> {
        let a = self.hidden_activation(x)?;
        let bits = a
            .iter()
            .map(|&v| u8::from(rng.random::<f64>() < sigmoid(v)))
            .collect();
        Ok(BitConfig { bits })
    }

    /// Draws x ~ p(x | h); mirror image of `sample_hidden`.
    pub fn sample_visible(&self, h: &BitConfig, rng: &mut Stream) -> Result<BitConfig> {
        let g = self.visible_activation(h)?;
        let bits = g
            .iter()
            .map(|&v| u8::from(rng.random::<f64>() < sigmoid(v)))
            .collect();
        Ok(BitConfig { bits })
    }

    /// One block Gibbs step in place: h ~ p(h | x), then x ~ p(x | h).
    pub fn block_gibbs_step(&self, x: &mut BitConfig, rng: &mut Stream) -> Result<()> {
        let h = self.sample_hidden(x, rng)?;
        *x = self.sample_visible(&h, rng)?;
        Ok(())
    }

    /// Runs `steps` block Gibbs steps in place.
    pub fn block_gibbs_steps(&self, x: &mut BitConfig, steps: usize, rng: &mut Stream) -> Result<()> {
        for _ in 0..steps {
            self.block_gibbs_step(x, rng)?;
        }
        Ok(())
    }

    /// ln Z = ln sum_x exp(-F(x)), by enumeration of the visible states.
    pub fn exact_log_partition(&self) -> Result<f64> {
        let mut vals = Vec::with_capacity(1usize << self.nx().min(MAX_ENUM_BITS));
        for x in enumerate_bits(self.nx())? {
            vals.push(-self.free_energy(&x)?);
        }
        Ok(logsumexp(&vals))
    }

    /// Exact marginal probabilities over all 2^nx visible states, in
    /// `BitConfig::from_index` order.
    pub fn exact_visible_distribution(&self) -> Result<Vec<f64>> {
        let ln_z = self.exact_log_partition()?;
        let mut probs = Vec::with_capacity(1usize << self.nx());
        for x in enumerate_bits(self.nx())? {
            probs.push((-self.free_energy(&x)? - ln_z).exp());
        }
        Ok(probs)
    }

    /// Writes the parameters in the documented binary format.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        w.write_all(PARAMS_MAGIC)?;
        w.write_all(&PARAMS_VERSION.to_le_bytes())?;
        w.write_all(&(self.nx() as u64).to_le_bytes())?;
        w.write_all(&(self.nh() as u64).to_le_bytes())?;
        for i in 0..self.nx() {
            for m in 0..self.nh() {
                w.write_all(&self.w[[i, m]].to_le_bytes())?;
            }
        }
        for v in self.b.iter().chain(self.c.iter()) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads parameters written by `save`, validating magic, version, and
    /// exact payload length.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Format("file too short for parameter header".into()))?;
        if &magic != PARAMS_MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                magic, PARAMS_MAGIC
            )));
        }
        let version = read_u32(&mut r)?;
        if version != PARAMS_VERSION {
            return Err(Error::Format(format!(
                "unsupported parameter format version {}",
                version
            )));
        }
        let nx = read_u64(&mut r)? as usize;
        let nh = read_u64(&mut r)? as usize;
        let mut w = Array2::zeros((nx, nh));
        for i in 0..nx {
            for m in 0..nh {
                w[[i, m]] = read_f64(&mut r)?;
            }
        }
        let b = Array1::from_iter((0..nx).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?);
        let c = Array1::from_iter((0..nh).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?);
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after parameter payload".into()));
        }
        Ok(RbmParams { w, b, c })
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format("truncated file: expected u32".into()))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format("truncated file: expected u64".into()))?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format("truncated file: expected f64".into()))?;
    Ok(f64::from_le_bytes(buf))
}
