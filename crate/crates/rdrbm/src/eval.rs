//! Evaluation suite: the energy-residual score R(theta), exact 1D
//! Wasserstein distance between empirical energy distributions, PCA
//! projections, Hamming-distance histograms, and exact divergences between
//! enumerable distributions.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array1;
use rand::seq::index::sample as index_sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rbm::{enumerate_bits, logsumexp, BitConfig, RbmParams};
use crate::rng::Stream;
use crate::target::TargetModel;

/// Mean squared mismatch between free-energy differences and effective
/// target-energy differences over all ordered sample pairs:
/// R = (1/n^2) sum_{u,v} (dF_uv - dE_uv)^2. Equal to twice the population
/// variance of the residual r(y) = F(y) - E_eff(y), which is how it is
/// computed here.
pub fn r_theta(params: &RbmParams, model: &TargetModel, samples: &[BitConfig]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("R(theta) needs at least one sample"));
    }
    if params.nx() != model.nx() {
        return Err(Error::dim(format!(
            "RBM has {} visible units but target has {} bits",
            params.nx(),
            model.nx()
        )));
    }
    let mut residuals = Vec::with_capacity(samples.len());
    for x in samples {
        residuals.push(params.free_energy(x)? - model.effective_energy(x)?);
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    Ok(2.0 * var)
}

/// A sorted empirical distribution of scalar energies.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalEnergyDist {
    values: Vec<f64>,
}

impl EmpiricalEnergyDist {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empirical distribution needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("empirical distribution values must be finite"));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalEnergyDist { values })
    }

    /// Effective (beta-scaled) target energies of a sample set.
    pub fn from_samples(model: &TargetModel, samples: &[BitConfig]) -> Result<Self> {
        let values = samples
            .iter()
            .map(|x| model.effective_energy(x))
            .collect::<Result<Vec<_>>>()?;
        EmpiricalEnergyDist::from_values(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Exact 1-Wasserstein distance between two empirical distributions,
/// computed as the integral of |F_a - F_b| over the merged support.
pub fn wasserstein_1d(a: &EmpiricalEnergyDist, b: &EmpiricalEnergyDist) -> f64 {
    let (xs, ys) = (&a.values, &b.values);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut prev = f64::NAN;
    let mut total = 0.0;
    while i < xs.len() || j < ys.len() {
        let z = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        if !prev.is_nan() && z > prev {
            let fa = i as f64 / n;
            let fb = j as f64 / m;
            total += (fa - fb).abs() * (z - prev);
        }
        while i < xs.len() && xs[i] == z {
            i += 1;
        }
        while j < ys.len() && ys[j] == z {
            j += 1;
        }
        prev = z;
    }
    total
}

/// Two-component PCA fitted to bit configurations.
#[derive(Clone, Debug)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// Row k is the k-th principal axis; rows are orthonormal.
    pub components: [Array1<f64>; 2],
    pub eigenvalues: [f64; 2],
    /// Trace of the sample covariance matrix.
    pub total_variance: f64,
}

/// Fits a two-component PCA on the sample covariance (denominator n - 1) of
/// the given configurations. Sign convention: in each component the entry
/// of largest magnitude is positive. Fails when the data spans fewer than
/// two directions of nonzero variance.
pub fn pca_fit(samples: &[BitConfig]) -> Result<PcaModel> {
    if samples.len() < 2 {
        return Err(Error::Degenerate(format!(
            "PCA needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let d = samples[0].len();
    if d < 2 {
        return Err(Error::Degenerate("PCA needs at least 2 dimensions".into()));
    }
    for (k, s) in samples.iter().enumerate() {
        if s.len() != d {
            return Err(Error::dim(format!(
                "sample {} has width {}, expected {}",
                k,
                s.len(),
                d
            )));
        }
    }
    let n = samples.len() as f64;
    let mut mean = Array1::<f64>::zeros(d);
    for s in samples {
        for i in 0..d {
            mean[i] += s.bit(i) as f64;
        }
    }
    mean.mapv_inplace(|v| v / n);

    let mut cov = DMatrix::<f64>::zeros(d, d);
    for s in samples {
        let centered: Vec<f64> = (0..d).map(|i| s.bit(i) as f64 - mean[i]).collect();
        for i in 0..d {
            if centered[i] == 0.0 {
                continue;
            }
            for j in i..d {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    let denom = n - 1.0;
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let total_variance = cov.trace();

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let tol = 1e-12 * total_variance.max(1.0);
    let lambda1 = eig.eigenvalues[order[0]];
    let lambda2 = eig.eigenvalues[order[1]];
    if lambda2 <= tol {
        return Err(Error::Degenerate(format!(
            "data spans fewer than 2 directions of nonzero variance \
             (second eigenvalue {:.3e})",
            lambda2
        )));
    }

    let mut components: Vec<Array1<f64>> = Vec::with_capacity(2);
    for &idx in order.iter().take(2) {
        let col = eig.eigenvectors.column(idx);
        let mut v = Array1::from_iter(col.iter().cloned());
        let mut lead = 0;
        for i in 1..d {
            if v[i].abs() > v[lead].abs() {
                lead = i;
            }
        }
        if v[lead] < 0.0 {
            v.mapv_inplace(|x| -x);
        }
        components.push(v);
    }
    Ok(PcaModel {
        mean,
        components: [components[0].clone(), components[1].clone()],
        eigenvalues: [lambda1, lambda2],
        total_variance,
    })
}

impl PcaModel {
    /// Coordinates of a configuration along the two principal axes.
    pub fn project(&self, x: &BitConfig) -> Result<[f64; 2]> {
        if x.len() != self.mean.len() {
            return Err(Error::dim(format!(
                "configuration of width {} for a PCA over {} dimensions",
                x.len(),
                self.mean.len()
            )));
        }
        let mut out = [0.0; 2];
        for (k, comp) in self.components.iter().enumerate() {
            out[k] = (0..x.len())
                .map(|i| (x.bit(i) as f64 - self.mean[i]) * comp[i])
                .sum();
        }
        Ok(out)
    }
}

/// All pairwise normalized Hamming distances within a uniform subsample of
/// size `k` drawn without replacement. Returns k (k - 1) / 2 values in
/// subsample pair order.
pub fn hamming_histogram(
    samples: &[BitConfig],
    k: usize,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "hamming histogram needs a subsample of at least 2, got {}",
            k
        )));
    }
    if k > samples.len() {
        return Err(Error::invalid(format!(
            "subsample of {} requested from {} samples",
            k,
            samples.len()
        )));
    }
    let nx = samples[0].len();
    if nx == 0 {
        return Err(Error::invalid("hamming histogram needs nonempty configurations"));
    }
    let picked: Vec<usize> = index_sample(rng, samples.len(), k).into_iter().collect();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in (a + 1)..k {
            let d = samples[picked[a]].hamming(&samples[picked[b]])?;
            out.push(d as f64 / nx as f64);
        }
    }
    Ok(out)
}

/// Exact divergences between two strictly positive distributions on the
/// same finite state space.
#[derive(Clone, Copy, Debug)]
pub struct ExactDivergences {
    /// KL(p || q).
    pub forward_kld: f64,
    /// KL(q || p).
    pub reverse_kld: f64,
    /// E_p[(ln p/q)^2].
    pub forward_kld2: f64,
    /// E_q[(ln p/q)^2].
    pub reverse_kld2: f64,
    /// E_{p(x') q(x)}[(ln p(x')/q(x') - ln p(x)/q(x))^2].
    pub ratio_divergence: f64,
    /// E_{p(x') q(x)}[min(1, exp(ln p(x')/q(x') - ln p(x)/q(x)))].
    pub mh_acceptance: f64,
}

/// Computes the exact divergence suite between `p` and `q`.
///
/// The ratio divergence is evaluated both as the double expectation and via
/// its moment decomposition forward_kld2 + reverse_kld2 + 2 * forward_kld *
/// reverse_kld; the two routes must agree to float accuracy.
pub fn exact_divergences(p: &[f64], q: &[f64]) -> Result<ExactDivergences> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::dim(format!(
            "distributions of lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    for (name, dist) in [("p", p), ("q", q)] {
        for (i, &v) in dist.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "{}[{}] = {} is not strictly positive",
                    name, i, v
                )));
            }
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "{} sums to {}, expected 1 within 1e-9",
                name, total
            )));
        }
    }

    let u: Vec<f64> = p.iter().zip(q).map(|(&pi, &qi)| (pi / qi).ln()).collect();
    let forward_kld: f64 = p.iter().zip(&u).map(|(&pi, &ui)| pi * ui).sum();
    let reverse_kld: f64 = q.iter().zip(&u).map(|(&qi, &ui)| -qi * ui).sum();
    let forward_kld2: f64 = p.iter().zip(&u).map(|(&pi, &ui)| pi * ui * ui).sum();
    let reverse_kld2: f64 = q.iter().zip(&u).map(|(&qi, &ui)| qi * ui * ui).sum();

    let mut ratio_divergence = 0.0;
    let mut mh_acceptance = 0.0;
    for (x1, &p1) in p.iter().enumerate() {
        for (x0, &q0) in q.iter().enumerate() {
            let w = p1 * q0;
            let du = u[x1] - u[x0];
            ratio_divergence += w * du * du;
            mh_acceptance += w * du.exp().min(1.0);
        }
    }

    let decomposed = forward_kld2 + reverse_kld2 + 2.0 * forward_kld * reverse_kld;
    let scale = ratio_divergence.abs().max(1.0);
    if (ratio_divergence - decomposed).abs() > 1e-10 * scale {
        return Err(Error::invalid(format!(
            "ratio divergence decomposition mismatch: {} vs {}",
            ratio_divergence, decomposed
        )));
    }

    Ok(ExactDivergences {
        forward_kld,
        reverse_kld,
        forward_kld2,
        reverse_kld2,
        ratio_divergence,
        mh_acceptance,
    })
}

/// Exact Boltzmann distribution of a target at its own inverse temperature,
/// in `BitConfig::from_index` order. Guarded by the enumeration limit.
pub fn exact_target_distribution(model: &TargetModel) -> Result<Vec<f64>> {
    let mut neg_energies = Vec::with_capacity(1usize << model.nx().min(crate::rbm::MAX_ENUM_BITS));
    for x in enumerate_bits(model.nx())? {
        neg_energies.push(-model.effective_energy(&x)?);
    }
    let ln_z = logsumexp(&neg_energies);
    Ok(neg_energies.iter().map(|&v| (v - ln_z).exp()).collect())
}

/// Exact mean raw energy of a target at an arbitrary inverse temperature.
pub fn exact_mean_raw_energy(model: &TargetModel, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {}", beta)));
    }
    let mut raw = Vec::with_capacity(1usize << model.nx().min(crate::rbm::MAX_ENUM_BITS));
    for x in enumerate_bits(model.nx())? {
        raw.push(model.raw_energy(&x)?);
    }
    let weights: Vec<f64> = raw.iter().map(|&e| -beta * e).collect();
    let ln_z = logsumexp(&weights);
    Ok(raw
        .iter()
        .zip(&weights)
        .map(|(&e, &w)| e * (w - ln_z).exp())
        .sum())
}

/// Draws `count` indices from a finite distribution by CDF inversion, one
/// uniform variate per draw.
pub fn sample_indices(probs: &[f64], count: usize, rng: &mut Stream) -> Result<Vec<usize>> {
    if probs.is_empty() {
        return Err(Error::invalid("cannot sample from an empty distribution"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "distribution sums to {}, expected 1 within 1e-9",
            total
        )));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    cdf[last] = 1.0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c <= u);
        out.push(idx.min(last));
    }
    Ok(out)
}
