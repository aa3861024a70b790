//! Discrete target energy functions.
//!
//! A target model is a raw energy function over bit configurations together
//! with an inverse temperature beta. The training data distribution is
//! proportional to exp(-beta * raw_energy(x)); every consumer of a target
//! energy in this crate (reverse KLD, ratio divergence, the residual score)
//! uses the beta-scaled effective energy so that all comparisons happen in
//! the same units.
//!
//! Spin-formulated models (Ising, SK) map bits to spins via s = 2x - 1
//! internally; all public interfaces speak bits.

pub mod gset;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rbm::BitConfig;
use crate::rng::Stream;
use crate::target::gset::GsetGraph;

/// The retry budget for the rejection loop in `mis_random_regular`.
const REGULAR_GRAPH_MAX_TRIES: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    /// Ferromagnetic 2D Ising on an l x l periodic lattice with uniform
    /// coupling j. Every site has four neighbors; at l = 2 the wrap-around
    /// makes each axis neighbor appear twice, doubling those bonds.
    Ising2d { l: usize, j: f64 },
    /// Sherrington-Kirkpatrick spin glass: full symmetric coupling matrix
    /// with zero diagonal, energy -sum_{i<j} J_ij s_i s_j.
    Sk { couplings: Array2<f64> },
    /// Maximum independent set penalty form: -sum_i x_i + alpha *
    /// sum_{(i,j) in E} x_i x_j.
    Mis {
        alpha: f64,
        edges: Vec<(usize, usize)>,
        adjacency: Vec<Vec<usize>>,
    },
    /// Weighted max-cut: -sum_{(i,j,w) in E} w (x_i - x_j)^2.
    MaxCut {
        edges: Vec<(usize, usize, f64)>,
        incident: Vec<Vec<(usize, f64)>>,
    },
}

/// A target energy function over `nx` bits at inverse temperature `beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetModel {
    nx: usize,
    beta: f64,
    kind: Kind,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid(format!(
            "inverse temperature must be finite and positive, got {}",
            beta
        )));
    }
    Ok(())
}

/// Validates an unweighted edge list over `n` nodes: endpoints in range,
/// no self-loops, no duplicate unordered pairs. Returns canonical (min, max)
/// pairs in input order.
fn canonicalize_edges(n: usize, edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::invalid(format!(
                "edge ({}, {}) out of range for {} nodes",
                a, b, n
            )));
        }
        if a == b {
            return Err(Error::invalid(format!("self-loop at node {}", a)));
        }
        let e = (a.min(b), a.max(b));
        if !seen.insert(e) {
            return Err(Error::invalid(format!("duplicate edge ({}, {})", e.0, e.1)));
        }
        out.push(e);
    }
    Ok(out)
}

impl TargetModel {
    /// Ferromagnetic Ising model on an l x l periodic lattice.
    pub fn ising2d(l: usize, j: f64, beta: f64) -> Result<Self> {
        if l < 2 {
            return Err(Error::invalid(format!(
                "lattice side must be at least 2, got {}",
                l
            )));
        }
        if !j.is_finite() {
            return Err(Error::invalid("ising coupling must be finite".to_string()));
        }
        check_beta(beta)?;
        Ok(TargetModel {
            nx: l * l,
            beta,
            kind: Kind::Ising2d { l, j },
        })
    }

    /// SK model from an explicit coupling matrix. The matrix must be square,
    /// symmetric, and zero on the diagonal.
    pub fn sk(couplings: Array2<f64>, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let n = couplings.nrows();
        if couplings.ncols() != n {
            return Err(Error::dim(format!(
                "coupling matrix is {}x{}, expected square",
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::invalid("sk model needs at least one spin".to_string()));
        }
        for i in 0..n {
            if couplings[[i, i]] != 0.0 {
                return Err(Error::invalid(format!(
                    "coupling diagonal must be zero, J[{0},{0}] = {1}",
                    i,
                    couplings[[i, i]]
                )));
            }
            for k in 0..i {
                if couplings[[i, k]] != couplings[[k, i]] {
                    return Err(Error::invalid(format!(
                        "coupling matrix not symmetric at ({}, {})",
                        k, i
                    )));
                }
            }
        }
        Ok(TargetModel {
            nx: n,
            beta,
            kind: Kind::Sk { couplings },
        })
    }

    /// SK model with couplings drawn i.i.d. from N(0, 1/n), mirrored to a
    /// symmetric matrix. Pairs (i, j), i < j, are drawn in row-major order.
    pub fn sk_random(n: usize, beta: f64, rng: &mut Stream) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("sk model needs at least one spin".to_string()));
        }
        let sd = (1.0 / n as f64).sqrt();
        let normal = Normal::new(0.0, sd).expect("finite sd");
        let mut couplings = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let v = normal.sample(rng);
                couplings[[i, j]] = v;
                couplings[[j, i]] = v;
            }
        }
        TargetModel::sk(couplings, beta)
    }

    /// Maximum independent set model over an explicit edge list.
    pub fn mis(n: usize, edges: &[(usize, usize)], alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("mis model needs at least one node".to_string()));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::invalid(format!(
                "mis penalty weight must be finite and non-negative, got {}",
                alpha
            )));
        }
        check_beta(beta)?;
        let edges = canonicalize_edges(n, edges)?;
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Ok(TargetModel {
            nx: n,
            beta,
            kind: Kind::Mis { alpha, edges, adjacency },
        })
    }

    /// MIS model on a random d-regular graph built by configuration-model
    /// stub pairing with whole-matching rejection of self-loops and
    /// duplicate edges.
    pub fn mis_random_regular(
        n: usize,
        degree: usize,
        alpha: f64,
        beta: f64,
        rng: &mut Stream,
    ) -> Result<Self> {
        if degree == 0 || degree >= n {
            return Err(Error::Infeasible(format!(
                "degree {} is not realizable on {} nodes",
                degree, n
            )));
        }
        if !(n * degree).is_multiple_of(2) {
            return Err(Error::Infeasible(format!(
                "n * degree = {} is odd, no regular graph exists",
                n * degree
            )));
        }
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
        for _ in 0..REGULAR_GRAPH_MAX_TRIES {
            stubs.shuffle(rng);
            let mut seen = std::collections::HashSet::new();
            let mut edges = Vec::with_capacity(stubs.len() / 2);
            let mut ok = true;
            for pair in stubs.chunks_exact(2) {
                let (a, b) = (pair[0], pair[1]);
                if a == b {
                    ok = false;
                    break;
                }
                let e = (a.min(b), a.max(b));
                if !seen.insert(e) {
                    ok = false;
                    break;
                }
                edges.push(e);
            }
            if ok {
                return TargetModel::mis(n, &edges, alpha, beta);
            }
        }
        Err(Error::Infeasible(format!(
            "no simple {}-regular graph on {} nodes found in {} pairing attempts",
            degree, n, REGULAR_GRAPH_MAX_TRIES
        )))
    }

    /// Weighted max-cut model over an explicit edge list.
    pub fn maxcut(n: usize, edges: &[(usize, usize, f64)], beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("maxcut model needs at least one node".to_string()));
        }
        check_beta(beta)?;
        let unweighted: Vec<(usize, usize)> = edges.iter().map(|&(a, b, _)| (a, b)).collect();
        let canonical = canonicalize_edges(n, &unweighted)?;
        let mut weighted = Vec::with_capacity(edges.len());
        let mut incident = vec![Vec::new(); n];
        for (&(a, b), &(_, _, w)) in canonical.iter().zip(edges) {
            if !w.is_finite() {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) has non-finite weight",
                    a, b
                )));
            }
            weighted.push((a, b, w));
            incident[a].push((b, w));
            incident[b].push((a, w));
        }
        Ok(TargetModel {
            nx: n,
            beta,
            kind: Kind::MaxCut { edges: weighted, incident },
        })
    }

    /// Max-cut model over a parsed Gset graph.
    pub fn maxcut_from_gset(graph: &GsetGraph, beta: f64) -> Result<Self> {
        TargetModel::maxcut(graph.n, &graph.edges, beta)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Kind tag: "ising2d", "sk", "mis", or "maxcut".
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::Ising2d { .. } => "ising2d",
            Kind::Sk { .. } => "sk",
            Kind::Mis { .. } => "mis",
            Kind::MaxCut { .. } => "maxcut",
        }
    }

    fn check_config(&self, x: &BitConfig) -> Result<()> {
        if x.len() != self.nx {
            return Err(Error::dim(format!(
                "configuration of length {} for a target over {} bits",
                x.len(),
                self.nx
            )));
        }
        Ok(())
    }

    /// Raw (temperature-free) energy of a configuration.
    pub fn raw_energy(&self, x: &BitConfig) -> Result<f64> {
        self.check_config(x)?;
        Ok(match &self.kind {
            Kind::Ising2d { l, j } => {
                let l = *l;
                let mut e = 0.0;
                for row in 0..l {
                    for col in 0..l {
                        let site = row * l + col;
                        let right = row * l + (col + 1) % l;
                        let down = ((row + 1) % l) * l + col;
                        let s = x.spin(site);
                        e -= j * s * (x.spin(right) + x.spin(down));
                    }
                }
                e
            }
            Kind::Sk { couplings } => {
                let n = self.nx;
                let mut e = 0.0;
                for i in 0..n {
                    let si = x.spin(i);
                    for k in (i + 1)..n {
                        e -= couplings[[i, k]] * si * x.spin(k);
                    }
                }
                e
            }
            Kind::Mis { alpha, edges, .. } => {
                let occupied: f64 = x.bits().iter().map(|&b| b as f64).sum();
                let conflicts: f64 = edges
                    .iter()
                    .map(|&(a, b)| (x.bit(a) & x.bit(b)) as f64)
                    .sum();
                -occupied + alpha * conflicts
            }
            Kind::MaxCut { edges, .. } => {
                let cut: f64 = edges
                    .iter()
                    .map(|&(a, b, w)| w * ((x.bit(a) ^ x.bit(b)) as f64))
                    .sum();
                -cut
            }
        })
    }

    /// Effective energy beta * raw_energy; the exponent of the target
    /// Boltzmann weight.
    pub fn effective_energy(&self, x: &BitConfig) -> Result<f64> {
        Ok(self.beta * self.raw_energy(x)?)
    }

    /// Change in raw energy caused by flipping bit `site`, computed from the
    /// current configuration in time proportional to the site degree.
    pub fn raw_energy_delta(&self, x: &BitConfig, site: usize) -> Result<f64> {
        self.check_config(x)?;
        if site >= self.nx {
            return Err(Error::invalid(format!(
                "flip site {} out of range for {} bits",
                site, self.nx
            )));
        }
        Ok(match &self.kind {
            Kind::Ising2d { l, j } => {
                let l = *l;
                let row = site / l;
                let col = site % l;
                let neighbors = [
                    row * l + (col + 1) % l,
                    row * l + (col + l - 1) % l,
                    ((row + 1) % l) * l + col,
                    ((row + l - 1) % l) * l + col,
                ];
                let field: f64 = neighbors.iter().map(|&k| x.spin(k)).sum();
                2.0 * j * x.spin(site) * field
            }
            Kind::Sk { couplings } => {
                let mut field = 0.0;
                for k in 0..self.nx {
                    field += couplings[[site, k]] * x.spin(k);
                }
                2.0 * x.spin(site) * field
            }
            Kind::Mis { alpha, adjacency, .. } => {
                let delta = 1.0 - 2.0 * x.bit(site) as f64;
                let occupied_neighbors: f64 =
                    adjacency[site].iter().map(|&k| x.bit(k) as f64).sum();
                delta * (alpha * occupied_neighbors - 1.0)
            }
            Kind::MaxCut { incident, .. } => incident[site]
                .iter()
                .map(|&(k, w)| w * (2.0 * ((x.bit(site) ^ x.bit(k)) as f64) - 1.0))
                .sum(),
        })
    }

    /// Change in effective energy for a single-bit flip.
    pub fn energy_delta(&self, x: &BitConfig, site: usize) -> Result<f64> {
        Ok(self.beta * self.raw_energy_delta(x, site)?)
    }

    /// Canonical textual serialization. Floating-point values are printed in
    /// Rust's shortest round-tripping form, so serialize-parse-serialize is
    /// byte-identical.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        match &self.kind {
            Kind::Ising2d { l, j } => {
                writeln!(out, "ising2d {} {} {}", l, j, self.beta).unwrap();
            }
            Kind::Sk { couplings } => {
                writeln!(out, "sk {} {}", self.nx, self.beta).unwrap();
                for i in 0..self.nx {
                    for k in (i + 1)..self.nx {
                        writeln!(out, "{} {} {}", i, k, couplings[[i, k]]).unwrap();
                    }
                }
            }
            Kind::Mis { alpha, edges, .. } => {
                writeln!(out, "mis {} {} {} {}", self.nx, alpha, self.beta, edges.len()).unwrap();
                for &(a, b) in edges {
                    writeln!(out, "{} {}", a, b).unwrap();
                }
            }
            Kind::MaxCut { edges, .. } => {
                writeln!(out, "maxcut {} {} {}", self.nx, self.beta, edges.len()).unwrap();
                for &(a, b, w) in edges {
                    writeln!(out, "{} {} {}", a, b, w).unwrap();
                }
            }
        }
        out
    }

    /// SHA-256 of the canonical text, lowercase hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    /// Parses the canonical textual serialization.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty model description"))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::parse(1, "empty model header"));
        }

        fn field<T: std::str::FromStr>(tokens: &[&str], idx: usize, what: &str) -> Result<T> {
            let tok = tokens
                .get(idx)
                .ok_or_else(|| Error::parse(1, format!("missing {}", what)))?;
            tok.parse()
                .map_err(|_| Error::parse(1, format!("bad {}: {:?}", what, tok)))
        }

        let expect_len = |len: usize| -> Result<()> {
            if tokens.len() != len {
                return Err(Error::parse(
                    1,
                    format!("expected {} header fields, got {}", len, tokens.len()),
                ));
            }
            Ok(())
        };

        match tokens[0] {
            "ising2d" => {
                expect_len(4)?;
                let l: usize = field(&tokens, 1, "lattice side")?;
                let j: f64 = field(&tokens, 2, "coupling")?;
                let beta: f64 = field(&tokens, 3, "beta")?;
                ensure_no_more_lines(lines)?;
                TargetModel::ising2d(l, j, beta)
            }
            "sk" => {
                expect_len(3)?;
                let n: usize = field(&tokens, 1, "spin count")?;
                let beta: f64 = field(&tokens, 2, "beta")?;
                let mut couplings = Array2::zeros((n, n));
                let expected = n * (n.saturating_sub(1)) / 2;
                let mut count = 0usize;
                for (lineno0, line) in lines {
                    let lineno = lineno0 + 1;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let toks: Vec<&str> = line.split_whitespace().collect();
                    if toks.len() != 3 {
                        return Err(Error::parse(lineno, "expected `i j J` coupling line"));
                    }
                    let i: usize = toks[0]
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad index {:?}", toks[0])))?;
                    let k: usize = toks[1]
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad index {:?}", toks[1])))?;
                    let v: f64 = toks[2]
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad coupling {:?}", toks[2])))?;
                    if i >= n || k >= n || i >= k {
                        return Err(Error::parse(
                            lineno,
                            format!("coupling indices ({}, {}) must satisfy i < j < {}", i, k, n),
                        ));
                    }
                    couplings[[i, k]] = v;
                    couplings[[k, i]] = v;
                    count += 1;
                }
                if count != expected {
                    return Err(Error::parse(
                        1,
                        format!("expected {} coupling lines, found {}", expected, count),
                    ));
                }
                TargetModel::sk(couplings, beta)
            }
            "mis" => {
                expect_len(5)?;
                let n: usize = field(&tokens, 1, "node count")?;
                let alpha: f64 = field(&tokens, 2, "penalty weight")?;
                let beta: f64 = field(&tokens, 3, "beta")?;
                let m: usize = field(&tokens, 4, "edge count")?;
                let edges = parse_edge_lines(lines, m, false)?
                    .into_iter()
                    .map(|(a, b, _)| (a, b))
                    .collect::<Vec<_>>();
                TargetModel::mis(n, &edges, alpha, beta)
            }
            "maxcut" => {
                expect_len(4)?;
                let n: usize = field(&tokens, 1, "node count")?;
                let beta: f64 = field(&tokens, 2, "beta")?;
                let m: usize = field(&tokens, 3, "edge count")?;
                let edges = parse_edge_lines(lines, m, true)?;
                TargetModel::maxcut(n, &edges, beta)
            }
            other => Err(Error::parse(1, format!("unknown model kind {:?}", other))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.canonical_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        TargetModel::parse_text(&text)
    }
}

fn ensure_no_more_lines<'a>(lines: impl Iterator<Item = (usize, &'a str)>) -> Result<()> {
    for (lineno0, line) in lines {
        if !line.trim().is_empty() {
            return Err(Error::parse(lineno0 + 1, "unexpected content after header"));
        }
    }
    Ok(())
}

/// Reads exactly `m` edge lines, `i j` or `i j w` depending on `weighted`.
fn parse_edge_lines<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    m: usize,
    weighted: bool,
) -> Result<Vec<(usize, usize, f64)>> {
    let want = if weighted { 3 } else { 2 };
    let mut edges = Vec::with_capacity(m);
    let mut last_line = 1;
    for (lineno0, line) in lines {
        let lineno = lineno0 + 1;
        last_line = lineno;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != want {
            return Err(Error::parse(
                lineno,
                format!("expected {} fields on edge line, got {}", want, toks.len()),
            ));
        }
        if edges.len() == m {
            return Err(Error::parse(lineno, format!("more than {} edge lines", m)));
        }
        let a: usize = toks[0]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad node index {:?}", toks[0])))?;
        let b: usize = toks[1]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad node index {:?}", toks[1])))?;
        let w: f64 = if weighted {
            toks[2]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad edge weight {:?}", toks[2])))?
        } else {
            1.0
        };
        edges.push((a, b, w));
    }
    if edges.len() != m {
        return Err(Error::parse(
            last_line,
            format!("expected {} edge lines, found {}", m, edges.len()),
        ));
    }
    Ok(edges)
}
