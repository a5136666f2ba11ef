//! Joint count tables, the Schurmann-Grassberger entropy estimator, mutual
//! information, conditional mutual information, and the transfer-entropy
//! matrix.
//!
//! The estimator is Bayesian under a Dirichlet prior with concentration
//! 1/|chi| per cell of the declared (possibly joint) alphabet:
//!
//! ```text
//! H(X) = 1/(m + |chi| N) * sum_x (#(x) + N) (psi(m + |chi| N + 1) - psi(#(x) + N + 1))
//! ```
//!
//! with N = 1/|chi|, so |chi| N = 1 and the prefactor is 1/(m+1). The sum
//! runs over every cell of the alphabet including empty ones. All results
//! are converted from nats to bits.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DiscreteSeries, LaggedPair};
use crate::special::digamma;

const LN_2: f64 = std::f64::consts::LN_2;

/// Dense joint count table over one to three discrete variables.
#[derive(Debug, Clone)]
pub struct CountTable {
    pub dims: Vec<usize>,
    pub counts: Vec<u64>,
    pub sample_size: u64,
}

impl CountTable {
    pub fn alphabet_size(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Count joint symbol tuples of 1-3 equal-length series. Zero cells are
/// kept; the estimator needs them.
pub fn build_counts(vars: &[&DiscreteSeries]) -> Result<CountTable> {
    if vars.is_empty() || vars.len() > 3 {
        return Err(Error::Config(format!(
            "build_counts takes 1-3 series, got {}",
            vars.len()
        )));
    }
    let len = vars[0].len();
    if len == 0 {
        return Err(Error::EmptyInput);
    }
    for v in vars {
        if v.len() != len {
            return Err(Error::LengthMismatch(len, v.len()));
        }
    }
    let dims: Vec<usize> = vars.iter().map(|v| v.alphabet_size).collect();
    let total: usize = dims.iter().product();
    let mut counts = vec![0u64; total];
    for row in 0..len {
        let mut idx = 0usize;
        for (v, &d) in vars.iter().zip(&dims) {
            idx = idx * d + v.symbols[row] as usize;
        }
        counts[idx] += 1;
    }
    Ok(CountTable {
        dims,
        counts,
        sample_size: len as u64,
    })
}

/// Schurmann-Grassberger entropy of a count table, in bits.
pub fn sg_entropy(ct: &CountTable) -> Result<f64> {
    if ct.sample_size == 0 {
        return Err(Error::EmptySample);
    }
    Ok(sg_entropy_raw(&ct.counts, ct.sample_size))
}

// Plug-in (relative frequency) entropy in bits; the Gamma null of the
// significance module is derived for this estimate, not the Bayesian one.
fn freq_entropy_raw(counts: &[u64], m: u64) -> f64 {
    let m = m as f64;
    let mut acc = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / m;
            acc -= p * p.log2();
        }
    }
    acc
}

/// Plug-in entropy of a count table, in bits.
pub fn freq_entropy(ct: &CountTable) -> Result<f64> {
    if ct.sample_size == 0 {
        return Err(Error::EmptySample);
    }
    Ok(freq_entropy_raw(&ct.counts, ct.sample_size))
}

// Entropy over a raw count slice; the alphabet is the slice length.
fn sg_entropy_raw(counts: &[u64], m: u64) -> f64 {
    let chi = counts.len() as f64;
    let prior = 1.0 / chi; // N = 1/|chi|, so m + |chi| N = m + 1
    let m = m as f64;
    let psi_total = digamma(m + 2.0);
    let mut acc = 0.0;
    for &c in counts {
        let weight = c as f64 + prior;
        acc += weight * (psi_total - digamma(weight + 1.0));
    }
    acc / (m + 1.0) / LN_2
}

/// Marginalize a joint table onto a subset of its axes (indices into dims).
pub fn marginalize(ct: &CountTable, keep: &[usize]) -> CountTable {
    let out_dims: Vec<usize> = keep.iter().map(|&k| ct.dims[k]).collect();
    let out_total: usize = out_dims.iter().product();
    let mut out = vec![0u64; out_total];
    for (flat, &c) in ct.counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        // unravel flat index, then re-ravel the kept axes
        let mut coords = vec![0usize; ct.dims.len()];
        let mut rest = flat;
        for i in (0..ct.dims.len()).rev() {
            coords[i] = rest % ct.dims[i];
            rest /= ct.dims[i];
        }
        let mut idx = 0usize;
        for (&k, &d) in keep.iter().zip(&out_dims) {
            idx = idx * d + coords[k];
        }
        out[idx] += c;
    }
    CountTable {
        dims: out_dims,
        counts: out,
        sample_size: ct.sample_size,
    }
}

/// I(X;Y) = H(X) + H(Y) - H(X,Y), each term SG-estimated. Not clamped;
/// finite-sample estimates can dip slightly negative.
pub fn mutual_information(x: &DiscreteSeries, y: &DiscreteSeries) -> Result<f64> {
    let joint = build_counts(&[x, y])?;
    let hx = sg_entropy(&marginalize(&joint, &[0]))?;
    let hy = sg_entropy(&marginalize(&joint, &[1]))?;
    let hxy = sg_entropy(&joint)?;
    Ok(hx + hy - hxy)
}

/// I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z).
pub fn conditional_mutual_information(
    x: &DiscreteSeries,
    y: &DiscreteSeries,
    z: &DiscreteSeries,
) -> Result<f64> {
    let joint = build_counts(&[x, y, z])?;
    Ok(cmi_from_joint(&joint))
}

fn cmi_from_joint(joint: &CountTable) -> f64 {
    cmi_with(joint, sg_entropy_raw)
}

fn cmi_with(joint: &CountTable, entropy: fn(&[u64], u64) -> f64) -> f64 {
    let m = joint.sample_size;
    let hxz = entropy(&marginalize(joint, &[0, 2]).counts, m);
    let hyz = entropy(&marginalize(joint, &[1, 2]).counts, m);
    let hz = entropy(&marginalize(joint, &[2]).counts, m);
    let hxyz = entropy(&joint.counts, m);
    hxz + hyz - hz - hxyz
}

/// Relative-frequency mutual information, in bits. The analytic Gamma null
/// applies to this estimate.
pub fn freq_mutual_information(x: &DiscreteSeries, y: &DiscreteSeries) -> Result<f64> {
    let joint = build_counts(&[x, y])?;
    let m = joint.sample_size;
    let hx = freq_entropy_raw(&marginalize(&joint, &[0]).counts, m);
    let hy = freq_entropy_raw(&marginalize(&joint, &[1]).counts, m);
    let hxy = freq_entropy_raw(&joint.counts, m);
    Ok(hx + hy - hxy)
}

/// Relative-frequency conditional mutual information, in bits.
pub fn freq_conditional_mutual_information(
    x: &DiscreteSeries,
    y: &DiscreteSeries,
    z: &DiscreteSeries,
) -> Result<f64> {
    let joint = build_counts(&[x, y, z])?;
    Ok(cmi_with(&joint, freq_entropy_raw))
}

/// Transfer entropy from `source` into the target, conditioning on the
/// target's own past: I(source; target_future | target_past), in bits.
pub fn transfer_entropy(
    source: &DiscreteSeries,
    target_future: &DiscreteSeries,
    target_past: &DiscreteSeries,
) -> Result<f64> {
    conditional_mutual_information(source, target_future, target_past)
}

/// The conditional-entropy form H(B|Z) - H(B|Z,A), kept as a cross-check
/// of the conditional mutual information route.
pub fn transfer_entropy_cond_form(
    source: &DiscreteSeries,
    target_future: &DiscreteSeries,
    target_past: &DiscreteSeries,
) -> Result<f64> {
    let joint = build_counts(&[source, target_future, target_past])?;
    let m = joint.sample_size;
    // H(B|Z) = H(B,Z) - H(Z); H(B|Z,A) = H(A,B,Z) - H(A,Z)
    let hbz = sg_entropy_raw(&marginalize(&joint, &[1, 2]).counts, m);
    let hz = sg_entropy_raw(&marginalize(&joint, &[2]).counts, m);
    let habz = sg_entropy_raw(&joint.counts, m);
    let haz = sg_entropy_raw(&marginalize(&joint, &[0, 2]).counts, m);
    Ok((hbz - hz) - (habz - haz))
}

/// Square matrix of pairwise transfer entropies in bits, zero diagonal,
/// row = source, column = target.
///
/// `values` holds the Schurmann-Grassberger estimates (the reported link
/// weights); `freq_values` holds the relative-frequency estimates of the
/// same quantities, which is what the analytic Gamma null describes and
/// what the gamma validator tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TeMatrix {
    pub tickers: Vec<String>,
    pub lag: usize,
    pub alphabet_size: usize,
    pub sample_size: usize,
    /// Row-major n*n Schurmann-Grassberger values.
    pub values: Vec<f64>,
    /// Row-major n*n relative-frequency values.
    pub freq_values: Vec<f64>,
}

impl TeMatrix {
    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.values[source * self.n() + target]
    }

    pub fn get_freq(&self, source: usize, target: usize) -> f64 {
        self.freq_values[source * self.n() + target]
    }

    /// Off-diagonal values in row-major order.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(self.get(i, j));
                }
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.n();
        write!(w, "ticker")?;
        for t in &self.tickers {
            write!(w, ",{t}")?;
        }
        writeln!(w)?;
        for i in 0..n {
            write!(w, "{}", self.tickers[i])?;
            for j in 0..n {
                write!(w, ",{:.17e}", self.get(i, j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// TE matrix over all ordered pairs of a lagged pair:
/// C[m][n] = I(A_m; B_n | A_n), C[m][m] = 0.
///
/// Evaluated in parallel per ordered pair; each pair reads shared immutable
/// columns and writes one cell, so results do not depend on scheduling.
pub fn te_matrix(lp: &LaggedPair) -> Result<TeMatrix> {
    let n = lp.n_instruments();
    let len = lp.len();
    if len == 0 {
        return Err(Error::EmptyInput);
    }
    let chi = lp.alphabet_size;
    if len < chi * chi * chi {
        log::warn!(
            "sample size {len} below |chi|^3 = {}; TE estimates will be noisy",
            chi * chi * chi
        );
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|m| (0..n).filter(move |&t| t != m).map(move |t| (m, t)))
        .collect();
    let cells: Vec<((usize, usize), (f64, f64))> = pairs
        .par_iter()
        .map(|&(m, t)| {
            let te = te_both_for_columns(&lp.a[m], &lp.b[t], &lp.a[t], chi);
            ((m, t), te)
        })
        .collect();
    let mut values = vec![0.0; n * n];
    let mut freq_values = vec![0.0; n * n];
    for ((m, t), (sg, freq)) in cells {
        values[m * n + t] = sg;
        freq_values[m * n + t] = freq;
    }
    Ok(TeMatrix {
        tickers: lp.tickers.clone(),
        lag: lp.lag,
        alphabet_size: chi,
        sample_size: len,
        values,
        freq_values,
    })
}

fn joint_counts_for_columns(
    source: &[u8],
    target_future: &[u8],
    target_past: &[u8],
    chi: usize,
) -> CountTable {
    let len = source.len();
    debug_assert_eq!(len, target_future.len());
    debug_assert_eq!(len, target_past.len());
    let mut counts = vec![0u64; chi * chi * chi];
    for i in 0..len {
        let idx = (source[i] as usize * chi + target_future[i] as usize) * chi
            + target_past[i] as usize;
        counts[idx] += 1;
    }
    CountTable {
        dims: vec![chi, chi, chi],
        counts,
        sample_size: len as u64,
    }
}

/// SG-estimated TE over raw symbol slices sharing one alphabet; the hot
/// path of the permutation test.
pub fn te_for_columns(source: &[u8], target_future: &[u8], target_past: &[u8], chi: usize) -> f64 {
    cmi_from_joint(&joint_counts_for_columns(source, target_future, target_past, chi))
}

/// Both TE estimates (SG, relative-frequency) from one counting pass.
pub fn te_both_for_columns(
    source: &[u8],
    target_future: &[u8],
    target_past: &[u8],
    chi: usize,
) -> (f64, f64) {
    let joint = joint_counts_for_columns(source, target_future, target_past, chi);
    (cmi_from_joint(&joint), cmi_with(&joint, freq_entropy_raw))
}
