//! Statistical validation of transfer-entropy values.
//!
//! Two validators: an analytic Gamma null (mutual information of independent
//! discretized series is approximately Gamma(D/2, 1/(N ln 2)) in bits), and
//! a shuffle-surrogate permutation test. Multiple comparisons over the N^2
//! ordered pairs are handled by the Bonferroni correction p/N^2.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infocore::{te_for_columns, TeMatrix};
use crate::ingest::{DiscreteSeries, LaggedPair};
use crate::special::inv_reg_gamma_p;

const LN_2: f64 = std::f64::consts::LN_2;

/// Degrees of freedom of the null, by the likelihood-ratio independence
/// rule: (|X|-1)(|Y|-1), times |Z| when conditioning.
pub fn dof(chi_x: usize, chi_y: usize, chi_z: Option<usize>) -> Result<usize> {
    if chi_x < 2 || chi_y < 2 {
        return Err(Error::InvalidAlphabet(chi_x.min(chi_y)));
    }
    let base = (chi_x - 1) * (chi_y - 1);
    match chi_z {
        None => Ok(base),
        Some(z) if z >= 1 => Ok(z * base),
        Some(z) => Err(Error::InvalidAlphabet(z)),
    }
}

/// Bonferroni correction over n_nodes^2 ordered pairs.
pub fn bonferroni(base_p: f64, n_nodes: usize) -> Result<f64> {
    if !(0.0 < base_p && base_p < 1.0) {
        return Err(Error::InvalidP(base_p));
    }
    if n_nodes == 0 {
        return Err(Error::Config("n_nodes must be positive".into()));
    }
    Ok(base_p / (n_nodes * n_nodes) as f64)
}

/// (1-p)-quantile of Gamma(D/2, 1/(N_s ln 2)), in bits. Computed by
/// inverting the regularized incomplete gamma; equals chi2_{1-p,D} / (2 N_s ln 2).
pub fn gamma_threshold(dof: usize, sample_size: usize, p: f64) -> Result<f64> {
    if !(0.0 < p && p < 0.5) {
        return Err(Error::InvalidP(p));
    }
    if sample_size < 2 {
        return Err(Error::Config("sample size must be >= 2".into()));
    }
    let shape = dof as f64 / 2.0;
    let scale = 1.0 / (sample_size as f64 * LN_2);
    // standard Gamma quantile times the scale
    Ok(inv_reg_gamma_p(shape, 1.0 - p)? * scale)
}

/// Permutation p-value for one directed link: the source column is shuffled
/// without replacement `n_surrogates` times while the target's future and
/// past stay fixed; p = (1 + #{surrogate TE >= observed}) / (n_surrogates + 1).
///
/// Surrogates run in parallel, each on its own generator stream derived
/// from the seed, so the result does not depend on the worker count.
pub fn permutation_pvalue(
    source: &DiscreteSeries,
    target_future: &DiscreteSeries,
    target_past: &DiscreteSeries,
    n_surrogates: usize,
    seed: u64,
) -> Result<f64> {
    if n_surrogates < 99 {
        return Err(Error::Config(format!(
            "need at least 99 surrogates, got {n_surrogates}"
        )));
    }
    if source.len() != target_future.len() || source.len() != target_past.len() {
        return Err(Error::LengthMismatch(source.len(), target_future.len()));
    }
    let chi = source
        .alphabet_size
        .max(target_future.alphabet_size)
        .max(target_past.alphabet_size);
    let observed = te_for_columns(
        &source.symbols,
        &target_future.symbols,
        &target_past.symbols,
        chi,
    );
    let exceed: usize = (0..n_surrogates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let mut shuffled = source.symbols.clone();
            shuffled.shuffle(&mut rng);
            let te = te_for_columns(&shuffled, &target_future.symbols, &target_past.symbols, chi);
            usize::from(te >= observed)
        })
        .sum();
    Ok((1 + exceed) as f64 / (n_surrogates + 1) as f64)
}

/// Which null the validator uses.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum ValidatorKind {
    /// Analytic Gamma null with a precomputed threshold in bits.
    Gamma { threshold_bits: f64 },
    /// Shuffle surrogates per pair.
    Permutation { surrogate_count: usize, seed: u64 },
}

/// Everything needed to decide significance of a TE matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignificanceModel {
    pub base_p: f64,
    /// Corrected per-test level alpha (equals base_p when uncorrected).
    pub alpha: f64,
    pub dof: usize,
    pub sample_size: usize,
    pub alphabet_size: usize,
    pub kind: ValidatorKind,
}

impl SignificanceModel {
    /// Gamma-null model with Bonferroni correction over `n_nodes^2` tests
    /// (pass `None` to skip the correction).
    pub fn gamma(
        base_p: f64,
        n_nodes: Option<usize>,
        alphabet_size: usize,
        sample_size: usize,
    ) -> Result<Self> {
        let alpha = match n_nodes {
            Some(n) => bonferroni(base_p, n)?,
            None => base_p,
        };
        let d = dof(alphabet_size, alphabet_size, Some(alphabet_size))?;
        let threshold_bits = gamma_threshold(d, sample_size, alpha)?;
        Ok(Self {
            base_p,
            alpha,
            dof: d,
            sample_size,
            alphabet_size,
            kind: ValidatorKind::Gamma { threshold_bits },
        })
    }

    /// Permutation model at the same corrected level.
    pub fn permutation(
        base_p: f64,
        n_nodes: Option<usize>,
        alphabet_size: usize,
        sample_size: usize,
        surrogate_count: usize,
        seed: u64,
    ) -> Result<Self> {
        let alpha = match n_nodes {
            Some(n) => bonferroni(base_p, n)?,
            None => base_p,
        };
        if (surrogate_count as f64) < 1.0 / alpha {
            log::warn!(
                "{surrogate_count} surrogates cannot resolve alpha = {alpha:.3e}; \
                 need at least {:.0}",
                1.0 / alpha
            );
        }
        let d = dof(alphabet_size, alphabet_size, Some(alphabet_size))?;
        Ok(Self {
            base_p,
            alpha,
            dof: d,
            sample_size,
            alphabet_size,
            kind: ValidatorKind::Permutation {
                surrogate_count,
                seed,
            },
        })
    }

    pub fn threshold_bits(&self) -> Option<f64> {
        match self.kind {
            ValidatorKind::Gamma { threshold_bits } => Some(threshold_bits),
            ValidatorKind::Permutation { .. } => None,
        }
    }
}

/// Boolean mask over a TE matrix; diagonal always false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignificanceMask {
    pub n: usize,
    pub cells: Vec<bool>,
}

impl SignificanceMask {
    pub fn get(&self, source: usize, target: usize) -> bool {
        self.cells[source * self.n + target]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }
}

/// Apply a significance model to a TE matrix. The permutation validator
/// needs the underlying lagged columns to build surrogates from.
pub fn validate_matrix(
    c: &TeMatrix,
    model: &SignificanceModel,
    data: Option<&LaggedPair>,
) -> Result<SignificanceMask> {
    if model.sample_size != c.sample_size {
        return Err(Error::ModelMismatch(format!(
            "sample size {} vs matrix {}",
            model.sample_size, c.sample_size
        )));
    }
    if model.alphabet_size != c.alphabet_size {
        return Err(Error::ModelMismatch(format!(
            "alphabet {} vs matrix {}",
            model.alphabet_size, c.alphabet_size
        )));
    }
    let n = c.n();
    let cells = match &model.kind {
        ValidatorKind::Gamma { threshold_bits } => {
            // The analytic null describes the relative-frequency estimate,
            // so the threshold is compared against `freq_values`.
            let mut cells = vec![false; n * n];
            for m in 0..n {
                for t in 0..n {
                    cells[m * n + t] = m != t && c.get_freq(m, t) >= *threshold_bits;
                }
            }
            cells
        }
        ValidatorKind::Permutation {
            surrogate_count,
            seed,
        } => {
            let lp = data.ok_or_else(|| {
                Error::ModelMismatch("permutation validation needs the lagged pair".into())
            })?;
            if lp.n_instruments() != n || lp.len() != c.sample_size {
                return Err(Error::ModelMismatch("lagged pair shape".into()));
            }
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|m| (0..n).filter(move |&t| t != m).map(move |t| (m, t)))
                .collect();
            let verdicts: Vec<((usize, usize), bool)> = pairs
                .par_iter()
                .map(|&(m, t)| {
                    let src = DiscreteSeries::new(lp.a[m].clone(), lp.alphabet_size).unwrap();
                    let fut = DiscreteSeries::new(lp.b[t].clone(), lp.alphabet_size).unwrap();
                    let past = DiscreteSeries::new(lp.a[t].clone(), lp.alphabet_size).unwrap();
                    let pair_seed = splitmix64(
                        seed.wrapping_add(((m as u64) << 32) | t as u64),
                    );
                    let p = permutation_pvalue(&src, &fut, &past, *surrogate_count, pair_seed)
                        .expect("surrogate count validated on model construction");
                    ((m, t), p <= model.alpha)
                })
                .collect();
            let mut cells = vec![false; n * n];
            for ((m, t), v) in verdicts {
                cells[m * n + t] = v;
            }
            cells
        }
    };
    Ok(SignificanceMask { n, cells })
}

/// Moment-matching diagnostic: given null (surrogate) TE values in bits,
/// fit the implied degrees of freedom from the Gamma mean D/(2 N ln 2).
pub fn fit_dof_from_surrogates(null_te_bits: &[f64], sample_size: usize) -> f64 {
    let mean = null_te_bits.iter().sum::<f64>() / null_te_bits.len() as f64;
    2.0 * mean * sample_size as f64 * LN_2
}

/// One cell of a calibration run: empirical vs analytic rejection behaviour
/// of the Gamma null at a given configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub dof: usize,
    pub sample_size: usize,
    pub p: f64,
    pub trials: usize,
    pub threshold_bits: f64,
    pub empirical_rejection_rate: f64,
    /// Empirical 0.9 / 0.99 / 0.999 quantiles of the null statistic.
    pub surrogate_percentiles: [f64; 3],
    /// Degrees of freedom implied by the null mean (moment matching).
    pub fitted_dof: f64,
}

/// Build a calibration report from null-statistic samples (MI or CMI values
/// computed on independent data).
pub fn calibrate(
    null_values: &[f64],
    dof: usize,
    sample_size: usize,
    p: f64,
) -> Result<CalibrationReport> {
    if null_values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let threshold = gamma_threshold(dof, sample_size, p)?;
    let rejected = null_values.iter().filter(|&&v| v >= threshold).count();
    let mut sorted = null_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pick = |q: f64| sorted[((sorted.len() as f64 * q) as usize).min(sorted.len() - 1)];
    Ok(CalibrationReport {
        dof,
        sample_size,
        p,
        trials: null_values.len(),
        threshold_bits: threshold,
        empirical_rejection_rate: rejected as f64 / null_values.len() as f64,
        surrogate_percentiles: [pick(0.9), pick(0.99), pick(0.999)],
        fitted_dof: fit_dof_from_surrogates(null_values, sample_size),
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn dof_rules() {
        assert_eq!(dof(4, 4, None).unwrap(), 9);
        assert_eq!(dof(4, 4, Some(4)).unwrap(), 36);
        assert_eq!(dof(2, 2, None).unwrap(), 1);
        assert!(matches!(dof(1, 4, None), Err(Error::InvalidAlphabet(1))));
    }

    #[test]
    fn bonferroni_paper_operating_point() {
        assert_abs_diff_eq!(bonferroni(0.01, 100).unwrap(), 1e-6, epsilon = 1e-18);
        assert_abs_diff_eq!(bonferroni(0.3, 1).unwrap(), 0.3);
        assert_abs_diff_eq!(bonferroni(0.05, 10).unwrap(), 5e-4, epsilon = 1e-12);
        assert!(matches!(bonferroni(0.0, 10), Err(Error::InvalidP(_))));
    }

    #[test]
    fn gamma_threshold_mean_check() {
        // the null mean is shape * scale = D / (2 N ln 2)
        let mean = 9.0 / (2.0 * 1000.0 * LN_2);
        assert_abs_diff_eq!(mean, 0.006492, epsilon = 1e-6);
    }

    #[test]
    fn gamma_threshold_known_value() {
        // chi2_{0.99,9} = 21.666 => / (2000 ln 2)
        let t = gamma_threshold(9, 1000, 0.01).unwrap();
        assert_abs_diff_eq!(t, 0.015628, epsilon = 2e-6);
    }

    #[test]
    fn gamma_threshold_matches_chi_square_oracle() {
        for &(d, n, p) in &[
            (9usize, 1000usize, 0.01),
            (36, 5849, 1e-6), // 15 days of 1-minute bars, conditional dof
            (36, 2000, 0.01),
            (1, 100, 0.05),
        ] {
            // Invert the statrs chi-square CDF by bisection: its own
            // inverse_cdf is only ~1e-5 accurate, the CDF itself is not.
            let chi = ChiSquared::new(d as f64).unwrap();
            let (mut lo, mut hi) = (0.0f64, 500.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if chi.cdf(mid) < 1.0 - p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = 0.5 * (lo + hi) / (2.0 * n as f64 * LN_2);
            let ours = gamma_threshold(d, n, p).unwrap();
            assert!(
                (ours - oracle).abs() <= 1e-8 * oracle,
                "d={d} n={n} p={p}: {ours} vs {oracle}"
            );
        }
    }

    #[test]
    fn gamma_threshold_monotonicity() {
        let base = gamma_threshold(9, 1000, 0.01).unwrap();
        assert!(gamma_threshold(10, 1000, 0.01).unwrap() > base);
        assert!(gamma_threshold(9, 2000, 0.01).unwrap() < base);
        assert!(gamma_threshold(9, 1000, 0.05).unwrap() < base);
    }

    fn uniform(rng: &mut ChaCha8Rng, len: usize, chi: usize) -> DiscreteSeries {
        DiscreteSeries::new((0..len).map(|_| rng.gen_range(0..chi) as u8).collect(), chi).unwrap()
    }

    #[test]
    fn permutation_extreme_observed() {
        // observed far above every surrogate: p = 1/(n+1)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = uniform(&mut rng, 2000, 4);
        let z = uniform(&mut rng, 2000, 4);
        let p = permutation_pvalue(&x, &x, &z, 99, 42).unwrap();
        assert_abs_diff_eq!(p, 1.0 / 100.0, epsilon = 1e-12);
    }

    #[test]
    fn permutation_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = uniform(&mut rng, 500, 4);
        let y = uniform(&mut rng, 500, 4);
        let z = uniform(&mut rng, 500, 4);
        let p1 = permutation_pvalue(&x, &y, &z, 199, 7).unwrap();
        let p2 = permutation_pvalue(&x, &y, &z, 199, 7).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn permutation_pvalues_roughly_uniform() {
        // KS test of p-values from independent data against U(0,1].
        let trials = 50;
        let ks_critical = 1.36 / (trials as f64).sqrt(); // 5% level
        let mut passes = 0;
        for run in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + run);
            let mut pvals: Vec<f64> = (0..trials)
                .map(|i| {
                    let x = uniform(&mut rng, 200, 4);
                    let y = uniform(&mut rng, 200, 4);
                    let z = uniform(&mut rng, 200, 4);
                    permutation_pvalue(&x, &y, &z, 99, run * 1000 + i).unwrap()
                })
                .collect();
            pvals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ks = pvals
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let lo = i as f64 / trials as f64;
                    let hi = (i + 1) as f64 / trials as f64;
                    (p - lo).abs().max((p - hi).abs())
                })
                .fold(0.0, f64::max);
            if ks < ks_critical {
                passes += 1;
            }
        }
        assert!(passes >= 90, "only {passes}/100 runs passed the KS check");
    }

    #[test]
    fn validate_matrix_gamma_masks() {
        let model = SignificanceModel::gamma(0.01, None, 4, 1000).unwrap();
        let threshold = model.threshold_bits().unwrap();
        let mut values = vec![0.0; 9];
        let c = TeMatrix {
            tickers: vec!["A".into(), "B".into(), "C".into()],
            lag: 1,
            alphabet_size: 4,
            sample_size: 1000,
            values: values.clone(),
            freq_values: values.clone(),
        };
        let mask = validate_matrix(&c, &model, None).unwrap();
        assert_eq!(mask.count(), 0);

        values[1] = threshold * 10.0; // cell (0,1)
        let c = TeMatrix { values: values.clone(), freq_values: values, ..c };
        let mask = validate_matrix(&c, &model, None).unwrap();
        assert_eq!(mask.count(), 1);
        assert!(mask.get(0, 1));
    }

    #[test]
    fn validate_matrix_rejects_mismatched_model() {
        let model = SignificanceModel::gamma(0.01, None, 4, 1000).unwrap();
        let c = TeMatrix {
            tickers: vec!["A".into(), "B".into()],
            lag: 1,
            alphabet_size: 4,
            sample_size: 999,
            values: vec![0.0; 4],
            freq_values: vec![0.0; 4],
        };
        assert!(matches!(
            validate_matrix(&c, &model, None),
            Err(Error::ModelMismatch(_))
        ));
    }

    #[test]
    fn moment_matching_recovers_dof_order() {
        // Relative-frequency MI of independent 4-symbol pairs should imply
        // D near 9; the Schurmann-Grassberger estimate of the same data sits
        // near 2x that, which is why the validator tests the frequency form.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n_s = 2000;
        let (mut freq, mut sg) = (Vec::new(), Vec::new());
        for _ in 0..500 {
            let x = uniform(&mut rng, n_s, 4);
            let y = uniform(&mut rng, n_s, 4);
            freq.push(crate::infocore::freq_mutual_information(&x, &y).unwrap());
            sg.push(crate::infocore::mutual_information(&x, &y).unwrap());
        }
        let fitted = fit_dof_from_surrogates(&freq, n_s);
        assert!((fitted - 9.0).abs() < 2.0, "fitted dof {fitted}");
        let fitted_sg = fit_dof_from_surrogates(&sg, n_s);
        assert!((fitted_sg - 18.0).abs() < 3.0, "fitted SG dof {fitted_sg}");
    }
}
