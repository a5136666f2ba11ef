//! End-to-end orchestration: load -> returns -> discretize -> lag sweep ->
//! TE matrices -> validation -> networks -> figure data, all reproducible
//! from a seeded configuration. Every output file lands in the configured
//! directory and is listed with its content hash in `manifest.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::infocore::{
    conditional_mutual_information, freq_conditional_mutual_information,
    freq_mutual_information, mutual_information, te_matrix, TeMatrix,
};
use crate::ingest::{
    compute_log_returns, discretize_matrix, load_price_matrix, split_lagged, DiscreteSeries,
};
use crate::netstats::{
    build_network, cross_lag_correlation, degree_distributions, export_network,
    fit_distributions, magnitude_summary, sector_stats, te_histogram, DistributionFit,
    ExportFormat,
};
use crate::significance::{dof, validate_matrix, calibrate, CalibrationReport, SignificanceModel};
use crate::synth::{gen_prices, SynthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    #[default]
    Bonferroni,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Validator {
    #[default]
    Gamma,
    Permutation,
}

fn default_alphabet() -> usize {
    4
}
fn default_base_p() -> f64 {
    0.01
}
fn default_bins() -> usize {
    50
}
fn default_surrogates() -> usize {
    9999
}

/// Full pipeline configuration. The JSON config file mirrors the CLI flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub prices: PathBuf,
    #[serde(default)]
    pub sectors: Option<PathBuf>,
    /// Return sampling period in minutes (rows of the price grid).
    pub tau: usize,
    /// Lags in minutes; each must be divisible by tau.
    pub lags: Vec<usize>,
    #[serde(default = "default_alphabet")]
    pub bins: usize,
    #[serde(default = "default_base_p")]
    pub pvalue: f64,
    #[serde(default)]
    pub correction: Correction,
    #[serde(default)]
    pub validator: Validator,
    #[serde(default = "default_surrogates")]
    pub surrogates: usize,
    #[serde(default)]
    pub seed: u64,
    pub out: PathBuf,
    /// Permutation validation at very small corrected alpha is prohibitively
    /// expensive; this flag acknowledges the cost.
    #[serde(default)]
    pub allow_expensive_surrogates: bool,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::Config("tau must be >= 1".into()));
        }
        if self.lags.is_empty() {
            return Err(Error::Config("lag list is empty".into()));
        }
        for &lag in &self.lags {
            if lag % self.tau != 0 {
                return Err(Error::Config(format!(
                    "lag {lag} min is not divisible by tau {} min",
                    self.tau
                )));
            }
        }
        if self.bins < 2 {
            return Err(Error::Config("alphabet size must be >= 2".into()));
        }
        if !(0.0 < self.pvalue && self.pvalue < 1.0) {
            return Err(Error::InvalidP(self.pvalue));
        }
        Ok(())
    }
}

/// Per-lag summary recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagSummary {
    pub lag_minutes: usize,
    pub lag_periods: usize,
    pub sample_size: usize,
    pub threshold_bits: Option<f64>,
    pub validated_links: usize,
    pub total_pairs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub n_instruments: usize,
    pub alpha: f64,
    pub lags: Vec<LagSummary>,
    pub wall_time_secs: f64,
    /// file name -> sha256 of contents
    pub files: BTreeMap<String, String>,
}

struct OutputWriter {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl OutputWriter {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hashes: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.hashes
            .insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }
}

/// Run the full analysis pipeline; returns the manifest that was written.
pub fn analyze(config: &RunConfig) -> Result<Manifest> {
    let started = Instant::now();
    config.validate()?;
    let pm = load_price_matrix(&config.prices, config.sectors.as_deref())?;
    let n = pm.n_instruments();
    let alpha = match config.correction {
        Correction::Bonferroni => crate::significance::bonferroni(config.pvalue, n)?,
        Correction::None => config.pvalue,
    };
    if config.validator == Validator::Permutation
        && (config.surrogates as f64) < 1.0 / alpha
        && !config.allow_expensive_surrogates
    {
        return Err(Error::Config(format!(
            "resolving alpha = {alpha:.3e} needs at least {:.0} surrogates per pair \
             ({} configured); rerun with allow_expensive_surrogates or use the gamma validator",
            1.0 / alpha,
            config.surrogates
        )));
    }

    let rm = compute_log_returns(&pm, config.tau)?;
    let dm = discretize_matrix(&rm, config.bins)?;
    let mut writer = OutputWriter::new(&config.out)?;

    let mut matrices: Vec<TeMatrix> = Vec::new();
    let mut summaries: Vec<LagSummary> = Vec::new();
    let mut link_rows = String::from("lag_minutes,lag_periods,validated_links,total_pairs,threshold_bits\n");
    let mut magnitude_rows =
        String::from("lag_minutes,full_mean,full_std,validated_mean,validated_std,validated_count\n");
    let mut sector_rows = String::from(
        "lag_minutes,intrasector_fraction_full,intrasector_fraction_validated,\
         intra_mean,intra_std,inter_mean,inter_std\n",
    );

    for &lag_minutes in &config.lags {
        let lag = lag_minutes / config.tau;
        let lp = split_lagged(&dm, lag)?;
        let c = te_matrix(&lp)?;
        let correction_nodes = match config.correction {
            Correction::Bonferroni => Some(n),
            Correction::None => None,
        };
        let model = match config.validator {
            Validator::Gamma => {
                SignificanceModel::gamma(config.pvalue, correction_nodes, config.bins, lp.len())?
            }
            Validator::Permutation => SignificanceModel::permutation(
                config.pvalue,
                correction_nodes,
                config.bins,
                lp.len(),
                config.surrogates,
                config.seed,
            )?,
        };
        let mask = validate_matrix(&c, &model, Some(&lp))?;
        let net = build_network(&c, &mask, pm.sectors.as_ref(), &model)?;

        // TE matrix: CSV and JSON
        let mut buf = Vec::new();
        c.write_csv(&mut buf)?;
        writer.write(&format!("te_matrix_lag{lag_minutes}.csv"), &buf)?;
        writer.write(
            &format!("te_matrix_lag{lag_minutes}.json"),
            serde_json::to_string_pretty(&c)?.as_bytes(),
        )?;

        // mask
        let mut mask_csv = String::from("ticker");
        for t in &c.tickers {
            write!(mask_csv, ",{t}").unwrap();
        }
        mask_csv.push('\n');
        for i in 0..n {
            write!(mask_csv, "{}", c.tickers[i]).unwrap();
            for j in 0..n {
                write!(mask_csv, ",{}", u8::from(mask.get(i, j))).unwrap();
            }
            mask_csv.push('\n');
        }
        writer.write(&format!("mask_lag{lag_minutes}.csv"), mask_csv.as_bytes())?;

        // network exports
        for (fmt, ext) in [
            (ExportFormat::Dot, "dot"),
            (ExportFormat::GraphMl, "graphml"),
            (ExportFormat::Json, "json"),
            (ExportFormat::EdgeCsv, "edges.csv"),
        ] {
            let mut buf = Vec::new();
            export_network(&net, fmt, &mut buf)?;
            writer.write(&format!("network_lag{lag_minutes}.{ext}"), &buf)?;
        }

        // histogram (skipped when all off-diagonal values coincide)
        let threshold = model.threshold_bits().unwrap_or(f64::NAN);
        match te_histogram(&c, config.histogram_bins, threshold) {
            Ok(h) => {
                let mut csv = String::from("bin_lo,bin_hi,count,threshold_bits\n");
                for (edges, count) in h.bin_edges.windows(2).zip(&h.counts) {
                    writeln!(csv, "{},{},{count},{}", edges[0], edges[1], h.threshold_bits)
                        .unwrap();
                }
                writer.write(&format!("histogram_lag{lag_minutes}.csv"), csv.as_bytes())?;
            }
            Err(Error::DegenerateRange) => {}
            Err(e) => return Err(e),
        }

        // degree distributions
        let degrees = degree_distributions(&net);
        let mut csv = String::from("degree,in_count,out_count\n");
        let all_degrees: std::collections::BTreeSet<usize> = degrees
            .in_degrees
            .keys()
            .chain(degrees.out_degrees.keys())
            .cloned()
            .collect();
        for d in all_degrees {
            writeln!(
                csv,
                "{d},{},{}",
                degrees.in_degrees.get(&d).unwrap_or(&0),
                degrees.out_degrees.get(&d).unwrap_or(&0)
            )
            .unwrap();
        }
        writer.write(&format!("degrees_lag{lag_minutes}.csv"), csv.as_bytes())?;

        // tail fits of validated TE values, x_min at the threshold
        let validated: Vec<f64> = net.edges.iter().map(|&(_, _, te)| te).collect();
        if let Some(t) = model.threshold_bits() {
            if let Ok((pl, ln)) = fit_distributions(&validated, t) {
                let mut csv =
                    String::from("family,param1_name,param1,param2_name,param2,count,log_likelihood\n");
                if let DistributionFit::PowerLaw {
                    exponent,
                    x_min,
                    count,
                    log_likelihood,
                } = pl
                {
                    writeln!(
                        csv,
                        "power_law,exponent,{exponent},x_min,{x_min},{count},{log_likelihood}"
                    )
                    .unwrap();
                }
                if let DistributionFit::LogNormal {
                    log_mean,
                    log_std,
                    count,
                    log_likelihood,
                } = ln
                {
                    writeln!(
                        csv,
                        "log_normal,log_mean,{log_mean},log_std,{log_std},{count},{log_likelihood}"
                    )
                    .unwrap();
                }
                writer.write(&format!("fits_lag{lag_minutes}.csv"), csv.as_bytes())?;
            }
        }

        // summary rows
        let mag = magnitude_summary(&c, &mask);
        writeln!(
            link_rows,
            "{lag_minutes},{lag},{},{},{}",
            mask.count(),
            n * (n - 1),
            model.threshold_bits().map_or(String::from(""), |t| t.to_string()),
        )
        .unwrap();
        let (vm, vs) = mag.validated.unwrap_or((f64::NAN, f64::NAN));
        writeln!(
            magnitude_rows,
            "{lag_minutes},{},{},{vm},{vs},{}",
            mag.full_mean, mag.full_std, mag.validated_count
        )
        .unwrap();
        if let Some(sectors) = pm.sectors.as_ref() {
            let s = sector_stats(&c, &mask, sectors)?;
            writeln!(
                sector_rows,
                "{lag_minutes},{},{},{},{},{},{}",
                s.intrasector_fraction_full,
                s.intrasector_fraction_validated
                    .map_or(String::from(""), |f| f.to_string()),
                s.intra_te.0,
                s.intra_te.1,
                s.inter_te.0,
                s.inter_te.1
            )
            .unwrap();
        }

        summaries.push(LagSummary {
            lag_minutes,
            lag_periods: lag,
            sample_size: lp.len(),
            threshold_bits: model.threshold_bits(),
            validated_links: mask.count(),
            total_pairs: n * (n - 1),
        });
        matrices.push(c);
    }

    writer.write("link_counts.csv", link_rows.as_bytes())?;
    writer.write("magnitudes.csv", magnitude_rows.as_bytes())?;
    if pm.sectors.is_some() {
        writer.write("sector_stats.csv", sector_rows.as_bytes())?;
    }

    // cross-lag Pearson correlation of TE values
    if matrices.len() > 1 {
        let mut csv = String::from("lag_minutes");
        for &l in &config.lags {
            write!(csv, ",{l}").unwrap();
        }
        csv.push('\n');
        for (i, &li) in config.lags.iter().enumerate() {
            write!(csv, "{li}").unwrap();
            for j in 0..matrices.len() {
                let r = if i == j {
                    1.0
                } else {
                    cross_lag_correlation(&matrices[i], &matrices[j])?
                };
                write!(csv, ",{r}").unwrap();
            }
            csv.push('\n');
        }
        writer.write("cross_lag_correlation.csv", csv.as_bytes())?;
    }

    let manifest = Manifest {
        config: config.clone(),
        n_instruments: n,
        alpha,
        lags: summaries,
        wall_time_secs: started.elapsed().as_secs_f64(),
        files: writer.hashes.clone(),
    };
    let manifest_bytes = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(config.out.join("manifest.json"), manifest_bytes)?;
    Ok(manifest)
}

/// Monte Carlo calibration of the Gamma null: empirical rejection rates for
/// MI (unconditioned) and CMI (conditioned) on independent uniform data.
///
/// `mi`/`cmi` calibrate the relative-frequency estimates, which is what the
/// analytic null describes and what the gamma validator thresholds. The
/// `sg_*` reports run the same trials through the Schurmann-Grassberger
/// estimator to quantify its positive bias under the null: its fitted
/// degrees of freedom land near twice the analytic value, so thresholding
/// SG values directly would badly over-reject.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationRun {
    pub alphabet_size: usize,
    pub sample_size: usize,
    pub p: f64,
    pub trials: usize,
    pub mi: CalibrationReport,
    pub cmi: CalibrationReport,
    pub sg_mi: CalibrationReport,
    pub sg_cmi: CalibrationReport,
}

pub fn calibrate_gamma_null(
    alphabet_size: usize,
    sample_size: usize,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<CalibrationRun> {
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    if alphabet_size < 2 {
        return Err(Error::InvalidAlphabet(alphabet_size));
    }
    use rayon::prelude::*;
    let sample = |rng: &mut ChaCha8Rng| -> DiscreteSeries {
        DiscreteSeries::new(
            (0..sample_size)
                .map(|_| rng.gen_range(0..alphabet_size) as u8)
                .collect(),
            alphabet_size,
        )
        .unwrap()
    };
    let stats: Vec<[f64; 4]> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let z = sample(&mut rng);
            [
                freq_mutual_information(&x, &y).unwrap(),
                freq_conditional_mutual_information(&x, &y, &z).unwrap(),
                mutual_information(&x, &y).unwrap(),
                conditional_mutual_information(&x, &y, &z).unwrap(),
            ]
        })
        .collect();
    let column = |k: usize| -> Vec<f64> { stats.iter().map(|s| s[k]).collect() };
    let d_mi = dof(alphabet_size, alphabet_size, None)?;
    let d_cmi = dof(alphabet_size, alphabet_size, Some(alphabet_size))?;
    Ok(CalibrationRun {
        alphabet_size,
        sample_size,
        p,
        trials,
        mi: calibrate(&column(0), d_mi, sample_size, p)?,
        cmi: calibrate(&column(1), d_cmi, sample_size, p)?,
        sg_mi: calibrate(&column(2), d_mi, sample_size, p)?,
        sg_cmi: calibrate(&column(3), d_cmi, sample_size, p)?,
    })
}

/// Write a synthetic dataset: prices CSV, round-robin sector CSV, and the
/// ground-truth edge list for scoring recovered networks.
pub fn write_synth_dataset(spec: &SynthSpec, out_dir: &Path, n_sectors: usize) -> Result<()> {
    let pm = gen_prices(spec)?;
    std::fs::create_dir_all(out_dir)?;

    let mut prices_csv = String::from("timestamp");
    for t in &pm.tickers {
        write!(prices_csv, ",{t}").unwrap();
    }
    prices_csv.push('\n');
    for row in 0..pm.n_rows() {
        write!(prices_csv, "{}", pm.timestamps[row]).unwrap();
        for col in &pm.columns {
            write!(prices_csv, ",{:.12e}", col[row]).unwrap();
        }
        prices_csv.push('\n');
    }
    std::fs::write(out_dir.join("prices.csv"), prices_csv)?;

    let n_sectors = n_sectors.max(1);
    let mut sectors_csv = String::from("ticker,sector\n");
    for (i, t) in pm.tickers.iter().enumerate() {
        writeln!(sectors_csv, "{t},SEC{:02}", i % n_sectors).unwrap();
    }
    std::fs::write(out_dir.join("sectors.csv"), sectors_csv)?;

    let mut truth = String::from("source,target,lag,strength,kind\n");
    for c in &spec.couplings {
        let kind = match c.kind {
            crate::synth::CouplingKind::Linear => "linear",
            crate::synth::CouplingKind::Quadratic => "quadratic",
            crate::synth::CouplingKind::Threshold => "threshold",
        };
        writeln!(
            truth,
            "{},{},{},{},{kind}",
            pm.tickers[c.source],
            pm.tickers[c.target],
            c.lag,
            c.strength
        )
        .unwrap();
    }
    std::fs::write(out_dir.join("ground_truth.csv"), truth)?;
    Ok(())
}
