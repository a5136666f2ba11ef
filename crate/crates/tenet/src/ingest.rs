//! Price loading, log returns, quantile discretization, and lag splitting.
//!
//! Prices come in as a CSV with a `timestamp` column followed by one column
//! per ticker. Missing cells are errors, not imputation targets. Returns are
//! sampled non-overlapping every `tau` rows, discretized per column into a
//! finite alphabet by empirical quantiles, and split into the lagged
//! source/target matrices that the entropy machinery consumes.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-indexed positive prices per instrument.
#[derive(Debug, Clone)]
pub struct PriceMatrix {
    pub timestamps: Vec<String>,
    /// Column-major: one price series per ticker.
    pub columns: Vec<Vec<f64>>,
    pub tickers: Vec<String>,
    pub sectors: Option<BTreeMap<String, String>>,
}

impl PriceMatrix {
    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn n_instruments(&self) -> usize {
        self.tickers.len()
    }
}

/// Log returns sampled every `tau` price rows.
#[derive(Debug, Clone)]
pub struct ReturnMatrix {
    /// Column-major: one return series per ticker.
    pub columns: Vec<Vec<f64>>,
    pub tau: usize,
    pub tickers: Vec<String>,
}

impl ReturnMatrix {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }
}

/// A sequence of symbols over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteSeries {
    pub symbols: Vec<u8>,
    pub alphabet_size: usize,
}

impl DiscreteSeries {
    pub fn new(symbols: Vec<u8>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyInput);
        }
        if alphabet_size == 0 || alphabet_size > 256 {
            return Err(Error::InvalidAlphabet(alphabet_size));
        }
        if symbols.iter().any(|&s| s as usize >= alphabet_size) {
            return Err(Error::InvalidAlphabet(alphabet_size));
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Discretized return matrix, per-column symbols over a shared alphabet.
#[derive(Debug, Clone)]
pub struct DiscreteMatrix {
    pub columns: Vec<Vec<u8>>,
    pub alphabet_size: usize,
    pub tickers: Vec<String>,
}

impl DiscreteMatrix {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }
}

/// Aligned source/target matrices for one lag: `a` holds rows
/// `0..T-lag` (the leading side), `b` holds rows `lag..T`.
#[derive(Debug, Clone)]
pub struct LaggedPair {
    pub a: Vec<Vec<u8>>,
    pub b: Vec<Vec<u8>>,
    pub lag: usize,
    pub alphabet_size: usize,
    pub tickers: Vec<String>,
}

impl LaggedPair {
    pub fn len(&self) -> usize {
        self.a.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_instruments(&self) -> usize {
        self.a.len()
    }
}

/// Sector map entry for CSV (de)serialization.
#[derive(Debug, Serialize, Deserialize)]
struct SectorRow {
    ticker: String,
    sector: String,
}

/// Parse a price CSV (header `timestamp,TICK1,TICK2,...`) from any reader.
pub fn read_price_matrix<R: Read>(reader: R) -> Result<PriceMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 3 {
        return Err(Error::Config(
            "price CSV needs a timestamp column and at least two tickers".into(),
        ));
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    for (i, t) in tickers.iter().enumerate() {
        if tickers[..i].contains(t) {
            return Err(Error::DuplicateTicker(t.clone()));
        }
    }

    let mut timestamps = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); tickers.len()];
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let ts = record.get(0).unwrap_or("").trim();
        if ts.is_empty() {
            return Err(Error::MissingData {
                row: row_idx,
                column: "timestamp".into(),
            });
        }
        timestamps.push(ts.to_owned());
        for (col, ticker) in tickers.iter().enumerate() {
            let cell = record.get(col + 1).unwrap_or("").trim();
            if cell.is_empty() {
                return Err(Error::MissingData {
                    row: row_idx,
                    column: ticker.clone(),
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::MissingData {
                row: row_idx,
                column: ticker.clone(),
            })?;
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositivePrice {
                    row: row_idx,
                    column: ticker.clone(),
                    value,
                });
            }
            columns[col].push(value);
        }
    }
    if timestamps.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: timestamps.len(),
            tau: 1,
        });
    }
    check_monotone(&timestamps)?;

    Ok(PriceMatrix {
        timestamps,
        columns,
        tickers,
        sectors: None,
    })
}

// Timestamps that all parse as numbers compare numerically, otherwise
// lexicographically (ISO-8601 strings sort correctly that way).
fn check_monotone(timestamps: &[String]) -> Result<()> {
    let numeric: Option<Vec<f64>> = timestamps.iter().map(|t| t.parse().ok()).collect();
    match numeric {
        Some(values) => {
            for (i, w) in values.windows(2).enumerate() {
                if w[1] <= w[0] {
                    return Err(Error::NonMonotoneTimestamps(i + 1));
                }
            }
        }
        None => {
            for (i, w) in timestamps.windows(2).enumerate() {
                if w[1] <= w[0] {
                    return Err(Error::NonMonotoneTimestamps(i + 1));
                }
            }
        }
    }
    Ok(())
}

/// Load prices from a file, optionally joining a `ticker,sector` CSV.
pub fn load_price_matrix(
    prices_path: &Path,
    sectors_path: Option<&Path>,
) -> Result<PriceMatrix> {
    let file = std::fs::File::open(prices_path)?;
    let mut pm = read_price_matrix(file)?;
    if let Some(path) = sectors_path {
        let sectors = load_sectors(path)?;
        for ticker in sectors.keys() {
            if !pm.tickers.contains(ticker) {
                return Err(Error::UnknownTickerInSectorMap(ticker.clone()));
            }
        }
        pm.sectors = Some(sectors);
    }
    Ok(pm)
}

/// Read a `ticker,sector` CSV into a map.
pub fn load_sectors(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut map = BTreeMap::new();
    for row in rdr.deserialize::<SectorRow>() {
        let row = row?;
        if map.insert(row.ticker.clone(), row.sector).is_some() {
            return Err(Error::DuplicateTicker(row.ticker));
        }
    }
    Ok(map)
}

/// Log returns r_t = ln p(t) - ln p(t - tau), sampled non-overlapping at
/// t = tau, 2*tau, ...
pub fn compute_log_returns(pm: &PriceMatrix, tau: usize) -> Result<ReturnMatrix> {
    if tau == 0 {
        return Err(Error::Config("tau must be >= 1".into()));
    }
    let t = pm.n_rows();
    if t <= tau {
        return Err(Error::SeriesTooShort { len: t, tau });
    }
    let columns = pm
        .columns
        .iter()
        .map(|prices| {
            (1..)
                .map(|k| k * tau)
                .take_while(|&idx| idx < t)
                .map(|idx| prices[idx].ln() - prices[idx - tau].ln())
                .collect()
        })
        .collect();
    Ok(ReturnMatrix {
        columns,
        tau,
        tickers: pm.tickers.clone(),
    })
}

/// Discretize one series into `alphabet_size` empirical quantile bins.
///
/// Boundaries are nearest-rank quantiles at levels k/alphabet_size; a value
/// lands in the smallest bin whose boundary it does not exceed, so boundary
/// ties fall into the lower bin.
pub fn discretize_quantiles(series: &[f64], alphabet_size: usize) -> Result<DiscreteSeries> {
    if alphabet_size < 2 || alphabet_size > 256 {
        return Err(Error::InvalidAlphabet(alphabet_size));
    }
    if series.len() < alphabet_size {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            tau: alphabet_size,
        });
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in series"));
    let n = sorted.len();
    // nearest-rank: boundary_k = sorted[ceil(k*n/|chi|) - 1]
    let boundaries: Vec<f64> = (1..alphabet_size)
        .map(|k| {
            let rank = (k * n).div_ceil(alphabet_size);
            sorted[rank - 1]
        })
        .collect();
    if boundaries.first() == boundaries.last() && boundaries.len() > 1 {
        return Err(Error::DegenerateSeries);
    }
    if boundaries.len() == 1 && sorted[0] == sorted[n - 1] {
        return Err(Error::DegenerateSeries);
    }
    let symbols = series
        .iter()
        .map(|&v| {
            boundaries
                .iter()
                .position(|&b| v <= b)
                .unwrap_or(alphabet_size - 1) as u8
        })
        .collect();
    DiscreteSeries::new(symbols, alphabet_size)
}

/// Discretize every column of a return matrix independently.
pub fn discretize_matrix(rm: &ReturnMatrix, alphabet_size: usize) -> Result<DiscreteMatrix> {
    let columns = rm
        .columns
        .iter()
        .map(|col| discretize_quantiles(col, alphabet_size).map(|d| d.symbols))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteMatrix {
        columns,
        alphabet_size,
        tickers: rm.tickers.clone(),
    })
}

/// Split a discretized matrix into the lagged pair: `a` drops the last
/// `lag` rows, `b` drops the first `lag` rows.
pub fn split_lagged(dm: &DiscreteMatrix, lag: usize) -> Result<LaggedPair> {
    let t = dm.n_rows();
    if lag >= t {
        return Err(Error::LagTooLarge { lag, len: t });
    }
    let a = dm.columns.iter().map(|c| c[..t - lag].to_vec()).collect();
    let b = dm.columns.iter().map(|c| c[lag..].to_vec()).collect();
    Ok(LaggedPair {
        a,
        b,
        lag,
        alphabet_size: dm.alphabet_size,
        tickers: dm.tickers.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pm_from_csv(text: &str) -> Result<PriceMatrix> {
        read_price_matrix(text.as_bytes())
    }

    #[test]
    fn loads_small_csv() {
        let pm = pm_from_csv(
            "timestamp,AAA,BBB,CCC\n1,10,20,30\n2,11,21,31\n3,12,22,32\n4,13,23,33\n5,14,24,34\n",
        )
        .unwrap();
        assert_eq!(pm.n_rows(), 5);
        assert_eq!(pm.tickers, vec!["AAA", "BBB", "CCC"]);
        assert_eq!(pm.columns[2][4], 34.0);
    }

    #[test]
    fn rejects_zero_price() {
        let err = pm_from_csv("timestamp,A,B\n1,10,20\n2,0.0,21\n").unwrap_err();
        assert!(matches!(err, Error::NonPositivePrice { row: 1, .. }));
    }

    #[test]
    fn rejects_missing_cell() {
        let err = pm_from_csv("timestamp,A,B\n1,10,20\n2,,21\n").unwrap_err();
        assert!(matches!(err, Error::MissingData { .. }));
    }

    #[test]
    fn rejects_duplicate_ticker() {
        let err = pm_from_csv("timestamp,A,A\n1,10,20\n2,11,21\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateTicker(_)));
    }

    #[test]
    fn rejects_non_monotone_timestamps() {
        let err = pm_from_csv("timestamp,A,B\n2,10,20\n1,11,21\n").unwrap_err();
        assert!(matches!(err, Error::NonMonotoneTimestamps(1)));
    }

    #[test]
    fn numeric_timestamps_compare_numerically() {
        // "10" < "9" lexicographically; must still be accepted.
        let pm = pm_from_csv("timestamp,A,B\n9,10,20\n10,11,21\n").unwrap();
        assert_eq!(pm.n_rows(), 2);
    }

    #[test]
    fn flat_prices_give_zero_return() {
        let pm = pm_from_csv("timestamp,A,B\n1,100,50\n2,100,50\n").unwrap();
        let rm = compute_log_returns(&pm, 1).unwrap();
        assert_abs_diff_eq!(rm.columns[0][0], 0.0);
        assert_abs_diff_eq!(rm.columns[1][0], 0.0);
    }

    #[test]
    fn unit_log_return() {
        let e = std::f64::consts::E;
        let pm = pm_from_csv(&format!("timestamp,A,B\n1,1,1\n2,{e},{e}\n")).unwrap();
        let rm = compute_log_returns(&pm, 1).unwrap();
        assert_abs_diff_eq!(rm.columns[0][0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tau_two_sampling_points() {
        let rows: String = (0..10).map(|i| format!("{i},{},{}\n", 100 + i, 200 + i)).collect();
        let pm = pm_from_csv(&format!("timestamp,A,B\n{rows}")).unwrap();
        let rm = compute_log_returns(&pm, 2).unwrap();
        // t = 2, 4, 6, 8
        assert_eq!(rm.n_rows(), 4);
        assert_abs_diff_eq!(
            rm.columns[0][0],
            (102.0_f64).ln() - (100.0_f64).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn returns_too_short() {
        let pm = pm_from_csv("timestamp,A,B\n1,10,20\n2,11,21\n").unwrap();
        assert!(matches!(
            compute_log_returns(&pm, 2),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn quartile_example() {
        let s = discretize_quantiles(&[1., 2., 3., 4., 5., 6., 7., 8.], 4).unwrap();
        assert_eq!(s.symbols, vec![0, 0, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn constant_series_is_degenerate() {
        assert!(matches!(
            discretize_quantiles(&[5.0; 5], 4),
            Err(Error::DegenerateSeries)
        ));
    }

    #[test]
    fn balanced_bins_for_distinct_values() {
        let series: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let s = discretize_quantiles(&series, 4).unwrap();
        for bin in 0..4u8 {
            assert_eq!(s.symbols.iter().filter(|&&x| x == bin).count(), 25);
        }
    }

    #[test]
    fn split_lagged_rows() {
        let dm = DiscreteMatrix {
            columns: vec![vec![0, 1, 2, 3, 0]],
            alphabet_size: 4,
            tickers: vec!["A".into()],
        };
        let lp = split_lagged(&dm, 2).unwrap();
        assert_eq!(lp.a[0], vec![0, 1, 2]);
        assert_eq!(lp.b[0], vec![2, 3, 0]);

        let id = split_lagged(&dm, 0).unwrap();
        assert_eq!(id.a[0], id.b[0]);
        assert_eq!(id.a[0], dm.columns[0]);

        assert!(matches!(
            split_lagged(&dm, 5),
            Err(Error::LagTooLarge { .. })
        ));
    }

    #[test]
    fn monotone_transform_invariance() {
        let series: Vec<f64> = vec![0.3, -1.2, 0.7, 0.1, -0.4, 2.5, -0.9, 1.1];
        let base = discretize_quantiles(&series, 4).unwrap();
        let mapped: Vec<f64> = series.iter().map(|&v| v.exp()).collect();
        let transformed = discretize_quantiles(&mapped, 4).unwrap();
        assert_eq!(base.symbols, transformed.symbols);
    }
}
