//! Shuffle-surrogate significance testing as the model-free alternative to
//! the analytic Gamma null: the source column is permuted many times,
//! destroying any temporal relation to the target while keeping the
//! marginal distribution, and the observed transfer entropy is ranked
//! against the surrogate values.
//!
//! Run with `cargo run --release --example permutation_surrogates`.

use tenet::ingest::{discretize_quantiles, DiscreteSeries};
use tenet::permutation_pvalue;
use tenet::synth::{gen_returns, Coupling, CouplingKind, SynthSpec};

fn lag_split(series: &DiscreteSeries, lag: usize) -> (DiscreteSeries, DiscreteSeries) {
    let n = series.len();
    let past = DiscreteSeries::new(series.symbols[..n - lag].to_vec(), series.alphabet_size);
    let future = DiscreteSeries::new(series.symbols[lag..].to_vec(), series.alphabet_size);
    (past.unwrap(), future.unwrap())
}

fn main() -> tenet::Result<()> {
    let spec = SynthSpec {
        n_series: 3,
        length: 3000,
        couplings: vec![Coupling {
            source: 0,
            target: 1,
            lag: 2,
            strength: 0.4,
            kind: CouplingKind::Linear,
        }],
        noise_std: 1.0,
        seed: 21,
    };
    let rm = gen_returns(&spec)?;
    let cols: Vec<DiscreteSeries> = rm
        .columns
        .iter()
        .map(|c| discretize_quantiles(c, 4))
        .collect::<tenet::Result<_>>()?;

    for (m, t, label) in [
        (0usize, 1usize, "planted coupling"),
        (1, 0, "reverse direction"),
        (0, 2, "independent pair"),
    ] {
        let (source, _) = lag_split(&cols[m], 2);
        let (target_past, target_future) = lag_split(&cols[t], 2);
        let p = permutation_pvalue(&source, &target_future, &target_past, 999, 7)?;
        println!("{m} -> {t} ({label:<17}): p = {p:.4} from 999 surrogates");
    }
    println!("\np = 0.001 is the finest resolvable value at 999 surrogates;");
    println!("smaller corrected levels need proportionally more surrogates.");
    Ok(())
}
