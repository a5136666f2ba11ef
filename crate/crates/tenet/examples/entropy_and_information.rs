//! Core information-theoretic quantities on discretized series: the
//! Schurmann-Grassberger entropy estimate next to the plug-in estimate,
//! then mutual information, conditional mutual information, and transfer
//! entropy on a pair with a known lag-1 dependence.
//!
//! Run with `cargo run --example entropy_and_information`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tenet::infocore::{freq_entropy, sg_entropy};
use tenet::ingest::DiscreteSeries;
use tenet::{build_counts, conditional_mutual_information, mutual_information, transfer_entropy};

fn uniform(rng: &mut ChaCha8Rng, len: usize, chi: usize) -> DiscreteSeries {
    DiscreteSeries::new((0..len).map(|_| rng.gen_range(0..chi) as u8).collect(), chi).unwrap()
}

fn main() -> tenet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // Entropy of a uniform 4-symbol series approaches 2 bits; the Bayesian
    // estimate converges to the plug-in one as the sample grows.
    for len in [50usize, 500, 50_000] {
        let x = uniform(&mut rng, len, 4);
        let counts = build_counts(&[&x])?;
        println!(
            "m = {len:>6}: H_sg = {:.4} bits, H_freq = {:.4} bits",
            sg_entropy(&counts)?,
            freq_entropy(&counts)?
        );
    }

    // y copies x through a noisy channel: flip each symbol with prob 0.25
    let x = uniform(&mut rng, 20_000, 4);
    let y = DiscreteSeries::new(
        x.symbols
            .iter()
            .map(|&s| {
                if rng.gen_bool(0.25) {
                    rng.gen_range(0..4u8)
                } else {
                    s
                }
            })
            .collect(),
        4,
    )?;
    let z = uniform(&mut rng, 20_000, 4);
    println!();
    println!("I(x; y)            = {:.4} bits (noisy copy)", mutual_information(&x, &y)?);
    println!("I(x; z)            = {:.4} bits (independent)", mutual_information(&x, &z)?);
    println!(
        "I(x; y | z)        = {:.4} bits (independent condition changes nothing)",
        conditional_mutual_information(&x, &y, &z)?
    );
    println!(
        "I(x; y | y)        = {:.4} bits (conditioning on y removes everything)",
        conditional_mutual_information(&x, &y, &y)?
    );

    // transfer entropy: x's past explains y's future beyond y's own past
    let source = DiscreteSeries::new(x.symbols[..x.len() - 1].to_vec(), 4)?;
    let future = DiscreteSeries::new(y.symbols[1..].to_vec(), 4)?;
    let past = DiscreteSeries::new(y.symbols[..y.len() - 1].to_vec(), 4)?;
    println!(
        "T(x -> y at lag 1) = {:.4} bits",
        transfer_entropy(&source, &future, &past)?
    );
    Ok(())
}
