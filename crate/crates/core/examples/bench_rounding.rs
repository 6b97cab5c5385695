//! Rough timing probe for the heavy acceptance loops.
use apportion::dependent_rounding::PipageState;
use apportion::methods::{sample_finite_seat_sequence, SeatSequenceSampler};
use apportion::model::PopulationProfile;
use apportion::apps::{run_sortition, SortitionConfig};
use std::time::Instant;

fn main() {
    let p = PopulationProfile::new(vec![3, 3, 2]).unwrap();
    let m = 20_000u64;
    let start = Instant::now();
    let mut acc = 0u64;
    for seed in 0..m {
        let seq = sample_finite_seat_sequence(&p, seed);
        acc += u64::from(seq.base()[0]);
    }
    let dt = start.elapsed();
    println!(
        "one-shot P=8 n=3: {m} samples in {dt:?} ({:.1} us/sample, acc={acc})",
        dt.as_secs_f64() * 1e6 / m as f64
    );

    let sampler = SeatSequenceSampler::new(&p);
    let mut state = PipageState::new(sampler.pipage());
    let m = 100_000u64;
    let start = Instant::now();
    let mut acc = 0u64;
    for seed in 0..m {
        let entries = sampler.sample_with(&mut state, seed);
        acc += u64::from(entries[0]);
    }
    let dt = start.elapsed();
    println!(
        "cached-sampler P=8 n=3: {m} samples in {dt:?} ({:.2} us/sample, acc={acc})",
        dt.as_secs_f64() * 1e6 / m as f64
    );

    let config = SortitionConfig::uniform(27, 15, 30);
    let start = Instant::now();
    let runs = 50u64;
    for seed in 0..runs {
        let run = run_sortition(&config, seed).unwrap();
        assert!(run.audit.window_bound_holds);
    }
    let dt = start.elapsed();
    println!(
        "sortition 27/15 T=30: {runs} runs in {dt:?} ({:.2} ms/run)",
        dt.as_secs_f64() * 1e3 / runs as f64
    );
}
