//! Generates a problem bank, reports its difficulty tiers and round-trips it
//! through the line-oriented bank file format.
//!
//! ```text
//! cargo run --example generate_bank -- [seed] [count]
//! ```

use grpo_scaffold::problem::bank_io::{read_bank, write_bank};
use grpo_scaffold::problem::{generate_bank, DifficultyMix, Tier};

fn main() -> grpo_scaffold::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(3, |s| s.parse().expect("seed"));
    let count: usize = args.next().map_or(200, |s| s.parse().expect("count"));

    let mix = DifficultyMix::new(0.25, 0.5, 0.25)?;
    let bank = generate_bank(seed, count, 8, 4, mix)?;

    let mut tiers = [0usize; 3];
    for p in &bank.problems {
        match Tier::of_beta(p.beta) {
            Some(Tier::Easy) => tiers[0] += 1,
            Some(Tier::Medium) => tiers[1] += 1,
            Some(Tier::Hard) => tiers[2] += 1,
            None => unreachable!("generated beta outside every tier"),
        }
    }
    println!("bank seed {seed}: {} problems", bank.len());
    println!("easy {}  medium {}  hard {}", tiers[0], tiers[1], tiers[2]);
    for p in bank.problems.iter().take(5) {
        println!("  #{:<3} answer {:?}  beta {:.3}", p.id, p.answer, p.beta);
    }

    let mut bytes = Vec::new();
    write_bank(&bank, &mut bytes)?;
    let reread = read_bank(bytes.as_slice(), std::path::Path::new("<memory>"))?;
    assert_eq!(reread, bank);
    println!("round trip through {} bytes: identical", bytes.len());
    Ok(())
}
