use grpo_scaffold::checkpoint::write_checkpoint;
use grpo_scaffold::harness::{train, write_events, TrainConfig, TrainOutcome, Variant};
use grpo_scaffold::problem::{generate_bank, DifficultyMix, ProblemBank};

fn bytes(outcome: &TrainOutcome) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let mut metrics = Vec::new();
    outcome.log.write_csv(&mut metrics).unwrap();
    let mut ckpt = Vec::new();
    write_checkpoint(&outcome.params, &outcome.optimizer, &mut ckpt).unwrap();
    let mut events = Vec::new();
    write_events(&outcome.events, &mut events).unwrap();
    (metrics, ckpt, events)
}

fn run_with_threads(threads: usize, config: &TrainConfig, bank: &ProblemBank) -> TrainOutcome {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| train(config, bank).unwrap())
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let bank = generate_bank(21, 60, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25).unwrap()).unwrap();
    for variant in [Variant::VanillaGrpo, Variant::ScafFull, Variant::NoPhase1] {
        let config = TrainConfig {
            total_steps: 40,
            ..TrainConfig::default()
        }
        .with_variant(variant);
        let single = bytes(&run_with_threads(1, &config, &bank));
        let many = bytes(&run_with_threads(6, &config, &bank));
        assert!(
            single == many,
            "{variant}: outputs differ between 1 and 6 threads"
        );
    }
}

#[test]
fn different_rollout_seeds_give_different_runs() {
    let bank = generate_bank(21, 60, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25).unwrap()).unwrap();
    let a = TrainConfig {
        total_steps: 20,
        ..TrainConfig::default()
    };
    let b = TrainConfig {
        rollout_seed: 99,
        ..a.clone()
    };
    assert_ne!(
        bytes(&train(&a, &bank).unwrap()).1,
        bytes(&train(&b, &bank).unwrap()).1
    );
}
