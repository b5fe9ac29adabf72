mod common;

use common::path_oracle::{compare, random_net};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stram_core::paths::{generate_path_set, read_paths_csv, write_paths_csv};

#[test]
fn hundred_random_networks_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2023);
    let mut compared = 0;
    for g in 0..100 {
        let rn = random_net(&mut rng);
        compared += compare(&rn).unwrap_or_else(|e| panic!("network {g}: {e}"));
    }
    assert!(compared > 500, "too few reachable optima: {compared}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seeded_networks_match_enumeration(seed in any::<u64>()) {
        let rn = random_net(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(compare(&rn).is_ok(), "{:?}", compare(&rn));
    }
}

#[test]
fn toy_generation_is_deterministic_and_round_trips() {
    let fx = common::fixture("toy");
    let again = generate_path_set(&fx.inst, &fx.tree).unwrap();
    assert_eq!(fx.paths, again);
    let text = write_paths_csv(&fx.inst, &fx.paths);
    assert_eq!(read_paths_csv(&fx.inst, &text).unwrap(), fx.paths);
    for p in &fx.paths.paths {
        assert!(p.modes.len() <= fx.inst.max_modes);
        assert_ne!(p.origin, p.destination);
        assert_eq!(p.transfers.len() + 1, p.modes.len());
    }
    // Every demand pair has a unimodal path on some mode.
    for &(o, d, _, _) in fx.inst.demand.keys() {
        assert!(fx.paths.od(o, d).iter().any(|&k| fx.paths.paths[k].is_unimodal()));
    }
}

#[test]
fn path_file_errors_name_the_row() {
    let fx = common::fixture("toy");
    let err = read_paths_csv(&fx.inst, "path_id,arcs\n0,no_such_arc\n").unwrap_err().to_string();
    assert!(err.contains("paths.csv") && err.contains("row 2"), "{err}");
}
