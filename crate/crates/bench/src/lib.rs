//! Model sets shared by the benchmarks.

use meanpay_core::{fixtures, generate, GeneratorSpec, Mdp};

fn generated(spec: &str) -> (String, Mdp) {
    let spec: GeneratorSpec = spec.parse().expect("valid generator spec");
    (spec.to_string(), generate(&spec))
}

/// Communicating models, usable with SC1 on the whole model.
pub fn communicating() -> Vec<(String, Mdp)> {
    vec![generated("grid:5,5"), generated("grid:20,20")]
}

/// Multichain models for the MEC-aware solvers.
pub fn multichain() -> Vec<(String, Mdp)> {
    vec![
        ("three-mec".to_owned(), fixtures::three_mec()),
        generated("mec-chain:8,5"),
        generated("rare-branch:1000,0.001"),
    ]
}

/// Small enough for the exact oracle.
pub fn small() -> Vec<(String, Mdp)> {
    vec![("three-mec".to_owned(), fixtures::three_mec()), generated("mec-chain:3,3")]
}
