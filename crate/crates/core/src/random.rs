//! Seeded random models with small rational probabilities and rewards.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index;
use rand::Rng;

use crate::exact::to_f64_model;
use crate::mdp::{ActionEntry, Mdp};

#[derive(Debug, Clone)]
pub struct RandomModelSpec {
    pub max_states: usize,
    pub max_actions: usize,
    pub max_successors: usize,
    /// Rewards are drawn from `{0, 1/d, ..., max_reward}` with `d` one of `reward_denominators`.
    pub max_reward: u32,
    pub reward_denominators: Vec<u32>,
    /// Each distribution splits `1` into parts of a denominator drawn from this list.
    pub denominators: Vec<u32>,
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        Self {
            max_states: 8,
            max_actions: 3,
            max_successors: 3,
            max_reward: 10,
            reward_denominators: vec![1, 2, 4],
            denominators: vec![2, 3, 4, 5, 10],
        }
    }
}

fn rational(n: u32, d: u32) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Random exact model. Every state has at least one action and every
/// distribution sums to exactly one.
pub fn random_exact_mdp<R: Rng + ?Sized>(rng: &mut R, spec: &RandomModelSpec) -> Mdp<BigRational> {
    let n = rng.random_range(1..=spec.max_states.max(1));
    let actions = (0..n)
        .map(|_| {
            let count = rng.random_range(1..=spec.max_actions.max(1));
            (0..count)
                .map(|a| {
                    let rd = spec.reward_denominators[rng.random_range(0..spec.reward_denominators.len())];
                    let reward = rational(rng.random_range(0..=spec.max_reward * rd), rd);

                    let d = spec.denominators[rng.random_range(0..spec.denominators.len())];
                    let k = rng
                        .random_range(1..=spec.max_successors.max(1))
                        .min(n)
                        .min(d as usize);
                    let mut targets = index::sample(rng, n, k).into_vec();
                    targets.sort_unstable();
                    // k positive parts summing to d
                    let mut cuts: Vec<u32> = index::sample(rng, d as usize - 1, k - 1)
                        .into_iter()
                        .map(|c| c as u32 + 1)
                        .collect();
                    cuts.sort_unstable();
                    cuts.push(d);
                    let mut prev = 0;
                    let successors = targets
                        .into_iter()
                        .zip(cuts)
                        .map(|(t, c)| {
                            let p = rational(c - prev, d);
                            prev = c;
                            (t, p)
                        })
                        .collect();
                    ActionEntry::new(format!("a{a}"), reward, successors)
                })
                .collect()
        })
        .collect();
    Mdp::new(rng.random_range(0..n), actions)
}

/// Random model as `f64`; see [`random_model_pair`] for the exact twin.
pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, spec: &RandomModelSpec) -> Mdp<f64> {
    to_f64_model(&random_exact_mdp(rng, spec))
}

pub fn random_model_pair<R: Rng + ?Sized>(rng: &mut R, spec: &RandomModelSpec) -> (Mdp<f64>, Mdp<BigRational>) {
    let exact = random_exact_mdp(rng, spec);
    (to_f64_model(&exact), exact)
}
