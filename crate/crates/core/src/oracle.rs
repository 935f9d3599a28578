//! Exact reference solver over big rationals.
//!
//! Gains and reachability probabilities are maximized by brute force over
//! positional strategies, each evaluated by exact linear solves. Only practical
//! for small models; the test suites use it as ground truth.

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact::{to_exact, ExactError};
use crate::graph::tarjan;
use crate::mdp::{MarkovChain, Mdp, ModelError, PositionalStrategy, StateId, Weight};
use crate::mec::Mec;

pub const DEFAULT_STRATEGY_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("strategy space of {product} positional strategies exceeds the limit of {limit}")]
    StrategyLimit { product: String, limit: u64 },
    #[error("target state {0} out of range")]
    TargetOutOfRange(StateId),
    #[error("initial state {0} out of range")]
    InitialOutOfRange(StateId),
    #[error("linear system is singular")]
    Singular,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

type Q = BigRational;

/// Solves `a·x = b` by Gaussian elimination; `None` if `a` is singular.
pub fn solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            let (top, bottom) = a.split_at_mut(r);
            for (c, x) in top[col].iter().enumerate().skip(col) {
                if !x.is_zero() {
                    bottom[0][c] -= &factor * x;
                }
            }
            let delta = &factor * &b[col];
            b[r] -= delta;
        }
    }
    let mut x = vec![Q::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            if !a[r][c].is_zero() {
                acc -= &a[r][c] * &x[c];
            }
        }
        x[r] = acc / &a[r][r];
    }
    Some(x)
}

/// Recurrent classes of a chain with their stationary distributions and the
/// probability of ending up in each class.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainAnalysis {
    /// Bottom SCCs, each sorted, ordered by smallest state.
    pub classes: Vec<Vec<StateId>>,
    /// `stationary[c][i]` belongs to `classes[c][i]`.
    pub stationary: Vec<Vec<Q>>,
    /// `absorption[s][c]`: probability that a run from `s` eventually stays in class `c`.
    pub absorption: Vec<Vec<Q>>,
    class_of: Vec<Option<usize>>,
}

impl ChainAnalysis {
    pub fn new(chain: &MarkovChain<Q>) -> Result<Self, OracleError> {
        let n = chain.num_states();
        let adjacency: Vec<Vec<usize>> = chain
            .transitions
            .iter()
            .map(|d| d.iter().map(|&(t, _)| t).collect())
            .collect();
        let sccs = tarjan(&adjacency);
        let mut bottom = vec![true; sccs.count];
        for (s, succ) in adjacency.iter().enumerate() {
            if succ.iter().any(|&t| sccs.component[t] != sccs.component[s]) {
                bottom[sccs.component[s]] = false;
            }
        }
        let mut classes: Vec<Vec<StateId>> = sccs
            .members()
            .into_iter()
            .enumerate()
            .filter(|(c, _)| bottom[*c])
            .map(|(_, m)| m)
            .collect();
        classes.sort_by_key(|c| c[0]);
        let mut class_of = vec![None; n];
        for (c, members) in classes.iter().enumerate() {
            for &s in members {
                class_of[s] = Some(c);
            }
        }

        let stationary = classes
            .iter()
            .map(|members| stationary_distribution(chain, members))
            .collect::<Result<Vec<_>, _>>()?;

        let transient: Vec<StateId> = (0..n).filter(|&s| class_of[s].is_none()).collect();
        let mut local = vec![usize::MAX; n];
        for (i, &s) in transient.iter().enumerate() {
            local[s] = i;
        }
        let mut absorption = vec![vec![Q::zero(); classes.len()]; n];
        for s in 0..n {
            if let Some(c) = class_of[s] {
                absorption[s][c] = Q::one();
            }
        }
        if !transient.is_empty() {
            let base = identity_minus_transient(chain, &transient, &local);
            for c in 0..classes.len() {
                let b: Vec<Q> = transient
                    .iter()
                    .map(|&s| {
                        chain.transitions[s]
                            .iter()
                            .filter(|&&(t, _)| class_of[t] == Some(c))
                            .map(|(_, p)| p.clone())
                            .sum()
                    })
                    .collect();
                let x = solve(base.clone(), b).ok_or(OracleError::Singular)?;
                for (i, &s) in transient.iter().enumerate() {
                    absorption[s][c] = x[i].clone();
                }
            }
        }
        Ok(Self {
            classes,
            stationary,
            absorption,
            class_of,
        })
    }

    /// Class of a recurrent state.
    pub fn class_of(&self, s: StateId) -> Option<usize> {
        self.class_of[s]
    }

    /// Long-run average reward inside class `c`.
    pub fn class_gain(&self, chain: &MarkovChain<Q>, c: usize) -> Q {
        self.classes[c]
            .iter()
            .zip(&self.stationary[c])
            .map(|(&s, pi)| pi * &chain.rewards[s])
            .sum()
    }

    /// `Σ_c P[end in c] · gain(c)` from `init`.
    pub fn gain_from(&self, chain: &MarkovChain<Q>, init: StateId) -> Q {
        (0..self.classes.len())
            .map(|c| &self.absorption[init][c] * self.class_gain(chain, c))
            .sum()
    }
}

fn identity_minus_transient(chain: &MarkovChain<Q>, transient: &[StateId], local: &[usize]) -> Vec<Vec<Q>> {
    let m = transient.len();
    let mut a = vec![vec![Q::zero(); m]; m];
    for (i, &s) in transient.iter().enumerate() {
        a[i][i] = Q::one();
        for (t, p) in &chain.transitions[s] {
            if local[*t] != usize::MAX {
                a[i][local[*t]] -= p;
            }
        }
    }
    a
}

fn stationary_distribution(chain: &MarkovChain<Q>, members: &[StateId]) -> Result<Vec<Q>, OracleError> {
    let m = members.len();
    let index = |s: StateId| members.binary_search(&s).ok();
    // Rows 0..m-1: balance equations for states 1..m; last row: normalization.
    let mut a = vec![vec![Q::zero(); m]; m];
    let mut b = vec![Q::zero(); m];
    for (i, &s) in members.iter().enumerate() {
        for (t, p) in &chain.transitions[s] {
            let j = index(*t).expect("bottom SCC is closed");
            if j > 0 {
                a[j - 1][i] += p;
            }
        }
    }
    for j in 1..m {
        a[j - 1][j] -= Q::one();
    }
    for x in a[m - 1].iter_mut() {
        *x = Q::one();
    }
    b[m - 1] = Q::one();
    solve(a, b).ok_or(OracleError::Singular)
}

/// Exact gain of `init` in a rational Markov chain.
pub fn chain_gain(chain: &MarkovChain<Q>, init: StateId) -> Result<Q, OracleError> {
    let analysis = ChainAnalysis::new(chain)?;
    let n = chain.num_states();
    if init >= n {
        return Err(OracleError::InitialOutOfRange(init));
    }
    if let Some(c) = analysis.class_of(init) {
        return Ok(analysis.class_gain(chain, c));
    }
    // h(s) = Σ p·h(s') on transient states, class gains on recurrent ones.
    let gains: Vec<Q> = (0..analysis.classes.len()).map(|c| analysis.class_gain(chain, c)).collect();
    let transient: Vec<StateId> = (0..n).filter(|&s| analysis.class_of(s).is_none()).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &s) in transient.iter().enumerate() {
        local[s] = i;
    }
    let a = identity_minus_transient(chain, &transient, &local);
    let b: Vec<Q> = transient
        .iter()
        .map(|&s| {
            chain.transitions[s]
                .iter()
                .filter_map(|(t, p)| analysis.class_of(*t).map(|c| p * &gains[c]))
                .sum()
        })
        .collect();
    let h = solve(a, b).ok_or(OracleError::Singular)?;
    Ok(h[local[init]].clone())
}

fn check_limit<W: Weight>(mdp: &Mdp<W>, limit: u64) -> Result<(), OracleError> {
    let mut product: u128 = 1;
    for s in 0..mdp.num_states() {
        product = product.saturating_mul(mdp.actions(s).len().max(1) as u128);
    }
    if product > limit as u128 {
        return Err(OracleError::StrategyLimit {
            product: if product == u128::MAX {
                "more than 2^128".into()
            } else {
                product.to_string()
            },
            limit,
        });
    }
    Ok(())
}

/// Receives the chosen action per state (`None` off the reachable part) and the
/// reachable states.
type StrategyVisitor<'a> = dyn FnMut(&[Option<usize>], &[StateId]) -> Result<(), OracleError> + 'a;

/// Calls `visit` once for every assignment of actions to the states reachable
/// from `init` under that assignment. States in `stop` are not expanded.
fn for_each_reachable_strategy<W: Weight>(
    mdp: &Mdp<W>,
    stop: &[bool],
    visit: &mut StrategyVisitor,
) -> Result<(), OracleError> {
    fn rec<W: Weight>(
        mdp: &Mdp<W>,
        stop: &[bool],
        choices: &mut Vec<Option<usize>>,
        visit: &mut StrategyVisitor,
    ) -> Result<(), OracleError> {
        let n = mdp.num_states();
        let mut seen = vec![false; n];
        let mut order = vec![mdp.initial()];
        seen[mdp.initial()] = true;
        let mut undecided = None;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            i += 1;
            if stop[s] {
                continue;
            }
            match choices[s] {
                Some(a) => {
                    for t in mdp.action(s, a).successor_states() {
                        if !seen[t] {
                            seen[t] = true;
                            order.push(t);
                        }
                    }
                }
                None => {
                    undecided = Some(undecided.map_or(s, |u: StateId| u.min(s)));
                }
            }
        }
        match undecided {
            None => {
                order.sort_unstable();
                visit(choices, &order)
            }
            Some(s) => {
                for a in 0..mdp.actions(s).len() {
                    choices[s] = Some(a);
                    rec(mdp, stop, choices, visit)?;
                }
                choices[s] = None;
                Ok(())
            }
        }
    }
    let mut choices = vec![None; mdp.num_states()];
    rec(mdp, stop, &mut choices, visit)
}

/// Markov chain on `states` (sorted) induced by `choices`; states in `stop` become absorbing.
fn sub_chain(mdp: &Mdp<Q>, choices: &[Option<usize>], states: &[StateId], stop: &[bool]) -> MarkovChain<Q> {
    let local = |s: StateId| states.binary_search(&s).expect("closed under choices");
    let mut rewards = Vec::with_capacity(states.len());
    let mut transitions = Vec::with_capacity(states.len());
    for (i, &s) in states.iter().enumerate() {
        if stop[s] {
            rewards.push(Q::zero());
            transitions.push(vec![(i, Q::one())]);
            continue;
        }
        let e = mdp.action(s, choices[s].expect("reachable states are decided"));
        rewards.push(e.reward.clone());
        transitions.push(e.successors.iter().map(|(t, p)| (local(*t), p.clone())).collect());
    }
    MarkovChain { rewards, transitions }
}

fn validated(mdp: &Mdp<Q>) -> Result<(), OracleError> {
    let report = mdp.validate();
    if report.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Invalid(report).into())
    }
}

/// Optimal gain of the initial state, maximized over positional strategies.
pub fn exact_gain(mdp: &Mdp<Q>, limit: u64) -> Result<Q, OracleError> {
    validated(mdp)?;
    check_limit(mdp, limit)?;
    let stop = vec![false; mdp.num_states()];
    let mut best: Option<Q> = None;
    for_each_reachable_strategy(mdp, &stop, &mut |choices, states| {
        let chain = sub_chain(mdp, choices, states, &stop);
        let init = states.binary_search(&mdp.initial()).expect("init is reachable");
        let g = chain_gain(&chain, init)?;
        if best.as_ref().is_none_or(|b| g > *b) {
            best = Some(g);
        }
        Ok(())
    })?;
    Ok(best.expect("at least one strategy"))
}

/// Same optimum as [`exact_gain`], computed as `Σ_C P[absorbed in C]·gain(C)`
/// over the recurrent classes of each induced chain.
pub fn exact_gain_by_classes(mdp: &Mdp<Q>, limit: u64) -> Result<Q, OracleError> {
    validated(mdp)?;
    check_limit(mdp, limit)?;
    let n = mdp.num_states();
    let counts: Vec<usize> = (0..n).map(|s| mdp.actions(s).len()).collect();
    let mut choice = vec![0usize; n];
    let mut best: Option<Q> = None;
    loop {
        let chain = mdp.induced_chain(&PositionalStrategy::new(choice.clone()))?;
        let analysis = ChainAnalysis::new(&chain)?;
        let g = analysis.gain_from(&chain, mdp.initial());
        if best.as_ref().is_none_or(|b| g > *b) {
            best = Some(g);
        }
        // lexicographic successor
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(best.expect("at least one strategy"));
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < counts[i] {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// Maximal probability of reaching `target` from the initial state.
pub fn exact_reach(mdp: &Mdp<Q>, target: &[StateId], limit: u64) -> Result<Q, OracleError> {
    validated(mdp)?;
    check_limit(mdp, limit)?;
    let n = mdp.num_states();
    let mut is_target = vec![false; n];
    for &t in target {
        if t >= n {
            return Err(OracleError::TargetOutOfRange(t));
        }
        is_target[t] = true;
    }
    let mut best = Q::zero();
    for_each_reachable_strategy(mdp, &is_target, &mut |choices, states| {
        let chain = sub_chain(mdp, choices, states, &is_target);
        let p = chain_reach(&chain, &states.iter().map(|&s| is_target[s]).collect::<Vec<_>>())?;
        let init = states.binary_search(&mdp.initial()).expect("init is reachable");
        if p[init] > best {
            best = p[init].clone();
        }
        Ok(())
    })?;
    Ok(best)
}

/// Per-state probability of reaching a target state in a chain.
pub fn chain_reach(chain: &MarkovChain<Q>, is_target: &[bool]) -> Result<Vec<Q>, OracleError> {
    let n = chain.num_states();
    // states that can reach the target, by backward search
    let mut preds = vec![Vec::new(); n];
    for (s, d) in chain.transitions.iter().enumerate() {
        for &(t, _) in d {
            preds[t].push(s);
        }
    }
    let mut can = is_target.to_vec();
    let mut stack: Vec<StateId> = (0..n).filter(|&s| is_target[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !can[s] {
                can[s] = true;
                stack.push(s);
            }
        }
    }
    let unknown: Vec<StateId> = (0..n).filter(|&s| can[s] && !is_target[s]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        local[s] = i;
    }
    let a = identity_minus_transient(chain, &unknown, &local);
    let b: Vec<Q> = unknown
        .iter()
        .map(|&s| {
            chain.transitions[s]
                .iter()
                .filter(|&&(t, _)| is_target[t])
                .map(|(_, p)| p.clone())
                .sum()
        })
        .collect();
    let x = solve(a, b).ok_or(OracleError::Singular)?;
    Ok((0..n)
        .map(|s| {
            if is_target[s] {
                Q::one()
            } else if can[s] {
                x[local[s]].clone()
            } else {
                Q::zero()
            }
        })
        .collect())
}

/// [`exact_gain`] on a floating-point model, recovering rationals first.
pub fn exact_gain_f64(mdp: &Mdp<f64>, limit: u64) -> Result<Q, OracleError> {
    exact_gain(&to_exact(mdp)?, limit)
}

/// Maximal end components by exhaustive search over state subsets.
///
/// For a fixed state set `T`, the largest candidate action set keeps every action
/// of `T` that stays inside `T`; `T` carries an end component iff that pair is one.
/// Exponential in the number of states.
pub fn brute_force_mecs<W: Weight>(mdp: &Mdp<W>) -> Vec<Mec> {
    let n = mdp.num_states();
    assert!(n <= 20, "brute-force MEC enumeration limited to 20 states");
    let mut ecs: Vec<(u32, Vec<(StateId, usize)>)> = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let inside = |s: StateId| mask & (1 << s) != 0;
        let mut actions = Vec::new();
        let mut every_state_has_action = true;
        for s in (0..n).filter(|&s| inside(s)) {
            let before = actions.len();
            for (a, e) in mdp.actions(s).iter().enumerate() {
                if e.successor_states().all(inside) {
                    actions.push((s, a));
                }
            }
            every_state_has_action &= actions.len() > before;
        }
        if !every_state_has_action {
            continue;
        }
        // strong connectivity: everything reachable from, and reaching, the first state
        let reach = |forward: bool| {
            let first = mask.trailing_zeros() as usize;
            let mut seen = 1u32 << first;
            let mut changed = true;
            while changed {
                changed = false;
                for &(s, a) in &actions {
                    for t in mdp.action(s, a).successor_states() {
                        let (from, to) = if forward { (s, t) } else { (t, s) };
                        if seen & (1 << from) != 0 && seen & (1 << to) == 0 {
                            seen |= 1 << to;
                            changed = true;
                        }
                    }
                }
            }
            seen
        };
        if reach(true) == mask && reach(false) == mask {
            ecs.push((mask, actions));
        }
    }
    let mut mecs: Vec<Mec> = ecs
        .iter()
        .filter(|(m, _)| !ecs.iter().any(|(o, _)| o != m && o & m == *m))
        .map(|(m, acts)| Mec::new((0..n).filter(|&s| m & (1 << s) != 0).collect(), acts.clone()))
        .collect();
    mecs.sort_by_key(|m| m.states()[0]);
    mecs
}
