//! Maximal end-component decomposition and the quotient constructions built on it.
//!
//! Three quotients share one construction: the plain MEC quotient collapses every
//! MEC into a representative state that keeps only the MEC-leaving actions; the
//! weighted quotient adds the absorbing goal/sink states `s+`/`s-` and a `stay`
//! action per collapsed state; the bounded quotient additionally routes the gap
//! between a lower and an upper value bound into a third absorbing state `s?`.

use thiserror::Error;

use crate::graph::tarjan;
use crate::mdp::{ActionEntry, Mdp, StateId, Weight};

/// End component `(T, A)`: states sorted ascending, actions as sorted `(state, action-index)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mec {
    states: Vec<StateId>,
    actions: Vec<(StateId, usize)>,
}

impl Mec {
    pub fn new(mut states: Vec<StateId>, mut actions: Vec<(StateId, usize)>) -> Self {
        states.sort_unstable();
        states.dedup();
        actions.sort_unstable();
        actions.dedup();
        Self { states, actions }
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn actions(&self) -> &[(StateId, usize)] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains_state(&self, s: StateId) -> bool {
        self.states.binary_search(&s).is_ok()
    }

    pub fn contains_action(&self, s: StateId, a: usize) -> bool {
        self.actions.binary_search(&(s, a)).is_ok()
    }

    /// Actions of `state` that belong to the component.
    pub fn actions_of(&self, state: StateId) -> impl Iterator<Item = usize> + '_ {
        let start = self.actions.partition_point(|&(s, _)| s < state);
        self.actions[start..]
            .iter()
            .take_while(move |&&(s, _)| s == state)
            .map(|&(_, a)| a)
    }
}

/// MEC decomposition of a graph given as `graph[state][action] = successor list`.
///
/// States without actions are allowed and never belong to a MEC.
pub fn mecs_of_graph(graph: &[Vec<Vec<StateId>>]) -> Vec<Mec> {
    let n = graph.len();
    let mut allowed: Vec<Vec<bool>> = graph.iter().map(|acts| vec![true; acts.len()]).collect();
    let mut alive: Vec<bool> = graph.iter().map(|acts| !acts.is_empty()).collect();

    loop {
        // Drop actions that reach removed states, then states left without actions.
        let mut pruned = true;
        while pruned {
            pruned = false;
            for s in 0..n {
                if !alive[s] {
                    continue;
                }
                for (a, succ) in graph[s].iter().enumerate() {
                    if allowed[s][a] && succ.iter().any(|&t| !alive[t]) {
                        allowed[s][a] = false;
                    }
                }
                if !allowed[s].iter().any(|&x| x) {
                    alive[s] = false;
                    pruned = true;
                }
            }
        }

        let adjacency: Vec<Vec<StateId>> = (0..n)
            .map(|s| {
                if !alive[s] {
                    return Vec::new();
                }
                let mut out: Vec<StateId> = graph[s]
                    .iter()
                    .enumerate()
                    .filter(|&(a, _)| allowed[s][a])
                    .flat_map(|(_, succ)| succ.iter().copied())
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        let sccs = tarjan(&adjacency);

        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let c = sccs.component[s];
            for (a, succ) in graph[s].iter().enumerate() {
                if allowed[s][a] && succ.iter().any(|&t| sccs.component[t] != c) {
                    allowed[s][a] = false;
                    changed = true;
                }
            }
            if !allowed[s].iter().any(|&x| x) {
                alive[s] = false;
                changed = true;
            }
        }
        if changed {
            continue;
        }

        let mut mecs: Vec<Mec> = sccs
            .members()
            .into_iter()
            .filter(|members| alive[members[0]])
            .map(|states| {
                let actions = states
                    .iter()
                    .flat_map(|&s| {
                        allowed[s]
                            .iter()
                            .enumerate()
                            .filter(|&(_, &ok)| ok)
                            .map(move |(a, _)| (s, a))
                    })
                    .collect();
                Mec::new(states, actions)
            })
            .collect();
        mecs.sort_by_key(|m| m.states[0]);
        return mecs;
    }
}

fn support_graph<W: Weight>(mdp: &Mdp<W>) -> Vec<Vec<Vec<StateId>>> {
    (0..mdp.num_states())
        .map(|s| {
            mdp.actions(s)
                .iter()
                .map(|e| e.successor_states().collect())
                .collect()
        })
        .collect()
}

/// All maximal end components, ordered by their smallest state.
pub fn compute_mecs<W: Weight>(mdp: &Mdp<W>) -> Vec<Mec> {
    mecs_of_graph(&support_graph(mdp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    StronglyConnected,
    Communicating,
    Multichain,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::StronglyConnected => "strongly-connected",
            Classification::Communicating => "communicating",
            Classification::Multichain => "multichain",
        }
    }
}

pub fn classify<W: Weight>(mdp: &Mdp<W>) -> Classification {
    classify_with(mdp, &compute_mecs(mdp))
}

pub(crate) fn classify_with<W: Weight>(mdp: &Mdp<W>, mecs: &[Mec]) -> Classification {
    match mecs {
        [only] if only.len() == mdp.num_states() && only.actions().len() == mdp.num_actions_total() => {
            Classification::StronglyConnected
        }
        [_] => Classification::Communicating,
        _ => Classification::Multichain,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientKind {
    Plain,
    Weighted,
    Bounded,
}

/// Where a quotient action comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientAction {
    /// Action `action` of original state `state`.
    Original { state: StateId, action: usize },
    /// The `stay` action of a collapsed state.
    Stay,
    /// Zero-reward self-loop materialized on a special absorbing state.
    Absorb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedState {
    pub mec: Mec,
    pub rep: StateId,
}

#[derive(Debug, Clone)]
pub struct QuotientModel<W = f64> {
    pub model: Mdp<W>,
    pub kind: QuotientKind,
    pub collapsed: Vec<CollapsedState>,
    /// Original state -> quotient state.
    pub state_map: Vec<StateId>,
    pub plus: Option<StateId>,
    pub minus: Option<StateId>,
    pub unknown: Option<StateId>,
    /// `origin[q][i]` describes quotient action `i` of quotient state `q`.
    pub origin: Vec<Vec<QuotientAction>>,
}

impl<W> QuotientModel<W> {
    pub fn is_collapsed(&self, q: StateId) -> bool {
        self.collapsed.iter().any(|c| c.rep == q)
    }

    /// Index of the `stay` action of collapsed state `q`, if any.
    pub fn stay_action(&self, q: StateId) -> Option<usize> {
        self.origin
            .get(q)?
            .iter()
            .position(|o| *o == QuotientAction::Stay)
    }
}

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error("MEC list inconsistent with model: {0}")]
    InconsistentMecs(String),
    #[error("expected {expected} values (one per collapsed state), got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("value {value} for collapsed state {index} outside [0, 1]")]
    ValueOutOfRange { index: usize, value: String },
    #[error("lower bound {lower} exceeds upper bound {upper} for collapsed state {index}")]
    BoundsInverted { index: usize, lower: String, upper: String },
}

enum StayWeights<'a, W> {
    None,
    Weighted(&'a [W]),
    Bounded(&'a [W], &'a [W]),
}

fn check_mecs<W: Weight>(mdp: &Mdp<W>, mecs: &[Mec]) -> Result<(), QuotientError> {
    let n = mdp.num_states();
    let mut owner = vec![usize::MAX; n];
    for (i, mec) in mecs.iter().enumerate() {
        if mec.is_empty() {
            return Err(QuotientError::InconsistentMecs(format!("MEC {i} is empty")));
        }
        for &s in mec.states() {
            if s >= n {
                return Err(QuotientError::InconsistentMecs(format!("state {s} out of range")));
            }
            if owner[s] != usize::MAX {
                return Err(QuotientError::InconsistentMecs(format!("state {s} in two MECs")));
            }
            owner[s] = i;
        }
        for &(s, a) in mec.actions() {
            if !mec.contains_state(s) || a >= mdp.actions(s).len() {
                return Err(QuotientError::InconsistentMecs(format!(
                    "action ({s}, {a}) does not belong to MEC {i}"
                )));
            }
            if mdp.action(s, a).successor_states().any(|t| !mec.contains_state(t)) {
                return Err(QuotientError::InconsistentMecs(format!(
                    "action ({s}, {a}) leaves MEC {i}"
                )));
            }
        }
    }
    Ok(())
}

fn push_mass<W: Weight>(dist: &mut Vec<(StateId, W)>, target: StateId, p: W) {
    if p.is_zero() {
        return;
    }
    match dist.iter_mut().find(|(t, _)| *t == target) {
        Some((_, q)) => *q = q.clone() + p,
        None => dist.push((target, p)),
    }
}

fn build_quotient<W: Weight>(
    mdp: &Mdp<W>,
    mecs: &[Mec],
    stay: StayWeights<'_, W>,
) -> Result<QuotientModel<W>, QuotientError> {
    check_mecs(mdp, mecs)?;
    let n = mdp.num_states();
    let mut owner = vec![usize::MAX; n];
    for (i, mec) in mecs.iter().enumerate() {
        for &s in mec.states() {
            owner[s] = i;
        }
    }

    let transient: Vec<StateId> = (0..n).filter(|&s| owner[s] == usize::MAX).collect();
    let num_rep = transient.len() + mecs.len();
    let mut state_map = vec![0; n];
    for (q, &s) in transient.iter().enumerate() {
        state_map[s] = q;
    }
    for (i, mec) in mecs.iter().enumerate() {
        for &s in mec.states() {
            state_map[s] = transient.len() + i;
        }
    }

    let kind = match stay {
        StayWeights::None => QuotientKind::Plain,
        StayWeights::Weighted(_) => QuotientKind::Weighted,
        StayWeights::Bounded(..) => QuotientKind::Bounded,
    };
    let (plus, minus, unknown) = match kind {
        QuotientKind::Plain => (None, None, None),
        QuotientKind::Weighted => (Some(num_rep), Some(num_rep + 1), None),
        QuotientKind::Bounded => (Some(num_rep), Some(num_rep + 1), Some(num_rep + 2)),
    };
    let keep_rewards = kind == QuotientKind::Plain;

    let lift = |s: StateId, a: usize| -> ActionEntry<W> {
        let entry = mdp.action(s, a);
        let mut dist = Vec::with_capacity(entry.successors.len());
        for (t, p) in &entry.successors {
            push_mass(&mut dist, state_map[*t], p.clone());
        }
        let reward = if keep_rewards { entry.reward.clone() } else { W::zero() };
        ActionEntry::new(format!("({s},{})", entry.label), reward, dist)
    };

    let mut actions: Vec<Vec<ActionEntry<W>>> = Vec::with_capacity(num_rep + 3);
    let mut origin: Vec<Vec<QuotientAction>> = Vec::with_capacity(num_rep + 3);
    for &s in &transient {
        actions.push((0..mdp.actions(s).len()).map(|a| lift(s, a)).collect());
        origin.push(
            (0..mdp.actions(s).len())
                .map(|a| QuotientAction::Original { state: s, action: a })
                .collect(),
        );
    }

    let mut collapsed = Vec::with_capacity(mecs.len());
    for (i, mec) in mecs.iter().enumerate() {
        let mut acts = Vec::new();
        let mut orig = Vec::new();
        for &s in mec.states() {
            for a in 0..mdp.actions(s).len() {
                if !mec.contains_action(s, a) {
                    acts.push(lift(s, a));
                    orig.push(QuotientAction::Original { state: s, action: a });
                }
            }
        }
        let stay_dist = match &stay {
            StayWeights::None => None,
            StayWeights::Weighted(f) => {
                let mut d = Vec::new();
                push_mass(&mut d, num_rep, f[i].clone());
                push_mass(&mut d, num_rep + 1, W::one() - f[i].clone());
                Some(d)
            }
            StayWeights::Bounded(l, u) => {
                let mut d = Vec::new();
                push_mass(&mut d, num_rep, l[i].clone());
                push_mass(&mut d, num_rep + 1, W::one() - u[i].clone());
                push_mass(&mut d, num_rep + 2, u[i].clone() - l[i].clone());
                Some(d)
            }
        };
        if let Some(d) = stay_dist {
            acts.push(ActionEntry::new("stay", W::zero(), d));
            orig.push(QuotientAction::Stay);
        }
        actions.push(acts);
        origin.push(orig);
        collapsed.push(CollapsedState {
            mec: mec.clone(),
            rep: transient.len() + i,
        });
    }

    for special in [plus, minus, unknown].into_iter().flatten() {
        actions.push(vec![ActionEntry::new("loop", W::zero(), vec![(special, W::one())])]);
        origin.push(vec![QuotientAction::Absorb]);
    }

    Ok(QuotientModel {
        model: Mdp::new(state_map[mdp.initial()], actions),
        kind,
        collapsed,
        state_map,
        plus,
        minus,
        unknown,
        origin,
    })
}

/// Plain MEC quotient. A collapsed state whose MEC has no leaving action ends up
/// without actions; the weighted and bounded variants always add `stay`.
pub fn mec_quotient<W: Weight>(mdp: &Mdp<W>, mecs: &[Mec]) -> Result<QuotientModel<W>, QuotientError> {
    build_quotient(mdp, mecs, StayWeights::None)
}

/// Weighted quotient: `stay` at collapsed state `i` reaches `s+` with `f[i]` and
/// `s-` with `1 - f[i]`. All quotient rewards are zero.
pub fn weighted_quotient<W: Weight>(
    mdp: &Mdp<W>,
    mecs: &[Mec],
    f: &[W],
) -> Result<QuotientModel<W>, QuotientError> {
    if f.len() != mecs.len() {
        return Err(QuotientError::WrongLength {
            expected: mecs.len(),
            got: f.len(),
        });
    }
    for (index, v) in f.iter().enumerate() {
        if !v.is_finite_value() || *v < W::zero() || *v > W::one() {
            return Err(QuotientError::ValueOutOfRange {
                index,
                value: v.to_string(),
            });
        }
    }
    build_quotient(mdp, mecs, StayWeights::Weighted(f))
}

/// Bounded quotient: `stay` reaches `s+` with `l`, `s-` with `1 - u` and `s?` with `u - l`.
pub fn bounded_quotient<W: Weight>(
    mdp: &Mdp<W>,
    mecs: &[Mec],
    lower: &[W],
    upper: &[W],
) -> Result<QuotientModel<W>, QuotientError> {
    for v in [lower, upper] {
        if v.len() != mecs.len() {
            return Err(QuotientError::WrongLength {
                expected: mecs.len(),
                got: v.len(),
            });
        }
    }
    for (index, (l, u)) in lower.iter().zip(upper).enumerate() {
        for v in [l, u] {
            if !v.is_finite_value() || *v < W::zero() || *v > W::one() {
                return Err(QuotientError::ValueOutOfRange {
                    index,
                    value: v.to_string(),
                });
            }
        }
        if l > u {
            return Err(QuotientError::BoundsInverted {
                index,
                lower: l.to_string(),
                upper: u.to_string(),
            });
        }
    }
    build_quotient(mdp, mecs, StayWeights::Bounded(lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::brute_force_mecs;
    use crate::random::{random_mdp, RandomModelSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_mec_decomposition() {
        let mecs = compute_mecs(&fixtures::three_mec());
        assert_eq!(
            mecs,
            vec![
                Mec::new(vec![1], vec![(1, 0)]),
                Mec::new(vec![2, 3], vec![(2, 0), (3, 0)]),
                Mec::new(vec![4, 5], vec![(4, 0), (5, 0)]),
            ]
        );
    }

    #[test]
    fn span_trap_is_one_mec_with_every_action() {
        let m = fixtures::span_trap(10.0);
        let mecs = compute_mecs(&m);
        assert_eq!(mecs, vec![Mec::new(vec![0, 1], vec![(0, 0), (0, 1), (1, 0), (1, 1)])]);
        assert_eq!(mecs, brute_force_mecs(&m));
        assert_eq!(classify(&m), Classification::StronglyConnected);
    }

    #[test]
    fn single_absorbing_state() {
        let m = Mdp::new(0, vec![vec![ActionEntry::new("a", 1.0, vec![(0, 1.0)])]]);
        assert_eq!(compute_mecs(&m), vec![Mec::new(vec![0], vec![(0, 0)])]);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&fixtures::three_mec()), Classification::Multichain);
        // transient feeder 0 -> MEC {1}
        let m = Mdp::new(
            0,
            vec![
                vec![ActionEntry::new("go", 0.0, vec![(1, 1.0)])],
                vec![ActionEntry::new("a", 2.0, vec![(1, 1.0)])],
            ],
        );
        assert_eq!(classify(&m), Classification::Communicating);
    }

    #[test]
    fn plain_quotient_of_three_mec() {
        let m = fixtures::three_mec();
        let mecs = compute_mecs(&m);
        let q = mec_quotient(&m, &mecs).unwrap();
        // s1 transient, then A, B, C
        assert_eq!(q.model.num_states(), 4);
        assert_eq!(q.state_map, vec![0, 1, 2, 2, 3, 3]);
        assert_eq!(q.model.initial(), 0);
        assert_eq!(q.model.action(0, 0).successors, vec![(2, 0.999), (3, 0.001)]);
        assert_eq!(q.model.action(0, 1).successors, vec![(1, 1.0)]);
        // A keeps only (s2, b) -> B with reward 5
        assert_eq!(q.model.actions(1).len(), 1);
        assert_eq!(q.origin[1][0], QuotientAction::Original { state: 1, action: 1 });
        assert_eq!(q.model.action(1, 0).successors, vec![(2, 1.0)]);
        assert_eq!(q.model.action(1, 0).reward, 5.0);
        assert!(q.model.actions(2).is_empty());
        assert!(q.model.actions(3).is_empty());
        assert!(compute_mecs(&q.model).is_empty());
    }

    #[test]
    fn plain_quotient_of_strongly_connected_model() {
        let m = fixtures::span_trap(2.0);
        let q = mec_quotient(&m, &compute_mecs(&m)).unwrap();
        assert_eq!(q.model.num_states(), 1);
        assert!(q.model.actions(0).is_empty());
    }

    #[test]
    fn quotient_with_probabilistic_exit() {
        // s2's b goes to s1 or s4 with 1/2 each
        let mut acts = fixtures::three_mec().into_actions();
        acts[1][1].successors = vec![(0, 0.5), (3, 0.5)];
        let m = Mdp::new(0, acts);
        let mecs = compute_mecs(&m);
        let q = mec_quotient(&m, &mecs).unwrap();
        assert_eq!(q.model.action(1, 0).successors, vec![(0, 0.5), (2, 0.5)]);
    }

    #[test]
    fn weighted_quotient_stay() {
        let m = fixtures::three_mec();
        let mecs = compute_mecs(&m);
        let q = weighted_quotient(&m, &mecs, &[0.2, 0.25, 0.5]).unwrap();
        let (plus, minus) = (q.plus.unwrap(), q.minus.unwrap());
        let stay = q.stay_action(1).unwrap();
        assert_eq!(q.model.action(1, stay).successors, vec![(plus, 0.2), (minus, 0.8)]);
        assert!(q.model.state_actions().all(|(_, _, e)| e.reward == 0.0));
        assert!(q.model.validate().is_empty());

        let one = weighted_quotient(&m, &mecs, &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(one.model.action(1, one.stay_action(1).unwrap()).successors, vec![(plus, 1.0)]);
        assert_eq!(one.model.action(3, one.stay_action(3).unwrap()).successors, vec![(minus, 1.0)]);

        assert!(matches!(
            weighted_quotient(&m, &mecs, &[0.2, 1.5, 0.0]),
            Err(QuotientError::ValueOutOfRange { index: 1, .. })
        ));
        assert!(weighted_quotient(&m, &mecs, &[0.2]).is_err());
    }

    #[test]
    fn bounded_quotient_stay() {
        let m = fixtures::span_trap(1.0);
        let mecs = compute_mecs(&m);
        let stay_of = |l: f64, u: f64| {
            let q = bounded_quotient(&m, &mecs, &[l], &[u]).unwrap();
            let (p, mi, un) = (q.plus.unwrap(), q.minus.unwrap(), q.unknown.unwrap());
            let d = q.model.action(0, q.stay_action(0).unwrap()).successors.clone();
            (d, p, mi, un)
        };
        let (d, p, mi, un) = stay_of(0.4, 0.6);
        assert_eq!(d.len(), 3);
        assert_eq!(d[0], (p, 0.4));
        assert_eq!(d[1], (mi, 0.4));
        assert_eq!(d[2].0, un);
        assert!((d[2].1 - 0.2).abs() < 1e-15);

        let (d, p, mi, _) = stay_of(0.3, 0.3);
        assert_eq!(d, vec![(p, 0.3), (mi, 0.7)]);
        let (d, _, _, un) = stay_of(0.0, 1.0);
        assert_eq!(d, vec![(un, 1.0)]);

        assert!(matches!(
            bounded_quotient(&m, &mecs, &[0.7], &[0.2]),
            Err(QuotientError::BoundsInverted { .. })
        ));
    }

    #[test]
    fn inconsistent_mecs_rejected() {
        let m = fixtures::three_mec();
        let bad = vec![Mec::new(vec![1], vec![(1, 1)])];
        assert!(matches!(mec_quotient(&m, &bad), Err(QuotientError::InconsistentMecs(_))));
        let overlap = vec![Mec::new(vec![2, 3], vec![(2, 0)]), Mec::new(vec![3], vec![(3, 0)])];
        assert!(mec_quotient(&m, &overlap).is_err());
    }

    #[test]
    fn random_models_match_brute_force_and_quotients_are_ec_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = RandomModelSpec {
            max_states: 6,
            max_actions: 3,
            ..RandomModelSpec::default()
        };
        for _ in 0..150 {
            let m = random_mdp(&mut rng, &spec);
            let mecs = compute_mecs(&m);
            assert_eq!(mecs, brute_force_mecs(&m));
            let q = mec_quotient(&m, &mecs).unwrap();
            assert!(compute_mecs(&q.model).is_empty());
            let f = vec![0.5; mecs.len()];
            let w = weighted_quotient(&m, &mecs, &f).unwrap();
            for mec in compute_mecs(&w.model) {
                assert_eq!(mec.len(), 1);
                assert!(mec.states()[0] >= w.plus.unwrap());
            }
            for (_, _, e) in w.model.state_actions() {
                let sum: f64 = e.successors.iter().map(|(_, p)| p).sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }
}
