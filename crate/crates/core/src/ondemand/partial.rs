//! Partially explored bounded MEC quotient.
//!
//! Explored states keep per-action reachability bounds `(l, u)` towards `s+`.
//! End components found among explored states are collapsed into groups; a group
//! exposes the actions of its members that leave it plus a `stay` action whose
//! outcome `s+ / s- / s?` encodes the current bounds on the group's gain.

use std::collections::HashMap;

use rand::Rng;

use crate::lazy::LazyModel;
use crate::mdp::{ActionEntry, Mdp, StateId};
use crate::mec::mecs_of_graph;
use crate::numeric::{normalized_bounds, weighted_bounds};
use crate::vi::{mec_value_bounds, ViState};

use super::Heuristic;

/// Vertex of the partial quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    /// Explored state outside every group, by exploration index.
    State(usize),
    Group(usize),
    Plus,
    Minus,
    Unknown,
}

impl Node {
    pub fn is_special(self) -> bool {
        matches!(self, Node::Plus | Node::Minus | Node::Unknown)
    }
}

/// Action of a node: an original action of an explored state, or `stay` of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeAction {
    Original { state: usize, action: usize },
    Stay(usize),
}

/// Alternating node/action sequence of one simulation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Path {
    pub nodes: Vec<Node>,
    pub actions: Vec<NodeAction>,
}

impl Path {
    pub fn last(&self) -> Option<Node> {
        self.nodes.last().copied()
    }
}

/// Number of positions of `path` holding `node`.
pub fn appear(node: Node, path: &Path) -> usize {
    path.nodes.iter().filter(|&&n| n == node).count()
}

#[derive(Debug, Clone)]
pub struct ExploredState {
    pub id: StateId,
    pub actions: Vec<ActionEntry>,
    /// `(l, u)` per action.
    pub bounds: Vec<(f64, f64)>,
    pub group: Option<usize>,
    round_robin: Vec<usize>,
}

#[derive(Debug, Clone)]
struct GroupVi {
    model: Mdp,
    state: ViState,
}

#[derive(Debug, Clone)]
pub struct Group {
    /// Exploration indices, ascending.
    pub members: Vec<usize>,
    /// Member actions whose successors all lie in the group.
    pub internal: Vec<(usize, usize)>,
    pub external: Vec<(usize, usize)>,
    /// `(l, u)` on the normalized gain of the end component.
    pub stay: (f64, f64),
    vi: Option<GroupVi>,
    round_robin: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RefineLimits {
    /// A refinement stops once the gap is at most `max(min(gap/2, precision), floor)`.
    pub precision: f64,
    /// Gap below which refinement stops regardless of progress.
    pub floor: f64,
    /// Value-iteration steps per refinement.
    pub max_steps: u64,
    pub tau: f64,
}

impl Default for RefineLimits {
    fn default() -> Self {
        Self {
            precision: 0.0,
            floor: 1e-12,
            max_steps: 1_000_000,
            tau: crate::vi::DEFAULT_TAU,
        }
    }
}

pub struct PartialQuotient<'m, M: LazyModel + ?Sized> {
    model: &'m M,
    r_max: f64,
    index: HashMap<StateId, usize>,
    states: Vec<ExploredState>,
    groups: Vec<Option<Group>>,
    limits: RefineLimits,
}

/// Index drawn with probability proportional to `weights`.
fn sample_weighted<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if x < w {
            return i;
        }
        x -= w;
    }
    last
}

impl<'m, M: LazyModel + ?Sized> PartialQuotient<'m, M> {
    pub fn new(model: &'m M, r_max: f64, limits: RefineLimits) -> Self {
        let mut pq = Self {
            model,
            r_max,
            index: HashMap::new(),
            states: Vec::new(),
            groups: Vec::new(),
            limits,
        };
        pq.explore(model.initial());
        pq
    }

    pub fn explored_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &ExploredState {
        &self.states[i]
    }

    pub fn live_groups(&self) -> impl Iterator<Item = (usize, &Group)> {
        self.groups.iter().enumerate().filter_map(|(g, x)| x.as_ref().map(|x| (g, x)))
    }

    pub fn group(&self, g: usize) -> Option<&Group> {
        self.groups.get(g)?.as_ref()
    }

    /// Exploration index of an original state, exploring it if new.
    fn explore(&mut self, id: StateId) -> usize {
        if let Some(&i) = self.index.get(&id) {
            return i;
        }
        let actions = self.model.actions(id).into_owned();
        let i = self.states.len();
        self.states.push(ExploredState {
            id,
            bounds: vec![(0.0, 1.0); actions.len()],
            round_robin: vec![0; actions.len()],
            actions,
            group: None,
        });
        self.index.insert(id, i);
        i
    }

    fn node_of_local(&self, i: usize) -> Node {
        match self.states[i].group {
            Some(g) => Node::Group(g),
            None => Node::State(i),
        }
    }

    /// Node of an original state, if explored.
    pub fn node_of(&self, id: StateId) -> Option<Node> {
        self.index.get(&id).map(|&i| self.node_of_local(i))
    }

    pub fn initial_node(&self) -> Node {
        self.node_of_local(0)
    }

    pub fn node_actions(&self, node: Node) -> Vec<NodeAction> {
        match node {
            Node::State(i) => (0..self.states[i].actions.len())
                .map(|a| NodeAction::Original { state: i, action: a })
                .collect(),
            Node::Group(g) => {
                let group = self.groups[g].as_ref().expect("live group");
                group
                    .external
                    .iter()
                    .map(|&(i, a)| NodeAction::Original { state: i, action: a })
                    .chain(std::iter::once(NodeAction::Stay(g)))
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn action_bounds(&self, action: NodeAction) -> (f64, f64) {
        match action {
            NodeAction::Original { state, action } => self.states[state].bounds[action],
            NodeAction::Stay(g) => self.groups[g].as_ref().expect("live group").stay,
        }
    }

    /// Actions with maximal upper bound (exact float comparison).
    pub fn best_actions(&self, node: Node) -> Vec<NodeAction> {
        let actions = self.node_actions(node);
        let best = actions
            .iter()
            .map(|&a| self.action_bounds(a).1)
            .fold(f64::NEG_INFINITY, f64::max);
        actions
            .into_iter()
            .filter(|&a| self.action_bounds(a).1 == best)
            .collect()
    }

    /// `(l, u)` of a node: `u` is the largest action upper bound and `l` the largest
    /// lower bound among the actions attaining it.
    pub fn node_bounds(&self, node: Node) -> (f64, f64) {
        match node {
            Node::Plus => (1.0, 1.0),
            Node::Minus => (0.0, 0.0),
            Node::Unknown => (0.0, 1.0),
            _ => {
                let mut u = f64::NEG_INFINITY;
                let mut l = 0.0f64;
                for a in self.node_actions(node) {
                    let (al, au) = self.action_bounds(a);
                    if au > u {
                        u = au;
                        l = al;
                    } else if au == u {
                        l = l.max(al);
                    }
                }
                (l, u)
            }
        }
    }

    fn successor_bounds(&self, id: StateId) -> (f64, f64) {
        match self.node_of(id) {
            Some(node) => self.node_bounds(node),
            None => (0.0, 1.0),
        }
    }

    /// Bounds at the initial state.
    pub fn init_bounds(&self) -> (f64, f64) {
        self.node_bounds(self.initial_node())
    }

    fn stay_outcomes(&self, g: usize) -> Vec<(Node, f64)> {
        let (l, u) = self.groups[g].as_ref().expect("live group").stay;
        [(Node::Plus, l), (Node::Minus, 1.0 - u), (Node::Unknown, u - l)]
            .into_iter()
            .filter(|&(_, p)| p > 0.0)
            .collect()
    }

    fn step<R: Rng + ?Sized>(&mut self, action: NodeAction, heuristic: Heuristic, rng: &mut R) -> Node {
        match action {
            NodeAction::Stay(g) => {
                let outcomes = self.stay_outcomes(g);
                if outcomes.len() == 1 {
                    return outcomes[0].0;
                }
                let idx = match heuristic {
                    Heuristic::Rr => {
                        let group = self.groups[g].as_mut().expect("live group");
                        group.round_robin += 1;
                        (group.round_robin - 1) % outcomes.len()
                    }
                    Heuristic::Pr => sample_weighted(rng, &outcomes.iter().map(|o| o.1).collect::<Vec<_>>()),
                    Heuristic::Md => {
                        let w: Vec<f64> = outcomes
                            .iter()
                            .map(|&(n, p)| {
                                let (l, u) = self.node_bounds(n);
                                p * (u - l)
                            })
                            .collect();
                        if w.iter().all(|&x| x <= 0.0) {
                            sample_weighted(rng, &outcomes.iter().map(|o| o.1).collect::<Vec<_>>())
                        } else {
                            sample_weighted(rng, &w)
                        }
                    }
                };
                outcomes[idx].0
            }
            NodeAction::Original { state, action } => {
                let succ = &self.states[state].actions[action].successors;
                let idx = if succ.len() == 1 {
                    0
                } else {
                    match heuristic {
                        Heuristic::Rr => {
                            let c = &mut self.states[state].round_robin[action];
                            *c += 1;
                            (*c - 1) % self.states[state].actions[action].successors.len()
                        }
                        Heuristic::Pr => {
                            sample_weighted(rng, &succ.iter().map(|&(_, p)| p).collect::<Vec<_>>())
                        }
                        Heuristic::Md => {
                            let w: Vec<f64> = succ
                                .iter()
                                .map(|&(t, p)| {
                                    let (l, u) = self.successor_bounds(t);
                                    p * (u - l)
                                })
                                .collect();
                            if w.iter().all(|&x| x <= 0.0) {
                                sample_weighted(rng, &succ.iter().map(|&(_, p)| p).collect::<Vec<_>>())
                            } else {
                                sample_weighted(rng, &w)
                            }
                        }
                    }
                };
                let target = self.states[state].actions[action].successors[idx].0;
                let i = self.explore(target);
                self.node_of_local(i)
            }
        }
    }

    /// Simulates one run from the initial node along actions of maximal upper
    /// bound. The run stops at `s+`, `s-` or `s?`, or once a node occurs `k` times.
    pub fn sample_episode<R: Rng + ?Sized>(&mut self, k: usize, heuristic: Heuristic, rng: &mut R) -> Path {
        let mut path = Path::default();
        let mut counts: HashMap<Node, usize> = HashMap::new();
        let mut node = self.initial_node();
        path.nodes.push(node);
        counts.insert(node, 1);
        while !node.is_special() && counts[&node] < k {
            let candidates = self.best_actions(node);
            let action = if candidates.len() == 1 {
                candidates[0]
            } else {
                candidates[rng.random_range(0..candidates.len())]
            };
            node = self.step(action, heuristic, rng);
            path.actions.push(action);
            path.nodes.push(node);
            *counts.entry(node).or_insert(0) += 1;
        }
        path
    }

    /// Resumes value iteration on group `g` until the gap of its `stay` bounds has
    /// halved, and further down to the configured precision. Returns `false` if `g`
    /// is not a live group.
    pub fn refine_group(&mut self, g: usize) -> bool {
        let Some(group) = self.groups.get(g).and_then(Option::as_ref) else {
            return false;
        };
        let gap = group.stay.1 - group.stay.0;
        if gap <= self.limits.floor {
            return true;
        }
        let target = (gap / 2.0).min(self.limits.precision).max(self.limits.floor);
        if group.vi.is_none() {
            let vi = self.group_vi(group);
            self.groups[g].as_mut().expect("live group").vi = Some(vi);
        }
        let r_max = self.r_max;
        let max_steps = self.limits.max_steps;
        let group = self.groups[g].as_mut().expect("live group");
        let vi = group.vi.as_mut().expect("initialized above");
        for _ in 0..max_steps {
            vi.state.advance(&vi.model);
            let (lo, hi) = mec_value_bounds(&vi.state, r_max).expect("at least one step");
            let l = group.stay.0.max(lo);
            let u = group.stay.1.min(hi);
            group.stay = (l.min(u), u);
            if group.stay.1 - group.stay.0 <= target {
                break;
            }
        }
        true
    }

    fn group_vi(&self, group: &Group) -> GroupVi {
        let pos = |i: usize| group.members.binary_search(&i).expect("member");
        let mut actions: Vec<Vec<ActionEntry>> = vec![Vec::new(); group.members.len()];
        for &(i, a) in &group.internal {
            let e = &self.states[i].actions[a];
            let succ = e
                .successors
                .iter()
                .map(|&(t, p)| (pos(self.index[&t]), p))
                .collect();
            actions[pos(i)].push(ActionEntry::new(e.label.clone(), e.reward, succ));
        }
        let model = Mdp::new(0, actions)
            .apply_aperiodicity_transform(self.limits.tau)
            .expect("tau validated by caller");
        GroupVi {
            state: ViState::new(model.num_states()),
            model,
        }
    }

    /// Collapses every end component of the explored part into a group; groups
    /// inside a larger end component are merged into it.
    pub fn on_the_fly_ec(&mut self) -> usize {
        // live nodes: ungrouped states, then live groups
        let mut node_ids: Vec<Node> = Vec::new();
        let mut state_node = vec![usize::MAX; self.states.len()];
        let mut group_node = vec![usize::MAX; self.groups.len()];
        for (i, s) in self.states.iter().enumerate() {
            if s.group.is_none() {
                state_node[i] = node_ids.len();
                node_ids.push(Node::State(i));
            }
        }
        for (g, group) in self.groups.iter().enumerate() {
            if group.is_some() {
                group_node[g] = node_ids.len();
                node_ids.push(Node::Group(g));
            }
        }
        let vertex = |i: usize| match self.states[i].group {
            Some(g) => group_node[g],
            None => state_node[i],
        };
        let graph: Vec<Vec<Vec<usize>>> = node_ids
            .iter()
            .map(|&node| {
                self.node_actions(node)
                    .into_iter()
                    .filter_map(|a| match a {
                        NodeAction::Original { state, action } => {
                            let succ: Option<Vec<usize>> = self.states[state].actions[action]
                                .successors
                                .iter()
                                .map(|(t, _)| self.index.get(t).map(|&j| vertex(j)))
                                .collect();
                            succ
                        }
                        NodeAction::Stay(_) => None,
                    })
                    .collect()
            })
            .collect();

        let mecs = mecs_of_graph(&graph);
        for mec in &mecs {
            let mut members = Vec::new();
            for &v in mec.states() {
                match node_ids[v] {
                    Node::State(i) => members.push(i),
                    Node::Group(g) => {
                        let old = self.groups[g].take().expect("live group");
                        members.extend(old.members);
                    }
                    _ => unreachable!("specials are not graph vertices"),
                }
            }
            members.sort_unstable();
            self.create_group(members);
        }
        mecs.len()
    }

    fn create_group(&mut self, members: Vec<usize>) -> usize {
        let g = self.groups.len();
        for &i in &members {
            self.states[i].group = Some(g);
        }
        let mut internal = Vec::new();
        let mut external = Vec::new();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for &i in &members {
            for (a, e) in self.states[i].actions.iter().enumerate() {
                let inside = e
                    .successors
                    .iter()
                    .all(|(t, _)| self.index.get(t).is_some_and(|&j| self.states[j].group == Some(g)));
                if inside {
                    internal.push((i, a));
                    lo = lo.min(e.reward);
                    hi = hi.max(e.reward);
                } else {
                    external.push((i, a));
                }
            }
        }
        let stay = if self.r_max > 0.0 {
            normalized_bounds(lo, hi, self.r_max)
        } else {
            (0.0, 0.0)
        };
        self.groups.push(Some(Group {
            members,
            internal,
            external,
            stay,
            vi: None,
            round_robin: 0,
        }));
        g
    }

    fn is_internal(&self, state: usize, action: usize) -> bool {
        self.states[state]
            .group
            .and_then(|g| self.groups[g].as_ref())
            .is_some_and(|g| g.internal.binary_search(&(state, action)).is_ok())
    }

    /// Recomputes the bounds of every original action on `path`, last step first.
    pub fn back_propagate(&mut self, path: &Path) {
        for &action in path.actions.iter().rev() {
            let NodeAction::Original { state, action } = action else {
                continue;
            };
            if self.is_internal(state, action) {
                continue;
            }
            let succ = &self.states[state].actions[action].successors;
            let terms: Vec<(f64, f64, f64)> = succ
                .iter()
                .map(|&(t, p)| {
                    let (l, u) = self.successor_bounds(t);
                    (p, l, u)
                })
                .collect();
            let (l, u) = weighted_bounds(terms.into_iter());
            let b = &mut self.states[state].bounds[action];
            let nl = b.0.max(l);
            let nu = b.1.min(u);
            *b = (nl.min(nu), nu);
        }
    }

    /// Node graph of the explored part with the same action filter as
    /// [`PartialQuotient::on_the_fly_ec`]; used to check that no end component is left.
    pub fn explored_graph(&self) -> Vec<Vec<Vec<usize>>> {
        let mut node_ids: Vec<Node> = Vec::new();
        let mut id_of: HashMap<Node, usize> = HashMap::new();
        for i in 0..self.states.len() {
            let n = self.node_of_local(i);
            id_of.entry(n).or_insert_with(|| {
                node_ids.push(n);
                node_ids.len() - 1
            });
        }
        node_ids
            .iter()
            .map(|&node| {
                self.node_actions(node)
                    .into_iter()
                    .filter_map(|a| match a {
                        NodeAction::Original { state, action } => self.states[state].actions[action]
                            .successors
                            .iter()
                            .map(|(t, _)| self.node_of(*t).map(|n| id_of[&n]))
                            .collect(),
                        NodeAction::Stay(_) => None,
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    fn single(reward: f64, succ: Vec<(StateId, f64)>) -> Vec<ActionEntry> {
        vec![ActionEntry::new("a", reward, succ)]
    }

    #[test]
    fn appear_counts() {
        let s = Node::State(0);
        let t = Node::State(1);
        let a = NodeAction::Original { state: 0, action: 0 };
        assert_eq!(appear(s, &Path::default()), 0);
        let p = Path {
            nodes: vec![s, s],
            actions: vec![a],
        };
        assert_eq!(appear(s, &p), 2);
        let p = Path {
            nodes: vec![s, t, s],
            actions: vec![a, a],
        };
        assert_eq!(appear(s, &p), 2);
        assert_eq!(appear(t, &p), 1);
    }

    #[test]
    fn self_loop_run_stops_by_repetition() {
        let m = Mdp::new(0, vec![single(1.0, vec![(0, 1.0)])]);
        let mut pq = PartialQuotient::new(&m, 1.0, RefineLimits::default());
        let path = pq.sample_episode(2, Heuristic::Pr, &mut rng());
        assert_eq!(path.nodes, vec![Node::State(0), Node::State(0)]);
    }

    #[test]
    fn edge_to_an_absorbing_reward_state() {
        // 0 -> 1, 1 absorbing with the maximal reward
        let m = Mdp::new(0, vec![single(0.0, vec![(1, 1.0)]), single(2.0, vec![(1, 1.0)])]);
        let mut pq = PartialQuotient::new(&m, 2.0, RefineLimits::default());
        let path = pq.sample_episode(3, Heuristic::Md, &mut rng());
        assert_eq!(path.last(), Some(Node::State(1)));
        assert_eq!(pq.on_the_fly_ec(), 1);
        assert_eq!(pq.node_of(1), Some(Node::Group(0)));
        let path = pq.sample_episode(3, Heuristic::Md, &mut rng());
        assert_eq!(path.nodes, vec![Node::State(0), Node::Group(0), Node::Plus]);
        pq.back_propagate(&path);
        let (l, u) = pq.init_bounds();
        assert_eq!(u, 1.0);
        assert!(l > 1.0 - 1e-14);
    }

    #[test]
    fn even_split_backs_up_one_half() {
        // 0 -> {1, 2} evenly; 1 absorbing reward 1 (goal), 2 absorbing reward 0
        let m = Mdp::new(
            0,
            vec![
                single(0.0, vec![(1, 0.5), (2, 0.5)]),
                single(1.0, vec![(1, 1.0)]),
                single(0.0, vec![(2, 1.0)]),
            ],
        );
        let mut pq = PartialQuotient::new(&m, 1.0, RefineLimits::default());
        let mut r = rng();
        for _ in 0..20 {
            let path = pq.sample_episode(2, Heuristic::Rr, &mut r);
            if path.last().is_some_and(|n| appear(n, &path) == 2) {
                pq.on_the_fly_ec();
            }
            pq.back_propagate(&path);
        }
        let (l, u) = pq.init_bounds();
        assert!((l - 0.5).abs() < 1e-14 && (u - 0.5).abs() < 1e-14);
        assert!(l <= 0.5 && 0.5 <= u);
    }

    #[test]
    fn collapse_of_fixture_component() {
        let m = fixtures::three_mec();
        let mut pq = PartialQuotient::new(&m, 20.0, RefineLimits::default());
        for id in [2, 3] {
            pq.explore(id);
        }
        assert_eq!(pq.on_the_fly_ec(), 1);
        let (_, g) = pq.live_groups().next().unwrap();
        assert_eq!(g.members.len(), 2);
        assert!(g.external.is_empty());
        assert_eq!(g.internal.len(), 2);
        assert!(g.stay.0 == 0.0 && g.stay.1 >= 0.5);
        // no end component left
        assert!(mecs_of_graph(&pq.explored_graph()).is_empty());
        // nothing more to collapse
        assert_eq!(pq.on_the_fly_ec(), 0);
    }

    #[test]
    fn stay_distribution_follows_bounds() {
        let m = fixtures::three_mec();
        let mut pq = PartialQuotient::new(&m, 20.0, RefineLimits::default());
        pq.explore(2);
        pq.explore(3);
        pq.on_the_fly_ec();
        let g = pq.node_of(2).map(|n| match n {
            Node::Group(g) => g,
            _ => unreachable!(),
        });
        let g = g.unwrap();
        pq.groups[g].as_mut().unwrap().stay = (0.2, 0.3);
        let out = pq.stay_outcomes(g);
        assert_eq!(out[0], (Node::Plus, 0.2));
        assert_eq!(out[1], (Node::Minus, 0.7));
        assert_eq!(out[2].0, Node::Unknown);
        assert!((out[2].1 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn refinement_halves_the_gap() {
        let m = fixtures::three_mec();
        let mut pq = PartialQuotient::new(&m, 20.0, RefineLimits::default());
        pq.explore(2);
        pq.explore(3);
        pq.on_the_fly_ec();
        let g = 0;
        let mut gap = pq.group(g).unwrap().stay.1 - pq.group(g).unwrap().stay.0;
        for _ in 0..30 {
            assert!(pq.refine_group(g));
            let (l, u) = pq.group(g).unwrap().stay;
            assert!(l <= 0.25 && 0.25 <= u);
            assert!(u - l <= gap / 2.0 || u - l <= 1e-12);
            gap = u - l;
        }
        assert!(!pq.refine_group(7));
    }

    #[test]
    fn single_state_group_is_pinned_by_its_reward() {
        let m = fixtures::three_mec();
        let mut pq = PartialQuotient::new(&m, 20.0, RefineLimits::default());
        pq.explore(1);
        assert_eq!(pq.on_the_fly_ec(), 1);
        let (l, u) = pq.group(0).unwrap().stay;
        assert!(l <= 0.2 && 0.2 <= u && u - l < 1e-15);
        // the group keeps (s2, b) as its only external action
        assert_eq!(pq.group(0).unwrap().external.len(), 1);
    }

    #[test]
    fn nested_recollapse_merges_groups() {
        // 0 <-> 1 via actions b; each also has a self-loop a
        let m = Mdp::new(
            0,
            vec![
                vec![
                    ActionEntry::new("a", 1.0, vec![(0, 1.0)]),
                    ActionEntry::new("b", 0.0, vec![(1, 1.0)]),
                ],
                vec![
                    ActionEntry::new("a", 3.0, vec![(1, 1.0)]),
                    ActionEntry::new("b", 0.0, vec![(0, 1.0)]),
                ],
            ],
        );
        let mut pq = PartialQuotient::new(&m, 3.0, RefineLimits::default());
        assert_eq!(pq.on_the_fly_ec(), 1);
        assert_eq!(pq.node_of(0), Some(Node::Group(0)));
        pq.explore(1);
        assert_eq!(pq.on_the_fly_ec(), 1);
        assert!(pq.group(0).is_none());
        let g = pq.group(1).unwrap();
        assert_eq!(g.members, vec![0, 1]);
        assert_eq!(g.internal.len(), 4);
        assert!(g.external.is_empty());
        assert_eq!(g.stay.0, 0.0);
        assert_eq!(g.stay.1, 1.0);
    }
}
