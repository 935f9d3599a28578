//! On-demand access to a model, one state at a time.

use std::borrow::Cow;

use crate::mdp::{ActionEntry, Mdp, StateId};

/// A model whose states are only materialized when asked for.
///
/// Answers must be pure: repeated calls for the same state return the same
/// actions, and `r_max` bounds every reward that can ever be revealed.
pub trait LazyModel {
    fn initial(&self) -> StateId;

    fn actions(&self, state: StateId) -> Cow<'_, [ActionEntry]>;

    fn r_max(&self) -> f64;
}

impl LazyModel for Mdp<f64> {
    fn initial(&self) -> StateId {
        Mdp::initial(self)
    }

    fn actions(&self, state: StateId) -> Cow<'_, [ActionEntry]> {
        Cow::Borrowed(Mdp::actions(self, state))
    }

    fn r_max(&self) -> f64 {
        self.max_reward()
    }
}

impl<M: LazyModel + ?Sized> LazyModel for &M {
    fn initial(&self) -> StateId {
        (**self).initial()
    }

    fn actions(&self, state: StateId) -> Cow<'_, [ActionEntry]> {
        (**self).actions(state)
    }

    fn r_max(&self) -> f64 {
        (**self).r_max()
    }
}
