//! Softmax policy over per-tile action preferences, with a tabular critic.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// `p_a = exp(h_a) / Σ_b exp(h_b)`, evaluated with the row maximum
/// subtracted.
pub fn policy_probs<T: Scalar>(row: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); row.len()];
    softmax_into(row, &mut out);
    out
}

pub(crate) fn softmax_into<T: Scalar>(row: &[T], out: &mut [T]) {
    let max = row.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for (o, &h) in out.iter_mut().zip(row) {
        *o = (h - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Actor preferences `H` (`n_states × n_actions`, row-major) and critic
/// values `V` (`n_states`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams<T> {
    n_states: usize,
    n_actions: usize,
    preferences: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> PolicyParams<T> {
    /// Uniform random policy and zero values.
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            preferences: vec![T::zero(); n_states * n_actions],
            values: vec![T::zero(); n_states],
        }
    }

    pub(crate) fn from_parts(n_states: usize, n_actions: usize, preferences: Vec<T>, values: Vec<T>) -> Self {
        assert_eq!(preferences.len(), n_states * n_actions);
        assert_eq!(values.len(), n_states);
        Self {
            n_states,
            n_actions,
            preferences,
            values,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn preferences(&self) -> &[T] {
        &self.preferences
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, state: usize) -> &[T] {
        &self.preferences[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn value(&self, state: usize) -> T {
        self.values[state]
    }

    pub fn probs(&self, state: usize) -> Vec<T> {
        policy_probs(self.row(state))
    }

    /// Highest-preference action; ties go to the lowest index.
    pub fn greedy(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for (a, &h) in row.iter().enumerate().skip(1) {
            if h > row[best] {
                best = a;
            }
        }
        best
    }

    /// One-step actor-critic update for the transition `s --a, r--> s_next`.
    ///
    /// With TD error `e = r + V[s_next]·[not terminal] - V[s]`, the critic
    /// moves `V[s] += α_c e` and the actor follows the softmax log-policy
    /// gradient, `H[s][b] += α_a e (1{b = a} - π(b|s))`, with `π` taken
    /// before the update. Only row `s` changes. Returns `e`.
    pub fn actor_critic_update(
        &mut self,
        s: usize,
        a: usize,
        reward: T,
        s_next: usize,
        terminal: bool,
        actor_lr: T,
        critic_lr: T,
    ) -> T {
        let bootstrap = if terminal { T::zero() } else { self.values[s_next] };
        let td = reward + bootstrap - self.values[s];
        let n = self.n_actions;
        let mut probs = [T::zero(); 32];
        let probs = if n <= probs.len() {
            &mut probs[..n]
        } else {
            // unusually large action sets
            return self.update_slow(s, a, td, actor_lr, critic_lr);
        };
        softmax_into(self.row(s), probs);
        self.values[s] += critic_lr * td;
        let row = &mut self.preferences[s * n..(s + 1) * n];
        for (b, (h, &p)) in row.iter_mut().zip(probs.iter()).enumerate() {
            let indicator = if b == a { T::one() } else { T::zero() };
            *h += actor_lr * td * (indicator - p);
        }
        td
    }

    fn update_slow(&mut self, s: usize, a: usize, td: T, actor_lr: T, critic_lr: T) -> T {
        let probs = self.probs(s);
        self.values[s] += critic_lr * td;
        let n = self.n_actions;
        for (b, p) in probs.into_iter().enumerate() {
            let indicator = if b == a { T::one() } else { T::zero() };
            self.preferences[s * n + b] += actor_lr * td * (indicator - p);
        }
        td
    }
}
