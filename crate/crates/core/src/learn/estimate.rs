//! The learner's optimistic empirical model.

use std::collections::{BTreeMap, BTreeSet};

use crate::mdp::{ActionId, ActionRow, GroundMdp, Outcome, StateId};
use crate::sim::Environment;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairStats {
    pub visits: u64,
    /// Per successor: transition count and summed reward.
    pub next: BTreeMap<StateId, (u64, f64)>,
    pub known: bool,
}

impl PairStats {
    /// Empirical row: frequencies and mean observed rewards.
    pub fn empirical_row(&self, action: ActionId, index: &BTreeMap<StateId, usize>) -> ActionRow<f64> {
        let visits = self.visits as f64;
        ActionRow {
            action,
            outcomes: self
                .next
                .iter()
                .map(|(s, &(c, r))| Outcome {
                    next: StateId(index[s]),
                    prob: c as f64 / visits,
                    reward: r / c as f64,
                })
                .collect(),
        }
    }
}

/// The GroundMdp induced by a [`ModelEstimate`], with the map from model
/// indices back to environment states. The last state is the dummy `s_d`.
#[derive(Debug, Clone)]
pub struct InducedModel {
    pub mdp: GroundMdp<f64>,
    pub states: Vec<StateId>,
    pub index: BTreeMap<StateId, usize>,
}

impl InducedModel {
    pub fn dummy(&self) -> StateId {
        StateId(self.states.len())
    }
}

#[derive(Debug, Clone)]
pub struct ModelEstimate {
    explore: ActionId,
    r_max: f64,
    k1: u64,
    k0: u64,
    actions: BTreeMap<StateId, BTreeSet<ActionId>>,
    pairs: BTreeMap<(StateId, ActionId), PairStats>,
    /// Plays of `a0` at each state since the last discovery there.
    explore_visits: BTreeMap<StateId, u64>,
    retired: BTreeSet<StateId>,
}

impl ModelEstimate {
    pub fn new(explore: ActionId, r_max: f64, k1: u64, k0: u64) -> Self {
        Self {
            explore,
            r_max,
            k1,
            k0,
            actions: BTreeMap::new(),
            pairs: BTreeMap::new(),
            explore_visits: BTreeMap::new(),
            retired: BTreeSet::new(),
        }
    }

    /// Add every state and action the environment reports as known.
    pub fn sync<E: Environment + ?Sized>(&mut self, env: &E) {
        for &s in env.known_states() {
            let acts = self.actions.entry(s).or_default();
            self.explore_visits.entry(s).or_insert(0);
            for &a in env.known_actions(s).into_iter().flatten() {
                if acts.insert(a) {
                    self.pairs.entry((s, a)).or_default();
                }
            }
        }
    }

    pub fn known_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.actions.keys().copied()
    }

    pub fn state_count(&self) -> usize {
        self.actions.len()
    }

    /// Distinct ground actions across all known states.
    pub fn action_count(&self) -> usize {
        self.actions.values().flatten().collect::<BTreeSet<_>>().len()
    }

    pub fn pair(&self, s: StateId, a: ActionId) -> Option<&PairStats> {
        self.pairs.get(&(s, a))
    }

    pub fn is_known(&self, s: StateId, a: ActionId) -> bool {
        if a == self.explore {
            self.retired.contains(&s)
        } else {
            self.pairs.get(&(s, a)).is_some_and(|p| p.known)
        }
    }

    pub fn is_retired(&self, s: StateId) -> bool {
        self.retired.contains(&s)
    }

    pub fn explore_visits(&self, s: StateId) -> u64 {
        self.explore_visits.get(&s).copied().unwrap_or(0)
    }

    /// Every pair over known states and actions, `a0` included, is known.
    pub fn is_complete(&self) -> bool {
        self.actions.keys().all(|s| self.retired.contains(s)) && self.pairs.values().all(|p| p.known)
    }

    /// Record a real transition. Returns true when the pair just became
    /// known. Known pairs are frozen.
    pub fn record(&mut self, s: StateId, a: ActionId, next: StateId, reward: f64) -> bool {
        let p = self.pairs.entry((s, a)).or_default();
        if p.known {
            return false;
        }
        p.visits += 1;
        let e = p.next.entry(next).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += reward;
        if p.visits >= self.k1 {
            p.known = true;
            return true;
        }
        false
    }

    /// Record a play of `a0`. Returns true when `a0` just retired at `s`.
    pub fn record_explore(&mut self, s: StateId, discovered: bool) -> bool {
        if self.retired.contains(&s) {
            return false;
        }
        let v = self.explore_visits.entry(s).or_insert(0);
        if discovered {
            *v = 0;
            return false;
        }
        *v += 1;
        if *v >= self.k0 {
            self.retired.insert(s);
            return true;
        }
        false
    }

    /// The induced model: known pairs at their empirical values, unknown
    /// ones (including `a0` before retirement) routed to `s_d` at `R_max`.
    pub fn induced(&self) -> InducedModel {
        let states: Vec<StateId> = self.actions.keys().copied().collect();
        let index: BTreeMap<StateId, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let dummy = StateId(states.len());
        let mut mdp = GroundMdp::new(states.len() + 1);
        let optimistic = |action| ActionRow {
            action,
            outcomes: vec![Outcome {
                next: dummy,
                prob: 1.0,
                reward: self.r_max,
            }],
        };
        for (i, &s) in states.iter().enumerate() {
            let at = StateId(i);
            for &a in &self.actions[&s] {
                let p = &self.pairs[&(s, a)];
                let row = if p.known {
                    p.empirical_row(a, &index)
                } else {
                    optimistic(a)
                };
                mdp.set_row(at, row);
            }
            if !self.retired.contains(&s) {
                mdp.set_row(at, optimistic(self.explore));
            } else if self.actions[&s].is_empty() {
                // Nothing left to play here but a fruitless explore.
                mdp.add_outcome(at, self.explore, at, 1.0, 0.0);
            }
        }
        mdp.set_row(dummy, optimistic(self.explore));
        InducedModel { mdp, states, index }
    }
}
