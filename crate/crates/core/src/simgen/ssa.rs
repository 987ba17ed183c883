//! Direct-method stochastic simulation with mass-action propensities.

use rand::Rng;

/// One reaction: `rate * prod(C(x_s, nu_s))` fires with `delta` applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub name: &'static str,
    pub rate: f64,
    /// `(species, stoichiometry)`; stoichiometry 1 or 2.
    pub reactants: Vec<(usize, u32)>,
    pub delta: Vec<(usize, i64)>,
}

impl Reaction {
    pub fn propensity(&self, state: &[i64]) -> f64 {
        let mut a = self.rate;
        for &(s, nu) in &self.reactants {
            let x = state[s] as f64;
            a *= match nu {
                1 => x,
                2 => x * (x - 1.0) / 2.0,
                _ => unreachable!("only uni- and bimolecular terms"),
            };
        }
        a.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReactionNetwork {
    pub species: Vec<&'static str>,
    pub reactions: Vec<Reaction>,
}

/// Runs one trajectory from `init` and returns the state at each sample
/// time (the state after all events with time <= t).
///
/// `observer` sees the state after every event together with the event time.
pub fn simulate<R: Rng, F: FnMut(&[i64], f64)>(
    net: &ReactionNetwork,
    init: &[i64],
    sample_times: &[f64],
    rng: &mut R,
    mut observer: F,
) -> Vec<Vec<i64>> {
    let mut state = init.to_vec();
    let mut t = 0.0;
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut next = 0;
    let end = sample_times.last().copied().unwrap_or(0.0);
    let mut props = vec![0.0; net.reactions.len()];

    loop {
        for (p, r) in props.iter_mut().zip(&net.reactions) {
            *p = r.propensity(&state);
        }
        let total: f64 = props.iter().sum();
        let dt = if total > 0.0 {
            // 1 - U lies in (0, 1], so the log is finite.
            -(1.0 - rng.random::<f64>()).ln() / total
        } else {
            f64::INFINITY
        };
        let t_event = t + dt;
        while next < sample_times.len() && sample_times[next] < t_event {
            samples.push(state.clone());
            next += 1;
        }
        if t_event > end || next == sample_times.len() {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut chosen = props.len() - 1;
        for (i, &p) in props.iter().enumerate() {
            if p > 0.0 {
                chosen = i;
                if target < p {
                    break;
                }
                target -= p;
            }
        }
        for &(s, d) in &net.reactions[chosen].delta {
            state[s] += d;
        }
        t = t_event;
        observer(&state, t);
    }
    samples
}
