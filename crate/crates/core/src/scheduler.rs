//! Choice of the next redex when several are enabled.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::RedexId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("step {step}: choice {index} out of range for {len} enabled redexes")]
    IndexOutOfRange { step: u64, index: usize, len: usize },
    #[error("step {step}: scripted schedule exhausted")]
    Exhausted { step: u64 },
    #[error("step {step}: interactive choice aborted")]
    Aborted { step: u64 },
    #[error("step {step}: nothing to choose from")]
    NothingEnabled { step: u64 },
}

/// Recorded choices: one index into each step's canonically ordered
/// enabled list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub choices: Vec<usize>,
}

pub type ChoiceFn = Box<dyn FnMut(&[RedexId], u64) -> Option<usize> + Send>;

#[allow(clippy::large_enum_variant)]
pub enum SchedulePolicy {
    SeededRandom { seed: u64, rng: ChaCha8Rng },
    Scripted { choices: Vec<usize>, pos: usize },
    Interactive(ChoiceFn),
    LeftmostFirst,
}

impl fmt::Debug for SchedulePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulePolicy::SeededRandom { seed, .. } => write!(f, "SeededRandom({seed})"),
            SchedulePolicy::Scripted { choices, pos } => {
                write!(f, "Scripted({pos}/{})", choices.len())
            }
            SchedulePolicy::Interactive(_) => f.write_str("Interactive"),
            SchedulePolicy::LeftmostFirst => f.write_str("LeftmostFirst"),
        }
    }
}

impl Default for SchedulePolicy {
    fn default() -> Self {
        SchedulePolicy::seeded(0)
    }
}

impl SchedulePolicy {
    pub fn seeded(seed: u64) -> Self {
        SchedulePolicy::SeededRandom {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn scripted(choices: Vec<usize>) -> Self {
        SchedulePolicy::Scripted { choices, pos: 0 }
    }

    pub fn interactive(f: impl FnMut(&[RedexId], u64) -> Option<usize> + Send + 'static) -> Self {
        SchedulePolicy::Interactive(Box::new(f))
    }

    /// Seed to record alongside the choices, if any.
    pub fn seed(&self) -> Option<u64> {
        match self {
            SchedulePolicy::SeededRandom { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// Index into `enabled`, which must be in canonical order.
    pub fn choose(&mut self, enabled: &[RedexId], step: u64) -> Result<usize, ScheduleError> {
        let len = enabled.len();
        if len == 0 {
            return Err(ScheduleError::NothingEnabled { step });
        }
        let index = match self {
            SchedulePolicy::SeededRandom { rng, .. } => rng.gen_range(0..len),
            SchedulePolicy::Scripted { choices, pos } => {
                let i = *choices.get(*pos).ok_or(ScheduleError::Exhausted { step })?;
                *pos += 1;
                i
            }
            SchedulePolicy::Interactive(f) => {
                f(enabled, step).ok_or(ScheduleError::Aborted { step })?
            }
            SchedulePolicy::LeftmostFirst => 0,
        };
        if index >= len {
            return Err(ScheduleError::IndexOutOfRange { step, index, len });
        }
        Ok(index)
    }
}

/// Sort redexes into the order schedule indices refer to.
pub fn canonical_order(mut redexes: Vec<RedexId>) -> Vec<RedexId> {
    redexes.sort();
    redexes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn redex(path: &[u8], rule: &str) -> RedexId {
        RedexId {
            path: path.to_vec(),
            rule: rule.into(),
        }
    }

    #[test]
    fn left_par_component_sorts_first() {
        let r = redex(&[1], "D1a");
        let l = redex(&[0, 0], "D1a");
        assert_eq!(canonical_order(vec![r.clone(), l.clone()]), vec![l, r]);
    }

    #[test]
    fn singleton_is_chosen_by_every_policy() {
        let one = vec![redex(&[], "D1")];
        let mut policies = vec![
            SchedulePolicy::seeded(7),
            SchedulePolicy::scripted(vec![0]),
            SchedulePolicy::interactive(|_, _| Some(0)),
            SchedulePolicy::LeftmostFirst,
        ];
        for p in &mut policies {
            assert_eq!(p.choose(&one, 0), Ok(0), "{p:?}");
        }
    }

    #[test]
    fn scripted_errors() {
        let two = vec![redex(&[0], "D1"), redex(&[1], "D1")];
        let mut p = SchedulePolicy::scripted(vec![5]);
        assert!(matches!(
            p.choose(&two, 0),
            Err(ScheduleError::IndexOutOfRange { .. })
        ));
        assert_eq!(p.choose(&two, 1), Err(ScheduleError::Exhausted { step: 1 }));
        let mut abort = SchedulePolicy::interactive(|_, _| None);
        assert_eq!(
            abort.choose(&two, 3),
            Err(ScheduleError::Aborted { step: 3 })
        );
    }

    #[test]
    fn schedule_json_shape() {
        let s = Schedule {
            seed: Some(3),
            choices: vec![0, 1],
        };
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"seed":3,"choices":[0,1]}"#
        );
        let back: Schedule = serde_json::from_str(r#"{"choices":[2]}"#).unwrap();
        assert_eq!(back.seed, None);
    }
}
