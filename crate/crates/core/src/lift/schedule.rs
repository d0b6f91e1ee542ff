//! Growth parameters of the staged constructions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How block lengths grow from stage to stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockGrowth {
    /// `l_k = 2^(k-1) l_1`.
    Doubling,
    /// `l_k = l_1 + (k-1) step`.
    Linear { step: usize },
}

/// User-facing schedule knobs; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// `eps_1`; later stages use `eps_k = eps_1 2^(1-k)`.
    pub eps1: f64,
    /// `l_1`.
    pub first_block: usize,
    pub growth: BlockGrowth,
    /// Depth of the weak* metric used for classification and reports.
    pub metric_depth: usize,
    /// Largest accepted distance of the input prefix at each checkpoint.
    pub input_tolerance: f64,
    /// Smallest power-of-two prefix length listed in reports.
    pub min_report_scale: usize,
    /// Largest conditional block support enumerated per conditioning block.
    pub support_limit: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            eps1: 0.5,
            first_block: 8,
            growth: BlockGrowth::Doubling,
            metric_depth: 2,
            input_tolerance: 0.1,
            min_report_scale: 1 << 10,
            support_limit: 1 << 16,
        }
    }
}

impl ScheduleConfig {
    /// Short, slowly growing blocks: product joinings enumerate `2^l` blocks
    /// per conditioning block, and every block needs many visits.
    pub fn lift_default() -> Self {
        Self {
            first_block: 10,
            growth: BlockGrowth::Linear { step: 2 },
            ..Self::default()
        }
    }

    /// Longer blocks with tighter tolerances, so that a constant segment is
    /// rejected from the second stage on.
    pub fn genericize_default() -> Self {
        Self {
            eps1: 0.25,
            first_block: 64,
            ..Self::default()
        }
    }

    pub fn block_len(&self, k: usize) -> Option<usize> {
        match self.growth {
            BlockGrowth::Doubling => 1usize
                .checked_shl(u32::try_from(k - 1).ok()?)
                .and_then(|f| f.checked_mul(self.first_block)),
            BlockGrowth::Linear { step } => (k - 1)
                .checked_mul(step)
                .and_then(|e| e.checked_add(self.first_block)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0 && self.eps1 <= 1.0) {
            return Err(Error::InvalidSchedule("eps1 must lie in (0, 1]".into()));
        }
        if self.metric_depth == 0 {
            return Err(Error::InvalidSchedule("metric depth must be at least 1".into()));
        }
        if self.first_block < self.metric_depth {
            return Err(Error::InvalidSchedule(
                "first block must be at least as long as the metric depth".into(),
            ));
        }
        if let BlockGrowth::Linear { step: 0 } = self.growth {
            return Err(Error::InvalidSchedule("linear growth step must be positive".into()));
        }
        if self.input_tolerance.is_nan() || self.input_tolerance < 0.0 {
            return Err(Error::InvalidSchedule("input tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Parameters of stage `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Allocation slack `delta_k / (3 #blocks)`; reported, rounding is exact.
    pub gamma: f64,
    /// `l_k`.
    pub block_len: usize,
    /// `L_k = l_k + g0`.
    pub padded_len: usize,
    /// `n_k`.
    pub checkpoint: usize,
}

/// Resolved stages for a given checkpoint list and connection gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftSchedule {
    pub config: ScheduleConfig,
    pub g0: usize,
    pub stages: Vec<Stage>,
}

impl LiftSchedule {
    /// Picks checkpoints greedily from `checkpoints`: `n_k` is the smallest
    /// entry beyond `n_{k-1}` with `k l_k <= n_k` and `(k-1) n_{k-1} <= n_k`.
    /// `block_alphabet` is the alphabet size of the blocks counted by `gamma_k`.
    pub fn build(
        config: ScheduleConfig,
        g0: usize,
        checkpoints: &[usize],
        block_alphabet: usize,
    ) -> Result<Self> {
        config.validate()?;
        let mut sorted = checkpoints.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut stages: Vec<Stage> = Vec::new();
        let mut rest = sorted.as_slice();
        loop {
            let k = stages.len() + 1;
            let Some(block_len) = config.block_len(k) else { break };
            let prev = stages.last().map(|s| s.checkpoint);
            let pos = rest.iter().position(|&n| {
                block_len.saturating_mul(k) <= n
                    && prev.is_none_or(|p| n > p && (k - 1).saturating_mul(p) <= n)
            });
            let Some(pos) = pos else { break };
            let checkpoint = rest[pos];
            rest = &rest[pos + 1..];
            let epsilon = config.eps1 * 0.5f64.powi(k as i32 - 1);
            let delta = epsilon / 2.0;
            let blocks = (block_alphabet as f64).powi(block_len as i32);
            stages.push(Stage {
                k,
                epsilon,
                delta,
                gamma: delta / (3.0 * blocks),
                block_len,
                padded_len: block_len + g0,
                checkpoint,
            });
        }
        let sched = Self { config, g0, stages };
        sched.validate()?;
        Ok(sched)
    }

    pub fn metric_depth(&self) -> usize {
        self.config.metric_depth
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::InvalidSchedule(
                "no checkpoint is long enough for the first block".into(),
            ));
        }
        for (i, s) in self.stages.iter().enumerate() {
            let k = i + 1;
            if s.k != k {
                return Err(Error::InvalidSchedule("stages must be numbered 1, 2, ..".into()));
            }
            if s.block_len < self.config.metric_depth {
                return Err(Error::InvalidSchedule(format!("stage {k}: block shorter than metric depth")));
            }
            if s.padded_len != s.block_len + self.g0 {
                return Err(Error::InvalidSchedule(format!("stage {k}: padded length must be l_k + g0")));
            }
            if k * s.block_len > s.checkpoint {
                return Err(Error::InvalidSchedule(format!("stage {k}: l_k / n_k exceeds 1/k")));
            }
            if k * self.g0 > s.block_len {
                return Err(Error::InvalidSchedule(format!("stage {k}: g0 / l_k exceeds 1/k")));
            }
            if !(s.delta > 0.0 && s.delta <= s.epsilon) {
                return Err(Error::InvalidSchedule(format!("stage {k}: need 0 < delta_k <= eps_k")));
            }
            if let Some(next) = self.stages.get(i + 1) {
                if next.block_len <= s.block_len {
                    return Err(Error::InvalidSchedule("block lengths must increase".into()));
                }
                if next.checkpoint <= s.checkpoint || k * s.checkpoint > next.checkpoint {
                    return Err(Error::InvalidSchedule(format!(
                        "stage {k}: n_k / n_(k+1) exceeds 1/k"
                    )));
                }
            }
        }
        Ok(())
    }
}
