//! Closed-form learning-rate schedules.
//!
//! Five families share a linear warmup ramp (`lr(0) = 0`, `lr(t) =
//! eta_max * t / t_warmup` for `t <= t_warmup`) and differ after it:
//!
//! * `wso`    — holds `eta_max` to the end (no decay);
//! * `wsd`    — holds `eta_max` until `t_stable`, then decays linearly to
//!   `alpha_pre * eta_max`;
//! * `cosine` — cosine decay to `alpha_pre * eta_max`;
//! * `linear` — linear decay to `alpha_pre * eta_max`;
//! * `sft-cosine` — cosine decay all the way to zero, the fine-tuning
//!   default.
//!
//! A mid-training extension multiplies the base schedule's final value by
//! a linear ramp from 1 down to `alpha_mid` over `t_mid` steps.
//!
//! All arithmetic is `f64`; `t` is an integer step index. Specs are
//! immutable and evaluation is pure, so everything here is thread-safe.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schedule family identifiers as they appear in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleFamily {
    Wso,
    Wsd,
    Cosine,
    Linear,
    SftCosine,
}

impl ScheduleFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleFamily::Wso => "wso",
            ScheduleFamily::Wsd => "wsd",
            ScheduleFamily::Cosine => "cosine",
            ScheduleFamily::Linear => "linear",
            ScheduleFamily::SftCosine => "sft-cosine",
        }
    }
}

/// One stage's learning-rate schedule.
///
/// `stable_ratio` is only consulted by the `wsd` family: the plateau ends at
/// `t_warmup + round(stable_ratio * (t_total - t_warmup))`, rounded to
/// nearest with ties to even.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub family: ScheduleFamily,
    pub eta_max: f64,
    pub alpha_pre: f64,
    pub t_warmup: u64,
    pub t_total: u64,
    pub stable_ratio: f64,
}

/// Mid-training schedule: extends `base` past `base.t_total` by scaling the
/// base schedule's final value with a linear ramp from 1 to `alpha_mid`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidScheduleSpec {
    pub base: ScheduleSpec,
    pub alpha_mid: f64,
    pub t_mid: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("step {t} outside [{lo}, {hi}]")]
    OutOfRange { t: u64, lo: u64, hi: u64 },
    #[error("invalid schedule: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl ScheduleSpec {
    /// Minimum-LR factor actually applied: `wso` behaves as 1, `sft-cosine`
    /// as 0, regardless of the stored `alpha_pre`.
    pub fn effective_alpha(&self) -> f64 {
        match self.family {
            ScheduleFamily::Wso => 1.0,
            ScheduleFamily::SftCosine => 0.0,
            _ => self.alpha_pre,
        }
    }

    /// Last step of the `wsd` plateau. Meaningless for other families.
    pub fn t_stable(&self) -> u64 {
        let span = (self.t_total - self.t_warmup) as f64;
        self.t_warmup + (self.stable_ratio * span).round_ties_even() as u64
    }

    /// Invariant violations as data; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.eta_max > 0.0) || !self.eta_max.is_finite() {
            v.push("eta_max must be positive and finite".to_string());
        }
        if !(0.0..=1.0).contains(&self.alpha_pre) || self.alpha_pre.is_nan() {
            v.push("alpha_pre out of [0,1]".to_string());
        }
        if self.t_total <= self.t_warmup {
            v.push("t_total must exceed t_warmup".to_string());
        }
        if self.family == ScheduleFamily::Wsd {
            if !(self.stable_ratio > 0.0 && self.stable_ratio <= 1.0) {
                v.push("stable_ratio out of (0,1]".to_string());
            } else if self.t_total > self.t_warmup {
                let ts = self.t_stable();
                if ts <= self.t_warmup || ts > self.t_total {
                    v.push("t_stable must lie in (t_warmup, t_total]".to_string());
                }
            }
        }
        v
    }

    fn ensure_valid(&self) -> Result<(), ScheduleError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ScheduleError::Invalid(v))
        }
    }
}

impl MidScheduleSpec {
    pub fn validate(&self) -> Vec<String> {
        let mut v = self.base.validate();
        if !(0.0..=1.0).contains(&self.alpha_mid) || self.alpha_mid.is_nan() {
            v.push("alpha_mid out of [0,1]".to_string());
        }
        if self.t_mid == 0 {
            v.push("t_mid must be positive".to_string());
        }
        v
    }

    fn ensure_valid(&self) -> Result<(), ScheduleError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ScheduleError::Invalid(v))
        }
    }
}

/// LR at step `t` for `0 <= t <= spec.t_total`.
pub fn lr_at(spec: &ScheduleSpec, t: u64) -> Result<f64, ScheduleError> {
    spec.ensure_valid()?;
    if t > spec.t_total {
        return Err(ScheduleError::OutOfRange {
            t,
            lo: 0,
            hi: spec.t_total,
        });
    }
    if t == 0 {
        return Ok(0.0);
    }
    if t <= spec.t_warmup {
        return Ok(spec.eta_max * (t as f64 / spec.t_warmup as f64));
    }
    let eta = spec.eta_max;
    let lr = match spec.family {
        ScheduleFamily::Wso => eta,
        ScheduleFamily::Wsd => {
            let ts = spec.t_stable();
            if t <= ts {
                eta
            } else {
                let alpha = spec.alpha_pre;
                let frac = (spec.t_total - t) as f64 / (spec.t_total - ts) as f64;
                eta * ((1.0 - alpha) * frac + alpha)
            }
        }
        ScheduleFamily::Cosine => cosine_tail(eta, spec.alpha_pre, t, spec.t_warmup, spec.t_total),
        ScheduleFamily::SftCosine => cosine_tail(eta, 0.0, t, spec.t_warmup, spec.t_total),
        ScheduleFamily::Linear => {
            let alpha = spec.alpha_pre;
            let frac = (spec.t_total - t) as f64 / (spec.t_total - spec.t_warmup) as f64;
            eta * ((1.0 - alpha) * frac + alpha)
        }
    };
    Ok(lr)
}

fn cosine_tail(eta: f64, alpha: f64, t: u64, t_warmup: u64, t_total: u64) -> f64 {
    let progress = (t - t_warmup) as f64 / (t_total - t_warmup) as f64;
    eta * (alpha + 0.5 * (1.0 - alpha) * (1.0 + (progress * std::f64::consts::PI).cos()))
}

/// LR inside the mid-training window, `base.t_total < t <= base.t_total + t_mid`.
pub fn mid_lr_at(spec: &MidScheduleSpec, t: u64) -> Result<f64, ScheduleError> {
    spec.ensure_valid()?;
    let t_pre = spec.base.t_total;
    let lo = t_pre + 1;
    let hi = t_pre + spec.t_mid;
    if t < lo || t > hi {
        return Err(ScheduleError::OutOfRange { t, lo, hi });
    }
    let base_final = lr_at(&spec.base, t_pre)?;
    let frac = (hi - t) as f64 / spec.t_mid as f64;
    Ok(base_final * ((1.0 - spec.alpha_mid) * frac + spec.alpha_mid))
}

/// A stage's schedule: either a single-stage spec or a base spec extended by
/// a mid-training window. Serialized flat, so config files write the same
/// fields either way and mid fields are simply present or absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "ScheduleConfig", try_from = "ScheduleConfig")]
pub enum StageSchedule {
    Single(ScheduleSpec),
    WithMid(MidScheduleSpec),
}

impl StageSchedule {
    pub fn validate(&self) -> Vec<String> {
        match self {
            StageSchedule::Single(s) => s.validate(),
            StageSchedule::WithMid(m) => m.validate(),
        }
    }

    /// Final step index of the composite schedule.
    pub fn t_end(&self) -> u64 {
        match self {
            StageSchedule::Single(s) => s.t_total,
            StageSchedule::WithMid(m) => m.base.t_total + m.t_mid,
        }
    }

    /// LR at global step `t` over `[0, t_end]`, dispatching to the base
    /// schedule or the mid window as appropriate.
    pub fn lr(&self, t: u64) -> Result<f64, ScheduleError> {
        match self {
            StageSchedule::Single(s) => lr_at(s, t),
            StageSchedule::WithMid(m) => {
                if t <= m.base.t_total {
                    lr_at(&m.base, t)
                } else {
                    mid_lr_at(m, t)
                }
            }
        }
    }

    pub fn base_spec(&self) -> &ScheduleSpec {
        match self {
            StageSchedule::Single(s) => s,
            StageSchedule::WithMid(m) => &m.base,
        }
    }

    pub fn alpha_mid(&self) -> Option<f64> {
        match self {
            StageSchedule::Single(_) => None,
            StageSchedule::WithMid(m) => Some(m.alpha_mid),
        }
    }
}

/// Flat on-disk form of [`StageSchedule`]; `alpha_mid`/`t_mid` must be
/// given together or not at all.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub family: ScheduleFamily,
    pub eta_max: f64,
    #[serde(default = "one")]
    pub alpha_pre: f64,
    pub t_warmup: u64,
    pub t_total: u64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub stable_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_mid: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_mid: Option<u64>,
}

fn one() -> f64 {
    1.0
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_one(x: &f64) -> bool {
    *x == 1.0
}

impl TryFrom<ScheduleConfig> for StageSchedule {
    type Error = String;

    fn try_from(c: ScheduleConfig) -> Result<Self, Self::Error> {
        let base = ScheduleSpec {
            family: c.family,
            eta_max: c.eta_max,
            alpha_pre: c.alpha_pre,
            t_warmup: c.t_warmup,
            t_total: c.t_total,
            stable_ratio: c.stable_ratio,
        };
        match (c.alpha_mid, c.t_mid) {
            (None, None) => Ok(StageSchedule::Single(base)),
            (Some(alpha_mid), Some(t_mid)) => Ok(StageSchedule::WithMid(MidScheduleSpec {
                base,
                alpha_mid,
                t_mid,
            })),
            _ => Err("alpha_mid and t_mid must be given together".to_string()),
        }
    }
}

impl From<StageSchedule> for ScheduleConfig {
    fn from(s: StageSchedule) -> Self {
        let (base, alpha_mid, t_mid) = match s {
            StageSchedule::Single(b) => (b, None, None),
            StageSchedule::WithMid(m) => (m.base, Some(m.alpha_mid), Some(m.t_mid)),
        };
        ScheduleConfig {
            family: base.family,
            eta_max: base.eta_max,
            alpha_pre: base.alpha_pre,
            t_warmup: base.t_warmup,
            t_total: base.t_total,
            stable_ratio: base.stable_ratio,
            alpha_mid,
            t_mid,
        }
    }
}

/// Sampled `(t, lr)` pairs at `t = 0, stride, 2*stride, ...`; the final step
/// is always included.
pub fn schedule_trace(sched: &StageSchedule, stride: u64) -> Result<Vec<(u64, f64)>, ScheduleError> {
    assert!(stride >= 1, "stride must be >= 1");
    let end = sched.t_end();
    let mut out = Vec::new();
    let mut t = 0;
    while t < end {
        out.push((t, sched.lr(t)?));
        t += stride;
    }
    out.push((end, sched.lr(end)?));
    Ok(out)
}
