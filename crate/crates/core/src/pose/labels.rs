//! The quantized object pose space.

use serde::{Deserialize, Serialize};

use crate::geometry::{circular_diff_deg, wrap_deg};

pub const YAW_STEPS: usize = 40;
pub const PITCH_STEPS: usize = 9;
pub const LABEL_COUNT: usize = YAW_STEPS * PITCH_STEPS;
pub const YAW_STEP_DEG: f64 = 360.0 / YAW_STEPS as f64;
pub const PITCH_STEP_DEG: f64 = 5.0;
pub const MAX_PITCH_DEG: f64 = PITCH_STEP_DEG * (PITCH_STEPS - 1) as f64;

/// Yaw ρ relative to the camera ray and pitch ξ, both in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseLabel {
    #[serde(rename = "yaw")]
    pub yaw_deg: f64,
    #[serde(rename = "pitch")]
    pub pitch_deg: f64,
}

impl PoseLabel {
    pub fn from_index(index: usize) -> Self {
        assert!(index < LABEL_COUNT, "label index {index} out of range");
        PoseLabel {
            yaw_deg: (index % YAW_STEPS) as f64 * YAW_STEP_DEG,
            pitch_deg: (index / YAW_STEPS) as f64 * PITCH_STEP_DEG,
        }
    }

    /// Nearest grid label; pitch is clamped into range.
    pub fn quantize(yaw_deg: f64, pitch_deg: f64) -> Self {
        PoseLabel::from_index(quantize_index(yaw_deg, pitch_deg))
    }

    pub fn index(&self) -> usize {
        quantize_index(self.yaw_deg, self.pitch_deg)
    }

    pub fn yaw_index(&self) -> usize {
        self.index() % YAW_STEPS
    }

    pub fn pitch_index(&self) -> usize {
        self.index() / YAW_STEPS
    }
}

fn quantize_index(yaw_deg: f64, pitch_deg: f64) -> usize {
    let y = (wrap_deg(yaw_deg) / YAW_STEP_DEG).round() as usize % YAW_STEPS;
    let p = (pitch_deg / PITCH_STEP_DEG).round().clamp(0.0, (PITCH_STEPS - 1) as f64) as usize;
    p * YAW_STEPS + y
}

pub fn all_labels() -> impl Iterator<Item = PoseLabel> {
    (0..LABEL_COUNT).map(PoseLabel::from_index)
}

/// Raw and truncated pose distance `(d, min(d, gamma))`, yaw taken circularly.
pub fn angle_distance(a: PoseLabel, b: PoseLabel, gamma: f64) -> (f64, f64) {
    let d = circular_diff_deg(a.yaw_deg, b.yaw_deg) + (a.pitch_deg - b.pitch_deg).abs();
    (d, d.min(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        let p = |y, x| PoseLabel { yaw_deg: y, pitch_deg: x };
        assert_eq!(angle_distance(p(10.0, 5.0), p(10.0, 5.0), 20.0), (0.0, 0.0));
        assert_eq!(angle_distance(p(10.0, 5.0), p(25.0, 10.0), 20.0), (20.0, 20.0));
        assert_eq!(angle_distance(p(0.0, 0.0), p(180.0, 45.0), 20.0), (225.0, 20.0));
        assert_eq!(angle_distance(p(351.0, 0.0), p(9.0, 0.0), 20.0), (18.0, 18.0));
    }

    #[test]
    fn grid_round_trips() {
        assert_eq!(all_labels().count(), 360);
        for i in 0..LABEL_COUNT {
            assert_eq!(PoseLabel::from_index(i).index(), i);
        }
        assert_eq!(PoseLabel::quantize(358.0, 60.0), PoseLabel { yaw_deg: 0.0, pitch_deg: 40.0 });
        assert_eq!(PoseLabel::from_index(LABEL_COUNT - 1).pitch_deg, MAX_PITCH_DEG);
    }

    proptest! {
        #[test]
        fn distance_is_a_truncated_metric(a in 0usize..LABEL_COUNT, b in 0usize..LABEL_COUNT, gamma in 1.0f64..100.0) {
            let (la, lb) = (PoseLabel::from_index(a), PoseLabel::from_index(b));
            let (d, t) = angle_distance(la, lb, gamma);
            prop_assert_eq!((d, t), angle_distance(lb, la, gamma));
            prop_assert!(d >= 0.0 && t <= gamma && t <= d);
            prop_assert_eq!(d == 0.0, a == b);
        }
    }
}
