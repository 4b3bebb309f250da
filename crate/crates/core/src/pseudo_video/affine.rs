use rand::Rng;
use serde::{Deserialize, Serialize};

/// Per-frame step sizes and absolute clamps for the affine drift.
///
/// Translations are fractions of the output side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineBounds {
    pub rotation_step_deg: f64,
    pub rotation_clamp_deg: f64,
    /// Maximum relative change of scale per frame.
    pub scale_step: f64,
    pub scale_clamp: (f64, f64),
    pub translation_step_frac: f64,
    pub translation_clamp_frac: f64,
}

impl Default for AffineBounds {
    fn default() -> Self {
        Self {
            rotation_step_deg: 1.0,
            rotation_clamp_deg: 5.0,
            scale_step: 0.01,
            scale_clamp: (0.9, 1.1),
            translation_step_frac: 0.01,
            translation_clamp_frac: 0.05,
        }
    }
}

impl AffineBounds {
    /// All-zero steps: every frame is the identity.
    pub fn frozen() -> Self {
        Self {
            rotation_step_deg: 0.0,
            scale_step: 0.0,
            translation_step_frac: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = [
            self.rotation_step_deg,
            self.rotation_clamp_deg,
            self.scale_step,
            self.scale_clamp.0,
            self.scale_clamp.1,
            self.translation_step_frac,
            self.translation_clamp_frac,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err("all bounds must be finite".into());
        }
        if self.rotation_step_deg < 0.0 || self.scale_step < 0.0 || self.translation_step_frac < 0.0 {
            return Err("steps must be non-negative".into());
        }
        if self.rotation_clamp_deg < self.rotation_step_deg {
            return Err("rotation clamp is smaller than its step".into());
        }
        if self.translation_clamp_frac < self.translation_step_frac {
            return Err("translation clamp is smaller than its step".into());
        }
        let (lo, hi) = self.scale_clamp;
        if !(lo > 0.0 && lo <= 1.0 && 1.0 <= hi) {
            return Err(format!("scale clamp [{lo}, {hi}] must be positive and contain 1.0"));
        }
        if hi - lo < self.scale_step {
            return Err("scale clamp is narrower than its step".into());
        }
        Ok(())
    }
}

/// Affine transform of one frame about the image centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub rotation_deg: f64,
    pub scale: f64,
    pub translate_x_frac: f64,
    pub translate_y_frac: f64,
}

impl AffineParams {
    pub const IDENTITY: Self = Self {
        rotation_deg: 0.0,
        scale: 1.0,
        translate_x_frac: 0.0,
        translate_y_frac: 0.0,
    };

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn within(&self, b: &AffineBounds) -> bool {
        self.rotation_deg.abs() <= b.rotation_clamp_deg
            && (b.scale_clamp.0..=b.scale_clamp.1).contains(&self.scale)
            && self.translate_x_frac.abs() <= b.translation_clamp_frac
            && self.translate_y_frac.abs() <= b.translation_clamp_frac
    }
}

fn jitter<R: Rng + ?Sized>(rng: &mut R, step: f64) -> f64 {
    if step == 0.0 {
        0.0
    } else {
        rng.random_range(-step..=step)
    }
}

/// Clamped random walk starting from the identity.
pub fn sample_affine_walk<R: Rng + ?Sized>(duration: usize, bounds: &AffineBounds, rng: &mut R) -> Vec<AffineParams> {
    assert!(duration >= 1, "a scene lasts at least one frame");
    let mut track = Vec::with_capacity(duration);
    let mut cur = AffineParams::IDENTITY;
    track.push(cur);
    let rc = bounds.rotation_clamp_deg;
    let tc = bounds.translation_clamp_frac;
    for _ in 1..duration {
        cur.rotation_deg = (cur.rotation_deg + jitter(rng, bounds.rotation_step_deg)).clamp(-rc, rc);
        cur.scale =
            (cur.scale * (1.0 + jitter(rng, bounds.scale_step))).clamp(bounds.scale_clamp.0, bounds.scale_clamp.1);
        cur.translate_x_frac = (cur.translate_x_frac + jitter(rng, bounds.translation_step_frac)).clamp(-tc, tc);
        cur.translate_y_frac = (cur.translate_y_frac + jitter(rng, bounds.translation_step_frac)).clamp(-tc, tc);
        track.push(cur);
    }
    track
}
