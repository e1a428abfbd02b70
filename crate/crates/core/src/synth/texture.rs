//! Procedural surface textures: checkerboards and hash-lattice value
//! noise, sampled in meters on the surface.

use serde::{Deserialize, Serialize};

use crate::math::Vec3;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TextureSpec {
    Solid {
        color: [f64; 3],
    },
    Checker {
        /// Edge length of one cell (meters).
        scale: f64,
        color_a: [f64; 3],
        color_b: [f64; 3],
        /// Amplitude of value noise mixed on top.
        #[serde(default)]
        noise: f64,
    },
    Noise {
        /// Feature size (meters).
        scale: f64,
        base: [f64; 3],
        amp: f64,
    },
}

fn hash2(ix: i64, iy: i64, seed: u64) -> f64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    h = h.wrapping_add((ix as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9));
    h ^= h >> 27;
    h = h.wrapping_add((iy as u64).wrapping_mul(0x94d0_49bb_1331_11eb));
    h ^= h >> 31;
    h = h.wrapping_mul(0xd6e8_feb8_6659_fd93);
    h ^= h >> 32;
    (h & 0xffff_ffff) as f64 / 4294967296.0
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Bilinear value noise in [0, 1) at feature scale 1.
fn value_noise(u: f64, v: f64, seed: u64) -> f64 {
    let iu = u.floor();
    let iv = v.floor();
    let fu = smoothstep(u - iu);
    let fv = smoothstep(v - iv);
    let (iu, iv) = (iu as i64, iv as i64);
    let a = hash2(iu, iv, seed);
    let b = hash2(iu + 1, iv, seed);
    let c = hash2(iu, iv + 1, seed);
    let d = hash2(iu + 1, iv + 1, seed);
    a + (b - a) * fu + (c - a) * fv + (a - b - c + d) * fu * fv
}

impl TextureSpec {
    /// Color at surface coordinates `(u, v)` in meters.
    pub fn sample(&self, u: f64, v: f64, seed: u64) -> Vec3<f64> {
        match self {
            Self::Solid { color } => Vec3::from_array(*color),
            Self::Checker { scale, color_a, color_b, noise } => {
                let cu = (u / scale).floor() as i64;
                let cv = (v / scale).floor() as i64;
                let base = if (cu + cv).rem_euclid(2) == 0 {
                    Vec3::from_array(*color_a)
                } else {
                    Vec3::from_array(*color_b)
                };
                if *noise > 0.0 {
                    let n = (value_noise(u / scale * 2.3, v / scale * 2.3, seed ^ 0x51) - 0.5)
                        * noise;
                    base.map(|c| (c + n).clamp(0.0, 1.0))
                } else {
                    base
                }
            }
            Self::Noise { scale, base, amp } => {
                let n = (value_noise(u / scale, v / scale, seed) - 0.5) * amp;
                Vec3::from_array(*base).map(|c| (c + n).clamp(0.0, 1.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checker_alternates() {
        let t = TextureSpec::Checker {
            scale: 1.0,
            color_a: [1.0, 0.0, 0.0],
            color_b: [0.0, 0.0, 1.0],
            noise: 0.0,
        };
        assert!(t.sample(0.5, 0.5, 0).x > 0.9);
        assert!(t.sample(1.5, 0.5, 0).z > 0.9);
        assert!(t.sample(1.5, 1.5, 0).x > 0.9);
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        let t = TextureSpec::Noise { scale: 0.5, base: [0.5, 0.5, 0.5], amp: 0.4 };
        let a = t.sample(1.234, 5.678, 42);
        let b = t.sample(1.234, 5.678, 42);
        assert_eq!(a, b);
        let c = t.sample(1.234, 5.678, 43);
        assert!(a.distance(c) > 0.0, "different seeds should differ");
        for i in 0..100 {
            let s = t.sample(i as f64 * 0.37, i as f64 * 0.73, 42);
            assert!(s.x >= 0.0 && s.x <= 1.0);
        }
    }
}
