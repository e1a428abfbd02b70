//! Analytic ray-castable primitives for ground-truth generation.

use serde::{Deserialize, Serialize};

use crate::math::{Mat3, Vec3};

use super::texture::TextureSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimitiveSpec {
    /// Finite textured rectangle: `origin + a*u + b*v`, `a, b` in [0, 1].
    Quad {
        origin: [f64; 3],
        u: [f64; 3],
        v: [f64; 3],
        texture: TextureSpec,
    },
    /// Axis-aligned-by-default box with optional yaw (radians).
    Box {
        center: [f64; 3],
        half_extents: [f64; 3],
        #[serde(default)]
        yaw: f64,
        texture: TextureSpec,
    },
}

/// Ray hit: parameter along the ray plus surface coordinates in meters.
#[derive(Clone, Copy, Debug)]
pub struct Hit {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

fn yaw_matrix(yaw: f64) -> Mat3<f64> {
    let (s, c) = yaw.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Ray / oriented-box intersection in the box local frame (slab method).
/// Returns the hit and the face id (0..6) for texture coordinates.
pub fn ray_box(
    origin: Vec3<f64>,
    dir: Vec3<f64>,
    center: Vec3<f64>,
    half: Vec3<f64>,
    yaw: f64,
) -> Option<Hit> {
    let rot = yaw_matrix(yaw);
    let inv = rot.transpose();
    let o = inv.mul_vec(origin - center);
    let d = inv.mul_vec(dir);

    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    let mut axis_near = 0usize;
    for axis in 0..3 {
        if d[axis].abs() < 1e-15 {
            if o[axis].abs() > half[axis] {
                return None;
            }
            continue;
        }
        let mut t0 = (-half[axis] - o[axis]) / d[axis];
        let mut t1 = (half[axis] - o[axis]) / d[axis];
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_near {
            t_near = t0;
            axis_near = axis;
        }
        t_far = t_far.min(t1);
        if t_near > t_far {
            return None;
        }
    }
    let t = if t_near > 1e-9 {
        t_near
    } else if t_far > 1e-9 {
        // origin inside the box
        t_far
    } else {
        return None;
    };
    let p = o + d * t;
    // face-local texture coordinates: the two axes orthogonal to the hit
    // face, offset so they are non-negative
    let (ua, va) = match axis_near {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    Some(Hit {
        t,
        u: p[ua] + half[ua],
        v: p[va] + half[va],
    })
}

/// Ray / finite quad intersection.
pub fn ray_quad(
    origin: Vec3<f64>,
    dir: Vec3<f64>,
    q_origin: Vec3<f64>,
    q_u: Vec3<f64>,
    q_v: Vec3<f64>,
) -> Option<Hit> {
    let n = q_u.cross(q_v);
    let denom = dir.dot(n);
    if denom.abs() < 1e-15 {
        return None;
    }
    let t = (q_origin - origin).dot(n) / denom;
    if t <= 1e-9 {
        return None;
    }
    let p = origin + dir * t - q_origin;
    let uu = q_u.dot(q_u);
    let vv = q_v.dot(q_v);
    let uv = q_u.dot(q_v);
    let pu = p.dot(q_u);
    let pv = p.dot(q_v);
    // solve the 2x2 system for barycentric-style coordinates
    let det = uu * vv - uv * uv;
    if det.abs() < 1e-15 {
        return None;
    }
    let a = (pu * vv - pv * uv) / det;
    let b = (pv * uu - pu * uv) / det;
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return None;
    }
    Some(Hit {
        t,
        u: a * uu.sqrt(),
        v: b * vv.sqrt(),
    })
}

impl PrimitiveSpec {
    pub fn cast(&self, origin: Vec3<f64>, dir: Vec3<f64>) -> Option<Hit> {
        match self {
            Self::Quad { origin: o, u, v, .. } => ray_quad(
                origin,
                dir,
                Vec3::from_array(*o),
                Vec3::from_array(*u),
                Vec3::from_array(*v),
            ),
            Self::Box { center, half_extents, yaw, .. } => ray_box(
                origin,
                dir,
                Vec3::from_array(*center),
                Vec3::from_array(*half_extents),
                *yaw,
            ),
        }
    }

    pub fn texture(&self) -> &TextureSpec {
        match self {
            Self::Quad { texture, .. } | Self::Box { texture, .. } => texture,
        }
    }

    /// True when a point is strictly inside a box primitive (quads have
    /// no interior).
    pub fn contains(&self, p: Vec3<f64>) -> bool {
        match self {
            Self::Quad { .. } => false,
            Self::Box { center, half_extents, yaw, .. } => {
                let local = yaw_matrix(*yaw)
                    .transpose()
                    .mul_vec(p - Vec3::from_array(*center));
                let h = Vec3::from_array(*half_extents);
                local.x.abs() < h.x && local.y.abs() < h.y && local.z.abs() < h.z
            }
        }
    }
}
