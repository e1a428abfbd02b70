use crate::error::{Error, Result};
use crate::math::Vec2;
use crate::scalar::{sc, Scalar};
use crate::scene::{CameraView, ImageBuf, Mask, ObjectBox, SceneDataset};

/// Minimum mask pixels for a usable object view.
pub const MIN_VISIBLE_PIXELS: usize = 100;

/// Convex hull of 2D points (gift wrapping); returns hull vertices in
/// order. Degenerate inputs return what they can.
fn convex_hull<T: Scalar>(points: &[Vec2<T>]) -> Vec<Vec2<T>> {
    if points.len() < 3 {
        return points.to_vec();
    }
    let mut start = 0;
    for (i, p) in points.iter().enumerate() {
        if (p.x, p.y) < (points[start].x, points[start].y) {
            start = i;
        }
    }
    let mut hull = vec![points[start]];
    let mut current = start;
    loop {
        let mut next = (current + 1) % points.len();
        for (i, p) in points.iter().enumerate() {
            if i == next || i == current {
                continue;
            }
            let a = points[current];
            let b = points[next];
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            let closer = cross == T::zero()
                && (p.x - a.x) * (p.x - a.x) + (p.y - a.y) * (p.y - a.y)
                    > (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
            if cross < T::zero() || closer {
                next = i;
            }
        }
        if next == start {
            break;
        }
        hull.push(points[next]);
        current = next;
        if hull.len() > points.len() {
            break;
        }
    }
    hull
}

fn point_in_hull<T: Scalar>(p: Vec2<T>, hull: &[Vec2<T>]) -> bool {
    if hull.len() < 3 {
        return false;
    }
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if cross < T::zero() {
            return false;
        }
    }
    true
}

/// Mask of the projected (optionally inflated) box hull inside the image.
/// Returns `None` when no corner projects in front of the camera.
pub fn project_box_mask<T: Scalar>(
    b: &ObjectBox<T>,
    cam: &CameraView<T>,
    inflate: T,
) -> Option<Mask> {
    let mut inflated = b.clone();
    inflated.half_extents = b.half_extents * (T::one() + inflate);
    let mut pts = Vec::with_capacity(8);
    for corner in inflated.corners() {
        let (uv, depth) = cam.project(corner);
        if depth > sc(0.05) {
            pts.push(uv);
        }
    }
    if pts.len() < 3 {
        return None;
    }
    let hull = convex_hull(&pts);
    let w = cam.width as usize;
    let h = cam.height as usize;
    let mut mask = Mask::new(w, h, false);
    // bounding rectangle clipped to the image, then exact hull test
    let (mut x0, mut x1, mut y0, mut y1) = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
    for p in &hull {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let xi0 = x0.to_f64_c().floor().max(0.0) as usize;
    let xi1 = (x1.to_f64_c().ceil() as i64).clamp(0, w as i64) as usize;
    let yi0 = y0.to_f64_c().floor().max(0.0) as usize;
    let yi1 = (y1.to_f64_c().ceil() as i64).clamp(0, h as i64) as usize;
    let half = sc::<T>(0.5);
    let mut any = false;
    for y in yi0..yi1 {
        for x in xi0..xi1 {
            let px = Vec2::new(T::from_usize(x).unwrap() + half, T::from_usize(y).unwrap() + half);
            if point_in_hull(px, &hull) {
                mask.set(x, y, true);
                any = true;
            }
        }
    }
    any.then_some(mask)
}

/// One supervision view of an object: the crop, its mask (true = object
/// pixels), and the camera expressed relative to the object's canonical
/// frame.
#[derive(Clone, Debug)]
pub struct ObjectView<T> {
    pub camera: CameraView<T>,
    pub target: ImageBuf<T>,
    pub mask: Mask,
    pub timestep: i64,
    pub camera_id: String,
    /// Distance from the box center to the observing camera center.
    pub distance: T,
}

/// Collects usable views of one object across all timesteps and cameras:
/// dataset masks when present, projected-box hulls otherwise; views with
/// fewer than 100 visible pixels are skipped. Cameras are re-expressed in
/// the object's canonical (box) frame.
pub fn extract_object_views<T: Scalar>(
    dataset: &SceneDataset<T>,
    object_id: &str,
) -> Result<Vec<ObjectView<T>>> {
    let boxes = dataset.boxes_for(object_id);
    if boxes.is_empty() {
        return Err(Error::ObjectNeverVisible(object_id.into()));
    }
    let mut views = Vec::new();
    for b in boxes {
        let pose = b.pose();
        for view in dataset.views_at(b.timestep) {
            if view.is_test {
                continue;
            }
            let cam = &view.camera;
            let mask = match b.masks.get(&cam.camera_id) {
                Some(m) => m.clone(),
                None => match project_box_mask(b, cam, T::zero()) {
                    Some(m) => m,
                    None => continue,
                },
            };
            if mask.count() < MIN_VISIBLE_PIXELS {
                continue;
            }
            // crop to the mask's bounding rectangle
            let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0usize, usize::MAX, 0usize);
            for y in 0..mask.height {
                for x in 0..mask.width {
                    if mask.get(x, y) {
                        x0 = x0.min(x);
                        x1 = x1.max(x);
                        y0 = y0.min(y);
                        y1 = y1.max(y);
                    }
                }
            }
            let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);

            // camera relative to the object frame: x_cam = R (R_o x_obj + c_o) + T
            let rel_rotation = cam.rotation * pose.rotation;
            let rel_translation = cam.rotation.mul_vec(pose.translation) + cam.translation;
            let mut rel_cam = cam.cropped(x0 as u32, y0 as u32, w as u32, h as u32);
            rel_cam.rotation = rel_rotation;
            rel_cam.translation = rel_translation;

            views.push(ObjectView {
                camera: rel_cam,
                target: view.image.crop(x0, y0, w, h),
                mask: mask.crop(x0, y0, w, h),
                timestep: b.timestep,
                camera_id: cam.camera_id.clone(),
                distance: b.center.distance(cam.center()),
            });
        }
    }
    if views.is_empty() {
        return Err(Error::ObjectNeverVisible(object_id.into()));
    }
    Ok(views)
}
