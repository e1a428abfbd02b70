use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::math::{Quat, Rigid, Vec3};
use crate::scalar::{logit, sc, Scalar};
use crate::scene::{CameraView, Gaussian};

/// Fraction of the box extents within which node Gaussians must stay.
pub const NODE_BOUND_FACTOR: f64 = 1.5;

/// Floor and cap of the distance-based opacity scale.
pub const OPACITY_SCALE_MIN: f64 = 0.5;
pub const OPACITY_SCALE_MAX: f64 = 1.0;

/// One dynamic object: Gaussians in the canonical box frame plus its
/// per-timestep world poses.
#[derive(Clone, Debug)]
pub struct DynamicNode<T> {
    pub object_id: String,
    /// Gaussians in the canonical object (box) frame.
    pub gaussians: Vec<Gaussian<T>>,
    /// Object-to-world pose per active timestep.
    pub poses: BTreeMap<i64, Rigid<T>>,
    pub half_extents: Vec3<T>,
    /// Distance from the box center to the closest observing camera at
    /// first appearance; reference for the opacity adjustment.
    pub d_ref: Option<T>,
    /// Single-keyframe nodes hold their pose at every timestep.
    pub hold_single_pose: bool,
}

impl<T: Scalar> DynamicNode<T> {
    pub fn first_timestep(&self) -> i64 {
        self.poses.keys().next().copied().unwrap_or(0)
    }

    pub fn is_active(&self, timestep: i64) -> bool {
        self.hold_single_pose || self.poses.contains_key(&timestep)
    }

    pub fn pose_at(&self, timestep: i64) -> Option<Rigid<T>> {
        if let Some(p) = self.poses.get(&timestep) {
            return Some(*p);
        }
        if self.hold_single_pose {
            return self.poses.values().next().copied();
        }
        None
    }

    /// Drops Gaussians outside `NODE_BOUND_FACTOR` times the box extents.
    pub fn prune_to_bounds(&mut self) {
        let bound = self.half_extents * sc::<T>(NODE_BOUND_FACTOR);
        self.gaussians.retain(|g| {
            g.position.x.abs() <= bound.x
                && g.position.y.abs() <= bound.y
                && g.position.z.abs() <= bound.z
        });
    }
}

/// Transforms a node's Gaussians into the world frame at a timestep
/// (rigid: positions mapped, rotations composed, scales unchanged).
pub fn pose_node<T: Scalar>(node: &DynamicNode<T>, timestep: i64) -> Result<Vec<Gaussian<T>>> {
    let pose = node.pose_at(timestep).ok_or_else(|| Error::InactiveTimestep {
        object_id: node.object_id.clone(),
        timestep,
    })?;
    let q_pose = Quat::from_matrix(&pose.rotation);
    Ok(node
        .gaussians
        .iter()
        .map(|g| {
            let mut out = g.clone();
            out.position = pose.apply(g.position);
            out.rotation = q_pose.mul(g.rotation).normalized();
            out
        })
        .collect())
}

/// Distance-based opacity scale: `clamp(d_ref / d, 0.5, 1.0)`, monotone
/// non-increasing in the camera distance. Distances below 0.1 m clamp.
pub fn opacity_scale<T: Scalar>(d_ref: T, distance: T) -> T {
    let d = if distance < sc(0.1) {
        log::warn!("opacity adjustment: camera distance {distance} below 0.1 m, clamping");
        sc(0.1)
    } else {
        distance
    };
    (d_ref / d).min(sc(OPACITY_SCALE_MAX)).max(sc(OPACITY_SCALE_MIN))
}

/// Effective opacities of a node's Gaussians for one camera at one
/// timestep: base opacity scaled by the clamped inverse-distance factor.
pub fn adjust_opacity<T: Scalar>(
    node: &DynamicNode<T>,
    timestep: i64,
    cam: &CameraView<T>,
) -> Result<Vec<T>> {
    let pose = node.pose_at(timestep).ok_or_else(|| Error::InactiveTimestep {
        object_id: node.object_id.clone(),
        timestep,
    })?;
    let d = pose.translation.distance(cam.center());
    let d_ref = node.d_ref.unwrap_or(d);
    let s = opacity_scale(d_ref, d);
    Ok(node.gaussians.iter().map(|g| g.opacity() * s).collect())
}

/// The set of per-object nodes, kept in chronological insertion order
/// (first appearance, then id) so composition is reproducible.
#[derive(Clone, Debug, Default)]
pub struct DynamicGraph<T> {
    pub nodes: Vec<DynamicNode<T>>,
}

impl<T: Scalar> DynamicGraph<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn insert(&mut self, node: DynamicNode<T>) -> Result<()> {
        if self.nodes.iter().any(|n| n.object_id == node.object_id) {
            return Err(Error::ObjectIdCollision(node.object_id));
        }
        self.nodes.push(node);
        self.nodes.sort_by(|a, b| {
            a.first_timestep()
                .cmp(&b.first_timestep())
                .then_with(|| a.object_id.cmp(&b.object_id))
        });
        Ok(())
    }

    pub fn get(&self, object_id: &str) -> Option<&DynamicNode<T>> {
        self.nodes.iter().find(|n| n.object_id == object_id)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Composite field at one timestep: the static Gaussians concatenated
/// with every active node posed into the world frame, in chronological
/// node order. With a camera, node opacities get the distance adjustment.
pub fn compose<T: Scalar>(
    static_field: &[Gaussian<T>],
    graph: &DynamicGraph<T>,
    timestep: i64,
    cam: Option<&CameraView<T>>,
) -> Vec<Gaussian<T>> {
    let mut out: Vec<Gaussian<T>> = static_field.to_vec();
    for node in &graph.nodes {
        if !node.is_active(timestep) {
            continue;
        }
        let mut posed = pose_node(node, timestep).expect("active timestep");
        if let Some(cam) = cam {
            if let Some(d_ref) = node.d_ref {
                let pose = node.pose_at(timestep).expect("active timestep");
                let s = opacity_scale(d_ref, pose.translation.distance(cam.center()));
                if s < T::one() {
                    for g in posed.iter_mut() {
                        g.opacity_logit = logit(g.opacity() * s);
                    }
                }
            }
        }
        out.extend(posed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Mat3;
    use std::f64::consts::FRAC_PI_2;

    fn node_with(gaussians: Vec<Gaussian<f64>>, poses: Vec<(i64, Rigid<f64>)>) -> DynamicNode<f64> {
        DynamicNode {
            object_id: "obj".into(),
            gaussians,
            poses: poses.into_iter().collect(),
            half_extents: Vec3::splat(1.0),
            d_ref: Some(10.0),
            hold_single_pose: false,
        }
    }

    fn sample_gaussians() -> Vec<Gaussian<f64>> {
        vec![
            Gaussian::isotropic(Vec3::new(0.2, 0.0, 0.0), 0.1, Vec3::splat(0.5), 0.5),
            Gaussian::isotropic(Vec3::new(-0.3, 0.4, 0.1), 0.2, Vec3::splat(0.6), 0.4),
        ]
    }

    #[test]
    fn identity_pose_is_passthrough() {
        let node = node_with(sample_gaussians(), vec![(0, Rigid::identity())]);
        let posed = pose_node(&node, 0).unwrap();
        for (a, b) in posed.iter().zip(node.gaussians.iter()) {
            assert!(a.position.distance(b.position) < 1e-15);
        }
    }

    #[test]
    fn translation_shifts_positions_only() {
        let t = Rigid::new(Mat3::identity(), Vec3::new(1.0, 2.0, 3.0));
        let node = node_with(sample_gaussians(), vec![(0, t)]);
        let posed = pose_node(&node, 0).unwrap();
        for (a, b) in posed.iter().zip(node.gaussians.iter()) {
            assert!(a.position.distance(b.position + Vec3::new(1.0, 2.0, 3.0)) < 1e-12);
            let ca = a.covariance();
            let cb = b.covariance();
            for r in 0..3 {
                for c in 0..3 {
                    assert!((ca.m[r][c] - cb.m[r][c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn yaw_rotates_covariance_consistently() {
        let rot = Quat::<f64>::from_yaw_pitch(FRAC_PI_2, 0.0).to_matrix();
        let pose = Rigid::new(rot, Vec3::zero());
        let mut gs = sample_gaussians();
        gs[0].log_scale = Vec3::new(0.5, -0.3, 0.1);
        gs[0].rotation = Quat::new(0.9, 0.1, -0.2, 0.3).normalized();
        let node = node_with(gs.clone(), vec![(0, pose)]);
        let posed = pose_node(&node, 0).unwrap();
        // covariance_of(posed) = R cov R^T
        let expect = rot * gs[0].covariance() * rot.transpose();
        let got = posed[0].covariance();
        for r in 0..3 {
            for c in 0..3 {
                assert!((got.m[r][c] - expect.m[r][c]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rigidity_preserves_pairwise_distances() {
        let rot = Quat::<f64>::new(0.7, 0.3, -0.4, 0.2).normalized().to_matrix();
        let pose = Rigid::new(rot, Vec3::new(5.0, -2.0, 1.0));
        let node = node_with(sample_gaussians(), vec![(3, pose)]);
        let posed = pose_node(&node, 3).unwrap();
        let before = node.gaussians[0].position.distance(node.gaussians[1].position);
        let after = posed[0].position.distance(posed[1].position);
        assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn inactive_timestep_is_error() {
        let node = node_with(sample_gaussians(), vec![(0, Rigid::identity())]);
        assert!(pose_node(&node, 7).is_err());
    }

    #[test]
    fn opacity_scale_behavior() {
        assert_eq!(opacity_scale(10.0, 10.0), 1.0);
        assert_eq!(opacity_scale(10.0, 20.0), 0.5, "clamped at the floor");
        assert_eq!(opacity_scale(10.0, 5.0), 1.0, "never above base");
        // monotone non-increasing
        let mut prev = f64::INFINITY;
        for d in [1.0, 5.0, 10.0, 12.0, 15.0, 18.0, 25.0] {
            let s = opacity_scale(10.0, d);
            assert!(s <= prev);
            prev = s;
        }
    }

    #[test]
    fn adjusted_opacity_orders_by_distance() {
        let cam = CameraView::<f64> {
            intrinsics: Mat3::new(50.0, 0.0, 25.0, 0.0, 50.0, 25.0, 0.0, 0.0, 1.0),
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
            width: 50,
            height: 50,
            camera_id: "c".into(),
            timestep: 0,
            fusion_weight: 1.0,
        };
        let mut near = node_with(sample_gaussians(), vec![(0, Rigid::new(Mat3::identity(), Vec3::new(0.0, 0.0, 5.0)))]);
        near.d_ref = Some(5.0);
        let mut far = near.clone();
        far.object_id = "far".into();
        far.poses = [(0i64, Rigid::new(Mat3::identity(), Vec3::new(0.0, 0.0, 20.0)))]
            .into_iter()
            .collect();
        let near_op = adjust_opacity(&near, 0, &cam).unwrap();
        let far_op = adjust_opacity(&far, 0, &cam).unwrap();
        for (n, f) in near_op.iter().zip(far_op.iter()) {
            assert!(n >= f, "closer object keeps higher opacity");
        }
    }

    #[test]
    fn compose_identity_and_counts() {
        let stat = sample_gaussians();
        let mut graph = DynamicGraph::new();
        let g1 = compose(&stat, &graph, 0, None);
        assert_eq!(g1.len(), stat.len());

        graph
            .insert(node_with(sample_gaussians(), vec![(1, Rigid::identity())]))
            .unwrap();
        assert_eq!(compose(&stat, &graph, 0, None).len(), stat.len(), "inactive at t=0");
        assert_eq!(compose(&stat, &graph, 1, None).len(), stat.len() + 2);
    }

    #[test]
    fn compose_is_deterministic() {
        let stat = sample_gaussians();
        let mut graph = DynamicGraph::new();
        graph
            .insert(node_with(sample_gaussians(), vec![(0, Rigid::identity())]))
            .unwrap();
        let a = compose(&stat, &graph, 0, None);
        let b = compose(&stat, &graph, 0, None);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.position, y.position);
            assert_eq!(x.opacity_logit, y.opacity_logit);
        }
    }

    #[test]
    fn id_collision_rejected() {
        let mut graph = DynamicGraph::new();
        graph
            .insert(node_with(sample_gaussians(), vec![(0, Rigid::identity())]))
            .unwrap();
        let err = graph
            .insert(node_with(sample_gaussians(), vec![(1, Rigid::identity())]))
            .unwrap_err();
        assert!(err.to_string().contains("collision"));
    }
}
