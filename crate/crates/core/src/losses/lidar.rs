use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::prior::{KdTree, PriorPointCloud};
use crate::scalar::{sc, Scalar};
use crate::scene::Gaussian;

/// Geometric supervision: mean squared distance from each Gaussian's
/// position to its nearest prior point. Gradient is `2 (p - nn) / s` per
/// Gaussian. Applied to static Gaussians only.
pub fn lidar_loss<T: Scalar>(
    gaussians: &[Gaussian<T>],
    prior: &PriorPointCloud<T>,
) -> Result<(T, Vec<Vec3<T>>)> {
    if prior.is_empty() {
        return Err(Error::EmptyPrior);
    }
    let tree = KdTree::build(prior.positions());
    Ok(lidar_loss_with_tree(gaussians, &tree))
}

/// Variant taking a prebuilt tree (built once per epoch and shared).
pub fn lidar_loss_with_tree<T: Scalar>(
    gaussians: &[Gaussian<T>],
    tree: &KdTree<T>,
) -> (T, Vec<Vec3<T>>) {
    if gaussians.is_empty() || tree.is_empty() {
        return (T::zero(), vec![Vec3::zero(); gaussians.len()]);
    }
    let s = T::from_usize(gaussians.len()).unwrap();
    let two = sc::<T>(2.0);
    let mut loss = T::zero();
    let mut grads = Vec::with_capacity(gaussians.len());
    for g in gaussians {
        let (ni, d2) = tree.nearest(g.position).expect("non-empty tree");
        loss += d2;
        grads.push((g.position - tree.point(ni)) * (two / s));
    }
    (loss / s, grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::PriorPoint;

    fn prior_of(positions: Vec<Vec3<f64>>) -> PriorPointCloud<f64> {
        PriorPointCloud {
            points: positions
                .into_iter()
                .map(|p| PriorPoint {
                    position: p,
                    color: None,
                    source_camera: None,
                    timestep: 0,
                })
                .collect(),
            depth_range: (0.0, 1.0),
        }
    }

    fn gaussian_at(p: Vec3<f64>) -> Gaussian<f64> {
        Gaussian::isotropic(p, 0.1, Vec3::splat(0.5), 0.5)
    }

    #[test]
    fn on_prior_points_loss_is_zero() {
        let pts = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)];
        let gs: Vec<_> = pts.iter().map(|&p| gaussian_at(p)).collect();
        let (loss, grads) = lidar_loss(&gs, &prior_of(pts)).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.iter().all(|g| g.norm() == 0.0));
    }

    #[test]
    fn unit_offset_closed_form() {
        // one Gaussian 1 m from its unique nearest prior point, s = 1
        let gs = vec![gaussian_at(Vec3::new(1.0, 0.0, 0.0))];
        let prior = prior_of(vec![Vec3::zero()]);
        let (loss, grads) = lidar_loss(&gs, &prior).unwrap();
        assert!((loss - 1.0).abs() < 1e-12);
        assert!((grads[0].x - 2.0).abs() < 1e-12);
        assert!(grads[0].y.abs() < 1e-12);
    }

    #[test]
    fn permutation_invariant() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(0.0, 5.0, 1.0),
        ];
        let gs = vec![gaussian_at(Vec3::new(1.0, 0.4, 0.2))];
        let (l1, g1) = lidar_loss(&gs, &prior_of(pts.clone())).unwrap();
        let mut rev = pts;
        rev.reverse();
        let (l2, g2) = lidar_loss(&gs, &prior_of(rev)).unwrap();
        assert_eq!(l1, l2);
        assert!(g1[0].distance(g2[0]) < 1e-15);
    }

    #[test]
    fn gradient_matches_fd_on_both_sides_of_a_tie() {
        // prior points at x = 0 and x = 2; the tie plane is x = 1
        let prior = prior_of(vec![Vec3::zero(), Vec3::new(2.0, 0.0, 0.0)]);
        for &x in &[0.9, 1.1] {
            let gs = vec![gaussian_at(Vec3::new(x, 0.3, 0.0))];
            let (_, grads) = lidar_loss(&gs, &prior).unwrap();
            let eps = 1e-6;
            let lp = lidar_loss(&[gaussian_at(Vec3::new(x + eps, 0.3, 0.0))], &prior)
                .unwrap()
                .0;
            let lm = lidar_loss(&[gaussian_at(Vec3::new(x - eps, 0.3, 0.0))], &prior)
                .unwrap()
                .0;
            let fd = (lp - lm) / (2.0 * eps);
            assert!((grads[0].x - fd).abs() < 1e-6, "x={x}: {} vs {fd}", grads[0].x);
        }
    }

    #[test]
    fn empty_prior_is_error() {
        let gs = vec![gaussian_at(Vec3::zero())];
        assert!(lidar_loss(&gs, &prior_of(vec![])).is_err());
    }
}
