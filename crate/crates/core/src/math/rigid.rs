use super::mat::Mat3;
use super::vec::Vec3;
use crate::scalar::Scalar;

/// Rigid transform `x -> R x + t` (sensor poses, object poses).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rigid<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Scalar> Rigid<T> {
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Mat3::identity(), Vec3::zero())
    }

    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -rt.mul_vec(self.translation))
    }

    /// `self ∘ rhs`: applies `rhs` first.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self::new(
            self.rotation * rhs.rotation,
            self.rotation.mul_vec(rhs.translation) + self.translation,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let r: Mat3<f64> = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let t = Rigid::new(r, Vec3::new(1.0, -2.0, 3.0));
        let p = Vec3::new(0.4, 0.8, -1.5);
        let q = t.inverse().apply(t.apply(p));
        assert!(q.distance(p) < 1e-12);
    }

    #[test]
    fn compose_order() {
        let a = Rigid::new(Mat3::<f64>::identity(), Vec3::new(1.0, 0.0, 0.0));
        let r: Mat3<f64> = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let b = Rigid::new(r, Vec3::zero());
        // a ∘ b: rotate first, then translate
        let p = (a.compose(&b)).apply(Vec3::new(1.0, 0.0, 0.0));
        assert!(p.distance(Vec3::new(1.0, 1.0, 0.0)) < 1e-12);
    }
}
