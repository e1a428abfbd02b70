use crate::scalar::Scalar;
use crate::scene::sh::SH_COEFFS;

/// First/second moment accumulators for one Gaussian's parameters.
#[derive(Clone, Debug)]
pub struct AdamSlot<T> {
    pub m_position: [T; 3],
    pub v_position: [T; 3],
    pub m_rotation: [T; 4],
    pub v_rotation: [T; 4],
    pub m_log_scale: [T; 3],
    pub v_log_scale: [T; 3],
    pub m_opacity: T,
    pub v_opacity: T,
    pub m_sh: [[T; SH_COEFFS]; 3],
    pub v_sh: [[T; SH_COEFFS]; 3],
}

impl<T: Scalar> AdamSlot<T> {
    pub fn zeroed() -> Self {
        Self {
            m_position: [T::zero(); 3],
            v_position: [T::zero(); 3],
            m_rotation: [T::zero(); 4],
            v_rotation: [T::zero(); 4],
            m_log_scale: [T::zero(); 3],
            v_log_scale: [T::zero(); 3],
            m_opacity: T::zero(),
            v_opacity: T::zero(),
            m_sh: [[T::zero(); SH_COEFFS]; 3],
            v_sh: [[T::zero(); SH_COEFFS]; 3],
        }
    }
}

/// One adaptive-moment update of a scalar parameter.
///
/// `bias1`/`bias2` are the precomputed `1 - beta^t` corrections shared by
/// every parameter at one iteration.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn adam_update<T: Scalar>(
    param: &mut T,
    grad: T,
    m: &mut T,
    v: &mut T,
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    bias1: T,
    bias2: T,
) {
    *m = beta1 * *m + (T::one() - beta1) * grad;
    *v = beta2 * *v + (T::one() - beta2) * grad * grad;
    let m_hat = *m / bias1;
    let v_hat = *v / bias2;
    *param -= lr * m_hat / (v_hat.sqrt() + eps);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gradient_moves_parameter_down() {
        let mut p = 1.0f64;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=100 {
            let b1 = 1.0 - 0.9f64.powi(t);
            let b2 = 1.0 - 0.999f64.powi(t);
            adam_update(&mut p, 2.0, &mut m, &mut v, 1e-2, 0.9, 0.999, 1e-15, b1, b2);
        }
        assert!(p < 1.0 - 0.5, "p = {p}");
    }

    #[test]
    fn zero_gradient_keeps_parameter() {
        let mut p = 0.7f64;
        let (mut m, mut v) = (0.0, 0.0);
        adam_update(&mut p, 0.0, &mut m, &mut v, 1e-2, 0.9, 0.999, 1e-15, 0.1, 0.001);
        assert_eq!(p, 0.7);
    }
}
