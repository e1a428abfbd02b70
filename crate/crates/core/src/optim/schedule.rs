use crate::scalar::Scalar;

/// Log-space exponential interpolation between two learning rates over a
/// fixed number of steps; clamps to the final value afterwards.
#[derive(Clone, Copy, Debug)]
pub struct ExpSchedule<T> {
    pub init: T,
    pub final_value: T,
    pub steps: usize,
}

impl<T: Scalar> ExpSchedule<T> {
    pub fn new(init: T, final_value: T, steps: usize) -> Self {
        Self { init, final_value, steps }
    }

    pub fn constant(value: T) -> Self {
        Self { init: value, final_value: value, steps: 1 }
    }

    pub fn value(&self, step: usize) -> T {
        if self.steps == 0 || self.init == self.final_value {
            return self.final_value;
        }
        let t = T::from_usize(step.min(self.steps)).unwrap()
            / T::from_usize(self.steps).unwrap();
        self.init * (self.final_value / self.init).powf(t)
    }
}
