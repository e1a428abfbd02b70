use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::prior::PriorPointCloud;
use crate::scalar::{sc, Scalar};
use crate::scene::SceneDataset;

/// Target span of one bin (meters of ego arc length) for automatic bin
/// counts: a 400 m drive maps to six bins.
const AUTO_BIN_SPAN_M: f64 = 65.0;

/// Default overlap between neighboring bins as a fraction of bin width.
pub const DEFAULT_OVERLAP_FRAC: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinCount {
    Fixed(usize),
    Auto,
}

/// One depth bin along the ego trajectory.
#[derive(Clone, Debug)]
pub struct Bin<T> {
    /// Arc-length interval covered by this bin, including the overlap
    /// extension into the next bin.
    pub interval: (T, T),
    /// Tail of this bin shared with the next one (alignment region).
    pub overlap_with_next: Option<(T, T)>,
    /// Timesteps whose ego position falls in this bin (each timestep
    /// belongs to exactly one bin).
    pub timesteps: Vec<i64>,
}

/// Depth-ordered partition of the drive into overlapping bins.
#[derive(Clone, Debug)]
pub struct BinSchedule<T> {
    pub bins: Vec<Bin<T>>,
    pub total_arc: T,
    /// Cumulative arc length of each ego position, ordered by timestep.
    pub arc_by_timestep: Vec<(i64, T)>,
    /// Ego trajectory waypoints (for projecting prior points).
    pub polyline: Vec<Vec3<T>>,
    pub overlap_frac: f64,
}

impl<T: Scalar> BinSchedule<T> {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Arc-length coordinate of a world point: the cumulative arc of its
    /// closest point on the trajectory polyline.
    pub fn arc_of_point(&self, p: Vec3<T>) -> T {
        if self.polyline.len() == 1 {
            return T::zero();
        }
        let mut best_d = T::infinity();
        let mut best_arc = T::zero();
        let mut arc_start = T::zero();
        for seg in self.polyline.windows(2) {
            let ab = seg[1] - seg[0];
            let len = ab.norm();
            let t = if len > T::zero() {
                ((p - seg[0]).dot(ab) / (len * len)).max(T::zero()).min(T::one())
            } else {
                T::zero()
            };
            let closest = seg[0] + ab * t;
            let d = p.distance(closest);
            if d < best_d {
                best_d = d;
                best_arc = arc_start + len * t;
            }
            arc_start += len;
        }
        best_arc
    }

    /// Prior-point indices initializing each bin: bin 0 owns everything up
    /// to its extended end; later bins own the newly uncovered region.
    pub fn partition_prior_points(&self, cloud: &PriorPointCloud<T>) -> Vec<Vec<usize>> {
        let mut covered_end = T::neg_infinity();
        let mut out = Vec::with_capacity(self.bins.len());
        for (bi, bin) in self.bins.iter().enumerate() {
            let hi = bin.interval.1;
            let lo = covered_end;
            let idx: Vec<usize> = cloud
                .points
                .iter()
                .enumerate()
                .filter(|(_, p)| {
                    let arc = self.arc_of_point(p.position);
                    if bi == 0 {
                        arc <= hi
                    } else {
                        arc > lo && arc <= hi
                    }
                })
                .map(|(i, _)| i)
                .collect();
            covered_end = hi;
            out.push(idx);
        }
        out
    }
}

/// Uniform division of the ego-trajectory arc length into `n` bins with a
/// positive overlap margin; each timestep is assigned to the bin holding
/// its ego position. `Auto` sizes bins to roughly 65 m.
pub fn partition_bins<T: Scalar>(
    dataset: &SceneDataset<T>,
    _prior: &PriorPointCloud<T>,
    n: BinCount,
    overlap_frac: f64,
) -> Result<BinSchedule<T>> {
    let ego = dataset.ego_positions();
    if ego.is_empty() {
        return Err(Error::validation("ego", "dataset has no timesteps"));
    }
    let polyline: Vec<Vec3<T>> = ego.iter().map(|(_, p)| *p).collect();
    let mut arc = Vec::with_capacity(ego.len());
    let mut acc = T::zero();
    for (i, (t, p)) in ego.iter().enumerate() {
        if i > 0 {
            acc += p.distance(ego[i - 1].1);
        }
        arc.push((*t, acc));
    }
    let total = acc;

    let n_bins = match n {
        BinCount::Fixed(k) => {
            if k == 0 {
                return Err(Error::parameter("bins", "must be at least 1"));
            }
            if k > ego.len() {
                return Err(Error::parameter(
                    "bins",
                    format!("{k} bins exceed the {} timesteps", ego.len()),
                ));
            }
            k
        }
        BinCount::Auto => {
            let by_span = (total.to_f64_c() / AUTO_BIN_SPAN_M).round() as usize;
            by_span.clamp(1, ego.len().max(1))
        }
    };

    let width = total / T::from_usize(n_bins).unwrap();
    let margin = width * sc::<T>(overlap_frac);
    let mut bins = Vec::with_capacity(n_bins);
    for i in 0..n_bins {
        let start = width * T::from_usize(i).unwrap();
        let core_end = if i + 1 == n_bins {
            total
        } else {
            width * T::from_usize(i + 1).unwrap()
        };
        let extended_end = if i + 1 == n_bins { total } else { core_end + margin };
        let timesteps: Vec<i64> = arc
            .iter()
            .filter(|(_, a)| {
                if i + 1 == n_bins {
                    *a >= start
                } else {
                    *a >= start && *a < core_end
                }
            })
            .map(|(t, _)| *t)
            .collect();
        bins.push(Bin {
            interval: (start, extended_end),
            overlap_with_next: (i + 1 < n_bins).then_some((core_end - margin, core_end)),
            timesteps,
        });
    }

    Ok(BinSchedule {
        bins,
        total_arc: total,
        arc_by_timestep: arc,
        polyline,
        overlap_frac,
    })
}
