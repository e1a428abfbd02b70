//! Composite dynamic Gaussian graph: per-object nodes trained in their
//! canonical box frames, posed into the world per timestep, opacity-
//! adjusted by camera distance and concatenated with the static field.

mod extract;
mod node;
mod node_train;

pub use extract::{extract_object_views, project_box_mask, ObjectView, MIN_VISIBLE_PIXELS};
pub use node::{
    adjust_opacity, compose, opacity_scale, pose_node, DynamicGraph, DynamicNode,
    NODE_BOUND_FACTOR, OPACITY_SCALE_MAX, OPACITY_SCALE_MIN,
};
pub use node_train::{train_node, train_node_from_views, MIN_OBJECT_VIEWS};
