//! Synthesis of locally blurred training data, motion statistics that tell
//! local blur from global blur, and deblurring evaluation metrics.

pub mod composite;
pub mod crf;
mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod sum;
pub mod synth;
pub mod transform;
pub mod warp;

pub use composite::composite_over;
pub use crf::{crf_forward, crf_inverse};
pub use error::{Error, Result};
pub use image::{AlphaMask, LinearImage, Plane, ProbabilityMap, SrgbImage};
pub use transform::AffineTransform;
pub use warp::affine_warp;
