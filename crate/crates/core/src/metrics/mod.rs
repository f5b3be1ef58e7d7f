//! Restoration quality metrics and the segmentation-style losses.

mod fidelity;
mod losses;
mod ssim;
mod stratified;

pub use fidelity::{mse, psnr, psnr_8bit, psnr_from_mse, psnr_with, PeakMode};
pub use losses::{bce_loss, bsa_loss, combined_loss, dice_loss, AttentionMapStack, LossWeights, BCE_EPSILON};
pub use ssim::{ssim, ssim_map, ssim_with, SsimParams};
pub use stratified::{
    db_value, evaluate, stratified_eval, stratified_eval_with, EvalOptions, EvalReport, Strata, StratumMetrics,
    DEFAULT_STRATIFY_THRESHOLD,
};
