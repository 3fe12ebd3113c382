//! The dyadic-parabolic tight frame: discrete wave packets, the analysis
//! and synthesis transforms, parabolic cutoffs, and the FIO-adapted norm.

mod cutoff;
mod fionorm;
pub mod frame;
mod transform;

pub use cutoff::{parabolic_cutoff_phi, reproducing_m, PhiOmega};
pub use fionorm::{norm_hsp_fio, FioNormEngine, FIONormReport};
pub use frame::{build_frame, PacketBlockInfo, PacketFrame};
pub use transform::{synthesize_v, transform_w, PacketCoefficients};
