//! Bohr–Sommerfeld ħ ladders, transverse widths of scar functions and the
//! power-law fit that separates superscars (`σ ∝ ħ^{1/3}`) from ordinary
//! scars (`σ ∝ ħ^{1/2}`).

pub mod fit;
pub mod ladder;
pub mod pipeline;
pub mod width;

pub use fit::{scaling_fit, scaling_fit_weighted, Classification, ScalingFit};
pub use ladder::{bs_ladder, BSLadder};
pub use pipeline::{superscar_pipeline, BandJob, PipelineConfig, PipelineResult};
pub use width::{transverse_width, transverse_width_cut, OrbitCut, WidthSample};
