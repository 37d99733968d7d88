//! ζ(½ + it) at desk heights: θ, Hardy's Z, zero counting and the continuous
//! determination of log ζ.

pub mod euler_maclaurin;
pub mod logdet;
pub mod riemann_siegel;
#[allow(clippy::excessive_precision)]
mod rs_coeffs;
pub mod scan;
pub mod theta;

pub use euler_maclaurin::{zeta_critical, zeta_euler_maclaurin};
pub use logdet::{log_abs_zeta, log_zeta_det, log_zeta_on_grid, sample_l, BranchFlag, CriticalLinePoint, GridLogZeta};
pub use riemann_siegel::{hardy_z, riemann_siegel_z, DEFAULT_HEIGHT_CAP};
pub use scan::{zero_count_scan, ZeroScan};
pub use theta::rs_theta;
