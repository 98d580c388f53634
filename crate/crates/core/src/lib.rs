//! Bistatic two-ULA sensing in normalized array-factor (NAF) coordinates.
//!
//! A transmit and a receive uniform linear array scan a scene one
//! direction pair at a time. Sampling each array at its `N` DFT beam
//! directions in NAF space is enough to recover the full response map
//! exactly with Dirichlet-kernel interpolation, which this crate implements
//! next to two cubic-spline baselines and a CA-CFAR detection chain for
//! comparing them.
//!
//! ```
//! use bistatic_naf::{
//!     dft_upsample_2d, acquire, uniform_naf_grid, NafPoint, NoiseConfig, SamplingGrid, Scatterer,
//!     Scene, UlaConfig,
//! };
//!
//! let ula = UlaConfig::default();
//! let grid = SamplingGrid::optimal(&ula, &ula);
//! let scene = Scene::new(vec![Scatterer::unit(NafPoint::new(0.1, -0.2))]);
//! let coarse = acquire(&grid, &ula, &ula, &scene, &NoiseConfig::noiseless()).unwrap();
//! let fine = uniform_naf_grid(220);
//! let map = dft_upsample_2d(&coarse, &fine, &fine).unwrap();
//! assert_eq!(map.dim(), (220, 220));
//! ```

pub mod detection;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod interpolation;
pub mod io;
pub mod sampling;
pub mod signal;

pub use num_complex::Complex64;

pub use detection::{
    ca_cfar_2d, compute_metrics, evaluate_iteration, extract_peaks, match_detections, CfarConfig, CfarDetector,
    Detection, IterationOutcome, MatchResult, Metrics,
};
pub use error::{Error, Result};
pub use experiments::{run_sweep, Pipeline, ScenarioConfig, ScenarioKind, SweepResult};
pub use geometry::{
    angle_from_naf, angles_from_point, naf_from_angle, naf_from_point, point_from_angles, AngleRad,
    BistaticGeometry, CartesianPoint, NafPoint,
};
pub use interpolation::{
    build_interpolator, dft_upsample_2d, dft_upsample_2d_fft, reconstruct, AxisOperator, InterpolationMethod,
    SeparableInterpolator,
};
pub use sampling::{
    acquire, build_grid, dft_naf_samples, radian_uniform_samples, uniform_naf_grid, SamplingDomain, SamplingGrid,
    SamplingSet,
};
pub use signal::{
    add_noise, array_factor, dirichlet, synthesize_map, NoiseConfig, ResponseMap, Scatterer, Scene, UlaConfig,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
