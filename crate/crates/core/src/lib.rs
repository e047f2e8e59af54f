//! Training-free visual token compression.
//!
//! Tokens are scored by how badly they break temporal continuity and how much
//! high-frequency energy their patch carries, then each frame keeps only its
//! Top-K tokens plus the global token:
//!
//! 1. [`projection`] maps tokens through an optional affine projector onto the
//!    unit sphere.
//! 2. [`transport`] solves an entropic optimal transport problem between
//!    consecutive frames. A slack node absorbs mass that has no plausible
//!    source (birth) or target (death).
//! 3. [`frequency`] turns the source frame into a per-patch prior with a 3×3
//!    Laplacian.
//! 4. [`scoring`] fuses both into one score per token and prunes.
//!
//! [`flops`] accounts for the transformer cost saved, and [`bench`] checks the
//! method's separation properties on synthetic sequences.
//!
//! ```
//! use tokensieve::{compress, Projector, RunConfig, TokenTensor};
//!
//! let values: Vec<f64> = (0..2 * 4 * 3).map(|i| (i as f64 * 0.37).sin()).collect();
//! let tokens = TokenTensor::from_shape_vec((2, 4, 3), values).unwrap();
//! let config = RunConfig { ratio: 0.5, ..RunConfig::default() };
//! let (selection, _scores) = compress(&tokens, None, &config, &Projector::Identity).unwrap();
//! assert_eq!(selection.tokens_after, 2 * (2 + 1));
//! ```

pub mod bench;
pub mod config;
pub mod error;
pub mod flops;
pub mod frequency;
pub mod projection;
pub mod scoring;
pub mod tensor_io;
pub mod transport;

pub use config::{RunConfig, SpatialOperator, TransportMode};
pub use error::{Error, Result};
pub use projection::{project_normalize, NormalizedTokens, Projector};
pub use scoring::{compress, forensic_score, score, select_topk, ScoreBundle, SelectionResult};
pub use tensor_io::{load_frame, load_token_tensor, save_report, ImageFrame, TokenTensor};
