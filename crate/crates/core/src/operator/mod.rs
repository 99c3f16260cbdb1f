//! The kernel operator `u ↦ ∫ K(·, y) u(y) dy` on bounded inputs.

mod apply;
mod input;
mod search;
mod verdict;

pub use apply::{apply_operator, default_grid, default_step, Method, MethodChoice, OperatorOutput};
pub use input::{reduce_input, BoundedInput};
pub use search::{adversarial_search, SearchConfig, SearchResult, INIT_ENUMERATION_CAP};
pub use verdict::{stability_verdict, DivergenceCertificate, L1Evidence, Verdict, VerdictRecord};
