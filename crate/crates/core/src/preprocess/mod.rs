//! Rating centering and rescaling, and side-information feature tables.

mod bias;
mod scaler;
mod side;
mod svd;

pub use bias::{fit_bias, BiasTable};
pub use scaler::{Preprocessor, Scaler};
pub use side::{build_side_info, SideInfoTable};
pub use svd::{svd_embed, truncated_svd, TruncatedSvd};
