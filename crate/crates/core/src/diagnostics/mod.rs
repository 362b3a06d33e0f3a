//! Finite-sample evidence for membership of scalarized laws in the
//! subexponential, long-tailed and dominated-variation classes.
//!
//! Asymptotic statements are read on a user grid: verdicts look at the
//! three largest levels only and are consistent, inconsistent or
//! inconclusive with the hypothesis over the tested range.

mod curve;
mod mc;
mod numeric;

pub use curve::{CurvePoint, Method, PointFlag, RatioPoint, RatioVerdict, TailCurve, Verdict, MIN_HITS};
pub(crate) use curve::check_grid;
pub use mc::{
    convolution_ratio_mc, empirical_fa, empirical_quantile, kesten_check, random_sum_ratio, scalarized_sample,
    translation_test, ConvolutionReport, KestenReport, KestenRow, SandwichPoint,
};
pub use numeric::{
    convolution_ratio_numeric, dominated_variation_test, long_tail_test, NumericConvolution, NumericPoint,
    SurvivalTable, MIN_TABLE,
};
