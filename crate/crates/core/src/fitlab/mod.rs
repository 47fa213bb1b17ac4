//! Heavy-tail fitting pipeline: prices → returns → variance-normalised
//! histogram → χ² fit of the regime-switching walk, with Gaussian and
//! symmetric α-stable baselines.

pub mod baseline;
pub mod chi2;
pub mod data;
pub mod fit;
pub mod histogram;
pub mod model;
pub mod optimize;
pub mod quadrature;
pub mod synth;

pub use baseline::{
    fit_stable_baseline, gaussian_logpdf, gaussian_pdf, stable_logpdf, stable_pdf, StableFit,
};
pub use chi2::{chi2_logpdf, Chi2, FitRange, FoldedBins, Weighting};
pub use data::{
    load_price_series, read_returns_csv, returns, write_returns_csv, PriceSeries, ReturnMode,
    ReturnSeries,
};
pub use fit::{
    fit_regime_model, gaussian_chi2, DoublingCheck, FitBounds, FitOptions, FitResult,
    OptimizerTrace,
};
pub use histogram::{histogram_pdf, EmpiricalPdf};
pub use model::{model_pdf_continuum, ModelCurve, ModelDensities, RegimeParams};
pub use synth::synthesize_returns;
