use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use memwalk::closed_form;
use memwalk::fitlab::{
    self, fit_regime_model, fit_stable_baseline, histogram_pdf, EmpiricalPdf, FitBounds,
    FitOptions, FitRange, FoldedBins, ModelCurve, RegimeParams, ReturnMode, ReturnSeries,
    Weighting,
};
use memwalk::lattice::{self, ClampPolicy, CouplingProfile};
use memwalk::sampler::{self, Ensemble};

use crate::output::{provenance, write_csv, write_json, Format};
use crate::Failure;

fn parse_list(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0 && *v >= 0.0)
                .map(|v| v as usize)
                .ok_or_else(|| Failure::usage(format!("not a non-negative integer: `{t}`")))
        })
        .collect()
}

/// Coupling flags shared by the lattice and sampler commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Coupling {
    /// Renormalised coupling; the step coupling is κ/N.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Regime offset b (enables the Gaussian-well profile together with --delta).
    #[arg(long, requires = "delta")]
    pub b: Option<f64>,
    /// Well width in lattice steps.
    #[arg(long, requires = "b")]
    pub delta: Option<f64>,
    /// Fail (exit 3) instead of clamping out-of-range transfer probabilities.
    #[arg(long)]
    pub strict: bool,
}

impl Coupling {
    fn profile(&self, n: usize) -> Result<CouplingProfile, Failure> {
        if !self.kappa.is_finite() {
            return Err(Failure::usage("kappa must be finite"));
        }
        let eps = if n == 0 { 0.0 } else { self.kappa / n as f64 };
        match (self.b, self.delta) {
            (Some(b), Some(d)) => Ok(CouplingProfile::regime(eps, b, d)?),
            _ => Ok(CouplingProfile::constant(eps)),
        }
    }

    fn policy(&self) -> ClampPolicy {
        if self.strict {
            ClampPolicy::Strict
        } else {
            ClampPolicy::Clamp
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PdfArgs {
    /// Number of steps.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

pub fn pdf(a: &PdfArgs) -> Result<(), Failure> {
    let profile = a.coupling.profile(a.n)?;
    let (pdf, validity) = lattice::evolve_with(a.n, &profile, a.coupling.policy())?;
    if !validity.valid {
        log::warn!(
            "transfer probabilities clamped from |x| = {:?}",
            validity.first_violation_x
        );
    }
    let prov = provenance("pdf", a, None);
    let rows: Vec<(i64, f64)> = pdf
        .iter()
        .filter(|&(x, _)| (x + a.n as i64) % 2 == 0)
        .collect();
    match a.format {
        Format::Csv => write_csv(&a.out, &["x", "prob"], rows, &prov),
        Format::Json => write_json(
            &a.out,
            json!({
                "x": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
                "prob": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
                "validity": validity,
            }),
            prov,
        ),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

pub fn moments(a: &MomentsArgs) -> Result<(), Failure> {
    let profile = a.coupling.profile(a.n)?;
    let (pdf, validity) = lattice::evolve_with(a.n, &profile, a.coupling.policy())?;
    let m = lattice::moments(&pdf, 4)?;
    let mut rows: Vec<(&str, f64)> = vec![
        ("mean", m.mean),
        ("variance", m.variance),
        ("fourth", m.fourth.unwrap_or(f64::NAN)),
        ("kurtosis", m.kurtosis.unwrap_or(f64::NAN)),
    ];
    if let CouplingProfile::Constant { epsilon } = profile {
        if a.n > 0 && epsilon != 0.0 {
            let n = u32::try_from(a.n).map_err(|_| Failure::usage("N too large"))?;
            rows.push((
                "variance_closed_form",
                closed_form::variance_exact(n, epsilon)?,
            ));
            rows.push(("fourth_closed_form", closed_form::fourth_exact(n, epsilon)?));
            rows.push(("variance_series", closed_form::variance_series(n, epsilon)));
            rows.push(("fourth_series", closed_form::fourth_series(n, epsilon)));
        }
        rows.push((
            "kurtosis_limit",
            closed_form::kurtosis_limit(a.coupling.kappa),
        ));
    }
    let prov = provenance("moments", a, None);
    match a.format {
        Format::Csv => write_csv(&a.out, &["quantity", "value"], rows, &prov),
        Format::Json => {
            let mut body = serde_json::Map::new();
            for (k, v) in rows {
                body.insert(k.into(), json!(v));
            }
            body.insert("validity".into(), json!(validity));
            write_json(&a.out, body.into(), prov)
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AutocorrArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Values of L (lag L−1), comma separated.
    #[arg(long, default_value = "2,3,4,5")]
    pub lags: String,
    /// Monte Carlo trajectories; 0 skips the simulation.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct AutocorrRow {
    lag: usize,
    exact: f64,
    leading: f64,
    mc_estimate: Option<f64>,
    mc_se: Option<f64>,
}

pub fn autocorr(a: &AutocorrArgs) -> Result<(), Failure> {
    let lags = parse_list(&a.lags)?;
    let mut rows = Vec::with_capacity(lags.len());
    for &l in &lags {
        let cf = closed_form::autocorrelation(a.n, a.kappa, l)?;
        let (mc_estimate, mc_se) = if a.m > 0 {
            // Increments N+1 and N+L of a walk that keeps ε = κ/N throughout.
            let profile = CouplingProfile::constant(a.kappa / a.n as f64);
            let ens = Ensemble::new(a.n + l, profile, a.m, a.seed)?;
            let est = sampler::estimate_autocorr(&ens, l)?;
            let at = est.per_n[a.n];
            (Some(at.value), Some(at.se))
        } else {
            (None, None)
        };
        rows.push(AutocorrRow {
            lag: cf.lag,
            exact: cf.value_exact,
            leading: cf.value_leading,
            mc_estimate,
            mc_se,
        });
    }
    let prov = provenance("autocorr", a, (a.m > 0).then_some(a.seed));
    write_csv(
        &a.out,
        &["lag", "exact", "leading", "mc_estimate", "mc_se"],
        rows,
        &prov,
    )
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub coupling: Coupling,
    /// Number of trajectories.
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit one full trajectory (`step,increment,x`) instead of terminal values.
    #[arg(long)]
    pub path: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

pub fn sample(a: &SampleArgs) -> Result<(), Failure> {
    let profile = a.coupling.profile(a.n)?;
    let ens = Ensemble::with_policy(a.n, profile, a.m, a.seed, a.coupling.policy())?;
    let prov = provenance("sample", a, Some(a.seed));
    if let Some(index) = a.path {
        if index >= a.m as u64 {
            return Err(Failure::usage(format!(
                "--path {index} is not below --m {}",
                a.m
            )));
        }
        let t = ens.path(index)?;
        let rows: Vec<(usize, i8, i64)> = std::iter::once((0, 0, 0))
            .chain(
                t.increments
                    .iter()
                    .zip(&t.displacements[1..])
                    .enumerate()
                    .map(|(i, (&d, &x))| (i + 1, d, x)),
            )
            .collect();
        return match a.format {
            Format::Csv => write_csv(&a.out, &["step", "increment", "x"], rows, &prov),
            Format::Json => write_json(&a.out, json!({ "trajectory": t }), prov),
        };
    }
    let terminal = ens.terminal_displacements()?;
    let stats = sampler::EnsembleStats::from_terminal(a.n, a.seed, &terminal);
    match a.format {
        Format::Csv => {
            let mut prov = prov;
            prov["summary"] = json!(stats);
            write_csv(
                &a.out,
                &["trajectory", "x"],
                terminal.iter().enumerate(),
                &prov,
            )
        }
        Format::Json => write_json(&a.out, json!({ "stats": stats }), prov),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergenceArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Step counts, comma separated.
    #[arg(long, default_value = "10,30,100,300,1000,3000,10000")]
    pub n_list: String,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

pub fn convergence(a: &ConvergenceArgs) -> Result<(), Failure> {
    let ns = parse_list(&a.n_list)?;
    let rows = lattice::kurtosis_study(&ns, a.kappa)?;
    let prov = provenance("convergence", a, None);
    write_csv(
        &a.out,
        &["n", "variance_over_n", "kurtosis"],
        rows.iter().map(|r| (r.n, r.variance_over_n, r.kurtosis)),
        &prov,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Simple,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingArg {
    Unweighted,
    Poisson,
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Unweighted => Weighting::Unweighted,
            WeightingArg::Poisson => Weighting::Poisson,
        }
    }
}

/// Input data and histogram flags shared by `fit` and `baseline`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Price CSV with header `date,price`.
    #[arg(long, conflicts_with = "returns", required_unless_present = "returns")]
    pub prices: Option<PathBuf>,
    /// Return CSV with header `return`.
    #[arg(long)]
    pub returns: Option<PathBuf>,
    /// How prices become returns.
    #[arg(long, value_enum, default_value_t = ModeArg::Simple)]
    pub mode: ModeArg,
    /// Histogram bin width in units of the sample standard deviation.
    #[arg(long, default_value_t = 0.25)]
    pub bin_width: f64,
    #[arg(long, default_value_t = 1.5)]
    pub range_lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub range_hi: f64,
    #[arg(long, value_enum, default_value_t = WeightingArg::Unweighted)]
    pub weighting: WeightingArg,
}

impl DataArgs {
    fn load(&self) -> Result<ReturnSeries, Failure> {
        let with_path = |path: &PathBuf| {
            let shown = path.display().to_string();
            move |e: memwalk::Error| {
                let mut f = Failure::from(e);
                if !f.message.contains(&shown) {
                    f.message = format!("{shown}: {}", f.message);
                }
                f
            }
        };
        match (&self.prices, &self.returns) {
            (Some(p), _) => {
                let series = fitlab::load_price_series(p).map_err(with_path(p))?;
                let mode = match self.mode {
                    ModeArg::Simple => ReturnMode::Simple,
                    ModeArg::Log => ReturnMode::Log,
                };
                let mut r = fitlab::returns(&series.prices, mode)?;
                r.source = p.display().to_string();
                Ok(r)
            }
            (None, Some(r)) => fitlab::read_returns_csv(r).map_err(with_path(r)),
            (None, None) => Err(Failure::usage("one of --prices or --returns is required")),
        }
    }

    fn range(&self) -> Result<FitRange, Failure> {
        if !(self.range_lo >= 0.0 && self.range_hi > self.range_lo && self.range_hi.is_finite()) {
            return Err(Failure::usage("fit range must satisfy 0 <= lo < hi"));
        }
        Ok(FitRange {
            lo: self.range_lo,
            hi: self.range_hi,
        })
    }

    fn histogram(&self) -> Result<EmpiricalPdf, Failure> {
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Failure::usage("--bin-width must be positive"));
        }
        let r = self.load()?;
        Ok(histogram_pdf(&r.values, self.bin_width)?)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Lattice steps of the model curve.
    #[arg(long, default_value_t = 1000)]
    pub n_model: usize,
    /// Starting points per parameter in the multi-start grid.
    #[arg(long, default_value_t = 3)]
    pub grid: usize,
    #[arg(long, default_value_t = 400)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.05)]
    pub b_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 40.0)]
    pub delta_max: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub kappa_min: f64,
    #[arg(long, default_value_t = 8.0, allow_negative_numbers = true)]
    pub kappa_max: f64,
    /// Hold κ at this value (0 gives the Gaussian slice).
    #[arg(long, allow_negative_numbers = true)]
    pub fixed_kappa: Option<f64>,
    /// Skip the refit at twice the model resolution.
    #[arg(long)]
    pub no_doubling_check: bool,
    /// Also write `u,empirical,model,gaussian` for plotting.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

fn curve_rows(emp: &EmpiricalPdf, columns: &[&dyn Fn(f64) -> f64]) -> Vec<Vec<f64>> {
    emp.bin_centers
        .iter()
        .zip(&emp.densities)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&u, &d)| {
            let mut row = vec![u, d];
            row.extend(columns.iter().map(|f| f(u)));
            row
        })
        .collect()
}

fn write_curve(
    path: &Path,
    header: &[&str],
    rows: Vec<Vec<f64>>,
    prov: &serde_json::Value,
) -> Result<(), Failure> {
    write_csv(path, header, rows, prov)
}

pub fn fit(a: &FitArgs) -> Result<(), Failure> {
    let emp = a.data.histogram()?;
    let bounds = FitBounds {
        b: (a.b_min, a.b_max),
        delta_sigma: (a.delta_min, a.delta_max),
        kappa: (a.kappa_min, a.kappa_max),
    };
    let options = FitOptions {
        n_model: a.n_model,
        range: a.data.range()?,
        weighting: a.data.weighting.into(),
        grid: a.grid,
        max_iter: a.max_iter,
        tol: a.tol,
        doubling_check: !a.no_doubling_check,
        fixed_kappa: a.fixed_kappa,
    };
    if a.n_model < 100 {
        return Err(Failure::usage("--n-model must be >= 100"));
    }
    let r = fit_regime_model(&emp, bounds, options)?;
    let gaussian = fitlab::gaussian_chi2(&emp, options.range, options.weighting)?;
    let prov = provenance("fit", a, None);
    if let Some(path) = &a.curve {
        let curve = ModelCurve::build(
            RegimeParams {
                b: r.b,
                delta_sigma: r.delta_sigma,
                kappa: r.kappa,
            },
            r.n_model,
        )?;
        let model = |u: f64| curve.density(u);
        let gauss = |u: f64| fitlab::gaussian_pdf(&[u])[0];
        write_curve(
            path,
            &["u", "empirical", "model", "gaussian"],
            curve_rows(&emp, &[&model, &gauss]),
            &prov,
        )?;
    }
    write_json(
        &a.out,
        json!({
            "b": r.b,
            "delta_sigma": r.delta_sigma,
            "delta_lattice": r.delta_lattice,
            "kappa": r.kappa,
            "chi2": r.chi2,
            "n_model": r.n_model,
            "fit_range": [r.fit_range.lo, r.fit_range.hi],
            "validity_fraction": r.validity_fraction,
            "n_bins_used": r.n_bins_used,
            "sigma_model": r.sigma_model,
            "gaussian_chi2": gaussian,
            "sample_size": emp.total_n,
            "trace": r.trace,
            "doubling_check": r.doubling,
        }),
        prov,
    )
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Also write `u,empirical,gaussian,stable` for plotting.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

pub fn baseline(a: &BaselineArgs) -> Result<(), Failure> {
    let emp = a.data.histogram()?;
    let range = a.data.range()?;
    let weighting: Weighting = a.data.weighting.into();
    let bins = FoldedBins::from_empirical(&emp, range)?;
    let gaussian = bins.chi2(&fitlab::gaussian_pdf(&bins.centers), weighting);
    let stable = fit_stable_baseline(&bins, weighting)?;
    let prov = provenance("baseline", a, None);
    if let Some(path) = &a.curve {
        let gauss = |u: f64| fitlab::gaussian_pdf(&[u])[0];
        let st = |u: f64| {
            fitlab::stable_pdf(stable.alpha, stable.scale, &[u]).map_or(f64::NAN, |v| v[0])
        };
        write_curve(
            path,
            &["u", "empirical", "gaussian", "stable"],
            curve_rows(&emp, &[&gauss, &st]),
            &prov,
        )?;
    }
    write_json(
        &a.out,
        json!({
            "fit_range": [range.lo, range.hi],
            "n_bins_used": bins.len(),
            "gaussian": { "chi2": gaussian },
            "stable": stable,
        }),
        prov,
    )
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub b: f64,
    /// Well width in units of the model standard deviation.
    #[arg(long)]
    pub delta_sigma: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1000)]
    pub n_model: usize,
    /// Number of returns to draw.
    #[arg(long, default_value_t = 1_000_000)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

pub fn synth(a: &SynthArgs) -> Result<(), Failure> {
    let params = RegimeParams {
        b: a.b,
        delta_sigma: a.delta_sigma,
        kappa: a.kappa,
    };
    let series = fitlab::synthesize_returns(params, a.n_model, a.m, a.seed)?;
    let prov = provenance("synth", a, Some(a.seed));
    write_csv(
        &a.out,
        &["return"],
        series.values.iter().map(|v| (v,)),
        &prov,
    )
}
