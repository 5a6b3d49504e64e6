//! The subcommands as library functions producing a [`Report`].

use crate::cache::{cache_key, Miss, SpectrumCache};
use crate::config::ExperimentConfig;
use crate::output::{Check, Report, ResultRow};
use crate::HarnessError;
use serde_json::json;
use std::f64::consts::PI;
use twl_core::asymptotics::{hessian_suite, predicted_kernel_diag, weyl_parameters};
use twl_core::dynamics::{lie_identities_check, pullback_check, FiberSymbol};
use twl_core::geometry::AmbientPoint;
use twl_core::hardy::{near_diagonal_szego_check, OmegaSign};
use twl_core::sampling::{random_point, random_tangent, seeded_rng};
use twl_core::spectral::{
    compute_spectrum, counting, good_cutoff, smoothed_kernel, smoothed_trace, SpectrumOptions,
    RESIDUAL_FACTOR,
};
use twl_core::symmetry::CircleAction;
use twl_core::toeplitz::{parse_symbol, SymbolFunction};
use twl_core::{Cx, SpectrumRecord64};

/// Residual bound of the contact-dynamics identities.
pub const CONTACT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Spectrum,
    Weyl,
    Trace,
    Kernel,
    ContactCheck,
    HessianCheck,
    SzegoCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Weyl => "weyl",
            Experiment::Trace => "trace",
            Experiment::Kernel => "kernel",
            Experiment::ContactCheck => "contact-check",
            Experiment::HessianCheck => "hessian-check",
            Experiment::SzegoCheck => "szego-check",
        }
    }
}

/// A spectrum together with the objects it was computed from.
pub struct Spectrum {
    pub symbol: SymbolFunction,
    pub action: Option<CircleAction>,
    pub record: SpectrumRecord64,
    pub cache_hit: bool,
}

fn action_of(cfg: &ExperimentConfig) -> Result<Option<CircleAction>, HarnessError> {
    cfg.weights
        .clone()
        .map(CircleAction::new)
        .transpose()
        .map_err(HarnessError::Numerical)
}

/// Loads the spectrum from `cache` or computes (and stores) it.
pub fn obtain_spectrum(
    cfg: &ExperimentConfig,
    cache: Option<&SpectrumCache>,
) -> Result<Spectrum, HarnessError> {
    let symbol = parse_symbol(&cfg.symbol, cfg.d).map_err(HarnessError::Numerical)?;
    let action = action_of(cfg)?;
    let key = cache_key(symbol.text(), cfg.weights.as_deref(), cfg.d, cfg.k_max);
    if let Some(c) = cache {
        match c.load(&key, &symbol) {
            Ok(record) => {
                log::info!("spectrum cache hit {}", c.path_for(&key).display());
                return Ok(Spectrum {
                    symbol,
                    action,
                    record,
                    cache_hit: true,
                });
            }
            Err(Miss::Absent) => {}
            Err(m) => log::warn!("ignoring cache entry {}: {m:?}", c.path_for(&key).display()),
        }
    }
    let mut opts = SpectrumOptions::new(cfg.k_max);
    if let Some(a) = &action {
        opts = opts.with_action(a.clone());
    }
    let record = compute_spectrum::<f64>(&symbol, &opts).map_err(HarnessError::Numerical)?;
    if let Some(c) = cache {
        if let Err(e) = c.store(&key, &record) {
            log::warn!("could not write spectrum cache: {e}");
        }
    }
    Ok(Spectrum {
        symbol,
        action,
        record,
        cache_hit: false,
    })
}

fn varpis(cfg: &ExperimentConfig) -> Vec<Option<i64>> {
    if cfg.weights.is_some() {
        cfg.isotypes.iter().map(|&v| Some(v)).collect()
    } else {
        vec![None]
    }
}

fn within(r: Option<f64>, tol: f64) -> bool {
    r.is_some_and(|r| (r - 1.0).abs() <= tol)
}

fn ratio_check(rows: &[ResultRow], tol: f64, what: &str) -> Check {
    let bad = rows.iter().filter(|r| !within(r.ratio, tol)).count();
    Check {
        passed: bad == 0,
        detail: format!("{bad} of {} {what} ratios outside 1 ± {tol}", rows.len()),
    }
}

fn base_point(
    cfg: &ExperimentConfig,
    action: Option<&CircleAction>,
) -> Result<AmbientPoint<f64>, HarnessError> {
    match (&cfg.base_point, action) {
        (Some(p), _) => AmbientPoint::normalized(p.clone()).map_err(HarnessError::Numerical),
        (None, Some(a)) => a.zero_locus_point().map_err(HarnessError::Numerical),
        (None, None) => Ok(random_point(cfg.d, &mut seeded_rng(cfg.seeds[0]))),
    }
}

fn point_json(x: &AmbientPoint<f64>) -> serde_json::Value {
    json!(x.coords().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

/// Runs one experiment. `cfg` may be `None` only for `hessian-check`.
pub fn run(
    exp: Experiment,
    cfg: Option<&ExperimentConfig>,
    cache: Option<&SpectrumCache>,
    seed: u64,
    instances: usize,
) -> Result<Report, HarnessError> {
    if exp == Experiment::HessianCheck {
        let id = cfg.map_or("hessian", |c| c.id.as_str());
        return hessian(id, seed, instances);
    }
    let cfg = cfg.ok_or_else(|| HarnessError::Usage(format!("{} requires --config", exp.name())))?;
    match exp {
        Experiment::ContactCheck => contact(cfg, seed),
        Experiment::SzegoCheck => szego(cfg, seed),
        _ => {
            let f = parse_symbol(&cfg.symbol, cfg.d).map_err(HarnessError::Numerical)?;
            cfg.check_lambda_bound(f.min()).map_err(HarnessError::Config)?;
            let computed = obtain_spectrum(cfg, cache)?;
            let mut report = match exp {
                Experiment::Spectrum => spectrum(cfg, &computed),
                Experiment::Weyl => weyl(cfg, &computed),
                Experiment::Trace => trace(cfg, &computed),
                Experiment::Kernel => kernel(cfg, &computed),
                _ => unreachable!(),
            }?;
            if let serde_json::Value::Object(m) = &mut report.metadata {
                m.insert("k_max".into(), json!(cfg.k_max));
                m.insert("entries".into(), json!(computed.record.entries.len()));
                m.insert("residual_bound".into(), json!(computed.record.metadata.residual_bound));
            }
            Ok(report)
        }
    }
}

fn report(cfg: &ExperimentConfig, exp: Experiment, rows: Vec<ResultRow>, metadata: serde_json::Value, check: Check) -> Report {
    Report {
        experiment_id: cfg.id.clone(),
        subcommand: exp.name().to_string(),
        rows,
        metadata,
        check,
    }
}

fn spectrum(cfg: &ExperimentConfig, computed: &Spectrum) -> Result<Report, HarnessError> {
    let mut rows = Vec::new();
    for varpi in varpis(cfg) {
        for l in cfg.lambda.values() {
            let n = counting(&computed.record, l, varpi).map_err(HarnessError::Numerical)?;
            rows.push(ResultRow::new(&cfg.id, Some(l), varpi, n as f64, None));
        }
    }
    let rb = computed.record.metadata.residual_bound;
    Ok(report(
        cfg,
        Experiment::Spectrum,
        rows,
        json!({ "symbol_min": computed.symbol.min(), "symbol_max": computed.symbol.max() }),
        Check {
            passed: rb <= RESIDUAL_FACTOR,
            detail: format!("largest relative residual {rb:e}"),
        },
    ))
}

fn weyl(cfg: &ExperimentConfig, computed: &Spectrum) -> Result<Report, HarnessError> {
    let mut rows = Vec::new();
    let mut params = Vec::new();
    for varpi in varpis(cfg) {
        let p = weyl_parameters(&computed.symbol, computed.action.as_ref(), varpi.unwrap_or(0))
            .map_err(HarnessError::Numerical)?;
        params.push(json!({ "varpi": varpi, "gamma": p.gamma, "a_gen": p.a_gen, "e": p.e }));
        for l in cfg.lambda.values() {
            let n = counting(&computed.record, l, varpi).map_err(HarnessError::Numerical)?;
            rows.push(ResultRow::new(&cfg.id, Some(l), varpi, n as f64, Some(p.counting().value(l))));
        }
    }
    let check = ratio_check(&rows, cfg.tolerance, "counting");
    Ok(report(cfg, Experiment::Weyl, rows, json!({ "parameters": params }), check))
}

fn trace(cfg: &ExperimentConfig, computed: &Spectrum) -> Result<Report, HarnessError> {
    let cutoff = good_cutoff(cfg.epsilon).map_err(HarnessError::Numerical)?;
    let mut rows = Vec::new();
    let mut means = Vec::new();
    let mut passed = true;
    for varpi in varpis(cfg) {
        let p = weyl_parameters(&computed.symbol, computed.action.as_ref(), varpi.unwrap_or(0))
            .map_err(HarnessError::Numerical)?;
        let mut acc = 0.0;
        let grid = cfg.lambda.values();
        for &l in &grid {
            let s = smoothed_trace(&computed.record, &cutoff, l, varpi).map_err(HarnessError::Numerical)?;
            let row = ResultRow::new(&cfg.id, Some(l), varpi, s.value, Some(p.trace().value(l)))
                .with_truncation(s.truncation_error);
            acc += row.ratio.unwrap_or(f64::NAN);
            rows.push(row);
        }
        let mean = acc / grid.len() as f64;
        passed &= (mean - 1.0).abs() <= cfg.tolerance;
        means.push(json!({ "varpi": varpi, "mean_ratio": mean }));
    }
    Ok(report(
        cfg,
        Experiment::Trace,
        rows,
        json!({ "epsilon": cfg.epsilon, "lambda_tail": cutoff.lambda_tail(), "mean_ratios": means }),
        Check {
            passed,
            detail: format!("grid-averaged ratios within 1 ± {}", cfg.tolerance),
        },
    ))
}

fn kernel(cfg: &ExperimentConfig, computed: &Spectrum) -> Result<Report, HarnessError> {
    let action = computed
        .action
        .as_ref()
        .ok_or_else(|| HarnessError::Usage("kernel requires action.weights".into()))?;
    let x = base_point(cfg, Some(action))?;
    let on_locus = action.moment_map(&x).abs() <= 1e-8;
    let cutoff = good_cutoff(cfg.epsilon).map_err(HarnessError::Numerical)?;
    let mut rows = Vec::new();
    for varpi in varpis(cfg) {
        for l in cfg.lambda.values() {
            let s = smoothed_kernel(&computed.record, &cutoff, l, varpi, &x, &x)
                .map_err(HarnessError::Numerical)?;
            let predicted = if on_locus {
                predicted_kernel_diag(&computed.symbol, action, &x, 0.0, l, varpi.unwrap_or(0))
                    .map_err(HarnessError::Numerical)?
            } else {
                0.0
            };
            rows.push(
                ResultRow::new(&cfg.id, Some(l), varpi, s.value.re, Some(predicted))
                    .with_truncation(s.truncation_error),
            );
        }
    }
    let check = if on_locus {
        ratio_check(&rows, cfg.tolerance, "kernel")
    } else {
        // off the zero locus the kernel must decay faster than any power
        let worst = rows
            .iter()
            .filter(|r| r.lambda == Some(cfg.lambda.stop))
            .map(|r| r.measured.abs() * cfg.lambda.stop.powi(3))
            .fold(0.0, f64::max);
        Check {
            passed: worst < 1.0,
            detail: format!("S·λ³ = {worst:e} at λ = {}", cfg.lambda.stop),
        }
    };
    Ok(report(
        cfg,
        Experiment::Kernel,
        rows,
        json!({
            "base_point": point_json(&x),
            "moment": action.moment_map(&x),
            "epsilon": cfg.epsilon,
        }),
        check,
    ))
}

fn contact(cfg: &ExperimentConfig, seed: u64) -> Result<Report, HarnessError> {
    let f = FiberSymbol::parse(&cfg.symbol, cfg.d).map_err(HarnessError::Numerical)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut rng = seeded_rng(seed);
    for _ in 0..cfg.samples {
        let x = random_point::<f64, _>(cfg.d, &mut rng);
        let vs: Vec<_> = (0..4).map(|_| random_tangent(&x, &mut rng)).collect();
        let lie = lie_identities_check(&f, &x, &vs).map_err(HarnessError::Numerical)?;
        let pb = pullback_check(&f, &x, &vs[0], cfg.flow_tau).map_err(HarnessError::Numerical)?;
        for (name, r) in [
            ("lie_alpha", lie.lie_alpha),
            ("symbol_derivative", lie.derivative_of_symbol),
            ("lie_alpha_over_symbol", lie.lie_alpha_over_symbol),
            ("pullback", pb.residual),
        ] {
            worst = worst.max(r);
            rows.push(ResultRow::new(&format!("{}:{name}", cfg.id), None, None, r, Some(0.0)));
        }
    }
    Ok(report(
        cfg,
        Experiment::ContactCheck,
        rows,
        json!({ "symbol": f.text(), "tau": cfg.flow_tau, "seed": seed, "worst_residual": worst }),
        Check {
            passed: worst < CONTACT_TOLERANCE,
            detail: format!("largest residual {worst:e} (bound {CONTACT_TOLERANCE:e})"),
        },
    ))
}

fn hessian(id: &str, seed: u64, instances: usize) -> Result<Report, HarnessError> {
    let s = hessian_suite(instances, seed).map_err(HarnessError::Numerical)?;
    let n = instances as f64;
    let rows = [
        ("signature_lemma", s.signature_passed),
        ("hessian_upsilon", s.upsilon_passed),
        ("hessian_k", s.k_passed),
    ]
    .iter()
    .map(|(name, p)| ResultRow::new(&format!("{id}:{name}"), None, None, *p as f64, Some(n)))
    .collect();
    Ok(Report {
        experiment_id: id.to_string(),
        subcommand: Experiment::HessianCheck.name().to_string(),
        rows,
        metadata: json!({ "seed": seed, "suite": s }),
        check: Check {
            passed: s.all_passed(),
            detail: format!(
                "worst determinant error {:e}, worst inverse error {:e}",
                s.worst_determinant_error, s.worst_inverse_error
            ),
        },
    })
}

/// Displacements `r e^{iφ}` along one coordinate axis of the chart.
fn szego_grid(d: usize, axis: usize) -> Vec<Vec<Cx<f64>>> {
    let mut out = Vec::new();
    for r in [0.0, 0.5, 1.0] {
        for q in 0..4 {
            let mut u = vec![Cx::new(0.0, 0.0); d];
            u[axis] = Cx::from_polar(r, q as f64 * PI / 2.0);
            out.push(u);
            if r == 0.0 {
                break;
            }
        }
    }
    out
}

fn szego(cfg: &ExperimentConfig, seed: u64) -> Result<Report, HarnessError> {
    let k = cfg.szego_k.unwrap_or(cfg.k_max);
    let x = match &cfg.base_point {
        Some(p) => AmbientPoint::normalized(p.clone()).map_err(HarnessError::Numerical)?,
        None => random_point(cfg.d, &mut seeded_rng(seed)),
    };
    let scale = (PI / k as f64).powi(cfg.d as i32);
    let mut rows = Vec::new();
    for u in szego_grid(cfg.d, 0) {
        for v in szego_grid(cfg.d, cfg.d - 1) {
            let (m, p) = near_diagonal_szego_check(k, &x, &u, &v, OmegaSign::Standard)
                .map_err(HarnessError::Numerical)?;
            let predicted = (p.norm() * scale).max(f64::MIN_POSITIVE);
            rows.push(ResultRow::new(&cfg.id, Some(k as f64), None, m.norm() * scale, Some(predicted)));
        }
    }
    let check = ratio_check(&rows, cfg.tolerance, "Szegő");
    Ok(report(
        cfg,
        Experiment::SzegoCheck,
        rows,
        json!({ "k": k, "base_point": point_json(&x) }),
        check,
    ))
}
