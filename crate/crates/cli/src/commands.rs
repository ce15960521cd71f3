use std::fs;
use std::path::{Path, PathBuf};

use mvmedian::config::{AMOEBA_BETA, AMOEBA_RHO, CHS_EPSILON, DISC_RADIUS, FILTER_ITERATIONS};
use mvmedian::consistency::{
    equivariance_suite, run_experiment, EquivarianceMedian, EquivarianceOptions, ExperimentOptions, TransformFamily,
};
use mvmedian::filtering::{
    median_filter, Aggregator, AmoebaConfig, Boundary, FilterParams, Selection, StructuringElement,
};
use mvmedian::io::{decode_pfm, decode_pnm, read_csv, read_pfm, write_pfm, write_pnm};
use mvmedian::medians::{
    halfspace_depth, median_chs, median_componentwise, median_halfspace, median_l1, median_medoid, median_oja,
    median_oja_23, median_trl1, L1Config, OjaMode,
};
use mvmedian::pde::{
    evolve_chs_curve_observed, evolve_grid_observed, stable_time_step, ClosedCurve, Density2D, GridDensity, RhsKind,
    TimeStep,
};
use mvmedian::univariate::{median_rank, median_weighted_set};
use mvmedian::{Error, ImageGrid, MedianResult, WeightedPointSet};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{DepthArgs, FilterArgs, MedianArgs, PdeArgs, VerifyArgs};

/// Failure of a subcommand, mapped to exit code 2 or 3.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Solver(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() || matches!(e, Error::Io(_)) {
            Failure::Validation(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| invalid(format!("missing required flag --{flag}")))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn load_points(path: &Path, weighted: bool) -> Result<WeightedPointSet, Failure> {
    let set = read_csv(path)?;
    Ok(if weighted { set } else { set.with_unit_weights() })
}

fn rank_result(set: &WeightedPointSet, weighted: bool) -> Result<MedianResult, Failure> {
    set.require_dim(1)?;
    let iv = if weighted { median_weighted_set(set, true)? } else { median_rank(set.coords())? };
    let interval = mvmedian::ConvexPolytope::interval(iv.lo, iv.hi);
    Ok(MedianResult::exact(vec![iv.midpoint()], Some(interval), None))
}

pub fn median(args: MedianArgs) -> Outcome {
    let input = required(args.input, "in")?;
    let method = args.method.unwrap_or_else(|| "l1".into());
    let weighted = args.weighted.unwrap_or(false);
    let set = load_points(&input, weighted)?;
    set.require_nonempty()?;
    let cfg = L1Config::default();
    let result = match Aggregator::from_name(&method)? {
        Aggregator::Rank => rank_result(&set, weighted)?,
        Aggregator::Componentwise => median_componentwise(&set)?,
        Aggregator::L1 => median_l1(&set, &cfg)?,
        Aggregator::Trl1 => median_trl1(&set, &cfg)?,
        Aggregator::Oja => median_oja(&set, OjaMode::Auto)?,
        Aggregator::Oja23 => median_oja_23(&set)?,
        Aggregator::Halfspace => median_halfspace(&set)?,
        Aggregator::Chs => median_chs(&set)?,
        Aggregator::Medoid => median_medoid(&set)?,
    };
    let vertices: Option<Vec<Vec<f64>>> =
        result.median_set.as_ref().map(|s| s.vertices().iter().map(|v| v.coords().to_vec()).collect());
    let mut doc = json!({
        "method": method,
        "dim": set.dim(),
        "points": set.len(),
        "representative": result.representative.coords(),
        "median_set": vertices,
        "objective": result.objective_value,
        "iterations": result.iterations,
        "status": result.status,
    });
    if method == "halfspace" {
        doc["depth"] = json!(halfspace_depth(result.representative.coords(), &set)?);
    }
    let text = to_json(&doc);
    match args.out {
        Some(p) => write_text(&p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_image(path: &Path) -> Result<(ImageGrid, Option<u16>), Failure> {
    let bytes = fs::read(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    if bytes.starts_with(b"Pf") || bytes.starts_with(b"PF") {
        Ok((decode_pfm(&bytes)?, None))
    } else {
        let p = decode_pnm(&bytes)?;
        Ok((p.image, Some(p.maxval)))
    }
}

fn is_pfm(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pfm"))
}

pub fn filter(args: FilterArgs) -> Outcome {
    let input = required(args.input, "in")?;
    let out = required(args.out, "out")?;
    let aggregator = Aggregator::from_name(args.aggregator.as_deref().unwrap_or("rank"))?;
    let boundary = match args.boundary.as_deref().unwrap_or("mirror") {
        "mirror" => Boundary::Mirror,
        "clamp" => Boundary::Clamp,
        "skip" => Boundary::Skip,
        b => return Err(invalid(format!("unknown boundary `{b}`"))),
    };
    let selection = match args.shape.as_deref().unwrap_or("disc") {
        "disc" => Selection::Element(StructuringElement::disc(args.radius.unwrap_or(DISC_RADIUS))?),
        "amoeba" => {
            let config = AmoebaConfig {
                beta: args.beta.unwrap_or(AMOEBA_BETA),
                rho: args.radius.unwrap_or(AMOEBA_RHO),
                ..AmoebaConfig::default()
            };
            if !(config.beta >= 0.0 && config.rho > 0.0) {
                return Err(invalid("amoeba needs beta >= 0 and a positive radius"));
            }
            Selection::Amoeba { config, pilot: None }
        }
        s => return Err(invalid(format!("unknown shape `{s}`"))),
    };
    let (image, maxval) = read_image(&input)?;
    let params =
        FilterParams { selection, aggregator, boundary, iterations: args.iterations.unwrap_or(FILTER_ITERATIONS) };
    let result = median_filter(&image, &params)?;
    if result.failures > 0 {
        eprintln!("warning: aggregator failed at {} pixel updates; those pixels kept their value", result.failures);
    }
    if is_pfm(&out) {
        write_pfm(&out, &result.image)?;
    } else {
        write_pnm(&out, &result.image, maxval.unwrap_or(255))?;
    }
    Ok(())
}

fn snapshot_due(step: usize, total: usize, every: Option<usize>) -> bool {
    step == total || every.is_some_and(|k| k > 0 && step % k == 0)
}

/// Splits a PFM of `slices` images stacked vertically into a volume.
fn unstack(image: &ImageGrid, slices: usize) -> Result<ImageGrid, Failure> {
    if slices == 0 || image.rows() % slices != 0 {
        return Err(invalid(format!("{} rows cannot hold {slices} equal slices", image.rows())));
    }
    let h = image.rows() / slices;
    Ok(ImageGrid::new(vec![slices, h, image.cols()], image.channels(), image.data().to_vec())?
        .with_spacing(image.spacing()))
}

fn restack(volume: &ImageGrid) -> Result<ImageGrid, Failure> {
    let e = volume.extent();
    Ok(ImageGrid::new(vec![e[0] * e[1], e[2]], volume.channels(), volume.data().to_vec())?)
}

/// The channels a PDE acts on, taken from the front of each pixel.
fn take_channels(image: &ImageGrid, n: usize) -> Result<ImageGrid, Failure> {
    if image.channels() < n {
        return Err(invalid(format!("PDE needs {n} channels, the image has {}", image.channels())));
    }
    let data = image.data().chunks(image.channels()).flat_map(|p| p[..n].iter().copied()).collect();
    Ok(ImageGrid::new(image.extent().to_vec(), n, data)?)
}

pub fn pde(args: PdeArgs) -> Outcome {
    let rhs = required(args.rhs.clone(), "rhs")?;
    let input = required(args.input.clone(), "in")?;
    let prefix = required(args.out.clone(), "out")?;
    let image = read_pfm(&input)?;
    if rhs == "chs_curve" {
        return chs_curve(&args, &image, &prefix);
    }
    let kind = RhsKind::from_name(&rhs, args.beta.unwrap_or(AMOEBA_BETA))?;
    let (m, n) = kind.shape();
    let mut u = take_channels(&image, n)?;
    if m == 3 {
        u = unstack(&u, args.slices.unwrap_or(1))?;
    }
    let steps = args.steps.unwrap_or(10);
    let dt = match args.dt {
        Some(dt) => dt,
        None => {
            let bound = stable_time_step(&u, kind)?;
            if bound.is_finite() {
                0.9 * bound
            } else {
                1.0
            }
        }
    };
    let write = |step: usize, img: &ImageGrid| -> Outcome {
        let flat = if img.ndim() == 3 { restack(img)? } else { img.clone() };
        write_pfm(format!("{prefix}_{step:05}.pfm"), &flat)?;
        Ok(())
    };
    write(0, &u)?;
    let mut failed = None;
    let evo = evolve_grid_observed(&u, kind, dt, steps, |step, img| {
        if failed.is_none() && snapshot_due(step, steps, args.every) {
            failed = write(step, img).err();
        }
    })?;
    if let Some(f) = failed {
        return Err(f);
    }
    let summary = json!({
        "rhs": rhs,
        "dt": evo.dt,
        "steps": evo.steps,
        "stability_bound": evo.stability_bound,
        "frozen_updates": evo.frozen_updates,
    });
    write_text(Path::new(&format!("{prefix}_summary.json")), &to_json(&summary))
}

fn chs_curve(args: &PdeArgs, image: &ImageGrid, prefix: &str) -> Outcome {
    if image.channels() != 1 {
        return Err(invalid("chs_curve needs a single-channel density"));
    }
    let (rows, cols) = (image.rows(), image.cols());
    let density = GridDensity::new([0.0, 0.0], 1.0, rows, cols, image.data().to_vec())?;
    let eps = args.epsilon.unwrap_or(CHS_EPSILON * density.max_density());
    let (lo, hi) = density.support();
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let radius = 0.5 * (hi[0] - lo[0]).hypot(hi[1] - lo[1]) + 2.0 * density.cell_size();
    let curve = ClosedCurve::circle(center, radius, 256)?;
    let dt = args.dt.map_or(TimeStep::Auto, TimeStep::Fixed);
    let steps = args.steps.unwrap_or(1_000_000);
    write_text(Path::new(&format!("{prefix}_curve_{:06}.csv", 0)), &curve.to_csv())?;
    let mut failed = None;
    let evo = evolve_chs_curve_observed(&curve, &density, eps, dt, steps, |step, c| {
        if failed.is_none() && args.every.is_some_and(|k| k > 0 && step % k == 0) {
            failed = write_text(Path::new(&format!("{prefix}_curve_{step:06}.csv")), &c.to_csv()).err();
        }
    })?;
    if let Some(f) = failed {
        return Err(f);
    }
    write_text(Path::new(&format!("{prefix}_curve_{:06}.csv", evo.steps)), &evo.curve.to_csv())?;
    let summary = json!({
        "rhs": "chs_curve",
        "epsilon": eps,
        "steps": evo.steps,
        "time": evo.time,
        "min_dt": evo.min_dt,
        "vanishing_point": evo.vanishing_point,
    });
    write_text(Path::new(&format!("{prefix}_summary.json")), &to_json(&summary))
}

fn trials_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_trials.csv"))
}

pub fn verify(args: VerifyArgs) -> Outcome {
    let name = required(args.experiment, "experiment")?;
    let out = args.out.unwrap_or_else(|| PathBuf::from("report.json"));
    let (json, csv, summary) = if let Some(spec) = name.strip_prefix("equivariance:") {
        let (median, family) =
            spec.split_once(':').ok_or_else(|| invalid("expected equivariance:<median>:<family>"))?;
        let defaults = EquivarianceOptions::default();
        let opts = EquivarianceOptions {
            trials: args.trials.unwrap_or(defaults.trials),
            cond_bound: args.cond_bound.unwrap_or(defaults.cond_bound),
            seed: args.seed.unwrap_or(defaults.seed),
            ..defaults
        };
        let r = equivariance_suite(EquivarianceMedian::from_name(median)?, TransformFamily::from_name(family)?, &opts)?;
        let summary = format!(
            "max discrepancy {:.3e}, {:.0}% of trials above 1e-3",
            r.max_discrepancy,
            100.0 * r.fraction_above_1e3
        );
        (r.to_json()?, r.trials_csv(), summary)
    } else {
        let opts = ExperimentOptions {
            seed: args.seed,
            radii: args.radii,
            samples: args.samples,
            trials: args.trials,
            jets: args.jets,
            max_samples: args.max_samples,
        };
        let r = run_experiment(&name, &opts)?;
        let rel: Vec<String> = r.relative_errors.iter().map(|e| format!("{:.3}%", 100.0 * e)).collect();
        (r.to_json()?, r.trials_csv(), format!("relative errors [{}]", rel.join(", ")))
    };
    write_text(&out, &(json + "\n"))?;
    write_text(&trials_path(&out), &csv)?;
    eprintln!("{name}: {summary}");
    Ok(())
}

pub fn depth(args: DepthArgs) -> Outcome {
    let input = required(args.input, "in")?;
    let out = required(args.out, "out")?;
    let grid = args.grid.unwrap_or_else(|| vec![256, 256]);
    let (w, h) = (grid[0], grid[1]);
    if w == 0 || h == 0 {
        return Err(invalid("grid dimensions must be positive"));
    }
    let set = load_points(&input, args.weighted.unwrap_or(false))?;
    set.require_nonempty()?;
    set.require_dim(2)?;
    let (mut lo, mut hi) = set.bounding_box();
    for a in 0..2 {
        if hi[a] - lo[a] <= 0.0 {
            lo[a] -= 1.0;
            hi[a] += 1.0;
        }
    }
    let (dx, dy) = ((hi[0] - lo[0]) / w as f64, (hi[1] - lo[1]) / h as f64);
    let cell_of = |p: &[f64]| {
        let j = (((p[0] - lo[0]) / dx) as usize).min(w - 1);
        let i = (((hi[1] - p[1]) / dy) as usize).min(h - 1);
        i * w + j
    };
    let mut extra: Vec<Vec<usize>> = vec![Vec::new(); w * h];
    for k in 0..set.len() {
        extra[cell_of(set.point(k))].push(k);
    }
    let values = (0..w * h)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / w, c % w);
            let centre = [lo[0] + (j as f64 + 0.5) * dx, hi[1] - (i as f64 + 0.5) * dy];
            let mut d = halfspace_depth(&centre, &set)?;
            for &k in &extra[c] {
                d = d.max(halfspace_depth(set.point(k), &set)?);
            }
            Ok(d)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    write_pfm(&out, &ImageGrid::new(vec![h, w], 1, values)?)?;
    Ok(())
}
