use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sphreg::io::{self, fmt_f64, KeyValueDoc};
use sphreg::sht::Transform;
use sphreg::simulate::{
    default_probes, isotropy_test_with, realization_rng, sample_isotropic_with, IsotropyConfig, ProbeTuple, Shrinkage,
};
use sphreg::{
    analyze, build_frontier, field_errors, lambda_bound_for_error, regularize, sample_isotropic, CoefficientSet,
    DegreeWeights, EnsembleSpec, Error, Frontier, LambdaChoice, PowerSpectrum, QuadratureGrid, RegularizationResult,
    Result, Rotation, ScalingReport,
};

use crate::args::{
    BetaArgs, Command, FrontierArgs, InputArgs, IsotropyArgs, Preset, RegularizeArgs, Selector, ShrinkageKind,
    SimulateArgs, SolveArgs, SpectrumArgs,
};

/// Relative tolerance for frontier and regularize cross-checks.
const CROSS_CHECK_TOL: f64 = 1e-9;

pub const CONFIG_FILE: &str = "config.json";

pub fn run(mut command: Command) -> Result<()> {
    if let Command::Replay(replay) = &command {
        let text = fs::read_to_string(&replay.config)?;
        let mut recorded: Command = serde_json::from_str(&text).map_err(|e| Error::Format {
            line: e.line(),
            msg: e.to_string(),
        })?;
        recorded.set_out(replay.out.clone());
        return run(recorded);
    }
    canonicalize_paths(&mut command)?;
    let out = command.out().cloned();
    if let Some(dir) = &out {
        fs::create_dir_all(dir)?;
        let echo = serde_json::to_string_pretty(&command).map_err(|e| Error::Numeric(e.to_string()))?;
        fs::write(dir.join(CONFIG_FILE), echo + "\n")?;
    }
    let out = out.as_deref();
    match &command {
        Command::Regularize(a) => cmd_regularize(a, require_out(out)?),
        Command::Frontier(a) => cmd_frontier(a, require_out(out)?),
        Command::SolveLambda(a) => cmd_solve(a, out),
        Command::Scale(a) => cmd_scale(a, require_out(out)?),
        Command::Simulate(a) => cmd_simulate(a, require_out(out)?),
        Command::IsotropyTest(a) => cmd_isotropy(a, out),
        Command::Report(a) => cmd_report(a, require_out(out)?),
        Command::Replay(_) => unreachable!(),
    }
}

fn require_out(out: Option<&Path>) -> Result<&Path> {
    out.ok_or_else(|| Error::Domain("this command needs --out <dir>".into()))
}

fn canonicalize(path: &mut PathBuf) -> Result<()> {
    *path = fs::canonicalize(&*path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(())
}

fn canonicalize_paths(command: &mut Command) -> Result<()> {
    let (input, spectrum, beta) = match command {
        Command::Regularize(a) | Command::Scale(a) | Command::Report(a) => {
            (Some(&mut a.input), None, Some(&mut a.beta))
        }
        Command::Frontier(a) => (Some(&mut a.input), None, Some(&mut a.beta)),
        Command::SolveLambda(a) => (Some(&mut a.input), None, Some(&mut a.beta)),
        Command::Simulate(a) => (None, Some(&mut a.spectrum), None),
        Command::IsotropyTest(a) => (None, Some(&mut a.spectrum), Some(&mut a.beta)),
        Command::Replay(_) => return Ok(()),
    };
    if let Some(path) = input.and_then(|i| i.input.as_mut()) {
        canonicalize(path)?;
    }
    if let Some(path) = spectrum.and_then(|s| s.spectrum.as_mut()) {
        canonicalize(path)?;
    }
    if let Some(b) = beta {
        if b.beta.first().map(String::as_str) == Some("csv") {
            if let Some(p) = b.beta.get_mut(1) {
                let mut path = PathBuf::from(&*p);
                canonicalize(&mut path)?;
                *p = path.to_string_lossy().into_owned();
            }
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_doc(doc: &KeyValueDoc, path: Option<&Path>) -> Result<()> {
    let stdout = std::io::stdout();
    doc.write(stdout.lock())?;
    if let Some(path) = path {
        let mut w = create(path)?;
        doc.write(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn preset_spectrum(preset: Preset, band_limit: usize, exponent: f64) -> Result<PowerSpectrum> {
    match preset {
        Preset::CmbLike => Ok(PowerSpectrum::cmb_like(band_limit)),
        Preset::Flat => PowerSpectrum::flat(band_limit, 1.0),
        Preset::PowerLaw => PowerSpectrum::power_law(band_limit, exponent),
    }
}

fn load_spectrum(args: &SpectrumArgs, default_preset: Option<Preset>) -> Result<PowerSpectrum> {
    if let Some(path) = &args.spectrum {
        let s = io::read_spectrum(BufReader::new(File::open(path)?))?;
        return match args.band_limit {
            Some(l) if l != s.band_limit() => Err(Error::BandLimitMismatch {
                left: l,
                right: s.band_limit(),
            }),
            _ => Ok(s),
        };
    }
    let preset = args
        .preset
        .or(default_preset)
        .ok_or_else(|| Error::Domain("give --spectrum <csv> or --preset".into()))?;
    let band_limit = args
        .band_limit
        .ok_or_else(|| Error::Domain("--preset needs --band-limit".into()))?;
    preset_spectrum(preset, band_limit, args.exponent)
}

/// Observed coefficients, from a file or a synthetic preset realization.
fn load_observed(args: &InputArgs) -> Result<CoefficientSet> {
    let a = if let Some(path) = &args.input {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        if text.starts_with("# quadrature-grid") {
            let field = io::read_grid_field(text.as_bytes())?;
            let mut a = analyze(&field)?;
            if field.relative_imaginary() == 0.0 {
                a.mark_real_field(1e-9)?;
            }
            a
        } else {
            io::read_coefficients(text.as_bytes(), args.require_real)?
        }
    } else if let Some(preset) = args.preset {
        let band_limit = args
            .band_limit
            .ok_or_else(|| Error::Domain("--preset needs --band-limit".into()))?;
        return Ok(sample_isotropic(
            &preset_spectrum(preset, band_limit, args.exponent)?,
            args.seed,
        ));
    } else {
        return Err(Error::Domain("give --input <csv> or --preset".into()));
    };
    Ok(match args.band_limit {
        Some(l) if l != a.band_limit() => {
            let real = a.is_real_field();
            let mut b = a.resized(l);
            if real {
                b.mark_real_field(0.0)?;
            }
            b
        }
        _ => a,
    })
}

fn load_beta(args: &BetaArgs, band_limit: usize) -> Result<DegreeWeights> {
    let kind = args.beta.first().map(String::as_str).unwrap_or("const");
    let value = args.beta.get(1);
    let parse_exponent = |v: &String| {
        v.parse::<f64>()
            .map_err(|_| Error::Domain(format!("cannot parse beta exponent `{v}`")))
    };
    let beta = match (kind, value) {
        ("const", None) => DegreeWeights::constant(band_limit),
        ("powerlaw", Some(v)) => DegreeWeights::power_law(band_limit, parse_exponent(v)?)?,
        ("csv", Some(path)) => io::read_weights(BufReader::new(File::open(path)?))?,
        _ => {
            return Err(Error::Domain(format!(
                "--beta expects `const`, `csv <path>` or `powerlaw <p>`, got `{}`",
                args.beta.join(" ")
            )))
        }
    };
    if beta.band_limit() != band_limit {
        return Err(Error::BandLimitMismatch {
            left: band_limit,
            right: beta.band_limit(),
        });
    }
    Ok(beta)
}

/// Lambda chosen from a selector, with the frontier when it was needed.
struct Choice {
    lambda: f64,
    source: &'static str,
    marker: Option<&'static str>,
    frontier: Option<Frontier>,
    bound: Option<sphreg::ErrorBound>,
}

fn choose_lambda(sel: &Selector, a: &CoefficientSet, beta: &DegreeWeights) -> Result<Choice> {
    let from_choice = |frontier: Frontier, choice: LambdaChoice, source| {
        let (lambda, marker) = match choice {
            LambdaChoice::Lambda(l) => (l, None),
            LambdaChoice::ZeroSolution => (frontier.lambda_zero(), Some("zero-solution")),
            LambdaChoice::ObservedSolution => (0.0, Some("observed-solution")),
        };
        Choice {
            lambda,
            source,
            marker,
            frontier: Some(frontier),
            bound: None,
        }
    };
    if let Some(lambda) = sel.lambda {
        return Ok(Choice {
            lambda,
            source: "lambda",
            marker: None,
            frontier: None,
            bound: None,
        });
    }
    if let Some(sigma) = sel.sigma {
        let f = build_frontier(a, beta)?;
        let c = f.lambda_from_sigma(sigma)?;
        return Ok(from_choice(f, c, "sigma"));
    }
    if let Some(kappa) = sel.kappa {
        let f = build_frontier(a, beta)?;
        let c = f.lambda_from_kappa(kappa)?;
        return Ok(from_choice(f, c, "kappa"));
    }
    let eps = sel
        .epsilon
        .ok_or_else(|| Error::Domain("one of --lambda, --sigma, --kappa, --epsilon is required".into()))?;
    let bound = lambda_bound_for_error(a, beta, eps)?;
    Ok(Choice {
        lambda: bound.applied_lambda(),
        source: "epsilon",
        marker: None,
        frontier: None,
        bound: Some(bound),
    })
}

fn relative_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// Checks regularize's summaries against the frontier at the same lambda.
fn cross_check(frontier: &Frontier, r: &RegularizationResult) -> Result<()> {
    let lambda = r.lambda();
    let d = relative_gap(frontier.discrepancy_at(lambda), r.discrepancy());
    let n = (frontier.hybrid_norm_at(lambda) - r.hybrid_norm()).abs() / frontier.total_norm().max(f64::MIN_POSITIVE);
    if d > CROSS_CHECK_TOL || n > CROSS_CHECK_TOL || frontier.active_count(lambda) != r.active_degrees().len() {
        return Err(Error::Numeric(format!(
            "frontier and regularize disagree at lambda {lambda}: discrepancy gap {d:e}, norm gap {n:e}"
        )));
    }
    Ok(())
}

fn active_list(r: &RegularizationResult) -> String {
    r.active_degrees()
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn summary(a: &CoefficientSet, choice: &Choice, r: &RegularizationResult) -> KeyValueDoc {
    let mut doc = KeyValueDoc::new();
    doc.push("band_limit", a.band_limit())
        .push("lambda_source", choice.source)
        .push_f64("lambda", r.lambda());
    if let Some(marker) = choice.marker {
        doc.push("lambda_marker", marker);
    }
    if let Some(b) = &choice.bound {
        doc.push_f64("lambda_max", b.lambda_max).push("ell_star", b.ell_star);
    }
    doc.push_f64("sparsity", r.sparsity())
        .push("active_count", r.active_degrees().len())
        .push("active_degrees", active_list(r))
        .push_f64("hybrid_norm", r.hybrid_norm())
        .push_f64("discrepancy", r.discrepancy())
        .push_f64("l2_norm_ratio", r.l2_norm_ratio());
    doc
}

/// Regularization shared by `regularize`, `scale` and `report`.
fn regularize_run(args: &RegularizeArgs) -> Result<(CoefficientSet, DegreeWeights, Choice, RegularizationResult)> {
    let a = load_observed(&args.input)?;
    let beta = load_beta(&args.beta, a.band_limit())?;
    let choice = choose_lambda(&args.selector, &a, &beta)?;
    let r = regularize(&a, &beta, choice.lambda)?;
    if let Some(f) = &choice.frontier {
        cross_check(f, &r)?;
    }
    Ok((a, beta, choice, r))
}

fn write_coefficients(path: &Path, a: &CoefficientSet) -> Result<()> {
    let mut w = create(path)?;
    io::write_coefficients(&mut w, a)?;
    w.flush()?;
    Ok(())
}

/// Grid fields for the observed, regularized and rescaled coefficients, and
/// the field errors of the last two.
fn grid_outputs(
    out: &Path,
    observed: &CoefficientSet,
    regularized: &CoefficientSet,
    scaling: Option<&ScalingReport>,
    doc: &mut KeyValueDoc,
) -> Result<()> {
    let transform = Transform::new(QuadratureGrid::new(observed.band_limit()));
    let write_field = |name: &str, a: &CoefficientSet| -> Result<sphreg::GridField> {
        let f = transform.synthesize(a)?;
        let mut w = create(&out.join(name))?;
        io::write_grid_field(&mut w, &f)?;
        w.flush()?;
        Ok(f)
    };
    let fo = write_field("observed_field.csv", observed)?;
    let fr = write_field("regularized_field.csv", regularized)?;
    let e = field_errors(&fo, &fr)?;
    doc.push_f64("l2_error", e.l2).push_f64("linf_error", e.linf);
    if let Some(s) = scaling {
        let fs = write_field("scaled_field.csv", &regularized.scaled(s.gamma_norm))?;
        let e = field_errors(&fo, &fs)?;
        doc.push_f64("l2_error_scaled", e.l2)
            .push_f64("linf_error_scaled", e.linf);
    }
    Ok(())
}

/// Scaling factors, or `None` when the regularized field vanished.
fn scaling_report(
    a: &CoefficientSet,
    r: &RegularizationResult,
    doc: &mut KeyValueDoc,
) -> Result<Option<ScalingReport>> {
    match ScalingReport::new(a, r.coefficients()) {
        Ok(s) => {
            doc.push_f64("gamma_norm", s.gamma_norm)
                .push_f64("gamma_opt", s.gamma_opt)
                .push_f64("discrepancy_gamma_norm", s.discrepancy_at(s.gamma_norm))
                .push_f64("discrepancy_gamma_opt", s.discrepancy_at(s.gamma_opt));
            Ok(Some(s))
        }
        Err(Error::UndefinedScaling) => {
            doc.push("gamma_norm", "undefined");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn cmd_regularize(args: &RegularizeArgs, out: &Path) -> Result<()> {
    let (a, _, choice, r) = regularize_run(args)?;
    write_coefficients(&out.join("regularized.csv"), r.coefficients())?;
    let mut doc = summary(&a, &choice, &r);
    if args.grid {
        let mut scratch = KeyValueDoc::new();
        let scaling = scaling_report(&a, &r, &mut scratch)?;
        if let Some(s) = &scaling {
            doc.push_f64("gamma", s.gamma_norm);
        }
        grid_outputs(out, &a, r.coefficients(), scaling.as_ref(), &mut doc)?;
    }
    write_doc(&doc, Some(&out.join("summary.txt")))
}

fn write_frontier_files(out: &Path, f: &Frontier, samples: usize, doc: &mut KeyValueDoc) -> Result<()> {
    let mut w = create(&out.join("frontier.csv"))?;
    io::write_frontier(&mut w, f, samples)?;
    w.flush()?;
    let mut w = create(&out.join("l0.csv"))?;
    io::write_l0_frontier(&mut w, &f.l0_frontier())?;
    w.flush()?;
    doc.push("knots", f.knots().len())
        .push_f64("lambda_zero", f.lambda_zero())
        .push_f64("total_energy", f.total_energy())
        .push_f64("total_norm", f.total_norm());
    Ok(())
}

fn cmd_frontier(args: &FrontierArgs, out: &Path) -> Result<()> {
    let a = load_observed(&args.input)?;
    let beta = load_beta(&args.beta, a.band_limit())?;
    let f = build_frontier(&a, &beta)?;
    let mut doc = KeyValueDoc::new();
    doc.push("band_limit", a.band_limit());
    write_frontier_files(out, &f, args.samples, &mut doc)?;
    write_doc(&doc, Some(&out.join("frontier.txt")))
}

fn cmd_solve(args: &SolveArgs, out: Option<&Path>) -> Result<()> {
    let a = load_observed(&args.input)?;
    let beta = load_beta(&args.beta, a.band_limit())?;
    let choice = choose_lambda(&args.selector, &a, &beta)?;
    let mut doc = KeyValueDoc::new();
    doc.push("lambda_source", choice.source)
        .push_f64("lambda", choice.lambda);
    if let Some(marker) = choice.marker {
        doc.push("lambda_marker", marker);
    }
    if let Some(b) = &choice.bound {
        doc.push_f64("lambda_max", b.lambda_max).push("ell_star", b.ell_star);
    }
    if let Some(f) = &choice.frontier {
        doc.push_f64("discrepancy", f.discrepancy_at(choice.lambda))
            .push_f64("hybrid_norm", f.hybrid_norm_at(choice.lambda))
            .push("active_count", f.active_count(choice.lambda));
    }
    write_doc(&doc, out.map(|o| o.join("solve.txt")).as_deref())
}

fn write_scaling_files(out: &Path, s: &ScalingReport, r: &RegularizationResult, samples: usize) -> Result<()> {
    let mut w = create(&out.join("scaling.csv"))?;
    io::write_scaling_curve(&mut w, s, samples)?;
    w.flush()?;
    write_coefficients(&out.join("scaled.csv"), &r.coefficients().scaled(s.gamma_norm))
}

fn cmd_scale(args: &RegularizeArgs, out: &Path) -> Result<()> {
    let (a, _, choice, r) = regularize_run(args)?;
    let mut doc = KeyValueDoc::new();
    doc.push_f64("lambda", choice.lambda);
    let s = scaling_report(&a, &r, &mut doc)?.ok_or(Error::UndefinedScaling)?;
    write_scaling_files(out, &s, &r, args.gamma_samples)?;
    write_doc(&doc, Some(&out.join("scaling.txt")))
}

fn cmd_report(args: &RegularizeArgs, out: &Path) -> Result<()> {
    let (a, beta, mut choice, r) = regularize_run(args)?;
    let frontier = match choice.frontier.take() {
        Some(f) => f,
        None => {
            let f = build_frontier(&a, &beta)?;
            cross_check(&f, &r)?;
            f
        }
    };
    write_coefficients(&out.join("regularized.csv"), r.coefficients())?;
    let mut doc = summary(&a, &choice, &r);
    let scaling = scaling_report(&a, &r, &mut doc)?;
    if let Some(s) = &scaling {
        doc.push_f64("gamma", s.gamma_norm);
        write_scaling_files(out, s, &r, args.gamma_samples)?;
    }
    grid_outputs(out, &a, r.coefficients(), scaling.as_ref(), &mut doc)?;
    write_frontier_files(out, &frontier, args.samples, &mut doc)?;
    write_doc(&doc, Some(&out.join("summary.txt")))
}

fn cmd_simulate(args: &SimulateArgs, out: &Path) -> Result<()> {
    if args.realizations == 0 {
        return Err(Error::Domain("--realizations must be at least 1".into()));
    }
    let spectrum = load_spectrum(&args.spectrum, None)?;
    let mut w = create(&out.join("spectrum.csv"))?;
    io::write_spectrum(&mut w, &spectrum)?;
    w.flush()?;
    let transform = args
        .grid
        .then(|| Transform::new(QuadratureGrid::new(spectrum.band_limit())));
    let mut mean_power = vec![0.0; spectrum.band_limit() + 1];
    for i in 0..args.realizations {
        let a = sample_isotropic_with(&spectrum, &mut realization_rng(args.spectrum.seed, i as u64));
        for (acc, c) in mean_power.iter_mut().zip(sphreg::estimate_spectrum(&a).as_slice()) {
            *acc += c / args.realizations as f64;
        }
        write_coefficients(&out.join(format!("realization_{i:04}.csv")), &a)?;
        if let Some(t) = &transform {
            let mut w = create(&out.join(format!("field_{i:04}.csv")))?;
            io::write_grid_field(&mut w, &t.synthesize(&a)?)?;
            w.flush()?;
        }
    }
    let mut w = create(&out.join("estimated_spectrum.csv"))?;
    io::write_spectrum(&mut w, &PowerSpectrum::new(mean_power)?)?;
    w.flush()?;
    let mut doc = KeyValueDoc::new();
    doc.push("band_limit", spectrum.band_limit())
        .push("seed", args.spectrum.seed)
        .push("realizations", args.realizations)
        .push_f64("total_power", spectrum.total_power());
    write_doc(&doc, Some(&out.join("simulate.txt")))
}

fn cmd_isotropy(args: &IsotropyArgs, out: Option<&Path>) -> Result<()> {
    let spectrum = load_spectrum(&args.spectrum, Some(Preset::CmbLike))?;
    let beta = load_beta(&args.beta, spectrum.band_limit())?;
    let shrinkage = match args.shrinkage {
        ShrinkageKind::Block => Shrinkage::Block {
            beta,
            lambda: args.lambda,
        },
        ShrinkageKind::Coefficientwise => Shrinkage::Coefficientwise { lambda: args.lambda },
    };
    let [alpha, b, gamma] = args.rotation[..] else {
        return Err(Error::Domain("--rotation takes three angles".into()));
    };
    let cfg = IsotropyConfig {
        ensemble: EnsembleSpec::new(spectrum, args.realizations, args.spectrum.seed)?,
        shrinkage,
        rotation: Rotation::new(alpha, b, gamma),
        probes: default_probes(),
        significance: args.significance,
    };
    let report = isotropy_test_with(&cfg)?;

    let mut doc = KeyValueDoc::new();
    let verdict = if report.skipped {
        "skipped"
    } else if report.passed() {
        "pass"
    } else {
        "fail"
    };
    doc.push("verdict", verdict)
        .push("realizations", report.realizations)
        .push("seed", report.seed)
        .push("band_limit", cfg.ensemble.spectrum.band_limit())
        .push(
            "shrinkage",
            match args.shrinkage {
                ShrinkageKind::Block => "block",
                ShrinkageKind::Coefficientwise => "coefficientwise",
            },
        )
        .push_f64("lambda", args.lambda)
        .push(
            "rotation",
            format!("{} {} {}", fmt_f64(alpha), fmt_f64(b), fmt_f64(gamma)),
        )
        .push_f64("significance", report.significance)
        .push_f64("per_test_level", report.per_test_level)
        .push(
            "projection",
            format!("{} {}", fmt_f64(report.projection[0]), fmt_f64(report.projection[1])),
        );
    for (i, (p, q)) in report.probes.iter().zip(&report.rotated_probes).enumerate() {
        doc.push(format!("probe.{i}"), format!("{} {}", fmt_f64(p.theta), fmt_f64(p.phi)))
            .push(
                format!("rotated_probe.{i}"),
                format!("{} {}", fmt_f64(q.theta), fmt_f64(q.phi)),
            );
    }
    for t in &report.tests {
        let key = match t.tuple {
            ProbeTuple::Single(i) => format!("test.{i}"),
            ProbeTuple::Pair(i, j) => format!("test.{i}-{j}"),
        };
        doc.push_f64(format!("{key}.statistic"), t.ks.statistic)
            .push_f64(format!("{key}.p_value"), t.ks.p_value)
            .push(format!("{key}.verdict"), if t.passed { "pass" } else { "fail" });
    }
    write_doc(&doc, out.map(|o| o.join("isotropy.txt")).as_deref())
}
