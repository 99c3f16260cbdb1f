//! Subcommand bodies. Every number printed here comes from the library.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use kernel_stability::counterexample::{build_counterexample, series_evidence};
use kernel_stability::kernel::{
    BlockCount, BlockDiagKernel, Kernel, PiecewiseConstantKernel, SymMatrix, TrapezoidKernel,
};
use kernel_stability::kernel_file::{parse_matrix, KernelFile, LoadedKernel};
use kernel_stability::norms::{self, NormReport, NormValue};
use kernel_stability::operator::{
    adversarial_search, apply_operator, default_grid, default_step, BoundedInput, MethodChoice,
    SearchConfig, Verdict,
};
use kernel_stability::rational::{self, Rational};
use kernel_stability::verification::{self, Negated};
use kernel_stability::{Error, Result};

use crate::config::{Format, Options};
use crate::Outcome;

const DEFAULT_H_MAX: u64 = 4;
const DEFAULT_BUDGET: usize = 10_000;
const DEFAULT_GRAM_POINTS: usize = 20;
const DEFAULT_PROBE_SAMPLES: usize = 1000;
const DEFAULT_DELTA: f64 = 1e-6;
/// Span sampled for kernels with unbounded support.
const UNBOUNDED_SPAN: f64 = 64.0;

fn default_resolution() -> Rational {
    rational::rat(1, 2)
}

fn emit(opts: &Options, text: &str) -> Result<()> {
    match &opts.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn table(rows: &[(String, String)]) -> String {
    let width = rows
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn value_text(v: &NormValue) -> String {
    match &v.exact {
        Some(r) => rational::format(r),
        None => v.approx.to_string(),
    }
}

fn exact_text(v: &NormValue) -> String {
    v.exact.as_ref().map(rational::format).unwrap_or_default()
}

fn op_text(report: &NormReport) -> String {
    match (&report.exact, &report.lower, &report.upper) {
        (Some(v), _, _) => format!("{} (exact)", value_text(v)),
        (None, lo, hi) => format!(
            "[{}, {}] (bounds)",
            lo.as_ref().map_or("-".into(), value_text),
            hi.as_ref().map_or("-".into(), value_text)
        ),
    }
}

fn signs_text(signs: &[i8]) -> String {
    signs
        .iter()
        .map(|&s| if s >= 0 { '+' } else { '-' })
        .collect()
}

fn parse_rational(text: &str, what: &str) -> Result<Rational> {
    rational::parse(text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::InvalidArgument(format!("--{what}: {message}")),
        other => other,
    })
}

fn load_kernel(opts: &Options) -> Result<LoadedKernel> {
    if let Some(path) = &opts.kernel_file {
        if opts.matrix.is_some() {
            return Err(Error::InvalidArgument(
                "give --matrix or --kernel-file, not both".into(),
            ));
        }
        return KernelFile::load(path)?.build();
    }
    if let Some(text) = &opts.matrix {
        let m = parse_matrix(text)?;
        return Ok(match &opts.epsilon {
            Some(e) => LoadedKernel::Trapezoid(TrapezoidKernel::with_epsilon(
                m,
                parse_rational(e, "epsilon")?,
            )?),
            None => LoadedKernel::PiecewiseConstant(PiecewiseConstantKernel::new(m)),
        });
    }
    if let Some(h) = opts.h_max {
        let count =
            usize::try_from(h).map_err(|_| Error::InvalidArgument("--h-max too large".into()))?;
        let (k, spec) = build_counterexample(BlockCount::Finite(count))?;
        return Ok(LoadedKernel::Counterexample(k, spec));
    }
    Err(Error::InvalidArgument(
        "no kernel given: use --matrix, --kernel-file or --h-max".into(),
    ))
}

/// Kernel with `--negate` applied.
fn kernel_of(loaded: &LoadedKernel, negate: bool) -> Box<dyn Kernel + '_> {
    struct Borrowed<'a>(&'a dyn Kernel);
    impl Kernel for Borrowed<'_> {
        fn eval(&self, x: &Rational, y: &Rational) -> Rational {
            self.0.eval(x, y)
        }
        fn eval_f64(&self, x: f64, y: f64) -> f64 {
            self.0.eval_f64(x, y)
        }
        fn support(&self) -> Option<(Rational, Rational)> {
            self.0.support()
        }
        fn breakpoints(&self) -> Vec<Rational> {
            self.0.breakpoints()
        }
        fn layout(&self) -> Option<Vec<kernel_stability::kernel::LayoutBlock>> {
            self.0.layout()
        }
        fn lipschitz_bound(&self) -> Option<f64> {
            self.0.lipschitz_bound()
        }
    }
    let inner = Borrowed(loaded.as_kernel());
    if negate {
        Box::new(Negated(inner))
    } else {
        Box::new(inner)
    }
}

fn block_matrices(k: &BlockDiagKernel) -> Result<Vec<(String, SymMatrix)>> {
    let count = match k.count() {
        BlockCount::Finite(n) => n,
        BlockCount::Unbounded => (0..)
            .take_while(|&i| rational::to_f64(&k.offset(i)) < UNBOUNDED_SPAN)
            .count(),
    };
    (0..count)
        .map(|i| Ok((format!("block {}", i + 1), k.block(i)?.matrix().clone())))
        .collect()
}

fn matrices_of(loaded: &LoadedKernel) -> Result<Vec<(String, SymMatrix)>> {
    match loaded {
        LoadedKernel::PiecewiseConstant(k) => Ok(vec![("matrix".into(), k.matrix().clone())]),
        LoadedKernel::Trapezoid(k) => Ok(vec![("matrix".into(), k.matrix().clone())]),
        LoadedKernel::BlockDiagonal(k) | LoadedKernel::Counterexample(k, _) => block_matrices(k),
    }
}

fn sample_span(kernel: &dyn Kernel) -> (f64, f64) {
    match kernel.support() {
        Some((lo, hi)) => (rational::to_f64(&lo), rational::to_f64(&hi)),
        None => (0.0, UNBOUNDED_SPAN),
    }
}

pub fn norms(opts: &Options) -> Result<Outcome> {
    let loaded = load_kernel(opts)?;
    let m = loaded
        .matrix()
        .ok_or_else(|| Error::InvalidArgument("norms needs a single matrix kernel".into()))?;
    let seed = opts.seed.unwrap_or(norms::DEFAULT_SEED);
    if m.dim() > norms::ENUMERATION_CAP {
        eprintln!(
            "kstab: advisory: n = {} exceeds the enumeration cap {}; the (inf,1) norm is bracketed",
            m.dim(),
            norms::ENUMERATION_CAP
        );
    }
    let report = norms::matrix_norm_report(m, seed);
    let trap = match &loaded {
        LoadedKernel::Trapezoid(k) => Some(k),
        _ => None,
    };
    let kernel = trap.map(|k| {
        let bracket = norms::kernel_opnorm_trap_bracket(k).ok();
        (
            NormValue::exact(norms::kernel_l1_trap(k)),
            NormValue::exact(norms::kernel_l1_distance_pwc_trap(k.matrix(), k.epsilon())),
            bracket,
        )
    });
    let format = opts.format.unwrap_or_default();
    let text = match format {
        Format::Json => {
            let mut v = json!({ "schema": "1", "matrix": report });
            if let (Some(k), Some((l1, dist, bracket))) = (trap, &kernel) {
                v["kernel"] = json!({
                    "epsilon": k.epsilon().to_string(),
                    "l1_piecewise_constant": report.l1,
                    "l1_trapezoid": l1,
                    "l1_distance": dist,
                    "op_inf1_trapezoid": bracket,
                });
            }
            to_json(&v)?
        }
        Format::Table => {
            let mut rows = vec![
                ("n".to_string(), m.dim().to_string()),
                ("l1".to_string(), value_text(&report.l1)),
                ("op_inf1".to_string(), op_text(&report)),
            ];
            if let Some(w) = &report.witness {
                rows.push(("witness".into(), signs_text(w)));
            }
            if let (Some(k), Some((l1, dist, bracket))) = (trap, &kernel) {
                rows.push(("epsilon".into(), k.epsilon().to_string()));
                rows.push(("kernel_l1_trapezoid".into(), value_text(l1)));
                rows.push(("kernel_l1_distance".into(), value_text(dist)));
                if let Some(b) = bracket {
                    rows.push(("kernel_op_inf1_trapezoid".into(), op_text(b)));
                }
            }
            table(&rows)
        }
        Format::Csv => {
            let row = |name: &str, v: &NormValue| {
                vec![name.to_string(), exact_text(v), v.approx.to_string()]
            };
            let mut rows = vec![row("l1", &report.l1)];
            if let Some(v) = &report.exact {
                rows.push(row("op_inf1", v));
            }
            if let Some(v) = &report.lower {
                rows.push(row("op_inf1_lower", v));
            }
            if let Some(v) = &report.upper {
                rows.push(row("op_inf1_upper", v));
            }
            if let Some((l1, dist, bracket)) = &kernel {
                rows.push(row("kernel_l1_trapezoid", l1));
                rows.push(row("kernel_l1_distance", dist));
                if let Some(b) = bracket {
                    rows.extend(b.lower.iter().map(|v| row("kernel_op_inf1_lower", v)));
                    rows.extend(b.upper.iter().map(|v| row("kernel_op_inf1_upper", v)));
                }
            }
            csv_text(&["quantity", "value", "approx"], &rows)?
        }
    };
    emit(opts, &text)?;
    Ok(Outcome::Pass)
}

fn load_input(opts: &Options) -> Result<BoundedInput> {
    match (&opts.input, &opts.input_file) {
        (Some(text), None) => BoundedInput::parse_segments(text),
        (None, Some(path)) => BoundedInput::read_csv(File::open(path)?),
        (Some(_), Some(_)) => Err(Error::InvalidArgument(
            "give --input or --input-file, not both".into(),
        )),
        (None, None) => Err(Error::InvalidArgument(
            "the operator command needs --input or --input-file".into(),
        )),
    }
}

fn input_rows(u: &BoundedInput) -> Vec<Vec<String>> {
    u.breakpoints()
        .iter()
        .zip(u.values().iter().map(Some).chain(std::iter::once(None)))
        .map(|(x, v)| {
            vec![
                rational::format(x),
                v.map_or_else(|| "0".to_string(), rational::format),
            ]
        })
        .collect()
}

pub fn operator(opts: &Options) -> Result<Outcome> {
    let loaded = load_kernel(opts)?;
    let kernel = kernel_of(&loaded, opts.negate);
    let format = opts.format.unwrap_or_default();
    if opts.search {
        let resolution = match &opts.resolution {
            Some(r) => parse_rational(r, "resolution")?,
            None => default_resolution(),
        };
        let config = SearchConfig {
            resolution,
            budget: opts.budget.unwrap_or(DEFAULT_BUDGET),
            restarts: opts.restarts.unwrap_or(1),
            seed: opts.seed.unwrap_or(norms::DEFAULT_SEED),
        };
        let result = adversarial_search(kernel.as_ref(), &config)?;
        let witness = input_rows(&result.witness);
        let text = match format {
            Format::Json => to_json(&json!({
                "schema": "1",
                "resolution": rational::format(&config.resolution),
                "lower_bound": result.lower_bound,
                "flips": result.flips,
                "segments": result.segments,
                "history": result.history,
                "witness": witness,
            }))?,
            Format::Csv => csv_text(&["x", "value"], &witness)?,
            Format::Table => table(&[
                ("resolution".into(), rational::format(&config.resolution)),
                ("segments".into(), result.segments.to_string()),
                ("flips".into(), result.flips.to_string()),
                ("lower_bound".into(), value_text(&result.lower_bound)),
                (
                    "lower_bound_approx".into(),
                    result.lower_bound.approx.to_string(),
                ),
            ]),
        };
        emit(opts, &text)?;
        return Ok(Outcome::Pass);
    }
    let u = load_input(opts)?;
    let step = match &opts.grid_step {
        Some(s) => parse_rational(s, "grid-step")?,
        None => default_step(),
    };
    let grid = default_grid(kernel.as_ref(), &step)?;
    let method = if opts.quadrature {
        MethodChoice::Quadrature
    } else {
        MethodChoice::Auto
    };
    let out = apply_operator(kernel.as_ref(), &u, Some(grid), method)?;
    if out.fallback_warning {
        eprintln!("kstab: warning: no closed form for this kernel; used quadrature");
    }
    let text = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            out.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
        Format::Json => to_json(&json!({
            "schema": "1",
            "method": out.method,
            "l1_estimate": out.l1_estimate,
            "l1_exact": out.l1_exact.as_ref().map(rational::format),
            "fallback_warning": out.fallback_warning,
            "grid": out.grid.iter().map(rational::format).collect::<Vec<_>>(),
            "values": out.values,
        }))?,
        Format::Table => {
            let mut rows = vec![
                (
                    "method".to_string(),
                    serde_json::to_value(out.method)?
                        .as_str()
                        .unwrap_or("")
                        .to_string(),
                ),
                (
                    "l1".to_string(),
                    out.l1_exact
                        .as_ref()
                        .map_or_else(|| out.l1_estimate.to_string(), rational::format),
                ),
                ("l1_approx".to_string(), out.l1_estimate.to_string()),
            ];
            rows.extend(
                out.grid
                    .iter()
                    .zip(&out.values)
                    .map(|(x, v)| (format!("y({})", rational::format(x)), v.to_string())),
            );
            table(&rows)
        }
    };
    emit(opts, &text)?;
    Ok(Outcome::Pass)
}

pub fn counterexample(opts: &Options) -> Result<Outcome> {
    let h_max = opts.h_max.unwrap_or(DEFAULT_H_MAX);
    let count =
        usize::try_from(h_max).map_err(|_| Error::InvalidArgument("--h-max too large".into()))?;
    let (_, spec) = build_counterexample(BlockCount::Finite(count))?;
    spec.verify()?;
    let evidence = series_evidence(&spec, opts.horizon.unwrap_or(h_max))?;
    let verdict = evidence.verdict();
    if let Some(path) = &opts.spec_out {
        write_file(path, &spec.to_json()?)?;
    }
    let text = match opts.format.unwrap_or_default() {
        Format::Csv => {
            let mut buf = Vec::new();
            evidence.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
        Format::Json => to_json(&json!({
            "schema": "1",
            "spec": spec,
            "evidence": evidence,
            "verdict": verdict,
        }))?,
        Format::Table => {
            let mut rows: Vec<(String, String)> = spec
                .blocks
                .iter()
                .map(|b| {
                    (
                        format!("block {}", b.h),
                        format!(
                            "n={} eps={} offset={} l1={} op<={}",
                            b.n,
                            b.epsilon,
                            rational::format(&b.offset),
                            rational::format(&b.l1),
                            rational::format(&b.op_upper)
                        ),
                    )
                })
                .collect();
            rows.push(("horizon".into(), evidence.horizon.to_string()));
            rows.push((
                "l1_partial_sum".into(),
                rational::to_f64(&evidence.l1_partial_sum).to_string(),
            ));
            rows.push(("l1_floor ln(H+1)".into(), evidence.l1_floor.to_string()));
            rows.push((
                "op_partial_sum".into(),
                rational::to_f64(&evidence.op_partial_sum).to_string(),
            ));
            rows.push(("op_tail".into(), rational::format(&evidence.op_tail)));
            rows.push((
                "op_total_bound".into(),
                rational::to_f64(&evidence.op_total_bound).to_string(),
            ));
            rows.push((
                "verdict".into(),
                serde_json::to_value(verdict.verdict)?
                    .as_str()
                    .unwrap_or("")
                    .to_string(),
            ));
            table(&rows)
        }
    };
    emit(opts, &text)?;
    Ok(if verdict.verdict == Verdict::StableNotL1 {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn verify(opts: &Options) -> Result<Outcome> {
    let loaded = load_kernel(opts)?;
    let kernel = kernel_of(&loaded, opts.negate);
    let tol = opts.tol.unwrap_or(verification::DEFAULT_TOL);
    let seed = opts.seed.unwrap_or(verification::DEFAULT_SEED);
    let sign = if opts.negate {
        rational::int(-1)
    } else {
        rational::int(1)
    };
    let mut checks: Vec<(String, bool, Value)> = Vec::new();
    for (name, m) in matrices_of(&loaded)? {
        let m = if opts.negate { m.scaled(&sign) } else { m };
        let r = verification::check_psd_matrix(&m, tol);
        checks.push((format!("psd {name}"), r.pass, serde_json::to_value(&r)?));
    }
    let (lo, hi) = sample_span(kernel.as_ref());
    let points =
        verification::random_points(opts.count.unwrap_or(DEFAULT_GRAM_POINTS), lo, hi, seed);
    let gram = verification::gram_check(kernel.as_ref(), &points, tol)?;
    checks.push((
        "gram".into(),
        gram.pass,
        json!({ "points": gram.sample.points.len(), "min_eigenvalue": gram.sample.min_eigenvalue, "tol": tol }),
    ));
    let probe = verification::symmetry_continuity_probe(
        kernel.as_ref(),
        opts.samples.unwrap_or(DEFAULT_PROBE_SAMPLES),
        opts.delta.unwrap_or(DEFAULT_DELTA),
        seed,
    )?;
    checks.push((
        "symmetry".into(),
        probe.symmetric(),
        json!({ "defect": probe.symmetry_defect }),
    ));
    checks.push((
        "continuity".into(),
        !probe.discontinuity_flagged,
        serde_json::to_value(&probe)?,
    ));
    let pass = checks.iter().all(|(_, ok, _)| *ok);
    let verdict = |ok: bool| if ok { "pass" } else { "fail" }.to_string();
    let text = match opts.format.unwrap_or_default() {
        Format::Json => to_json(&json!({
            "schema": "1",
            "pass": pass,
            "checks": checks.iter().map(|(n, ok, d)| json!({ "check": n, "pass": ok, "detail": d })).collect::<Vec<_>>(),
        }))?,
        Format::Csv => csv_text(
            &["check", "result", "detail"],
            &checks
                .iter()
                .map(|(n, ok, d)| vec![n.clone(), verdict(*ok), d.to_string()])
                .collect::<Vec<_>>(),
        )?,
        Format::Table => {
            let mut rows: Vec<(String, String)> = checks
                .iter()
                .map(|(n, ok, d)| (n.clone(), format!("{}  {d}", verdict(*ok))))
                .collect();
            rows.push(("overall".into(), verdict(pass)));
            table(&rows)
        }
    };
    emit(opts, &text)?;
    Ok(if pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    })
}

fn parse_points(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("--points: not a number: {:?}", p.trim()))
            })
        })
        .collect()
}

pub fn gram(opts: &Options) -> Result<Outcome> {
    let loaded = load_kernel(opts)?;
    let kernel = kernel_of(&loaded, opts.negate);
    let tol = opts.tol.unwrap_or(verification::DEFAULT_TOL);
    let points = match &opts.points {
        Some(text) => parse_points(text)?,
        None => {
            let (lo, hi) = sample_span(kernel.as_ref());
            let seed = opts.seed.unwrap_or(verification::DEFAULT_SEED);
            verification::random_points(opts.count.unwrap_or(DEFAULT_GRAM_POINTS), lo, hi, seed)
        }
    };
    let check = verification::gram_check(kernel.as_ref(), &points, tol)?;
    let text = match opts.format.unwrap_or_default() {
        Format::Json => to_json(&json!({ "schema": "1", "gram": check }))?,
        Format::Csv => {
            let mut buf = Vec::new();
            check.sample.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
        Format::Table => table(&[
            ("points".into(), check.sample.points.len().to_string()),
            (
                "min_eigenvalue".into(),
                check.sample.min_eigenvalue.to_string(),
            ),
            ("tol".into(), tol.to_string()),
            (
                "result".into(),
                if check.pass { "pass" } else { "fail" }.into(),
            ),
        ]),
    };
    emit(opts, &text)?;
    Ok(if check.pass {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    })
}
