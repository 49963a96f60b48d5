use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use radeq::extremal::solve_with;
use radeq::gallery::{format_table, run_gallery, FixtureReport, GalleryOptions};
use radeq::glue::{disc_reflection_glue, radial_glue_check, submean_check, GluedFunction};
use radeq::io::{self, GlueTarget, Provenance};
use radeq::measure::default_tol;
use radeq::par::Exec;
use radeq::{compare_abs_continuity, ma_cdf, reconstruct, support, Error, GridSpec, Mode};
use serde::Serialize;
use sha2::{Digest, Sha256};

const EXIT_FAIL: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_IO: u8 = 4;

const CSV_POINTS: usize = 1001;

#[derive(Parser)]
#[command(name = "radeq", version, about = "Weighted extremal functions of radial sets in C^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Replace the automatic grid with this many uniform points in s.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Seed for the Monte Carlo checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the machine-readable document on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for reports and CSV tables.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Terms kept in the countable-union series.
    #[arg(long, global = true)]
    truncation: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem in a problem document.
    Solve { spec: PathBuf },
    /// Solve relative to the ball of radius `--radius` (or the document's own ball).
    Relative {
        spec: PathBuf,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Monge-Ampère measure of a profile document.
    Measure { spec: PathBuf },
    /// Profile generated by a measure document.
    Reconstruct { spec: PathBuf },
    /// Gluing criterion and sub-mean-value sampling for a glue document.
    GlueCheck { spec: PathBuf },
    /// Mutual absolute continuity of the measures in two reports.
    Compare { first: PathBuf, second: PathBuf },
    /// Run every closed-form fixture.
    Gallery {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Circles per sub-mean-value check.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }

    fn validation(e: Error) -> Self {
        let code = if matches!(e, Error::Inadmissible(_)) { EXIT_SOLVER } else { EXIT_VALIDATION };
        Failure { code, message: e.to_string() }
    }

    fn solver(e: Error) -> Self {
        Failure { code: EXIT_SOLVER, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Solve { spec } => cmd_solve(cli, spec, None),
        Command::Relative { spec, radius } => cmd_solve(cli, spec, Some(*radius)),
        Command::Measure { spec } => cmd_measure(cli, spec),
        Command::Reconstruct { spec } => cmd_reconstruct(cli, spec),
        Command::GlueCheck { spec } => cmd_glue_check(cli, spec),
        Command::Compare { first, second } => cmd_compare(cli, first, second),
        Command::Gallery { dim, samples } => cmd_gallery(cli, *dim, *samples),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn provenance(input: &str, seed: Option<u64>) -> Provenance {
    Provenance {
        input_sha256: hex::encode(Sha256::digest(input.as_bytes())),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "out".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Writes `doc` under `--out-dir` as `<stem>.<suffix>` and prints it when `--json` is set.
fn emit<T: Serialize>(cli: &Cli, doc: &T, name: &str) -> Result<String, Failure> {
    let text = io::to_pretty(doc);
    if let Some(dir) = &cli.out_dir {
        write(&dir.join(name), &text)?;
    }
    if cli.json {
        print!("{text}");
    }
    Ok(text)
}

fn cmd_solve(cli: &Cli, path: &Path, relative: Option<Option<f64>>) -> Outcome {
    let text = read(path)?;
    let mut spec: io::ProblemSpec = io::parse(&text, io::PROBLEM_SCHEMA).map_err(Failure::validation)?;
    if let Some(radius) = relative {
        match (radius, spec.mode) {
            (Some(r), _) => spec.mode = Mode::Relative(r),
            (None, Mode::Relative(_)) => {}
            (None, Mode::Global) => {
                return Err(Failure {
                    code: EXIT_VALIDATION,
                    message: "relative needs --radius or a relative mode in the document".into(),
                })
            }
        }
    }
    if let Some(points) = cli.grid_points {
        spec.grid.points = Some(points);
    }
    let prob = spec.to_problem().map_err(Failure::validation)?;
    let start = Instant::now();
    let sol = solve_with(&prob, &spec.grid, Exec::default()).map_err(Failure::solver)?;
    eprintln!("solved in {:.3} s", start.elapsed().as_secs_f64());

    let report = io::SolutionReport::new(&spec, &sol, provenance(&text, None));
    let report_text = io::to_pretty(&report);
    let base = cli.out_dir.clone().or_else(|| {
        (!spec.output.is_empty()).then(|| path.parent().map(Path::to_path_buf).unwrap_or_default())
    });
    if let Some(dir) = base {
        let name = stem(path);
        let out = &spec.output;
        let defaults = cli.out_dir.is_some();
        let r_max = match prob.mode() {
            Mode::Global => 2.0 * prob.set().max_radius(),
            Mode::Relative(r) => r,
        };
        let rs = io::csv_radii(r_max, CSV_POINTS);
        if let Some(p) = out.report.clone().or_else(|| defaults.then(|| format!("{name}.report.json"))) {
            write(&dir.join(p), &report_text)?;
        }
        if let Some(p) = out.profile_csv.clone().or_else(|| defaults.then(|| format!("{name}.profile.csv"))) {
            write(&dir.join(p), &io::profile_csv(&sol.profile, &rs))?;
        }
        if let Some(p) = out.measure_csv.clone().or_else(|| defaults.then(|| format!("{name}.measure.csv"))) {
            write(&dir.join(p), &io::measure_csv(&sol.measure, &rs))?;
        }
    }
    if cli.json {
        print!("{report_text}");
    } else {
        print_support("support", &sol.support);
        print_support("contact set", &sol.contact_set);
        println!("total mass: {:.15e}", sol.measure.total());
        let check = &sol.diagnostics.self_check;
        println!("self-check: {}", if check.passed() { "passed" } else { "FAILED" });
        for p in &check.problems {
            println!("  {p}");
        }
    }
    Ok(0)
}

fn print_support(label: &str, s: &radeq::SupportReport) {
    let mut parts: Vec<String> = s.atoms.iter().map(|r| format!("sphere r = {r:.12}")).collect();
    parts.extend(s.density_intervals.iter().map(|[a, b]| format!("[{a:.12}, {b:.12}]")));
    if s.origin_mass > 0.0 {
        parts.push("origin".into());
    }
    if parts.is_empty() {
        parts.push("empty".into());
    }
    println!("{label}: {}", parts.join(", "));
}

fn cmd_measure(cli: &Cli, path: &Path) -> Outcome {
    let text = read(path)?;
    let spec: io::ProfileSpec = io::parse(&text, io::PROFILE_SCHEMA).map_err(Failure::validation)?;
    let m = ma_cdf(&spec.profile, spec.dim).map_err(Failure::validation)?;
    let supp = support(&m, default_tol(spec.dim));
    let report = io::MeasureReport {
        schema: io::MEASURE_REPORT_SCHEMA.into(),
        total_mass: m.total(),
        support: supp.clone(),
        measure: m,
        provenance: provenance(&text, None),
    };
    emit(cli, &report, &format!("{}.measure.json", stem(path)))?;
    if !cli.json {
        print_support("support", &supp);
        println!("total mass: {:.15e}", report.total_mass);
    }
    Ok(0)
}

fn cmd_reconstruct(cli: &Cli, path: &Path) -> Outcome {
    let text = read(path)?;
    let spec: io::MeasureSpec = io::parse(&text, io::MEASURE_SCHEMA).map_err(Failure::validation)?;
    let n = spec.measure.dim();
    let admissibility = radeq::admissible(&spec.measure, n);
    let profile = reconstruct(&spec.measure, n, spec.u0).map_err(Failure::validation)?;
    let report = io::ProfileReport {
        schema: io::PROFILE_REPORT_SCHEMA.into(),
        class: radeq::check_class(&profile),
        profile,
        admissibility,
        provenance: provenance(&text, None),
    };
    emit(cli, &report, &format!("{}.profile.json", stem(path)))?;
    if !cli.json {
        let knots: Vec<String> = report
            .profile
            .knots()
            .iter()
            .map(|k| format!("(r = {:.12}, u = {:.12})", (0.5 * k.s).exp(), k.value))
            .collect();
        println!("knots: {}", knots.join(", "));
        println!("right slope in log r: {:.12}", 2.0 * report.profile.right_slope());
        println!("in L+: {}", report.class.in_l_plus);
    }
    Ok(0)
}

fn cmd_glue_check(cli: &Cli, path: &Path) -> Outcome {
    let text = read(path)?;
    let spec: io::GlueSpec = io::parse(&text, io::GLUE_SCHEMA).map_err(Failure::validation)?;
    let seed = cli.seed.unwrap_or(spec.seed);
    let [lo, hi] = spec.radius_range;
    let mut report = io::GlueReport {
        schema: io::GLUE_REPORT_SCHEMA.into(),
        check: None,
        rejected: None,
        submean: None,
        accepted: false,
        provenance: provenance(&text, Some(seed)),
    };
    let glued = match &spec.glue {
        GlueTarget::Radial { dim, radius, inner, outer } => {
            let check = radial_glue_check(inner, outer, *radius);
            report.check = Some(check);
            match GluedFunction::radial(*dim, *radius, inner.clone(), outer.clone()) {
                Ok(g) => Some(g),
                Err(e) => {
                    report.rejected = Some(e.to_string());
                    None
                }
            }
        }
        GlueTarget::Disc { h } => match disc_reflection_glue(h) {
            Ok(g) => Some(g),
            Err(e) => {
                report.rejected = Some(e.to_string());
                None
            }
        },
    };
    if let Some(g) = glued {
        let scale = g.interface_radius();
        let sub = submean_check(&g, spec.samples, (lo * scale, hi * scale), seed, Exec::default())
            .map_err(Failure::validation)?;
        let derivative_ok = report.check.is_none_or(|c| c.derivative_ok == Some(true));
        report.accepted = derivative_ok && sub.violations == 0;
        report.submean = Some(sub);
    }
    emit(cli, &report, &format!("{}.glue.json", stem(path)))?;
    if !cli.json {
        if let Some(c) = &report.check {
            println!("continuous: {}, derivative_ok: {:?}, margin: {:.6e}", c.continuous, c.derivative_ok, c.margin);
        }
        if let Some(r) = &report.rejected {
            println!("rejected: {r}");
        }
        if let Some(s) = &report.submean {
            println!("{} violations in {} circles, worst deficit {:.3e}", s.violations, s.samples, s.worst_deficit);
        }
        println!("accepted: {}", report.accepted);
    }
    Ok(0)
}

fn cmd_compare(cli: &Cli, first: &Path, second: &Path) -> Outcome {
    let load = |p: &Path| -> Result<io::SolutionReport, Failure> {
        io::parse(&read(p)?, io::REPORT_SCHEMA).map_err(Failure::validation)
    };
    let (a, b) = (load(first)?, load(second)?);
    if a.measure.dim() != b.measure.dim() {
        return Err(Failure { code: EXIT_VALIDATION, message: "reports have different dimensions".into() });
    }
    let ac = compare_abs_continuity(&a.measure, &b.measure, default_tol(a.measure.dim()));
    let report = io::CompareReport { schema: io::COMPARE_SCHEMA.into(), m1_ll_m2: ac.m1_ll_m2, m2_ll_m1: ac.m2_ll_m1 };
    emit(cli, &report, "compare.json")?;
    if !cli.json {
        println!("first << second: {}", report.m1_ll_m2);
        println!("second << first: {}", report.m2_ll_m1);
    }
    Ok(0)
}

#[derive(Serialize)]
struct GallerySummary<'a> {
    schema: &'a str,
    passed: bool,
    fixtures: &'a [FixtureReport],
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() || c == '.' {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

fn cmd_gallery(cli: &Cli, dim: usize, samples: usize) -> Outcome {
    let mut opts = GalleryOptions { dim, submean_samples: samples, ..Default::default() };
    if let Some(points) = cli.grid_points {
        opts.grid = GridSpec::uniform(points);
    }
    if let Some(seed) = cli.seed {
        opts.seed = seed;
    }
    if let Some(k) = cli.truncation {
        if k == 0 {
            return Err(Failure { code: EXIT_VALIDATION, message: "--truncation must be at least 1".into() });
        }
        opts.truncation = k;
    }
    let start = Instant::now();
    let reports = run_gallery(&opts).map_err(Failure::validation)?;
    let passed = reports.iter().all(|r| r.passed);
    if let Some(dir) = &cli.out_dir {
        for r in &reports {
            if let (Some(prob), Some(sol)) = (&r.problem, &r.solution) {
                let spec = io::ProblemSpec::from_problem(prob, &opts.grid);
                let prov = provenance(&io::to_pretty(&spec), Some(opts.seed));
                write(&dir.join(format!("{}.report.json", slug(&r.name))), &io::to_pretty(&io::SolutionReport::new(&spec, sol, prov)))?;
            }
        }
    }
    let summary = GallerySummary { schema: io::GALLERY_SCHEMA, passed, fixtures: &reports };
    let text = io::to_pretty(&summary);
    if let Some(dir) = &cli.out_dir {
        write(&dir.join("gallery.json"), &text)?;
    }
    if cli.json {
        print!("{text}");
    } else {
        print!("{}", format_table(&reports));
        println!("{}", if passed { "all fixtures PASS" } else { "some fixtures FAIL" });
    }
    eprintln!("gallery wall time {:.3} s", start.elapsed().as_secs_f64());
    for r in &reports {
        eprintln!("  {:<34} {:>8.1} ms", r.name, r.elapsed.as_secs_f64() * 1e3);
    }
    Ok(if passed { 0 } else { EXIT_FAIL })
}
