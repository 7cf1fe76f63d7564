//! The `vkit` command line.
//!
//! Exit codes: 0 ok, 1 property failure, 2 input error, 3 pipeline stage
//! failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::complex::{build_cech, build_vr};
use crate::fk::{alpha, FkTriangulation};
use crate::io::{self, InputError, MapSpec};
use crate::persistence::compute_diagram;
use crate::straighten::{generator, straighten, StraightenConfig, GENERATORS};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_STAGE: i32 = 3;

/// Largest triangulation `fk` will enumerate.
pub const FK_SIMPLEX_LIMIT: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "vkit",
    version,
    about = "Vietoris-Rips/Čech persistence, Freudenthal-Kuhn meshes and measure-valued map straightening"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Persistence diagram of an open Vietoris-Rips or Čech filtration.
    Persist(PersistArgs),
    /// Freudenthal-Kuhn triangulation of the unit cube as an OFF mesh.
    Fk(FkArgs),
    /// Straighten a sampled measure-valued map into the Vietoris complex of a cover.
    Straighten(StraightenArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InputFormat {
    /// One point per row, Euclidean distances.
    Points,
    /// Full distance matrix.
    Matrix,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Filtration {
    Vr,
    Cech,
}

#[derive(Debug, clap::Args)]
pub struct PersistArgs {
    /// CSV file with points or a distance matrix.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "points")]
    pub format: InputFormat,
    #[arg(long, value_enum, default_value = "vr")]
    pub filtration: Filtration,
    /// Largest filtration threshold (exclusive).
    #[arg(long, default_value_t = f64::INFINITY)]
    pub r: f64,
    /// Simplex dimension cap; homology is reported up to `kmax - 1`.
    #[arg(long, default_value_t = 2)]
    pub kmax: usize,
    /// Output directory for diagram.csv and diagram.svg.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct FkArgs {
    #[arg(long)]
    pub n: usize,
    /// Cells per axis.
    #[arg(long)]
    pub res: usize,
    /// Output directory for mesh.off and certificate.json.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct StraightenArgs {
    /// Map specification JSON.
    #[arg(long, conflicts_with = "generator", required_unless_present = "generator")]
    pub input: Option<PathBuf>,
    /// Built-in source map: constant, sliding-dirac, two-ball or spread.
    #[arg(long)]
    pub generator: Option<String>,
    /// Cube dimension for generators.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Ball radius for generator covers.
    #[arg(long)]
    pub r: Option<f64>,
    /// Concentration threshold; defaults to 1 - 1/(2·2ⁿ·n!).
    #[arg(long)]
    pub pmass: Option<f64>,
    /// Finest triangulation resolution to try.
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    /// Accepted for interface uniformity; the pipeline is deterministic.
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory for certification.jsonl, summary.json and map.json.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Random instances per suite.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Optional distance-matrix (or point) CSV to validate as well.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "matrix")]
    pub format: InputFormat,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| input_error(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Persist(a) => persist(&a),
        Command::Fk(a) => fk(&a),
        Command::Straighten(a) => straighten_cmd(&a),
        Command::Verify(a) => verify_cmd(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("VKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn load_space(path: &Path, format: InputFormat) -> Result<crate::metric::FiniteMetricSpace, InputError> {
    let text = io::read_to_string(path)?;
    match format {
        InputFormat::Points => io::space_from_points_csv(&text),
        InputFormat::Matrix => io::space_from_matrix_csv(&text),
    }
}

fn persist(a: &PersistArgs) -> Result<i32, Failure> {
    if a.kmax == 0 {
        return Err(input_error("--kmax must be at least 1"));
    }
    if a.r.is_nan() {
        return Err(input_error("--r must be a number"));
    }
    let space = load_space(&a.input, a.format)?;
    if space.is_pseudometric() {
        eprintln!("warning: input has coincident points");
    }
    let complex = match a.filtration {
        Filtration::Vr => build_vr(&space, a.r, a.kmax),
        Filtration::Cech => build_cech(&space, a.r, a.kmax),
    };
    let diagram = compute_diagram(&complex, a.kmax - 1).map_err(|e| input_error(e.to_string()))?;
    write(&a.out, "diagram.csv", &diagram.to_csv())?;
    write(&a.out, "diagram.svg", &io::diagram_svg(&diagram))?;
    println!(
        "{} points, {} simplices, {} intervals -> {}",
        space.len(),
        complex.len(),
        diagram.len(),
        a.out.join("diagram.csv").display()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FkCertificate {
    n: usize,
    resolution: usize,
    simplex_count: usize,
    expected_count: usize,
    vertex_count: usize,
    max_star: usize,
    star_bound: usize,
    max_diameter: f64,
    expected_diameter: f64,
    total_volume: f64,
    interior_facets_shared_by_two: bool,
    boundary_facets_shared_by_one: bool,
}

fn fk(a: &FkArgs) -> Result<i32, Failure> {
    let tri = FkTriangulation::new(a.n, a.res).map_err(|e| input_error(e.to_string()))?;
    let expected = tri.simplex_count().filter(|&c| c <= FK_SIMPLEX_LIMIT).ok_or_else(|| {
        input_error(format!("n!·pⁿ exceeds {FK_SIMPLEX_LIMIT} simplices for n = {}, p = {}", a.n, a.res))
    })?;
    if a.n > 4 {
        return Err(input_error("mesh export supports n <= 4"));
    }
    let off = tri.to_off(FK_SIMPLEX_LIMIT).map_err(|e| input_error(e.to_string()))?;
    let mut count = 0;
    let mut max_diameter = 0.0f64;
    let mut total_volume = 0.0;
    for s in tri.simplices() {
        count += 1;
        max_diameter = max_diameter.max(tri.diameter(&s));
        total_volume += tri.volume(&s);
    }
    let max_star = tri.lattice_vertices().map(|v| tri.vertex_star_size(&v).expect("lattice vertex")).max().unwrap_or(0);
    let facets = tri.facet_incidence();
    let (mut interior_ok, mut boundary_ok) = (true, true);
    for (face, &c) in &facets {
        if tri.is_boundary_face(face) {
            boundary_ok &= c == 1;
        } else {
            interior_ok &= c == 2;
        }
    }
    let cert = FkCertificate {
        n: a.n,
        resolution: a.res,
        simplex_count: count,
        expected_count: expected,
        vertex_count: tri.vertex_count(),
        max_star,
        star_bound: alpha(a.n),
        max_diameter,
        expected_diameter: tri.mesh_diameter(),
        total_volume,
        interior_facets_shared_by_two: interior_ok,
        boundary_facets_shared_by_one: boundary_ok,
    };
    write(&a.out, "mesh.off", &off)?;
    write(&a.out, "certificate.json", &(serde_json::to_string_pretty(&cert).expect("plain struct") + "\n"))?;
    println!("{count} simplices, max star {max_star}, diameter {max_diameter}");
    let ok = count == expected && max_star <= alpha(a.n) && interior_ok && boundary_ok;
    Ok(if ok { EXIT_OK } else { EXIT_PROPERTY })
}

#[derive(Serialize)]
struct StraightenedMapOut<'a> {
    dim: usize,
    resolution: usize,
    values: &'a [crate::measure::FiniteMeasure],
}

fn straighten_cmd(a: &StraightenArgs) -> Result<i32, Failure> {
    let (space, cover, map, p_from_spec) = match (&a.input, &a.generator) {
        (Some(path), _) => {
            let spec = MapSpec::parse(&io::read_to_string(path)?)?;
            let p = spec.p_mass;
            let (space, cover, map) = spec.build()?;
            (space, cover, map, p)
        }
        (None, Some(name)) => {
            if !GENERATORS.contains(&name.as_str()) {
                return Err(input_error(format!(
                    "unknown generator {name:?}; expected one of {}",
                    GENERATORS.join(", ")
                )));
            }
            if a.n == 0 {
                return Err(input_error("--n must be at least 1"));
            }
            let b = generator(name, a.n, a.r).map_err(|e| input_error(e.to_string()))?;
            (b.space, b.cover, b.map, None)
        }
        (None, None) => return Err(input_error("either --input or --generator is required")),
    };
    if let Some(p) = a.pmass.or(p_from_spec) {
        if !(p > 0.0 && p < 1.0) {
            return Err(input_error("--pmass must lie in (0, 1)"));
        }
    }
    let config =
        StraightenConfig { p_mass: a.pmass.or(p_from_spec), max_resolution: a.res.max(1), ..Default::default() };
    let report = straighten(&space, &cover, &map, &config);
    write(&a.out, "certification.jsonl", &report.log.to_jsonl())?;
    write(&a.out, "summary.json", &(serde_json::to_string_pretty(&report.summary).expect("plain struct") + "\n"))?;
    match &report.outcome {
        Ok(s) if report.log.all_pass() => {
            let out = StraightenedMapOut {
                dim: s.map.triangulation().dim(),
                resolution: s.map.triangulation().resolution(),
                values: s.map.vertex_values(),
            };
            write(&a.out, "map.json", &(serde_json::to_string(&out).expect("plain struct") + "\n"))?;
            println!("certified: {}", report.log);
            Ok(EXIT_OK)
        }
        Ok(_) => {
            eprintln!("stage {} failed: {}", report.summary.failed_stage.unwrap_or("certify"), report.log);
            Ok(EXIT_STAGE)
        }
        Err(e) => {
            eprintln!("stage {} failed: {e}", e.stage());
            Ok(EXIT_STAGE)
        }
    }
}

fn verify_cmd(a: &VerifyArgs) -> Result<i32, Failure> {
    if a.trials == 0 {
        eprintln!("warning: --trials 0 runs no random instances; only fixed checks are executed");
    }
    let mut results = verify::run_all(a.seed, a.trials);
    if let Some(path) = &a.input {
        let mut r =
            verify::SuiteResult { name: "input metric validation", trials: 1, failures: 0, first_failure: None };
        if let Err(e) = load_space(path, a.format) {
            r.failures = 1;
            r.first_failure = Some(e.to_string());
        }
        results.push(r);
    }
    print!("{}", verify::format_table(&results));
    Ok(if results.iter().all(verify::SuiteResult::passed) { EXIT_OK } else { EXIT_PROPERTY })
}
