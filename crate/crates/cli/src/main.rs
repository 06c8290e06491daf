use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyvem::assembly::MethodParams;
use polyvem::benchmarks::{
    bimaterial_mesh, nested_quad_levels, rotation::inclusion_mesh, run_bimaterial_demo, run_convergence, run_cylinder_benchmark, run_rotation_study, BimaterialParams,
    CylinderMesh, CylinderRun, RotationParams,
};
use polyvem::geometry::Point;
use polyvem::io::{execute, write_json, write_outputs, write_vtk, Analysis, Manifest, MeshSource, RunConfig, VtkFields};
use polyvem::mesh::{merge_nonmatching_interface, read_mesh, write_mesh};
use polyvem::postprocess::{extract_line, line_csv, LineField};
use polyvem::{Result, VemError};

#[derive(Parser)]
#[command(name = "polyvem", version, about = "VEM and SFVEM solvers for 2D heat conduction and thermoelasticity")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh from a JSON mesh spec (file or inline) and write it as mesh JSON.
    MeshGen {
        spec: String,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write the mesh as a VTK file.
        #[arg(long)]
        vtk: Option<PathBuf>,
    },
    /// Couple two meshes along coincident tagged edge chains.
    Merge {
        mesh_a: PathBuf,
        mesh_b: PathBuf,
        #[arg(long)]
        tag_a: String,
        #[arg(long)]
        tag_b: String,
        /// Merge tolerance; defaults to 1e-9 times the larger mesh diameter.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Steady heat conduction.
    SolveThermal(SolveArgs),
    /// Temperature, then displacement under the resulting thermal strain.
    SolveCoupled(SolveArgs),
    /// Linear elasticity without thermal load.
    SolveElastic(SolveArgs),
    /// Scripted verification runs.
    #[command(subcommand)]
    Benchmark(Benchmark),
    /// Sample a solved field along a polyline into CSV.
    ExtractLine {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        field: LineQuantity,
        /// Polyline vertices as "x,y;x,y;…".
        #[arg(long)]
        points: String,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the one in the config.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Vem,
    Sfvem,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, value_enum, default_value = "sfvem")]
    method: MethodArg,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Uniform SFVEM order instead of the per-element minimum.
    #[arg(long)]
    order: Option<usize>,
}

impl MethodArgs {
    fn params(&self) -> MethodParams {
        match self.method {
            MethodArg::Vem => MethodParams::vem(self.tau),
            MethodArg::Sfvem => MethodParams::sfvem(self.order),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CylinderMeshKind {
    Quad,
    Polygonal,
}

#[derive(Subcommand)]
enum Benchmark {
    /// Thick-walled cylinder against its closed-form solution.
    Cylinder {
        #[arg(long, value_enum, default_value = "quad")]
        mesh: CylinderMeshKind,
        /// Target node count of the quad mesh.
        #[arg(long, default_value_t = 5073)]
        nodes: usize,
        /// Voronoi seeds of the polygonal mesh.
        #[arg(long, default_value_t = 2000)]
        seeds: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Slopes of the cylinder RMS errors over nested quad meshes.
    Convergence {
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Interface stress profiles with the inclusion mesh rotated.
    Rotation {
        /// Angles in degrees, comma separated.
        #[arg(long, default_value = "0,30,60,90", value_delimiter = ',')]
        angles: Vec<f64>,
        #[command(flatten)]
        method: MethodArgs,
        /// Directory for the report and one profile CSV per angle.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Si strip with a Cu channel: conservation check and interface profile.
    Bimaterial {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LineQuantity {
    Temperature,
    VonMises,
    SigmaXx,
    SigmaYy,
    SigmaXy,
}

fn load_config(path: &Path) -> Result<(RunConfig, PathBuf)> {
    let config = RunConfig::read(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((config, base))
}

/// Writes `value` to `out` with a `<stem>.manifest.json` next to it.
fn report(out: Option<&Path>, value: &impl serde::Serialize, mut manifest: Manifest) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            write_json(path, value)?;
            manifest.outputs = vec![path.file_name().unwrap_or_default().to_string_lossy().into_owned()];
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            write_json(path.with_file_name(format!("{stem}.manifest.json")), &manifest)?;
            log::info!("wrote {}", path.display());
        }
        // data goes to files; without one the report lands on standard error
        None => eprintln!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn parse_points(s: &str) -> Result<Vec<Point>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let v: Vec<f64> = p.split(',').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|e| {
                VemError::Config(format!("bad point '{p}': {e}"))
            })?;
            match v[..] {
                [x, y] => Ok([x, y]),
                _ => Err(VemError::Config(format!("point '{p}' needs two coordinates"))),
            }
        })
        .collect()
}

fn solve(args: &SolveArgs, analysis: Analysis) -> Result<()> {
    let (config, base) = load_config(&args.config)?;
    let out = args.out.clone().unwrap_or_else(|| base.join(&config.output_dir));
    let outcome = execute(&config, &base, analysis)?;
    for file in write_outputs(&outcome, &config, &out)? {
        log::info!("wrote {}", file.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::MeshGen { spec, out, vtk } => {
            let text = if spec.trim_start().starts_with('{') { spec } else { polyvem::error::read_text(&spec)? };
            let source: MeshSource = serde_json::from_str(&text).map_err(|e| VemError::Config(e.to_string()))?;
            let mesh = source.build(Path::new("."))?;
            write_mesh(&out, &mesh)?;
            if let Some(path) = vtk {
                write_vtk(path, &mesh, &VtkFields::default())?;
            }
            log::info!("{} nodes, {} elements", mesh.num_nodes(), mesh.num_elements());
        }
        Command::Merge { mesh_a, mesh_b, tag_a, tag_b, tol, out } => {
            let a = read_mesh(&mesh_a)?;
            let b = read_mesh(&mesh_b)?;
            let tol = tol.unwrap_or_else(|| a.default_merge_tol().max(b.default_merge_tol()));
            let merged = merge_nonmatching_interface(&a, &b, &tag_a, &tag_b, tol)?;
            write_mesh(&out, &merged)?;
            log::info!("{} nodes, {} elements", merged.num_nodes(), merged.num_elements());
        }
        Command::SolveThermal(args) => solve(&args, Analysis::Thermal)?,
        Command::SolveCoupled(args) => solve(&args, Analysis::Coupled)?,
        Command::SolveElastic(args) => solve(&args, Analysis::Elastic)?,
        Command::Benchmark(b) => benchmark(b)?,
        Command::ExtractLine { config, field, points, samples, out } => {
            let (cfg, base) = load_config(&config)?;
            let analysis = match field {
                LineQuantity::Temperature => Analysis::Thermal,
                _ if cfg.thermal_bcs.is_empty() => Analysis::Elastic,
                _ => Analysis::Coupled,
            };
            let outcome = execute(&cfg, &base, analysis)?;
            let polyline = parse_points(&points)?;
            let samples = match (field, &outcome.temperature, &outcome.stress) {
                (LineQuantity::Temperature, Some(t), _) => {
                    let lf = LineField {
                        element_value: Box::new(|e, p| t.elements[e].value_at(p).unwrap_or(f64::NAN)),
                        nodal_averaged: None,
                    };
                    extract_line(&outcome.mesh, &lf, &polyline, samples)?
                }
                (_, _, Some(s)) => {
                    let (element, nodal): (Vec<f64>, Vec<f64>) = match field {
                        LineQuantity::VonMises => (s.von_mises_elements(), s.von_mises_nodes(&cfg.materials)),
                        _ => {
                            let k = match field {
                                LineQuantity::SigmaXx => 0,
                                LineQuantity::SigmaYy => 1,
                                _ => 2,
                            };
                            (s.per_element.iter().map(|x| x[k]).collect(), s.per_node_averaged.iter().map(|x| x[k]).collect())
                        }
                    };
                    let lf = LineField { element_value: Box::new(|e, _| element[e]), nodal_averaged: Some(&nodal) };
                    extract_line(&outcome.mesh, &lf, &polyline, samples)?
                }
                _ => return Err(VemError::Config("the requested field was not computed".into())),
            };
            std::fs::write(&out, line_csv(&samples))?;
        }
    }
    Ok(())
}

fn benchmark(b: Benchmark) -> Result<()> {
    match b {
        Benchmark::Cylinder { mesh, nodes, seeds, seed, method, out } => {
            let mesh = match mesh {
                CylinderMeshKind::Quad => CylinderMesh::quad_with_nodes(nodes),
                CylinderMeshKind::Polygonal => CylinderMesh::Polygonal { seeds, lloyd: 10, seed },
            };
            let run = CylinderRun::new(mesh, method.params());
            let hash = run.mesh.build(&run.params)?.content_hash();
            let r = run_cylinder_benchmark(&run)?;
            log::info!("E_AV r {:.4}%, theta {:.4}% on {} nodes", r.eav_r, r.eav_theta, r.nodes);
            report(out.as_deref(), &r, Manifest::new("benchmark cylinder", None, hash, Some(r.method)))?;
        }
        Benchmark::Convergence { levels, method, out } => {
            let meshes = nested_quad_levels((7, 11), levels);
            let r = run_convergence(&method.params(), &meshes)?;
            log::info!("slopes: temperature {:.3}, stress {:.3}", r.temperature_slope, r.stress_slope);
            // the finest level identifies the series
            let finest = meshes.last().map(|m| m.build(&Default::default())).transpose()?;
            let hash = finest.map(|m| m.content_hash()).unwrap_or_default();
            report(out.as_deref(), &r, Manifest::new("benchmark convergence", None, hash, Some(r.method)))?;
        }
        Benchmark::Rotation { angles, method, out } => {
            let p = RotationParams::default();
            let params = method.params();
            let r = run_rotation_study(&p, &params, &angles)?;
            log::info!("max pairwise deviation {:.4}", r.max_deviation);
            let manifest = Manifest::new("benchmark rotation", None, inclusion_mesh(&p)?.content_hash(), Some(params.method));
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    for prof in &r.profiles {
                        std::fs::write(dir.join(format!("profile_{}.csv", prof.angle_degrees)), line_csv(&prof.von_mises))?;
                    }
                    report(Some(&dir.join("rotation.json")), &r, manifest)?;
                }
                None => report(None, &r, manifest)?,
            }
        }
        Benchmark::Bimaterial { method, out } => {
            let p = BimaterialParams::default();
            let r = run_bimaterial_demo(&p, &method.params())?;
            log::info!("heat imbalance {:.3e}", r.heat_imbalance);
            let manifest = Manifest::new("benchmark bimaterial", None, bimaterial_mesh(&p)?.content_hash(), Some(r.method));
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("interface_profile.csv"), line_csv(&r.interface_profile))?;
                    report(Some(&dir.join("bimaterial.json")), &r, manifest)?;
                }
                None => report(None, &r, manifest)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            eprint!("{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).target(env_logger::Target::Stderr).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
