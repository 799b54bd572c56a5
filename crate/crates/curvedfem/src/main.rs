use clap::{Parser, Subcommand, ValueEnum};
use curvedfem::analysis::{convergence_study, geometric_errors, interpolation_bound_check};
use curvedfem::geometry::{Mat2, Point2};
use curvedfem::mesh::{disk_mesh, GeoVariant};
use std::io::Write;

#[derive(Parser)]
#[command(
    name = "curvedfem",
    about = "P1 finite elements with exactly curved boundary elements on the unit disk",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeoArg {
    #[value(name = "1")]
    Order1,
    #[value(name = "2")]
    Order2,
    #[value(name = "3")]
    Order3,
    #[value(name = "exact")]
    Exact,
}

impl GeoArg {
    fn variant(self) -> GeoVariant {
        match self {
            GeoArg::Order1 => GeoVariant::Order1,
            GeoArg::Order2 => GeoVariant::Order2,
            GeoArg::Order3 => GeoVariant::Order3,
            GeoArg::Exact => GeoVariant::ExactArc,
        }
    }

    fn label(self) -> &'static str {
        match self {
            GeoArg::Order1 => "1",
            GeoArg::Order2 => "2",
            GeoArg::Order3 => "3",
            GeoArg::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the disk Poisson problem over a range of levels and report
    /// errors and convergence rates.
    Convergence {
        #[arg(long, value_enum, default_value = "exact")]
        geo: GeoArg,
        /// Finest refinement level (0..=6).
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=8))]
        quad_degree: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Write the table to this file instead of stdout.
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Report the geometric errors (area and boundary) per level.
    Geom {
        #[arg(long, value_enum, default_value = "1")]
        geo: GeoArg,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Check the anisotropic interpolation estimates for v = sin(x1) cos(x2).
    Boundcheck {
        #[arg(long, value_enum, default_value = "exact")]
        geo: GeoArg,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=8))]
        quad_degree: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Print mesh statistics and regularity measures for one level.
    Meshinfo {
        #[arg(long, value_enum, default_value = "exact")]
        geo: GeoArg,
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
}

/// A small table: fixed header plus string rows, rendered as CSV or markdown.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.header.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            Format::Markdown => {
                out.push_str(&format!("| {} |\n", self.header.join(" | ")));
                out.push_str(&format!(
                    "|{}\n",
                    self.header.iter().map(|_| " --- |").collect::<String>()
                ));
                for row in &self.rows {
                    out.push_str(&format!("| {} |\n", row.join(" | ")));
                }
            }
        }
        out
    }
}

fn fmt_rate(r: Option<f64>) -> String {
    match r {
        Some(v) => format!("{v:.2}"),
        None => "--".to_string(),
    }
}

fn check_levels(levels: u32) -> Result<(), String> {
    if levels > 6 {
        return Err(format!(
            "--levels {levels} exceeds the supported maximum of 6"
        ));
    }
    Ok(())
}

fn emit(table: &Table, format: Format, output: &Option<std::path::PathBuf>) -> Result<(), String> {
    let text = table.render(format);
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("writing {path:?}: {e}")),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Convergence {
            geo,
            levels,
            quad_degree,
            format,
            output,
        } => {
            check_levels(levels)?;
            let rows =
                convergence_study(geo.variant(), levels, quad_degree).map_err(|e| e.to_string())?;
            let table = Table {
                header: vec![
                    "geo_order",
                    "level",
                    "h",
                    "E_area",
                    "E_bdry",
                    "E_H1",
                    "rate_H1",
                    "E_L2",
                    "rate_L2",
                ],
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            geo.label().to_string(),
                            r.level.to_string(),
                            format!("{:.3e}", r.h),
                            format!("{:.3e}", r.e_area),
                            format!("{:.3e}", r.e_bdry),
                            format!("{:.3e}", r.e_h1),
                            fmt_rate(r.rate_h1),
                            format!("{:.3e}", r.e_l2),
                            fmt_rate(r.rate_l2),
                        ]
                    })
                    .collect(),
            };
            emit(&table, format, &output)
        }
        Command::Geom {
            geo,
            levels,
            format,
            output,
        } => {
            check_levels(levels)?;
            let mut rows = Vec::new();
            for level in 0..=levels {
                let tri = disk_mesh(level, geo.variant()).map_err(|e| e.to_string())?;
                let ge = geometric_errors(&tri, 64).map_err(|e| e.to_string())?;
                rows.push(vec![
                    geo.label().to_string(),
                    level.to_string(),
                    format!("{:.3e}", tri.h),
                    format!("{:.3e}", ge.e_area),
                    format!("{:.3e}", ge.e_bdry),
                ]);
            }
            let table = Table {
                header: vec!["geo_order", "level", "h", "E_area", "E_bdry"],
                rows,
            };
            emit(&table, format, &output)
        }
        Command::Boundcheck {
            geo,
            levels,
            quad_degree,
            format,
            output,
        } => {
            check_levels(levels)?;
            let v = |p: Point2| p.x.sin() * p.y.cos();
            let grad = |p: Point2| Point2::new(p.x.cos() * p.y.cos(), -p.x.sin() * p.y.sin());
            let hess = |p: Point2| {
                Mat2::new(
                    -p.x.sin() * p.y.cos(),
                    -p.x.cos() * p.y.sin(),
                    -p.x.cos() * p.y.sin(),
                    -p.x.sin() * p.y.cos(),
                )
            };
            let mut rows = Vec::new();
            for level in 0..=levels {
                let tri = disk_mesh(level, geo.variant()).map_err(|e| e.to_string())?;
                let rep = interpolation_bound_check(&tri, &v, &grad, &hess, quad_degree)
                    .map_err(|e| e.to_string())?;
                rows.push(vec![
                    geo.label().to_string(),
                    level.to_string(),
                    format!("{:.3e}", tri.h),
                    format!("{:.3e}", rep.max_ratio_l2),
                    format!("{:.3e}", rep.max_ratio_h1),
                ]);
            }
            let table = Table {
                header: vec!["geo_order", "level", "h", "ratio_L2", "ratio_H1"],
                rows,
            };
            emit(&table, format, &output)
        }
        Command::Meshinfo {
            geo,
            level,
            format,
            output,
        } => {
            check_levels(level)?;
            let tri = disk_mesh(level, geo.variant()).map_err(|e| e.to_string())?;
            let rep = tri.validate().map_err(|e| e.to_string())?;
            let table = Table {
                header: vec![
                    "geo_order",
                    "level",
                    "elements",
                    "vertices",
                    "boundary_edges",
                    "h",
                    "gamma",
                    "C_psi1",
                    "C_psi2",
                ],
                rows: vec![vec![
                    geo.label().to_string(),
                    level.to_string(),
                    tri.elements.len().to_string(),
                    tri.vertices.len().to_string(),
                    tri.boundary_edges.len().to_string(),
                    format!("{:.3e}", tri.h),
                    format!("{:.3e}", rep.gamma),
                    format!("{:.3e}", rep.cpsi1),
                    format!("{:.3e}", rep.cpsi2),
                ]],
            };
            emit(&table, format, &output)
        }
    }
}

fn main() {
    if let Ok(threads) = std::env::var("CURVEDFEM_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("warning: ignoring invalid CURVEDFEM_THREADS={threads:?}");
            }
        }
    }
    let cli = Cli::parse();
    if let Err(msg) = run(cli) {
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
}
