//! `normpair` command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure (including degenerate
//! inputs), 2 malformed input, 3 theorem-consistency violation.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use normpair::accounting::{accounting_report, accounting_report_unchecked, AccountingReport};
use normpair::generators::{self, TorusParams};
use normpair::geodesic::{self, format_rational, PointSet, RationalVec3};
use normpair::width::{analyze, component_widths, width};
use normpair::{build_overlay, Overlay, PairInput, SCHEMA_VERSION};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "normpair",
    version,
    about = "Normal pairs of embedded graphs and 4-prismatoid widths"
)]
struct Cli {
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for arc intersections and loop searches.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check normality and strong normality of a pair.
    Validate { pair: PathBuf },
    /// Width of a pair with a shortest-path certificate.
    Width { pair: PathBuf },
    /// Surface, width, degree-3 criterion, well-formed loops and their contractibility.
    Analyze {
        pair: PathBuf,
        /// Skip contraction of crossing-free edges.
        #[arg(long)]
        raw: bool,
    },
    /// Euler characteristic accounting over the faces of the refinement.
    Account {
        pair: PathBuf,
        /// Connected component of the refinement to account for.
        #[arg(long)]
        component: Option<usize>,
        /// Skip contraction of crossing-free edges.
        #[arg(long)]
        raw: bool,
        /// Run even if the pair is not strongly normal.
        #[arg(long)]
        unchecked: bool,
    },
    /// Width of the 4-prismatoid with the given bases.
    Prismatoid {
        #[arg(long, requires = "minus", conflicts_with = "prismatoid")]
        plus: Option<PathBuf>,
        #[arg(long, requires = "plus")]
        minus: Option<PathBuf>,
        /// Prismatoid vertices in ℝ⁴ with the bases in two hyperplanes x₄ = const.
        #[arg(long)]
        prismatoid: Option<PathBuf>,
        /// On a degenerate pair, retry with the negative base rotated by a
        /// random rational rotation drawn from this seed.
        #[arg(long)]
        perturb: Option<u64>,
    },
    /// Emit generated inputs.
    Generate {
        #[command(subcommand)]
        what: Generate,
    },
    /// Vertices of the 4-prismatoid conv(Q⁺ × {0} ∪ Q⁻ × {1}).
    Lift {
        #[arg(long)]
        plus: PathBuf,
        #[arg(long)]
        minus: PathBuf,
    },
    /// Render the common refinement.
    Export {
        pair: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum Generate {
    /// Torus family of single-vertex loops.
    Torus {
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long)]
        offset: Option<usize>,
    },
    /// A bundled fixture.
    Fixture {
        #[arg(long)]
        name: String,
    },
    /// Random rational points on the unit sphere.
    Polytope {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

/// Failure with an exit code.
struct Failure {
    code: u8,
    message: String,
}

fn malformed(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

/// Report text plus the exit code it implies.
struct Output {
    text: String,
    code: u8,
}

fn envelope(command: &str, body: impl Serialize) -> Result<String, Failure> {
    let mut value = serde_json::to_value(body).map_err(malformed)?;
    let mut out = serde_json::Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    out.insert("command".into(), json!(command));
    match &mut value {
        Value::Object(map) => out.append(map),
        _ => {
            out.insert("result".into(), value);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(out)).map_err(malformed)?;
    text.push('\n');
    Ok(text)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| malformed(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
    }
}

fn read_pair(path: &Path) -> Result<PairInput, Failure> {
    let text = read_text(path)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| malformed(format!("{}: {e}", path.display())))?;
    if value
        .get("contacts")
        .and_then(Value::as_array)
        .is_some_and(|c| !c.is_empty())
    {
        return Err(Failure {
            code: 1,
            message: "degenerate: width ≤ 1 (the graphs touch at a vertex; the pair width is 0 or 1 and is not decided)"
                .into(),
        });
    }
    serde_json::from_value(value).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn read_points(path: &Path) -> Result<Vec<RationalVec3>, Failure> {
    let text = read_text(path)?;
    let set: PointSet =
        serde_json::from_str(&text).map_err(|e| malformed(format!("{}: {e}", path.display())))?;
    Ok(set.vertices)
}

fn overlay(pair: &PairInput) -> Result<Overlay, Failure> {
    build_overlay(pair).map_err(malformed)
}

fn cmd_validate(path: &Path) -> Result<Output, Failure> {
    let pair = read_pair(path)?;
    let ov = overlay(&pair)?;
    let normal = ov.validate_normal();
    let strong = ov.validate_strongly_normal();
    let h = ov.h();
    let code = if normal.ok { 0 } else { 1 };
    let text = envelope(
        "validate",
        json!({
            "normal": normal,
            "strongly_normal": strong,
            "surface": normpair::width::surface_name(&ov),
            "chi": h.euler_characteristic(),
            "vertices": h.vertex_count(),
            "edges": h.edge_count(),
            "faces": h.face_count(),
            "crossings": ov.crossing_count(),
        }),
    )?;
    Ok(Output { text, code })
}

fn cmd_width(path: &Path) -> Result<Output, Failure> {
    let ov = overlay(&read_pair(path)?)?;
    let w = width(&ov);
    let text = envelope(
        "width",
        json!({
            "width": w.value,
            "path": w.path,
            "edges": w.edges,
            "component": w.component,
            "component_widths": component_widths(&ov),
        }),
    )?;
    Ok(Output { text, code: 0 })
}

fn prepared(path: &Path, raw: bool) -> Result<Overlay, Failure> {
    let pair = read_pair(path)?;
    let pair = if raw { pair } else { pair.preprocess() };
    overlay(&pair)
}

fn cmd_analyze(path: &Path, raw: bool, jobs: usize) -> Result<Output, Failure> {
    let ov = prepared(path, raw)?;
    let report = analyze(&ov, jobs).map_err(malformed)?;
    let code = if report.violations.is_empty() { 0 } else { 3 };
    Ok(Output {
        text: envelope("analyze", &report)?,
        code,
    })
}

/// Accounting checks that must hold for the report's surface.
fn accounting_violations(ov: &Overlay, r: &AccountingReport) -> Vec<String> {
    let mut v = Vec::new();
    if !r.identity_holds {
        v.push(format!("identity residual {}", r.identity_residual));
    }
    if !r.face_bound_holds {
        v.push("per-face bound fails".into());
    }
    if !r.x_even {
        v.push("odd number of crossing corners on a face".into());
    }
    let sphere =
        ov.h().component_count() == 1 && ov.h().classify_surface().is_ok_and(|s| s.is_sphere());
    if sphere && r.strongly_normal && !r.irregular {
        if !r.counts_twice.holds {
            v.push(format!(
                "signed vertices counting fewer than twice: {:?}",
                r.counts_twice.failing
            ));
        }
        if !r.inequality_holds {
            v.push(format!(
                "chi exceeds the sum of d(F) by {}",
                r.inequality_slack
            ));
        }
        if !r.nonpositive_faces.holds {
            v.push(format!(
                "faces with d(F) > 0 at width {}: {:?}",
                r.width, r.nonpositive_faces.positive_faces
            ));
        }
    }
    v
}

fn cmd_account(
    path: &Path,
    component: Option<usize>,
    raw: bool,
    unchecked: bool,
) -> Result<Output, Failure> {
    let ov = prepared(path, raw)?;
    let result = if unchecked {
        accounting_report_unchecked(&ov, component)
    } else {
        accounting_report(&ov, component)
    };
    let report = result.map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    let violations = accounting_violations(&ov, &report);
    let code = if violations.is_empty() { 0 } else { 3 };
    let mut body = serde_json::to_value(&report).map_err(malformed)?;
    body["violations"] = json!(violations);
    Ok(Output {
        text: envelope("account", body)?,
        code,
    })
}

fn split_prismatoid(path: &Path) -> Result<(Vec<RationalVec3>, Vec<RationalVec3>), Failure> {
    let text = read_text(path)?;
    let raw: Value = serde_json::from_str(&text).map_err(malformed)?;
    let rows = raw
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing \"vertices\""))?;
    let mut pts = Vec::with_capacity(rows.len());
    for row in rows {
        let coords = row
            .as_array()
            .filter(|r| r.len() == 4)
            .ok_or_else(|| malformed("vertices must have 4 coordinates"))?;
        let mut q = Vec::with_capacity(4);
        for c in coords {
            let s = match c {
                Value::String(s) => s.clone(),
                Value::Number(n) if n.is_i64() => n.to_string(),
                _ => return Err(malformed(format!("bad coordinate {c}"))),
            };
            q.push(geodesic::parse_rational(&s).map_err(malformed)?);
        }
        pts.push(q);
    }
    let lo = pts
        .iter()
        .map(|p| p[3].clone())
        .min()
        .ok_or_else(|| malformed("no vertices"))?;
    let hi = pts.iter().map(|p| p[3].clone()).max().unwrap();
    if lo == hi {
        return Err(malformed("all vertices lie in one hyperplane x4 = const"));
    }
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    for p in pts {
        let v = RationalVec3([p[0].clone(), p[1].clone(), p[2].clone()]);
        if p[3] == lo {
            plus.push(v);
        } else if p[3] == hi {
            minus.push(v);
        } else {
            return Err(malformed(format!(
                "vertex with x4 = {} is on neither base",
                format_rational(&p[3])
            )));
        }
    }
    Ok((plus, minus))
}

fn cmd_prismatoid(
    plus: Option<PathBuf>,
    minus: Option<PathBuf>,
    prismatoid: Option<PathBuf>,
    perturb: Option<u64>,
    jobs: usize,
) -> Result<Output, Failure> {
    let (qp, mut qm) = match (plus, minus, prismatoid) {
        (Some(p), Some(m), None) => (read_points(&p)?, read_points(&m)?),
        (None, None, Some(q)) => split_prismatoid(&q)?,
        _ => return Err(malformed("give either --plus and --minus, or --prismatoid")),
    };
    let mut result = geodesic::prismatoid_width(&qp, &qm, jobs).map_err(malformed)?;
    let mut perturbed = None;
    if let Some(seed) = perturb {
        let mut s = seed;
        while result.degenerate.is_some() && s < seed + 64 {
            qm = geodesic::rotate(&qm, &generators::random_rotation(s));
            result = geodesic::prismatoid_width(&qp, &qm, jobs).map_err(malformed)?;
            perturbed = Some(s);
            s += 1;
        }
    }
    let code = if result.bound_holds { 0 } else { 3 };
    let mut body = serde_json::to_value(&result).map_err(malformed)?;
    if let Some(s) = perturbed {
        body["perturbed_with_seed"] = json!(s);
    }
    Ok(Output {
        text: envelope("prismatoid", body)?,
        code,
    })
}

fn cmd_generate(what: Generate) -> Result<Output, Failure> {
    let text = match what {
        Generate::Torus { m, offset } => {
            let mut params = TorusParams::new(m);
            if let Some(o) = offset {
                params.offset = o;
            }
            let pair = generators::torus_family(params).map_err(malformed)?;
            serde_json::to_string_pretty(&pair).map_err(malformed)?
        }
        Generate::Fixture { name } => {
            let pair = generators::fixture(&name).map_err(malformed)?;
            serde_json::to_string_pretty(&pair).map_err(malformed)?
        }
        Generate::Polytope { n, seed } => {
            let vertices = generators::random_polytope(n, seed).map_err(malformed)?;
            serde_json::to_string_pretty(&PointSet { vertices }).map_err(malformed)?
        }
    };
    Ok(Output {
        text: text + "\n",
        code: 0,
    })
}

fn cmd_lift(plus: &Path, minus: &Path) -> Result<Output, Failure> {
    let lifted = geodesic::lift(&read_points(plus)?, &read_points(minus)?);
    let vertices: Vec<Vec<String>> = lifted
        .iter()
        .map(|p| p.iter().map(format_rational).collect())
        .collect();
    let text = serde_json::to_string_pretty(&json!({ "vertices": vertices })).map_err(malformed)?;
    Ok(Output {
        text: text + "\n",
        code: 0,
    })
}

fn cmd_export(path: &Path, format: Format) -> Result<Output, Failure> {
    let ov = overlay(&read_pair(path)?)?;
    let text = match format {
        Format::Dot => ov.to_dot(),
        Format::Json => envelope("export", ov.to_json())?,
    };
    Ok(Output { text, code: 0 })
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let jobs = cli.jobs.max(1);
    match cli.command {
        Command::Validate { pair } => cmd_validate(&pair),
        Command::Width { pair } => cmd_width(&pair),
        Command::Analyze { pair, raw } => cmd_analyze(&pair, raw, jobs),
        Command::Account {
            pair,
            component,
            raw,
            unchecked,
        } => cmd_account(&pair, component, raw, unchecked),
        Command::Prismatoid {
            plus,
            minus,
            prismatoid,
            perturb,
        } => cmd_prismatoid(plus, minus, prismatoid, perturb, jobs),
        Command::Generate { what } => cmd_generate(what),
        Command::Lift { plus, minus } => cmd_lift(&plus, &minus),
        Command::Export { pair, format } => cmd_export(&pair, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli) {
        Ok(output) => {
            let written = match &out {
                Some(path) => fs::write(path, &output.text),
                None => io::stdout().write_all(output.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(output.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
