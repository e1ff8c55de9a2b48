use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use pinch_core::curves::{parse_curves, NormalMulticurve};
use pinch_core::fixtures;
use pinch_core::flip::{apply_path, random_relation_word, verify_relation, FlipPath, RelationKind};
use pinch_core::pinch::{pinch, pinched_action, theta, PinchResult};
use pinch_core::shear::{
    compose_path_map, mapping_class_map, parse_mapping_class, parse_shear, rational_to_f64,
    serialize_shear, MappingClass, ShearPoint,
};
use pinch_core::trace::{
    length, parse_family, run_degeneration, trace, trace_exact, trace_f64, DegenerationFamily,
};
use pinch_core::IdealTriangulation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FORMATS: &str = "\
File formats:
  .tri  `triangles <N>`, `glue <t>.<s> <t'>.<s'>`, optional `edge <name> <t>.<s>`,
        optional `disconnected`; `#` starts a comment
  .path `flip <edge>` per line
  .crv  `curve <name>` then `w <edge>=<int>` lines
  .shv  `<edge>=<p>/<q>` or decimal per line; flags `cusped` and `roots`
  .mcg  `flip <edge>` lines, then `map <end-edge>=<base-edge>` or
        `triangle <i> <j> <rotation>` lines
  .fam  `gamma <edge>=<int> ...`, `edge <name> coeff <p>/<q> power <k>`,
        `target <edge>=<p>/<q>`, `grid default|<a>:<b>|list <t>,...`, `flip <edge>`

Arguments naming a curve, point or mapping class accept a file path, a
fixture name (with --fixture), or an inline value such as `x=3,y=5,z=7`.

Exit status: 0 on success, 1 when validation fails, 2 on usage errors.";

#[derive(Parser)]
#[command(name = "pinch", version, about = "Ideal triangulations, pinching and shear coordinates", after_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Surface {
    /// triangulation file
    #[arg(long, conflicts_with = "fixture")]
    tri: Option<PathBuf>,
    /// built-in surface: torus1, sphere3, sphere4, torus2
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a triangulation and print its invariants
    Validate(Surface),
    /// Apply a flip path and print the resulting triangulation
    FlipPath {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        path: PathBuf,
    },
    /// Check random relation words on a triangulation
    RelationsCheck {
        #[command(flatten)]
        surface: Surface,
        /// bigon, square, pentagon or all
        #[arg(long, default_value = "all")]
        kind: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Validate a multicurve and list its components
    CurveValidate {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        curve: String,
    },
    /// Print the turn itinerary of each component
    CurveTurns {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        curve: String,
    },
    /// Pinch a multicurve: induced triangulation and k-matrix
    Pinch {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        curve: String,
    },
    /// Evaluate the monomial map onto the pinched triangulation
    Theta {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        curve: String,
        #[arg(long)]
        point: String,
    },
    /// Transport shear coordinates along a flip path
    ChangeCoords {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        point: String,
    },
    /// Apply a mapping class to shear coordinates
    Act {
        #[command(flatten)]
        surface: Surface,
        /// mapping class file, or `twist` on torus1
        #[arg(long)]
        mcg: String,
        #[arg(long)]
        point: String,
    },
    /// Apply the induced action of a mapping class on the pinched stratum
    ActPinched {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        mcg: String,
        #[arg(long)]
        curve: String,
        /// point on the pinched triangulation
        #[arg(long)]
        point: String,
    },
    /// Trace of a simple closed curve
    Trace {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        curve: String,
        #[arg(long)]
        point: String,
    },
    /// Hyperbolic length of a simple closed curve
    Length {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        curve: String,
        #[arg(long)]
        point: String,
    },
    /// Run a degenerating family over its grid and write a CSV report
    Degenerate {
        #[command(flatten)]
        surface: Surface,
        /// family file, or a fixture family name with --fixture
        #[arg(long)]
        family: String,
        /// test curves, comma separated
        #[arg(long, value_delimiter = ',')]
        curves: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List or show the built-in fixtures
    Fixtures {
        #[arg(long)]
        list: bool,
        /// print a fixture's triangulation and curves
        #[arg(long)]
        show: Option<String>,
    },
}

/// Misuse of the command line rather than invalid data.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

/// Validation failures reported after the output has been printed.
#[derive(Debug)]
struct Failed;

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("check failed")
    }
}

impl std::error::Error for Failed {}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

struct Loaded {
    t: IdealTriangulation,
    fixture: Option<fixtures::Surface>,
}

fn load(s: &Surface) -> anyhow::Result<Loaded> {
    match (&s.tri, &s.fixture) {
        (Some(path), None) => {
            let t = IdealTriangulation::parse(&read(path)?)
                .with_context(|| path.display().to_string())?;
            Ok(Loaded { t, fixture: None })
        }
        (None, Some(name)) => {
            let surf = fixtures::surface(name)
                .ok_or_else(|| usage(format!("unknown fixture `{name}`")))?;
            Ok(Loaded {
                t: surf.triangulation.clone(),
                fixture: Some(surf),
            })
        }
        _ => Err(usage("give exactly one of --tri and --fixture")),
    }
}

/// Inline `a=1,b=2` values become one assignment per line.
fn inline(spec: &str) -> String {
    spec.split(',').map(|s| format!("{}\n", s.trim())).collect()
}

fn load_curve(l: &Loaded, spec: &str) -> anyhow::Result<NormalMulticurve> {
    let path = Path::new(spec);
    if path.is_file() {
        let curves = parse_curves(&l.t, &read(path)?).with_context(|| spec.to_string())?;
        let first = curves
            .into_iter()
            .next()
            .ok_or_else(|| usage(format!("{spec}: no curve")))?;
        return NormalMulticurve::new(&l.t, &first.weights).with_context(|| spec.to_string());
    }
    if let Some(c) = l.fixture.as_ref().and_then(|f| f.curve(spec)) {
        return Ok(c.clone());
    }
    if spec.contains('=') {
        let mut weights = vec![0; l.t.num_edges()];
        for item in spec.split(',') {
            let (e, v) = item
                .split_once('=')
                .ok_or_else(|| usage(format!("expected `<edge>=<int>`, got `{item}`")))?;
            let e = l.t.edge_by_name(e.trim())?;
            weights[e.0] = v
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad weight `{item}`")))?;
        }
        return Ok(NormalMulticurve::new(&l.t, &weights)?);
    }
    Err(usage(format!(
        "`{spec}` is neither a curve file, a fixture curve nor inline weights"
    )))
}

fn load_point(t: &IdealTriangulation, spec: &str) -> anyhow::Result<ShearPoint> {
    let path = Path::new(spec);
    let text = if path.is_file() {
        read(path)?
    } else if spec.contains('=') {
        inline(spec)
    } else {
        return Err(usage(format!(
            "`{spec}` is neither a point file nor inline values"
        )));
    };
    parse_shear(t, &text).with_context(|| spec.to_string())
}

fn load_mcg(l: &Loaded, spec: &str) -> anyhow::Result<MappingClass> {
    if spec == "twist" {
        let is_torus = l.fixture.as_ref().is_some_and(|f| f.name == "torus1");
        return if is_torus {
            Ok(fixtures::torus_twist())
        } else {
            Err(usage("`twist` needs --fixture torus1"))
        };
    }
    parse_mapping_class(&l.t, &read(Path::new(spec))?).with_context(|| spec.to_string())
}

fn load_path(t: &IdealTriangulation, path: &Path) -> anyhow::Result<FlipPath> {
    FlipPath::parse(t.clone(), &read(path)?).with_context(|| path.display().to_string())
}

fn describe(t: &IdealTriangulation) -> String {
    format!(
        "triangles {}\nedges {}\npunctures {}\ncomponents {}\neuler {}\ngenus {}\n",
        t.num_triangles(),
        t.num_edges(),
        t.num_punctures(),
        t.num_components(),
        t.euler_characteristic(),
        t.genus()
    )
}

fn weights_line(t: &IdealTriangulation, w: &[u64]) -> String {
    t.edge_ids()
        .filter(|e| w[e.0] > 0)
        .map(|e| format!("{}={}", t.name(e), w[e.0]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn pinch_output(p: &PinchResult) -> String {
    format!("{}\n{}", p.induced.serialize(), p.k_table())
}

fn run(cli: Cli) -> anyhow::Result<String> {
    let mut out = String::new();
    match cli.command {
        Command::Validate(s) => out = describe(&load(&s)?.t),
        Command::FlipPath { surface, path } => {
            let l = load(&surface)?;
            let p = load_path(&l.t, &path)?;
            out = apply_path(&p)?.end.serialize();
        }
        Command::RelationsCheck {
            surface,
            kind,
            count,
            points,
            seed,
        } => {
            let l = load(&surface)?;
            let kinds: Vec<RelationKind> = if kind == "all" {
                RelationKind::all().to_vec()
            } else {
                vec![kind
                    .parse()
                    .map_err(|_| usage(format!("unknown relation `{kind}`")))?]
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ok = true;
            for kind in kinds {
                let (mut held, mut tried) = (0, 0);
                for _ in 0..count {
                    let Some(word) = random_relation_word(&l.t, kind, &mut rng) else {
                        break;
                    };
                    tried += 1;
                    held += usize::from(verify_relation(&word, kind, points, &mut rng)?.holds());
                }
                if tried == 0 {
                    writeln!(out, "{}\tn/a", kind.name())?;
                } else {
                    writeln!(out, "{}\t{held}/{tried}", kind.name())?;
                    ok &= held == tried;
                }
            }
            if !ok {
                print!("{out}");
                return Err(anyhow::Error::new(Failed));
            }
        }
        Command::CurveValidate { surface, curve } => {
            let l = load(&surface)?;
            let c = load_curve(&l, &curve)?;
            writeln!(out, "components {}", c.num_components())?;
            for (i, comp) in c.components().iter().enumerate() {
                writeln!(out, "{i}\t{}", weights_line(&l.t, &comp.weights))?;
            }
        }
        Command::CurveTurns { surface, curve } => {
            let l = load(&surface)?;
            let c = load_curve(&l, &curve)?;
            for (i, it) in c.itineraries().iter().enumerate() {
                let edges: Vec<&str> = it.steps.iter().map(|s| l.t.name(s.edge)).collect();
                writeln!(out, "{i}\t{}\t{}", it.turns(), edges.join(" "))?;
            }
        }
        Command::Pinch { surface, curve } => {
            let l = load(&surface)?;
            out = pinch_output(&pinch(&l.t, &load_curve(&l, &curve)?)?);
        }
        Command::Theta {
            surface,
            curve,
            point,
        } => {
            let l = load(&surface)?;
            let p = pinch(&l.t, &load_curve(&l, &curve)?)?;
            let x = load_point(&l.t, &point)?.x;
            out = serialize_shear(&p.induced, &theta(&p, &x)?);
        }
        Command::ChangeCoords {
            surface,
            path,
            point,
        } => {
            let l = load(&surface)?;
            let p = load_path(&l.t, &path)?;
            let x = load_point(&l.t, &point)?.x;
            out = serialize_shear(&apply_path(&p)?.end, &compose_path_map(&p, &x)?);
        }
        Command::Act {
            surface,
            mcg,
            point,
        } => {
            let l = load(&surface)?;
            let f = load_mcg(&l, &mcg)?;
            let x = load_point(&l.t, &point)?.x;
            out = serialize_shear(&l.t, &mapping_class_map(&f, &x)?);
        }
        Command::ActPinched {
            surface,
            mcg,
            curve,
            point,
        } => {
            let l = load(&surface)?;
            let f = load_mcg(&l, &mcg)?;
            let p = pinch(&l.t, &load_curve(&l, &curve)?)?;
            let action = pinched_action(&f, &p)?;
            let y = load_point(&p.induced, &point)?.x;
            out = serialize_shear(&action.target.induced, &action.map.apply(&y));
        }
        Command::Trace {
            surface,
            curve,
            point,
        } => {
            let l = load(&surface)?;
            let c = load_curve(&l, &curve)?;
            let pt = load_point(&l.t, &point)?;
            let exact = match &pt.roots {
                Some(r) => Some(trace_exact(r, &c)?),
                None => trace(&l.t, &pt.x, &c).ok(),
            };
            match exact {
                Some(tr) => {
                    writeln!(out, "trace {tr}")?;
                    writeln!(out, "approx {:.15e}", rational_to_f64(&tr))?;
                }
                None => writeln!(out, "approx {:.15e}", trace_f64(&pt.x.to_f64(), &c)?)?,
            }
        }
        Command::Length {
            surface,
            curve,
            point,
        } => {
            let l = load(&surface)?;
            let c = load_curve(&l, &curve)?;
            let pt = load_point(&l.t, &point)?;
            writeln!(out, "length {:.15e}", length(&pt.x.to_f64(), &c)?)?;
        }
        Command::Degenerate {
            surface,
            family,
            curves,
            out: dest,
        } => {
            let l = load(&surface)?;
            let (fam, mut tests): (DegenerationFamily, Vec<NormalMulticurve>) =
                if Path::new(&family).is_file() {
                    let fam = parse_family(&l.t, &read(Path::new(&family))?)
                        .with_context(|| family.clone())?;
                    (fam, Vec::new())
                } else {
                    let surf = l.fixture.as_ref().ok_or_else(|| {
                        usage(format!(
                            "`{family}` is not a file; fixture families need --fixture"
                        ))
                    })?;
                    fixtures::family(surf.name, &family)
                        .ok_or_else(|| usage(format!("no family `{family}` on {}", surf.name)))?
                };
            if !curves.is_empty() {
                tests = curves
                    .iter()
                    .map(|c| load_curve(&l, c))
                    .collect::<anyhow::Result<_>>()?;
            }
            let csv = run_degeneration(&fam, &tests)?.to_csv();
            match dest {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|e| anyhow!("{}: {e}", path.display()))?
                }
                None => out = csv,
            }
        }
        Command::Fixtures { list, show } => {
            if let Some(name) = show {
                let surf = fixtures::surface(&name)
                    .ok_or_else(|| usage(format!("unknown fixture `{name}`")))?;
                out.push_str(&surf.triangulation.serialize());
                for (n, c) in &surf.curves {
                    out.push('\n');
                    out.push_str(&pinch_core::curves::serialize_curve(
                        &surf.triangulation,
                        n,
                        c,
                    ));
                }
            } else if list {
                for surf in fixtures::catalog() {
                    let t = &surf.triangulation;
                    writeln!(
                        out,
                        "{}\tedges {}\tpunctures {}\tgenus {}\t{}",
                        surf.name,
                        t.num_edges(),
                        t.num_punctures(),
                        t.genus(),
                        surf.description
                    )?;
                }
                for (s, f) in fixtures::family_names() {
                    writeln!(out, "family {s} {f}")?;
                }
            } else {
                return Err(usage("give --list or --show <name>"));
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) if e.is::<Failed>() => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
