//! `holant`: command-line front end for the holant library.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use holant::acceptance::{run, CRITERIA};
use holant::classify::{classify_eight_vertex, regression_corpus, ClassLabel, EightVertexParams};
use holant::eval::{eval_affine_instance, eval_matchgate_instance, eval_product_instance, EvalError};
use holant::field::{FieldElem, Value};
use holant::gadget::GadgetExpr;
use holant::grid::{
    brute_holant_capped, brute_values, canonical_orientation, enumerate_even_orientations, grid_medial, octahedron, parallel_multi,
    random_grid, Mediator, PlanarGrid, DEFAULT_EDGE_CAP,
};
use holant::holo::{transform_column, verify_valiant, Transform2};
use holant::lattice::{
    conformal_interpolate, lattice_basis, lattice_subset, mobius_orbit, InterpolationSystem, MobiusMap,
};
use holant::sample::{random_instance, rng_from_seed, InstanceKind};
use holant::signature::Signature;

mod error;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "holant", version, about = "Exact Holant evaluation and eight-vertex classification")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Brute-force edge cap.
    #[arg(long, global = true, default_value_t = DEFAULT_EDGE_CAP)]
    cap: usize,
    /// Shorthand for --format json.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Exact,
    Approx,
}

#[derive(Clone, Copy, Debug)]
struct RunConfig {
    seed: u64,
    cap: usize,
    format: Format,
    mode: Mode,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Classify Pl-Holant(NEQ2 | f) for an eight-vertex signature.
    Classify {
        /// a,b,c,d,w,x,y,z
        #[arg(long, allow_hyphen_values = true)]
        params: String,
    },
    /// Evaluate a grid file with one engine.
    Eval {
        #[arg(long, value_enum, default_value_t = Engine::Auto)]
        engine: Engine,
        /// Cross-check against brute force (grids with at most 20 edges).
        #[arg(long)]
        check: bool,
        file: PathBuf,
    },
    /// Evaluate gadget expressions.
    #[command(subcommand)]
    Gadget(GadgetCmd),
    /// Apply and verify holographic transforms.
    #[command(subcommand)]
    Holo(HoloCmd),
    /// Planarity and orientation tools for grid files.
    #[command(subcommand)]
    Grid(GridCmd),
    /// Multiplicative relation lattices.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Polynomial interpolation.
    #[command(subcommand)]
    Interp(InterpCmd),
    /// Iterate Mobius maps on the unit circle.
    #[command(subcommand)]
    Mobius(MobiusCmd),
    /// Check identities on concrete grids.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Generate grids and instances.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Run the acceptance suite.
    Selftest {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        criterion: Vec<u8>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    Brute,
    Fkt,
    Affine,
    Product,
    Auto,
}

#[derive(Subcommand, Debug)]
enum GadgetCmd {
    /// Evaluate a gadget expression file.
    Eval {
        file: PathBuf,
        /// Also contract the planar gadget graph by brute force.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Subcommand, Debug)]
enum HoloCmd {
    /// T^{(x)n} f for a signature literal.
    Apply {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(allow_hyphen_values = true)]
        sig: String,
    },
    /// Brute-force both sides of Valiant's identity.
    Verify {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
}

#[derive(Subcommand, Debug)]
enum GridCmd {
    /// Brute-force Holant value, or the signature over external darts.
    Eval { file: PathBuf },
    /// Enumerate even or Eulerian orientations.
    Orient {
        file: PathBuf,
        #[arg(long, conflicts_with = "eulerian")]
        even: bool,
        #[arg(long)]
        eulerian: bool,
        /// Print the canonical orientation instead of enumerating.
        #[arg(long)]
        canonical: bool,
    },
    /// Check the embedding with Euler's formula.
    CheckPlanar { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum LatticeCmd {
    /// Basis of the relation lattice of xs.
    Basis {
        #[arg(allow_hyphen_values = true)]
        xs: String,
    },
    /// Whether every relation of xs is a relation of ys.
    Subset {
        #[arg(allow_hyphen_values = true)]
        xs: String,
        #[arg(allow_hyphen_values = true)]
        ys: String,
    },
}

#[derive(Subcommand, Debug)]
enum InterpCmd {
    /// Solve a conformal interpolation system read from a JSON file with keys
    /// m, xs, ys and either samples or z (forward-generated).
    Conformal { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum MobiusCmd {
    /// Iterate z -> (a z + b) / (c z + d), or the unit-circle form.
    Orbit {
        /// a,b,c,d
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["phase", "lambda"])]
        matrix: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        phase: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t0: String,
        #[arg(short, long, default_value_t = 10)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Brute-force both sides of Valiant's identity.
    Valiant {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        file: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum GenCmd {
    /// Octahedron: the medial graph of the tetrahedron.
    Octahedron(SigArgs),
    /// Medial graph of a rows x cols grid of cells.
    Medial {
        #[arg(long, default_value_t = 2)]
        rows: usize,
        #[arg(long, default_value_t = 2)]
        cols: usize,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Ring of k vertices joined by doubled edges.
    Parallel {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Medial graph of a random connected piece of the 4x4 lattice.
    Random {
        #[arg(long, default_value_t = 16)]
        edges: usize,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Random grid whose vertices carry signatures of one kind.
    Instance {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 16)]
        edges: usize,
    },
    /// The classifier regression corpus with expected labels.
    Corpus,
}

#[derive(Args, Debug)]
struct SigArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "EQ4")]
    sig: String,
    #[arg(long, allow_hyphen_values = true, default_value = "NEQ2")]
    med: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Matchgate,
    Affine,
    Product,
    Generic,
}

/// One command's output: printed as text, JSON or CSV.
struct Report {
    command: &'static str,
    inputs: Json,
    result: Vec<(String, Json)>,
    certificate: Option<Json>,
    text: Vec<String>,
    ok: bool,
}

impl Report {
    fn new(command: &'static str, inputs: Json) -> Report {
        Report { command, inputs, result: Vec::new(), certificate: None, text: Vec::new(), ok: true }
    }

    fn put(&mut self, key: &str, v: impl Into<Json>) {
        self.result.push((key.to_string(), v.into()));
    }

    fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Text => {
                for l in &self.text {
                    out.push_str(l);
                    out.push('\n');
                }
            }
            Format::Json => {
                let mut doc = json!({
                    "command": self.command,
                    "inputs": self.inputs,
                    "result": Json::Object(self.result.iter().cloned().collect()),
                });
                if let Some(c) = &self.certificate {
                    doc["certificate"] = c.clone();
                }
                out = serde_json::to_string_pretty(&doc).expect("serializable");
                out.push('\n');
            }
            Format::Csv => {
                out.push_str("key,value\n");
                for (k, v) in &self.result {
                    let s = match v {
                        Json::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{k},\"{}\"\n", s.replace('"', "\"\"")));
                }
            }
        }
        out
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = match std::env::var("HOLANT_MODE").as_deref() {
        Err(_) | Ok("exact") | Ok("") => Mode::Exact,
        Ok("approx") => Mode::Approx,
        Ok(other) => {
            eprintln!("error: HOLANT_MODE must be exact or approx, got {other:?}");
            return ExitCode::from(2);
        }
    };
    let cfg = RunConfig {
        seed: cli.seed,
        cap: cli.cap,
        format: if cli.json { Format::Json } else { cli.format },
        mode,
    };
    match dispatch(cli.cmd, &cfg) {
        Ok(rep) => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = std::io::stdout().write_all(rep.render(cfg.format).as_bytes());
            if rep.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.module());
            ExitCode::from(e.exit_code())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn read_grid(path: &Path) -> Result<PlanarGrid, CliError> {
    Ok(PlanarGrid::parse(&read(path)?)?)
}

fn elems(list: &str) -> Result<Vec<FieldElem>, CliError> {
    Ok(list.split(',').map(|s| s.trim().parse::<FieldElem>()).collect::<Result<_, _>>()?)
}

fn show(x: &FieldElem, mode: Mode) -> String {
    match mode {
        Mode::Exact => x.to_string(),
        Mode::Approx => Value::Exact(x.clone()).to_approx().to_string(),
    }
}

fn dispatch(cmd: Cmd, cfg: &RunConfig) -> Result<Report, CliError> {
    match cmd {
        Cmd::Classify { params } => classify(&params),
        Cmd::Eval { engine, check, file } => eval(engine, check, &file, cfg),
        Cmd::Gadget(GadgetCmd::Eval { file, check }) => gadget(&file, check),
        Cmd::Holo(HoloCmd::Apply { t, sig }) => holo_apply(&t, &sig, cfg),
        Cmd::Holo(HoloCmd::Verify { file, t }) | Cmd::Verify(VerifyCmd::Valiant { t, file }) => valiant(&file, &t),
        Cmd::Grid(g) => grid(g, cfg),
        Cmd::Lattice(LatticeCmd::Basis { xs }) => {
            let v = elems(&xs)?;
            let b = lattice_basis(&v)?;
            let rows: Vec<Vec<String>> =
                b.rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
            let mut rep = Report::new("lattice basis", json!({ "xs": xs }));
            rep.put("rank", b.rank());
            rep.put("basis", rows.clone());
            rep.line(format!("rank {}", b.rank()));
            for r in rows {
                rep.line(format!("({})", r.join(", ")));
            }
            Ok(rep)
        }
        Cmd::Lattice(LatticeCmd::Subset { xs, ys }) => {
            let sub = lattice_subset(&elems(&xs)?, &elems(&ys)?)?;
            let mut rep = Report::new("lattice subset", json!({ "xs": xs, "ys": ys }));
            rep.put("subset", sub);
            rep.line(sub.to_string());
            Ok(rep)
        }
        Cmd::Interp(InterpCmd::Conformal { file }) => interp(&file, cfg),
        Cmd::Mobius(MobiusCmd::Orbit { matrix, phase, lambda, t0, n }) => {
            mobius(matrix.as_deref(), phase.as_deref(), lambda.as_deref(), &t0, n, cfg)
        }
        Cmd::Gen(g) => gen(g, cfg),
        Cmd::Selftest { criterion } => selftest(&criterion, cfg),
    }
}

fn certificate_json(l: &ClassLabel) -> Json {
    Json::Array(
        l.certificate
            .iter()
            .map(|s| json!({ "lemma": s.rule, "condition": s.condition, "witness": s.witness.to_string() }))
            .collect(),
    )
}

fn classify(params: &str) -> Result<Report, CliError> {
    let p: EightVertexParams = params.parse()?;
    let l = classify_eight_vertex(&p);
    let mut rep = Report::new("classify", json!({ "params": p.to_string() }));
    rep.put("label", l.label.to_string());
    if let Some(r) = &l.residual {
        rep.put("residual", r.clone());
    }
    rep.certificate = Some(certificate_json(&l));
    rep.text = l.to_string().lines().map(str::to_string).collect();
    Ok(rep)
}

fn run_engine(engine: Engine, g: &PlanarGrid, cap: usize) -> Result<(FieldElem, &'static str), CliError> {
    Ok(match engine {
        Engine::Brute => (brute_holant_capped(g, cap)?, "brute"),
        Engine::Fkt => (eval_matchgate_instance(g)?, "fkt"),
        Engine::Affine => (eval_affine_instance(g)?, "affine"),
        Engine::Product => (eval_product_instance(g)?, "product"),
        Engine::Auto => {
            type EngineFn = fn(&PlanarGrid) -> Result<FieldElem, EvalError>;
            let tried: [(EngineFn, &str); 3] = [
                (eval_product_instance, "product"),
                (eval_affine_instance, "affine"),
                (eval_matchgate_instance, "fkt"),
            ];
            for (f, name) in tried {
                match f(g) {
                    Ok(v) => return Ok((v, name)),
                    Err(EvalError::NoRealization(_) | EvalError::NotAffine(_) | EvalError::NotProduct(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            (brute_holant_capped(g, cap)?, "brute")
        }
    })
}

fn eval(engine: Engine, check: bool, file: &Path, cfg: &RunConfig) -> Result<Report, CliError> {
    let g = read_grid(file)?;
    let (v, used) = run_engine(engine, &g, cfg.cap)?;
    let mut rep = Report::new("eval", json!({ "file": file.display().to_string(), "engine": format!("{engine:?}").to_lowercase() }));
    rep.put("engine", used);
    rep.put("value", show(&v, cfg.mode));
    rep.line(format!("{} ({used})", show(&v, cfg.mode)));
    if check {
        if g.edges().len() > 20 {
            rep.put("check", "skipped: more than 20 edges");
            rep.line("check skipped: more than 20 edges");
        } else {
            let b = brute_holant_capped(&g, cfg.cap)?;
            rep.ok = b == v;
            rep.put("check", if rep.ok { "agrees" } else { "disagrees" });
            rep.put("brute", show(&b, cfg.mode));
            rep.line(if rep.ok { "check: agrees with brute force".to_string() } else { format!("check: brute force gives {}", show(&b, cfg.mode)) });
        }
    }
    Ok(rep)
}

fn gadget(file: &Path, check: bool) -> Result<Report, CliError> {
    let e = GadgetExpr::parse(&read(file)?)?;
    let v = e.eval()?;
    let mut rep = Report::new("gadget eval", json!({ "file": file.display().to_string() }));
    rep.put("signature", v.signature().to_string());
    rep.line(v.to_string());
    if check {
        let b = e.brute()?;
        rep.ok = b == *v.signature();
        rep.put("check", if rep.ok { "agrees" } else { "disagrees" });
        rep.line(if rep.ok { "check: agrees with brute-force contraction" } else { "check: brute-force contraction differs" });
    }
    Ok(rep)
}

fn holo_apply(t: &str, sig: &str, cfg: &RunConfig) -> Result<Report, CliError> {
    let tr = Transform2::parse(t)?;
    let f: Signature = sig.parse()?;
    let out = transform_column(&tr, &f);
    let mut rep = Report::new("holo apply", json!({ "t": tr.to_string(), "sig": f.to_string() }));
    let shown = match cfg.mode {
        Mode::Exact => out.to_string(),
        Mode::Approx => format!("[{}]", out.values().iter().map(|x| show(x, Mode::Approx)).collect::<Vec<_>>().join(", ")),
    };
    rep.put("signature", shown.clone());
    rep.line(shown);
    Ok(rep)
}

fn valiant(file: &Path, t: &str) -> Result<Report, CliError> {
    let g = read_grid(file)?;
    let tr = Transform2::parse(t)?;
    let ok = verify_valiant(&g, &tr)?;
    let mut rep = Report::new("verify valiant", json!({ "file": file.display().to_string(), "t": tr.to_string() }));
    rep.ok = ok;
    rep.put("valiant", if ok { "OK" } else { "FAIL" });
    rep.line(if ok { "OK" } else { "FAIL" });
    Ok(rep)
}

fn grid(cmd: GridCmd, cfg: &RunConfig) -> Result<Report, CliError> {
    match cmd {
        GridCmd::Eval { file } => {
            let g = read_grid(&file)?;
            let mut rep = Report::new("grid eval", json!({ "file": file.display().to_string() }));
            if g.is_closed() {
                let v = brute_holant_capped(&g, cfg.cap)?;
                rep.put("value", show(&v, cfg.mode));
                rep.line(show(&v, cfg.mode));
            } else {
                // Signature over the external darts, x1 = first listed dart.
                let vals: Vec<String> = brute_values(&g, cfg.cap)?.iter().map(|v| show(v, cfg.mode)).collect();
                rep.put("signature", vals.clone());
                rep.line(format!("[{}]", vals.join(", ")));
            }
            Ok(rep)
        }
        GridCmd::Orient { file, even, eulerian, canonical } => {
            let g = read_grid(&file)?;
            let bits = |o: &[bool]| o.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
            let mut rep = Report::new(
                "grid orient",
                json!({ "file": file.display().to_string(), "eulerian": eulerian, "canonical": canonical }),
            );
            if canonical {
                let o = canonical_orientation(&g)?;
                rep.put("orientation", bits(&o.0));
                rep.line(bits(&o.0));
                return Ok(rep);
            }
            let _ = even;
            let all = enumerate_even_orientations(&g, eulerian, cfg.cap)?;
            let list: Vec<String> = all.iter().map(|o| bits(&o.0)).collect();
            rep.put("count", list.len());
            rep.put("orientations", list.clone());
            rep.line(format!("{} {} orientations", list.len(), if eulerian { "Eulerian" } else { "even" }));
            rep.text.extend(list);
            Ok(rep)
        }
        GridCmd::CheckPlanar { file } => {
            let g = read_grid(&file)?;
            let r = g.check_planar()?;
            let mut rep = Report::new("grid check-planar", json!({ "file": file.display().to_string() }));
            rep.put("vertices", r.vertices);
            rep.put("edges", r.edges);
            rep.put("faces", r.faces);
            rep.put("components", r.components);
            rep.line(format!("planar: V={} E={} F={} components={}", r.vertices, r.edges, r.faces, r.components));
            Ok(rep)
        }
    }
}

fn json_elems(v: &Json, key: &str) -> Result<Option<Vec<FieldElem>>, CliError> {
    let Some(arr) = v.get(key) else { return Ok(None) };
    let arr = arr.as_array().ok_or_else(|| CliError::Input(format!("{key} must be a list")))?;
    arr.iter()
        .map(|x| match x {
            Json::String(s) => Ok(s.parse::<FieldElem>()?),
            Json::Number(n) => Ok(n.to_string().parse::<FieldElem>()?),
            _ => Err(CliError::Input(format!("{key} entries must be strings or numbers"))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn interp(file: &Path, cfg: &RunConfig) -> Result<Report, CliError> {
    let input: Json = serde_json::from_str(&read(file)?).map_err(|e| CliError::Input(e.to_string()))?;
    let m = input.get("m").and_then(Json::as_u64).ok_or_else(|| CliError::Input("missing m".into()))? as usize;
    let xs = json_elems(&input, "xs")?.ok_or_else(|| CliError::Input("missing xs".into()))?;
    let ys = json_elems(&input, "ys")?.ok_or_else(|| CliError::Input("missing ys".into()))?;
    let sys = match (json_elems(&input, "samples")?, json_elems(&input, "z")?) {
        (Some(samples), _) => InterpolationSystem { m, xs, ys, samples },
        (None, Some(z)) => {
            if z.len() != holant::lattice::simplex(xs.len(), m).len() {
                return Err(CliError::Input("z needs one coefficient per simplex cell".into()));
            }
            InterpolationSystem::forward(m, xs, ys, &z)
        }
        (None, None) => return Err(CliError::Input("need samples or z".into())),
    };
    let v = conformal_interpolate(&sys)?;
    let mut rep = Report::new("interp conformal", json!({ "file": file.display().to_string() }));
    rep.put("cosets", sys.coset_count());
    rep.put("value", show(&v, cfg.mode));
    rep.line(show(&v, cfg.mode));
    Ok(rep)
}

fn mobius(
    matrix: Option<&str>,
    phase: Option<&str>,
    lambda: Option<&str>,
    t0: &str,
    n: usize,
    cfg: &RunConfig,
) -> Result<Report, CliError> {
    let val = |s: &str| -> Result<Value, CliError> {
        let v: Value = s.parse()?;
        Ok(if cfg.mode == Mode::Approx { v.to_approx() } else { v })
    };
    let map = match (matrix, phase, lambda) {
        (Some(m), _, _) => {
            let p: Vec<&str> = m.split(',').collect();
            if p.len() != 4 {
                return Err(CliError::Input("--matrix takes a,b,c,d".into()));
            }
            MobiusMap::new(val(p[0])?, val(p[1])?, val(p[2])?, val(p[3])?)?
        }
        (None, ph, Some(l)) => MobiusMap::unit_circle_form(val(ph.unwrap_or("1"))?, val(l)?)?,
        _ => return Err(CliError::Input("give --matrix or --lambda".into())),
    };
    let start = val(t0)?;
    let orbit = mobius_orbit(&map, &start, n)?;
    let order = map.projective_order(24)?;
    let values: Vec<String> = orbit.values.iter().map(|v| v.to_string()).collect();
    let mut rep = Report::new("mobius orbit", json!({ "t0": t0, "n": n }));
    rep.put("values", values.clone());
    rep.put("all_distinct", orbit.all_distinct);
    rep.put("all_on_circle", orbit.all_on_circle);
    rep.put("period", orbit.period);
    rep.put("projective_order", order);
    rep.text.extend(values.iter().enumerate().map(|(k, v)| format!("psi^{}(t0) = {v}", k + 1)));
    rep.line(format!(
        "distinct: {}, on circle: {}, period: {}, projective order: {}",
        orbit.all_distinct,
        orbit.all_on_circle,
        orbit.period.map_or("none".into(), |p| p.to_string()),
        order.map_or("none".into(), |p| p.to_string())
    ));
    Ok(rep)
}

fn mediator(s: &str) -> Result<Mediator, CliError> {
    Ok(match s {
        "NEQ2" => Mediator::Neq,
        "EQ2" => Mediator::Eq,
        lit => {
            let sig: Signature = lit.parse()?;
            Mediator::Sig(sig.try_into()?)
        }
    })
}

fn gen(cmd: GenCmd, cfg: &RunConfig) -> Result<Report, CliError> {
    let sig = |a: &SigArgs| -> Result<(Signature, Mediator), CliError> { Ok((a.sig.parse()?, mediator(&a.med)?)) };
    let mut rng = rng_from_seed(cfg.seed);
    let (name, g) = match cmd {
        GenCmd::Octahedron(a) => {
            let (f, m) = sig(&a)?;
            ("octahedron", octahedron(&f, m))
        }
        GenCmd::Medial { rows, cols, sig: a } => {
            let (f, m) = sig(&a)?;
            ("medial", grid_medial(rows, cols, &f, m))
        }
        GenCmd::Parallel { k, sig: a } => {
            let (f, m) = sig(&a)?;
            ("parallel", parallel_multi(k, &f, m))
        }
        GenCmd::Random { edges, sig: a } => {
            let (f, m) = sig(&a)?;
            ("random", random_grid(&mut rng, edges, &f, m))
        }
        GenCmd::Instance { kind, edges } => {
            let k = match kind {
                Kind::Matchgate => InstanceKind::Matchgate,
                Kind::Affine => InstanceKind::Affine,
                Kind::Product => InstanceKind::Product,
                Kind::Generic => InstanceKind::Generic,
            };
            ("instance", random_instance(&mut rng, k, edges))
        }
        GenCmd::Corpus => {
            let mut rep = Report::new("gen corpus", json!({}));
            let mut rows = Vec::new();
            for p in regression_corpus() {
                rep.line(format!("{}\t{}\t{}", p.params, p.expected, p.name));
                rows.push(json!({ "name": p.name, "params": p.params.to_string(), "expected": p.expected.to_string() }));
            }
            rep.put("points", rows);
            return Ok(rep);
        }
    };
    let text = g.serialize();
    let mut rep = Report::new("gen", json!({ "generator": name, "seed": cfg.seed }));
    rep.put("grid", text.clone());
    rep.text = text.lines().map(str::to_string).collect();
    Ok(rep)
}

fn selftest(ids: &[u8], cfg: &RunConfig) -> Result<Report, CliError> {
    let ids: Vec<u8> = if ids.is_empty() { CRITERIA.iter().map(|(i, _)| *i).collect() } else { ids.to_vec() };
    let mut rep = Report::new("selftest", json!({ "seed": cfg.seed, "criteria": ids }));
    rep.line(format!("seed {}", cfg.seed));
    let mut rows = Vec::new();
    for id in ids {
        let r = run(id, cfg.seed);
        rep.ok &= r.passed;
        rep.line(r.to_string());
        rows.push(json!({
            "id": r.id,
            "title": r.title,
            "passed": r.passed,
            "detail": r.detail,
            "seconds": r.elapsed.as_secs_f64(),
        }));
    }
    rep.put("criteria", rows);
    rep.put("passed", rep.ok);
    Ok(rep)
}
