use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use s1graph::cohomology::{chern_classes, pi_star_t, presentation};
use s1graph::finiteness::{bound_constants, check_box, recognize_fiber_class};
use s1graph::graph_model::{enumerate_graphs, parse_graph, EnumBounds};
use s1graph::localization::{class_label, integrate, intersect, intersect_abbv, restrict, restrict_product, zero_length};
use s1graph::morphisms::{diffeo_obstruction, dull_isomorphic, full_flip, partial_flip, symplectic_flip, weak_isomorphisms};
use s1graph::rational::{fmt_q, parse_q};
use s1graph::reconstruct::{algebraic_input, recover_decorated, recover_dull, AlgebraicInput};
use s1graph::surgery::{blowdown, blowup, history_to_json, reduce, BlowdownTarget, BlowupSite};
use s1graph::{CohClass2, Error, ExtendedGraph};

#[derive(Parser)]
#[command(name = "s1graph", version, about = "Labelled graphs of Hamiltonian circle actions on 4-manifolds")]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    machine: bool,
    /// Print nothing; only the exit code reports the outcome.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlipKind {
    Full,
    Symplectic,
    Partial,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a graph against the validity rules.
    Validate { file: PathBuf },
    /// Complete a decorated graph to an extended graph.
    Extend { file: PathBuf },
    /// The dull graph.
    Dull { file: PathBuf },
    /// Isotropy weights at each isolated fixed point.
    Weights { file: PathBuf },
    /// Ranks of the equivariant cohomology by degree.
    Ranks {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
    },
    /// Equivariant blowup.
    Blowup {
        file: PathBuf,
        /// "i,j", "isolated-min", "isolated-max", "fat-min" or "fat-max".
        #[arg(long)]
        site: String,
        #[arg(long)]
        lambda: String,
    },
    /// Equivariant blowdown.
    Blowdown {
        file: PathBuf,
        /// "i,j" for an edge, "fat-min" or "fat-max".
        #[arg(long)]
        target: String,
    },
    /// Blow down to a minimal model.
    Reduce { file: PathBuf },
    /// Generators and relations.
    Presentation { file: PathBuf },
    /// The image of t.
    Pit { file: PathBuf },
    /// Intersection of two classes.
    Intersect {
        file: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Restriction of a class to every fixed component.
    Restrict {
        file: PathBuf,
        #[arg(long)]
        class: String,
    },
    /// Equivariant integral of a product of classes.
    Integrate {
        file: PathBuf,
        #[arg(long, required = true)]
        class: Vec<String>,
    },
    /// Number of fixed components where a class restricts to zero.
    Zerolength {
        file: PathBuf,
        #[arg(long)]
        class: String,
    },
    /// Label of a class.
    Label {
        file: PathBuf,
        #[arg(long)]
        class: String,
    },
    /// Flip a graph and print the generator map.
    Flip {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: FlipKind,
        #[arg(long)]
        chain: Option<usize>,
    },
    /// Decide isomorphism of dull graphs.
    DullIso { first: PathBuf, second: PathBuf },
    /// Decide weak isomorphism of equivariant cohomology, with a witness.
    WeakIso { first: PathBuf, second: PathBuf },
    /// Look for an obstruction to an equivariant diffeomorphism.
    Obstruct { first: PathBuf, second: PathBuf },
    /// The abstract data of a graph, input to recover and recover-dull.
    Xi {
        file: PathBuf,
        #[arg(long)]
        omega: bool,
    },
    /// Dull graph from abstract data.
    RecoverDull { file: PathBuf },
    /// Graph from abstract data with ω-pairings.
    Recover { file: PathBuf },
    /// Finiteness constants and the check of the graph's own classes.
    Bounds { file: PathBuf },
    /// Classify p·B + q·F in a ruled surface.
    Fiber {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        parity: i64,
    },
    /// List valid graphs within bounds.
    Enumerate {
        #[arg(long, default_value_t = 4)]
        max_edges: usize,
        #[arg(long, default_value_t = 3)]
        max_label: i64,
        #[arg(long, default_value_t = 2)]
        max_den: i64,
    },
    /// Run the per-graph checks over files, or over an enumerated corpus.
    Sweep {
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_edges: usize,
        #[arg(long, default_value_t = 3)]
        max_label: i64,
        #[arg(long, default_value_t = 2)]
        max_den: i64,
    },
    /// Validation, presentation and an invariant digest.
    Report { file: PathBuf },
}

/// What a command produced.
struct Out {
    text: String,
    json: Value,
    ok: bool,
}

impl Out {
    fn ok(text: impl Into<String>, json: Value) -> Out {
        Out { text: text.into(), json, ok: true }
    }
}

fn read_graph(p: &Path) -> Result<ExtendedGraph, Error> {
    let text = std::fs::read_to_string(p).map_err(|e| Error::Parse { path: p.display().to_string(), msg: e.to_string() })?;
    parse_graph(&text)
}

fn read_input(p: &Path) -> Result<AlgebraicInput, Error> {
    let text = std::fs::read_to_string(p).map_err(|e| Error::Parse { path: p.display().to_string(), msg: e.to_string() })?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse { path: p.display().to_string(), msg: e.to_string() })?;
    AlgebraicInput::from_json(&v)
}

fn class(s: &str) -> Result<CohClass2, Error> {
    CohClass2::parse(s).ok_or_else(|| Error::Parse { path: "class".into(), msg: format!("cannot read {s:?}") })
}

fn valid(file: &Path) -> Result<ExtendedGraph, Error> {
    let g = read_graph(file)?;
    g.check()?;
    Ok(g)
}

fn run(cmd: Cmd) -> Result<Out, Error> {
    Ok(match cmd {
        Cmd::Validate { file } => {
            let g = read_graph(&file)?;
            match g.validate() {
                Ok(()) => {
                    let (emin, emax) = g.extremal_self_intersections();
                    let text = format!("valid: {g}\ne_min={}\ne_max={}", fmt_q(&emin), fmt_q(&emax));
                    Out::ok(text, json!({"valid": true, "e_min": fmt_q(&emin), "e_max": fmt_q(&emax)}))
                }
                Err(vs) => Out {
                    text: vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"),
                    json: json!({"valid": false, "violations": vs.iter().map(|v| json!({"code": v.code, "msg": v.msg})).collect::<Vec<_>>()}),
                    ok: false,
                },
            }
        }
        Cmd::Extend { file } => {
            let g = valid(&file)?;
            Out::ok(g.to_json_string(), g.to_json())
        }
        Cmd::Dull { file } => {
            let d = valid(&file)?.dull();
            Out::ok(d.to_string(), d.to_json())
        }
        Cmd::Weights { file } => {
            let g = valid(&file)?;
            let mut text = String::new();
            let mut rows = Vec::new();
            for c in g.components() {
                if let Some((a, b)) = g.weights_at(c) {
                    let _ = writeln!(text, "{c}: ({a}, {b})");
                    rows.push(json!({"component": c.to_string(), "weights": [a, b]}));
                }
            }
            Out::ok(text.trim_end(), json!({"weights": rows, "multiset": g.isotropy_weights()}))
        }
        Cmd::Ranks { file, max_degree } => {
            let g = valid(&file)?;
            let r: Vec<usize> = (0..=max_degree).map(|d| g.poincare_rank(d)).collect();
            let text = r.iter().enumerate().map(|(d, x)| format!("t^{d}: {x}")).collect::<Vec<_>>().join("\n");
            Out::ok(text, json!({"ranks": r}))
        }
        Cmd::Blowup { file, site, lambda } => {
            let g = valid(&file)?;
            let s = BlowupSite::parse(&site).ok_or_else(|| Error::Parse { path: "site".into(), msg: format!("unknown site {site:?}") })?;
            let l = parse_q(&lambda).map_err(|m| Error::Parse { path: "lambda".into(), msg: m })?;
            let (h, rec) = blowup(&g, s, &l)?;
            Out::ok(format!("{h}\n{rec}"), json!({"graph": h.to_json(), "record": rec.to_json()}))
        }
        Cmd::Blowdown { file, target } => {
            let g = valid(&file)?;
            let t = BlowdownTarget::parse(&target).ok_or_else(|| Error::Parse { path: "target".into(), msg: format!("unknown target {target:?}") })?;
            let (h, rec) = blowdown(&g, t)?;
            Out::ok(format!("{h}\n{rec}"), json!({"graph": h.to_json(), "record": rec.to_json()}))
        }
        Cmd::Reduce { file } => {
            let g = valid(&file)?;
            let r = reduce(&g)?;
            let mut text = format!("model: {}\nblowdowns: {}\nbase: {}", r.model, r.records.len(), r.base);
            for rec in &r.records {
                let _ = write!(text, "\n  {rec}");
            }
            Out::ok(text, json!({"model": r.model.to_string(), "blowdowns": r.records.len(), "base": r.base.to_json(), "history": history_to_json(&r.records)}))
        }
        Cmd::Presentation { file } => {
            let g = valid(&file)?;
            let p = presentation(&g)?;
            Out::ok(p.report().trim_end(), p.to_json())
        }
        Cmd::Pit { file } => {
            let p = pi_star_t(&valid(&file)?)?;
            Out::ok(format!("pi*(t) = {p}"), json!({"pi_star": p.to_string()}))
        }
        Cmd::Intersect { file, a, b } => {
            let g = valid(&file)?;
            let (a, b) = (class(&a)?, class(&b)?);
            let v = intersect(&g, &a, &b)?;
            let w = intersect_abbv(&g, &a, &b)?;
            if w != s1graph::rational::qi(v) {
                return Err(Error::BugTrap(format!("table pairing {v} disagrees with localization {}", fmt_q(&w))));
            }
            Out::ok(format!("{a} · {b} = {v}"), json!({"value": v}))
        }
        Cmd::Restrict { file, class: c } => {
            let g = valid(&file)?;
            let r = restrict(&g, &class(&c)?)?;
            let rows: Vec<Value> = r.0.iter().map(|(k, v)| json!({"component": k.to_string(), "value": v.to_string()})).collect();
            Out::ok(r.to_string(), json!({"restriction": rows}))
        }
        Cmd::Integrate { file, class: cs } => {
            let g = valid(&file)?;
            let factors = cs.iter().map(|c| class(c)).collect::<Result<Vec<_>, _>>()?;
            let l = integrate(&g, &restrict_product(&g, &factors)?)?;
            Out::ok(format!("∫ = {l}"), json!({"integral": l.to_string()}))
        }
        Cmd::Zerolength { file, class: c } => {
            let n = zero_length(&valid(&file)?, &class(&c)?)?;
            Out::ok(format!("zero length: {n}"), json!({"zero_length": n}))
        }
        Cmd::Label { file, class: c } => {
            let l = class_label(&valid(&file)?, &class(&c)?)?;
            Out::ok(format!("label: {}", fmt_q(&l)), json!({"label": fmt_q(&l)}))
        }
        Cmd::Flip { file, kind, chain } => {
            let g = valid(&file)?;
            let (h, map) = match kind {
                FlipKind::Full => full_flip(&g)?,
                FlipKind::Symplectic => symplectic_flip(&g)?,
                FlipKind::Partial => {
                    let i = chain.ok_or_else(|| Error::Missing("--chain for a partial flip".into()))?;
                    partial_flip(&g, i)?
                }
            };
            map.verify()?;
            Out::ok(format!("{h}\n{map}"), json!({"graph": h.to_json(), "map": map.to_json()}))
        }
        Cmd::DullIso { first, second } => {
            let (d1, d2) = (valid(&first)?.dull(), valid(&second)?.dull());
            match dull_isomorphic(&d1, &d2) {
                Some(m) => Out::ok(
                    format!("dull graphs isomorphic{}", if m.swapped { " (extremes exchanged)" } else { "" }),
                    json!({"isomorphic": true, "swapped": m.swapped, "pairs": m.pairs}),
                ),
                None => Out { text: "dull graphs not isomorphic".into(), json: json!({"isomorphic": false}), ok: false },
            }
        }
        Cmd::WeakIso { first, second } => {
            let v = weak_isomorphisms(&valid(&first)?, &valid(&second)?)?;
            Out { text: v.to_string(), json: v.to_json(), ok: v.is_isomorphic() }
        }
        Cmd::Obstruct { first, second } => {
            let v = diffeo_obstruction(&valid(&first)?, &valid(&second)?);
            Out::ok(v.to_string(), v.to_json())
        }
        Cmd::Xi { file, omega } => {
            let inp = algebraic_input(&valid(&file)?, omega)?;
            Out::ok(inp.to_string(), inp.to_json())
        }
        Cmd::RecoverDull { file } => {
            let d = recover_dull(&read_input(&file)?)?;
            Out::ok(d.to_string(), d.to_json())
        }
        Cmd::Recover { file } => {
            let g = recover_decorated(&read_input(&file)?)?;
            Out::ok(g.to_string(), g.to_json())
        }
        Cmd::Bounds { file } => {
            let g = valid(&file)?;
            let rep = bound_constants(&g)?;
            let chk = check_box(&g)?;
            let text = format!(
                "{rep}\nΣ⟨x,x⟩ = {} (A = {})\n∫((2g+k−2)x_h − Σz)ω = {} (C_h = {})\nclasses outside [0, C]: {}\nclasses outside the y-bound: {}",
                chk.sum_self,
                chk.a,
                fmt_q(&chk.xh),
                fmt_q(&chk.c_h),
                chk.out_of_range.len(),
                chk.y_violations.len()
            );
            let mut j = rep.to_json();
            j["check"] = json!({
                "sum_self": chk.sum_self,
                "sum_matches": chk.sum_matches(),
                "xh": fmt_q(&chk.xh),
                "xh_bounded": chk.xh_bounded(),
                "out_of_range": chk.out_of_range.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "y_violations": chk.y_violations.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            });
            Out { text, json: j, ok: chk.ok() }
        }
        Cmd::Fiber { p, q, genus, parity } => {
            let f = recognize_fiber_class(p, q, genus, parity);
            Out::ok(f.to_string(), json!({"class": f.to_string()}))
        }
        Cmd::Enumerate { max_edges, max_label, max_den } => {
            let gs = enumerate_graphs(EnumBounds::new(max_edges, max_label, max_den));
            let text = gs.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("\n");
            Out::ok(text, Value::Array(gs.iter().map(|g| g.to_json()).collect()))
        }
        Cmd::Sweep { files, max_edges, max_label, max_den } => {
            let graphs: Vec<(String, Result<ExtendedGraph, Error>)> = if files.is_empty() {
                enumerate_graphs(EnumBounds::new(max_edges, max_label, max_den)).into_iter().map(|g| (g.to_string(), Ok(g))).collect()
            } else {
                files.iter().map(|f| (f.display().to_string(), read_graph(f))).collect()
            };
            let mut lines = Vec::new();
            let mut rows = Vec::new();
            let mut failed = 0;
            for (name, g) in graphs {
                let res = g.and_then(|g| sweep_one(&g));
                let (status, detail) = match &res {
                    Ok(notes) if notes.is_empty() => ("ok", String::new()),
                    Ok(notes) => ("fail", notes.join("; ")),
                    Err(e) => ("error", format!("{}: {e}", e.code())),
                };
                if status != "ok" {
                    failed += 1;
                }
                lines.push(if detail.is_empty() { format!("{status} {name}") } else { format!("{status} {name}: {detail}") });
                rows.push(json!({"input": name, "status": status, "detail": detail}));
            }
            lines.push(format!("{} checked, {failed} failed", rows.len()));
            Out { text: lines.join("\n"), json: json!({"results": rows, "failed": failed}), ok: failed == 0 }
        }
        Cmd::Report { file } => {
            let g = read_graph(&file)?;
            if let Err(vs) = g.validate() {
                let text = vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n");
                return Ok(Out { text, json: json!({"valid": false}), ok: false });
            }
            let p = presentation(&g)?;
            let ch = chern_classes(&g)?;
            let (emin, emax) = g.extremal_self_intersections();
            let text = format!(
                "graph: {g}\ne_min={} e_max={}\ndull: {}\nweights: {:?}\n{}c1 = {}\nc1²−2c2 = {}\neuler = {}\neqc3 defect = {}",
                fmt_q(&emin),
                fmt_q(&emax),
                g.dull(),
                g.isotropy_weights(),
                p.report(),
                ch.c1,
                ch.c1sq_minus_2c2,
                ch.euler,
                ch.eqc3_defect
            );
            let j = json!({
                "valid": true,
                "graph": g.to_json(),
                "e_min": fmt_q(&emin),
                "e_max": fmt_q(&emax),
                "dull": g.dull().to_json(),
                "weights": g.isotropy_weights(),
                "presentation": p.to_json(),
                "c1": ch.c1.to_string(),
                "c1sq_minus_2c2": ch.c1sq_minus_2c2,
                "euler": ch.euler,
                "eqc3_defect": ch.eqc3_defect,
            });
            Out::ok(text, j)
        }
    })
}

/// Checks run by `sweep` on one graph; returns the failed checks.
fn sweep_one(g: &ExtendedGraph) -> Result<Vec<String>, Error> {
    g.check()?;
    let mut notes = Vec::new();
    presentation(g)?;
    let ch = chern_classes(g)?;
    if ch.eqc3_defect != 0 {
        notes.push(format!("eqc3 defect {}", ch.eqc3_defect));
    }
    let inp = algebraic_input(g, true)?;
    if recover_dull(&inp)? != g.dull() {
        notes.push("dull recovery differs".into());
    }
    if g.fat_count() > 0 && recover_decorated(&inp)? != g.normalized().0 {
        notes.push("graph recovery differs".into());
    }
    let b = check_box(g)?;
    if !b.ok() {
        notes.push(format!("box check: sum {} vs A {}", b.sum_self, b.a));
    }
    Ok(notes)
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(out) => {
            if !cli.quiet {
                if cli.machine {
                    emit(&serde_json::to_string_pretty(&out.json).unwrap_or_default());
                } else {
                    emit(&out.text);
                }
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if !cli.quiet {
                if cli.machine {
                    emit(&json!({"error": e.code(), "message": e.to_string()}).to_string());
                } else {
                    eprintln!("error[{}]: {e}", e.code());
                }
            }
            ExitCode::from(1)
        }
    }
}
