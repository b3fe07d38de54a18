//! Subcommand implementations. Each returns a JSON report and an exit code.

use std::fmt::Debug;

use clap::ValueEnum;
use conred::algd::{self, BialgebroidData};
use conred::cartan::{self, KForm, MultiVector, VectorField};
use conred::cgeo::FnClass;
use conred::cindex::Flavor;
use conred::dirac::{self, DiracGraph};
use conred::report::{Report, Verdict};
use conred::selftest::{self, Mode};
use serde_json::{json, Map, Value};

use crate::emit;
use crate::scene::{as_poisson, as_presymplectic, format_tuple, Obj, Scene, SceneError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Poisson,
    Presymplectic,
    Dirac,
    Algebroid,
    Bialgebroid,
    Morphism,
    Comorphism,
    Pn,
    BundleMorphism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CartanOp {
    D,
    Lie,
    Insert,
    Schouten,
    Courant,
    Nijenhuis,
    Bracket,
}

pub struct Outcome {
    pub code: i32,
    pub body: Map<String, Value>,
    pub summary: String,
}

impl Outcome {
    fn new(code: i32, summary: String) -> Outcome {
        Outcome { code, body: Map::new(), summary }
    }

    fn with(mut self, key: &str, value: Value) -> Outcome {
        self.body.insert(key.into(), value);
        self
    }

    pub fn status(&self) -> &'static str {
        match self.code {
            EXIT_PASS => "pass",
            EXIT_FAIL => "fail",
            _ => "error",
        }
    }
}

/// Innermost variant name of a nested error, e.g. `Geo(NotInWobs)` → `NotInWobs`.
pub fn error_code(e: &impl Debug) -> String {
    let mut s = format!("{e:?}");
    while let Some(open) = s.find('(') {
        let head = &s[..open];
        if !["Geo", "Cartan", "Algd", "Calg"].contains(&head) || !s.ends_with(')') {
            break;
        }
        s = s[open + 1..s.len() - 1].to_string();
    }
    s.split(['(', ' ', '{']).next().unwrap_or("").to_string()
}

fn class_json(c: FnClass) -> Value {
    json!({"in_W": c.in_w, "in_N": c.in_n})
}

fn verdicts_outcome(subject: &str, rep: &Report) -> Outcome {
    let code = if rep.pass() { EXIT_PASS } else { EXIT_FAIL };
    let summary = match rep.first_failure() {
        None => format!("{subject}: PASS ({} checks)", rep.verdicts.len()),
        Some(v) => format!("{subject}: FAIL at {}{}", v.name, v.witness.as_ref().map(|w| format!(" ({w})")).unwrap_or_default()),
    };
    Outcome::new(code, summary).with("verdicts", serde_json::to_value(&rep.verdicts).expect("plain data"))
}

fn failure(subject: &str, name: &str, e: &(impl Debug + std::fmt::Display)) -> Outcome {
    let v = Verdict { name: name.into(), pass: false, witness: Some(error_code(e)) };
    Outcome::new(EXIT_FAIL, format!("{subject}: FAIL at {name} ({e})"))
        .with("verdicts", json!([v]))
        .with("message", Value::String(e.to_string()))
}

fn wrong_kind(name: &str, o: &Obj, wanted: &str) -> SceneError {
    SceneError::at(format!("objects.{name}"), format!("expected {wanted}, found a {}", o.kind()))
}

fn union(a: FnClass, b: FnClass) -> FnClass {
    FnClass { in_w: a.in_w && b.in_w, in_n: a.in_n && b.in_n }
}

pub fn classify(scene: &Scene, name: &str) -> Result<Outcome, SceneError> {
    let o = scene.get(name)?;
    let class = match &o {
        Obj::Function(s, f) => Some(s.fn_class(f).map_err(|e| SceneError::at(format!("objects.{name}"), e))?),
        Obj::Field(x) => Some(x.class()),
        Obj::Form(w) => Some(w.class()),
        Obj::Multivector(m) => Some(m.class()),
        Obj::EndField(a) => Some(a.class()),
        Obj::Section(s) => Some(s.class()),
        Obj::Poisson(p) => Some(p.pi.class()),
        Obj::Presymplectic(q) => Some(q.omega.class()),
        Obj::Dirac(DiracGraph::Bivector(p)) => Some(p.pi.class()),
        Obj::Dirac(DiracGraph::TwoForm(q)) => Some(q.omega.class()),
        Obj::Pn(s) => Some(union(s.pi.pi.class(), s.a.class())),
        Obj::Bundle(_) | Obj::Morphism(..) | Obj::Algebroid(_) | Obj::Bialgebroid(_) => None,
    };
    let mut out = Outcome::new(EXIT_PASS, String::new()).with("kind", Value::String(o.kind().into()));
    match (&o, class) {
        (_, Some(c)) => {
            out.summary = format!("{name}: in_W = {}, in_N = {}", c.in_w, c.in_n);
            out = out.with("class", class_json(c));
        }
        (Obj::Bundle(b), None) => {
            let r = b.ranks();
            out.summary = format!("{name}: ranks {r}");
            out = out.with("ranks", json!({"t": r.t, "w": r.w, "n": r.n}));
        }
        (Obj::Morphism(phi, _), None) => {
            let c = phi.check();
            out.summary = format!("{name}: base {}, fiber {}, connection {}", c.base_ok, c.fiber_ok, c.connection_ok);
            out = out.with("morphism", json!({"base_ok": c.base_ok, "fiber_ok": c.fiber_ok, "connection_ok": c.connection_ok}));
        }
        (Obj::Algebroid(a), None) => {
            let rep = algd::constraint_conditions(a).map_err(|e| SceneError::at(format!("objects.{name}"), e))?;
            out.summary = format!("{name}: constraint conditions {}", if rep.pass() { "hold" } else { "fail" });
            out = out.with("conditions", serde_json::to_value(&rep.verdicts).expect("plain data"));
        }
        (Obj::Bialgebroid(b), None) => {
            let mut all = Vec::new();
            for (prefix, a) in [("a", &b.a), ("astar", &b.astar)] {
                let rep = algd::constraint_conditions(a).map_err(|e| SceneError::at(format!("objects.{name}"), e))?;
                all.extend(rep.verdicts.into_iter().map(|v| Verdict { name: format!("{prefix}.{}", v.name), ..v }));
            }
            out.summary = format!("{name}: constraint conditions {}", if all.iter().all(|v| v.pass) { "hold" } else { "fail" });
            out = out.with("conditions", serde_json::to_value(&all).expect("plain data"));
        }
        _ => unreachable!("every kind without a class is handled"),
    }
    Ok(out)
}

fn reduce_obj(o: &Obj) -> Result<Obj, (String, String)> {
    fn err(e: impl Debug + std::fmt::Display) -> (String, String) {
        (error_code(&e), e.to_string())
    }
    Ok(match o {
        Obj::Function(s, f) => Obj::Function(s.reduced(), s.fn_reduce(f).map_err(err)?),
        Obj::Field(x) => Obj::Field(x.reduce().map_err(err)?),
        Obj::Form(w) => Obj::Form(w.reduce().map_err(err)?),
        Obj::Multivector(m) => Obj::Multivector(m.reduce().map_err(err)?),
        Obj::EndField(a) => Obj::EndField(a.reduce().map_err(err)?),
        Obj::Bundle(b) => Obj::Bundle(b.reduce()),
        Obj::Section(s) => Obj::Section(s.reduce().map_err(err)?),
        Obj::Morphism(phi, algs) => {
            let algs = match algs {
                Some(ab) => Some(Box::new((
                    algd::reduce_algebroid(&ab.0).map_err(err)?,
                    algd::reduce_algebroid(&ab.1).map_err(err)?,
                ))),
                None => None,
            };
            Obj::Morphism(phi.reduce().map_err(err)?, algs)
        }
        Obj::Algebroid(a) => Obj::Algebroid(algd::reduce_algebroid(a).map_err(err)?),
        Obj::Bialgebroid(b) => Obj::Bialgebroid(
            BialgebroidData::new(algd::reduce_algebroid(&b.a).map_err(err)?, algd::reduce_algebroid(&b.astar).map_err(err)?)
                .map_err(err)?,
        ),
        Obj::Poisson(p) => Obj::Poisson(dirac::reduce_poisson(p).map_err(err)?),
        Obj::Presymplectic(q) => Obj::Presymplectic(dirac::reduce_presymplectic(q).map_err(err)?),
        Obj::Dirac(g) => Obj::Dirac(dirac::dirac_reduce(g).map_err(err)?),
        Obj::Pn(s) => Obj::Pn(dirac::reduce_pn(s).map_err(err)?),
    })
}

pub fn reduce(scene: &Scene, name: &str) -> Result<Outcome, SceneError> {
    let o = scene.get(name)?;
    Ok(match reduce_obj(&o) {
        Ok(r) => Outcome::new(EXIT_PASS, format!("{name}: reduced {} on ℝ^{}", r.kind(), emit::base(&r).dim.t))
            .with("verdicts", json!([Verdict { name: "reduce".into(), pass: true, witness: None }]))
            .with("reduced", emit::scene(name, &r)),
        Err((code, message)) => {
            let v = Verdict { name: "reduce".into(), pass: false, witness: Some(code.clone()) };
            Outcome::new(EXIT_FAIL, format!("{name}: cannot reduce ({code}: {message})"))
                .with("verdicts", json!([v]))
                .with("message", Value::String(message))
        }
    })
}

pub fn check(kind: CheckKind, scene: &Scene, name: &str) -> Result<Outcome, SceneError> {
    let o = scene.get(name)?;
    let loc = format!("objects.{name}");
    let subject = format!("check {name}");
    Ok(match kind {
        CheckKind::Poisson => verdicts_outcome(&subject, &dirac::check_poisson(&as_poisson(o).map_err(|m| SceneError::at(&loc, m))?)),
        CheckKind::Presymplectic => {
            verdicts_outcome(&subject, &dirac::check_presymplectic(&as_presymplectic(o).map_err(|m| SceneError::at(&loc, m))?))
        }
        CheckKind::Dirac => {
            let g = match o {
                Obj::Dirac(g) => g,
                Obj::Poisson(_) | Obj::Multivector(_) => DiracGraph::Bivector(as_poisson(o).map_err(|m| SceneError::at(&loc, m))?),
                Obj::Presymplectic(_) | Obj::Form(_) => {
                    DiracGraph::TwoForm(as_presymplectic(o).map_err(|m| SceneError::at(&loc, m))?)
                }
                other => return Err(wrong_kind(name, &other, "a Dirac graph")),
            };
            verdicts_outcome(&subject, &dirac::dirac_check(&g))
        }
        CheckKind::Algebroid => {
            let a = match o {
                Obj::Algebroid(a) => a,
                other => return Err(wrong_kind(name, &other, "an algebroid")),
            };
            let mut rep = algd::check_classical(&a);
            match algd::constraint_conditions(&a) {
                Ok(c) => rep.extend(c),
                Err(e) => return Ok(failure(&subject, "constraint", &e)),
            }
            verdicts_outcome(&subject, &rep)
        }
        CheckKind::Bialgebroid => {
            let b = match o {
                Obj::Bialgebroid(b) => b,
                other => return Err(wrong_kind(name, &other, "a bialgebroid")),
            };
            match algd::check_bialgebroid(&b) {
                Ok(rep) => verdicts_outcome(&subject, &rep),
                Err(e) => failure(&subject, "constituents", &e),
            }
        }
        CheckKind::Morphism | CheckKind::Comorphism => {
            let (phi, algs) = match o {
                Obj::Morphism(phi, Some(algs)) => (phi, algs),
                Obj::Morphism(_, None) => return Err(SceneError::at(loc, "the morphism needs `algebroids: [source, target]`")),
                other => return Err(wrong_kind(name, &other, "a morphism")),
            };
            let res = if kind == CheckKind::Morphism {
                algd::check_morphism(&phi, &algs.0, &algs.1)
            } else {
                algd::check_comorphism(&phi, &algs.0, &algs.1)
            };
            match res {
                Ok(rep) => verdicts_outcome(&subject, &rep),
                Err(e) => failure(&subject, "bundle_morphism", &e),
            }
        }
        CheckKind::Pn => match o {
            Obj::Pn(s) => verdicts_outcome(&subject, &dirac::check_pn(&s)),
            other => return Err(wrong_kind(name, &other, "a Poisson–Nijenhuis pair")),
        },
        CheckKind::BundleMorphism => match o {
            Obj::Morphism(phi, _) => {
                let c = phi.check();
                let mut rep = Report::new(name);
                rep.flag("base", c.base_ok);
                rep.flag("fiber", c.fiber_ok);
                rep.flag("connection", c.connection_ok);
                verdicts_outcome(&subject, &rep)
            }
            other => return Err(wrong_kind(name, &other, "a morphism")),
        },
    })
}

fn field(scene: &Scene, name: &str) -> Result<VectorField, SceneError> {
    match scene.get(name)? {
        Obj::Field(x) => Ok(x),
        other => Err(wrong_kind(name, &other, "a vector field")),
    }
}

fn form(scene: &Scene, name: &str) -> Result<KForm, SceneError> {
    match scene.get(name)? {
        Obj::Form(w) => Ok(w),
        Obj::Function(s, f) => Ok(KForm::function(s, Flavor::Strong, f)),
        other => Err(wrong_kind(name, &other, "a form")),
    }
}

fn multivector(scene: &Scene, name: &str) -> Result<MultiVector, SceneError> {
    match scene.get(name)? {
        Obj::Multivector(m) => Ok(m),
        Obj::Poisson(p) => Ok(p.pi),
        Obj::Field(x) => Ok(x.to_mv(Flavor::Strong)),
        Obj::Function(s, f) => Ok(MultiVector::function(s, Flavor::Strong, f)),
        other => Err(wrong_kind(name, &other, "a multivector field")),
    }
}

fn arity(op: CartanOp, names: &[String], n: usize) -> Result<(), SceneError> {
    if names.len() == n {
        Ok(())
    } else {
        Err(SceneError::at("arguments", format!("`{op:?}` takes {n} object names, got {}", names.len())))
    }
}

pub fn cartan_op(op: CartanOp, scene: &Scene, names: &[String]) -> Result<Outcome, SceneError> {
    let calc = |e: cartan::CartanError| SceneError::at("arguments", e);
    let label = format!("{op:?}").to_lowercase();
    let result: Value = match op {
        CartanOp::D => {
            arity(op, names, 1)?;
            emit::object(&Obj::Form(cartan::de_rham(&form(scene, &names[0])?).map_err(calc)?))
        }
        CartanOp::Lie => {
            arity(op, names, 2)?;
            let x = field(scene, &names[0])?;
            match scene.get(&names[1])? {
                Obj::Field(y) => emit::field(&cartan::vf_bracket(&x, &y).map_err(calc)?),
                Obj::Function(s, f) => emit::object(&Obj::Function(s, cartan::lie_derivative_fn(&x, &f))),
                _ => emit::object(&Obj::Form(cartan::lie_derivative(&x, &form(scene, &names[1])?).map_err(calc)?)),
            }
        }
        CartanOp::Insert => {
            arity(op, names, 2)?;
            let x = field(scene, &names[0])?;
            emit::object(&Obj::Form(cartan::insertion(&x, &form(scene, &names[1])?).map_err(calc)?))
        }
        CartanOp::Schouten => {
            arity(op, names, 2)?;
            let (p, q) = (multivector(scene, &names[0])?, multivector(scene, &names[1])?);
            emit::object(&Obj::Multivector(cartan::schouten(&p, &q).map_err(calc)?))
        }
        CartanOp::Courant => {
            arity(op, names, 4)?;
            let (x, a) = (field(scene, &names[0])?, form(scene, &names[1])?);
            let (y, b) = (field(scene, &names[2])?, form(scene, &names[3])?);
            let (z, c) = cartan::courant(&x, &a, &y, &b).map_err(calc)?;
            json!({"field": emit::field(&z), "form": emit::object(&Obj::Form(c))})
        }
        CartanOp::Nijenhuis => {
            arity(op, names, 1)?;
            let a = match scene.get(&names[0])? {
                Obj::EndField(a) => a,
                other => return Err(wrong_kind(&names[0], &other, "an endfield")),
            };
            let torsion: Map<String, Value> =
                cartan::nijenhuis(&a).iter().map(|(&(i, j), v)| (format_tuple(&[i, j]), emit::field(v))).collect();
            Value::Object(torsion)
        }
        CartanOp::Bracket => match scene.get(&names.first().cloned().unwrap_or_default())? {
            Obj::Algebroid(alg) => {
                arity(op, names, 3)?;
                let sec = |n: &str| match scene.get(n)? {
                    Obj::Section(s) => Ok(s),
                    other => Err(wrong_kind(n, &other, "a section")),
                };
                let s = alg.bracket(&sec(&names[1])?, &sec(&names[2])?).map_err(|e| SceneError::at("arguments", e))?;
                emit::object(&Obj::Section(s))
            }
            _ => {
                arity(op, names, 2)?;
                emit::field(&cartan::vf_bracket(&field(scene, &names[0])?, &field(scene, &names[1])?).map_err(calc)?)
            }
        },
    };
    Ok(Outcome::new(EXIT_PASS, format!("cartan {label} {}: done", names.join(" "))).with("result", result))
}

pub fn run_selftest(seed: u64, sequential: bool) -> Outcome {
    let mode = if sequential { Mode::Sequential } else { Mode::Parallel };
    let rep = selftest::run_all(seed, mode);
    verdicts_outcome("selftest", &rep).with("seed", json!(seed))
}
