//! Scene files: a JSON description of a flat constraint space and named objects.

use std::collections::BTreeMap;

use conred::algd::{AlgebroidData, BialgebroidData};
use conred::cartan::{EndField, KForm, MultiVector, Variance, VectorField, Alt};
use conred::cgeo::{BundleMorphism, ClassedSection, ConSpace, TrivBundle};
use conred::cindex::{Flavor, SlotClass};
use conred::dirac::{DiracGraph, PNData, PoissonData, PresymplecticData};
use conred::poly::Poly;
use serde::Deserialize;
use thiserror::Error;

/// Resolution depth beyond which references are assumed to be cyclic.
const MAX_DEPTH: usize = 32;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{location}: {message}")]
    Malformed { location: String, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
}

impl SceneError {
    pub fn at(location: impl Into<String>, message: impl ToString) -> SceneError {
        SceneError::Malformed { location: location.into(), message: message.to_string() }
    }

    pub fn location(&self) -> Option<&str> {
        match self {
            SceneError::Malformed { location, .. } => Some(location),
            SceneError::UnknownIdent(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpace {
    pub t: usize,
    pub w: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAlt {
    pub degree: usize,
    #[serde(default)]
    pub flavor: Option<String>,
    #[serde(default)]
    pub components: BTreeMap<String, String>,
    #[serde(default)]
    pub space: Option<RawSpace>,
}

/// A reference to another object: its name, or the object written inline.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Ref {
    Name(String),
    Inline(Box<RawObj>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RawObj {
    Function {
        poly: String,
        #[serde(default)]
        space: Option<RawSpace>,
    },
    Field {
        components: Vec<String>,
        #[serde(default)]
        space: Option<RawSpace>,
    },
    Form(RawAlt),
    Multivector(RawAlt),
    Endfield {
        matrix: Vec<Vec<String>>,
        #[serde(default)]
        space: Option<RawSpace>,
    },
    Bundle {
        #[serde(default)]
        classes: Option<Vec<String>>,
        #[serde(default)]
        of: Option<String>,
        #[serde(default)]
        space: Option<RawSpace>,
    },
    Section {
        bundle: Ref,
        components: Vec<String>,
    },
    Morphism {
        source: Ref,
        target: Ref,
        #[serde(default)]
        base_map: Option<Vec<String>>,
        matrix: Vec<Vec<String>>,
        #[serde(default)]
        algebroids: Option<(Ref, Ref)>,
    },
    Algebroid {
        bundle: Ref,
        anchor: Vec<Vec<String>>,
        #[serde(default)]
        structure: BTreeMap<String, Vec<String>>,
    },
    Bialgebroid {
        a: Ref,
        astar: Ref,
    },
    Poisson {
        bivector: Ref,
    },
    Presymplectic {
        form: Ref,
    },
    Dirac {
        #[serde(default)]
        bivector: Option<Ref>,
        #[serde(default)]
        form: Option<Ref>,
    },
    Pn {
        poisson: Ref,
        endfield: Ref,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    space: RawSpace,
    #[serde(default)]
    objects: BTreeMap<String, RawObj>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Obj {
    Function(ConSpace, Poly),
    Field(VectorField),
    Form(KForm),
    Multivector(MultiVector),
    EndField(EndField),
    Bundle(TrivBundle),
    Section(ClassedSection),
    Morphism(BundleMorphism, Option<Box<(AlgebroidData, AlgebroidData)>>),
    Algebroid(AlgebroidData),
    Bialgebroid(BialgebroidData),
    Poisson(PoissonData),
    Presymplectic(PresymplecticData),
    Dirac(DiracGraph),
    Pn(PNData),
}

impl Obj {
    pub fn kind(&self) -> &'static str {
        match self {
            Obj::Function(..) => "function",
            Obj::Field(_) => "field",
            Obj::Form(_) => "form",
            Obj::Multivector(_) => "multivector",
            Obj::EndField(_) => "endfield",
            Obj::Bundle(_) => "bundle",
            Obj::Section(_) => "section",
            Obj::Morphism(..) => "morphism",
            Obj::Algebroid(_) => "algebroid",
            Obj::Bialgebroid(_) => "bialgebroid",
            Obj::Poisson(_) => "poisson",
            Obj::Presymplectic(_) => "presymplectic",
            Obj::Dirac(_) => "dirac",
            Obj::Pn(_) => "pn",
        }
    }
}

pub struct Scene {
    pub space: ConSpace,
    objects: BTreeMap<String, RawObj>,
}

fn space_of(raw: RawSpace, location: &str) -> Result<ConSpace, SceneError> {
    ConSpace::new(raw.t, raw.w, raw.n).map_err(|e| SceneError::at(format!("{location}.space"), e))
}

fn poly(s: &str, nvars: usize, location: &str) -> Result<Poly, SceneError> {
    Poly::parse(s, nvars).map_err(|e| SceneError::at(location, e))
}

fn polys(v: &[String], nvars: usize, location: &str) -> Result<Vec<Poly>, SceneError> {
    v.iter().enumerate().map(|(i, s)| poly(s, nvars, &format!("{location}[{i}]"))).collect()
}

fn matrix(rows: &[Vec<String>], nvars: usize, location: &str) -> Result<Vec<Vec<Poly>>, SceneError> {
    rows.iter().enumerate().map(|(r, row)| polys(row, nvars, &format!("{location}[{r}]"))).collect()
}

/// Parses a 1-based, strictly increasing key such as `"[1,3]"` into 0-based indices.
pub fn parse_tuple(key: &str, location: &str) -> Result<Vec<usize>, SceneError> {
    let inner = key
        .trim()
        .strip_prefix('[')
        .and_then(|k| k.strip_suffix(']'))
        .ok_or_else(|| SceneError::at(location, format!("key `{key}` is not of the form [i,j,...]")))?;
    let mut out = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let i: usize = part.parse().map_err(|_| SceneError::at(location, format!("bad index `{part}` in `{key}`")))?;
        if i == 0 {
            return Err(SceneError::at(location, format!("indices are 1-based in `{key}`")));
        }
        if out.last().is_some_and(|&last| last >= i - 1) {
            return Err(SceneError::at(location, format!("key `{key}` is not strictly increasing")));
        }
        out.push(i - 1);
    }
    Ok(out)
}

pub fn format_tuple(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(|i| (i + 1).to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn flavor(s: Option<&str>, location: &str) -> Result<Flavor, SceneError> {
    match s.unwrap_or("strong") {
        "strong" => Ok(Flavor::Strong),
        "tensor" => Ok(Flavor::Tensor),
        other => Err(SceneError::at(location, format!("unknown flavor `{other}`"))),
    }
}

fn classes(v: &[String], location: &str) -> Result<Vec<SlotClass>, SceneError> {
    v.iter()
        .map(|c| SlotClass::from_short(c).ok_or_else(|| SceneError::at(location, format!("unknown slot class `{c}`, expected N, W or T"))))
        .collect()
}

impl Scene {
    pub fn parse(text: &str) -> Result<Scene, SceneError> {
        let raw: RawScene = serde_json::from_str(text)
            .map_err(|e| SceneError::at(format!("line {} column {}", e.line(), e.column()), e))?;
        let space = space_of(raw.space, "scene")?;
        Ok(Scene { space, objects: raw.objects })
    }

    pub fn get(&self, name: &str) -> Result<Obj, SceneError> {
        let raw = self.objects.get(name).ok_or_else(|| SceneError::UnknownIdent(name.into()))?;
        self.build(raw, &format!("objects.{name}"), 0)
    }

    fn resolve(&self, r: &Ref, location: &str, depth: usize) -> Result<Obj, SceneError> {
        if depth > MAX_DEPTH {
            return Err(SceneError::at(location, "reference cycle"));
        }
        match r {
            Ref::Name(n) => {
                let raw = self.objects.get(n).ok_or_else(|| SceneError::UnknownIdent(n.clone()))?;
                self.build(raw, &format!("objects.{n}"), depth + 1)
            }
            Ref::Inline(raw) => self.build(raw, location, depth + 1),
        }
    }

    fn space(&self, raw: Option<RawSpace>, location: &str) -> Result<ConSpace, SceneError> {
        raw.map_or(Ok(self.space), |s| space_of(s, location))
    }

    fn alt<V: Variance>(&self, raw: &RawAlt, location: &str) -> Result<Alt<V>, SceneError> {
        let space = self.space(raw.space, location)?;
        let fl = flavor(raw.flavor.as_deref(), &format!("{location}.flavor"))?;
        let mut a = Alt::<V>::zero(space, raw.degree, fl);
        for (key, value) in &raw.components {
            let loc = format!("{location}.components.{key}");
            let t = parse_tuple(key, &loc)?;
            if t.len() != raw.degree {
                return Err(SceneError::at(loc, format!("expected {} indices", raw.degree)));
            }
            if t.iter().any(|&i| i >= space.nvars()) {
                return Err(SceneError::at(loc, "index out of range"));
            }
            a.try_add_term(&t, poly(value, space.nvars(), &loc)?).map_err(|e| SceneError::at(&loc, e))?;
        }
        Ok(a)
    }

    fn bundle(&self, r: &Ref, location: &str, depth: usize) -> Result<TrivBundle, SceneError> {
        match self.resolve(r, location, depth)? {
            Obj::Bundle(b) => Ok(b),
            other => Err(SceneError::at(location, format!("expected a bundle, found a {}", other.kind()))),
        }
    }

    fn algebroid(&self, r: &Ref, location: &str, depth: usize) -> Result<AlgebroidData, SceneError> {
        match self.resolve(r, location, depth)? {
            Obj::Algebroid(a) => Ok(a),
            other => Err(SceneError::at(location, format!("expected an algebroid, found a {}", other.kind()))),
        }
    }

    fn build(&self, raw: &RawObj, location: &str, depth: usize) -> Result<Obj, SceneError> {
        let at = |field: &str| format!("{location}.{field}");
        Ok(match raw {
            RawObj::Function { poly: p, space } => {
                let space = self.space(*space, location)?;
                Obj::Function(space, poly(p, space.nvars(), &at("poly"))?)
            }
            RawObj::Field { components, space } => {
                let space = self.space(*space, location)?;
                let comps = polys(components, space.nvars(), &at("components"))?;
                Obj::Field(VectorField::new(space, comps).map_err(|e| SceneError::at(at("components"), e))?)
            }
            RawObj::Form(a) => Obj::Form(self.alt(a, location)?),
            RawObj::Multivector(a) => Obj::Multivector(self.alt(a, location)?),
            RawObj::Endfield { matrix: m, space } => {
                let space = self.space(*space, location)?;
                let m = matrix(m, space.nvars(), &at("matrix"))?;
                Obj::EndField(EndField::new(space, m).map_err(|e| SceneError::at(at("matrix"), e))?)
            }
            RawObj::Bundle { classes: c, of, space } => {
                let space = self.space(*space, location)?;
                match (c, of.as_deref()) {
                    (Some(c), None) => Obj::Bundle(TrivBundle::new(space, classes(c, &at("classes"))?)),
                    (None, Some("tangent")) => Obj::Bundle(TrivBundle::tangent(space)),
                    (None, Some("cotangent")) => Obj::Bundle(TrivBundle::cotangent(space)),
                    _ => return Err(SceneError::at(location, "give either `classes` or `of`: tangent | cotangent")),
                }
            }
            RawObj::Section { bundle, components } => {
                let b = self.bundle(bundle, &at("bundle"), depth)?;
                let comps = polys(components, b.base.nvars(), &at("components"))?;
                Obj::Section(ClassedSection::new(b, comps).map_err(|e| SceneError::at(at("components"), e))?)
            }
            RawObj::Morphism { source, target, base_map, matrix: m, algebroids } => {
                let src = self.bundle(source, &at("source"), depth)?;
                let tgt = self.bundle(target, &at("target"), depth)?;
                let n = src.base.nvars();
                let base = match base_map {
                    Some(b) => polys(b, n, &at("base_map"))?,
                    None if tgt.base == src.base => (0..n).map(|i| Poly::var(n, i)).collect(),
                    None => return Err(SceneError::at(location, "`base_map` is required between different spaces")),
                };
                let m = matrix(m, n, &at("matrix"))?;
                let phi = BundleMorphism::new(src, tgt, base, m).map_err(|e| SceneError::at(location, e))?;
                let algs = match algebroids {
                    Some((a, b)) => Some(Box::new((
                        self.algebroid(a, &at("algebroids[0]"), depth)?,
                        self.algebroid(b, &at("algebroids[1]"), depth)?,
                    ))),
                    None => None,
                };
                Obj::Morphism(phi, algs)
            }
            RawObj::Algebroid { bundle, anchor, structure } => {
                let b = self.bundle(bundle, &at("bundle"), depth)?;
                let (n, k) = (b.base.nvars(), b.rank());
                let anchor = matrix(anchor, n, &at("anchor"))?;
                let mut st = vec![vec![vec![Poly::zero(n); k]; k]; k];
                for (key, vals) in structure {
                    let loc = format!("{location}.structure.{key}");
                    let t = parse_tuple(key, &loc)?;
                    if t.len() != 2 || t[1] >= k {
                        return Err(SceneError::at(loc, "expected a pair of frame indices"));
                    }
                    let c = polys(vals, n, &loc)?;
                    if c.len() != k {
                        return Err(SceneError::at(loc, format!("expected {k} coefficients")));
                    }
                    st[t[1]][t[0]] = c.iter().map(|p| -p).collect();
                    st[t[0]][t[1]] = c;
                }
                Obj::Algebroid(AlgebroidData::new(b, anchor, st).map_err(|e| SceneError::at(location, e))?)
            }
            RawObj::Bialgebroid { a, astar } => {
                let a = self.algebroid(a, &at("a"), depth)?;
                let astar = self.algebroid(astar, &at("astar"), depth)?;
                Obj::Bialgebroid(BialgebroidData::new(a, astar).map_err(|e| SceneError::at(location, e))?)
            }
            RawObj::Poisson { bivector } => Obj::Poisson(self.poisson(bivector, &at("bivector"), depth)?),
            RawObj::Presymplectic { form } => Obj::Presymplectic(self.presymplectic(form, &at("form"), depth)?),
            RawObj::Dirac { bivector, form } => match (bivector, form) {
                (Some(b), None) => Obj::Dirac(DiracGraph::Bivector(self.poisson(b, &at("bivector"), depth)?)),
                (None, Some(f)) => Obj::Dirac(DiracGraph::TwoForm(self.presymplectic(f, &at("form"), depth)?)),
                _ => return Err(SceneError::at(location, "give exactly one of `bivector` and `form`")),
            },
            RawObj::Pn { poisson, endfield } => {
                let p = self.poisson(poisson, &at("poisson"), depth)?;
                let a = match self.resolve(endfield, &at("endfield"), depth)? {
                    Obj::EndField(a) => a,
                    other => return Err(SceneError::at(at("endfield"), format!("expected an endfield, found a {}", other.kind()))),
                };
                Obj::Pn(PNData::new(p, a).map_err(|e| SceneError::at(location, e))?)
            }
        })
    }

    fn poisson(&self, r: &Ref, location: &str, depth: usize) -> Result<PoissonData, SceneError> {
        as_poisson(self.resolve(r, location, depth)?).map_err(|m| SceneError::at(location, m))
    }

    fn presymplectic(&self, r: &Ref, location: &str, depth: usize) -> Result<PresymplecticData, SceneError> {
        as_presymplectic(self.resolve(r, location, depth)?).map_err(|m| SceneError::at(location, m))
    }
}

pub fn as_poisson(o: Obj) -> Result<PoissonData, String> {
    match o {
        Obj::Poisson(p) => Ok(p),
        Obj::Multivector(m) => PoissonData::new(m).map_err(|e| e.to_string()),
        other => Err(format!("expected a bivector, found a {}", other.kind())),
    }
}

pub fn as_presymplectic(o: Obj) -> Result<PresymplecticData, String> {
    match o {
        Obj::Presymplectic(p) => Ok(p),
        Obj::Form(w) => PresymplecticData::new(w).map_err(|e| e.to_string()),
        other => Err(format!("expected a 2-form, found a {}", other.kind())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_keys() {
        assert_eq!(parse_tuple("[1,3]", "k").unwrap(), vec![0, 2]);
        assert_eq!(parse_tuple("[ 2 ]", "k").unwrap(), vec![1]);
        assert_eq!(parse_tuple("[]", "k").unwrap(), Vec::<usize>::new());
        assert!(parse_tuple("[3,1]", "k").is_err());
        assert!(parse_tuple("[1,1]", "k").is_err());
        assert!(parse_tuple("[0,1]", "k").is_err());
        assert!(parse_tuple("1,2", "k").is_err());
        assert_eq!(format_tuple(&[0, 2]), "[1,3]");
    }

    #[test]
    fn references_and_inline_objects() {
        let s = Scene::parse(
            r#"{"space": {"t": 2, "w": 1, "n": 1},
                "objects": {
                  "E": {"kind": "bundle", "classes": ["N", "W"]},
                  "s": {"kind": "section", "bundle": "E", "components": ["x1", "x2"]},
                  "u": {"kind": "section", "bundle": {"kind": "bundle", "of": "tangent"}, "components": ["0", "1"]},
                  "loop": {"kind": "section", "bundle": "loop", "components": []}
                }}"#,
        )
        .unwrap();
        assert!(matches!(s.get("s").unwrap(), Obj::Section(_)));
        assert!(matches!(s.get("u").unwrap(), Obj::Section(_)));
        assert!(matches!(s.get("nope"), Err(SceneError::UnknownIdent(_))));
        assert!(s.get("loop").is_err());
    }

    #[test]
    fn errors_carry_locations() {
        let e = Scene::parse(r#"{"space": {"t": 1, "w": 1, "n": 0}, "objects": {"f": {"kind": "function", "poly": "x1 +"}}}"#)
            .unwrap()
            .get("f")
            .unwrap_err();
        assert_eq!(e.location(), Some("objects.f.poly"));
        let e = Scene::parse("{\"space\": {\"t\": 1,\n \"w\": }}").err().unwrap();
        assert!(e.location().unwrap().starts_with("line 2"));
    }
}
