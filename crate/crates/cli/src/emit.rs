//! Objects back to scene JSON; every emitted object is self-contained.

use conred::algd::AlgebroidData;
use conred::cartan::{Alt, EndField, Variance, VectorField};
use conred::cgeo::{BundleMorphism, ConSpace, TrivBundle};
use conred::cindex::Flavor;
use conred::dirac::DiracGraph;
use conred::poly::Poly;
use serde_json::{json, Map, Value};

use crate::scene::{format_tuple, Obj};

pub fn space(s: &ConSpace) -> Value {
    json!({"t": s.dim.t, "w": s.dim.w, "n": s.dim.n})
}

fn polys(v: &[Poly]) -> Value {
    Value::Array(v.iter().map(|p| Value::String(p.to_string())).collect())
}

fn rows(m: &[Vec<Poly>]) -> Value {
    Value::Array(m.iter().map(|r| polys(r)).collect())
}

fn alt<V: Variance>(kind: &str, a: &Alt<V>) -> Value {
    let comps: Map<String, Value> =
        a.comps().iter().map(|(t, f)| (format_tuple(t), Value::String(f.to_string()))).collect();
    let flavor = match a.flavor {
        Flavor::Strong => "strong",
        Flavor::Tensor => "tensor",
    };
    json!({"kind": kind, "space": space(&a.space), "degree": a.degree, "flavor": flavor, "components": comps})
}

pub fn field(x: &VectorField) -> Value {
    json!({"kind": "field", "space": space(&x.space), "components": polys(&x.comps)})
}

fn endfield(a: &EndField) -> Value {
    json!({"kind": "endfield", "space": space(&a.space), "matrix": rows(&a.matrix)})
}

fn bundle(b: &TrivBundle) -> Value {
    let classes: Vec<&str> = b.classes.iter().map(|c| c.short()).collect();
    json!({"kind": "bundle", "space": space(&b.base), "classes": classes})
}

fn morphism(phi: &BundleMorphism) -> Value {
    json!({
        "kind": "morphism",
        "source": bundle(&phi.source),
        "target": bundle(&phi.target),
        "base_map": polys(&phi.base_map),
        "matrix": rows(&phi.matrix),
    })
}

fn algebroid(a: &AlgebroidData) -> Value {
    let k = a.rank();
    let mut structure = Map::new();
    for i in 0..k {
        for j in i + 1..k {
            let c = &a.structure[i][j];
            if c.iter().any(|p| !p.is_zero()) {
                structure.insert(format_tuple(&[i, j]), polys(c));
            }
        }
    }
    json!({"kind": "algebroid", "bundle": bundle(&a.bundle), "anchor": rows(&a.anchor), "structure": structure})
}

pub fn object(o: &Obj) -> Value {
    match o {
        Obj::Function(s, f) => json!({"kind": "function", "space": space(s), "poly": f.to_string()}),
        Obj::Field(x) => field(x),
        Obj::Form(w) => alt("form", w),
        Obj::Multivector(m) => alt("multivector", m),
        Obj::EndField(a) => endfield(a),
        Obj::Bundle(b) => bundle(b),
        Obj::Section(s) => json!({"kind": "section", "bundle": bundle(&s.bundle), "components": polys(&s.components)}),
        Obj::Morphism(phi, algs) => {
            let mut v = morphism(phi);
            if let Some(ab) = algs {
                v["algebroids"] = json!([algebroid(&ab.0), algebroid(&ab.1)]);
            }
            v
        }
        Obj::Algebroid(a) => algebroid(a),
        Obj::Bialgebroid(b) => json!({"kind": "bialgebroid", "a": algebroid(&b.a), "astar": algebroid(&b.astar)}),
        Obj::Poisson(p) => json!({"kind": "poisson", "bivector": alt("multivector", &p.pi)}),
        Obj::Presymplectic(q) => json!({"kind": "presymplectic", "form": alt("form", &q.omega)}),
        Obj::Dirac(DiracGraph::Bivector(p)) => json!({"kind": "dirac", "bivector": alt("multivector", &p.pi)}),
        Obj::Dirac(DiracGraph::TwoForm(q)) => json!({"kind": "dirac", "form": alt("form", &q.omega)}),
        Obj::Pn(s) => json!({"kind": "pn", "poisson": alt("multivector", &s.pi.pi), "endfield": endfield(&s.a)}),
    }
}

/// Base space an object lives on (the source base for morphisms).
pub fn base(o: &Obj) -> ConSpace {
    match o {
        Obj::Function(s, _) => *s,
        Obj::Field(x) => x.space,
        Obj::Form(w) => w.space,
        Obj::Multivector(m) => m.space,
        Obj::EndField(a) => a.space,
        Obj::Bundle(b) => b.base,
        Obj::Section(s) => s.bundle.base,
        Obj::Morphism(phi, _) => phi.source.base,
        Obj::Algebroid(a) => a.base,
        Obj::Bialgebroid(b) => b.a.base,
        Obj::Poisson(p) => p.space(),
        Obj::Presymplectic(q) => q.space(),
        Obj::Dirac(g) => g.space(),
        Obj::Pn(s) => s.pi.space(),
    }
}

/// A one-object scene that can be fed back to the tool.
pub fn scene(name: &str, o: &Obj) -> Value {
    let mut objects = Map::new();
    objects.insert(name.to_string(), object(o));
    json!({"space": space(&base(o)), "objects": objects})
}
