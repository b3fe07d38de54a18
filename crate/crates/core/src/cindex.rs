//! Constraint index sets `N ⊆ W ⊆ T` and the slot-class rules they induce.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("operation {op} expects {expected} operand(s)")]
    ArityMismatch { op: &'static str, expected: usize },
    #[error("label map is undefined on {0}")]
    PartialMap(Label),
    #[error("degree {degree} exceeds the {slots} available slots")]
    DegreeTooLarge { degree: usize, slots: usize },
    #[error("nesting N ⊆ W ⊆ T violated")]
    NotNested,
}

/// Label of an index set element. Products and disjoint unions build
/// structured labels so that iterated constructions stay unambiguous.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Atom(u32),
    Pair(Box<Label>, Box<Label>),
    Left(Box<Label>),
    Right(Box<Label>),
}

impl Label {
    pub fn pair(a: &Label, b: &Label) -> Label {
        Label::Pair(Box::new(a.clone()), Box::new(b.clone()))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Atom(a) => write!(f, "{a}"),
            Label::Pair(a, b) => write!(f, "({a},{b})"),
            Label::Left(a) => write!(f, "L{a}"),
            Label::Right(a) => write!(f, "R{a}"),
        }
    }
}

pub type LabelSet = BTreeSet<Label>;

/// Membership class of a single label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SlotClass {
    /// In `N`.
    Null,
    /// In `W ∖ N`.
    WobsOnly,
    /// In `T ∖ W`.
    TotalOnly,
}

impl SlotClass {
    pub fn in_wobs(self) -> bool {
        self != SlotClass::TotalOnly
    }

    pub fn in_null(self) -> bool {
        self == SlotClass::Null
    }

    /// Class of the same label in the dual index set.
    pub fn dual(self) -> SlotClass {
        match self {
            SlotClass::Null => SlotClass::TotalOnly,
            SlotClass::WobsOnly => SlotClass::WobsOnly,
            SlotClass::TotalOnly => SlotClass::Null,
        }
    }

    /// Class of a pair label in `M ⊗ N` or `M ⊠ N`.
    pub fn combine(self, other: SlotClass, flavor: Flavor) -> SlotClass {
        let (aw, an, bw, bn) = (self.in_wobs(), self.in_null(), other.in_wobs(), other.in_null());
        let (w, n) = match flavor {
            Flavor::Tensor => (aw && bw, (aw && bn) || (an && bw)),
            Flavor::Strong => (aw && bw || an || bn, an || bn),
        };
        match (w, n) {
            (_, true) => SlotClass::Null,
            (true, false) => SlotClass::WobsOnly,
            (false, false) => SlotClass::TotalOnly,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            SlotClass::Null => "N",
            SlotClass::WobsOnly => "W",
            SlotClass::TotalOnly => "T",
        }
    }

    pub fn from_short(s: &str) -> Option<SlotClass> {
        match s {
            "N" => Some(SlotClass::Null),
            "W" => Some(SlotClass::WobsOnly),
            "T" => Some(SlotClass::TotalOnly),
            _ => None,
        }
    }
}

/// Which of the two monoidal products is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Tensor,
    Strong,
}

/// Cardinalities `(n_T, n_W, n_N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConDim {
    pub t: usize,
    pub w: usize,
    pub n: usize,
}

impl ConDim {
    pub fn new(t: usize, w: usize, n: usize) -> Option<ConDim> {
        (n <= w && w <= t).then_some(ConDim { t, w, n })
    }

    pub fn red(&self) -> usize {
        self.w - self.n
    }
}

impl fmt::Display for ConDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.t, self.w, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConIndexSet {
    total: LabelSet,
    wobs: LabelSet,
    null: LabelSet,
}

impl ConIndexSet {
    pub fn new(total: LabelSet, wobs: LabelSet, null: LabelSet) -> Result<Self, IndexError> {
        if !null.is_subset(&wobs) || !wobs.is_subset(&total) {
            return Err(IndexError::NotNested);
        }
        Ok(ConIndexSet { total, wobs, null })
    }

    /// Atoms `1..=t` with the first `n` in `N` and the first `w` in `W`.
    pub fn from_counts(d: ConDim) -> Self {
        let atoms = |k: usize| (1..=k as u32).map(Label::Atom).collect::<LabelSet>();
        ConIndexSet { total: atoms(d.t), wobs: atoms(d.w), null: atoms(d.n) }
    }

    /// Atoms `1..=len` classed by `classes`.
    pub fn from_classes(classes: &[SlotClass]) -> Self {
        let mut s = ConIndexSet { total: LabelSet::new(), wobs: LabelSet::new(), null: LabelSet::new() };
        for (i, c) in classes.iter().enumerate() {
            let l = Label::Atom(i as u32 + 1);
            s.total.insert(l.clone());
            if c.in_wobs() {
                s.wobs.insert(l.clone());
            }
            if c.in_null() {
                s.null.insert(l);
            }
        }
        s
    }

    pub fn total(&self) -> &LabelSet {
        &self.total
    }

    pub fn wobs(&self) -> &LabelSet {
        &self.wobs
    }

    pub fn null(&self) -> &LabelSet {
        &self.null
    }

    pub fn dims(&self) -> ConDim {
        ConDim { t: self.total.len(), w: self.wobs.len(), n: self.null.len() }
    }

    pub fn class_of(&self, l: &Label) -> Option<SlotClass> {
        if self.null.contains(l) {
            Some(SlotClass::Null)
        } else if self.wobs.contains(l) {
            Some(SlotClass::WobsOnly)
        } else if self.total.contains(l) {
            Some(SlotClass::TotalOnly)
        } else {
            None
        }
    }

    pub fn coproduct(&self, other: &ConIndexSet) -> ConIndexSet {
        let tag = |a: &LabelSet, b: &LabelSet| {
            a.iter()
                .map(|l| Label::Left(Box::new(l.clone())))
                .chain(b.iter().map(|l| Label::Right(Box::new(l.clone()))))
                .collect::<LabelSet>()
        };
        ConIndexSet {
            total: tag(&self.total, &other.total),
            wobs: tag(&self.wobs, &other.wobs),
            null: tag(&self.null, &other.null),
        }
    }

    pub fn tensor(&self, other: &ConIndexSet) -> ConIndexSet {
        ConIndexSet {
            total: product(&self.total, &other.total),
            wobs: product(&self.wobs, &other.wobs),
            null: union(&[product(&self.wobs, &other.null), product(&self.null, &other.wobs)]),
        }
    }

    pub fn strong_tensor(&self, other: &ConIndexSet) -> ConIndexSet {
        let null = union(&[product(&self.total, &other.null), product(&self.null, &other.total)]);
        ConIndexSet {
            total: product(&self.total, &other.total),
            wobs: union(&[product(&self.wobs, &other.wobs), null.clone()]),
            null,
        }
    }

    pub fn dual(&self) -> ConIndexSet {
        ConIndexSet {
            total: self.total.clone(),
            wobs: self.total.difference(&self.null).cloned().collect(),
            null: self.total.difference(&self.wobs).cloned().collect(),
        }
    }

    pub fn reduce(&self) -> LabelSet {
        self.wobs.difference(&self.null).cloned().collect()
    }
}

fn product(a: &LabelSet, b: &LabelSet) -> LabelSet {
    a.iter().flat_map(|x| b.iter().map(move |y| Label::pair(x, y))).collect()
}

fn union(parts: &[LabelSet]) -> LabelSet {
    parts.iter().flatten().cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineKind {
    Coproduct,
    Tensor,
    StrongTensor,
    Dual,
    Reduce,
}

impl CombineKind {
    fn binary(self) -> bool {
        matches!(self, CombineKind::Coproduct | CombineKind::Tensor | CombineKind::StrongTensor)
    }

    fn name(self) -> &'static str {
        match self {
            CombineKind::Coproduct => "coproduct",
            CombineKind::Tensor => "tensor",
            CombineKind::StrongTensor => "strong_tensor",
            CombineKind::Dual => "dual",
            CombineKind::Reduce => "reduce",
        }
    }
}

/// Result of [`combine`]: reduction forgets the nesting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Combined {
    Indexed(ConIndexSet),
    Plain(LabelSet),
}

pub fn combine(kind: CombineKind, m: &ConIndexSet, n: Option<&ConIndexSet>) -> Result<Combined, IndexError> {
    let expected = if kind.binary() { 2 } else { 1 };
    let got = 1 + n.is_some() as usize;
    if got != expected {
        return Err(IndexError::ArityMismatch { op: kind.name(), expected });
    }
    Ok(match (kind, n) {
        (CombineKind::Coproduct, Some(n)) => Combined::Indexed(m.coproduct(n)),
        (CombineKind::Tensor, Some(n)) => Combined::Indexed(m.tensor(n)),
        (CombineKind::StrongTensor, Some(n)) => Combined::Indexed(m.strong_tensor(n)),
        (CombineKind::Dual, None) => Combined::Indexed(m.dual()),
        (CombineKind::Reduce, None) => Combined::Plain(m.reduce()),
        _ => unreachable!(),
    })
}

/// Whether the label map `f` is a morphism `m → n`.
pub fn classify_map(f: &BTreeMap<Label, Label>, m: &ConIndexSet, n: &ConIndexSet) -> Result<bool, IndexError> {
    for l in &m.total {
        if !f.contains_key(l) {
            return Err(IndexError::PartialMap(l.clone()));
        }
    }
    let maps_into = |src: &LabelSet, dst: &LabelSet| src.iter().all(|l| dst.contains(&f[l]));
    Ok(maps_into(&m.wobs, &n.wobs) && maps_into(&m.null, &n.null))
}

/// Class of one strictly increasing tuple of slots (0-based) in `Λ^k`.
pub fn tuple_class(slots: &[SlotClass], tuple: &[usize], flavor: Flavor) -> SlotClass {
    let all_w = tuple.iter().all(|&i| slots[i].in_wobs());
    let any_n = tuple.iter().any(|&i| slots[i].in_null());
    match flavor {
        Flavor::Tensor if all_w && any_n => SlotClass::Null,
        Flavor::Tensor if all_w => SlotClass::WobsOnly,
        Flavor::Tensor => SlotClass::TotalOnly,
        Flavor::Strong if any_n => SlotClass::Null,
        Flavor::Strong if all_w => SlotClass::WobsOnly,
        Flavor::Strong => SlotClass::TotalOnly,
    }
}

/// All strictly increasing `k`-tuples drawn from `0..n`.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Classes of all basis tuples of `Λ^k` over the given slots (0-based tuples).
pub fn wedge_classes(
    k: usize,
    slots: &[SlotClass],
    flavor: Flavor,
) -> Result<BTreeMap<Vec<usize>, SlotClass>, IndexError> {
    if k > slots.len() {
        return Err(IndexError::DegreeTooLarge { degree: k, slots: slots.len() });
    }
    Ok(increasing_tuples(slots.len(), k)
        .into_iter()
        .map(|t| {
            let c = tuple_class(slots, &t, flavor);
            (t, c)
        })
        .collect())
}

/// Every index set on atoms `1..=t` (one per assignment of classes).
pub fn all_index_sets(t: usize) -> Vec<ConIndexSet> {
    const CLASSES: [SlotClass; 3] = [SlotClass::Null, SlotClass::WobsOnly, SlotClass::TotalOnly];
    let mut out = Vec::new();
    let mut idx = vec![0usize; t];
    loop {
        let classes: Vec<SlotClass> = idx.iter().map(|&i| CLASSES[i]).collect();
        out.push(ConIndexSet::from_classes(&classes));
        let mut p = 0;
        loop {
            if p == t {
                return out;
            }
            idx[p] += 1;
            if idx[p] < 3 {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}
