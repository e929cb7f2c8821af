//! Line-oriented recipe files.
//!
//! ```text
//! # comment
//! let X = projective_space n=2
//! let XX = product left=X right=X
//! let B = blow_up base=XX center=diagonal
//! let H = quotient cover=B group=swap
//! let E = projective_bundle base=X chern=[1,3h,3hh] rank=2
//! ```
//!
//! Names may be used before their definition; the last definition is the
//! target of the file.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ckd::{ck_blow_up, ck_descend, ck_product, ck_projective_bundle, CKDecomposition};
use crate::error::{Error, Result};
use crate::exactalg::{Matrix, Scalar};
use crate::hilbert::diagonal_morphism;
use crate::report::Report;
use crate::variety::{
    build_blow_up, build_point, build_product, build_projective_bundle, build_projective_space, build_quotient, BlowUp, BundleData,
    GroupAction, Morphism, Product, VarRef,
};
use crate::Rat;
use num_traits::{One, Zero};

/// Position of a token, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    fn err(self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Center {
    Point,
    Diagonal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builder {
    Point,
    ProjectiveSpace { n: usize },
    Product { left: Name, right: Name },
    /// Chern classes `c₀, c₁, …` as polynomials in the basis names of the base.
    ProjectiveBundle { base: Name, chern: Vec<(String, Pos)>, rank: usize },
    BlowUp { base: Name, center: Center },
    /// Quotient by the factor swap.
    Quotient { cover: Name },
}

impl Builder {
    fn references(&self) -> Vec<&Name> {
        match self {
            Builder::Point | Builder::ProjectiveSpace { .. } => vec![],
            Builder::Product { left, right } => vec![left, right],
            Builder::ProjectiveBundle { base, .. } | Builder::BlowUp { base, .. } => vec![base],
            Builder::Quotient { cover } => vec![cover],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: Name,
    pub builder: Builder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recipe {
    pub definitions: Vec<Definition>,
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

/// Split on whitespace, keeping `[...]` groups whole. Columns count characters.
fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token<'_>>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        if chars[k].1.is_whitespace() {
            k += 1;
            continue;
        }
        let start = k;
        let mut depth = 0usize;
        while k < chars.len() && (depth > 0 || !chars[k].1.is_whitespace()) {
            match chars[k].1 {
                '[' => depth += 1,
                ']' => {
                    depth = depth
                        .checked_sub(1)
                        .ok_or_else(|| Pos { line: line_no, col: k + 1 }.err("unmatched ']'"))?;
                }
                _ => {}
            }
            k += 1;
        }
        if depth > 0 {
            return Err(Pos { line: line_no, col: start + 1 }.err("unterminated '['"));
        }
        let b = chars[start].0;
        let e = if k < chars.len() { chars[k].0 } else { line.len() };
        out.push(Token { text: &line[b..e], col: start + 1 });
    }
    Ok(out)
}

fn is_identifier(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && it.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Args<'a> {
    keyword: Pos,
    values: Vec<(&'a str, &'a str, Pos)>,
}

impl<'a> Args<'a> {
    fn take(&mut self, key: &str) -> Result<(&'a str, Pos)> {
        match self.values.iter().position(|(k, _, _)| *k == key) {
            Some(i) => {
                let (_, v, p) = self.values.remove(i);
                Ok((v, Pos { line: p.line, col: p.col + key.chars().count() + 1 }))
            }
            None => Err(self.keyword.err(format!("missing argument {key}="))),
        }
    }

    fn name(&mut self, key: &str) -> Result<Name> {
        let (v, pos) = self.take(key)?;
        if !is_identifier(v) {
            return Err(pos.err(format!("'{v}' is not a name")));
        }
        Ok(Name { text: v.to_string(), pos })
    }

    fn number(&mut self, key: &str) -> Result<usize> {
        let (v, pos) = self.take(key)?;
        v.parse().map_err(|_| pos.err(format!("'{v}' is not a non-negative integer")))
    }

    fn finish(self) -> Result<()> {
        match self.values.first() {
            Some((k, _, p)) => Err(p.err(format!("unexpected argument {k}="))),
            None => Ok(()),
        }
    }
}

fn split_list(v: &str, pos: Pos) -> Result<Vec<(String, Pos)>> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| pos.err("expected a list [c0, c1, ...]"))?;
    let mut out = Vec::new();
    let mut col = pos.col + 1;
    for part in inner.split(',') {
        let lead = part.chars().take_while(|c| c.is_whitespace()).count();
        let text = part.trim();
        if text.is_empty() {
            return Err(Pos { line: pos.line, col: col + lead }.err("empty list entry"));
        }
        out.push((text.to_string(), Pos { line: pos.line, col: col + lead }));
        col += part.chars().count() + 1;
    }
    Ok(out)
}

fn parse_definition(line: &str, line_no: usize) -> Result<Option<Definition>> {
    let content = line.split('#').next().unwrap_or("");
    let tokens = tokenize(content, line_no)?;
    if tokens.is_empty() {
        return Ok(None);
    }
    let at = |t: &Token| Pos { line: line_no, col: t.col };
    if tokens[0].text != "let" {
        return Err(at(&tokens[0]).err(format!("expected 'let', found '{}'", tokens[0].text)));
    }
    let name_tok = tokens.get(1).ok_or_else(|| Pos { line: line_no, col: content.trim_end().chars().count() + 1 }.err("expected a name"))?;
    if !is_identifier(name_tok.text) {
        return Err(at(name_tok).err(format!("'{}' is not a name", name_tok.text)));
    }
    let name = Name { text: name_tok.text.to_string(), pos: at(name_tok) };
    match tokens.get(2) {
        Some(t) if t.text == "=" => {}
        Some(t) => return Err(at(t).err("expected '='")),
        None => return Err(Pos { line: line_no, col: name_tok.col + name_tok.text.chars().count() + 1 }.err("expected '='")),
    }
    let kw = tokens
        .get(3)
        .ok_or_else(|| Pos { line: line_no, col: tokens[2].col + 2 }.err("expected a builder"))?;
    let mut values = Vec::new();
    for t in &tokens[4..] {
        let (k, v) = t.text.split_once('=').ok_or_else(|| at(t).err(format!("expected key=value, found '{}'", t.text)))?;
        if values.iter().any(|(k2, _, _)| *k2 == k) {
            return Err(at(t).err(format!("repeated argument {k}=")));
        }
        values.push((k, v, at(t)));
    }
    let mut args = Args { keyword: at(kw), values };
    let builder = match kw.text {
        "point" => Builder::Point,
        "projective_space" => Builder::ProjectiveSpace { n: args.number("n")? },
        "product" => Builder::Product { left: args.name("left")?, right: args.name("right")? },
        "projective_bundle" => {
            let base = args.name("base")?;
            let (v, pos) = args.take("chern")?;
            let chern = split_list(v, pos)?;
            let rank = args.number("rank")?;
            Builder::ProjectiveBundle { base, chern, rank }
        }
        "blow_up" => {
            let base = args.name("base")?;
            let (v, pos) = args.take("center")?;
            let center = match v {
                "point" => Center::Point,
                "diagonal" => Center::Diagonal,
                _ => return Err(pos.err(format!("unknown center '{v}' (point, diagonal)"))),
            };
            Builder::BlowUp { base, center }
        }
        "quotient" => {
            let cover = args.name("cover")?;
            let (v, pos) = args.take("group")?;
            if v != "swap" {
                return Err(pos.err(format!("unknown group '{v}' (swap)")));
            }
            Builder::Quotient { cover }
        }
        other => return Err(at(kw).err(format!("unknown builder '{other}'"))),
    };
    args.finish()?;
    Ok(Some(Definition { name, builder }))
}

impl Recipe {
    pub fn parse(text: &str) -> Result<Recipe> {
        let mut definitions: Vec<Definition> = Vec::new();
        for (k, line) in text.lines().enumerate() {
            if let Some(d) = parse_definition(line, k + 1)? {
                if let Some(prev) = definitions.iter().find(|p| p.name.text == d.name.text) {
                    return Err(d.name.pos.err(format!("'{}' already defined on line {}", d.name.text, prev.name.pos.line)));
                }
                definitions.push(d);
            }
        }
        if definitions.is_empty() {
            return Err(Pos { line: 1, col: 1 }.err("recipe defines nothing"));
        }
        let recipe = Recipe { definitions };
        recipe.order()?;
        Ok(recipe)
    }

    pub fn target(&self) -> &Definition {
        self.definitions.last().expect("non-empty recipe")
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.definitions.iter().position(|d| d.name.text == name)
    }

    /// Definitions in dependency order; errors on undefined names and cycles.
    pub fn order(&self) -> Result<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        fn visit(r: &Recipe, i: usize, marks: &mut [Mark], stack: &mut Vec<usize>, out: &mut Vec<usize>) -> Result<()> {
            marks[i] = Mark::Active;
            stack.push(i);
            for name in r.definitions[i].builder.references() {
                let j = r.index(&name.text).ok_or_else(|| name.pos.err(format!("undefined name '{}'", name.text)))?;
                match marks[j] {
                    Mark::Done => {}
                    Mark::Active => {
                        let from = stack.iter().position(|&k| k == j).unwrap_or(0);
                        let mut cycle: Vec<&str> = stack[from..].iter().map(|&k| r.definitions[k].name.text.as_str()).collect();
                        cycle.push(&name.text);
                        return Err(name.pos.err(format!("cyclic definition {}", cycle.join(" -> "))));
                    }
                    Mark::New => visit(r, j, marks, stack, out)?,
                }
            }
            stack.pop();
            marks[i] = Mark::Done;
            out.push(i);
            Ok(())
        }
        let mut marks = vec![Mark::New; self.definitions.len()];
        let mut out = Vec::new();
        for i in 0..self.definitions.len() {
            if marks[i] == Mark::New {
                visit(self, i, &mut marks, &mut Vec::new(), &mut out)?;
            }
        }
        Ok(out)
    }
}

/// Parse `3hh - 1/2 h^2 + 1` against the basis names of `x`. Factors are
/// matched greedily by the longest basis name; `*` and `^k` are allowed.
pub fn parse_class<S: Scalar>(x: &VarRef<S>, text: &str, pos: Pos) -> Result<Vec<S>> {
    let a = &x.chow;
    let mut names: Vec<(Vec<char>, usize)> = (0..a.dim()).map(|i| (a.name(i).chars().collect(), i)).collect();
    names.sort_by_key(|p| std::cmp::Reverse(p.0.len()));
    let chars: Vec<char> = text.chars().collect();
    let at = |k: usize| Pos { line: pos.line, col: pos.col + k };
    let skip_ws = |k: &mut usize| {
        while *k < chars.len() && chars[*k].is_whitespace() {
            *k += 1;
        }
    };
    let match_name = |k: usize| names.iter().find(|(n, _)| chars[k..].starts_with(n)).map(|(n, i)| (n.len(), *i));
    let digits = |k: usize| chars[k..].iter().take_while(|c| c.is_ascii_digit()).count();
    let int = |k: usize, len: usize| -> Result<i64> {
        chars[k..k + len].iter().collect::<String>().parse().map_err(|_| at(k).err("coefficient out of range"))
    };

    let mut total = vec![S::zero(); a.dim()];
    let mut k = 0;
    let mut first = true;
    loop {
        skip_ws(&mut k);
        if k >= chars.len() {
            if first {
                return Err(at(k).err("empty class"));
            }
            break;
        }
        let mut sign = S::one();
        if chars[k] == '+' || chars[k] == '-' {
            if chars[k] == '-' {
                sign = -S::one();
            }
            k += 1;
            skip_ws(&mut k);
        } else if !first {
            return Err(at(k).err(format!("expected '+' or '-', found '{}'", chars[k])));
        }
        first = false;
        let term_start = k;
        let mut coef = sign;
        let d = digits(k);
        if d > 0 && match_name(k).is_none_or(|(len, _)| len <= d) {
            let num = int(k, d)?;
            k += d;
            let mut c = S::from_int(num);
            if k < chars.len() && chars[k] == '/' {
                let dd = digits(k + 1);
                if dd == 0 {
                    return Err(at(k + 1).err("expected a denominator"));
                }
                let den = int(k + 1, dd)?;
                if den == 0 {
                    return Err(at(k + 1).err("zero denominator"));
                }
                c = c / S::from_int(den);
                k += 1 + dd;
            }
            coef = coef.times(&c);
        }
        let mut term = a.unit().to_vec();
        loop {
            skip_ws(&mut k);
            if k >= chars.len() || chars[k] == '+' || chars[k] == '-' {
                break;
            }
            if chars[k] == '*' {
                k += 1;
                skip_ws(&mut k);
            }
            let (len, i) = match (k < chars.len()).then(|| match_name(k)).flatten() {
                Some(m) => m,
                None => return Err(at(k).err(format!("no basis class of {} matches here", x.name))),
            };
            k += len;
            let mut power = 1;
            if k < chars.len() && chars[k] == '^' {
                let dd = digits(k + 1);
                if dd == 0 {
                    return Err(at(k + 1).err("expected an exponent"));
                }
                power = int(k + 1, dd)? as usize;
                k += 1 + dd;
            }
            term = a.mul_vec(&term, &a.pow_vec(&a.basis_vec(i), power));
        }
        if k == term_start {
            return Err(at(k).err("empty term"));
        }
        for (t, v) in total.iter_mut().zip(&term) {
            if !v.is_zero() {
                *t += &coef.times(v);
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Debug)]
enum Shape {
    Plain,
    Product(Product<Rat>),
    /// `Bl_Δ(X × X)` together with `X`.
    DiagonalBlowUp { n: usize, exceptional: Vec<Rat> },
}

/// One evaluated definition.
#[derive(Clone, Debug)]
pub struct Built {
    pub name: String,
    pub variety: VarRef<Rat>,
    pub ck: CKDecomposition<Rat>,
    /// Checks produced while building (morphisms, actions, descent).
    pub report: Report,
    shape: Shape,
}

/// Every definition, in file order.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub built: Vec<Built>,
}

impl Evaluated {
    pub fn target(&self) -> &Built {
        self.built.last().expect("non-empty recipe")
    }

    pub fn get(&self, name: &str) -> Option<&Built> {
        self.built.iter().find(|b| b.name == name)
    }
}

fn point_of(x: &VarRef<Rat>) -> Result<Morphism<Rat>> {
    let pt = build_point::<Rat>();
    let a = &x.chow;
    let row: Vec<Rat> = (0..a.dim())
        .map(|k| if a.codim(k) == 0 { Rat::one() / &a.unit()[k] } else { Rat::zero() })
        .collect();
    Morphism::new("point", pt, x.clone(), Matrix::from_fn(1, a.dim(), |_, k| row[k].clone()))
}

fn swap_action(x: &VarRef<Rat>, n: usize) -> GroupAction<Rat> {
    let total = x.n();
    let swap_of = |p: usize| if p < n * n { (p % n) * n + p / n } else { p };
    GroupAction::symmetric(x.clone(), &[vec![0, 1], vec![1, 0]], |perm| {
        Matrix::from_fn(total, total, |r, c| {
            let img = if perm[0] == 0 { c } else { swap_of(c) };
            if r == img {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
    })
}

fn evaluate_one(def: &Definition, done: &HashMap<String, Built>) -> Result<Built> {
    let get = |n: &Name| done.get(&n.text).expect("dependency order");
    let name = def.name.text.clone();
    let mut report = Report::new();
    let (variety, ck, shape) = match &def.builder {
        Builder::Point => {
            let x = build_point();
            (x.clone(), CKDecomposition::standard(&x), Shape::Plain)
        }
        Builder::ProjectiveSpace { n } => {
            let x = build_projective_space(*n);
            (x.clone(), CKDecomposition::standard(&x), Shape::Plain)
        }
        Builder::Product { left, right } => {
            let (l, r) = (get(left), get(right));
            let prod = build_product(&l.variety, &r.variety);
            report.extend(prod.p1.verify().prefixed("p1"));
            report.extend(prod.p2.verify().prefixed("p2"));
            let ck = ck_product(&l.ck, &r.ck, &prod)?;
            (prod.variety.clone(), ck, Shape::Product(prod))
        }
        Builder::ProjectiveBundle { base, chern, rank } => {
            let b = get(base);
            let x = &b.variety;
            if *rank == 0 {
                return Err(def.name.pos.err("rank must be positive"));
            }
            let mut c = vec![Rat::zero(); x.n()];
            for (k, (text, pos)) in chern.iter().enumerate() {
                let v = parse_class(x, text, *pos)?;
                if !x.chow.is_homogeneous(&v, k) && v.iter().any(|t| !t.is_zero()) {
                    return Err(pos.err(format!("entry {k} is not of codimension {k}")));
                }
                for (s, t) in c.iter_mut().zip(v) {
                    *s += t;
                }
            }
            let data = BundleData::new(x.clone(), *rank, c).map_err(|e| def.name.pos.err(e.to_string()))?;
            let pb = build_projective_bundle(&data)?;
            report.extend(pb.pi.verify().prefixed("pi"));
            let ck = ck_projective_bundle(&b.ck, &pb)?;
            report.extend(ck.report.clone());
            (pb.variety.clone(), ck.ck, Shape::Plain)
        }
        Builder::BlowUp { base, center } => {
            let b = get(base);
            let (bu, ck_center, shape): (BlowUp<Rat>, CKDecomposition<Rat>, Shape) = match center {
                Center::Point => {
                    let i = point_of(&b.variety)?;
                    let normal = BundleData::trivial(i.source.clone(), b.variety.dim);
                    let ck_pt = CKDecomposition::standard(&i.source);
                    (build_blow_up(&b.variety, &i, &normal)?, ck_pt, Shape::Plain)
                }
                Center::Diagonal => {
                    let Shape::Product(prod) = &b.shape else {
                        return Err(base.pos.err(format!("'{}' is not a product X × X", base.text)));
                    };
                    if !Arc::ptr_eq(&prod.left, &prod.right) {
                        return Err(base.pos.err(format!("'{}' has two different factors", base.text)));
                    }
                    let x = prod.left.clone();
                    let ck_x = done.values().find(|d| Arc::ptr_eq(&d.variety, &x)).map(|d| d.ck.clone()).expect("factor was built");
                    let delta = diagonal_morphism(&x, prod)?;
                    let normal = BundleData::tangent(x.clone());
                    let bu = build_blow_up(&b.variety, &delta, &normal)?;
                    let shape = Shape::DiagonalBlowUp { n: x.n(), exceptional: bu.exceptional_class() };
                    (bu, ck_x, shape)
                }
            };
            report.extend(bu.rho.verify().prefixed("rho"));
            report.extend(bu.j.verify().prefixed("j"));
            let ck = ck_blow_up(&b.ck, &ck_center, &bu)?;
            report.extend(ck.report.clone());
            (bu.variety.clone(), ck.ck, shape)
        }
        Builder::Quotient { cover } => {
            let c = get(cover);
            let x = &c.variety;
            let (action, branch) = match &c.shape {
                Shape::Product(prod) if Arc::ptr_eq(&prod.left, &prod.right) => {
                    if prod.left.dim != 1 {
                        return Err(Error::Precondition(format!(
                            "{} / swap is singular along the diagonal; blow up the diagonal first",
                            x.name
                        )));
                    }
                    let delta = diagonal_morphism(&prod.left, prod)?;
                    (swap_action(x, prod.left.n()), delta.push(prod.left.chow.unit())?)
                }
                Shape::DiagonalBlowUp { n, exceptional } => (swap_action(x, *n), exceptional.clone()),
                _ => return Err(cover.pos.err(format!("'{}' carries no swap: use X × X or its diagonal blow-up", cover.text))),
            };
            report.extend(action.verify().prefixed("swap"));
            let q = build_quotient(&name, &action, &[branch])?;
            report.extend(q.p.verify().prefixed("p"));
            let d = ck_descend(&c.ck, &q.p, 2)?;
            report.extend(d.report.clone());
            (q.variety.clone(), d.ck, Shape::Plain)
        }
    };
    report.extend(variety.verify());
    Ok(Built { name, variety, ck, report, shape })
}

/// Build every definition in dependency order.
pub fn evaluate(recipe: &Recipe) -> Result<Evaluated> {
    let mut done: HashMap<String, Built> = HashMap::new();
    for i in recipe.order()? {
        let def = &recipe.definitions[i];
        let b = evaluate_one(def, &done)?;
        done.insert(def.name.text.clone(), b);
    }
    let built = recipe.definitions.iter().map(|d| done.remove(&d.name.text).expect("evaluated")).collect();
    Ok(Evaluated { built })
}
