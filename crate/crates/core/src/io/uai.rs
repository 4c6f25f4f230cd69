use std::fmt::Write;

use crate::model::{Factor, FactorGraph, VarId};

use super::IoError;

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        Tokens { items, pos: 0 }
    }

    fn next(&mut self, expected: &'static str) -> Result<(usize, &'a str), IoError> {
        let line = self.items.last().map_or(1, |t| t.0);
        let t = self.items.get(self.pos).copied().ok_or(IoError::Parse {
            line,
            token: "<end of file>".into(),
            expected,
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn usize(&mut self, expected: &'static str) -> Result<usize, IoError> {
        let (line, tok) = self.next(expected)?;
        tok.parse().map_err(|_| IoError::Parse {
            line,
            token: tok.into(),
            expected,
        })
    }

    fn value(&mut self) -> Result<f64, IoError> {
        let expected = "a nonnegative finite table value";
        let (line, tok) = self.next(expected)?;
        match tok.parse::<f64>() {
            Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
            _ => Err(IoError::Parse {
                line,
                token: tok.into(),
                expected,
            }),
        }
    }
}

/// Parses a UAI `MARKOV` model. Tables are row-major with the last scope
/// variable varying fastest. A declared variable used by no factor is given an
/// all-ones singleton so that the graph stays well formed; this leaves `Z`
/// multiplied by its cardinality, exactly as the file implies.
pub fn parse_uai(text: &str) -> Result<FactorGraph, IoError> {
    let mut tok = Tokens::new(text);
    let (line, kind) = tok.next("the preamble MARKOV")?;
    match kind {
        "MARKOV" => {}
        "BAYES" => return Err(IoError::UnsupportedPreamble(kind.into())),
        _ => {
            return Err(IoError::Parse {
                line,
                token: kind.into(),
                expected: "the preamble MARKOV",
            })
        }
    }
    let n = tok.usize("the variable count")?;
    let mut cards = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = tok.items.get(tok.pos).copied().unwrap_or((0, ""));
        let c = tok.usize("a cardinality")?;
        if c == 0 {
            return Err(IoError::Parse {
                line,
                token: t.into(),
                expected: "a positive cardinality",
            });
        }
        cards.push(c);
    }
    let m = tok.usize("the factor count")?;
    let mut scopes = Vec::with_capacity(m);
    for _ in 0..m {
        let arity = tok.usize("a factor arity")?;
        let mut scope = Vec::with_capacity(arity);
        for _ in 0..arity {
            let (line, t) = tok.items.get(tok.pos).copied().unwrap_or((0, ""));
            let v = tok.usize("a variable index")?;
            if v >= n || scope.contains(&VarId(v)) {
                return Err(IoError::Parse {
                    line,
                    token: t.into(),
                    expected: "a distinct in-range variable index",
                });
            }
            scope.push(VarId(v));
        }
        scopes.push(scope);
    }
    let mut factors = Vec::with_capacity(m);
    for scope in scopes {
        let fcards: Vec<usize> = scope.iter().map(|v| cards[v.index()]).collect();
        let (line, t) = tok.items.get(tok.pos).copied().unwrap_or((0, ""));
        let len = tok.usize("a table length")?;
        let want: Option<usize> = fcards.iter().try_fold(1usize, |a, &c| a.checked_mul(c));
        if want != Some(len) {
            return Err(IoError::Parse {
                line,
                token: t.into(),
                expected: "a table length equal to the product of scope cardinalities",
            });
        }
        let mut vals = Vec::with_capacity(len);
        for _ in 0..len {
            vals.push(tok.value()?);
        }
        factors.push(Factor::from_linear(scope, fcards, &vals)?);
    }
    if let Some((line, t)) = tok.items.get(tok.pos) {
        return Err(IoError::Parse {
            line: *line,
            token: (*t).into(),
            expected: "end of file",
        });
    }
    let mut used = vec![false; n];
    for f in &factors {
        for v in f.scope() {
            used[v.index()] = true;
        }
    }
    for (v, u) in used.iter().enumerate() {
        if !u {
            factors.push(Factor::uniform(vec![VarId(v)], vec![cards[v]])?);
        }
    }
    Ok(FactorGraph::new(cards, factors)?)
}

/// Canonical UAI text; values use the shortest representation that parses
/// back to the same `f64`.
pub fn emit_uai(g: &FactorGraph) -> Result<String, IoError> {
    if let Some(a) = g.factors().iter().position(|f| f.has_negative()) {
        return Err(IoError::NegativeValues(crate::model::FactorId(a)));
    }
    let mut out = String::new();
    let join = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(" ");
    writeln!(out, "MARKOV").unwrap();
    writeln!(out, "{}", g.num_vars()).unwrap();
    writeln!(out, "{}", join(&mut g.cards().iter().map(|c| c.to_string()))).unwrap();
    writeln!(out, "{}", g.num_factors()).unwrap();
    for f in g.factors() {
        let mut items = vec![f.arity().to_string()];
        items.extend(f.scope().iter().map(|v| v.index().to_string()));
        writeln!(out, "{}", items.join(" ")).unwrap();
    }
    for f in g.factors() {
        writeln!(out).unwrap();
        writeln!(out, "{}", f.len()).unwrap();
        let last = *f.cards().last().unwrap_or(&1);
        for row in f.to_linear().chunks(last.max(1)) {
            writeln!(out, " {}", join(&mut row.iter().map(|x| format!("{x:?}")))).unwrap();
        }
    }
    Ok(out)
}
