//! Plain-text Hermite coefficient files.
//!
//! ```text
//! qns-coefficients 1
//! dim 1
//! degree 4
//! field q
//! 0 0 1.0
//! 2 0 0.05
//! field u0
//! 1 0 0.2
//! ```
//!
//! Entries are `alpha_0 alpha_1 value`; absent entries are zero. Blank lines and lines
//! starting with `#` are ignored. Fields `q`, `u0`, `u1` may each appear at most once.

use std::fmt::Write as _;

use crate::error::{QnsError, Result};
use crate::spectral::{Frame, ScalarField, VectorField};

const MAGIC: &str = "qns-coefficients";

type Entries = Vec<([usize; 2], f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFile {
    pub dim: usize,
    pub degree: usize,
    pub q: Vec<([usize; 2], f64)>,
    /// One entry list per velocity component present in the file.
    pub u: Vec<Vec<([usize; 2], f64)>>,
}

fn err(line: usize, message: impl Into<String>) -> QnsError {
    QnsError::CoeffFile {
        line,
        message: message.into(),
    }
}

pub fn parse(bytes: &[u8]) -> Result<CoeffFile> {
    let text = std::str::from_utf8(bytes).map_err(|e| err(0, format!("not UTF-8: {e}")))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut header = |key: &str| -> Result<(usize, usize)> {
        let (n, l) = lines
            .next()
            .ok_or_else(|| err(0, format!("missing `{key}` line")))?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(err(n, format!("expected `{key}`")));
        }
        let v = it
            .next()
            .ok_or_else(|| err(n, format!("`{key}` needs a value")))?;
        if it.next().is_some() {
            return Err(err(n, "trailing tokens"));
        }
        let v = v
            .parse::<usize>()
            .map_err(|e| err(n, format!("bad `{key}`: {e}")))?;
        Ok((n, v))
    };
    let (n, version) = header(MAGIC)?;
    if version != 1 {
        return Err(err(n, format!("unsupported version {version}")));
    }
    let (n, dim) = header("dim")?;
    if dim != 1 && dim != 2 {
        return Err(err(n, format!("dim must be 1 or 2, got {dim}")));
    }
    let (n, degree) = header("degree")?;
    if degree > 256 {
        return Err(err(n, format!("degree {degree} is too large")));
    }

    let mut q: Option<Entries> = None;
    let mut u: [Option<Entries>; 2] = [None, None];
    let mut current: Option<&mut Entries> = None;
    for (n, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks[0] == "field" {
            if toks.len() != 2 {
                return Err(err(n, "`field` takes one name"));
            }
            let slot = match toks[1] {
                "q" => &mut q,
                "u0" => &mut u[0],
                "u1" if dim == 2 => &mut u[1],
                other => return Err(err(n, format!("unknown field `{other}`"))),
            };
            if slot.is_some() {
                return Err(err(n, format!("field `{}` repeated", toks[1])));
            }
            current = Some(slot.insert(Vec::new()));
            continue;
        }
        let list = current
            .as_mut()
            .ok_or_else(|| err(n, "entry before any `field` line"))?;
        if toks.len() != 3 {
            return Err(err(n, "entry needs `alpha_0 alpha_1 value`"));
        }
        let a0 = toks[0]
            .parse::<usize>()
            .map_err(|e| err(n, format!("bad index: {e}")))?;
        let a1 = toks[1]
            .parse::<usize>()
            .map_err(|e| err(n, format!("bad index: {e}")))?;
        let v = toks[2]
            .parse::<f64>()
            .map_err(|e| err(n, format!("bad value: {e}")))?;
        if !v.is_finite() {
            return Err(err(n, "value is not finite"));
        }
        if (dim == 1 && a1 != 0) || a0.checked_add(a1).is_none_or(|s| s > degree) {
            return Err(err(
                n,
                format!("index ({a0}, {a1}) outside the degree-{degree} basis"),
            ));
        }
        if list.iter().any(|(al, _)| *al == [a0, a1]) {
            return Err(err(n, format!("index ({a0}, {a1}) repeated")));
        }
        list.push(([a0, a1], v));
    }
    let q = q.ok_or_else(|| err(0, "missing `field q`"))?;
    let u = match u {
        [None, None] => Vec::new(),
        [Some(a), None] if dim == 1 => vec![a],
        [a, b] => vec![a.unwrap_or_default(), b.unwrap_or_default()],
    };
    Ok(CoeffFile { dim, degree, q, u })
}

impl CoeffFile {
    pub fn from_fields(q: &ScalarField, u: Option<&VectorField>) -> CoeffFile {
        let fr = q.frame();
        let entries = |f: &ScalarField| {
            fr.indices()
                .iter()
                .copied()
                .zip(f.coeffs().iter().copied())
                .collect()
        };
        CoeffFile {
            dim: fr.dim(),
            degree: fr.degree(),
            q: entries(q),
            u: u.map(|u| u.comps().iter().map(entries).collect())
                .unwrap_or_default(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{MAGIC} 1\ndim {}\ndegree {}\n", self.dim, self.degree);
        let mut block = |name: &str, list: &[([usize; 2], f64)]| {
            let _ = writeln!(s, "field {name}");
            for (al, v) in list {
                let _ = writeln!(s, "{} {} {:.16e}", al[0], al[1], v);
            }
        };
        block("q", &self.q);
        for (a, list) in self.u.iter().enumerate() {
            block(&format!("u{a}"), list);
        }
        s
    }

    fn field(&self, frame: &Frame, list: &[([usize; 2], f64)]) -> Result<ScalarField> {
        let mut c = vec![0.0; frame.n_basis()];
        for (al, v) in list {
            let b = frame.index_of(*al).ok_or_else(|| {
                err(
                    0,
                    format!("index ({}, {}) not in the target basis", al[0], al[1]),
                )
            })?;
            c[b] = *v;
        }
        ScalarField::from_coeffs(frame, c)
    }

    /// Density and, when present, velocity on `frame`, which must have the same
    /// dimension and at least the same degree.
    pub fn to_fields(&self, frame: &Frame) -> Result<(ScalarField, Option<VectorField>)> {
        if frame.dim() != self.dim {
            return Err(QnsError::Dimension {
                expected: frame.dim(),
                got: self.dim,
            });
        }
        let q = self.field(frame, &self.q)?;
        let u = if self.u.is_empty() {
            None
        } else {
            Some(VectorField::new(
                self.u
                    .iter()
                    .map(|l| self.field(frame, l))
                    .collect::<Result<Vec<_>>>()?,
            )?)
        };
        Ok((q, u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GaussianFrame;

    #[test]
    fn round_trip() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 2, 3).unwrap();
        let q = ScalarField::from_fn(&fr, |x| 1.0 + 0.1 * x[0] * x[1]);
        let u = VectorField::new(vec![
            ScalarField::from_fn(&fr, |x| x[1]),
            ScalarField::zeros(&fr),
        ])
        .unwrap();
        let f = CoeffFile::from_fields(&q, Some(&u));
        let g = parse(f.to_text().as_bytes()).unwrap();
        assert_eq!(f, g);
        let (q2, u2) = g.to_fields(&fr).unwrap();
        assert_eq!(q2.coeffs(), q.coeffs());
        assert_eq!(u2.unwrap().flat(), u.flat());
    }

    #[test]
    fn errors_carry_lines() {
        let bad = "qns-coefficients 1\ndim 1\ndegree 2\nfield q\n0 0 1\n3 0 1\n";
        match parse(bad.as_bytes()) {
            Err(QnsError::CoeffFile { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
    }
}
