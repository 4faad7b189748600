use std::fmt::Write as _;
use std::path::Path;

use super::{display, parse_real, parse_usize, read_text, write_atomic};
use crate::error::{Error, Result};
use crate::refinement::{Activation, Dense, Mlp, RefinementModel};
use crate::scalar::Real;

/// First line of every model file.
pub const MODEL_MAGIC: &str = "PLREFINE1";

fn activation_line<T: Real>(a: Activation<T>) -> String {
    match a {
        Activation::LeakyRelu(s) => format!("activation leaky_relu {s}"),
        Activation::Tanh => "activation tanh".into(),
        Activation::Identity => "activation identity".into(),
    }
}

fn write_head<T: Real>(out: &mut String, name: &str, mlp: &Mlp<T>) {
    let sizes: Vec<String> = mlp.sizes().iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "head {name}");
    let _ = writeln!(out, "{}", activation_line(mlp.activation()));
    let _ = writeln!(out, "sizes {}", sizes.join(" "));
    for layer in mlp.layers() {
        let w: Vec<String> = layer.weights.iter().map(|v| v.to_string()).collect();
        let b: Vec<String> = layer.bias.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", w.join(" "));
        let _ = writeln!(out, "{}", b.join(" "));
    }
}

/// Plain-text model: magic, hyperparameters, then each head's activation,
/// layer sizes and row-major weights followed by biases, one line each.
pub fn write_model<T: Real>(path: &Path, model: &RefinementModel<T>) -> Result<()> {
    let mut out = format!("{MODEL_MAGIC}\nk {}\noffset_clamp {}\n", model.k, model.offset_clamp);
    match model.reject_radius {
        Some(r) => {
            let _ = writeln!(out, "reject_radius {r}");
        }
        None => out.push_str("reject_radius none\n"),
    }
    write_head(&mut out, "xy", &model.mlp_xy);
    write_head(&mut out, "z", &model.mlp_z);
    write_atomic(path, out.as_bytes())
}

struct Reader<'a> {
    path: &'a Path,
    lines: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Reader<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> =
            Box::new(text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())));
        Self { path, lines: it.peekable(), last: 0 }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(display(self.path), line, msg)
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        match self.lines.next() {
            Some((no, l)) => {
                self.last = no;
                Ok((no, l))
            }
            None => Err(self.err(self.last + 1, "unexpected end of file")),
        }
    }

    /// Reads a line `key v1 v2 ...` and returns the values.
    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (no, line) = self.next()?;
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some(key) {
            return Err(self.err(no, format!("expected '{key}'")));
        }
        Ok((no, tokens.collect()))
    }

    fn reals<T: Real>(&mut self, count: usize) -> Result<Vec<T>> {
        let (no, line) = self.next()?;
        let values: Vec<T> = line
            .split_whitespace()
            .map(|t| parse_real(t, self.path, no))
            .collect::<Result<_>>()?;
        if values.len() != count {
            return Err(self.err(no, format!("expected {count} values, found {}", values.len())));
        }
        Ok(values)
    }

    fn head<T: Real>(&mut self, name: &str) -> Result<Mlp<T>> {
        let (no, v) = self.keyed("head")?;
        if v != [name] {
            return Err(self.err(no, format!("expected head '{name}'")));
        }
        let (no, v) = self.keyed("activation")?;
        let activation = match v.as_slice() {
            ["leaky_relu", s] => Activation::LeakyRelu(parse_real(s, self.path, no)?),
            ["tanh"] => Activation::Tanh,
            ["identity"] => Activation::Identity,
            _ => return Err(self.err(no, "unknown activation")),
        };
        let (no, v) = self.keyed("sizes")?;
        let sizes: Vec<usize> = v.iter().map(|t| parse_usize(t, self.path, no)).collect::<Result<_>>()?;
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(self.err(no, "need at least two positive layer sizes"));
        }
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for w in sizes.windows(2) {
            let (inputs, outputs) = (w[0], w[1]);
            let weights = self.reals(inputs * outputs)?;
            let bias = self.reals(outputs)?;
            layers.push(Dense { inputs, outputs, weights, bias });
        }
        Mlp::from_layers(layers, activation)
    }
}

pub fn read_model<T: Real>(path: &Path) -> Result<RefinementModel<T>> {
    let text = read_text(path)?;
    let mut r = Reader::new(path, &text);
    let (no, magic) = r.next()?;
    if magic != MODEL_MAGIC {
        return Err(r.err(no, format!("bad magic, expected '{MODEL_MAGIC}'")));
    }
    let (no, v) = r.keyed("k")?;
    let k = match v.as_slice() {
        [t] => parse_usize(t, path, no)?,
        _ => return Err(r.err(no, "expected one value")),
    };
    let (no, v) = r.keyed("offset_clamp")?;
    let clamp: T = match v.as_slice() {
        [t] => parse_real(t, path, no)?,
        _ => return Err(r.err(no, "expected one value")),
    };
    let (no, v) = r.keyed("reject_radius")?;
    let reject = match v.as_slice() {
        ["none"] => None,
        [t] => Some(parse_real(t, path, no)?),
        _ => return Err(r.err(no, "expected one value")),
    };
    let xy = r.head("xy")?;
    let z = r.head("z")?;
    if let Some((no, _)) = r.lines.find(|(_, l)| !l.is_empty()) {
        return Err(r.err(no, "trailing data after model"));
    }
    RefinementModel::new(xy, z, k, clamp, reject)
}
