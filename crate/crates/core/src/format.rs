//! Line-oriented instance files.
//!
//! ```text
//! rfim v1
//! <width> <height> <J> <seed>
//! <h_0> <h_1> ... <h_{N-1}>
//! ```
//!
//! Reals are written with their shortest round-trip representation, so a
//! write/read cycle reproduces the instance bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::scalar::Real;

const MAGIC: &str = "rfim v1";

pub fn write_instance<T: Real>(instance: &Instance<T>) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(
        out,
        "{} {} {} {}",
        instance.width(),
        instance.height(),
        instance.coupling(),
        instance.seed()
    )
    .unwrap();
    let fields: Vec<String> = instance.fields().iter().map(|h| h.to_string()).collect();
    writeln!(out, "{}", fields.join(" ")).unwrap();
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_token<V: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<V> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from '{tok}'")))
}

pub fn read_instance<T: Real>(text: &str) -> Result<Instance<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(l) if l.trim() == MAGIC => {}
        Some(l) => return Err(parse_err(1, format!("expected '{MAGIC}', found '{}'", l.trim()))),
        None => return Err(parse_err(1, "empty file")),
    }
    let header = lines.next().ok_or_else(|| parse_err(2, "missing header line"))?;
    let mut toks = header.split_whitespace();
    let width: usize = parse_token(toks.next(), 2, "width")?;
    let height: usize = parse_token(toks.next(), 2, "height")?;
    let coupling: T = parse_token(toks.next(), 2, "coupling")?;
    let seed: u64 = parse_token(toks.next(), 2, "seed")?;
    if toks.next().is_some() {
        return Err(parse_err(2, "trailing tokens in header"));
    }
    let field_line = lines.next().ok_or_else(|| parse_err(3, "missing field line"))?;
    let fields = field_line
        .split_whitespace()
        .map(|t| parse_token::<T>(Some(t), 3, "field"))
        .collect::<Result<Vec<_>>>()?;
    if lines.next().is_some() {
        return Err(parse_err(4, "unexpected content after field line"));
    }
    Instance::with_seed(width, height, coupling, fields, seed)
}

pub fn load_instance<T: Real>(path: impl AsRef<Path>) -> Result<Instance<T>> {
    read_instance(&std::fs::read_to_string(path)?)
}

pub fn save_instance<T: Real>(instance: &Instance<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_instance(instance))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_instance;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let inst = Instance::new(2, 1, 0.6, vec![1.0, -1.0]).unwrap();
        assert_eq!(write_instance(&inst), "rfim v1\n2 1 0.6 0\n1 -1\n");
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_instance::<f64>("").is_err());
        assert!(read_instance::<f64>("rfim v2\n1 1 1 0\n1\n").is_err());
        assert!(read_instance::<f64>("rfim v1\n2 2 1 0\n1 1 1\n").is_err());
        assert!(read_instance::<f64>("rfim v1\n2 x 1 0\n1 1\n").is_err());
        assert!(read_instance::<f64>("rfim v1\n1 1 -1 0\n1\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(w in 1usize..8, h in 1usize..8, j in 0.01f64..10.0, seed: u64) {
            let inst = generate_instance(w, h, j, seed).unwrap();
            let back: Instance<f64> = read_instance(&write_instance(&inst)).unwrap();
            prop_assert_eq!(back.coupling().to_bits(), inst.coupling().to_bits());
            prop_assert_eq!(back, inst);
        }
    }
}
