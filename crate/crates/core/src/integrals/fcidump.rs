use super::{IntegralSet, PackedEri};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// Provenance sidecar stored next to each fixture as `<basename>.meta.json`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FixtureMeta {
    pub label: String,
    pub basis: String,
    pub geometry_angstrom: Vec<(String, [f64; 3])>,
    #[serde(default)]
    pub bond_parameter_angstrom: Option<f64>,
    pub charge: i32,
    pub multiplicity: u32,
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub hf_energy: f64,
    pub nuclear_repulsion: f64,
    pub generator: String,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct Header {
    values: HashMap<String, (usize, Vec<String>)>,
    end_line: usize,
}

fn parse_header(lines: &[&str]) -> Result<Header> {
    let first = lines.iter().position(|l| !l.trim().is_empty()).ok_or_else(|| parse_err(1, "empty input"))?;
    let start = lines[first].trim_start();
    if !start.to_ascii_uppercase().starts_with("&FCI") {
        return Err(parse_err(first + 1, "expected '&FCI' header"));
    }
    let mut values: HashMap<String, (usize, Vec<String>)> = HashMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in lines.iter().enumerate().skip(first) {
        let line_no = idx + 1;
        let mut text = raw.trim().to_string();
        if idx == first {
            text = text[4..].to_string();
        }
        let upper = text.to_ascii_uppercase();
        let (body, done) = match upper.find("&END").or_else(|| upper.find("$END")) {
            Some(k) => (&text[..k], true),
            None if upper == "/" || upper.ends_with(" /") => (&text[..text.len() - 1], true),
            None => (&text[..], false),
        };
        for tok in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            if let Some((key, rest)) = tok.split_once('=') {
                let key = key.trim().to_ascii_uppercase();
                if key.is_empty() {
                    return Err(parse_err(line_no, format!("malformed header token '{tok}'")));
                }
                let entry = values.entry(key.clone()).or_insert((line_no, Vec::new()));
                entry.0 = line_no;
                entry.1.clear();
                if !rest.is_empty() {
                    entry.1.push(rest.to_string());
                }
                current = Some(key);
            } else {
                match &current {
                    Some(k) => values.get_mut(k).unwrap().1.push(tok.to_string()),
                    None => return Err(parse_err(line_no, format!("value '{tok}' before any key"))),
                }
            }
        }
        if done {
            return Ok(Header { values, end_line: idx });
        }
    }
    Err(parse_err(lines.len(), "header not terminated by '&END'"))
}

impl Header {
    fn int(&self, key: &'static str) -> Result<Option<i64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, vals)) => match vals.as_slice() {
                [v] => v
                    .parse::<i64>()
                    .map(Some)
                    .map_err(|_| parse_err(*line, format!("{key} value '{v}' is not an integer"))),
                _ => Err(parse_err(*line, format!("{key} expects exactly one value"))),
            },
        }
    }

    fn required(&self, key: &'static str) -> Result<i64> {
        self.int(key)?.ok_or(Error::MissingKey(key))
    }
}

fn parse_value(tok: &str) -> Option<f64> {
    tok.replace(['D', 'd'], "e").parse::<f64>().ok()
}

/// Parses FCIDUMP text (Molpro convention, 1-based indices).
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(&lines)?;
    let norb = header.required("NORB")?;
    let nelec = header.required("NELEC")?;
    let ms2 = header.int("MS2")?.unwrap_or(0);
    let isym = header.int("ISYM")?.unwrap_or(1);
    if norb <= 0 || norb > 4096 {
        let line = header.values["NORB"].0;
        return Err(parse_err(line, format!("NORB={norb} out of range")));
    }
    if nelec < 0 {
        let line = header.values["NELEC"].0;
        return Err(parse_err(line, format!("NELEC={nelec} is negative")));
    }
    let n = norb as usize;
    let orbsym = match header.values.get("ORBSYM") {
        None => vec![1; n],
        Some((line, vals)) => {
            let parsed: std::result::Result<Vec<i64>, _> = vals.iter().map(|v| v.parse::<i64>()).collect();
            let parsed = parsed.map_err(|_| parse_err(*line, "ORBSYM entries must be integers"))?;
            if parsed.len() != n {
                return Err(parse_err(*line, format!("ORBSYM has {} entries, expected {n}", parsed.len())));
            }
            parsed
        }
    };

    let mut h = DMatrix::zeros(n, n);
    let mut h_seen = vec![false; n * n];
    let mut v = PackedEri::zeros(n);
    let mut v_seen = vec![false; v.as_slice().len()];
    let mut core = 0.0;
    let mut core_seen = false;

    let check = |seen: bool, old: f64, new: f64, line: usize| -> Result<()> {
        if seen && (old - new).abs() > 1e-10 {
            Err(Error::Consistency { line, message: format!("conflicting duplicate entry ({old} vs {new})") })
        } else {
            Ok(())
        }
    };

    for (idx, raw) in lines.iter().enumerate().skip(header.end_line + 1) {
        let line = idx + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(parse_err(line, format!("expected 'value i j k l', found {} fields", toks.len())));
        }
        let val = parse_value(toks[0]).ok_or_else(|| parse_err(line, format!("bad value '{}'", toks[0])))?;
        let mut ix = [0usize; 4];
        for (slot, tok) in ix.iter_mut().zip(&toks[1..]) {
            let k: i64 = tok.parse().map_err(|_| parse_err(line, format!("bad index '{tok}'")))?;
            if k < 0 || k > norb {
                return Err(Error::Bounds { line, message: format!("index {k} outside 0..={norb}") });
            }
            *slot = k as usize;
        }
        match ix {
            [0, 0, 0, 0] => {
                check(core_seen, core, val, line)?;
                core = val;
                core_seen = true;
            }
            [i, 0, 0, 0] if i > 0 => {} // orbital energies are not used
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (p, q) = (i - 1, j - 1);
                check(h_seen[p * n + q], h[(p, q)], val, line)?;
                h[(p, q)] = val;
                h[(q, p)] = val;
                h_seen[p * n + q] = true;
                h_seen[q * n + p] = true;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let key = PackedEri::index(i - 1, j - 1, k - 1, l - 1);
                check(v_seen[key], v.as_slice()[key], val, line)?;
                v.set(i - 1, j - 1, k - 1, l - 1, val);
                v_seen[key] = true;
            }
            _ => return Err(parse_err(line, format!("unsupported index pattern {:?}", ix))),
        }
    }

    let mut ints = IntegralSet::new(n, nelec as usize, ms2 as i32, core, h, v)?;
    ints.orbsym = orbsym;
    ints.isym = isym;
    Ok(ints)
}

fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

/// Reads an FCIDUMP file and, when present, its `.meta.json` sidecar.
pub fn load_fixture(path: impl AsRef<Path>) -> Result<(IntegralSet, Option<FixtureMeta>)> {
    let path = path.as_ref();
    let ints = parse_fcidump(&std::fs::read_to_string(path)?)?;
    let side = sidecar_path(path);
    let meta = if side.exists() { Some(serde_json::from_str(&std::fs::read_to_string(side)?)?) } else { None };
    Ok((ints, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str =
        " &FCI NORB=1,NELEC=2,MS2=0,\n  ORBSYM=1,\n  ISYM=1,\n &END\n 0.5 1 1 1 1\n -1.0 1 1 0 0\n 0.3 0 0 0 0\n";

    #[test]
    fn one_orbital_energy() {
        let ints = parse_fcidump(ONE).unwrap();
        assert_eq!(ints.n_orb, 1);
        assert!((ints.hf_energy() - (-1.2)).abs() < 1e-14);
    }

    #[test]
    fn missing_norb() {
        let text = ONE.replace("NORB=1,", "");
        match parse_fcidump(&text) {
            Err(Error::MissingKey(k)) => assert_eq!(k, "NORB"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_errors_carry_line() {
        let text = ONE.replace("ISYM=1", "ISYM=x");
        match parse_fcidump(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = ONE.replace(" &END\n", "");
        assert!(matches!(parse_fcidump(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn out_of_range_index() {
        let text = format!("{ONE} 0.1 2 1 1 1\n");
        match parse_fcidump(&text) {
            Err(Error::Bounds { line, .. }) => assert_eq!(line, 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates() {
        let same = format!("{ONE} -1.0 1 1 0 0\n");
        assert!(parse_fcidump(&same).is_ok());
        let clash = format!("{ONE} -1.1 1 1 0 0\n");
        assert!(matches!(parse_fcidump(&clash), Err(Error::Consistency { line: 8, .. })));
    }

    #[test]
    fn fortran_exponent_and_slash_terminator() {
        let text = "&FCI NORB=2, NELEC=2, MS2=0,\n ORBSYM=1,1, ISYM=1\n/\n 1.0D-01 2 1 2 1\n -1.0 1 1 0 0\n -0.5 2 2 0 0\n 0.2 2 1 0 0\n";
        let ints = parse_fcidump(text).unwrap();
        assert!((ints.eri(0, 1, 1, 0) - 0.1).abs() < 1e-15);
        assert_eq!(ints.h[(0, 1)], 0.2);
    }
}
