//! Line-oriented snapshot persistence.
//!
//! ```text
//! # qae-snapshot v1
//! dim 2
//! budget 6 100
//! kraft_mass 9/64
//! entries 2
//! 001 state 2;1/1+0/1 i,0/1+0/1 i
//! 00010 state 2;0/1+0/1 i,1/1+0/1 i
//! ```
//!
//! Loading re-runs the machine on every program, so a file whose outputs or
//! mass disagree with the machine is rejected rather than trusted.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::dyadic::Dyadic;
use crate::error::{QaeError, Result};
use crate::machine::{decode, Budget, EnumerationSnapshot, MachineOutput, Program, SnapshotEntry};

pub const FORMAT_HEADER: &str = "# qae-snapshot v1";

pub fn to_text(snapshot: &EnumerationSnapshot) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    out.push_str(&format!("dim {}\n", snapshot.dim()));
    let b = snapshot.budget();
    out.push_str(&format!("budget {} {}\n", b.max_len, b.max_steps));
    out.push_str(&format!("kraft_mass {}\n", snapshot.kraft_mass()));
    out.push_str(&format!("entries {}\n", snapshot.entries().len()));
    for e in snapshot.entries() {
        out.push_str(&format!("{} {} {}\n", e.program, e.output.kind(), e.output.encoding()));
    }
    out
}

/// SHA-256 of the text serialization, lowercase hex.
pub fn digest(snapshot: &EnumerationSnapshot) -> String {
    Sha256::digest(to_text(snapshot).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn header_field<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, Vec<&'a str>)> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| QaeError::parse(0, format!("file ends before `{key}` header")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(QaeError::parse(no, format!("expected `{key}` header")));
    }
    Ok((no, parts.collect()))
}

fn parse_num<T: std::str::FromStr>(no: usize, s: Option<&&str>, what: &str) -> Result<T> {
    s.and_then(|s| s.parse().ok())
        .ok_or_else(|| QaeError::parse(no, format!("bad {what}")))
}

pub fn from_text(text: &str) -> Result<EnumerationSnapshot> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == FORMAT_HEADER => {}
        Some((no, _)) => return Err(QaeError::parse(no, "missing or unsupported format header")),
        None => return Err(QaeError::parse(1, "empty file")),
    }
    let (no, f) = header_field(&mut lines, "dim")?;
    let dim: usize = parse_num(no, f.first(), "dimension")?;
    let (no, f) = header_field(&mut lines, "budget")?;
    let budget = Budget::new(parse_num(no, f.first(), "max_len")?, parse_num(no, f.get(1), "max_steps")?);
    let (no, f) = header_field(&mut lines, "kraft_mass")?;
    let declared: Dyadic = parse_num(no, f.first(), "kraft_mass")?;
    let (no, f) = header_field(&mut lines, "entries")?;
    let count: usize = parse_num(no, f.first(), "entry count")?;

    let mut entries = Vec::with_capacity(count);
    let mut last_line = no;
    for _ in 0..count {
        let (no, line) = lines
            .next()
            .ok_or_else(|| QaeError::parse(last_line + 1, format!("truncated: expected {count} entries")))?;
        last_line = no;
        let mut parts = line.splitn(3, ' ');
        let (Some(bits), Some(kind), Some(enc)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(QaeError::parse(no, "entry needs `<bits> <kind> <encoding>`"));
        };
        let program: Program = bits.parse().map_err(|_| QaeError::parse(no, "bad program bits"))?;
        let stored = MachineOutput::parse(kind, enc).map_err(|e| QaeError::parse(no, e.to_string()))?;
        let output = decode(&program, dim)
            .map_err(|r| QaeError::Integrity(format!("line {no}: program {program} rejected by machine ({r:?})")))?;
        if output != stored {
            return Err(QaeError::Integrity(format!(
                "line {no}: stored output differs from machine output"
            )));
        }
        let weight = program
            .weight()
            .ok_or_else(|| QaeError::parse(no, "program too long for exact weights"))?;
        entries.push(SnapshotEntry { program, output, weight });
    }
    if let Some((no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(QaeError::parse(no, format!("unexpected trailing content {extra:?}")));
    }
    let snap = EnumerationSnapshot::from_entries(dim, budget, entries)?;
    if snap.entries().len() != count {
        return Err(QaeError::Integrity("duplicate programs in snapshot file".into()));
    }
    if snap.kraft_mass() != declared {
        return Err(QaeError::Integrity(format!(
            "header kraft_mass {declared} but entries sum to {}",
            snap.kraft_mass()
        )));
    }
    Ok(snap)
}

pub fn write(path: impl AsRef<Path>, snapshot: &EnumerationSnapshot) -> Result<()> {
    fs::write(path, to_text(snapshot))?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<EnumerationSnapshot> {
    from_text(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::enumerate;

    fn sample() -> EnumerationSnapshot {
        enumerate(2, Budget::new(10, 100), 24).unwrap()
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let snap = sample();
        let text = to_text(&snap);
        let back = from_text(&text).unwrap();
        assert_eq!(back, snap);
        assert_eq!(to_text(&back), text);
        assert_eq!(digest(&back), digest(&snap));
        assert_eq!(digest(&snap).len(), 64);
    }

    #[test]
    fn truncation_is_a_parse_error() {
        let text = to_text(&sample());
        let cut: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        match from_text(&cut) {
            Err(QaeError::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_kraft_header_is_an_integrity_error() {
        let snap = sample();
        let text = to_text(&snap).replace(
            &format!("kraft_mass {}", snap.kraft_mass()),
            "kraft_mass 1/2",
        );
        assert!(matches!(from_text(&text), Err(QaeError::Integrity(_))));
    }

    #[test]
    fn tampered_output_is_rejected() {
        let text = to_text(&sample()).replacen("001 state 2;1/1+0/1 i,0/1+0/1 i", "001 state 2;0/1+0/1 i,1/1+0/1 i", 1);
        assert!(matches!(from_text(&text), Err(QaeError::Integrity(_))));
    }
}
