//! CSV tables with a trailing config-hash comment.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Serialized table followed by `# config_hash=<hex>`.
    pub fn to_bytes(&self, config_hash: &str) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let mut bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        bytes.extend_from_slice(format!("# config_hash={config_hash}\n").as_bytes());
        Ok(bytes)
    }

    pub fn write(&self, path: &Path, config_hash: &str) -> Result<(), CliError> {
        let bytes = self.to_bytes(config_hash)?;
        std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source })
    }
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn diagnostics(notes: &[String]) -> String {
    notes.join("; ")
}

/// SHA-256 over the command, the canonical config entries, the sweep and
/// the seed.
pub fn config_hash<'a>(
    command: &str,
    entries: impl Iterator<Item = (&'a str, f64)>,
    sweep: Option<&str>,
    seed: Option<u64>,
) -> String {
    let mut canonical = format!("command={command}\n");
    for (k, v) in entries {
        let _ = writeln!(canonical, "{k}={v}");
    }
    if let Some(s) = sweep {
        let _ = writeln!(canonical, "sweep={s}");
    }
    if let Some(s) = seed {
        let _ = writeln!(canonical, "seed={s}");
    }
    Sha256::digest(canonical.as_bytes()).iter().fold(String::with_capacity(64), |mut out, b| {
        let _ = write!(out, "{b:02x}");
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "diagnostics"]);
        t.push(vec![num(0.1), diagnostics(&["x, y".into(), "z".into()])]);
        let text = String::from_utf8(t.to_bytes("00").unwrap()).unwrap();
        assert_eq!(text, "a,diagnostics\n0.1,\"x, y; z\"\n# config_hash=00\n");
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 0.1, -2.5, 1e-17, -2.7755575615628914e-17, 123456.789, 1e20] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(2.5e-17), "2.5e-17");
        assert_eq!(num(0.25), "0.25");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let e = [("bath.beta", 1.0), ("bath.kappa", 1.0)];
        let h1 = config_hash("efficiency-curve", e.iter().copied(), Some("bath.beta=0.1:1:3"), None);
        let h2 = config_hash("efficiency-curve", e.iter().copied(), Some("bath.beta=0.1:1:3"), None);
        let h3 = config_hash("efficiency-curve", e.iter().copied(), Some("bath.beta=0.1:1:4"), None);
        assert_eq!(h1, h2);
        assert_ne!(h1, h3);
        assert_eq!(h1.len(), 64);
        // sha256 of the empty string
        assert_eq!(
            Sha256::digest(b"").iter().map(|b| format!("{b:02x}")).collect::<String>(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
