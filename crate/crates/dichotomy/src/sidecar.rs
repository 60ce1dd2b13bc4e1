//! Externally computed feature values, `utterance_id,feature_name,value`.

use std::collections::BTreeMap;
use std::path::Path;

use dichotomy_core::features::Sidecar;

use crate::error::{Error, Result};

pub type SidecarTable = BTreeMap<String, Sidecar>;

pub fn read_sidecar(path: &Path) -> Result<SidecarTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sidecar_str(&text, path)
}

pub fn parse_sidecar_str(text: &str, origin: &Path) -> Result<SidecarTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv {
        path: origin.to_path_buf(),
        source,
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != ["utterance_id", "feature_name", "value"] {
        return Err(Error::format(origin, 1, "header must be `utterance_id,feature_name,value`"));
    }
    let mut table = SidecarTable::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let (id, name, raw) = (&row[0], &row[1], &row[2]);
        let value: f64 = raw
            .parse()
            .map_err(|_| Error::format(origin, line, format!("value {raw:?} is not a number")))?;
        if !value.is_finite() {
            return Err(Error::format(origin, line, format!("value for {name:?} is not finite")));
        }
        if table.entry(id.to_string()).or_default().insert(name.to_string(), value).is_some() {
            return Err(Error::format(origin, line, format!("{id:?} gives {name:?} twice")));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SidecarTable> {
        parse_sidecar_str(text, Path::new("side.csv"))
    }

    #[test]
    fn groups_values_by_utterance() {
        let t = parse("utterance_id,feature_name,value\nu1,GNE x,0.5\nu2,msl b1,-1e-3\nu1,msl b1,2\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t["u1"]["msl b1"], 2.0);
        assert_eq!(t["u2"]["msl b1"], -1e-3);
    }

    #[test]
    fn rejects_bad_rows() {
        let head = "utterance_id,feature_name,value\n";
        assert!(matches!(parse(&format!("{head}u1,a,abc\n")), Err(Error::Format { line: 2, .. })));
        assert!(matches!(parse(&format!("{head}u1,a,NaN\n")), Err(Error::Format { .. })));
        assert!(matches!(parse(&format!("{head}u1,a,1\nu1,a,2\n")), Err(Error::Format { line: 3, .. })));
        assert!(matches!(parse("id,name,value\n"), Err(Error::Format { line: 1, .. })));
    }
}
