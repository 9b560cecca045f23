//! Long-format CSV input: a `group,value` header followed by one
//! observation per row.

use std::path::Path;

use indexmap::IndexMap;
use lncat::GroupSample;

use crate::CliError;

/// Observations grouped by label, in order of first appearance.
#[derive(Debug, Clone)]
pub struct InputTable {
    groups: IndexMap<String, Vec<(u64, f64)>>,
}

impl InputTable {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.groups.keys().map(String::as_str)
    }

    /// Validated samples, one per label.
    pub fn samples(&self) -> Result<Vec<GroupSample>, CliError> {
        if self.groups.len() < 2 {
            return Err(CliError::Input(format!(
                "need at least 2 distinct groups, found {}",
                self.groups.len()
            )));
        }
        self.groups
            .iter()
            .map(|(label, rows)| {
                if rows.len() < 2 {
                    return Err(CliError::Input(format!(
                        "line {}: group '{label}' has only {} observation, at least 2 are required",
                        rows[0].0,
                        rows.len()
                    )));
                }
                let sample = GroupSample::new(rows.iter().map(|&(_, v)| v).collect())
                    .map_err(|e| CliError::Input(format!("group '{label}': {e}")))?;
                if sample.summary().s2() == 0.0 {
                    return Err(CliError::Input(format!(
                        "group '{label}': all values are identical, the log-scale variance is zero"
                    )));
                }
                Ok(sample)
            })
            .collect()
    }
}

pub fn read_table(path: &Path) -> Result<InputTable, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_table(&bytes)
}

pub fn parse_table(bytes: &[u8]) -> Result<InputTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);

    let header = reader
        .headers()
        .map_err(|e| CliError::Input(format!("line 1: {e}")))?
        .clone();
    if header.len() != 2 || &header[0] != "group" || &header[1] != "value" {
        let found: Vec<&str> = header.iter().collect();
        return Err(CliError::Input(format!(
            "line 1: expected header 'group,value', found '{}'",
            found.join(",")
        )));
    }

    let mut groups: IndexMap<String, Vec<(u64, f64)>> = IndexMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Input(format!("line {line}: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(CliError::Input(format!(
                "line {line}: expected 2 fields (group,value), found {}",
                record.len()
            )));
        }
        let label = &record[0];
        if label.is_empty() {
            return Err(CliError::Input(format!("line {line}: empty group label")));
        }
        let raw = &record[1];
        let value: f64 = raw
            .parse()
            .map_err(|_| CliError::Input(format!("line {line}: cannot parse value '{raw}'")))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(CliError::Input(format!(
                "line {line}: value {raw} is not a positive finite number"
            )));
        }
        groups.entry(label.to_string()).or_default().push((line, value));
    }
    Ok(InputTable { groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input_error(text: &str) -> String {
        match parse_table(text.as_bytes()).and_then(|t| t.samples()) {
            Err(CliError::Input(msg)) => msg,
            other => panic!("expected input error, got {other:?}"),
        }
    }

    #[test]
    fn groups_in_order() {
        let t = parse_table(b"group,value\nb,1\na,2\nb,3\na,4.5\n").unwrap();
        assert_eq!(t.labels().collect::<Vec<_>>(), vec!["b", "a"]);
        let s = t.samples().unwrap();
        assert_eq!(s[0].observations(), &[1.0, 3.0]);
        assert_eq!(s[1].observations(), &[2.0, 4.5]);
    }

    #[test]
    fn whitespace_is_trimmed() {
        let t = parse_table(b"group, value\n a , 1.5\na,2\nb,3\nb,1e-3\n").unwrap();
        assert_eq!(t.samples().unwrap().len(), 2);
    }

    #[test]
    fn errors_name_the_line() {
        assert!(input_error("group,value\na,1\na,-3\nb,1\nb,2\n").starts_with("line 3:"));
        assert!(input_error("group,value\na,1\na,x\n").contains("line 3: cannot parse value 'x'"));
        assert!(input_error("grp,val\na,1\n").starts_with("line 1:"));
        assert!(input_error("group,value\na,1,2\n").starts_with("line 2:"));
        assert!(input_error("group,value\na,1\na,2\nb,2\n").contains("group 'b'"));
        assert!(input_error("group,value\na,1\na,2\n").contains("2 distinct groups"));
        assert!(input_error("group,value\na,1\na,1\nb,2\nb,3\n").contains("identical"));
        assert!(input_error("group,value\na,1\na,inf\n").starts_with("line 3:"));
    }
}
