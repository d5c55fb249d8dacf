//! JSON and TSV emission shared by the subcommands.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use phonodist::formats::{fmt_num, round_sig};
use serde_json::{Map, Number, Value};

use crate::CliError;

/// Version of every emitted document layout.
pub const SCHEMA_VERSION: u64 = 1;

/// A rounded JSON number; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Object with keys in sorted order.
pub fn object<'a>(fields: impl IntoIterator<Item = (&'a str, Value)>) -> Value {
    Value::Object(
        fields
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<String, Value>>(),
    )
}

pub fn named_numbers<'a>(names: impl IntoIterator<Item = &'a String>, values: &[f64]) -> Value {
    Value::Object(names.into_iter().zip(values).map(|(n, &v)| (n.clone(), num(v))).collect())
}

/// Top-level document: `schema_version`, `command` and `config` plus `body`.
pub fn document(command: &str, config: Value, body: Vec<(&str, Value)>) -> String {
    let mut fields = vec![
        ("schema_version", Value::from(SCHEMA_VERSION)),
        ("command", Value::from(command)),
        ("config", config),
    ];
    fields.extend(body);
    let mut text = serde_json::to_string_pretty(&object(fields)).expect("JSON values serialize");
    text.push('\n');
    text
}

/// `# key<TAB>value` configuration preamble of TSV outputs.
pub fn tsv_preamble(command: &str, config: &[(&str, String)]) -> String {
    let mut out = format!("# schema_version\t{SCHEMA_VERSION}\n# command\t{command}\n");
    for (k, v) in config {
        out.push_str(&format!("# {k}\t{v}\n"));
    }
    out
}

/// TSV cell: `NA` for missing or non-finite values.
pub fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => fmt_num(v),
        _ => "NA".into(),
    }
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_rounded_and_nonfinite_is_null() {
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(f64::INFINITY), Value::Null);
        assert_eq!(num(0.1 + 0.2).to_string(), "0.3");
    }

    #[test]
    fn keys_are_sorted() {
        let v = object([("b", Value::from(1)), ("a", Value::from(2))]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":2,"b":1}"#);
    }

    #[test]
    fn missing_cells() {
        assert_eq!(cell(None), "NA");
        assert_eq!(cell(Some(f64::NAN)), "NA");
        assert_eq!(cell(Some(2.5)), "2.5");
    }
}
