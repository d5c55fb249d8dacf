//! Text formats for lexicons, incidence tables, frequency tables, feature
//! tables and fit tables.
//!
//! All inputs are UTF-8 with tab-separated fields. Labels are normalized to
//! NFC on ingest and otherwise treated as opaque strings. Blank lines are
//! skipped, as are lines starting with `#` in the tabular formats. Errors
//! carry 1-based line numbers.

use unicode_normalization::UnicodeNormalization;

use crate::entropy::CountVector;
use crate::error::{Error, Result};
use crate::features::{FeatureTable, IncidenceTable};
use crate::lexicon::PhonemizedLexicon;

pub const INCIDENCE_HEADER: [&str; 3] = ["phoneme", "languages_with", "languages_total"];
pub const FREQUENCY_HEADER: [&str; 2] = ["phoneme", "count"];

pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Non-empty lines with their 1-based numbers, trailing `\r` removed.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    lines(text).filter(|(_, l)| !l.starts_with('#'))
}

fn parse_count(field: &str, line: usize, what: &str) -> Result<u64> {
    let f = field.trim();
    f.parse::<u64>().map_err(|_| {
        if f.parse::<f64>().is_ok() {
            Error::ingest(line, format!("{what} must be a non-negative integer, got {f:?}"))
        } else {
            Error::ingest(line, format!("cannot parse {what} from {f:?}"))
        }
    })
}

fn parse_real(field: &str, line: usize, what: &str) -> Result<f64> {
    let f = field.trim();
    let v: f64 = f
        .parse()
        .map_err(|_| Error::ingest(line, format!("cannot parse {what} from {f:?}")))?;
    if !v.is_finite() {
        return Err(Error::ingest(line, format!("{what} must be finite, got {f:?}")));
    }
    Ok(v)
}

fn label(field: &str, line: usize) -> Result<String> {
    let l = nfc(field.trim());
    if l.is_empty() {
        return Err(Error::ingest(line, "empty phoneme label"));
    }
    Ok(l)
}

/// Lexicon lines `count<TAB>ph ph ph ...`.
pub fn parse_lexicon_entries(text: &str) -> Result<Vec<(Vec<String>, u64)>> {
    let mut entries = Vec::new();
    for (no, line) in lines(text) {
        let (count, word) = line
            .split_once('\t')
            .ok_or_else(|| Error::ingest(no, "expected `count<TAB>phonemes`"))?;
        let count = parse_count(count, no, "token count")?;
        if count == 0 {
            return Err(Error::ingest(no, "token count must be positive"));
        }
        let phonemes: Vec<String> = word.split_whitespace().map(nfc).collect();
        if phonemes.is_empty() {
            return Err(Error::ingest(no, "empty word"));
        }
        entries.push((phonemes, count));
    }
    if entries.is_empty() {
        return Err(Error::ingest(0, "lexicon has no entries"));
    }
    Ok(entries)
}

pub fn parse_lexicon(text: &str) -> Result<PhonemizedLexicon> {
    PhonemizedLexicon::new(parse_lexicon_entries(text)?, None)
}

pub fn write_lexicon(lex: &PhonemizedLexicon) -> String {
    let mut out = String::new();
    for w in lex.words() {
        let labels: Vec<&str> = w.phonemes.iter().map(|&p| lex.label(p)).collect();
        out.push_str(&format!("{}\t{}\n", w.count, labels.join(" ")));
    }
    out
}

fn check_header(line: Option<(usize, &str)>, expected: &[&str]) -> Result<()> {
    let (no, header) = line.ok_or_else(|| Error::ingest(0, "file is empty"))?;
    let fields: Vec<&str> = header.split('\t').map(str::trim).collect();
    if fields != expected {
        return Err(Error::ingest(
            no,
            format!("expected header `{}`, got `{header}`", expected.join("\\t")),
        ));
    }
    Ok(())
}

/// Incidence TSV with header `phoneme<TAB>languages_with<TAB>languages_total`.
pub fn parse_incidence(text: &str) -> Result<IncidenceTable> {
    let mut it = data_lines(text);
    check_header(it.next(), &INCIDENCE_HEADER)?;
    let mut rows = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (no, line) in it {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::ingest(no, format!("expected 3 fields, got {}", fields.len())));
        }
        let p = label(fields[0], no)?;
        let with = parse_count(fields[1], no, "languages_with")?;
        let total = parse_count(fields[2], no, "languages_total")?;
        if with == 0 || with > total {
            return Err(Error::ingest(
                no,
                format!("need 0 < languages_with <= languages_total, got {with}/{total}"),
            ));
        }
        if !seen.insert(p.clone()) {
            return Err(Error::ingest(no, format!("duplicate phoneme {p:?}")));
        }
        rows.push((p, with, total));
    }
    IncidenceTable::from_counts(rows)
}

pub fn write_incidence(rows: &[(String, u64, u64)]) -> String {
    let mut out = INCIDENCE_HEADER.join("\t") + "\n";
    for (p, w, t) in rows {
        out.push_str(&format!("{p}\t{w}\t{t}\n"));
    }
    out
}

/// Frequency TSV `phoneme<TAB>count`, with an optional header row.
pub fn parse_frequency_table(text: &str) -> Result<CountVector> {
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, (no, line)) in data_lines(text).enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if i == 0 && fields.iter().map(|f| f.trim()).eq(FREQUENCY_HEADER.iter().copied()) {
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::ingest(no, format!("expected `phoneme<TAB>count`, got {} fields", fields.len())));
        }
        let p = label(fields[0], no)?;
        let c = parse_count(fields[1], no, "count")?;
        if !seen.insert(p.clone()) {
            return Err(Error::ingest(no, format!("duplicate phoneme {p:?}")));
        }
        entries.push((p, c));
    }
    if entries.is_empty() {
        return Err(Error::ingest(0, "frequency table has no rows"));
    }
    CountVector::new(entries)
}

pub fn write_frequency_table(counts: &CountVector) -> String {
    let mut out = FREQUENCY_HEADER.join("\t") + "\n";
    for (p, c) in counts.labels().iter().zip(counts.counts()) {
        out.push_str(&format!("{p}\t{c}\n"));
    }
    out
}

/// Feature TSV: header `phoneme<TAB>observed_prob<TAB><feature>...`, then one
/// row per phoneme. Lines starting with `#` (configuration and footer) are
/// ignored.
pub fn parse_feature_table(text: &str) -> Result<FeatureTable> {
    let mut it = data_lines(text);
    let (hno, header) = it.next().ok_or_else(|| Error::ingest(0, "feature table is empty"))?;
    let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "phoneme" || cols[1] != "observed_prob" {
        return Err(Error::Schema(format!(
            "line {hno}: feature table header must start with `phoneme\\tobserved_prob`, got `{header}`"
        )));
    }
    let names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
    if let Some(dup) = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)) {
        return Err(Error::Schema(format!("duplicate feature column {:?}", dup.1)));
    }
    let mut phonemes = Vec::new();
    let mut observed = Vec::new();
    let mut rows = Vec::new();
    for (no, line) in it {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != cols.len() {
            return Err(Error::ingest(
                no,
                format!("expected {} fields, got {}", cols.len(), fields.len()),
            ));
        }
        phonemes.push(label(fields[0], no)?);
        let p = parse_real(fields[1], no, "observed_prob")?;
        if p < 0.0 {
            return Err(Error::ingest(no, "observed_prob must be non-negative"));
        }
        observed.push(p);
        rows.push(
            fields[2..]
                .iter()
                .zip(&names)
                .map(|(f, n)| parse_real(f, no, n))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    if phonemes.is_empty() {
        return Err(Error::ingest(hno, "feature table has no rows"));
    }
    FeatureTable::new(phonemes, observed, names, rows)
}

/// Feature TSV rows followed by `#` footer lines with the constraint
/// expectations, coverage and exclusions.
pub fn write_feature_table(table: &FeatureTable) -> String {
    let mut out = String::from("phoneme\tobserved_prob");
    for n in table.feature_names() {
        out.push('\t');
        out.push_str(n);
    }
    out.push('\n');
    for (i, p) in table.phonemes().iter().enumerate() {
        out.push_str(p);
        out.push('\t');
        out.push_str(&fmt_num(table.observed()[i]));
        for v in table.row(i) {
            out.push('\t');
            out.push_str(&fmt_num(*v));
        }
        out.push('\n');
    }
    let c = crate::features::constraint_expectations(table);
    for (n, v) in c.names.iter().zip(&c.values) {
        out.push_str(&format!("# constraint\t{n}\t{}\n", fmt_num(*v)));
    }
    if let Some(cov) = table.coverage {
        out.push_str(&format!("# coverage\t{}\n", fmt_num(cov)));
    }
    for e in &table.excluded {
        out.push_str(&format!("# excluded\t{}\t{}\n", e.phoneme, e.reason.name()));
    }
    out
}

/// `(n, alpha_hat)` pairs from a TSV whose header names at least the
/// columns `n` and `alpha_hat`. Rows with `alpha_hat` of `NA` or empty are
/// skipped.
pub fn parse_fits(text: &str) -> Result<Vec<(f64, f64)>> {
    Ok(fit_rows(text, None)?.into_iter().map(|(n, a, _)| (n, a)).collect())
}

/// As [`parse_fits`], also reading the label in column `group`.
pub fn parse_grouped_fits(text: &str, group: &str) -> Result<Vec<(f64, f64, String)>> {
    Ok(fit_rows(text, Some(group))?
        .into_iter()
        .map(|(n, a, g)| (n, a, g.unwrap_or_default()))
        .collect())
}

fn fit_rows(text: &str, group: Option<&str>) -> Result<Vec<(f64, f64, Option<String>)>> {
    let mut it = data_lines(text);
    let (hno, header) = it.next().ok_or_else(|| Error::ingest(0, "fits table is empty"))?;
    let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Schema(format!("line {hno}: fits table has no `{name}` column")))
    };
    let (ni, ai) = (find("n")?, find("alpha_hat")?);
    let gi = group.map(find).transpose()?;
    let mut out = Vec::new();
    for (no, line) in it {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != cols.len() {
            return Err(Error::ingest(
                no,
                format!("expected {} fields, got {}", cols.len(), fields.len()),
            ));
        }
        let a = fields[ai].trim();
        if a.is_empty() || a == "NA" {
            continue;
        }
        let g = match gi {
            Some(i) => Some(label(fields[i], no)?),
            None => None,
        };
        out.push((parse_real(fields[ni], no, "n")?, parse_real(a, no, "alpha_hat")?, g));
    }
    Ok(out)
}

/// Significant digits used for every printed number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits, trailing zeros
/// removed; fixed notation for exponents in `[-5, 12)`, otherwise
/// scientific.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
