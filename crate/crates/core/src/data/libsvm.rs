use std::io::{BufRead, Write};

use super::{DataError, Dataset, SparseRow};

/// Parses LIBSVM text: `<label> <index>:<value> …` per line with 1-based,
/// strictly increasing indices. `#` starts a comment; blank lines are skipped.
///
/// `n_features` is `1 + max index` unless `n_features` is given, in which case
/// every index must fit below it.
pub fn parse_libsvm<R: BufRead>(reader: R, source: &str, n_features: Option<usize>) -> Result<Dataset, DataError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut width = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let err = |msg: String| DataError::Parse { line: line_no, msg };
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("bad label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(err(format!("non-finite label {label_tok:?}")));
        }
        let mut row = SparseRow::default();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index in {tok:?}")))?;
            if idx == 0 {
                return Err(err("index 0 is invalid (indices are 1-based)".into()));
            }
            let val: f64 = val.parse().map_err(|_| err(format!("bad value in {tok:?}")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite value in {tok:?}")));
            }
            let idx = idx - 1;
            if row.indices.last().is_some_and(|&last| idx <= last) {
                return Err(err(format!("index {} does not increase", idx + 1)));
            }
            if let Some(n) = n_features {
                if idx >= n {
                    return Err(err(format!("index {} exceeds {n} features", idx + 1)));
                }
            }
            width = width.max(idx + 1);
            row.indices.push(idx);
            row.values.push(val);
        }
        rows.push(row);
        labels.push(label);
    }
    Ok(Dataset {
        rows,
        labels,
        n_features: n_features.unwrap_or(width),
        source: source.to_string(),
    })
}

pub fn parse_libsvm_str(text: &str, source: &str) -> Result<Dataset, DataError> {
    parse_libsvm(text.as_bytes(), source, None)
}

/// Writes `ds` in LIBSVM format with shortest round-trip float formatting.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut w: W) -> std::io::Result<()> {
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        write!(w, "{label:?}")?;
        for (i, v) in row.indices.iter().zip(&row.values) {
            write!(w, " {}:{v:?}", i + 1)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_row() {
        let ds = parse_libsvm_str("+1 1:0.5 3:-2\n", "t").unwrap();
        assert_eq!(ds.rows[0].indices, vec![0, 2]);
        assert_eq!(ds.rows[0].values, vec![0.5, -2.0]);
        assert_eq!(ds.labels, vec![1.0]);
        assert_eq!(ds.n_features, 3);
    }

    #[test]
    fn empty_feature_list() {
        let ds = parse_libsvm_str("-1\n", "t").unwrap();
        assert_eq!(ds.rows, vec![SparseRow::default()]);
        assert_eq!(ds.labels, vec![-1.0]);
        assert_eq!(ds.n_features, 0);
    }

    #[test]
    fn comments_and_blank_lines() {
        let ds = parse_libsvm_str("# header\n\n1 2:3 # trailing\n   \n", "t").unwrap();
        assert_eq!(ds.samples(), 1);
        assert_eq!(ds.n_features, 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("1 1:1\n1 0:2\n", 2),
            ("1 2:1 2:3\n", 1),
            ("1 3:1 2:3\n", 1),
            ("1 1:1\n\nabc 1:2\n", 3),
            ("1 1-2\n", 1),
            ("1 x:2\n", 1),
            ("1 1:nan\n", 1),
            ("1 1:2e\n", 1),
        ];
        for (text, line) in cases {
            match parse_libsvm_str(text, "t") {
                Err(DataError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn feature_override() {
        let ds = parse_libsvm(&b"1 2:1\n"[..], "t", Some(10)).unwrap();
        assert_eq!(ds.n_features, 10);
        assert!(parse_libsvm(&b"1 11:1\n"[..], "t", Some(10)).is_err());
    }

    fn dataset() -> impl Strategy<Value = Dataset> {
        let row = proptest::collection::btree_map(0usize..50, any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..8)
            .prop_map(|m| SparseRow {
                indices: m.keys().copied().collect(),
                values: m.values().copied().collect(),
            });
        let label = prop_oneof![Just(1.0), Just(-1.0), Just(0.0), -1e3f64..1e3];
        proptest::collection::vec((row, label), 0..20).prop_map(|rows| {
            let n_features = rows.iter().filter_map(|(r, _)| r.indices.last()).max().map_or(0, |m| m + 1);
            let (rows, labels) = rows.into_iter().unzip();
            Dataset {
                rows,
                labels,
                n_features,
                source: "fuzz".into(),
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn write_then_parse_is_identity(ds in dataset()) {
            let mut buf = Vec::new();
            write_libsvm(&ds, &mut buf).unwrap();
            let back = parse_libsvm(buf.as_slice(), "fuzz", None).unwrap();
            prop_assert_eq!(&back, &ds);
            let mut again = Vec::new();
            write_libsvm(&back, &mut again).unwrap();
            prop_assert_eq!(again, buf);
        }
    }
}
