//! Text formats for tables, snapshots, approximators and codebooks.
//!
//! Header lines are `key<TAB>value`; data lines follow a column line.
//! The empty word is written `-`. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::io::Read;

use anyhow::{anyhow, bail, Context, Result};
use kolmo_core::apriori::AprioriTable;
use kolmo_core::arith::{Dyadic, Interval};
use kolmo_core::bits::BitString;
use kolmo_core::coder::{CodeBook, CodeEntry};
use kolmo_core::quotient::JointTable;
use kolmo_core::semimeasure::{ConditionalSemimeasure, TableApproximator};

pub fn word(w: &BitString) -> String {
    if w.is_empty() {
        "-".into()
    } else {
        w.to_string()
    }
}

pub fn parse_word(s: &str) -> Result<BitString> {
    s.trim().parse().map_err(|e| anyhow!("bad word {s:?}: {e}"))
}

pub fn parse_dyadic(s: &str) -> Result<Dyadic> {
    s.trim().parse().map_err(|e| anyhow!("bad value {s:?}: {e}"))
}

/// Splits a file into header pairs and data rows (after the column line
/// that starts with `columns`).
struct Sections<'a> {
    header: BTreeMap<&'a str, &'a str>,
    rows: Vec<Vec<&'a str>>,
}

fn sections<'a>(text: &'a str, kind: &str) -> Result<Sections<'a>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| anyhow!("empty file"))?;
    if first.trim() != format!("kolmo\t{kind}") {
        bail!("not a {kind} file (first line {first:?})");
    }
    let mut header = BTreeMap::new();
    let mut rows = Vec::new();
    let mut in_rows = false;
    for l in lines {
        let cells: Vec<&str> = l.split('\t').collect();
        if in_rows {
            rows.push(cells);
        } else if cells[0] == "columns" {
            in_rows = true;
        } else if cells.len() == 2 {
            header.insert(cells[0], cells[1]);
        } else {
            bail!("bad header line {l:?}");
        }
    }
    Ok(Sections { header, rows })
}

impl<'a> Sections<'a> {
    fn get(&self, key: &str) -> Result<&'a str> {
        self.header.get(key).copied().ok_or_else(|| anyhow!("missing header {key:?}"))
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.parse().map_err(|e| anyhow!("header {key}: {e}"))
    }
}

fn expect_cols(row: &[&str], n: usize) -> Result<()> {
    if row.len() != n {
        bail!("expected {n} columns, got {:?}", row.join("\t"));
    }
    Ok(())
}

pub fn write_apriori(t: &AprioriTable) -> String {
    let mut s = format!(
        "kolmo\tapriori\nmachine\t{}\naux\t{}\nstage\t{}\nlength_bound\t{}\ncolumns\tx\tq\n",
        t.machine_id,
        word(&t.aux),
        t.stage,
        t.length_bound
    );
    for (x, q) in &t.entries {
        s.push_str(&format!("{}\t{}\n", word(x), q));
    }
    s
}

pub fn read_apriori(text: &str) -> Result<AprioriTable> {
    let sec = sections(text, "apriori")?;
    let mut entries = BTreeMap::new();
    for row in &sec.rows {
        expect_cols(row, 2)?;
        entries.insert(parse_word(row[0])?, parse_dyadic(row[1])?);
    }
    Ok(AprioriTable {
        machine_id: sec.get("machine")?.to_string(),
        aux: parse_word(sec.get("aux")?)?,
        entries,
        stage: sec.num("stage")?,
        length_bound: sec.num("length_bound")?,
    })
}

pub fn write_semimeasure(p: &ConditionalSemimeasure) -> String {
    let frozen: Vec<String> = p.frozen_y.iter().map(|y| y.to_string()).collect();
    let mut s = format!(
        "kolmo\tsemimeasure\nstage\t{}\nfrozen\t{}\ncolumns\tx\ty\tvalue\n",
        p.stage,
        if frozen.is_empty() { "-".into() } else { frozen.join(",") }
    );
    for (&(x, y), v) in &p.values {
        s.push_str(&format!("{x}\t{y}\t{v}\n"));
    }
    s
}

pub fn read_semimeasure(text: &str) -> Result<ConditionalSemimeasure> {
    let sec = sections(text, "semimeasure")?;
    let mut p = ConditionalSemimeasure {
        stage: sec.num("stage")?,
        ..Default::default()
    };
    let frozen = sec.get("frozen")?;
    if frozen != "-" {
        for y in frozen.split(',') {
            p.frozen_y.insert(y.parse().context("frozen column")?);
        }
    }
    for row in &sec.rows {
        expect_cols(row, 3)?;
        p.values.insert((row[0].parse()?, row[1].parse()?), parse_dyadic(row[2])?);
    }
    Ok(p)
}

/// CSV with header `x,y,k,value`; `value` may be `diverge`.
pub fn read_approximator(reader: impl Read) -> Result<TableApproximator> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "k", "value"] {
        bail!("approximator CSV needs the header x,y,k,value");
    }
    let mut t = TableApproximator::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let n = |j: usize| -> Result<u64> {
            let v: u64 = rec[j].parse().with_context(|| format!("row {}: column {}", i + 1, &headers[j]))?;
            if v == 0 {
                bail!("row {}: {} counts from 1", i + 1, &headers[j]);
            }
            Ok(v)
        };
        let value = match &rec[3] {
            "diverge" => None,
            v => Some(parse_dyadic(v)?),
        };
        t.insert(n(0)?, n(1)?, n(2)?, value);
    }
    Ok(t)
}

pub fn write_approximator(t: &TableApproximator) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "k", "value"])?;
    for (x, y, k, v) in t.rows() {
        let v = v.map_or("diverge".to_string(), |d| d.to_string());
        w.write_record([x.to_string(), y.to_string(), k.to_string(), v])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn write_codebook(b: &CodeBook) -> String {
    let mut s = format!(
        "kolmo\tcodebook\naux\t{}\nschedule\t{}\nbudget\t{}\ncolumns\tx\tcodeword\tlo\thi\n",
        word(&b.aux),
        b.schedule_id,
        b.budget
    );
    for e in &b.entries {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            word(&e.x),
            word(&e.codeword),
            e.interval.lo(),
            e.interval.hi()
        ));
    }
    s
}

pub fn read_codebook(text: &str) -> Result<CodeBook> {
    let sec = sections(text, "codebook")?;
    let mut entries = Vec::new();
    for row in &sec.rows {
        expect_cols(row, 4)?;
        entries.push(CodeEntry {
            x: parse_word(row[0])?,
            codeword: parse_word(row[1])?,
            interval: Interval::new(parse_dyadic(row[2])?, parse_dyadic(row[3])?)?,
            source: None,
        });
    }
    let book = CodeBook::from_entries(
        parse_word(sec.get("aux")?)?,
        sec.get("schedule")?.to_string(),
        sec.num("budget")?,
        entries,
    );
    if !book.is_well_laid_out() {
        bail!("codebook intervals are not consecutive or do not hold their codewords");
    }
    Ok(book)
}

/// `x<TAB>y<TAB>value` rows under a `kolmo joint` header.
pub fn read_joint(text: &str) -> Result<JointTable> {
    let sec = sections(text, "joint")?;
    let mut entries = BTreeMap::new();
    for row in &sec.rows {
        expect_cols(row, 3)?;
        entries.insert((parse_word(row[0])?, parse_word(row[1])?), parse_dyadic(row[2])?);
    }
    Ok(JointTable::new(entries)?)
}

pub fn write_joint(j: &JointTable) -> String {
    let mut s = String::from("kolmo\tjoint\ncolumns\tx\ty\tvalue\n");
    for ((x, y), v) in j.entries() {
        s.push_str(&format!("{}\t{}\t{}\n", word(x), word(y), v));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use kolmo_core::apriori::approx_apriori;
    use kolmo_core::coder::{build_codebook, psi_discretize, PsiSchedule};
    use kolmo_core::semimeasure::{normalize, FreezeMode, MonotoneApproximator};
    use kolmo_core::vm::fixtures;

    #[test]
    fn apriori_roundtrip() {
        let t = approx_apriori(&fixtures::aux_or_bar(), &"1".parse().unwrap(), 120, 6);
        let text = write_apriori(&t);
        assert_eq!(read_apriori(&text).unwrap(), t);
        assert!(read_apriori("kolmo\tcodebook\n").is_err());
    }

    #[test]
    fn approximator_and_snapshot_roundtrip() {
        let csv = "x,y,k,value\n1,1,1,1/2^2\n1,1,3,1/2^1\n2,1,2,diverge\n";
        let t = read_approximator(csv.as_bytes()).unwrap();
        assert_eq!(t.eval(1, 1, 2).unwrap(), "1/2^2".parse().unwrap());
        assert!(t.eval(2, 1, 5).is_err());
        assert_eq!(write_approximator(&t).unwrap(), csv);
        assert!(read_approximator("x,y,k,value\n0,1,1,1\n".as_bytes()).is_err());
        assert!(read_approximator("a,b\n1,2\n".as_bytes()).is_err());
        let p = normalize(&t, 4, FreezeMode::AllOrNothing).unwrap();
        assert_eq!(read_semimeasure(&write_semimeasure(&p)).unwrap(), p);
    }

    #[test]
    fn codebook_roundtrip() {
        let csv = "x,y,k,value\n1,1,1,1/2^1\n2,1,1,1/2^2\n3,1,2,3/2^4\n";
        let phi = read_approximator(csv.as_bytes()).unwrap();
        let run = psi_discretize(&phi, &PsiSchedule::new(vec![1], 3, 6)).unwrap();
        let book = build_codebook(&run, &BitString::empty()).unwrap();
        let back = read_codebook(&write_codebook(&book)).unwrap();
        assert_eq!(back.entries.len(), book.entries.len());
        for (a, b) in back.entries.iter().zip(&book.entries) {
            assert_eq!((&a.x, &a.codeword, &a.interval), (&b.x, &b.codeword, &b.interval));
        }
        let broken = write_codebook(&book).replace("\t0/2^0\t1/2^2\n", "\t1/2^3\t1/2^2\n");
        assert!(read_codebook(&broken).is_err());
    }

    #[test]
    fn joint_roundtrip() {
        let text = "kolmo\tjoint\ncolumns\tx\ty\tvalue\n0\t-\t1/2^1\n1\t-\t1/2^2\n";
        let j = read_joint(text).unwrap();
        assert_eq!(write_joint(&j), text);
        assert!(read_joint("kolmo\tjoint\ncolumns\tx\ty\tvalue\n0\t-\t1\n1\t-\t1\n").is_err());
    }
}
