//! Claim and ground-truth CSV files.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::GroundTruth;
use crate::model::Claim;

pub const CLAIM_HEADER: [&str; 4] = ["claim_id", "source_id", "data_item_id", "value"];
pub const TRUTH_HEADER: [&str; 2] = ["data_item_id", "true_value"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(input)
}

fn parse_error(path: &Path, record: &csv::StringRecord, message: String) -> Error {
    Error::ParseError {
        path: path.to_path_buf(),
        line: record.position().map_or(0, |p| p.line()),
        message,
    }
}

fn check_header(path: &Path, rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(parse_error(
            path,
            &header,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

/// Claims in file order. Values are kept as written; canonicalization
/// happens when the claims are indexed.
pub fn load_claims(path: &Path) -> Result<Vec<Claim>> {
    read_claims(open(path)?, path)
}

pub fn read_claims<R: Read>(input: R, path: &Path) -> Result<Vec<Claim>> {
    let mut rdr = reader(input);
    if rdr.headers()?.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_header(path, &mut rdr, &CLAIM_HEADER)?;
    let mut claims = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != 4 {
            return Err(parse_error(
                path,
                &record,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let claim = Claim::new(&record[0], &record[1], &record[2], &record[3]);
        if !seen.insert(claim.claim_id.clone()) {
            return Err(Error::DuplicateClaim(claim.claim_id));
        }
        claims.push(claim);
    }
    if claims.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(claims)
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    read_ground_truth(open(path)?, path)
}

pub fn read_ground_truth<R: Read>(input: R, path: &Path) -> Result<GroundTruth> {
    let mut rdr = reader(input);
    if rdr.headers()?.is_empty() {
        return Err(Error::EmptyGoldStandard);
    }
    check_header(path, &mut rdr, &TRUTH_HEADER)?;
    let mut gt = GroundTruth::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != 2 {
            return Err(parse_error(
                path,
                &record,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        gt.insert(&record[0], &record[1]);
    }
    if gt.is_empty() {
        return Err(Error::EmptyGoldStandard);
    }
    Ok(gt)
}

pub fn write_claims_to<W: Write>(claims: &[Claim], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CLAIM_HEADER)?;
    for c in claims {
        w.write_record([&c.claim_id, &c.source_id, &c.data_item_id, &c.value])?;
    }
    w.flush().map_err(|e| Error::io("<claims>", e))?;
    Ok(())
}

pub fn write_claims(claims: &[Claim], path: &Path) -> Result<()> {
    write_claims_to(claims, create(path)?)
}

pub fn write_ground_truth(gt: &GroundTruth, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(TRUTH_HEADER)?;
    for (item, values) in gt.iter() {
        for v in values {
            w.write_record([item, v])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    create(path)?
        .write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn claims(text: &str) -> Result<Vec<Claim>> {
        read_claims(text.as_bytes(), Path::new("t.csv"))
    }

    #[test]
    fn parses_quadruplet() {
        let c =
            claims("claim_id,source_id,data_item_id,value\nc1,S1,Stonebraker:AffiliatedTo,MIT\n")
                .unwrap();
        assert_eq!(
            c,
            vec![Claim::new("c1", "S1", "Stonebraker:AffiliatedTo", "MIT")]
        );
    }

    #[test]
    fn quoted_commas() {
        let c = claims("claim_id,source_id,data_item_id,value\nc1,s,d,\"a, b\"\n").unwrap();
        assert_eq!(c[0].value, "a, b");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(claims(""), Err(Error::EmptyDataset)));
        assert!(matches!(
            claims("claim_id,source_id,data_item_id,value\n"),
            Err(Error::EmptyDataset)
        ));
        match claims("claim_id,source_id,data_item_id,value\nc1,s,d,v\nc2,s,d\n") {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            claims("claim_id,source_id,data_item_id,value\nc1,s,d,v\nc1,t,d,v\n"),
            Err(Error::DuplicateClaim(_))
        ));
        assert!(claims("a,b,c,d\nc1,s,d,v\n").is_err());
    }

    #[test]
    fn ground_truth_rows() {
        let gt = read_ground_truth(
            "data_item_id,true_value\nStonebraker:AffiliatedTo,MIT\nBook,A\nBook,B\n".as_bytes(),
            Path::new("g.csv"),
        )
        .unwrap();
        assert!(gt.get("Stonebraker:AffiliatedTo").unwrap().contains("mit"));
        assert_eq!(gt.get("Book").unwrap().len(), 2);
        assert!(matches!(
            read_ground_truth("".as_bytes(), Path::new("g.csv")),
            Err(Error::EmptyGoldStandard)
        ));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let cs = vec![
            Claim::new("c1", "s", "d", "x|y"),
            Claim::new("c2", "t", "d", "z"),
        ];
        write_claims(&cs, &path).unwrap();
        assert_eq!(load_claims(&path).unwrap(), cs);
        let gt: GroundTruth = [("d", "x")].into_iter().collect();
        let gpath = dir.path().join("g.csv");
        write_ground_truth(&gt, &gpath).unwrap();
        assert_eq!(load_ground_truth(&gpath).unwrap(), gt);
    }
}
