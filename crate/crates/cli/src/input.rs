//! Subject-level CSV ingestion: `id,group,time,status` with a header row,
//! `group` in {A, B}, `status` in {0, 1, 2}, comma-delimited UTF-8.

use std::path::Path;

use aeprob_core::{validate_cohort, Cohort, Group, SubjectRecord};

use crate::error::CliError;

const EXPECTED_HEADER: [&str; 4] = ["id", "group", "time", "status"];

pub fn read_subjects(path: &Path) -> Result<(Cohort, Cohort), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != EXPECTED_HEADER {
        return Err(CliError::Data(format!(
            "{}: expected header `id,group,time,status`, found `{}`",
            path.display(),
            got.join(",")
        )));
    }

    let mut group_a = Vec::new();
    let mut group_b = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let fail = |msg: String| CliError::Data(format!("{}:{line}: {msg}", path.display()));
        if record.len() != 4 {
            return Err(fail(format!("expected 4 fields, found {}", record.len())));
        }
        let id = record[0].to_string();
        let group = match &record[1] {
            "A" => Group::A,
            "B" => Group::B,
            other => return Err(fail(format!("unknown group `{other}` (expected A or B)"))),
        };
        let time: f64 = record[2]
            .parse()
            .map_err(|_| fail(format!("bad time `{}`", &record[2])))?;
        let code: u8 = record[3]
            .parse()
            .map_err(|_| fail(format!("bad status `{}` (expected 0, 1 or 2)", &record[3])))?;
        let subject = SubjectRecord::from_coded(id, group, time, code)
            .map_err(|e| fail(e.to_string()))?;
        match group {
            Group::A => group_a.push(subject),
            Group::B => group_b.push(subject),
        }
    }

    let a = validate_cohort(group_a, Group::A)?;
    let b = validate_cohort(group_b, Group::B)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_both_groups() {
        let f = write_temp("id,group,time,status\np1,A,10,1\np2,A,20,2\np3,B,5,0\np4,B,8,1\n");
        let (a, b) = read_subjects(f.path()).unwrap();
        assert_eq!(a.n(), 2);
        assert_eq!(b.n(), 2);
        assert_eq!(a.records()[0].id, "p1");
    }

    #[test]
    fn rejects_bad_header() {
        let f = write_temp("subject,arm,t,event\n");
        let err = read_subjects(f.path()).unwrap_err();
        assert!(matches!(err, CliError::Data(_)));
        assert!(err.to_string().contains("expected header"));
    }

    #[test]
    fn empty_file_is_a_data_error() {
        let f = write_temp("");
        assert!(matches!(read_subjects(f.path()).unwrap_err(), CliError::Data(_)));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let f = write_temp("id,group,time,status\np1,A,10,1\np2,A,0,1\n");
        let err = read_subjects(f.path()).unwrap_err().to_string();
        assert!(err.contains(":3:"), "{err}");

        let f = write_temp("id,group,time,status\np1,C,10,1\n");
        let err = read_subjects(f.path()).unwrap_err().to_string();
        assert!(err.contains(":2:") && err.contains("unknown group"), "{err}");

        let f = write_temp("id,group,time,status\np1,A,10,7\n");
        let err = read_subjects(f.path()).unwrap_err().to_string();
        assert!(err.contains("status"), "{err}");
    }

    #[test]
    fn one_sided_data_is_an_empty_cohort() {
        let f = write_temp("id,group,time,status\np1,A,10,1\n");
        let err = read_subjects(f.path()).unwrap_err().to_string();
        assert!(err.contains("group B"), "{err}");
    }
}
