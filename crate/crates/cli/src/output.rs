//! Output files. Every file starts with the artifact version and the full
//! resolved configuration: JSON files wrap their result, CSV and `.dat`
//! files carry `#` comment lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::Experiment;

#[derive(Serialize)]
struct Header<'a> {
    version: &'static str,
    experiment: &'static str,
    seed: u64,
    config: &'a Experiment,
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    #[serde(flatten)]
    header: &'a Header<'a>,
    result: &'a T,
}

/// Shortest decimal that parses back to the same double.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub struct Output<'a> {
    dir: PathBuf,
    header: Header<'a>,
    pub written: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    pub fn new(dir: &Path, experiment: &'a Experiment, seed: u64) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            header: Header {
                version: twistlab::VERSION,
                experiment: experiment.name(),
                seed,
                config: experiment,
            },
            written: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> std::io::Result<fs::File> {
        let path = self.dir.join(name);
        let f = fs::File::create(&path)?;
        self.written.push(path);
        Ok(f)
    }

    fn comment_header(&self, w: &mut impl Write) -> std::io::Result<()> {
        let config = serde_json::to_string(self.header.config).expect("config serializes");
        writeln!(w, "# twistlab {}", self.header.version)?;
        writeln!(w, "# experiment {} seed {}", self.header.experiment, self.header.seed)?;
        writeln!(w, "# config {config}")
    }

    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> twistlab::Result<()> {
        let mut f = std::io::BufWriter::new(self.create(name)?);
        let wrapped = Wrapped {
            header: &self.header,
            result,
        };
        serde_json::to_writer_pretty(&mut f, &wrapped)?;
        writeln!(f)?;
        f.flush()?;
        Ok(())
    }

    /// Comment header, then whatever `body` writes.
    pub fn with_header(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> twistlab::Result<()>,
    ) -> twistlab::Result<()> {
        let mut f = std::io::BufWriter::new(self.create(name)?);
        self.comment_header(&mut f)?;
        body(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> twistlab::Result<()> {
        self.with_header(name, |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(columns)?;
            for r in rows {
                c.write_record(r)?;
            }
            c.flush()?;
            Ok(())
        })
    }

    /// Whitespace-separated columns for gnuplot and friends.
    pub fn dat(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> twistlab::Result<()> {
        self.with_header(name, |w| {
            writeln!(w, "# {}", columns.join(" "))?;
            for r in rows {
                writeln!(w, "{}", r.join(" "))?;
            }
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::ThresholdsArgs;

    #[test]
    fn numbers_round_trip() {
        for x in [1.0, 0.1, -2.5e-17, 1.0 / 3.0, 0.618033988749895] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0");
    }

    #[test]
    fn every_file_names_version_seed_and_config() {
        let dir = tempfile::tempdir().unwrap();
        let exp = Experiment::Thresholds(ThresholdsArgs::default());
        let mut out = Output::new(dir.path(), &exp, 7).unwrap();
        out.json("a.json", &[1.5]).unwrap();
        out.csv("a.csv", &["x"], &[vec![num(2.0)]]).unwrap();
        let j: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
        assert_eq!(j["seed"], 7);
        assert_eq!(j["version"], twistlab::VERSION);
        assert_eq!(j["config"]["thresholds"]["map"], "cat");
        assert_eq!(j["result"][0], 1.5);
        let c = fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert!(c.starts_with(&format!("# twistlab {}\n# experiment thresholds seed 7\n# config ", twistlab::VERSION)));
        assert!(c.ends_with("x\n2.0\n"));
        assert_eq!(out.written.len(), 2);
    }
}
