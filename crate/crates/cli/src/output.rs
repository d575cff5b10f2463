//! Output files. Every file carries the scenario hash and master seed.

use std::fs;
use std::path::{Path, PathBuf};

use ama_core::export::CsvTable;
use ama_core::Result;
use serde::Serialize;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    scenario: &'a str,
    scenario_hash: &'a str,
    master_seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

pub struct Writer {
    dir: PathBuf,
    scenario: String,
    hash: String,
    seed: u64,
}

impl Writer {
    pub fn new(dir: &Path, scenario: &str, hash: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Writer { dir: dir.to_path_buf(), scenario: scenario.to_string(), hash: hash.to_string(), seed })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn header(&self) -> String {
        format!("# scenario={}\n# scenario_hash={}\n# master_seed={}\n", self.scenario, self.hash, self.seed)
    }

    pub fn csv(&self, name: &str, table: CsvTable) -> Result<()> {
        let t = table
            .with_meta("scenario", &self.scenario)
            .with_meta("scenario_hash", &self.hash)
            .with_meta("master_seed", self.seed);
        fs::write(self.path(name), t.render())?;
        println!("wrote {}", self.path(name).display());
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, command: &str, body: &T) -> Result<()> {
        let env =
            Envelope { command, scenario: &self.scenario, scenario_hash: &self.hash, master_seed: self.seed, body };
        let mut text = serde_json::to_string_pretty(&env).expect("report serializes");
        text.push('\n');
        fs::write(self.path(name), text)?;
        println!("wrote {}", self.path(name).display());
        Ok(())
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        fs::write(self.path(name), format!("{}{body}", self.header()))?;
        println!("wrote {}", self.path(name).display());
        Ok(())
    }
}
