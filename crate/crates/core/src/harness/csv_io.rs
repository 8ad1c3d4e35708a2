use std::fs;
use std::path::{Path, PathBuf};

use crate::sem::InterventionAction;

use super::config::ExperimentConfig;
use super::run::{RegretRow, RegretTable};
use super::HarnessError;

pub const CSV_HEADER: [&str; 7] = ["instance_id", "rep_id", "t", "action", "reward", "inst_regret", "cum_regret"];

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Csv { path: path.to_path_buf(), message: e.to_string() }
}

/// Writes the table with actions as zero-padded bit strings (node `i` is
/// bit `i`, most significant first) and reals in shortest round-trip form.
pub fn export_csv(table: &RegretTable, path: &Path) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
    let width = table.nodes.max(1);
    for r in &table.rows {
        w.write_record([
            r.instance_id.to_string(),
            r.rep_id.to_string(),
            r.t.to_string(),
            r.action.to_bit_string(width),
            r.reward.to_string(),
            r.inst_regret.to_string(),
            r.cum_regret.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn import_csv(path: &Path) -> Result<RegretTable, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Csv { path: path.to_path_buf(), message: format!("unexpected header {header:?}") });
    }
    let bad = |line: usize, what: &str| HarnessError::Csv { path: path.to_path_buf(), message: format!("record {line}: bad {what}") };
    let mut table = RegretTable::default();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = k + 1;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let action_text = field(3);
        table.nodes = table.nodes.max(action_text.len());
        table.rows.push(RegretRow {
            instance_id: field(0).parse().map_err(|_| bad(line, "instance_id"))?,
            rep_id: field(1).parse().map_err(|_| bad(line, "rep_id"))?,
            t: field(2).parse().map_err(|_| bad(line, "t"))?,
            action: InterventionAction::parse_bit_string(action_text).ok_or_else(|| bad(line, "action"))?,
            reward: field(4).parse().map_err(|_| bad(line, "reward"))?,
            inst_regret: field(5).parse().map_err(|_| bad(line, "inst_regret"))?,
            cum_regret: field(6).parse().map_err(|_| bad(line, "cum_regret"))?,
        });
    }
    Ok(table)
}

/// Path of the resolved-config file written next to a CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".config.toml");
    csv_path.with_file_name(name)
}

pub fn write_sidecar(config: &ExperimentConfig, csv_path: &Path) -> Result<PathBuf, HarnessError> {
    let path = sidecar_path(csv_path);
    fs::write(&path, config.to_toml()).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}
