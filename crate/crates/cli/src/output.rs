//! Run directories and the files written into them.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use wavetrack::export::{svg_diagram, write_events, write_fronts, write_functionals, write_pieces, write_traces};
use wavetrack::FrontSolution;

use crate::{CliError, OUT_DIR_VAR};

/// `out` if given, else `<base>/<config stem>-<command>`.
pub fn run_dir(config: &Path, out: Option<&Path>, command: &str) -> Result<PathBuf, CliError> {
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => {
            let base = std::env::var_os(OUT_DIR_VAR).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
            let stem = config.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
            base.join(format!("{stem}-{command}"))
        }
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

pub fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `slices_t<t>.csv` with `t` in its shortest decimal form.
pub fn slice_name(t: f64) -> String {
    format!("slices_t{t}.csv")
}

/// The standard set of record files.
pub fn write_record(dir: &Path, sol: &FrontSolution, slice_times: &[f64]) -> Result<(), CliError> {
    write_events(create(dir, "events.csv")?, sol)?;
    write_fronts(create(dir, "fronts.csv")?, sol)?;
    write_traces(create(dir, "traces.csv")?, sol)?;
    write_functionals(create(dir, "functionals.csv")?, &sol.functionals)?;
    for &t in slice_times {
        write_pieces(create(dir, &slice_name(t))?, &sol.slice(t))?;
    }
    write_text(dir, "diagram.svg", &svg_diagram(sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_names_use_short_decimals() {
        assert_eq!(slice_name(0.5), "slices_t0.5.csv");
        assert_eq!(slice_name(2.0), "slices_t2.csv");
    }
}
