//! Screen formatting and JSON reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// `x` to six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    seed: Option<u64>,
    config: &'a BTreeMap<String, String>,
    result: &'a T,
}

pub fn report_json<T: Serialize>(
    command: &str,
    seed: Option<u64>,
    config: &BTreeMap<String, String>,
    result: &T,
) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&Report { command, seed, config, result })
        .map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(2.0808802), "2.08088");
        assert_eq!(sig6(1.7401632918), "1.74016");
        assert_eq!(sig6(0.000234), "0.000234000");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(-3.5531483), "-3.55315");
        assert_eq!(sig6(0.0), "0");
    }
}
