//! One table type behind every human-readable listing and every CSV file
//! the tools emit, so the two views can never drift apart.

use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    pub fn new<S: Into<String>>(headers: Vec<S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_row<S: Into<String>>(&mut self, row: Vec<S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(row.len(), self.headers.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Aligned text form with a dashed rule under the header.
    pub fn to_text(&self) -> String {
        let ncols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for c in 0..ncols {
                widths[c] = widths[c].max(row[c].len());
            }
        }
        let fmt_line = |cells: &[String]| -> String {
            let mut line = String::new();
            for c in 0..ncols {
                if c > 0 {
                    line.push_str("  ");
                }
                line.push_str(&format!("{:<w$}", cells[c], w = widths[c]));
            }
            line.trim_end().to_string()
        };
        let mut out = fmt_line(&self.headers);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (ncols - 1)));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&fmt_line(row));
            out.push('\n');
        }
        out
    }

    /// Comma-separated form with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        out.push_str(&line(&self.headers));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["field", "scheme"]);
        t.push_row(vec!["temperature", "CGM"]);
        t.push_row(vec!["p", "DGM"]);
        t
    }

    #[test]
    fn text_columns_are_aligned() {
        let text = sample().to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "field        scheme");
        assert_eq!(lines[1], "-------------------");
        assert_eq!(lines[2], "temperature  CGM");
        assert_eq!(lines[3], "p            DGM");
    }

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let csv = sample().to_csv();
        assert_eq!(csv, "field,scheme\ntemperature,CGM\np,DGM\n");
    }

    #[test]
    fn csv_quotes_awkward_fields() {
        let mut t = Table::new(vec!["a"]);
        t.push_row(vec!["x,y"]);
        t.push_row(vec!["say \"hi\""]);
        assert_eq!(t.to_csv(), "a\n\"x,y\"\n\"say \"\"hi\"\"\"\n");
    }

    #[test]
    #[should_panic]
    fn mismatched_rows_are_rejected() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push_row(vec!["only one"]);
    }
}
