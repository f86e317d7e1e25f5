//! Plain-text rendering helpers shared by all subcommands.

/// Rows of string cells under a header, rendered as an aligned table or CSV.
pub struct Tabular {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Tabular {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Tabular {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn table(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            format!("{}\n", padded.join("  ").trim_end())
        };
        let mut out = line(self.headers.clone());
        for row in &self.rows {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = format!("{}\n", self.headers.join(","));
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Fixed-precision decimal with trailing zeros removed, so `13.5` prints as
/// `13.5` and not `13.499999999999998`.
pub fn num(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn sci(x: f64) -> String {
    format!("{x:.1e}")
}

pub fn status(ok: bool) -> String {
    if ok { "ok" } else { "FAIL" }.to_string()
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}
