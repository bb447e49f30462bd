use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Reads a 16×16 published distance table; `-` on the diagonal becomes 0.
pub fn published_distances(name: &str) -> Vec<(i64, Vec<u32>)> {
    let text = std::fs::read_to_string(fixture(&format!("distances_{name}.txt"))).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut cells = l.split_whitespace();
            let row: i64 = cells.next().unwrap().parse().unwrap();
            let entries = cells
                .map(|c| if c == "-" { 0 } else { c.parse().unwrap() })
                .collect();
            (row, entries)
        })
        .collect()
}
