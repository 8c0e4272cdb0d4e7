use pmc_core::SubKernel;

/// Aligned columns: one line per input, one column per output and a final
/// failure column.
pub fn kernel_table(k: &SubKernel) -> String {
    let mut cells: Vec<Vec<String>> = Vec::with_capacity(k.rows() + 1);
    let mut header = vec![format!("{} \\ {}", k.dom(), k.cod())];
    header.extend((0..k.cols()).map(|y| k.cod().render_label(y)));
    header.push("fail".into());
    cells.push(header);
    for x in 0..k.rows() {
        let mut line = vec![k.dom().render_label(x)];
        line.extend(k.row(x).iter().map(|w| w.to_string()));
        line.push(k.fail(x).to_string());
        cells.push(line);
    }
    align(&cells)
}

pub fn align(cells: &[Vec<String>]) -> String {
    let cols = cells.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            cells
                .iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn kernel_csv(k: &SubKernel) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["in".to_string()];
    header.extend((0..k.cols()).map(|y| k.cod().render_label(y)));
    header.push("fail".into());
    w.write_record(&header).expect("writing to memory");
    for x in 0..k.rows() {
        let mut line = vec![k.dom().render_label(x)];
        line.extend(k.row(x).iter().map(|v| v.to_string()));
        line.push(k.fail(x).to_string());
        w.write_record(&line).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing memory")).expect("utf-8 records")
}
