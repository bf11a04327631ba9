//! Text emitters: scan CSV, comparison tables, gnuplot stub.

use serde::Deserialize;

/// Hartree to kcal/mol.
const HARTREE_KCAL: f64 = 627.509_474_063_1;

/// Twelve significant digits in scientific notation (negative zero printed as zero).
pub fn sig12(x: f64) -> String {
    format!("{:.11e}", x + 0.0)
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub parameter: f64,
    pub system: String,
    pub label: String,
    pub e_total: f64,
    pub e_corr: f64,
    /// Percentage of `E_FCI - E_HF` recovered, when an FCI oracle exists.
    pub pct_corr: Option<f64>,
}

pub const SCAN_HEADER: &str = "parameter,system,method,e_total,e_corr,pct_corr";

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut s = format!("{SCAN_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.parameter,
            r.system,
            r.label,
            sig12(r.e_total),
            sig12(r.e_corr),
            r.pct_corr.map(sig12).unwrap_or_default()
        ));
    }
    s
}

/// Gnuplot script plotting `e_total` against the parameter, one curve per method.
pub fn gnuplot_stub(csv_name: &str, labels: &[String]) -> String {
    let mut s = String::from("set datafile separator ','\n");
    s.push_str("set xlabel 'bond length (Angstrom)'\nset ylabel 'energy (Hartree)'\n");
    s.push_str(&format!("methods = \"{}\"\n", labels.join(" ")));
    s.push_str(&format!(
        "plot for [m in methods] '{csv_name}' using 1:(strcol(3) eq m ? $4 : NaN) with linespoints title m\n"
    ));
    s
}

/// Fields of a run record needed for comparison tables.
#[derive(Clone, Debug, Deserialize)]
pub struct TableEntry {
    pub system: String,
    pub label: String,
    pub ms2: i32,
    pub e_ref: f64,
    pub e_corr: f64,
    pub e_total: f64,
    pub cnots: Option<usize>,
}

fn aligned(rows: &[Vec<String>]) -> String {
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..ncol).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|x| x.len()).max().unwrap_or(0)).collect();
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(x, w)| format!("{x:>w$}")).collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s
}

/// Method comparison table. When a system/method pair appears with both
/// `ms2 = 0` and `ms2 = 2`, a triplet-singlet gap section follows.
pub fn comparison_table(entries: &[TableEntry]) -> String {
    let mut rows =
        vec![["system", "method", "2S", "E_ref/Ha", "E_corr/mHa", "E_total/Ha", "CNOTs"].map(String::from).to_vec()];
    for e in entries {
        rows.push(vec![
            e.system.clone(),
            e.label.clone(),
            e.ms2.to_string(),
            format!("{:.8}", e.e_ref),
            format!("{:.4}", 1e3 * e.e_corr),
            format!("{:.8}", e.e_total),
            e.cnots.map_or("-".into(), |c| c.to_string()),
        ]);
    }
    let mut out = aligned(&rows);

    let mut gaps = vec![["system", "method", "E_T-E_S/mHa", "E_T-E_S/(kcal/mol)"].map(String::from).to_vec()];
    for s in entries.iter().filter(|e| e.ms2 == 0) {
        if let Some(t) = entries.iter().find(|t| t.ms2 == 2 && t.system == s.system && t.label == s.label) {
            let gap = t.e_total - s.e_total;
            gaps.push(vec![
                s.system.clone(),
                s.label.clone(),
                format!("{:.4}", 1e3 * gap),
                format!("{:.3}", HARTREE_KCAL * gap),
            ]);
        }
    }
    if gaps.len() > 1 {
        out.push('\n');
        out.push_str(&aligned(&gaps));
    }
    out
}
