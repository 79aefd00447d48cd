use chansim_core::gates::{count_gates, cost_model, decompose_controlled, CostMethod, LocalUnitary, MAX_WIRES};
use serde::Serialize;

pub const MAX_QUBITS: usize = 8;
/// Control counts whose gate lists are actually built for each row.
pub const MEASURED_CONTROLS: [usize; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub n: usize,
    /// Asymptotic model values, not counts.
    pub lcu_model: f64,
    pub stinespring_model: f64,
    pub ratio: f64,
    /// `(m, single + cnot)` for `C_m(Z^{⊗n})`.
    pub measured: Vec<(usize, usize)>,
}

pub fn report_costs(n_max: usize) -> chansim_core::Result<Vec<CostRow>> {
    if n_max > MAX_QUBITS {
        return Err(chansim_core::Error::OutOfRange {
            what: "n_max",
            value: n_max as f64,
            range: "0..=8",
        });
    }
    (1..=n_max)
        .map(|n| {
            let lcu = cost_model(CostMethod::Lcu, n as u32);
            let stinespring = cost_model(CostMethod::Stinespring, n as u32);
            let target = LocalUnitary::pauli_product(&"Z".repeat(n))?;
            let measured = MEASURED_CONTROLS
                .iter()
                .filter(|&&m| m + n <= MAX_WIRES)
                .map(|&m| Ok((m, count_gates(&decompose_controlled(m, &target)?).total())))
                .collect::<chansim_core::Result<Vec<_>>>()?;
            Ok(CostRow {
                n,
                lcu_model: lcu,
                stinespring_model: stinespring,
                ratio: stinespring / lcu,
                measured,
            })
        })
        .collect()
}

pub fn render_table(rows: &[CostRow]) -> String {
    let mut out = String::from("# model values are asymptotic formulas; gates_mK are measured counts of C_K(Z^n)\n");
    out.push_str("n,lcu_model,stinespring_model,ratio");
    for m in MEASURED_CONTROLS {
        out.push_str(&format!(",gates_m{m}"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}",
            r.n,
            crate::output::format_sig(r.lcu_model),
            crate::output::format_sig(r.stinespring_model),
            crate::output::format_sig(r.ratio)
        ));
        for m in MEASURED_CONTROLS {
            match r.measured.iter().find(|(k, _)| *k == m) {
                Some((_, count)) => out.push_str(&format!(",{count}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_rows() {
        let rows = report_costs(2).unwrap();
        assert_eq!((rows[0].lcu_model, rows[0].stinespring_model), (132.0, 1728.0));
        assert!((rows[0].ratio - 13.09).abs() < 0.01);
        assert_eq!((rows[1].lcu_model, rows[1].stinespring_model), (16448.0, 884736.0));
        assert!((rows[1].ratio - 53.79).abs() < 0.01);
    }

    #[test]
    fn measured_counts_grow_with_controls() {
        for r in report_costs(MAX_QUBITS).unwrap() {
            assert_eq!(r.measured.len(), 3);
            for w in r.measured.windows(2) {
                assert!(w[1].1 > w[0].1, "n = {}: {:?}", r.n, r.measured);
            }
        }
    }

    #[test]
    fn limit() {
        assert!(report_costs(9).is_err());
        assert!(report_costs(0).unwrap().is_empty());
    }

    #[test]
    fn table_text() {
        let text = render_table(&report_costs(1).unwrap());
        let line = text.lines().nth(2).unwrap();
        assert!(line.starts_with("1,132,1728,13.0909090909,"), "{line}");
    }
}
