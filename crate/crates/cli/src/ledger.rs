//! Ledger rows and their CSV / JSON serializations.

use std::fmt::Write as _;

use corrthermo::ThermoSnapshot;

/// Column contract of the ledger CSV.
pub const COLUMNS: [&str; 19] = [
    "tau",
    "U_S",
    "U_B",
    "U_chi",
    "U_tot",
    "Q_S_rate",
    "Q_B_rate",
    "W_S_rate",
    "W_B_rate",
    "S_S",
    "S_B",
    "S_SB",
    "S_chi",
    "T_pseudo_S",
    "T_pseudo_B",
    "T_ext_S",
    "T_ext_B",
    "Sigma_S_rate",
    "Sigma_B_rate",
];

/// Token written for undefined or non-finite values.
pub const NA: &str = "NA";

/// One grid point; `None` marks a quantity the dynamics cannot provide.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerRow {
    pub tau: f64,
    pub u_s: Option<f64>,
    pub u_b: Option<f64>,
    pub u_chi: Option<f64>,
    pub u_tot: Option<f64>,
    pub q_s_rate: Option<f64>,
    pub q_b_rate: Option<f64>,
    pub w_s_rate: Option<f64>,
    pub w_b_rate: Option<f64>,
    pub s_s: Option<f64>,
    pub s_b: Option<f64>,
    pub s_sb: Option<f64>,
    pub s_chi: Option<f64>,
    pub t_pseudo_s: Option<f64>,
    pub t_pseudo_b: Option<f64>,
    pub t_ext_s: Option<f64>,
    pub t_ext_b: Option<f64>,
    pub sigma_s_rate: Option<f64>,
    pub sigma_b_rate: Option<f64>,
}

impl LedgerRow {
    pub fn from_snapshot(s: &ThermoSnapshot) -> Self {
        let (e, h, r) = (&s.energies, &s.entropies, &s.rates);
        LedgerRow {
            tau: s.tau,
            u_s: Some(e.u_s),
            u_b: Some(e.u_b),
            u_chi: Some(e.u_chi),
            u_tot: Some(e.u_tot),
            q_s_rate: Some(r.dq_s),
            q_b_rate: Some(r.dq_b),
            w_s_rate: Some(r.total_work_s()),
            w_b_rate: Some(r.total_work_b()),
            s_s: Some(h.s_s),
            s_b: Some(h.s_b),
            s_sb: Some(h.s_sb),
            s_chi: Some(h.s_chi),
            t_pseudo_s: s.t_pseudo_s,
            t_pseudo_b: s.t_pseudo_b,
            t_ext_s: s.t_ext_s,
            t_ext_b: s.t_ext_b,
            sigma_s_rate: s.sigma_s,
            sigma_b_rate: s.sigma_b,
        }
    }

    pub fn values(&self) -> [Option<f64>; 19] {
        [
            Some(self.tau),
            self.u_s,
            self.u_b,
            self.u_chi,
            self.u_tot,
            self.q_s_rate,
            self.q_b_rate,
            self.w_s_rate,
            self.w_b_rate,
            self.s_s,
            self.s_b,
            self.s_sb,
            self.s_chi,
            self.t_pseudo_s,
            self.t_pseudo_b,
            self.t_ext_s,
            self.t_ext_b,
            self.sigma_s_rate,
            self.sigma_b_rate,
        ]
    }

    /// Value of a named column; `None` for unknown names and NA entries.
    pub fn get(&self, column: &str) -> Option<f64> {
        let idx = COLUMNS.iter().position(|c| *c == column)?;
        self.values()[idx].filter(|v| v.is_finite())
    }
}

/// 17 significant digits, or `NA`.
pub fn format_number(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        _ => NA.to_string(),
    }
}

pub fn to_csv(rows: &[LedgerRow]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.values().iter().map(|v| format_number(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Array of objects keyed by column; undefined values become `null`.
pub fn to_json(rows: &[LedgerRow]) -> String {
    let array: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            let map = COLUMNS
                .iter()
                .zip(row.values())
                .map(|(c, v)| {
                    let value = match v {
                        Some(x) if x.is_finite() => serde_json::json!(x),
                        _ => serde_json::Value::Null,
                    };
                    (c.to_string(), value)
                })
                .collect::<serde_json::Map<_, _>>();
            serde_json::Value::Object(map)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&array).expect("ledger rows serialize");
    s.push('\n');
    s
}

/// Two-column `tau,<column>` series.
pub fn series_csv(rows: &[LedgerRow], column: &str) -> String {
    let idx = COLUMNS.iter().position(|c| *c == column).expect("column validated at parse time");
    let mut out = format!("tau,{column}\n");
    for row in rows {
        let _ = writeln!(out, "{},{}", format_number(Some(row.tau)), format_number(row.values()[idx]));
    }
    out
}

fn trapezoid(rows: &[LedgerRow], f: impl Fn(&LedgerRow) -> Option<f64>) -> Option<f64> {
    let mut total = 0.0;
    for w in rows.windows(2) {
        total += 0.5 * (f(&w[0])? + f(&w[1])?) * (w[1].tau - w[0].tau);
    }
    Some(total)
}

fn net(rows: &[LedgerRow], f: impl Fn(&LedgerRow) -> Option<f64>) -> Option<f64> {
    Some(f(rows.last()?)? - f(rows.first()?)?)
}

/// Integrated heat and work plus endpoint changes of the state functions.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Totals {
    pub q_s: Option<f64>,
    pub q_b: Option<f64>,
    pub w_s: Option<f64>,
    pub w_b: Option<f64>,
    pub delta_u_s: Option<f64>,
    pub delta_u_b: Option<f64>,
    pub delta_u_chi: Option<f64>,
    pub delta_s_s: Option<f64>,
    pub delta_s_b: Option<f64>,
    pub delta_s_chi: Option<f64>,
}

impl Totals {
    pub fn from_rows(rows: &[LedgerRow]) -> Self {
        let finite = |v: Option<f64>| v.filter(|x| x.is_finite());
        Totals {
            q_s: finite(trapezoid(rows, |r| r.q_s_rate)),
            q_b: finite(trapezoid(rows, |r| r.q_b_rate)),
            w_s: finite(trapezoid(rows, |r| r.w_s_rate)),
            w_b: finite(trapezoid(rows, |r| r.w_b_rate)),
            delta_u_s: finite(net(rows, |r| r.u_s)),
            delta_u_b: finite(net(rows, |r| r.u_b)),
            delta_u_chi: finite(net(rows, |r| r.u_chi)),
            delta_s_s: finite(net(rows, |r| r.s_s)),
            delta_s_b: finite(net(rows, |r| r.s_b)),
            delta_s_chi: finite(net(rows, |r| r.s_chi)),
        }
    }

    /// `|ΔU_X − Q_X − W_X| / (1 + |ΔU_X|)`, worst over the parties with data.
    pub fn first_law_closure(&self) -> Option<f64> {
        let party = |du: Option<f64>, q: Option<f64>, w: Option<f64>| Some((du? - q? - w?).abs() / (1.0 + du?.abs()));
        match (party(self.delta_u_s, self.q_s, self.w_s), party(self.delta_u_b, self.q_b, self.w_b)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}
