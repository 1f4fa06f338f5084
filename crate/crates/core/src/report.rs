//! Report types and their serialized forms.
//!
//! JSON documents print every float with 17 significant digits
//! (`{:.16e}`), enough to round-trip any f64 exactly; reruns with the
//! echoed parameters therefore reproduce output byte for byte. CSV uses
//! the same float format, a fixed column order, and LF line endings.

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};
use std::io;

use crate::error::Error;

/// Auto-resolved parameters echoed for reproducibility: feeding them back
/// as explicit settings reproduces the run bit for bit.
#[derive(Debug, Clone, Serialize)]
pub struct ReportMetadata {
    pub r_max: f64,
    pub grid_points: usize,
    pub basis_size: usize,
    pub basis_scale: f64,
    pub angular_points: usize,
    pub l_cap: usize,
    /// |eps_K - eps_{K-10}| from the radial solve
    pub energy_convergence_defect: f64,
    /// bound 2 R^2 eta_last^2 on the participation-ratio truncation bias
    pub r_truncation_bias_bound: f64,
    /// threshold defining "vanishingly small" minor channels
    pub vanishing_channel_threshold: f64,
}

/// Per-coupling record of the full diagnostic suite.
#[derive(Debug, Clone, Serialize)]
pub struct EntanglementReport {
    pub g: f64,
    /// ln g; serialized as null at g = 0
    pub ln_g: f64,
    /// Wigner parameter R_w = g / sqrt(2)
    pub wigner_parameter: f64,
    /// relative radial ground-state energy
    pub eps_rel: f64,
    /// collective occupancies eta_l, l = 0..=l_max_used
    pub eta: Vec<f64>,
    /// 2 * sum of eta_l beyond l = 5 (0 when no such channels)
    pub eta_tail: f64,
    /// normalized channel purities Omega_l; null where the channel
    /// occupancy is numerically zero
    pub omega: Vec<Option<f64>>,
    /// tr rho_l^2 per channel
    pub channel_purities: Vec<f64>,
    /// tr rho^2 = p_0 + 2 sum_{l>=1} p_l
    pub purity_spatial: f64,
    /// participation ratio R
    pub participation: f64,
    /// SR = R/2
    pub slater_rank: f64,
    /// L = 1 - 1/R
    pub linear_entropy: f64,
    /// minimal channel count reproducing the integer part of R
    pub n_partial: usize,
    pub n_partial_saturated: bool,
    /// 2 n_partial - 1
    pub slater_estimate: i64,
    pub l_max_used: usize,
    /// whether the channel tail dropped below threshold inside the cap
    pub tail_converged: bool,
    /// max over l >= 2 of 2 eta_l / eta_0
    pub max_minor_channel_fraction: f64,
    pub metadata: ReportMetadata,
}

/// 17-significant-digit float formatting shared by JSON and CSV.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// JSON formatter printing floats with 17 significant digits on top of
/// the pretty two-space layout.
struct SciFormatter {
    indent: usize,
}

impl SciFormatter {
    fn newline<W: ?Sized + io::Write>(&self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.indent {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        self.newline(writer)?;
        writer.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        self.newline(writer)?;
        writer.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }
}

/// Serialize any report value to the project JSON dialect.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter { indent: 0 });
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    let mut s = String::from_utf8(out).expect("serializer emits UTF-8");
    s.push('\n');
    s
}

/// Machine-readable error document for the error stream.
pub fn error_document(err: &Error, context: serde_json::Value) -> String {
    let doc = serde_json::json!({
        "code": err.code(),
        "message": err.to_string(),
        "context": context,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("error document serializes");
    s.push('\n');
    s
}

/// Fixed CSV schema: channels beyond l = 5 are folded into `eta_tail`;
/// new channels would append columns, never reorder them.
pub const CSV_HEADER: &str = "g,ln_g,eps_rel,eta_0,eta_1,eta_2,eta_3,eta_4,eta_5,eta_tail,\
omega_0,omega_1,omega_2,omega_3,purity,participation_R,slater_rank,linear_entropy,\
n_partial,slater_estimate,l_max_used,error";

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// One data row in the schema of [`CSV_HEADER`].
pub fn csv_row(report: &EntanglementReport) -> String {
    let eta_col = |l: usize| {
        report
            .eta
            .get(l)
            .map(|v| format_float(*v))
            .unwrap_or_else(|| format_float(0.0))
    };
    let omega_col = |l: usize| match report.omega.get(l) {
        Some(Some(v)) => format_float(*v),
        _ => String::new(),
    };
    let cells: Vec<String> = vec![
        format_float(report.g),
        format_float(report.ln_g),
        format_float(report.eps_rel),
        eta_col(0),
        eta_col(1),
        eta_col(2),
        eta_col(3),
        eta_col(4),
        eta_col(5),
        format_float(report.eta_tail),
        omega_col(0),
        omega_col(1),
        omega_col(2),
        omega_col(3),
        format_float(report.purity_spatial),
        format_float(report.participation),
        format_float(report.slater_rank),
        format_float(report.linear_entropy),
        report.n_partial.to_string(),
        report.slater_estimate.to_string(),
        report.l_max_used.to_string(),
        String::new(),
    ];
    cells.join(",")
}

/// Error row: coupling and message only, numeric cells empty.
pub fn csv_error_row(g: f64, err: &Error) -> String {
    let mut cells = vec![format_float(g), format_float(g.ln())];
    cells.extend(std::iter::repeat_n(String::new(), 19));
    cells.push(csv_escape(&format!("{}: {err}", err.code())));
    cells.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> EntanglementReport {
        EntanglementReport {
            g: 2.0f64.sqrt(),
            ln_g: 2.0f64.sqrt().ln(),
            wigner_parameter: 1.0,
            eps_rel: 4.0,
            eta: vec![0.96, 0.019, 0.0005],
            eta_tail: 0.0,
            omega: vec![Some(0.993), Some(0.999), None],
            channel_purities: vec![0.91, 0.0003, 1e-7],
            purity_spatial: 0.9106002,
            participation: 2.18,
            slater_rank: 1.09,
            linear_entropy: 0.5413,
            n_partial: 1,
            n_partial_saturated: false,
            slater_estimate: 1,
            l_max_used: 2,
            tail_converged: true,
            max_minor_channel_fraction: 1.0e-3,
            metadata: ReportMetadata {
                r_max: 11.78,
                grid_points: 360,
                basis_size: 60,
                basis_scale: 1.0,
                angular_points: 160,
                l_cap: 28,
                energy_convergence_defect: 1e-13,
                r_truncation_bias_bound: 1e-9,
                vanishing_channel_threshold: 1e-3,
            },
        }
    }

    #[test]
    fn json_floats_round_trip_exactly() {
        let rep = sample_report();
        let text = to_json(&rep);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["g"].as_f64().unwrap().to_bits(), rep.g.to_bits());
        assert_eq!(
            parsed["eta"][1].as_f64().unwrap().to_bits(),
            rep.eta[1].to_bits()
        );
        // undefined omega serializes as null
        assert!(parsed["omega"][2].is_null());
        // 17 significant digits in the text itself
        assert!(text.contains("4.0000000000000000e0"));
    }

    #[test]
    fn csv_schema_is_stable() {
        assert_eq!(CSV_HEADER.split(',').count(), 22);
        let row = csv_row(&sample_report());
        assert_eq!(row.split(',').count(), 22);
        // channels beyond l_max_used print as zero occupancies
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[7], format_float(0.0));
        // undefined omega prints empty
        assert_eq!(cells[12], "");
        assert_eq!(cells[21], "");
    }

    #[test]
    fn csv_error_rows_carry_the_message() {
        let row = csv_error_row(3.0, &Error::Numerical("it broke, badly".into()));
        assert!(row.ends_with("\"numerical: numerical failure: it broke, badly\""));
        let g: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert_eq!(g, 3.0);
    }

    #[test]
    fn float_format_is_17_significant_digits() {
        assert_eq!(format_float(4.0), "4.0000000000000000e0");
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        let tricky = 0.1 + 0.2;
        let parsed: f64 = format_float(tricky).parse().unwrap();
        assert_eq!(parsed.to_bits(), tricky.to_bits());
    }
}
