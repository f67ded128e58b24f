use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::RunConfig;
use crate::entropy::EntropyReport;
use crate::error::Result;

const HEADER: &str = "u,v_eff,S_R2,S_R2_cl,S_vN,S_WSh,S_WSh_cl,expS_R2,expS_R2_cl,expS_vN,expS_WSh,S_R2_largeU";

/// One CSV line of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub u: f64,
    pub v_eff: Option<f64>,
    pub s_r2: f64,
    pub s_r2_cl: Option<f64>,
    pub s_vn: f64,
    pub s_wsh: f64,
    pub s_wsh_cl: Option<f64>,
    pub s_r2_large_u: Option<f64>,
    pub s_wehrl_half: Option<f64>,
    pub s_r2_wehrl_half: Option<f64>,
}

impl SweepRow {
    pub fn new(u: f64, v_eff: Option<f64>, r: &EntropyReport, large_u: Option<f64>) -> Self {
        Self {
            u,
            v_eff,
            s_r2: r.s_r2,
            s_r2_cl: r.s_r2_cl,
            s_vn: r.s_vn,
            s_wsh: r.s_wsh,
            s_wsh_cl: r.s_wsh_cl,
            s_r2_large_u: large_u,
            s_wehrl_half: r.s_wehrl_half,
            s_r2_wehrl_half: r.s_r2_wehrl_half,
        }
    }

    pub fn sort_key(&self) -> (f64, f64) {
        (self.u, self.v_eff.unwrap_or(f64::NEG_INFINITY))
    }

    fn fields(&self, wehrl: bool) -> Vec<String> {
        let o = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
        let mut f = vec![
            format_sig(self.u),
            o(self.v_eff),
            format_sig(self.s_r2),
            o(self.s_r2_cl),
            format_sig(self.s_vn),
            format_sig(self.s_wsh),
            o(self.s_wsh_cl),
            format_sig(self.s_r2.exp()),
            o(self.s_r2_cl.map(f64::exp)),
            format_sig(self.s_vn.exp()),
            format_sig(self.s_wsh.exp()),
            o(self.s_r2_large_u),
        ];
        if wehrl {
            f.push(o(self.s_wehrl_half));
            f.push(o(self.s_r2_wehrl_half));
        }
        f
    }
}

/// Six significant digits, fixed notation for moderate magnitudes.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        format!("{:.*}", (5 - e).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

fn render(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let list = |v: &[f64]| v.iter().map(|x| format_sig(*x)).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    let _ = writeln!(s, "# composite-ee {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# weight = {}", cfg.weight_source);
    let _ = writeln!(s, "# u = {}", list(&cfg.u));
    if !cfg.veff.is_empty() {
        let _ = writeln!(s, "# veff = {}", list(&cfg.veff));
    }
    let _ = writeln!(
        s,
        "# grid-n = {}, grid-l = {}, phase-n = {}",
        cfg.grid_n.map_or("default".into(), |n| n.to_string()),
        cfg.grid_l.map_or("default".into(), format_sig),
        cfg.phase_n.map_or("default".into(), |n| n.to_string()),
    );
    let _ = writeln!(s, "# entropies in nats; lengths in units of b; hbar = m = b = 1");
    s.push_str(HEADER);
    if cfg.include_wehrl {
        s.push_str(",S_Wehrl_half,S_R2Wehrl_half");
    }
    s.push('\n');
    for r in rows {
        s.push_str(&r.fields(cfg.include_wehrl).join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv_to(out: &mut dyn Write, cfg: &RunConfig, rows: &[SweepRow]) -> Result<()> {
    out.write_all(render(cfg, rows).as_bytes())?;
    Ok(())
}

pub fn write_csv(path: &Path, cfg: &RunConfig, rows: &[SweepRow]) -> Result<()> {
    if let Err(e) = std::fs::write(path, render(cfg, rows)) {
        let _ = std::fs::remove_file(path);
        return Err(e.into());
    }
    Ok(())
}

pub fn write_point(out: &mut dyn Write, row: &SweepRow, r: &EntropyReport) -> Result<()> {
    let line = |out: &mut dyn Write, name: &str, s: Option<f64>| -> std::io::Result<()> {
        match s {
            Some(s) => writeln!(out, "{name:<16} {:>12}   e^S = {}", format_sig(s), format_sig(s.exp())),
            None => writeln!(out, "{name:<16} {:>12}", "n/a"),
        }
    };
    writeln!(out, "u                {:>12}", format_sig(row.u))?;
    if let Some(v) = row.v_eff {
        writeln!(out, "v_eff            {:>12}", format_sig(v))?;
    }
    line(out, "S_R2", Some(r.s_r2))?;
    line(out, "S_vN", Some(r.s_vn))?;
    line(out, "S_WSh", Some(r.s_wsh))?;
    line(out, "S_R2_cl", r.s_r2_cl)?;
    line(out, "S_WSh_cl", r.s_wsh_cl)?;
    if r.s_wehrl_half.is_some() {
        line(out, "S_Wehrl_half", r.s_wehrl_half)?;
        line(out, "S_R2Wehrl_half", r.s_r2_wehrl_half)?;
    }
    if let Some(l) = row.s_r2_large_u {
        line(out, "S_R2_largeU", Some(l))?;
    }
    match r.kt {
        Some(kt) => writeln!(out, "kT               {:>12}", format_sig(kt))?,
        None => writeln!(out, "kT               {:>12}", "n/a")?,
    }
    writeln!(out, "Tr rho^2         {:>12}", format_sig(r.purity))?;
    writeln!(out, "int W^2          {:>12}", format_sig(r.phase_space_purity))?;
    let d = &r.diagnostics;
    writeln!(
        out,
        "# grid N = {}, L = {}, vN N = {} (change {:.1e}), phase n = {}",
        d.grid_n,
        format_sig(d.grid_half_width),
        d.vn_n,
        d.vn_change,
        d.phase_n
    )?;
    writeln!(
        out,
        "# raw trace = {}, min eigenvalue = {:.3e}, sum eigenvalues = {}, int W = {}",
        format_sig(d.raw_trace),
        d.min_eigenvalue,
        format_sig(d.eigenvalue_sum),
        format_sig(d.wigner_integral)
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.510826), "0.510826");
        assert_eq!(format_sig(1.3591409), "1.35914");
        assert_eq!(format_sig(8.0), "8.00000");
        assert_eq!(format_sig(0.25), "0.250000");
        assert_eq!(format_sig(123456.7), "123457");
        assert_eq!(format_sig(1234567.0), "1.23457e6");
        assert_eq!(format_sig(-3.2e-7), "-3.20000e-7");
        assert_eq!(format_sig(0.0), "0");
    }
}
