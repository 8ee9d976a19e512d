//! CSV and JSON emission of sweep results.
//!
//! The CSV starts with `# key: value` metadata lines (values are JSON),
//! followed by a header and one row per sweep point. Missing values are
//! empty cells. Numbers use shortest round-trip formatting, so
//! [`parse_csv`] reproduces the [`SweepResult`] exactly. The `_km2` and
//! `_bitps` columns are derived for readability and ignored on parse.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::harness::sweep::{SweepMetadata, SweepResult, SweepRow};

const COLUMNS: &[&str] = &[
    "bs_density",
    "bs_density_km2",
    "m_bs",
    "point_seed",
    "analytic_total_w",
    "analytic_lower_w",
    "mc_total_w",
    "mc_ci_w",
    "pu_stable_w",
    "rate_upper",
    "rate_exact",
    "rate_exact_ci",
    "rate_mc_upper",
    "rate_mc_upper_ci",
    "rate_upper_bitps",
    "rate_exact_bitps",
    "rate_mc_upper_bitps",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    let m = &result.metadata;
    writeln!(out, "# tool: {}", serde_json::to_string(&m.tool)?)?;
    writeln!(out, "# version: {}", serde_json::to_string(&m.version)?)?;
    writeln!(out, "# figure: {}", serde_json::to_string(&m.figure)?)?;
    writeln!(out, "# params: {}", serde_json::to_string(&m.params)?)?;
    writeln!(out, "# options: {}", serde_json::to_string(&m.options)?)?;
    writeln!(out, "# status: {}", serde_json::to_string(&m.status)?)?;
    let bw = m.params.bandwidth_hz;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.bs_density.to_string(),
            (r.bs_density * 1e6).to_string(),
            r.m_bs.to_string(),
            r.point_seed.to_string(),
            r.analytic_total_w.to_string(),
            r.analytic_lower_w.to_string(),
            opt(r.mc_total_w),
            opt(r.mc_ci_w),
            r.pu_stable_w.to_string(),
            opt(r.rate_upper),
            opt(r.rate_exact),
            opt(r.rate_exact_ci),
            opt(r.rate_mc_upper),
            opt(r.rate_mc_upper_ci),
            opt(r.rate_upper.map(|x| x * bw)),
            opt(r.rate_exact.map(|x| x * bw)),
            opt(r.rate_mc_upper.map(|x| x * bw)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(result: &SweepResult) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn parse_csv<R: Read>(input: R) -> Result<SweepResult> {
    let mut reader = std::io::BufReader::new(input);
    let mut meta = std::collections::HashMap::new();
    let mut body = String::new();
    let mut line = String::new();
    while reader.read_line(&mut line)? > 0 {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once(": ")
                .ok_or_else(|| Error::Config(format!("bad metadata line `{}`", line.trim_end())))?;
            meta.insert(k.to_string(), v.trim_end().to_string());
        } else {
            body.push_str(&line);
        }
        line.clear();
    }
    let field = |k: &str| {
        meta.get(k)
            .ok_or_else(|| Error::Config(format!("metadata line `{k}` missing")))
    };
    let metadata = SweepMetadata {
        tool: serde_json::from_str(field("tool")?)?,
        version: serde_json::from_str(field("version")?)?,
        figure: serde_json::from_str(field("figure")?)?,
        params: serde_json::from_str(field("params")?)?,
        options: serde_json::from_str(field("options")?)?,
        status: serde_json::from_str(field("status")?)?,
    };

    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("CSV column `{name}` missing")))
    };
    let idx: Vec<usize> = COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let num = |rec: &csv::StringRecord, c: usize| -> Result<Option<f64>> {
        let s = &rec[idx[c]];
        if s.is_empty() {
            return Ok(None);
        }
        s.parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("column `{}`: bad number `{s}`", COLUMNS[c])))
    };
    let req = |rec: &csv::StringRecord, c: usize| -> Result<f64> {
        num(rec, c)?.ok_or_else(|| Error::Config(format!("column `{}` is empty", COLUMNS[c])))
    };
    let int = |rec: &csv::StringRecord, c: usize| -> Result<u64> {
        rec[idx[c]]
            .parse()
            .map_err(|_| Error::Config(format!("column `{}`: bad integer", COLUMNS[c])))
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(SweepRow {
            bs_density: req(&rec, 0)?,
            m_bs: u32::try_from(int(&rec, 2)?)
                .map_err(|_| Error::Config("column `m_bs` out of range".into()))?,
            point_seed: int(&rec, 3)?,
            analytic_total_w: req(&rec, 4)?,
            analytic_lower_w: req(&rec, 5)?,
            mc_total_w: num(&rec, 6)?,
            mc_ci_w: num(&rec, 7)?,
            pu_stable_w: req(&rec, 8)?,
            rate_upper: num(&rec, 9)?,
            rate_exact: num(&rec, 10)?,
            rate_exact_ci: num(&rec, 11)?,
            rate_mc_upper: num(&rec, 12)?,
            rate_mc_upper_ci: num(&rec, 13)?,
        });
    }
    Ok(SweepResult { metadata, rows })
}

pub fn write_json<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, result)?;
    Ok(())
}

pub fn parse_json<R: Read>(input: R) -> Result<SweepResult> {
    Ok(serde_json::from_reader(input)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::{run_fig1, run_fig2, SweepOptions};
    use crate::params::SystemParams;

    fn opts() -> SweepOptions {
        SweepOptions {
            densities: vec![1e-6, 3.3e-4, 1e-2],
            m_values: vec![16],
            trials: 200,
            seed: 3,
            run_mc: true,
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut o = opts();
        o.densities = vec![1e-6, 3.3e-4];
        for r in [
            run_fig1(&SystemParams::default(), &o).unwrap(),
            run_fig2(&SystemParams::default(), &o).unwrap(),
        ] {
            let text = to_csv_string(&r).unwrap();
            assert!(text.starts_with("# tool: \"mmwpt\""));
            assert_eq!(parse_csv(text.as_bytes()).unwrap(), r);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut o = opts();
        o.run_mc = false;
        let r = run_fig2(&SystemParams::default(), &o).unwrap();
        let mut buf = Vec::new();
        write_json(&r, &mut buf).unwrap();
        assert_eq!(parse_json(buf.as_slice()).unwrap(), r);
    }

    #[test]
    fn derived_columns() {
        let mut o = opts();
        o.run_mc = false;
        o.densities = vec![1e-4];
        let r = run_fig2(&SystemParams::default(), &o).unwrap();
        let text = to_csv_string(&r).unwrap();
        let body: String = text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let h = rdr.headers().unwrap().clone();
        let rec = rdr.records().next().unwrap().unwrap();
        let get = |n: &str| rec[h.iter().position(|x| x == n).unwrap()].to_string();
        assert_eq!(get("bs_density_km2").parse::<f64>().unwrap(), 100.0);
        let bps: f64 = get("rate_upper_bitps").parse().unwrap();
        assert!((bps / (r.rows[0].rate_upper.unwrap() * 2e9) - 1.0).abs() < 1e-15);
        assert_eq!(get("mc_total_w"), "");
    }

    #[test]
    fn truncated_metadata_is_an_error() {
        assert!(parse_csv("# tool: \"mmwpt\"\nbs_density\n".as_bytes()).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::harness::sweep::{run_fig1, SweepOptions};
    use crate::params::SystemParams;
    use proptest::prelude::*;

    fn opt_val() -> impl Strategy<Value = Option<f64>> {
        prop::option::of(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO)
    }

    fn any_row() -> impl Strategy<Value = SweepRow> {
        (
            (1e-9f64..1.0, 1u32..1024, any::<u64>(), prop::num::f64::NORMAL, prop::num::f64::NORMAL),
            (opt_val(), opt_val(), prop::num::f64::POSITIVE),
            (opt_val(), opt_val(), opt_val(), opt_val(), opt_val()),
        )
            .prop_map(|((rho, m, seed, tot, low), (mc, ci, pu), (up, ex, exci, mcu, mcuci))| SweepRow {
                bs_density: rho,
                m_bs: m,
                point_seed: seed,
                analytic_total_w: tot,
                analytic_lower_w: low,
                mc_total_w: mc,
                mc_ci_w: ci,
                pu_stable_w: pu,
                rate_upper: up,
                rate_exact: ex,
                rate_exact_ci: exci,
                rate_mc_upper: mcu,
                rate_mc_upper_ci: mcuci,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn csv_round_trips_any_rows(rows in prop::collection::vec(any_row(), 0..8)) {
            let opts = SweepOptions { densities: vec![1e-4], m_values: vec![16], trials: 1, seed: 0, run_mc: false };
            let mut r = run_fig1(&SystemParams::default(), &opts).unwrap();
            r.rows = rows;
            let text = to_csv_string(&r).unwrap();
            prop_assert_eq!(parse_csv(text.as_bytes()).unwrap(), r);
        }
    }
}
