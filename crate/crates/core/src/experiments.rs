//! Per-instance evaluation, parallel seeded sweeps and their CSV, text and SVG reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{
    decompose, ham_path, lightness_bound, lightness_trace_from, log54, max_rounds, verify_certificate,
    weight_coefficient, HamMode,
};
use crate::disk_graph::build_sdg;
use crate::error::{Error, Result};
use crate::graph::kruskal_msf;
use crate::hamiltonian::Exactness;
use crate::instances::{gen_random_instance, mix_seed, Family, InstanceBundle, RangeMode, Space};
use crate::range_assignment::bounded_assignment;

pub const CSV_HEADER: [&str; 16] = [
    "id",
    "seed",
    "n",
    "family",
    "connected",
    "w_mst",
    "w_msf_sdg",
    "coefficient",
    "bound_2log",
    "ham_mode",
    "w_ham",
    "trace_rounds",
    "max_round_bound",
    "cert_ok",
    "assign_cost",
    "assign_lower_bound",
];

/// Caps the number of sweep workers.
pub const THREADS_ENV: &str = "SDGLAB_THREADS";

/// One evaluated metric instance. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub id: u64,
    pub seed: u64,
    pub n: usize,
    pub family: Family,
    pub connected: bool,
    pub w_mst: f64,
    pub w_msf_sdg: f64,
    pub coefficient: f64,
    pub bound_2log: f64,
    /// How the path driving the trace was obtained.
    pub ham_mode: Exactness,
    pub w_ham: f64,
    pub trace_rounds: usize,
    pub max_round_bound: usize,
    /// Top-level certificate and every trace relation re-verified.
    pub cert_ok: bool,
    pub assign_cost: f64,
    pub assign_lower_bound: f64,
}

impl ExperimentRecord {
    /// Failed invariants, each naming the seed for replay.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let tag = format!("instance {} (seed {})", self.id, self.seed);
        if self.family.is_metric() && self.coefficient > self.bound_2log {
            out.push(format!("{tag}: coefficient {} exceeds {}", self.coefficient, self.bound_2log));
        }
        if self.trace_rounds > self.max_round_bound {
            out.push(format!("{tag}: {} trace rounds exceed {}", self.trace_rounds, self.max_round_bound));
        }
        if !self.cert_ok {
            out.push(format!("{tag}: certificate or trace verification failed"));
        }
        out
    }
}

/// Evaluates coefficient, certificate, trace and range assignment on a metric instance.
pub fn evaluate_instance(id: u64, bundle: &InstanceBundle, mode: HamMode) -> Result<ExperimentRecord> {
    let m = bundle
        .metric()
        .ok_or_else(|| Error::InvalidParameter("experiments need a metric instance".into()))?;
    let r = &bundle.ranges;
    let coefficient = weight_coefficient(m, r)?;
    let h = ham_path(m, mode)?;
    let forest = kruskal_msf(&build_sdg(m, r)?);
    let cert = decompose(m, r, &forest, &h)?;
    let cert_ok = verify_certificate(m, r, &forest, &h, &cert).is_empty();
    let trace = lightness_trace_from(m, r, h.clone())?;
    let trace_ok = trace.check(m, r).is_empty();
    let assignment = bounded_assignment(m, r)?;
    Ok(ExperimentRecord {
        id,
        seed: bundle.seed.unwrap_or(0),
        n: m.n(),
        family: bundle.family.unwrap_or(if m.is_matrix() { Family::Matrix } else { Family::Euclidean }),
        connected: coefficient.connected,
        w_mst: coefficient.w_mst_metric,
        w_msf_sdg: coefficient.w_msf_sdg,
        coefficient: coefficient.coefficient,
        bound_2log: lightness_bound(m.n()),
        ham_mode: h.exactness(),
        w_ham: h.weight(),
        trace_rounds: trace.rounds.len(),
        max_round_bound: max_rounds(m.n()),
        cert_ok: cert_ok && trace_ok,
        assign_cost: assignment.cost,
        assign_lower_bound: assignment.lower_bound,
    })
}

/// Grid of random instances. Instance `i` uses seed `mix_seed(base_seed, i)`,
/// size `sizes[i % S]`, space `spaces[(i / S) % P]` and range mode
/// `range_modes[(i / (S·P)) % R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base_seed: u64,
    pub trials: usize,
    pub sizes: Vec<usize>,
    pub spaces: Vec<Space>,
    pub range_modes: Vec<RangeMode>,
    pub ham: HamMode,
    /// Worker count; 0 picks the available parallelism. Always capped by [`THREADS_ENV`].
    pub threads: usize,
}

impl SweepConfig {
    pub fn instance(&self, id: u64) -> Result<InstanceBundle> {
        let (s, p, r) = (self.sizes.len(), self.spaces.len(), self.range_modes.len());
        if s == 0 || p == 0 || r == 0 {
            return Err(Error::InvalidParameter("sweep needs at least one size, space and range mode".into()));
        }
        let i = id as usize;
        gen_random_instance(self.sizes[i % s], self.spaces[(i / s) % p], self.range_modes[(i / (s * p)) % r], mix_seed(self.base_seed, id))
    }
}

/// `requested` workers (or all cores for 0), capped by [`THREADS_ENV`].
pub fn effective_threads(requested: usize) -> usize {
    let base = if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    };
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&c| c > 0);
    cap.map_or(base, |c| base.min(c))
}

/// Evaluates every instance of `config` on a dedicated pool; records are in id order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ExperimentRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(effective_threads(config.threads))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start workers: {e}")))?;
    let mut records = pool.install(|| {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|id| {
                let bundle = config.instance(id)?;
                evaluate_instance(id, &bundle, config.ham).map_err(|e| {
                    Error::InvalidParameter(format!("instance {id} (seed {}): {e}", bundle.seed.unwrap_or(0)))
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by_key(|r| r.id);
    Ok(records)
}

pub fn write_csv<W: io::Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    write_csv(records, std::fs::File::create(path)?)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    if rd.headers()?.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidParameter("unexpected CSV header".into()));
    }
    Ok(rd.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Maximum coefficient per size and per family as a text table.
pub fn emit_summary(records: &[ExperimentRecord]) -> String {
    let mut by_n: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    let mut by_family: BTreeMap<Family, (usize, f64)> = BTreeMap::new();
    for r in records {
        for slot in [by_n.entry(r.n).or_insert((0, 0.0)), by_family.entry(r.family).or_insert((0, 0.0))] {
            slot.0 += 1;
            slot.1 = slot.1.max(r.coefficient);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "{:>6} {:>8} {:>16} {:>12}", "n", "count", "max_coefficient", "bound_2log");
    for (n, (count, max)) in &by_n {
        let _ = writeln!(s, "{n:>6} {count:>8} {max:>16.6} {:>12.6}", lightness_bound(*n));
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{:>10} {:>8} {:>16}", "family", "count", "max_coefficient");
    for (family, (count, max)) in &by_family {
        let _ = writeln!(s, "{:>10} {count:>8} {max:>16.6}", family.as_str());
    }
    let failing: usize = records.iter().filter(|r| !r.violations().is_empty()).count();
    let _ = writeln!(s);
    let _ = writeln!(s, "{} records, {failing} with violations", records.len());
    s
}

/// Standalone SVG: maximum coefficient against `log_{5/4} n`, with the
/// `2·log_{5/4} n` bound dashed.
pub fn render_svg(records: &[ExperimentRecord]) -> String {
    let mut by_n: BTreeMap<usize, f64> = BTreeMap::new();
    for r in records {
        let e = by_n.entry(r.n).or_insert(0.0);
        *e = e.max(r.coefficient);
    }
    let pts: Vec<(f64, f64, f64)> = by_n.iter().map(|(&n, &c)| (log54(n), c, lightness_bound(n))).collect();
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let x_max = pts.iter().map(|p| p.0).fold(1.0, f64::max);
    let y_max = pts.iter().map(|p| p.2.max(p.1)).fold(1.0, f64::max);
    let sx = |x: f64| pad + x / x_max * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - y / y_max * (h - 2.0 * pad);
    let line = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
        pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(f(p)))).collect::<Vec<_>>().join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{pad},{pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">log_5/4 n</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 16 {})">max coefficient</text>"#,
        h / 2.0,
        h / 2.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">{x_max:.1}</text>"#, w - pad - 10.0, h - pad + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{y_max:.1}</text>"#, pad - 4.0, pad + 4.0);
    if !pts.is_empty() {
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="gray" stroke-dasharray="6,4"/>"#, line(&|p| p.2));
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, line(&|p| p.1));
        for p in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(p.0), sy(p.1));
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_chain_metric;
    use crate::metric::Norm;

    fn small_config(threads: usize) -> SweepConfig {
        SweepConfig {
            base_seed: 7,
            trials: 24,
            sizes: vec![5, 9, 17],
            spaces: vec![Space::Euclidean { d: 2, p: Norm::P(2.0) }, Space::Matrix],
            range_modes: vec![RangeMode::Uniform, RangeMode::Biased],
            ham: HamMode::Auto,
            threads,
        }
    }

    #[test]
    fn chain_record() {
        let rec = evaluate_instance(0, &gen_chain_metric(5).unwrap(), HamMode::Auto).unwrap();
        assert_eq!(rec.coefficient, 1.0);
        assert_eq!(rec.trace_rounds, 1);
        assert!(rec.cert_ok && rec.connected);
        assert_eq!(rec.family, Family::Chain);
        assert!(rec.violations().is_empty());
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn sweep_round_trips_and_ignores_worker_count() {
        let a = run_sweep(&small_config(1)).unwrap();
        let b = run_sweep(&small_config(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.violations().is_empty()));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        emit_csv(&a, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), a);
        let summary = emit_summary(&a);
        assert!(summary.contains("max_coefficient"));
        assert!(render_svg(&a).starts_with("<svg"));
    }

    #[test]
    fn graph_instances_are_rejected() {
        let b = crate::instances::gen_c3(1000.0).unwrap();
        assert!(evaluate_instance(0, &b, HamMode::Auto).is_err());
    }
}
