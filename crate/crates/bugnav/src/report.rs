//! Aggregation of run records into analysis tables: per-algorithm
//! success rates, normalized-trajectory-length quartiles, pairwise
//! bootstrap p-values, and per-noise-axis regressions. Failed runs count
//! toward length statistics on purpose; the time limit caps them.

use crate::bugs::Algorithm;
use crate::harness::RunRecord;
use crate::noise::NoiseConfig;
use crate::stats::{
    bootstrap_test, linear_regression, logistic_regression, LinearFit, LogisticFit,
};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no records to analyze")]
    Empty,
}

/// Exact grouping key for one noise grid point. Float bits are stable
/// because every record at a grid point carries identical values.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct NoiseKey([u64; 4], u8);

fn noise_key(n: &NoiseConfig) -> NoiseKey {
    NoiseKey(
        [
            n.odom_sigma.to_bits(),
            n.p_fp.to_bits(),
            n.p_fn.to_bits(),
            n.dt_sigma.to_bits(),
        ],
        n.fp_mode as u8,
    )
}

fn alg_rank(a: Algorithm) -> usize {
    Algorithm::ALL.iter().position(|&x| x == a).unwrap_or(usize::MAX)
}

/// Label for a noise point, compact enough for table columns.
pub fn noise_label(n: &NoiseConfig) -> String {
    format!(
        "odom={} p_fp={} p_fn={} dt={} {}",
        n.odom_sigma, n.p_fp, n.p_fn, n.dt_sigma, n.fp_mode
    )
}

#[derive(Clone, Debug)]
pub struct SuccessRow {
    pub algorithm: Algorithm,
    pub noise: NoiseConfig,
    pub n: usize,
    pub successes: usize,
    pub rate: f64,
}

/// Success rate per (algorithm, noise point), ordered by algorithm then
/// noise point.
pub fn success_table(records: &[RunRecord]) -> Vec<SuccessRow> {
    let mut groups: BTreeMap<(usize, NoiseKey), (NoiseConfig, usize, usize)> = BTreeMap::new();
    for r in records {
        let e = groups
            .entry((alg_rank(r.algorithm), noise_key(&r.noise)))
            .or_insert((r.noise, 0, 0));
        e.1 += 1;
        if r.success {
            e.2 += 1;
        }
    }
    groups
        .into_iter()
        .map(|((rank, _), (noise, n, successes))| SuccessRow {
            algorithm: Algorithm::ALL[rank],
            noise,
            n,
            successes,
            rate: successes as f64 / n as f64,
        })
        .collect()
}

/// Five-number summary with Moore-McCabe hinges (median excluded from
/// both halves when the count is odd).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let half = n / 2;
    let (lower, upper) = if n % 2 == 0 {
        (&v[..half], &v[half..])
    } else {
        (&v[..half], &v[half + 1..])
    };
    Some(Quartiles {
        min: v[0],
        q1: if lower.is_empty() { v[0] } else { median_sorted(lower) },
        median: median_sorted(&v),
        q3: if upper.is_empty() { v[n - 1] } else { median_sorted(upper) },
        max: v[n - 1],
    })
}

#[derive(Clone, Debug)]
pub struct LengthRow {
    pub algorithm: Algorithm,
    pub noise: NoiseConfig,
    pub n: usize,
    pub normalized: Quartiles,
}

/// Normalized-trajectory-length quartiles per (algorithm, noise point);
/// failed runs included.
pub fn length_table(records: &[RunRecord]) -> Vec<LengthRow> {
    let mut groups: BTreeMap<(usize, NoiseKey), (NoiseConfig, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let e = groups
            .entry((alg_rank(r.algorithm), noise_key(&r.noise)))
            .or_insert((r.noise, Vec::new()));
        e.1.push(r.normalized_length);
    }
    groups
        .into_iter()
        .map(|((rank, _), (noise, values))| LengthRow {
            algorithm: Algorithm::ALL[rank],
            noise,
            n: values.len(),
            normalized: quartiles(&values).expect("group is non-empty"),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PairRow {
    pub noise: NoiseConfig,
    pub a: Algorithm,
    pub b: Algorithm,
    pub p_value: f64,
}

/// Pairwise bootstrap tests on normalized length between algorithms that
/// share a noise point.
pub fn pairwise_bootstrap<R: Rng>(
    records: &[RunRecord],
    n_resamples: usize,
    rng: &mut R,
) -> Vec<PairRow> {
    let mut groups: BTreeMap<NoiseKey, (NoiseConfig, BTreeMap<usize, Vec<f64>>)> = BTreeMap::new();
    for r in records {
        let e = groups
            .entry(noise_key(&r.noise))
            .or_insert((r.noise, BTreeMap::new()));
        e.1.entry(alg_rank(r.algorithm))
            .or_default()
            .push(r.normalized_length);
    }
    let mut out = Vec::new();
    for (_, (noise, per_alg)) in groups {
        let algs: Vec<usize> = per_alg.keys().copied().collect();
        for (i, &ra) in algs.iter().enumerate() {
            for &rb in &algs[i + 1..] {
                if let Ok(p) = bootstrap_test(&per_alg[&ra], &per_alg[&rb], n_resamples, rng) {
                    out.push(PairRow {
                        noise,
                        a: Algorithm::ALL[ra],
                        b: Algorithm::ALL[rb],
                        p_value: p,
                    });
                }
            }
        }
    }
    out
}

/// One noise axis of the sweep grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseAxis {
    OdomSigma,
    PFp,
    PFn,
    DtSigma,
}

impl NoiseAxis {
    pub const ALL: [NoiseAxis; 4] = [
        NoiseAxis::OdomSigma,
        NoiseAxis::PFp,
        NoiseAxis::PFn,
        NoiseAxis::DtSigma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseAxis::OdomSigma => "odom_sigma",
            NoiseAxis::PFp => "p_fp",
            NoiseAxis::PFn => "p_fn",
            NoiseAxis::DtSigma => "dt_sigma",
        }
    }

    pub fn value(self, n: &NoiseConfig) -> f64 {
        match self {
            NoiseAxis::OdomSigma => n.odom_sigma,
            NoiseAxis::PFp => n.p_fp,
            NoiseAxis::PFn => n.p_fn,
            NoiseAxis::DtSigma => n.dt_sigma,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegressionRow {
    pub algorithm: Algorithm,
    pub axis: NoiseAxis,
    /// Logistic fit of success on the axis; None when the outcomes are
    /// all one class.
    pub success_fit: Option<LogisticFit>,
    /// OLS fit of normalized length on the axis.
    pub length_fit: Option<LinearFit>,
}

/// For every algorithm and every noise axis that actually varies in the
/// data, regress success (logistic) and normalized length (OLS) on the
/// axis value.
pub fn regression_table(records: &[RunRecord]) -> Vec<RegressionRow> {
    let mut out = Vec::new();
    for &alg in &Algorithm::ALL {
        let rows: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm == alg).collect();
        if rows.is_empty() {
            continue;
        }
        for axis in NoiseAxis::ALL {
            let x: Vec<f64> = rows.iter().map(|r| axis.value(&r.noise)).collect();
            if x.iter().all(|&v| v == x[0]) {
                continue;
            }
            let success: Vec<bool> = rows.iter().map(|r| r.success).collect();
            let lengths: Vec<f64> = rows.iter().map(|r| r.normalized_length).collect();
            out.push(RegressionRow {
                algorithm: alg,
                axis,
                success_fit: logistic_regression(&x, &success).ok(),
                length_fit: linear_regression(&x, &lengths).ok(),
            });
        }
    }
    out
}

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

/// Render the full plain-text report.
pub fn render_report<R: Rng>(
    records: &[RunRecord],
    n_resamples: usize,
    rng: &mut R,
) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut s = String::new();
    let _ = writeln!(s, "records: {}", records.len());
    let _ = writeln!(s);

    let _ = writeln!(s, "success rates");
    for row in success_table(records) {
        let _ = writeln!(
            s,
            "  {:5}  {:>4}/{:<4} = {:>6.1}%   [{}]",
            row.algorithm.name(),
            row.successes,
            row.n,
            100.0 * row.rate,
            noise_label(&row.noise),
        );
    }
    let _ = writeln!(s);

    let _ = writeln!(s, "normalized trajectory length (all runs)");
    for row in length_table(records) {
        let q = row.normalized;
        let _ = writeln!(
            s,
            "  {:5}  q1={} med={} q3={}   [{}]",
            row.algorithm.name(),
            fmt3(q.q1),
            fmt3(q.median),
            fmt3(q.q3),
            noise_label(&row.noise),
        );
    }
    let _ = writeln!(s);

    let _ = writeln!(s, "pairwise bootstrap on normalized length (p-values)");
    for row in pairwise_bootstrap(records, n_resamples, rng) {
        let _ = writeln!(
            s,
            "  {:5} vs {:5}  p={}   [{}]",
            row.a.name(),
            row.b.name(),
            fmt3(row.p_value),
            noise_label(&row.noise),
        );
    }

    let regressions = regression_table(records);
    if !regressions.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "regressions on noise axes");
        for row in &regressions {
            let logistic = match &row.success_fit {
                Some(f) if f.separated => "logit coef diverges (separated)".to_string(),
                Some(f) => format!(
                    "logit coef={} se={} pseudoR2={}",
                    fmt3(f.coefficient),
                    fmt3(f.coef_se),
                    fmt3(f.pseudo_r_squared)
                ),
                None => "logit n/a".to_string(),
            };
            let linear = match &row.length_fit {
                Some(f) => format!("len slope={} R2={}", fmt3(f.slope), fmt3(f.r_squared)),
                None => "len n/a".to_string(),
            };
            let _ = writeln!(
                s,
                "  {:5} ~ {:10}  {}; {}",
                row.algorithm.name(),
                row.axis.name(),
                logistic,
                linear
            );
        }
    }
    Ok(s)
}

/// CSV forms of the tables, for machine consumption.
pub fn success_csv(rows: &[SuccessRow]) -> String {
    let mut s = String::from(
        "algorithm,odom_sigma,p_fp,p_fn,dt_sigma,fp_mode,n,successes,success_rate\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.noise.odom_sigma,
            r.noise.p_fp,
            r.noise.p_fn,
            r.noise.dt_sigma,
            r.noise.fp_mode,
            r.n,
            r.successes,
            r.rate
        );
    }
    s
}

pub fn length_csv(rows: &[LengthRow]) -> String {
    let mut s = String::from(
        "algorithm,odom_sigma,p_fp,p_fn,dt_sigma,fp_mode,n,min,q1,median,q3,max\n",
    );
    for r in rows {
        let q = r.normalized;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.noise.odom_sigma,
            r.noise.p_fp,
            r.noise.p_fn,
            r.noise.dt_sigma,
            r.noise.fp_mode,
            r.n,
            q.min,
            q.q1,
            q.median,
            q.q3,
            q.max
        );
    }
    s
}

pub fn pairwise_csv(rows: &[PairRow]) -> String {
    let mut s =
        String::from("alg_a,alg_b,odom_sigma,p_fp,p_fn,dt_sigma,fp_mode,p_value\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.a,
            r.b,
            r.noise.odom_sigma,
            r.noise.p_fp,
            r.noise.p_fn,
            r.noise.dt_sigma,
            r.noise.fp_mode,
            r.p_value
        );
    }
    s
}

pub fn regression_csv(rows: &[RegressionRow]) -> String {
    let mut s = String::from(
        "algorithm,axis,logit_coef,logit_se,pseudo_r2,separated,length_slope,length_r2\n",
    );
    for r in rows {
        let (coef, se, pr2, sep) = match &r.success_fit {
            Some(f) => (
                f.coefficient.to_string(),
                f.coef_se.to_string(),
                f.pseudo_r_squared.to_string(),
                f.separated.to_string(),
            ),
            None => ("".into(), "".into(), "".into(), "".into()),
        };
        let (slope, r2) = match &r.length_fit {
            Some(f) => (f.slope.to_string(), f.r_squared.to_string()),
            None => ("".into(), "".into()),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.axis.name(),
            coef,
            se,
            pr2,
            sep,
            slope,
            r2
        );
    }
    s
}
