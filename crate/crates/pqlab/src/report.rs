//! Executable counterexample reports: accumulation of combined eigenvalues
//! below each fixed-component eigenvalue (two-component union), and the
//! non-isolated first eigenvalue of an infinite union of shrinking balls.

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{
    combine, enumerate_spectrum, first_eigenvalue_union_geometric, Selection,
};
use crate::domain::{
    compactness_exponent, dilation_exponent, ComponentDomain, Config, Exponents, TailRule,
};
use crate::error::{Error, Result};
use crate::shoot::component_eigenvalue;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct AccumulationRow {
    pub n: usize,
    pub lambda: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowCount {
    pub j: usize,
    pub eps: f64,
    pub count: usize,
}

/// Table of the sequence lambda_{n,k} accumulating at the k-th eigenvalue of
/// the large component, plus window counts over the enumerated spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct AccumulationReport {
    pub schema: u32,
    pub p: f64,
    pub q: f64,
    pub big: ComponentDomain,
    pub small: ComponentDomain,
    pub k: usize,
    pub n_max: usize,
    /// lambda^k of the large component: the accumulation limit.
    pub limit: f64,
    pub rows: Vec<AccumulationRow>,
    pub window_counts: Vec<WindowCount>,
    /// Deduplicated enumerated spectrum values up to the limit (inclusive).
    pub spectrum_values: Vec<f64>,
}

/// Build the two-component accumulation table: the k-th eigenvalue of `big`
/// is fixed, the small component runs through its first n_max eigenvalues.
pub fn bi_union_report(
    exponents: &Exponents,
    big: &ComponentDomain,
    small: &ComponentDomain,
    k: usize,
    n_max: usize,
    cfg: &Config,
) -> Result<AccumulationReport> {
    exponents.validate()?;
    if k < 1 || n_max < 1 {
        return Err(Error::InvalidInput("k and n_max must be >= 1".into()));
    }

    let big_spectrum: Vec<f64> = (1..=k)
        .map(|i| component_eigenvalue(exponents, big, i, cfg).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let small_spectrum: Vec<f64> = (1..=n_max)
        .into_par_iter()
        .map(|n| component_eigenvalue(exponents, small, n, cfg).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;

    let limit = big_spectrum[k - 1];
    let rows: Vec<AccumulationRow> = small_spectrum
        .iter()
        .enumerate()
        .map(|(i, lam_small)| {
            let pair = combine(exponents, &Selection::new(vec![Some(limit), Some(*lam_small)]))?;
            Ok(AccumulationRow { n: i + 1, lambda: pair.value, gap: limit - pair.value })
        })
        .collect::<Result<Vec<_>>>()?;

    let points = enumerate_spectrum(
        exponents,
        &[big_spectrum, small_spectrum],
        limit,
        cfg.enumeration_budget,
        cfg.dedup_rel_tol,
    )?;
    let spectrum_values: Vec<f64> = points.iter().map(|pt| pt.value).collect();

    let window_counts: Vec<WindowCount> = rows
        .iter()
        .map(|row| {
            let eps = row.gap;
            let count = spectrum_values
                .iter()
                .filter(|v| **v > limit - eps && **v < limit)
                .count();
            WindowCount { j: row.n, eps, count }
        })
        .collect();

    Ok(AccumulationReport {
        schema: SCHEMA_VERSION,
        p: exponents.p(),
        q: exponents.q(),
        big: *big,
        small: *small,
        k,
        n_max,
        limit,
        rows,
        window_counts,
        spectrum_values,
    })
}

impl AccumulationReport {
    /// CSV table of the accumulating sequence, one row per n.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lambda,gap\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.n, row.lambda, row.gap));
        }
        out
    }
}

/// Finite certificate that the spectrum clusters inside a bounded interval.
#[derive(Debug, Clone, Serialize)]
pub struct MismatchCertificate {
    pub schema: u32,
    /// Open lower endpoint: the first member of the accumulating sequence.
    pub interval_low: f64,
    /// Closed upper endpoint: the accumulation limit, itself a spectrum value.
    pub interval_high: f64,
    /// Number of distinct enumerated spectrum values in (low, high].
    pub count: usize,
    pub n_max: usize,
    pub statement: String,
}

/// Emit the finite certificate backing the spectra mismatch: at least n_max
/// distinct spectrum values inside (lambda_{1,k}, limit].
pub fn ls_mismatch_certificate(report: &AccumulationReport) -> Result<MismatchCertificate> {
    let low = report.rows[0].lambda;
    let high = report.limit;
    let count = report
        .spectrum_values
        .iter()
        .filter(|v| **v > low && **v <= high)
        .count();
    if count < report.n_max {
        return Err(Error::InsufficientPoints { found: count, needed: report.n_max });
    }
    let statement = format!(
        "The interval ({low}, {high}] contains {count} distinct eigenvalues of the \
         disjoint union. Any strictly increasing sequence diverging to infinity meets \
         a bounded interval only finitely often, so a spectrum containing arbitrarily \
         many values in this interval cannot be exhausted by such a sequence. The \
         numerical content of the certificate is the finite cluster; this closing \
         step is elementary analysis recorded here as text."
    );
    Ok(MismatchCertificate {
        schema: SCHEMA_VERSION,
        interval_low: low,
        interval_high: high,
        count,
        n_max: report.n_max,
        statement,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub n: usize,
    /// Radius of the n-th ball (0-based index n-1 in the geometric rule).
    pub radius: f64,
    /// Compactness summand of this ball.
    pub summand: f64,
    pub partial_sum: f64,
    /// First eigenvalue of the union of the first n balls.
    pub lambda_n: f64,
    pub gap: f64,
}

/// Table for the shrinking-ball union: the sequence lambda_n of first
/// eigenvalues of growing finite sub-unions decreasing to the first
/// eigenvalue of the full infinite union.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub schema: u32,
    pub p: f64,
    pub q: f64,
    pub dim: u32,
    pub r0: f64,
    pub rho: f64,
    pub n_max: usize,
    /// Exponent pq/(p-q) + N of the compactness summand.
    pub summand_exponent: f64,
    /// Exact ratio of consecutive summands, rho^{pq/(p-q)+N}.
    pub summand_ratio: f64,
    /// First eigenvalue of the unit ball, the single direct solve.
    pub lambda_unit_ball: f64,
    pub rows: Vec<TailRow>,
    /// Certified first eigenvalue of the infinite union.
    pub lambda_union: f64,
    pub truncation_error: f64,
}

/// Build the shrinking-tail report for geometric radii r_i = r0 rho^i.
/// One solve of the unit ball plus the exact dilation law produce every
/// per-ball first eigenvalue.
pub fn shrinking_tail_report(
    exponents: &Exponents,
    dim: u32,
    r0: f64,
    rho: f64,
    n_max: usize,
    cfg: &Config,
) -> Result<TailReport> {
    exponents.validate()?;
    let tail = TailRule::new(r0, rho, dim)?;
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    let ratio = tail.summand_ratio(exponents);
    if ratio >= 1.0 {
        return Err(Error::DivergentTail { ratio });
    }

    let unit_ball = ComponentDomain::ball(1.0, dim)?;
    let lambda_unit = component_eigenvalue(exponents, &unit_ball, 1, cfg)?.value;
    let dil = dilation_exponent(exponents, dim);
    let firsts: Vec<f64> = (0..n_max).map(|i| lambda_unit * tail.radius(i).powf(dil)).collect();

    let e = exponents.combination_exponent();
    let (lambda_union, truncation_error) =
        first_eigenvalue_union_geometric(exponents, &firsts, ratio)?;

    let mut rows = Vec::with_capacity(n_max);
    let mut partial = 0.0;
    for (i, lam) in firsts.iter().enumerate() {
        let summand = lam.powf(-e);
        partial += summand;
        let lambda_n = partial.powf(-1.0 / e);
        rows.push(TailRow {
            n: i + 1,
            radius: tail.radius(i),
            summand,
            partial_sum: partial,
            lambda_n,
            gap: lambda_n - lambda_union,
        });
    }

    Ok(TailReport {
        schema: SCHEMA_VERSION,
        p: exponents.p(),
        q: exponents.q(),
        dim,
        r0,
        rho,
        n_max,
        summand_exponent: compactness_exponent(exponents, dim),
        summand_ratio: ratio,
        lambda_unit_ball: lambda_unit,
        rows,
        lambda_union,
        truncation_error,
    })
}

/// Hand-entered radius sequences are accepted only when a ratio test on the
/// compactness summands is conclusive; otherwise the builder refuses rather
/// than certify a tail it cannot bound.
pub fn tail_summand_ratio_guard(exponents: &Exponents, dim: u32, radii: &[f64]) -> Result<f64> {
    if radii.len() < 3 {
        return Err(Error::InvalidInput("need at least three radii for the ratio test".into()));
    }
    let ex = compactness_exponent(exponents, dim);
    let summands: Vec<f64> = radii.iter().map(|r| r.powf(ex)).collect();
    let ratios: Vec<f64> = summands.windows(2).map(|w| w[1] / w[0]).collect();
    let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
    if max_ratio >= 1.0 {
        return Err(Error::DivergentTail { ratio: max_ratio });
    }
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if max_ratio / min_ratio > 1.5 {
        return Err(Error::InvalidInput(format!(
            "ratio test inconclusive: summand ratios vary between {} and {}",
            min_ratio, max_ratio
        )));
    }
    Ok(max_ratio)
}

impl TailReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,radius,summand,partial_sum,lambda_n,gap\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.n, row.radius, row.summand, row.partial_sum, row.lambda_n, row.gap
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    fn exps() -> Exponents {
        Exponents::strict(3.0, 2.0).unwrap()
    }

    #[test]
    fn bi_report_monotone_and_below_limit() {
        let big = ComponentDomain::interval(1.0).unwrap();
        let small = ComponentDomain::interval(0.25).unwrap();
        let report = bi_union_report(&exps(), &big, &small, 1, 10, &cfg()).unwrap();
        let mut last = 0.0;
        let mut last_gap = f64::INFINITY;
        for row in &report.rows {
            assert!(row.lambda > last);
            assert!(row.lambda < report.limit);
            assert!(row.gap < last_gap);
            last = row.lambda;
            last_gap = row.gap;
        }
    }

    #[test]
    fn bi_report_equal_components_symmetry() {
        // k = 1, n = 1, equal components: lambda_{1,1} = 2^{(q-p)/q} lambda_1.
        let e = exps();
        let comp = ComponentDomain::interval(1.0).unwrap();
        let report = bi_union_report(&e, &comp, &comp, 1, 1, &cfg()).unwrap();
        let expected = 2.0f64.powf((2.0 - 3.0) / 2.0) * report.limit;
        assert!((report.rows[0].lambda - expected).abs() < 1e-10 * report.limit);
    }

    #[test]
    fn window_counts_nested() {
        let big = ComponentDomain::interval(1.0).unwrap();
        let small = ComponentDomain::interval(0.25).unwrap();
        let report = bi_union_report(&exps(), &big, &small, 1, 12, &cfg()).unwrap();
        for w in report.window_counts.windows(2) {
            assert!(w[1].count <= w[0].count, "windows shrink, counts cannot grow");
        }
        for w in &report.window_counts {
            assert!(w.count >= report.n_max - w.j, "window {} holds {} points", w.j, w.count);
        }
    }

    #[test]
    fn certificate_counts_cluster() {
        let big = ComponentDomain::interval(1.0).unwrap();
        let small = ComponentDomain::interval(0.25).unwrap();
        let report = bi_union_report(&exps(), &big, &small, 1, 10, &cfg()).unwrap();
        let cert = ls_mismatch_certificate(&report).unwrap();
        assert!(cert.count >= 10);
        assert_eq!(cert.interval_high, report.limit);
    }

    #[test]
    fn certificate_degenerate_single_point() {
        let big = ComponentDomain::interval(1.0).unwrap();
        let small = ComponentDomain::interval(0.25).unwrap();
        let report = bi_union_report(&exps(), &big, &small, 1, 1, &cfg()).unwrap();
        let cert = ls_mismatch_certificate(&report).unwrap();
        assert_eq!(cert.count, 1);
    }

    #[test]
    fn tail_report_single_term() {
        let report = shrinking_tail_report(&exps(), 1, 0.5, 0.5, 1, &cfg()).unwrap();
        // Single term: lambda_1 is the first eigenvalue of the largest ball.
        let expected = report.lambda_unit_ball * 0.5f64.powf(dilation_exponent(&exps(), 1));
        assert!((report.rows[0].lambda_n - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn tail_summand_ratio_exact() {
        let report = shrinking_tail_report(&exps(), 1, 0.5, 0.5, 12, &cfg()).unwrap();
        let expected = 0.5f64.powi(7);
        for w in report.rows.windows(2) {
            let ratio = w[1].summand / w[0].summand;
            assert!((ratio - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn tail_lambda_strictly_decreasing_to_limit() {
        let report = shrinking_tail_report(&exps(), 1, 0.5, 0.5, 20, &cfg()).unwrap();
        // Summands shrink by 2^-7 per step, so decrements fall below one ulp
        // of lambda_n after roughly eight terms; decrease is strict until
        // then and non-strict at machine resolution afterwards.
        let mut last = f64::INFINITY;
        for row in &report.rows {
            assert!(row.lambda_n <= last);
            assert!(row.gap >= 0.0);
            if row.n <= 6 {
                assert!(row.lambda_n < last);
                assert!(row.gap > 0.0);
            }
            last = row.lambda_n;
        }
        assert!(report.rows.last().unwrap().gap < 1e-9 * report.lambda_union);
    }

    #[test]
    fn ratio_guard_refuses_divergent_and_inconclusive() {
        let e = exps();
        assert!(matches!(
            tail_summand_ratio_guard(&e, 1, &[0.5, 0.5, 0.5]),
            Err(Error::DivergentTail { .. })
        ));
        // Wildly varying decay: inconclusive.
        assert!(tail_summand_ratio_guard(&e, 1, &[0.5, 0.4999, 0.1]).is_err());
        // Clean geometric decay passes.
        let ok = tail_summand_ratio_guard(&e, 1, &[0.5, 0.25, 0.125, 0.0625]).unwrap();
        assert!((ok - 0.5f64.powi(7)).abs() < 1e-12);
    }
}
