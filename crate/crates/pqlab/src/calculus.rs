//! Exact combination calculus for disjoint unions: eigenvalue combination,
//! eigenfunction coefficients, first eigenvalue of (possibly infinite)
//! unions, and bounded enumeration of the combined spectrum.
//!
//! Everything here is closed-form algebra on per-component eigenvalues; the
//! solvers never enter. For a selection of per-component eigenvalues
//! lambda_i, the combined value is
//! lambda = [ sum_i lambda_i^{-q/(p-q)} ]^{-(p-q)/q},
//! and the combined eigenfunction is sum_i alpha_i u_i with
//! |alpha_i| = (lambda / lambda_i)^{1/(p-q)}.

use serde::Serialize;

use crate::domain::Exponents;
use crate::error::{Error, Result};

/// A choice of per-component eigenvalues: `None` means the component is not
/// selected (delta_i = 0), `Some(lambda_i)` selects that eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub lambdas: Vec<Option<f64>>,
}

impl Selection {
    pub fn new(lambdas: Vec<Option<f64>>) -> Self {
        Selection { lambdas }
    }

    pub fn selected_count(&self) -> usize {
        self.lambdas.iter().flatten().count()
    }
}

/// A combined eigenvalue with its eigenfunction coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct CombinedEigenPair {
    pub value: f64,
    /// alpha_i in the canonical all-positive representative; 0 where the
    /// component is not selected.
    pub coefficients: Vec<f64>,
    pub selection: Selection,
    /// Certified truncation error when the selection came from an infinite
    /// union; `None` for finite selections.
    pub truncation_error: Option<f64>,
}

/// Combined value of selected eigenvalues. Collapses exactly to lambda_i for
/// a single selected component.
///
/// Factored around the smallest selected eigenvalue: with
/// t = sum_{i != m} (lambda_m / lambda_i)^e the value is
/// lambda_m (1 + t)^{-1/e}, evaluated as lambda_m + lambda_m expm1(-ln_1p(t)/e).
/// The naive sum of lambda_i^{-e} loses the last bits exactly where the
/// accumulation tables need them: values clustering below a limit differ by a
/// few ulp and must stay distinct and ordered.
fn combined_value(exponents: &Exponents, selected: &[f64]) -> f64 {
    combined_value_e(exponents.combination_exponent(), selected)
}

fn combined_value_e(e: f64, selected: &[f64]) -> f64 {
    debug_assert!(!selected.is_empty());
    if selected.len() == 1 {
        return selected[0];
    }
    let lam_min = selected.iter().copied().fold(f64::INFINITY, f64::min);
    let mut skipped_min = false;
    let mut t = 0.0;
    for l in selected {
        if !skipped_min && *l == lam_min {
            skipped_min = true;
            continue;
        }
        t += (lam_min / l).powf(e);
    }
    lam_min + lam_min * (-t.ln_1p() / e).exp_m1()
}

/// Combine a selection of per-component eigenvalues into an eigenvalue of
/// the union, with the eigenfunction coefficients.
pub fn combine(exponents: &Exponents, selection: &Selection) -> Result<CombinedEigenPair> {
    exponents.validate()?;
    let selected: Vec<f64> = selection.lambdas.iter().flatten().copied().collect();
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    for l in &selected {
        if !(*l > 0.0) {
            return Err(Error::InvalidInput(format!("eigenvalue {} must be > 0", l)));
        }
    }
    let value = combined_value(exponents, &selected);
    let (p, q) = (exponents.p(), exponents.q());
    let coefficients: Vec<f64> = selection
        .lambdas
        .iter()
        .map(|slot| match slot {
            Some(l) => (value / l).powf(1.0 / (p - q)),
            None => 0.0,
        })
        .collect();

    // The L^q normalization identity sum |alpha_i|^q = 1 is algebraically
    // automatic; a failure here means the formula was implemented wrong.
    let norm_q: f64 = coefficients.iter().map(|a| a.abs().powf(q)).sum();
    debug_assert!((norm_q - 1.0).abs() < 1e-9, "normalization identity broke: {}", norm_q);

    Ok(CombinedEigenPair {
        value,
        coefficients,
        selection: selection.clone(),
        truncation_error: None,
    })
}

/// All 2^m sign patterns applied to the selected coefficients. For two
/// selected components this is exactly the four first eigenfunctions.
pub fn sign_variants(pair: &CombinedEigenPair) -> Result<Vec<Vec<f64>>> {
    let selected: Vec<usize> = pair
        .coefficients
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(i, _)| i)
        .collect();
    let m = selected.len();
    if m > 20 {
        return Err(Error::TooManyVariants { m });
    }
    let mut out = Vec::with_capacity(1 << m);
    for mask in 0u32..(1 << m) {
        let mut coeffs = pair.coefficients.clone();
        for (bit, idx) in selected.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                coeffs[*idx] = -coeffs[*idx];
            }
        }
        out.push(coeffs);
    }
    Ok(out)
}

/// First eigenvalue of a finite disjoint union from its per-component first
/// eigenvalues: all components selected at their minimum.
pub fn first_eigenvalue_union(exponents: &Exponents, first_values: &[f64]) -> Result<f64> {
    exponents.validate()?;
    if first_values.is_empty() {
        return Err(Error::EmptySelection);
    }
    for l in first_values {
        if !(*l > 0.0) {
            return Err(Error::InvalidInput(format!("first eigenvalue {} must be > 0", l)));
        }
    }
    Ok(combined_value(exponents, first_values))
}

/// First eigenvalue of an infinite union whose summands
/// lambda_i^{-q/(p-q)} continue geometrically past the supplied prefix.
///
/// Returns the midpoint-of-bracket value together with a certified error:
/// the true value lies between f(S_n) and f(S_n + T_n), where S_n is the
/// partial sum over the prefix and T_n the exact geometric tail.
pub fn first_eigenvalue_union_geometric(
    exponents: &Exponents,
    first_values_prefix: &[f64],
    summand_ratio: f64,
) -> Result<(f64, f64)> {
    exponents.validate()?;
    if first_values_prefix.is_empty() {
        return Err(Error::EmptySelection);
    }
    if !(summand_ratio > 0.0) || summand_ratio >= 1.0 {
        return Err(Error::DivergentTail { ratio: summand_ratio });
    }
    let e = exponents.combination_exponent();
    let summands: Vec<f64> = first_values_prefix.iter().map(|l| l.powf(-e)).collect();
    let s_n: f64 = summands.iter().sum();
    let tail = summands.last().unwrap() * summand_ratio / (1.0 - summand_ratio);
    let f = |s: f64| s.powf(-1.0 / e);
    let value = f(s_n + 0.5 * tail);
    let err = (f(s_n) - f(s_n + tail)).abs();
    Ok((value, err))
}

/// One deduplicated value of the combined spectrum with every selection that
/// produced it. Selections are stored as per-component eigenvalue indices
/// (`None` = component not selected).
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumPoint {
    pub value: f64,
    pub selections: Vec<Vec<Option<usize>>>,
}

/// Enumerate all combined eigenvalues <= `cutoff` over truncated
/// per-component spectra, deduplicated and sorted ascending.
///
/// The enumeration is complete for the *truncated* input, not for the full
/// spectrum. Pruning uses the monotonicity of the combination: adding a
/// component or lowering any chosen eigenvalue lowers the combined value, so
/// a branch whose best-case value already exceeds the cutoff is dead.
pub fn enumerate_spectrum(
    exponents: &Exponents,
    per_component_spectra: &[Vec<f64>],
    cutoff: f64,
    budget: u64,
    dedup_rel_tol: f64,
) -> Result<Vec<SpectrumPoint>> {
    exponents.validate()?;
    if per_component_spectra.is_empty() {
        return Err(Error::EmptySelection);
    }
    if !(cutoff > 0.0) {
        return Err(Error::InvalidInput(format!("cutoff {} must be > 0", cutoff)));
    }
    for spec in per_component_spectra {
        if spec.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("component spectra must be sorted ascending".into()));
        }
    }
    let e = exponents.combination_exponent();
    let m = per_component_spectra.len();

    // Largest achievable summand total from components i.. (each selected at
    // its smallest eigenvalue); a value is <= cutoff iff its summand total is
    // >= cutoff^{-e}.
    let mut suffix_best = vec![0.0f64; m + 1];
    for i in (0..m).rev() {
        let best = per_component_spectra[i].first().map(|l| l.powf(-e)).unwrap_or(0.0);
        suffix_best[i] = suffix_best[i + 1] + best;
    }
    let threshold = cutoff.powf(-e);

    struct Dfs<'a> {
        spectra: &'a [Vec<f64>],
        e: f64,
        threshold: f64,
        suffix_best: Vec<f64>,
        budget: u64,
        visited: u64,
        out: Vec<(f64, Vec<Option<usize>>)>,
        current: Vec<Option<usize>>,
    }

    impl Dfs<'_> {
        fn run(&mut self, i: usize, sum: f64, selected: usize) -> Result<()> {
            if i == self.spectra.len() {
                if selected > 0 && sum >= self.threshold {
                    self.visited += 1;
                    if self.visited > self.budget {
                        return Err(Error::BudgetExceeded { cap: self.budget });
                    }
                    // The pruning sum is only a bound; the reported value is
                    // recomputed through the accurate factored form.
                    let lambdas: Vec<f64> = self
                        .current
                        .iter()
                        .enumerate()
                        .filter_map(|(c, j)| j.map(|j| self.spectra[c][j]))
                        .collect();
                    let value = combined_value_e(self.e, &lambdas);
                    self.out.push((value, self.current.clone()));
                }
                return Ok(());
            }
            // Prune: even selecting every remaining component at its minimum
            // cannot reach the threshold.
            if sum + self.suffix_best[i] < self.threshold {
                return Ok(());
            }
            // Skip component i.
            self.current.push(None);
            self.run(i + 1, sum, selected)?;
            self.current.pop();
            // Choices ascending: once the best case falls short, larger
            // eigenvalues only make it worse.
            for (j, lam) in self.spectra[i].iter().enumerate() {
                let term = lam.powf(-self.e);
                if sum + term + self.suffix_best[i + 1] < self.threshold {
                    break;
                }
                self.current.push(Some(j));
                self.run(i + 1, sum + term, selected + 1)?;
                self.current.pop();
            }
            Ok(())
        }
    }

    let mut dfs = Dfs {
        spectra: per_component_spectra,
        e,
        threshold,
        suffix_best,
        budget,
        visited: 0,
        out: Vec::new(),
        current: Vec::new(),
    };
    dfs.run(0, 0.0, 0)?;

    let mut raw = dfs.out;
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut points: Vec<SpectrumPoint> = Vec::new();
    for (value, sel) in raw {
        match points.last_mut() {
            Some(last) if (value - last.value).abs() <= dedup_rel_tol * last.value.abs() => {
                last.selections.push(sel);
            }
            _ => points.push(SpectrumPoint { value, selections: vec![sel] }),
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exps() -> Exponents {
        Exponents::strict(3.0, 2.0).unwrap()
    }

    #[test]
    fn single_component_collapses() {
        let pair = combine(&exps(), &Selection::new(vec![Some(7.25), None])).unwrap();
        assert_eq!(pair.value, 7.25);
        assert_eq!(pair.coefficients[1], 0.0);
        assert!((pair.coefficients[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_equal_components_p4_q2() {
        // p = 4, q = 2: lambda = mu / 2 and alpha_i = 2^{-1/2}.
        let e = Exponents::strict(4.0, 2.0).unwrap();
        let mu = 3.7;
        let pair = combine(&e, &Selection::new(vec![Some(mu), Some(mu)])).unwrap();
        assert!((pair.value - mu / 2.0).abs() < 1e-12 * mu);
        for a in &pair.coefficients {
            assert!((a - 0.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_evaluated_two_component_case() {
        // lambda_1 = 1, lambda_2 = 3, p = 3, q = 2: lambda = 3 / sqrt(10).
        let pair = combine(&exps(), &Selection::new(vec![Some(1.0), Some(3.0)])).unwrap();
        let exact = 3.0 / 10.0f64.sqrt();
        assert!((pair.value - exact).abs() < 1e-14, "{} vs {}", pair.value, exact);
    }

    #[test]
    fn empty_selection_rejected() {
        assert!(matches!(
            combine(&exps(), &Selection::new(vec![None, None])),
            Err(Error::EmptySelection)
        ));
    }

    #[test]
    fn normalization_identity() {
        let pair =
            combine(&exps(), &Selection::new(vec![Some(2.0), Some(5.0), Some(11.0)])).unwrap();
        let norm: f64 = pair.coefficients.iter().map(|a| a.powi(2)).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combined_value_below_min_selected() {
        let pair = combine(&exps(), &Selection::new(vec![Some(2.0), Some(5.0)])).unwrap();
        assert!(pair.value < 2.0);
    }

    #[test]
    fn sign_variant_counts() {
        let one = combine(&exps(), &Selection::new(vec![Some(2.0)])).unwrap();
        assert_eq!(sign_variants(&one).unwrap().len(), 2);
        let two = combine(&exps(), &Selection::new(vec![Some(2.0), Some(5.0)])).unwrap();
        assert_eq!(sign_variants(&two).unwrap().len(), 4);
        let three = combine(&exps(), &Selection::new(vec![Some(2.0), Some(5.0), Some(9.0)])).unwrap();
        assert_eq!(sign_variants(&three).unwrap().len(), 8);
    }

    #[test]
    fn sign_variant_guard() {
        let sel = Selection::new((0..21).map(|i| Some(1.0 + i as f64)).collect());
        let pair = combine(&exps(), &sel).unwrap();
        assert!(matches!(sign_variants(&pair), Err(Error::TooManyVariants { m: 21 })));
    }

    #[test]
    fn union_first_equal_components() {
        // n equal components: lambda = n^{(q-p)/q} mu.
        let e = exps();
        let mu = 4.2;
        for n in 1..=5usize {
            let values = vec![mu; n];
            let lam = first_eigenvalue_union(&e, &values).unwrap();
            let exact = (n as f64).powf((2.0 - 3.0) / 2.0) * mu;
            assert!((lam - exact).abs() < 1e-12 * mu);
        }
    }

    #[test]
    fn geometric_union_matches_closed_form() {
        // Summands a_0 g^i: closed form lambda = (a_0 / (1 - g))^{-1/e}.
        let e = exps();
        let ex = e.combination_exponent();
        let lam0: f64 = 10.0;
        let g: f64 = 1.0 / 128.0;
        let n = 40;
        let prefix: Vec<f64> = (0..n)
            .map(|i| (lam0.powf(-ex) * g.powi(i)).powf(-1.0 / ex))
            .collect();
        let (value, err) = first_eigenvalue_union_geometric(&e, &prefix, g).unwrap();
        let exact = (lam0.powf(-ex) / (1.0 - g)).powf(-1.0 / ex);
        assert!((value - exact).abs() <= err.max(1e-12 * exact), "{} vs {}", value, exact);
        assert!(err < 1e-12 * exact);
    }

    #[test]
    fn divergent_tail_rejected() {
        assert!(matches!(
            first_eigenvalue_union_geometric(&exps(), &[1.0], 1.0),
            Err(Error::DivergentTail { .. })
        ));
    }

    #[test]
    fn enumerate_single_component_returns_its_spectrum() {
        let spec = vec![vec![1.0, 8.0, 27.0, 64.0, 125.0]];
        let pts = enumerate_spectrum(&exps(), &spec, f64::INFINITY, 1000, 1e-12).unwrap();
        let values: Vec<f64> = pts.iter().map(|p| p.value).collect();
        assert_eq!(values, spec[0]);
    }

    #[test]
    fn enumerate_two_identical_components_hand_check() {
        // Spectra {mu, 4mu}, p = 4, q = 2. All 8 nonempty selections:
        // singletons mu, 4mu (twice each), and pairs
        // Phi(mu,mu) = mu/2, Phi(4mu,4mu) = 2mu, Phi(mu,4mu) = 4mu/5 (twice).
        let e = Exponents::strict(4.0, 2.0).unwrap();
        let mu = 2.0;
        let spec = vec![vec![mu, 4.0 * mu], vec![mu, 4.0 * mu]];
        let pts = enumerate_spectrum(&e, &spec, f64::INFINITY, 1000, 1e-12).unwrap();
        let values: Vec<f64> = pts.iter().map(|p| p.value).collect();
        // 8 nonempty selections collapse to 5 distinct values.
        let expected = [mu / 2.0, 4.0 * mu / 5.0, mu, 2.0 * mu, 4.0 * mu];
        assert_eq!(values.len(), expected.len());
        for (v, ex) in values.iter().zip(expected.iter()) {
            assert!((v - ex).abs() < 1e-12 * ex, "{} vs {}", v, ex);
        }
        // The two mixed selections collide in value and share one point, and
        // each singleton value is produced by both components.
        let mixed = pts.iter().find(|p| (p.value - 4.0 * mu / 5.0).abs() < 1e-12).unwrap();
        assert_eq!(mixed.selections.len(), 2);
        let singleton = pts.iter().find(|p| p.value == mu).unwrap();
        assert_eq!(singleton.selections.len(), 2);
    }

    #[test]
    fn enumeration_budget_enforced() {
        let spec = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]];
        assert!(matches!(
            enumerate_spectrum(&exps(), &spec, f64::INFINITY, 10, 1e-12),
            Err(Error::BudgetExceeded { cap: 10 })
        ));
    }

    #[test]
    fn cutoff_prunes_consistently() {
        // Pruned output equals brute force filtered by the cutoff.
        let spec = vec![vec![1.0, 8.0, 27.0], vec![2.0, 16.0]];
        let cutoff = 5.0;
        let pruned = enumerate_spectrum(&exps(), &spec, cutoff, 10_000, 1e-12).unwrap();
        let all = enumerate_spectrum(&exps(), &spec, f64::INFINITY, 10_000, 1e-12).unwrap();
        let filtered: Vec<&SpectrumPoint> = all.iter().filter(|p| p.value <= cutoff).collect();
        assert_eq!(pruned.len(), filtered.len());
        for (a, b) in pruned.iter().zip(filtered.iter()) {
            assert_eq!(a.value, b.value);
            assert_eq!(a.selections, b.selections);
        }
    }
}
