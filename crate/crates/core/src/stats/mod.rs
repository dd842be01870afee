//! Two-group comparison machinery: Welch t-test, Benjamini–Hochberg FDR
//! control, Cohen's d, Krippendorff's alpha, and the per-variable
//! comparison report.

pub mod special;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("sample too small: need at least {need}, got {got}")]
    SampleTooSmall { need: usize, got: usize },
    #[error("pooled standard deviation is zero; effect size undefined")]
    ZeroPooledSd,
    #[error("need at least 2 coders")]
    TooFewCoders,
    #[error("no item has two or more ratings")]
    NoPairableItems,
    #[error("group {0:?} has fewer than 2 videos")]
    GroupTooSmall(String),
    #[error("column count mismatch between groups")]
    ColumnMismatch,
}

/// Welch two-sample test result.
#[derive(Debug, Clone, Copy)]
pub struct TestResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// One row of a comparison report.
#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub variable: String,
    pub group_a_value: f64,
    pub group_b_value: f64,
    pub p_uncorrected: f64,
    pub bh_threshold: f64,
    pub significant: bool,
    pub cohens_d: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Welch two-sample t-test with Welch–Satterthwaite degrees of freedom
/// and a two-sided p-value.
///
/// Degenerate inputs (both variances zero) short-circuit: p = 1 when the
/// means agree, p = 0 when they differ.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    for sample in [a, b] {
        if sample.len() < 2 {
            return Err(StatsError::SampleTooSmall {
                need: 2,
                got: sample.len(),
            });
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_var(a, ma), sample_var(b, mb));
    if va == 0.0 && vb == 0.0 {
        let identical = ma == mb;
        if !identical {
            log::warn!("welch t-test on two zero-variance samples with different means");
        }
        return Ok(TestResult {
            t: if identical { 0.0 } else { f64::INFINITY * (ma - mb).signum() },
            df: na + nb - 2.0,
            p: if identical { 1.0 } else { 0.0 },
            mean_a: ma,
            mean_b: mb,
            n_a: a.len(),
            n_b: b.len(),
        });
    }
    let sa = va / na;
    let sb = vb / nb;
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let p = special::t_two_sided_p(t, df);
    Ok(TestResult {
        t,
        df,
        p,
        mean_a: ma,
        mean_b: mb,
        n_a: a.len(),
        n_b: b.len(),
    })
}

/// Cohen's d with the pooled standard deviation. The sign follows
/// mean(a) − mean(b); reports display the magnitude.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    let n = a.len() + b.len();
    if n < 3 || a.is_empty() || b.is_empty() {
        return Err(StatsError::SampleTooSmall { need: 3, got: n });
    }
    let (ma, mb) = (mean(a), mean(b));
    let va = if a.len() > 1 { sample_var(a, ma) } else { 0.0 };
    let vb = if b.len() > 1 { sample_var(b, mb) } else { 0.0 };
    let pooled = (((a.len() - 1) as f64 * va + (b.len() - 1) as f64 * vb)
        / (a.len() + b.len() - 2) as f64)
        .sqrt();
    if pooled == 0.0 {
        return Err(StatsError::ZeroPooledSd);
    }
    Ok((ma - mb) / pooled)
}

/// Benjamini–Hochberg step-up procedure at level `q`. Returns, in input
/// order, each hypothesis' rank threshold (rank/m)·q and whether it is
/// rejected.
pub fn benjamini_hochberg(pvalues: &[f64], q: f64) -> (Vec<f64>, Vec<bool>) {
    let m = pvalues.len();
    if m == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| pvalues[i].partial_cmp(&pvalues[j]).unwrap());
    // largest rank k with p(k) <= (k/m) q
    let mut k = 0;
    for (rank0, &idx) in order.iter().enumerate() {
        let rank = rank0 + 1;
        if pvalues[idx] <= rank as f64 / m as f64 * q {
            k = rank;
        }
    }
    let mut thresholds = vec![0.0; m];
    let mut rejected = vec![false; m];
    for (rank0, &idx) in order.iter().enumerate() {
        let rank = rank0 + 1;
        thresholds[idx] = rank as f64 / m as f64 * q;
        rejected[idx] = rank <= k;
    }
    (thresholds, rejected)
}

/// Krippendorff's alpha for nominal data with missing cells, via the
/// coincidence-matrix formulation. `ratings[coder][item]` is `None`
/// where a coder skipped an item.
pub fn krippendorff_alpha_nominal(ratings: &[Vec<Option<u32>>]) -> Result<f64, StatsError> {
    if ratings.len() < 2 {
        return Err(StatsError::TooFewCoders);
    }
    let n_items = ratings.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut pairable_total = 0.0;
    let mut observed_disagreement = 0.0;
    let mut category_counts: std::collections::HashMap<u32, f64> = std::collections::HashMap::new();

    for item in 0..n_items {
        let values: Vec<u32> = ratings
            .iter()
            .filter_map(|coder| coder.get(item).copied().flatten())
            .collect();
        let m_u = values.len();
        if m_u < 2 {
            continue;
        }
        let weight = 1.0 / (m_u as f64 - 1.0);
        for &v in &values {
            *category_counts.entry(v).or_insert(0.0) += 1.0;
        }
        pairable_total += m_u as f64;
        for i in 0..m_u {
            for j in 0..m_u {
                if i != j && values[i] != values[j] {
                    observed_disagreement += weight;
                }
            }
        }
    }
    if pairable_total < 2.0 {
        return Err(StatsError::NoPairableItems);
    }
    let n = pairable_total;
    let d_o = observed_disagreement / n;
    let mut expected = 0.0;
    for (&c, &nc) in &category_counts {
        for (&k, &nk) in &category_counts {
            if c != k {
                expected += nc * nk;
            }
        }
    }
    let d_e = expected / (n * (n - 1.0));
    if d_e == 0.0 {
        log::warn!("all ratings share one category; alpha = 1 by convention");
        return Ok(1.0);
    }
    Ok(1.0 - d_o / d_e)
}

/// One Welch test plus Cohen's d per feature column, with BH control
/// applied across exactly the columns tested in this call.
///
/// `group_a` and `group_b` are per-video rows aligned with `columns`;
/// missing cells are `None` and are dropped per column.
pub fn compare_groups(
    columns: &[String],
    group_a: &[Vec<Option<f64>>],
    group_b: &[Vec<Option<f64>>],
    q: f64,
) -> Result<Vec<ComparisonResult>, StatsError> {
    if group_a.len() < 2 {
        return Err(StatsError::GroupTooSmall("a".to_string()));
    }
    if group_b.len() < 2 {
        return Err(StatsError::GroupTooSmall("b".to_string()));
    }
    struct Tested {
        variable: String,
        mean_a: f64,
        mean_b: f64,
        p: f64,
        d: f64,
    }
    let mut tested = Vec::new();
    for (ci, name) in columns.iter().enumerate() {
        let take = |rows: &[Vec<Option<f64>>]| -> Vec<f64> {
            rows.iter().filter_map(|r| r.get(ci).copied().flatten()).collect()
        };
        let a = take(group_a);
        let b = take(group_b);
        if a.len() < 2 || b.len() < 2 {
            log::warn!("column {name} skipped: too few non-missing values");
            continue;
        }
        let result = welch_t_test(&a, &b)?;
        let d = cohens_d(&a, &b).unwrap_or(0.0);
        tested.push(Tested {
            variable: name.clone(),
            mean_a: result.mean_a,
            mean_b: result.mean_b,
            p: result.p,
            d,
        });
    }
    let pvalues: Vec<f64> = tested.iter().map(|t| t.p).collect();
    let (thresholds, rejected) = benjamini_hochberg(&pvalues, q);
    Ok(tested
        .into_iter()
        .zip(thresholds)
        .zip(rejected)
        .map(|((t, threshold), reject)| ComparisonResult {
            variable: t.variable,
            group_a_value: t.mean_a,
            group_b_value: t.mean_b,
            p_uncorrected: t.p,
            bh_threshold: threshold,
            significant: reject,
            cohens_d: t.d,
        })
        .collect())
}

/// Comparison report CSV: one row per variable with the report's table
/// precision (means 2 decimals, p 4, d 3).
pub fn comparison_csv(results: &[ComparisonResult]) -> String {
    let mut out =
        String::from("variable,group_a,group_b,p_uncorrected,bh_threshold,significant,cohens_d\n");
    for r in results {
        out.push_str(&format!(
            "{},{:.2},{:.2},{:.4},{:.4},{},{:.3}\n",
            r.variable,
            r.group_a_value,
            r.group_b_value,
            r.p_uncorrected,
            r.bh_threshold,
            r.significant,
            r.cohens_d,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn welch_identical_samples() {
        let r = welch_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn welch_hand_case() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        let r = welch_t_test(&a, &b).unwrap();
        assert_abs_diff_eq!(r.t, -1.8974, epsilon = 1e-4);
        assert_abs_diff_eq!(r.df, 5.8824, epsilon = 1e-4);
        assert_abs_diff_eq!(r.p, 0.107, epsilon = 1e-3);
    }

    #[test]
    fn welch_swap_negates_t() {
        let a = [0.3, 1.9, 2.2, 5.0];
        let b = [1.0, 1.1, 4.0, 4.2, 9.9];
        let r1 = welch_t_test(&a, &b).unwrap();
        let r2 = welch_t_test(&b, &a).unwrap();
        assert_eq!(r1.t, -r2.t);
        assert_eq!(r1.p, r2.p);
    }

    #[test]
    fn welch_degenerate_zero_variance() {
        let r = welch_t_test(&[5.0, 5.0], &[5.0, 5.0]).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        let r = welch_t_test(&[5.0, 5.0], &[6.0, 6.0]).unwrap();
        assert_eq!(r.p, 0.0);
    }

    #[test]
    fn cohens_d_hand_case() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        assert_abs_diff_eq!(cohens_d(&a, &b).unwrap(), -1.2, epsilon = 1e-12);
    }

    #[test]
    fn cohens_d_identical_is_zero() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(cohens_d(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn cohens_d_shift_invariant() {
        let a = [1.0, 2.0, 3.0, 4.5];
        let b = [2.0, 4.0, 5.0];
        let d0 = cohens_d(&a, &b).unwrap();
        let shift = |xs: &[f64]| xs.iter().map(|x| x + 17.3).collect::<Vec<_>>();
        let d1 = cohens_d(&shift(&a), &shift(&b)).unwrap();
        assert_abs_diff_eq!(d0, d1, epsilon = 1e-12);
    }

    #[test]
    fn cohens_d_zero_pooled_sd_errors() {
        assert!(matches!(
            cohens_d(&[2.0, 2.0], &[3.0, 3.0]),
            Err(StatsError::ZeroPooledSd)
        ));
    }

    #[test]
    fn bh_rank1_threshold_m7() {
        let (thresholds, _) = benjamini_hochberg(&[0.001, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4], 0.05);
        // smallest p takes rank 1: 0.05/7
        assert_abs_diff_eq!(thresholds[0], 0.05 / 7.0, epsilon = 1e-12);
        assert_eq!(format!("{:.3}", thresholds[0]), "0.007");
    }

    #[test]
    fn bh_thresholds_m6() {
        let p = [0.001, 0.002, 0.003, 0.004, 0.005, 0.006];
        let (thresholds, rejected) = benjamini_hochberg(&p, 0.05);
        let expected = [0.0083, 0.0167, 0.025, 0.0333, 0.0417, 0.05];
        for (t, e) in thresholds.iter().zip(expected) {
            assert_abs_diff_eq!(*t, e, epsilon = 5e-4);
        }
        assert!(rejected.iter().all(|&r| r));
    }

    #[test]
    fn bh_step_up_hand_case() {
        // p(3) = 0.04 <= 0.05 so all three are rejected
        let (thresholds, rejected) = benjamini_hochberg(&[0.01, 0.04, 0.03], 0.05);
        assert!(rejected.iter().all(|&r| r));
        assert_abs_diff_eq!(thresholds[0], 0.05 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(thresholds[1], 0.05, epsilon = 1e-12);
    }

    #[test]
    fn bh_extremes() {
        let (_, rejected) = benjamini_hochberg(&[1.0, 1.0, 1.0], 0.05);
        assert!(rejected.iter().all(|&r| !r));
        let (_, rejected) = benjamini_hochberg(&[0.0, 0.0], 0.05);
        assert!(rejected.iter().all(|&r| r));
    }

    #[test]
    fn alpha_perfect_agreement() {
        let ratings = vec![
            vec![Some(0), Some(1), Some(2), None],
            vec![Some(0), Some(1), Some(2), Some(1)],
            vec![None, Some(1), Some(2), Some(1)],
        ];
        assert_eq!(krippendorff_alpha_nominal(&ratings).unwrap(), 1.0);
    }

    #[test]
    fn alpha_systematic_disagreement() {
        let ratings = vec![vec![Some(0), Some(1)], vec![Some(1), Some(0)]];
        assert_abs_diff_eq!(krippendorff_alpha_nominal(&ratings).unwrap(), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn alpha_relabeling_invariant() {
        let ratings = vec![
            vec![Some(0), Some(1), Some(1), Some(0), Some(2)],
            vec![Some(0), Some(1), Some(0), Some(0), Some(2)],
        ];
        let relabeled: Vec<Vec<Option<u32>>> = ratings
            .iter()
            .map(|r| r.iter().map(|v| v.map(|v| [7u32, 3, 9][v as usize])).collect())
            .collect();
        let a1 = krippendorff_alpha_nominal(&ratings).unwrap();
        let a2 = krippendorff_alpha_nominal(&relabeled).unwrap();
        assert_abs_diff_eq!(a1, a2, epsilon = 1e-12);
    }

    #[test]
    fn alpha_single_category_convention() {
        let ratings = vec![vec![Some(4), Some(4)], vec![Some(4), Some(4)]];
        assert_eq!(krippendorff_alpha_nominal(&ratings).unwrap(), 1.0);
    }

    #[test]
    fn compare_groups_constant_data() {
        let columns = vec!["f0".to_string(), "f1".to_string()];
        let row = vec![Some(1.0), Some(2.0)];
        let a = vec![row.clone(), row.clone(), row.clone()];
        let b = vec![row.clone(), row.clone()];
        let results = compare_groups(&columns, &a, &b, 0.05).unwrap();
        assert_eq!(results.len(), 2);
        for r in &results {
            assert_eq!(r.p_uncorrected, 1.0);
            assert!(!r.significant);
        }
    }

    #[test]
    fn compare_groups_order_invariant() {
        let columns = vec!["f0".to_string()];
        let a: Vec<Vec<Option<f64>>> = [1.0, 3.0, 2.0, 8.0].iter().map(|&v| vec![Some(v)]).collect();
        let b: Vec<Vec<Option<f64>>> = [4.0, 6.0, 5.0].iter().map(|&v| vec![Some(v)]).collect();
        let mut a_rev = a.clone();
        a_rev.reverse();
        let r1 = compare_groups(&columns, &a, &b, 0.05).unwrap();
        let r2 = compare_groups(&columns, &a_rev, &b, 0.05).unwrap();
        assert_eq!(r1[0].p_uncorrected, r2[0].p_uncorrected);
        assert_eq!(r1[0].cohens_d, r2[0].cohens_d);
    }

    #[test]
    fn comparison_csv_shape() {
        let results = vec![ComparisonResult {
            variable: "brightness".into(),
            group_a_value: 96.53,
            group_b_value: 103.63,
            p_uncorrected: 0.007,
            bh_threshold: 0.021,
            significant: true,
            cohens_d: -0.141,
        }];
        let csv = comparison_csv(&results);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "variable,group_a,group_b,p_uncorrected,bh_threshold,significant,cohens_d"
        );
        assert_eq!(lines.next().unwrap(), "brightness,96.53,103.63,0.0070,0.0210,true,-0.141");
    }
}
