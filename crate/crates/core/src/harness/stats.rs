//! Count-table statistics. Tables are aligned slices of category counts;
//! [`Histogram`]s are aligned by key with [`align`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub type Histogram = BTreeMap<String, u64>;

/// Expected count below which a χ² cell is pooled.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2 {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn total(t: &[u64]) -> Result<u64> {
    let s: u64 = t.iter().sum();
    if s == 0 {
        return Err(Error::Stat("empty count table".into()));
    }
    Ok(s)
}

fn same_len(a: &[u64], b: &[u64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Stat(format!("tables of {} and {} cells", a.len(), b.len())));
    }
    Ok(())
}

/// Upper tail of χ²_dof at `x`; 1 when there are no degrees of freedom.
pub fn chi2_sf(x: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).expect("dof > 0").sf(x)
}

/// Both tables over the union of their keys, in key order.
pub fn align(a: &Histogram, b: &Histogram) -> (Vec<String>, Vec<u64>, Vec<u64>) {
    let mut keys: Vec<String> = a.keys().chain(b.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    let get = |h: &Histogram| keys.iter().map(|k| h.get(k).copied().unwrap_or(0)).collect();
    let (va, vb) = (get(a), get(b));
    (keys, va, vb)
}

/// Total-variation distance between the empirical distributions.
pub fn tv_distance(a: &[u64], b: &[u64]) -> Result<f64> {
    same_len(a, b)?;
    let (na, nb) = (total(a)? as f64, total(b)? as f64);
    Ok(0.5 * a.iter().zip(b).map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs()).sum::<f64>())
}

/// Cells whose expected count in the smaller sample is below
/// [`MIN_EXPECTED`] go to one tail cell; a tail still too small joins the
/// smallest kept cell.
fn pool(a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let share = na.min(nb) / (na + nb);
    let expected = |x: u64, y: u64| (x + y) as f64 * share;
    let mut kept: Vec<(u64, u64)> = vec![];
    let mut tail = (0, 0);
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        if expected(x, y) < MIN_EXPECTED {
            tail = (tail.0 + x, tail.1 + y);
        } else {
            kept.push((x, y));
        }
    }
    if tail.0 + tail.1 > 0 {
        match kept.iter_mut().min_by_key(|c| c.0 + c.1) {
            Some(c) if expected(tail.0, tail.1) < MIN_EXPECTED => *c = (c.0 + tail.0, c.1 + tail.1),
            _ => kept.push(tail),
        }
    }
    kept.into_iter().unzip()
}

/// Two-sample χ² homogeneity test, sparse cells pooled.
pub fn chi2_test(a: &[u64], b: &[u64]) -> Result<Chi2> {
    same_len(a, b)?;
    total(a)?;
    total(b)?;
    let (a, b) = pool(a, b);
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let mut stat = 0.0;
    for (&x, &y) in a.iter().zip(&b) {
        let col = (x + y) as f64;
        for (obs, row) in [(x as f64, na), (y as f64, nb)] {
            let e = row * col / n;
            stat += (obs - e).powi(2) / e;
        }
    }
    let dof = a.len().saturating_sub(1);
    Ok(Chi2 {
        statistic: stat,
        dof,
        p_value: chi2_sf(stat, dof),
    })
}

/// χ² goodness of fit of `observed` against category probabilities.
pub fn chi2_gof(observed: &[u64], probs: &[f64]) -> Result<Chi2> {
    if observed.len() != probs.len() {
        return Err(Error::Stat(format!("{} cells for {} probabilities", observed.len(), probs.len())));
    }
    let n = total(observed)? as f64;
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Stat("category probabilities must form a distribution".into()));
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p == 0.0 {
            if o > 0 {
                return Ok(Chi2 { statistic: f64::INFINITY, dof: 0, p_value: 0.0 });
            }
            continue;
        }
        let e = n * p;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    Ok(Chi2 {
        statistic: stat,
        dof,
        p_value: chi2_sf(stat, dof),
    })
}

/// Wilson score interval for k successes in n trials at two-sided
/// confidence `level`.
pub fn binomial_ci(k: u64, n: u64, level: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Stat("no trials".into()));
    }
    if k > n || !(0.0..1.0).contains(&level) {
        return Err(Error::Stat(format!("k = {k}, n = {n}, level = {level}")));
    }
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let (kf, nf) = (k as f64, n as f64);
    let p = kf / nf;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    // the bounds are exactly 0 and 1 at the extremes; rounding leaves dust
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    Ok((lo, hi))
}

/// Standard error of a Bernoulli(p) mean over n trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n.max(1) as f64).sqrt()
}

/// Sample mean and its standard error.
pub fn mean_and_sigma(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::Stat("no samples".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_extremes() {
        assert_eq!(tv_distance(&[3, 5], &[6, 10]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[4, 0], &[0, 9]).unwrap(), 1.0);
    }

    #[test]
    fn empty_tables_are_errors() {
        assert!(matches!(tv_distance(&[0, 0], &[1, 1]), Err(Error::Stat(_))));
        assert!(matches!(chi2_test(&[], &[]), Err(Error::Stat(_))));
        assert!(matches!(chi2_gof(&[0], &[1.0]), Err(Error::Stat(_))));
        assert!(matches!(binomial_ci(0, 0, 0.95), Err(Error::Stat(_))));
    }

    #[test]
    fn chi2_on_a_textbook_table() {
        // 2×2 table [[10, 20], [30, 40]]: χ² = 0.7937, dof 1
        let r = chi2_test(&[10, 20], &[30, 40]).unwrap();
        assert!((r.statistic - 0.79365).abs() < 1e-4, "{}", r.statistic);
        assert_eq!(r.dof, 1);
        assert!((r.p_value - 0.37300).abs() < 1e-4, "{}", r.p_value);
    }

    #[test]
    fn chi2_sf_matches_closed_form_for_two_dof() {
        // χ²_2 upper tail is e^{−x/2}
        for x in [0.1, 1.0, 5.0, 13.8] {
            assert!((chi2_sf(x, 2) - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_cells_are_pooled() {
        let r = chi2_test(&[500, 500, 1, 0, 2], &[490, 510, 0, 2, 1]).unwrap();
        assert_eq!(r.dof, 1);
        let r = chi2_test(&[500, 500, 9, 0, 2], &[490, 510, 0, 8, 1]).unwrap();
        assert_eq!(r.dof, 2);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate() {
        let (lo, hi) = binomial_ci(50, 100, 0.95).unwrap();
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3, "{lo} {hi}");
        let (lo, hi) = binomial_ci(0, 40, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
    }
}
