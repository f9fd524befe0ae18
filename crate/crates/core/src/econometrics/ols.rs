//! Within-group OLS with one absorbed fixed-effect dimension and
//! cluster-robust sandwich covariance.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue floor below which X'X is treated as singular.
const RANK_TOL: f64 = 1e-12;

/// Observations for one regression. `x` is row-major with `k` columns.
#[derive(Debug, Clone, Default)]
pub struct PanelDesign<G, C> {
    pub group: Vec<G>,
    pub cluster: Vec<C>,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub k: usize,
}

impl<G: Ord + Clone, C: Ord + Clone> PanelDesign<G, C> {
    pub fn new(k: usize) -> Self {
        PanelDesign {
            group: Vec::new(),
            cluster: Vec::new(),
            y: Vec::new(),
            x: Vec::new(),
            k,
        }
    }

    pub fn push(&mut self, group: G, cluster: C, y: f64, x: &[f64]) {
        assert_eq!(x.len(), self.k, "regressor count mismatch");
        self.group.push(group);
        self.cluster.push(cluster);
        self.y.push(y);
        self.x.extend_from_slice(x);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeFit {
    pub coefficients: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub n_obs: usize,
    pub n_groups: usize,
    pub n_clusters: usize,
    pub r_squared_within: f64,
    /// G/(G-1) * (N-1)/(N-K), K counting absorbed group effects.
    pub small_sample_factor: f64,
}

impl FeFit {
    pub fn standard_errors(&self) -> Vec<f64> {
        (0..self.coefficients.len())
            .map(|j| self.covariance[(j, j)].max(0.0).sqrt())
            .collect()
    }
}

/// Fits y on x after demeaning both within each `group`, with covariance
/// clustered on `cluster`.
///
/// Observations are sorted by (group, cluster) before any accumulation so
/// the result does not depend on input order.
pub fn fit_within<G: Ord + Clone, C: Ord + Clone>(design: &PanelDesign<G, C>) -> Result<FeFit> {
    let n = design.len();
    let k = design.k;
    if k == 0 {
        return Err(Error::Config("regression needs at least one regressor".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        design.group[a]
            .cmp(&design.group[b])
            .then_with(|| design.cluster[a].cmp(&design.cluster[b]))
            .then_with(|| design.y[a].total_cmp(&design.y[b]))
            .then_with(|| {
                let xa = &design.x[a * k..(a + 1) * k];
                let xb = &design.x[b * k..(b + 1) * k];
                xa.iter()
                    .zip(xb)
                    .map(|(p, q)| p.total_cmp(q))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });

    // within-group demeaning over contiguous runs of the sorted order
    let mut yd = vec![0.0; n];
    let mut xd = vec![0.0; n * k];
    let mut n_groups = 0;
    let mut start = 0;
    while start < n {
        let g = &design.group[order[start]];
        let mut end = start;
        while end < n && design.group[order[end]] == *g {
            end += 1;
        }
        n_groups += 1;
        let size = (end - start) as f64;
        let mut ym = 0.0;
        let mut xm = vec![0.0; k];
        for &i in &order[start..end] {
            ym += design.y[i];
            for j in 0..k {
                xm[j] += design.x[i * k + j];
            }
        }
        ym /= size;
        xm.iter_mut().for_each(|v| *v /= size);
        for pos in start..end {
            let i = order[pos];
            yd[pos] = design.y[i] - ym;
            for j in 0..k {
                xd[pos * k + j] = design.x[i * k + j] - xm[j];
            }
        }
        start = end;
    }

    let n_clusters = {
        let mut c: Vec<&C> = design.cluster.iter().collect();
        c.sort();
        c.dedup();
        c.len()
    };
    if n_clusters < 2 {
        return Err(Error::TooFewClusters(n_clusters));
    }
    let dof_k = k + n_groups;
    if n <= dof_k {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {k} regressors and {n_groups} fixed effects"
        )));
    }

    let xm = DMatrix::from_row_slice(n, k, &xd);
    let yv = DVector::from_vec(yd);
    let xtx = xm.transpose() * &xm;
    let xty = xm.transpose() * &yv;

    let eig = xtx.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min_ev = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    // demeaning can leave rounding noise in a column that is constant within
    // groups, so compare against the raw regressor scale as well
    let raw_scale = (0..k)
        .map(|j| (0..n).map(|i| design.x[i * k + j].powi(2)).sum::<f64>())
        .fold(0.0f64, f64::max);
    if !(max_ev > 0.0) || min_ev <= RANK_TOL * max_ev.max(raw_scale) {
        return Err(Error::RankDeficient);
    }
    let bread = xtx.cholesky().ok_or(Error::RankDeficient)?.inverse();
    let beta = &bread * xty;
    let resid = &yv - &xm * &beta;

    // meat: Σ_g s_g s_g' with s_g = Σ_{i in g} x_i e_i, clusters in key order
    let mut scores: BTreeMap<&C, DVector<f64>> = BTreeMap::new();
    for pos in 0..n {
        let c = &design.cluster[order[pos]];
        let s = scores.entry(c).or_insert_with(|| DVector::zeros(k));
        for j in 0..k {
            s[j] += xm[(pos, j)] * resid[pos];
        }
    }
    let mut meat = DMatrix::zeros(k, k);
    for s in scores.values() {
        meat += s * s.transpose();
    }
    let g = n_clusters as f64;
    let factor = g / (g - 1.0) * (n as f64 - 1.0) / (n - dof_k) as f64;
    let covariance = (&bread * meat * &bread) * factor;

    let rss = resid.norm_squared();
    let tss = yv.norm_squared();
    let r_squared_within = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 0.0 };

    Ok(FeFit {
        coefficients: beta.iter().copied().collect(),
        covariance,
        n_obs: n,
        n_groups,
        n_clusters,
        r_squared_within,
        small_sample_factor: factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(rows: &[(i32, &str, f64, f64)]) -> PanelDesign<i32, String> {
        let mut d = PanelDesign::new(1);
        for (g, c, y, x) in rows {
            d.push(*g, c.to_string(), *y, &[*x]);
        }
        d
    }

    #[test]
    fn group_constant_outcome_has_zero_slope() {
        let rows: Vec<(i32, &str, f64, f64)> = vec![
            (1, "a", 3.0, 0.1),
            (1, "b", 3.0, -0.4),
            (1, "c", 3.0, 0.3),
            (2, "a", -1.0, 0.2),
            (2, "b", -1.0, 0.5),
            (2, "c", -1.0, -0.5),
        ];
        let fit = fit_within(&design(&rows)).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-15);
    }

    #[test]
    fn single_cluster_is_rejected() {
        let rows = vec![(1, "a", 1.0, 0.1), (2, "a", 2.0, 0.3), (3, "a", 1.5, 0.2), (3, "a", 0.5, 0.9)];
        assert!(matches!(fit_within(&design(&rows)), Err(Error::TooFewClusters(1))));
    }

    #[test]
    fn regressor_constant_within_groups_is_rank_deficient() {
        let rows = vec![
            (1, "a", 1.0, 0.5),
            (1, "b", 2.0, 0.5),
            (2, "a", 0.0, -0.2),
            (2, "b", 4.0, -0.2),
            (2, "c", 3.0, -0.2),
        ];
        assert!(matches!(fit_within(&design(&rows)), Err(Error::RankDeficient)));
    }

    #[test]
    fn input_order_does_not_change_bits() {
        let rows: Vec<(i32, String, f64, f64)> = (0..40)
            .map(|i| {
                let x = ((i * 17 % 23) as f64) / 23.0 - 0.5;
                let y = 0.3 * x + ((i * 7 % 5) as f64) / 10.0;
                (i % 4, format!("f{}", i % 9), y, x)
            })
            .collect();
        let mut a = PanelDesign::new(1);
        for (g, c, y, x) in &rows {
            a.push(*g, c.clone(), *y, &[*x]);
        }
        let mut b = PanelDesign::new(1);
        for (g, c, y, x) in rows.iter().rev() {
            b.push(*g, c.clone(), *y, &[*x]);
        }
        assert_eq!(fit_within(&a).unwrap(), fit_within(&b).unwrap());
    }
}
