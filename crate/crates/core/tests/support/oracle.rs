//! Explicit month-dummy OLS with a brute-force cluster sandwich.
#![allow(dead_code)]

pub struct MicroPanel {
    pub month: Vec<usize>,
    pub firm: Vec<usize>,
    pub y: Vec<f64>,
    /// x[i][j]: regressor j of observation i.
    pub x: Vec<Vec<f64>>,
}

pub struct OracleFit {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        let d = m[col][col];
        m[col].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..p).map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Regresses y on [x, one dummy per month] and clusters on firm.
pub fn dummy_ols(p: &MicroPanel) -> Option<OracleFit> {
    let n = p.y.len();
    let k = p.x[0].len();
    let mut months: Vec<usize> = p.month.clone();
    months.sort();
    months.dedup();
    let mut firms: Vec<usize> = p.firm.clone();
    firms.sort();
    firms.dedup();
    let cols = k + months.len();
    let design: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = p.x[i].clone();
            row.extend(months.iter().map(|m| if *m == p.month[i] { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let xtx: Vec<Vec<f64>> = (0..cols)
        .map(|a| (0..cols).map(|b| (0..n).map(|i| design[i][a] * design[i][b]).sum()).collect())
        .collect();
    let xty: Vec<f64> = (0..cols).map(|a| (0..n).map(|i| design[i][a] * p.y[i]).sum()).collect();
    let inv = invert(&xtx)?;
    let beta: Vec<f64> = (0..cols).map(|a| (0..cols).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let resid: Vec<f64> = (0..n)
        .map(|i| p.y[i] - (0..cols).map(|a| design[i][a] * beta[a]).sum::<f64>())
        .collect();
    let mut meat = vec![vec![0.0; cols]; cols];
    for f in &firms {
        let score: Vec<f64> = (0..cols)
            .map(|a| (0..n).filter(|i| p.firm[*i] == *f).map(|i| design[i][a] * resid[i]).sum())
            .collect();
        for a in 0..cols {
            for b in 0..cols {
                meat[a][b] += score[a] * score[b];
            }
        }
    }
    let g = firms.len() as f64;
    let factor = g / (g - 1.0) * (n as f64 - 1.0) / (n - cols) as f64;
    let v = matmul(&matmul(&inv, &meat), &inv);
    Some(OracleFit {
        coef: beta[..k].to_vec(),
        se: (0..k).map(|j| (factor * v[j][j]).max(0.0).sqrt()).collect(),
    })
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}
