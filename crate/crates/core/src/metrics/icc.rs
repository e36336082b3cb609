use alloc::format;
use alloc::vec::Vec;

use crate::math::{f_quantile, f_upper_tail};
use crate::Error;

/// Complete subjects x raters score grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    n: usize,
    k: usize,
    /// Row-major, one row per subject.
    cells: Vec<f64>,
}

impl RatingMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, Error> {
        let n = rows.len();
        let k = rows.first().map_or(0, |r| r.as_ref().len());
        if n < 2 || k < 2 {
            return Err(Error::InvalidRatings(format!(
                "need at least 2 subjects and 2 raters, got {n}x{k}"
            )));
        }
        let mut cells = Vec::with_capacity(n * k);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::InvalidRatings(format!(
                    "subject {i} has {} ratings, expected {k}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidRatings(format!("subject {i} has rating {bad}")));
            }
            cells.extend_from_slice(row);
        }
        Ok(Self { n, k, cells })
    }

    pub fn subjects(&self) -> usize {
        self.n
    }

    pub fn raters(&self) -> usize {
        self.k
    }

    pub fn get(&self, subject: usize, rater: usize) -> f64 {
        self.cells[subject * self.k + rater]
    }
}

/// ICC(3,k) with its F test.
///
/// `f`, `df1`, `df2` and `p` are the between-subjects test, df
/// `(n - 1, (n - 1)(k - 1))`. The rater-effects test, df
/// `(k - 1, (n - 1)(k - 1))`, is reported alongside in `rater_*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IccResult {
    pub icc: f64,
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
    /// 95% interval for the ICC from the F distribution.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub ms_subjects: f64,
    pub ms_raters: f64,
    pub ms_error: f64,
    pub rater_f: f64,
    pub rater_df1: f64,
    pub rater_p: f64,
}

/// Two-way mixed effects, consistency, average-measures ICC:
/// `(MS_subjects - MS_error) / MS_subjects`.
pub fn icc_3k(m: &RatingMatrix) -> Result<IccResult, Error> {
    let (n, k) = (m.n, m.k);
    let (nf, kf) = (n as f64, k as f64);
    let grand = m.cells.iter().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = (0..n).map(|i| (0..k).map(|j| m.get(i, j)).sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k).map(|j| (0..n).map(|i| m.get(i, j)).sum::<f64>() / nf).collect();

    let ss_rows = kf * row_means.iter().map(|r| (r - grand) * (r - grand)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|c| (c - grand) * (c - grand)).sum::<f64>();
    let mut ss_error = 0.0;
    for (i, rm) in row_means.iter().enumerate() {
        for (j, cm) in col_means.iter().enumerate() {
            let e = m.get(i, j) - rm - cm + grand;
            ss_error += e * e;
        }
    }

    let df1 = nf - 1.0;
    let df2 = (nf - 1.0) * (kf - 1.0);
    let ms_subjects = ss_rows / df1;
    let ms_raters = ss_cols / (kf - 1.0);
    let ms_error = ss_error / df2;

    // Residuals below this are rounding noise on an exactly consistent matrix.
    let noise = 1e-12 * (ms_subjects + ms_raters).max(f64::MIN_POSITIVE);
    if ms_subjects <= noise {
        return Err(Error::InvalidRatings(
            "subjects show no between-subject variance".into(),
        ));
    }
    if ms_error <= noise {
        return Ok(IccResult {
            icc: 1.0,
            f: f64::INFINITY,
            df1,
            df2,
            p: 0.0,
            ci_lo: 1.0,
            ci_hi: 1.0,
            ms_subjects,
            ms_raters,
            ms_error: 0.0,
            rater_f: if ms_raters > noise { f64::INFINITY } else { f64::NAN },
            rater_df1: kf - 1.0,
            rater_p: if ms_raters > noise { 0.0 } else { f64::NAN },
        });
    }

    let f = ms_subjects / ms_error;
    let f_lower = f / f_quantile(0.975, df1, df2);
    let f_upper = f * f_quantile(0.975, df2, df1);
    let rater_f = ms_raters / ms_error;
    Ok(IccResult {
        icc: (ms_subjects - ms_error) / ms_subjects,
        f,
        df1,
        df2,
        p: f_upper_tail(f, df1, df2),
        ci_lo: 1.0 - 1.0 / f_lower,
        ci_hi: 1.0 - 1.0 / f_upper,
        ms_subjects,
        ms_raters,
        ms_error,
        rater_f,
        rater_df1: kf - 1.0,
        rater_p: f_upper_tail(rater_f, kf - 1.0, df2),
    })
}
