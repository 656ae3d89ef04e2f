//! Model comparison: one-way ANOVA, pairwise t-tests with Bonferroni
//! correction, Cohen's d, and a superscript-style significance matrix.
//!
//! The Student t and F distributions are evaluated through the regularized
//! incomplete beta function. Upper tails are computed directly rather than
//! as `1 - cdf`, so tiny p-values keep their precision.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evalmetrics::TopicMetrics;

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::Convergence(format!(
        "incomplete beta I_{x}({a}, {b}) did not converge in {MAX_ITER} iterations"
    )))
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "incomplete beta needs a, b > 0 and x in [0,1], got a={a} b={b} x={x}"
        )));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(a, b, x)? / a)
    } else {
        Ok(1.0 - front * beta_cf(b, a, 1.0 - x)? / b)
    }
}

fn check_df(df: f64, what: &str) -> Result<()> {
    if df >= 1.0 && df.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be >= 1, got {df}")))
    }
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    check_df(df, "t degrees of freedom")?;
    if t.is_nan() {
        return Err(Error::InvalidParameter("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

pub fn t_cdf(x: f64, df: f64) -> Result<f64> {
    let tail = t_two_sided_p(x, df)? / 2.0;
    Ok(if x > 0.0 { 1.0 - tail } else { tail })
}

pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df(d1, "numerator df")?;
    check_df(d2, "denominator df")?;
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("F value must be >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    reg_inc_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))
}

/// Upper tail `P(F >= x)`.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df(d1, "numerator df")?;
    check_df(d2, "denominator df")?;
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("F value must be >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    reg_inc_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleGroup {
    pub model_tag: String,
    pub values: Vec<f64>,
}

impl SampleGroup {
    pub fn new(model_tag: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            model_tag: model_tag.into(),
            values,
        }
    }

    fn check(&self) -> Result<()> {
        if self.values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group {} has {} value(s), need at least 2",
                self.model_tag,
                self.values.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "group {} contains non-finite value {v}",
                self.model_tag
            )));
        }
        Ok(())
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sum of squared deviations from the mean.
fn ss(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum()
}

fn variance(v: &[f64]) -> f64 {
    ss(v) / (v.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anova {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    /// Zero within-group variance with differing group means.
    pub degenerate: bool,
}

pub fn one_way_anova(groups: &[SampleGroup]) -> Result<Anova> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "ANOVA needs at least 2 groups, got {}",
            groups.len()
        )));
    }
    for g in groups {
        g.check()?;
    }
    let k = groups.len();
    let n: usize = groups.iter().map(|g| g.values.len()).sum();
    let grand = groups.iter().flat_map(|g| &g.values).sum::<f64>() / n as f64;
    let means: Vec<f64> = groups.iter().map(|g| mean(&g.values)).collect();
    let ss_between: f64 = if means.iter().all(|&m| m == means[0]) {
        0.0
    } else {
        groups
            .iter()
            .zip(&means)
            .map(|(g, m)| g.values.len() as f64 * (m - grand) * (m - grand))
            .sum()
    };
    let ss_within: f64 = groups.iter().map(|g| ss(&g.values)).sum();
    let (df_between, df_within) = (k - 1, n - k);
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    if ms_within == 0.0 {
        let degenerate = ms_between != 0.0;
        return Ok(Anova {
            f: if degenerate { f64::INFINITY } else { 0.0 },
            p: if degenerate { 0.0 } else { 1.0 },
            df_between,
            df_within,
            degenerate,
        });
    }
    let f = ms_between / ms_within;
    Ok(Anova {
        f,
        p: f_sf(f, df_between as f64, df_within as f64)?,
        df_between,
        df_within,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TestMode {
    #[default]
    Paired,
    UnpairedPooled,
}

impl FromStr for TestMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paired" => Ok(TestMode::Paired),
            "unpaired" | "unpaired-pooled" => Ok(TestMode::UnpairedPooled),
            other => Err(Error::InvalidParameter(format!(
                "unknown t-test mode {other:?} (expected paired or unpaired-pooled)"
            ))),
        }
    }
}

impl std::fmt::Display for TestMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestMode::Paired => "paired",
            TestMode::UnpairedPooled => "unpaired-pooled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    pub p: f64,
    /// Zero spread with a nonzero mean difference; `t` is ±∞ and `p` is 0.
    pub degenerate: bool,
}

fn t_from(diff: f64, se: f64, df: usize) -> Result<TTest> {
    if se == 0.0 {
        return Ok(if diff == 0.0 {
            TTest {
                t: 0.0,
                df,
                p: 1.0,
                degenerate: false,
            }
        } else {
            TTest {
                t: f64::INFINITY.copysign(diff),
                df,
                p: 0.0,
                degenerate: true,
            }
        });
    }
    let t = diff / se;
    Ok(TTest {
        t,
        df,
        p: t_two_sided_p(t, df as f64)?,
        degenerate: false,
    })
}

pub fn t_test(a: &SampleGroup, b: &SampleGroup, mode: TestMode) -> Result<TTest> {
    a.check()?;
    b.check()?;
    match mode {
        TestMode::Paired => {
            if a.values.len() != b.values.len() {
                return Err(Error::InvalidParameter(format!(
                    "paired test needs equal lengths, got {} and {}",
                    a.values.len(),
                    b.values.len()
                )));
            }
            let d: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
            let n = d.len() as f64;
            let se = (variance(&d) / n).sqrt();
            t_from(mean(&d), se, d.len() - 1)
        }
        TestMode::UnpairedPooled => {
            let (na, nb) = (a.values.len() as f64, b.values.len() as f64);
            let df = a.values.len() + b.values.len() - 2;
            let sp2 = (ss(&a.values) + ss(&b.values)) / df as f64;
            let se = (sp2 * (1.0 / na + 1.0 / nb)).sqrt();
            t_from(mean(&a.values) - mean(&b.values), se, df)
        }
    }
}

/// Pooled-SD Cohen's d. Zero pooled spread gives 0 for equal means and
/// ±∞ otherwise.
pub fn cohens_d(a: &SampleGroup, b: &SampleGroup) -> Result<f64> {
    a.check()?;
    b.check()?;
    let (na, nb) = (a.values.len() as f64, b.values.len() as f64);
    let s = (((na - 1.0) * variance(&a.values) + (nb - 1.0) * variance(&b.values))
        / (na + nb - 2.0))
        .sqrt();
    let diff = mean(&a.values) - mean(&b.values);
    if s == 0.0 {
        return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY.copysign(diff) });
    }
    Ok(diff / s)
}

pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseResult {
    pub model_a: String,
    pub model_b: String,
    pub t: f64,
    pub df: usize,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub cohens_d: f64,
    pub significant: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub metric: String,
    pub mode: TestMode,
    pub alpha: f64,
    pub models: Vec<String>,
    pub topics: Vec<String>,
    pub anova: Anova,
    pub pairwise: Vec<PairwiseResult>,
    /// Model → models it differs from. Empty unless the ANOVA is significant.
    pub significance: BTreeMap<String, BTreeSet<String>>,
}

/// Compare models on one metric, aligning samples by topic id.
pub fn compare_models(
    models: &[(String, BTreeMap<String, TopicMetrics>)],
    metric: &str,
    mode: TestMode,
    alpha: f64,
) -> Result<StatsReport> {
    if models.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 models, got {}",
            models.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be in (0,1), got {alpha}")));
    }
    let mut seen = BTreeSet::new();
    for (tag, _) in models {
        if !seen.insert(tag) {
            return Err(Error::InvalidParameter(format!("duplicate model tag {tag}")));
        }
    }
    let topics: BTreeSet<&String> = models.iter().flat_map(|(_, m)| m.keys()).collect();
    let missing: Vec<String> = models
        .iter()
        .flat_map(|(tag, m)| {
            topics
                .iter()
                .filter(|t| !m.contains_key(**t))
                .map(move |t| format!("{tag}:{t}"))
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::TopicMismatch { missing });
    }
    let groups = models
        .iter()
        .map(|(tag, m)| {
            let values = m.values().map(|tm| tm.get(metric)).collect::<Result<Vec<_>>>()?;
            Ok(SampleGroup::new(tag.clone(), values))
        })
        .collect::<Result<Vec<_>>>()?;

    let anova = one_way_anova(&groups)?;
    let m = groups.len() * (groups.len() - 1) / 2;
    let mut pairwise = Vec::with_capacity(m);
    let mut significance: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            let t = t_test(a, b, mode)?;
            let p_adjusted = bonferroni(t.p, m);
            let significant = p_adjusted < alpha;
            if significant && anova.p < alpha {
                significance
                    .entry(a.model_tag.clone())
                    .or_default()
                    .insert(b.model_tag.clone());
                significance
                    .entry(b.model_tag.clone())
                    .or_default()
                    .insert(a.model_tag.clone());
            }
            pairwise.push(PairwiseResult {
                model_a: a.model_tag.clone(),
                model_b: b.model_tag.clone(),
                t: t.t,
                df: t.df,
                p_raw: t.p,
                p_adjusted,
                cohens_d: cohens_d(a, b)?,
                significant,
                degenerate: t.degenerate,
            });
        }
    }
    Ok(StatsReport {
        metric: metric.to_string(),
        mode,
        alpha,
        models: models.iter().map(|(t, _)| t.clone()).collect(),
        topics: topics.into_iter().cloned().collect(),
        anova,
        pairwise,
        significance,
    })
}

pub const CSV_HEADER: &str = "model_a,model_b,t,df,p_raw,p_adjusted,cohens_d,significant";

/// Letters used as superscripts: A, B, …, Z, AA, AB, …
fn label(i: usize) -> String {
    let mut s = String::new();
    let mut i = i + 1;
    while i > 0 {
        i -= 1;
        s.insert(0, (b'A' + (i % 26) as u8) as char);
        i /= 26;
    }
    s
}

impl StatsReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.pairwise {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.model_a,
                r.model_b,
                r.t,
                r.df,
                r.p_raw,
                r.p_adjusted,
                r.cohens_d,
                r.significant as u8
            );
        }
        out
    }

    /// ANOVA summary plus one line per model listing the labels of the
    /// models it differs from.
    pub fn to_matrix_text(&self) -> String {
        let labels: BTreeMap<&str, String> = self
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| (m.as_str(), label(i)))
            .collect();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "metric {}  ANOVA F({}, {}) = {:.4}, p = {:.4e}{}",
            self.metric,
            self.anova.df_between,
            self.anova.df_within,
            self.anova.f,
            self.anova.p,
            if self.anova.p < self.alpha { "" } else { "  (not significant; pairwise informational)" }
        );
        let width = self.models.iter().map(|m| m.len()).max().unwrap_or(0).max(5);
        for m in &self.models {
            let sup: Vec<&str> = self
                .significance
                .get(m)
                .map(|s| s.iter().map(|o| labels[o.as_str()].as_str()).collect())
                .unwrap_or_default();
            let mut sup = sup;
            sup.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            let _ = writeln!(
                out,
                "{:<3} {:<width$} ^{{{}}}",
                labels[m.as_str()],
                m,
                sup.join(",")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(tag: &str, v: &[f64]) -> SampleGroup {
        SampleGroup::new(tag, v.to_vec())
    }

    #[test]
    fn ln_gamma_known() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn cdf_boundaries() {
        for df in [1.0, 2.0, 7.0, 100.0] {
            assert_eq!(t_cdf(0.0, df).unwrap(), 0.5);
        }
        assert_eq!(f_cdf(0.0, 3.0, 4.0).unwrap(), 0.0);
        assert!(t_cdf(1.0, 0.5).is_err());
        assert!(f_cdf(-1.0, 1.0, 1.0).is_err());
        // df = 1 is Cauchy: cdf(1) = 3/4
        assert!((t_cdf(1.0, 1.0).unwrap() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn iteration_cap_is_an_error() {
        // parameters so large the fraction cannot settle in the cap
        let r = beta_cf(1e12, 1e12, 0.5);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }

    #[test]
    fn anova_constant_groups() {
        let a = one_way_anova(&[g("a", &[2.0, 2.0]), g("b", &[2.0, 2.0, 2.0])]).unwrap();
        assert_eq!((a.f, a.p, a.degenerate), (0.0, 1.0, false));
        let a = one_way_anova(&[g("a", &[1.0, 1.0]), g("b", &[2.0, 2.0])]).unwrap();
        assert!(a.degenerate && a.f.is_infinite() && a.p == 0.0);
        assert!(one_way_anova(&[g("a", &[1.0]), g("b", &[2.0, 3.0])]).is_err());
    }

    #[test]
    fn anova_two_groups_is_t_squared() {
        let a = g("a", &[0.1, 0.4, 0.35, 0.2, 0.9]);
        let b = g("b", &[0.3, 0.5, 0.6, 0.65]);
        let an = one_way_anova(&[a.clone(), b.clone()]).unwrap();
        let t = t_test(&a, &b, TestMode::UnpairedPooled).unwrap();
        assert!((an.f - t.t * t.t).abs() < 1e-9);
        assert!((an.p - t.p).abs() < 1e-9);
    }

    #[test]
    fn t_test_degenerate_cases() {
        let a = g("a", &[0.3, 0.4, 0.5]);
        let t = t_test(&a, &a, TestMode::Paired).unwrap();
        assert_eq!((t.t, t.p), (0.0, 1.0));
        let (a, b) = (g("a", &[1.5, 2.5, 3.5]), g("b", &[1.0, 2.0, 3.0]));
        let t = t_test(&a, &b, TestMode::Paired).unwrap();
        assert!(t.degenerate && t.t == f64::INFINITY && t.p == 0.0);
        assert!(t_test(&a, &g("c", &[1.0, 2.0]), TestMode::Paired).is_err());
    }

    #[test]
    fn cohens_d_identities() {
        let a = g("a", &[1.0, 2.0, 3.0]);
        assert_eq!(cohens_d(&a, &a).unwrap(), 0.0);
        // means 3 and 2, both variances 1
        let b = g("b", &[2.0, 3.0, 4.0]);
        assert_eq!(cohens_d(&b, &a).unwrap(), 1.0);
        assert_eq!(cohens_d(&a, &b).unwrap(), -1.0);
        let c = g("c", &[5.0, 5.0]);
        let d = g("d", &[4.0, 4.0]);
        assert_eq!(cohens_d(&c, &d).unwrap(), f64::INFINITY);
    }

    fn table(vals: &[f64]) -> BTreeMap<String, TopicMetrics> {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| {
                (
                    format!("T{i:02}"),
                    TopicMetrics {
                        ap: v,
                        recall: 1.0,
                        ncg: v,
                        norm_area: v,
                        num_docs: 10,
                        num_relevant: 2,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn compare_identical_and_counts() {
        let v = [0.1, 0.5, 0.3, 0.25];
        let rep = compare_models(
            &[("a".into(), table(&v)), ("b".into(), table(&v))],
            "ap",
            TestMode::Paired,
            0.05,
        )
        .unwrap();
        assert_eq!(rep.anova.p, 1.0);
        assert!(rep.significance.is_empty());
        assert_eq!(rep.pairwise.len(), 1);
        assert_eq!(rep.to_csv().lines().count(), 2);

        let four: Vec<(String, _)> = (0..4)
            .map(|i| (format!("m{i}"), table(&v.map(|x| x + i as f64 * 0.01 * x))))
            .collect();
        let rep = compare_models(&four, "ap", TestMode::Paired, 0.05).unwrap();
        assert_eq!(rep.pairwise.len(), 6);
        for r in &rep.pairwise {
            assert_eq!(r.p_adjusted, bonferroni(r.p_raw, 6));
        }
    }

    #[test]
    fn compare_topic_mismatch() {
        let mut b = table(&[0.1, 0.2, 0.3]);
        b.remove("T01");
        let err = compare_models(
            &[("a".into(), table(&[0.1, 0.2, 0.3])), ("b".into(), b)],
            "ap",
            TestMode::Paired,
            0.05,
        )
        .unwrap_err();
        match err {
            Error::TopicMismatch { missing } => assert_eq!(missing, vec!["b:T01"]),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn labels() {
        assert_eq!(label(0), "A");
        assert_eq!(label(25), "Z");
        assert_eq!(label(26), "AA");
    }
}
