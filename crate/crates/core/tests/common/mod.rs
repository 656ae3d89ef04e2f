//! Reference values shared by the integration tests and the acceptance
//! suite.

#![allow(dead_code)]

// scipy 1.15 values, see tests/oracles/stats_oracle.py
pub const A10: [f64; 10] = [0.2162, 0.5141, 0.364, 0.5528, 0.1838, 0.4679, 0.5526, 0.2778, 0.5074, 0.4329];
pub const B10: [f64; 10] = [0.327, 0.5468, 0.4298, 0.6776, 0.2071, 0.5202, 0.6058, 0.2675, 0.575, 0.4291];
pub const G30: [[f64; 30]; 3] = [
    [
        0.4136, 0.0393, 0.2562, 0.2072, 0.2724, 0.2862, 0.097, 0.2783, 0.1358, 0.3121, 0.0551, 0.116,
        0.2122, 0.3209, 0.1769, 0.2013, 0.41, 0.3183, 0.2176, 0.1417, 0.134, 0.1575, 0.1074, 0.2663,
        0.2967, 0.3253, 0.0865, 0.208, 0.1448, 0.4902,
    ],
    [
        0.3987, 0.0308, 0.4062, 0.3703, 0.2833, 0.3854, 0.3923, 0.2506, 0.3353, 0.1933, 0.237,
        0.2601, 0.3321, 0.2421, 0.2512, 0.3013, 0.0571, 0.2912, 0.3689, 0.3802, 0.3353, 0.1613,
        0.3312, 0.3705, 0.3194, 0.1849, 0.3069, 0.1751, 0.1271, 0.3548,
    ],
    [
        0.3746, 0.4942, 0.4816, 0.2311, 0.2572, 0.494, 0.1747, 0.3492, 0.242, 0.2171, 0.3108,
        0.4398, 0.3076, 0.287, 0.1971, 0.2468, 0.2986, 0.2834, 0.5223, 0.2507, 0.4387, 0.169, 0.2598,
        0.0892, 0.3401, 0.1507, 0.4328, 0.2004, 0.3835, 0.4064,
    ],
];

/// `(x, df, P(T <= x))`
pub const T_GRID: [(f64, f64, f64); 10] = [
    (2.0, 10.0, 0.9633059826146297),
    (-1.5, 3.0, 0.11529193262241141),
    (0.3, 1.0, 0.5927735790777423),
    (4.2, 29.0, 0.9998840765818049),
    (-3.1, 7.0, 0.008661144712748758),
    (1.0, 2.0, 0.7886751345948129),
    (0.7, 58.0, 0.7566371789218143),
    (-0.2, 15.0, 0.42208338848719196),
    (2.6, 5.0, 0.97587527346521),
    (10.0, 4.0, 0.9997189981886421),
];

pub const F_GRID: [(f64, f64, f64, f64); 10] = [
    (3.0, 2.0, 27.0, 0.9334002455739436),
    (0.5, 1.0, 1.0, 0.39182655203060734),
    (1.2, 3.0, 10.0, 0.640863444775605),
    (4.5, 6.0, 87.0, 0.9994864345562154),
    (0.1, 2.0, 5.0, 0.09339804392481496),
    (2.0, 1.0, 28.0, 0.8316769642355152),
    (7.3, 4.0, 20.0, 0.9991455378124245),
    (0.9, 10.0, 10.0, 0.43547708433322563),
    (1.5, 2.0, 147.0, 0.7734747786767364),
    (25.0, 3.0, 9.0, 0.9998934202064447),
];

// Direct BM25 and RM3 evaluation, see tests/oracles/toy_oracle.py

pub const TEN_DOCS: [&str; 10] = [
    "heart attack risk in adults",
    "aspirin lowers heart attack risk",
    "aspirin dose and bleeding",
    "stroke risk after heart surgery heart failure",
    "lung cancer screening",
    "screening for lung cancer with low dose ct",
    "children with asthma",
    "asthma and lung function in children children",
    "risk risk risk",
    "aspirin aspirin heart",
];

pub const TEN_QUERIES: [&[(&str, f64)]; 5] = [
    &[("heart", 1.0), ("attack", 1.0)],
    &[("aspirin", 2.0), ("risk", 0.5)],
    &[("lung", 1.0), ("cancer", 1.0), ("screening", 1.0), ("lung", 1.0)],
    &[("children", 0.25), ("asthma", 1.5), ("unseen", 3.0)],
    &[("dose", 1.0), ("heart", 0.75), ("risk", 1.25), ("stroke", 1.0)],
];

// (query, doc, score)
pub const BM25_TEN: [(usize, usize, f64); 50] = [
    (0, 0, 2.356815975038116),
    (0, 1, 2.356815975038116),
    (0, 2, 0.0),
    (0, 3, 1.1081591937631212),
    (0, 4, 0.0),
    (0, 5, 0.0),
    (0, 6, 0.0),
    (0, 7, 0.0),
    (0, 8, 0.0),
    (0, 9, 0.9621835492589139),
    (1, 0, 0.4434083458073063),
    (1, 1, 2.7157335449464237),
    (1, 2, 2.3649471501909836),
    (1, 3, 0.4111995071288095),
    (1, 4, 0.0),
    (1, 5, 0.0),
    (1, 6, 0.0),
    (1, 7, 0.0),
    (1, 8, 0.6765952049569655),
    (1, 9, 3.147560764087819),
    (2, 0, 0.0),
    (2, 1, 0.0),
    (2, 2, 0.0),
    (2, 3, 0.0),
    (2, 4, 5.655297457146418),
    (2, 5, 4.664299070964219),
    (2, 6, 0.0),
    (2, 7, 2.1072652573130317),
    (2, 8, 0.0),
    (2, 9, 0.0),
    (3, 0, 0.0),
    (3, 1, 0.0),
    (3, 2, 0.0),
    (3, 3, 0.0),
    (3, 4, 0.0),
    (3, 5, 0.0),
    (3, 6, 2.7911247017410856),
    (3, 7, 2.504054410179182),
    (3, 8, 0.0),
    (3, 9, 0.0),
    (4, 0, 1.773633383229225),
    (4, 1, 1.773633383229225),
    (4, 2, 1.529917732476092),
    (4, 3, 3.692346886103876),
    (4, 4, 0.0),
    (4, 5, 1.3154432839981354),
    (4, 6, 0.0),
    (4, 7, 0.0),
    (4, 8, 1.6914880123924134),
    (4, 9, 0.7216376619441855),
];
// first pass order [1, 2, 4, 3], p(d) [0.8014280945935378, 0.19857190540646213, 0.0]
pub const RM3_FOUR: [(&str, f64); 4] = [
    ("heart", 0.55),
    ("aspirin", 0.3072794036914882),
    ("attack", 0.10727940369148818),
    ("risk", 0.03544119261702363),
];

pub const FOUR_DOCS: [&str; 4] = [
    "heart attack heart aspirin",
    "heart stroke risk",
    "lung cancer risk smoking",
    "aspirin dose",
];

pub const RM3_QUERY: [(&str, f64); 3] = [("heart", 1.0), ("aspirin", 1.0), ("heart", 0.5)];
/// fb_docs, fb_terms, original query weight
pub const RM3_SETTINGS: (usize, usize, f64) = (3, 4, 0.5);

/// `(a, b, paired, t, two-sided p)` from scipy.stats.ttest_rel / ttest_ind.
pub fn scipy_t_cases() -> [(&'static [f64], &'static [f64], bool, f64, f64); 4] {
    [
        (&A10, &B10, true, -3.715799899965278, 0.004801708090398854),
        (&A10, &B10, false, -0.7878151649612292, 0.4410565716755783),
        (&G30[0], &G30[2], true, -2.9709726299239168, 0.005911487912096044),
        (&G30[0], &G30[1], false, -2.1416605655107785, 0.036432860468742834),
    ]
}

/// scipy.stats.f_oneway over the three 30-sample groups and over A10/B10.
pub const ANOVA_G30: (f64, f64) = (5.109127085407285, 0.007981001890993142);
pub const ANOVA_AB10: (f64, f64) = (0.6206527341428899, 0.4410565716755779);
/// Pooled-SD Cohen's d for A10 vs B10 and G30[0] vs G30[1].
pub const COHENS_D: (f64, f64) = (-0.3523216525117038, -0.5529743802301602);
