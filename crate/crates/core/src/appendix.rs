//! Published parameter sets of the nine-step gradient-free SINL and checks on them.
//!
//! Sets (1),(2) and (3),(4) come in pairs whose components sum to 0.5, 1 or
//! 1.5: the second set of each pair is the first one mirrored (φ → −φ), with
//! some components shifted by ½.

use serde::{Deserialize, Serialize};

use crate::lru::LruKind;
use crate::search::{cost, SequenceTemplate};

const DATA: &str = include_str!("../data/appendix_sinl2.json");

/// Allowed values of paired component sums.
pub const EXPECTED_SUMS: [f64; 3] = [0.5, 1.0, 1.5];
/// Paired sets (zero-based).
pub const PAIRS: [(usize, usize); 2] = [(0, 1), (2, 3)];

#[derive(Deserialize)]
struct DataFile {
    sets: Vec<[f64; 6]>,
}

/// The four six-component sets.
pub fn appendix_sets() -> [[f64; 6]; 4] {
    let f: DataFile = serde_json::from_str(DATA).expect("bundled data parses");
    f.sets.try_into().expect("four sets")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumCheck {
    /// One-based set labels.
    pub sets: (usize, usize),
    /// One-based component index.
    pub component: usize,
    pub sum: f64,
    pub expected: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub checks: Vec<SumCheck>,
    pub max_residual: f64,
}

impl ConsistencyReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual < tol
    }
}

pub fn appendix_consistency() -> ConsistencyReport {
    let sets = appendix_sets();
    let mut checks = Vec::new();
    for (a, b) in PAIRS {
        for k in 0..6 {
            let sum = sets[a][k] + sets[b][k];
            let expected = EXPECTED_SUMS
                .into_iter()
                .min_by(|x, y| (sum - x).abs().total_cmp(&(sum - y).abs()))
                .unwrap();
            checks.push(SumCheck {
                sets: (a + 1, b + 1),
                component: k + 1,
                sum,
                expected,
                residual: (sum - expected).abs(),
            });
        }
    }
    let max_residual = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    ConsistencyReport { checks, max_residual }
}

/// Cost of one published set substituted into a six-parameter template.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub template: String,
    /// One-based set label.
    pub set: usize,
    /// Cost with φ₁…φ₆ assigned to the template parameters in order.
    pub direct_cost: f64,
    /// Lowest cost over all assignments of the six values to the parameters.
    pub best_cost: f64,
    pub best_order: Vec<usize>,
    pub pass: bool,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Substitutes every published set into `template` (which must have six
/// free parameters), trying every ordering of the components.
pub fn reconstruct(template: &SequenceTemplate, tol: f64) -> Vec<Reconstruction> {
    if template.n_free() != 6 {
        return Vec::new();
    }
    let orders = permutations(6);
    appendix_sets()
        .iter()
        .enumerate()
        .map(|(s, set)| {
            let eval = |order: &[usize]| {
                let params: Vec<f64> = order.iter().map(|&i| set[i]).collect();
                cost(&params, template, LruKind::Sinl).expect("arity checked")
            };
            let direct_cost = eval(&[0, 1, 2, 3, 4, 5]);
            let (best_cost, best_order) = orders
                .iter()
                .map(|o| (eval(o), o.clone()))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap();
            Reconstruction {
                template: template.id.clone(),
                set: s + 1,
                direct_cost,
                best_cost,
                best_order,
                pass: best_cost < tol,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::canonicalize_values;
    use crate::templates::template;

    #[test]
    fn first_sum() {
        let r = appendix_consistency();
        assert_eq!(r.checks.len(), 12);
        let c = &r.checks[0];
        assert_eq!((c.sets, c.component, c.expected), ((1, 2), 1, 0.5));
        assert!(c.residual < 1e-15);
        assert!(r.passes(1e-12));
    }

    #[test]
    fn sums_take_expected_values() {
        let r = appendix_consistency();
        let got: Vec<f64> = r.checks.iter().map(|c| c.expected).collect();
        assert_eq!(got, [0.5, 0.5, 1.0, 1.0, 1.0, 1.0, 0.5, 1.5, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn sets_distinct_after_reduction() {
        let sets = appendix_sets().map(|s| canonicalize_values(&s));
        for i in 0..4 {
            for j in i + 1..4 {
                let d = sets[i].iter().zip(&sets[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(d > 1e-3);
            }
        }
    }

    #[test]
    fn reconstruction_reports_every_set() {
        let t = template("sinl-9").unwrap();
        let r = reconstruct(&t, 1e-8);
        assert_eq!(r.len(), 4);
        for x in &r {
            assert!(x.best_cost <= x.direct_cost);
            assert!(x.pass, "{x:?}");
            assert!(x.direct_cost < 1e-20);
        }
        assert!(reconstruct(&template("sil-5").unwrap(), 1e-8).is_empty());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(6).len(), 720);
    }
}
