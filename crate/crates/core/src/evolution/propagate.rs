use super::individual::IndividualId;

/// Each parent's score becomes the maximum of its own and those of the
/// children naming it as a parent. Parents absent from `children` keep
/// their score; children are not touched.
pub fn propagate_fitness(
    parents: &[(IndividualId, f64)],
    children: &[(f64, [IndividualId; 2])],
) -> Vec<f64> {
    let index: std::collections::HashMap<IndividualId, usize> = parents
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (*id, i))
        .collect();
    let mut out: Vec<f64> = parents.iter().map(|(_, f)| *f).collect();
    for (score, pair) in children {
        for p in pair {
            if let Some(&i) = index.get(p) {
                out[i] = out[i].max(*score);
            }
        }
    }
    out
}
