//! Integer lattice enumeration for the flat torus spectrum.

use std::collections::BTreeMap;

/// One distinct eigenvalue `m1² + m2²` of the torus Laplacian.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeLevel {
    pub norm2: u64,
    /// One representative per `±m` pair, `m1 > 0` or `m1 = 0, m2 > 0`, lexicographic.
    pub representatives: Vec<(i64, i64)>,
}

impl LatticeLevel {
    /// Number of lattice points on the circle of radius `sqrt(norm2)`.
    pub fn count(&self) -> usize {
        if self.norm2 == 0 {
            1
        } else {
            2 * self.representatives.len()
        }
    }
}

/// The first `count` distinct values of `m1² + m2²` with their representatives.
///
/// Enumerates the square `|m_i| ≤ R` and keeps only values `≤ R²`, which are
/// complete; `R` doubles until enough levels are found.
pub fn torus_levels(count: usize) -> Vec<LatticeLevel> {
    let mut radius: i64 = 4;
    loop {
        let r2 = (radius * radius) as u64;
        let mut levels: BTreeMap<u64, Vec<(i64, i64)>> = BTreeMap::new();
        levels.insert(0, Vec::new());
        for m1 in 0..=radius {
            for m2 in -radius..=radius {
                if m1 == 0 && m2 <= 0 {
                    continue;
                }
                let n = (m1 * m1 + m2 * m2) as u64;
                if n <= r2 {
                    levels.entry(n).or_default().push((m1, m2));
                }
            }
        }
        if levels.len() >= count {
            return levels
                .into_iter()
                .take(count)
                .map(|(norm2, mut reps)| {
                    reps.sort_unstable();
                    LatticeLevel { norm2, representatives: reps }
                })
                .collect();
        }
        radius *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_levels() {
        let lv = torus_levels(6);
        let norms: Vec<u64> = lv.iter().map(|l| l.norm2).collect();
        assert_eq!(norms, vec![0, 1, 2, 4, 5, 8]);
        let counts: Vec<usize> = lv.iter().map(|l| l.count()).collect();
        assert_eq!(counts, vec![1, 4, 4, 4, 8, 4]);
        assert_eq!(lv[1].representatives, vec![(0, 1), (1, 0)]);
        assert_eq!(lv[2].representatives, vec![(1, -1), (1, 1)]);
    }

    #[test]
    fn levels_are_complete_across_radius_growth() {
        // 25 = 0²+5² = 3²+4²: twelve points
        let lv = torus_levels(40);
        let l25 = lv.iter().find(|l| l.norm2 == 25).unwrap();
        assert_eq!(l25.count(), 12);
    }
}
