//! Finite signed measures made of point masses.

/// `Σ wᵢ δ_{xᵢ}` with possibly signed weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Self {
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn push(&mut self, location: f64, weight: f64) {
        self.atoms.push((location, weight));
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * f(x)).sum()
    }

    /// Multiplies every weight by `g(location)`.
    pub fn weighted(&self, g: impl Fn(f64) -> f64) -> Self {
        Self::new(self.atoms.iter().map(|&(x, w)| (x, w * g(x))).collect())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.atoms.iter().map(|&(x, w)| (x, w * factor)).collect())
    }

    /// `self − other` as a signed measure (not coalesced).
    pub fn minus(&self, other: &DiscreteMeasure) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().map(|&(x, w)| (x, -w)));
        Self::new(atoms)
    }

    /// Sorts atoms by location and sums weights of atoms within `tol` of
    /// their left neighbour. Atoms whose summed weight is within `tol` of zero
    /// are dropped.
    pub fn coalesced(&self, tol: f64) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(atoms.len());
        let mut prev = f64::NEG_INFINITY;
        for (x, w) in atoms {
            match out.last_mut() {
                Some(last) if x - prev <= tol => {
                    last.1 += w;
                    last.2 += w.abs();
                }
                _ => out.push((x, w, w.abs())),
            }
            prev = x;
        }
        Self::new(
            out.into_iter()
                .filter(|&(_, w, _)| w.abs() > tol)
                .map(|(x, w, _)| (x, w))
                .collect(),
        )
    }

    /// Positive weights summing to one within `1e-12`.
    pub fn is_probability(&self) -> bool {
        self.atoms.iter().all(|a| a.1 > 0.0) && (self.total_weight() - 1.0).abs() <= 1e-12
    }

    /// Equality after coalescing both sides, locations and weights within `tol`.
    pub fn approx_eq(&self, other: &DiscreteMeasure, tol: f64) -> bool {
        let a = self.coalesced(tol);
        let b = other.coalesced(tol);
        a.atoms.len() == b.atoms.len()
            && a.atoms
                .iter()
                .zip(&b.atoms)
                .all(|(p, q)| (p.0 - q.0).abs() <= tol && (p.1 - q.1).abs() <= tol)
    }

    /// `μ(A)` for the closed interval `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| lo <= a.0 && a.0 <= hi)
            .map(|a| a.1)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coalescing_sums_coincident_atoms() {
        let m = DiscreteMeasure::new(vec![(1.0, 0.25), (0.0, 0.5), (1.0 + 1e-12, 0.25)]);
        let c = m.coalesced(1e-9);
        assert_eq!(c.atoms().len(), 2);
        assert_eq!(c.atoms()[1].1, 0.5);
        assert!(m.is_probability());
    }

    #[test]
    fn signed_difference_cancels() {
        let a = DiscreteMeasure::new(vec![(0.0, 0.5), (2.0, 0.5)]);
        let b = DiscreteMeasure::new(vec![(2.0, 0.5), (0.0, 0.5)]);
        assert!(a.minus(&b).coalesced(1e-12).is_empty());
        assert!(a.approx_eq(&b, 1e-12));
        assert!(!a.minus(&b).is_probability());
    }

    #[test]
    fn integration_and_intervals() {
        let a = DiscreteMeasure::new(vec![(0.0, 0.5), (2.0, 0.5)]);
        assert_eq!(a.integrate(|x| x * x), 2.0);
        assert_eq!(a.mass_in(1.0, 3.0), 0.5);
        assert_eq!(a.weighted(|x| x).total_weight(), 1.0);
        assert_eq!(a.scaled(2.0).total_weight(), 2.0);
    }
}
