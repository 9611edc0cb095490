use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

/// Multiset of eigenvalues, stored in a canonical order (real part, then
/// imaginary part, ascending).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

fn canonical(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

impl Spectrum {
    pub fn new(mut values: Vec<Complex64>) -> Self {
        values.sort_by(canonical);
        Spectrum { values }
    }

    pub fn real(values: &[f64]) -> Self {
        Spectrum::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn empty() -> Self {
        Spectrum { values: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Complex64> {
        self.values.iter()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn negated(&self) -> Spectrum {
        Spectrum::new(self.values.iter().map(|z| -z).collect())
    }

    /// Multiset union.
    pub fn union(&self, other: &Spectrum) -> Spectrum {
        let mut v = self.values.clone();
        v.extend_from_slice(&other.values);
        Spectrum::new(v)
    }

    /// `σ ∪ (−σ)`
    pub fn mirrored(&self) -> Spectrum {
        self.union(&self.negated())
    }

    pub fn max_real(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re))
    }

    pub fn is_hurwitz(&self) -> bool {
        self.values.iter().all(|z| z.re < 0.0)
    }

    /// Non-real values come in conjugate pairs within `tol`.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        let conj = Spectrum::new(self.values.iter().map(|z| z.conj()).collect());
        self.matches(&conj, tol)
    }

    /// Greedy nearest matching; returns the largest matched distance, or
    /// `None` if the sizes differ.
    pub fn distance(&self, other: &Spectrum) -> Option<f64> {
        if self.len() != other.len() {
            return None;
        }
        let mut used = alloc::vec![false; other.len()];
        let mut worst: f64 = 0.0;
        for a in &self.values {
            let mut best = None;
            for (j, b) in other.values.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let d = (a - b).norm();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            let (j, d) = best?;
            used[j] = true;
            worst = worst.max(d);
        }
        Some(worst)
    }

    /// Multiset equality up to `tol` (absolute, per eigenvalue).
    pub fn matches(&self, other: &Spectrum, tol: f64) -> bool {
        self.distance(other).is_some_and(|d| d <= tol)
    }

    /// Removes, one by one, the values nearest to each entry of `other`.
    pub fn remove(&self, other: &Spectrum) -> Spectrum {
        let mut v = self.values.clone();
        for b in &other.values {
            if let Some((j, _)) = v
                .iter()
                .enumerate()
                .map(|(j, a)| (j, (a - b).norm()))
                .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal))
            {
                v.remove(j);
            }
        }
        Spectrum::new(v)
    }
}

impl<'a> IntoIterator for &'a Spectrum {
    type Item = &'a Complex64;
    type IntoIter = core::slice::Iter<'a, Complex64>;
    fn into_iter(self) -> Self::IntoIter {
        self.values.iter()
    }
}

impl FromIterator<Complex64> for Spectrum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        Spectrum::new(iter.into_iter().collect())
    }
}
