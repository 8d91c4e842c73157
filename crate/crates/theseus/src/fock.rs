//! Sparse Fock-space containers.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

/// Amplitudes with modulus at or below this value are not stored.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;

/// One mode per output vertex, in ascending vertex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KetTerm {
    pub modes: Vec<usize>,
}

impl KetTerm {
    pub fn new(modes: Vec<usize>) -> Self {
        KetTerm { modes }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

impl fmt::Display for KetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, m) in self.modes.iter().enumerate() {
            if i > 0 && self.modes.iter().any(|&x| x > 9) {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str(">")
    }
}

/// Photon counts per `(vertex, mode)`, stored sorted and without zero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockOccupation {
    entries: Vec<(usize, usize, u32)>,
}

impl FockOccupation {
    pub fn vacuum() -> Self {
        FockOccupation::default()
    }

    /// Builds an occupation from arbitrary `(vertex, mode, count)` triples, merging
    /// repeats and dropping zero counts.
    pub fn from_counts(counts: impl IntoIterator<Item = (usize, usize, u32)>) -> Self {
        let mut map: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (v, m, n) in counts {
            *map.entry((v, m)).or_insert(0) += n;
        }
        FockOccupation {
            entries: map
                .into_iter()
                .filter(|&(_, n)| n > 0)
                .map(|((v, m), n)| (v, m, n))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, usize, u32)] {
        &self.entries
    }

    pub fn get(&self, vertex: usize, mode: usize) -> u32 {
        self.entries
            .binary_search_by(|&(v, m, _)| (v, m).cmp(&(vertex, mode)))
            .map(|i| self.entries[i].2)
            .unwrap_or(0)
    }

    pub fn photons_at(&self, vertex: usize) -> u32 {
        self.entries
            .iter()
            .filter(|&&(v, _, _)| v == vertex)
            .map(|&(_, _, n)| n)
            .sum()
    }

    pub fn total(&self) -> u32 {
        self.entries.iter().map(|&(_, _, n)| n).sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.entries.is_empty()
    }

    /// The part of the occupation living on vertices accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        FockOccupation {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|&(v, _, _)| keep(v))
                .collect(),
        }
    }

    /// Reads the occupation as a ket over `vertices` when each of them holds exactly
    /// one photon and no other vertex is occupied.
    pub fn as_ket(&self, vertices: &[usize]) -> Option<KetTerm> {
        if self.entries.len() != vertices.len() {
            return None;
        }
        let mut modes = Vec::with_capacity(vertices.len());
        for (&(v, m, n), &want) in self.entries.iter().zip(vertices) {
            if v != want || n != 1 {
                return None;
            }
            modes.push(m);
        }
        Some(KetTerm { modes })
    }

    /// Occupation with one photon per vertex, in the modes given by `ket`.
    pub fn from_ket(vertices: &[usize], ket: &KetTerm) -> Self {
        FockOccupation::from_counts(vertices.iter().zip(&ket.modes).map(|(&v, &m)| (v, m, 1)))
    }
}

impl fmt::Display for FockOccupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("vac");
        }
        for (i, (v, m, n)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}.{m}^{n}")?;
        }
        Ok(())
    }
}

/// Sparse superposition over Fock occupations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FockState {
    amplitudes: BTreeMap<FockOccupation, Complex64>,
}

impl FockState {
    pub fn new() -> Self {
        FockState::default()
    }

    /// Adds `amp` to the amplitude of `occ`.
    pub fn accumulate(&mut self, occ: FockOccupation, amp: Complex64) {
        *self
            .amplitudes
            .entry(occ)
            .or_insert(Complex64::new(0.0, 0.0)) += amp;
    }

    /// Drops every amplitude at or below the storage floor.
    pub fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() > AMPLITUDE_FLOOR);
    }

    pub fn amplitude(&self, occ: &FockOccupation) -> Complex64 {
        self.amplitudes
            .get(occ)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockOccupation, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }
}

impl FromIterator<(FockOccupation, Complex64)> for FockState {
    fn from_iter<I: IntoIterator<Item = (FockOccupation, Complex64)>>(iter: I) -> Self {
        let mut s = FockState::new();
        for (o, a) in iter {
            s.accumulate(o, a);
        }
        s.prune();
        s
    }
}
