use num_complex::Complex64;

use crate::{Error, Result};

/// A unit-energy QAM alphabet with its bit labeling.
///
/// Labeling:
/// * M = 4, 16, 64: per-axis binary-reflected Gray code. The in-phase level
///   index `i` runs from the most positive level downwards and supplies the
///   high half of the label; the quadrature index `q` supplies the low half.
///   Point index is `i * sqrt(M) + q`, so the all-zeros label sits in the
///   first quadrant.
/// * M = 32: cross constellation obtained by folding an 8x4 Gray-labeled
///   rectangle. Columns at |x| = 7 move to the top and bottom rows:
///   `(±7, y) -> (±(4 - |y|), sign(y) * 5)` on the odd-integer grid. No
///   perfect Gray code exists for the cross; the folded points differ from
///   some neighbors in more than one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits: usize,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    index_of_label: Vec<usize>,
}

fn gray(n: u32) -> u32 {
    n ^ (n >> 1)
}

impl Constellation {
    pub fn qam(order: usize) -> Result<Self> {
        let (raw, labels): (Vec<(f64, f64)>, Vec<u32>) = match order {
            4 | 16 | 64 => {
                let side = (order as f64).sqrt() as usize;
                let axis_bits = side.trailing_zeros();
                let level = |k: usize| (side - 1) as f64 - 2.0 * k as f64;
                (0..side)
                    .flat_map(|i| (0..side).map(move |q| (i, q)))
                    .map(|(i, q)| {
                        let label = (gray(i as u32) << axis_bits) | gray(q as u32);
                        ((level(i), level(q)), label)
                    })
                    .unzip()
            }
            32 => (0..8u32)
                .flat_map(|c| (0..4u32).map(move |r| (c, r)))
                .map(|(c, r)| {
                    let x = -7.0 + 2.0 * c as f64;
                    let y = -3.0 + 2.0 * r as f64;
                    let label = (gray(c) << 2) | gray(r);
                    let pos = if x.abs() == 7.0 {
                        (x.signum() * (4.0 - y.abs()), y.signum() * 5.0)
                    } else {
                        (x, y)
                    };
                    (pos, label)
                })
                .unzip(),
            other => return Err(Error::UnsupportedOrder(other)),
        };
        let mean_energy = raw.iter().map(|(x, y)| x * x + y * y).sum::<f64>() / order as f64;
        let norm = mean_energy.sqrt();
        let points = raw
            .iter()
            .map(|&(x, y)| Complex64::new(x / norm, y / norm))
            .collect();
        let mut index_of_label = vec![usize::MAX; order];
        for (i, &l) in labels.iter().enumerate() {
            index_of_label[l as usize] = i;
        }
        debug_assert!(index_of_label.iter().all(|&i| i < order));
        Ok(Constellation {
            order,
            bits: order.trailing_zeros() as usize,
            points,
            labels,
            index_of_label,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    pub fn point_for_label(&self, label: u32) -> Complex64 {
        self.points[self.index_of_label[label as usize]]
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn decide(&self, s: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (s - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Nearest constellation point.
    pub fn slice(&self, s: Complex64) -> Complex64 {
        self.points[self.decide(s)]
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Pairs of nearest neighbors (index pairs at the minimum distance).
    pub fn nearest_neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let dmin = self
            .points
            .iter()
            .enumerate()
            .flat_map(|(i, a)| self.points[i + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        let mut pairs = Vec::new();
        for i in 0..self.order {
            for j in i + 1..self.order {
                if (self.points[i] - self.points[j]).norm() < dmin * (1.0 + 1e-9) {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }
}

/// Maps bits (one per byte, 0 or 1, MSB of each label first) to symbols.
pub fn qam_map(bits: &[u8], c: &Constellation) -> Result<Vec<Complex64>> {
    let k = c.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::InputLength {
            len: bits.len(),
            multiple: k,
        });
    }
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            let label = chunk
                .iter()
                .fold(0u32, |acc, &b| (acc << 1) | u32::from(b & 1));
            c.point_for_label(label)
        })
        .collect())
}

/// Hard-decision demapping to the label of the nearest point.
pub fn qam_demap(symbols: &[Complex64], c: &Constellation) -> Vec<u8> {
    let k = c.bits_per_symbol();
    let mut out = Vec::with_capacity(symbols.len() * k);
    for &s in symbols {
        push_label_bits(&mut out, c.label(c.decide(s)), k);
    }
    out
}

pub(crate) fn push_label_bits(out: &mut Vec<u8>, label: u32, k: usize) {
    for b in (0..k).rev() {
        out.push(((label >> b) & 1) as u8);
    }
}
