use std::fmt;

use crate::error::{Error, Result};

/// A bijection on `0..n`, stored as its image array.
///
/// Composition follows function notation: `p.compose(&q)` is `x -> p(q(x))`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<u16>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n as u16).collect(),
        }
    }

    /// Builds a permutation from an image array, checking bijectivity.
    pub fn from_images(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n > u16::MAX as usize {
            return Err(Error::input(format!("permutation degree {n} too large")));
        }
        let mut seen = vec![false; n];
        for &x in &image {
            if x >= n || seen[x] {
                return Err(Error::input(format!(
                    "image array {image:?} is not a permutation of 0..{n}"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation {
            image: image.into_iter().map(|x| x as u16).collect(),
        })
    }

    pub(crate) fn from_u16_unchecked(image: Vec<u16>) -> Self {
        debug_assert!({
            let mut s = image.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(i, &x)| i == x as usize)
        });
        Permutation { image }
    }

    /// Builds a permutation of degree `n` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= n || touched[x] {
                    return Err(Error::input(format!(
                        "cycle {cycle:?} is out of range or overlaps another cycle"
                    )));
                }
                touched[x] = true;
                image[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Permutation::from_images(image)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x] as usize
    }

    pub fn images(&self) -> &[u16] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// `x -> self(other(x))`
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            image: other.image.iter().map(|&x| self.image[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u16; self.degree()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x as usize] = i as u16;
        }
        Permutation { image: inv }
    }

    /// Order of the permutation as a group element (lcm of cycle lengths).
    pub fn order(&self) -> u64 {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut order = 1u64;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.apply(x);
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }

    /// Restriction to the points `offset..offset + len`, which must be an
    /// invariant set; the result acts on `0..len`.
    pub fn restrict(&self, offset: usize, len: usize) -> Option<Permutation> {
        let mut image = Vec::with_capacity(len);
        for x in offset..offset + len {
            let y = self.apply(x);
            if y < offset || y >= offset + len {
                return None;
            }
            image.push((y - offset) as u16);
        }
        Some(Permutation { image })
    }

    /// Extends by fixing points `self.degree()..n`.
    pub fn extend_fixing(&self, n: usize) -> Permutation {
        let mut image = self.image.clone();
        image.extend(self.degree() as u16..n as u16);
        Permutation { image }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Cycle notation with fixed points omitted, `()` for the identity.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut wrote = false;
        for start in 0..n {
            if seen[start] || self.apply(start) == start {
                seen[start] = true;
                continue;
            }
            write!(f, "(")?;
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
                first = false;
                x = self.apply(x);
            }
            write!(f, ")")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_is_function_composition() {
        let p = Permutation::from_cycles(3, &[&[0, 1]]).unwrap();
        let q = Permutation::from_cycles(3, &[&[1, 2]]).unwrap();
        let pq = p.compose(&q);
        for x in 0..3 {
            assert_eq!(pq.apply(x), p.apply(q.apply(x)));
        }
        assert!(p.compose(&p.inverse()).is_identity());
    }

    #[test]
    fn order_is_lcm_of_cycles() {
        let p = Permutation::from_cycles(21, &[&[0, 9, 19], &[3, 4, 20, 8, 7, 18], &[12, 17]]).unwrap();
        assert_eq!(p.order(), 6);
        assert_eq!(Permutation::identity(4).order(), 1);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_images(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_images(vec![0, 3, 1]).is_err());
        assert!(Permutation::from_cycles(4, &[&[0, 1], &[1, 2]]).is_err());
    }

    #[test]
    fn display_uses_cycle_notation() {
        let p = Permutation::from_cycles(5, &[&[0, 2, 4]]).unwrap();
        assert_eq!(p.to_string(), "(0,2,4)");
        assert_eq!(Permutation::identity(3).to_string(), "()");
    }
}
