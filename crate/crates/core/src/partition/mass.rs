use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exact mass `e^{-depth/6}·center_mass`, kept as the integer pair so that
/// comparisons and equality never depend on floating-point rounding of the
/// exponential. `center_mass == 0` is the nil mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Mass {
    pub center_mass: u32,
    pub depth: u32,
}

impl Mass {
    pub const NIL: Mass = Mass {
        center_mass: 0,
        depth: 0,
    };

    pub fn new(center_mass: u32, depth: u32) -> Self {
        if center_mass == 0 {
            Mass::NIL
        } else {
            Mass { center_mass, depth }
        }
    }

    /// Mass of a center with closed neighborhood size `closed_degree`.
    pub fn of_center(closed_degree: usize, arms: usize) -> Self {
        Mass::new(closed_degree.min(arms) as u32, 0)
    }

    pub fn is_nil(&self) -> bool {
        self.center_mass == 0
    }

    /// The mass one hop further from the center (`e^{-1/6}` times this one).
    pub fn decayed(&self) -> Mass {
        if self.is_nil() {
            Mass::NIL
        } else {
            Mass::new(self.center_mass, self.depth + 1)
        }
    }

    pub fn value(&self) -> f64 {
        if self.is_nil() {
            0.0
        } else {
            (-(self.depth as f64) / 6.0).exp() * self.center_mass as f64
        }
    }

    /// `6·ln m − d`, the monotone key behind the ordering.
    pub fn log_key(&self) -> f64 {
        if self.is_nil() {
            f64::NEG_INFINITY
        } else {
            6.0 * (self.center_mass as f64).ln() - self.depth as f64
        }
    }
}

impl Ord for Mass {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match (self.is_nil(), other.is_nil()) {
            (true, _) => return Ordering::Less,
            (_, true) => return Ordering::Greater,
            _ => {}
        }
        let (a, b) = (self.center_mass as f64, other.center_mass as f64);
        // 6·ln(a/b) against d_self − d_other; ln_1p keeps full precision when
        // a and b are close
        let lhs = 6.0 * ((a - b) / b).ln_1p();
        let rhs = self.depth as f64 - other.depth as f64;
        match lhs.partial_cmp(&rhs) {
            Some(Ordering::Equal) | None => {
                // unreachable for distinct pairs: e^{k/6} is irrational for k != 0
                (self.center_mass, other.depth).cmp(&(other.center_mass, self.depth))
            }
            Some(ord) => ord,
        }
    }
}

impl PartialOrd for Mass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            write!(f, "nil")
        } else {
            write!(f, "({}, {})", self.center_mass, self.depth)
        }
    }
}
