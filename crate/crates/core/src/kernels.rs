//! Nonlocal kernels γ supported in (−∞, 0] and their exact calculus.
//!
//! The scheme never samples γ pointwise except for Riemann-type weights; what
//! it consumes are interval masses ∫_a^b γ(z) dz, which every family provides
//! in closed form. Built-in families:
//!
//! - exponential: γ(z) = e^z on (−∞, 0]
//! - linear:      γ(z) = 2(z+1) on (−1, 0]
//! - constant:    γ(z) = 1 on (−1, 0]
//!
//! plus piecewise-constant custom tables loaded from CSV.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Exponential,
    Linear,
    Constant,
    CustomTable,
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            KernelFamily::Exponential => "exponential",
            KernelFamily::Linear => "linear",
            KernelFamily::Constant => "constant",
            KernelFamily::CustomTable => "custom-table",
        };
        f.write_str(s)
    }
}

/// One piecewise-constant piece of a custom kernel: γ = `value` on
/// `(z_left, z_right]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TableRow<R> {
    pub z_left: R,
    pub z_right: R,
    pub value: R,
}

/// Admissibility flags per the assumptions the stability theory places on γ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmissibilityReport {
    pub supported_in_nonpositive: bool,
    pub nonnegative: bool,
    pub nondecreasing: bool,
    pub convex: bool,
    pub normalized: bool,
}

impl AdmissibilityReport {
    pub fn all(&self) -> bool {
        self.supported_in_nonpositive
            && self.nonnegative
            && self.nondecreasing
            && self.convex
            && self.normalized
    }
}

/// A nonlocal kernel with closed-form interval masses.
#[derive(Debug, Clone)]
pub struct Kernel<R> {
    family: KernelFamily,
    rows: Vec<TableRow<R>>,
    /// Left end of the support; `None` means unbounded below.
    support_left: Option<R>,
    convex: bool,
    nondecreasing: bool,
    total_mass: R,
    /// c₁ = ∫ |z| γ(z) dz; `None` means declared infinite.
    first_moment: Option<R>,
}

impl<R: Real> Kernel<R> {
    /// γ(z) = e^z on (−∞, 0]. The value at z = 0 is the left limit 1.
    pub fn exponential() -> Self {
        Kernel {
            family: KernelFamily::Exponential,
            rows: Vec::new(),
            support_left: None,
            convex: true,
            nondecreasing: true,
            total_mass: R::one(),
            first_moment: Some(R::one()),
        }
    }

    /// γ(z) = 2(z+1) on (−1, 0].
    pub fn linear() -> Self {
        Kernel {
            family: KernelFamily::Linear,
            rows: Vec::new(),
            support_left: Some(-R::one()),
            convex: true,
            nondecreasing: true,
            total_mass: R::one(),
            first_moment: Some(R::of(1.0 / 3.0)),
        }
    }

    /// γ(z) = 1 on (−1, 0]. Not convex: it jumps up to a flat plateau.
    pub fn constant() -> Self {
        Kernel {
            family: KernelFamily::Constant,
            rows: Vec::new(),
            support_left: Some(-R::one()),
            convex: false,
            nondecreasing: true,
            total_mass: R::one(),
            first_moment: Some(R::of(0.5)),
        }
    }

    /// Piecewise-constant kernel from contiguous rows tiling a subinterval of
    /// (−∞, 0]. Rows must be in ascending z order.
    pub fn custom_table(rows: Vec<TableRow<R>>) -> Result<Self> {
        Self::custom_table_impl(rows, true)
    }

    /// Like [`Kernel::custom_table`] but with the first moment declared
    /// infinite; [`Kernel::first_moment`] then fails.
    pub fn custom_table_unbounded_moment(rows: Vec<TableRow<R>>) -> Result<Self> {
        Self::custom_table_impl(rows, false)
    }

    fn custom_table_impl(rows: Vec<TableRow<R>>, finite_moment: bool) -> Result<Self> {
        // Line numbers here count data rows from 1; the CSV loader offsets
        // them past its header.
        if rows.is_empty() {
            return Err(Error::KernelTable {
                line: 1,
                reason: "table has no rows".into(),
            });
        }
        let tol = R::of(1e-12);
        for (i, row) in rows.iter().enumerate() {
            let line = i + 1;
            if !(row.z_left < row.z_right) {
                return Err(Error::KernelTable {
                    line,
                    reason: format!(
                        "z_left {} must be < z_right {}",
                        row.z_left, row.z_right
                    ),
                });
            }
            if row.z_right > tol {
                return Err(Error::KernelTable {
                    line,
                    reason: format!("z_right {} lies outside (-inf, 0]", row.z_right),
                });
            }
            if row.value < R::zero() || !row.value.is_finite() {
                return Err(Error::KernelTable {
                    line,
                    reason: format!("value {} must be finite and >= 0", row.value),
                });
            }
            if i > 0 && (row.z_left - rows[i - 1].z_right).abs() > tol {
                return Err(Error::KernelTable {
                    line,
                    reason: format!(
                        "rows must tile contiguously: previous z_right {} != z_left {}",
                        rows[i - 1].z_right,
                        row.z_left
                    ),
                });
            }
        }

        let total_mass = rows
            .iter()
            .map(|r| r.value * (r.z_right - r.z_left))
            .sum::<R>();
        // ∫ |z| γ dz over (a, b] with b <= 0 is value * (a^2 - b^2) / 2.
        let first_moment = rows
            .iter()
            .map(|r| r.value * (r.z_left * r.z_left - r.z_right * r.z_right) / R::of(2.0))
            .sum::<R>();

        let values: Vec<R> = rows.iter().map(|r| r.value).collect();
        let nondecreasing = values.windows(2).all(|w| w[1] >= w[0] - R::of(1e-14));

        // Sufficient convexity check on the zero-extended value sequence
        // [0, 0, v_1, ..., v_m]: all discrete second differences must be
        // nonnegative. A single positive row is a jump up to a plateau and is
        // rejected outright, like the built-in constant kernel.
        let convex = if values.len() == 1 {
            values[0] == R::zero()
        } else {
            let mut padded = vec![R::zero(), R::zero()];
            padded.extend_from_slice(&values);
            nondecreasing
                && padded.windows(3).all(|w| {
                    w[0] + w[2] - R::of(2.0) * w[1] >= -R::of(1e-14)
                })
        };

        Ok(Kernel {
            family: KernelFamily::CustomTable,
            support_left: Some(rows[0].z_left),
            rows,
            convex,
            nondecreasing,
            total_mass,
            first_moment: finite_moment.then_some(first_moment),
        })
    }

    /// Parse a custom table from CSV text with header `z_left,z_right,value`.
    /// Errors carry the 1-based line number of the offending row.
    pub fn custom_from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::KernelTable {
            line: 1,
            reason: "empty file".into(),
        })?;
        let normalized: String = header.split(',').map(str::trim).collect::<Vec<_>>().join(",");
        if normalized != "z_left,z_right,value" {
            return Err(Error::KernelTable {
                line: 1,
                reason: format!("expected header `z_left,z_right,value`, got `{header}`"),
            });
        }
        let mut rows = Vec::new();
        let mut row_lines = Vec::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::KernelTable {
                    line,
                    reason: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let mut parsed = [R::zero(); 3];
            for (slot, field) in parsed.iter_mut().zip(&fields) {
                *slot = field
                    .parse::<f64>()
                    .map(R::of)
                    .map_err(|_| Error::KernelTable {
                        line,
                        reason: format!("cannot parse `{field}` as a number"),
                    })?;
            }
            rows.push(TableRow {
                z_left: parsed[0],
                z_right: parsed[1],
                value: parsed[2],
            });
            row_lines.push(line);
        }
        Self::custom_table_impl(rows, true).map_err(|e| match e {
            // Re-map data-row indices to file line numbers.
            Error::KernelTable { line, reason } => Error::KernelTable {
                line: row_lines.get(line - 1).copied().unwrap_or(line),
                reason,
            },
            other => other,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Left end of the support, `None` when unbounded (exponential).
    pub fn support_left(&self) -> Option<R> {
        self.support_left
    }

    pub fn total_mass(&self) -> R {
        self.total_mass
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.nondecreasing
    }

    pub fn rows(&self) -> &[TableRow<R>] {
        &self.rows
    }

    /// γ(z); zero outside the support. At interval endpoints the value is the
    /// left limit (support intervals are left-open), so evaluate(0) = 1 for
    /// the exponential family.
    pub fn evaluate(&self, z: R) -> R {
        let zero = R::zero();
        match self.family {
            KernelFamily::Exponential => {
                if z <= zero {
                    z.exp()
                } else {
                    zero
                }
            }
            KernelFamily::Linear => {
                if z > -R::one() && z <= zero {
                    R::of(2.0) * (z + R::one())
                } else {
                    zero
                }
            }
            KernelFamily::Constant => {
                if z > -R::one() && z <= zero {
                    R::one()
                } else {
                    zero
                }
            }
            KernelFamily::CustomTable => self
                .rows
                .iter()
                .find(|r| z > r.z_left && z <= r.z_right)
                .map(|r| r.value)
                .unwrap_or(zero),
        }
    }

    /// ∫_a^b γ(z) dz by the family's antiderivative.
    pub fn interval_mass(&self, a: R, b: R) -> Result<R> {
        if a > b {
            return Err(Error::InvalidInterval {
                a: a.as_f64(),
                b: b.as_f64(),
            });
        }
        let zero = R::zero();
        let mass = match self.family {
            KernelFamily::Exponential => b.min(zero).exp() - a.min(zero).exp(),
            KernelFamily::Linear => {
                let lo = Self::clip_unit(a);
                let hi = Self::clip_unit(b);
                let f = |z: R| (z + R::one()) * (z + R::one());
                f(hi) - f(lo)
            }
            KernelFamily::Constant => Self::clip_unit(b) - Self::clip_unit(a),
            KernelFamily::CustomTable => self
                .rows
                .iter()
                .map(|r| {
                    let lo = a.max(r.z_left);
                    let hi = b.min(r.z_right);
                    if hi > lo {
                        r.value * (hi - lo)
                    } else {
                        zero
                    }
                })
                .sum(),
        };
        Ok(mass.max(zero))
    }

    fn clip_unit(z: R) -> R {
        z.max(-R::one()).min(R::zero())
    }

    /// c₁ = ∫ |z| γ(z) dz.
    pub fn first_moment(&self) -> Result<R> {
        self.first_moment.ok_or(Error::InfiniteMoment)
    }

    pub fn check_admissibility(&self) -> AdmissibilityReport {
        AdmissibilityReport {
            supported_in_nonpositive: true,
            nonnegative: true,
            nondecreasing: self.nondecreasing,
            convex: self.convex,
            normalized: (self.total_mass - R::one()).abs() <= R::of(1e-12),
        }
    }
}
