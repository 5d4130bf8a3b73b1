//! Drag-coefficient tables for the standard G reference projectiles.
//!
//! Six tables (G1, G2, G5, G6, G7, G8) give the zero-yaw drag coefficient
//! against Mach number. Between knots the coefficient is evaluated with a
//! natural cubic spline — the curve the tables are meant to represent is
//! smooth away from the transonic rise, and a C² interpolant keeps the
//! right-hand side of the trajectory ODE twice differentiable, which the
//! higher-order integrators need if their nominal order is to survive.
//! Outside the tabulated range the end values are held constant.
//!
//! Tables ship compiled into the library; [`load`] lets an environment
//! variable point at replacement CSV files with the same layout.

use std::io::BufRead;
use std::sync::OnceLock;

use thiserror::Error;

/// Environment variable naming a directory with replacement drag tables
/// (`g1.csv` … `g8.csv`).
pub const DATA_DIR_ENV: &str = "RICHLAB_DATA_DIR";

#[derive(Debug, Error)]
pub enum DragTableError {
    #[error("i/o error reading drag table: {0}")]
    Io(#[from] std::io::Error),
    #[error("drag table parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid drag table: {msg}")]
    Validation { msg: String },
}

/// Reference projectile shape selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShellModel {
    G1,
    G2,
    G5,
    G6,
    G7,
    G8,
}

impl ShellModel {
    pub const ALL: [ShellModel; 6] = [
        ShellModel::G1,
        ShellModel::G2,
        ShellModel::G5,
        ShellModel::G6,
        ShellModel::G7,
        ShellModel::G8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShellModel::G1 => "G1",
            ShellModel::G2 => "G2",
            ShellModel::G5 => "G5",
            ShellModel::G6 => "G6",
            ShellModel::G7 => "G7",
            ShellModel::G8 => "G8",
        }
    }

    /// File name used both for the bundled table and for overrides.
    pub fn file_name(self) -> &'static str {
        match self {
            ShellModel::G1 => "g1.csv",
            ShellModel::G2 => "g2.csv",
            ShellModel::G5 => "g5.csv",
            ShellModel::G6 => "g6.csv",
            ShellModel::G7 => "g7.csv",
            ShellModel::G8 => "g8.csv",
        }
    }

    fn bundled_csv(self) -> &'static str {
        match self {
            ShellModel::G1 => include_str!("../data/g1.csv"),
            ShellModel::G2 => include_str!("../data/g2.csv"),
            ShellModel::G5 => include_str!("../data/g5.csv"),
            ShellModel::G6 => include_str!("../data/g6.csv"),
            ShellModel::G7 => include_str!("../data/g7.csv"),
            ShellModel::G8 => include_str!("../data/g8.csv"),
        }
    }
}

impl std::str::FromStr for ShellModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "G1" => Ok(ShellModel::G1),
            "G2" => Ok(ShellModel::G2),
            "G5" => Ok(ShellModel::G5),
            "G6" => Ok(ShellModel::G6),
            "G7" => Ok(ShellModel::G7),
            "G8" => Ok(ShellModel::G8),
            other => Err(format!("unknown shell model `{other}` (expected G1, G2, G5, G6, G7 or G8)")),
        }
    }
}

/// Tabulated drag coefficient with a precomputed natural cubic spline.
#[derive(Debug, Clone)]
pub struct DragTable {
    mach: Vec<f64>,
    cd: Vec<f64>,
    /// Spline second derivatives at the knots (zero at both ends).
    d2: Vec<f64>,
}

impl DragTable {
    /// Build a table from raw knots.
    ///
    /// Requires at least three knots, strictly increasing finite Mach
    /// values, and finite non-negative coefficients. (A zero coefficient is
    /// legal here so synthetic vacuum tables can be constructed for tests;
    /// the CSV reader is stricter and demands positive values.)
    pub fn from_knots(mach: Vec<f64>, cd: Vec<f64>) -> Result<Self, DragTableError> {
        if mach.len() != cd.len() {
            return Err(DragTableError::Validation {
                msg: format!("{} mach values but {} coefficients", mach.len(), cd.len()),
            });
        }
        if mach.len() < 3 {
            return Err(DragTableError::Validation {
                msg: format!("need at least 3 knots, got {}", mach.len()),
            });
        }
        if mach.iter().any(|m| !m.is_finite()) || cd.iter().any(|c| !c.is_finite()) {
            return Err(DragTableError::Validation { msg: "non-finite knot".into() });
        }
        if mach[0] < 0.0 {
            return Err(DragTableError::Validation { msg: "negative Mach knot".into() });
        }
        if mach.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DragTableError::Validation {
                msg: "Mach grid must be strictly increasing".into(),
            });
        }
        if cd.iter().any(|&c| c < 0.0) {
            return Err(DragTableError::Validation { msg: "negative drag coefficient".into() });
        }
        let d2 = natural_spline_second_derivs(&mach, &cd);
        Ok(Self { mach, cd, d2 })
    }

    /// Parse a CSV with a `mach,cd` header. `#` lines and blank lines are
    /// ignored; coefficients must be strictly positive.
    pub fn from_csv_reader<R: BufRead>(reader: R) -> Result<Self, DragTableError> {
        let mut mach = Vec::new();
        let mut cd = Vec::new();
        let mut saw_header = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if !saw_header {
                let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
                if cols.len() != 2 || !cols[0].eq_ignore_ascii_case("mach") || !cols[1].eq_ignore_ascii_case("cd") {
                    return Err(DragTableError::Parse {
                        line: line_no,
                        msg: format!("expected header `mach,cd`, got `{trimmed}`"),
                    });
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(DragTableError::Parse {
                    line: line_no,
                    msg: format!("expected 2 columns, got {}", cols.len()),
                });
            }
            let m: f64 = cols[0].parse().map_err(|e| DragTableError::Parse {
                line: line_no,
                msg: format!("bad mach `{}`: {e}", cols[0]),
            })?;
            let c: f64 = cols[1].parse().map_err(|e| DragTableError::Parse {
                line: line_no,
                msg: format!("bad cd `{}`: {e}", cols[1]),
            })?;
            if !c.is_finite() || c <= 0.0 {
                return Err(DragTableError::Parse {
                    line: line_no,
                    msg: format!("drag coefficient must be positive and finite, got {c}"),
                });
            }
            mach.push(m);
            cd.push(c);
        }
        if !saw_header {
            return Err(DragTableError::Validation { msg: "empty drag table".into() });
        }
        Self::from_knots(mach, cd)
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self, DragTableError> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Drag coefficient at the given Mach number. Queries outside the
    /// tabulated range return the nearest end value.
    pub fn cd(&self, mach: f64) -> f64 {
        let n = self.mach.len();
        if mach <= self.mach[0] {
            return self.cd[0];
        }
        if mach >= self.mach[n - 1] {
            return self.cd[n - 1];
        }
        // partition_point: first knot strictly above `mach`; the interval is
        // [i-1, i].
        let i = self.mach.partition_point(|&m| m <= mach);
        let (x0, x1) = (self.mach[i - 1], self.mach[i]);
        let (y0, y1) = (self.cd[i - 1], self.cd[i]);
        let (d0, d1) = (self.d2[i - 1], self.d2[i]);
        let w = x1 - x0;
        let a = (x1 - mach) / w;
        let b = (mach - x0) / w;
        a * y0 + b * y1 + ((a * a * a - a) * d0 + (b * b * b - b) * d1) * w * w / 6.0
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.mach.iter().copied().zip(self.cd.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.mach.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mach.is_empty()
    }

    pub fn mach_range(&self) -> (f64, f64) {
        (self.mach[0], self.mach[self.mach.len() - 1])
    }
}

/// Second derivatives of the natural cubic spline through `(x, y)` —
/// tridiagonal solve with zero curvature at both ends.
fn natural_spline_second_derivs(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d2 = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        let p = sig * d2[i - 1] + 2.0;
        d2[i] = (sig - 1.0) / p;
        let slope_right = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        let slope_left = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        scratch[i] = (6.0 * (slope_right - slope_left) / (x[i + 1] - x[i - 1]) - sig * scratch[i - 1]) / p;
    }
    for i in (1..n - 1).rev() {
        d2[i] = d2[i] * d2[i + 1] + scratch[i];
    }
    d2
}

/// The compiled-in table for a shell model, parsed once on first use.
pub fn bundled(shell: ShellModel) -> &'static DragTable {
    static TABLES: OnceLock<Vec<DragTable>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        ShellModel::ALL
            .iter()
            .map(|s| {
                DragTable::from_csv_reader(s.bundled_csv().as_bytes())
                    .unwrap_or_else(|e| panic!("bundled table {} is invalid: {e}", s.name()))
            })
            .collect()
    });
    let idx = ShellModel::ALL.iter().position(|&s| s == shell).unwrap();
    &tables[idx]
}

/// Load the table for a shell model, honouring the [`DATA_DIR_ENV`]
/// override. With the variable unset the bundled table is cloned.
pub fn load(shell: ShellModel) -> Result<DragTable, DragTableError> {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) => {
            let path = std::path::Path::new(&dir).join(shell.file_name());
            DragTable::from_csv_path(&path)
        }
        None => Ok(bundled(shell).clone()),
    }
}
