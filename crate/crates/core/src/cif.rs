//! Parser for a practical CIF subset: cell parameters, fractional atom
//! sites, and xyz symmetry operators. Everything else in the file is
//! ignored. Occupancies below 1 are rejected; disordered structures are out
//! of scope.

use thiserror::Error;

use crate::geometry::{GeometryError, PeriodicSet};

#[derive(Debug, Error)]
pub enum CifError {
    #[error("missing cell parameter {0}")]
    MissingCellParameter(&'static str),
    #[error("invalid cell: {0}")]
    InvalidCell(String),
    #[error("malformed loop at line {line}: {detail}")]
    MalformedLoop { line: usize, detail: String },
    #[error("unparsable symmetry operator {text:?} at line {line}")]
    UnparsableSymOp { line: usize, text: String },
    #[error("no atom sites in data block {0:?}")]
    NoAtomSites(String),
    #[error("site {label:?} has occupancy {occupancy} < 1; disordered structures are rejected")]
    DisorderedSite { label: String, occupancy: f64 },
    #[error("bad numeric value {text:?} at line {line}")]
    BadNumber { line: usize, text: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Exact rational with a small denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0);
        if num == 0 {
            return Rational { num: 0, den: 1 };
        }
        let g = gcd(num.abs(), den.abs());
        let sign = if den < 0 { -1 } else { 1 };
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::ops::Add for Rational {
    type Output = Rational;

    fn add(self, other: Rational) -> Rational {
        Rational::new(self.num * other.den + other.num * self.den, self.den * other.den)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// An affine symmetry operator on fractional coordinates, parsed from a
/// string like "-x, y+1/2, -z".
#[derive(Debug, Clone, PartialEq)]
pub struct SymOp {
    /// Row-major matrix with entries in {-1, 0, 1}.
    pub matrix: [[i32; 3]; 3],
    /// Translation with denominators in {1, 2, 3, 4, 6}.
    pub translation: [Rational; 3],
}

impl SymOp {
    pub fn identity() -> Self {
        SymOp {
            matrix: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            translation: [Rational::zero(); 3],
        }
    }

    /// Applies the operator to fractional coordinates, reduced into [0, 1).
    pub fn apply(&self, frac: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for ((o, row), t) in out.iter_mut().zip(&self.matrix).zip(&self.translation) {
            let mut v = t.as_f64();
            for (m, f) in row.iter().zip(frac) {
                v += *m as f64 * f;
            }
            v -= v.floor();
            if v >= 1.0 - 1e-12 {
                v = 0.0;
            }
            *o = v;
        }
        out
    }
}

/// Parses one xyz operator component list, e.g. "x, 1-y, z-0.25".
pub fn parse_symop(s: &str) -> Result<SymOp, CifError> {
    parse_symop_at(s, 0)
}

fn parse_symop_at(s: &str, line: usize) -> Result<SymOp, CifError> {
    let err = || CifError::UnparsableSymOp {
        line,
        text: s.to_string(),
    };
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(err());
    }
    let mut matrix = [[0i32; 3]; 3];
    let mut translation = [Rational::zero(); 3];
    for (row, part) in parts.iter().enumerate() {
        let chars: Vec<char> = part.chars().filter(|c| !c.is_whitespace()).collect();
        let mut i = 0;
        let mut sign = 1i64;
        let mut expect_term = true;
        while i < chars.len() {
            let c = chars[i];
            match c {
                '+' => {
                    sign = 1;
                    i += 1;
                    expect_term = true;
                }
                '-' => {
                    sign = -1;
                    i += 1;
                    expect_term = true;
                }
                'x' | 'y' | 'z' | 'X' | 'Y' | 'Z' => {
                    if !expect_term {
                        return Err(err());
                    }
                    let axis = match c.to_ascii_lowercase() {
                        'x' => 0,
                        'y' => 1,
                        _ => 2,
                    };
                    matrix[row][axis] += sign as i32;
                    sign = 1;
                    expect_term = false;
                    i += 1;
                }
                '0'..='9' | '.' => {
                    if !expect_term {
                        return Err(err());
                    }
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                        i += 1;
                    }
                    let numerator: String = chars[start..i].iter().collect();
                    let value = if i < chars.len() && chars[i] == '/' {
                        i += 1;
                        let dstart = i;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                        let den: i64 = chars[dstart..i]
                            .iter()
                            .collect::<String>()
                            .parse()
                            .map_err(|_| err())?;
                        let num: i64 = numerator.parse().map_err(|_| err())?;
                        Rational::new(num, den)
                    } else if numerator.contains('.') {
                        decimal_to_rational(&numerator).ok_or_else(err)?
                    } else {
                        let num: i64 = numerator.parse().map_err(|_| err())?;
                        Rational::new(num, 1)
                    };
                    // A bare coefficient on a variable must be unit.
                    if i < chars.len() && matches!(chars[i], 'x' | 'y' | 'z' | 'X' | 'Y' | 'Z') {
                        if value != Rational::new(1, 1) {
                            return Err(err());
                        }
                        continue;
                    }
                    translation[row] = translation[row]
                        + Rational::new(sign * value.num, value.den);
                    sign = 1;
                    expect_term = false;
                    continue;
                }
                _ => return Err(err()),
            }
        }
        if expect_term {
            return Err(err());
        }
        if matrix[row].iter().any(|m| m.abs() > 1) {
            return Err(err());
        }
        // Normalize into [0, 1) and check the denominator.
        let t = translation[row];
        let reduced = Rational::new(t.num.rem_euclid(t.den), t.den);
        translation[row] = reduced;
        if ![1, 2, 3, 4, 6].contains(&reduced.den) {
            return Err(err());
        }
    }
    Ok(SymOp {
        matrix,
        translation,
    })
}

fn decimal_to_rational(text: &str) -> Option<Rational> {
    let value: f64 = text.parse().ok()?;
    for den in [1i64, 2, 3, 4, 6] {
        let num = (value * den as f64).round();
        if (value - num / den as f64).abs() < 1e-4 {
            return Some(Rational::new(num as i64, den));
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct CifMetadata {
    pub block: String,
    pub raw_sites: usize,
    pub operations: usize,
}

/// Parsing knobs; the defaults match the library's pipeline.
#[derive(Debug, Clone)]
pub struct CifOptions {
    /// Fractional tolerance for merging symmetry-equivalent sites.
    pub site_tolerance: f64,
}

impl Default for CifOptions {
    fn default() -> Self {
        CifOptions {
            site_tolerance: 1e-4,
        }
    }
}

struct RawBlock {
    name: String,
    scalars: Vec<(String, String, usize)>,
    loops: Vec<(Vec<String>, Vec<String>, usize)>,
}

/// Parses every data block of a CIF file into periodic sets.
pub fn parse_cif(text: &str) -> Result<Vec<(PeriodicSet, CifMetadata)>, CifError> {
    parse_cif_with(text, &CifOptions::default())
}

pub fn parse_cif_with(
    text: &str,
    options: &CifOptions,
) -> Result<Vec<(PeriodicSet, CifMetadata)>, CifError> {
    let blocks = split_blocks(text)?;
    blocks
        .into_iter()
        .map(|b| assemble_block(b, options))
        .collect()
}

fn strip_comment(line: &str) -> &str {
    let mut in_single = false;
    let mut in_double = false;
    for (i, c) in line.char_indices() {
        match c {
            '\'' if !in_double => in_single = !in_single,
            '"' if !in_single => in_double = !in_double,
            '#' if !in_single && !in_double => return &line[..i],
            _ => {}
        }
    }
    line
}

fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    for c in line.chars() {
        match quote {
            Some(q) => {
                if c == q {
                    quote = None;
                    out.push(std::mem::take(&mut cur));
                } else {
                    cur.push(c);
                }
            }
            None => {
                if c == '\'' || c == '"' {
                    quote = Some(c);
                } else if c.is_whitespace() {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                } else {
                    cur.push(c);
                }
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn split_blocks(text: &str) -> Result<Vec<RawBlock>, CifError> {
    let mut blocks: Vec<RawBlock> = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0usize;
    while i < lines.len() {
        let raw = strip_comment(lines[i]);
        let trimmed = raw.trim();
        let line_no = i + 1;
        if trimmed.is_empty() {
            i += 1;
            continue;
        }
        if let Some(name) = trimmed.strip_prefix("data_") {
            blocks.push(RawBlock {
                name: name.to_string(),
                scalars: Vec::new(),
                loops: Vec::new(),
            });
            i += 1;
            continue;
        }
        if trimmed.starts_with(';') {
            // Multiline text value: skip to the closing semicolon.
            i += 1;
            while i < lines.len() && !lines[i].trim_start().starts_with(';') {
                i += 1;
            }
            i += 1;
            continue;
        }
        let block = match blocks.last_mut() {
            Some(b) => b,
            None => {
                // Header junk before the first data block.
                i += 1;
                continue;
            }
        };
        if trimmed.eq_ignore_ascii_case("loop_") {
            let loop_line = line_no;
            i += 1;
            let mut tags = Vec::new();
            while i < lines.len() {
                let t = strip_comment(lines[i]).trim().to_string();
                if t.starts_with('_') {
                    tags.push(t.to_ascii_lowercase());
                    i += 1;
                } else {
                    break;
                }
            }
            if tags.is_empty() {
                return Err(CifError::MalformedLoop {
                    line: loop_line,
                    detail: "loop_ without column tags".into(),
                });
            }
            let mut values: Vec<String> = Vec::new();
            while i < lines.len() {
                let raw = strip_comment(lines[i]);
                let t = raw.trim();
                if t.is_empty()
                    || t.starts_with('_')
                    || t.starts_with("data_")
                    || t.eq_ignore_ascii_case("loop_")
                {
                    break;
                }
                if t.starts_with(';') {
                    return Err(CifError::MalformedLoop {
                        line: i + 1,
                        detail: "multiline values inside loops are unsupported".into(),
                    });
                }
                values.extend(tokenize(raw));
                i += 1;
            }
            if !values.len().is_multiple_of(tags.len()) {
                return Err(CifError::MalformedLoop {
                    line: loop_line,
                    detail: format!(
                        "{} values do not fill rows of {} columns",
                        values.len(),
                        tags.len()
                    ),
                });
            }
            block.loops.push((tags, values, loop_line));
            continue;
        }
        if trimmed.starts_with('_') {
            let mut tokens = tokenize(raw);
            let tag = tokens.remove(0).to_ascii_lowercase();
            if tokens.is_empty() {
                // Value on the following line or in a semicolon block.
                i += 1;
                while i < lines.len() && strip_comment(lines[i]).trim().is_empty() {
                    i += 1;
                }
                if i < lines.len() {
                    let next = strip_comment(lines[i]).trim_start();
                    if next.starts_with(';') {
                        i += 1;
                        while i < lines.len() && !lines[i].trim_start().starts_with(';') {
                            i += 1;
                        }
                        i += 1;
                    } else {
                        let vals = tokenize(strip_comment(lines[i]));
                        if let Some(v) = vals.into_iter().next() {
                            block.scalars.push((tag, v, line_no));
                        }
                        i += 1;
                    }
                }
                continue;
            }
            block.scalars.push((tag, tokens.remove(0), line_no));
            i += 1;
            continue;
        }
        i += 1;
    }
    Ok(blocks)
}

fn numeric(value: &str, line: usize) -> Result<f64, CifError> {
    // Strip a printed uncertainty like 1.234(5).
    let cleaned = match value.find('(') {
        Some(pos) => &value[..pos],
        None => value,
    };
    cleaned.trim().parse().map_err(|_| CifError::BadNumber {
        line,
        text: value.to_string(),
    })
}

const SYMOP_TAGS: [&str; 2] = [
    "_symmetry_equiv_pos_as_xyz",
    "_space_group_symop_operation_xyz",
];

fn assemble_block(
    block: RawBlock,
    options: &CifOptions,
) -> Result<(PeriodicSet, CifMetadata), CifError> {
    let scalar = |tag: &str| -> Option<(&String, usize)> {
        block
            .scalars
            .iter()
            .find(|(t, _, _)| t == tag)
            .map(|(_, v, l)| (v, *l))
    };
    let cell = |tag: &'static str| -> Result<f64, CifError> {
        let (v, l) = scalar(tag).ok_or(CifError::MissingCellParameter(tag))?;
        numeric(v, l)
    };
    let a = cell("_cell_length_a")?;
    let b = cell("_cell_length_b")?;
    let c = cell("_cell_length_c")?;
    let alpha = cell("_cell_angle_alpha")?;
    let beta = cell("_cell_angle_beta")?;
    let gamma = cell("_cell_angle_gamma")?;
    let basis = cell_matrix(a, b, c, alpha, beta, gamma)?;

    // Symmetry operators: scalar form or a loop column; default identity.
    let mut ops: Vec<SymOp> = Vec::new();
    for tag in SYMOP_TAGS {
        if let Some((v, l)) = scalar(tag) {
            ops.push(parse_symop_at(v, l)?);
        }
    }
    for (tags, values, line) in &block.loops {
        for op_tag in SYMOP_TAGS {
            if let Some(col) = tags.iter().position(|t| t == op_tag) {
                let ncols = tags.len();
                for row in values.chunks(ncols) {
                    ops.push(parse_symop_at(&row[col], *line)?);
                }
            }
        }
    }
    if ops.is_empty() {
        ops.push(SymOp::identity());
    }

    // Atom sites.
    let mut raw_sites: Vec<([f64; 3], String)> = Vec::new();
    for (tags, values, line) in &block.loops {
        let Some(fx) = tags.iter().position(|t| t == "_atom_site_fract_x") else {
            continue;
        };
        let fy = tags
            .iter()
            .position(|t| t == "_atom_site_fract_y")
            .ok_or(CifError::MalformedLoop {
                line: *line,
                detail: "missing _atom_site_fract_y".into(),
            })?;
        let fz = tags
            .iter()
            .position(|t| t == "_atom_site_fract_z")
            .ok_or(CifError::MalformedLoop {
                line: *line,
                detail: "missing _atom_site_fract_z".into(),
            })?;
        let symbol = tags.iter().position(|t| t == "_atom_site_type_symbol");
        let label = tags.iter().position(|t| t == "_atom_site_label");
        let occupancy = tags.iter().position(|t| t == "_atom_site_occupancy");
        let ncols = tags.len();
        for row in values.chunks(ncols) {
            let sp = symbol
                .map(|i| row[i].clone())
                .or_else(|| label.map(|i| strip_site_digits(&row[i])))
                .unwrap_or_else(|| "X".to_string());
            if let Some(oc) = occupancy {
                let occ_text = &row[oc];
                if occ_text != "." && occ_text != "?" {
                    let occ = numeric(occ_text, *line)?;
                    if occ < 1.0 - 1e-9 {
                        return Err(CifError::DisorderedSite {
                            label: sp,
                            occupancy: occ,
                        });
                    }
                }
            }
            let frac = [
                numeric(&row[fx], *line)?,
                numeric(&row[fy], *line)?,
                numeric(&row[fz], *line)?,
            ];
            raw_sites.push((frac, sp));
        }
    }
    if raw_sites.is_empty() {
        return Err(CifError::NoAtomSites(block.name.clone()));
    }

    // Symmetry expansion with min-image dedup in fractional space.
    let tol = options.site_tolerance;
    let mut motif: Vec<[f64; 3]> = Vec::new();
    let mut species: Vec<String> = Vec::new();
    for (frac, sp) in &raw_sites {
        let wrapped = SymOp::identity().apply(frac);
        for op in &ops {
            let image = op.apply(&wrapped);
            let duplicate = motif.iter().any(|m| {
                m.iter().zip(&image).all(|(x, y)| {
                    let d = x - y;
                    (d - d.round()).abs() <= tol
                })
            });
            if !duplicate {
                motif.push(image);
                species.push(sp.clone());
            }
        }
    }

    let set = PeriodicSet::new(
        3,
        3,
        basis,
        motif.iter().map(|m| m.to_vec()).collect(),
        Some(species),
        Some(block.name.clone()),
    )?;
    Ok((
        set,
        CifMetadata {
            block: block.name,
            raw_sites: raw_sites.len(),
            operations: ops.len(),
        },
    ))
}

fn strip_site_digits(label: &str) -> String {
    label
        .trim_end_matches(|c: char| c.is_ascii_digit() || c == '+' || c == '-')
        .to_string()
}

/// The standard crystallographic cell matrix for lengths in Angstroms and
/// angles in degrees: a along x, b in the xy plane.
pub fn cell_matrix(
    a: f64,
    b: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<Vec<Vec<f64>>, CifError> {
    for (name, v) in [("length a", a), ("length b", b), ("length c", c)] {
        if v.is_nan() || v <= 0.0 {
            return Err(CifError::InvalidCell(format!("{name} = {v}")));
        }
    }
    for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if v.is_nan() || v <= 0.0 || v >= 180.0 {
            return Err(CifError::InvalidCell(format!("angle {name} = {v}")));
        }
    }
    let (ca, cb, cg) = (
        alpha.to_radians().cos(),
        beta.to_radians().cos(),
        gamma.to_radians().cos(),
    );
    let sg = gamma.to_radians().sin();
    let cx = c * cb;
    let cy = c * (ca - cb * cg) / sg;
    let cz2 = c * c - cx * cx - cy * cy;
    if cz2 <= 0.0 {
        return Err(CifError::InvalidCell(format!(
            "angles ({alpha}, {beta}, {gamma}) do not close a cell"
        )));
    }
    Ok(vec![
        vec![a, 0.0, 0.0],
        vec![b * cg, b * sg, 0.0],
        vec![cx, cy, cz2.sqrt()],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn symop_identity_and_glide() {
        let id = parse_symop("x,y,z").unwrap();
        assert_eq!(id, SymOp::identity());

        let op = parse_symop("-x, y+1/2, -z").unwrap();
        assert_eq!(op.matrix, [[-1, 0, 0], [0, 1, 0], [0, 0, -1]]);
        assert_eq!(op.translation[1], Rational::new(1, 2));
        let image = op.apply(&[0.25, 0.0, 0.0]);
        assert!((image[0] - 0.75).abs() < 1e-12);
        assert!((image[1] - 0.5).abs() < 1e-12);
        assert!(image[2].abs() < 1e-12);
    }

    #[test]
    fn symop_accepts_reordered_and_decimal_forms() {
        let a = parse_symop("1/2+x, y, z").unwrap();
        let b = parse_symop("x+1/2, y, z").unwrap();
        assert_eq!(a, b);
        let c = parse_symop("x, 1-y, z-0.25").unwrap();
        assert_eq!(c.matrix[1][1], -1);
        // Translations normalize into [0, 1): 1 wraps to 0, -1/4 to 3/4.
        assert_eq!(c.translation[1], Rational::zero());
        assert_eq!(c.translation[2], Rational::new(3, 4));
        let image = c.apply(&[0.1, 0.25, 0.0]);
        assert!((image[1] - 0.75).abs() < 1e-12);
        assert!((image[2] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn symop_rejects_garbage() {
        assert!(parse_symop("x,y").is_err());
        assert!(parse_symop("2x, y, z").is_err());
        assert!(parse_symop("x, y, w").is_err());
        assert!(parse_symop("x, y, z+1/5").is_err());
    }

    const CUBIC: &str = "\
data_cube
_cell_length_a 1.0
_cell_length_b 1.0
_cell_length_c 1.0
_cell_angle_alpha 90
_cell_angle_beta 90
_cell_angle_gamma 90
loop_
_atom_site_label
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
C1 0 0 0
";

    #[test]
    fn cubic_cell_parses_to_integer_lattice() {
        let sets = parse_cif(CUBIC).unwrap();
        assert_eq!(sets.len(), 1);
        let (set, meta) = &sets[0];
        assert_eq!(meta.block, "cube");
        assert_eq!(set.motif_len(), 1);
        assert_eq!(set.species().unwrap(), ["C"]);
        let d = set.neighbor_distances(0, 6);
        for v in d {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn reflection_expansion_gives_two_sites() {
        let text = "\
data_mirrored
_cell_length_a 4.0
_cell_length_b 5.0
_cell_length_c 6.0
_cell_angle_alpha 90
_cell_angle_beta 90
_cell_angle_gamma 90
loop_
_space_group_symop_operation_xyz
'x,y,z'
'x,1-y,z-0.25'
loop_
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
B 0.0 0.0 0.25
";
        let sets = parse_cif(text).unwrap();
        let (set, meta) = &sets[0];
        assert_eq!(meta.operations, 2);
        assert_eq!(set.motif_len(), 2);
    }

    #[test]
    fn sites_on_mirror_planes_deduplicate() {
        let text = "\
data_dedup
_cell_length_a 3.0
_cell_length_b 3.0
_cell_length_c 3.0
_cell_angle_alpha 90
_cell_angle_beta 90
_cell_angle_gamma 90
loop_
_symmetry_equiv_pos_as_xyz
'x,y,z'
'-x,y,z'
'x,-y,z'
'-x,-y,z'
loop_
_atom_site_label
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
Fe1 0.0 0.3 0.25
";
        let sets = parse_cif(text).unwrap();
        let (set, meta) = &sets[0];
        // Orbit of (0, 0.3, 1/4) under the four ops has size 2: x stays
        // fixed at 0, y maps to {0.3, 0.7}.
        assert_eq!(meta.raw_sites, 1);
        assert_eq!(set.motif_len(), 2);
        assert_eq!(set.species().unwrap()[0], "Fe");
    }

    #[test]
    fn expansion_is_idempotent_on_p1() {
        let sets = parse_cif(CUBIC).unwrap();
        let (set, _) = &sets[0];
        // Re-render the expanded motif as a P1 block and parse again.
        let mut text = String::from(
            "data_p1\n_cell_length_a 1.0\n_cell_length_b 1.0\n_cell_length_c 1.0\n\
             _cell_angle_alpha 90\n_cell_angle_beta 90\n_cell_angle_gamma 90\n\
             loop_\n_atom_site_label\n_atom_site_fract_x\n_atom_site_fract_y\n_atom_site_fract_z\n",
        );
        for (i, p) in set.motif().iter().enumerate() {
            text.push_str(&format!("C{} {} {} {}\n", i + 1, p[0], p[1], p[2]));
        }
        let again = parse_cif(&text).unwrap();
        assert_eq!(again[0].0.motif_len(), set.motif_len());
    }

    #[test]
    fn occupancy_below_one_is_rejected() {
        let text = "\
data_disordered
_cell_length_a 3.0
_cell_length_b 3.0
_cell_length_c 3.0
_cell_angle_alpha 90
_cell_angle_beta 90
_cell_angle_gamma 90
loop_
_atom_site_label
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
_atom_site_occupancy
Na1 0 0 0 0.5
";
        assert!(matches!(
            parse_cif(text),
            Err(CifError::DisorderedSite { .. })
        ));
    }

    #[test]
    fn missing_cell_is_reported() {
        let text = "data_broken\n_cell_length_a 3.0\n";
        assert!(matches!(
            parse_cif(text),
            Err(CifError::MissingCellParameter(_))
        ));
    }

    #[test]
    fn cell_matrix_round_trips_lengths_and_angles() {
        let (a, b, c) = (5.2, 6.1, 7.9);
        let (alpha, beta, gamma) = (75.0, 88.0, 112.0);
        let m = cell_matrix(a, b, c, alpha, beta, gamma).unwrap();
        let la = linalg::norm(&m[0]);
        let lb = linalg::norm(&m[1]);
        let lc = linalg::norm(&m[2]);
        assert!((la - a).abs() < 1e-9);
        assert!((lb - b).abs() < 1e-9);
        assert!((lc - c).abs() < 1e-9);
        let angle = |u: &[f64], v: &[f64]| {
            (linalg::dot(u, v) / (linalg::norm(u) * linalg::norm(v)))
                .acos()
                .to_degrees()
        };
        assert!((angle(&m[1], &m[2]) - alpha).abs() < 1e-9);
        assert!((angle(&m[0], &m[2]) - beta).abs() < 1e-9);
        assert!((angle(&m[0], &m[1]) - gamma).abs() < 1e-9);
    }

    #[test]
    fn parser_handles_uncertainties_and_comments() {
        let text = "\
# leading comment
data_u
_cell_length_a 4.123(5)
_cell_length_b 4.123(5)
_cell_length_c 4.123(5)
_cell_angle_alpha 90.0
_cell_angle_beta 90.0
_cell_angle_gamma 90.0
loop_
_atom_site_label # trailing comment
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
O1 0.25(1) 0.25 0.25
";
        let sets = parse_cif(text).unwrap();
        assert_eq!(sets[0].0.motif_len(), 1);
        assert!((sets[0].0.basis()[0][0] - 4.123).abs() < 1e-12);
    }
}
