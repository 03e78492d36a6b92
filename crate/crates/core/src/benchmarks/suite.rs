use std::fmt::Write as _;
use std::path::Path;

use super::{
    make_composition, make_shifted_rotated, random_rotation, BaseFunction, CompositionComponent,
    ObjectiveFunction, Transform,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RngStream};

/// Shifts are drawn from this box so optima stay well inside `[-100, 100]`.
const SHIFT_RANGE: f64 = 80.0;

/// How a suite entry is assembled from base functions.
#[derive(Debug, Clone, PartialEq)]
enum Recipe {
    Plain(BaseFunction),
    ShiftedRotated(BaseFunction),
    Composition(Vec<BaseFunction>),
}

impl Recipe {
    fn label(&self) -> String {
        match self {
            Recipe::Plain(b) => b.name().to_string(),
            Recipe::ShiftedRotated(b) => format!("shifted_rotated:{b}"),
            Recipe::Composition(parts) => format!(
                "composition:{}",
                parts.iter().map(|b| b.name()).collect::<Vec<_>>().join("+")
            ),
        }
    }

    fn parse(text: &str) -> Result<Self> {
        match text.split_once(':') {
            None => Ok(Recipe::Plain(text.parse()?)),
            Some(("shifted_rotated", b)) => Ok(Recipe::ShiftedRotated(b.parse()?)),
            Some(("composition", parts)) => Ok(Recipe::Composition(
                parts.split('+').map(str::parse).collect::<Result<_>>()?,
            )),
            Some((kind, _)) => Err(Error::usage(format!("unknown recipe kind `{kind}`"))),
        }
    }

    fn build(&self, name: &str, dim: usize, seed: u64) -> Result<ObjectiveFunction> {
        match self {
            Recipe::Plain(b) => {
                let f = ObjectiveFunction::base(*b, dim)?;
                Ok(ObjectiveFunction::new(name, f.bounds().clone(), f.f_star(), f.x_star().map(<[f64]>::to_vec), f.landscape().clone())?)
            }
            Recipe::ShiftedRotated(b) => {
                let mut rng = RngStream::new(seed);
                let shift = (0..dim).map(|_| rng.uniform_in(-SHIFT_RANGE, SHIFT_RANGE)).collect();
                let rotation = Some(random_rotation(dim, &mut rng));
                make_shifted_rotated(&ObjectiveFunction::base(*b, dim)?, Transform { shift, rotation }, name)
            }
            Recipe::Composition(parts) => {
                let components = parts
                    .iter()
                    .enumerate()
                    .map(|(k, b)| {
                        let part_seed = derive_seed(seed, &format!("component{k}"));
                        Ok(CompositionComponent {
                            function: Recipe::ShiftedRotated(*b).build(b.name(), dim, part_seed)?,
                            sigma: 10.0 * (k + 1) as f64,
                            bias: 100.0 * k as f64,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                make_composition(components, name)
            }
        }
    }
}

/// A registered function as recorded in the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRecord {
    pub name: String,
    pub base: String,
    pub dim: usize,
    pub seed: u64,
    /// Location of the optimum.
    pub shift: Vec<f64>,
    pub f_star: f64,
}

impl ManifestRecord {
    pub const HEADER: &'static str = "name,base,dim,seed,shift,f_star";

    /// Floats are written with Rust's shortest round-trip formatting.
    pub fn to_csv_line(&self) -> String {
        let shift = self.shift.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(";");
        format!("{},{},{},{},{},{:?}", self.name, self.base, self.dim, self.seed, shift, self.f_star)
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let bad = |m: &str| Error::usage(format!("manifest line `{line}`: {m}"));
        let fields: Vec<&str> = line.trim().split(',').collect();
        let [name, base, dim, seed, shift, f_star] = fields[..] else {
            return Err(bad("expected 6 fields"));
        };
        let shift = shift
            .split(';')
            .map(|v| v.parse::<f64>().map_err(|_| bad("bad shift component")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.to_string(),
            base: base.to_string(),
            dim: dim.parse().map_err(|_| bad("bad dim"))?,
            seed: seed.parse().map_err(|_| bad("bad seed"))?,
            shift,
            f_star: f_star.parse().map_err(|_| bad("bad f_star"))?,
        })
    }

    /// Rebuilds the function and checks it agrees with the record.
    pub fn build(&self) -> Result<ObjectiveFunction> {
        let f = Recipe::parse(&self.base)?.build(&self.name, self.dim, self.seed)?;
        let x_star = f.x_star().unwrap_or_default();
        if x_star != &self.shift[..] || f.f_star() != self.f_star {
            return Err(Error::usage(format!(
                "manifest record `{}` does not match its rebuilt function",
                self.name
            )));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: &'static str,
    recipe: Recipe,
}

/// The registered functions at one dimension, with landscapes fixed by `seed`.
#[derive(Debug, Clone)]
pub struct Suite {
    dim: usize,
    seed: u64,
    entries: Vec<SuiteEntry>,
}

impl Suite {
    pub const DEFAULT_SEED: u64 = 2020;

    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        use BaseFunction::*;
        if dim < 2 {
            return Err(Error::usage("suite functions need at least 2 dimensions"));
        }
        let e = |name, recipe| SuiteEntry { name, recipe };
        let entries = vec![
            e("sphere", Recipe::Plain(Sphere)),
            e("rosenbrock", Recipe::Plain(Rosenbrock)),
            e("rastrigin", Recipe::Plain(Rastrigin)),
            e("ackley", Recipe::Plain(Ackley)),
            e("griewank", Recipe::Plain(Griewank)),
            e("schwefel", Recipe::Plain(Schwefel)),
            e("sr_sphere", Recipe::ShiftedRotated(Sphere)),
            e("sr_rosenbrock", Recipe::ShiftedRotated(Rosenbrock)),
            e("sr_rastrigin", Recipe::ShiftedRotated(Rastrigin)),
            e("sr_ackley", Recipe::ShiftedRotated(Ackley)),
            e("sr_griewank", Recipe::ShiftedRotated(Griewank)),
            e("comp_rastrigin_griewank", Recipe::Composition(vec![Rastrigin, Griewank])),
            e("comp_ackley_rastrigin_sphere", Recipe::Composition(vec![Ackley, Rastrigin, Sphere])),
        ];
        Ok(Self { dim, seed, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name)
    }

    fn entry_seed(&self, name: &str) -> u64 {
        derive_seed(self.seed, name)
    }

    fn entry(&self, name: &str) -> Result<&SuiteEntry> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::usage(format!("unknown suite function `{name}`")))
    }

    pub fn build(&self, name: &str) -> Result<ObjectiveFunction> {
        let entry = self.entry(name)?;
        entry.recipe.build(entry.name, self.dim, self.entry_seed(name))
    }

    pub fn manifest(&self) -> Result<Vec<ManifestRecord>> {
        self.entries
            .iter()
            .map(|e| {
                let f = self.build(e.name)?;
                Ok(ManifestRecord {
                    name: e.name.to_string(),
                    base: e.recipe.label(),
                    dim: self.dim,
                    seed: self.entry_seed(e.name),
                    shift: f.x_star().unwrap_or_default().to_vec(),
                    f_star: f.f_star(),
                })
            })
            .collect()
    }
}

pub fn manifest_to_string(records: &[ManifestRecord]) -> String {
    let mut out = String::new();
    writeln!(out, "{}", ManifestRecord::HEADER).unwrap();
    for r in records {
        writeln!(out, "{}", r.to_csv_line()).unwrap();
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRecord>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == ManifestRecord::HEADER => {}
        _ => return Err(Error::usage("manifest header missing")),
    }
    lines.map(ManifestRecord::parse_csv_line).collect()
}

pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<()> {
    std::fs::write(path, manifest_to_string(records)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_attains_its_optimum() {
        for dim in [2, 10] {
            let suite = Suite::new(dim, Suite::DEFAULT_SEED).unwrap();
            for name in suite.names() {
                let f = suite.build(name).unwrap();
                let x = f.x_star().unwrap();
                assert!(f.bounds().contains(x), "{name}");
                let gap = f.peek(x).unwrap() - f.f_star();
                assert!(gap.abs() <= 1e-9, "{name}: {gap}");
            }
        }
    }

    #[test]
    fn manifest_round_trips() {
        let suite = Suite::new(5, 77).unwrap();
        let records = suite.manifest().unwrap();
        let parsed = parse_manifest(&manifest_to_string(&records)).unwrap();
        assert_eq!(parsed, records);
        for r in &parsed {
            let rebuilt = r.build().unwrap();
            let original = suite.build(&r.name).unwrap();
            let x = vec![1.5; 5];
            assert_eq!(rebuilt.peek(&x).unwrap(), original.peek(&x).unwrap());
        }
    }

    #[test]
    fn tampered_record_is_rejected() {
        let mut r = Suite::new(3, 1).unwrap().manifest().unwrap().remove(8);
        r.shift[0] += 1.0;
        assert!(r.build().is_err());
    }

    #[test]
    fn suite_seed_changes_landscape() {
        let a = Suite::new(4, 1).unwrap().build("sr_rastrigin").unwrap();
        let b = Suite::new(4, 2).unwrap().build("sr_rastrigin").unwrap();
        assert_ne!(a.x_star(), b.x_star());
    }
}
