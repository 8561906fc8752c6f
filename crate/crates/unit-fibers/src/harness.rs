//! Seeded randomized verification campaigns, linking matrices, and fiber
//! export. Pair lists are generated up front from the seed and the reductions
//! are order-independent, so reports are byte-identical across thread counts.
//!
//! Failures are data, not crashes: a campaign always completes and reports.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fibration::{
    standard_fiber, villarceau_fiber, Fiber, FiberRecord, FibrationError, FibrationSpec,
    Handedness, SCHEMA_VERSION,
};
use crate::geometry::{disjointness_certificate, linked, pair_geometry, GeometryError, Verdict};
use crate::sampling::{fiber_samples, random_in_ball, rng_from_seed};
use crate::skew::{fiber_to_skew_plane, skew};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Fibration(#[from] FibrationError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

/// One pair the campaign could not fully certify, with the reason.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFailure {
    pub index: usize,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub reason: String,
}

/// Aggregated result of a randomized verification campaign.
///
/// `wall_time` is measured but excluded from serialization so that reports
/// with identical inputs are byte-identical regardless of machine or thread
/// count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub spec: FibrationSpec,
    pub n_pairs: usize,
    pub seed: u64,
    pub radius_bound: f64,
    pub certified_fraction: f64,
    pub linked_fraction: f64,
    pub skew_fraction: f64,
    /// Minima over all pairs of the three certificate margins.
    pub worst_margins: [f64; 3],
    pub failures: Vec<PairFailure>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.certified_fraction == 1.0
            && self.linked_fraction == 1.0
            && self.skew_fraction == 1.0
            && self.failures.is_empty()
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "campaign: {:?}", self.spec);
        let _ = writeln!(
            s,
            "pairs: {}  seed: {}  bound: {}",
            self.n_pairs, self.seed, self.radius_bound
        );
        let _ = writeln!(s, "  certified_fraction: {:.6}", self.certified_fraction);
        let _ = writeln!(s, "  linked_fraction:    {:.6}", self.linked_fraction);
        let _ = writeln!(s, "  skew_fraction:      {:.6}", self.skew_fraction);
        let _ = writeln!(
            s,
            "  worst margins:      a={:.6e} b={:.6e} c={:.6e}",
            self.worst_margins[0], self.worst_margins[1], self.worst_margins[2]
        );
        let _ = writeln!(s, "  failures:           {}", self.failures.len());
        let _ = writeln!(s, "  wall time:          {:.3}s", self.wall_time);
        s
    }
}

#[derive(Debug, Clone)]
struct PairOutcome {
    certified: bool,
    linked: bool,
    skewed: bool,
    margins: Option<[f64; 3]>,
    failure: Option<PairFailure>,
}

/// Runs the full campaign for the hypercomplex construction: sample center
/// pairs in the ball, then certificate + linkedness + skewness per pair.
/// Deterministic for a fixed seed at any thread count.
pub fn verify_construction(
    n: usize,
    n_pairs: usize,
    seed: u64,
    radius_bound: f64,
) -> Result<VerificationReport, HarnessError> {
    verify_construction_with(n, n_pairs, seed, radius_bound, cfg!(feature = "parallel"))
}

/// Same campaign with an explicit parallel/sequential switch (the sequential
/// path is always available; the parallel path needs the `parallel` feature).
pub fn verify_construction_with(
    n: usize,
    n_pairs: usize,
    seed: u64,
    radius_bound: f64,
    parallel: bool,
) -> Result<VerificationReport, HarnessError> {
    if n_pairs == 0 {
        return Err(HarnessError::InvalidArgument(
            "campaign needs at least one pair".into(),
        ));
    }
    if !(radius_bound > 0.0 && radius_bound < 1.0) {
        return Err(HarnessError::InvalidArgument(format!(
            "radius bound must lie in (0, 1), got {radius_bound}"
        )));
    }
    let spec = FibrationSpec::standard(n)?;
    let start = Instant::now();

    // pair list generated up front from the seed; evaluation order is free
    let mut rng = rng_from_seed(seed);
    let pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..n_pairs)
        .map(|_| {
            let y = random_in_ball(&mut rng, n + 1, radius_bound);
            loop {
                let z = random_in_ball(&mut rng, n + 1, radius_bound);
                if (&y - &z).norm() > 0.0 {
                    return (y, z);
                }
            }
        })
        .collect();

    let evaluate = |(index, (y, z)): (usize, &(DVector<f64>, DVector<f64>))| -> PairOutcome {
        match evaluate_pair(n, y, z) {
            Ok((certified, is_linked, is_skew, margins)) => PairOutcome {
                certified,
                linked: is_linked,
                skewed: is_skew,
                margins: Some(margins),
                failure: if certified && is_linked && is_skew {
                    None
                } else {
                    Some(PairFailure {
                        index,
                        y: y.iter().cloned().collect(),
                        z: z.iter().cloned().collect(),
                        reason: format!(
                            "certified={certified} linked={is_linked} skew={is_skew}"
                        ),
                    })
                },
            },
            Err(e) => PairOutcome {
                certified: false,
                linked: false,
                skewed: false,
                margins: None,
                failure: Some(PairFailure {
                    index,
                    y: y.iter().cloned().collect(),
                    z: z.iter().cloned().collect(),
                    reason: e.to_string(),
                }),
            },
        }
    };

    let outcomes: Vec<PairOutcome> = run_indexed(&pairs, parallel, evaluate);

    let mut certified = 0usize;
    let mut linked_count = 0usize;
    let mut skew_count = 0usize;
    let mut worst = [f64::INFINITY; 3];
    let mut failures = Vec::new();
    for o in outcomes {
        if o.certified {
            certified += 1;
        }
        if o.linked {
            linked_count += 1;
        }
        if o.skewed {
            skew_count += 1;
        }
        if let Some(m) = o.margins {
            for i in 0..3 {
                worst[i] = worst[i].min(m[i]);
            }
        }
        if let Some(f) = o.failure {
            failures.push(f);
        }
    }
    failures.sort_by_key(|f| f.index);

    Ok(VerificationReport {
        schema: SCHEMA_VERSION,
        spec,
        n_pairs,
        seed,
        radius_bound,
        certified_fraction: certified as f64 / n_pairs as f64,
        linked_fraction: linked_count as f64 / n_pairs as f64,
        skew_fraction: skew_count as f64 / n_pairs as f64,
        worst_margins: worst,
        failures,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn evaluate_pair(
    n: usize,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<(bool, bool, bool, [f64; 3]), HarnessError> {
    let g = pair_geometry(n, y, z)?;
    let cert = disjointness_certificate(&g);
    let fy = standard_fiber(n, y, false)?;
    let fz = standard_fiber(n, z, false)?;
    let is_linked = linked(&fy, &fz)?;
    let is_skew = skew(&fiber_to_skew_plane(&fy), &fiber_to_skew_plane(&fz));
    Ok((
        cert.verdict == Verdict::CertifiedDisjoint,
        is_linked,
        is_skew,
        cert.margins,
    ))
}

#[cfg(feature = "parallel")]
fn run_indexed<T: Sync, U: Send>(
    items: &[T],
    parallel: bool,
    f: impl Fn((usize, &T)) -> U + Sync,
) -> Vec<U> {
    use rayon::prelude::*;
    if parallel {
        items.par_iter().enumerate().map(|(i, t)| f((i, t))).collect()
    } else {
        items.iter().enumerate().map(|(i, t)| f((i, t))).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_indexed<T, U>(items: &[T], _parallel: bool, f: impl Fn((usize, &T)) -> U) -> Vec<U> {
    items.iter().enumerate().map(|(i, t)| f((i, t))).collect()
}

/// Per-entry verdict of a linking matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkVerdict {
    SelfFiber,
    Linked,
    Unlinked,
    Error(String),
}

/// Symmetric matrix of pairwise linking verdicts; per-entry errors are
/// recorded, never raised.
pub fn linking_matrix(fibers: &[Fiber]) -> Result<Vec<Vec<LinkVerdict>>, HarnessError> {
    linking_matrix_with(fibers, cfg!(feature = "parallel"))
}

pub fn linking_matrix_with(
    fibers: &[Fiber],
    parallel: bool,
) -> Result<Vec<Vec<LinkVerdict>>, HarnessError> {
    if fibers.is_empty() {
        return Err(HarnessError::InvalidArgument(
            "linking matrix needs at least one fiber".into(),
        ));
    }
    let k = fibers.len();
    let index_pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let entries = run_indexed(&index_pairs, parallel, |(_, &(i, j))| {
        match linked(&fibers[i], &fibers[j]) {
            Ok(true) => LinkVerdict::Linked,
            Ok(false) => LinkVerdict::Unlinked,
            Err(e) => LinkVerdict::Error(e.to_string()),
        }
    });
    let mut matrix = vec![vec![LinkVerdict::SelfFiber; k]; k];
    for (&(i, j), verdict) in index_pairs.iter().zip(entries) {
        matrix[i][j] = verdict.clone();
        matrix[j][i] = verdict;
    }
    Ok(matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Obj,
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "obj" => Ok(Self::Obj),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}' (expected obj|csv|json)")),
        }
    }
}

/// How to pick the fibers of a spec for export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SampleGrid {
    /// Bialy: `tori` minor radii r = k/(tori+1), each with `circles` evenly
    /// rotated right-handed Villarceau circles.
    Torus { tori: usize, circles: usize },
    /// Hypercomplex construction: seeded random centers in the ball.
    Random { count: usize, seed: u64, bound: f64 },
}

/// Enumerates the fibers selected by a grid over a spec.
pub fn grid_fibers(spec: &FibrationSpec, grid: &SampleGrid) -> Result<Vec<Fiber>, HarnessError> {
    spec.validate()?;
    match (spec, grid) {
        (FibrationSpec::Bialy, SampleGrid::Torus { tori, circles }) => {
            if *tori == 0 || *circles == 0 {
                return Err(HarnessError::InvalidArgument(
                    "torus grid needs at least one torus and one circle".into(),
                ));
            }
            let mut fibers = Vec::with_capacity(tori * circles);
            for i in 0..*tori {
                let r = (i + 1) as f64 / (*tori + 1) as f64;
                for j in 0..*circles {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / *circles as f64;
                    fibers.push(villarceau_fiber(r, phi, Handedness::Right)?);
                }
            }
            Ok(fibers)
        }
        (FibrationSpec::Standard { n }, SampleGrid::Random { count, seed, bound }) => {
            if *count == 0 {
                return Err(HarnessError::InvalidArgument("count must be positive".into()));
            }
            if !(*bound > 0.0 && *bound < 1.0) {
                return Err(HarnessError::InvalidArgument(format!(
                    "bound must lie in (0, 1), got {bound}"
                )));
            }
            let mut rng = rng_from_seed(*seed);
            (0..*count)
                .map(|_| {
                    let y = random_in_ball(&mut rng, n + 1, *bound);
                    standard_fiber(*n, &y, false).map_err(HarnessError::from)
                })
                .collect()
        }
        (FibrationSpec::Stacked { base, interval }, grid) => {
            // base fibers replicated at a few evenly spaced heights
            let inner = grid_fibers(base, grid)?;
            let levels = 5usize;
            let mut fibers = Vec::with_capacity(inner.len() * levels);
            for l in 0..levels {
                let t = interval.0
                    + (interval.1 - interval.0) * (l + 1) as f64 / (levels + 1) as f64;
                for f in &inner {
                    fibers.push(crate::fibration::embed_at_height(f, t));
                }
            }
            Ok(fibers)
        }
        _ => Err(HarnessError::InvalidArgument(
            "grid kind does not match the fibration spec".into(),
        )),
    }
}

/// JSON export payload: the spec, the fiber records and their sample points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportDocument {
    pub schema: u32,
    pub spec: FibrationSpec,
    pub fibers: Vec<ExportedFiber>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportedFiber {
    #[serde(flatten)]
    pub record: FiberRecord,
    pub samples: Vec<Vec<f64>>,
}

/// Writes sampled fiber points in the requested format. Floats are printed
/// with round-trip-exact shortest decimal formatting.
pub fn export_fibers<W: Write>(
    spec: &FibrationSpec,
    grid: &SampleGrid,
    density: usize,
    format: ExportFormat,
    out: &mut W,
) -> Result<usize, HarnessError> {
    if density < 8 {
        return Err(HarnessError::InvalidArgument(format!(
            "density must be at least 8 points per fiber, got {density}"
        )));
    }
    let fibers = grid_fibers(spec, grid)?;
    match format {
        ExportFormat::Obj => {
            if spec.fiber_dim() != 1 || spec.ambient_dim() != 3 {
                return Err(HarnessError::UnsupportedFormat(
                    "obj polylines are only defined for circle fibrations of R^3".into(),
                ));
            }
            let mut vertex_base = 1usize; // obj indices are 1-based
            for (id, fiber) in fibers.iter().enumerate() {
                writeln!(out, "o fiber_{id}")?;
                for p in fiber_samples(fiber, density) {
                    writeln!(out, "v {} {} {}", p[0], p[1], p[2])?;
                }
                write!(out, "l")?;
                for k in 0..density {
                    write!(out, " {}", vertex_base + k)?;
                }
                // close the polyline
                writeln!(out, " {vertex_base}")?;
                vertex_base += density;
            }
        }
        ExportFormat::Csv => {
            let d = spec.ambient_dim();
            write!(out, "fiber_id")?;
            for i in 0..d {
                write!(out, ",x{i}")?;
            }
            writeln!(out)?;
            for (id, fiber) in fibers.iter().enumerate() {
                for p in fiber_samples(fiber, density) {
                    write!(out, "{id}")?;
                    for x in p.iter() {
                        write!(out, ",{x}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
        ExportFormat::Json => {
            let doc = ExportDocument {
                schema: SCHEMA_VERSION,
                spec: spec.clone(),
                fibers: fibers
                    .iter()
                    .map(|f| ExportedFiber {
                        record: f.to_record(),
                        samples: fiber_samples(f, density)
                            .iter()
                            .map(|p| p.iter().cloned().collect())
                            .collect(),
                    })
                    .collect(),
            };
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(fibers.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn campaign_small_all_pass() {
        let r = verify_construction(1, 200, 42, 0.95).unwrap();
        assert_eq!(r.certified_fraction, 1.0);
        assert_eq!(r.linked_fraction, 1.0);
        assert_eq!(r.skew_fraction, 1.0);
        assert!(r.failures.is_empty());
        assert!(r.worst_margins.iter().all(|&m| m > 0.0));
    }

    #[test]
    fn campaign_rejects_zero_pairs() {
        assert!(matches!(
            verify_construction(1, 0, 42, 0.95),
            Err(HarnessError::InvalidArgument(_))
        ));
        assert!(matches!(
            verify_construction(1, 10, 42, 1.5),
            Err(HarnessError::InvalidArgument(_))
        ));
    }

    #[test]
    fn campaign_deterministic() {
        let a = verify_construction(1, 100, 7, 0.9).unwrap();
        let b = verify_construction_with(1, 100, 7, 0.9, false).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn linking_matrix_single_fiber() {
        let f = villarceau_fiber(0.5, 0.0, Handedness::Right).unwrap();
        let m = linking_matrix(&[f]).unwrap();
        assert_eq!(m, vec![vec![LinkVerdict::SelfFiber]]);
    }

    #[test]
    fn linking_matrix_bialy_tori() {
        let fibers: Vec<Fiber> = (1..=9)
            .map(|i| villarceau_fiber(i as f64 / 10.0, 0.0, Handedness::Right).unwrap())
            .collect();
        let m = linking_matrix(&fibers).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                if i == j {
                    assert_eq!(m[i][j], LinkVerdict::SelfFiber);
                } else {
                    assert_eq!(m[i][j], LinkVerdict::Linked, "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn linking_matrix_duplicate_fiber_errors_entry() {
        let f = villarceau_fiber(0.5, 0.0, Handedness::Right).unwrap();
        let m = linking_matrix(&[f.clone(), f]).unwrap();
        assert!(matches!(m[0][1], LinkVerdict::Error(_)));
    }

    #[test]
    fn export_obj_bialy() {
        let mut buf = Vec::new();
        let count = export_fibers(
            &FibrationSpec::Bialy,
            &SampleGrid::Torus { tori: 2, circles: 3 },
            16,
            ExportFormat::Obj,
            &mut buf,
        )
        .unwrap();
        assert_eq!(count, 6);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 96);
        assert_eq!(text.lines().filter(|l| l.starts_with("l")).count(), 6);
    }

    #[test]
    fn export_obj_rejected_for_higher_spheres() {
        let mut buf = Vec::new();
        let err = export_fibers(
            &FibrationSpec::standard(3).unwrap(),
            &SampleGrid::Random {
                count: 2,
                seed: 1,
                bound: 0.5,
            },
            16,
            ExportFormat::Obj,
            &mut buf,
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::UnsupportedFormat(_)));
    }

    #[test]
    fn export_density_floor() {
        let mut buf = Vec::new();
        assert!(matches!(
            export_fibers(
                &FibrationSpec::Bialy,
                &SampleGrid::Torus { tori: 1, circles: 1 },
                4,
                ExportFormat::Csv,
                &mut buf,
            ),
            Err(HarnessError::InvalidArgument(_))
        ));
    }

    #[test]
    fn export_json_round_trip() {
        let mut buf = Vec::new();
        export_fibers(
            &FibrationSpec::Bialy,
            &SampleGrid::Torus { tori: 1, circles: 2 },
            8,
            ExportFormat::Json,
            &mut buf,
        )
        .unwrap();
        let doc: ExportDocument = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc.schema, SCHEMA_VERSION);
        assert_eq!(doc.fibers.len(), 2);
        for ef in &doc.fibers {
            let f = Fiber::from_record(&ef.record).unwrap();
            let again = villarceau_fiber(0.5, 0.0, Handedness::Right).unwrap();
            // same torus radius family; just confirm exact record round trip
            assert_eq!(f.to_record(), ef.record);
            let _ = again;
            for p in &ef.samples {
                let pv = DVector::from_column_slice(p);
                assert!(((pv - f.center()).norm() - 1.0).abs() < 1e-9);
            }
        }
    }
}
