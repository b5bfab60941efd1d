use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fractal_copula::io::{self, Shading};
use fractal_copula::markov::{self, Step};
use fractal_copula::{factorize, patch, rat, sample};
use fractal_copula::{DependenceKind, Error, PatchedCopula, Rational, TransformationMatrix};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::display::{decimal, exact, index_set, status};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Library(#[from] Error),
}

impl Failure {
    /// 1 usage or parse, 2 mathematical precondition, 3 verification.
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Precondition(_) => 2,
            Failure::Verification(_) => 3,
            Failure::Library(Error::Parse { .. } | Error::Io(_)) => 1,
            Failure::Library(Error::FactorizationMismatch { .. }) => 3,
            Failure::Library(_) => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<TransformationMatrix, Failure> {
    let text = read(path)?;
    io::parse_matrix(&text).map_err(|e| match e {
        Error::Parse { .. } => Failure::Usage(format!("{}: {e}", path.display())),
        other => Failure::Precondition(format!("{}: {other}", path.display())),
    })
}

fn rank_message(a: &TransformationMatrix) -> Option<String> {
    let d = a.invariant_pairs();
    (0..d.len()).find(|&n| d.block_rank(n) > 1).map(|n| {
        let b = &d.blocks()[n];
        format!(
            "pair {} (columns {}, rows {}) has rank {}",
            n + 1,
            index_set(&b.columns),
            index_set(&b.rows),
            d.block_rank(n)
        )
    })
}

fn kind_name(kind: DependenceKind) -> &'static str {
    match kind {
        DependenceKind::Left => "left (one positive entry per column)",
        DependenceKind::Right => "right (one positive entry per row)",
        DependenceKind::Both => "left and right (a permutation pattern)",
        DependenceKind::Neither => "neither",
    }
}

pub fn decompose(path: &Path) -> Result<(), Failure> {
    let a = load_matrix(path)?;
    let d = a.invariant_pairs();
    let (s1, s2) = a.sobolev_scalings();
    let r2 = a.contraction_factor();
    let mut out = String::new();
    let _ = writeln!(out, "matrix: {} columns x {} rows (columns numbered from the left, rows from the bottom)", a.columns(), a.rows());
    let _ = writeln!(out, "invariant pairs: {}", d.len());
    for (n, b) in d.blocks().iter().enumerate() {
        let rank = d.block_rank(n);
        let _ = writeln!(
            out,
            "  pair {}: columns {}, rows {}, mass {}, rank {rank}",
            n + 1,
            index_set(&b.columns),
            index_set(&b.rows),
            exact(&b.mass)
        );
    }
    let _ = writeln!(out, "contraction factor r^2: {}", exact(&r2));
    let _ = writeln!(out, "  d/du scaling: {}", exact(&s1));
    let _ = writeln!(out, "  d/dv scaling: {}", exact(&s2));
    let contracting = if r2 < Rational::one() { "yes" } else { "no" };
    let _ = writeln!(out, "strict contraction: {contracting}");
    let _ = writeln!(out, "complete dependence: {}", kind_name(a.dependence_kind()));
    match rank_message(&a) {
        None => {
            let _ = writeln!(out, "rank-one factorizable: yes");
        }
        Some(msg) => {
            let _ = writeln!(out, "rank-one factorizable: no, {msg}");
        }
    }
    print!("{out}");
    Ok(())
}

fn parse_seed(spec: &str) -> Result<PatchedCopula, Failure> {
    let grid = |n: &str| {
        n.parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Failure::Usage(format!("bad grid size in seed `{spec}`")))
    };
    match spec.split_once(':') {
        None if spec == "pi" => Ok(PatchedCopula::independence()),
        Some(("mgrid", n)) => Ok(PatchedCopula::diagonal(grid(n)?)),
        Some(("wgrid", n)) => Ok(PatchedCopula::antidiagonal(grid(n)?)),
        _ => Err(Failure::Usage(format!("unknown seed `{spec}` (expected pi, mgrid:n or wgrid:n)"))),
    }
}

pub fn fixpoint(path: &Path, depth: usize, seed: &str, out: Option<&Path>, report_norms: bool) -> Result<(), Failure> {
    let a = load_matrix(path)?;
    let mut cur = parse_seed(seed)?;
    let r2 = a.contraction_factor();
    let mut table = String::new();
    let _ = writeln!(table, "r^2 = {}", exact(&r2));
    let mut previous: Option<Rational> = None;
    let mut first: Option<Rational> = None;
    for step in 1..=depth {
        let next = patch::apply(&a, &cur);
        let dist = cur.sobolev_distance(&next);
        let total = dist.total();
        let _ = write!(table, "step {step}: dist^2 = {}", exact(&total));
        if report_norms {
            let _ = write!(table, ", d/du part = {}, d/dv part = {}", exact(&dist.d1sq), exact(&dist.d2sq));
        }
        match &previous {
            Some(p) if !p.is_zero() => {
                let ratio2 = &total / p;
                let _ = write!(table, ", ratio^2 = {}, ratio ~ {:.6}", exact(&ratio2), fractal_copula::to_f64(&ratio2).sqrt());
            }
            Some(_) => {
                let _ = write!(table, ", ratio^2 = n/a (previous step is zero)");
            }
            None => {}
        }
        table.push('\n');
        first.get_or_insert_with(|| total.clone());
        previous = Some(total);
        cur = next;
    }
    if report_norms {
        match first.as_ref().and_then(|f| patch::apriori_bound_sq(&r2, f, depth)) {
            Some(bound) => {
                let _ = writeln!(table, "a-priori bound on |C_d - C_A|^2: {}", exact(&bound));
            }
            None => {
                let _ = writeln!(table, "a-priori bound: n/a");
            }
        }
    }
    let _ = writeln!(table, "cells: {} x {}", cur.x_cells(), cur.y_cells());
    let text = io::write_copula(&cur);
    match out {
        Some(path) => {
            write(path, text)?;
            print!("{table}");
            println!("wrote {}", path.display());
        }
        None => {
            eprint!("{table}");
            print!("{text}");
        }
    }
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn factorize(path: &Path, depth: usize, prefix: &Path) -> Result<(), Failure> {
    let a = load_matrix(path)?;
    if let Some(msg) = rank_message(&a) {
        return Err(Failure::Precondition(format!("cannot factorize: {msg}")));
    }
    let (l, r) = factorize::build_lr(&a)?;
    println!("L ({} columns x {} rows):", l.columns(), l.rows());
    print!("{}", io::write_matrix(&l));
    println!("R ({} columns x {} rows):", r.columns(), r.rows());
    print!("{}", io::write_matrix(&r));
    let fx = factorize::factor_fixpoints(&a, depth)?;
    for (suffix, c) in [("-left.txt", &fx.left), ("-right.txt", &fx.right), ("-product.txt", &fx.product)] {
        let file = with_suffix(prefix, suffix);
        write(&file, io::write_copula(c))?;
        println!("wrote {} ({} x {} cells)", file.display(), c.x_cells(), c.y_cells());
    }
    println!("PASS: [L]^{depth}(Pi) * [R]^{depth}(Pi) = [A]^{depth}(Pi) exactly");
    Ok(())
}

enum Check {
    Pass(String),
    Fail(String),
    Skip(String),
    NotApplicable(String),
}

impl Check {
    fn from_bool(ok: bool, detail: String) -> Self {
        if ok {
            Check::Pass(detail)
        } else {
            Check::Fail(detail)
        }
    }
}

fn random_step<R: Rng>(rng: &mut R, breaks: &[Rational], lo: i64) -> Step {
    let values = (0..breaks.len() - 1).map(|_| rat(rng.random_range(lo..=9), rng.random_range(1..=4))).collect();
    Step::new(breaks.to_vec(), values).expect("values match the mesh")
}

fn markov_axioms<R: Rng>(c: &PatchedCopula, rng: &mut R) -> Result<Check, Error> {
    let trials = 20;
    let ones = markov::operator_apply(c, &Step::constant(c.y_breaks(), Rational::one()))?;
    let ones_adj = markov::operator_apply_adjoint(c, &Step::constant(c.x_breaks(), Rational::one()))?;
    let mut ok = ones.values().iter().all(One::is_one) && ones_adj.values().iter().all(One::is_one);
    for _ in 0..trials {
        let psi = random_step(rng, c.y_breaks(), -9);
        let phi = random_step(rng, c.x_breaks(), -9);
        let t_psi = markov::operator_apply(c, &psi)?;
        ok &= t_psi.integral() == psi.integral();
        ok &= phi.inner(&t_psi)? == markov::operator_apply_adjoint(c, &phi)?.inner(&psi)?;
        let pos = random_step(rng, c.y_breaks(), 0);
        ok &= markov::operator_apply(c, &pos)?.values().iter().all(|v| !v.is_negative());
    }
    Ok(Check::from_bool(ok, format!("unit, integral, positivity and adjoint on {trials} random steps")))
}

fn scaling_check<R: Rng>(a: &TransformationMatrix, rng: &mut R) -> Check {
    let (s1, s2) = a.sobolev_scalings();
    let xb = sample::random_partition(rng, 4);
    let yb = sample::random_partition(rng, 4);
    let c = sample::random_copula_on(rng, &xb, &yb);
    let d = sample::random_copula_on(rng, &xb, &yb);
    let base = c.sobolev_distance(&d);
    let patched = patch::apply(a, &c).sobolev_distance(&patch::apply(a, &d));
    Check::from_bool(
        patched.d1sq == s1 * base.d1sq && patched.d2sq == s2 * base.d2sq,
        "distance of patched random copulas equals the scaled distance".into(),
    )
}

pub fn verify(path: &Path, depth: usize) -> Result<(), Failure> {
    let a = load_matrix(path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let dec = a.invariant_pairs();
    let pi = PatchedCopula::independence();
    let iterates: Vec<PatchedCopula> = std::iter::successors(Some(pi.clone()), |c| Some(patch::apply(&a, c)))
        .take(depth + 2)
        .collect();
    let c = &iterates[depth];
    let r2 = a.contraction_factor();
    let mut checks: Vec<(&str, Check)> = Vec::new();

    checks.push(("markov axioms", markov_axioms(c, &mut rng)?));

    let atoms = markov::sigma_atoms(c);
    let want = dec.len().pow(depth as u32);
    checks.push((
        "sigma-atom count",
        Check::from_bool(atoms.len() == want, format!("{} atoms, expected N^d = {want}", atoms.len())),
    ));
    let largest_block = dec.blocks().iter().map(|b| b.mass.clone()).max().expect("at least one block");
    let want_max = num_traits::pow(largest_block.clone(), depth);
    let got_max = atoms.iter().map(|s| s.measure.clone()).max().expect("at least one atom");
    checks.push((
        "sigma-atom max measure",
        Check::from_bool(got_max == want_max, format!("{}, expected {}", exact(&got_max), exact(&want_max))),
    ));
    checks.push((
        "non-atomicity",
        if dec.len() >= 2 {
            Check::Pass(format!("{} pairs, atom measures shrink like ({})^d", dec.len(), largest_block))
        } else {
            Check::NotApplicable("a single invariant pair: atoms do not shrink".into())
        },
    ));

    let (f, g) = markov::build_implicit_pair(&dec, depth);
    let report = markov::verify_markov_factorization(c, &f, &g, 100, &mut rng)?;
    checks.push((
        "implicit pair transport",
        Check::from_bool(
            report.passed(),
            format!(
                "{} target cells, {} unions, {} steps{}",
                report.cells_checked,
                report.unions_checked,
                report.steps_checked,
                report.failures.first().map(|m| format!("; {m}")).unwrap_or_default()
            ),
        ),
    ));
    let gm = markov::graph_mass(c, &f, &g, depth as u32)?;
    checks.push(("graph mass", Check::from_bool(gm.is_one(), format!("mu(graph f = g) = {}", exact(&gm)))));

    checks.push(("sobolev scaling", scaling_check(&a, &mut rng)));
    let steps: Vec<Rational> = iterates.windows(2).map(|w| w[0].sobolev_distance(&w[1]).total()).collect();
    checks.push((
        "step contraction",
        if r2 < Rational::one() {
            let ok = steps.windows(2).all(|w| w[1] <= &r2 * &w[0]);
            Check::from_bool(ok, format!("{} successive ratios^2 <= r^2 = {}", steps.len() - 1, exact(&r2)))
        } else {
            Check::NotApplicable(format!("r^2 = {r2}, not a strict contraction"))
        },
    ));

    match rank_message(&a) {
        Some(msg) => {
            checks.push(("product identity", Check::Skip(format!("rank: {msg}"))));
            checks.push(("factor invertibility", Check::Skip("rank".into())));
        }
        None => {
            let fx = factorize::factor_fixpoints(&a, depth);
            let (ok, detail) = match &fx {
                Ok(_) => (true, format!("[L]^{depth}(Pi) * [R]^{depth}(Pi) = [A]^{depth}(Pi)")),
                Err(e) => (false, e.to_string()),
            };
            checks.push(("product identity", Check::from_bool(ok, detail)));
            if let Ok(fx) = fx {
                let left = factorize::left_invertibility_check(&fx.left).passed;
                let right = factorize::right_invertibility_check(&fx.right).passed;
                checks.push((
                    "factor invertibility",
                    Check::from_bool(left && right, "C_L^t * C_L and C_R * C_R^t are block-uniform".into()),
                ));
            }
        }
    }

    let mut failed = 0;
    println!("verify at depth {depth} ({} x {} cells)", c.x_cells(), c.y_cells());
    for (name, check) in &checks {
        let (tag, detail) = match check {
            Check::Pass(d) => (status(true), d),
            Check::Fail(d) => {
                failed += 1;
                (status(false), d)
            }
            Check::Skip(d) => ("SKIP", d),
            Check::NotApplicable(d) => ("N/A", d),
        };
        println!("{tag:<4} {name}: {detail}");
    }
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} checks failed")));
    }
    println!("all checks passed (decimal of r^2: {})", decimal(&r2));
    Ok(())
}

fn parse_size(size: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("bad size `{size}` (expected WxH with positive integers)"));
    let (w, h) = size.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.parse().map_err(|_| bad())?;
    let h: usize = h.parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

pub fn render(path: &Path, pgm: bool, size: Option<&str>, threshold: Option<&str>, out: &Path) -> Result<(), Failure> {
    let text = read(path)?;
    let c = io::parse_copula(&text).map_err(|e| match e {
        Error::Parse { .. } => Failure::Usage(format!("{}: {e}", path.display())),
        other => Failure::Precondition(format!("{}: {other}", path.display())),
    })?;
    if pgm {
        let (w, h) = parse_size(size.ok_or_else(|| Failure::Usage("--size WxH is required for PGM output".into()))?)?;
        let shading = match threshold {
            None => Shading::Density,
            Some(t) => {
                let t = io::parse_rational(t)
                    .filter(|t| !t.is_negative())
                    .ok_or_else(|| Failure::Usage(format!("bad threshold `{t}` (expected a nonnegative a/b)")))?;
                Shading::Threshold(t)
            }
        };
        write(out, io::render_pgm(&c, w, h, &shading))?;
        println!("wrote {} ({w}x{h} PGM)", out.display());
    } else {
        if threshold.is_some() {
            return Err(Failure::Usage("--threshold applies to PGM output only".into()));
        }
        let csv = io::render_csv(&c);
        write(out, &csv)?;
        println!("wrote {} ({} cells)", out.display(), csv.lines().count());
    }
    Ok(())
}
