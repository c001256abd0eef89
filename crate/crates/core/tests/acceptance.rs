//! Acceptance suite. Runs every criterion in sequence (timings are not
//! disturbed by parallel tests), prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::cmp::Ordering;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Pow, Zero};

use mst_core::datagen::{
    generate_dataset, verify_sample, EntityTable, GenConfig, MstSample, PromptSet, Split, TaskKind,
};
use mst_core::measure_text::rule_convert_text;
use mst_core::model::gradcheck::finite_difference_check;
use mst_core::model::{
    init_model, loss_and_gradients, prepare, run_seeds, Encoder, ModelConfig, Partition, RunOutput, TrainConfig,
    Vocab,
};
use mst_core::numerics::{convert_notation, render, sample_number, Notation, NumberRange};
use mst_core::units::{quantities_equal, Measurement, UnitInventory};

// Pinned tolerances and budgets.
const ORACLE_SAMPLES_PER_TASK: usize = 10_000;
const ORACLE_BUDGET: Duration = Duration::from_secs(120);
const DIST_SCALE: f64 = 0.1;
const DIST_BUDGET: Duration = Duration::from_secs(300);
const COMPARISON_TARGET: f64 = 0.50;
const COMPARISON_TOL: f64 = 0.02;
const THIRD_TOL: f64 = 0.02;
const SAME_TARGET: f64 = 0.49;
const SAME_TOL: f64 = 0.03;
const NORMAL_TARGET: f64 = 0.575;
const NORMAL_TOL: f64 = 0.02;
const RANGE_DRAWS: usize = 1_000_000;
const PROBE_TRAIN: usize = 20_000;
const PROBE_VALID: usize = 2_000;
const PROBE_TEST: usize = 2_000;
const PROBE_SEEDS: [u64; 3] = [1, 2, 3];
const SCALE_MIN_ACC: f64 = 0.60;
const SCALE_MIN_GAIN: f64 = 0.05;
const NO_SCALE_MIN_ACC: f64 = 0.50;
const SCALE_BUDGET: Duration = Duration::from_secs(30 * 60);
const SORT_LOW: f64 = 0.26;
const SORT_HIGH: f64 = 0.41;
const GRAD_REL_TOL: f64 = 1e-4;
const GRAD_STEP: f64 = 1e-5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------------------
// Independent exact re-derivation of labels from the serialized records.

/// Decimal or `d.ddE±xx` text as `mantissa * 10^exponent`.
fn parse_exact(text: &str) -> Option<(BigInt, i64)> {
    let (body, exp) = match text.split_once('E') {
        Some((b, e)) => (b, e.parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    Some((digits.parse().ok()?, exp - frac.len() as i64))
}

const ATOMS: [&str; 15] = ["IU", "Eq", "hr", "min", "m", "A", "K", "M", "g", "U", "l", "L", "s", "#", "k"];

fn prefix_exp(c: &str) -> Option<i64> {
    Some(match c {
        "f" => -15,
        "p" => -12,
        "n" => -9,
        "µ" | "μ" => -6,
        "m" => -3,
        "c" => -2,
        "d" => -1,
        _ => return None,
    })
}

fn unit_part(part: &str) -> Option<(String, i64)> {
    let norm = |a: &str| if a == "L" { "l".to_string() } else { a.to_string() };
    if ATOMS.contains(&part) {
        return Some((norm(part), 0));
    }
    let first = part.chars().next()?;
    let rest = &part[first.len_utf8()..];
    if ATOMS.contains(&rest) {
        return Some((norm(rest), prefix_exp(&part[..first.len_utf8()])?));
    }
    None
}

/// (dimension, value mantissa, value exponent) in base units.
fn quantity(value: &str, unit: &str) -> Option<(String, BigInt, i64)> {
    let (m, e) = parse_exact(value)?;
    let (num, den) = unit.split_once('/').map_or((unit, None), |(a, b)| (a, Some(b)));
    let (na, ne) = unit_part(num)?;
    let (da, de) = match den {
        Some(d) => unit_part(d)?,
        None => (String::new(), 0),
    };
    Some((format!("{na}/{da}"), m, e + ne - de))
}

fn cmp_q(a: &(String, BigInt, i64), b: &(String, BigInt, i64)) -> Option<Ordering> {
    if a.0 != b.0 {
        return None;
    }
    let low = a.2.min(b.2);
    let ten = BigInt::from(10);
    let x = &a.1 * Pow::pow(&ten, (a.2 - low) as u64);
    let y = &b.1 * Pow::pow(&ten, (b.2 - low) as u64);
    Some(x.cmp(&y))
}

fn independent_label(s: &MstSample) -> Option<&'static str> {
    let q: Vec<_> = s.measurements.iter().map(|r| quantity(&r.value, &r.unit)).collect::<Option<_>>()?;
    match s.task {
        TaskKind::Comparison => match cmp_q(&q[0], &q[1])? {
            Ordering::Less => Some("smaller"),
            Ordering::Greater => Some("larger"),
            Ordering::Equal => None,
        },
        TaskKind::UnitConversion => Some(if cmp_q(&q[0], &q[1])? == Ordering::Equal { "same" } else { "different" }),
        TaskKind::ArgMinMax => {
            let (list, target) = q.split_at(q.len() - 1);
            let below = list.iter().filter(|x| cmp_q(x, &target[0]) == Some(Ordering::Less)).count();
            let above = list.iter().filter(|x| cmp_q(x, &target[0]) == Some(Ordering::Greater)).count();
            if below + above + 1 != list.len() {
                return None;
            }
            Some(if below == 0 {
                "smallest"
            } else if above == 0 {
                "largest"
            } else {
                "middle"
            })
        }
        TaskKind::Sorting => {
            let (input, output) = q.split_at(q.len() / 2);
            let mut a: Vec<_> = input.iter().map(|x| (&x.0, x.1.clone() * BigInt::from(10).pow((x.2 + 40) as u64))).collect();
            let mut b: Vec<_> = output.iter().map(|x| (&x.0, x.1.clone() * BigInt::from(10).pow((x.2 + 40) as u64))).collect();
            a.sort();
            b.sort();
            if a != b {
                return None;
            }
            let steps: Vec<Ordering> = output.windows(2).map(|w| cmp_q(&w[0], &w[1])).collect::<Option<_>>()?;
            if steps.iter().all(|&o| o == Ordering::Less) {
                Some("increasing")
            } else if steps.iter().all(|&o| o == Ordering::Greater) {
                Some("decreasing")
            } else if steps.contains(&Ordering::Equal) {
                None
            } else {
                Some("random")
            }
        }
        TaskKind::RefRange => {
            let inside = cmp_q(&q[0], &q[1])? != Ordering::Less && cmp_q(&q[0], &q[2])? != Ordering::Greater;
            Some(if inside { "normal" } else { "abnormal" })
        }
    }
}

fn in_range_exact(text: &str, low_exp: i64, high_exp: i64) -> bool {
    let Some((m, e)) = parse_exact(text) else { return false };
    if m.is_zero() {
        return false;
    }
    let ten = BigInt::from(10);
    // Compare m * 10^e against 10^low and 10^high on a common exponent.
    let base = e.min(low_exp);
    let v = &m * Pow::pow(&ten, (e - base) as u64);
    let lo = Pow::pow(&ten, (low_exp - base) as u64);
    let hi = Pow::pow(&ten, (high_exp - base) as u64);
    v >= lo && v < hi
}

// ---------------------------------------------------------------------------

fn oracle_soundness() -> Outcome {
    let start = Instant::now();
    let inv = UnitInventory::builtin();
    let mut checked = 0;
    let mut disagreements = Vec::new();
    for task in TaskKind::ALL {
        for notation in Notation::ALL {
            let per = ORACLE_SAMPLES_PER_TASK / 2;
            let counts = [per * 6 / 10, per / 10, per / 10, per / 10, per / 10];
            let cfg = GenConfig::new(task, PromptSet::Base, notation, 2024).with_counts(counts);
            let ds = generate_dataset(&cfg).expect("generation");
            for (_, samples) in &ds.splits {
                for s in samples {
                    checked += 1;
                    let ok = independent_label(s) == Some(s.answer.as_str()) && verify_sample(s, inv).is_ok();
                    if !ok {
                        disagreements.push(s.id.clone());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        disagreements.is_empty() && checked == 5 * ORACLE_SAMPLES_PER_TASK && elapsed < ORACLE_BUDGET,
        format!(
            "{checked} samples, {} disagreements{}, {:.1}s (budget {}s)",
            disagreements.len(),
            disagreements.first().map_or(String::new(), |d| format!(" e.g. {d}")),
            elapsed.as_secs_f64(),
            ORACLE_BUDGET.as_secs()
        ),
    )
}

fn string_fidelity() -> Outcome {
    let text = rule_convert_text("2.5mg is [MASK] than 3.8g");
    let sci = convert_notation("32.6", Notation::Scientific).unwrap_or_default();
    let back = convert_notation(&sci, Notation::Decimal).unwrap_or_default();
    let eq = quantities_equal(&Measurement::parse("3.5g").unwrap(), &Measurement::parse("3500mg").unwrap()).unwrap_or(false);
    outcome(
        text == "0.0025g is [MASK] than 3.8g" && sci == "3.26E+01" && back == "32.6" && eq,
        format!("convert={text:?} sci={sci:?} back={back:?} 3.5g==3500mg:{eq}"),
    )
}

fn fraction(samples: &[MstSample], label: &str) -> f64 {
    samples.iter().filter(|s| s.answer == label).count() as f64 / samples.len() as f64
}

fn distributions() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut check = |name: String, got: f64, target: f64, tol: f64| {
        let good = (got - target).abs() <= tol;
        ok &= good;
        parts.push(format!("{name}={got:.3}{}", if good { "" } else { "(!)" }));
    };
    for task in TaskKind::ALL {
        let cfg = GenConfig::new(task, PromptSet::Base, Notation::Decimal, 7).with_scale(DIST_SCALE);
        let ds = generate_dataset(&cfg).expect("generation");
        let train = ds.split(Split::Train);
        match task {
            TaskKind::Comparison => check("comp.smaller".into(), fraction(train, "smaller"), COMPARISON_TARGET, COMPARISON_TOL),
            TaskKind::ArgMinMax => {
                for l in ["smallest", "middle", "largest"] {
                    check(format!("arg.{l}"), fraction(train, l), 1.0 / 3.0, THIRD_TOL);
                }
            }
            TaskKind::Sorting => {
                for l in ["increasing", "decreasing", "random"] {
                    check(format!("sort.{l}"), fraction(train, l), 1.0 / 3.0, THIRD_TOL);
                }
            }
            TaskKind::UnitConversion => check("unit.same".into(), fraction(train, "same"), SAME_TARGET, SAME_TOL),
            TaskKind::RefRange => check("ref.normal".into(), fraction(train, "normal"), NORMAL_TARGET, NORMAL_TOL),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && elapsed < DIST_BUDGET,
        format!("{}, {:.1}s (budget {}s)", parts.join(" "), elapsed.as_secs_f64(), DIST_BUDGET.as_secs()),
    )
}

fn range_discipline() -> Outcome {
    let mut rng = mst_core::datagen::generate::substream(99, &[1]);
    let mut violations = [0usize; 2];
    for (k, (range, lo, hi)) in [(NumberRange::INTERPOLATION, -2, 2), (NumberRange::EXTRAPOLATION, -3, 3)].into_iter().enumerate() {
        for i in 0..RANGE_DRAWS {
            let n = sample_number(range, &mut rng);
            let notation = if i % 2 == 0 { Notation::Decimal } else { Notation::Scientific };
            let text = render(&n, notation).expect("render");
            if !in_range_exact(&text, lo, hi) {
                violations[k] += 1;
            }
        }
    }
    outcome(
        violations == [0, 0],
        format!("{RANGE_DRAWS} draws per range, violations interp={} extrap={}", violations[0], violations[1]),
    )
}

fn probe_data(task: TaskKind) -> (Vec<MstSample>, Vec<MstSample>, Vec<MstSample>) {
    let counts = [PROBE_TRAIN, PROBE_VALID, 1, PROBE_TEST, 1];
    let cfg = GenConfig::new(task, PromptSet::Base, Notation::Decimal, 11).with_counts(counts);
    let ds = generate_dataset(&cfg).expect("generation");
    (ds.split(Split::Train).to_vec(), ds.split(Split::ValidIn).to_vec(), ds.split(Split::TestIn).to_vec())
}

fn probe(task: TaskKind, scale: bool, vocab: &Vocab) -> RunOutput {
    let (train, valid, test) = probe_data(task);
    let mut m = ModelConfig::desk();
    if scale {
        m = m.with_scale(16);
    }
    let t = TrainConfig { seeds: PROBE_SEEDS.to_vec(), ..TrainConfig::desk() };
    run_seeds("scratch", &train, &valid, &[(Split::TestIn, &test)], vocab, &m, &t).expect("training")
}

fn mean_test_in(out: &RunOutput) -> f64 {
    out.report.split(Split::TestIn).expect("test_in").mean
}

fn per_seed(out: &RunOutput) -> String {
    let s = out.report.split(Split::TestIn).expect("test_in");
    s.per_seed.iter().map(|(_, a)| format!("{a:.3}")).collect::<Vec<_>>().join("/")
}

fn gradient_validity(vocab: &Vocab, runs: &[&RunOutput]) -> Outcome {
    let cfg = ModelConfig { layers: 2, hidden: 16, heads: 4, ffn: 32, max_seq_len: 128, ..ModelConfig::desk() }.with_scale(16);
    let mut model: Encoder<f64> = init_model(&cfg, vocab.len(), 5).expect("init");
    model.scale = ndarray::Array2::from_shape_fn((17, 16), |(r, c)| if r == 0 { 0.0 } else { 0.03 * (((r * 5 + c * 3) % 7) as f64 - 3.0) });
    let mut worst: f64 = 0.0;
    let mut backbone_zero = true;
    let mut unused_zero = true;
    for (task, set) in [(TaskKind::Comparison, PromptSet::Base), (TaskKind::ArgMinMax, PromptSet::Label)] {
        let g = GenConfig::new(task, set, Notation::Decimal, 3).with_counts([6, 1, 1, 1, 1]);
        let ds = generate_dataset(&g).expect("generation");
        let ex = prepare(ds.split(Split::Train), vocab, Some(16)).expect("prepare");
        let r = finite_difference_check(&model, &ex, 16, GRAD_STEP, 1).expect("gradcheck");
        worst = worst.max(r.max_rel_error());
        backbone_zero &= r.backbone_grad_max_abs == 0.0;
        unused_zero &= r.unused_scale_rows_zero;
        let (_, grads) = loss_and_gradients(&model, &ex).expect("gradients");
        backbone_zero &= grads
            .params()
            .into_iter()
            .filter(|(_, p, _, _)| *p == Partition::Backbone)
            .all(|(_, _, _, d)| d.iter().all(|&x| x == 0.0));
    }
    let seeds: Vec<_> = runs.iter().flat_map(|r| r.seeds.iter()).collect();
    let immutable = seeds.iter().all(|s| s.backbone_before == s.backbone_after);
    outcome(
        worst < GRAD_REL_TOL && backbone_zero && unused_zero && immutable,
        format!(
            "max rel err {worst:.2e} (tol {GRAD_REL_TOL:.0e}), backbone grads zero:{backbone_zero}, unused scale rows zero:{unused_zero}, backbone unchanged in {} runs:{immutable}",
            seeds.len()
        ),
    )
}

fn mst_bin() -> &'static str {
    env!("CARGO_BIN_EXE_mst")
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(mst_bin()).args(args).output().map(|o| o.status.success()).unwrap_or(false)
}

fn files_equal(a: &Path, b: &Path) -> bool {
    let list = |d: &Path| {
        let mut v: Vec<_> = walk(d).into_iter().map(|p| p.strip_prefix(d).unwrap().to_path_buf()).collect();
        v.sort();
        v
    };
    let (la, lb) = (list(a), list(b));
    !la.is_empty() && la == lb && la.iter().all(|p| std::fs::read(a.join(p)).ok() == std::fs::read(b.join(p)).ok())
}

fn walk(d: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(d).into_iter().flatten().flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().expect("tempdir");
    let d = |s: &str| tmp.path().join(s);
    let gen = |out: &Path| {
        run_cli(&["gen", "--task", "sorting", "--seed", "7", "--scale", "0.02", "--out", out.to_str().unwrap()])
            && run_cli(&["gen", "--task", "ref_range", "--prompt-set", "context", "--seed", "7", "--scale", "0.02", "--out", out.to_str().unwrap()])
    };
    let gen_ok = gen(&d("g1")) && gen(&d("g2"));
    let gen_same = gen_ok && files_equal(&d("g1"), &d("g2"));
    let data = d("g1").join("sorting/base/decimal");
    let train = |out: &Path| {
        run_cli(&[
            "--jobs", "1", "train", "--data", data.to_str().unwrap(), "--out", out.to_str().unwrap(),
            "--scale-embedding", "--seeds", "1,2", "--epochs", "3", "--train-limit", "1500", "--valid-limit", "300",
        ])
    };
    let train_ok = train(&d("t1")) && train(&d("t2"));
    let r1 = std::fs::read(d("t1").join("report.csv")).ok();
    let report_same = train_ok && r1.is_some() && r1 == std::fs::read(d("t2").join("report.csv")).ok();
    let ckpt_same = train_ok && std::fs::read(d("t1").join("seed-1.ckpt")).ok() == std::fs::read(d("t2").join("seed-1.ckpt")).ok();
    outcome(
        gen_same && report_same && ckpt_same,
        format!("gen byte-identical:{gen_same}, eval reports identical:{report_same}, checkpoints identical:{ckpt_same}"),
    )
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    let mut record = |id: u8, name: &'static str, o: Outcome| {
        println!("{} {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };
    record(1, "oracle-soundness", oracle_soundness());
    record(2, "string-fidelity", string_fidelity());
    record(3, "distributions", distributions());
    record(4, "range-discipline", range_discipline());

    let vocab = Vocab::standard(UnitInventory::builtin(), &EntityTable::bundled());
    let start = Instant::now();
    let plain = probe(TaskKind::Comparison, false, &vocab);
    let scaled = probe(TaskKind::Comparison, true, &vocab);
    let elapsed = start.elapsed();
    let (a_plain, a_scaled) = (mean_test_in(&plain), mean_test_in(&scaled));
    record(
        5,
        "scale-embedding-direction",
        outcome(
            a_scaled >= SCALE_MIN_ACC && a_scaled >= a_plain + SCALE_MIN_GAIN && a_plain >= NO_SCALE_MIN_ACC && elapsed < SCALE_BUDGET,
            format!(
                "test_in scale {a_scaled:.3} [{}] vs no-scale {a_plain:.3} [{}], {:.0}s (budget {}s)",
                per_seed(&scaled),
                per_seed(&plain),
                elapsed.as_secs_f64(),
                SCALE_BUDGET.as_secs()
            ),
        ),
    );

    let sort_plain = probe(TaskKind::Sorting, false, &vocab);
    let sort_scaled = probe(TaskKind::Sorting, true, &vocab);
    let (s_plain, s_scaled) = (mean_test_in(&sort_plain), mean_test_in(&sort_scaled));
    let within = |x: f64| (SORT_LOW..=SORT_HIGH).contains(&x);
    record(
        6,
        "scratch-sorting",
        outcome(
            within(s_plain) && within(s_scaled),
            format!("test_in no-scale {s_plain:.3} [{}], scale {s_scaled:.3} [{}]", per_seed(&sort_plain), per_seed(&sort_scaled)),
        ),
    );

    record(7, "gradient-validity", gradient_validity(&vocab, &[&plain, &scaled, &sort_plain, &sort_scaled]));
    record(8, "determinism", determinism());

    let failed: Vec<_> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} passed, {} failed", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
