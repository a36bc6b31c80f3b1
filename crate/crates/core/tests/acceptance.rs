//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N (...): PASS` line when it holds. Run with
//! `cargo test -p mmt-core --test acceptance -- --nocapture`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use mmt_core::catalog::{Language, LanguageCatalog};
use mmt_core::filter::{BitextRecord, FilterChain, FilterConfig};
use mmt_core::groups::{build_groups, VocabProfile};
use mmt_core::mining;
use mmt_core::router::{self, RouteQuery, Side};
use mmt_core::sampling::{
    sinkhorn_balance, temperature_rescale, MarginalTarget, PairMassMatrix, PairSampler,
};
use mmt_core::shard;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn load_fixture_catalog() -> LanguageCatalog {
    LanguageCatalog::load(
        &fixture("catalog_100.tsv"),
        Some(&fixture("bitext_counts_100.tsv")),
    )
    .expect("fixture catalog loads")
}

// ---------------------------------------------------------------------------
// Independent iterative-proportional-fitting oracle.
//
// Deliberately written on its own representation (nested rows) with the
// opposite scaling order (columns first), so it shares no code path with the
// implementation under test.
// ---------------------------------------------------------------------------

fn ipf_oracle(
    q: &[Vec<f64>],
    target: &[f64],
    tol: f64,
    max_iter: usize,
) -> Option<(Vec<Vec<f64>>, usize)> {
    let l = q.len();
    let mut p: Vec<Vec<f64>> = q.to_vec();
    for iter in 1..=max_iter {
        for j in 0..l {
            let col_sum: f64 = (0..l).map(|i| p[i][j]).sum();
            if col_sum > 0.0 {
                let f = target[j] / col_sum;
                for row in p.iter_mut() {
                    row[j] *= f;
                }
            }
        }
        for (i, row) in p.iter_mut().enumerate() {
            let row_sum: f64 = row.iter().sum();
            if row_sum > 0.0 {
                let f = target[i] / row_sum;
                for v in row.iter_mut() {
                    *v *= f;
                }
            }
        }
        let mut err = 0.0f64;
        for i in 0..l {
            let row_sum: f64 = p[i].iter().sum();
            err = err.max((row_sum - target[i]).abs());
            let col_sum: f64 = (0..l).map(|r| p[r][i]).sum();
            err = err.max((col_sum - target[i]).abs());
        }
        if err < tol {
            return Some((p, iter));
        }
    }
    None
}

/// Random symmetric pair-count instance on a connected support with at least
/// 30% zero entries, plus its T=5 marginal target. Instances whose support
/// cannot carry the target marginals (the oracle itself fails to balance
/// them) are rejected by the caller.
struct Instance {
    matrix: PairMassMatrix,
    target: MarginalTarget,
    raw: Vec<Vec<f64>>,
}

fn random_instance(rng: &mut ChaCha20Rng) -> Instance {
    let l = rng.gen_range(3..=100usize);
    let max_edges = l * (l - 1) / 2;
    // Edge budget keeping zeros >= 30% of all L^2 entries.
    let cap = (0.35 * (l * l) as f64).floor() as usize;
    let lo = (0.28 * (l * l) as f64).floor() as usize;
    let edges_target = if cap >= max_edges {
        max_edges
    } else {
        rng.gen_range(lo.clamp(l, cap)..=cap)
    };

    // Random spanning tree for connectivity, then random extra edges.
    let mut order: Vec<usize> = (0..l).collect();
    order.shuffle(rng);
    let mut chosen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for k in 1..l {
        let a = order[k];
        let b = order[rng.gen_range(0..k)];
        chosen.insert((a.min(b), a.max(b)));
    }
    let mut rest: Vec<(usize, usize)> = Vec::new();
    for i in 0..l {
        for j in i + 1..l {
            if !chosen.contains(&(i, j)) {
                rest.push((i, j));
            }
        }
    }
    rest.shuffle(rng);
    for e in rest {
        if chosen.len() >= edges_target {
            break;
        }
        chosen.insert(e);
    }

    let langs: Vec<String> = (0..l).map(|i| format!("l{i:03}")).collect();
    let mut pairs = Vec::new();
    let mut raw = vec![vec![0.0; l]; l];
    for (i, j) in chosen {
        let count = rng.gen_range(1..=1000) as f64;
        pairs.push((langs[i].clone(), langs[j].clone(), count));
        raw[i][j] = count;
        raw[j][i] = count;
    }
    let matrix = PairMassMatrix::from_pair_counts(langs, &pairs).expect("valid instance");
    let target = matrix.default_target(5.0).expect("positive totals");
    let total: f64 = raw.iter().flatten().sum();
    for row in raw.iter_mut() {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    Instance {
        matrix,
        target,
        raw,
    }
}

#[test]
fn criterion_01_sinkhorn_convergence() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x51CC);
    let mut instances = Vec::with_capacity(200);
    let mut rejected = 0;
    while instances.len() < 200 {
        let inst = random_instance(&mut rng);
        // Feasibility gate by the independent oracle, not the solver under
        // test. Near-tree supports can be parity-locked; those get rejected.
        if ipf_oracle(&inst.raw, &inst.target.probabilities, 1e-7, 2_000).is_some() {
            instances.push(inst);
        } else {
            rejected += 1;
        }
    }
    assert!(
        rejected < 40,
        "generator rejected {rejected} instances; supports are too fragile"
    );

    let started = Instant::now();
    let mut worst_error = 0.0f64;
    let mut worst_iterations = 0usize;
    for inst in &instances {
        let l = inst.matrix.len();
        let zeros = (0..l)
            .flat_map(|i| (0..l).map(move |j| (i, j)))
            .filter(|&(i, j)| inst.matrix.get(i, j) == 0.0)
            .count();
        assert!(
            zeros as f64 >= 0.30 * (l * l) as f64,
            "instance has only {zeros} zeros of {}",
            l * l
        );

        let result = sinkhorn_balance(&inst.matrix, &inst.target, 1e-6, 10_000).unwrap();
        assert!(
            result.converged,
            "no convergence at L={l} after {} iterations (error {:.3e})",
            result.iterations, result.max_marginal_error
        );
        assert!(result.max_marginal_error < 1e-6);
        worst_error = worst_error.max(result.max_marginal_error);
        worst_iterations = worst_iterations.max(result.iterations);

        for i in 0..l {
            for j in 0..l {
                if inst.matrix.get(i, j) == 0.0 {
                    assert_eq!(
                        result.get(i, j),
                        0.0,
                        "zero of Q not bit-exact zero in P* at ({i},{j})"
                    );
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "200 solves took {elapsed:?}, budget is 5 s"
    );
    println!(
        "criterion 1 (sinkhorn convergence, 200 instances, worst err {worst_error:.2e}, \
         worst iters {worst_iterations}, {elapsed:?}): PASS"
    );
}

#[test]
fn criterion_02_sinkhorn_oracle_equivalence() {
    let langs: Vec<String> = vec!["l0".into(), "l1".into(), "l2".into()];
    let pairs = vec![
        ("l0".to_string(), "l1".to_string(), 2.0),
        ("l0".to_string(), "l2".to_string(), 1.0),
        ("l1".to_string(), "l2".to_string(), 1.0),
    ];
    let q = PairMassMatrix::from_pair_counts(langs, &pairs).unwrap();
    let target = temperature_rescale(&[3.0, 3.0, 2.0], 5.0).unwrap();

    let result = sinkhorn_balance(&q, &target, 1e-9, 10_000).unwrap();
    assert!(result.converged);

    let raw = vec![
        vec![0.0, 0.25, 0.125],
        vec![0.25, 0.0, 0.125],
        vec![0.125, 0.125, 0.0],
    ];
    let (oracle, _) = ipf_oracle(&raw, &target.probabilities, 1e-12, 1_000_000)
        .expect("oracle converges on the fixed instance");

    let mut max_diff = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            max_diff = max_diff.max((result.get(i, j) - oracle[i][j]).abs());
        }
    }
    assert!(
        max_diff < 1e-8,
        "solver and oracle disagree by {max_diff:.3e}"
    );
    println!("criterion 2 (oracle equivalence on fixed 3x3, max diff {max_diff:.2e}): PASS");
}

#[test]
fn criterion_03_sampling_fidelity() {
    // Skewed L=6 instance: two dominant languages so the balanced matrix
    // concentrates its mass, keeping the expected sampling error well under
    // the total-variation budget at one million draws.
    let langs: Vec<String> = (0..6).map(|i| format!("l{i}")).collect();
    let pairs = vec![
        ("l0".to_string(), "l1".to_string(), 5000.0),
        ("l0".to_string(), "l2".to_string(), 100.0),
        ("l1".to_string(), "l2".to_string(), 90.0),
        ("l1".to_string(), "l3".to_string(), 80.0),
        ("l2".to_string(), "l3".to_string(), 30.0),
        ("l3".to_string(), "l4".to_string(), 20.0),
        ("l4".to_string(), "l5".to_string(), 10.0),
    ];
    let q = PairMassMatrix::from_pair_counts(langs, &pairs).unwrap();
    let target = q.default_target(1.2).unwrap();
    let result = sinkhorn_balance(&q, &target, 1e-10, 10_000).unwrap();
    assert!(result.converged);

    let n = 1_000_000usize;
    let mut sampler = PairSampler::new(&result, 0xFED5).unwrap();
    let mut counts = vec![0u64; 36];
    for _ in 0..n {
        let (i, j) = sampler.draw();
        counts[i * 6 + j] += 1;
    }
    let mut tv = 0.0f64;
    for i in 0..6 {
        for j in 0..6 {
            let emp = counts[i * 6 + j] as f64 / n as f64;
            tv += (emp - result.get(i, j)).abs();
        }
    }
    tv *= 0.5;
    assert!(tv <= 1e-3, "total variation {tv:.2e} exceeds 1e-3");
    println!("criterion 3 (sampling fidelity, TV {tv:.2e} at 1e6 draws): PASS");
}

#[test]
fn criterion_04_temperature_identity_and_monotonicity() {
    let counts = [123_456.0, 42.0, 9_000.0, 1.0, 77_000.0];
    let total: f64 = counts.iter().sum();
    let t1 = temperature_rescale(&counts, 1.0).unwrap();
    for (p, c) in t1.probabilities.iter().zip(&counts) {
        assert!(
            (p - c / total).abs() < 1e-12,
            "T=1 deviates from raw proportions"
        );
    }

    let mut prev_max = f64::INFINITY;
    for t in [1.0, 2.0, 5.0, 10.0] {
        let target = temperature_rescale(&counts, t).unwrap();
        let max = target.probabilities.iter().cloned().fold(f64::MIN, f64::max);
        assert!(
            max < prev_max,
            "max probability did not strictly decrease at T={t}"
        );
        prev_max = max;
    }
    println!("criterion 4 (temperature identity at T=1, monotone flattening): PASS");
}

#[test]
fn criterion_05_bridge_plan_structure() {
    let catalog = load_fixture_catalog();
    let started = Instant::now();
    let plan = mining::build_bridge_plan(&catalog).unwrap();
    let elapsed = started.elapsed();

    let bridges: Vec<&str> = catalog.bridges().map(|l| l.iso.as_str()).collect();
    assert_eq!(bridges.len(), 26, "fixture must define exactly 26 bridges");

    for (i, a) in bridges.iter().enumerate() {
        for b in &bridges[i + 1..] {
            assert!(plan.contains(a, b), "missing bridge pair {a}-{b}");
        }
    }
    let english = catalog.english_iso();
    let mut english_pairs = 0;
    for lang in catalog.languages() {
        if lang.iso != english {
            assert!(plan.contains(english, &lang.iso));
            english_pairs += 1;
        }
    }
    assert_eq!(english_pairs, 99);

    // Membership predicate: a pair is planned iff same grouping, both
    // bridges, or one side is English. Checked in both directions over all
    // C(100, 2) pairs.
    let isos: Vec<&Language> = catalog.languages().iter().collect();
    for (i, a) in isos.iter().enumerate() {
        for b in &isos[i + 1..] {
            let expected = a.grouping_id == b.grouping_id
                || (a.is_bridge && b.is_bridge)
                || a.iso == english
                || b.iso == english;
            assert_eq!(
                plan.contains(&a.iso, &b.iso),
                expected,
                "membership predicate violated for {}-{}",
                a.iso,
                b.iso
            );
        }
    }

    let directions = plan.ordered_directions().len();
    assert_eq!(directions, plan.len() * 2);
    let lo = (2200.0 * 0.85) as usize;
    let hi = (2200.0 * 1.15) as usize;
    assert!(
        (lo..=hi).contains(&directions),
        "{directions} directions outside [{lo}, {hi}]"
    );
    assert!(elapsed.as_secs_f64() < 1.0, "plan build took {elapsed:?}");
    println!(
        "criterion 5 (bridge plan: 26 bridges, 325 bridge pairs, 99 English pairs, \
         {directions} directions, {elapsed:?}): PASS"
    );
}

#[test]
fn criterion_06_random_plan_sparsity() {
    let mut langs = vec![lang_for_test("en", "g0", true)];
    for i in 1..50 {
        langs.push(lang_for_test(&format!("l{i:02}"), "g0", false));
    }
    let catalog = LanguageCatalog::from_languages(langs, "en").unwrap();
    let plan = mining::build_random_plan(&catalog, 0.6, false, 2024).unwrap();
    assert_eq!(plan.len(), 490, "round(0.4 * C(50,2)) = 490");
    let s = mining::sparsity(&plan, &catalog);
    assert!((s - 0.6).abs() < 1e-12, "sparsity() returned {s}");
    println!("criterion 6 (random plan: 490 of 1225 pairs, sparsity 0.6): PASS");
}

fn lang_for_test(iso: &str, grouping: &str, bridge: bool) -> Language {
    Language {
        iso: iso.into(),
        name: iso.to_uppercase(),
        family: "synthetic".into(),
        scripts: vec!["Latin".into()],
        grouping_id: grouping.into(),
        is_bridge: bridge,
        mono_sentences: 0,
        bitext_sentences: BTreeMap::new(),
    }
}

#[test]
fn criterion_07_filter_boundaries_and_idempotence() {
    use mmt_core::filter::{filter_record, DropRule, FilterOutcome, WhitespaceCounter};

    let config = FilterConfig::default().with_eval_blocklist(["held out sentence"]);
    let c = &WhitespaceCounter;

    let words = |n: usize| vec!["w"; n].join(" ");
    let keep = |r: &BitextRecord| filter_record(r, &config, c).unwrap() == FilterOutcome::Keep;

    // Exactly 250 subwords kept, 251 dropped.
    assert!(keep(&BitextRecord::mined("en", "fr", &words(250), &words(250))));
    assert_eq!(
        filter_record(
            &BitextRecord::mined("en", "fr", &words(251), &words(250)),
            &config,
            c
        )
        .unwrap(),
        FilterOutcome::Drop(DropRule::MaxSubwords)
    );

    // Ratio exactly 3.0 kept, above dropped.
    assert!(keep(&BitextRecord::mined("en", "fr", &words(10), &words(30))));
    assert_eq!(
        filter_record(
            &BitextRecord::mined("en", "fr", &words(10), &words(31)),
            &config,
            c
        )
        .unwrap(),
        FilterOutcome::Drop(DropRule::LenRatio)
    );

    // Exactly 50% punctuation kept, above dropped.
    assert!(keep(&BitextRecord::mined("en", "fr", "ab,.", "plain text")));
    assert_eq!(
        filter_record(
            &BitextRecord::mined("en", "fr", "a,.!", "plain text"),
            &config,
            c
        )
        .unwrap(),
        FilterOutcome::Drop(DropRule::Punctuation)
    );

    // Evaluation overlap drops across language pairs.
    assert_eq!(
        filter_record(
            &BitextRecord::mined("de", "nl", "held  out   sentence", "iets"),
            &config,
            c
        )
        .unwrap(),
        FilterOutcome::Drop(DropRule::EvalOverlap)
    );

    // Full-chain idempotence and report conservation on a 10k synthetic stream.
    let mut rng = ChaCha20Rng::seed_from_u64(0xF17E);
    let stream = synthetic_stream(&mut rng, 10_000);
    let mut chain = FilterChain::new(config.clone());
    let once = chain.run(stream.clone()).unwrap();
    let report1 = chain.finish();
    assert!(report1.is_conserved(), "report does not conserve counts");
    assert_eq!(report1.input_count, 10_000);

    let mut chain2 = FilterChain::new(config.clone());
    let twice = chain2.run(once.clone()).unwrap();
    let report2 = chain2.finish();
    assert_eq!(once, twice, "chain is not idempotent");
    assert!(report2.is_conserved());
    assert_eq!(report2.kept_count, report2.input_count);

    println!(
        "criterion 7 (filter boundaries, idempotent chain on 10k records, \
         {} kept, conservation): PASS",
        report1.kept_count
    );
}

fn synthetic_stream(rng: &mut ChaCha20Rng, n: usize) -> Vec<BitextRecord> {
    let langs = ["en", "fr", "de", "ru"];
    let mut out: Vec<BitextRecord> = Vec::with_capacity(n);
    for i in 0..n {
        let src = langs[rng.gen_range(0..langs.len())];
        let tgt = loop {
            let t = langs[rng.gen_range(0..langs.len())];
            if t != src {
                break t;
            }
        };
        let kind = rng.gen_range(0..100);
        let record = match kind {
            // Exact duplicate of an earlier record.
            0..=9 if !out.is_empty() => {
                let prev = &out[rng.gen_range(0..out.len())];
                prev.clone()
            }
            // Punctuation-heavy.
            10..=14 => BitextRecord::mined(src, tgt, "!!! ??? !!!", "plain enough text"),
            // Overlong source.
            15..=19 => {
                let long = vec!["tok"; 251 + rng.gen_range(0..50)].join(" ");
                BitextRecord::mined(src, tgt, &long, "short target line")
            }
            // Length-ratio violation.
            20..=24 => {
                let long = vec!["tok"; 40];
                BitextRecord::mined(src, tgt, &long.join(" "), "tiny")
            }
            // Blocklisted sentence on the target side.
            25..=27 => BitextRecord::mined(src, tgt, "ordinary sentence", "held out sentence"),
            // Backtranslated record.
            28..=35 => BitextRecord::backtranslated(
                src,
                tgt,
                &format!("synthetic source {i}"),
                &format!("monolingual target {i}"),
            ),
            _ => BitextRecord::mined(
                src,
                tgt,
                &format!("source sentence number {i} with some words"),
                &format!("target sentence number {i} with other words"),
            ),
        };
        out.push(record);
    }
    out
}

#[test]
fn criterion_08_shard_plan_and_uniform_assignment() {
    let mut sizes = BTreeMap::new();
    sizes.insert("tiny".to_string(), 500u64);
    sizes.insert("small".to_string(), 3_000);
    sizes.insert("mid".to_string(), 40_000);
    sizes.insert("big".to_string(), 8_000_000);
    let plan = shard::plan_shards(&sizes, 256, 1_000).unwrap();
    for (iso, s) in &plan.per_language {
        assert_eq!(
            s.n_shards * s.replication,
            256,
            "divisibility violated for {iso}"
        );
    }
    let tiny = plan.get("tiny").unwrap();
    assert_eq!(tiny.n_shards, 1);
    assert_eq!(tiny.replication, 256);

    // Two languages pinned at eight shards; 100k records spread within 5%.
    let mut sizes8 = BTreeMap::new();
    sizes8.insert("aa".to_string(), 8_000u64);
    sizes8.insert("bb".to_string(), 8_000);
    let plan8 = shard::plan_shards(&sizes8, 256, 1_000).unwrap();
    assert_eq!(plan8.get("aa").unwrap().n_shards, 8);

    let n = 100_000;
    let mut counts = [0u64; 8];
    for i in 0..n {
        let a = shard::assign_record("aa", "bb", &format!("record body {i}"), &plan8, 99).unwrap();
        assert_eq!(a.n_local, 8);
        counts[a.local as usize] += 1;
    }
    let expected = n as f64 / 8.0;
    for (s, &c) in counts.iter().enumerate() {
        let dev = (c as f64 - expected).abs() / expected;
        assert!(
            dev <= 0.05,
            "shard {s} holds {c} records, {dev:.3} from uniform"
        );
    }
    println!("criterion 8 (shard divisibility, replication, uniform assignment): PASS");
}

#[test]
fn criterion_09_grouping_counts_blocks_and_partition() {
    // Paper-like fixture: 28 languages above 100M sentences, 72 below,
    // 18 clusters requested -> 46 groups.
    let high: [&str; 28] = [
        "hu", "ru", "hi", "ro", "fr", "nl", "fi", "pt", "ar", "el", "vi", "en", "ms", "tr",
        "he", "id", "pl", "cs", "sv", "fa", "zh", "bg", "de", "es", "ko", "ja", "it", "da",
    ];
    let mut profiles = Vec::new();
    for (i, iso) in high.iter().enumerate() {
        profiles.push(VocabProfile {
            language: iso.to_string(),
            top_tokens: (0..40).map(|t| format!("high{i}_tok{t}")).collect(),
            total_sentences: 100_000_001 + i as u64 * 10_000_000,
        });
    }
    // 72 low languages in 18 vocabulary families of 4.
    for i in 0..72 {
        let family = i / 4;
        let mut tokens: BTreeSet<String> = (0..30).map(|t| format!("fam{family}_tok{t}")).collect();
        tokens.insert(format!("own_{i}"));
        profiles.push(VocabProfile {
            language: format!("low{i:02}"),
            top_tokens: tokens,
            total_sentences: 1_000_000 + (i as u64 % 7) * 3_000_000,
        });
    }
    let plan = build_groups(&profiles, 100_000_000, 18, 2.0).unwrap();
    assert_eq!(plan.k, 46, "expected 46 groups, got {}", plan.k);
    let singletons = plan.groups.iter().filter(|g| g.len() == 1).count();
    let clusters = plan.groups.iter().filter(|g| g.len() > 1).count();
    assert_eq!(singletons, 28);
    assert_eq!(clusters, 18);
    for iso in high {
        let gid = plan.group_of(iso).unwrap();
        assert_eq!(plan.groups[gid].len(), 1, "{iso} must be a singleton");
    }

    // Six languages in two vocabulary blocks; greedy must recover the
    // brute-force-optimal 2-partition.
    let block = |names: [&str; 3], toks: [&str; 4]| -> Vec<VocabProfile> {
        names
            .iter()
            .enumerate()
            .map(|(i, n)| VocabProfile {
                language: n.to_string(),
                top_tokens: toks
                    .iter()
                    .map(|t| t.to_string())
                    .chain([format!("own_{n}_{i}")])
                    .collect(),
                total_sentences: 100,
            })
            .collect()
    };
    let mut six = block(["aa", "ab", "ac"], ["x1", "x2", "x3", "x4"]);
    six.extend(block(["ba", "bb", "bc"], ["y1", "y2", "y3", "y4"]));
    let greedy = build_groups(&six, 1_000_000, 2, 2.0).unwrap();
    let optimal = brute_force_two_partition(&six);
    let got: BTreeSet<Vec<String>> = greedy.groups.iter().cloned().collect();
    assert_eq!(got, optimal, "greedy missed the optimal 2-partition");

    // Partition property over random instances.
    let mut rng = ChaCha20Rng::seed_from_u64(0x9A09);
    for round in 0..100 {
        let n = rng.gen_range(4..24usize);
        let target = rng.gen_range(1..=n.min(6));
        let profiles: Vec<VocabProfile> = (0..n)
            .map(|i| VocabProfile {
                language: format!("r{round}_{i:02}"),
                top_tokens: (0..rng.gen_range(1..12usize))
                    .map(|t| format!("t{}", rng.gen_range(0..30)))
                    .chain([format!("u{i}")])
                    .map(|s| s.to_string())
                    .collect(),
                total_sentences: rng.gen_range(1..1_000_000u64),
            })
            .collect();
        let plan = build_groups(&profiles, u64::MAX, target, 2.0).unwrap();
        let mut seen = BTreeSet::new();
        for g in &plan.groups {
            for m in g {
                assert!(seen.insert(m.clone()), "{m} in two groups");
            }
        }
        assert_eq!(seen.len(), n, "partition lost languages");
        assert_eq!(plan.k, target);
    }
    println!("criterion 9 (46 groups, block recovery vs brute force, partition on 100 instances): PASS");
}

fn brute_force_two_partition(profiles: &[VocabProfile]) -> BTreeSet<Vec<String>> {
    let n = profiles.len();
    let jaccard = |a: &VocabProfile, b: &VocabProfile| -> f64 {
        let inter = a.top_tokens.intersection(&b.top_tokens).count() as f64;
        let union = (a.top_tokens.len() + b.top_tokens.len()) as f64 - inter;
        inter / union
    };
    let mut best_score = f64::MIN;
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    // Masks over n-1 bits: element 0 stays in side A, so each unordered
    // 2-partition is enumerated exactly once.
    for mask in 0..(1u32 << (n - 1)) {
        let mut a = vec![0usize];
        let mut b = Vec::new();
        for i in 1..n {
            if mask & (1 << (i - 1)) != 0 {
                b.push(i);
            } else {
                a.push(i);
            }
        }
        if b.is_empty() {
            continue;
        }
        let intra = |side: &[usize]| -> f64 {
            let mut s = 0.0;
            for (x, &i) in side.iter().enumerate() {
                for &j in &side[x + 1..] {
                    s += jaccard(&profiles[i], &profiles[j]);
                }
            }
            s
        };
        let score = intra(&a) + intra(&b);
        if score > best_score {
            best_score = score;
            best = Some((a, b));
        }
    }
    let (a, b) = best.expect("at least one partition");
    let to_names = |side: Vec<usize>| -> Vec<String> {
        let mut names: Vec<String> = side
            .into_iter()
            .map(|i| profiles[i].language.clone())
            .collect();
        names.sort();
        names
    };
    [to_names(a), to_names(b)].into_iter().collect()
}

#[test]
fn criterion_10_routing_statistics() {
    use mmt_core::groups::GroupingPlan;

    let grouping = GroupingPlan {
        groups: vec![
            vec!["aa".into()],
            vec!["bb".into()],
            vec!["cc".into()],
            vec!["dd".into()],
            vec!["ee".into()],
        ],
        k: 5,
        singleton_threshold: 0,
    };
    let query = RouteQuery::new("aa", "bb", Side::Encoder);

    for (rate, seed) in [(0.0, 11u64), (0.2, 12), (0.5, 13)] {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n = 100_000;
        let mut rerouted = 0u64;
        let mut targets = [0u64; 5];
        for _ in 0..n {
            let d = router::route(&query, &grouping, rate, &mut rng).unwrap();
            if d.rerouted {
                rerouted += 1;
                targets[d.group_id] += 1;
            } else {
                assert_eq!(d.group_id, d.assigned_group_id);
            }
        }
        let empirical = rerouted as f64 / n as f64;
        assert!(
            (empirical - rate).abs() <= 0.01,
            "rate {rate}: empirical {empirical}"
        );
        if rate == 0.0 {
            assert_eq!(rerouted, 0, "rate 0 must be exactly deterministic");
        } else {
            // Rerouted targets uniform over the other four groups:
            // chi-square with 3 degrees of freedom, 99% critical value.
            assert_eq!(targets[0], 0, "rerouted into the assigned group");
            let expected = rerouted as f64 / 4.0;
            let chi2: f64 = targets[1..]
                .iter()
                .map(|&c| {
                    let d = c as f64 - expected;
                    d * d / expected
                })
                .sum();
            assert!(chi2 < 11.345, "chi-square {chi2:.2} at rate {rate}");
        }
    }

    // Side invariance under exhaustive enumeration on a small grouping.
    let plan = GroupingPlan {
        groups: vec![vec!["aa".into(), "bb".into()], vec!["cc".into()]],
        k: 2,
        singleton_threshold: 0,
    };
    let langs = ["aa", "bb", "cc"];
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for src in langs {
        for tgt in langs {
            let enc = router::route(&RouteQuery::new(src, tgt, Side::Encoder), &plan, 0.0, &mut rng)
                .unwrap();
            let dec = router::route(&RouteQuery::new(src, tgt, Side::Decoder), &plan, 0.0, &mut rng)
                .unwrap();
            assert_eq!(enc.group_id, plan.group_of(src).unwrap());
            assert_eq!(dec.group_id, plan.group_of(tgt).unwrap());
        }
    }
    println!("criterion 10 (reroute rates 0/0.2/0.5 within ±0.01, uniform targets, side invariance): PASS");
}

#[test]
fn criterion_11_ensemble_combiner() {
    let to_lp = |probs: &[f64]| -> Vec<f64> { probs.iter().map(|p| p.ln()).collect() };

    // Identity and fixed point.
    let d = to_lp(&[0.5, 0.2, 0.3]);
    assert_eq!(router::combine_logprobs(&[d.clone()], &[1.0]).unwrap(), d);
    let fixed = router::combine_logprobs(&[d.clone(), d.clone()], &[0.5, 0.5]).unwrap();
    for (a, b) in fixed.iter().zip(&d) {
        assert!((a - b).abs() < 1e-12);
    }

    // V=10 instance: vector one strongly peaked at token 2, vector two at
    // token 7. Brute force over a weight grid, argmax recomputed directly.
    let mut p1 = vec![0.01; 10];
    p1[2] = 0.91;
    let mut p2 = vec![0.04; 10];
    p2[7] = 0.64;
    let (lp1, lp2) = (to_lp(&p1), to_lp(&p2));

    let combined = router::combine_logprobs(&[lp1.clone(), lp2.clone()], &[0.9, 0.1]).unwrap();
    assert_eq!(router::argmax(&combined), 2);

    for step in 0..=100 {
        let w = step as f64 / 100.0;
        let scores = router::combine_logprobs(&[lp1.clone(), lp2.clone()], &[w, 1.0 - w]).unwrap();
        // Independent recomputation of the expected winner.
        let mut best = 0;
        let mut best_score = f64::MIN;
        for v in 0..10 {
            let s = w * lp1[v] + (1.0 - w) * lp2[v];
            if s > best_score {
                best_score = s;
                best = v;
            }
        }
        assert_eq!(router::argmax(&scores), best, "weight {w}");
        // Shift invariance of the argmax.
        let shifted: Vec<f64> = scores.iter().map(|s| s + 12.5).collect();
        assert_eq!(router::argmax(&shifted), best);
    }
    println!("criterion 11 (combiner identity, fixed point, shift invariance, V=10 brute force): PASS");
}

#[test]
fn criterion_12_bt_selection() {
    // Boundary inclusion on both window edges.
    let boundary = vec![
        (("a".to_string(), "b".to_string()), 1.999),
        (("a".to_string(), "c".to_string()), 2.0),
        (("b".to_string(), "c".to_string()), 10.0),
        (("c".to_string(), "b".to_string()), 10.001),
    ];
    let sel = mining::select_bt_directions(&boundary, 2.0, 10.0, 100);
    assert_eq!(sel.directions.len(), 2);
    assert!(sel
        .directions
        .contains(&("a".to_string(), "c".to_string())));
    assert!(sel
        .directions
        .contains(&("b".to_string(), "c".to_string())));

    // Synthetic score table over 300 directions: selection keeps the 100
    // weakest directions inside [2, 10].
    let mut rng = ChaCha20Rng::seed_from_u64(0xB7);
    let mut scores = Vec::new();
    for i in 0..300 {
        let src = format!("s{i:03}");
        let tgt = format!("t{i:03}");
        scores.push(((src, tgt), rng.gen_range(0.0..30.0f64)));
    }
    let sel = mining::select_bt_directions(&scores, 2.0, 10.0, 100);
    assert!(sel.directions.len() <= 100);
    let mut qualifying: Vec<f64> = scores
        .iter()
        .filter(|(_, s)| (2.0..=10.0).contains(s))
        .map(|(_, s)| *s)
        .collect();
    qualifying.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(sel.directions.len(), qualifying.len().min(100));
    // Every selected direction scores no higher than any unselected
    // qualifying direction.
    let selected: HashSet<&(String, String)> = sel.directions.iter().collect();
    let max_selected = scores
        .iter()
        .filter(|(d, _)| selected.contains(d))
        .map(|(_, s)| *s)
        .fold(f64::MIN, f64::max);
    let min_unselected = scores
        .iter()
        .filter(|(d, s)| !selected.contains(d) && (2.0..=10.0).contains(s))
        .map(|(_, s)| *s)
        .fold(f64::MAX, f64::min);
    assert!(max_selected <= min_unselected);
    println!("criterion 12 (BT window boundaries, lowest-first truncation): PASS");
}
