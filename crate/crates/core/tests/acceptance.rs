use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use fpcount::exact::{enumerate_dags, exact_knapsack_count, exact_path_count};
use fpcount::float::truncation_factor;
use fpcount::knapsack::KnapsackRun;
use fpcount::paths::PathRun;
use fpcount::rng::seeded;
use fpcount::verify::{knapsack_invariants, path_invariants, random_knapsack, random_weighted_dag, uniformity_test};
use fpcount::{
    approx_count, approx_count_knapsack, approx_count_paths, approx_table, binarize, mantissa_length, ApproxFloat,
    CountTable, DepthBudget, Epsilon, Family, Generator, KnapsackInstance, Problem, WeightedMultiDag,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn int(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

fn eps(s: &str) -> Epsilon {
    s.parse().expect("literal epsilon")
}

fn within(approx: &BigRational, exact: &BigRational, lower: &BigRational) -> bool {
    approx <= exact && approx >= &(lower * exact)
}

fn float_contracts() -> Outcome {
    let mut rng = seeded(101);
    let checks = 100_000;
    let mut violations = 0u64;
    for _ in 0..checks {
        let t: u32 = rng.gen_range(2..=64);
        let lower = truncation_factor(t, 1);
        let bits = rng.gen_range(1..=400);
        let x = rng.gen_biguint(bits);
        if !within(&ApproxFloat::truncate(&x, t).to_ratio(), &int(&x), &lower) {
            violations += 1;
        }
        let (abits, bbits) = (rng.gen_range(1..=200), rng.gen_range(1..=200));
        let a = ApproxFloat::truncate(&rng.gen_biguint(abits), t);
        let b = ApproxFloat::truncate(&rng.gen_biguint(bbits), t);
        let (ra, rb) = (a.to_ratio(), b.to_ratio());
        if !within(&(&a + &b).to_ratio(), &(&ra + &rb), &lower) {
            violations += 1;
        }
        if !within(&(&a * &b).to_ratio(), &(&ra * &rb), &lower) {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("{checks} draws x 3 contracts, 0 violations"))
}

fn exact_ground_truth() -> Outcome {
    let dag = CountTable::exact(Family::Dag, 5).expect("table");
    let totals: Vec<BigUint> = (1..=4).map(|n| dag.exact_total(n).expect("exact")).collect();
    let want: Vec<BigUint> = [1u32, 3, 25, 543].map(BigUint::from).to_vec();
    ensure(totals == want, || format!("a(1..4) = {totals:?}"))?;
    let mut sizes = Vec::new();
    for family in Family::ALL {
        let table = CountTable::exact(family, 5).expect("table");
        for n in 1..=5 {
            let members = enumerate_dags(n, family).expect("small n").len();
            let row = table.exact_total(n).expect("exact");
            ensure(row == BigUint::from(members), || format!("{family} n={n}: table {row} vs {members}"))?;
            if n == 5 {
                sizes.push(format!("{family}(5)={members}"));
            }
        }
    }
    Ok(format!("a(1..4)=1,3,25,543; {}", sizes.join(" ")))
}

fn entrywise_bound() -> Outcome {
    let exact = CountTable::exact(Family::Dag, 20).expect("table");
    let mut entries = 0;
    for t in [8u32, 12, 16] {
        let approx = approx_table(Family::Dag, 20, t).expect("table");
        for n in 1..=20 {
            let lower = truncation_factor(t, 3 * (n * n) as u64);
            for k in 1..=n {
                let (a, b) = (exact.entry_ratio(n, k), approx.entry_ratio(n, k));
                ensure(within(&b, &a, &lower), || format!("t={t} ({n},{k})"))?;
                entries += 1;
            }
        }
    }
    Ok(format!("{entries} entries, 0 violations"))
}

fn counting_bound() -> Outcome {
    let mut checks = 0;
    for family in Family::ALL {
        let max_n = if family == Family::Dag { 20 } else { 15 };
        let exact = CountTable::exact(family, max_n).expect("table");
        for e in ["1", "0.5", "0.1", "0.01"] {
            let e = eps(e);
            for n in 1..=max_n {
                let z = approx_count(family, n, &e).map_err(|err| err.to_string())?;
                let f = int(&exact.exact_total(n).expect("exact"));
                ensure(within(&z.value.to_ratio(), &f, &e.complement()), || {
                    format!("{family} n={n} eps={e}")
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (family, n, eps) cases, 0 violations"))
}

fn generation_bound() -> Outcome {
    let mut graphs = 0;
    for n in [3usize, 4] {
        let members = enumerate_dags(n, Family::Dag).expect("small n");
        let count = BigRational::from_integer(members.len().into());
        for e in ["1", "0.1"] {
            let e = eps(e);
            let t = mantissa_length(Problem::DagGenerate, n as u64, &e).map_err(|err| err.to_string())?;
            let g = Generator::new(CountTable::approx(Family::Dag, n, t).expect("table"));
            let (lo, hi) = (BigRational::one() - e.as_ratio(), BigRational::one() + e.as_ratio());
            let mut sum = BigRational::zero();
            for d in &members {
                let p = g.probability(d).map_err(|err| err.to_string())?;
                let scaled = &p * &count;
                ensure(scaled >= lo && scaled <= hi, || format!("n={n} eps={e} {:?}", d.arcs()))?;
                sum += p;
                graphs += 1;
            }
            ensure(sum.is_one(), || format!("n={n} eps={e}: probabilities sum to {sum}"))?;
        }
    }
    Ok(format!("{graphs} (graph, eps) cases within 1±eps, sums exactly 1"))
}

fn sampling_uniformity() -> Outcome {
    let mut parts = Vec::new();
    for (i, family) in Family::ALL.into_iter().enumerate() {
        let (stat, p, outcomes) = uniformity_test(family, 3, 250_000, 600 + i as u64);
        ensure(p > 0.001, || format!("{family}: chi2={stat:.2} p={p:.5}"))?;
        parts.push(format!("{family}: {outcomes} outcomes chi2={stat:.2} p={p:.3}"));
    }
    Ok(parts.join("; "))
}

fn subset_count(inst: &KnapsackInstance) -> BigUint {
    let n = inst.len();
    (0u32..1 << n)
        .filter(|mask| {
            let total: BigUint = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| &inst.weights()[j]).sum();
            &total <= inst.capacity()
        })
        .count()
        .into()
}

fn knapsack_bound() -> Outcome {
    let mut rng = seeded(707);
    for i in 0..200 {
        let inst = random_knapsack(&mut rng, 12, 100);
        let exact = exact_knapsack_count(&inst);
        ensure(exact == subset_count(&inst), || format!("instance {i}: sparse DP disagrees with enumeration"))?;
        for e in ["1", "0.1", "0.01"] {
            let e = eps(e);
            let t = mantissa_length(Problem::Knapsack, inst.len() as u64, &e).map_err(|err| err.to_string())?;
            let run = KnapsackRun::new(&inst, t);
            ensure(within(&run.value().to_ratio(), &int(&exact), &e.complement()), || {
                format!("instance {i} eps={e}")
            })?;
            let (i1, i2) = knapsack_invariants(&inst, &run);
            ensure(i1 && i2, || format!("instance {i} eps={e}: bimonotone={i1} per-step={i2}"))?;
        }
    }
    Ok("200 instances x 3 eps, lists bimonotone and per-step bounds hold".into())
}

fn all_path_weights(g: &WeightedMultiDag) -> Vec<BigUint> {
    fn walk(g: &WeightedMultiDag, v: usize, acc: BigUint, out: &mut Vec<BigUint>) {
        if v == g.sink() {
            out.push(acc.clone());
        }
        for a in g.arcs().iter().filter(|a| a.from == v) {
            walk(g, a.to, &acc + &a.weight, out);
        }
    }
    let mut out = Vec::new();
    walk(g, g.source(), BigUint::zero(), &mut out);
    out
}

fn path_bound() -> Outcome {
    let mut rng = seeded(808);
    let mut caps_checked = 0;
    for i in 0..100 {
        let g = random_weighted_dag(&mut rng, 10, 30, 50);
        let weights = all_path_weights(&g);
        let b = binarize(&g).map_err(|err| err.to_string())?;
        let total: u64 = g.arcs().iter().map(|a| u64::try_from(&a.weight).expect("small")).sum();
        let cap = BigUint::from(rng.gen_range(0..=total));
        for c in [BigUint::zero(), BigUint::from(25u8), cap.clone(), BigUint::from(total)] {
            let brute = BigUint::from(weights.iter().filter(|&w| w <= &c).count());
            let before = exact_path_count(&g, &c).map_err(|err| err.to_string())?;
            let after = exact_path_count(&b.graph, &c).map_err(|err| err.to_string())?;
            ensure(before == brute && after == brute, || format!("graph {i} C={c}: {brute} {before} {after}"))?;
            caps_checked += 1;
        }
        let exact = int(&exact_path_count(&g, &cap).map_err(|err| err.to_string())?);
        for e in ["1", "0.1"] {
            let e = eps(e);
            let z = approx_count_paths(&g, &cap, &e, DepthBudget::Actual).map_err(|err| err.to_string())?;
            ensure(within(&z.value.to_ratio(), &exact, &e.complement()), || format!("graph {i} eps={e}"))?;
            let run: PathRun = z.run.ok_or_else(|| format!("graph {i} disconnected"))?;
            let (i1, i2) = path_invariants(&run, &cap);
            ensure(i1 && i2, || format!("graph {i} eps={e}: bimonotone={i1} per-vertex={i2}"))?;
        }
    }
    Ok(format!("100 graphs x 2 eps; binarization checked at {caps_checked} capacities"))
}

fn reduction_coherence() -> Outcome {
    let mut rng = seeded(909);
    for i in 0..50 {
        let inst = random_knapsack(&mut rng, 12, 100);
        let chain = WeightedMultiDag::knapsack_chain(&inst);
        let direct = exact_knapsack_count(&inst);
        let via_paths = exact_path_count(&chain, inst.capacity()).map_err(|err| err.to_string())?;
        ensure(direct == via_paths, || format!("instance {i}: {direct} vs {via_paths}"))?;
        let exact = int(&direct);
        for e in ["1", "0.1"] {
            let e = eps(e);
            let zk = approx_count_knapsack(&inst, &e).map_err(|err| err.to_string())?;
            let zp = approx_count_paths(&chain, inst.capacity(), &e, DepthBudget::Actual)
                .map_err(|err| err.to_string())?
                .value;
            ensure(within(&zk.to_ratio(), &exact, &e.complement()), || format!("instance {i} knapsack eps={e}"))?;
            ensure(within(&zp.to_ratio(), &exact, &e.complement()), || format!("instance {i} paths eps={e}"))?;
        }
    }
    Ok("50 instances: exact counts equal, both approximations within bounds".into())
}

fn cli(args: &[&str], threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fpcount"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} exited with {}", out.status))?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let sample = ["sample", "dag", "12", "--eps", "0.1", "--seed", "42", "--count", "64"];
    let first = cli(&sample, None)?;
    ensure(first == cli(&sample, None)?, || "repeat run differs".into())?;
    ensure(first == cli(&sample, Some("1"))?, || "single-threaded run differs".into())?;
    let json = ["sample", "extdag", "7", "--exact", "--seed", "5", "--count", "16", "--format", "json-lines"];
    ensure(cli(&json, None)? == cli(&json, Some("3"))?, || "json-lines output differs".into())?;
    let other = ["sample", "dag", "12", "--eps", "0.1", "--seed", "43", "--count", "64"];
    ensure(first != cli(&other, None)?, || "different seeds gave identical output".into())?;
    let count = ["count", "essdag", "9", "--eps", "0.01"];
    ensure(cli(&count, None)? == cli(&count, Some("2"))?, || "count output differs".into())?;
    Ok(format!("{} bytes of sampled graphs reproduced byte for byte", first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("floating-point contracts", float_contracts),
        ("exact tables match enumeration", exact_ground_truth),
        ("entrywise truncated-table bound", entrywise_bound),
        ("approximate counting bound", counting_bound),
        ("generation probabilities within 1±eps", generation_bound),
        ("exact-table sampling is uniform", sampling_uniformity),
        ("knapsack approximation bound", knapsack_bound),
        ("weighted path approximation bound", path_bound),
        ("knapsack and chain-gadget coherence", reduction_coherence),
        ("seeded CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL [{}] {name}: {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
