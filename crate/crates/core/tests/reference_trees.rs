//! Trees from the library against a direct recursive implementation of the
//! splitting rules, plus frozen golden leaf lists.

use shapetree::{
    build_greedy_binary, build_greedy_ternary, build_idealized_binary, build_idealized_ternary, family, sample,
    Family, Interval, PartitionTree, SampleCounts,
};

fn padded_sum<T: Copy + std::iter::Sum<T> + Default>(v: &[T], start: usize, len: usize) -> T {
    (start..start + len)
        .map(|x| v.get(x - 1).copied().unwrap_or_default())
        .sum()
}

fn greedy_reference(counts: &[u64], start: usize, len: usize, out: &mut Vec<Interval>) {
    if len == 1 {
        out.push(Interval::new(start, len));
        return;
    }
    let h = len / 2;
    let nv = padded_sum(counts, start, h) as f64;
    let nw = padded_sum(counts, start + h, h) as f64;
    if (nv - nw).abs() > (nv + nw).sqrt() {
        greedy_reference(counts, start, h, out);
        greedy_reference(counts, start + h, h, out);
    } else {
        out.push(Interval::new(start, len));
    }
}

fn greedy_ternary_reference(counts: &[u64], start: usize, len: usize, out: &mut Vec<Interval>) {
    if len == 1 {
        out.push(Interval::new(start, len));
        return;
    }
    let h = len / 3;
    let n: Vec<f64> = (0..3).map(|j| padded_sum(counts, start + j * h, h) as f64).collect();
    if n[0] - 2.0 * n[1] + n[2] > (n[0] + n[1] + n[2]).sqrt() {
        for j in 0..3 {
            greedy_ternary_reference(counts, start + j * h, h, out);
        }
    } else {
        out.push(Interval::new(start, len));
    }
}

fn idealized_reference(mass: &[f64], n: f64, start: usize, len: usize, out: &mut Vec<Interval>) {
    if len == 1 {
        out.push(Interval::new(start, len));
        return;
    }
    let h = len / 2;
    let fv = padded_sum(mass, start, h);
    let fw = padded_sum(mass, start + h, h);
    if fv - fw > ((fv + fw) / n).sqrt() {
        idealized_reference(mass, n, start, h, out);
        idealized_reference(mass, n, start + h, h, out);
    } else {
        out.push(Interval::new(start, len));
    }
}

fn idealized_ternary_reference(mass: &[f64], n: f64, start: usize, len: usize, out: &mut Vec<Interval>) {
    if len == 1 {
        out.push(Interval::new(start, len));
        return;
    }
    let h = len / 3;
    let f: Vec<f64> = (0..3).map(|j| padded_sum(mass, start + j * h, h)).collect();
    if f[0] - 2.0 * f[1] + f[2] > ((f[0] + f[1] + f[2]) / n).sqrt() {
        for j in 0..3 {
            idealized_ternary_reference(mass, n, start + j * h, h, out);
        }
    } else {
        out.push(Interval::new(start, len));
    }
}

fn padded(k: usize, arity: usize) -> usize {
    let mut m = 1;
    while m < k {
        m *= arity;
    }
    m
}

fn golden(name: &str) -> PartitionTree {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    serde_json::from_str(&text).unwrap()
}

#[test]
fn greedy_binary_zipf_matches_reference_and_golden() {
    let f = family(Family::HarmonicZipf, 64, None).unwrap();
    let c = sample(&f, 1000, 7);
    let mut expect = Vec::new();
    greedy_reference(c.counts(), 1, 64, &mut expect);
    let t = build_greedy_binary(&c);
    assert_eq!(t.leaves(), expect);
    assert_eq!(t, golden("greedy_binary_zipf_k64_n1000_seed7.json"));
}

#[test]
fn idealized_binary_zipf_matches_reference_and_golden() {
    let f = family(Family::HarmonicZipf, 64, None).unwrap();
    let mut expect = Vec::new();
    idealized_reference(f.mass(), 1000.0, 1, 64, &mut expect);
    let t = build_idealized_binary(&f, 1000).unwrap();
    assert_eq!(t.leaves(), expect);
    assert_eq!(t, golden("idealized_binary_zipf_k64_n1000.json"));
}

#[test]
fn greedy_trees_match_reference_across_seeds() {
    for (fam, k) in [(Family::HarmonicZipf, 100), (Family::TruncGeometric, 37), (Family::LinearDecreasing, 200)] {
        let f = family(fam, k, Some(0.8)).unwrap();
        for seed in 0..25 {
            let c = sample(&f, 50 + 300 * seed, seed);
            let mut expect = Vec::new();
            greedy_reference(c.counts(), 1, padded(k, 2), &mut expect);
            assert_eq!(build_greedy_binary(&c).leaves(), expect);
            let mut expect3 = Vec::new();
            greedy_ternary_reference(c.counts(), 1, padded(k, 3), &mut expect3);
            assert_eq!(build_greedy_ternary(&c).leaves(), expect3);
        }
    }
}

#[test]
fn idealized_trees_match_reference() {
    for k in [5usize, 64, 100, 243, 1000] {
        for n in [16u64, 1000, 59_049, 100_000] {
            let f = family(Family::HarmonicZipf, k, None).unwrap();
            let mut expect = Vec::new();
            idealized_reference(f.mass(), n as f64, 1, padded(k, 2), &mut expect);
            assert_eq!(build_idealized_binary(&f, n).unwrap().leaves(), expect);
            let mut expect3 = Vec::new();
            idealized_ternary_reference(f.mass(), n as f64, 1, padded(k, 3), &mut expect3);
            assert_eq!(build_idealized_ternary(&f, n).unwrap().leaves(), expect3);
        }
    }
}

#[test]
fn idealized_tree_ignores_seed() {
    let f = family(Family::HarmonicZipf, 64, None).unwrap();
    let a = build_idealized_binary(&f, 1000).unwrap();
    let b = build_idealized_binary(&f, 1000).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn all_mass_on_first_atom_of_two() {
    for n in 2..200u64 {
        let c = SampleCounts::from_counts(vec![n, 0]).unwrap();
        assert_eq!(build_greedy_binary(&c).leaf_count(), 2);
    }
}

#[test]
#[ignore = "writes the golden files"]
fn bless_golden_trees() {
    let f = family(Family::HarmonicZipf, 64, None).unwrap();
    let dir = format!("{}/tests/golden", env!("CARGO_MANIFEST_DIR"));
    let greedy = build_greedy_binary(&sample(&f, 1000, 7));
    std::fs::write(format!("{dir}/greedy_binary_zipf_k64_n1000_seed7.json"), greedy.to_json().unwrap()).unwrap();
    let ideal = build_idealized_binary(&f, 1000).unwrap();
    std::fs::write(format!("{dir}/idealized_binary_zipf_k64_n1000.json"), ideal.to_json().unwrap()).unwrap();
}
