use crisis_core::corpus::LabelClass::{self, NotRelated as N, Related as R};
use crisis_core::forest::{fit_forest, load_model, save_model, ForestParams, MaxFeatures};
use crisis_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Textbook CART: at every impure node with two or more rows, try every
/// feature and every midpoint, keep the purest split (first seen on ties),
/// recurse. Leaves vote by majority with ties to NotRelated.
enum Oracle {
    Leaf(LabelClass),
    Node(usize, f64, Box<Oracle>, Box<Oracle>),
}

fn oracle(rows: &[(Vec<f64>, LabelClass)]) -> Oracle {
    let r = rows.iter().filter(|(_, l)| *l == R).count() as u128;
    let n = rows.len() as u128;
    let leaf = Oracle::Leaf(if 2 * r > n { R } else { N });
    if r == 0 || r == n || n < 2 {
        return leaf;
    }
    // purity of a split is (Sl/nl + Sr/nr) with S = a² + b², kept as a fraction
    let mut best: Option<(u128, u128, usize, f64)> = None;
    for f in 0..rows[0].0.len() {
        let mut values: Vec<f64> = rows.iter().map(|(x, _)| x[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let side = |left: bool| {
                let part: Vec<_> = rows.iter().filter(|(x, _)| (x[f] <= t) == left).collect();
                let a = part.iter().filter(|(_, l)| *l == R).count() as u128;
                let b = part.len() as u128 - a;
                (a * a + b * b, part.len() as u128)
            };
            let ((sl, nl), (sr, nr)) = (side(true), side(false));
            let (num, den) = (sl * nr + sr * nl, nl * nr);
            if best.is_none_or(|(bn, bd, _, _)| num * bd > bn * den) {
                best = Some((num, den, f, t));
            }
        }
    }
    let Some((_, _, f, t)) = best else { return leaf };
    let (l, r): (Vec<_>, Vec<_>) = rows.iter().cloned().partition(|(x, _)| x[f] <= t);
    Oracle::Node(f, t, Box::new(oracle(&l)), Box::new(oracle(&r)))
}

fn oracle_predict(o: &Oracle, x: &[f64]) -> LabelClass {
    match o {
        Oracle::Leaf(l) => *l,
        Oracle::Node(f, t, l, r) => oracle_predict(if x[*f] <= *t { l } else { r }, x),
    }
}

fn random_dataset(r: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<LabelClass>) {
    loop {
        let mut x: Vec<Vec<f64>> = Vec::new();
        while x.len() < 12 {
            let row: Vec<f64> = (0..3).map(|_| r.random_range(0..6) as f64).collect();
            if !x.contains(&row) {
                x.push(row);
            }
        }
        let y: Vec<LabelClass> = (0..12).map(|_| if r.random_bool(0.5) { R } else { N }).collect();
        if y.contains(&R) && y.contains(&N) {
            return (x, y);
        }
    }
}

#[test]
fn single_tree_matches_exhaustive_cart() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for case in 0..50 {
        let (x, y) = random_dataset(&mut r);
        let model = fit_forest(&x, &y, &ForestParams::single_tree()).unwrap();
        let rows: Vec<_> = x.iter().cloned().zip(y.iter().copied()).collect();
        let o = oracle(&rows);
        let mut queries = x.clone();
        queries.extend((0..200).map(|_| (0..3).map(|_| r.random_range(-1.0..7.0)).collect::<Vec<f64>>()));
        let got = model.predict(&queries).unwrap();
        for (q, g) in queries.iter().zip(&got) {
            assert_eq!(*g, oracle_predict(&o, q), "case {case}, query {q:?}");
        }
        // stopping rule: with distinct rows every leaf is pure or a singleton
        for (a, b) in model.trees[0].leaves() {
            assert!(a == 0 || b == 0 || a + b < 2, "case {case}: impure leaf ({a}, {b})");
        }
        assert_eq!(got[..12], y[..], "training data must be fit exactly");
    }
}

fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<LabelClass>) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let (centre, label) = if i % 2 == 0 { (2.0, R) } else { (-2.0, N) };
        x.push((0..5).map(|_| centre + noise.sample(&mut r)).collect());
        y.push(label);
    }
    (x, y)
}

fn f1(pred: &[LabelClass], actual: &[LabelClass]) -> f64 {
    let tp = pred.iter().zip(actual).filter(|(p, a)| **p == R && **a == R).count() as f64;
    let fp = pred.iter().zip(actual).filter(|(p, a)| **p == R && **a == N).count() as f64;
    let fneg = pred.iter().zip(actual).filter(|(p, a)| **p == N && **a == R).count() as f64;
    2.0 * tp / (2.0 * tp + fp + fneg)
}

#[test]
fn forest_separates_gaussian_blobs() {
    let (x, y) = blobs(500, 1);
    let (tx, ty) = blobs(500, 2);
    let model = fit_forest(&x, &y, &ForestParams { seed: 3, ..ForestParams::default() }).unwrap();
    let score = f1(&model.predict(&tx).unwrap(), &ty);
    assert!(score >= 0.95, "f1 {score}");
}

#[test]
fn fitting_is_deterministic_and_seed_sensitive() {
    let (x, y) = blobs(200, 4);
    let p = ForestParams { n_trees: 20, seed: 9, ..ForestParams::default() };
    assert_eq!(fit_forest(&x, &y, &p).unwrap(), fit_forest(&x, &y, &p).unwrap());
    let other = ForestParams { seed: 10, ..p.clone() };
    assert_ne!(fit_forest(&x, &y, &p).unwrap().trees, fit_forest(&x, &y, &other).unwrap().trees);
}

#[test]
fn monotone_rescaling_keeps_single_tree_predictions() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let (x, y) = random_dataset(&mut r);
    let scaled: Vec<Vec<f64>> = x.iter().map(|row| row.iter().map(|v| 10.0 * v + 3.0).collect()).collect();
    let a = fit_forest(&x, &y, &ForestParams::single_tree()).unwrap();
    let b = fit_forest(&scaled, &y, &ForestParams::single_tree()).unwrap();
    assert_eq!(a.predict(&x).unwrap(), b.predict(&scaled).unwrap());
}

#[test]
fn saved_model_reloads_identically() {
    let (x, y) = blobs(300, 6);
    let model = fit_forest(&x, &y, &ForestParams { seed: 1, ..ForestParams::default() }).unwrap();
    assert_eq!(model.trees.len(), 100);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, model);
    let (tx, _) = blobs(100, 7);
    assert_eq!(back.predict_proba(&tx).unwrap(), model.predict_proba(&tx).unwrap());

    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_model(&path), Err(Error::CorruptModel(_))));

    std::fs::write(&path, text.replace("rf-v1", "rf-v0")).unwrap();
    assert!(matches!(load_model(&path), Err(Error::VersionMismatch { .. })));
}

#[test]
fn width_and_label_errors() {
    let x = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    assert!(matches!(fit_forest(&x, &[R, R], &ForestParams::default()), Err(Error::SingleClass)));
    assert!(matches!(fit_forest(&x, &[R], &ForestParams::default()), Err(Error::LengthMismatch { .. })));
    let m = fit_forest(&x, &[R, N], &ForestParams { max_features: MaxFeatures::All, ..ForestParams::default() }).unwrap();
    assert!(matches!(m.predict(&[vec![0.0]]), Err(Error::WidthMismatch { expected: 2, found: 1 })));
    assert!(fit_forest(&x, &[R, N], &ForestParams { n_trees: 0, ..ForestParams::default() }).is_err());
}
