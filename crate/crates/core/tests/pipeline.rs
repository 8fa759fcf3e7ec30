use std::path::Path;

use braidlink::braid::{closure_structure, parse_braid_word, BraidWord, Letter};
use braidlink::braidfamily::figure_eight_family;
use braidlink::coeff::q;
use braidlink::mixedpoly::{multiply, rescale_to_mixed, MixedPolynomial};
use braidlink::newton::{newton_boundary, predict_product_boundary};
use braidlink::nondeg::required_k;
use braidlink::realize::{realize, RealizeInput, RealizeOptions};
use proptest::prelude::*;

fn load(name: &str) -> MixedPolynomial {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    let v = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    MixedPolynomial::from_json(&v).unwrap()
}

/// The braid obtained by deleting every strand that does
/// not start at one of `keep` (1-based positions).
fn sub_braid(word: &BraidWord, keep: &[usize]) -> BraidWord {
    let mut at: Vec<usize> = (1..=word.strands).collect();
    let mut letters = Vec::new();
    for l in &word.letters {
        let (a, b) = (at[l.index - 1], at[l.index]);
        if keep.contains(&a) && keep.contains(&b) {
            let rank = at[..l.index - 1].iter().filter(|s| keep.contains(s)).count();
            letters.push(Letter { index: rank + 1, sign: l.sign });
        }
        at.swap(l.index - 1, l.index);
    }
    BraidWord::new(keep.len(), letters)
}

fn exponent_sum(word: &BraidWord) -> i64 {
    word.letters.iter().map(|l| l.sign as i64).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Γ(p q) computed from the expanded product equals the predicted polygon.
    #[test]
    fn product_boundary_matches_prediction(
        m in 2u32..5,
        n in 2u32..9,
        mid in proptest::option::of((1u32..4, 1u32..8, -3i64..4)),
    ) {
        let mut terms = vec![(1, m, 0), (1, 0, n)];
        if let Some((i, j, c)) = mid {
            if i < m && j < n && c != 0 {
                terms.push((c, i, j));
            }
        }
        let qp = MixedPolynomial::holomorphic(&terms);
        let fam = figure_eight_family(&q(1, 2));
        let k = required_k(&fam, &qp).unwrap();
        let f = multiply(&rescale_to_mixed(&fam, k).unwrap(), &qp);
        let predicted = predict_product_boundary(fam.s, k, &qp).unwrap();
        prop_assert!(newton_boundary(&f).same_polygon(&predicted), "{:?} vs {:?}", newton_boundary(&f).vertices, predicted.vertices);
    }
}

#[test]
fn figure_eight_word_realizes_and_closes() {
    let word = parse_braid_word("s1 s2^-1 s1 s2^-1", 3).unwrap();
    let q14 = load("q14.json");
    let opts = RealizeOptions { sample: true, ..RealizeOptions::default() };
    let r = realize(&RealizeInput::Braid(word.clone()), &q14, &opts).unwrap();
    assert!(r.report.certificate.overall);
    let sample = r.report.sample.as_ref().unwrap();
    assert!(sample.consistent);
    assert_eq!(closure_structure(&word).components.len(), 1);
    assert_eq!(sample.degree, 5);
    assert_eq!(sample.cycle_type, vec![1, 1, 3]);

    // the knot's strands close up to a 3-braid of exponent sum 0, and the two
    // strands of u^2 + v^14 to the torus braid s1^14
    let sampled = parse_braid_word(&sample.braid, sample.degree).unwrap();
    let comps = closure_structure(&sampled).components;
    let knot = comps.iter().find(|c| c.size == 3).unwrap();
    let knot_braid = sub_braid(&sampled, &knot.strands);
    assert_eq!(exponent_sum(&knot_braid), exponent_sum(&word));
    assert_eq!(closure_structure(&knot_braid).components.len(), 1);
    let pair: Vec<usize> = comps.iter().filter(|c| c.size == 1).map(|c| c.strands[0]).collect();
    assert_eq!(exponent_sum(&sub_braid(&sampled, &pair)).abs(), 14);
}
