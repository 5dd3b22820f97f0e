use siegel_theta::linalg::GramForm;
use siegel_theta::quadform::{enumerate_classes, isometric, ClassConstraints};

fn count(scale: u64, square: bool) -> Vec<GramForm> {
    enumerate_classes(&ClassConstraints::new(4, scale, square)).unwrap()
}

#[test]
fn level_two_classes() {
    let classes = count(2, false);
    assert_eq!(classes.len(), 6);
    let dets: Vec<i64> = classes.iter().map(|s| s.det().try_into().unwrap()).collect();
    assert_eq!(dets, [1, 2, 4, 4, 8, 16]);
}

#[test]
fn level_four_square_classes() {
    let classes = count(4, true);
    assert_eq!(classes.len(), 16);
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i + 1..] {
            assert!(isometric(a, b).unwrap().is_none());
        }
    }
}

#[test]
fn level_sixteen_square_classes() {
    let t = std::time::Instant::now();
    let classes = count(16, true);
    eprintln!("c=16 enumeration took {:?}", t.elapsed());
    assert_eq!(classes.len(), 138);
}
