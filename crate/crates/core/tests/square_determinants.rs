use siegel_theta::isotropy::maximal_isotropic_groups;
use siegel_theta::quadform::{enumerate_classes, ClassConstraints, GramRootSearch};

#[test]
fn every_maximal_group_of_the_sixteen_classes_has_a_gram_root() {
    let classes = enumerate_classes(&ClassConstraints::new(4, 4, true)).unwrap();
    assert_eq!(classes.len(), 16);
    let mut pairs = 0;
    for s in &classes {
        let search = GramRootSearch::new(s, 4, false).unwrap();
        assert!(!search.roots().is_empty());
        for l in maximal_isotropic_groups(s, 4).unwrap() {
            assert!(search.has_root_for(l.generators()), "no root for S = {:?}, L = {:?}", s.matrix(), l.generators());
            pairs += 1;
        }
    }
    assert!(pairs >= 16);
}
