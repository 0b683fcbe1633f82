use dyapack_core::dyadic_index::DyadicKind;
use dyapack_core::generators::{random_band, random_permutation, spd_dyadic};
use dyapack_core::mtx::{
    read_matrix_market, read_permutation, write_general, write_pattern, write_permutation, write_symmetric,
    DyadicHeader,
};
use std::io::Cursor;

#[test]
fn symmetric_matrix_round_trips_exactly() {
    let s = spd_dyadic(3, 2, 4, None).unwrap();
    let header = DyadicHeader { height: 3, breadth: 2, kind: DyadicKind::Symmetric };
    let mut buf = Vec::new();
    write_symmetric(&mut buf, &s.sigma.to_dense(), Some(header), &["seed 4".into()]).unwrap();
    let back = read_matrix_market(Cursor::new(buf)).unwrap();
    assert_eq!(back.matrix, s.sigma.to_dense());
    assert_eq!(back.dyadic, Some(header));
    assert!(!back.pattern_only);
}

#[test]
fn general_matrix_round_trips_exactly() {
    let r = spd_dyadic(3, 1, 5, None).unwrap().r.to_dense();
    let header = DyadicHeader { height: 3, breadth: 1, kind: DyadicKind::Vertical };
    let mut buf = Vec::new();
    write_general(&mut buf, &r, Some(header), &[]).unwrap();
    let back = read_matrix_market(Cursor::new(buf)).unwrap();
    assert_eq!(back.matrix, r);
    assert_eq!(back.dyadic.unwrap().kind, DyadicKind::Vertical);
}

#[test]
fn pattern_round_trips() {
    let g = random_band(50, 3, 0.6, 9).unwrap();
    let mut buf = Vec::new();
    write_pattern(&mut buf, &g, &[]).unwrap();
    let back = read_matrix_market(Cursor::new(buf)).unwrap();
    assert!(back.pattern_only);
    assert_eq!(back.graph().unwrap(), g);
}

#[test]
fn permutation_files_are_one_based() {
    let pi = random_permutation(25, 3);
    let mut buf = Vec::new();
    write_permutation(&mut buf, &pi).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.lines().all(|l| l.parse::<usize>().unwrap() >= 1));
    assert_eq!(read_permutation(Cursor::new(buf)).unwrap(), pi);
    assert!(read_permutation(Cursor::new("1\n0\n")).is_err());
    assert!(read_permutation(Cursor::new("1\n1\n")).is_err());
}

#[test]
fn malformed_input_reports_a_line() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 x 1.0\n";
    match read_matrix_market(Cursor::new(text)) {
        Err(dyapack_core::Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}
