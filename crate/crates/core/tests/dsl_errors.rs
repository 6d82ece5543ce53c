use odengine::{parse_constraints, parse_dependency, parse_proof, parse_table, Error};

fn position(e: Error) -> (usize, usize) {
    match e {
        Error::Syntax { line, column, .. } => (line, column),
        other => panic!("expected a syntax error, got {other}"),
    }
}

#[test]
fn malformed_constraint_documents() {
    let corpus: &[(&str, (usize, usize))] = &[
        ("od [A,] -> [B]", (1, 7)),
        ("od [A] -> [B,]", (1, 14)),
        ("od [A B] -> [C]", (1, 7)),
        ("od A -> [B]", (1, 4)),
        ("od [A] -> ", (1, 11)),
        ("od [A] <-> [B]", (1, 8)),
        ("oeq [A] -> [B]", (1, 9)),
        ("oc [A] ~~ [B]", (1, 9)),
        ("fd [A] => {B}", (1, 4)),
        ("fd {A} -> {B}", (1, 8)),
        ("const", (1, 6)),
        ("const 9", (1, 7)),
        ("const A B", (1, 9)),
        ("attrs A,,B", (1, 9)),
        ("attrs A\nattrs B", (2, 1)),
        ("# ok\n\n   odd [A] -> [B]", (3, 4)),
        ("od [A] -> [B]\r\nod [C -> [D]", (2, 7)),
        ("od [é] -> [B]", (1, 5)),
        ("od [_A] -> [B]", (1, 5)),
    ];
    for (text, want) in corpus {
        let got = position(parse_constraints(text).unwrap_err());
        assert_eq!(got, *want, "{text:?}");
    }
}

#[test]
fn malformed_dependencies_and_proofs() {
    assert_eq!(position(parse_dependency("  od [A] -> [B] #x").unwrap_err()), (1, 17));
    let e = parse_proof("1: od [A] -> [B] [Premise]").unwrap_err();
    assert_eq!(position(e), (1, 1));
    let e = parse_proof("goal od [A] -> [B]\n1: od [A] -> [B] [Premise(1]").unwrap_err();
    assert_eq!(position(e), (2, 28));
    let e = parse_proof("goal od [A] -> [B]\n1: od [A] -> [B] [Ref {X=[A] Y=[]}]").unwrap_err();
    assert_eq!(position(e), (2, 30));
}

#[test]
fn malformed_tables() {
    assert!(matches!(parse_table("A,,C\n1,2,3\n"), Err(Error::Table(_))));
    assert!(matches!(parse_table("A,A\n1,2\n"), Err(Error::Schema(_))));
    assert!(matches!(parse_table("A,B\n1,2,3\n"), Err(Error::Table(_))));
    assert!(matches!(parse_table("A\n1\nx\n"), Err(Error::Table(_))));
}
