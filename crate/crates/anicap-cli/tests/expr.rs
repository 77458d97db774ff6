use anicap_cli::expr::{Expr, Vars};

fn eval(src: &str, n: usize) -> f64 {
    let e = Expr::parse(src, n).unwrap_or_else(|err| panic!("{src}: {err}"));
    e.eval(&Vars { xi: &[0.3, -0.4, 0.5], ell: 1.25, kernel: &[0.7, 0.2] })
}

#[test]
fn precedence_and_associativity() {
    assert_eq!(eval("1 + 2 * 3", 1), 7.0);
    assert_eq!(eval("(1 + 2) * 3", 1), 9.0);
    assert_eq!(eval("2 ^ 3 ^ 2", 1), 512.0);
    assert_eq!(eval("-2 ^ 2", 1), -4.0);
    assert_eq!(eval("8 / 4 / 2", 1), 1.0);
    assert_eq!(eval("2·3", 1), 6.0);
    assert_eq!(eval("1e-2 * 100", 1), 1.0);
    assert_eq!(eval("−1 + 3", 1), 2.0);
}

#[test]
fn variables_in_every_spelling() {
    for s in ["ξ1", "xi1", "ξ₁", "xi_1"] {
        assert_eq!(eval(s, 2), 0.3, "{s}");
    }
    assert_eq!(eval("ξ3", 2), 0.5);
    assert_eq!(eval("ℓ", 1), 1.25);
    assert_eq!(eval("ell^(-1)", 1), 0.8);
    assert_eq!(eval("k2", 2), 0.2);
    assert!((eval("cos(pi) + sqrt(4) + ln(exp(1)) + abs(-1) + sin(0)", 1) - 3.0).abs() < 1e-15);
}

#[test]
fn kernel_usage_is_reported() {
    assert!(Expr::parse("ell + 0.1*k1", 1).unwrap().uses_kernel());
    assert!(!Expr::parse("ell + ξ2", 1).unwrap().uses_kernel());
}

#[test]
fn errors_carry_positions() {
    let e = Expr::parse("1 + ", 1).unwrap_err();
    assert_eq!(e.pos, 4);
    let e = Expr::parse("ξ3", 1).unwrap_err();
    assert!(e.msg.contains("out of range"), "{}", e.msg);
    assert!(Expr::parse("k2", 1).is_err());
    assert!(Expr::parse("foo", 1).unwrap_err().msg.contains("unknown"));
    assert!(Expr::parse("sqrt 2", 1).is_err());
    assert!(Expr::parse("(1", 1).is_err());
    assert_eq!(Expr::parse("1 2", 1).unwrap_err().pos, 2);
}
