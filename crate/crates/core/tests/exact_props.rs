use conred::exact::{is_zero_vec, parse_rational, fmt_rational, q, qf, Mat, Quotient, Rational, Subspace};
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| qf(n, d))
}

fn mat(max: usize) -> impl Strategy<Value = Mat> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(rat(), c), r).prop_map(move |rows| Mat::from_rows(rows, c))
    })
}

proptest! {
    #[test]
    fn rank_nullity(m in mat(5)) {
        prop_assert_eq!(m.rank() + m.kernel().dim(), m.cols());
    }

    #[test]
    fn kernel_vectors_are_killed(m in mat(5)) {
        for v in m.kernel().basis_vecs() {
            prop_assert!(is_zero_vec(&m.mul_vec(&v)));
        }
    }

    #[test]
    fn rref_is_idempotent_and_keeps_row_space(m in mat(5)) {
        let r = m.rref();
        prop_assert_eq!(r.rref(), r.clone());
        prop_assert_eq!(Subspace::row_space(&r), Subspace::row_space(&m));
    }

    #[test]
    fn rank_of_transpose(m in mat(5)) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn dimension_formula(a in mat(4), b in mat(4)) {
        let n = a.cols();
        let rows: Vec<Vec<Rational>> = b.row_vecs().into_iter().map(|mut v| { v.resize(n, q(0)); v }).collect();
        let (s, t) = (Subspace::row_space(&a), Subspace::span(n, &rows));
        let sum = s.sum(&t).unwrap();
        let cap = s.intersect(&t).unwrap();
        prop_assert_eq!(sum.dim() + cap.dim(), s.dim() + t.dim());
        prop_assert!(cap.is_subspace_of(&s) && cap.is_subspace_of(&t));
    }

    #[test]
    fn annihilator_dimension(m in mat(5)) {
        let s = Subspace::row_space(&m);
        let ann = s.annihilator();
        prop_assert_eq!(ann.dim() + s.dim(), s.ambient());
        for a in ann.basis_vecs() {
            for v in s.basis_vecs() {
                let dot = a.iter().zip(&v).fold(q(0), |acc, (x, y)| acc + x * y);
                prop_assert_eq!(dot, q(0));
            }
        }
    }

    #[test]
    fn quotient_lift_projects_back(m in mat(4), k in 0usize..3) {
        let whole = Subspace::row_space(&m);
        let sub = Subspace::span(whole.ambient(), &whole.basis_vecs().into_iter().take(k).collect::<Vec<_>>());
        let quo = Quotient::new(&whole, &sub).unwrap();
        prop_assert_eq!(quo.dim(), whole.dim() - sub.dim());
        for i in 0..quo.dim() {
            let c: Vec<Rational> = (0..quo.dim()).map(|j| if i == j { q(1) } else { q(0) }).collect();
            prop_assert_eq!(quo.project(&quo.lift(&c)).unwrap(), c);
        }
    }

    #[test]
    fn inverse_when_full_rank(m in mat(4)) {
        if m.rows() == m.cols() && m.rank() == m.cols() {
            let inv = m.inverse().unwrap();
            prop_assert_eq!(m.mul(&inv), Mat::identity(m.cols()));
        } else if m.rows() == m.cols() {
            prop_assert!(m.inverse().is_none());
        }
    }

    #[test]
    fn rational_text_round_trip(x in rat()) {
        prop_assert_eq!(parse_rational(&fmt_rational(&x)), Some(x));
    }
}
