//! Composition soundness: series / parallel / loop h-maps must equal
//! brute-force implementation enumeration exactly on random small
//! catalogues (integer-valued, so float equality is exact).

use mcd_core::antichain::pareto_min;
use mcd_core::dp::{
    loop_trace, parallel, series, FeedbackSpec, Impl, ImplId,
};
use mcd_core::poset::{leq, value_eq, Poset, Value};
use mcd_core::Dpi;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn num(u: &str) -> Poset {
    Poset::numeric(u)
}

fn pair(a: f64, b: f64) -> Value {
    Value::Tuple(vec![Value::Num(a), Value::Num(b)])
}

fn rand_table(
    rng: &mut ChaCha8Rng,
    fun_poset: &Poset,
    res_poset: &Poset,
    rows: usize,
    tag: &str,
) -> (Dpi, Vec<Impl>) {
    let rand_val = |rng: &mut ChaCha8Rng, p: &Poset| -> Value {
        fn go(rng: &mut ChaCha8Rng, p: &Poset) -> Value {
            match p {
                Poset::Numeric { .. } => Value::Num(rng.gen_range(0..6) as f64),
                Poset::Product(fs) => Value::Tuple(fs.iter().map(|f| go(rng, f)).collect()),
                Poset::Opposite(inner) => go(rng, inner),
                _ => unreachable!(),
            }
        }
        go(rng, p)
    };
    let impls: Vec<Impl> = (0..rows)
        .map(|k| Impl {
            id: ImplId::atom(&format!("{tag}{k}")),
            prov: rand_val(rng, fun_poset),
            req: rand_val(rng, res_poset),
        })
        .collect();
    (
        Dpi::from_table(fun_poset.clone(), res_poset.clone(), impls.clone()),
        impls,
    )
}

fn assert_same_frontier(got: &[Value], want: &[Value], poset: &Poset, ctx: &str) {
    assert_eq!(got.len(), want.len(), "{ctx}: sizes differ: got {got:?} want {want:?}");
    for w in want {
        assert!(
            got.iter().any(|g| value_eq(g, w, poset).unwrap()),
            "{ctx}: missing {w:?}; got {got:?}"
        );
    }
}

#[test]
fn series_matches_pair_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f_poset = num("f");
    let mid = Poset::product(vec![num("m1"), num("m2")]);
    let r_poset = Poset::product(vec![num("r1"), num("r2")]);
    for case in 0..60 {
        let (d1, i1) = rand_table(&mut rng, &f_poset, &mid, 6, "a");
        let (d2, i2) = rand_table(&mut rng, &mid, &r_poset, 6, "b");
        let comp = series(d1, d2).unwrap();
        for fq in 0..6 {
            let f = Value::Num(fq as f64);
            let got = comp.eval_h(&f).unwrap();
            // brute force over impl pairs
            let mut pts = Vec::new();
            for a in &i1 {
                if !leq(&f, &a.prov, &f_poset).unwrap() {
                    continue;
                }
                for b in &i2 {
                    if leq(&a.req, &b.prov, &mid).unwrap() {
                        pts.push(b.req.clone());
                    }
                }
            }
            let want = pareto_min(pts, &r_poset).unwrap();
            assert_same_frontier(got.elems(), &want, &r_poset, &format!("series case {case} f {fq}"));
        }
    }
}

#[test]
fn series_identity_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f_poset = num("f");
    let mid = num("m");
    let (d1, _) = rand_table(&mut rng, &f_poset, &mid, 5, "a");
    let base = {
        let (d1b, _) = rand_table(&mut ChaCha8Rng::seed_from_u64(3), &f_poset, &mid, 5, "a");
        d1b
    };
    let comp = series(d1, Dpi::identity(mid.clone())).unwrap();
    for fq in 0..6 {
        let f = Value::Num(fq as f64);
        assert!(comp
            .eval_h(&f)
            .unwrap()
            .same_upper_set(&base.eval_h(&f).unwrap())
            .unwrap());
    }
}

#[test]
fn series_empty_propagates() {
    let f_poset = num("f");
    let mid = num("m");
    let r_poset = num("r");
    let d1 = Dpi::from_table(
        f_poset.clone(),
        mid.clone(),
        vec![Impl {
            id: ImplId::atom("only"),
            prov: Value::Num(3.0),
            req: Value::Num(1.0),
        }],
    );
    let d2 = Dpi::from_table(
        mid,
        r_poset,
        vec![Impl {
            id: ImplId::atom("b"),
            prov: Value::Num(9.0),
            req: Value::Num(2.0),
        }],
    );
    let comp = series(d1, d2).unwrap();
    assert!(comp.eval_h(&Value::Num(5.0)).unwrap().is_empty());
    assert!(!comp.eval_h(&Value::Num(2.0)).unwrap().is_empty());
}

#[test]
fn series_middle_mismatch_is_error() {
    let d1 = Dpi::identity(num("a"));
    let d2 = Dpi::identity(num("b"));
    assert!(series(d1, d2).is_err());
}

#[test]
fn parallel_matches_cartesian_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let fa = num("fa");
    let fb = num("fb");
    let ra = Poset::product(vec![num("x"), num("y")]);
    let rb = num("z");
    for case in 0..40 {
        let (d1, i1) = rand_table(&mut rng, &fa, &ra, 4, "a");
        let (d2, i2) = rand_table(&mut rng, &fb, &rb, 4, "b");
        let comp = parallel(d1, d2);
        let res_poset = comp.res_poset.clone();
        for q in 0..8 {
            let f = pair((q % 4) as f64, (q / 4 + 1) as f64);
            let got = comp.eval_h(&f).unwrap();
            let mut pts = Vec::new();
            let fs = f.as_tuple().unwrap();
            for a in &i1 {
                if !leq(&fs[0], &a.prov, &fa).unwrap() {
                    continue;
                }
                for b in &i2 {
                    if leq(&fs[1], &b.prov, &fb).unwrap() {
                        pts.push(Value::Tuple(vec![a.req.clone(), b.req.clone()]));
                    }
                }
            }
            let want = pareto_min(pts, &res_poset).unwrap();
            assert_same_frontier(got.elems(), &want, &res_poset, &format!("parallel case {case} q {q}"));
        }
    }
}

#[test]
fn parallel_infeasible_side_infects_composite() {
    let d1 = Dpi::from_table(num("f"), num("r"), vec![]);
    let d2 = Dpi::identity(num("g"));
    let comp = parallel(d1, d2);
    assert!(comp.eval_h(&pair(0.0, 0.0)).unwrap().is_empty());
}

/// Loop oracle: enumerate implementations of the inner problem and keep
/// those whose fed-back resource is covered by their own fed-back
/// functionality.
fn loop_brute_force(
    impls: &[Impl],
    fun_poset: &Poset,
    res_poset: &Poset,
    f_ext: &Value,
) -> Vec<Value> {
    // layout: F = (ext, fb), R = (ext, fb); pair (1 -> 1)
    let mut pts = Vec::new();
    for i in impls {
        let pf = i.prov.as_tuple().unwrap();
        let rf = i.req.as_tuple().unwrap();
        let fb_fun_poset = match fun_poset {
            Poset::Product(fs) => &fs[1],
            _ => unreachable!(),
        };
        let ext_fun_poset = match fun_poset {
            Poset::Product(fs) => &fs[0],
            _ => unreachable!(),
        };
        if leq(f_ext, &pf[0], ext_fun_poset).unwrap()
            && leq(&rf[1], &pf[1], fb_fun_poset).unwrap()
        {
            pts.push(rf[0].clone());
        }
    }
    let ext_res_poset = match res_poset {
        Poset::Product(fs) => fs[0].clone(),
        _ => unreachable!(),
    };
    pareto_min(pts, &ext_res_poset).unwrap()
}

#[test]
fn loop_matches_consistent_impl_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let fun_poset = Poset::product(vec![num("f"), num("fb")]);
    let res_poset = Poset::product(vec![num("r"), num("fb")]);
    for case in 0..120 {
        let (inner, impls) = rand_table(&mut rng, &fun_poset, &res_poset, 8, "i");
        let traced = loop_trace(
            inner,
            FeedbackSpec {
                pairs: vec![(1, 1)],
            },
        )
        .unwrap();
        for fq in 0..6 {
            let f = Value::Num(fq as f64);
            let got = traced.eval_h(&f).unwrap();
            let want = loop_brute_force(&impls, &fun_poset, &res_poset, &f);
            assert_same_frontier(
                got.elems(),
                &want,
                &traced.res_poset,
                &format!("loop case {case} f {fq}"),
            );
        }
    }
}

#[test]
fn loop_inactive_feedback_equals_loop_free() {
    // feedback requirement constant at bottom: tracing must not constrain
    let fun_poset = Poset::product(vec![num("f"), num("fb")]);
    let res_poset = Poset::product(vec![num("r"), num("fb")]);
    let impls: Vec<Impl> = (0..5)
        .map(|k| Impl {
            id: ImplId::atom(&format!("i{k}")),
            prov: pair(k as f64, (k % 2) as f64),
            req: pair((5 - k) as f64, 0.0),
        })
        .collect();
    let inner = Dpi::from_table(fun_poset.clone(), res_poset, impls.clone());
    let traced = loop_trace(inner, FeedbackSpec { pairs: vec![(1, 1)] }).unwrap();
    for fq in 0..5 {
        let f = Value::Num(fq as f64);
        let got = traced.eval_h(&f).unwrap();
        // loop-free with the fb factor dropped: any impl with prov_ext >= f
        let mut pts = Vec::new();
        for i in &impls {
            if i.prov.as_tuple().unwrap()[0].as_num().unwrap() >= fq as f64 {
                pts.push(i.req.as_tuple().unwrap()[0].clone());
            }
        }
        let want = pareto_min(pts, &num("r")).unwrap();
        assert_same_frontier(got.elems(), &want, &num("r"), &format!("inactive loop f {fq}"));
    }
}

#[test]
fn associativity_of_series_via_h_probing() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let p0 = num("p0");
    let p1 = num("p1");
    let p2 = num("p2");
    let p3 = num("p3");
    for case in 0..20 {
        let (a, _) = rand_table(&mut rng, &p0, &p1, 5, "a");
        let (b, _) = rand_table(&mut rng, &p1, &p2, 5, "b");
        let (c, _) = rand_table(&mut rng, &p2, &p3, 5, "c");
        let left = series(series(a.clone(), b.clone()).unwrap(), c.clone()).unwrap();
        let right = series(a, series(b, c).unwrap()).unwrap();
        for fq in 0..6 {
            let f = Value::Num(fq as f64);
            let l = left.eval_h(&f).unwrap();
            let r = right.eval_h(&f).unwrap();
            assert!(
                l.same_upper_set(&r).unwrap(),
                "series associativity case {case} f {fq}: {:?} vs {:?}",
                l.elems(),
                r.elems()
            );
        }
    }
}
