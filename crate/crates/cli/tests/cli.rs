use std::process::{Command, Output};

fn qfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfl"))
        .args(args)
        .output()
        .expect("qfl runs")
}

fn stdout(args: &[&str]) -> String {
    let out = qfl(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    qfl(args).status.code().expect("exit code")
}

#[test]
fn push_example() {
    let out = stdout(&["push", "--poly", "z^2 - lam"]);
    assert_eq!(
        out,
        "raw: z^2 - 4*z*lam + 4*lam^2\nreduced: z - 2*lam\ncollapsed: true\n"
    );
}

#[test]
fn invariant_curves_are_preperiodic() {
    for p in ["z^2 + lam - z", "z^2 + z + lam + 1"] {
        assert_eq!(
            stdout(&["detect", "--poly", p]),
            "preperiodic preperiod=0 period=1\n"
        );
    }
    let out = stdout(&["detect", "--poly", "z"]);
    assert!(out.starts_with("not-preperiodic"), "{out}");
}

#[test]
fn green_of_two_is_log_two() {
    assert_eq!(
        stdout(&["green", "--z", "2+0i", "--lam", "0+0i", "--eps", "1e-9"]),
        "0.693147181 ± 1e-9\n"
    );
}

#[test]
fn orbit_csv_degrees() {
    let out = stdout(&["orbit", "--poly", "z", "--steps", "6"]);
    let sums: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(sums, ["1", "2", "3", "5", "9", "17", "33"]);
    assert!(out.lines().last().unwrap().starts_with("6,32,1,33,33/64,"));
}

#[test]
fn heights() {
    let cases = [
        ("0", "1/2"),
        ("lam", "1"),
        ("1/lam", "3/2"),
        ("-7/3", "1/2"),
        ("(lam^2+1)/lam", "2"),
    ];
    for (section, h) in cases {
        let out = stdout(&["height", "--section", section]);
        let first = out.lines().next().unwrap();
        assert!(
            first.starts_with(&format!("height {h} stabilized")),
            "{section}: {first}"
        );
    }
}

#[test]
fn periodic_points_at_zero() {
    let out = stdout(&["perpoints", "--lam", "0", "--period", "2"]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("re_z,im_z,period,re_mult,im_mult,stability")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').take(5).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let cycle: Vec<_> = rows.iter().filter(|r| r[2] == 2.0).collect();
    assert_eq!(cycle.len(), 2);
    for r in cycle {
        assert!((r[0] + 0.5).abs() < 1e-10 && (r[1].abs() - 0.75f64.sqrt()).abs() < 1e-10);
        assert!((r[3] - 4.0).abs() < 1e-10 && r[4].abs() < 1e-10);
    }
}

#[test]
fn dynatomic_two() {
    assert_eq!(
        stdout(&["dynatomic", "--period", "2"]),
        "z^2 + z + lam + 1\n"
    );
}

#[test]
fn follow_fixed_point() {
    let out = stdout(&[
        "follow", "--lam", "0", "--z", "1", "--period", "1", "--lam1", "0.1",
    ]);
    let z: f64 = out.trim().strip_suffix("+0i").unwrap().parse().unwrap();
    assert!((z - (1.0 + 0.6f64.sqrt()) / 2.0).abs() < 1e-8);
}

#[test]
fn equidistribution() {
    for (lam, w, n, tol) in [
        ("0", "3", "10", 1e-6),
        ("0", "2", "20", 1e-6),
        ("i", "4", "20", 1e-4),
    ] {
        let d: f64 = stdout(&["equidist", "--lam", lam, "--z", w, "--steps", n])
            .trim()
            .parse()
            .unwrap();
        assert!(d <= tol, "{lam} {w} {n}: {d}");
    }
}

#[test]
fn membership() {
    assert!(stdout(&["mandel", "--lam", "-1"]).starts_with("no-escape"));
    assert!(stdout(&["mandel", "--lam", "1"]).starts_with("escapes G=0.203677261"));
    assert!(stdout(&["inK", "--z", "3", "--lam", "-1"]).starts_with("escapes"));
}

#[test]
fn scan_verdicts() {
    assert!(stdout(&["scan", "--poly", "z - 3"]).starts_with("not-contained z=3+0i"));
    assert_eq!(
        stdout(&["scan", "--poly", "z^2 + lam - z"]),
        "no-witness tested=100 skipped=0\n"
    );
}

#[test]
fn render_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let images: Vec<Vec<u8>> = ["1", "4", "8"]
        .iter()
        .map(|w| {
            let path = dir.path().join(format!("m{w}.pgm"));
            let p = path.to_str().unwrap();
            stdout(&[
                "render",
                "--window",
                "-2.1,0.6,-1.2,1.2",
                "--px",
                "120x90",
                "--workers",
                w,
                "--out",
                p,
            ]);
            std::fs::read(path).unwrap()
        })
        .collect();
    assert!(images[0].starts_with(b"P5\n120 90\n255\n"));
    assert_eq!(images[0].len(), b"P5\n120 90\n255\n".len() + 120 * 90);
    assert!(images.iter().all(|img| *img == images[0]));

    let path = dir.path().join("julia.pgm");
    stdout(&[
        "render",
        "--kind",
        "dynamical",
        "--lam",
        "-1",
        "--window",
        "-2,2,-2,2",
        "--px",
        "40x40",
        "--out",
        path.to_str().unwrap(),
    ]);
    let img = std::fs::read(path).unwrap();
    let pixels = &img[b"P5\n40 40\n255\n".len()..];
    assert!(pixels.contains(&0) && pixels.iter().any(|&v| v > 0));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["push", "--help"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["bogus"]), 1);
    assert_eq!(code(&["push"]), 1);
    assert_eq!(code(&["green", "--z", "0", "--lam", "0", "--eps", "-1"]), 1);
    assert_eq!(
        code(&["render", "--kind", "dynamical", "--out", "/dev/null"]),
        1
    );
    assert_eq!(code(&["push", "--poly", "z^^2"]), 2);
    assert_eq!(code(&["push", "--poly", "w + 1"]), 2);
    assert_eq!(code(&["green", "--z", "2+", "--lam", "0"]), 2);
    assert_eq!(code(&["height", "--section", "z/lam"]), 2);
    assert_eq!(
        code(&["render", "--window", "0,1,2", "--out", "/dev/null"]),
        2
    );
    assert_eq!(code(&["orbit", "--poly", "z", "--budget", "20"]), 3);
    assert_eq!(code(&["height", "--section", "1/lam", "--budget", "4"]), 3);
    assert_eq!(
        code(&["follow", "--lam", "0", "--z", "0.5", "--period", "1", "--lam1", "0.25"]),
        4
    );
    assert_eq!(
        code(&["equidist", "--lam", "0", "--z", "0.5", "--steps", "5"]),
        4
    );
}

#[test]
fn output_is_reproducible() {
    let args = ["perpoints", "--lam", "0.3-0.2i", "--period", "5"];
    assert_eq!(stdout(&args), stdout(&args));
    let scan = ["scan", "--poly", "z^2 - 2*lam", "--seed", "7"];
    assert_eq!(stdout(&scan), stdout(&scan));
}
