"""Smoke test for the cotunnel Python bindings.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/cotunnel-*.whl
"""

import math

import cotunnel_py as ct


def main() -> None:
    cfg = ct.EnergyConfig(-3.0, 0.5, 1.0, 2.0)
    assert cfg.violations() == [], cfg.violations()

    singlet, triplet_m0, triplet_up, triplet_down = ct.total_output(cfg)
    assert abs(singlet - 0.0214286) < 1e-7, singlet
    assert abs(triplet_m0) < 1e-15
    assert triplet_up == 0.0 and triplet_down == 0.0
    assert abs(ct.total_singlet_closed_form(cfg) - singlet) < 1e-15

    paths = ct.path_amplitudes(cfg)
    assert [p[0] for p in paths] == ["I", "II", "III", "IV", "V", "VI"]
    for label, s, t in paths:
        cs, cf_t = ct.path_closed_form(label, cfg)
        assert math.isclose(s, cs, rel_tol=1e-10) and math.isclose(t, cf_t, rel_tol=1e-10)

    same = ct.total_output(cfg, "uu")
    assert max(abs(x) for x in same) < 1e-13

    bad = ct.EnergyConfig(-3.0, 1.0, 1.0, 2.0)
    assert any("Delta_L < Delta_R" in v for v in bad.violations())
    try:
        ct.total_output(bad)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    times = ct.on_shell_window(cfg, 20)
    series = ct.transition_probabilities(cfg, times)
    assert series["norm_drift"] < 1e-10
    c, _ = ct.fit_quadratic(series["t"], series["p_singlet"])
    predicted = ct.predicted_growth(cfg)
    assert abs(c - predicted) / predicted < 0.02, (c, predicted)

    print(f"smoke test ok: singlet={singlet:.7f}, fit/predicted={c / predicted:.5f}")


if __name__ == "__main__":
    main()
