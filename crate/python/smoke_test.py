"""Smoke test for the exfree extension.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/exfree-*.whl
"""

import cmath
import json
import math

import exfree


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def state_distance(a, b):
    return math.sqrt(abs(a[0] - b[0]) ** 2 + abs(a[1] - b[1]) ** 2)


def phase_unit():
    r = exfree.run_phase_unit(20, 20, 20, 5)
    assert r.exit_bin == 5
    assert close(r.phase, 5 * math.pi / 20)
    assert state_distance(r.out_state, (cmath.exp(1j * r.phase), 0)) < 1e-12
    assert close(r.survival_prob + r.lost_prob, 1.0)
    v = exfree.run_phase_unit(20, 20, 20, 5, input="V")
    assert close(v.survival_prob, r.survival_prob)
    try:
        exfree.run_phase_unit(20, 20, 20, 21)
    except ValueError:
        pass
    else:
        raise AssertionError("k > L accepted")


def surface():
    pts = exfree.survival_surface([(5, 5), (5, 10), (10, 10)], 5)
    assert [p[:2] for p in pts] == [(5, 5), (5, 10), (10, 10)]
    other = exfree.survival_surface([(5, 5), (5, 10), (10, 10)], 5, l=33)
    assert [p[3] for p in pts] == [p[3] for p in other]
    assert exfree.send_dit(32, 17) == 17


def protocol():
    h = 1 / math.sqrt(2)
    hadamard = [[h, h], [h, -h]]
    prog = exfree.compile(hadamard, 64)
    again = exfree.BobProgram.from_json(prog.to_json())
    assert again == prog
    r = exfree.run_protocol(prog, (1, 0), m=6, n=6)
    overlap = abs(r.out_state[0] * h + r.out_state[1] * h)
    assert 1 - overlap <= exfree.quantization_bound(64)
    assert r.tag_weight < 1e-12
    assert close(r.total_survival, math.prod(s[2] for s in r.stages))
    eq = exfree.BobProgram(3, 1, 2, 8, equalize=True)
    assert exfree.run_protocol(eq, (0.6, 0.8j)).exit_bin_total == 24
    alpha, beta, gamma, delta = exfree.zyz_angles([[1, 0], [0, 1]])
    assert close(gamma, 0.0)


def kraus():
    ok, report = exfree.kraus_verify(5, 5)
    assert ok
    assert json.loads(report)["simulator_deviation_block"] < 1e-10
    c1, c2, c3, c4 = exfree.kraus_coefficients(5, 500)
    assert c3 > 0.99 and c4 > 0.99


def ry_and_ccu():
    out, survival = exfree.ry_direct(10, 10, 3)
    angle = 3 * math.pi / 10
    assert state_distance(out, (math.cos(angle / 2), math.sin(angle / 2))) < 1e-12
    assert 0 < survival < 1
    x = [[0, 1], [1, 0]]
    assert all(row[3] < 1e-12 for row in exfree.ccu_table(x))
    flipped = exfree.apply_network((1, 0), True, True, x)
    assert abs(abs(flipped[1]) - 1) < 1e-12


if __name__ == "__main__":
    for check in (phase_unit, surface, protocol, kraus, ry_and_ccu):
        check()
        print(f"{check.__name__}: ok")
