"""Smoke test for the bosonmc Python extension.

Build and install first, e.g. ``pip install ./crates/python`` or
``maturin develop -m crates/python/Cargo.toml``, then run this file.
"""

import itertools
import math

import bosonmc


def permutation_sum(rows):
    n = len(rows)
    return sum(math.prod(rows[i][s[i]] for i in range(n)) for s in itertools.permutations(range(n)))


def main():
    a = [[1, 2], [3, 4]]
    assert bosonmc.permanent(a) == 10
    u = bosonmc.haar_random(5, 7)
    sub = [row[:3] for row in u.rows()[:3]]
    for method in ("ryser", "glynn"):
        assert abs(bosonmc.permanent(sub, method) - permutation_sum(sub)) < 1e-12

    est, err = bosonmc.gurvits_estimate(sub, 20000, 1)
    assert abs(est - permutation_sum(sub)) < 5 * err

    h = 1 / math.sqrt(2)
    bs = bosonmc.Unitary([[h, h], [h, -h]])
    assert abs(bosonmc.output_probability(bs, "11", "11")) < 1e-15
    assert abs(bosonmc.output_probability(bs, "11", "11", s=0.5) - 0.375) < 1e-12

    enc, dev = bosonmc.encode_unitary(12, 3.0)
    assert enc.unitarity_defect() < 1e-10 and dev < 1e-3
    assert abs(bosonmc.efimov_potential([0.0, 1.0, 2.0]) + 0.0625) < 1e-15
    assert bosonmc.hard_shell([0.0, 1.0, 2.0], 1.0, "include")
    assert not bosonmc.hard_shell([0.0, 1.0, 2.0], 1.0, "exclude")

    cfg = bosonmc.Config()
    cfg.jitter_samples = 200
    ideal = cfg.distribution(s=1.0)
    classical = cfg.distribution(s=0.0)
    assert len(ideal) == 220
    assert 0.01 < bosonmc.tvd(ideal, classical) < 1

    exact = cfg.exact_e1(ideal)
    sampled = cfg.sampled_e1(ideal, 20000, 3)
    assert exact.e1 < 0
    assert abs(exact.e1 - sampled.e1) < 4 * math.hypot(exact.stderr, sampled.stderr)
    assert cfg.exact_e1(classical).e1 > exact.e1

    again = bosonmc.Config(cfg.to_toml())
    assert again.to_toml() == cfg.to_toml()

    try:
        bosonmc.Config("bogus = 1")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown key accepted")

    print("ideal", exact, "sampled", sampled)
    print("python smoke test passed")


if __name__ == "__main__":
    main()
