"""Exit criteria. Each test prints one PASS/FAIL line (see the terminal summary)."""

import json
import time

import numpy as np
import pytest

from dlorasim.cli import main
from dlorasim.demod import demodulate_windows
from dlorasim.framing import chirp_count, payload_bit_count
from dlorasim.phy import ChirpFamily, chirp_samples, chirp_value, make_params
from dlorasim.sweep import SweepConfig, build_matrix, parse_pairs

UP, DOWN = ChirpFamily.UP, ChirpFamily.DOWN

# Reference isolation thresholds in dB (rows: reference, columns: interferer).
LABELS = ["7", "8", "9", "10", "11", "12", "7_D", "8_D", "9_D", "10_D", "11_D", "12_D"]
REFERENCE_DB = np.array(
    [
        [0, -10, -12, -12, -13, -14, -11, -11, -11, -11, -12, -13],
        [-12, 0, -13, -14, -15, -16, -13, -14, -14, -14, -14, -15],
        [-16, -15, 0, -16, -17, -18, -15, -16, -16, -17, -17, -17],
        [-18, -18, -18, 0, -19, -20, -18, -18, -19, -19, -20, -20],
        [-21, -21, -21, -21, 0, -21, -21, -21, -21, -22, -22, -23],
        [-23, -24, -24, -24, -24, 0, -23, -24, -24, -24, -25, -25],
        [-11, -11, -11, -11, -12, -13, 0, -10, -12, -12, -13, -14],
        [-13, -14, -14, -14, -14, -15, -12, 0, -13, -14, -15, -16],
        [-16, -16, -17, -17, -17, -17, -16, -15, 0, -16, -17, -18],
        [-18, -18, -19, -20, -20, -20, -18, -18, -18, 0, -19, -20],
        [-21, -21, -21, -22, -22, -23, -21, -21, -21, -21, 0, -21],
        [-23, -24, -24, -24, -25, -25, -23, -24, -24, -24, -24, 0],
    ]
)


def reference(ref, intf):
    return int(REFERENCE_DB[LABELS.index(ref), LABELS.index(intf)])


SPOT_PAIRS = [("7", "8"), ("7", "12"), ("7", "7_D"), ("12", "7"), ("7_D", "7"), ("7", "7")]
SAME_SF_CROSS = [(str(k), f"{k}_D") for k in range(7, 13)]
MIRRORED = [(b, a) for a, b in SAME_SF_CROSS]

# reduced-scale Monte-Carlo budget; everything else at the default parameters
SPOT_CONFIG = SweepConfig(min_errors=100, max_bits=10**6)


@pytest.fixture(scope="module")
def spot_matrix():
    pairs = []
    for pair in SPOT_PAIRS + SAME_SF_CROSS + MIRRORED:
        if pair not in pairs:
            pairs.append(pair)
    text = ",".join(f"{r}:{i}" for r, i in pairs)
    start = time.perf_counter()
    matrix = build_matrix(SPOT_CONFIG, parse_pairs(text))
    print(f"swept {len(pairs)} pairs in {time.perf_counter() - start:.0f} s")
    assert matrix.complete, [r.error for r in matrix.failed]
    return matrix


def test_1_loopback_all_channels(report):
    start = time.perf_counter()
    failures = 0
    checked = 0
    rng = np.random.default_rng(1)
    for sf in range(7, 13):
        p = make_params(sf)
        symbols = np.arange(p.m) if sf <= 9 else rng.integers(0, p.m, 2048)
        for family in (UP, DOWN):
            for chunk in np.array_split(symbols, max(1, len(symbols) // 256)):
                windows = np.array([chirp_samples(p, family, int(a)) for a in chunk])
                failures += int(np.count_nonzero(demodulate_windows(windows, p, family) != chunk))
                checked += len(chunk)
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 60
    report("1 loopback", ok, f"{failures} failures over {checked} symbols in {elapsed:.1f} s")
    assert failures == 0
    assert elapsed < 60


def test_2_discrete_orthogonality(report):
    worst = 0.0
    for sf in (7, 9):
        p = make_params(sf)
        for family in (UP, DOWN):
            rows = np.array([chirp_samples(p, family, a) for a in range(p.m)])
            gram = rows @ rows.conj().T
            np.fill_diagonal(gram, 0)
            worst = max(worst, float(np.abs(gram).max() / p.m))
    report("2 orthogonality", worst <= 1e-9, f"max |<x_a, x_a'>| / M = {worst:.2e} (limit 1e-9)")
    assert worst <= 1e-9


def test_3_conjugation_and_fold_transparency(report):
    p = make_params(7)
    chip = p.chip_period_s
    conj_err = max(abs(chirp_value(p, DOWN, 0, n * chip) - chirp_value(p, UP, 0, n * chip).conjugate()) for n in range(p.m))
    fold_err = max(
        abs(chirp_value(p, fam, a, n * chip) - chirp_value(p, fam, a, n * chip, fold=False))
        for fam in (UP, DOWN)
        for a in range(p.m)
        for n in range(p.m)
    )
    ok = conj_err <= 1e-12 and fold_err <= 1e-12
    report("3 duality/fold", ok, f"conjugation err {conj_err:.1e}, fold err {fold_err:.1e} (limit 1e-12)")
    assert conj_err <= 1e-12
    assert fold_err <= 1e-12


@pytest.mark.slow
def test_4_spot_reproduction(spot_matrix, report):
    lines = []
    ok = True
    for ref, intf in SPOT_PAIRS:
        got = spot_matrix.threshold(ref, intf)
        want = reference(ref, intf)
        good = got is not None and abs(got - want) <= 2
        ok &= good
        lines.append(f"({ref},{intf}) {got} vs {want}")
    report("4 spot thresholds +-2 dB", ok, "; ".join(lines))
    assert ok


@pytest.mark.slow
def test_5_same_sf_cross_family_isolation(spot_matrix, report):
    got = {pair: spot_matrix.threshold(*pair) for pair in SAME_SF_CROSS}
    ok = all(t is not None and t <= -9 for t in got.values())
    report("5 off-family isolation <= -9 dB", ok, ", ".join(f"({r},{i}) {t}" for (r, i), t in got.items()))
    assert ok


@pytest.mark.slow
def test_6_cross_family_mirror(spot_matrix, report):
    diffs = []
    for (a, b), (c, d) in zip(SAME_SF_CROSS, MIRRORED):
        x, y = spot_matrix.threshold(a, b), spot_matrix.threshold(c, d)
        diffs.append((f"{a}/{b}", x, y))
    ok = all(x is not None and y is not None and abs(x - y) <= 1 for _, x, y in diffs)
    report("6 mirror symmetry within 1 dB", ok, ", ".join(f"{n}: {x} vs {y}" for n, x, y in diffs))
    assert ok


def test_7_matrix_determinism_across_workers(tmp_path, report):
    args = ["matrix", "--pairs", "7:7,7:8,7:7_D,8_D:7,9:12_D,12:7", "--seed", "11", "--max-bits", "50000"]
    one, eight = tmp_path / "w1.json", tmp_path / "w8.json"
    assert main([*args, "--workers", "1", "--out", str(one)]) == 0
    assert main([*args, "--workers", "8", "--out", str(eight)]) == 0
    same = one.read_bytes() == eight.read_bytes()
    n = len(json.loads(one.read_text())["pairs"])
    report("7 determinism workers 1 vs 8", same, f"{n} pairs, byte-identical JSON: {same}")
    assert same


def test_8_framing_arithmetic(report):
    # 20-byte payload, rate 4/5: padded bits and symbol counts per SF
    expected_bits = {7: 168, 8: 160, 9: 180, 10: 160, 11: 176, 12: 192}
    expected_chirps = {7: 30, 8: 25, 9: 25, 10: 20, 11: 20, 12: 20}
    got_bits = {sf: payload_bit_count(20, sf) for sf in range(7, 13)}
    got_chirps = {sf: chirp_count(got_bits[sf], 1, sf) for sf in range(7, 13)}
    ok = got_bits == expected_bits and got_chirps == expected_chirps
    report("8 framing arithmetic", ok, f"bits {got_bits}, chirps {got_chirps}")
    assert ok
