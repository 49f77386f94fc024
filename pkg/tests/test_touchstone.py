import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiptrans.netcore import FrequencyGrid, NetworkError, OnePortNetwork, TwoPortNetwork
from chiptrans.touchstone import (
    TouchstoneError,
    TouchstoneOptions,
    parse_touchstone,
    read_touchstone,
    save_touchstone,
    write_touchstone,
)
from conftest import random_passive


def test_thru_ri():
    net, opts = parse_touchstone("# GHz S RI R 50\n140 0 0 1 0 1 0 0 0\n")
    assert isinstance(net, TwoPortNetwork)
    assert net.f[0] == 140e9
    np.testing.assert_array_equal(net.s[0], [[0, 1], [1, 0]])
    assert opts.resistance == 50 and opts.format == "RI"


def test_one_port_db():
    net, _ = parse_touchstone("# MHz S DB R 50\n100 -3.0103 90\n")
    assert isinstance(net, OnePortNetwork)
    assert net.f[0] == 100e6
    expected = 1j * 10 ** (-3.0103 / 20)
    assert abs(net.s[0] - expected) < 1e-15


def test_column_order_is_s11_s21_s12_s22():
    net, _ = parse_touchstone("# Hz S RI R 50\n1 1 0 2 0 3 0 4 0\n")
    np.testing.assert_array_equal(net.s[0].real, [[1, 3], [2, 4]])


def test_non_monotonic():
    with pytest.raises(TouchstoneError) as exc:
        parse_touchstone("# GHz S RI R 50\n2 0 0 1 0 1 0 0 0\n1 0 0 1 0 1 0 0 0\n")
    assert exc.value.lineno == 3


def test_missing_option_line():
    with pytest.raises(TouchstoneError) as exc:
        parse_touchstone("! only a comment\n1 0 0 1 0 1 0 0 0\n")
    assert exc.value.lineno == 2


def test_bad_option_line_reports_location():
    with pytest.raises(TouchstoneError) as exc:
        parse_touchstone("! c\n# GHz S XY R 50\n1 0 0\n")
    assert exc.value.lineno == 2 and "line 2" in str(exc.value)


def test_unsupported_parameter_type():
    with pytest.raises(TouchstoneError):
        parse_touchstone("# GHz Z RI R 50\n1 0 0 1 0 1 0 0 0\n")


def test_v2_rejected():
    with pytest.raises(TouchstoneError, match="v2"):
        parse_touchstone("[Version] 2.0\n# GHz S RI R 50\n")


def test_wrong_column_count():
    text = "# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n2 0 0 1 0 1 0 0 0 7 7\n"
    with pytest.raises(TouchstoneError) as exc:
        parse_touchstone(text)
    assert exc.value.lineno == 3
    with pytest.raises(TouchstoneError):
        parse_touchstone("# GHz S RI R 50\n1 0 0 1 0\n")


def test_comments_blank_lines_and_wrapped_records():
    text = (
        "! header\n\n# ghz s ma r 75\n"
        "1 0.1 10 0.9 -20 ! trailing comment\n"
        "   0.9 -20 0.2 30\n\n! between\n"
        "2 0.1 10 0.9 -20 0.9 -20 0.2 30\n"
    )
    net, opts = parse_touchstone(text)
    assert len(net) == 2 and opts.resistance == 75
    np.testing.assert_allclose(net.s[0], net.s[1])
    assert abs(net.s21[0] - 0.9 * np.exp(-1j * np.deg2rad(20))) < 1e-15


def test_option_defaults():
    net, opts = parse_touchstone("#\n1 0.5 0\n")
    assert opts.freq_unit == "GHz" and opts.format == "MA" and opts.resistance == 50
    assert net.f[0] == 1e9


def test_writer_thru_ma():
    grid = FrequencyGrid([140e9])
    s = np.array([[[0, 1], [1, 0]]], dtype=complex)
    text = write_touchstone(TwoPortNetwork(grid, s, 50), TouchstoneOptions("GHz", "S", "MA"))
    line = text.strip().splitlines()[-1].split()
    assert float(line[0]) == 140
    assert float(line[3]) == 1 and float(line[4]) == 0


def test_writer_db_column():
    grid = FrequencyGrid([1e9])
    s = np.full((1, 2, 2), 0.5 + 0j)
    text = write_touchstone(TwoPortNetwork(grid, s, 50), TouchstoneOptions(format="DB"))
    vals = [float(v) for v in text.strip().splitlines()[-1].split()]
    assert vals[1] == pytest.approx(20 * np.log10(0.5), rel=1e-11)


def test_writer_rejects_unequal_ports():
    net = TwoPortNetwork(FrequencyGrid([1e9]), np.zeros((1, 2, 2)), (50, 25))
    with pytest.raises(NetworkError):
        write_touchstone(net)


def test_writer_is_deterministic(rng):
    net = random_passive(rng)
    assert write_touchstone(net) == write_touchstone(net)


@pytest.mark.parametrize("fmt", ["RI", "MA", "DB"])
def test_round_trip_64_points(rng, fmt):
    net = random_passive(rng, n=64)
    back, opts = parse_touchstone(write_touchstone(net, TouchstoneOptions("MHz", "S", fmt, 50)))
    np.testing.assert_allclose(back.s, net.s, rtol=1e-9)
    np.testing.assert_allclose(back.f, net.f, rtol=1e-12)
    assert opts.format == fmt


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["RI", "MA", "DB"]), st.sampled_from(["Hz", "kHz", "MHz", "GHz"]))
def test_round_trip_property_two_port(seed, fmt, unit):
    net = random_passive(np.random.default_rng(seed), n=8, z_ref=75.0)
    back, _ = parse_touchstone(write_touchstone(net, TouchstoneOptions(unit, "S", fmt)))
    assert back.z_ref[0] == 75.0
    np.testing.assert_allclose(back.s, net.s, rtol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["RI", "MA", "DB"]))
def test_round_trip_property_one_port(seed, fmt):
    r = np.random.default_rng(seed)
    s = 0.9 * r.uniform(0.01, 1, 12) * np.exp(1j * r.uniform(-np.pi, np.pi, 12))
    net = OnePortNetwork(FrequencyGrid.linspace(1e9, 12e9, 12), s, 50)
    back, _ = parse_touchstone(write_touchstone(net, TouchstoneOptions(format=fmt)), ports=1)
    np.testing.assert_allclose(back.s, net.s, rtol=1e-9)


def test_file_io_uses_extension(tmp_path, rng):
    net = random_passive(rng, n=4)
    p = tmp_path / "x.s2p"
    save_touchstone(p, net)
    back, _ = read_touchstone(p)
    np.testing.assert_allclose(back.s, net.s, rtol=1e-9)
    bad = tmp_path / "y.s1p"
    save_touchstone(bad, net)
    with pytest.raises(TouchstoneError):
        read_touchstone(bad)
