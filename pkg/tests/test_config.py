from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genschro.config import load_config, parse_config, serialize_config
from genschro.errors import ConfigurationError

MINIMAL = """\
grid.half_width = 10
grid.points = 201
time.dt = 0.01
time.steps = 5
"""
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def with_line(extra):
    """MINIMAL with ``extra`` appended, replacing any line that sets the same key."""
    key = extra.split("=")[0].strip()
    kept = [l for l in MINIMAL.splitlines() if l.split("=")[0].strip() != key]
    return "\n".join(kept + [extra]) + "\n"


def test_minimal_defaults():
    c = parse_config(MINIMAL)
    assert (c.hbar, c.mass, c.phi_mode, c.form, c.snapshot_every) == (1.0, 1.0, "pt_of_psi", "divergence", 10)
    assert c.mu_kind == "zero" and c.potential_kind == "zero"
    assert c.precision == 17 and c.spectral_k == 8
    assert c.grid().points == 201


def test_comments_and_blank_lines():
    c = parse_config("# header\n\n" + MINIMAL + 'output.dir = "a#b"  # trailing\n')
    assert c.output_dir == "a#b"


def test_bare_words_for_strings():
    c = parse_config(MINIMAL + "mu.kind = quadratic_real\nmu.gamma = 0.1\n")
    assert c.mu_kind == "quadratic_real"
    assert c.mu().gamma == 0.1


def test_missing_lambda():
    text = MINIMAL + 'mu.kind = "linear_imag"\n'
    with pytest.raises(ConfigurationError, match="mu.lambda") as err:
        parse_config(text)
    assert err.value.line == 5


def test_unknown_key_named_with_line():
    with pytest.raises(ConfigurationError, match="grid.width") as err:
        parse_config(MINIMAL + "grid.width = 3\n")
    assert err.value.line == 5 and err.value.key == "grid.width"


@pytest.mark.parametrize(
    "line",
    ['time.steps = "ten"', "time.steps = 2.5", "time.enforce_pt = 1", "physics.hbar = abc", "grid.points = true",
     "physics.mass = inf", "mu.kind = 3"],
)
def test_type_mismatch_has_line(line):
    with pytest.raises(ConfigurationError) as err:
        parse_config(with_line(line))
    assert err.value.line == with_line(line).count("\n")


@pytest.mark.parametrize("key", ["grid.half_width", "grid.points", "time.dt", "time.steps"])
def test_missing_required(key):
    text = "\n".join(l for l in MINIMAL.splitlines() if not l.startswith(key))
    with pytest.raises(ConfigurationError, match=key):
        parse_config(text)


@pytest.mark.parametrize(
    "extra",
    ["time.dt = -0.1", "grid.points = 200", "grid.half_width = 0", 'mu.kind = "cubic"', 'assembly.form = "weak"',
     'initial.phi_mode = "mirror"', "spectral.k = 0", "output.precision = 30", "initial.sigma = 0",
     "physics.mass = 0", "time.snapshot_every = 0"],
)
def test_invalid_values(extra):
    with pytest.raises(ConfigurationError):
        parse_config(with_line(extra))


def test_duplicate_key():
    with pytest.raises(ConfigurationError, match="duplicate") as err:
        parse_config(MINIMAL + "time.dt = 0.02\n")
    assert err.value.line == 5


def test_not_key_value():
    with pytest.raises(ConfigurationError) as err:
        parse_config(MINIMAL + "just words\n")
    assert err.value.line == 5


def test_relative_file_paths(tmp_path):
    x = np.linspace(-12, 12, 97)
    np.savetxt(tmp_path / "mu.dat", np.c_[x, 0.01 * x**2])
    (tmp_path / "s.conf").write_text(MINIMAL + 'mu.kind = "table"\nmu.file = "mu.dat"\n')
    c = load_config(tmp_path / "s.conf")
    assert Path(c.mu_file) == tmp_path / "mu.dat"
    assert c.mu().table(1.0) == pytest.approx(0.01)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        parse_config(MINIMAL + 'potential.kind = "table"\npotential.file = "nope.dat"\n', tmp_path)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.conf")


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.conf")))
def test_shipped_configs_round_trip(name):
    c = load_config(CONFIGS / name)
    again = parse_config(serialize_config(c))
    assert again == c
    assert serialize_config(again) == serialize_config(c)


@settings(max_examples=60, deadline=None)
@given(
    hw=st.floats(0.5, 100),
    half=st.integers(1, 500),
    dt=st.floats(1e-6, 1.0),
    steps=st.integers(0, 10_000),
    x0=st.floats(-5, 5),
    gamma=st.floats(0, 1),
    form=st.sampled_from(["divergence", "expanded"]),
)
def test_round_trip_property(hw, half, dt, steps, x0, gamma, form):
    text = (
        f"grid.half_width = {hw!r}\ngrid.points = {2 * half + 1}\ntime.dt = {dt!r}\ntime.steps = {steps}\n"
        f'initial.x0 = {x0!r}\nmu.kind = "quadratic_real"\nmu.gamma = {gamma!r}\nassembly.form = "{form}"\n'
    )
    c = parse_config(text)
    assert parse_config(serialize_config(c)) == c
