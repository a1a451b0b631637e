import json
import logging

import numpy as np
import pytest

from rydgate.atomdata import (
    BUNDLED_N,
    IngestionError,
    blockade_radius,
    bundled_species,
    load_species,
    parse_species,
    save_species,
)
from rydgate.model import KHZ, OMEGA_MAX

# decay rates as tabulated (kHz): n -> (P, nS, (n+1)S)
TABLE = {
    40: (6.88, 17.53, 16.14),
    50: (3.20, 8.30, 7.77),
    60: (1.74, 4.57, 4.33),
    70: (1.06, 2.78, 2.66),
}


@pytest.mark.parametrize("n", BUNDLED_N)
def test_bundled_rates_match_table(n):
    s = bundled_species(n)
    p, sm, sp = TABLE[n]
    assert s.n == n
    assert s.Gamma_P == pytest.approx(p * KHZ, rel=1e-12)
    assert s.Gamma_Sminus == pytest.approx(sm * KHZ, rel=1e-12)
    assert s.Gamma_Splus == pytest.approx(sp * KHZ, rel=1e-12)


def test_blockade_radius_n70():
    assert blockade_radius(bundled_species(70)) == pytest.approx(4.6, abs=1e-12)


def test_forster_coupling_calibration(cs70):
    assert cs70.B(4.2) == pytest.approx(2.5 * OMEGA_MAX, rel=1e-9)


def test_interaction_power_laws(cs70):
    assert cs70.V(2.0) / cs70.V(4.0) == pytest.approx(64.0)
    assert cs70.B(2.0) / cs70.B(4.0) == pytest.approx(8.0)


def _raw():
    return {
        "species": "Cs133",
        "n": 70,
        "C6": 1.0,
        "C3": 2.0,
        "Gamma_P_kHz": 1.0,
        "Gamma_Sminus_kHz": 2.0,
        "Gamma_Splus_kHz": 3.0,
    }


@pytest.mark.parametrize("key", ["C6", "C3", "Gamma_P_kHz", "n", "species"])
def test_missing_key_is_named(key):
    d = _raw()
    del d[key]
    with pytest.raises(IngestionError) as exc:
        parse_species(d)
    assert exc.value.key == key
    assert key in str(exc.value)


@pytest.mark.parametrize("value", [0.0, -1.0, "abc", None])
def test_invalid_value_is_named(value):
    d = _raw()
    d["C3"] = value
    with pytest.raises(IngestionError) as exc:
        parse_species(d)
    assert exc.value.key == "C3"


def test_unknown_keys_warn(caplog):
    d = _raw()
    d["extra"] = 1
    with caplog.at_level(logging.WARNING):
        parse_species(d)
    assert "extra" in caplog.text


def test_round_trip(tmp_path, cs70):
    p = tmp_path / "s.json"
    save_species(cs70, p)
    back = load_species(p)
    assert back.C6 == cs70.C6 and back.C3 == cs70.C3
    assert np.isclose(back.Gamma_P, cs70.Gamma_P, rtol=1e-14)


def test_malformed_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(IngestionError):
        load_species(p)
    with pytest.raises(IngestionError):
        load_species(tmp_path / "missing.json")


def test_unbundled_n():
    with pytest.raises(IngestionError):
        bundled_species(55)


def test_rate_scaling(cs70):
    s = cs70.with_rates_scaled(2.0)
    assert s.Gamma_P == 2 * cs70.Gamma_P and s.C6 == cs70.C6
    assert json.loads(json.dumps(s.to_dict()))["Gamma_P_kHz"] == pytest.approx(2.12)
