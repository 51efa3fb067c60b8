import textwrap

import numpy as np
import pytest
import yaml

from synthgt.builder import fingerprint
from synthgt.config import ConfigValueError, ParseError, SchemaError, load_builders_from_config, load_configs

from conftest import pulse_seasonal_base


def doc(body: str) -> str:
    return textwrap.dedent(body)


MINIMAL = doc("""
    datasets:
      d:
        n_timesteps: 20
        n_samples: 4
        random_state: 1
        classes:
          - label: 0
            channels:
              - signals:
                  - {kind: gaussian_noise, sigma: 1}
                features:
                  - {kind: peak, amplitude: 2, random_location: true, length_pct: 0.25}
""")


def test_pulse_yaml_matches_fluent_bitwise(pulse_yaml):
    configs = load_configs(pulse_yaml)
    assert list(configs) == ["train", "test"]
    base = pulse_seasonal_base()
    for name, n, seed in (("train", 200, 42), ("test", 50, 43)):
        fluent = base.clone(n_samples=n, random_state=seed)
        assert fingerprint(configs[name]) == fluent.fingerprint()
        from_yaml = load_builders_from_config(pulse_yaml)[name].build()
        from_code = fluent.build()
        for key in ("X", "y", "mask", "signal", "feature"):
            assert from_yaml[key].tobytes() == from_code[key].tobytes()


def test_anchor_alias_yields_equal_class_specs(pulse_yaml):
    configs = load_configs(pulse_yaml)
    assert configs["train"].classes == configs["test"].classes


def test_text_input_and_integer_widening():
    cfg = load_configs(MINIMAL)["d"]
    spec = cfg.classes[0].channels[0].signals[0]
    assert spec.params == {"sigma": 1.0} and isinstance(spec.params["sigma"], float)


def test_typo_in_kind_names_path_and_suggestion():
    with pytest.raises(SchemaError) as info:
        load_configs(MINIMAL.replace("gaussian_noise", "gausian_noise"))
    msg = str(info.value)
    assert "datasets.d.classes[0].channels[0].signals[0].kind" in msg
    assert "gausian_noise" in msg and "gaussian_noise" in msg


def test_out_of_domain_value_reports_path():
    with pytest.raises(ConfigValueError) as info:
        load_configs(MINIMAL.replace("length_pct: 0.25", "length_pct: 1.5"))
    assert info.value.path == "datasets.d.classes[0].channels[0].features[0].length_pct"
    with pytest.raises(ConfigValueError) as info:
        load_configs(MINIMAL.replace("sigma: 1", "sigma: 0"))
    assert info.value.path.endswith("signals[0].sigma")


@pytest.mark.parametrize("old, new", [
    ("n_samples: 4", "n_sample: 4"),                 # unknown dataset key
    ("sigma: 1}", "sigma: 1, mu: 0}"),                # unknown generator param
    ("random_location: true", "random_locaton: true"),
    ("- label: 0", "- labl: 0"),
    ("n_timesteps: 20", "n_timesteps: twenty"),
    ("amplitude: 2,", ""),                            # missing required param
    ("random_state: 1", "random_state: true"),
])
def test_schema_errors(old, new):
    assert old in MINIMAL
    with pytest.raises(SchemaError):
        load_configs(MINIMAL.replace(old, new))


def test_unknown_top_level_key_and_schema_version():
    with pytest.raises(SchemaError):
        load_configs("extra: 1\n" + MINIMAL)
    with pytest.raises(SchemaError):
        load_configs("schema: 2\n" + MINIMAL)
    assert load_configs("schema: 1\n" + MINIMAL)


def test_malformed_yaml_reports_line():
    with pytest.raises(ParseError) as info:
        load_configs("datasets:\n  d: [1, 2\n  e: 3\n")
    assert info.value.line is not None and "line" in str(info.value)


def test_duplicate_keys_rejected():
    with pytest.raises(ParseError, match="duplicate key"):
        load_configs(MINIMAL.replace("n_samples: 4", "n_samples: 4\n    n_samples: 5"))


def test_ambiguous_placement_rejected():
    with pytest.raises(ConfigValueError):
        load_configs(MINIMAL.replace("random_location: true, ", ""))


def test_channel_out_of_range():
    text = MINIMAL.replace("- signals:", "- channel: 2\n            signals:")
    with pytest.raises(ConfigValueError):
        load_configs(text)


def test_merge_keys_supported():
    text = doc("""
        datasets:
          a: &base
            n_timesteps: 10
            n_samples: 2
            random_state: 0
            classes:
              - label: 0
                channels:
                  - signals: [{kind: trend, slope: 1}]
          b:
            <<: *base
            random_state: 5
    """)
    configs = load_configs(text)
    assert configs["b"].random_state == 5 and configs["a"].classes == configs["b"].classes


def test_fingerprint_stable_under_key_reordering(pulse_yaml):
    raw = yaml.safe_load(pulse_yaml.read_text())

    def reverse(obj):
        if isinstance(obj, dict):
            return {k: reverse(obj[k]) for k in reversed(list(obj))}
        if isinstance(obj, list):
            return [reverse(v) for v in obj]
        return obj

    text = yaml.safe_dump(reverse(raw), sort_keys=False)
    a, b = load_configs(pulse_yaml), load_configs(text)
    assert fingerprint(a["train"]) == fingerprint(b["train"])
    assert fingerprint(a["train"]) != fingerprint(a["test"])


def test_fingerprint_seed_sensitive_and_default_filling():
    a = load_configs(MINIMAL)["d"]
    b = load_configs(MINIMAL.replace("random_state: 1", "random_state: 2"))["d"]
    assert fingerprint(a) != fingerprint(b)
    c = load_configs(MINIMAL.replace("sigma: 1}", "sigma: 1}\n              - {kind: red_noise, sigma: 1}"))["d"]
    d = load_configs(MINIMAL.replace("sigma: 1}", "sigma: 1}\n              - {kind: red_noise, sigma: 1, phi: 0.9}"))["d"]
    assert fingerprint(c) == fingerprint(d)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_configs(tmp_path / "nope.yaml")


def test_build_from_minimal():
    ds = load_builders_from_config(MINIMAL)["d"].build()
    assert ds.shape == (4, 1, 20)
    assert np.all(ds.mask.sum(-1) == 5)
